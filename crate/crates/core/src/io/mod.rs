//! JSON documents for matrices and models, CSV tables and SVG plots.

mod csv;
mod svg;

pub use self::csv::{write_branches_csv, write_decay_csv, write_scan_csv, write_spectrum_csv, BRANCHES_HEADER, DECAY_HEADER, SCAN_HEADER, SPECTRUM_HEADER};
pub use self::svg::line_plot;

use serde::{Deserialize, Serialize};

use crate::discretize::{DampingKind, Grid1D, ModelSpec, StiffnessKind, StiffnessVariant};
use crate::error::{Error, Result};
use crate::evolve::DecayReport;
use crate::kalman::CouplingPair;
use crate::linalg::Matrix;

/// Reads a JSON array of rows and symmetrizes it, returning the matrix
/// and its asymmetry defect `max |M − Mᵀ| / 2`.
pub fn parse_matrix(text: &str) -> Result<(Matrix<f64>, f64)> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| Error::Schema(format!("matrix: {e}")))?;
    let m = Matrix::from_rows(&rows).map_err(|e| Error::Schema(format!("matrix: {e}")))?;
    if !m.is_square() {
        return Err(Error::Schema(format!("matrix must be square, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m.symmetrized())
}

pub fn read_matrix(path: &std::path::Path) -> Result<(Matrix<f64>, f64)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn matrix_to_json(m: &Matrix<f64>) -> String {
    serde_json::to_string(&m.to_rows()).expect("finite matrix serializes")
}

/// Serialized form of a [`ModelSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub n: usize,
    pub stiffness: StiffnessDocument,
    pub damping: DampingDocument,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StiffnessDocument {
    pub variant: String,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingDocument {
    pub variant: String,
    #[serde(default)]
    pub params: DampingParams,
}

/// `lo`, `hi` for `viscous`; `a` for `kelvin_voigt` (a number or one
/// value per unknown); nothing for `boundary_tip`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Uniform(f64),
    Nodal(Vec<f64>),
}

fn schema(e: Error) -> Error {
    match e {
        Error::Schema(_) => e,
        other => Error::Schema(other.to_string()),
    }
}

impl ModelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("model: {e}")))
    }

    pub fn to_model(&self) -> Result<ModelSpec<f64>> {
        let grid = Grid1D::new(self.n).map_err(schema)?;
        let variant = match self.stiffness.variant.as_str() {
            "wave_dirichlet" => StiffnessVariant::WaveDirichlet,
            "wave_tip" => StiffnessVariant::WaveTip,
            "beam_clamped" => StiffnessVariant::BeamClamped,
            other => return Err(Error::Schema(format!("unknown stiffness variant {other:?}"))),
        };
        let stiffness = StiffnessKind::new(variant, self.stiffness.shift).map_err(schema)?;
        let p = &self.damping.params;
        let damping = match self.damping.variant.as_str() {
            "viscous" => {
                if p.a.is_some() {
                    return Err(Error::Schema("viscous damping takes lo and hi only".into()));
                }
                DampingKind::viscous(p.lo.unwrap_or(0.0), p.hi.unwrap_or(1.0)).map_err(schema)?
            }
            "kelvin_voigt" => {
                if p.lo.is_some() || p.hi.is_some() {
                    return Err(Error::Schema("kelvin_voigt damping takes a only".into()));
                }
                match &p.a {
                    None => DampingKind::kelvin_voigt_uniform(&grid, 1.0),
                    Some(Coefficient::Uniform(v)) => DampingKind::kelvin_voigt_uniform(&grid, *v),
                    Some(Coefficient::Nodal(a)) => DampingKind::kelvin_voigt(a.clone()),
                }
                .map_err(schema)?
            }
            "boundary_tip" => {
                if *p != DampingParams::default() {
                    return Err(Error::Schema("boundary_tip damping takes no parameters".into()));
                }
                DampingKind::BoundaryTip
            }
            other => return Err(Error::Schema(format!("unknown damping variant {other:?}"))),
        };
        let pair = CouplingPair::from_rows(&self.a, &self.d).map_err(schema)?;
        ModelSpec::new(grid, stiffness, damping, pair).map_err(schema)
    }

    pub fn from_model(model: &ModelSpec<f64>) -> Self {
        let params = match &model.damping {
            DampingKind::Viscous { lo, hi } => DampingParams {
                lo: Some(*lo),
                hi: Some(*hi),
                a: None,
            },
            DampingKind::KelvinVoigt { a } => DampingParams {
                a: Some(Coefficient::Nodal(a.clone())),
                ..Default::default()
            },
            DampingKind::BoundaryTip => DampingParams::default(),
        };
        Self {
            n: model.grid.n(),
            stiffness: StiffnessDocument {
                variant: model.stiffness.variant.name().into(),
                shift: model.stiffness.shift,
            },
            damping: DampingDocument {
                variant: model.damping.name().into(),
                params,
            },
            a: model.pair.a().to_rows(),
            d: model.pair.d().to_rows(),
        }
    }
}

/// JSON summary of a decay run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub theta: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub graph_norm0: f64,
    pub abscissa: Option<f64>,
}

impl DecaySummary {
    pub fn from_report(r: &DecayReport<f64>) -> Self {
        Self {
            theta: r.fitted_theta,
            window: r.fit_window.map(|(a, b)| [a, b]),
            graph_norm0: r.graph_norm0,
            abscissa: r.abscissa,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_symmetrized() {
        let (m, defect) = parse_matrix("[[1, 2], [2.5, 3]]").unwrap();
        assert_eq!(m[(0, 1)], 2.25);
        assert_eq!(m[(1, 0)], 2.25);
        assert!((defect - 0.25).abs() < 1e-15);
        assert!(matches!(parse_matrix("[[1, 2]]"), Err(Error::Schema(_))));
        assert!(matches!(parse_matrix("[[1, \"x\"]]"), Err(Error::Schema(_))));
    }

    #[test]
    fn model_round_trip() {
        for model in [
            ModelSpec::<f64>::viscous_example(7).unwrap(),
            ModelSpec::<f64>::kelvin_voigt_example(7).unwrap(),
            ModelSpec::<f64>::boundary_example(7).unwrap(),
        ] {
            let doc = ModelDocument::from_model(&model);
            let text = serde_json::to_string(&doc).unwrap();
            let back = ModelDocument::parse(&text).unwrap().to_model().unwrap();
            assert_eq!(back, model);
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let good = r#"{"n": 5, "stiffness": {"variant": "wave_dirichlet"}, "damping": {"variant": "viscous", "params": {"lo": 0.5, "hi": 1}}, "A": [[0]], "D": [[1]]}"#;
        assert!(ModelDocument::parse(good).unwrap().to_model().is_ok());
        let extra = good.replace("\"n\": 5", "\"n\": 5, \"m\": 1");
        assert!(matches!(ModelDocument::parse(&extra), Err(Error::Schema(_))));
        let bad_variant = good.replace("wave_dirichlet", "plate");
        assert!(matches!(ModelDocument::parse(&bad_variant).unwrap().to_model(), Err(Error::Schema(_))));
        let bad_param = good.replace("\"lo\": 0.5", "\"a\": 1");
        assert!(matches!(ModelDocument::parse(&bad_param).unwrap().to_model(), Err(Error::Schema(_))));
    }
}
