use std::path::{Path, PathBuf};

use serde::Deserialize;
use stabkit_core::io::ModelDocument;
use stabkit_core::ModelSpec64;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Kalman,
    Spectrum,
    Resolvent,
    Decay,
    Branches,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kalman => "kalman",
            Self::Spectrum => "spectrum",
            Self::Resolvent => "resolvent",
            Self::Decay => "decay",
            Self::Branches => "branches",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// Imaginary parts of the least damped eigenvalues.
    #[default]
    Resonant,
    Geometric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

fn default_count() -> usize {
    24
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Frequencies for the resolvent scan; also the fit window.
    pub beta: Option<BetaGrid>,
    /// Inclusive mode range for the branch table.
    pub k_range: Option<[usize; 2]>,
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    /// Overrides the calibrated decay fit window.
    pub decay_window: Option<[f64; 2]>,
    #[serde(default = "default_coercivity_samples")]
    pub coercivity_samples: usize,
    #[serde(default = "default_true")]
    pub plots: bool,
}

fn default_coercivity_samples() -> usize {
    1000
}

impl Default for Params {
    fn default() -> Self {
        Self {
            beta: None,
            k_range: None,
            dt: None,
            t_end: None,
            decay_window: None,
            coercivity_samples: default_coercivity_samples(),
            plots: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: ModelDocument,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub params: Params,
    pub output: Option<PathBuf>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let s: Self = serde_json::from_str(text).map_err(|e| Failure::Usage(format!("scenario: {e}")))?;
        if s.name.is_empty() || s.name.contains(['/', '\\']) {
            return Err(Failure::Usage(format!("scenario name {:?} is not a plain file name", s.name)));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = s.analyses.iter().find(|a| !seen.insert(**a)) {
            return Err(Failure::Usage(format!("analysis {} listed twice", dup.name())));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn model(&self) -> Result<ModelSpec64, Failure> {
        self.model.to_model().map_err(|e| Failure::Usage(e.to_string()))
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.output) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => p.clone(),
            (None, None) => PathBuf::from("out").join(&self.name),
        }
    }
}

pub const BUNDLED: [(&str, &str); 6] = [
    ("ex41", include_str!("../../../scenarios/ex41.json")),
    ("ex43", include_str!("../../../scenarios/ex43.json")),
    ("ex45", include_str!("../../../scenarios/ex45.json")),
    ("ex51", include_str!("../../../scenarios/ex51.json")),
    ("ex52", include_str!("../../../scenarios/ex52.json")),
    ("ex53", include_str!("../../../scenarios/ex53.json")),
];

pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::parse(text).expect("bundled scenarios are valid"))
}
