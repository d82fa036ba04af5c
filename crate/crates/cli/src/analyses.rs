use rayon::prelude::*;
use serde_json::{json, Value};
use stabkit_core::discretize::{assemble_generator, continuum_frequency, DampingKind, StiffnessVariant};
use stabkit_core::evolve::{calibrated_window, decay_initial_data, simulate_with_window, MAX_STEPS};
use stabkit_core::io::{self, line_plot, DecaySummary};
use stabkit_core::kalman::{
    block_partition, boundary_example_pair, default_group_tol, eig_group, example_pair, verify_coercivity,
};
use stabkit_core::spectra::{
    branch_roots_ex51, branch_roots_ex52, branch_roots_ex53, eigenvalues, modal_reduce, optimality_exponent,
    resolvent_scan, resonant_betas, slowest_root, spectrum_report, BranchRoot, ModalDamping, ModeFrequencies,
    ScanWindow,
};
use stabkit_core::{CouplingPair64, Generator64, ModelSpec64};

use crate::failure::{At, Failure};
use crate::scenario::{Analysis, Params, Spacing};

/// Files and a JSON summary produced by one analysis.
pub struct Artifact {
    pub analysis: Analysis,
    pub summary: Value,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifact {
    fn new(analysis: Analysis, summary: Value) -> Self {
        Self {
            analysis,
            summary,
            files: Vec::new(),
        }
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> stabkit_core::Result<()>) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| Failure::Output(e.to_string()))?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    fn text(&mut self, name: &str, content: String) {
        self.files.push((name.into(), content.into_bytes()));
    }
}

pub struct Context<'a> {
    pub model: &'a ModelSpec64,
    pub generator: Option<&'a Generator64>,
    pub params: &'a Params,
    pub seed: u64,
}

impl Context<'_> {
    fn gen(&self) -> &Generator64 {
        self.generator.expect("generator assembled for this analysis")
    }
}

pub fn needs_generator(a: Analysis) -> bool {
    matches!(a, Analysis::Spectrum | Analysis::Resolvent | Analysis::Decay)
}

/// Runs independent analyses in parallel; results keep the input order.
pub fn run_all(analyses: &[Analysis], model: &ModelSpec64, params: &Params, seed: u64) -> Result<Vec<Artifact>, Failure> {
    check_applicable(analyses, model, params)?;
    let generator = if analyses.iter().any(|a| needs_generator(*a)) {
        Some(assemble_generator(model).at("assemble_generator")?)
    } else {
        None
    };
    let ctx = Context {
        model,
        generator: generator.as_ref(),
        params,
        seed,
    };
    let results: Vec<Result<Artifact, Failure>> = analyses.par_iter().map(|a| run_one(*a, &ctx)).collect();
    results.into_iter().collect()
}

fn run_one(a: Analysis, ctx: &Context) -> Result<Artifact, Failure> {
    match a {
        Analysis::Kalman => kalman(&ctx.model.pair, ctx.params.coercivity_samples, ctx.seed),
        Analysis::Spectrum => spectrum(ctx),
        Analysis::Resolvent => resolvent(ctx),
        Analysis::Decay => decay(ctx),
        Analysis::Branches => branches(ctx),
    }
}

/// Rejects analyses that do not apply to the model before any work starts.
fn check_applicable(analyses: &[Analysis], model: &ModelSpec64, params: &Params) -> Result<(), Failure> {
    for a in analyses {
        match a {
            Analysis::Branches => {
                branch_kind(model)?;
            }
            Analysis::Decay => {
                let dt = params.dt.ok_or_else(|| Failure::Usage("decay needs params.dt".into()))?;
                if !(dt > 0.0) {
                    return Err(Failure::Usage(format!("params.dt must be positive, got {dt}")));
                }
                if let Some(t) = params.t_end {
                    if !(t >= 0.0) || t / dt > MAX_STEPS {
                        return Err(Failure::Usage(format!("params.T = {t} with dt = {dt} exceeds {MAX_STEPS:e} steps")));
                    }
                }
            }
            Analysis::Resolvent => {
                if let Some(b) = &params.beta {
                    ScanWindow::new(b.lo, b.hi).at("params.beta").map_err(|e| Failure::Usage(e.to_string()))?;
                    if b.count < 2 || (b.spacing == Spacing::Geometric && !(b.lo > 0.0)) {
                        return Err(Failure::Usage("params.beta needs count >= 2 and lo > 0 for geometric spacing".into()));
                    }
                }
            }
            Analysis::Kalman | Analysis::Spectrum => {}
        }
    }
    Ok(())
}

pub fn kalman(pair: &CouplingPair64, samples: usize, seed: u64) -> Result<Artifact, Failure> {
    let n = pair.size();
    let rank = pair.kalman_rank();
    let invariant = pair.max_invariant_dim().at("max_invariant_dim")?;
    let groups = eig_group(pair.a(), default_group_tol(pair.a())).at("eig_group")?;
    let partition = block_partition(pair, &groups).at("block_partition")?;
    let coercivity = if partition.all_independent() {
        let check = verify_coercivity(&partition, samples, seed).at("verify_coercivity")?;
        json!({
            "constant": check.constant,
            "worst_slack": check.worst_slack,
            "passed": check.passed,
            "samples": check.samples,
        })
    } else {
        Value::Null
    };
    Ok(Artifact::new(
        Analysis::Kalman,
        json!({
            "size": n,
            "rank": rank,
            "max_invariant_dim": invariant,
            "satisfies_kalman": rank == n,
            "commutator_norm": pair.commutator_norm(),
            "asymmetry_defect": pair.asymmetry_defect(),
            "coercivity": coercivity,
        }),
    ))
}

fn spectrum(ctx: &Context) -> Result<Artifact, Failure> {
    let rep = spectrum_report(ctx.gen()).at("spectrum_report")?;
    let mut art = Artifact::new(
        Analysis::Spectrum,
        json!({
            "eigenvalues": rep.eigenvalues.len(),
            "abscissa": rep.abscissa,
            "max_residual": rep.max_residual(),
            "conjugate_defect": rep.conjugate_defect(),
        }),
    );
    art.csv("spectrum.csv", |w| io::write_spectrum_csv(w, &rep))?;
    if ctx.params.plots {
        let pts: Vec<(f64, f64)> = sorted_by_im(rep.eigenvalues.iter().filter(|z| z.im > 0.0).map(|z| (z.im, -z.re)));
        art.text("spectrum.svg", line_plot("damping along the spectrum", "Im λ", "-Re λ", &pts, true));
    }
    Ok(art)
}

fn sorted_by_im(it: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = it.collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn resolvent(ctx: &Context) -> Result<Artifact, Failure> {
    let gen = ctx.gen();
    let (window, count, spacing) = match &ctx.params.beta {
        Some(b) => (ScanWindow::new(b.lo, b.hi).at("params.beta")?, b.count, b.spacing),
        None => (ScanWindow::default_for(gen).at("ScanWindow::default_for")?, 24, Spacing::Resonant),
    };
    let betas = match spacing {
        Spacing::Geometric => (0..count)
            .map(|j| window.lo * (window.hi / window.lo).powf(j as f64 / (count - 1) as f64))
            .collect(),
        Spacing::Resonant => {
            // the modal pencils give the same eigenvalues far more cheaply
            let eig = match modal_reduce(ctx.model, ctx.model.grid.n(), ModeFrequencies::Discrete) {
                Ok(pencils) => {
                    let mut all = Vec::new();
                    for p in pencils {
                        all.extend(p.roots().at("modal roots")?);
                    }
                    all
                }
                Err(_) => eigenvalues(&gen.op).at("eigenvalues")?,
            };
            resonant_betas(&eig, window, count)
        }
    };
    let scan = resolvent_scan(gen, &betas, window).at("resolvent_scan")?;
    let mut art = Artifact::new(
        Analysis::Resolvent,
        json!({
            "window": [window.lo, window.hi],
            "spacing": match spacing { Spacing::Resonant => "resonant", Spacing::Geometric => "geometric" },
            "points": scan.betas.len(),
            "singular_points": scan.singular_points(),
            "fitted_exponent": scan.fitted_exponent,
            "theta_implied": scan.theta_implied,
        }),
    );
    art.csv("resolvent.csv", |w| io::write_scan_csv(w, &scan))?;
    if ctx.params.plots {
        let pts: Vec<(f64, f64)> = scan.betas.iter().copied().zip(scan.norms.iter().copied()).collect();
        art.text("resolvent.svg", line_plot("resolvent norm on the imaginary axis", "β", "‖R(iβ)‖", &pts, true));
    }
    Ok(art)
}

fn decay(ctx: &Context) -> Result<Artifact, Failure> {
    let gen = ctx.gen();
    let dt = ctx.params.dt.expect("checked");
    let ((lo, hi), abscissa) = calibrated_window(gen).at("calibrated_window")?;
    let t_end = match ctx.params.t_end {
        Some(t) => t,
        None if hi.is_finite() => hi,
        None => return Err(Failure::Usage("the model has no decaying abscissa; give params.T".into())),
    };
    if t_end / dt > MAX_STEPS {
        return Err(Failure::Usage(format!("T = {t_end} with dt = {dt} exceeds {MAX_STEPS:e} steps")));
    }
    let window = match ctx.params.decay_window {
        Some([a, b]) => (a, b),
        None => (lo, hi.min(t_end)),
    };
    let s0 = decay_initial_data(ctx.model, gen).at("decay_initial_data")?;
    let mut rep = simulate_with_window(gen, &s0, dt, t_end, Some(window)).at("simulate")?;
    rep.abscissa = Some(abscissa);
    let ratio = rep.ratio_curve();
    let ratio_bounds = (!ratio.is_empty()).then(|| {
        let (mn, mx) = ratio
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, r)| (a.min(*r), b.max(*r)));
        [mn, mx]
    });
    let summary = DecaySummary::from_report(&rep);
    let mut art = Artifact::new(
        Analysis::Decay,
        json!({
            "theta": summary.theta,
            "window": summary.window,
            "graph_norm0": summary.graph_norm0,
            "abscissa": summary.abscissa,
            "predicted_theta": ctx.model.damping.predicted_theta(),
            "exponential_regime": rep.exponential_regime,
            "ratio_bounds": ratio_bounds,
            "max_residual": rep.max_residual(),
            "max_energy_growth": rep.max_energy_growth,
            "note": "a finite truncation decays exponentially at its abscissa rate for large t; the fitted rate describes the transient before that",
        }),
    );
    art.csv("decay.csv", |w| io::write_decay_csv(w, &rep))?;
    art.text("decay.json", serde_json::to_string_pretty(&summary).expect("serializable") + "\n");
    if ctx.params.plots {
        let pts: Vec<(f64, f64)> = rep.times.iter().copied().zip(rep.energies.iter().copied()).collect();
        art.text("decay.svg", line_plot("energy decay", "t", "E(t)", &pts, true));
    }
    Ok(art)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    CoupledViscous,
    CoupledKelvinVoigt,
    Tip,
    /// Uniform damping with another pair: roots only, no prediction.
    Modal(ModalDamping),
}

pub fn branch_kind(model: &ModelSpec64) -> Result<BranchKind, Failure> {
    let same = |p: &CouplingPair64| model.pair.a() == p.a() && model.pair.d() == p.d();
    let unshifted = model.stiffness.shift == 0.0;
    match (&model.damping, model.stiffness.variant) {
        (DampingKind::BoundaryTip, StiffnessVariant::WaveTip) if unshifted && same(&boundary_example_pair()) => {
            Ok(BranchKind::Tip)
        }
        (d, StiffnessVariant::WaveDirichlet) if d.is_uniform() => {
            let damping = match d {
                DampingKind::KelvinVoigt { .. } => ModalDamping::KelvinVoigt,
                _ => ModalDamping::Viscous,
            };
            Ok(match (damping, unshifted && same(&example_pair())) {
                (ModalDamping::Viscous, true) => BranchKind::CoupledViscous,
                (ModalDamping::KelvinVoigt, true) => BranchKind::CoupledKelvinVoigt,
                (m, false) => BranchKind::Modal(m),
            })
        }
        _ => Err(Failure::Usage(
            "branches needs uniform damping on wave_dirichlet or the tip-damped example model".into(),
        )),
    }
}

fn branches(ctx: &Context) -> Result<Artifact, Failure> {
    let kind = branch_kind(ctx.model)?;
    let default = if kind == BranchKind::Tip { [3, 40] } else { [5, 50] };
    let [k0, k1] = ctx.params.k_range.unwrap_or(default);
    if k0 == 0 || k1 < k0 {
        return Err(Failure::Usage(format!("params.k_range [{k0}, {k1}] must satisfy 1 <= lo <= hi")));
    }
    let ks = k0..=k1;
    let roots: Vec<BranchRoot<f64>> = match kind {
        BranchKind::CoupledViscous => branch_roots_ex51(ks).at("branch_roots")?,
        BranchKind::CoupledKelvinVoigt => branch_roots_ex52(ks).at("branch_roots")?,
        BranchKind::Tip => branch_roots_ex53(ks).at("branch_roots")?,
        BranchKind::Modal(damping) => ks
            .map(|k| {
                let nu = continuum_frequency::<f64>(k);
                let (beta, residual) = slowest_root(&ctx.model.pair, nu, ctx.model.stiffness.shift, damping)?;
                Ok(BranchRoot {
                    index: k,
                    nu,
                    beta,
                    prediction: num_complex_nan(),
                    residual,
                })
            })
            .collect::<stabkit_core::Result<_>>()
            .at("slowest_root")?,
    };
    let betas: Vec<_> = roots.iter().map(|r| r.beta).collect();
    let theta = if betas.iter().all(|b| b.re < 0.0) { optimality_exponent(&betas).ok() } else { None };
    let mut art = Artifact::new(
        Analysis::Branches,
        json!({
            "kind": format!("{kind:?}"),
            "range": [k0, k1],
            "optimality_theta": theta,
            "max_residual": roots.iter().map(|r| r.residual).fold(0.0, f64::max),
        }),
    );
    art.csv("branches.csv", |w| io::write_branches_csv(w, &roots))?;
    if ctx.params.plots {
        let pts: Vec<(f64, f64)> = roots.iter().map(|r| (r.beta.im, -r.beta.re)).collect();
        art.text("branches.svg", line_plot("slowest branch", "Im β", "-Re β", &pts, true));
    }
    Ok(art)
}

fn num_complex_nan() -> num_complex::Complex<f64> {
    num_complex::Complex::new(f64::NAN, f64::NAN)
}
