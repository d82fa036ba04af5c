use std::io::Write;

use crate::error::{Error, Result};
use crate::evolve::DecayReport;
use crate::spectra::{BranchRoot, ResolventScan, SpectrumReport};

pub const SPECTRUM_HEADER: [&str; 3] = ["re", "im", "residual"];
pub const SCAN_HEADER: [&str; 2] = ["beta", "norm"];
pub const BRANCHES_HEADER: [&str; 6] = ["index", "re", "im", "pred_re", "pred_im", "rel_err"];
pub const DECAY_HEADER: [&str; 3] = ["t", "E", "residual"];

/// Shortest round-trip decimal, switching to exponent form for very large
/// or small magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let io = |e: ::csv::Error| Error::Io(e.to_string());
    let mut w = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_spectrum_csv<W: Write>(out: W, r: &SpectrumReport<f64>) -> Result<()> {
    table(
        out,
        &SPECTRUM_HEADER,
        r.eigenvalues
            .iter()
            .zip(&r.residuals)
            .map(|(z, res)| vec![num(z.re), num(z.im), num(*res)]),
    )
}

pub fn write_scan_csv<W: Write>(out: W, s: &ResolventScan<f64>) -> Result<()> {
    table(
        out,
        &SCAN_HEADER,
        s.betas.iter().zip(&s.norms).map(|(b, v)| vec![num(*b), num(*v)]),
    )
}

pub fn write_branches_csv<W: Write>(out: W, roots: &[BranchRoot<f64>]) -> Result<()> {
    table(
        out,
        &BRANCHES_HEADER,
        roots.iter().map(|r| {
            vec![
                r.index.to_string(),
                num(r.beta.re),
                num(r.beta.im),
                num(r.prediction.re),
                num(r.prediction.im),
                num(r.rel_err()),
            ]
        }),
    )
}

pub fn write_decay_csv<W: Write>(out: W, r: &DecayReport<f64>) -> Result<()> {
    table(
        out,
        &DECAY_HEADER,
        r.times
            .iter()
            .zip(&r.energies)
            .zip(&r.dissipation_residuals)
            .map(|((t, e), res)| vec![num(*t), num(*e), num(*res)]),
    )
}
