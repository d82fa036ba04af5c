use std::f64::consts::PI;

use stabkit_core::spectra::{branch_roots_ex51, branch_roots_ex52, branch_roots_ex53, optimality_exponent, BranchRoot};

use crate::failure::{At, Failure};
use crate::scenario::bundled;

struct Check {
    label: String,
    pass: bool,
}

fn check(label: impl Into<String>, pass: bool) -> Check {
    Check { label: label.into(), pass }
}

fn range(name: &str, default: [usize; 2]) -> std::ops::RangeInclusive<usize> {
    let [a, b] = bundled(name).and_then(|s| s.params.k_range).unwrap_or(default);
    a..=b
}

fn theta(roots: &[BranchRoot<f64>]) -> Result<f64, Failure> {
    optimality_exponent(&roots.iter().map(|r| r.beta).collect::<Vec<_>>()).at("optimality_exponent")
}

fn coupled(roots: &[BranchRoot<f64>], power: i32, expect_theta: f64, theta_tol: f64) -> Result<Vec<Check>, Failure> {
    let last = roots.last().ok_or_else(|| Failure::Usage("empty mode range".into()))?;
    let c = last.beta.re * last.nu.powi(power);
    let limit = -2.0 / 125.0;
    let t = theta(roots)?;
    let worst = roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(vec![
        check(
            format!("Re·ν^{power} → -2/125 at k={} ({c:.7} vs {limit:.7})", last.index),
            (c - limit).abs() <= 0.05 * limit.abs(),
        ),
        check(format!("θ → {expect_theta} ({t:.4})"), (t - expect_theta).abs() <= theta_tol),
        check(format!("characteristic residual ≤ 1e-10 ({worst:.2e})"), worst <= 1e-10),
    ])
}

fn tip(roots: &[BranchRoot<f64>]) -> Result<Vec<Check>, Failure> {
    let last = roots.last().ok_or_else(|| Failure::Usage("empty mode range".into()))?;
    let n = last.index as f64;
    let c = last.beta.re * n * n;
    let limit = -9.0 / (64.0 * PI * PI);
    let im_ok = roots.iter().all(|r| {
        let k = r.index as f64;
        (r.beta.im - (k * PI + PI / 2.0 + 1.0 / (8.0 * k * PI))).abs() <= 1e-3 / k
    });
    let shift = last.beta.im - (n * PI + PI / 2.0);
    let worst = roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(vec![
        check(
            format!("Re·n² → -9/(64π²) at n={} ({c:.6} vs {limit:.6})", last.index),
            (c - limit).abs() <= 0.05 * limit.abs(),
        ),
        check(
            format!("Im - (nπ + π/2) → 1/(8nπ) within 1e-3/n (n={}: {shift:.6} vs {:.6})", last.index, 1.0 / (8.0 * n * PI)),
            im_ok,
        ),
        check(format!("|f(β)| ≤ 1e-10·scale ({worst:.2e})"), worst <= 1e-10),
        check("Re β < 0 on the branch", roots.iter().all(|r| r.beta.re < 0.0)),
    ])
}

/// Prints one line per check and returns whether all passed.
pub fn verify_example(id: &str) -> Result<bool, Failure> {
    let checks = match id {
        "5.1" => coupled(&branch_roots_ex51(range("ex51", [5, 50])).at("branch_roots_ex51")?, 2, 0.5, 0.05)?,
        "5.2" => coupled(&branch_roots_ex52(range("ex52", [5, 50])).at("branch_roots_ex52")?, 4, 0.25, 0.03)?,
        "5.3" => tip(&branch_roots_ex53(range("ex53", [3, 40])).at("branch_roots_ex53")?)?,
        other => return Err(Failure::Usage(format!("unknown example {other:?}; expected 5.1, 5.2 or 5.3"))),
    };
    for c in &checks {
        println!("{id} {}: {}", c.label, if c.pass { "PASS" } else { "FAIL" });
    }
    Ok(checks.iter().all(|c| c.pass))
}
