#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analyses;
mod failure;
mod scenario;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use stabkit_core::io::{read_matrix, ModelDocument};
use stabkit_core::CouplingPair64;

use analyses::{kalman, run_all, Artifact};
use failure::{At, Failure};
use scenario::{Analysis, BetaGrid, Params, Scenario, Spacing};

#[derive(Parser)]
#[command(name = "stabkit", version, about = "Stability analysis of weakly coupled damped wave systems")]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to STABKIT_THREADS).
    #[arg(long, global = true, env = "STABKIT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { scenario: PathBuf },
    /// Kalman rank, commutator and coercivity of a coupling pair.
    Kalman {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "D")]
        d: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Eigenvalues of the discretized generator.
    Spectrum(ModelArg),
    /// Resolvent norm along the imaginary axis.
    Resolvent {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 24)]
        count: usize,
        /// Use a geometric grid instead of resonant frequencies.
        #[arg(long)]
        geometric: bool,
    },
    /// Energy decay of smooth initial data.
    Decay {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        dt: f64,
        /// Final time; defaults to the end of the calibrated window.
        #[arg(long = "T")]
        t_end: Option<f64>,
    },
    /// Compare branch constants of a bundled example with the printed limits.
    VerifyExample { id: String },
}

#[derive(Args)]
struct ModelArg {
    /// Model document (JSON).
    #[arg(long)]
    model: PathBuf,
}

fn load_model(arg: &ModelArg) -> Result<stabkit_core::ModelSpec64, Failure> {
    let text = std::fs::read_to_string(&arg.model).map_err(|e| Failure::Usage(format!("{}: {e}", arg.model.display())))?;
    ModelDocument::parse(&text).and_then(|d| d.to_model()).at("model")
}

fn write_outputs(dir: &Path, name: &str, seed: u64, artifacts: &[Artifact]) -> Result<(), Failure> {
    let out = |e: std::io::Error| Failure::Output(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(out)?;
    let mut analyses = Map::new();
    for art in artifacts {
        for (file, bytes) in &art.files {
            std::fs::write(dir.join(file), bytes).map_err(out)?;
        }
        analyses.insert(art.analysis.name().into(), art.summary.clone());
    }
    let summary = json!({ "name": name, "seed": seed, "analyses": Value::Object(analyses) });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("serializable") + "\n").map_err(out)
}

fn print_summary(artifacts: &[Artifact]) {
    let mut m = Map::new();
    for art in artifacts {
        m.insert(art.analysis.name().into(), art.summary.clone());
    }
    println!("{}", serde_json::to_string_pretty(&Value::Object(m)).expect("serializable"));
}

fn single(analysis: Analysis, model: &ModelArg, params: Params, cli: &Cli) -> Result<(), Failure> {
    let model = load_model(model)?;
    let artifacts = run_all(&[analysis], &model, &params, cli.seed)?;
    if let Some(dir) = &cli.out {
        write_outputs(dir, analysis.name(), cli.seed, &artifacts)?;
    }
    print_summary(&artifacts);
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Run { scenario } => {
            let sc = Scenario::load(scenario)?;
            let model = sc.model()?;
            if sc.analyses.is_empty() {
                return Ok(true);
            }
            let artifacts = run_all(&sc.analyses, &model, &sc.params, cli.seed)?;
            let dir = sc.output_dir(cli.out.as_deref());
            write_outputs(&dir, &sc.name, cli.seed, &artifacts)?;
            println!("{}: wrote {}", sc.name, dir.display());
            Ok(true)
        }
        Command::Kalman { a, d, samples } => {
            let (a, da) = read_matrix(a).at("--A")?;
            let (d, dd) = read_matrix(d).at("--D")?;
            let pair = CouplingPair64::new(a, d).map_err(|e| Failure::Usage(e.to_string()))?;
            let art = kalman(&pair, *samples, cli.seed)?;
            let s = &art.summary;
            println!("rank {}", s["rank"]);
            println!("max invariant dim {}", s["max_invariant_dim"]);
            println!("commutator {}", s["commutator_norm"]);
            match s["coercivity"].get("constant") {
                Some(c) => println!("coercivity {c} (worst slack {})", s["coercivity"]["worst_slack"]),
                None => println!("coercivity none (Kalman condition fails)"),
            }
            if da.max(dd) > 0.0 {
                println!("asymmetry defect {}", da.max(dd));
            }
            if let Some(dir) = &cli.out {
                write_outputs(dir, "kalman", cli.seed, std::slice::from_ref(&art))?;
            }
            Ok(true)
        }
        Command::Spectrum(m) => single(Analysis::Spectrum, m, Params::default(), cli).map(|_| true),
        Command::Resolvent { model, lo, hi, count, geometric } => {
            let beta = match (lo, hi) {
                (Some(lo), Some(hi)) => Some(BetaGrid {
                    lo: *lo,
                    hi: *hi,
                    count: *count,
                    spacing: if *geometric { Spacing::Geometric } else { Spacing::Resonant },
                }),
                (None, None) => None,
                _ => return Err(Failure::Usage("give both --lo and --hi".into())),
            };
            single(Analysis::Resolvent, model, Params { beta, ..Params::default() }, cli).map(|_| true)
        }
        Command::Decay { model, dt, t_end } => {
            let params = Params {
                dt: Some(*dt),
                t_end: *t_end,
                ..Params::default()
            };
            single(Analysis::Decay, model, params, cli).map(|_| true)
        }
        Command::VerifyExample { id } => verify::verify_example(id),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().expect("thread pool configured once");
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
