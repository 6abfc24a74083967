use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riemap_core::rmap::jet;
use riemap_core::scenario::{
    builtin_names, builtin_source, exit_code, load_scenario_or_builtin, run_full, sample_table, Overrides, RunOutcome,
    RunReport, Scenario, Verdict,
};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

/// Check second fundamental forms, isotropy and curve transport of smooth
/// maps described by scenario files.
#[derive(Parser)]
#[command(name = "riemap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in a scenario.
    Check {
        /// Scenario file, or the name of a built-in scenario.
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// Write the machine-readable report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the curve sample table into this directory.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Record wall time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Dump the jet and the tangent space splits at one point.
    Inspect {
        scenario: String,
        #[arg(long, default_value_t = 0)]
        point: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write the curve sample table only.
    Curve {
        scenario: String,
        #[arg(long)]
        emit: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// List built-in scenarios.
    Scenarios,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    tol_isometry: Option<f64>,
    #[arg(long)]
    tol_isotropy: Option<f64>,
    #[arg(long)]
    tol_spread: Option<f64>,
    #[arg(long)]
    tol_condition: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Curve step size.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, short)]
    quiet: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            isometry: self.tol_isometry,
            isotropy: self.tol_isotropy,
            spread: self.tol_spread,
            condition: self.tol_condition,
            seed: self.seed,
            step: self.step,
        }
    }

    fn load(&self, name: &str) -> Result<Scenario, String> {
        load_scenario_or_builtin(name)
            .and_then(|s| s.with_overrides(&self.overrides()))
            .map_err(|e| format!("{name}: {e}"))
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("riemap: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Scenarios => {
            for name in builtin_names() {
                let description = builtin_source(name)
                    .and_then(|src| src.lines().find_map(|l| l.trim().strip_prefix("description = ")))
                    .unwrap_or("");
                println!("{name:<22}{description}");
            }
            Ok(0)
        }
        Command::Check {
            scenario,
            common,
            report,
            emit,
            timing,
        } => {
            let s = common.load(&scenario)?;
            let outcome = run_full(&s, timing);
            if let Some(path) = &report {
                write(path, &outcome.report.to_json())?;
            }
            if let Some(dir) = &emit {
                emit_table(dir, &outcome)?;
            }
            if !common.quiet {
                print!("{}", summary(&s, &outcome.report));
            }
            Ok(exit_code(&outcome.report) as u8)
        }
        Command::Curve { scenario, emit, common } => {
            let s = common.load(&scenario)?;
            if s.spec.curve.is_none() {
                return Err(format!("{scenario}: no [curve] section"));
            }
            let outcome = run_full(&s, false);
            let path = emit_table(&emit, &outcome)?;
            if !common.quiet {
                println!("{}", path.display());
            }
            Ok(exit_code(&outcome.report) as u8)
        }
        Command::Inspect {
            scenario,
            point,
            common,
        } => {
            let s = common.load(&scenario)?;
            let p = s
                .spec
                .points
                .get(point)
                .ok_or_else(|| format!("point {point} out of range ({} points)", s.spec.points.len()))?;
            match jet(&s.map, p) {
                Ok(jt) => {
                    if !common.quiet {
                        print!("{}", inspect(&s, point, &jt));
                    }
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("riemap: point {point}: {e}");
                    Ok(1)
                }
            }
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit_table(dir: &Path, outcome: &RunOutcome) -> Result<PathBuf, String> {
    let report = &outcome.report;
    let transport = report.curve.as_ref().and_then(|c| c.transport.as_ref());
    let (Some(curve), Some(transport)) = (&outcome.curve, transport) else {
        let why = report
            .curve
            .as_ref()
            .and_then(|c| c.error.clone())
            .unwrap_or_else(|| "no curve".into());
        return Err(format!("no sample table: {why}"));
    };
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(format!("{}_curve.csv", report.scenario.name));
    write(&path, &sample_table(curve, transport))?;
    Ok(path)
}

fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn summary(s: &Scenario, r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}: {}", r.scenario.name, s.map);
    for p in &r.points {
        let _ = write!(out, "point {} {}: ", p.index, vec_str(&p.point));
        if let Some(e) = &p.error {
            let _ = writeln!(out, "error: {e}");
            continue;
        }
        let _ = write!(out, "rank {}", p.rank);
        if let Some(c) = &p.riemannian {
            let _ = write!(out, ", isometry residual {:.3e}", c.isometry_residual);
        }
        if let Some(i) = &p.isotropy {
            let _ = write!(
                out,
                ", lambda {:.6} (spread {:.3e}) {:?}",
                i.lambda_mean,
                i.lambda_spread(),
                i.verdict
            );
        }
        if let Some(u) = &p.umbilicity {
            let _ = write!(out, ", umbilic residual {:.3e}", u.residual);
        }
        out.push('\n');
    }
    if let Some(c) = &r.curve {
        if let Some(t) = &c.transport {
            let _ = writeln!(
                out,
                "curve kappa {} tau {}: {} samples, drift {:.3e}, image kappa spread {:.3e}, eq31 residual {:.3e}",
                t.source_kappa, t.source_tau, t.sample_count, t.horizontality_drift, t.kappa_spread, t.eq31_residual
            );
            if let (Some(u), Some(h)) = (t.umbilic_residual, t.helix_condition_residual) {
                let _ = writeln!(
                    out,
                    "  helix condition: umbilic {u:.3e}, residual {h:.3e}, holds {:?}; image helix {:?} (tau spread {:?}, eq41 {:?})",
                    t.condition_holds.unwrap_or(false),
                    t.image_is_helix.unwrap_or(false),
                    t.tau_spread,
                    t.eq41_residual
                );
            }
        }
        if let Some(t) = &c.theorem31 {
            let _ = writeln!(
                out,
                "circle trials kappa {}: {}/{} completed, max spread {}, {:?}",
                t.kappa,
                t.completed,
                t.trials.len(),
                t.max_spread.map_or("n/a".to_string(), |s| format!("{s:.3e}")),
                t.isotropy.verdict
            );
        }
        for n in &c.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        if let Some(e) = &c.error {
            let _ = writeln!(out, "curve error: {e}");
        }
    }
    for f in &r.failures {
        let _ = writeln!(out, "  failed: {f}");
    }
    let verdict = match (r.verdict, r.informational) {
        (Verdict::Pass, _) => "PASS",
        (Verdict::Fail, true) => "FAIL (informational)",
        (Verdict::Fail, false) => "FAIL",
    };
    let _ = writeln!(out, "verdict: {verdict}");
    out
}

fn inspect(s: &Scenario, index: usize, jt: &riemap_core::rmap::MapJet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", s.map);
    let _ = writeln!(out, "point {index}: p = {}", vec_str(jt.p.as_slice()));
    let _ = writeln!(out, "T(p) = {}", vec_str(jt.q.as_slice()));
    let _ = writeln!(
        out,
        "rank {}; singular values {}",
        jt.rank,
        vec_str(&jt.singular_values)
    );
    let _ = writeln!(out, "isometry residual {:.3e}", jt.isometry_residual());
    let _ = write!(out, "jacobian{:.6}", jt.j);
    let _ = write!(out, "source metric{:.6}", jt.g1);
    let _ = write!(out, "target metric{:.6}", jt.g2);
    for (label, basis) in [
        ("kernel", &jt.ker_basis),
        ("horizontal", &jt.horiz_basis),
        ("range", &jt.range_basis),
        ("normal", &jt.normal_basis),
    ] {
        let _ = writeln!(out, "{label} basis ({}):", basis.len());
        for v in basis.iter() {
            let _ = writeln!(out, "  {}", vec_str(v.as_slice()));
        }
    }
    out
}
