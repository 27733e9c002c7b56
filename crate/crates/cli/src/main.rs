//! `g2hym`: self-tests, flow runs, diagnostics on saved runs, monad reports.
//!
//! Exit codes: 0 all enabled checks pass, 1 a check or monitor failed,
//! 2 usage or input error.

mod run_dir;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use g2hym::config::RunConfig;
use g2hym::diagnostics::{
    beta_from_samples, calibrate_k_prime, claim_lower_bound, lattice_chern_weil, parabola_check, slice_fhat_l2,
    slice_positions,
};
use g2hym::donaldson::flow_constant;
use g2hym::heat_flow::{decay_profile, lambda_bar, monitor_max_principles, run_from, slice_sup, FlowState};
use g2hym::lattice_model::{curvature, curvature_norm_sq, Envelope};
use g2hym::monad_chern::{chern_of_monad, restriction_chern, sample_monad};

use run_dir::{MonitorResult, RunDir};

#[derive(Parser)]
#[command(name = "g2hym", version, about = "Lattice Hermitian Yang-Mills flow and G2 algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every exact G2 identity and print the table.
    AlgebraSelftest,
    /// Integrate the flow described by a configuration file.
    FlowRun {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Post-process a directory written by `flow-run`.
    Diagnostics {
        #[command(subcommand)]
        which: Diag,
    },
    /// Chern data and an exactness sample for a random instanton monad.
    Monad {
        #[arg(long)]
        c: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Degree of the divisor used for the restriction sequence.
        #[arg(long, default_value_t = 4)]
        d: i64,
    },
}

#[derive(Subcommand)]
enum Diag {
    /// Recomputes the Donaldson functional and its flow identity.
    NFunctional {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Parabola, Moser and slab lower-bound reports over the snapshots.
    Claim {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Energy bound and Chern–Weil split of the final metric.
    Energy {
        #[arg(long)]
        trace: PathBuf,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Check(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Check(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = match cli.command {
        Command::AlgebraSelftest => algebra_selftest(),
        Command::FlowRun { config, out } => flow_run(&config, &out),
        Command::Diagnostics { which } => match which {
            Diag::NFunctional { trace } => diag_n_functional(&trace),
            Diag::Claim { trace } => diag_claim(&trace),
            Diag::Energy { trace } => diag_energy(&trace),
        },
        Command::Monad { c, seed, d } => monad(c, seed, d),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("FAILED: {m}");
            ExitCode::from(1)
        }
    }
}

fn algebra_selftest() -> Outcome {
    let rows = g2hym::g2_algebra::selftest();
    let width = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0);
    for r in &rows {
        let pad = width - r.name.chars().count();
        println!("{}{}  {}", r.name, " ".repeat(pad), if r.passed { "ok" } else { "FAIL" });
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        println!("{} identities checked", rows.len());
        Ok(())
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

fn load_config(path: &Path) -> Result<(RunConfig, String), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((cfg, text))
}

fn flow_run(config: &Path, out: &Path) -> Outcome {
    let (cfg, text) = load_config(config)?;
    let mut dir = RunDir::create(out, &cfg, &text).map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = cfg.build()?;
    let trace = run_from(&problem, &cfg.flow, problem.h0.clone(), cfg.snapshots)?;
    dir.write_trace(&problem.chart, &trace)?;

    if cfg.monitor_enabled("max_principle") {
        let r = monitor_max_principles(&trace);
        dir.monitor(MonitorResult::new("max_principle", "maximum principle for ê and σ", r.passed, &r));
    }
    if cfg.monitor_enabled("decay") && problem.chart.has_cylinder() {
        let init = FlowState::initial(&problem, problem.h0.clone())?;
        let b = init.sup_e();
        let r0 = decay_profile(&problem.chart, &init.e_hat, 0.0, b);
        let rt = decay_profile(&problem.chart, &trace.final_state.e_hat, trace.final_state.t, b);
        let slope_ok = match (cfg.twist.envelope, r0.slope) {
            (Envelope::Exp { rate }, Some(s)) => s <= -0.9 * rate,
            _ => true,
        };
        let passed = slope_ok && rt.violations == 0;
        dir.monitor(MonitorResult::new(
            "decay",
            "exponential decay of ê along the tube",
            passed,
            &json!({"initial": r0, "final": rt}),
        ));
    }
    if cfg.monitor_enabled("energy") {
        let f0 = curvature(&problem.chart, &problem.h0, &problem.twist)?;
        let ym0 = curvature_norm_sq(&problem.h0, &f0);
        let f0_sq: f64 = (0..problem.chart.len()).map(|x| problem.chart.weight(x) * ym0[x]).sum();
        let max_e = trace.samples.iter().map(|s| s.energy).fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-6 * f0_sq;
        dir.monitor(MonitorResult::new(
            "energy",
            "uniform energy bound E(t) ≤ 0",
            max_e <= tol,
            &json!({"max_e": max_e, "f0_sq": f0_sq, "tolerance": tol}),
        ));
    }
    let failed = dir.finish()?;
    let last = trace.samples.last().expect("at least one sample");
    println!(
        "t = {:.6}  sup ê = {:.3e}  converged = {}  samples = {}  -> {}",
        last.t,
        last.sup_e,
        trace.converged,
        trace.samples.len(),
        out.display()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join("; ")))
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn diag_n_functional(dir: &Path) -> Outcome {
    let run = RunDir::open(dir).map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = run.config.build()?;
    let n = problem.chart.complex_dim();
    let cn = flow_constant(n);
    let s = &run.samples;
    let last = s.last().ok_or_else(|| Failure::Usage("empty trace".into()))?;
    let recomputed = problem.functional.value(&run.final_metric)?;
    let value_ok = (recomputed - last.n_value).abs() <= 1e-8 * (1.0 + recomputed.abs());
    let identity: Vec<_> = s
        .windows(3)
        .map(|w| {
            let dndt = (w[2].n_value - w[0].n_value) / (w[2].t - w[0].t);
            json!({"t": w[1].t, "dn_dt": dndt, "minus_c_fhat_sq": -cn * w[1].fhat_l2_sq})
        })
        .collect();
    let non_increasing = s.windows(2).all(|w| w[1].n_value <= w[0].n_value + 1e-9 * (1.0 + w[0].n_value.abs()));
    print_json(&json!({
        "c_n": cn,
        "final_recorded": last.n_value,
        "final_recomputed": recomputed,
        "non_increasing": non_increasing,
        "identity": identity,
    }));
    if value_ok && non_increasing {
        Ok(())
    } else {
        Err(Failure::Check("Donaldson functional: recomputed value or monotonicity mismatch".into()))
    }
}

fn diag_claim(dir: &Path) -> Outcome {
    let run = RunDir::open(dir).map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = run.config.build()?;
    let ch = &problem.chart;
    if !ch.has_cylinder() {
        return Err(Failure::Usage("claim diagnostics need a cylinder chart".into()));
    }
    let (beta, _, _) = beta_from_samples(&run.samples);
    let metrics = run.metrics()?;
    let s = slice_positions(ch);
    let final_lambda = lambda_bar(&run.final_metric, &problem.h0);
    let k_moser = calibrate_k_prime(ch, &final_lambda, 1.0);
    let mut violations = 0;
    let mut reports = Vec::new();
    for (t, h) in &metrics {
        let lambda = lambda_bar(h, &problem.h0);
        let par = parabola_check(&s, &slice_sup(ch, &lambda), beta);
        violations += par.violations;
        let f = curvature(ch, h, &problem.twist)?;
        let slices = slice_fhat_l2(ch, h, &f);
        let claim = claim_lower_bound(ch, *t, &lambda, &slices, beta, k_moser);
        reports.push(json!({"parabola": par, "claim": claim}));
    }
    print_json(&json!({"beta": beta, "k_moser": k_moser, "parabola_violations": violations, "snapshots": reports}));
    if violations == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("parabola lower bound: {violations} violations")))
    }
}

fn diag_energy(dir: &Path) -> Outcome {
    let run = RunDir::open(dir).map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = run.config.build()?;
    let ch = &problem.chart;
    let f0 = curvature(ch, &problem.h0, &problem.twist)?;
    let ym0 = curvature_norm_sq(&problem.h0, &f0);
    let f0_sq: f64 = (0..ch.len()).map(|x| ch.weight(x) * ym0[x]).sum();
    let max_e = run.samples.iter().map(|s| s.energy).fold(f64::NEG_INFINITY, f64::max);
    let f = curvature(ch, &run.final_metric, &problem.twist)?;
    let cw = lattice_chern_weil(ch, &run.final_metric, &f)?;
    let bound_ok = max_e <= 1e-6 * f0_sq;
    let split_ok = cw.split_residual <= 1e-8;
    print_json(&json!({
        "max_e": max_e,
        "f0_sq": f0_sq,
        "energy_bound": bound_ok,
        "chern_weil": cw,
        "orthogonality_residual": cw.orthogonality_residual(),
    }));
    match (bound_ok, split_ok) {
        (true, true) => Ok(()),
        (false, _) => Err(Failure::Check("uniform energy bound: E(t) > 0".into())),
        (_, false) => Err(Failure::Check("Chern–Weil split YM = 3‖F⁺‖² + κ".into())),
    }
}

fn monad(c: usize, seed: u64, d: i64) -> Outcome {
    if c == 0 {
        return Err(Failure::Usage("--c must be at least 1".into()));
    }
    if d < 1 {
        return Err(Failure::Usage("--d must be at least 1".into()));
    }
    let (rank, chern) = chern_of_monad(c, 3);
    let (_, report) = sample_monad(c, seed)?;
    let ok = report.composition_vanishes && report.full_rank_points == report.points;
    print_json(&json!({
        "c": c,
        "seed": seed,
        "rank": rank,
        "chern": chern,
        "restriction": restriction_chern(c, d, 3),
        "exactness": report,
    }));
    if ok {
        Ok(())
    } else {
        Err(Failure::Check("monad exactness sample".into()))
    }
}
