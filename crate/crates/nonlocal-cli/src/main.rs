//! `nonlocal` — numerical laboratory for the Dirichlet problem of the
//! fractional p-Laplacian: operator evaluation, barrier certificates,
//! variational solves, Perron envelopes and boundary-regularity probes.
//!
//! Exit codes: 0 all certificates pass, 1 certificate failure, 2 config
//! error, 3 solver non-convergence.

mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use nonlocal_core::barriers::{record_power_constant, BarrierFamily, BarrierSpec};
use nonlocal_core::operator::{eval_profile_1d, record_dead_variable_constant, PvContext};
use nonlocal_core::perron::{resolutivity_gap, PerronOptions};
use nonlocal_core::probes::{
    barrier_certificate_at, exterior_value_check, regularity_probe, rhs_independence_experiment,
    ProbeConfig, RegularityVerdict,
};
use nonlocal_core::solver::{solve_dirichlet, SolveOptions};
use nonlocal_core::{ConstantTable, DomainMask, FracParams, GridFunction, QuadPreset, Sample};

use config::RunConfig;
use emit::{samples_csv, Emitter};

#[derive(Parser)]
#[command(name = "nonlocal", version, about)]
struct Cli {
    /// Quadrature preset override (coarse, standard, fine).
    #[arg(long, global = true)]
    quad: Option<String>,
    /// Cap module parallelism at this many threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (the NONLOCAL_OUT environment variable wins).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ℒ of a configured profile at the configured points.
    Eval { config: PathBuf },
    /// Certify the sign of an explicit barrier family.
    BarrierCheck {
        #[arg(long)]
        family: String,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// r0 for the ring, R for the cutoff, L for the minorant.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Solve the variational Dirichlet problem from a config file.
    Solve { config: PathBuf },
    /// Run both Perron envelopes and measure the resolutivity gap.
    Perron { config: PathBuf },
    /// Boundary-regularity experiments.
    Probe {
        #[arg(long)]
        experiment: String,
        config: PathBuf,
    },
    /// Compute a named constant (C or N) into the constant table.
    Constants {
        #[arg(long)]
        name: String,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // classify: solver non-convergence is exit 3, failed certificate
            // invariants (e.g. the perron monotonicity tripwire) exit 1,
            // everything else is a configuration/validation problem
            let msg = format!("{e:#}");
            if msg.contains("did not converge") {
                ExitCode::from(3)
            } else if msg.contains("certificate failed") {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn out_dir(cli_out: &Option<PathBuf>, config: Option<&RunConfig>) -> PathBuf {
    if let Ok(env) = std::env::var("NONLOCAL_OUT") {
        return PathBuf::from(env);
    }
    if let Some(dir) = cli_out {
        return dir.clone();
    }
    if let Some(cfg) = config {
        if let Some(dir) = cfg.get("out") {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

fn quad_flag(cli: &Cli) -> Result<Option<QuadPreset>> {
    cli.quad
        .as_deref()
        .map(|q| q.parse::<QuadPreset>().map_err(|e| anyhow!("{e}")))
        .transpose()
}

#[derive(Serialize)]
struct EvalReport {
    profile: nonlocal_core::Profile,
    params: FracParams,
    samples: Vec<Sample>,
}

#[derive(Serialize)]
struct PerronSummary {
    gap: f64,
    upper_vs_direct: f64,
    lower_vs_direct: f64,
    upper_sweeps: usize,
    lower_sweeps: usize,
    solution_tolerance: f64,
    upper_log: Vec<nonlocal_core::perron::SweepLogEntry>,
    lower_log: Vec<nonlocal_core::perron::SweepLogEntry>,
    direct_report: nonlocal_core::solver::SolveReport,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let quad_override = quad_flag(&cli)?;
    match &cli.command {
        Command::Eval { config } => {
            let cfg = RunConfig::load(config)?;
            let mut em = Emitter::new(out_dir(&cli.out, Some(&cfg)))?;
            em.write_text("config_canonical.txt", &cfg.canonical())?;
            let params = cfg.params()?;
            let quad = cfg.quad(quad_override)?;
            let profile = cfg.g_profile()?;
            let points = cfg.points()?;
            let started = std::time::Instant::now();
            let mut samples = Vec::new();
            if params.n() == 1 {
                for &x in &points {
                    let v =
                        eval_profile_1d(&profile, x, &params, &quad).map_err(|e| anyhow!("{e}"))?;
                    samples.push(Sample {
                        point: vec![x],
                        value: v,
                    });
                }
            } else {
                let grid = cfg.grid()?;
                let u = GridFunction::from_profile(grid, &profile).map_err(|e| anyhow!("{e}"))?;
                let ctx = PvContext::new(grid, &params, &quad).map_err(|e| anyhow!("{e}"))?;
                for &x in &points {
                    let mut coords = [0.0f64; 3];
                    coords[0] = x;
                    let node = grid
                        .node_at(&coords[..grid.n()])
                        .ok_or_else(|| anyhow!("point {x} is not a grid node"))?;
                    let v = ctx.eval(&u, node).map_err(|e| anyhow!("{e}"))?;
                    samples.push(Sample {
                        point: grid.node(node)[..grid.n()].to_vec(),
                        value: v,
                    });
                }
            }
            em.write_text("eval.csv", &samples_csv(&samples))?;
            em.write_json(
                "eval.json",
                &EvalReport {
                    profile,
                    params,
                    samples,
                },
            )?;
            em.log(format!(
                "eval finished in {:.3}s",
                started.elapsed().as_secs_f64()
            ));
            em.finish()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::BarrierCheck {
            family,
            beta,
            s,
            p,
            n,
            scale,
        } => {
            let mut em = Emitter::new(out_dir(&cli.out, None))?;
            let fam: BarrierFamily = family.parse().map_err(|e| anyhow!("{e}"))?;
            let params = FracParams::new(*s, *p, *n).map_err(|e| anyhow!("{e}"))?;
            let spec = BarrierSpec::new(fam, params, *beta, *scale).map_err(|e| anyhow!("{e}"))?;
            let quad = nonlocal_core::QuadratureSpec::preset(
                quad_override.unwrap_or(QuadPreset::Standard),
            );
            let started = std::time::Instant::now();
            let report = spec.certify(&quad).map_err(|e| anyhow!("{e}"))?;
            em.write_text("barrier_samples.csv", &samples_csv(&report.samples))?;
            em.write_json("certificate.json", &report)?;
            em.log(format!(
                "barrier {family}: {:?} in {:.3}s",
                report.verdict,
                started.elapsed().as_secs_f64()
            ));
            let code = if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            em.finish()?;
            Ok(code)
        }
        Command::Solve { config } => {
            let cfg = RunConfig::load(config)?;
            let mut em = Emitter::new(out_dir(&cli.out, Some(&cfg)))?;
            em.write_text("config_canonical.txt", &cfg.canonical())?;
            let params = cfg.params()?;
            let quad = cfg.quad(quad_override)?;
            let grid = cfg.grid()?;
            let mask = DomainMask::from_shape(grid, &cfg.domain()?).map_err(|e| anyhow!("{e}"))?;
            let f = GridFunction::constant(grid, cfg.f64_or("f_value", 0.0)?);
            let g =
                GridFunction::from_profile(grid, &cfg.g_profile()?).map_err(|e| anyhow!("{e}"))?;
            let opts = SolveOptions {
                grad_tol_rel: cfg
                    .get("grad_tol")
                    .map(|v| v.parse())
                    .transpose()
                    .map_err(|_| anyhow!("key `grad_tol`: bad number"))?,
                max_iters: cfg.usize_or("max_iters", 5000)?,
                use_newton: true,
            };
            let (u, report) = solve_dirichlet(&f, &g, &mask, &params, &quad, &opts)
                .map_err(|e| anyhow!("{e}"))?;
            u.write_files(em.dir(), "solution")
                .map_err(|e| anyhow!("{e}"))?;
            em.log(format!(
                "solved {} unknowns in {} iterations ({:.3}s), residual {:.3e}",
                mask.len(),
                report.iterations,
                report.wall_time_s,
                report.el_residual_sup
            ));
            em.write_json("solve_report.json", &report)?;
            em.finish()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Perron { config } => {
            let cfg = RunConfig::load(config)?;
            let mut em = Emitter::new(out_dir(&cli.out, Some(&cfg)))?;
            let params = cfg.params()?;
            let quad = cfg.quad(quad_override)?;
            let grid = cfg.grid()?;
            let mask = DomainMask::from_shape(grid, &cfg.domain()?).map_err(|e| anyhow!("{e}"))?;
            let f = GridFunction::constant(grid, cfg.f64_or("f_value", 0.0)?);
            let g =
                GridFunction::from_profile(grid, &cfg.g_profile()?).map_err(|e| anyhow!("{e}"))?;
            let opts = PerronOptions {
                solve: SolveOptions {
                    grad_tol_rel: cfg
                        .get("grad_tol")
                        .map(|v| v.parse())
                        .transpose()
                        .map_err(|_| anyhow!("key `grad_tol`: bad number"))?,
                    max_iters: cfg.usize_or("max_iters", 5000)?,
                    use_newton: true,
                },
                max_sweeps: cfg.usize_or("max_sweeps", 12)?,
            };
            let started = std::time::Instant::now();
            let report = resolutivity_gap(&g, &f, &mask, &params, &quad, &opts)
                .map_err(|e| anyhow!("{e}"))?;
            report
                .upper
                .field
                .write_files(em.dir(), "upper")
                .map_err(|e| anyhow!("{e}"))?;
            report
                .lower
                .field
                .write_files(em.dir(), "lower")
                .map_err(|e| anyhow!("{e}"))?;
            report
                .direct
                .write_files(em.dir(), "direct")
                .map_err(|e| anyhow!("{e}"))?;
            let summary = PerronSummary {
                gap: report.gap,
                upper_vs_direct: report.upper_vs_direct,
                lower_vs_direct: report.lower_vs_direct,
                upper_sweeps: report.upper.sweeps,
                lower_sweeps: report.lower.sweeps,
                solution_tolerance: report
                    .upper
                    .solution_tolerance
                    .max(report.lower.solution_tolerance),
                upper_log: report.upper.log.clone(),
                lower_log: report.lower.log.clone(),
                direct_report: report.direct_report.clone(),
            };
            em.write_json("perron_report.json", &summary)?;
            em.log(format!(
                "perron gap {:.3e} in {:.3}s",
                report.gap,
                started.elapsed().as_secs_f64()
            ));
            em.finish()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe { experiment, config } => {
            let cfg = RunConfig::load(config)?;
            let mut em = Emitter::new(out_dir(&cli.out, Some(&cfg)))?;
            let params = cfg.params()?;
            let quad = cfg.quad(quad_override)?;
            let opts = SolveOptions::default();
            let code = match experiment.as_str() {
                "puncture" => {
                    let probe = ProbeConfig::puncture(
                        cfg.f64_or("target", 1.0)?,
                        cfg.f64_or("f_value", 0.0)?,
                        cfg.resolutions()?,
                    );
                    let report = regularity_probe(&probe, &params, &quad, &opts)
                        .map_err(|e| anyhow!("{e}"))?;
                    em.write_text("ladder.csv", &ladder_csv(&report))?;
                    em.write_json("regularity_report.json", &report)?;
                    em.log(format!("puncture verdict: {:?}", report.verdict));
                    ExitCode::SUCCESS
                }
                "rhs-independence" => {
                    let base = if cfg.get("domain") == Some("punctured-interval") {
                        ProbeConfig::puncture(cfg.f64_or("target", 1.0)?, 0.0, cfg.resolutions()?)
                    } else {
                        ProbeConfig::regular_endpoint(0.0, cfg.resolutions()?)
                    };
                    let runs = rhs_independence_experiment(&base, &params, &quad, &opts)
                        .map_err(|e| anyhow!("{e}"))?;
                    let verdicts: Vec<RegularityVerdict> =
                        runs.iter().map(|(_, r)| r.verdict).collect();
                    let agree = verdicts.windows(2).all(|w| w[0] == w[1]);
                    #[derive(Serialize)]
                    struct RhsIndependence {
                        agree: bool,
                        runs: Vec<(f64, nonlocal_core::probes::RegularityReport)>,
                    }
                    em.write_json("rhs_independence.json", &RhsIndependence { agree, runs })?;
                    em.log(format!("verdicts agree: {agree}"));
                    if agree {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                "exterior" => {
                    let report = exterior_value_check(
                        cfg.f64_or("point", 1.5)?,
                        &cfg.g_profile()?,
                        cfg.f64_or("f_value", 0.0)?,
                        &cfg.domain()?,
                        &params,
                        &quad,
                        &opts,
                        &cfg.resolutions()?,
                        cfg.f64_or("half_width", 2.0)?,
                    )
                    .map_err(|e| anyhow!("{e}"))?;
                    em.write_text("exterior_samples.csv", &samples_csv(&report.samples))?;
                    em.write_json("certificate.json", &report)?;
                    em.log(format!("exterior check: {:?}", report.verdict));
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                "barrier" => {
                    let grid = cfg.grid()?;
                    let mask =
                        DomainMask::from_shape(grid, &cfg.domain()?).map_err(|e| anyhow!("{e}"))?;
                    let gamma = GridFunction::from_profile(grid, &cfg.g_profile()?)
                        .map_err(|e| anyhow!("{e}"))?;
                    let point = [cfg.f64_or("point", 1.0)?, 0.0, 0.0];
                    let report =
                        barrier_certificate_at(&point[..params.n()], &gamma, &mask, &params, &quad)
                            .map_err(|e| anyhow!("{e}"))?;
                    em.write_text("barrier_samples.csv", &samples_csv(&report.samples))?;
                    em.write_json("certificate.json", &report)?;
                    em.log(format!("barrier certificate: {:?}", report.verdict));
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                other => return Err(anyhow!("unknown experiment `{other}`")),
            };
            em.finish()?;
            Ok(code)
        }
        Command::Constants {
            name,
            beta,
            s,
            p,
            n,
        } => {
            let mut em = Emitter::new(out_dir(&cli.out, None))?;
            let quad = nonlocal_core::QuadratureSpec::preset(
                quad_override.unwrap_or(QuadPreset::Standard),
            );
            let path = em.dir().join("constants.json");
            let mut table = if path.exists() {
                ConstantTable::load(&path).map_err(|e| anyhow!("{e}"))?
            } else {
                ConstantTable::new()
            };
            let value = match name.as_str() {
                "C" => {
                    let beta = beta.ok_or_else(|| anyhow!("constant C needs --beta"))?;
                    record_power_constant(&mut table, beta, *s, *p, &quad)
                        .map_err(|e| anyhow!("{e}"))?
                }
                "N" => {
                    let params = FracParams::new(*s, *p, *n).map_err(|e| anyhow!("{e}"))?;
                    record_dead_variable_constant(&mut table, &params, &quad)
                        .map_err(|e| anyhow!("{e}"))?
                }
                other => return Err(anyhow!("unknown constant `{other}` (use C or N)")),
            };
            table.save(&path).map_err(|e| anyhow!("{e}"))?;
            em.log(format!("{name} = {value:.17e}"));
            em.write_json(
                "constants_summary.json",
                &serde_json::json!({ "name": name, "value": value }),
            )?;
            em.finish()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn ladder_csv(report: &nonlocal_core::probes::RegularityReport) -> String {
    let mut out = String::from("m,h,distance,value\n");
    for level in &report.levels {
        for (d, v) in &level.approach {
            out.push_str(&format!(
                "{},{},{},{}\n",
                level.m,
                nonlocal_core::gridfn::fmt_f64(level.h),
                nonlocal_core::gridfn::fmt_f64(*d),
                nonlocal_core::gridfn::fmt_f64(*v)
            ));
        }
    }
    out
}
