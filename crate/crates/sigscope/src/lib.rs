// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line experiment runner for `sigscope-core`.
//!
//! Exit codes: 0 on success, 1 for usage or input errors, 2 when a
//! soundness check or a lemma verdict fails.

use std::{
    fs,
    io::Write,
    path::{Path, PathBuf},
};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sigscope_core::{
    dynamics::{integral_lower_bound, propagate_with, Phi0Policy},
    estimator::{build_cover, estimate_length, estimate_singular_cusp, Cover, EstimateReport},
    lemmas::{generate, run_instance, LemmaId, LemmaVerdict, SuiteSummary},
    sl2::development_length_bound,
    LambdaSchedule,
};

pub mod output;
pub mod scenario;

use scenario::{Scenario, BUILTIN};

pub const DEFAULT_DEPTH: usize = 16;
pub const DEFAULT_LAMBDAS: &str = "geometric:1:2:12";
/// Rows in a dynamics or failing-lemma trace.
pub const TRACE_SAMPLES: usize = 1001;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        1
    }
}

impl From<sigscope_core::Error> for CliError {
    fn from(e: sigscope_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sigscope", version, about = "Signature length-recovery experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signature and development length estimates for a scenario.
    Estimate {
        /// Scenario file, or the name of a built-in scenario.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        depth: Option<usize>,
        /// `geometric:start:ratio:count` or a comma-separated list.
        #[arg(long)]
        lambdas: Option<String>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// `log‖Γ‖/λ` over a λ schedule.
    Develop {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        lambdas: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Angle dynamics: the radial integral over a schedule (json) or a
    /// trace at the largest λ (csv).
    Dynamics {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        lambdas: Option<String>,
        /// `aligned`, `fixed:<phi0>` or `endpoint-free:<kappa>:<lo>:<hi>`.
        #[arg(long, default_value = "aligned")]
        phi0: String,
        #[arg(long, default_value_t = TRACE_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Randomized lemma certification suites.
    Lemmas {
        /// A lemma name or `all`.
        #[arg(long, default_value = "all")]
        id: String,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Decimal or `0x`-prefixed hexadecimal.
        #[arg(long, default_value = "0x5EED")]
        seed: String,
        /// Directory for `verdicts.json` and failure traces.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists the built-in scenarios, prints one, or exports all of them.
    Scenarios {
        name: Option<String>,
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

/// Parses `geometric:start:ratio:count` or `v1,v2,…`.
pub fn parse_schedule(spec: &str) -> Result<LambdaSchedule, CliError> {
    let bad = |why: &str| CliError::usage(format!("lambdas `{spec}`: {why}"));
    if let Some(rest) = spec.strip_prefix("geometric:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, ratio, count] = parts[..] else {
            return Err(bad("expected geometric:start:ratio:count"));
        };
        let start: f64 = start.trim().parse().map_err(|_| bad("bad start"))?;
        let ratio: f64 = ratio.trim().parse().map_err(|_| bad("bad ratio"))?;
        let count: usize = count.trim().parse().map_err(|_| bad("bad count"))?;
        return LambdaSchedule::geometric(start, ratio, count).map_err(|e| bad(&e.to_string()));
    }
    let values = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad("expected numbers"))?;
    LambdaSchedule::new(values).map_err(|e| bad(&e.to_string()))
}

pub fn parse_seed(s: &str) -> Result<u64, CliError> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| CliError::usage(format!("seed `{s}` is not an integer")))
}

pub fn parse_lemma_ids(s: &str) -> Result<Vec<LemmaId>, CliError> {
    if s.eq_ignore_ascii_case("all") {
        Ok(LemmaId::ALL.to_vec())
    } else {
        Ok(vec![LemmaId::parse(s)?])
    }
}

/// Caps rayon's global pool from `SIGSCOPE_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SIGSCOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::usage(format!("SIGSCOPE_THREADS=`{value}` is not a positive integer")))?;
    // a pool built earlier in the process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOutput {
    pub scenario: String,
    pub depth: usize,
    pub lambdas: LambdaSchedule,
    pub report: EstimateReport,
    pub cover: Option<Cover>,
}

/// Runs the estimator the scenario calls for: the singular-cusp pipeline
/// for `c < 1`, the generic one otherwise.
pub fn estimate_scenario(
    sc: &Scenario,
    depth: Option<usize>,
    lambdas: &LambdaSchedule,
    kappa: Option<f64>,
) -> Result<EstimateOutput, CliError> {
    let depth = depth.or(sc.depth).unwrap_or(DEFAULT_DEPTH);
    let beta = sc.beta()?;
    let report = match (sc.cusp_spec()?, &sc.shape) {
        (Some(spec), scenario::Shape::SingularCusp { resolution, t2_offsets, .. }) if spec.c < 1.0 => {
            estimate_singular_cusp(&spec, *resolution, lambdas, t2_offsets)?
        }
        _ => estimate_length(&beta, depth, lambdas, kappa.unwrap_or(sc.kappa))?,
    };
    let cover = if sc.windows.is_empty() {
        None
    } else {
        Some(build_cover(beta.length(), &sc.windows)?)
    };
    Ok(EstimateOutput {
        scenario: sc.name.clone(),
        depth,
        lambdas: lambdas.clone(),
        report,
        cover,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaRun {
    pub seed: u64,
    pub count: u64,
    pub summaries: Vec<SuiteSummary>,
    pub verdicts: Vec<LemmaVerdict>,
}

impl LemmaRun {
    pub fn fails(&self) -> u64 {
        self.summaries.iter().map(|s| s.fail).sum()
    }
}

/// Runs the suites in parallel; the verdict order is fixed by
/// `(lemma, index)`.
pub fn run_lemmas(ids: &[LemmaId], count: u64, seed: u64) -> LemmaRun {
    let mut verdicts = Vec::with_capacity(ids.len() * count as usize);
    let mut summaries = Vec::with_capacity(ids.len());
    for &id in ids {
        let suite: Vec<LemmaVerdict> = (0..count)
            .into_par_iter()
            .map(|i| run_instance(id, seed, i))
            .collect();
        summaries.push(SuiteSummary::of(id, &suite));
        verdicts.extend(suite);
    }
    LemmaRun {
        seed,
        count,
        summaries,
        verdicts,
    }
}

fn emit(out: &mut dyn Write, dir: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn soundness(certified: bool, what: &str) -> i32 {
    if certified {
        0
    } else {
        eprintln!("soundness violation: a {what} lower bound exceeds the path length");
        2
    }
}

fn schedule_or_default(spec: Option<&str>) -> Result<LambdaSchedule, CliError> {
    parse_schedule(spec.unwrap_or(DEFAULT_LAMBDAS))
}

/// Runs one command, writing primary output to `out`. Returns the exit
/// code for completed runs.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Estimate {
            scenario,
            depth,
            lambdas,
            kappa,
            out: dir,
            format,
        } => {
            let sc = Scenario::load(&scenario)?;
            let lambdas = schedule_or_default(lambdas.as_deref())?;
            let result = estimate_scenario(&sc, depth, &lambdas, kappa)?;
            match format {
                Format::Json => emit(out, dir.as_deref(), "estimate.json", &output::to_json(&result))?,
                Format::Csv => {
                    if dir.is_some() {
                        let sig = output::signature_csv(&result.report.signature_estimates);
                        emit(out, dir.as_deref(), "signature.csv", &sig)?;
                    }
                    let dev = output::estimate_csv(&result.report.development_estimates);
                    emit(out, dir.as_deref(), "estimate.csv", &dev)?;
                }
            }
            Ok(soundness(result.report.certified, "length"))
        }
        Command::Develop {
            scenario,
            lambdas,
            out: dir,
            format,
        } => {
            let sc = Scenario::load(&scenario)?;
            let lambdas = schedule_or_default(lambdas.as_deref())?;
            let report = development_length_bound(&sc.beta()?, &lambdas);
            match format {
                Format::Json => emit(out, dir.as_deref(), "development.json", &output::to_json(&report))?,
                Format::Csv => emit(out, dir.as_deref(), "development.csv", &output::development_csv(&report.curve))?,
            }
            Ok(soundness(report.certified, "development"))
        }
        Command::Dynamics {
            scenario,
            lambdas,
            phi0,
            samples,
            out: dir,
            format,
        } => {
            let policy = Phi0Policy::parse(&phi0)?;
            let sc = Scenario::load(&scenario)?;
            let lambdas = schedule_or_default(lambdas.as_deref())?;
            let alpha = sc.alpha()?;
            let report = integral_lower_bound(&alpha, &lambdas, policy);
            match format {
                Format::Json => emit(out, dir.as_deref(), "dynamics.json", &output::to_json(&report))?,
                Format::Csv => {
                    let traj = propagate_with(&alpha, lambdas.max(), policy);
                    emit(out, dir.as_deref(), "trace.csv", &output::trace_csv(&traj.sample(samples)))?;
                }
            }
            Ok(soundness(report.certified, "radial-integral"))
        }
        Command::Lemmas {
            id,
            count,
            seed,
            out: dir,
        } => {
            let ids = parse_lemma_ids(&id)?;
            let seed = parse_seed(&seed)?;
            let run = run_lemmas(&ids, count, seed);
            if let Some(dir) = dir.as_deref() {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("verdicts.json"), output::to_json(&run))?;
            }
            out.write_all(output::to_json(&run.summaries).as_bytes())?;
            if run.fails() == 0 {
                return Ok(0);
            }
            let trace_dir = dir.unwrap_or_else(|| PathBuf::from("sigscope-traces"));
            fs::create_dir_all(&trace_dir)?;
            for (i, v) in run.verdicts.iter().enumerate().filter(|(_, v)| v.is_fail()) {
                let index = i as u64 % count;
                let traj = generate(v.lemma, seed, index).trajectory();
                let name = format!("{}.csv", v.trace_ref.as_deref().unwrap_or("trace"));
                fs::write(trace_dir.join(&name), output::trace_csv(&traj.sample(TRACE_SAMPLES)))?;
                eprintln!("{} failed; trace written to {}", v.lemma, trace_dir.join(&name).display());
            }
            Ok(2)
        }
        Command::Scenarios { name, export } => {
            if let Some(dir) = export {
                fs::create_dir_all(&dir)?;
                for (n, text) in BUILTIN {
                    fs::write(dir.join(format!("{n}.json")), text)?;
                }
                return Ok(0);
            }
            match name {
                Some(n) => {
                    let text = scenario::builtin(&n)
                        .ok_or_else(|| CliError::usage(format!("no built-in scenario named `{n}`")))?;
                    out.write_all(text.as_bytes())?;
                }
                None => {
                    for (n, text) in BUILTIN {
                        let sc = Scenario::from_json(text, n)?;
                        writeln!(out, "{n}\t{}", sc.description)?;
                    }
                }
            }
            Ok(0)
        }
    }
}
