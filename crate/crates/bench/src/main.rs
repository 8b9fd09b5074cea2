use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gsi_bench::experiment::MomentReport;
use gsi_bench::export::{self, render_records, render_table, write_output, Format};
use gsi_bench::{
    run_init_experiment, run_moment_verify, run_recovery_experiment, run_single_solve, ExperimentConfig, ExperimentKind,
};
use gsi_core::{EntryKind, FieldTag};

#[derive(Parser)]
#[command(
    name = "gsi",
    version,
    about = "Phase retrieval benchmarks: spectral initialization and Wirtinger flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean initialization error of both spectral initializers per N/d.
    InitBench(Common),
    /// Success rate of initialization plus refinement per N/d.
    RecoverBench(Common),
    /// Monte-Carlo check of the ensemble's moment profile.
    VerifyMoments(Common),
    /// One seeded solve at the first ratio.
    Solve(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML, or JSON by extension); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    field: Option<FieldTag>,
    #[arg(long)]
    ensemble: Option<EntryKind>,
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated N/d values.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    power_iters: Option<usize>,
    /// Monte-Carlo draws per check (verify-moments).
    #[arg(long)]
    samples: Option<usize>,
    /// Include per-iteration traces (solve).
    #[arg(long)]
    trace: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; defaults to the --out extension, else csv.
    #[arg(long)]
    format: Option<Format>,
    /// Per-trial records file (includes wall-clock times).
    #[arg(long)]
    records: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "GSI_THREADS")]
    threads: Option<usize>,
}

impl Common {
    fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::new(kind),
        };
        if self.config.is_some() && c.kind != kind {
            bail!("config file describes a {:?} experiment, not {kind:?}", c.kind);
        }
        c.kind = kind;
        if let Some(f) = self.field {
            c.ensemble.field = f;
        }
        if let Some(e) = self.ensemble {
            c.ensemble.entry = e;
        }
        if self.d.is_some() {
            c.d = self.d;
        }
        if let Some(r) = &self.ratios {
            c.ratio_grid = r.clone();
        }
        if self.trials.is_some() {
            c.trials = self.trials;
        }
        if let Some(s) = self.seed {
            c.base_seed = s;
        }
        if let Some(m) = self.max_iters {
            c.max_iters = m;
        }
        if let Some(p) = self.power_iters {
            c.power_iters = p;
        }
        if let Some(n) = self.samples {
            c.mc_samples = n;
        }
        c.trace |= self.trace;
        c.validate()?;
        Ok(c)
    }

    fn format(&self) -> Format {
        self.format
            .or_else(|| self.out.as_deref().map(Format::from_path))
            .unwrap_or(Format::Csv)
    }
}

fn moment_csv(report: &MomentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "check",
        "estimator",
        "sample_count",
        "residual",
        "stderr",
        "tolerance",
        "pass",
    ])?;
    for check in &report.checks {
        let parts = if check.components.is_empty() {
            std::slice::from_ref(check)
        } else {
            &check.components[..]
        };
        for c in parts {
            w.write_record([
                check.estimator.clone(),
                c.estimator.clone(),
                c.sample_count.to_string(),
                export::float(c.residual),
                export::float(c.stderr),
                export::float(c.tolerance),
                c.pass.to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn run(cli: Cli) -> Result<bool> {
    let (kind, args) = match &cli.command {
        Command::InitBench(a) => (ExperimentKind::InitError, a),
        Command::RecoverBench(a) => (ExperimentKind::SuccessRate, a),
        Command::VerifyMoments(a) => (ExperimentKind::MomentVerify, a),
        Command::Solve(a) => (ExperimentKind::SingleSolve, a),
    };
    let config = args.resolve(kind)?;
    let format = args.format();
    let out = args.out.as_deref();
    match kind {
        ExperimentKind::InitError | ExperimentKind::SuccessRate => {
            let (table, records) = if kind == ExperimentKind::InitError {
                run_init_experiment(&config, args.threads)?
            } else {
                run_recovery_experiment(&config, args.threads)?
            };
            write_output(out, &render_table(&table, &config, format)?)?;
            if let Some(path) = &args.records {
                let text = render_records(&records, &config, Format::from_path(path))?;
                write_output(Some(path), &text)?;
            }
            Ok(true)
        }
        ExperimentKind::MomentVerify => {
            let report = run_moment_verify(&config)?;
            let text = match format {
                Format::Csv => moment_csv(&report)?,
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
            };
            write_output(out, &text)?;
            if !report.pass {
                eprintln!("moment check failed for {}", report.ensemble);
            }
            Ok(report.pass)
        }
        ExperimentKind::SingleSolve => {
            let result = run_single_solve(&config)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&result)? + "\n",
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["iteration", "objective", "grad_norm", "rel_error"])?;
                    let trace = result.trace.as_ref().context("CSV output of a solve needs --trace")?;
                    for k in 0..trace.len() {
                        w.write_record([
                            k.to_string(),
                            export::float(trace.objective[k]),
                            export::float(trace.grad_norm[k]),
                            export::float(trace.rel_error[k]),
                        ])?;
                    }
                    String::from_utf8(w.into_inner()?)?
                }
            };
            write_output(out, &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
