//! Seeded trial loops for the initialization and recovery experiments.
//!
//! Trial `i` at ratio `r` draws everything from
//! `trial_seed(base_seed, r, i)`, and records are collected into pre-indexed
//! slots, so the output is the same for every worker count.

use std::time::Instant;

use gsi_core::rng::{self, tag};
use gsi_core::spectral::{baseline_scale, baseline_si_from_y, gsi_from_y, random_unit_vector};
use gsi_core::verify::{mc_condition_residual, mc_f_residual, mc_scalar_identities, ResidualReport};
use gsi_core::{
    build_y, measure, moment_profile, relative_error, rho_from_intensities, sample_measurements, solve, Complex64,
    FieldTag, MomentProfile, PowerOptions, Scalar, SolveReport, SolveStatus, SolverConfig, StepMode, Trace,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{BenchError, Result};
use crate::signal::generate_signal;

/// Seed of trial `trial` at `ratio`; a pure function of its inputs.
pub fn trial_seed(base_seed: u64, ratio: f64, trial: usize) -> u64 {
    rng::derive_seed(rng::derive_seed(base_seed, ratio.to_bits()), trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub ratio: f64,
    pub measurements: usize,
    pub trial_index: usize,
    pub seed: u64,
    /// Relative error of the generalized spectral initializer.
    pub init_rel_error: f64,
    /// Relative error of the classical spectral initializer.
    pub init_rel_error_si: f64,
    pub final_rel_error: Option<f64>,
    pub iterations: Option<usize>,
    pub success: Option<bool>,
    /// Not part of the deterministic output.
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub ratio: f64,
    pub measurements: usize,
    pub trials: usize,
    pub mean_init_error_gsi: f64,
    pub mean_init_error_si: f64,
    pub success_rate: Option<f64>,
    pub mean_iterations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let mut rows: Vec<ResultRow> = Vec::new();
        let mut start = 0;
        while start < records.len() {
            let ratio = records[start].ratio;
            let end = start + records[start..].iter().take_while(|r| r.ratio == ratio).count();
            rows.push(summarize(&records[start..end]));
            start = end;
        }
        Self { rows }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn summarize(group: &[TrialRecord]) -> ResultRow {
    let first = &group[0];
    let success_rate = group
        .iter()
        .map(|r| r.success)
        .collect::<Option<Vec<bool>>>()
        .map(|s| s.iter().filter(|&&ok| ok).count() as f64 / s.len() as f64);
    let mean_iterations = group
        .iter()
        .map(|r| r.iterations.map(|i| i as f64))
        .collect::<Option<Vec<f64>>>()
        .map(|v| mean(v.into_iter()));
    ResultRow {
        ratio: first.ratio,
        measurements: first.measurements,
        trials: group.len(),
        mean_init_error_gsi: mean(group.iter().map(|r| r.init_rel_error)),
        mean_init_error_si: mean(group.iter().map(|r| r.init_rel_error_si)),
        success_rate,
        mean_iterations,
    }
}

/// Worker pool with `threads` workers; `None` lets rayon decide.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(BenchError::Config("thread count must be at least 1".into()));
        }
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

/// The solver settings used by the recovery experiment.
pub fn recovery_solver_config(config: &ExperimentConfig) -> SolverConfig {
    SolverConfig {
        step_mode: StepMode::bb(),
        max_iters: config.max_iters,
        ..SolverConfig::default()
    }
}

/// Everything one trial produces.
pub struct TrialOutcome<S: Scalar> {
    pub record: TrialRecord,
    pub signal: Vec<S>,
    pub solve: Option<SolveReport<S>>,
}

/// Runs one trial: signal, measurements, both initializers and, when
/// `solver` is set, the refinement from the generalized initializer.
pub fn run_trial<S: Scalar<Real = f64>>(
    config: &ExperimentConfig,
    profile: &MomentProfile,
    ratio: f64,
    trial: usize,
    solver: Option<&SolverConfig>,
) -> Result<TrialOutcome<S>> {
    let started = Instant::now();
    let d = config.dim();
    let n = (ratio * d as f64).round() as usize;
    let seed = trial_seed(config.base_seed, ratio, trial);
    let ensemble = config.ensemble.ensemble();

    let x = generate_signal::<S>(d, rng::derive_seed(seed, tag::SIGNAL), config.spike_factor)?;
    let set = sample_measurements::<S>(&ensemble, n, d, rng::derive_seed(seed, tag::MEASUREMENTS))?;
    let y = measure(&set, &x)?;
    let y_mat = build_y(&set, &y)?;
    let rho = rho_from_intensities(&y, profile.tau1)?;
    let opts = PowerOptions::iters(config.power_iters);
    let power_seed = rng::derive_seed(seed, tag::POWER_METHOD);
    let init = gsi_from_y(&y_mat, rho, profile, opts, power_seed)?;
    let si = baseline_si_from_y(&y_mat, baseline_scale(&set, &y)?, opts, power_seed)?;

    let report = match solver {
        Some(cfg) => Some(solve(&set, &y, &init.z0, cfg, Some(&x))?),
        None => None,
    };
    let final_rel_error = report.as_ref().and_then(|r| r.final_rel_error);
    let record = TrialRecord {
        ratio,
        measurements: n,
        trial_index: trial,
        seed,
        init_rel_error: relative_error(&init.z0, &x)?,
        init_rel_error_si: relative_error(&si.z0, &x)?,
        final_rel_error,
        iterations: report.as_ref().map(|r| r.iterations),
        success: final_rel_error.map(|e| e < config.success_threshold),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok(TrialOutcome {
        record,
        signal: x,
        solve: report,
    })
}

fn run_grid(config: &ExperimentConfig, threads: Option<usize>, with_solver: bool) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let profile = moment_profile(&config.ensemble.ensemble())?;
    gsi_core::derived_constants(&profile)?;
    let solver = with_solver.then(|| recovery_solver_config(config));
    let jobs: Vec<(f64, usize)> = config
        .ratio_grid
        .iter()
        .flat_map(|&r| (0..config.trial_count()).map(move |t| (r, t)))
        .collect();
    let run = |&(ratio, trial): &(f64, usize)| -> Result<TrialRecord> {
        match config.ensemble.field {
            FieldTag::Real => run_trial::<f64>(config, &profile, ratio, trial, solver.as_ref()).map(|o| o.record),
            FieldTag::Complex => {
                run_trial::<Complex64>(config, &profile, ratio, trial, solver.as_ref()).map(|o| o.record)
            }
        }
    };
    pool(threads)?.install(|| jobs.par_iter().map(run).collect())
}

/// Mean initialization errors of both initializers per ratio.
pub fn run_init_experiment(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<(ResultTable, Vec<TrialRecord>)> {
    expect_kind(config, ExperimentKind::InitError)?;
    let records = run_grid(config, threads, false)?;
    Ok((ResultTable::from_records(&records), records))
}

/// Success rates of initialization plus refinement per ratio.
pub fn run_recovery_experiment(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<(ResultTable, Vec<TrialRecord>)> {
    expect_kind(config, ExperimentKind::SuccessRate)?;
    let records = run_grid(config, threads, true)?;
    Ok((ResultTable::from_records(&records), records))
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(BenchError::Config(format!(
            "expected a {kind:?} configuration, got {:?}",
            config.kind
        )));
    }
    Ok(())
}

/// Result of a single seeded solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSolveOutput {
    pub record: TrialRecord,
    pub status: SolveStatus,
    pub final_objective: f64,
    pub final_grad_norm: f64,
    pub trace: Option<Trace<f64>>,
}

/// Trial 0 at the first ratio of the grid, with the solver trace if asked.
pub fn run_single_solve(config: &ExperimentConfig) -> Result<SingleSolveOutput> {
    expect_kind(config, ExperimentKind::SingleSolve)?;
    config.validate()?;
    let profile = moment_profile(&config.ensemble.ensemble())?;
    let solver = SolverConfig {
        trace: config.trace,
        ..recovery_solver_config(config)
    };
    let ratio = config.ratio_grid[0];
    fn finish<S: Scalar<Real = f64>>(o: TrialOutcome<S>) -> SingleSolveOutput {
        let report = o.solve.expect("solver was configured");
        SingleSolveOutput {
            record: o.record,
            status: report.status,
            final_objective: report.final_objective,
            final_grad_norm: report.final_grad_norm,
            trace: report.trace,
        }
    }
    Ok(match config.ensemble.field {
        FieldTag::Real => finish(run_trial::<f64>(config, &profile, ratio, 0, Some(&solver))?),
        FieldTag::Complex => finish(run_trial::<Complex64>(config, &profile, ratio, 0, Some(&solver))?),
    })
}

/// Moment checks of one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub ensemble: String,
    pub d: usize,
    pub checks: Vec<ResidualReport>,
    pub pass: bool,
}

fn moment_checks<S: Scalar<Real = f64>>(config: &ExperimentConfig) -> Result<Vec<ResidualReport>> {
    let ensemble = config.ensemble.ensemble();
    let d = config.dim();
    let n = config.mc_samples;
    let probe = rng::derive_seed(config.base_seed, tag::PROBE);
    let x = random_unit_vector::<S>(d, rng::derive_seed(probe, 0));
    let h = random_unit_vector::<S>(d, rng::derive_seed(probe, 1));
    let mut checks = vec![
        mc_condition_residual(&ensemble, &x, n, rng::derive_seed(config.base_seed, 10))?,
        mc_scalar_identities(&ensemble, &x, &h, n, rng::derive_seed(config.base_seed, 11))?,
    ];
    if S::FIELD == FieldTag::Complex {
        checks.push(mc_f_residual(&ensemble, &x, n, rng::derive_seed(config.base_seed, 12))?);
    }
    Ok(checks)
}

/// Monte-Carlo checks of the ensemble's closed-form moment profile.
pub fn run_moment_verify(config: &ExperimentConfig) -> Result<MomentReport> {
    expect_kind(config, ExperimentKind::MomentVerify)?;
    config.validate()?;
    let checks = match config.ensemble.field {
        FieldTag::Real => moment_checks::<f64>(config)?,
        FieldTag::Complex => moment_checks::<Complex64>(config)?,
    };
    Ok(MomentReport {
        ensemble: config.ensemble.to_string(),
        d: config.dim(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gsi_core::{EnsembleSpec, EntryKind};

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            d: Some(8),
            ratio_grid: vec![4.0, 8.0],
            trials: Some(3),
            max_iters: 200,
            ..ExperimentConfig::new(kind)
        }
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seeds: Vec<u64> = [2.0, 4.0]
            .iter()
            .flat_map(|&r| (0..100).map(move |t| trial_seed(1, r, t)))
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 200);
        assert_eq!(trial_seed(1, 2.0, 3), trial_seed(1, 2.0, 3));
    }

    #[test]
    fn init_table_shape() {
        let (table, records) = run_init_experiment(&small(ExperimentKind::InitError), Some(1)).unwrap();
        assert_eq!(records.len(), 6);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[1].measurements, 64);
        assert!(table.rows.iter().all(|r| r.trials == 3 && r.success_rate.is_none()));
        let expected = mean(records[..3].iter().map(|r| r.init_rel_error));
        assert_eq!(table.rows[0].mean_init_error_gsi, expected);
    }

    #[test]
    fn recovery_table_has_rates() {
        let mut c = small(ExperimentKind::SuccessRate);
        c.ensemble = EnsembleSpec::new(FieldTag::Complex, EntryKind::Gaussian);
        let (table, records) = run_recovery_experiment(&c, Some(1)).unwrap();
        for r in &records {
            assert_eq!(r.success, Some(r.final_rel_error.unwrap() < c.success_threshold));
        }
        for row in &table.rows {
            let rate = row.success_rate.unwrap();
            assert!((0.0..=1.0).contains(&rate));
        }
    }

    #[test]
    fn single_solve_traces() {
        let mut c = small(ExperimentKind::SingleSolve);
        c.trace = true;
        let out = run_single_solve(&c).unwrap();
        let t = out.trace.unwrap();
        assert_eq!(t.len(), out.record.iterations.unwrap() + 1);
        assert_eq!(t.rel_error.len(), t.len());
    }

    #[test]
    fn moment_verify_complex_uniform() {
        let c = ExperimentConfig {
            ensemble: EnsembleSpec::new(FieldTag::Complex, EntryKind::Uniform),
            mc_samples: 200_000,
            ..ExperimentConfig::new(ExperimentKind::MomentVerify)
        };
        let r = run_moment_verify(&c).unwrap();
        assert_eq!(r.checks.len(), 3);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn kind_is_checked() {
        assert!(run_init_experiment(&small(ExperimentKind::SuccessRate), None).is_err());
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let c = small(ExperimentKind::InitError);
        let (a, _) = run_init_experiment(&c, Some(1)).unwrap();
        let (b, _) = run_init_experiment(&c, Some(3)).unwrap();
        assert_eq!(a, b);
    }
}
