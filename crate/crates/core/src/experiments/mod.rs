//! Seeded Monte Carlo experiments over the erasure channel and the recovery
//! pipelines, compared against the closed forms in [`crate::probbounds`].
//!
//! Trial `i` uses seed `base_seed + i` for its erasure pattern and a seed
//! derived from it for the test signal, so any trial can be replayed alone.
//! Trials run in parallel but are aggregated in index order, which keeps the
//! summary and per-trial files byte-identical across runs.

mod output;
mod signals;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub use output::{emit_results, write_trials_csv, SUMMARY_FILE, TAIL_BOUNDS_FILE, TIMING_FILE};
pub use signals::{
    generate_test_signal, improvement_witness, SignalShape, WITNESS_E_MAX, WITNESS_ROWS,
    WITNESS_S_MAX,
};

use crate::channel::{apply_erasure, erasure_stats, sample_erasure};
use crate::error::{Error, Result};
use crate::parallel;
use crate::probbounds::{binom_tail_upper, lemma_tail_bound, prob_mmax_below, prob_mmin_below};
use crate::recovery::{ds_condition, recover_rows, recover_two_stage, RowStatus, SolverOptions};
use crate::signal::{column_support_max, support_profile, GridDims, Signal2D};
use crate::transforms::{gabor_col, gabor_row, TransformKind};

/// Relative l2 error below which a reconstruction counts as exact.
pub const EXACT_RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MmaxSweep,
    MminSweep,
    RowRecovery,
    TwoStage,
    TailBounds,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::MmaxSweep => "mmax-sweep",
            Mode::MminSweep => "mmin-sweep",
            Mode::RowRecovery => "row-recovery",
            Mode::TwoStage => "two-stage",
            Mode::TailBounds => "tail-bounds",
        }
    }
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub e_max_target: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub mode: Mode,
    /// Row lengths to sweep; defaults to `[n]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl ExperimentConfig {
    pub fn new(
        mode: Mode,
        n: usize,
        t: usize,
        theta: f64,
        e_max_target: usize,
        trials: usize,
    ) -> Self {
        ExperimentConfig {
            n,
            t,
            theta,
            e_max_target,
            trials,
            base_seed: 0,
            mode,
            sweep: None,
            tol: default_tol(),
            output_path: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Row lengths this run visits.
    pub fn sizes(&self) -> Vec<usize> {
        self.sweep.clone().unwrap_or_else(|| vec![self.n])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleConfig(msg));
        GridDims::new(self.n, self.t).map_err(|e| Error::InfeasibleConfig(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta {} outside [0, 1]", self.theta));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return bad("sweep is empty".into());
            }
            if sweep.windows(2).any(|w| w[0] >= w[1]) {
                return bad("sweep values must be strictly increasing".into());
            }
        }
        let sizes = self.sizes();
        if sizes[0] == 0 {
            return bad("row length must be >= 1".into());
        }
        if self.e_max_target == 0 || sizes.iter().any(|&n| self.e_max_target > n) {
            return bad(format!(
                "e_max_target {} must lie in 1..=n for every n in {:?}",
                self.e_max_target, sizes
            ));
        }
        if self.mode == Mode::TwoStage
            && (self.t != WITNESS_ROWS || self.e_max_target != WITNESS_E_MAX)
        {
            return bad(format!(
                "two-stage runs use the column-sparse witness: t must be {WITNESS_ROWS} and e_max_target {WITNESS_E_MAX}"
            ));
        }
        if self.mode == Mode::TailBounds && self.theta == 0.0 {
            return bad("tail bounds need theta > 0".into());
        }
        Ok(())
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub m_max: usize,
    pub m_min: usize,
    pub rows_recovered: usize,
    pub exact_recovery: bool,
    pub residual: f64,
}

/// Aggregate over the trials at one row length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub e_max: usize,
    /// The threshold `n / (2 e_max)`.
    pub c: f64,
    pub trials: usize,
    pub successes: usize,
    pub empirical: f64,
    pub wilson95: [f64; 2],
    pub wilson99: [f64; 2],
    pub closed_form: f64,
    /// `"exact"` when `closed_form` is the event probability, `"lower-bound"` otherwise.
    pub closed_form_kind: String,
    /// Trials in which the certifying event occurred (recovery modes).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_trials: Option<usize>,
    /// Certified trials without exact recovery (recovery modes).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_failures: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rows_recovered: Option<f64>,
}

/// One row of the analytic tail-bound table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub e_max: usize,
    pub c: f64,
    pub p_mmax_below: f64,
    pub p_mmin_below: f64,
    pub exact_tail: f64,
    /// Empty when the bound's hypothesis `theta < 1 / (2 e_max)` fails.
    pub lemma_bound: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub points: Vec<PointSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub tail_bounds: Vec<TailRow>,
}

/// Wall-clock measurements; kept apart from the deterministic outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub threads: usize,
    pub total_seconds: f64,
    pub point_seconds: Vec<f64>,
    pub mean_trial_seconds: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Summary,
    /// Per-trial records for each entry of `summary.points`, ordered by seed.
    pub records: Vec<Vec<TrialRecord>>,
    pub timing: Timing,
}

/// Wilson score interval for `successes / trials` at two-sided level `1 - alpha`.
pub fn wilson_interval(successes: usize, trials: usize, alpha: f64) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    [(center - half).max(0.0), (center + half).min(1.0)]
}

/// Seed for the test signal of the trial whose erasure seed is `seed` (splitmix64 finaliser).
pub fn signal_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct TrialOutcome {
    record: TrialRecord,
    success: bool,
    certified: bool,
}

fn rows_matching(estimate: &Signal2D, truth: &Signal2D, status: &[RowStatus]) -> usize {
    (0..truth.dims().t)
        .filter(|&y| status[y] == RowStatus::Recovered)
        .filter(|&y| {
            let (r, f) = (estimate.row(y), truth.row(y));
            let diff: f64 = r
                .iter()
                .zip(f)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            diff <= EXACT_RECOVERY_TOL * scale.max(f64::MIN_POSITIVE)
        })
        .count()
}

fn run_trial(config: &ExperimentConfig, dims: GridDims, seed: u64) -> Result<TrialOutcome> {
    let c = dims.n as f64 / (2.0 * config.e_max_target as f64);
    let pattern = sample_erasure(dims, config.theta, seed)?;
    let stats = erasure_stats(&pattern);
    let mut record = TrialRecord {
        seed,
        m_max: stats.m_max,
        m_min: stats.m_min,
        rows_recovered: 0,
        exact_recovery: false,
        residual: 0.0,
    };
    let opts = SolverOptions::with_tol(config.tol);
    let (success, certified) = match config.mode {
        Mode::MmaxSweep => ((stats.m_max as f64) < c, false),
        Mode::MminSweep => ((stats.m_min as f64) < c, false),
        Mode::TailBounds => unreachable!("tail bounds run no trials"),
        Mode::RowRecovery | Mode::TwoStage => {
            let truth = if config.mode == Mode::RowRecovery {
                generate_test_signal(
                    dims,
                    config.e_max_target,
                    signal_seed(seed),
                    SignalShape::UniformRows,
                )?
            } else {
                improvement_witness(dims.n, signal_seed(seed))?
            };
            let transmitted = gabor_row(&truth);
            let scale = transmitted.max_modulus().max(1.0);
            let problem = apply_erasure(&transmitted, &pattern, TransformKind::GaborRow)?;
            let (report, certified) = if config.mode == Mode::RowRecovery {
                (
                    recover_rows(&problem, None, &opts)?,
                    (stats.m_max as f64) < c,
                )
            } else {
                let tol = truth.default_tol();
                let s_max = column_support_max(&gabor_col(&truth), tol);
                let report = recover_two_stage(&problem, Some(s_max), &opts)?;
                let profile = support_profile(&truth, tol);
                // Small-support rows certified by the per-row condition.
                let certified = (0..dims.t)
                    .filter(|&y| profile.row_supports[y] < WITNESS_E_MAX)
                    .all(|y| {
                        ds_condition(
                            profile.row_supports[y],
                            pattern.per_row_counts()[y],
                            dims.n,
                            1,
                        )
                    });
                (report, certified)
            };
            record.rows_recovered = rows_matching(&report.estimate, &truth, &report.row_status);
            record.residual = report.residual;
            record.exact_recovery = match &report.recovered {
                Some(rec) => {
                    rec.relative_error(&truth)? < EXACT_RECOVERY_TOL
                        && report.residual <= config.tol * scale
                }
                None => false,
            };
            (record.exact_recovery, certified)
        }
    };
    Ok(TrialOutcome {
        record,
        success,
        certified,
    })
}

fn closed_form(config: &ExperimentConfig, n: usize) -> Result<(f64, &'static str)> {
    let (n64, t64) = (n as u64, config.t as u64);
    let c = n as f64 / (2.0 * config.e_max_target as f64);
    Ok(match config.mode {
        Mode::MmaxSweep => (prob_mmax_below(n64, t64, config.theta, c)?, "exact"),
        Mode::MminSweep => (prob_mmin_below(n64, t64, config.theta, c)?, "exact"),
        Mode::RowRecovery => (prob_mmax_below(n64, t64, config.theta, c)?, "lower-bound"),
        Mode::TwoStage => {
            // All seven support-2 rows certified; the column stage then certifies the last row.
            let small_rows = (WITNESS_ROWS - 1) as u64;
            let c_small = n as f64 / (2.0 * (WITNESS_E_MAX - 1) as f64);
            (
                prob_mmax_below(n64, small_rows, config.theta, c_small)?,
                "lower-bound",
            )
        }
        Mode::TailBounds => unreachable!(),
    })
}

fn tail_row(config: &ExperimentConfig, n: usize) -> Result<TailRow> {
    let k = 1.0 / (2.0 * config.e_max_target as f64);
    let c = n as f64 * k;
    let (n64, t64) = (n as u64, config.t as u64);
    let exact_tail = binom_tail_upper(n64, config.theta, c)?;
    let (lemma_bound, valid) = match lemma_tail_bound(n64, config.theta, k) {
        Ok(b) => (b.valid.then_some(b.lemma_bound), b.valid),
        Err(_) => (None, false),
    };
    Ok(TailRow {
        n,
        t: config.t,
        theta: config.theta,
        e_max: config.e_max_target,
        c,
        p_mmax_below: prob_mmax_below(n64, t64, config.theta, c)?,
        p_mmin_below: prob_mmin_below(n64, t64, config.theta, c)?,
        exact_tail,
        lemma_bound,
        valid,
    })
}

fn thread_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs every trial of `config` and aggregates the results.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let start = Instant::now();
    let mut summary = Summary {
        mode: config.mode,
        config: config.clone(),
        points: Vec::new(),
        tail_bounds: Vec::new(),
    };
    let mut records = Vec::new();
    let mut point_seconds = Vec::new();
    let mut mean_trial_seconds = Vec::new();

    for n in config.sizes() {
        let point_start = Instant::now();
        if config.mode == Mode::TailBounds {
            summary.tail_bounds.push(tail_row(config, n)?);
            point_seconds.push(point_start.elapsed().as_secs_f64());
            continue;
        }
        let dims = GridDims::new(n, config.t)?;
        let outcomes = parallel::map_indexed(config.trials, |i| {
            run_trial(config, dims, config.base_seed.wrapping_add(i as u64))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let successes = outcomes.iter().filter(|o| o.success).count();
        let (closed, kind) = closed_form(config, n)?;
        let recovery = matches!(config.mode, Mode::RowRecovery | Mode::TwoStage);
        let certified_trials = outcomes.iter().filter(|o| o.certified).count();
        let certified_failures = outcomes
            .iter()
            .filter(|o| o.certified && !o.record.exact_recovery)
            .count();
        let mean_rows = outcomes
            .iter()
            .map(|o| o.record.rows_recovered as f64)
            .sum::<f64>()
            / config.trials as f64;
        summary.points.push(PointSummary {
            n,
            t: config.t,
            theta: config.theta,
            e_max: config.e_max_target,
            c: n as f64 / (2.0 * config.e_max_target as f64),
            trials: config.trials,
            successes,
            empirical: successes as f64 / config.trials as f64,
            wilson95: wilson_interval(successes, config.trials, 0.05),
            wilson99: wilson_interval(successes, config.trials, 0.01),
            closed_form: closed,
            closed_form_kind: kind.to_string(),
            certified_trials: recovery.then_some(certified_trials),
            certified_failures: recovery.then_some(certified_failures),
            mean_rows_recovered: recovery.then_some(mean_rows),
        });
        records.push(outcomes.into_iter().map(|o| o.record).collect());
        let secs = point_start.elapsed().as_secs_f64();
        point_seconds.push(secs);
        mean_trial_seconds.push(secs / config.trials as f64);
    }

    Ok(ExperimentOutcome {
        summary,
        records,
        timing: Timing {
            threads: thread_count(),
            total_seconds: start.elapsed().as_secs_f64(),
            point_seconds,
            mean_trial_seconds,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point_estimate() {
        let [lo, hi] = wilson_interval(90, 100, 0.05);
        assert!(lo < 0.9 && 0.9 < hi);
        let [lo, hi] = wilson_interval(100, 100, 0.01);
        assert!(lo > 0.9 && hi == 1.0);
        let [lo95, hi95] = wilson_interval(30, 60, 0.05);
        let [lo99, hi99] = wilson_interval(30, 60, 0.01);
        assert!(lo99 < lo95 && hi95 < hi99);
    }

    #[test]
    fn trivial_theta_zero_trial() {
        let mut cfg = ExperimentConfig::new(Mode::RowRecovery, 8, 2, 0.0, 2, 1);
        cfg.base_seed = 3;
        let out = run_experiment(&cfg).unwrap();
        let rec = out.records[0][0];
        assert_eq!(rec.seed, 3);
        assert_eq!(rec.m_max, 0);
        assert!(rec.exact_recovery);
        assert_eq!(rec.rows_recovered, 2);
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::new(Mode::MmaxSweep, 16, 4, 0.1, 2, 10);
        assert!(ok.validate().is_ok());
        let mut c = ok.clone();
        c.trials = 0;
        assert!(matches!(c.validate(), Err(Error::InfeasibleConfig(_))));
        let mut c = ok.clone();
        c.sweep = Some(vec![16, 8]);
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.e_max_target = 17;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.theta = 1.5;
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(Mode::TwoStage, 16, 4, 0.2, 3, 10);
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(Mode::TwoStage, 16, 8, 0.2, 3, 10);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn config_json_roundtrip() {
        let text = r#"{"n":64,"t":8,"theta":0.1,"e_max_target":2,"trials":100,"base_seed":7,"mode":"mmax-sweep","sweep":[16,32]}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.sizes(), vec![16, 32]);
        assert_eq!(cfg.tol, 1e-9);
        assert!(ExperimentConfig::from_json(r#"{"n":1,"bogus":2}"#).is_err());
    }
}
