//! L1 recovery of erased transforms.
//!
//! [`l1_recover_1d`] is the basic building block: minimise the L1 norm of a
//! length-`n` signal (or of its DFT) subject to agreeing with the observed
//! coefficients. [`recover_rows`] applies it to each row of an erased
//! row-wise Gabor transform, and [`recover_two_stage`] then fills rows that
//! failed by solving the frequency-domain problem down each column.

mod oracle;
mod solver;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

pub use oracle::uniqueness_oracle_1d;
pub use solver::SolverOptions;

use crate::channel::ErasurePattern;
use crate::error::{Error, Result};
use crate::parallel;
use crate::signal::{GridDims, Signal2D, SupportProfile};
use crate::transforms::{Direction, TransformKind};
use solver::{basis_pursuit, Dft1, Dft2};

/// The receiver's view of an erased transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryProblem {
    dims: GridDims,
    kind: TransformKind,
    observed: Vec<Option<Complex64>>,
    pattern: ErasurePattern,
}

impl RecoveryProblem {
    /// `observed` is row-major; an entry is `None` exactly when `pattern` marks it lost.
    pub fn new(
        kind: TransformKind,
        observed: Vec<Option<Complex64>>,
        pattern: ErasurePattern,
    ) -> Result<Self> {
        let dims = pattern.dims();
        if observed.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: observed.len(),
            });
        }
        if let Some(i) = observed
            .iter()
            .zip(pattern.mask())
            .position(|(v, &lost)| v.is_some() == lost)
        {
            let (x, y) = dims.position(i);
            return Err(Error::InvalidParameter(format!(
                "observed values and erasure pattern disagree at ({x}, {y})"
            )));
        }
        Ok(RecoveryProblem {
            dims,
            kind,
            observed,
            pattern,
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn pattern(&self) -> &ErasurePattern {
        &self.pattern
    }

    pub fn observed(&self, x: usize, y: usize) -> Option<Complex64> {
        self.observed[self.dims.index(x, y)]
    }

    pub fn observed_row(&self, y: usize) -> &[Option<Complex64>] {
        let n = self.dims.n;
        &self.observed[y * n..(y + 1) * n]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|v| v.is_some()).count()
    }

    /// A copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.n;
        let observed = order
            .iter()
            .flat_map(|&y| self.observed[y * n..(y + 1) * n].iter().copied())
            .collect::<Vec<_>>();
        let mask = order
            .iter()
            .flat_map(|&y| self.pattern.mask()[y * n..(y + 1) * n].iter().copied())
            .collect();
        let pattern = ErasurePattern::from_mask(self.dims, mask)?;
        RecoveryProblem::new(self.kind, observed, pattern)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Recovered,
    Failed,
    NotAttempted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    RowOnly,
    RowThenColumn,
    Global,
}

/// Outcome of a recovery run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub stage: Stage,
    pub row_status: Vec<RowStatus>,
    /// Per-column status of the column stage; empty when no column stage ran.
    pub column_status: Vec<RowStatus>,
    /// Every row was certified by the per-row support condition.
    pub row_guarantee: bool,
    /// Every attempted column was certified; `None` when no column stage ran.
    pub column_guarantee: Option<bool>,
    /// Largest modulus mismatch against the observed values, over recovered rows.
    pub residual: f64,
    /// Best estimate of the signal; rows not recovered are zero.
    pub estimate: Signal2D,
    /// The full signal, present only when every row was recovered.
    pub recovered: Option<Signal2D>,
}

impl RecoveryReport {
    pub fn guarantee_held(&self) -> bool {
        self.row_guarantee && self.column_guarantee.unwrap_or(true)
    }

    pub fn rows_recovered(&self) -> usize {
        self.row_status
            .iter()
            .filter(|&&s| s == RowStatus::Recovered)
            .count()
    }

    /// Row-major mask of entries the report claims to know.
    pub fn recovered_mask(&self) -> Vec<bool> {
        let n = self.estimate.dims().n;
        self.row_status
            .iter()
            .flat_map(|&s| std::iter::repeat_n(s == RowStatus::Recovered, n))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Serialize for RecoveryReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("RecoveryReport", 5)?;
        s.serialize_field("stage", &self.stage)?;
        s.serialize_field("row_status", &self.row_status)?;
        s.serialize_field("residual", &self.residual)?;
        s.serialize_field("guarantee_held", &self.guarantee_held())?;
        s.serialize_field("recovered", &self.recovered)?;
        s.end()
    }
}

/// `|E| |M| < N T / 2`, evaluated exactly in integers.
pub fn ds_condition(support_size: usize, missing_size: usize, n: usize, t: usize) -> bool {
    2 * (support_size as u128) * (missing_size as u128) < (n as u128) * (t as u128)
}

/// Which L1 norm the 1D solver minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Domain {
    /// Observations are DFT coefficients; minimise the signal's L1 norm.
    MinimizeSignalL1,
    /// Observations are signal samples; minimise the L1 norm of the DFT.
    MinimizeFreqL1,
}

/// L1-minimal length-`n` signal consistent with `observed` (`None` marks a lost value).
///
/// With [`L1Domain::MinimizeSignalL1`] the observations are unitary DFT
/// coefficients of the unknown signal; with [`L1Domain::MinimizeFreqL1`] they
/// are samples of the signal itself. Either way the signal is returned.
pub fn l1_recover_1d(
    observed: &[Option<Complex64>],
    domain: L1Domain,
    opts: &SolverOptions,
) -> Result<Vec<Complex64>> {
    let len = observed.len();
    if len == 0 {
        return Err(Error::InvalidParameter("empty observation vector".into()));
    }
    match domain {
        L1Domain::MinimizeSignalL1 => {
            let op = Dft1 {
                len,
                direction: Direction::Forward,
            };
            Ok(basis_pursuit(&op, observed, opts)?.values)
        }
        L1Domain::MinimizeFreqL1 => {
            // Variable is the spectrum h; the samples are U^H h.
            let op = Dft1 {
                len,
                direction: Direction::Inverse,
            };
            let mut values = basis_pursuit(&op, observed, opts)?.values;
            crate::transforms::dft1_in_place(&mut values, Direction::Inverse);
            Ok(values)
        }
    }
}

fn check_kind(problem: &RecoveryProblem, expected: TransformKind) -> Result<()> {
    if problem.kind != expected {
        return Err(Error::WrongTransform {
            expected: expected.name(),
            actual: problem.kind.name(),
        });
    }
    Ok(())
}

fn feasibility_scale(observed: &[Option<Complex64>]) -> f64 {
    observed
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1.0)
}

/// Largest mismatch between the unitary DFT of `row` and its observed coefficients.
fn row_residual(row: &[Complex64], observed: &[Option<Complex64>]) -> f64 {
    let mut spectrum = row.to_vec();
    crate::transforms::dft1_in_place(&mut spectrum, Direction::Forward);
    spectrum
        .iter()
        .zip(observed)
        .filter_map(|(s, o)| o.map(|o| (s - o).norm()))
        .fold(0.0, f64::max)
}

struct RowOutcome {
    status: RowStatus,
    certified: bool,
    values: Option<Vec<Complex64>>,
    residual: f64,
}

/// Recovers each row independently from its observed row-wise Gabor coefficients.
///
/// With `profile`, a row only counts as recovered when the per-row condition
/// `|supp f(., a)| |M_a| < N / 2` certifies it. Without it every converged
/// row counts and the report carries no guarantee.
pub fn recover_rows(
    problem: &RecoveryProblem,
    profile: Option<&SupportProfile>,
    opts: &SolverOptions,
) -> Result<RecoveryReport> {
    check_kind(problem, TransformKind::GaborRow)?;
    let dims = problem.dims;
    if let Some(p) = profile {
        if p.row_supports.len() != dims.t {
            return Err(Error::LengthMismatch {
                expected: dims.t,
                actual: p.row_supports.len(),
            });
        }
    }
    let lost = problem.pattern.per_row_counts();

    let outcomes = parallel::map_indexed(dims.t, |y| {
        let observed = problem.observed_row(y);
        let certified = profile
            .map(|p| ds_condition(p.row_supports[y], lost[y], dims.n, 1))
            .unwrap_or(false);
        if lost[y] == dims.n {
            return RowOutcome {
                status: RowStatus::Failed,
                certified,
                values: None,
                residual: 0.0,
            };
        }
        match l1_recover_1d(observed, L1Domain::MinimizeSignalL1, opts) {
            Ok(values) if profile.is_none() || certified => RowOutcome {
                status: RowStatus::Recovered,
                certified,
                residual: row_residual(&values, observed),
                values: Some(values),
            },
            _ => RowOutcome {
                status: RowStatus::Failed,
                certified,
                values: None,
                residual: 0.0,
            },
        }
    });

    let mut estimate = vec![Complex64::new(0.0, 0.0); dims.len()];
    for (y, o) in outcomes.iter().enumerate() {
        if let Some(v) = &o.values {
            estimate[y * dims.n..(y + 1) * dims.n].copy_from_slice(v);
        }
    }
    let row_status: Vec<RowStatus> = outcomes.iter().map(|o| o.status).collect();
    let estimate = Signal2D::new(dims, estimate)?;
    let all = row_status.iter().all(|&s| s == RowStatus::Recovered);
    Ok(RecoveryReport {
        stage: Stage::RowOnly,
        row_guarantee: profile.is_some() && outcomes.iter().all(|o| o.certified),
        column_guarantee: None,
        residual: outcomes.iter().map(|o| o.residual).fold(0.0, f64::max),
        recovered: all.then(|| estimate.clone()),
        estimate,
        column_status: Vec::new(),
        row_status,
    })
}

/// Row recovery followed by column-wise recovery of the rows that failed.
///
/// In the column stage each column `f(x, .)` is known on the recovered rows;
/// the missing entries are filled by minimising the L1 norm of the column's
/// unitary `T`-point DFT. `col_transform_support_max` is `S_max` of the
/// column-wise Gabor transform when known: a column is attempted only if
/// `(#failed rows) * S_max < T / 2`. With `None` every column is attempted
/// without a guarantee.
pub fn recover_two_stage(
    problem: &RecoveryProblem,
    col_transform_support_max: Option<usize>,
    opts: &SolverOptions,
) -> Result<RecoveryReport> {
    let mut report = recover_rows(problem, None, opts)?;
    report.stage = Stage::RowThenColumn;
    let dims = problem.dims;
    let failed: Vec<usize> = (0..dims.t)
        .filter(|&y| report.row_status[y] != RowStatus::Recovered)
        .collect();
    if failed.is_empty() {
        return Ok(report);
    }

    let certified = col_transform_support_max.map(|s| ds_condition(failed.len(), s, dims.t, 1));
    let scale = feasibility_scale(&problem.observed);
    let estimate = &report.estimate;
    let columns = parallel::map_indexed(dims.n, |x| {
        if certified == Some(false) || failed.len() == dims.t {
            return None;
        }
        let observed: Vec<Option<Complex64>> = (0..dims.t)
            .map(|y| (report.row_status[y] == RowStatus::Recovered).then(|| estimate.get(x, y)))
            .collect();
        l1_recover_1d(&observed, L1Domain::MinimizeFreqL1, opts).ok()
    });

    report.column_guarantee = Some(certified == Some(true));
    report.column_status = columns
        .iter()
        .map(|c| match (c, certified) {
            (Some(_), _) => RowStatus::Recovered,
            (None, Some(false)) => RowStatus::NotAttempted,
            (None, _) if failed.len() == dims.t => RowStatus::NotAttempted,
            (None, _) => RowStatus::Failed,
        })
        .collect();

    if columns.iter().all(Option::is_some) {
        let mut values = report.estimate.values().to_vec();
        for &y in &failed {
            let row: Vec<Complex64> = columns.iter().map(|c| c.as_ref().unwrap()[y]).collect();
            let residual = row_residual(&row, problem.observed_row(y));
            // A row rebuilt from columns must still agree with its own observations.
            if residual <= opts.tol * scale {
                values[y * dims.n..(y + 1) * dims.n].copy_from_slice(&row);
                report.row_status[y] = RowStatus::Recovered;
                report.residual = report.residual.max(residual);
            }
        }
        report.estimate = Signal2D::new(dims, values)?;
    }
    let all = report.row_status.iter().all(|&s| s == RowStatus::Recovered);
    report.recovered = all.then(|| report.estimate.clone());
    Ok(report)
}

/// Recovery from an erased 2D DFT by minimising the L1 norm over the whole grid.
///
/// With `profile`, the guarantee is the global condition `|E| |M| < N T / 2`.
pub fn recover_global(
    problem: &RecoveryProblem,
    profile: Option<&SupportProfile>,
    opts: &SolverOptions,
) -> Result<RecoveryReport> {
    check_kind(problem, TransformKind::Fourier2d)?;
    let dims = problem.dims;
    let op = Dft2 {
        n: dims.n,
        t: dims.t,
    };
    let certified = profile
        .map(|p| {
            ds_condition(
                p.total_support,
                problem.pattern.missing_count(),
                dims.n,
                dims.t,
            )
        })
        .unwrap_or(false);
    let (status, estimate, residual) = match basis_pursuit(&op, &problem.observed, opts) {
        Ok(sol) => {
            let estimate = Signal2D::new(dims, sol.values)?;
            let spectrum = crate::transforms::dft2(&estimate);
            let residual = spectrum
                .values()
                .iter()
                .zip(&problem.observed)
                .filter_map(|(s, o)| o.map(|o| (s - o).norm()))
                .fold(0.0, f64::max);
            (RowStatus::Recovered, estimate, residual)
        }
        Err(Error::NonConvergence { .. }) => (RowStatus::Failed, Signal2D::zeros(dims), 0.0),
        Err(e) => return Err(e),
    };
    Ok(RecoveryReport {
        stage: Stage::Global,
        row_status: vec![status; dims.t],
        column_status: Vec::new(),
        row_guarantee: certified,
        column_guarantee: None,
        residual,
        recovered: (status == RowStatus::Recovered).then(|| estimate.clone()),
        estimate,
    })
}
