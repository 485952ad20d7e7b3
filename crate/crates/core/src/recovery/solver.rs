//! Complex basis pursuit: `min ||v||_1` subject to `(U v)_i = b_i` on the
//! observed coordinates, where `U` is unitary.
//!
//! Because the rows of a unitary matrix are orthonormal, the projection onto
//! the feasible set is `v - U^H P (U v - b)`, i.e. transform, overwrite the
//! observed coordinates, transform back. The iteration is ADMM on the split
//! `v = z` with complex soft-thresholding on `z`, with residual balancing of
//! the penalty.
//!
//! Every few iterations the support of `z` is polished: least squares on that
//! support, then a least-squares dual certificate
//! `y = A_S (A_S^H A_S)^{-1} sgn(v_S)`. If `|(A^H y)_j| < 1` off the support,
//! the polished point is the unique minimiser and the solve stops early.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transforms::{self, naive, Direction};

/// Knobs for the basis pursuit solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Feasibility tolerance, relative to the largest observed modulus.
    pub tol: f64,
    pub max_iter: usize,
    /// Stop when successive iterates move less than this (relative units).
    pub step_tol: f64,
    /// Attempt a support polish every this many iterations.
    pub polish_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_iter: 100_000,
            step_tol: 1e-12,
            polish_every: 5,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..SolverOptions::default()
        }
    }
}

/// A unitary map from the optimisation variable to the measurement domain.
pub(crate) trait Unitary: Sync {
    fn len(&self) -> usize;
    fn apply(&self, v: &mut [Complex64]);
    fn adjoint(&self, v: &mut [Complex64]);
    fn entry(&self, row: usize, col: usize) -> Complex64;
}

/// Unitary 1D DFT in the given direction.
pub(crate) struct Dft1 {
    pub len: usize,
    pub direction: Direction,
}

impl Unitary for Dft1 {
    fn len(&self) -> usize {
        self.len
    }

    fn apply(&self, v: &mut [Complex64]) {
        transforms::dft1_in_place(v, self.direction);
    }

    fn adjoint(&self, v: &mut [Complex64]) {
        let back = match self.direction {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        };
        transforms::dft1_in_place(v, back);
    }

    fn entry(&self, row: usize, col: usize) -> Complex64 {
        naive::matrix_entry(row, col, self.len, self.direction)
    }
}

/// Forward unitary 2D DFT on a row-major `n x t` grid.
pub(crate) struct Dft2 {
    pub n: usize,
    pub t: usize,
}

impl Dft2 {
    fn run(&self, v: &mut [Complex64], direction: Direction) {
        for row in v.chunks_mut(self.n) {
            transforms::dft1_in_place(row, direction);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.t];
        for x in 0..self.n {
            for (y, c) in col.iter_mut().enumerate() {
                *c = v[y * self.n + x];
            }
            transforms::dft1_in_place(&mut col, direction);
            for (y, c) in col.iter().enumerate() {
                v[y * self.n + x] = *c;
            }
        }
    }
}

impl Unitary for Dft2 {
    fn len(&self) -> usize {
        self.n * self.t
    }

    fn apply(&self, v: &mut [Complex64]) {
        self.run(v, Direction::Forward);
    }

    fn adjoint(&self, v: &mut [Complex64]) {
        self.run(v, Direction::Inverse);
    }

    fn entry(&self, row: usize, col: usize) -> Complex64 {
        let (m, k) = (row % self.n, row / self.n);
        let (x, y) = (col % self.n, col / self.n);
        naive::matrix_entry(m, x, self.n, Direction::Forward)
            * naive::matrix_entry(k, y, self.t, Direction::Forward)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub values: Vec<Complex64>,
    /// Whether a dual certificate proved the result is the unique minimiser.
    #[cfg_attr(not(test), allow(dead_code))]
    pub certified: bool,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn l1(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

fn soft_threshold(v: Complex64, tau: f64) -> Complex64 {
    let r = v.norm();
    if r <= tau {
        ZERO
    } else {
        v * (1.0 - tau / r)
    }
}

struct Problem<'a, U: Unitary> {
    op: &'a U,
    observed: Vec<usize>,
    /// Observed values, scaled so the largest modulus is one.
    b: Vec<Complex64>,
    tol: f64,
}

impl<U: Unitary> Problem<'_, U> {
    fn project(&self, v: &mut [Complex64]) {
        self.op.apply(v);
        for (&i, &bi) in self.observed.iter().zip(&self.b) {
            v[i] = bi;
        }
        self.op.adjoint(v);
    }

    fn residual(&self, v: &[Complex64]) -> f64 {
        let mut w = v.to_vec();
        self.op.apply(&mut w);
        self.observed
            .iter()
            .zip(&self.b)
            .map(|(&i, &bi)| (w[i] - bi).norm())
            .fold(0.0, f64::max)
    }

    fn columns(&self, support: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.observed.len(), support.len(), |r, c| {
            self.op.entry(self.observed[r], support[c])
        })
    }

    /// Least squares restricted to `support`, pruning negligible entries.
    fn least_squares(&self, support: &[usize]) -> Option<(Vec<usize>, DVector<Complex64>)> {
        let rhs = DVector::from_column_slice(&self.b);
        let mut support = support.to_vec();
        loop {
            if support.is_empty() || support.len() > self.observed.len() {
                return None;
            }
            let a = self.columns(&support);
            let svd = a.svd(true, true);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            if smin <= 1e-10 * smax.max(1.0) {
                return None;
            }
            let coef = svd.solve(&rhs, 0.0).ok()?;
            let peak = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let keep: Vec<usize> = (0..support.len())
                .filter(|&j| coef[j].norm() > 1e-9 * peak)
                .collect();
            if keep.len() == support.len() {
                return Some((support, coef));
            }
            support = keep.into_iter().map(|j| support[j]).collect();
        }
    }

    fn scatter(&self, support: &[usize], coef: &DVector<Complex64>) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.op.len()];
        for (&s, c) in support.iter().zip(coef.iter()) {
            v[s] = *c;
        }
        v
    }

    /// Polished candidate on `support`, with whether it carries a dual certificate.
    fn polish(&self, support: &[usize]) -> Option<(Vec<Complex64>, bool)> {
        let (support, coef) = self.least_squares(support)?;
        let v = self.scatter(&support, &coef);
        if self.residual(&v) > self.tol {
            return None;
        }
        let a = self.columns(&support);
        let gram = a.adjoint() * &a;
        let signs = DVector::from_iterator(support.len(), coef.iter().map(|c| c / c.norm()));
        let certified = match gram.lu().solve(&signs) {
            Some(w) => {
                let y = &a * w;
                let mut dual = vec![ZERO; self.op.len()];
                for (&i, yi) in self.observed.iter().zip(y.iter()) {
                    dual[i] = *yi;
                }
                self.op.adjoint(&mut dual);
                let mut on_support = vec![false; self.op.len()];
                for &s in &support {
                    on_support[s] = true;
                }
                dual.iter()
                    .zip(&on_support)
                    .filter(|(_, &on)| !on)
                    .all(|(d, _)| d.norm() < 1.0 - 1e-9)
            }
            None => false,
        };
        Some((v, certified))
    }
}

/// Solves `min ||v||_1` s.t. `(U v)_i = observed_i` wherever `observed_i` is `Some`.
pub(crate) fn basis_pursuit<U: Unitary>(
    op: &U,
    observed: &[Option<Complex64>],
    opts: &SolverOptions,
) -> Result<Solution> {
    let len = op.len();
    assert_eq!(
        observed.len(),
        len,
        "observation vector must cover the grid"
    );
    if opts.tol <= 0.0 || opts.tol.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be > 0, got {}",
            opts.tol
        )));
    }

    let (idx, vals): (Vec<usize>, Vec<Complex64>) = observed
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .unzip();

    if idx.len() == len {
        let mut v: Vec<Complex64> = vals;
        op.adjoint(&mut v);
        return Ok(Solution {
            values: v,
            certified: true,
        });
    }

    let scale = max_abs(&vals);
    if scale == 0.0 {
        // The zero vector is feasible and has zero norm.
        return Ok(Solution {
            values: vec![ZERO; len],
            certified: false,
        });
    }

    let problem = Problem {
        op,
        observed: idx,
        b: vals.iter().map(|v| v / scale).collect(),
        tol: opts.tol,
    };
    let unscale = |mut s: Solution| {
        for v in s.values.iter_mut() {
            *v *= scale;
        }
        s
    };

    let mut x = vec![ZERO; len];
    problem.project(&mut x);
    let mut z = x.clone();
    let mut u = vec![ZERO; len];
    let mut x_prev = x.clone();
    let mut z_prev = z.clone();
    let mut buf = vec![ZERO; len];
    let mut tau = 0.5 * l1(&x) / len as f64;
    let mut last_polished: Option<Vec<usize>> = None;

    for iter in 1..=opts.max_iter {
        for ((bi, zi), ui) in buf.iter_mut().zip(&z).zip(&u) {
            *bi = zi - ui;
        }
        problem.project(&mut buf);
        std::mem::swap(&mut x, &mut buf);

        z_prev.copy_from_slice(&z);
        for ((zi, xi), ui) in z.iter_mut().zip(&x).zip(&u) {
            *zi = soft_threshold(xi + ui, tau);
        }
        let mut primal = 0.0;
        let mut dual = 0.0;
        for ((ui, xi), (zi, zp)) in u.iter_mut().zip(&x).zip(z.iter().zip(&z_prev)) {
            let r = xi - zi;
            *ui += r;
            primal += r.norm_sqr();
            dual += (zi - zp).norm_sqr();
        }
        let (primal, dual) = (primal.sqrt(), dual.sqrt() / tau);

        if iter % opts.polish_every == 0 || iter == 1 {
            let support: Vec<usize> = (0..len).filter(|&i| z[i] != ZERO).collect();
            // Unique sparse minimisers are far sparser than the data; skip dense iterates.
            if 2 * support.len() <= problem.observed.len()
                && last_polished.as_ref() != Some(&support)
            {
                if let Some((v, true)) = problem.polish(&support) {
                    return Ok(unscale(Solution {
                        values: v,
                        certified: true,
                    }));
                }
                last_polished = Some(support);
            }
        }

        let step = x
            .iter()
            .zip(&x_prev)
            .chain(z.iter().zip(&z_prev))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if step < opts.step_tol && primal < opts.step_tol.sqrt() {
            let support: Vec<usize> = (0..len).filter(|&i| z[i].norm() > 1e-9).collect();
            let values = match problem.polish(&support) {
                Some((v, _)) if l1(&v) <= l1(&x) * (1.0 + 1e-9) => v,
                _ => x,
            };
            return Ok(unscale(Solution {
                values,
                certified: false,
            }));
        }
        x_prev.copy_from_slice(&x);

        if iter % 10 == 0 {
            // The scaled dual is y * tau, so it follows tau.
            if primal > 10.0 * dual {
                tau *= 0.5;
                u.iter_mut().for_each(|v| *v *= 0.5);
            } else if dual > 10.0 * primal {
                tau *= 2.0;
                u.iter_mut().for_each(|v| *v *= 2.0);
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
    })
}
