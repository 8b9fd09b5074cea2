//! Small dense square matrices over a [`Scalar`].
//!
//! The matrices built here (Y, M, Monte-Carlo averages) are Hermitian and at
//! most a few thousand wide, so a flat row-major `Vec` is all that is needed.
//! Dense Hermitian eigensolves are delegated to `nalgebra` and are only used
//! for verification and operator norms; the initializer itself runs its own
//! power iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::scalar::{norm, norm_sqr, Real, Scalar};

/// Dimension at or below which operator norms use a dense eigensolve.
pub const DENSE_NORM_MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S: Scalar> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn diagonal(values: &[S]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// `u v*`
    pub fn outer(u: &[S], v: &[S]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<S> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> S {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `out = self · x`
    pub fn mul_vec_into(&self, x: &[S], out: &mut [S]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.dim)) {
            *o = row.iter().zip(x).fold(S::zero(), |acc, (&m, &v)| acc + m * v);
        }
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `x* self x`, real part.
    pub fn quadratic_form(&self, x: &[S]) -> S::Real {
        crate::scalar::inner(x, &self.mul_vec(x)).re()
    }

    pub fn scale_mut(&mut self, r: S::Real) {
        for v in &mut self.data {
            *v = v.scale(r);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, r: S::Real) {
        assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(r);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Adds `w · a a*` to the upper triangle only; call
    /// [`Matrix::mirror_upper`] once the accumulation is finished.
    #[inline]
    pub fn add_rank_one_upper(&mut self, w: S::Real, a: &[S]) {
        let d = self.dim;
        for r in 0..d {
            let ar = a[r].scale(w);
            if ar == S::zero() {
                continue;
            }
            let row = &mut self.data[r * d..(r + 1) * d];
            for c in r..d {
                row[c] += ar * a[c].conj();
            }
        }
    }

    /// Overwrites the strict lower triangle with the conjugate of the upper
    /// one and zeroes imaginary parts on the diagonal.
    pub fn mirror_upper(&mut self) {
        let d = self.dim;
        for r in 0..d {
            let v = self.data[r * d + r];
            self.data[r * d + r] = S::from_real(v.re());
            for c in (r + 1)..d {
                self.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
    }

    /// `max |M_ij − conj(M_ji)|`
    pub fn max_asymmetry(&self) -> S::Real {
        let mut worst = S::Real::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                let gap = (self[(r, c)] - self[(c, r)].conj()).abs();
                if gap > worst {
                    worst = gap;
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> S::Real {
        self.data.iter().fold(S::Real::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius(&self) -> S::Real {
        norm(&self.data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == S::zero())
    }

    /// Copy into a complex `f64` nalgebra matrix.
    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            let v = self[(r, c)];
            Complex64::new(v.re().as_f64(), v.im().as_f64())
        })
    }
}

impl<S: Scalar> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.dim + c]
    }
}

impl<S: Scalar> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.dim + c]
    }
}

/// Ascending eigenvalues of a Hermitian matrix from a dense eigensolve.
pub fn hermitian_eigenvalues<S: Scalar>(m: &Matrix<S>) -> Vec<f64> {
    if m.dim() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Dominant eigenpair of a Hermitian matrix from a dense eigensolve, with the
/// eigenvector as `f64` complex entries.
pub fn hermitian_top_eigenpair<S: Scalar>(m: &Matrix<S>) -> (f64, Vec<Complex64>) {
    let eig = m.to_nalgebra().symmetric_eigen();
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    let v = eig.eigenvectors.column(idx).iter().copied().collect();
    (lambda, v)
}

/// Spectral norm of a Hermitian matrix: largest `|eigenvalue|`.
///
/// Dense eigensolve up to [`DENSE_NORM_MAX_DIM`], power iteration on the
/// matrix (relative residual 1e-8) above it.
pub fn hermitian_op_norm<S: Scalar>(m: &Matrix<S>) -> f64 {
    if m.dim() == 0 || m.is_zero() {
        return 0.0;
    }
    if m.dim() <= DENSE_NORM_MAX_DIM {
        return hermitian_eigenvalues(m)
            .into_iter()
            .fold(0.0, |acc, e| acc.max(e.abs()));
    }
    op_norm_by_power_iteration(m, 1e-8, 20_000)
}

fn op_norm_by_power_iteration<S: Scalar>(m: &Matrix<S>, tol: f64, max_iters: usize) -> f64 {
    // Iterates on M² so that eigenvalues ±λ of equal magnitude cannot make
    // the sequence oscillate.
    let d = m.dim();
    let mut v: Vec<S> = (0..d)
        .map(|i| {
            let t = S::Real::of(1.0 + (i as f64 * 0.618_033_988_749_895).fract());
            S::from_parts(t, S::Real::of(0.5) * t)
        })
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|a| *a = a.scale(n0.recip()));
    let mut mv = vec![S::zero(); d];
    let mut mmv = vec![S::zero(); d];
    let mut mu = 0.0;
    for _ in 0..max_iters {
        m.mul_vec_into(&v, &mut mv);
        m.mul_vec_into(&mv, &mut mmv);
        mu = norm_sqr(&mv).as_f64();
        if mu == 0.0 {
            return 0.0;
        }
        let resid: f64 = v
            .iter()
            .zip(&mmv)
            .map(|(&a, &b)| (b - a.scale(S::Real::of(mu))).abs_sqr().as_f64())
            .sum::<f64>()
            .sqrt();
        if resid <= tol * mu {
            break;
        }
        let n = norm(&mmv);
        for (a, &b) in v.iter_mut().zip(&mmv) {
            *a = b.scale(n.recip());
        }
    }
    mu.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_accumulation_is_hermitian() {
        let a = [
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.25),
            Complex64::new(0.0, 1.0),
        ];
        let mut m = Matrix::zeros(3);
        m.add_rank_one_upper(2.0, &a);
        m.mirror_upper();
        assert_eq!(m.max_asymmetry(), 0.0);
        let full = {
            let mut o = Matrix::outer(&a, &a);
            o.scale_mut(2.0);
            o
        };
        assert!(m.sub(&full).max_abs() < 1e-15);
    }

    #[test]
    fn op_norm_picks_largest_magnitude() {
        let m = Matrix::diagonal(&[1.0, -4.0, 2.0]);
        assert!((hermitian_op_norm(&m) - 4.0).abs() < 1e-12);
        let pm = Matrix::diagonal(&[4.0, -4.0, 1.0]);
        assert!((op_norm_by_power_iteration(&pm, 1e-12, 1000) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn power_iteration_norm_matches_dense() {
        let d = 80;
        let m = Matrix::<f64>::from_fn(d, |r, c| {
            let (lo, hi) = (r.min(c) as f64, r.max(c) as f64);
            (lo + 1.0).sin() * (hi + 2.0).cos() + if r == c { 3.0 } else { 0.0 }
        });
        let dense = hermitian_eigenvalues(&m)
            .into_iter()
            .fold(0.0f64, |a, e| a.max(e.abs()));
        let iterative = op_norm_by_power_iteration(&m, 1e-10, 100_000);
        assert!((dense - iterative).abs() <= 1e-6 * dense, "{dense} vs {iterative}");
    }

    #[test]
    fn zero_matrix_has_zero_norm() {
        assert_eq!(hermitian_op_norm(&Matrix::<f64>::zeros(100)), 0.0);
    }
}
