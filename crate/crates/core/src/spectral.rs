//! Spectral initialization.
//!
//! From intensities `y_j = |a_j* x|²` the generalized initializer forms
//!
//! ```text
//! Y  = (1/N) Σ y_j a_j a_j*
//! ρ² = Σ y_j / (τ₁ N)
//! M  = Y − τ₄/(τ₃+τ₄) · D(Y − τ₂ρ² I)
//! ```
//!
//! where `D(·)` keeps only the diagonal, and returns the top eigenvector of
//! `M` scaled to norm ρ. The diagonal correction removes the `τ₄ diag(|x_i|²)`
//! term from `E(Y)`, leaving `E(M) = τ₂‖x‖² I + τ₃ x x*` whose top eigenvector
//! is `x`. The classical initializer uses `Y` itself.

use num_traits::{Float, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::ensemble::MomentProfile;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;
use crate::scalar::{inner, norm, FieldTag, Real, Scalar};

/// `N` measurement vectors `a_j` of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet<S: Scalar> {
    d: usize,
    rows: Vec<S>,
}

impl<S: Scalar> MeasurementSet<S> {
    pub fn from_rows(d: usize, rows: Vec<S>) -> Result<Self> {
        if d == 0 || rows.is_empty() {
            return Err(Error::InvalidArgument("empty measurement set".into()));
        }
        if !rows.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not split into rows of length {d}",
                rows.len()
            )));
        }
        Ok(Self { d, rows })
    }

    pub fn from_vectors(vectors: &[Vec<S>]) -> Result<Self> {
        let d = vectors.first().map_or(0, Vec::len);
        if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::from_rows(d, vectors.concat())
    }

    pub fn field(&self) -> FieldTag {
        S::FIELD
    }

    /// Number of measurements `N`.
    pub fn len(&self) -> usize {
        self.rows.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, j: usize) -> &[S] {
        &self.rows[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, S> {
        self.rows.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.rows
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_count(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Nonnegative intensities `y_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityVector<T: Real>(Vec<T>);

impl<T: Real> IntensityVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return Err(Error::InvalidArgument(format!(
                "intensities must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self(self.0.iter().map(|&v| v * c).collect())
    }
}

/// `y_j = |a_j* x|²`, without forming `a_j a_j*`.
pub fn measure<S: Scalar>(set: &MeasurementSet<S>, x: &[S]) -> Result<IntensityVector<S::Real>> {
    set.check_dim(x.len())?;
    Ok(IntensityVector(set.rows().map(|a| inner(a, x).abs_sqr()).collect()))
}

/// `ρ = sqrt(Σ y_j / (τ₁ N))`
pub fn rho_from_intensities<T: Real>(y: &IntensityVector<T>, tau1: f64) -> Result<T> {
    if !(tau1 > 0.0 && tau1.is_finite()) {
        return Err(Error::InvalidArgument(format!("τ₁ must be positive, got {tau1}")));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("no intensities".into()));
    }
    let n = T::of(y.len() as f64);
    Ok((y.sum() / (T::of(tau1) * n)).sqrt())
}

/// `Y = (1/N) Σ y_j a_j a_j*`, exactly Hermitian.
pub fn build_y<S: Scalar>(set: &MeasurementSet<S>, y: &IntensityVector<S::Real>) -> Result<Matrix<S>> {
    set.check_count(y.len())?;
    let mut out = Matrix::zeros(set.dim());
    for (a, &w) in set.rows().zip(y.as_slice()) {
        out.add_rank_one_upper(w, a);
    }
    out.mirror_upper();
    out.scale_mut(S::Real::of(set.len() as f64).recip());
    Ok(out)
}

/// `M = Y − τ₄/(τ₃+τ₄) · D(Y − τ₂ρ² I)`; off-diagonal entries equal Y's.
pub fn build_m<S: Scalar>(y_mat: &Matrix<S>, rho: S::Real, profile: &MomentProfile) -> Result<Matrix<S>> {
    profile.validate()?;
    let w = S::Real::of(profile.diagonal_weight());
    let shift = S::Real::of(profile.tau2) * rho * rho;
    let mut m = y_mat.clone();
    for i in 0..m.dim() {
        let yii = y_mat[(i, i)].re();
        m[(i, i)] = S::from_real(yii - w * (yii - shift));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerOptions {
    pub iters: usize,
    /// Stop early once `‖Mv − λv‖ ≤ tol·|λ|`.
    pub tol: Option<f64>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { iters: 50, tol: None }
    }
}

impl PowerOptions {
    pub fn iters(iters: usize) -> Self {
        Self { iters, tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerResult<S: Scalar> {
    /// Rayleigh quotient `v* M v`.
    pub lambda: S::Real,
    /// Unit vector.
    pub vector: Vec<S>,
    /// `‖Mv − λv‖`
    pub residual: S::Real,
    pub iterations: usize,
}

/// Random unit start vector for the power method.
pub fn random_unit_vector<S: Scalar>(d: usize, seed: u64) -> Vec<S> {
    let mut s = rng::stream(seed);
    loop {
        let v: Vec<S> = (0..d)
            .map(|_| {
                let re: f64 = s.sample(StandardNormal);
                let im: f64 = s.sample(StandardNormal);
                S::from_parts(S::Real::of(re), S::Real::of(im))
            })
            .collect();
        let n = norm(&v);
        if n > S::Real::zero() {
            return v.into_iter().map(|a| a.scale(n.recip())).collect();
        }
    }
}

fn normalize<S: Scalar>(v: &mut [S]) -> S::Real {
    let n = norm(v);
    if n > S::Real::zero() {
        let r = n.recip();
        v.iter_mut().for_each(|a| *a = a.scale(r));
    }
    n
}

/// Power iteration `v ← Mv/‖Mv‖` from a random start.
pub fn power_method<S: Scalar>(m: &Matrix<S>, opts: PowerOptions, seed: u64) -> Result<PowerResult<S>> {
    if opts.iters == 0 {
        return Err(Error::InvalidArgument(
            "power method needs at least one iteration".into(),
        ));
    }
    if m.dim() == 0 || m.is_zero() {
        return Err(Error::NoDominantDirection);
    }
    let mut v = random_unit_vector::<S>(m.dim(), seed);
    let mut w = vec![S::zero(); m.dim()];
    let mut done = 0;
    for _ in 0..opts.iters {
        m.mul_vec_into(&v, &mut w);
        done += 1;
        if let Some(tol) = opts.tol {
            let lambda = inner(&v, &w).re();
            let res = residual_norm(&v, &w, lambda);
            if res <= S::Real::of(tol) * lambda.abs() {
                break;
            }
        }
        std::mem::swap(&mut v, &mut w);
        if normalize(&mut v) == S::Real::zero() {
            return Err(Error::NoDominantDirection);
        }
    }
    // Renormalize so that ‖v‖ = 1 to rounding.
    normalize(&mut v);
    m.mul_vec_into(&v, &mut w);
    let lambda = inner(&v, &w).re();
    let residual = residual_norm(&v, &w, lambda);
    Ok(PowerResult {
        lambda,
        vector: v,
        residual,
        iterations: done,
    })
}

fn residual_norm<S: Scalar>(v: &[S], mv: &[S], lambda: S::Real) -> S::Real {
    v.iter()
        .zip(mv)
        .fold(S::Real::zero(), |acc, (&a, &b)| acc + (b - a.scale(lambda)).abs_sqr())
        .sqrt()
}

/// An initial guess with its scale and power-method diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitResult<S: Scalar> {
    pub z0: Vec<S>,
    /// Target norm of `z0`.
    pub rho: S::Real,
    /// Dominant eigenvalue estimate.
    pub lambda: S::Real,
    /// Power-method residual `‖Mv − λv‖`.
    pub residual: S::Real,
}

fn scaled_to<S: Scalar>(v: &[S], target: S::Real) -> Vec<S> {
    let mut out: Vec<S> = v.iter().map(|&a| a.scale(target)).collect();
    // One correction pass trims the rounding of the unit vector's norm.
    let n = norm(&out);
    if n > S::Real::zero() {
        let r = target / n;
        out.iter_mut().for_each(|a| *a = a.scale(r));
    }
    out
}

/// Generalized spectral initialization from a precomputed `Y` and `ρ`.
pub fn gsi_from_y<S: Scalar>(
    y_mat: &Matrix<S>,
    rho: S::Real,
    profile: &MomentProfile,
    opts: PowerOptions,
    seed: u64,
) -> Result<InitResult<S>> {
    let m = build_m(y_mat, rho, profile)?;
    let p = power_method(&m, opts, seed)?;
    Ok(InitResult {
        z0: scaled_to(&p.vector, rho),
        rho,
        lambda: p.lambda,
        residual: p.residual,
    })
}

/// Generalized spectral initialization: top eigenvector of `M` scaled to `ρ`.
pub fn gsi<S: Scalar>(
    set: &MeasurementSet<S>,
    y: &IntensityVector<S::Real>,
    profile: &MomentProfile,
    opts: PowerOptions,
    seed: u64,
) -> Result<InitResult<S>> {
    profile.validate()?;
    let rho = rho_from_intensities(y, profile.tau1)?;
    let y_mat = build_y(set, y)?;
    gsi_from_y(&y_mat, rho, profile, opts, seed)
}

/// Scale of the classical initializer: `sqrt(d Σ y_j / Σ ‖a_j‖²)`.
pub fn baseline_scale<S: Scalar>(set: &MeasurementSet<S>, y: &IntensityVector<S::Real>) -> Result<S::Real> {
    set.check_count(y.len())?;
    let energy = crate::scalar::norm_sqr(set.as_slice());
    if energy == S::Real::zero() {
        return Err(Error::InvalidArgument("all measurement vectors are zero".into()));
    }
    Ok((S::Real::of(set.dim() as f64) * y.sum() / energy).sqrt())
}

/// Classical spectral initialization from a precomputed `Y`.
pub fn baseline_si_from_y<S: Scalar>(
    y_mat: &Matrix<S>,
    scale: S::Real,
    opts: PowerOptions,
    seed: u64,
) -> Result<InitResult<S>> {
    let p = power_method(y_mat, opts, seed)?;
    Ok(InitResult {
        z0: scaled_to(&p.vector, scale),
        rho: scale,
        lambda: p.lambda,
        residual: p.residual,
    })
}

/// Classical spectral initialization: top eigenvector of `Y`, no diagonal
/// correction, scaled by [`baseline_scale`].
pub fn baseline_si<S: Scalar>(
    set: &MeasurementSet<S>,
    y: &IntensityVector<S::Real>,
    opts: PowerOptions,
    seed: u64,
) -> Result<InitResult<S>> {
    let scale = baseline_scale(set, y)?;
    let y_mat = build_y(set, y)?;
    baseline_si_from_y(&y_mat, scale, opts, seed)
}
