//! Monte-Carlo oracles for the moment identities and concentration trends,
//! plus a log-linear fit for convergence traces.
//!
//! Samples are drawn in [`MC_CHUNKS`] chunks, each from its own derived RNG
//! stream. Chunk means give a jackknife standard error for every estimator
//! and a check passes when its residual is within [`MC_TOLERANCE_SIGMAS`]
//! standard errors of zero.

use num_traits::{Float, One, Zero};
use serde::Serialize;

use crate::ensemble::{moment_profile, CustomEntry, Ensemble, EntryDistribution, MomentProfile};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_op_norm, Matrix};
use crate::rng;
use crate::scalar::{inner, norm, norm_sqr, FieldTag, Real, Scalar};
use crate::spectral::{build_m, build_y, measure, rho_from_intensities};

pub const MC_CHUNKS: usize = 50;
pub const MC_TOLERANCE_SIGMAS: f64 = 5.0;
pub const MIN_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub estimator: String,
    pub sample_count: usize,
    pub residual: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Sub-checks of a composite report; its own numbers are those of the
    /// component closest to (or furthest past) its tolerance.
    pub components: Vec<ResidualReport>,
}

impl ResidualReport {
    fn leaf(estimator: impl Into<String>, sample_count: usize, residual: f64, stderr: f64) -> Self {
        let tolerance = MC_TOLERANCE_SIGMAS * stderr;
        Self {
            estimator: estimator.into(),
            sample_count,
            residual,
            stderr,
            tolerance,
            pass: residual <= tolerance,
            components: Vec::new(),
        }
    }

    fn composite(estimator: impl Into<String>, components: Vec<ResidualReport>) -> Self {
        let worst = components
            .iter()
            .max_by(|a, b| a.severity().total_cmp(&b.severity()))
            .expect("at least one component");
        Self {
            estimator: estimator.into(),
            sample_count: worst.sample_count,
            residual: worst.residual,
            stderr: worst.stderr,
            tolerance: worst.tolerance,
            pass: components.iter().all(|c| c.pass),
            components,
        }
    }

    fn severity(&self) -> f64 {
        if self.tolerance > 0.0 {
            self.residual / self.tolerance
        } else if self.residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn component(&self, estimator: &str) -> Option<&ResidualReport> {
        self.components.iter().find(|c| c.estimator == estimator)
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte-Carlo checks need at least {MIN_MC_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

/// Chunk sizes summing to `n`.
fn chunk_sizes(n: usize) -> impl Iterator<Item = usize> {
    (0..MC_CHUNKS).map(move |k| n / MC_CHUNKS + usize::from(k < n % MC_CHUNKS))
}

/// Jackknife standard error of the overall mean from per-chunk means, with
/// `dist` measuring the deviation of a chunk mean from the overall one.
fn chunk_stderr<T>(chunks: &[T], overall: &T, dist: impl Fn(&T, &T) -> f64) -> f64 {
    let k = chunks.len() as f64;
    let ss: f64 = chunks.iter().map(|c| dist(c, overall).powi(2)).sum();
    (ss / (k * (k - 1.0))).sqrt()
}

/// Size-weighted mean of chunk means.
fn mean_of<S: Scalar>(chunks: &[Matrix<S>], sizes: &[usize]) -> Matrix<S> {
    let total: usize = sizes.iter().sum();
    let mut m = Matrix::zeros(chunks[0].dim());
    for (c, &s) in chunks.iter().zip(sizes) {
        m.add_scaled(c, S::Real::of(s as f64 / total as f64));
    }
    m
}

/// `τ₂‖x‖² I + τ₃ x x* + τ₄ diag(|x_i|²)`
pub fn expected_second_moment<S: Scalar>(profile: &MomentProfile, x: &[S]) -> Matrix<S> {
    let nx2 = norm_sqr(x);
    let mut m = Matrix::outer(x, x);
    m.scale_mut(S::Real::of(profile.tau3));
    for (i, xi) in x.iter().enumerate() {
        let d = S::Real::of(profile.tau2) * nx2 + S::Real::of(profile.tau4) * xi.abs_sqr();
        m[(i, i)] += S::from_real(d);
    }
    m
}

/// Checks `E(A) = τ₁ I` and `E((x*Ax) A) = τ₂‖x‖² I + τ₃ x x* + τ₄ diag(|x_i|²)`
/// against the ensemble's own profile.
pub fn mc_condition_residual<S: Scalar>(
    ensemble: &Ensemble,
    x: &[S],
    n_samples: usize,
    seed: u64,
) -> Result<ResidualReport> {
    let profile = moment_profile(ensemble)?;
    mc_condition_residual_with_profile(ensemble, &profile, x, n_samples, seed)
}

/// As [`mc_condition_residual`] with an explicit profile under test.
pub fn mc_condition_residual_with_profile<S: Scalar>(
    ensemble: &Ensemble,
    profile: &MomentProfile,
    x: &[S],
    n_samples: usize,
    seed: u64,
) -> Result<ResidualReport> {
    profile.validate()?;
    ensemble.check_field::<S>()?;
    check_samples(n_samples)?;
    let d = x.len();
    if d == 0 || norm_sqr(x) == S::Real::zero() {
        return Err(Error::InvalidArgument("x must be nonzero".into()));
    }

    let sizes: Vec<usize> = chunk_sizes(n_samples).collect();
    let mut first = Vec::with_capacity(MC_CHUNKS);
    let mut second = Vec::with_capacity(MC_CHUNKS);
    let mut a = vec![S::zero(); d];
    for (k, &size) in sizes.iter().enumerate() {
        let mut s = rng::stream(rng::derive_seed(seed, k as u64));
        let mut f = Matrix::zeros(d);
        let mut g = Matrix::zeros(d);
        for _ in 0..size {
            ensemble.draw_vector(&mut s, &mut a);
            let q = inner(&a, x).abs_sqr();
            f.add_rank_one_upper(S::Real::one(), &a);
            g.add_rank_one_upper(q, &a);
        }
        for m in [&mut f, &mut g] {
            m.mirror_upper();
            m.scale_mut(S::Real::of(size as f64).recip());
        }
        first.push(f);
        second.push(g);
    }

    let op_dist = |a: &Matrix<S>, b: &Matrix<S>| hermitian_op_norm(&a.sub(b));
    let mut parts = Vec::new();
    for (name, chunks, expected) in [
        ("first_moment", &first, {
            let mut e = Matrix::identity(d);
            e.scale_mut(S::Real::of(profile.tau1));
            e
        }),
        ("second_moment", &second, expected_second_moment(profile, x)),
    ] {
        let mean = mean_of(chunks, &sizes);
        let stderr = chunk_stderr(chunks, &mean, op_dist);
        parts.push(ResidualReport::leaf(name, n_samples, op_dist(&mean, &expected), stderr));
    }
    Ok(ResidualReport::composite("moment_conditions", parts))
}

/// Expected block matrix `F(x)` of the complex-field analysis.
fn expected_f<S: Scalar>(profile: &MomentProfile, x: &[S]) -> Matrix<S> {
    let d = x.len();
    let nx2 = norm_sqr(x);
    let (t2, t3, t4) = (
        S::Real::of(profile.tau2),
        S::Real::of(profile.tau3),
        S::Real::of(profile.tau4),
    );
    // Top-left τ₃‖x‖² I + τ₂ x x* + τ₄ D(|x|²), top-right (τ₂+τ₃) x xᵀ + τ₄ D(x²).
    let tl = |r: usize, c: usize| {
        let mut v = (x[r] * x[c].conj()).scale(t2);
        if r == c {
            v += S::from_real(t3 * nx2 + t4 * x[r].abs_sqr());
        }
        v
    };
    let tr = |r: usize, c: usize| {
        let mut v = (x[r] * x[c]).scale(t2 + t3);
        if r == c {
            v += (x[r] * x[r]).scale(t4);
        }
        v
    };
    Matrix::from_fn(2 * d, |r, c| match (r < d, c < d) {
        (true, true) => tl(r, c),
        (true, false) => tr(r, c - d),
        (false, true) => tr(r - d, c).conj(),
        (false, false) => tl(r - d, c - d).conj(),
    })
}

/// Empirical `F(x)` (the average of `w w*` with `w = (Ax, conj(Ax))`,
/// `Ax = a (a* x)`) against its closed form. Complex field only.
pub fn mc_f_residual<S: Scalar>(ensemble: &Ensemble, x: &[S], n_samples: usize, seed: u64) -> Result<ResidualReport> {
    if S::FIELD == FieldTag::Real || ensemble.field == FieldTag::Real {
        return Err(Error::InvalidArgument(
            "F(x) is defined for the complex field; use mc_condition_residual".into(),
        ));
    }
    ensemble.check_field::<S>()?;
    check_samples(n_samples)?;
    let profile = moment_profile(ensemble)?;
    let d = x.len();
    if d == 0 {
        return Err(Error::InvalidArgument("x must be non-empty".into()));
    }

    let sizes: Vec<usize> = chunk_sizes(n_samples).collect();
    let mut chunks = Vec::with_capacity(MC_CHUNKS);
    let mut a = vec![S::zero(); d];
    let mut w = vec![S::zero(); 2 * d];
    for (k, &size) in sizes.iter().enumerate() {
        let mut s = rng::stream(rng::derive_seed(seed, k as u64));
        let mut f = Matrix::zeros(2 * d);
        for _ in 0..size {
            ensemble.draw_vector(&mut s, &mut a);
            let c = inner(&a, x);
            for i in 0..d {
                w[i] = a[i] * c;
                w[d + i] = w[i].conj();
            }
            f.add_rank_one_upper(S::Real::one(), &w);
        }
        f.mirror_upper();
        f.scale_mut(S::Real::of(size as f64).recip());
        chunks.push(f);
    }
    let op_dist = |a: &Matrix<S>, b: &Matrix<S>| hermitian_op_norm(&a.sub(b));
    let mean = mean_of(&chunks, &sizes);
    let stderr = chunk_stderr(&chunks, &mean, op_dist);
    let residual = op_dist(&mean, &expected_f(&profile, x));
    Ok(ResidualReport::leaf("f_matrix", n_samples, residual, stderr))
}

/// Closed forms of `E Re²(h*Ax)`, `E Re(h*Ax)·(h*Ah)` and `E (h*Ah)²` for
/// unit `x`, `h` with `h*x` real.
pub fn scalar_identity_values<S: Scalar>(profile: &MomentProfile, x: &[S], h: &[S]) -> [f64; 3] {
    let (t2, t3, t4) = (profile.tau2, profile.tau3, profile.tau4);
    let xh = inner(x, h).re().as_f64();
    let mut cross = 0.0;
    let mut sq = 0.0;
    let mut cubic = 0.0;
    let mut quartic = 0.0;
    for (&xi, &hi) in x.iter().zip(h) {
        let (ax, ah) = (xi.abs_sqr().as_f64(), hi.abs_sqr().as_f64());
        cross += ah * ax;
        sq += (hi.conj() * hi.conj() * xi * xi).re().as_f64();
        cubic += (xi.conj() * hi).re().as_f64() * ah;
        quartic += ah * ah;
    }
    [
        t3 / 2.0 + (t2 + t3 / 2.0) * xh * xh + t4 / 2.0 * (cross + sq),
        (t2 + t3) * xh + t4 * cubic,
        (t2 + t3) + t4 * quartic,
    ]
}

/// Rotates `h` so that `h*x` is real and nonnegative.
fn project_phase<S: Scalar>(x: &[S], h: &[S]) -> Vec<S> {
    let c = inner(h, x);
    if c == S::zero() {
        return h.to_vec();
    }
    let phase = S::unit_phase(c.phase_angle());
    h.iter().map(|&v| v * phase).collect()
}

/// Monte-Carlo check of the three scalar expectations in
/// [`scalar_identity_values`].
pub fn mc_scalar_identities<S: Scalar>(
    ensemble: &Ensemble,
    x: &[S],
    h: &[S],
    n_samples: usize,
    seed: u64,
) -> Result<ResidualReport> {
    ensemble.check_field::<S>()?;
    check_samples(n_samples)?;
    let profile = moment_profile(ensemble)?;
    if x.len() != h.len() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: h.len(),
        });
    }
    let unit = |v: &[S]| (norm(v).as_f64() - 1.0).abs() <= 1e-10;
    if !unit(x) || !unit(h) {
        return Err(Error::InvalidArgument("x and h must be unit vectors".into()));
    }
    let h = project_phase(x, h);
    if inner(&h, x).im().as_f64().abs() > 1e-12 {
        return Err(Error::InvalidArgument("h*x is not real after phase projection".into()));
    }

    let sizes: Vec<usize> = chunk_sizes(n_samples).collect();
    let mut chunks = Vec::with_capacity(MC_CHUNKS);
    let mut a = vec![S::zero(); x.len()];
    for (k, &size) in sizes.iter().enumerate() {
        let mut s = rng::stream(rng::derive_seed(seed, k as u64));
        let mut acc = [0.0f64; 3];
        for _ in 0..size {
            ensemble.draw_vector(&mut s, &mut a);
            let ah = inner(&a, &h);
            let p = (ah.conj() * inner(&a, x)).re().as_f64();
            let q = ah.abs_sqr().as_f64();
            acc[0] += p * p;
            acc[1] += p * q;
            acc[2] += q * q;
        }
        chunks.push(acc.map(|v| v / size as f64));
    }
    let mut mean = [0.0; 3];
    for (c, &size) in chunks.iter().zip(&sizes) {
        for i in 0..3 {
            mean[i] += c[i] * size as f64 / n_samples as f64;
        }
    }
    let expected = scalar_identity_values(&profile, x, &h);
    let names = ["re_squared", "re_times_quadratic", "quadratic_squared"];
    let parts = (0..3)
        .map(|i| {
            let stderr = chunk_stderr(&chunks, &mean, |a, b| a[i] - b[i]);
            ResidualReport::leaf(names[i], n_samples, (mean[i] - expected[i]).abs(), stderr)
        })
        .collect();
    Ok(ResidualReport::composite("scalar_identities", parts))
}

/// Runs the moment-condition check on `entry` at `d = 3` and `n = 10⁶` with
/// the profile implied by its declared moments. Returns the certified
/// ensemble on success.
pub fn certify_custom(field: FieldTag, entry: CustomEntry, seed: u64) -> Result<(Ensemble, ResidualReport)> {
    let (m2, m4) = crate::ensemble::entry_moments(&EntryDistribution::Custom(entry.clone()))?;
    let profile = MomentProfile::from_entry_moments(field, m2, m4)?;
    let candidate = Ensemble::new(field, EntryDistribution::Custom(entry.clone()));
    let x = [0.6, -0.48, 0.64];
    let report = match field {
        FieldTag::Real => mc_condition_residual_with_profile(&candidate, &profile, &x, 1_000_000, seed)?,
        FieldTag::Complex => {
            let xc = x.map(|v| num_complex::Complex64::new(v, 0.5 * v));
            mc_condition_residual_with_profile(&candidate, &profile, &xc, 1_000_000, seed)?
        }
    };
    if !report.pass {
        return Err(Error::UncertifiedEnsemble(format!(
            "`{}` failed the moment check: residual {:.3e} > tolerance {:.3e}",
            entry.name(),
            report.residual,
            report.tolerance
        )));
    }
    Ok((
        Ensemble::new(field, EntryDistribution::Custom(entry.mark_certified())),
        report,
    ))
}

/// Deviation statistics at one measurement count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub y_median: f64,
    pub y_p95: f64,
    pub m_median: f64,
    pub m_p95: f64,
    pub rho_median: f64,
    pub rho_p95: f64,
}

/// Linear-interpolation quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Median and 95th percentile over `trials` of `‖Y − E(Y)‖`, `‖M − E(M)‖`
/// and `|ρ² − ‖x‖²| / ‖x‖²` for each `N` in `n_grid`.
///
/// The references use the exact `‖x‖`: `E(Y) = τ₂‖x‖² I + τ₃ x x* + τ₄ D(|x|²)`
/// and `E(M) = τ₂‖x‖² I + τ₃ x x*`. For `x = 0` the ρ column is `ρ²` itself.
pub fn concentration_curve<S: Scalar>(
    ensemble: &Ensemble,
    x: &[S],
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConcentrationRow>> {
    if trials < 20 {
        return Err(Error::InvalidArgument(format!("need at least 20 trials, got {trials}")));
    }
    ensemble.check_field::<S>()?;
    let profile = moment_profile(ensemble)?;
    let d = x.len();
    let nx2 = norm_sqr(x).as_f64();
    let ey = expected_second_moment(&profile, x);
    let em = expected_second_moment(&MomentProfile { tau4: 0.0, ..profile }, x);

    n_grid
        .iter()
        .map(|&n| {
            let mut dy = Vec::with_capacity(trials);
            let mut dm = Vec::with_capacity(trials);
            let mut dr = Vec::with_capacity(trials);
            for t in 0..trials {
                let s = rng::derive_seed(rng::derive_seed(seed, n as u64), t as u64);
                let set = crate::ensemble::sample_measurements::<S>(ensemble, n, d, s)?;
                let y = measure(&set, x)?;
                let rho = rho_from_intensities(&y, profile.tau1)?;
                let y_mat = build_y(&set, &y)?;
                let m = build_m(&y_mat, rho, &profile)?;
                dy.push(hermitian_op_norm(&y_mat.sub(&ey)));
                dm.push(hermitian_op_norm(&m.sub(&em)));
                let r2 = rho.as_f64().powi(2);
                dr.push(if nx2 > 0.0 { (r2 - nx2).abs() / nx2 } else { r2 });
            }
            Ok(ConcentrationRow {
                n,
                y_median: quantile(&dy, 0.5),
                y_p95: quantile(&dy, 0.95),
                m_median: quantile(&dm, 0.5),
                m_p95: quantile(&dm, 0.95),
                rho_median: quantile(&dr, 0.5),
                rho_p95: quantile(&dr, 0.95),
            })
        })
        .collect()
}

/// Least-squares fit of `log e_k = intercept + slope·k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Zero for a constant trace.
    pub r_squared: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Fits the prefix of `trace` that stays above `floor`.
pub fn convergence_rate_fit(trace: &[f64], floor: f64) -> Result<RateFit> {
    let usable: Vec<f64> = trace
        .iter()
        .copied()
        .take_while(|&e| e > floor && e.is_finite())
        .collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!(
            "{} points above the floor {floor:e}; need at least {MIN_FIT_POINTS}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let logs: Vec<f64> = usable.iter().map(|e| e.ln()).collect();
    let mean_k = (n - 1.0) / 2.0;
    let mean_l = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (k, &l) in logs.iter().enumerate() {
        let dk = k as f64 - mean_k;
        let dl = l - mean_l;
        sxy += dk * dl;
        sxx += dk * dk;
        syy += dl * dl;
    }
    let slope = sxy / sxx;
    let intercept = mean_l - slope * mean_k;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: usable.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EntryKind;
    use num_complex::Complex64;

    #[test]
    fn geometric_trace_fits_exactly() {
        let trace: Vec<f64> = (0..200).map(|k| 0.9f64.powi(k)).collect();
        let fit = convergence_rate_fit(&trace, 1e-12).unwrap();
        assert!((fit.slope - 0.9f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.points, 200);
    }

    #[test]
    fn trace_is_cut_at_the_floor() {
        let trace: Vec<f64> = (0..400).map(|k| 0.8f64.powi(k).max(1e-15)).collect();
        let fit = convergence_rate_fit(&trace, 1e-12).unwrap();
        assert!(fit.points < 130);
        assert!((fit.slope - 0.8f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn constant_trace_reports_zero_r_squared() {
        let fit = convergence_rate_fit(&[0.3; 20], 1e-12).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn short_trace_is_rejected() {
        assert!(convergence_rate_fit(&[1.0; 9], 1e-12).is_err());
        assert!(convergence_rate_fit(&[1.0, 1e-13, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 1e-12).is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn composite_reports_worst_component() {
        let a = ResidualReport::leaf("a", 10, 1.0, 1.0);
        let b = ResidualReport::leaf("b", 10, 6.0, 1.0);
        let c = ResidualReport::composite("c", vec![a, b]);
        assert!(!c.pass);
        assert_eq!(c.residual, 6.0);
        assert_eq!(c.tolerance, 5.0);
        assert!(c.component("a").unwrap().pass);
    }

    #[test]
    fn sample_count_and_zero_signal_preconditions() {
        let e = Ensemble::builtin(FieldTag::Real, EntryKind::Gaussian);
        assert!(mc_condition_residual(&e, &[1.0, 0.0], 100, 1).is_err());
        assert!(mc_condition_residual(&e, &[0.0, 0.0], 20_000, 1).is_err());
    }

    #[test]
    fn f_residual_rejects_real_field() {
        let e = Ensemble::builtin(FieldTag::Real, EntryKind::Gaussian);
        assert!(mc_f_residual(&e, &[1.0, 0.0], 20_000, 1).is_err());
    }

    #[test]
    fn f_of_zero_is_exactly_zero() {
        let e = Ensemble::builtin(FieldTag::Complex, EntryKind::Ternary);
        let x = [Complex64::new(0.0, 0.0); 3];
        let r = mc_f_residual(&e, &x, 20_000, 1).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.stderr, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn scalar_identities_reduce_to_known_forms() {
        let p = MomentProfile::new(1.0, 1.0, 2.0, 0.0).unwrap();
        let x = [1.0, 0.0];
        let h = [0.0, 1.0];
        // h ⟂ x, real Gaussian: E Re²(h*Ax) = τ₂ = 1, cross term vanishes, E q² = 3.
        assert_eq!(scalar_identity_values(&p, &x, &h), [1.0, 0.0, 3.0]);
    }

    #[test]
    fn zero_signal_concentration_is_exact_for_y() {
        let e = Ensemble::builtin(FieldTag::Real, EntryKind::Uniform);
        let rows = concentration_curve(&e, &[0.0; 4], &[16, 32], 20, 3).unwrap();
        for r in rows {
            assert_eq!(r.y_median, 0.0);
            assert_eq!(r.y_p95, 0.0);
            assert_eq!(r.rho_median, 0.0);
        }
        assert!(concentration_curve(&e, &[1.0; 4], &[16], 19, 3).is_err());
    }
}
