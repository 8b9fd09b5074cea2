//! Wirtinger-flow refinement.
//!
//! Gradient descent on `E(z) = (1/2N) Σ (|a_j* z|² − y_j)²` with either a
//! fixed step or Barzilai–Borwein steps. The gradient returned here is
//! `g = (1/N) Σ (|a_j* z|² − y_j)(a_j* z) a_j`, so the real directional
//! derivative of `E` along `u` is `2 Re⟨u, g⟩` in both fields.

use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{all_finite, inner, norm, norm_sqr, Real, Scalar};
use crate::spectral::{IntensityVector, MeasurementSet};

fn check_inputs<S: Scalar>(z: &[S], set: &MeasurementSet<S>, y: &IntensityVector<S::Real>) -> Result<()> {
    set.check_dim(z.len())?;
    set.check_count(y.len())
}

/// Objective and gradient in one pass over the measurements.
pub fn objective_and_gradient<S: Scalar>(
    z: &[S],
    set: &MeasurementSet<S>,
    y: &IntensityVector<S::Real>,
) -> Result<(S::Real, Vec<S>)> {
    check_inputs(z, set, y)?;
    Ok(eval(z, set, y.as_slice()))
}

fn eval<S: Scalar>(z: &[S], set: &MeasurementSet<S>, y: &[S::Real]) -> (S::Real, Vec<S>) {
    let mut g = vec![S::zero(); z.len()];
    let mut f = S::Real::zero();
    for (a, &yj) in set.rows().zip(y) {
        let c = inner(a, z);
        let r = c.abs_sqr() - yj;
        f += r * r;
        let w = c.scale(r);
        for (gi, &ai) in g.iter_mut().zip(a) {
            *gi += w * ai;
        }
    }
    let inv_n = S::Real::of(set.len() as f64).recip();
    g.iter_mut().for_each(|v| *v = v.scale(inv_n));
    (f * inv_n * S::Real::of(0.5), g)
}

/// `E(z) = (1/2N) Σ (|a_j* z|² − y_j)²`
pub fn objective<S: Scalar>(z: &[S], set: &MeasurementSet<S>, y: &IntensityVector<S::Real>) -> Result<S::Real> {
    check_inputs(z, set, y)?;
    let sum = set.rows().zip(y.as_slice()).fold(S::Real::zero(), |acc, (a, &yj)| {
        let r = inner(a, z).abs_sqr() - yj;
        acc + r * r
    });
    Ok(sum / S::Real::of(2.0 * set.len() as f64))
}

/// `g = (1/N) Σ (|a_j* z|² − y_j)(a_j* z) a_j`
pub fn gradient<S: Scalar>(z: &[S], set: &MeasurementSet<S>, y: &IntensityVector<S::Real>) -> Result<Vec<S>> {
    objective_and_gradient(z, set, y).map(|(_, g)| g)
}

/// `min_θ ‖z − x e^{iθ}‖` and its minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignedDistance<T> {
    /// In `[0, 2π)`; `0` or `π` in the real field.
    pub theta: T,
    pub value: T,
}

pub fn phase_align<S: Scalar>(z: &[S], x: &[S]) -> Result<AlignedDistance<S::Real>> {
    if z.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: z.len(),
        });
    }
    Ok(align(z, x))
}

fn align<S: Scalar>(z: &[S], x: &[S]) -> AlignedDistance<S::Real> {
    let c = inner(x, z);
    let theta = if c == S::zero() {
        S::Real::zero()
    } else {
        c.phase_angle()
    };
    let phase = S::unit_phase(theta);
    let value = z
        .iter()
        .zip(x)
        .fold(S::Real::zero(), |acc, (&zi, &xi)| acc + (zi - xi * phase).abs_sqr())
        .sqrt();
    AlignedDistance { theta, value }
}

/// `dist(z, x) / ‖x‖`
pub fn relative_error<S: Scalar>(z: &[S], x: &[S]) -> Result<S::Real> {
    let nx = norm(x);
    if nx == S::Real::zero() {
        return Err(Error::InvalidArgument("relative error against a zero signal".into()));
    }
    Ok(phase_align(z, x)?.value / nx)
}

/// Barzilai–Borwein step `|Re⟨s, g⟩| / ‖g‖²`, or `fallback` when either the
/// numerator or the denominator vanishes.
pub fn bb_step<S: Scalar>(s: &[S], g: &[S], fallback: S::Real) -> S::Real {
    let den = norm_sqr(g);
    let num = inner(s, g).re().abs();
    if den == S::Real::zero() || num == S::Real::zero() {
        return fallback;
    }
    let step = num / den;
    if step.is_finite() && step > S::Real::zero() {
        step
    } else {
        fallback
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepMode {
    Fixed {
        xi: f64,
    },
    /// `None` steps default to `0.1 / ‖∇E(z₀)‖`.
    BarzilaiBorwein {
        first_step: Option<f64>,
        fallback_step: Option<f64>,
    },
}

impl StepMode {
    pub fn bb() -> Self {
        StepMode::BarzilaiBorwein {
            first_step: None,
            fallback_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub step_mode: StepMode,
    pub max_iters: usize,
    pub grad_norm_tol: f64,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_mode: StepMode::bb(),
            max_iters: 2000,
            grad_norm_tol: 1e-16,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.grad_norm_tol.is_nan() || self.grad_norm_tol < 0.0 {
            return Err(Error::InvalidArgument("grad_norm_tol must be nonnegative".into()));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self.step_mode {
            StepMode::Fixed { xi } if !positive(xi) => {
                Err(Error::InvalidArgument(format!("fixed step must be positive, got {xi}")))
            }
            StepMode::BarzilaiBorwein {
                first_step,
                fallback_step,
            } if first_step.is_some_and(|v| !positive(v)) || fallback_step.is_some_and(|v| !positive(v)) => {
                Err(Error::InvalidArgument("BB steps must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    GradToleranceMet,
    MaxIters,
    /// An iterate overflowed; `final_z` is the last finite one.
    NonFinite,
}

/// Per-iterate values, `z₀` included.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace<T> {
    pub objective: Vec<T>,
    pub grad_norm: Vec<T>,
    /// Empty unless ground truth was supplied.
    pub rel_error: Vec<T>,
}

impl<T> Trace<T> {
    pub fn len(&self) -> usize {
        self.objective.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objective.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport<S: Scalar> {
    pub final_z: Vec<S>,
    pub iterations: usize,
    pub status: SolveStatus,
    pub final_objective: S::Real,
    pub final_grad_norm: S::Real,
    pub final_rel_error: Option<S::Real>,
    pub trace: Option<Trace<S::Real>>,
}

/// Gradient descent `z_{k+1} = z_k − ξ_k ∇E(z_k)` from `z0`.
pub fn solve<S: Scalar>(
    set: &MeasurementSet<S>,
    y: &IntensityVector<S::Real>,
    z0: &[S],
    config: &SolverConfig,
    ground_truth: Option<&[S]>,
) -> Result<SolveReport<S>> {
    config.validate()?;
    check_inputs(z0, set, y)?;
    if !all_finite(z0) {
        return Err(Error::InvalidArgument("initial point is not finite".into()));
    }
    let x_norm = match ground_truth {
        Some(x) => {
            set.check_dim(x.len())?;
            let n = norm(x);
            if n == S::Real::zero() {
                return Err(Error::InvalidArgument("ground truth is the zero vector".into()));
            }
            Some((x, n))
        }
        None => None,
    };
    let rel = |z: &[S]| x_norm.map(|(x, n)| align(z, x).value / n);

    let y = y.as_slice();
    let mut z = z0.to_vec();
    let (mut f, mut g) = eval(&z, set, y);
    let mut gnorm = norm(&g);
    let mut trace = config.trace.then(Trace::default);
    let record = |trace: &mut Option<Trace<S::Real>>, f, gn, z: &[S]| {
        if let Some(t) = trace {
            t.objective.push(f);
            t.grad_norm.push(gn);
            if let Some(e) = rel(z) {
                t.rel_error.push(e);
            }
        }
    };
    record(&mut trace, f, gnorm, &z);

    let tol = S::Real::of(config.grad_norm_tol);
    let (first, fallback) = match config.step_mode {
        StepMode::Fixed { xi } => (S::Real::of(xi), S::Real::of(xi)),
        StepMode::BarzilaiBorwein {
            first_step,
            fallback_step,
        } => {
            let default = S::Real::of(0.1) / gnorm;
            let pick = |v: Option<f64>| v.map_or(default, S::Real::of);
            (pick(first_step), pick(fallback_step))
        }
    };

    let mut prev: Option<(Vec<S>, Vec<S>)> = None;
    let mut iterations = 0;
    let status = loop {
        if gnorm < tol {
            break SolveStatus::GradToleranceMet;
        }
        if iterations == config.max_iters {
            break SolveStatus::MaxIters;
        }
        let step = match (config.step_mode, &prev) {
            (StepMode::Fixed { .. }, _) | (_, None) => first,
            (StepMode::BarzilaiBorwein { .. }, Some((z_prev, g_prev))) => {
                let s: Vec<S> = z.iter().zip(z_prev).map(|(&a, &b)| a - b).collect();
                let dg: Vec<S> = g.iter().zip(g_prev).map(|(&a, &b)| a - b).collect();
                bb_step(&s, &dg, fallback)
            }
        };
        let z_next: Vec<S> = z.iter().zip(&g).map(|(&zi, &gi)| zi - gi.scale(step)).collect();
        let (f_next, g_next) = eval(&z_next, set, y);
        let gn_next = norm(&g_next);
        if !(all_finite(&z_next) && f_next.is_finite() && gn_next.is_finite()) {
            break SolveStatus::NonFinite;
        }
        prev = Some((std::mem::replace(&mut z, z_next), std::mem::replace(&mut g, g_next)));
        f = f_next;
        gnorm = gn_next;
        iterations += 1;
        record(&mut trace, f, gnorm, &z);
    };

    Ok(SolveReport {
        final_rel_error: rel(&z),
        final_z: z,
        iterations,
        status,
        final_objective: f,
        final_grad_norm: gnorm,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_measurements, Ensemble, EntryKind};
    use crate::scalar::FieldTag;
    use crate::spectral::{measure, random_unit_vector};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn one_row() -> (MeasurementSet<f64>, IntensityVector<f64>) {
        (
            MeasurementSet::from_vectors(&[vec![1.0, 0.0]]).unwrap(),
            IntensityVector::new(vec![0.0]).unwrap(),
        )
    }

    #[test]
    fn hand_computed_objective_and_gradient() {
        let (set, y) = one_row();
        assert_eq!(objective(&[2.0, 0.0], &set, &y).unwrap(), 8.0);
        assert_eq!(gradient(&[2.0, 0.0], &set, &y).unwrap(), vec![8.0, 0.0]);
        assert!(matches!(
            objective(&[1.0], &set, &y),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn objective_vanishes_at_any_phase_of_the_signal() {
        let e = Ensemble::builtin(FieldTag::Complex, EntryKind::Uniform);
        let set = sample_measurements::<Complex64>(&e, 30, 5, 2).unwrap();
        let x = random_unit_vector::<Complex64>(5, 3);
        let y = measure(&set, &x).unwrap();
        let rotated: Vec<_> = x.iter().map(|&v| v * Complex64::from_polar(1.0, 0.7)).collect();
        assert!(objective(&rotated, &set, &y).unwrap() < 1e-28);
        let g = gradient(&rotated, &set, &y).unwrap();
        assert!(norm(&g) < 1e-14);
    }

    #[test]
    fn phase_align_recovers_the_rotation() {
        let x = random_unit_vector::<Complex64>(6, 1);
        let z: Vec<_> = x.iter().map(|&v| v * Complex64::from_polar(1.0, 2.0)).collect();
        let a = phase_align(&z, &x).unwrap();
        assert!((a.theta - 2.0).abs() < 1e-12);
        assert!(a.value < 1e-14);
        let z: Vec<_> = x.iter().map(|&v| v * Complex64::from_polar(1.0, -1.0)).collect();
        assert!((phase_align(&z, &x).unwrap().theta - (2.0 * PI - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn phase_align_orthogonal_and_real_sign() {
        let a = phase_align(&[0.0, 3.0], &[4.0, 0.0]).unwrap();
        assert_eq!(a.theta, 0.0);
        assert_eq!(a.value, 5.0);
        let a = phase_align(&[-1.0, -2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(a.theta, PI);
        assert_eq!(a.value, 0.0);
        assert!(phase_align(&[1.0], &[1.0, 2.0]).is_err());
        assert!(relative_error(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bb_step_cases() {
        assert_eq!(bb_step(&[1.0, 0.0], &[2.0, 0.0], 9.0), 0.5);
        assert_eq!(bb_step(&[1.0, 0.0], &[0.0, 2.0], 9.0), 9.0);
        assert_eq!(bb_step(&[1.0, 0.0], &[0.0, 0.0], 9.0), 9.0);
        assert_eq!(bb_step(&[-1.0, 0.0], &[2.0, 0.0], 9.0), 0.5);
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.max_iters = 0;
        assert!(c.validate().is_err());
        let c = SolverConfig {
            step_mode: StepMode::Fixed { xi: 0.0 },
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SolverConfig {
            step_mode: StepMode::BarzilaiBorwein {
                first_step: Some(-1.0),
                fallback_step: None,
            },
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn starting_at_the_signal_stops_immediately() {
        let e = Ensemble::builtin(FieldTag::Real, EntryKind::Ternary);
        let set = sample_measurements::<f64>(&e, 40, 4, 2).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let y = measure(&set, &x).unwrap();
        let cfg = SolverConfig {
            trace: true,
            ..Default::default()
        };
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = solve(&set, &y, &neg, &cfg, Some(&x)).unwrap();
        assert_eq!(r.status, SolveStatus::GradToleranceMet);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.trace.unwrap().len(), 1);
        assert_eq!(r.final_rel_error, Some(0.0));
    }

    #[test]
    fn trace_lengths_match_iterations() {
        let e = Ensemble::builtin(FieldTag::Complex, EntryKind::Gaussian);
        let set = sample_measurements::<Complex64>(&e, 48, 6, 5).unwrap();
        let x = random_unit_vector::<Complex64>(6, 6);
        let y = measure(&set, &x).unwrap();
        let z0 = random_unit_vector::<Complex64>(6, 7);
        let cfg = SolverConfig {
            max_iters: 25,
            trace: true,
            ..Default::default()
        };
        let r = solve(&set, &y, &z0, &cfg, Some(&x)).unwrap();
        assert_eq!(r.status, SolveStatus::MaxIters);
        let t = r.trace.unwrap();
        assert_eq!(t.objective.len(), 26);
        assert_eq!(t.grad_norm.len(), 26);
        assert_eq!(t.rel_error.len(), 26);
    }

    #[test]
    fn small_fixed_step_descends() {
        let e = Ensemble::builtin(FieldTag::Real, EntryKind::Gaussian);
        let set = sample_measurements::<f64>(&e, 64, 8, 11).unwrap();
        let x = random_unit_vector::<f64>(8, 12);
        let y = measure(&set, &x).unwrap();
        let z0: Vec<f64> = x.iter().map(|v| v + 0.1).collect();
        let cfg = SolverConfig {
            step_mode: StepMode::Fixed { xi: 0.01 },
            max_iters: 300,
            trace: true,
            ..Default::default()
        };
        let t = solve(&set, &y, &z0, &cfg, None).unwrap().trace.unwrap();
        assert!(t.rel_error.is_empty());
        assert!(t.objective.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.objective.last().unwrap() < &(t.objective[0] * 0.5));
    }

    #[test]
    fn huge_fixed_step_reports_non_finite() {
        let e = Ensemble::builtin(FieldTag::Real, EntryKind::Gaussian);
        let set = sample_measurements::<f64>(&e, 20, 4, 1).unwrap();
        let y = measure(&set, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let cfg = SolverConfig {
            step_mode: StepMode::Fixed { xi: 1e6 },
            ..Default::default()
        };
        let r = solve(&set, &y, &[2.0, 0.0, 0.0, 0.0], &cfg, None).unwrap();
        assert_eq!(r.status, SolveStatus::NonFinite);
        assert!(all_finite(&r.final_z));
        assert!(r.iterations < 2000);
    }

    #[test]
    fn rejects_non_finite_start() {
        let (set, y) = one_row();
        assert!(solve(&set, &y, &[f64::NAN, 0.0], &SolverConfig::default(), None).is_err());
    }
}
