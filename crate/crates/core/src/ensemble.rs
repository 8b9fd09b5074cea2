//! Measurement ensembles and their moment profiles.
//!
//! An [`Ensemble`] draws measurement vectors with i.i.d. entries. In the
//! complex field each entry is `(u + i v)/√2` with `u`, `v` independent draws
//! of the real entry distribution. The ensemble's [`MomentProfile`] holds the
//! constants τ₁..τ₄ with
//!
//! ```text
//! E(A)          = τ₁ I
//! E((x*Ax) A)   = τ₂‖x‖² I + τ₃ x x* + τ₄ diag(|x_i|²)
//! ```
//!
//! for `A = a a*`. For i.i.d. symmetric entries with absolute moments
//! `m2 = E t²` and `m4 = E t⁴` these are
//!
//! | field   | τ₁ | τ₂   | τ₃    | τ₄              |
//! |---------|----|------|-------|-----------------|
//! | real    | m2 | m2²  | 2·m2² | m4 − 3·m2²      |
//! | complex | m2 | m2²  | m2²   | (m4 − 3·m2²)/2  |
//!
//! The table is checked against Monte-Carlo estimates in [`crate::verify`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{FieldTag, Real, Scalar};
use crate::spectral::MeasurementSet;

/// Built-in entry distributions, as named in descriptors and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    /// Standard normal.
    Gaussian,
    /// Uniform on `[-1, 1]`.
    Uniform,
    /// `-1`, `0`, `1` with probability 1/3 each.
    Ternary,
}

impl EntryKind {
    pub const ALL: [EntryKind; 3] = [EntryKind::Gaussian, EntryKind::Uniform, EntryKind::Ternary];

    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::Gaussian => "gaussian",
            EntryKind::Uniform => "uniform",
            EntryKind::Ternary => "ternary",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EntryKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(EntryKind::Gaussian),
            "uniform" => Ok(EntryKind::Uniform),
            "ternary" => Ok(EntryKind::Ternary),
            other => Err(format!(
                "unknown ensemble `{other}` (expected gaussian, uniform or ternary)"
            )),
        }
    }
}

pub type EntrySampler = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// User supplied entry distribution with declared absolute moments.
///
/// It has to pass [`crate::verify::certify_custom`] before it can produce a
/// moment profile.
#[derive(Clone)]
pub struct CustomEntry {
    name: String,
    sampler: EntrySampler,
    m2: f64,
    m4: f64,
    certified: bool,
}

impl CustomEntry {
    pub fn new(name: impl Into<String>, sampler: EntrySampler, m2: f64, m4: f64) -> Result<Self> {
        validate_moments(m2, m4)?;
        Ok(Self {
            name: name.into(),
            sampler,
            m2,
            m4,
            certified: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub(crate) fn mark_certified(mut self) -> Self {
        self.certified = true;
        self
    }
}

impl fmt::Debug for CustomEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomEntry")
            .field("name", &self.name)
            .field("m2", &self.m2)
            .field("m4", &self.m4)
            .field("certified", &self.certified)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum EntryDistribution {
    Gaussian,
    Uniform,
    Ternary,
    Custom(CustomEntry),
}

impl From<EntryKind> for EntryDistribution {
    fn from(k: EntryKind) -> Self {
        match k {
            EntryKind::Gaussian => EntryDistribution::Gaussian,
            EntryKind::Uniform => EntryDistribution::Uniform,
            EntryKind::Ternary => EntryDistribution::Ternary,
        }
    }
}

impl EntryDistribution {
    /// One real entry draw.
    #[inline]
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            EntryDistribution::Gaussian => rng.sample(StandardNormal),
            EntryDistribution::Uniform => rng.random_range(-1.0..=1.0),
            EntryDistribution::Ternary => (rng.random_range(0..3u32) as f64) - 1.0,
            EntryDistribution::Custom(c) => (c.sampler)(&mut AsDyn(rng)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            EntryDistribution::Gaussian => "gaussian".into(),
            EntryDistribution::Uniform => "uniform".into(),
            EntryDistribution::Ternary => "ternary".into(),
            EntryDistribution::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

// Adapter so that `?Sized` generic RNGs can be handed to a `dyn RngCore` sampler.
struct AsDyn<'a, R: RngCore + ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for AsDyn<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Serializable descriptor of a built-in ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub field: FieldTag,
    pub entry: EntryKind,
}

impl EnsembleSpec {
    pub fn new(field: FieldTag, entry: EntryKind) -> Self {
        Self { field, entry }
    }

    pub fn ensemble(self) -> Ensemble {
        Ensemble::new(self.field, self.entry.into())
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.entry)
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub field: FieldTag,
    pub entry: EntryDistribution,
}

impl Ensemble {
    pub fn new(field: FieldTag, entry: EntryDistribution) -> Self {
        Self { field, entry }
    }

    pub fn builtin(field: FieldTag, entry: EntryKind) -> Self {
        Self::new(field, entry.into())
    }

    /// Descriptor for built-in ensembles; `None` for custom ones.
    pub fn spec(&self) -> Option<EnsembleSpec> {
        let entry = match self.entry {
            EntryDistribution::Gaussian => EntryKind::Gaussian,
            EntryDistribution::Uniform => EntryKind::Uniform,
            EntryDistribution::Ternary => EntryKind::Ternary,
            EntryDistribution::Custom(_) => return None,
        };
        Some(EnsembleSpec::new(self.field, entry))
    }

    /// Every combination of field and built-in entry distribution.
    pub fn builtins() -> Vec<Ensemble> {
        [FieldTag::Real, FieldTag::Complex]
            .into_iter()
            .flat_map(|f| EntryKind::ALL.into_iter().map(move |e| Ensemble::builtin(f, e)))
            .collect()
    }

    /// Fills `out` with one measurement vector.
    #[inline]
    pub fn draw_vector<S: Scalar, R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [S]) {
        match S::FIELD {
            FieldTag::Real => {
                for v in out.iter_mut() {
                    *v = S::from_real(S::Real::of(self.entry.draw(rng)));
                }
            }
            FieldTag::Complex => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for v in out.iter_mut() {
                    let u = self.entry.draw(rng);
                    let w = self.entry.draw(rng);
                    *v = S::from_parts(S::Real::of(h * u), S::Real::of(h * w));
                }
            }
        }
    }

    pub(crate) fn check_field<S: Scalar>(&self) -> Result<()> {
        if self.field != S::FIELD {
            return Err(Error::FieldMismatch {
                ensemble: self.field,
                requested: S::FIELD,
            });
        }
        Ok(())
    }
}

fn validate_moments(m2: f64, m4: f64) -> Result<()> {
    if !(m2.is_finite() && m4.is_finite()) {
        return Err(Error::InvalidMoments(format!("non-finite moments m2={m2}, m4={m4}")));
    }
    if m2 <= 0.0 {
        return Err(Error::InvalidMoments(format!("m2 must be positive, got {m2}")));
    }
    if m4 < m2 * m2 {
        return Err(Error::InvalidMoments(format!(
            "m4 = {m4} < m2² = {} is impossible for a real distribution",
            m2 * m2
        )));
    }
    Ok(())
}

/// Second and fourth absolute moments `(E t², E t⁴)` of one real entry.
pub fn entry_moments(entry: &EntryDistribution) -> Result<(f64, f64)> {
    match entry {
        EntryDistribution::Gaussian => Ok((1.0, 3.0)),
        EntryDistribution::Uniform => Ok((1.0 / 3.0, 1.0 / 5.0)),
        EntryDistribution::Ternary => Ok((2.0 / 3.0, 2.0 / 3.0)),
        EntryDistribution::Custom(c) => {
            validate_moments(c.m2, c.m4)?;
            Ok((c.m2, c.m4))
        }
    }
}

/// The constants τ₁..τ₄ of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub tau4: f64,
}

impl MomentProfile {
    /// Validated profile: τ₁ > 0, τ₂ > 0, τ₃ > 0 and τ₃ + τ₄ > 0.
    pub fn new(tau1: f64, tau2: f64, tau3: f64, tau4: f64) -> Result<Self> {
        let p = Self { tau1, tau2, tau3, tau4 };
        p.validate()?;
        Ok(p)
    }

    /// Profile without the positivity checks, for perturbation experiments.
    pub fn unchecked(tau1: f64, tau2: f64, tau3: f64, tau4: f64) -> Self {
        Self { tau1, tau2, tau3, tau4 }
    }

    pub fn validate(&self) -> Result<()> {
        let t = [self.tau1, self.tau2, self.tau3, self.tau4];
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::ProfileViolation("finiteness of τ₁..τ₄"));
        }
        if self.tau1 <= 0.0 {
            return Err(Error::ProfileViolation("τ₁ > 0"));
        }
        if self.tau2 <= 0.0 {
            return Err(Error::ProfileViolation("τ₂ > 0"));
        }
        if self.tau3 <= 0.0 {
            return Err(Error::ProfileViolation("τ₃ > 0"));
        }
        if self.tau3 + self.tau4 <= 0.0 {
            return Err(Error::ProfileViolation("τ₃ + τ₄ > 0"));
        }
        Ok(())
    }

    /// Closed form for i.i.d. symmetric entries with moments `(m2, m4)`.
    pub fn from_entry_moments(field: FieldTag, m2: f64, m4: f64) -> Result<Self> {
        validate_moments(m2, m4)?;
        let s = m2 * m2;
        match field {
            FieldTag::Real => Self::new(m2, s, 2.0 * s, m4 - 3.0 * s),
            FieldTag::Complex => Self::new(m2, s, s, (m4 - 3.0 * s) / 2.0),
        }
    }

    /// Multiplies every τ by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::unchecked(self.tau1 * c, self.tau2 * c, self.tau3 * c, self.tau4 * c)
    }

    /// Weight `τ₄/(τ₃+τ₄)` of the diagonal correction.
    pub fn diagonal_weight(&self) -> f64 {
        self.tau4 / (self.tau3 + self.tau4)
    }
}

/// Moment profile of an ensemble.
///
/// Custom entry distributions must have been certified first.
pub fn moment_profile(ensemble: &Ensemble) -> Result<MomentProfile> {
    if let EntryDistribution::Custom(c) = &ensemble.entry {
        if !c.certified {
            return Err(Error::UncertifiedEnsemble(format!(
                "`{}` has not passed the moment check",
                c.name
            )));
        }
    }
    let (m2, m4) = entry_moments(&ensemble.entry)?;
    MomentProfile::from_entry_moments(ensemble.field, m2, m4)
}

/// Constants of the local curvature and smoothness analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub profile: MomentProfile,
    /// τ₂ + τ₃ − (τ₄)₋
    pub alpha: f64,
    /// τ₃ − (τ₄)₋
    pub beta: f64,
    /// τ₂ + τ₃ + |τ₄|
    pub alpha_hat: f64,
    /// Radius of the basin of linear convergence, relative to ‖x‖.
    pub epsilon0: f64,
}

/// Both readings of the smoothness constant R; see [`DerivedConstants::theoretical_r`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalR {
    pub delta: f64,
    /// With the `log N` factor in the dimension term.
    pub with_log_n: f64,
    /// Without the `log N` factor.
    pub without_log_n: f64,
}

fn negative_part(t: f64) -> f64 {
    (-t).max(0.0)
}

/// α, β, α̂ and ε₀ for a validated profile.
pub fn derived_constants(profile: &MomentProfile) -> Result<DerivedConstants> {
    profile.validate()?;
    let MomentProfile { tau2, tau3, tau4, .. } = *profile;
    let alpha = tau2 + tau3 - negative_part(tau4);
    let beta = tau3 - negative_part(tau4);
    let alpha_hat = tau2 + tau3 + tau4.abs();
    if beta <= 0.0 {
        // Implied by the checks above for entries of i.i.d. type, but not
        // for arbitrary profiles.
        return Err(Error::ProfileViolation("β = τ₃ − (τ₄)₋ > 0"));
    }
    let t4 = tau4.abs();
    let epsilon0 = 10.0 / (27.0 * alpha) * ((36.0 * t4 * t4 + 27.0 * alpha * beta / 10.0).sqrt() - 6.0 * t4);
    Ok(DerivedConstants {
        profile: *profile,
        alpha,
        beta,
        alpha_hat,
        epsilon0,
    })
}

impl DerivedConstants {
    /// Default proof parameter δ = β/10.
    pub fn default_delta(&self) -> f64 {
        self.beta / 10.0
    }

    /// The smoothness constant
    /// `R = max(96 α̂²(1+δ²)/(β−δ), 270 α̂(1+δ) + 60 d log N τ₁ (1+δ) ε₀²)`,
    /// also evaluated without the `log N` factor.
    pub fn theoretical_r(&self, d: usize, n: usize, delta: Option<f64>) -> Result<TheoreticalR> {
        let delta = delta.unwrap_or_else(|| self.default_delta());
        if !(delta > 0.0 && delta < self.beta) {
            return Err(Error::InvalidArgument(format!(
                "δ must satisfy 0 < δ < β = {}, got {delta}",
                self.beta
            )));
        }
        if d == 0 || n == 0 {
            return Err(Error::InvalidArgument("d and N must be positive".into()));
        }
        let first = 96.0 * self.alpha_hat.powi(2) * (1.0 + delta * delta) / (self.beta - delta);
        let base = 270.0 * self.alpha_hat * (1.0 + delta);
        let dim_term = 60.0 * d as f64 * self.profile.tau1 * (1.0 + delta) * self.epsilon0.powi(2);
        let log_n = (n as f64).ln();
        Ok(TheoreticalR {
            delta,
            with_log_n: first.max(base + dim_term * log_n),
            without_log_n: first.max(base + dim_term),
        })
    }
}

/// `n` measurement vectors of dimension `d`; identical seeds give identical sets.
pub fn sample_measurements<S: Scalar>(ensemble: &Ensemble, n: usize, d: usize, seed: u64) -> Result<MeasurementSet<S>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "measurement count and dimension must be positive (N={n}, d={d})"
        )));
    }
    ensemble.check_field::<S>()?;
    let mut stream = rng::stream(seed);
    let mut rows = vec![S::zero(); n * d];
    for row in rows.chunks_exact_mut(d) {
        ensemble.draw_vector(&mut stream, row);
    }
    MeasurementSet::from_rows(d, rows)
}
