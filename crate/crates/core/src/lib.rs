//! Phase retrieval from rank-one intensity measurements `y_j = |a_j* x|²`
//! with sub-Gaussian measurement vectors.
//!
//! The pipeline is: pick an [`Ensemble`], sample a [`MeasurementSet`],
//! [`measure`] a signal, initialize with [`gsi`] (or the classical
//! [`baseline_si`]), then refine with [`solve`]. The [`verify`] module holds
//! Monte-Carlo checks of the ensemble moment profiles.
//!
//! Kernels are generic over [`Scalar`]; the aliases below fix the common
//! `f64` and `Complex64` instantiations.

pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use ensemble::{
    derived_constants, entry_moments, moment_profile, sample_measurements, CustomEntry, DerivedConstants, Ensemble,
    EnsembleSpec, EntryDistribution, EntryKind, EntrySampler, MomentProfile, TheoreticalR,
};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use scalar::{FieldTag, Real, Scalar};
pub use solver::{
    bb_step, gradient, objective, objective_and_gradient, phase_align, relative_error, solve, AlignedDistance,
    SolveReport, SolveStatus, SolverConfig, StepMode, Trace,
};
pub use spectral::{
    baseline_si, build_m, build_y, gsi, measure, power_method, rho_from_intensities, InitResult, IntensityVector,
    MeasurementSet, PowerOptions, PowerResult,
};

pub use num_complex::{Complex32, Complex64};

pub type RealSet = MeasurementSet<f64>;
pub type ComplexSet = MeasurementSet<Complex64>;
pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;
pub type RealInit = InitResult<f64>;
pub type ComplexInit = InitResult<Complex64>;
pub type RealSolveReport = SolveReport<f64>;
pub type ComplexSolveReport = SolveReport<Complex64>;
pub type Intensities = IntensityVector<f64>;
