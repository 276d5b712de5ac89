//! Dynamics of two qubits coupled by a swapping interaction, with unequal
//! decay rates, in rescaled units.
//!
//! The library tracks the X-shaped density-matrix family analytically
//! ([`analytic`]), cross-checks it against direct RK4 integration of the
//! full master equation ([`oracle`]), analyzes the non-Hermitian generators
//! and their exceptional points ([`spectral`]), and solves for concurrence
//! extrema ([`entanglement`]).
//!
//! All public APIs use the rescaled decay rate `gamma`, the rescaled
//! disparity `kappa`, and the rescaled time `tau`. Conversions from raw
//! decay rates and coupling strength live on [`Params`].

pub mod analytic;
pub mod entanglement;
pub mod linalg;
pub mod oracle;
pub mod spectral;
pub mod state;

pub use analytic::{kernels, propagate, propagate_mixed, Branch, Discriminant, KernelValues};
pub use entanglement::{
    concurrence_10, concurrence_11, concurrence_mix, concurrence_x, correlation_xy,
    first_max_10, first_max_11, first_max_corr_xy, first_max_mix, FirstMax, Method,
};
pub use oracle::{integrate, wootters_concurrence, DensityMatrix, LindbladGenerator, Stepper};
pub use spectral::{
    damped_oscillator_spectrum, ep_detect, gauge_transform_check, generalized_eigenvectors,
    liouvillian_spectrum, pt_phase, DampedOscillator, EpScanTarget, GeneratorL, GeneratorM,
    Phase, SpectralReport,
};
pub use state::{
    initial_xstate, make_params, xstate_to_density, InitialCondition, Params, Trajectory, XState,
};

/// Errors produced by constructors and solvers in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Parameter or state constraints violated on construction.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    /// RK4 trace drift exceeded the allowed bound; reduce the step.
    #[error("integration step too large: {0}")]
    StepTooLarge(String),
    /// No exceptional point inside the requested scan range.
    #[error("no exceptional point in scan range [{0}, {1}]")]
    NoEpInRange(f64, f64),
    /// A Jordan chain was requested where the eigenvalue is not defective.
    #[error("eigenvalue not defective: {0}")]
    NotDefective(String),
    /// The clamped concurrence is identically zero on the search window.
    #[error("concurrence has no positive first maximum")]
    NoPositiveConcurrence,
    /// The stationary condition has no positive root.
    #[error("no first maximum exists")]
    NoMaximum,
    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
