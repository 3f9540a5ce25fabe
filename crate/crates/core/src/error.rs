use thiserror::Error;

/// Errors raised by the spectral machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation that demands a mean-free field received one with a
    /// nonzero spherical average.
    #[error("non-mean-free input: |<u,Y_0^0>| = {mean:.3e}")]
    NonMeanFree { mean: f64 },

    /// Shifted Helmholtz inversion hit a nonzero kernel component.
    #[error("kernel obstruction: degree-{degree} content {norm:.3e} exceeds tolerance")]
    KernelObstruction { degree: usize, norm: f64 },

    /// Grid cannot resolve the requested spectral content.
    #[error("grid too coarse: need n_theta >= {need_theta}, n_phi >= {need_phi} (have {have_theta} x {have_phi})")]
    GridTooCoarse {
        need_theta: usize,
        need_phi: usize,
        have_theta: usize,
        have_phi: usize,
    },

    /// The 2x2 compatibility system for (A, B) is singular.
    #[error("degenerate compatibility system: |det| = {det:.3e}")]
    DegenerateCompatibility { det: f64 },

    /// Kernel projection defect in the contraction step exceeded tolerance.
    #[error("compatibility failure: kernel defect {defect:.3e} exceeds {limit:.1e}")]
    CompatibilityFailure { defect: f64, limit: f64 },

    /// The fixed-point iteration did not contract.
    #[error("no contraction at this epsilon ({eps}): {iterations} iterations, last step {last_step:.3e}")]
    NoContraction {
        eps: f64,
        iterations: usize,
        last_step: f64,
    },

    /// Parameters violate an operation precondition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Ratio with vanishing denominator.
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    /// The requested time step violates the advective stability bound.
    #[error("unstable time step: dt * u_max * n_max = {cfl:.3e} exceeds {limit}")]
    UnstableTimeStep { cfl: f64, limit: f64 },

    /// Time evolution produced a non-finite value.
    #[error("solution blow-up at t = {t:.6}")]
    BlowUp { t: f64 },

    /// Malformed field file or record.
    #[error("field format error: {0}")]
    FieldFormat(String),
}
