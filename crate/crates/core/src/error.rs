use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Errors raised while building or differentiating fields.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("unknown gallery entry `{name}`; valid names: {}", valid.join(", "))]
    UnknownGallery { name: String, valid: Vec<String> },
    #[error("point is {distance:.3e} from the boundary, finite differences need a margin of {required:.3e}")]
    Margin { distance: f64, required: f64 },
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Errors from critical point location and refinement.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CritError {
    #[error("Newton refinement did not converge (best |grad| = {best_grad_norm:.3e})")]
    NoConvergence { best: Vec<f64>, best_grad_norm: f64 },
    #[error("grid resolution {0} is below the minimum of 8")]
    GridTooCoarse(usize),
}

/// Errors from index computations and the Poincare-Hopf audit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("gradient vanishes on the probe sphere (min |grad| = {min_grad:.3e}); zero is not isolated at this radius")]
    NonIsolated { min_grad: f64 },
    #[error("winding residual {residual:.3} too large; retry with n_samples >= {suggested}")]
    UnderSampled { residual: f64, suggested: usize },
    #[error("Hessian is degenerate (min |eigenvalue| = {min_abs_eig:.3e})")]
    Degenerate { min_abs_eig: f64 },
    #[error("index computation unsupported: {0}")]
    Unsupported(String),
    #[error("tangential boundary zeros are not isolated even after perturbation")]
    NonGeneric,
    #[error("gradient vanishes on the boundary near {location:?}")]
    BoundaryCritical { location: Vec<f64> },
    #[error("{count} critical cell(s) could not be resolved")]
    Unresolved { count: usize },
    #[error("critical point at {location:?}: {source}")]
    AtPoint {
        location: Vec<f64>,
        #[source]
        source: alloc::boxed::Box<IndexError>,
    },
}

/// Errors from Morse charts and flows.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorseError {
    #[error("Hessian is singular; point is not a Morse point")]
    NotMorse,
    #[error("m must lie in (0, 1), got {0}")]
    BadParameter(f64),
    #[error("flow denominator vanished at distance {distance:.3e} from the center")]
    FlowSingular { distance: f64 },
    #[error("shared radius {requested:.3e} exceeds chart radius {available:.3e}")]
    Coverage { requested: f64, available: f64 },
    #[error("point lies outside the chart ball (|x - p| = {distance:.3e} > r = {radius:.3e})")]
    OutsideChart { distance: f64, radius: f64 },
}

/// Errors from the mountain pass search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PassError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no path dips below f(p1) - path_tol; the endpoints are not separated")]
    NoSeparation,
    #[error("projection requires a convex domain")]
    Convexity,
    #[error("lowest path point did not settle on a critical point or boundary tangency (residual {residual:.3e})")]
    NotConverged { residual: f64 },
}

/// Top-level error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Crit(#[from] CritError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Pass(#[from] PassError),
}

impl Error {
    /// Short machine-readable tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Field(FieldError::UnknownGallery { .. }) => "unknown_gallery",
            Error::Field(_) => "field",
            Error::Crit(CritError::NoConvergence { .. }) => "no_convergence",
            Error::Crit(_) => "detector",
            Error::Index(IndexError::NonIsolated { .. }) => "non_isolated",
            Error::Index(IndexError::UnderSampled { .. }) => "under_sampled",
            Error::Index(IndexError::Degenerate { .. }) => "degenerate",
            Error::Index(IndexError::NonGeneric) => "non_generic",
            Error::Index(_) => "index",
            Error::Morse(MorseError::NotMorse) => "not_morse",
            Error::Morse(_) => "morse",
            Error::Pass(PassError::NoSeparation) => "no_separation",
            Error::Pass(_) => "mountain_pass",
        }
    }
}
