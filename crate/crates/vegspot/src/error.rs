//! Error type shared by all solvers in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violate the spot/gap existence window
    /// max{9b/2, 4b+1/b} < a/m < 9b/2 + 2/b.
    #[error("parameter restriction violated: {0}")]
    RestrictionViolated(String),

    /// Adaptive step control collapsed during ODE integration.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// Reduced-flow shoot never reached the jump level u = u_f.
    #[error("no crossing of u = u_f: {0}")]
    NoCrossing(String),

    /// The core and far-field curves do not intersect (gap-side parameters
    /// passed to the spot predictor or vice versa).
    #[error("no intersection: {0}")]
    NoIntersection(String),

    /// Newton iteration failed to converge; carries the residual history.
    #[error("Newton diverged after {iterations} iterations, last residual {last_residual:.3e}")]
    NewtonDiverged {
        iterations: usize,
        last_residual: f64,
        history: Vec<f64>,
    },

    /// Interface radii for an initial guess are malformed.
    #[error("bad radii: {0}")]
    BadRadii(String),

    /// Grid too coarse to resolve the fast interface.
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// Eigenvalue iteration stalled; carries the residual history.
    #[error("eigenvalue solver stalled after {iterations} iterations, best residual {best_residual:.3e}")]
    EigSolverStalled {
        iterations: usize,
        best_residual: f64,
    },

    /// Riccati shoot for the slow eigenfunction left its trust window.
    #[error("log-derivative blow-up at r = {0}")]
    BlowUp(f64),

    /// Field magnitude exceeded 1e6 during time integration; reports t.
    #[error("simulation blow-up at t = {0}")]
    SimBlowUp(f64),

    /// 2D domain cannot contain the embedded radial profile.
    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    /// Interface-mode amplitudes left the linear-fit window.
    #[error("linear regime exceeded: {0}")]
    RegimeExceeded(String),

    /// Asymptotic eigenvalue formula has a near-singular denominator.
    #[error("pole in eigenvalue formula: |denominator| = {0:.3e}")]
    PoleNear(f64),

    /// Continuation step control hit its floor.
    #[error("continuation step floor reached at a = {0}")]
    StepFloorReached(f64),

    /// File format / IO problem.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
