//! Numerical toolkit for radially symmetric spot, gap, ring and target
//! solutions and planar fronts of the two-component dryland vegetation model
//!
//! ```text
//! U_t = lap U + a - U - U V^2
//! V_t = delta^2 lap V - m V + U V^2 (1 - b V)
//! ```
//!
//! with water `U`, vegetation `V`, rainfall `a`, mortality `m`, inverse soil
//! carrying capacity `b` and diffusion-ratio parameter `delta << 1`.
//!
//! The crate is organized around the slow/fast structure of the stationary
//! radial problem:
//!
//! - [`model`] — parameters, equilibria, nonlinearities and the closed-form
//!   spot/gap existence criterion.
//! - [`bessel`] — modified Bessel functions `I_nu`, `K_nu` (integer order,
//!   scaled variants), used by the far-field and core expansions.
//! - [`singular`] — everything at `delta = 0`: explicit layer fronts,
//!   Melnikov integrals, the reduced slow flow, the interface-radius
//!   predictor, traveling fronts and the front sideband coefficient.
//! - [`radial`] — Newton solver for stationary radial profiles at
//!   `delta > 0`, with continuation in `a` and interface detection.
//! - [`spectral`] — linearized stability of radial profiles per angular
//!   wavenumber, plus the asymptotic eigenvalue formulas.
//! - [`sim2d`] — IMEX time integration on a periodic square with interface
//!   contour diagnostics.
//! - [`io`] — CSV/JSON/raw-snapshot formats shared with the CLI.

pub mod bessel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod quad;
pub mod radial;
pub mod sim2d;
pub mod singular;
pub mod spectral;

pub use error::{Error, Result};
pub use model::ModelParams;
