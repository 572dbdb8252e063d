//! The delta = 0 skeleton of radial spots and gaps: explicit layer fronts,
//! Melnikov transversality integrals, the reduced slow flow and its energy,
//! the core/far-field curves whose crossing predicts the interface radius,
//! traveling fronts at small delta, and the front sideband coefficient.

mod front;
mod layer;
mod reduced;
mod sideband;

pub use front::{solve_traveling_front, u_star_front, FrontSolution};
pub use layer::{layer_front, melnikov_u, FrontDirection, LayerFront};
pub use reduced::{
    core_trajectory_for_radius, ReducedField,
    energy, gamma_in_gap, gamma_out, p_f_infinity, predict_interface_radius, reduced_flow_shoot,
    Branch, ReducedTrajectory, SingularPrediction,
};
pub use sideband::{sideband_coefficient, LayerWeight, SidebandReport};
