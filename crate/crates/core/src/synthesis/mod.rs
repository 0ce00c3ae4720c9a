//! The optimal structured controller: four Riccati equations, the coupled
//! linear equations for `Φ` and `Ψ`, the gains `K̂`, `L̂`, both controller
//! realizations and the centralized baseline.

mod ares;
mod controller;
mod coupling;

pub use ares::{full_control_are, full_filter_are, solve_four_ares, AreBundle};
pub use controller::{
    alternative_from_gains, centralized_h2, closed_loop_norm, controller_from_gains, gains_hat,
    optimal_controller, CentralizedH2, Realization, SynthesisResult,
};
pub use coupling::{build_phi_psi_system, phi_psi_residuals, solve_phi_psi, CouplingSolution};
