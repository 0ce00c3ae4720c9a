//! Numerical certificates for a synthesized controller: the Lyapunov
//! identities behind `Ŷ` and `X̂`, the block-diagonal closed-loop Gramian,
//! estimator orthogonality, the three formulas for the cost of
//! decentralization, the Youla parameters, the structured optimality
//! condition, the fixed-point maps and an independent Kronecker oracle.

mod duality;
mod estimators;
mod identities;
pub mod montecarlo;
mod oracle;
mod suite;
mod youla;

pub use duality::{duality_gaps, DualityGaps};
pub use estimators::{
    distance_from_h2_perp, estimator_systems, kalman_estimator, kalman_filter,
    orthogonality_residuals, stable_part_left_adjoint, stable_part_right_adjoint, zeta_estimator,
    EstimatorSystems,
};
pub use identities::{
    closed_loop_gramian, delta_cost, error_coordinates_loop, hat_pair, norm_gap, DeltaCost,
    GramianTriple, HatChecks, HatPair, NormGap,
};
pub use oracle::{
    centralized_model_match, free_entries, kron, vectorization_oracle, vectorize, OracleResult,
    ORACLE_GUARD,
};
pub use suite::{run_suite, CheckResult, SuiteOptions, SuiteReport};
pub use youla::{
    fixed_point_maps, model_match_loop, structured_optimality_residual, worst_block,
    youla_parameters, YoulaParameters,
};

use crate::linalg::Mat;

/// `‖a - b‖ / (1 + ‖b‖)` in the Frobenius norm.
pub fn rel_gap(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}
