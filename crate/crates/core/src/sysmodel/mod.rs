//! State-space algebra and the two-player plant model.

pub mod fixtures;
mod plant;
pub mod plant_file;
mod statespace;
mod triangular;

pub use plant::{
    selector, swap_permutation, AssumptionReport, Check, CostCovariance, Partition, TwoPlayerPlant,
};
pub use statespace::StateSpace;
pub use triangular::{triangularize_realization, Triangularized};
