//! Sealed-bid auction mechanisms for allocating space-time-frequency
//! resource slots among IoT uplinks: the composite valuation model, its
//! equilibrium bidding solvers, four auction mechanisms (first-price,
//! second-price, VCG, and a modified simultaneous ascending auction), the
//! post-allocation dispersion-vector optimization, and a seeded Monte
//! Carlo sweep harness.

pub mod equilibria;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod mechanisms;
pub mod numeric;
pub mod rng;
pub mod stfs;
pub mod valuation;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use mechanisms::Mechanism;
