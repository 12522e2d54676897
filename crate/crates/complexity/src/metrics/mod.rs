//! Complexity metrics per dimension-period: ECI/PCI from the second
//! eigenvector of the economy-similarity matrix, the nonlinear
//! fitness-complexity iteration, and concentration/intensity measures.

mod diversification;
mod eci;
mod fitness;
mod vector;

pub use diversification::{entropy, hhi, intensity};
pub use eci::{eci, economy_similarity, EciOutcome};
pub use fitness::{fitness, fixed_point_residual, FitnessOutcome, FITNESS_CLAMP};
pub use vector::{ComplexityVector, Metric, Normalization};
