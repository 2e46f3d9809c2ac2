//! Gabidulin maximum-rank-distance codes and the codes derived from them:
//! subspace subcodes, direct sums of subspace subcodes, and subfield subcodes.

pub mod directsum;
pub mod error;
pub mod experiment;
pub mod field;
pub mod gabidulin;
pub mod linpoly;
mod poly;
pub mod qlinalg;
pub mod subfield;
pub mod subspace;

pub use directsum::{DirectSumCode, MonteCarloEstimate, ProbabilityForm};
pub use error::{Error, Result};
pub use field::{FieldOps, FieldTower, Fq, Fqn};
pub use gabidulin::{Decoded, GabidulinCode};
pub use linpoly::LinearizedPoly;
pub use qlinalg::{ErrorMode, ExtMatrix, Matrix, QMatrix};
pub use subfield::SubfieldFactorization;
pub use subspace::{Route, SubspaceBasis, SubspaceSubcode};
