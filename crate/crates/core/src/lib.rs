//! Higher-order perturbation expansions for Ruelle transfer operators on
//! finite topological Markov shifts.
//!
//! Everything numerical is generic over [`Real`]; the aliases below fix
//! the scalar for the common cases.

pub mod dd;
pub mod error;
pub mod fixtures;
pub mod gapaudit;
pub mod gdms;
pub mod linalg;
pub mod perturb;
pub mod scalar;
pub mod series;
pub mod shift;
pub mod thermo;
pub mod transfer;

pub use dd::Dd;
pub use error::{Error, Result};
pub use scalar::Real;

pub type F64Jet = series::Jet<f64>;
pub type DdJet = series::Jet<Dd>;
pub type F64Matrix = linalg::Matrix<f64>;
pub type DdMatrix = linalg::Matrix<Dd>;
pub type F64Family = perturb::OperatorFamily<f64>;
pub type DdFamily = perturb::OperatorFamily<Dd>;
pub type F64Potential = thermo::PotentialFamily<f64>;
pub type DdPotential = thermo::PotentialFamily<Dd>;
