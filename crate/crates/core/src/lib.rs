#![doc = include_str!("../../../README.md")]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxfun;
pub mod error;
pub mod functional;
pub mod groundstate;
pub mod mesh;
pub mod ode;
pub mod params;
pub mod quad;
pub mod roots;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Params = params::SystemParams<f64>;
pub type Profile = groundstate::RadialProfile<f64>;
pub type Decay = groundstate::DecayReport<f64>;
pub type Inequalities = auxfun::InequalityReport<f64>;
pub type MpReport = functional::MpLevelReport<f64>;
pub type Rayleigh = functional::RayleighResult<f64>;
pub type Solution = solver::SolveResult<f64>;
pub type Sweep = solver::SweepResult<f64>;
