//! Simulation and optimization toolkit for a nanodiamond spin interferometer in a magnetic
//! gradient trap.
//!
//! Physics routines are generic over [`Scalar`]; the aliases below fix the common choices.

pub mod coherent;
pub mod constants;
pub mod dd;
pub mod elliptic;
pub mod entanglement;
pub mod error;
pub mod magnetostatics;
pub mod model;
pub mod ode;
pub mod optimize;
pub mod quadrature;
pub mod scalar;
pub mod trajectory;
pub mod vec;

pub use dd::{DdConfig, DdScheme};
pub use entanglement::Scenario;
pub use error::{Error, Result};
pub use model::Spin;
pub use scalar::Scalar;
pub use trajectory::{FieldSource, SpinMoment};

/// Double-double scalar.
pub type Dd = twofloat::TwoFloat;

pub type PhysicalConstants = constants::PhysicalConstants<f64>;
pub type Material = model::Material<f64>;
pub type NanodiamondParams = model::NanodiamondParams<f64>;
pub type FieldConfig = model::FieldConfig<f64>;
pub type OscillatorParams = model::OscillatorParams<f64>;
pub type TrapModel = model::TrapModel<f64>;
pub type BranchState = coherent::BranchState<f64>;
pub type ProtocolConfig = entanglement::ProtocolConfig<f64>;
pub type ProtocolResult = entanglement::ProtocolResult<f64>;
pub type TwoQubitState = entanglement::TwoQubitState<f64>;
pub type LoopSource = magnetostatics::LoopSource<f64>;
pub type CoilAssembly = magnetostatics::CoilAssembly<f64>;
pub type FieldSample = magnetostatics::FieldSample<f64>;
pub type Vec3 = vec::Vec3<f64>;
pub type UniformGradient = trajectory::UniformGradient<f64>;
pub type IntegratorConfig = trajectory::IntegratorConfig<f64>;
pub type FlipSchedule = trajectory::FlipSchedule<f64>;
pub type Trajectory = trajectory::Trajectory<f64>;

pub type TrapModelDd = model::TrapModel<Dd>;
