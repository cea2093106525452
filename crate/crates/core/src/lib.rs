//! Memristive oscillator toolkit: simulation of Chua-type and mixed-mode
//! oscillators, Newtonian force laws with memory, loop integrals, rms
//! equivalents and SPICE export.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod analysis;
pub mod circuits;
pub mod equivalence;
pub mod error;
pub mod integrator;
pub mod jet;
pub mod memelement;
pub mod netlist;
pub mod newtonian;
pub mod scalar;

pub use circuits::{AugmentedState, CircuitModel, STATE_DIM};
pub use error::{Error, Result};
pub use integrator::{integrate, IntegratorOptions, Method, Trajectory};
pub use memelement::{MemElementKind, MemElementSpec, Polynomial};
pub use scalar::{Ring, Scalar};

pub type State = circuits::AugmentedState<f64>;
pub type Model = circuits::CircuitModel<f64>;
pub type MmoParams = circuits::MmoParams<f64>;
pub type RegularChuaParams = circuits::RegularChuaParams<f64>;
pub type CanonicalChuaParams = circuits::CanonicalChuaParams<f64>;
pub type Options = integrator::IntegratorOptions<f64>;
pub type Traj = integrator::Trajectory<f64>;
pub type Poly = memelement::Polynomial<f64>;
