//! Structure-preserving simulation of energy-based differential-algebraic
//! systems
//!
//! `[∂z1 H; ż2; 0] = (J − R)[ż1; ∂z2 H; z3] + B u`, `y = Bᵀ[ż1; ∂z2 H; z3]`,
//! with `J = −Jᵀ` and `R = Rᵀ ⪰ 0`.
//!
//! The crate provides energy models, midpoint and discrete-gradient time
//! stepping, interconnection and projection-based reduction, energy and
//! structure diagnostics, and a collection of reference models.

pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod input;
pub mod integrators;
pub mod linalg;
pub mod structure;
pub mod system;
pub mod zoo;

pub use energy::{DiscreteGradientKind, Energy, EnergyModel};
pub use error::{Error, Result};
pub use input::InputSignal;
pub use linalg::{Matrix, Vector};
pub use system::{assemble, validate, EnergyBasedSystem, StatePartition, StructuredSystem, SystemDims};
