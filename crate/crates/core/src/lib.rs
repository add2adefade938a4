//! Information-thermodynamics simulation toolkit.
//!
//! Energies are expressed in absolute units (`kT` times nats) unless a
//! function says otherwise; [`thermo::ThermalContext::to_bits`] converts to
//! units of `kT ln 2`.
//!
//! Modules:
//! - [`thermo`]: closed-form energy accounting for bit engines and generators.
//! - [`revlogic`]: reversible gates, circuits, bijectivity and erasure cost.
//! - [`refinery`]: register swap dynamics, trajectory search, stream refiners.
//! - [`atm`]: autonomous Turing machine with an exact integer energy ledger.
//! - [`learner`]: statistical-sorting pattern learning with actions.
//! - [`terrain`]: variational navigation in a continuous resource field.
//!
//! Heavy sweeps run data-parallel through [`exec::Exec`] when the `parallel`
//! feature (on by default) is enabled, and sequentially otherwise.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atm;
pub mod exec;
pub mod learner;
pub mod refinery;
pub mod revlogic;
pub mod rng;
pub mod terrain;
pub mod thermo;

pub use exec::Exec;
pub use thermo::ThermalContext;
