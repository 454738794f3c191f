//! Entanglement measures on energy-truncated models of bipartite quantum
//! systems.
//!
//! Infinite-dimensional local spaces are modelled by explicit cutoffs with
//! a discrete energy ladder per party ([`space`]). On top of the dense state
//! algebra in [`states`] the crate provides entropy functionals
//! ([`measures`]), explicit pathological and continuity constructions
//! ([`constructions`]) and variational measures for mixed states
//! ([`optimize`]).
//!
//! Composite basis vectors are ordered `i = a * d_B + b`. All public
//! entropies are in bits.

pub mod constructions;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod optimize;
pub mod random;
pub mod space;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use measures::{Certificate, MeasureReport};
pub use space::{BipartiteSpace, EnergyBudget, SpectrumSpec};
pub use states::{DensityOperator, PureState, SchmidtForm};

pub use num_complex::Complex64;
