//! Finite-dimensional operator-algebra toolkit for superselection structure.
//!
//! The crate covers matrix *-algebras and their commutants ([`algebra`]),
//! finite symmetry groups and averaging ([`groups`]), classical/quantum
//! channels and their constrained inversion ([`channels`]), Gibbs-state
//! estimation ([`thermal`]), sector decomposition and charge estimation
//! ([`sectors`]), toy lattice nets with the localization criterion
//! ([`dhrnet`]) and exact rewriting in the Cuntz algebra ([`cuntz`]).

pub mod algebra;
pub mod channels;
pub mod cuntz;
pub mod dhrnet;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod models;
pub mod sectors;
pub mod thermal;

pub use error::{Error, Result};
