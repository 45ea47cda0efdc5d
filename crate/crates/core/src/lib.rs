//! Finite commutative rings, tagged modules over them, and executable versions of the
//! module-class reductions behind the "Artinian principal ideal ring or Borel complete"
//! dichotomy for commutative rings.

pub mod error;
pub mod ring;
pub mod module;
pub mod linear;
pub mod amalgam;
pub mod lattice;
pub mod coder;
pub mod reductions;
pub mod radic;
pub mod classifier;
