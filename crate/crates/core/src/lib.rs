//! Finite-dimensional Itô *-algebras: axiom checks, the canonical triangular
//! representation, the Brownian/Lévy decomposition, a text format, and
//! simulators cross-checking the multiplication table.

pub mod adsl;
pub mod algebra;
pub mod builtins;
pub mod decomp;
pub mod error;
pub mod focksim;
pub mod gns;
pub mod group;
pub mod ideal;
pub mod linalg;
pub mod report;

pub type C64 = num_complex::Complex64;

pub use algebra::{Element, ItoAlgebra, TableBuilder, DEFAULT_TOL};
pub use error::{Error, Result};
pub use group::FiniteGroup;
pub use report::{Check, Report};
