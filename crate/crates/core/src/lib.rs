//! Achievable parallel-transport sets along discrete webs.
//!
//! - [`typevec`]: 0/1 type vectors, richness, splittings.
//! - [`groups`]: small finite groups on dense indices, commutator lengths.
//! - [`lattice`]: integer spans of type sets and their images mod m.
//! - [`generation`]: subgroups of `Gⁿ` generated by the `G_v`, predictions
//!   and factor-word certificates.
//! - [`web`]: paths as label rows, tassel conditions, transports.
//! - [`cli`]: the `webhol` command line.

pub mod cli;
pub mod error;
pub mod generation;
pub mod groups;
pub mod lattice;
pub mod typevec;
pub mod web;

pub use error::{Error, Result};
pub use generation::{ClosureOptions, FactorWord, TupleSubset};
pub use groups::{FiniteGroup, GroupDescriptor, GroupElement};
pub use lattice::IntegerLattice;
pub use typevec::{Splitting, TypeSet, TypeVector};
pub use web::DiscreteWeb;
