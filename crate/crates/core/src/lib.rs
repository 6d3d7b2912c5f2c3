//! Distance-constrained labellings of Cartesian products of graphs.
//!
//! The crate covers graph generation and products ([`graph`]), labelling
//! checks ([`labelling`]), the offset-set construction of optimal cyclic
//! labellings ([`construct`]), exact small-graph solvers ([`solver`]),
//! condition checkers and experiments ([`lab`]) and file formats ([`io`]).

pub mod construct;
pub mod error;
pub mod graph;
pub mod io;
pub mod lab;
pub mod labelling;
pub mod solver;

pub use error::{Error, Result};
