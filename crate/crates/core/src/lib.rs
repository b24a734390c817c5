//! Projective configuration counts: exact combinatorial bounds, dimension
//! reduction, and stochastic counting over prime fields.

mod bigjson;
pub mod bounds;
pub mod chow;
pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod ffield;
pub mod groebner;
pub mod instance;
pub mod poly;
pub mod reduce;
pub mod polysys;

pub use error::{Error, Result};
pub use instance::{parse_instance, Format, Instance, Violation};
