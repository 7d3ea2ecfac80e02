pub mod analytics;
pub mod arith;
pub mod cosets;
pub mod descent;
pub mod error;
pub mod gf;
pub mod group;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod relation;
pub mod rep;
pub mod rng;

pub use error::{Error, Result};
pub use gf::{FieldCtx, Fq2};
