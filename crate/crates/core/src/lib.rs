pub mod analysis;
pub mod codes;
pub mod construction;
pub mod error;
pub mod high_weight;
pub mod io;
pub mod low_weight;
pub mod scl;
pub mod wef;

pub use codes::{BitVec, CodeSpec, ConvPolynomial, PathPrefix};
pub use error::{Error, Result};
pub use wef::{WefCache, WeightEnumerator};
