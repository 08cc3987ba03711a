pub mod bounds;
pub mod entropy;
pub mod harness;
pub mod error;
pub mod matrix;
pub mod modular;
pub mod monotone;
pub mod quadrature;
pub mod recovery;
pub mod states;
pub mod subalgebra;

pub use error::{Error, Result};
