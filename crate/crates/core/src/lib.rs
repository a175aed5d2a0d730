pub mod error;
pub mod gsvd;
pub mod operators;
pub mod minimize;
pub mod picard;
pub mod selectors;
pub mod tikhonov;

pub use error::{Error, Result};
