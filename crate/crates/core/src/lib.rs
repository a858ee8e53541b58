pub mod error;
pub mod estimate;
pub mod limits;
pub mod mmm;
pub mod moments;
pub mod process;
pub mod spine;
pub mod tree;

pub use error::{Error, Result};
