pub mod bell;
pub mod eigen;
pub mod entanglement;
pub mod error;
pub mod lhv;
pub mod matrix;
pub mod quantum;
pub mod region;
pub mod states;

pub use error::{Error, Result};
