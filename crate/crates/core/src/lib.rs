pub mod agents;
pub mod bell;
pub mod causal;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod microcausality;
mod optimize;
pub mod quantum;
pub mod sampling;
pub mod spacetime;
pub mod tolerance;

pub use error::{Error, Result};
