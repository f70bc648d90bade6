pub mod asymptotics;
pub mod bootstrap;
pub mod error;
pub mod exact;
pub mod orthogonality;
pub mod recursion;

pub use error::{Error, Result};
pub use recursion::Energy;
