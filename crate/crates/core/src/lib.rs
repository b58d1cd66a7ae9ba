pub mod blockcore;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod functional;
pub mod inverse;
pub mod orthopoly;

pub use error::{Error, Result};
