pub mod categories;
pub mod cli;
pub mod error;
pub mod flows;
pub mod numerics;
pub mod ranks;
pub mod specfile;
pub mod thermo;

pub use error::{Error, Result};
