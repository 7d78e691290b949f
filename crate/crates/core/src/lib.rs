pub mod certifier;
pub mod choi;
pub mod cli;
pub mod conjecture;
pub mod error;
pub mod io;
pub mod linalg;
pub mod objectives;
pub mod oracle;

pub use error::{Error, Result};
