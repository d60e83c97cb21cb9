//! Record files, timing and the `kdee` command-line tool on top of
//! [`kdee_core`].

mod error;
pub mod io;
pub mod timing;

pub use error::{Error, Result};
