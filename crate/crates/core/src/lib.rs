pub mod algebra;
pub mod cli;
pub mod error;
pub mod floquet;
pub mod genfunc;
pub mod hicks;
pub mod lattice;
pub mod recurrence;
pub mod way_required;

pub use error::{Error, Result};
