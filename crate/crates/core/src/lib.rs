pub mod algebra;
pub mod equiv;
pub mod error;
pub mod folog;
pub mod random;
pub mod shrink;
pub mod structures;
pub mod translate;
pub mod wqo;

pub use error::{Error, Result};
