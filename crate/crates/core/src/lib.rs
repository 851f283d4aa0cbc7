pub mod contact;
pub mod error;
pub mod experiment;
pub mod fatou_bieberbach;
pub mod kobayashi;
pub mod numeric;
pub mod obstacle;

pub use error::{Error, Result};
