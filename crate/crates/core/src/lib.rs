pub mod budget;
pub mod characteristic;
pub mod cochain;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod heisenberg;
pub mod hjr;
pub mod linalg;
pub mod module;
pub mod resolution;
pub mod standard;

pub use budget::Budget;
pub use error::{Error, Result};
