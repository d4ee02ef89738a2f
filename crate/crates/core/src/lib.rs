pub mod benders;
pub mod cases;
pub mod cli;
pub mod error;
pub mod lp;
pub mod model;
pub mod network;
pub mod parallel;
pub mod pricing;

pub use error::{Error, Result};
