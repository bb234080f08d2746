//! Exact fair-division toolkit: valuations, fairness criteria, allocation
//! mechanisms and exhaustive manipulation search.

pub mod error;
pub mod fairness;
pub mod format;
pub mod mechanisms;
pub mod model;
pub mod random;
pub mod repro;
pub mod strategy;
pub mod value;

pub use error::{Error, ErrorClass, Result};
pub use fairness::Criterion;
pub use mechanisms::{MechanismConfig, MechanismId};
pub use model::{Allocation, GoodSet, Instance, Valuation};
pub use value::Value;
