//! Growth of entire functions near points of maximum modulus.
//!
//! Maximum term and central index, maximum modulus, the logarithmic
//! derivative `a(r)`, flat-disk checks, exceptional-set scans, and an explicit
//! infinite product whose zeros sit on circles with prescribed spacing.

pub mod borel;
pub mod counterexample;
pub mod entire;
pub mod error;
pub mod logc;
pub mod numeric;
pub mod scales;
pub mod verify;
pub mod weights;

pub use entire::{GrowthOptions, Method, PowerSeries, ScanOptions};
pub use error::{Error, Result};
pub use logc::LogComplex;
pub use scales::{GrowthScales, Scale};
pub use weights::{Growth, WeightFunction};
