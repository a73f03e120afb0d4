//! Post-hoc analysis of traces: realized regret and violation, the
//! benchmark point, theoretical bounds and growth-rate fits.

mod benchmark;
mod bounds;
mod fit;
mod metrics;

pub use benchmark::*;
pub use bounds::*;
pub use fit::*;
pub use metrics::*;
