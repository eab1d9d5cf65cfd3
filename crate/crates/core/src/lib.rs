//! Exact log-domain probabilities, seeded samplers and large-deviation rate
//! functions for the Poisson–Dirichlet distribution, the Ewens sampling
//! formula and their finite-dimensional Dirichlet approximations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod lab;
pub mod logspace;
pub mod mass;
pub mod partition;
pub(crate) mod quad;
pub mod rates;
pub mod samplers;
pub mod simplex;
pub mod special;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use logspace::LogReal;
pub use mass::{AtomOrder, MassVector};
pub use partition::AllelePartition;
pub use samplers::SeedSpec;
pub use table::Table;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
