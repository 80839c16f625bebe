//! Prime and semiprime races in arithmetic progressions.
//!
//! * [`sieve`]: segmented Ω(n) classification.
//! * [`race`]: π(x;q,a), π2(x;q,a), Δ, Δ2, their normalizations and scans.
//! * [`zeros`]: Dirichlet characters, L-values, zero isolation and zero files.
//! * [`model`]: the limiting distribution and Monte Carlo densities.
//! * [`explicit`]: truncated explicit formulas compared against sieved data.

pub mod arith;
pub mod explicit;
pub mod model;
pub mod race;
pub mod sieve;
pub mod zeros;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
