//! Exact-arithmetic tools for inhomogeneous Diophantine approximation:
//! continued fractions, the three-distance partition of the circle,
//! liminf scans, Cantor-type covers and their dimension bounds,
//! singular-on-average statistics, and best approximations of matrices.

pub mod cf;
pub mod cli;
pub mod error;
pub mod fractal;
pub mod interval;
pub mod matrix;
pub mod inhomog;
pub mod partition;
pub mod report;
pub mod singular;

pub use cf::{expand_cf, fixture, fixtures, orbit_point, qdist, Alpha, ConvergentSeq, RealNumberSpec, Rule};
pub use error::{Error, Result};
pub use interval::{parse_rat, Rat, RatInterval};
pub use partition::{build_partition, locate_descent, orbit_count_lower, orbit_membership, CirclePartition, Target};
