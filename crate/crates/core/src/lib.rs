//! Optimal monotone contention resolution for uniform and partition matroids.
//!
//! The crate is organised in four layers:
//!
//! * [`matroid`]: ground sets, subsets, fractional points and the uniform and
//!   partition matroids with their rank functions and polytopes;
//! * [`scheme`] and [`balance`]: the rounding scheme itself, its closed-form
//!   marginals and the balancedness constants `c(k, n)`;
//! * [`analysis`]: brute-force enumeration of the polynomials behind the
//!   balancedness and optimality arguments, with calculus witnesses;
//! * [`mc`]: seeded Monte Carlo estimation of balancedness, marginals and
//!   sampler goodness of fit.

pub mod analysis;
pub mod balance;
pub mod error;
pub mod matroid;
pub mod mc;
pub mod rng;
pub mod scheme;
pub mod special;

pub use analysis::AnalysisContext;
pub use balance::{alpha, balancedness_c, balancedness_limit, partition_balancedness};
pub use error::{Error, Result};
pub use matroid::{
    Constraint, ElementSet, FractionalPoint, GroundSet, Matroid, PartitionMatroid, UniformMatroid,
    DEFAULT_POLYTOPE_TOL,
};
pub use mc::{BalancednessEstimate, BalancednessReport, TrialConfig};
pub use rng::RandomStream;
pub use scheme::{
    enumerate_distribution, marginal, mean_on, q_weight, select, select_partition, CrScheme,
    SchemeOutcome, SubsetDistribution,
};
