//! Exact evaluation of the polynomials, derivatives and inequalities that
//! certify the scheme's balancedness, by enumeration over bitmasks.

mod alpha;
mod calculus;
mod enumerate;
mod grid;
mod polynomials;
mod simulate;

pub use alpha::{alpha_inequality_check, AlphaInequality, AlphaReport, AlphaViolation};
pub use calculus::{
    check_h_gradient, finite_difference_hessian, h_hessian_numeric, symmetric_eigenvalues,
    GradientReport, GRADIENT_STEP, HESSIAN_STEP,
};
pub use grid::{
    drop_grid_maximum, grid_maximize, h_grid_maximum, GridDomain, GridMax, GridSearch,
    GRID_MAX_DIM, POLYTOPE_GRID_SLACK,
};
pub use polynomials::{
    center_curvature, expected_rank, g_value, h_gradient, h_value, h_value_recursive,
    hessian_at_center, optimality_bound, p_weight, q_level,
};
pub use simulate::{g_via_simulation_consistency, DropEstimate};

pub(crate) use polynomials::drop_polynomial;

use crate::error::{Error, Result};
use crate::matroid::{ElementSet, GroundSet};

/// Largest ground set for single `2^n` enumerations.
pub const ENUMERATION_MAX_N: usize = 24;

/// Largest ground set for the double sum behind [`g_value`].
pub const DROP_POLYNOMIAL_MAX_N: usize = 20;

/// A ground set of size `n`, a rank `k`, and a distinguished element `e`
/// whose drop probability is studied. `S` is everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisContext {
    ground: GroundSet,
    k: usize,
    e: usize,
}

impl AnalysisContext {
    pub fn new(n: usize, k: usize, e: usize) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        if n > ENUMERATION_MAX_N {
            return Err(Error::TooLarge {
                size: n,
                cap: ENUMERATION_MAX_N,
            });
        }
        if e >= n {
            return Err(Error::ElementOutOfRange { index: e, n });
        }
        if k == 0 || k >= n {
            return Err(Error::Parameter(format!(
                "rank must satisfy 1 <= k <= n-1 (got k={k}, n={n})"
            )));
        }
        Ok(Self { ground, k, e })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn element(&self) -> usize {
        self.e
    }

    /// `S = N \ {e}`.
    pub fn rest(&self) -> ElementSet {
        self.ground.full().without(self.e)
    }
}
