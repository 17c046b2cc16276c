//! Dense grid maximization over the unit cube or a capped-sum slice of it.

use rayon::prelude::*;
use serde::Serialize;

use super::{drop_polynomial, h_value, AnalysisContext, DROP_POLYNOMIAL_MAX_N};
use crate::error::{Error, Result};
use crate::matroid::FractionalPoint;

/// Largest dimension accepted by [`grid_maximize`].
pub const GRID_MAX_DIM: usize = 5;

/// Slack on the sum cap, so that points with `x(N) = k` survive rounding.
pub const POLYTOPE_GRID_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridDomain {
    /// `[0, 1]^dim`
    Cube,
    /// `[0, 1]^dim ∩ {x(N) <= cap}`
    CappedSum(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearch {
    pub dim: usize,
    /// Requested points per unit; rounded up to a multiple of `multiple_of`.
    pub resolution: usize,
    pub multiple_of: usize,
    pub domain: GridDomain,
    /// The objective is invariant under permutations of the first
    /// `symmetric_prefix` coordinates, so only nondecreasing prefixes are
    /// visited.
    pub symmetric_prefix: usize,
}

impl GridSearch {
    pub fn cube(dim: usize, resolution: usize) -> Self {
        Self {
            dim,
            resolution,
            multiple_of: 1,
            domain: GridDomain::Cube,
            symmetric_prefix: 0,
        }
    }

    pub fn capped(dim: usize, resolution: usize, cap: f64) -> Self {
        Self {
            domain: GridDomain::CappedSum(cap),
            ..Self::cube(dim, resolution)
        }
    }

    pub fn snapped_to(self, multiple_of: usize) -> Self {
        Self {
            multiple_of,
            ..self
        }
    }

    pub fn with_symmetric_prefix(self, symmetric_prefix: usize) -> Self {
        Self {
            symmetric_prefix,
            ..self
        }
    }

    /// Resolution after snapping.
    pub fn effective_resolution(&self) -> usize {
        let m = self.multiple_of.max(1);
        self.resolution.div_ceil(m) * m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMax {
    /// Grid indices of the maximizer; the point is `indices / resolution`.
    pub indices: Vec<usize>,
    pub point: Vec<f64>,
    pub value: f64,
    pub resolution: usize,
    /// Number of grid points evaluated.
    pub evaluated: u64,
}

#[derive(Clone)]
struct Best {
    value: f64,
    indices: Vec<usize>,
    evaluated: u64,
}

impl Best {
    fn empty() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            indices: Vec::new(),
            evaluated: 0,
        }
    }

    // earlier candidates win ties
    fn merge(mut self, other: Best) -> Self {
        if other.value > self.value {
            self.value = other.value;
            self.indices = other.indices;
        }
        self.evaluated += other.evaluated;
        self
    }
}

struct Walk<'f, F> {
    f: &'f F,
    res: usize,
    dim: usize,
    prefix: usize,
    budget: usize,
    idx: Vec<usize>,
    point: Vec<f64>,
    best: Best,
}

impl<F: Fn(&[f64]) -> f64> Walk<'_, F> {
    fn descend(&mut self, depth: usize, used: usize) {
        if depth == self.dim {
            let v = (self.f)(&self.point);
            self.best.evaluated += 1;
            if v > self.best.value {
                self.best.value = v;
                self.best.indices.clone_from(&self.idx);
            }
            return;
        }
        let lo = if depth > 0 && depth < self.prefix {
            self.idx[depth - 1]
        } else {
            0
        };
        let hi = self.res.min(self.budget - used);
        for i in lo..=hi {
            self.idx[depth] = i;
            self.point[depth] = i as f64 / self.res as f64;
            self.descend(depth + 1, used + i);
        }
    }
}

/// Maximizes `f` over the grid `{0, 1/r, .., 1}^dim` restricted to the
/// domain, where `r` is the snapped resolution. The outer coordinate is
/// split across threads; the result does not depend on scheduling and ties
/// go to the lexicographically smallest index vector.
pub fn grid_maximize<F>(search: &GridSearch, f: F) -> Result<GridMax>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = search.dim;
    if dim == 0 || dim > GRID_MAX_DIM {
        return Err(Error::TooLarge {
            size: dim,
            cap: GRID_MAX_DIM,
        });
    }
    if search.resolution < 2 {
        return Err(Error::Parameter(format!(
            "grid resolution must be at least 2, got {}",
            search.resolution
        )));
    }
    if search.symmetric_prefix > dim {
        return Err(Error::Parameter(format!(
            "symmetric prefix {} exceeds dimension {dim}",
            search.symmetric_prefix
        )));
    }
    let res = search.effective_resolution();
    let budget = match search.domain {
        GridDomain::Cube => dim * res,
        GridDomain::CappedSum(cap) if cap >= 0.0 => {
            (((cap + POLYTOPE_GRID_SLACK) * res as f64).floor() as usize).min(dim * res)
        }
        GridDomain::CappedSum(cap) => {
            return Err(Error::Parameter(format!(
                "sum cap must be non-negative, got {cap}"
            )))
        }
    };
    let firsts: Vec<usize> = (0..=res.min(budget)).collect();
    let best = firsts
        .par_iter()
        .map(|&first| {
            let mut walk = Walk {
                f: &f,
                res,
                dim,
                prefix: search.symmetric_prefix,
                budget,
                idx: vec![0; dim],
                point: vec![0.0; dim],
                best: Best::empty(),
            };
            walk.idx[0] = first;
            walk.point[0] = first as f64 / res as f64;
            walk.descend(1, first);
            walk.best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best::empty(), Best::merge);
    Ok(GridMax {
        point: best
            .indices
            .iter()
            .map(|&i| i as f64 / res as f64)
            .collect(),
        indices: best.indices,
        value: best.value,
        resolution: res,
        evaluated: best.evaluated,
    })
}

/// Maximizes `h_S^k` over the grid on `[0, 1]^S` with `|S| = n - 1`; the
/// resolution is snapped to a multiple of `n`.
pub fn h_grid_maximum(k: usize, n: usize, resolution: usize) -> Result<GridMax> {
    AnalysisContext::new(n, k, 0)?;
    let search = GridSearch::cube(n - 1, resolution)
        .snapped_to(n)
        .with_symmetric_prefix(n - 1);
    let s = crate::matroid::GroundSet::new(n - 1)?.full();
    grid_maximize(&search, |p: &[f64]| {
        let x = FractionalPoint::new(p.to_vec()).expect("grid points lie in the cube");
        h_value(&x, &s, k).expect("size checked")
    })
}

/// Maximizes `G` over the grid on the polytope of `U^k_n`; the resolution is
/// snapped to a multiple of `n`. The distinguished element is the last
/// coordinate and `G` is symmetric in the others.
pub fn drop_grid_maximum(k: usize, n: usize, resolution: usize) -> Result<GridMax> {
    AnalysisContext::new(n, k, n - 1)?;
    if n > DROP_POLYNOMIAL_MAX_N {
        return Err(Error::TooLarge {
            size: n,
            cap: DROP_POLYNOMIAL_MAX_N,
        });
    }
    let search = GridSearch::capped(n, resolution, k as f64)
        .snapped_to(n)
        .with_symmetric_prefix(n - 1);
    grid_maximize(&search, |p: &[f64]| drop_polynomial(p, n - 1, k))
}
