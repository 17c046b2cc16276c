//! Brute-force evaluation of the polynomials behind the balancedness and
//! optimality arguments.
//!
//! Notation: `p_S(A) = Π_{i∈A} x_i Π_{i∈S\A} (1 - x_i)` is the probability
//! that independent rounding of `x` restricted to `S` realizes exactly `A`;
//! `Q_S^k` is the probability that it realizes `k` elements; and
//! `h_S^k(x) = Σ_{|A|=k} p_S(A) (k - x(A))`.

use nalgebra::DMatrix;

use super::enumerate::{for_each_k_subset, masked_sum, pairwise_sum, product_weight};
use super::{AnalysisContext, DROP_POLYNOMIAL_MAX_N, ENUMERATION_MAX_N};
use crate::error::{Error, Result};
use crate::matroid::{ElementSet, FractionalPoint, Matroid, UniformMatroid};
use crate::special::{binomial, ln_binomial};

/// Coordinates of `x` on the members of `s`, in member order.
fn local_coords(x: &FractionalPoint, s: &ElementSet) -> Result<Vec<f64>> {
    x.ground().check_same(s.ground())?;
    if s.len() > ENUMERATION_MAX_N {
        return Err(Error::TooLarge {
            size: s.len(),
            cap: ENUMERATION_MAX_N,
        });
    }
    Ok(s.iter().map(|i| x.get(i)).collect())
}

/// `p_S(A)`.
pub fn p_weight(x: &FractionalPoint, s: &ElementSet, a: &ElementSet) -> Result<f64> {
    x.ground().check_same(s.ground())?;
    if !a.is_subset(s) {
        return Err(Error::NotSubset);
    }
    Ok(s.iter()
        .map(|i| {
            if a.contains(i) {
                x.get(i)
            } else {
                1.0 - x.get(i)
            }
        })
        .product())
}

fn level_sum(local: &[f64], k: usize) -> f64 {
    pairwise_sum(0, 1u64 << local.len(), &|mask| {
        if mask.count_ones() as usize == k {
            product_weight(local, mask)
        } else {
            0.0
        }
    })
}

/// `Q_S^k(x) = P[|R_S(x)| = k]`, for `0 <= k <= |S|`.
pub fn q_level(x: &FractionalPoint, s: &ElementSet, k: usize) -> Result<f64> {
    let local = local_coords(x, s)?;
    if k > local.len() {
        return Err(Error::Cardinality(format!(
            "level {k} exceeds |S| = {}",
            local.len()
        )));
    }
    Ok(level_sum(&local, k))
}

/// `h_S^k(x)` by direct enumeration of the `k`-subsets of `S`. Zero for
/// `k = 0` and for `k > |S|`.
pub fn h_value(x: &FractionalPoint, s: &ElementSet, k: usize) -> Result<f64> {
    let local = local_coords(x, s)?;
    if k == 0 || k > local.len() {
        return Ok(0.0);
    }
    let kf = k as f64;
    Ok(pairwise_sum(0, 1u64 << local.len(), &|mask| {
        if mask.count_ones() as usize == k {
            product_weight(&local, mask) * (kf - masked_sum(&local, mask))
        } else {
            0.0
        }
    }))
}

/// `h_S^k(x)` through the level probabilities:
/// `Σ_{i=0}^{k-1} Q_S^i(x) (x(S) - i)`.
pub fn h_value_recursive(x: &FractionalPoint, s: &ElementSet, k: usize) -> Result<f64> {
    let local = local_coords(x, s)?;
    let x_s: f64 = local.iter().sum();
    Ok((0..k.min(local.len() + 1))
        .map(|i| level_sum(&local, i) * (x_s - i as f64))
        .sum())
}

/// Closed-form gradient of `h_S^k` over the members of `S`:
/// `∂h/∂x_i = Q_{S\i}^{k-1}(x) (k - x(S) - x_i)`.
pub fn h_gradient(x: &FractionalPoint, s: &ElementSet, k: usize) -> Result<Vec<f64>> {
    let local = local_coords(x, s)?;
    if k == 0 || k > local.len() {
        return Err(Error::Cardinality(format!(
            "gradient needs 1 <= k <= |S| (k = {k}, |S| = {})",
            local.len()
        )));
    }
    let x_s: f64 = local.iter().sum();
    let mut reduced = Vec::with_capacity(local.len().saturating_sub(1));
    Ok((0..local.len())
        .map(|i| {
            reduced.clear();
            reduced.extend(
                local
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v),
            );
            level_sum(&reduced, k - 1) * (k as f64 - x_s - local[i])
        })
        .collect())
}

/// The curvature constant `C(n-2, k-1) (k/n)^(k-1) ((n-k)/n)^(n-k-1)` of
/// the Hessian of `h_S^k` at the symmetric point.
pub fn center_curvature(k: usize, n: usize) -> Result<f64> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "Hessian needs n >= 2 and 1 <= k <= n-1 (got k={k}, n={n})"
        )));
    }
    let p = k as f64 / n as f64;
    let ln = ln_binomial((n - 2) as u64, (k - 1) as u64)
        + (k - 1) as f64 * p.ln()
        + (n - k - 1) as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

/// Hessian of `h_S^k` (with `|S| = n - 1`) at `(k/n, .., k/n)`:
/// `-c (I + 11ᵀ)` with `c` from [`center_curvature`].
pub fn hessian_at_center(k: usize, n: usize) -> Result<DMatrix<f64>> {
    let c = center_curvature(k, n)?;
    let d = n - 1;
    Ok(DMatrix::from_fn(
        d,
        d,
        |i, j| if i == j { -2.0 * c } else { -c },
    ))
}

/// `E[r(R(x))] = Σ_A p_N(A) min(|A|, k)` by enumeration.
pub fn expected_rank(matroid: &UniformMatroid, x: &FractionalPoint) -> Result<f64> {
    let full = matroid.ground().full();
    let local = local_coords(x, &full)?;
    let k = matroid.k();
    Ok(pairwise_sum(0, 1u64 << local.len(), &|mask| {
        product_weight(&local, mask) * (mask.count_ones() as usize).min(k) as f64
    }))
}

/// `E[r(R(x))] / k` at the symmetric point: the largest balancedness any
/// scheme for `U^k_n` can achieve.
pub fn optimality_bound(k: usize, n: usize) -> Result<f64> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "optimality bound needs 1 <= k <= n-1 (got k={k}, n={n})"
        )));
    }
    let m = UniformMatroid::with_size(n, k)?;
    Ok(expected_rank(&m, &FractionalPoint::symmetric(k, n)?)? / k as f64)
}

/// `G(x)`: the probability that the distinguished element is dropped given
/// that it was realized, as a polynomial in `x`:
///
/// ```text
/// G(x) = Σ_{A ⊆ S, |A| >= k} p_S(A) Σ_{B ⊆ A, |B| = k} q_{A∪e}(B)
/// ```
pub fn g_value(ctx: &AnalysisContext, x: &FractionalPoint) -> Result<f64> {
    if x.len() != ctx.n() {
        return Err(Error::GroundMismatch {
            expected: ctx.n(),
            found: x.len(),
        });
    }
    if ctx.n() > DROP_POLYNOMIAL_MAX_N {
        return Err(Error::TooLarge {
            size: ctx.n(),
            cap: DROP_POLYNOMIAL_MAX_N,
        });
    }
    Ok(drop_polynomial(x.coords(), ctx.element(), ctx.k()))
}

/// Unchecked evaluation of `G`; `x.len() <= DROP_POLYNOMIAL_MAX_N`,
/// `1 <= k < x.len()`.
pub(crate) fn drop_polynomial(x: &[f64], e: usize, k: usize) -> f64 {
    let mut local = [0.0f64; DROP_POLYNOMIAL_MAX_N];
    let m = x.len() - 1;
    for (slot, (_, &v)) in local
        .iter_mut()
        .zip(x.iter().enumerate().filter(|&(i, _)| i != e))
    {
        *slot = v;
    }
    let local = &local[..m];
    let x_e = x[e];
    let kf = k as f64;
    // 1 / C(|A| + 1, k) for every |A| that contributes
    let mut inv_binom = [0.0f64; DROP_POLYNOMIAL_MAX_N + 1];
    for (a, slot) in inv_binom.iter_mut().enumerate().take(m + 1).skip(k) {
        *slot = 1.0 / binomial(a as u64 + 1, k as u64);
    }
    pairwise_sum(0, 1u64 << m, &|mask| {
        let a = mask.count_ones() as usize;
        if a < k {
            return 0.0;
        }
        let p = product_weight(local, mask);
        if p == 0.0 {
            return 0.0;
        }
        let mut members = [0.0f64; DROP_POLYNOMIAL_MAX_N];
        let mut bits = mask;
        let mut len = 0;
        while bits != 0 {
            members[len] = local[bits.trailing_zeros() as usize];
            bits &= bits - 1;
            len += 1;
        }
        let members = &members[..a];
        let x_a: f64 = members.iter().sum();
        let rest_size = (a + 1 - k) as f64;
        let mut inner = 0.0;
        for_each_k_subset(a, k, |b| {
            let x_b = masked_sum(members, b);
            inner += 1.0 + (x_a + x_e - x_b) / rest_size - x_b / kf;
        });
        p * inner * inv_binom[a]
    })
}
