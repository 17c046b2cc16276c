//! Balancedness constants of the scheme.
//!
//! For `1 <= k < n` the scheme keeps every realized element with probability
//! at least
//!
//! ```text
//! c(k, n) = 1 - C(n, k) (1 - k/n)^(n+1-k) (k/n)^k
//! ```
//!
//! and no scheme can do better. As `n` grows `c(k, n)` decreases towards
//! `1 - e^-k k^k / k!`.

use crate::error::{Error, Result};
use crate::matroid::PartitionMatroid;
use crate::special::{binomial, ln_binomial, ln_factorial};

/// Largest `n` evaluated with plain floating-point powers.
pub const DIRECT_EVALUATION_MAX_N: usize = 50;

/// `1 - c(k, n)` for `1 <= k < n`: the drop probability of an element at the
/// symmetric point `(k/n, .., k/n)`.
fn tight_drop(k: usize, n: usize) -> f64 {
    debug_assert!(1 <= k && k < n);
    if n <= DIRECT_EVALUATION_MAX_N {
        let p = k as f64 / n as f64;
        binomial(n as u64, k as u64) * (1.0 - p).powi((n + 1 - k) as i32) * p.powi(k as i32)
    } else {
        ln_tight_drop(k, n).exp()
    }
}

fn ln_tight_drop(k: usize, n: usize) -> f64 {
    let ratio = k as f64 / n as f64;
    ln_binomial(n as u64, k as u64) + (n + 1 - k) as f64 * (-ratio).ln_1p() + k as f64 * ratio.ln()
}

/// The balancedness `c(k, n)`. Returns 1 when `k >= n`, where the rank
/// constraint never binds.
pub fn balancedness_c(k: usize, n: usize) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::Parameter(format!(
            "balancedness needs k >= 1 and n >= 1 (got k={k}, n={n})"
        )));
    }
    if k >= n {
        return Ok(1.0);
    }
    Ok(1.0 - tight_drop(k, n))
}

/// `lim_{n -> inf} c(k, n) = 1 - e^-k k^k / k!`.
pub fn balancedness_limit(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("limit needs k >= 1".into()));
    }
    let kf = k as f64;
    Ok(1.0 - (-kf + kf * kf.ln() - ln_factorial(k as u64)).exp())
}

/// `α(k, n) = k (1 - c(k, n))`, the maximum of the auxiliary polynomial
/// `h_S^k` over the unit cube. Zero for `k = 0` and `k = n`.
pub fn alpha(k: usize, n: usize) -> Result<f64> {
    if n == 0 || k > n {
        return Err(Error::Parameter(format!(
            "alpha needs 0 <= k <= n and n >= 1 (got k={k}, n={n})"
        )));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    Ok(k as f64 * tight_drop(k, n))
}

/// `ln α(k, n)`, `-inf` where `α` vanishes. Used for strict comparisons
/// between neighbouring values at large `n`.
pub fn ln_alpha(k: usize, n: usize) -> Result<f64> {
    if n == 0 || k > n {
        return Err(Error::Parameter(format!(
            "alpha needs 0 <= k <= n and n >= 1 (got k={k}, n={n})"
        )));
    }
    if k == 0 || k == n {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((k as f64).ln() + ln_tight_drop(k, n))
}

/// Balancedness of the blockwise scheme: the minimum over blocks of
/// `c(d_i, |D_i|)`. Blocks with `d_i >= |D_i|` never truncate and blocks with
/// `d_i = 0` have no element in the support of a feasible point, so both
/// contribute 1.
pub fn partition_balancedness(matroid: &PartitionMatroid) -> f64 {
    matroid
        .blocks()
        .iter()
        .zip(matroid.capacities())
        .filter(|(block, &d)| d >= 1 && d < block.len())
        .map(|(block, &d)| 1.0 - tight_drop(d, block.len()))
        .fold(1.0, f64::min)
}
