//! Sweep of the two strict growth inequalities of `α(k, n)`:
//! `α(k, n) > α(k-1, n-1)` and `α(k, n) > α(k, n-1)`.

use serde::Serialize;

use crate::balance::ln_alpha;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaInequality {
    /// `α(k, n) > α(k-1, n-1)`
    ShrinkBoth,
    /// `α(k, n) > α(k, n-1)`
    ShrinkGround,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaViolation {
    pub k: usize,
    pub n: usize,
    pub inequality: AlphaInequality,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaReport {
    pub n_max: usize,
    /// Number of `(k, n)` pairs checked; each pair checks both inequalities.
    pub pairs: usize,
    pub violations: Vec<AlphaViolation>,
    /// Smallest finite `ln α(k, n) - ln α(rhs)` seen across both inequalities.
    pub min_log_margin: f64,
}

impl AlphaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks both inequalities for every `2 <= n <= n_max`, `1 <= k <= n-1`.
/// Comparisons are made in log space, where neighbouring values stay
/// distinguishable for large `n`.
pub fn alpha_inequality_check(n_max: usize) -> Result<AlphaReport> {
    if n_max < 2 {
        return Err(Error::Parameter(format!(
            "n_max must be at least 2, got {n_max}"
        )));
    }
    let mut violations = Vec::new();
    let mut pairs = 0;
    let mut min_log_margin = f64::INFINITY;
    for n in 2..=n_max {
        for k in 1..n {
            pairs += 1;
            let lhs = ln_alpha(k, n)?;
            for (inequality, rhs) in [
                (AlphaInequality::ShrinkBoth, ln_alpha(k - 1, n - 1)?),
                (AlphaInequality::ShrinkGround, ln_alpha(k, n - 1)?),
            ] {
                if rhs.is_finite() {
                    min_log_margin = min_log_margin.min(lhs - rhs);
                }
                if lhs.partial_cmp(&rhs) != Some(std::cmp::Ordering::Greater) {
                    violations.push(AlphaViolation {
                        k,
                        n,
                        inequality,
                        ln_lhs: lhs,
                        ln_rhs: rhs,
                    });
                }
            }
        }
    }
    Ok(AlphaReport {
        n_max,
        pairs,
        violations,
        min_log_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::alpha;

    #[test]
    fn smallest_cases() {
        assert!(alpha(1, 3).unwrap() > alpha(1, 2).unwrap());
        let r = alpha_inequality_check(2).unwrap();
        assert_eq!(r.pairs, 1);
        assert!(r.passed());
        // both right-hand sides vanish at (1, 2)
        assert_eq!(r.min_log_margin, f64::INFINITY);
        assert!(alpha_inequality_check(1).is_err());
    }

    #[test]
    fn sweep_to_fifty() {
        let r = alpha_inequality_check(50).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.pairs, 49 * 50 / 2);
        assert!(r.min_log_margin > 0.0);
    }
}
