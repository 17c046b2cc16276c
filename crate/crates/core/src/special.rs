//! Binomial coefficients in linear and log space.

use statrs::function::gamma::ln_gamma;

// Below this many factors the product form of ln C(n, k) is more accurate
// than a difference of log-gamma values.
const PRODUCT_FORM_MAX_FACTORS: usize = 64;

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let m = k.min(n - k);
    if m as usize <= PRODUCT_FORM_MAX_FACTORS {
        let base = (n - m) as f64;
        (1..=m).map(|i| ((base + i as f64) / i as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }
}

/// `C(n, k)` as a float, exact while the result stays below 2^53.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let m = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 1..=m {
        // acc * (n - m + i) is divisible by i at every step
        acc = acc * (n - m + i) as f64 / i as f64;
    }
    acc.round()
}

/// `C(n, k)` as an exact integer, `None` on overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let m = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=m as u128 {
        acc = acc.checked_mul(n as u128 - m as u128 + i)? / i;
    }
    Some(acc)
}

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k as usize <= PRODUCT_FORM_MAX_FACTORS {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}
