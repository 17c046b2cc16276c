//! Bitmask enumeration with deterministic pairwise summation.

// Ranges at or below this size are summed sequentially.
const LEAF: u64 = 256;
// Ranges at or above this size split across the thread pool.
const PARALLEL_MIN: u64 = 1 << 14;

/// `Σ_{m in lo..hi} f(m)` by recursive halving of the index range.
///
/// The split points depend only on `lo` and `hi`, never on the thread count,
/// so the result is bit-identical however rayon schedules the halves.
pub(crate) fn pairwise_sum<F>(lo: u64, hi: u64, f: &F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        return (lo..hi).map(f).sum();
    }
    let mid = lo + len / 2;
    if len >= PARALLEL_MIN {
        let (a, b) = rayon::join(|| pairwise_sum(lo, mid, f), || pairwise_sum(mid, hi, f));
        a + b
    } else {
        pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f)
    }
}

/// Next integer with the same popcount (Gosper's hack). `mask` must be
/// non-zero.
#[inline]
pub(crate) fn next_same_popcount(mask: u64) -> u64 {
    let low = mask & mask.wrapping_neg();
    let ripple = mask.wrapping_add(low);
    (((ripple ^ mask) >> 2) / low) | ripple
}

/// Calls `visit` on every `k`-bit mask below `1 << width`, in increasing order.
#[inline]
pub(crate) fn for_each_k_subset(width: usize, k: usize, mut visit: impl FnMut(u64)) {
    if k > width {
        return;
    }
    if k == 0 {
        visit(0);
        return;
    }
    let limit = 1u64 << width;
    let mut mask = (1u64 << k) - 1;
    while mask < limit {
        visit(mask);
        mask = next_same_popcount(mask);
    }
}

/// `Π_{j in mask} x_j Π_{j not in mask} (1 - x_j)` over local coordinates.
#[inline]
pub(crate) fn product_weight(local: &[f64], mask: u64) -> f64 {
    let mut p = 1.0;
    for (j, &v) in local.iter().enumerate() {
        p *= if mask >> j & 1 == 1 { v } else { 1.0 - v };
    }
    p
}

/// `Σ_{j in mask} x_j` over local coordinates.
#[inline]
pub(crate) fn masked_sum(local: &[f64], mut mask: u64) -> f64 {
    let mut s = 0.0;
    while mask != 0 {
        s += local[mask.trailing_zeros() as usize];
        mask &= mask - 1;
    }
    s
}
