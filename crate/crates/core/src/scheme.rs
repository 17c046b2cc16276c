//! The contention resolution scheme for uniform matroids and its blockwise
//! extension to partition matroids.
//!
//! Given `x` in the polytope of `U^k_n` and a realized set `A`:
//!
//! * if `|A| <= k` the scheme returns `A`;
//! * otherwise it returns the `k`-subset `B ⊆ A` with probability
//!   `q_A(B) = (1 + x̄(A \ B) - x̄(B)) / C(|A|, k)`, where `x̄` is the mean
//!   coordinate over a set.
//!
//! Sampling never materializes `q_A`. A uniform `k`-subset is proposed and
//! accepted with probability `C(|A|, k) q_A(B) / 2`, which lies in `[0, 1]`
//! because both means lie in `[0, 1]`. Half of all proposals are accepted on
//! average.
//!
//! Elements with a zero coordinate may appear in `A`; the weights stay a
//! valid distribution for any `x ∈ [0, 1]^A`.

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::{
    Constraint, ElementSet, FractionalPoint, Matroid, PartitionMatroid, UniformMatroid,
};
use crate::special::binomial_exact;

/// Largest table [`enumerate_distribution`] will build.
pub const DISTRIBUTION_TABLE_CAP: u128 = 1_000_000;

/// `x̄(A)`, the mean coordinate over a non-empty set.
pub fn mean_on(x: &FractionalPoint, set: &ElementSet) -> Result<f64> {
    x.ground().check_same(set.ground())?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(x.sum_over(set) / set.len() as f64)
}

fn check_truncating(a_len: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Cardinality(
            "subset size k must be at least 1".into(),
        ));
    }
    if a_len <= k {
        return Err(Error::Cardinality(format!(
            "weights are defined only for |A| > k (|A| = {a_len}, k = {k})"
        )));
    }
    Ok(())
}

/// `q_A(B)`: the probability that the scheme returns `B` from the realized
/// set `A`. Requires `B ⊆ A`, `|B| = k >= 1` and `|A| > k`.
pub fn q_weight(x: &FractionalPoint, a: &ElementSet, b: &ElementSet, k: usize) -> Result<f64> {
    x.ground().check_same(a.ground())?;
    if !b.is_subset(a) {
        return Err(Error::NotSubset);
    }
    if b.len() != k {
        return Err(Error::Cardinality(format!("|B| = {} but k = {k}", b.len())));
    }
    check_truncating(a.len(), k)?;
    let total = binomial_exact(a.len() as u64, k as u64).map_or(f64::INFINITY, |c| c as f64);
    let x_a = x.sum_over(a);
    let x_b = x.sum_over(b);
    Ok(weight_numerator(x_a, x_b, a.len(), k) / total)
}

/// `C(|A|, k) q_A(B) = 1 + x̄(A \ B) - x̄(B)`, a value in `[0, 2]`.
#[inline]
fn weight_numerator(x_a: f64, x_b: f64, a_len: usize, k: usize) -> f64 {
    1.0 + (x_a - x_b) / (a_len - k) as f64 - x_b / k as f64
}

/// An explicit probability table over the `k`-subsets of a base set.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetDistribution {
    pub base: ElementSet,
    pub k: usize,
    /// One entry per `k`-subset, in lexicographic order of members.
    pub entries: Vec<(ElementSet, f64)>,
}

impl SubsetDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn probability_of(&self, subset: &ElementSet) -> Option<f64> {
        self.entries
            .iter()
            .find(|(b, _)| b == subset)
            .map(|&(_, p)| p)
    }

    /// `Σ_{B ∋ e} q_A(B)`.
    pub fn inclusion_probability(&self, element: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(b, _)| b.contains(element))
            .map(|(_, p)| p)
            .sum()
    }
}

/// Tabulates `q_A` over every `k`-subset of `A`.
pub fn enumerate_distribution(
    x: &FractionalPoint,
    a: &ElementSet,
    k: usize,
) -> Result<SubsetDistribution> {
    x.ground().check_same(a.ground())?;
    check_truncating(a.len(), k)?;
    let count = binomial_exact(a.len() as u64, k as u64).unwrap_or(u128::MAX);
    if count > DISTRIBUTION_TABLE_CAP {
        return Err(Error::TableTooLarge {
            entries: count,
            cap: DISTRIBUTION_TABLE_CAP,
        });
    }
    let total = count as f64;
    let x_a = x.sum_over(a);
    let entries = a
        .members()
        .iter()
        .copied()
        .combinations(k)
        .map(|members| {
            let x_b: f64 = members.iter().map(|&i| x.get(i)).sum();
            let p = weight_numerator(x_a, x_b, a.len(), k) / total;
            (ElementSet::from_sorted_unchecked(a.ground(), members), p)
        })
        .collect();
    Ok(SubsetDistribution {
        base: a.clone(),
        k,
        entries,
    })
}

/// `P[e ∈ π_x(A)] = (k - x_e)/|A| + x(A \ e) / (|A| (|A| - 1))` for `|A| > k`;
/// 1 when `|A| <= k`.
pub fn marginal(x: &FractionalPoint, a: &ElementSet, element: usize, k: usize) -> Result<f64> {
    x.ground().check_same(a.ground())?;
    if !a.contains(element) {
        return Err(Error::NotMember(element));
    }
    Ok(marginal_unchecked(x.coords(), a.members(), element, k))
}

pub(crate) fn marginal_unchecked(x: &[f64], a: &[usize], element: usize, k: usize) -> f64 {
    let m = a.len();
    if m <= k {
        return 1.0;
    }
    if k == 0 {
        return 0.0;
    }
    let x_e = x[element];
    let rest: f64 = a.iter().map(|&i| x[i]).sum::<f64>() - x_e;
    let m = m as f64;
    (k as f64 - x_e) / m + rest / (m * (m - 1.0))
}

/// Result of one application of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub selected: ElementSet,
    /// Whether elements were dropped.
    pub truncated: bool,
}

/// Reusable scratch space for [`CrScheme::select_into`].
#[derive(Debug, Default, Clone)]
pub struct SelectBuffers {
    buckets: Vec<Vec<usize>>,
    scratch: Vec<usize>,
}

/// The scheme bound to a fixed point `x` and constraint.
///
/// A uniform matroid is a single block. For partition matroids the uniform
/// scheme runs independently on `A ∩ D_i` with rank `d_i` and the outputs are
/// joined.
#[derive(Debug, Clone)]
pub struct CrScheme<'a> {
    x: &'a FractionalPoint,
    capacities: Vec<usize>,
    block_of: Vec<usize>,
}

impl<'a> CrScheme<'a> {
    /// Validates polytope membership of `x` within `tol`.
    pub fn uniform(matroid: &UniformMatroid, x: &'a FractionalPoint, tol: f64) -> Result<Self> {
        matroid.require_in_polytope(x, tol)?;
        Ok(Self {
            x,
            capacities: vec![matroid.k()],
            block_of: vec![0; x.len()],
        })
    }

    pub fn partition(matroid: &PartitionMatroid, x: &'a FractionalPoint, tol: f64) -> Result<Self> {
        matroid.require_in_polytope(x, tol)?;
        Ok(Self {
            x,
            capacities: matroid.capacities().to_vec(),
            block_of: (0..x.len()).map(|e| matroid.block_of(e)).collect(),
        })
    }

    pub fn new(constraint: &Constraint, x: &'a FractionalPoint, tol: f64) -> Result<Self> {
        match constraint {
            Constraint::Uniform(m) => Self::uniform(m, x, tol),
            Constraint::Partition(m) => Self::partition(m, x, tol),
        }
    }

    /// Rank-`k` scheme without the polytope check. The weights stay a valid
    /// distribution for every `x` in the unit cube.
    pub(crate) fn uniform_unchecked(x: &'a FractionalPoint, k: usize) -> Self {
        Self {
            x,
            capacities: vec![k],
            block_of: vec![0; x.len()],
        }
    }

    pub fn point(&self) -> &FractionalPoint {
        self.x
    }

    pub fn select<R: Rng + ?Sized>(&self, a: &ElementSet, rng: &mut R) -> Result<SchemeOutcome> {
        self.x.ground().check_same(a.ground())?;
        let mut buffers = SelectBuffers::default();
        let mut out = Vec::with_capacity(a.len());
        let truncated = self.select_into(a.members(), rng, &mut buffers, &mut out);
        Ok(SchemeOutcome {
            selected: ElementSet::from_sorted_unchecked(a.ground(), out),
            truncated,
        })
    }

    /// Allocation-free core of [`select`](Self::select). `members` must be
    /// sorted, unique and inside the ground set; the selection is written to
    /// `out` in increasing order. Returns whether any element was dropped.
    pub fn select_into<R: Rng + ?Sized>(
        &self,
        members: &[usize],
        rng: &mut R,
        buffers: &mut SelectBuffers,
        out: &mut Vec<usize>,
    ) -> bool {
        out.clear();
        let coords = self.x.coords();
        if self.capacities.len() == 1 {
            let truncated = draw_block(
                coords,
                members,
                self.capacities[0],
                rng,
                &mut buffers.scratch,
                out,
            );
            out.sort_unstable();
            return truncated;
        }
        buffers.buckets.resize_with(self.capacities.len(), Vec::new);
        for bucket in &mut buffers.buckets {
            bucket.clear();
        }
        for &e in members {
            buffers.buckets[self.block_of[e]].push(e);
        }
        let mut truncated = false;
        for (bucket, &cap) in buffers.buckets.iter().zip(&self.capacities) {
            truncated |= draw_block(coords, bucket, cap, rng, &mut buffers.scratch, out);
        }
        out.sort_unstable();
        truncated
    }
}

/// Runs the uniform scheme with rank `k` on `members`, appending the kept
/// elements to `out`.
fn draw_block<R: Rng + ?Sized>(
    x: &[f64],
    members: &[usize],
    k: usize,
    rng: &mut R,
    scratch: &mut Vec<usize>,
    out: &mut Vec<usize>,
) -> bool {
    let m = members.len();
    if m <= k {
        out.extend_from_slice(members);
        return false;
    }
    if k == 0 {
        return true;
    }
    scratch.clear();
    scratch.extend_from_slice(members);
    let x_a: f64 = members.iter().map(|&i| x[i]).sum();
    // Shuffle whichever side of the split is smaller: the chosen subset or
    // its complement. A partial Fisher-Yates pass from any arrangement gives
    // a uniform subset, so the scratch order need not be reset between
    // proposals.
    let chosen_side = k <= m - k;
    let t = if chosen_side { k } else { m - k };
    loop {
        for i in 0..t {
            let j = rng.random_range(i..m);
            scratch.swap(i, j);
        }
        let x_t: f64 = scratch[..t].iter().map(|&i| x[i]).sum();
        let x_b = if chosen_side { x_t } else { x_a - x_t };
        let accept = 0.5 * weight_numerator(x_a, x_b, m, k);
        if rng.random::<f64>() < accept {
            if chosen_side {
                out.extend_from_slice(&scratch[..k]);
            } else {
                out.extend_from_slice(&scratch[t..]);
            }
            return true;
        }
    }
}

/// Applies the uniform scheme for `matroid` to `a`.
pub fn select<R: Rng + ?Sized>(
    x: &FractionalPoint,
    a: &ElementSet,
    matroid: &UniformMatroid,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    CrScheme::uniform(matroid, x, crate::matroid::DEFAULT_POLYTOPE_TOL)?.select(a, rng)
}

/// Applies the blockwise scheme for `matroid` to `a`.
pub fn select_partition<R: Rng + ?Sized>(
    x: &FractionalPoint,
    a: &ElementSet,
    matroid: &PartitionMatroid,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    CrScheme::partition(matroid, x, crate::matroid::DEFAULT_POLYTOPE_TOL)?.select(a, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::GroundSet;
    use crate::rng::seeded;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn set(n: usize, members: &[usize]) -> ElementSet {
        ElementSet::new(GroundSet::new(n).unwrap(), members.iter().copied()).unwrap()
    }

    fn point(coords: &[f64]) -> FractionalPoint {
        FractionalPoint::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn means() {
        let x = point(&[0.2, 0.4, 0.9]);
        assert_relative_eq!(
            mean_on(&x, &set(3, &[0, 1])).unwrap(),
            0.3,
            max_relative = 1e-15
        );
        let c = point(&[0.37; 5]);
        assert_relative_eq!(
            mean_on(&c, &set(5, &[1, 3, 4])).unwrap(),
            0.37,
            max_relative = 1e-15
        );
        let y = point(&[1.0, 0.0, 1.0]);
        assert_relative_eq!(
            mean_on(&y, &set(3, &[0, 1, 2])).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-15
        );
        assert_eq!(mean_on(&y, &set(3, &[])), Err(Error::EmptySet));
    }

    #[test]
    fn weights_by_hand() {
        let a = set(2, &[0, 1]);
        let x = point(&[1.0, 0.0]);
        assert_eq!(q_weight(&x, &a, &set(2, &[0]), 1).unwrap(), 0.0);
        let x = point(&[0.2, 0.6]);
        assert_relative_eq!(
            q_weight(&x, &a, &set(2, &[1]), 1).unwrap(),
            0.3,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            q_weight(&x, &a, &set(2, &[0]), 1).unwrap(),
            0.7,
            max_relative = 1e-15
        );
        let sym = point(&[0.4; 5]);
        let a5 = set(5, &[0, 1, 2, 3, 4]);
        assert_relative_eq!(
            q_weight(&sym, &a5, &set(5, &[1, 4]), 2).unwrap(),
            0.1,
            max_relative = 1e-15
        );
    }

    #[test]
    fn weight_errors() {
        let x = point(&[0.2, 0.6, 0.1]);
        let a = set(3, &[0, 1]);
        assert_eq!(q_weight(&x, &a, &set(3, &[2]), 1), Err(Error::NotSubset));
        assert!(matches!(
            q_weight(&x, &a, &set(3, &[0]), 2),
            Err(Error::Cardinality(_))
        ));
        assert!(matches!(
            q_weight(&x, &a, &set(3, &[0, 1]), 2),
            Err(Error::Cardinality(_))
        ));
    }

    #[test]
    fn symmetric_table_is_uniform() {
        let x = point(&[0.3; 3]);
        let d = enumerate_distribution(&x, &set(3, &[0, 1, 2]), 2).unwrap();
        assert_eq!(d.entries.len(), 3);
        for (_, p) in &d.entries {
            assert_relative_eq!(*p, 1.0 / 3.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn two_point_table() {
        let x = point(&[0.2, 0.6]);
        let d = enumerate_distribution(&x, &set(2, &[0, 1]), 1).unwrap();
        assert_relative_eq!(
            d.probability_of(&set(2, &[0])).unwrap(),
            0.7,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            d.probability_of(&set(2, &[1])).unwrap(),
            0.3,
            max_relative = 1e-15
        );
    }

    #[test]
    fn table_cap() {
        let x = FractionalPoint::constant(40, 0.1).unwrap();
        let a = x.ground().full();
        assert!(matches!(
            enumerate_distribution(&x, &a, 20),
            Err(Error::TableTooLarge { .. })
        ));
    }

    #[test]
    fn marginal_examples() {
        let x = point(&[0.5, 0.5]);
        assert_relative_eq!(marginal(&x, &set(2, &[0, 1]), 0, 1).unwrap(), 0.5);
        let y = point(&[0.5; 3]);
        let a = set(3, &[0, 1, 2]);
        // oracle: e = 0 lies in two of the three equally likely 2-subsets
        let oracle = enumerate_distribution(&y, &a, 2)
            .unwrap()
            .inclusion_probability(0);
        assert_relative_eq!(oracle, 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            marginal(&y, &a, 0, 2).unwrap(),
            oracle,
            max_relative = 1e-14
        );
        assert_eq!(marginal(&y, &set(3, &[0, 2]), 2, 2).unwrap(), 1.0);
        assert_eq!(
            marginal(&y, &set(3, &[0, 2]), 1, 2),
            Err(Error::NotMember(1))
        );
    }

    #[test]
    fn select_branches() {
        let m = UniformMatroid::with_size(4, 2).unwrap();
        let x = point(&[0.5; 4]);
        let mut rng = seeded(1);
        let a = set(4, &[1, 3]);
        let out = select(&x, &a, &m, &mut rng).unwrap();
        assert_eq!(out.selected, a);
        assert!(!out.truncated);
        let empty = set(4, &[]);
        assert!(select(&x, &empty, &m, &mut rng)
            .unwrap()
            .selected
            .is_empty());
        let full = x.ground().full();
        let out = select(&x, &full, &m, &mut rng).unwrap();
        assert_eq!(out.selected.len(), 2);
        assert!(out.truncated);
        assert!(out.selected.is_subset(&full));
    }

    #[test]
    fn rank_zero_drops_everything() {
        let m = UniformMatroid::with_size(3, 0).unwrap();
        let x = point(&[0.0; 3]);
        let out = select(&x, &x.ground().full(), &m, &mut seeded(3)).unwrap();
        assert!(out.selected.is_empty());
        assert!(out.truncated);
    }

    #[test]
    fn select_rejects_points_outside_the_polytope() {
        let m = UniformMatroid::with_size(2, 1).unwrap();
        let x = point(&[0.8, 0.8]);
        assert!(matches!(
            select(&x, &x.ground().full(), &m, &mut seeded(0)),
            Err(Error::OutsidePolytope { .. })
        ));
    }

    #[test]
    fn zero_mass_subset_is_never_drawn() {
        let m = UniformMatroid::with_size(2, 1).unwrap();
        let x = point(&[1.0, 0.0]);
        let scheme = CrScheme::uniform(&m, &x, 0.0).unwrap();
        let mut rng = seeded(11);
        for _ in 0..2000 {
            let out = scheme.select(&x.ground().full(), &mut rng).unwrap();
            assert_eq!(out.selected.members(), &[1]);
        }
    }

    #[test]
    fn empirical_frequencies_match_table() {
        let m = UniformMatroid::with_size(4, 2).unwrap();
        let x = point(&[0.5; 4]);
        let a = set(4, &[0, 1, 2]);
        let table = enumerate_distribution(&x, &a, 2).unwrap();
        let scheme = CrScheme::uniform(&m, &x, 0.0).unwrap();
        let mut rng = seeded(99);
        let draws = 1_000_000;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        let mut buffers = SelectBuffers::default();
        let mut out = Vec::new();
        for _ in 0..draws {
            scheme.select_into(a.members(), &mut rng, &mut buffers, &mut out);
            *counts.entry(out.clone()).or_default() += 1;
        }
        for (b, p) in &table.entries {
            let freq = counts.get(b.members()).copied().unwrap_or(0) as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * se, "{b:?}: {freq} vs {p}");
        }
    }

    #[test]
    fn complement_side_sampling_matches_table() {
        // k > |A| - k exercises the complement branch of the sampler
        let m = UniformMatroid::with_size(5, 4).unwrap();
        let x = point(&[0.9, 0.1, 0.7, 0.3, 0.8]);
        let a = x.ground().full();
        let table = enumerate_distribution(&x, &a, 4).unwrap();
        let scheme = CrScheme::uniform(&m, &x, 0.0).unwrap();
        let mut rng = seeded(5);
        let draws = 400_000;
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..draws {
            let out = scheme.select(&a, &mut rng).unwrap();
            *counts.entry(out.selected.members().to_vec()).or_default() += 1;
        }
        for (b, p) in &table.entries {
            let freq = counts.get(b.members()).copied().unwrap_or(0) as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * se, "{b:?}: {freq} vs {p}");
        }
    }

    #[test]
    fn partition_with_one_block_is_the_uniform_scheme() {
        let u = UniformMatroid::with_size(5, 2).unwrap();
        let p: PartitionMatroid = u.into();
        let x = point(&[0.3, 0.5, 0.2, 0.6, 0.4]);
        let a = x.ground().full();
        let mut r1 = seeded(21);
        let mut r2 = seeded(21);
        for _ in 0..200 {
            let s1 = select(&x, &a, &u, &mut r1).unwrap();
            let s2 = select_partition(&x, &a, &p, &mut r2).unwrap();
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn vacuous_block_keeps_everything() {
        let p = PartitionMatroid::from_block_sizes(&[(2, 2), (3, 1)]).unwrap();
        let x = point(&[0.9, 0.8, 0.3, 0.3, 0.3]);
        let a = x.ground().full();
        let mut rng = seeded(8);
        for _ in 0..200 {
            let out = select_partition(&x, &a, &p, &mut rng).unwrap();
            assert!(out.selected.contains(0) && out.selected.contains(1));
            assert_eq!(out.selected.len(), 3);
        }
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, u64, usize)> {
        (2usize..=12).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.0f64..=1.0, n),
                any::<u64>(),
                0usize..=n,
            )
        })
    }

    proptest! {
        #[test]
        fn output_is_always_independent((raw, mask, k) in instance(), seed in any::<u64>()) {
            let n = raw.len();
            let total: f64 = raw.iter().sum();
            let scale = if total > k as f64 { k as f64 / total } else { 1.0 };
            let x = FractionalPoint::new(raw.iter().map(|v| v * scale).collect()).unwrap();
            let m = UniformMatroid::with_size(n, k).unwrap();
            let a = ElementSet::from_mask(x.ground(), mask & ((1u64 << n) - 1)).unwrap();
            let out = select(&x, &a, &m, &mut seeded(seed)).unwrap();
            prop_assert!(m.is_independent(&out.selected).unwrap());
            prop_assert!(out.selected.is_subset(&a));
            prop_assert_eq!(out.truncated, a.len() > k);
            prop_assert_eq!(out.selected.len(), a.len().min(k));
        }

        #[test]
        fn weights_form_a_distribution((raw, mask, k) in instance()) {
            let n = raw.len();
            let x = FractionalPoint::new(raw).unwrap();
            let a = ElementSet::from_mask(x.ground(), mask & ((1u64 << n) - 1)).unwrap();
            prop_assume!(k >= 1 && a.len() > k);
            let d = enumerate_distribution(&x, &a, k).unwrap();
            let bound = 2.0 / d.entries.len() as f64;
            for (_, p) in &d.entries {
                prop_assert!(*p >= -1e-15 && *p <= bound + 1e-15);
            }
            prop_assert!((d.total() - 1.0).abs() < 1e-9);
            for e in a.iter() {
                let closed = marginal(&x, &a, e, k).unwrap();
                prop_assert!((closed - d.inclusion_probability(e)).abs() < 1e-9);
            }
        }
    }
}
