//! Ground sets, element subsets, fractional points and the two matroid
//! families the rounding scheme supports.
//!
//! Elements are dense indices `0..n`. A [`FractionalPoint`] assigns each
//! element a coordinate in `[0, 1]`; the matroid polytope of a uniform matroid
//! of rank `k` is the box intersected with `x(N) <= k`, and for a partition
//! matroid each block carries its own sum constraint.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default additive tolerance for polytope membership.
pub const DEFAULT_POLYTOPE_TOL: f64 = 1e-9;

/// Largest ground set whose subsets fit in a machine-word bitmask.
pub const MASK_BITS: usize = 64;

/// The ground set `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Self { n })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.n
    }

    pub fn full(&self) -> ElementSet {
        ElementSet {
            ground: *self,
            members: (0..self.n).collect(),
        }
    }

    pub fn empty(&self) -> ElementSet {
        ElementSet {
            ground: *self,
            members: Vec::new(),
        }
    }

    pub(crate) fn check_same(&self, other: GroundSet) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GroundMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

/// A subset of a ground set, stored as a sorted, duplicate-free index list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    ground: GroundSet,
    members: Vec<usize>,
}

impl ElementSet {
    /// Builds a set from arbitrary indices; duplicates are merged.
    pub fn new<I>(ground: GroundSet, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut members: Vec<usize> = members.into_iter().collect();
        if let Some(&index) = members.iter().find(|&&i| !ground.contains(i)) {
            return Err(Error::ElementOutOfRange { index, n: ground.n });
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { ground, members })
    }

    /// Builds a set from members already known to be sorted, unique and in range.
    pub(crate) fn from_sorted_unchecked(ground: GroundSet, members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(members.last().is_none_or(|&m| m < ground.n));
        Self { ground, members }
    }

    pub fn from_mask(ground: GroundSet, mask: u64) -> Result<Self> {
        if ground.n < MASK_BITS && mask >> ground.n != 0 {
            let index = MASK_BITS - 1 - mask.leading_zeros() as usize;
            return Err(Error::ElementOutOfRange { index, n: ground.n });
        }
        Ok(Self {
            ground,
            members: mask_members(mask).collect(),
        })
    }

    /// Bitmask representation; only defined for ground sets of at most 64 elements.
    pub fn to_mask(&self) -> Result<u64> {
        if self.ground.n > MASK_BITS {
            return Err(Error::TooLarge {
                size: self.ground.n,
                cap: MASK_BITS,
            });
        }
        Ok(self.members.iter().fold(0u64, |m, &i| m | (1 << i)))
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.members.binary_search(&element).is_ok()
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.ground == other.ground && self.members.iter().all(|&m| other.contains(m))
    }

    /// `self ∪ {element}`.
    pub fn with(&self, element: usize) -> Result<Self> {
        if !self.ground.contains(element) {
            return Err(Error::ElementOutOfRange {
                index: element,
                n: self.ground.n,
            });
        }
        let mut members = self.members.clone();
        if let Err(pos) = members.binary_search(&element) {
            members.insert(pos, element);
        }
        Ok(Self {
            ground: self.ground,
            members,
        })
    }

    /// `self \ {element}`.
    pub fn without(&self, element: usize) -> Self {
        Self {
            ground: self.ground,
            members: self.iter().filter(|&m| m != element).collect(),
        }
    }

    pub fn difference(&self, other: &ElementSet) -> Self {
        Self {
            ground: self.ground,
            members: self.iter().filter(|&m| !other.contains(m)).collect(),
        }
    }

    pub fn intersection(&self, other: &ElementSet) -> Self {
        Self {
            ground: self.ground,
            members: self.iter().filter(|&m| other.contains(m)).collect(),
        }
    }
}

impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.members.serialize(serializer)
    }
}

/// Iterates the set bits of `mask` in increasing order.
pub fn mask_members(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let i = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(i)
    })
}

/// A point of `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalPoint {
    coords: Vec<f64>,
}

impl FractionalPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        for (index, &value) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::CoordinateOutOfRange { index, value });
            }
        }
        Ok(Self { coords })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// The point `(k/n, .., k/n)`.
    pub fn symmetric(k: usize, n: usize) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::Cardinality(format!(
                "symmetric point needs 0 <= k <= n, n >= 1 (got k={k}, n={n})"
            )));
        }
        Self::constant(n, k as f64 / n as f64)
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet {
            n: self.coords.len(),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn get(&self, index: usize) -> f64 {
        self.coords[index]
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `x(A)`.
    pub fn sum_over(&self, set: &ElementSet) -> f64 {
        set.iter().map(|i| self.coords[i]).sum()
    }

    /// `x(N)`.
    pub fn total(&self) -> f64 {
        self.coords.iter().sum()
    }

    /// Indices with a strictly positive coordinate.
    pub fn support(&self) -> ElementSet {
        ElementSet::from_sorted_unchecked(
            self.ground(),
            (0..self.coords.len())
                .filter(|&i| self.coords[i] > 0.0)
                .collect(),
        )
    }

    /// The reflected point `1 - x`.
    pub fn complement(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|v| 1.0 - v).collect(),
        }
    }

    /// Copy with one coordinate replaced.
    pub fn with_coord(&self, index: usize, value: f64) -> Result<Self> {
        let mut coords = self.coords.clone();
        if index >= coords.len() {
            return Err(Error::ElementOutOfRange {
                index,
                n: coords.len(),
            });
        }
        coords[index] = value;
        Self::new(coords)
    }
}

/// Operations shared by the supported matroid families.
pub trait Matroid {
    fn ground(&self) -> GroundSet;

    /// `r(A) = max{|S| : S ⊆ A, S independent}`.
    fn rank(&self, set: &ElementSet) -> Result<usize>;

    /// Largest amount by which `x` exceeds one of the polytope's sum
    /// constraints; non-positive when every constraint holds.
    fn polytope_violation(&self, x: &FractionalPoint) -> Result<f64>;

    fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        Ok(self.rank(set)? == set.len())
    }

    /// Membership in the matroid polytope up to an additive tolerance.
    /// Returns `false` for points on a different ground set.
    fn in_polytope(&self, x: &FractionalPoint, tol: f64) -> bool {
        matches!(self.polytope_violation(x), Ok(v) if v <= tol)
    }

    /// Errors with [`Error::OutsidePolytope`] unless `x` is in the polytope.
    fn require_in_polytope(&self, x: &FractionalPoint, tol: f64) -> Result<()> {
        let violation = self.polytope_violation(x)?;
        if violation > tol {
            return Err(Error::OutsidePolytope { violation });
        }
        Ok(())
    }
}

/// `U^k_n`: every subset of at most `k` elements is independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformMatroid {
    ground: GroundSet,
    k: usize,
}

impl UniformMatroid {
    pub fn new(ground: GroundSet, k: usize) -> Result<Self> {
        if k > ground.len() {
            return Err(Error::Cardinality(format!(
                "rank {k} exceeds ground set size {}",
                ground.len()
            )));
        }
        Ok(Self { ground, k })
    }

    pub fn with_size(n: usize, k: usize) -> Result<Self> {
        Self::new(GroundSet::new(n)?, k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }
}

impl Matroid for UniformMatroid {
    fn ground(&self) -> GroundSet {
        self.ground
    }

    fn rank(&self, set: &ElementSet) -> Result<usize> {
        self.ground.check_same(set.ground())?;
        Ok(set.len().min(self.k))
    }

    fn polytope_violation(&self, x: &FractionalPoint) -> Result<f64> {
        self.ground.check_same(x.ground())?;
        Ok(x.total() - self.k as f64)
    }
}

/// Ground set split into disjoint blocks `D_i`, each with capacity `d_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    ground: GroundSet,
    blocks: Vec<ElementSet>,
    capacities: Vec<usize>,
    block_of: Vec<usize>,
}

impl PartitionMatroid {
    /// Capacities larger than their block are capped at the block size.
    pub fn new(ground: GroundSet, blocks: Vec<ElementSet>, capacities: Vec<usize>) -> Result<Self> {
        if blocks.len() != capacities.len() {
            return Err(Error::Partition(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacities.len()
            )));
        }
        let mut block_of = vec![usize::MAX; ground.len()];
        for (b, block) in blocks.iter().enumerate() {
            ground.check_same(block.ground())?;
            for e in block.iter() {
                if block_of[e] != usize::MAX {
                    return Err(Error::Partition(format!(
                        "element {e} appears in blocks {} and {b}",
                        block_of[e]
                    )));
                }
                block_of[e] = b;
            }
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Partition(format!("element {e} is in no block")));
        }
        let capacities = capacities
            .into_iter()
            .zip(&blocks)
            .map(|(d, block)| d.min(block.len()))
            .collect();
        Ok(Self {
            ground,
            blocks,
            capacities,
            block_of,
        })
    }

    /// Consecutive blocks from `(size, capacity)` pairs, e.g. `[(2, 1), (3, 1)]`
    /// gives `D_1 = {0, 1}` and `D_2 = {2, 3, 4}`.
    pub fn from_block_sizes(spec: &[(usize, usize)]) -> Result<Self> {
        if spec.iter().any(|&(size, _)| size == 0) {
            return Err(Error::Partition("blocks must be non-empty".into()));
        }
        let n: usize = spec.iter().map(|&(size, _)| size).sum();
        let ground = GroundSet::new(n)?;
        let mut start = 0;
        let mut blocks = Vec::with_capacity(spec.len());
        for &(size, _) in spec {
            blocks.push(ElementSet::from_sorted_unchecked(
                ground,
                (start..start + size).collect(),
            ));
            start += size;
        }
        Self::new(ground, blocks, spec.iter().map(|&(_, d)| d).collect())
    }

    pub fn blocks(&self) -> &[ElementSet] {
        &self.blocks
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.block_of[element]
    }

    /// The point that is symmetric inside every block: `x_e = d_i / |D_i|`.
    pub fn blockwise_symmetric_point(&self) -> FractionalPoint {
        let coords = (0..self.ground.len())
            .map(|e| {
                let b = self.block_of[e];
                self.capacities[b] as f64 / self.blocks[b].len() as f64
            })
            .collect();
        FractionalPoint { coords }
    }
}

impl From<UniformMatroid> for PartitionMatroid {
    fn from(m: UniformMatroid) -> Self {
        Self {
            ground: m.ground,
            blocks: vec![m.ground.full()],
            capacities: vec![m.k],
            block_of: vec![0; m.ground.len()],
        }
    }
}

impl Matroid for PartitionMatroid {
    fn ground(&self) -> GroundSet {
        self.ground
    }

    fn rank(&self, set: &ElementSet) -> Result<usize> {
        self.ground.check_same(set.ground())?;
        let mut counts = vec![0usize; self.blocks.len()];
        for e in set.iter() {
            counts[self.block_of[e]] += 1;
        }
        Ok(counts
            .iter()
            .zip(&self.capacities)
            .map(|(&c, &d)| c.min(d))
            .sum())
    }

    fn polytope_violation(&self, x: &FractionalPoint) -> Result<f64> {
        self.ground.check_same(x.ground())?;
        Ok(self
            .blocks
            .iter()
            .zip(&self.capacities)
            .map(|(block, &d)| x.sum_over(block) - d as f64)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Either supported matroid family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Uniform(UniformMatroid),
    Partition(PartitionMatroid),
}

impl Constraint {
    /// View as a partition matroid; a uniform matroid is a single block.
    pub fn to_partition(&self) -> PartitionMatroid {
        match self {
            Constraint::Uniform(m) => (*m).into(),
            Constraint::Partition(m) => m.clone(),
        }
    }
}

impl From<UniformMatroid> for Constraint {
    fn from(m: UniformMatroid) -> Self {
        Constraint::Uniform(m)
    }
}

impl From<PartitionMatroid> for Constraint {
    fn from(m: PartitionMatroid) -> Self {
        Constraint::Partition(m)
    }
}

impl Matroid for Constraint {
    fn ground(&self) -> GroundSet {
        match self {
            Constraint::Uniform(m) => m.ground(),
            Constraint::Partition(m) => m.ground(),
        }
    }

    fn rank(&self, set: &ElementSet) -> Result<usize> {
        match self {
            Constraint::Uniform(m) => m.rank(set),
            Constraint::Partition(m) => m.rank(set),
        }
    }

    fn polytope_violation(&self, x: &FractionalPoint) -> Result<f64> {
        match self {
            Constraint::Uniform(m) => m.polytope_violation(x),
            Constraint::Partition(m) => m.polytope_violation(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: usize, members: &[usize]) -> ElementSet {
        ElementSet::new(GroundSet::new(n).unwrap(), members.iter().copied()).unwrap()
    }

    fn two_block() -> PartitionMatroid {
        let g = GroundSet::new(3).unwrap();
        PartitionMatroid::new(g, vec![set(3, &[0, 1]), set(3, &[2])], vec![1, 1]).unwrap()
    }

    #[test]
    fn uniform_independence() {
        let m = UniformMatroid::with_size(4, 2).unwrap();
        assert!(m.is_independent(&set(4, &[0, 1])).unwrap());
        assert!(!m.is_independent(&set(4, &[0, 1, 2])).unwrap());
    }

    #[test]
    fn partition_independence() {
        let m = two_block();
        assert!(m.is_independent(&set(3, &[0, 2])).unwrap());
        assert!(!m.is_independent(&set(3, &[0, 1])).unwrap());
    }

    #[test]
    fn ranks() {
        let u25 = UniformMatroid::with_size(5, 2).unwrap();
        assert_eq!(u25.rank(&set(5, &[0, 1, 2, 3])).unwrap(), 2);
        let u35 = UniformMatroid::with_size(5, 3).unwrap();
        assert_eq!(u35.rank(&set(5, &[0])).unwrap(), 1);

        let g = GroundSet::new(4).unwrap();
        let p =
            PartitionMatroid::new(g, vec![set(4, &[0, 1, 2]), set(4, &[3])], vec![2, 0]).unwrap();
        assert_eq!(p.rank(&set(4, &[0, 1, 2, 3])).unwrap(), 2);
    }

    #[test]
    fn ground_mismatch_is_an_error() {
        let m = UniformMatroid::with_size(4, 2).unwrap();
        assert_eq!(
            m.rank(&set(5, &[0])),
            Err(Error::GroundMismatch {
                expected: 4,
                found: 5
            })
        );
        assert!(m.is_independent(&set(3, &[0])).is_err());
        assert!(!m.in_polytope(&FractionalPoint::constant(3, 0.0).unwrap(), 0.0));
    }

    #[test]
    fn polytope_membership() {
        let u24 = UniformMatroid::with_size(4, 2).unwrap();
        assert!(u24.in_polytope(&FractionalPoint::constant(4, 0.5).unwrap(), 0.0));
        let u12 = UniformMatroid::with_size(2, 1).unwrap();
        assert!(!u12.in_polytope(&FractionalPoint::constant(2, 0.8).unwrap(), 0.0));
        let u13 = UniformMatroid::with_size(3, 1).unwrap();
        assert!(u13.in_polytope(&FractionalPoint::symmetric(1, 3).unwrap(), 0.0));
        // sums just above the cap pass only with a tolerance
        let nudged = FractionalPoint::new(vec![1.0 / 3.0 + 1e-12; 3]).unwrap();
        assert!(!u13.in_polytope(&nudged, 0.0));
        assert!(u13.in_polytope(&nudged, DEFAULT_POLYTOPE_TOL));
    }

    #[test]
    fn support_is_strictly_positive_coordinates() {
        let x = FractionalPoint::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(x.support().members(), &[1, 2]);
        assert!(FractionalPoint::constant(3, 0.0)
            .unwrap()
            .support()
            .is_empty());
        let x = FractionalPoint::new(vec![0.25, 0.25]).unwrap();
        assert_eq!(x.support().members(), &[0, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(GroundSet::new(0), Err(Error::EmptyGroundSet));
        let g = GroundSet::new(3).unwrap();
        assert!(matches!(
            ElementSet::new(g, [0, 3]),
            Err(Error::ElementOutOfRange { index: 3, n: 3 })
        ));
        assert!(ElementSet::from_mask(g, 0b1000).is_err());
        assert!(FractionalPoint::new(vec![0.5, 1.5]).is_err());
        assert!(FractionalPoint::new(vec![f64::NAN]).is_err());
        assert!(UniformMatroid::with_size(3, 4).is_err());
        // overlapping and non-covering blocks
        assert!(
            PartitionMatroid::new(g, vec![set(3, &[0, 1]), set(3, &[1, 2])], vec![1, 1]).is_err()
        );
        assert!(PartitionMatroid::new(g, vec![set(3, &[0, 1])], vec![1]).is_err());
        assert!(PartitionMatroid::new(g, vec![set(3, &[0, 1, 2])], vec![1, 2]).is_err());
    }

    #[test]
    fn oversized_capacities_are_capped() {
        let m = PartitionMatroid::from_block_sizes(&[(2, 5), (3, 1)]).unwrap();
        assert_eq!(m.capacities(), &[2, 1]);
        assert_eq!(m.blocks()[1].members(), &[2, 3, 4]);
    }

    #[test]
    fn mask_round_trip() {
        let g = GroundSet::new(10).unwrap();
        let s = ElementSet::from_mask(g, 0b10_0110_0001).unwrap();
        assert_eq!(s.members(), &[0, 5, 6, 9]);
        assert_eq!(s.to_mask().unwrap(), 0b10_0110_0001);
        let big = GroundSet::new(65).unwrap().full();
        assert!(big.to_mask().is_err());
    }

    fn random_set(n: usize) -> impl Strategy<Value = ElementSet> {
        any::<u64>().prop_map(move |m| {
            ElementSet::from_mask(GroundSet::new(n).unwrap(), m & ((1u64 << n) - 1)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rank_is_monotone_and_bounded(
            n in 1usize..=12,
            k in 0usize..=12,
            a in any::<u64>(),
            b in any::<u64>(),
        ) {
            let k = k.min(n);
            let g = GroundSet::new(n).unwrap();
            let full = (1u64 << n) - 1;
            let small = ElementSet::from_mask(g, a & b & full).unwrap();
            let large = ElementSet::from_mask(g, a & full).unwrap();
            let u = UniformMatroid::new(g, k).unwrap();
            let p = PartitionMatroid::from_block_sizes(&[(n, k)]).unwrap();
            for m in [&u as &dyn Matroid, &p as &dyn Matroid] {
                let rs = m.rank(&small).unwrap();
                let rl = m.rank(&large).unwrap();
                prop_assert!(rs <= rl);
                prop_assert!(rl <= large.len());
                prop_assert_eq!(m.is_independent(&large).unwrap(), rl == large.len());
            }
        }

        #[test]
        fn uniform_agrees_with_single_block_partition(
            n in 1usize..=12,
            k in 0usize..=12,
            s in (1usize..=12).prop_flat_map(random_set),
            coords in proptest::collection::vec(0.0f64..=1.0, 12),
        ) {
            let k = k.min(n);
            let g = GroundSet::new(n).unwrap();
            let u = UniformMatroid::new(g, k).unwrap();
            let p: PartitionMatroid = u.into();
            let x = FractionalPoint::new(coords[..n].to_vec()).unwrap();
            prop_assert_eq!(u.in_polytope(&x, 1e-9), p.in_polytope(&x, 1e-9));
            if s.ground() == g {
                prop_assert_eq!(u.rank(&s).unwrap(), p.rank(&s).unwrap());
                prop_assert_eq!(u.is_independent(&s).unwrap(), p.is_independent(&s).unwrap());
            }
        }

        #[test]
        fn partition_rank_matches_definition(
            sizes in proptest::collection::vec((1usize..=4, 0usize..=4), 1..=4),
            mask in any::<u64>(),
        ) {
            let m = PartitionMatroid::from_block_sizes(&sizes).unwrap();
            let n = m.ground().len();
            let s = ElementSet::from_mask(m.ground(), mask & ((1u64 << n) - 1)).unwrap();
            let expected: usize = m.blocks().iter().zip(m.capacities())
                .map(|(b, &d)| s.intersection(b).len().min(d))
                .sum();
            prop_assert_eq!(m.rank(&s).unwrap(), expected);
        }
    }
}
