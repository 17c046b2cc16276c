//! Monte Carlo estimation: realized sets, per-element balancedness with
//! confidence intervals, sampler goodness of fit and monotonicity probes.
//!
//! Parallel runs split trials across shards. Shard `s` draws from
//! [`shard_stream`]`(seed, s)` and shard counts are integers merged in shard
//! order, so a run is reproducible for fixed `(seed, shards, trials)`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::matroid::{
    Constraint, ElementSet, FractionalPoint, GroundSet, PartitionMatroid, DEFAULT_POLYTOPE_TOL,
};
use crate::rng::shard_stream;
use crate::scheme::{enumerate_distribution, marginal_unchecked, CrScheme, SelectBuffers};
use crate::special::binomial_exact;

/// Default significance level of [`chi_square_fit`].
pub const FIT_SIGNIFICANCE: f64 = 1e-3;

/// Largest subset table accepted by [`chi_square_fit`].
pub const FIT_MAX_CELLS: u128 = 10_000;

/// Smallest expected count per cell accepted by [`chi_square_fit`].
pub const FIT_MIN_EXPECTED: f64 = 5.0;

/// Marginal differences below `-MONOTONICITY_TOL` count as violations.
pub const MONOTONICITY_TOL: f64 = 1e-12;

/// Draws `R(x)`.
pub fn sample_r<R: Rng + ?Sized>(x: &FractionalPoint, rng: &mut R) -> ElementSet {
    let mut out = Vec::new();
    sample_into(x.coords(), rng, &mut out);
    ElementSet::from_sorted_unchecked(x.ground(), out)
}

/// Writes `R(x)` to `out` in increasing order. Consumes one uniform draw per
/// coordinate.
pub fn sample_into<R: Rng + ?Sized>(x: &[f64], rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    for (i, &p) in x.iter().enumerate() {
        if rng.random::<f64>() < p {
            out.push(i);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub seed: u64,
    /// Confidence multiplier for reported intervals.
    pub z: f64,
    pub parallel_shards: usize,
    pub polytope_tol: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 0,
            z: 3.0,
            parallel_shards: 1,
            polytope_tol: DEFAULT_POLYTOPE_TOL,
        }
    }
}

impl TrialConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ..Self::default()
        }
    }

    pub fn with_shards(self, parallel_shards: usize) -> Self {
        Self {
            parallel_shards,
            ..self
        }
    }

    pub fn with_z(self, z: f64) -> Self {
        Self { z, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("at least one trial is required".into()));
        }
        if self.parallel_shards == 0 {
            return Err(Error::Parameter("at least one shard is required".into()));
        }
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(Error::Parameter(format!(
                "z must be finite and non-negative, got {}",
                self.z
            )));
        }
        Ok(())
    }

    /// Trials assigned to each shard; the first `trials % shards` shards get
    /// one extra.
    pub fn shard_sizes(&self) -> Vec<u64> {
        let shards = self.parallel_shards as u64;
        let base = self.trials / shards;
        let extra = self.trials % shards;
        (0..shards).map(|s| base + u64::from(s < extra)).collect()
    }

    fn run<T, F>(&self, shard: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
    {
        self.validate()?;
        let sizes = self.shard_sizes();
        Ok(sizes
            .par_iter()
            .enumerate()
            .map(|(s, &trials)| shard(s as u64, trials))
            .collect())
    }
}

/// Per-element counts of realizations and keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeepCounts {
    pub trials: u64,
    pub realized: Vec<u64>,
    pub kept: Vec<u64>,
}

impl KeepCounts {
    pub fn new(n: usize) -> Self {
        Self {
            trials: 0,
            realized: vec![0; n],
            kept: vec![0; n],
        }
    }

    pub fn merge(&mut self, other: &KeepCounts) {
        self.trials += other.trials;
        for (a, b) in self.realized.iter_mut().zip(&other.realized) {
            *a += b;
        }
        for (a, b) in self.kept.iter_mut().zip(&other.kept) {
            *a += b;
        }
    }
}

/// Runs `trials` rounds of "draw `R(x)`, apply the scheme" on one stream.
pub fn keep_counts<R: Rng + ?Sized>(scheme: &CrScheme<'_>, trials: u64, rng: &mut R) -> KeepCounts {
    let x = scheme.point().coords();
    let mut counts = KeepCounts::new(x.len());
    let mut buffers = SelectBuffers::default();
    let mut realized = Vec::with_capacity(x.len());
    let mut kept = Vec::with_capacity(x.len());
    for _ in 0..trials {
        sample_into(x, rng, &mut realized);
        scheme.select_into(&realized, rng, &mut buffers, &mut kept);
        for &i in &realized {
            counts.realized[i] += 1;
        }
        for &i in &kept {
            counts.kept[i] += 1;
        }
    }
    counts.trials = trials;
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancednessEstimate {
    pub element: usize,
    /// Fraction of conditioned trials in which the element was kept.
    pub conditional_keep: f64,
    /// Trials in which the element was realized.
    pub trials_conditioned: u64,
    pub kept: u64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BalancednessEstimate {
    fn from_counts(element: usize, kept: u64, conditioned: u64, z: f64) -> Self {
        let p = kept as f64 / conditioned as f64;
        let std_error = (p * (1.0 - p) / conditioned as f64).sqrt();
        Self {
            element,
            conditional_keep: p,
            trials_conditioned: conditioned,
            kept,
            std_error,
            ci_low: (p - z * std_error).max(0.0),
            ci_high: (p + z * std_error).min(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancednessReport {
    pub trials: u64,
    pub shards: usize,
    pub z: f64,
    /// One row per element of `supp(x)` realized at least once.
    pub estimates: Vec<BalancednessEstimate>,
    /// Elements of `supp(x)` never realized, so no estimate exists.
    pub unobserved: Vec<usize>,
}

impl BalancednessReport {
    /// The estimate with the smallest keep rate.
    pub fn weakest(&self) -> Option<&BalancednessEstimate> {
        self.estimates
            .iter()
            .min_by(|a, b| a.conditional_keep.total_cmp(&b.conditional_keep))
    }
}

/// Estimates `P[i ∈ π_x(R(x)) | i ∈ R(x)]` for every `i ∈ supp(x)`.
/// Conditioning is by rejection: each trial informs every realized element.
pub fn estimate_balancedness(
    constraint: &Constraint,
    x: &FractionalPoint,
    cfg: &TrialConfig,
) -> Result<BalancednessReport> {
    let scheme = CrScheme::new(constraint, x, cfg.polytope_tol)?;
    let shards =
        cfg.run(|s, trials| keep_counts(&scheme, trials, &mut shard_stream(cfg.seed, s)))?;
    let mut counts = KeepCounts::new(x.len());
    for shard in &shards {
        counts.merge(shard);
    }
    let mut estimates = Vec::new();
    let mut unobserved = Vec::new();
    for i in x.support().iter() {
        match counts.realized[i] {
            0 => unobserved.push(i),
            c => estimates.push(BalancednessEstimate::from_counts(
                i,
                counts.kept[i],
                c,
                cfg.z,
            )),
        }
    }
    Ok(BalancednessReport {
        trials: cfg.trials,
        shards: cfg.parallel_shards,
        z: cfg.z,
        estimates,
        unobserved,
    })
}

fn check_truncating_set(x: &FractionalPoint, a: &ElementSet, k: usize) -> Result<()> {
    x.ground().check_same(a.ground())?;
    if k == 0 || a.len() <= k {
        return Err(Error::Cardinality(format!(
            "need 1 <= k < |A| (k = {k}, |A| = {})",
            a.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalEstimate {
    pub trials: u64,
    pub counts: BTreeMap<usize, u64>,
    pub frequencies: BTreeMap<usize, f64>,
}

/// Empirical `P[e ∈ π_x(A)]` for each `e ∈ A`, from repeated selections on
/// the fixed set `A`.
pub fn estimate_marginal(
    x: &FractionalPoint,
    a: &ElementSet,
    k: usize,
    cfg: &TrialConfig,
) -> Result<MarginalEstimate> {
    check_truncating_set(x, a, k)?;
    let scheme = CrScheme::uniform_unchecked(x, k);
    let shards = cfg.run(|s, trials| {
        let mut rng = shard_stream(cfg.seed, s);
        let mut buffers = SelectBuffers::default();
        let mut kept = Vec::with_capacity(k);
        let mut counts = vec![0u64; x.len()];
        for _ in 0..trials {
            scheme.select_into(a.members(), &mut rng, &mut buffers, &mut kept);
            for &i in &kept {
                counts[i] += 1;
            }
        }
        counts
    })?;
    let mut counts = BTreeMap::new();
    for i in a.iter() {
        counts.insert(i, shards.iter().map(|c| c[i]).sum::<u64>());
    }
    let frequencies = counts
        .iter()
        .map(|(&i, &c)| (i, c as f64 / cfg.trials as f64))
        .collect();
    Ok(MarginalEstimate {
        trials: cfg.trials,
        counts,
        frequencies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub significance: f64,
    /// Cells of positive probability.
    pub cells: usize,
    /// Draws that landed on a zero-probability subset.
    pub zero_mass_hits: u64,
    pub pass: bool,
}

/// Upper `significance` quantile of the chi-square distribution with `dof`
/// degrees of freedom, by the Wilson–Hilferty cube approximation.
pub fn chi_square_critical(dof: usize, significance: f64) -> Result<f64> {
    if dof == 0 || !(significance > 0.0 && significance < 1.0) {
        return Err(Error::Parameter(format!(
            "chi-square quantile needs dof >= 1 and 0 < significance < 1 (got {dof}, {significance})"
        )));
    }
    let z = Normal::standard().inverse_cdf(1.0 - significance);
    let v = dof as f64;
    let a = 2.0 / (9.0 * v);
    Ok(v * (1.0 - a + z * a.sqrt()).powi(3))
}

/// Pearson fit of the sampler's subset frequencies on `A` against the
/// enumerated weights, at significance [`FIT_SIGNIFICANCE`].
pub fn chi_square_fit(
    x: &FractionalPoint,
    a: &ElementSet,
    k: usize,
    cfg: &TrialConfig,
) -> Result<ChiSquareFit> {
    chi_square_fit_at(x, a, k, cfg, FIT_SIGNIFICANCE)
}

pub fn chi_square_fit_at(
    x: &FractionalPoint,
    a: &ElementSet,
    k: usize,
    cfg: &TrialConfig,
    significance: f64,
) -> Result<ChiSquareFit> {
    check_truncating_set(x, a, k)?;
    let m = a.len();
    let cells = binomial_exact(m as u64, k as u64).unwrap_or(u128::MAX);
    if cells > FIT_MAX_CELLS {
        return Err(Error::TableTooLarge {
            entries: cells,
            cap: FIT_MAX_CELLS,
        });
    }
    cfg.validate()?;
    let table = enumerate_distribution(x, a, k)?;
    let trials = cfg.trials as f64;
    let smallest = table
        .entries
        .iter()
        .map(|(_, p)| *p)
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    if smallest * trials < FIT_MIN_EXPECTED {
        return Err(Error::Parameter(format!(
            "expected count {:.3} below {FIT_MIN_EXPECTED} in some cell; raise the trial count",
            smallest * trials
        )));
    }

    let ranker = CombinationRank::new(a, k);
    let scheme = CrScheme::uniform_unchecked(x, k);
    let shards = cfg.run(|s, trials| {
        let mut rng = shard_stream(cfg.seed, s);
        let mut buffers = SelectBuffers::default();
        let mut kept = Vec::with_capacity(k);
        let mut counts = vec![0u64; cells as usize];
        for _ in 0..trials {
            scheme.select_into(a.members(), &mut rng, &mut buffers, &mut kept);
            counts[ranker.rank(&kept)] += 1;
        }
        counts
    })?;
    let mut observed = vec![0u64; cells as usize];
    for shard in &shards {
        for (o, c) in observed.iter_mut().zip(shard) {
            *o += c;
        }
    }

    let mut statistic = 0.0;
    let mut positive = 0;
    let mut zero_mass_hits = 0;
    for (subset, p) in &table.entries {
        let o = observed[ranker.rank(subset.members())];
        if *p > 0.0 {
            let expected = p * trials;
            statistic += (o as f64 - expected).powi(2) / expected;
            positive += 1;
        } else {
            zero_mass_hits += o;
        }
    }
    let dof = positive - 1;
    let critical = if dof == 0 {
        0.0
    } else {
        chi_square_critical(dof, significance)?
    };
    Ok(ChiSquareFit {
        statistic,
        dof,
        critical,
        significance,
        cells: positive,
        zero_mass_hits,
        pass: statistic <= critical && zero_mass_hits == 0,
    })
}

/// Combinadic ranking of `k`-subsets of `A` into `0..C(|A|, k)`.
struct CombinationRank {
    position: Vec<usize>,
    binom: Vec<Vec<usize>>,
}

impl CombinationRank {
    fn new(a: &ElementSet, k: usize) -> Self {
        let mut position = vec![usize::MAX; a.ground().len()];
        for (p, i) in a.iter().enumerate() {
            position[i] = p;
        }
        let binom = (0..a.len())
            .map(|p| {
                (0..=k)
                    .map(|j| binomial_exact(p as u64, j as u64).unwrap_or(0) as usize)
                    .collect()
            })
            .collect();
        Self { position, binom }
    }

    /// `subset` must be sorted and inside `A`.
    fn rank(&self, subset: &[usize]) -> usize {
        subset
            .iter()
            .enumerate()
            .map(|(j, &i)| self.binom[self.position[i]][j + 1])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityChain {
    pub e: usize,
    pub f: usize,
    pub a: Vec<usize>,
    /// `P[e ∈ π_x(A)] - P[e ∈ π_x(A ∪ f)]`
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub samples: u64,
    pub violations: u64,
    pub min_difference: f64,
    /// The chain attaining `min_difference`.
    pub worst: Option<MonotonicityChain>,
}

/// Checks the closed-form marginals along random chains `e ∈ A ⊂ A ∪ f`.
/// Each chain picks `e` and `f ≠ e` uniformly and puts every other element
/// in `A` with probability 1/2.
pub fn monotonicity_probe<R: Rng + ?Sized>(
    x: &FractionalPoint,
    k: usize,
    samples: u64,
    rng: &mut R,
) -> Result<MonotonicityReport> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Parameter("chains need at least two elements".into()));
    }
    let coords = x.coords();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut report = MonotonicityReport {
        samples,
        violations: 0,
        min_difference: f64::INFINITY,
        worst: None,
    };
    for _ in 0..samples {
        let e = rng.random_range(0..n);
        let f = (e + rng.random_range(1..n)) % n;
        a.clear();
        b.clear();
        for i in 0..n {
            let member = i == e || (i != f && rng.random::<bool>());
            if member {
                a.push(i);
            }
            if member || i == f {
                b.push(i);
            }
        }
        let difference =
            marginal_unchecked(coords, &a, e, k) - marginal_unchecked(coords, &b, e, k);
        if difference < -MONOTONICITY_TOL {
            report.violations += 1;
        }
        if difference < report.min_difference {
            report.min_difference = difference;
            report.worst = Some(MonotonicityChain {
                e,
                f,
                a: a.clone(),
                difference,
            });
        }
    }
    Ok(report)
}

/// A random point of the polytope of `U^k_n`: uniform on the cube, scaled by
/// `k / x(N)` when the sum exceeds `k`.
pub fn random_uniform_point<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<FractionalPoint> {
    GroundSet::new(n)?;
    let mut coords: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    rescale(&mut coords, k);
    FractionalPoint::new(coords)
}

/// A random point of a partition matroid's polytope, drawn block by block as
/// in [`random_uniform_point`].
pub fn random_partition_point<R: Rng + ?Sized>(
    matroid: &PartitionMatroid,
    rng: &mut R,
) -> Result<FractionalPoint> {
    let mut coords = vec![0.0; matroid.blocks().iter().map(ElementSet::len).sum()];
    for (block, &cap) in matroid.blocks().iter().zip(matroid.capacities()) {
        let mut local: Vec<f64> = block.iter().map(|_| rng.random::<f64>()).collect();
        rescale(&mut local, cap);
        for (i, v) in block.iter().zip(local) {
            coords[i] = v;
        }
    }
    FractionalPoint::new(coords)
}

fn rescale(coords: &mut [f64], k: usize) {
    let total: f64 = coords.iter().sum();
    if total > k as f64 {
        let scale = k as f64 / total;
        for v in coords.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{balancedness_c, partition_balancedness};
    use crate::matroid::{Matroid, UniformMatroid};
    use crate::rng::seeded;
    use crate::scheme::marginal;

    #[test]
    fn realized_sets() {
        let mut rng = seeded(3);
        let zeros = FractionalPoint::constant(6, 0.0).unwrap();
        let ones = FractionalPoint::constant(6, 1.0).unwrap();
        for _ in 0..100 {
            assert!(sample_r(&zeros, &mut rng).is_empty());
            assert_eq!(sample_r(&ones, &mut rng).len(), 6);
        }
        let half = FractionalPoint::constant(10, 0.5).unwrap();
        let draws = 1_000_000;
        let mut hits = [0u64; 10];
        for _ in 0..draws {
            for i in sample_r(&half, &mut rng).iter() {
                hits[i] += 1;
            }
        }
        let sigma = (0.25 / draws as f64).sqrt();
        for h in hits {
            assert!((h as f64 / draws as f64 - 0.5).abs() <= 4.0 * sigma);
        }
    }

    #[test]
    fn shard_sizes_cover_all_trials() {
        let cfg = TrialConfig::new(10, 1).with_shards(4);
        assert_eq!(cfg.shard_sizes(), vec![3, 3, 2, 2]);
        assert!(TrialConfig::new(0, 1).validate().is_err());
        assert!(TrialConfig::new(1, 1).with_shards(0).validate().is_err());
        assert!(TrialConfig::new(1, 1).with_z(f64::NAN).validate().is_err());
    }

    #[test]
    fn symmetric_point_is_tight() {
        let (n, k) = (5, 2);
        let m = Constraint::from(UniformMatroid::with_size(n, k).unwrap());
        let x = FractionalPoint::symmetric(k, n).unwrap();
        let cfg = TrialConfig::new(200_000, 11).with_shards(4);
        let r = estimate_balancedness(&m, &x, &cfg).unwrap();
        let c = balancedness_c(k, n).unwrap();
        assert_eq!(r.estimates.len(), n);
        for est in &r.estimates {
            assert!((est.conditional_keep - c).abs() <= 4.0 * est.std_error);
            assert!(est.ci_low <= est.conditional_keep && est.conditional_keep <= est.ci_high);
        }
    }

    #[test]
    fn sparse_points_keep_everything() {
        let m = Constraint::from(UniformMatroid::with_size(5, 2).unwrap());
        let x = FractionalPoint::new(vec![0.0, 0.7, 0.0, 0.4, 0.0]).unwrap();
        let r = estimate_balancedness(&m, &x, &TrialConfig::new(10_000, 2)).unwrap();
        assert_eq!(r.estimates.len(), 2);
        for est in &r.estimates {
            assert_eq!(est.conditional_keep, 1.0);
            assert_eq!(est.std_error, 0.0);
        }
        assert!(r.unobserved.is_empty());
    }

    #[test]
    fn rarely_realized_elements_are_flagged() {
        let m = Constraint::from(UniformMatroid::with_size(3, 1).unwrap());
        let x = FractionalPoint::new(vec![0.5, 0.5, 1e-300]).unwrap();
        let r = estimate_balancedness(&m, &x, &TrialConfig::new(100, 2)).unwrap();
        assert_eq!(r.unobserved, vec![2]);
        assert_eq!(r.estimates.len(), 2);
    }

    #[test]
    fn points_outside_the_polytope_are_rejected() {
        let m = Constraint::from(UniformMatroid::with_size(3, 1).unwrap());
        let x = FractionalPoint::constant(3, 0.5).unwrap();
        assert!(matches!(
            estimate_balancedness(&m, &x, &TrialConfig::new(10, 0)),
            Err(Error::OutsidePolytope { .. })
        ));
    }

    #[test]
    fn estimates_are_reproducible_and_shards_merge() {
        let m = UniformMatroid::with_size(6, 2).unwrap();
        let x = FractionalPoint::new(vec![0.2, 0.5, 0.3, 0.4, 0.1, 0.35]).unwrap();
        let cfg = TrialConfig::new(20_001, 8).with_shards(3);
        let c = Constraint::from(m);
        let a = estimate_balancedness(&c, &x, &cfg).unwrap();
        let b = estimate_balancedness(&c, &x, &cfg).unwrap();
        assert_eq!(a, b);

        let scheme = CrScheme::new(&c, &x, DEFAULT_POLYTOPE_TOL).unwrap();
        let mut merged = KeepCounts::new(6);
        for (s, t) in cfg.shard_sizes().into_iter().enumerate() {
            merged.merge(&keep_counts(&scheme, t, &mut shard_stream(8, s as u64)));
        }
        assert_eq!(merged.trials, 20_001);
        for est in &a.estimates {
            assert_eq!(est.trials_conditioned, merged.realized[est.element]);
            assert_eq!(est.kept, merged.kept[est.element]);
        }
    }

    #[test]
    fn partition_estimates_respect_block_constants() {
        let m = PartitionMatroid::from_block_sizes(&[(2, 1), (3, 1)]).unwrap();
        let x = m.blockwise_symmetric_point();
        let bound = partition_balancedness(&m);
        let r =
            estimate_balancedness(&Constraint::from(m), &x, &TrialConfig::new(100_000, 4)).unwrap();
        let weakest = r.weakest().unwrap();
        assert!(weakest.conditional_keep + 4.0 * weakest.std_error >= bound);
        assert!((bound - balancedness_c(1, 3).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn marginal_frequencies() {
        let x = FractionalPoint::new(vec![0.1, 0.6, 0.3, 0.5, 0.2]).unwrap();
        let a = x.ground().full();
        let k = 2;
        let cfg = TrialConfig::new(200_000, 6).with_shards(2);
        let est = estimate_marginal(&x, &a, k, &cfg).unwrap();
        assert_eq!(est.counts.values().sum::<u64>(), 2 * 200_000);
        for (&i, &f) in &est.frequencies {
            let p = marginal(&x, &a, i, k).unwrap();
            assert!((f - p).abs() <= 4.0 * (p * (1.0 - p) / 200_000.0).sqrt());
        }
        assert!(estimate_marginal(&x, &a, 5, &cfg).is_err());
        assert!(estimate_marginal(&x, &a, 0, &cfg).is_err());
    }

    #[test]
    fn critical_values() {
        // tabulated upper 0.1% points: 10.828 (1 dof), 29.588 (10 dof), 149.449 (100 dof)
        assert!((chi_square_critical(10, 1e-3).unwrap() - 29.588).abs() < 0.2);
        assert!((chi_square_critical(100, 1e-3).unwrap() - 149.449).abs() < 0.2);
        assert!(chi_square_critical(1, 1e-3).unwrap() > 10.0);
        assert!(chi_square_critical(0, 1e-3).is_err());
        assert!(chi_square_critical(3, 0.0).is_err());
    }

    #[test]
    fn combination_ranks_are_a_bijection() {
        let g = GroundSet::new(9).unwrap();
        let a = ElementSet::new(g, [0, 2, 3, 5, 8]).unwrap();
        let ranker = CombinationRank::new(&a, 3);
        let table =
            enumerate_distribution(&FractionalPoint::constant(9, 0.1).unwrap(), &a, 3).unwrap();
        let mut ranks: Vec<usize> = table
            .entries
            .iter()
            .map(|(b, _)| ranker.rank(b.members()))
            .collect();
        ranks.sort_unstable();
        assert_eq!(ranks, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn sampler_fits_symmetric_and_skewed_targets() {
        let x = FractionalPoint::constant(4, 0.5).unwrap();
        let fit = chi_square_fit(&x, &x.ground().full(), 2, &TrialConfig::new(200_000, 1)).unwrap();
        assert!(fit.pass, "{fit:?}");
        assert_eq!(fit.dof, 5);
        let y = FractionalPoint::new(vec![0.05, 0.9, 0.2, 0.6, 0.15, 0.7]).unwrap();
        let fit = chi_square_fit(
            &y,
            &y.ground().full(),
            3,
            &TrialConfig::new(200_000, 2).with_shards(3),
        )
        .unwrap();
        assert!(fit.pass, "{fit:?}");
    }

    #[test]
    fn zero_mass_subsets_are_excluded_and_never_hit() {
        // with x = (1, 1, 0) the pair {0, 1} has weight 0
        let x = FractionalPoint::new(vec![1.0, 1.0, 0.0]).unwrap();
        let fit = chi_square_fit(&x, &x.ground().full(), 2, &TrialConfig::new(50_000, 3)).unwrap();
        assert_eq!(fit.cells, 2);
        assert_eq!(fit.zero_mass_hits, 0);
        assert!(fit.pass);
    }

    #[test]
    fn fit_preconditions() {
        let x = FractionalPoint::constant(16, 0.1).unwrap();
        let a = x.ground().full();
        assert!(matches!(
            chi_square_fit(&x, &a, 8, &TrialConfig::new(10, 0)),
            Err(Error::TableTooLarge { .. })
        ));
        let y = FractionalPoint::constant(6, 0.3).unwrap();
        assert!(chi_square_fit(&y, &y.ground().full(), 3, &TrialConfig::new(50, 0)).is_err());
    }

    #[test]
    fn random_chains_are_monotone() {
        let mut rng = seeded(12);
        for _ in 0..20 {
            let x = random_uniform_point(8, 3, &mut rng).unwrap();
            let r = monotonicity_probe(&x, 3, 2_000, &mut rng).unwrap();
            assert_eq!(r.violations, 0, "{:?}", r.worst);
        }
        assert!(
            monotonicity_probe(&FractionalPoint::constant(1, 0.5).unwrap(), 1, 1, &mut rng)
                .is_err()
        );
    }

    #[test]
    fn random_points_are_feasible() {
        let mut rng = seeded(13);
        let u = UniformMatroid::with_size(7, 2).unwrap();
        let p = PartitionMatroid::from_block_sizes(&[(2, 1), (3, 1), (4, 2)]).unwrap();
        for _ in 0..500 {
            assert!(u.in_polytope(
                &random_uniform_point(7, 2, &mut rng).unwrap(),
                DEFAULT_POLYTOPE_TOL
            ));
            assert!(p.in_polytope(
                &random_partition_point(&p, &mut rng).unwrap(),
                DEFAULT_POLYTOPE_TOL
            ));
        }
    }
}
