//! Verification suites. Each suite appends one row per named check, with the
//! measured deviation and the tolerance it was held to.

use anyhow::{bail, Result};
use crround_core::analysis::{
    alpha_inequality_check, center_curvature, check_h_gradient, drop_grid_maximum, expected_rank,
    g_value, g_via_simulation_consistency, h_grid_maximum, h_hessian_numeric, h_value,
    h_value_recursive, hessian_at_center, optimality_bound, symmetric_eigenvalues, AnalysisContext,
    GRADIENT_STEP, HESSIAN_STEP,
};
use crround_core::mc::{
    chi_square_fit_at, estimate_balancedness, monotonicity_probe, random_uniform_point,
};
use crround_core::rng::{shard_stream, RandomStream};
use crround_core::scheme::enumerate_distribution;
use crround_core::{
    alpha, balancedness_c, marginal, partition_balancedness, ElementSet, FractionalPoint,
    GroundSet, TrialConfig, UniformMatroid,
};
use rand::seq::index::sample;
use rand::Rng;
use serde_json::{json, Map, Value};

use super::element_bounds;
use crate::args::{Suite, Tolerances, VerifyArgs};
use crate::input::parse_partition_spec;
use crate::report::{to_value, RunReport};

/// Suites run by `all`, in order.
pub const SUITES: [Suite; 11] = [
    Suite::Distribution,
    Suite::Marginal,
    Suite::Recursion,
    Suite::DropMaximum,
    Suite::DropBound,
    Suite::Optimality,
    Suite::Monotonicity,
    Suite::Hessian,
    Suite::AlphaMonotone,
    Suite::Partition,
    Suite::SamplerFit,
];

/// `(n, k)` pairs for the grid searches when none is given.
pub const DROP_MAXIMUM_PAIRS: [(usize, usize); 5] = [(3, 1), (3, 2), (4, 2), (5, 2), (5, 3)];

/// `(n, k)` pairs for the sampler fit when none is given.
pub const SAMPLER_FIT_PAIRS: [(usize, usize); 3] = [(5, 2), (6, 3), (8, 2)];

pub fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Distribution => "distribution",
        Suite::Marginal => "marginal",
        Suite::Recursion => "recursion",
        Suite::DropMaximum => "drop-maximum",
        Suite::DropBound => "drop-bound",
        Suite::Optimality => "optimality",
        Suite::Monotonicity => "monotonicity",
        Suite::Hessian => "hessian",
        Suite::AlphaMonotone => "alpha-monotone",
        Suite::Partition => "partition",
        Suite::SamplerFit => "sampler-fit",
        Suite::All => "all",
    }
}

struct Runner<'a> {
    args: &'a VerifyArgs,
    tol: &'a Tolerances,
    seed: u64,
    report: RunReport,
    suite: &'static str,
}

impl Runner<'_> {
    fn check(&mut self, name: &str, measured: f64, tolerance: f64, ok: bool, detail: Value) {
        let mut row = Map::new();
        row.insert("suite".into(), self.suite.into());
        row.insert("check".into(), name.into());
        row.insert("measured".into(), to_value(measured));
        row.insert("tolerance".into(), to_value(tolerance));
        row.insert("pass".into(), ok.into());
        if let Value::Object(extra) = detail {
            row.extend(extra);
        }
        self.report.record(ok);
        self.report.push(row);
    }

    /// `|measured| <= tolerance`.
    fn within(&mut self, name: &str, measured: f64, tolerance: f64, detail: Value) {
        let ok = measured.abs() <= tolerance;
        self.check(name, measured, tolerance, ok, detail);
    }

    fn rng(&self, suite: Suite) -> RandomStream {
        shard_stream(self.seed, 1 << 32 | suite as u64)
    }

    fn samples(&self, default: u64) -> u64 {
        self.args.samples.unwrap_or(default)
    }

    fn trials(&self, default: u64) -> u64 {
        self.args.trials.unwrap_or(default)
    }

    fn pairs(&self, default: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
        match (self.args.n, self.args.k) {
            (Some(n), Some(k)) => Ok(vec![(n, k)]),
            (None, None) => Ok(default.to_vec()),
            _ => bail!("--n and --k go together"),
        }
    }
}

pub fn run(args: &VerifyArgs, seed: u64, tol: &Tolerances) -> Result<RunReport> {
    let mut runner = Runner {
        args,
        tol,
        seed,
        report: RunReport::new("verify", seed),
        suite: "",
    };
    runner
        .report
        .param("suite", suite_name(args.suite))
        .param("n", args.n)
        .param("k", args.k)
        .param("samples", args.samples)
        .param("trials", args.trials)
        .param("shards", args.shards);
    let suites: Vec<Suite> = match args.suite {
        Suite::All => SUITES.to_vec(),
        s => vec![s],
    };
    for s in suites {
        runner.suite = suite_name(s);
        match s {
            Suite::Distribution => distribution(&mut runner)?,
            Suite::Marginal => marginal_suite(&mut runner)?,
            Suite::Recursion => recursion(&mut runner)?,
            Suite::DropMaximum => drop_maximum(&mut runner)?,
            Suite::DropBound => drop_bound(&mut runner)?,
            Suite::Optimality => optimality(&mut runner)?,
            Suite::Monotonicity => monotonicity(&mut runner)?,
            Suite::Hessian => hessian(&mut runner)?,
            Suite::AlphaMonotone => alpha_monotone(&mut runner)?,
            Suite::Partition => partition(&mut runner)?,
            Suite::SamplerFit => sampler_fit(&mut runner)?,
            Suite::All => unreachable!("expanded above"),
        }
    }
    Ok(runner.report)
}

/// A random `(x, A, k)` with `x` in the polytope of `U^k_n`, `n <= max_n`
/// and `k < |A|`.
fn random_instance(
    rng: &mut RandomStream,
    max_n: usize,
) -> Result<(FractionalPoint, ElementSet, usize)> {
    let n = rng.random_range(2..=max_n);
    let k = rng.random_range(1..n);
    let x = random_uniform_point(n, k, rng)?;
    let m = rng.random_range(k + 1..=n);
    let a = ElementSet::new(x.ground(), sample(rng, n, m))?;
    Ok((x, a, k))
}

fn distribution(r: &mut Runner) -> Result<()> {
    let mut rng = r.rng(Suite::Distribution);
    let samples = r.samples(500);
    let mut min_weight = f64::INFINITY;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..samples {
        let (x, a, k) = random_instance(&mut rng, 16)?;
        let table = enumerate_distribution(&x, &a, k)?;
        for (_, p) in &table.entries {
            min_weight = min_weight.min(*p);
        }
        worst_sum = worst_sum.max((table.total() - 1.0).abs());
    }
    let detail = json!({"samples": samples});
    r.check(
        "nonnegative",
        min_weight,
        0.0,
        min_weight >= 0.0,
        detail.clone(),
    );
    r.within("sums_to_one", worst_sum, r.tol.exact, detail);
    Ok(())
}

fn marginal_suite(r: &mut Runner) -> Result<()> {
    let mut rng = r.rng(Suite::Marginal);
    let samples = r.samples(500);
    let mut worst: f64 = 0.0;
    let mut worst_total: f64 = 0.0;
    for _ in 0..samples {
        let (x, a, k) = random_instance(&mut rng, 16)?;
        let table = enumerate_distribution(&x, &a, k)?;
        let mut total = 0.0;
        for e in a.iter() {
            let closed = marginal(&x, &a, e, k)?;
            worst = worst.max((closed - table.inclusion_probability(e)).abs());
            total += closed;
        }
        worst_total = worst_total.max((total - k as f64).abs());
    }
    let detail = json!({"samples": samples});
    r.within("closed_form_vs_table", worst, r.tol.exact, detail.clone());
    r.within("marginals_sum_to_k", worst_total, r.tol.exact, detail);
    Ok(())
}

fn recursion(r: &mut Runner) -> Result<()> {
    let mut rng = r.rng(Suite::Recursion);
    let samples = r.samples(1000);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let m = rng.random_range(1..=14);
        let x = FractionalPoint::new((0..m).map(|_| rng.random::<f64>()).collect())?;
        let s = x.ground().full();
        let k = rng.random_range(0..=m + 1);
        worst = worst.max((h_value(&x, &s, k)? - h_value_recursive(&x, &s, k)?).abs());
    }
    r.within(
        "direct_vs_recursive",
        worst,
        r.tol.recursion,
        json!({"samples": samples}),
    );
    let x = FractionalPoint::new(vec![0.3, 0.8, 0.1])?;
    let s = x.ground().full();
    let degenerate = h_value(&x, &s, 0)?.abs() + h_value_recursive(&x, &s, 0)?.abs();
    r.within("rank_zero", degenerate, 0.0, json!({}));
    Ok(())
}

fn drop_maximum(r: &mut Runner) -> Result<()> {
    let resolution = r.args.resolution;
    for (n, k) in r.pairs(&DROP_MAXIMUM_PAIRS)? {
        let predicted = 1.0 - balancedness_c(k, n)?;
        let g = drop_grid_maximum(k, n, resolution)?;
        let centre = k * g.resolution / n;
        let offset = g
            .indices
            .iter()
            .map(|&i| i.abs_diff(centre))
            .max()
            .unwrap_or(0);
        let detail = json!({
            "n": n, "k": k, "resolution": g.resolution, "evaluated": g.evaluated,
            "value": g.value, "predicted": predicted, "argmax": g.point,
        });
        r.check(
            "argmax_is_symmetric",
            offset as f64,
            0.0,
            offset == 0,
            detail.clone(),
        );
        r.within(
            "max_value",
            g.value - predicted,
            r.tol.grid_max,
            detail.clone(),
        );
        let excess = g.value - predicted;
        r.check(
            "no_grid_point_exceeds",
            excess,
            r.tol.grid_exceed,
            excess <= r.tol.grid_exceed,
            detail,
        );

        let h = h_grid_maximum(k, n, resolution)?;
        let h_centre = k * h.resolution / n;
        let h_offset = h
            .indices
            .iter()
            .map(|&i| i.abs_diff(h_centre))
            .max()
            .unwrap_or(0);
        let alpha = alpha(k, n)?;
        let detail = json!({
            "n": n, "k": k, "resolution": h.resolution, "value": h.value,
            "predicted": alpha, "argmax": h.point,
        });
        r.check(
            "h_argmax_is_symmetric",
            h_offset as f64,
            0.0,
            h_offset == 0,
            detail.clone(),
        );
        r.within("h_max_value", h.value - alpha, r.tol.grid_max, detail);
    }
    Ok(())
}

/// A point of the polytope with `x_e = k - x(S)`.
fn face_point(rng: &mut RandomStream, n: usize, k: usize, e: usize) -> Result<FractionalPoint> {
    loop {
        let mut coords: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        coords[e] = 0.0;
        let rest: f64 = coords.iter().sum();
        let target = rng.random_range(k as f64 - 1.0..k as f64);
        let scale = target / rest;
        if coords.iter().all(|v| v * scale <= 1.0) {
            for v in coords.iter_mut() {
                *v *= scale;
            }
            coords[e] = k as f64 - target;
            return Ok(FractionalPoint::new(coords)?);
        }
    }
}

fn drop_bound(r: &mut Runner) -> Result<()> {
    let mut rng = r.rng(Suite::DropBound);
    let samples = r.samples(200);
    let mut worst_equality: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..samples {
        let n = rng.random_range(3..=8);
        let k = rng.random_range(1..n);
        let e = rng.random_range(0..n);
        let ctx = AnalysisContext::new(n, k, e)?;
        let s = ctx.rest();
        let x = face_point(&mut rng, n, k, e)?;
        worst_equality =
            worst_equality.max((g_value(&ctx, &x)? - h_value(&x, &s, k)? / k as f64).abs());
        let y = random_uniform_point(n, k, &mut rng)?;
        worst_excess = worst_excess.max(g_value(&ctx, &y)? - h_value(&y, &s, k)? / k as f64);
    }
    let detail = json!({"samples": samples});
    r.within(
        "equality_on_face",
        worst_equality,
        r.tol.exact,
        detail.clone(),
    );
    r.check(
        "bound_in_polytope",
        worst_excess,
        r.tol.exact,
        worst_excess <= r.tol.exact,
        detail,
    );

    let mut worst_chain: f64 = 0.0;
    for n in 2..=8 {
        for k in 1..n {
            let c = balancedness_c(k, n)?;
            let ctx = AnalysisContext::new(n, k, 0)?;
            let x = FractionalPoint::symmetric(k, n)?;
            let g = g_value(&ctx, &x)?;
            let h = h_value(&x, &ctx.rest(), k)? / k as f64;
            let opt = 1.0 - optimality_bound(k, n)?;
            for v in [g, h, opt] {
                worst_chain = worst_chain.max((v - (1.0 - c)).abs());
            }
        }
    }
    r.within(
        "symmetric_chain",
        worst_chain,
        r.tol.exact,
        json!({"n_max": 8}),
    );

    let trials = r.trials(200_000);
    for (n, k, e) in [(5, 2, 1), (6, 3, 5)] {
        let ctx = AnalysisContext::new(n, k, e)?;
        let x = random_uniform_point(n, k, &mut rng)?;
        let g = g_value(&ctx, &x)?;
        let est = g_via_simulation_consistency(&ctx, &x, trials, &mut rng)?;
        let sigma = (g * (1.0 - g) / trials as f64).sqrt();
        let dev = est.estimate - g;
        r.check(
            "simulation_consistency",
            dev,
            r.tol.sigma * sigma,
            dev.abs() <= r.tol.sigma * sigma,
            json!({"n": n, "k": k, "trials": trials, "estimate": est.estimate, "predicted": g}),
        );
    }
    Ok(())
}

/// A random point with `x(N) = k`.
fn rank_face_point(rng: &mut RandomStream, n: usize, k: usize) -> Result<FractionalPoint> {
    loop {
        let coords: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let scale = k as f64 / coords.iter().sum::<f64>();
        if coords.iter().all(|v| v * scale <= 1.0) {
            return Ok(FractionalPoint::new(
                coords.iter().map(|v| v * scale).collect(),
            )?);
        }
    }
}

fn optimality(r: &mut Runner) -> Result<()> {
    let mut worst_rank: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    for n in 2..=12 {
        for k in 1..n {
            let c = balancedness_c(k, n)?;
            let m = UniformMatroid::with_size(n, k)?;
            let rank = expected_rank(&m, &FractionalPoint::symmetric(k, n)?)?;
            worst_rank = worst_rank.max((rank - k as f64 * c).abs());
            worst_bound = worst_bound.max((optimality_bound(k, n)? - c).abs());
        }
    }
    r.within(
        "symmetric_expected_rank",
        worst_rank,
        r.tol.exact,
        json!({"n_max": 12}),
    );
    r.within(
        "bound_equals_c",
        worst_bound,
        r.tol.exact,
        json!({"n_max": 12}),
    );

    let mut rng = r.rng(Suite::Optimality);
    let samples = r.samples(200);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.random_range(2..=12);
        let k = rng.random_range(1..n);
        let x = rank_face_point(&mut rng, n, k)?;
        let m = UniformMatroid::with_size(n, k)?;
        let total = expected_rank(&m, &x)? + h_value(&x, &x.ground().full(), k)?;
        worst = worst.max((total - k as f64).abs());
    }
    r.within(
        "rank_plus_h_on_face",
        worst,
        r.tol.exact,
        json!({"samples": samples}),
    );
    Ok(())
}

fn monotonicity(r: &mut Runner) -> Result<()> {
    let mut rng = r.rng(Suite::Monotonicity);
    let chains = r.samples(100_000);
    let points = 100.min(chains.max(1));
    let mut violations = 0;
    let mut min_difference = f64::INFINITY;
    for p in 0..points {
        let per_point = chains / points + u64::from(p < chains % points);
        let n = rng.random_range(3..=12);
        let k = rng.random_range(1..n);
        let x = random_uniform_point(n, k, &mut rng)?;
        let rep = monotonicity_probe(&x, k, per_point, &mut rng)?;
        violations += rep.violations;
        min_difference = min_difference.min(rep.min_difference);
    }
    r.check(
        "random_chains",
        min_difference,
        r.tol.monotone,
        violations == 0,
        json!({"chains": chains, "points": points, "violations": violations}),
    );

    // x_e + x_f = k and x(A \ e) = 0 make the difference vanish
    for (k, x_e, x_f) in [(1, 0.4, 0.6), (2, 1.0, 1.0)] {
        let x = FractionalPoint::new(vec![x_e, 0.0, 0.0, 0.0, x_f])?;
        let a = ElementSet::new(x.ground(), [0, 1, 2, 3])?;
        let b = a.with(4)?;
        let diff = marginal(&x, &a, 0, k)? - marginal(&x, &b, 0, k)?;
        r.within(
            "tight_chain",
            diff,
            r.tol.monotone,
            json!({"k": k, "x_e": x_e, "x_f": x_f}),
        );
    }
    Ok(())
}

fn hessian(r: &mut Runner) -> Result<()> {
    let pairs = match (r.args.n, r.args.k) {
        (Some(n), Some(k)) => vec![(n, k)],
        (None, None) => (2..=8).flat_map(|n| (1..n).map(move |k| (n, k))).collect(),
        _ => bail!("--n and --k go together"),
    };
    let single = pairs.len() == 1;
    let mut worst_fd: f64 = 0.0;
    let mut worst_spectrum: f64 = 0.0;
    let mut largest_eigenvalue = f64::NEG_INFINITY;
    for &(n, k) in &pairs {
        let closed = hessian_at_center(k, n)?;
        let numeric = h_hessian_numeric(k, n, HESSIAN_STEP)?;
        worst_fd = worst_fd.max((&closed - numeric).abs().max());
        let c = center_curvature(k, n)?;
        let ev = symmetric_eigenvalues(&closed);
        let mut expected = vec![-c * n as f64];
        expected.extend(std::iter::repeat_n(-c, n - 2));
        for (a, b) in ev.iter().zip(&expected) {
            worst_spectrum = worst_spectrum.max(((a - b) / b).abs());
        }
        largest_eigenvalue = largest_eigenvalue.max(ev[ev.len() - 1]);
        if single {
            let scaled: Vec<f64> = ev.iter().rev().map(|v| -v / c).collect();
            r.report
                .push(json!({"suite": r.suite, "n": n, "k": k, "c": c, "scaled_spectrum": scaled}));
        }
    }
    let detail = json!({"pairs": pairs.len()});
    r.within("finite_difference", worst_fd, r.tol.hessian, detail.clone());
    r.within("spectrum", worst_spectrum, r.tol.spectrum, detail.clone());
    r.check(
        "negative_definite",
        largest_eigenvalue,
        0.0,
        largest_eigenvalue < 0.0,
        detail,
    );

    let mut rng = r.rng(Suite::Hessian);
    let samples = r.samples(200);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let m = rng.random_range(1..=12);
        let k = rng.random_range(1..=m);
        let x = FractionalPoint::new((0..m).map(|_| rng.random_range(0.01..0.99)).collect())?;
        worst = worst.max(check_h_gradient(&x, &x.ground().full(), k, GRADIENT_STEP)?.max_abs_diff);
    }
    r.within(
        "gradient",
        worst,
        r.tol.gradient,
        json!({"samples": samples, "step": GRADIENT_STEP}),
    );
    Ok(())
}

fn alpha_monotone(r: &mut Runner) -> Result<()> {
    let report = alpha_inequality_check(r.args.n_max)?;
    r.check(
        "strict_growth",
        report.min_log_margin,
        0.0,
        report.passed(),
        json!({"n_max": report.n_max, "pairs": report.pairs, "violations": report.violations}),
    );
    Ok(())
}

fn partition(r: &mut Runner) -> Result<()> {
    let m = parse_partition_spec(&r.args.partition)?;
    let bounds = element_bounds(&m);
    let mut oracle = 1.0f64;
    for (block, &d) in m.blocks().iter().zip(m.capacities()) {
        if d >= 1 && d < block.len() {
            oracle = oracle.min(balancedness_c(d, block.len())?);
        }
    }
    let reported = partition_balancedness(&m);
    r.within(
        "scheme_balancedness",
        reported - oracle,
        r.tol.exact,
        json!({"reported": reported}),
    );

    let x = m.blockwise_symmetric_point();
    let cfg = TrialConfig {
        trials: r.trials(1_000_000),
        seed: r.seed,
        z: r.tol.sigma,
        parallel_shards: r.args.shards,
        polytope_tol: r.tol.polytope,
    };
    let est = estimate_balancedness(&m.clone().into(), &x, &cfg)?;
    for row in &est.estimates {
        let bound = bounds[row.element];
        let dev = row.conditional_keep - bound;
        let width = r.tol.sigma * row.std_error;
        r.check(
            "block_keep_rate",
            dev,
            width,
            dev.abs() <= width,
            json!({"element": row.element, "block": m.block_of(row.element), "estimate": row.conditional_keep, "bound": bound}),
        );
    }
    if let Some(w) = est.weakest() {
        let ok = w.conditional_keep + r.tol.sigma * w.std_error >= reported;
        r.check(
            "weakest_element",
            w.conditional_keep - reported,
            r.tol.sigma * w.std_error,
            ok,
            json!({"element": w.element}),
        );
    }
    if !est.unobserved.is_empty() {
        r.check(
            "unobserved",
            est.unobserved.len() as f64,
            0.0,
            false,
            json!({"elements": est.unobserved}),
        );
    }
    Ok(())
}

/// `x_i = (k/n)(1/2 + i/(n-1))`: a skewed point with `x(N) = k`.
pub fn ramp_point(n: usize, k: usize) -> Result<FractionalPoint> {
    let p = k as f64 / n as f64;
    Ok(FractionalPoint::new(
        (0..n)
            .map(|i| (p * (0.5 + i as f64 / (n - 1) as f64)).min(1.0))
            .collect(),
    )?)
}

fn sampler_fit(r: &mut Runner) -> Result<()> {
    let trials = r.trials(1_000_000);
    for (j, (n, k)) in r.pairs(&SAMPLER_FIT_PAIRS)?.into_iter().enumerate() {
        let x = ramp_point(n, k)?;
        let a = GroundSet::new(n)?.full();
        let cfg =
            TrialConfig::new(trials, r.seed.wrapping_add(j as u64)).with_shards(r.args.shards);
        let fit = chi_square_fit_at(&x, &a, k, &cfg, r.tol.significance)?;
        r.check(
            "chi_square",
            fit.statistic,
            fit.critical,
            fit.pass,
            json!({"n": n, "k": k, "trials": trials, "dof": fit.dof, "significance": fit.significance, "zero_mass_hits": fit.zero_mass_hits}),
        );
    }
    Ok(())
}
