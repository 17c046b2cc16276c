use anyhow::{anyhow, bail, Result};
use crround_core::mc::{estimate_balancedness, random_partition_point, random_uniform_point};
use crround_core::rng::shard_stream;
use crround_core::{
    partition_balancedness, Constraint, FractionalPoint, Matroid, TrialConfig, UniformMatroid,
};
use serde_json::json;

use super::element_bounds;
use crate::args::{EstimateArgs, Tolerances};
use crate::input::parse_partition_spec;
use crate::report::RunReport;

// stream id for drawing random points, disjoint from the trial shards
const POINT_STREAM: u64 = u64::MAX;

fn constraint(args: &EstimateArgs) -> Result<Constraint> {
    match (&args.constraint.partition, args.constraint.k) {
        (Some(spec), _) => {
            let m = parse_partition_spec(spec)?;
            if let Some(n) = args.n {
                if n != m.ground().len() {
                    bail!(
                        "--n {n} disagrees with the partition's {} elements",
                        m.ground().len()
                    );
                }
            }
            Ok(m.into())
        }
        (None, Some(k)) => {
            let n = args.n.ok_or_else(|| anyhow!("--k needs --n"))?;
            Ok(UniformMatroid::with_size(n, k)?.into())
        }
        (None, None) => bail!("pass --k with --n, or --partition"),
    }
}

fn points(spec: &str, c: &Constraint, seed: u64) -> Result<Vec<FractionalPoint>> {
    let spec = spec.trim();
    if spec == "symmetric" {
        return Ok(vec![match c {
            Constraint::Uniform(m) => FractionalPoint::symmetric(m.k(), m.n())?,
            Constraint::Partition(m) => m.blockwise_symmetric_point(),
        }]);
    }
    if let Some(count) = spec.strip_prefix("random:") {
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad point count in `{spec}`"))?;
        let mut rng = shard_stream(seed, POINT_STREAM);
        return (0..count)
            .map(|_| {
                Ok(match c {
                    Constraint::Uniform(m) => random_uniform_point(m.n(), m.k(), &mut rng)?,
                    Constraint::Partition(m) => random_partition_point(m, &mut rng)?,
                })
            })
            .collect();
    }
    let coords = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| anyhow!("--x must be `symmetric`, `random:<count>` or a list of numbers"))?;
    Ok(vec![FractionalPoint::new(coords)?])
}

pub fn run(args: &EstimateArgs, seed: u64, tol: &Tolerances) -> Result<RunReport> {
    let c = constraint(args)?;
    let partition = c.to_partition();
    let bounds = element_bounds(&partition);
    let xs = points(&args.x, &c, seed)?;

    let mut report = RunReport::new("estimate", seed);
    report
        .param("n", c.ground().len())
        .param("x", &args.x)
        .param("trials", args.trials)
        .param("shards", args.shards)
        .param("z", args.z)
        .param("scheme_balancedness", partition_balancedness(&partition))
        .param("tol_polytope", tol.polytope);
    if xs.len() > 1 || args.x.trim() != "symmetric" {
        report.param(
            "points",
            xs.iter().map(FractionalPoint::coords).collect::<Vec<_>>(),
        );
    }

    for (j, x) in xs.iter().enumerate() {
        if x.len() != c.ground().len() {
            bail!(
                "x has {} entries but the constraint has {} elements",
                x.len(),
                c.ground().len()
            );
        }
        let cfg = TrialConfig {
            trials: args.trials,
            seed: seed.wrapping_add(j as u64),
            z: args.z,
            parallel_shards: args.shards,
            polytope_tol: tol.polytope,
        };
        let est = estimate_balancedness(&c, x, &cfg)?;
        for row in &est.estimates {
            let bound = bounds[row.element];
            let flagged = row.ci_high < bound;
            report.record(!flagged);
            report.push(json!({
                "point": j,
                "element": row.element,
                "conditional_keep": row.conditional_keep,
                "trials_conditioned": row.trials_conditioned,
                "kept": row.kept,
                "std_error": row.std_error,
                "ci_low": row.ci_low,
                "ci_high": row.ci_high,
                "bound": bound,
                "flagged": flagged,
            }));
        }
        for &e in &est.unobserved {
            report.record(false);
            report.push(json!({"point": j, "element": e, "bound": bounds[e], "flagged": true}));
        }
    }
    Ok(report)
}
