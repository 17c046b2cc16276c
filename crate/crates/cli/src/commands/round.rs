use anyhow::{bail, Result};
use crround_core::mc::sample_r;
use crround_core::rng::seeded;
use crround_core::{marginal, CrScheme, ElementSet, FractionalPoint, Matroid, PartitionMatroid};
use serde_json::json;

use crate::args::{RoundArgs, Tolerances};
use crate::input::{read_instance, resolve_constraint, Instance};

use crate::report::RunReport;

/// Closed-form keep probability of `e` on the fixed set `a`: the uniform
/// marginal on `a`'s part of `e`'s block.
fn block_marginal(
    m: &PartitionMatroid,
    x: &FractionalPoint,
    a: &ElementSet,
    e: usize,
) -> Result<f64> {
    let b = m.block_of(e);
    let part = a.intersection(&m.blocks()[b]);
    Ok(marginal(x, &part, e, m.capacities()[b])?)
}

pub fn run(args: &RoundArgs, seed: u64, tol: &Tolerances) -> Result<RunReport> {
    let instance = match (&args.input, &args.x) {
        (Some(path), _) => read_instance(path)?,
        (None, Some(x)) => Instance {
            x: FractionalPoint::new(x.clone())?,
            set: None,
            constraint: None,
        },
        (None, None) => bail!("round needs --input or --x"),
    };
    if args.trials == 0 {
        bail!("at least one trial is required");
    }
    let x = &instance.x;
    let constraint = resolve_constraint(&args.constraint, x.ground(), instance.constraint.clone())?;
    let set = match &args.set {
        Some(members) => Some(ElementSet::new(x.ground(), members.iter().copied())?),
        None => instance.set.clone(),
    };
    let scheme = CrScheme::new(&constraint, x, tol.polytope)?;
    let partition = constraint.to_partition();

    let mut report = RunReport::new("round", seed);
    report
        .param("n", x.len())
        .param("x", x.coords())
        .param("constraint", constraint_label(&partition))
        .param("set", set.as_ref().map(ElementSet::members))
        .param("trials", args.trials)
        .param("tol_polytope", tol.polytope);

    let mut rng = seeded(seed);
    let n = x.len();
    let mut realized_count = vec![0u64; n];
    let mut kept_count = vec![0u64; n];
    for trial in 0..args.trials {
        let realized = match &set {
            Some(a) => a.clone(),
            None => sample_r(x, &mut rng),
        };
        let outcome = scheme.select(&realized, &mut rng)?;
        for i in realized.iter() {
            realized_count[i] += 1;
        }
        for i in outcome.selected.iter() {
            kept_count[i] += 1;
        }
        if trial < args.max_rows {
            report.push(json!({
                "kind": "selection",
                "trial": trial,
                "realized": realized.members(),
                "selected": outcome.selected.members(),
                "truncated": outcome.truncated,
            }));
        }
    }

    for e in 0..n {
        if realized_count[e] == 0 {
            continue;
        }
        let frequency = kept_count[e] as f64 / realized_count[e] as f64;
        match &set {
            Some(a) => {
                let p = block_marginal(&partition, x, a, e)?;
                let std_error = (p * (1.0 - p) / args.trials as f64).sqrt();
                let ok = (frequency - p).abs() <= tol.sigma * std_error + 1e-12;
                if args.trials > 1 {
                    report.record(ok);
                }
                report.push(json!({
                    "kind": "frequency",
                    "element": e,
                    "kept": kept_count[e],
                    "frequency": frequency,
                    "marginal": p,
                    "std_error": std_error,
                    "tolerance_sigma": tol.sigma,
                    "pass": ok,
                }));
            }
            None => report.push(json!({
                "kind": "frequency",
                "element": e,
                "realized": realized_count[e],
                "kept": kept_count[e],
                "frequency": frequency,
            })),
        }
    }
    Ok(report)
}

fn constraint_label(m: &PartitionMatroid) -> String {
    if m.blocks().len() == 1 {
        format!("uniform(k={}, n={})", m.capacities()[0], m.ground().len())
    } else {
        let parts: Vec<String> = m
            .blocks()
            .iter()
            .zip(m.capacities())
            .map(|(b, c)| format!("{}:{c}", b.len()))
            .collect();
        format!("partition({})", parts.join(","))
    }
}
