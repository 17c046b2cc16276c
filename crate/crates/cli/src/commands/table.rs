use anyhow::{bail, Result};
use crround_core::{balancedness_c, balancedness_limit};
use serde_json::{Map, Value};

use crate::args::TableArgs;
use crate::report::{to_value, RunReport};

/// One row per `n`, one column per `k`; cells with `k >= n` are blank.
pub fn run(args: &TableArgs, seed: u64) -> Result<RunReport> {
    if args.n.is_empty() || args.k.is_empty() {
        bail!("table needs at least one n and one k");
    }
    if let Some(&k) = args.k.iter().find(|&&k| k == 0) {
        bail!("rank {k} is not allowed; ranks start at 1");
    }
    let mut report = RunReport::new("table", seed);
    report
        .param("n", &args.n)
        .param("k", &args.k)
        .param("limit_row", args.limit_row);
    for &n in &args.n {
        let mut row = Map::new();
        row.insert("n".into(), n.into());
        for &k in &args.k {
            let v = if k < n {
                to_value(balancedness_c(k, n)?)
            } else {
                Value::Null
            };
            row.insert(format!("k={k}"), v);
        }
        report.push(row);
    }
    if args.limit_row {
        let mut row = Map::new();
        row.insert("n".into(), "limit".into());
        for &k in &args.k {
            row.insert(format!("k={k}"), to_value(balancedness_limit(k)?));
        }
        report.push(row);
    }
    Ok(report)
}
