//! Input documents and constraint specs.

use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use crround_core::{
    Constraint, ElementSet, FractionalPoint, GroundSet, Matroid, PartitionMatroid, UniformMatroid,
};
use serde::Deserialize;

use crate::args::ConstraintArgs;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    n: usize,
    x: Vec<f64>,
    #[serde(rename = "A", default)]
    set: Option<Vec<usize>>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    partition: Option<Vec<BlockDoc>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDoc {
    block: Vec<usize>,
    cap: usize,
}

/// A parsed input: a point, optionally a realized set and a constraint.
#[derive(Debug, Clone)]
pub struct Instance {
    pub x: FractionalPoint,
    pub set: Option<ElementSet>,
    pub constraint: Option<Constraint>,
}

/// Reads a JSON document or an x-only CSV from `path` (`-` for stdin).
pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_instance(&text)
}

/// JSON when the text starts with `{`, CSV otherwise.
pub fn parse_instance(text: &str) -> Result<Instance> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        Ok(Instance {
            x: FractionalPoint::new(parse_csv_point(text)?)?,
            set: None,
            constraint: None,
        })
    }
}

fn parse_json(text: &str) -> Result<Instance> {
    let doc: Document = serde_json::from_str(text).context("malformed input document")?;
    if doc.x.len() != doc.n {
        bail!(
            "input declares n = {} but x has {} entries",
            doc.n,
            doc.x.len()
        );
    }
    let x = FractionalPoint::new(doc.x)?;
    let ground = x.ground();
    let set = doc.set.map(|a| ElementSet::new(ground, a)).transpose()?;
    let constraint = match (doc.k, doc.partition) {
        (Some(_), Some(_)) => bail!("input gives both k and a partition"),
        (Some(k), None) => Some(UniformMatroid::new(ground, k)?.into()),
        (None, Some(blocks)) => {
            let (sets, caps): (Vec<_>, Vec<_>) = blocks
                .into_iter()
                .map(|b| Ok((ElementSet::new(ground, b.block)?, b.cap)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            Some(PartitionMatroid::new(ground, sets, caps)?.into())
        }
        (None, None) => None,
    };
    Ok(Instance { x, set, constraint })
}

/// Every numeric field of a CSV, in reading order. A first row that does not
/// parse is taken as a header.
pub fn parse_csv_point(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: Result<Vec<f64>, _> = record
            .iter()
            .filter(|f| !f.is_empty())
            .map(str::parse::<f64>)
            .collect();
        match parsed {
            Ok(v) => values.extend(v),
            Err(_) if line == 0 => continue,
            Err(e) => bail!("CSV row {}: {e}", line + 1),
        }
    }
    if values.is_empty() {
        bail!("CSV contains no coordinates");
    }
    Ok(values)
}

/// Parses `size:cap,size:cap,..` into consecutive blocks.
pub fn parse_partition_spec(spec: &str) -> Result<PartitionMatroid> {
    let pairs = spec
        .split(',')
        .map(|part| {
            let (size, cap) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("partition entry `{part}` is not `size:cap`"))?;
            Ok((size.trim().parse()?, cap.trim().parse()?))
        })
        .collect::<Result<Vec<(usize, usize)>>>()
        .with_context(|| format!("malformed partition spec `{spec}`"))?;
    Ok(PartitionMatroid::from_block_sizes(&pairs)?)
}

/// The constraint named by the flags, falling back to the one in the input.
pub fn resolve_constraint(
    args: &ConstraintArgs,
    ground: GroundSet,
    from_input: Option<Constraint>,
) -> Result<Constraint> {
    if let Some(spec) = &args.partition {
        let m = parse_partition_spec(spec)?;
        if m.ground() != ground {
            bail!(
                "partition covers {} elements but x has {}",
                m.ground().len(),
                ground.len()
            );
        }
        return Ok(m.into());
    }
    if let Some(k) = args.k {
        return Ok(UniformMatroid::new(ground, k)?.into());
    }
    from_input
        .ok_or_else(|| anyhow!("no constraint: pass --k or --partition, or put one in the input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_documents() {
        let i = parse_instance(r#"{"n": 4, "x": [0.5, 0.5, 0.5, 0.5], "A": [0, 2, 3], "k": 2}"#)
            .unwrap();
        assert_eq!(i.set.unwrap().members(), &[0, 2, 3]);
        assert_eq!(i.constraint.unwrap().rank(&i.x.ground().full()).unwrap(), 2);

        let p = parse_instance(
            r#"{"n": 3, "x": [0.5, 0.5, 0.2], "partition": [{"block": [0, 1], "cap": 1}, {"block": [2], "cap": 1}]}"#,
        )
        .unwrap();
        assert!(matches!(p.constraint, Some(Constraint::Partition(_))));

        assert!(parse_instance(r#"{"n": 3, "x": [0.5, 0.5]}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "x": [0.5, 1.5]}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "x": [0.5, 0.5], "A": [2]}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "x": [0.5, 0.5], "bogus": 1}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "x": [0.5, 0.5], "k": 1, "partition": []}"#).is_err());
    }

    #[test]
    fn csv_points() {
        assert_eq!(
            parse_csv_point("0.1,0.2\n0.3\n").unwrap(),
            vec![0.1, 0.2, 0.3]
        );
        assert_eq!(parse_csv_point("x\n0.25\n0.5\n").unwrap(), vec![0.25, 0.5]);
        assert!(parse_csv_point("x\n").is_err());
        assert!(parse_csv_point("0.1\nabc\n").is_err());
        let i = parse_instance("0.5, 0.25\n").unwrap();
        assert_eq!(i.x.coords(), &[0.5, 0.25]);
    }

    #[test]
    fn partition_specs() {
        let m = parse_partition_spec("2:1, 3:1").unwrap();
        assert_eq!(m.ground().len(), 5);
        assert_eq!(m.capacities(), &[1, 1]);
        assert!(parse_partition_spec("2-1").is_err());
        assert!(parse_partition_spec("2:x").is_err());
        assert!(parse_partition_spec("").is_err());
    }

    #[test]
    fn constraint_resolution() {
        let g = GroundSet::new(5).unwrap();
        let flags = ConstraintArgs {
            k: None,
            partition: Some("2:1,3:1".into()),
        };
        assert!(matches!(
            resolve_constraint(&flags, g, None).unwrap(),
            Constraint::Partition(_)
        ));
        let wrong = GroundSet::new(4).unwrap();
        assert!(resolve_constraint(&flags, wrong, None).is_err());
        let none = ConstraintArgs {
            k: None,
            partition: None,
        };
        assert!(resolve_constraint(&none, g, None).is_err());
        let k = ConstraintArgs {
            k: Some(2),
            partition: None,
        };
        assert!(matches!(
            resolve_constraint(&k, g, None).unwrap(),
            Constraint::Uniform(_)
        ));
    }
}
