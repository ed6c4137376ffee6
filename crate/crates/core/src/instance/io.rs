//! JSON instance files and CSV cost reports.
//!
//! ```json
//! {
//!   "n": 2, "m": 2,
//!   "f": [5, 0],
//!   "c": [[0, 10], [10, null]],
//!   "d": [[0, 1, 1], [1, 0, 2], [1, 2, 0]],
//!   "tags": ["euclidean"],
//!   "lambda": [1, 1], "k": 1, "B": 10,
//!   "latency": {"kind": "power", "p": 2}
//! }
//! ```
//!
//! `null` connection costs mean "cannot serve". Row and column `n` of `d` is
//! the root. The optional `full_metric` key holds the connection metric over
//! facilities, root and clients.

use super::{CostBreakdown, Instance, LatencyFn, Tag};
use crate::error::{Error, Result};
use crate::metric::Metric;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    m: usize,
    f: Vec<f64>,
    c: Vec<Vec<Option<f64>>>,
    d: Vec<Vec<f64>>,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    latency: Option<LatencyFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    full_metric: Option<Vec<Vec<f64>>>,
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("field `{}`", field.into()),
        message: message.into(),
    }
}

fn square(rows: &[Vec<f64>], size: usize, field: &str) -> Result<Metric> {
    if rows.len() != size {
        return Err(field_err(field, format!("expected {size} rows, found {}", rows.len())));
    }
    for (u, row) in rows.iter().enumerate() {
        if row.len() != size {
            return Err(field_err(
                format!("{field}[{u}]"),
                format!("expected {size} entries, found {}", row.len()),
            ));
        }
    }
    Ok(Metric::from_rows(rows))
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let (n, m) = (file.n, file.m);
    if n == 0 {
        return Err(field_err("n", "empty facility set"));
    }
    if m == 0 {
        return Err(field_err("m", "empty client set"));
    }
    if file.f.len() != n {
        return Err(field_err("f", format!("expected {n} entries, found {}", file.f.len())));
    }
    if file.c.len() != n {
        return Err(field_err("c", format!("expected {n} rows, found {}", file.c.len())));
    }
    let mut c = Vec::with_capacity(n);
    for (i, row) in file.c.iter().enumerate() {
        if row.len() != m {
            return Err(field_err(
                format!("c[{i}]"),
                format!("expected {m} entries, found {}", row.len()),
            ));
        }
        c.push(row.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect());
    }
    let d = square(&file.d, n + 1, "d")?;
    let mut tags = Vec::with_capacity(file.tags.len());
    for (idx, s) in file.tags.iter().enumerate() {
        tags.push(s.parse::<Tag>().map_err(|e| field_err(format!("tags[{idx}]"), e))?);
    }
    if let Some(l) = &file.lambda {
        if l.len() != m {
            return Err(field_err("lambda", format!("expected {m} entries, found {}", l.len())));
        }
    }
    let full_metric = match &file.full_metric {
        Some(rows) => Some(square(rows, n + 1 + m, "full_metric")?),
        None => None,
    };
    Ok(Instance {
        n,
        m,
        f: file.f,
        c,
        d,
        tags,
        lambda: file.lambda,
        k: file.k.unwrap_or(1),
        budget: file.budget,
        latency: file.latency.unwrap_or_default(),
        full_metric,
    })
}

pub fn instance_to_json(inst: &Instance) -> String {
    let file = InstanceFile {
        n: inst.n,
        m: inst.m,
        f: inst.f.clone(),
        c: inst
            .c
            .iter()
            .map(|row| row.iter().map(|&v| v.is_finite().then_some(v)).collect())
            .collect(),
        d: inst.d.rows(),
        tags: inst.tags.iter().map(Tag::to_string).collect(),
        lambda: inst.lambda.clone(),
        k: (inst.k != 1).then_some(inst.k),
        budget: inst.budget,
        latency: (inst.latency != LatencyFn::Identity).then(|| inst.latency.clone()),
        full_metric: inst.full_metric.as_ref().map(Metric::rows),
    };
    serde_json::to_string_pretty(&file).expect("instance serialisation cannot fail")
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance_to_json(inst);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes one row per client followed by a `total` summary row.
pub fn write_breakdown_csv<W: Write>(cb: &CostBreakdown, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["client", "facility", "connection", "time", "latency"])?;
    for r in &cb.per_client {
        w.write_record([
            r.client.to_string(),
            r.facility.to_string(),
            r.connection.to_string(),
            r.time.to_string(),
            r.latency.to_string(),
        ])?;
    }
    w.write_record([
        "total".to_string(),
        format!("facility={}", cb.facility_cost),
        cb.connection_cost.to_string(),
        String::new(),
        cb.latency_cost.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::desk1;
    use super::*;

    #[test]
    fn round_trip() {
        let mut inst = desk1();
        inst.c[1][1] = f64::INFINITY;
        inst.tags.push(Tag::Related(2.0));
        inst.budget = Some(3.5);
        inst.latency = LatencyFn::Power { p: 2.0 };
        let back = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("desk1.json");
        write_instance(&desk1(), &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), desk1());
    }

    #[test]
    fn missing_d_is_a_parse_error() {
        let err = instance_from_json(r#"{"n": 1, "m": 1, "f": [0], "c": [[0]]}"#).unwrap_err();
        match err {
            Error::Parse { location, message } => {
                assert!(location.starts_with("line"));
                assert!(message.contains("`d`"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_facility_set() {
        let err = instance_from_json(r#"{"n": 0, "m": 1, "f": [], "c": [], "d": [[0]]}"#).unwrap_err();
        assert!(err.to_string().contains("empty facility set"));
    }

    #[test]
    fn ragged_rows_name_the_field() {
        let err = instance_from_json(r#"{"n": 1, "m": 2, "f": [0], "c": [[0]], "d": [[0, 1], [1, 0]]}"#).unwrap_err();
        assert!(err.to_string().contains("c[0]"));
    }

    #[test]
    fn breakdown_csv_has_a_row_per_client() {
        let inst = desk1();
        let sol = super::super::Solution::single_route(vec![0, 1], vec![0, 1]);
        let cb = inst.evaluate(&sol, super::super::EvalMode::Sum).unwrap();
        let mut buf = Vec::new();
        write_breakdown_csv(&cb, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(2).unwrap().starts_with("1,1,0,2,2"));
    }
}
