//! Ratio tables and per-trial CSV.

use std::io::Write;

use serde::Serialize;

use crate::config::Format;
use crate::run::Report;

/// A header row plus string cells, rendered as CSV or a Markdown table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).expect("in-memory write");
                for r in &self.rows {
                    w.write_record(r).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
            }
            Format::Md => {
                let mut s = format!("| {} |\n", self.header.join(" | "));
                s.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
                for r in &self.rows {
                    s.push_str(&format!("| {} |\n", r.join(" | ")));
                }
                s
            }
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Nearest-rank percentile.
fn percentile(v: &[f64], q: f64) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
    Some(s[rank - 1])
}

/// One row per report. Markdown adds wall-clock time; CSV leaves it out so
/// reruns are byte-identical.
pub fn summary(reports: &[Report], format: Format) -> Table {
    let mut header = vec![
        "algo",
        "family",
        "n",
        "m",
        "instances",
        "trials",
        "success_rate",
        "mean_cost_lp",
        "p95_cost_lp",
        "mean_cost_opt",
        "violations",
    ];
    if format == Format::Md {
        header.push("seconds");
    }
    let mut t = Table::new(&header);
    for r in reports.iter().filter(|r| !r.rows.is_empty()) {
        let lp: Vec<f64> = r.rows.iter().filter_map(|x| x.ratio_lp()).collect();
        let opt_r: Vec<f64> = r.rows.iter().filter_map(|x| x.ratio_exact()).collect();
        let ok = r.rows.iter().filter(|x| x.success).count();
        let mut row = vec![
            r.algo.id().to_string(),
            r.family.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.instances.to_string(),
            r.rows.len().to_string(),
            format!("{:.4}", ok as f64 / r.rows.len() as f64),
            opt(mean(&lp)),
            opt(percentile(&lp, 0.95)),
            opt(mean(&opt_r)),
            r.violation_count().to_string(),
        ];
        if format == Format::Md {
            row.push(format!("{:.2}", r.seconds));
        }
        t.push(row);
    }
    t
}

#[derive(Serialize)]
struct TrialRecord<'a> {
    algo: &'a str,
    instance: usize,
    trial: usize,
    seed: u64,
    success: bool,
    cost: Option<f64>,
    lp_value: f64,
    exact: Option<f64>,
    cost_lp: Option<f64>,
    cost_opt: Option<f64>,
    violations: usize,
    first_violation: &'a str,
}

pub fn write_trials_csv<W: Write>(reports: &[Report], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for row in &r.rows {
            w.serialize(TrialRecord {
                algo: r.algo.id(),
                instance: row.instance,
                trial: row.trial,
                seed: row.seed,
                success: row.success,
                cost: row.cost,
                lp_value: row.lp_value,
                exact: row.exact,
                cost_lp: row.ratio_lp(),
                cost_opt: row.ratio_exact(),
                violations: row.violations.len(),
                first_violation: row.violations.first().map_or("", String::as_str),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
