//! Problem data, validation and the exact objective evaluator.
//!
//! Index conventions: facilities are `0..n`, the root is `n`. Clients are
//! `0..m` in connection-cost tables. When an instance carries a full
//! connection metric (related and metric-uniform families) its points are
//! ordered facilities, root, clients, so client `j` is point `n + 1 + j`.

mod generate;
mod io;

pub use generate::{generate, Family, GenSpec};
pub use io::{instance_from_json, instance_to_json, read_instance, write_breakdown_csv, write_instance};

use crate::error::{Error, Result};
use crate::metric::Metric;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Tolerance for metric and tag consistency checks.
pub const METRIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tag {
    /// Time metric equals connection metric divided by the factor.
    Related(f64),
    /// Unit time distance between any two distinct points.
    Uniform,
    /// Group latency encoding: zero opening costs and 0/∞ connection costs.
    Mgl,
    /// Zero facility costs.
    Zfc,
    /// Connection costs come from a metric over facilities and clients.
    Metric,
    Euclidean,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Related(m) => write!(f, "related({m})"),
            Tag::Uniform => f.write_str("uniform"),
            Tag::Mgl => f.write_str("mgl"),
            Tag::Zfc => f.write_str("zfc"),
            Tag::Metric => f.write_str("metric"),
            Tag::Euclidean => f.write_str("euclidean"),
        }
    }
}

impl std::str::FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("related(").and_then(|r| r.strip_suffix(')')) {
            let m: f64 = inner
                .trim()
                .parse()
                .map_err(|_| format!("bad related factor `{inner}`"))?;
            return Ok(Tag::Related(m));
        }
        match s {
            "uniform" => Ok(Tag::Uniform),
            "mgl" => Ok(Tag::Mgl),
            "zfc" => Ok(Tag::Zfc),
            "metric" => Ok(Tag::Metric),
            "euclidean" => Ok(Tag::Euclidean),
            other => Err(format!("unknown tag `{other}`")),
        }
    }
}

/// Monotone latency function applied to activation times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LatencyFn {
    #[default]
    Identity,
    Power {
        p: f64,
    },
    /// Piecewise-linear interpolation through `(t, value)` points sorted by
    /// `t`; constant extrapolation below the first point, linear beyond the last
    /// segment.
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl LatencyFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            LatencyFn::Identity => t,
            LatencyFn::Power { p } => t.max(0.0).powf(*p),
            LatencyFn::Table { points } => table_eval(points, t),
        }
    }

    /// Growth exponent `p` with `λ(c·x) ≤ c^p·λ(x)`, when known.
    pub fn growth(&self) -> Option<f64> {
        match self {
            LatencyFn::Identity => Some(1.0),
            LatencyFn::Power { p } => Some(*p),
            LatencyFn::Table { .. } => None,
        }
    }
}

fn table_eval(points: &[(f64, f64)], t: f64) -> f64 {
    match points {
        [] => t,
        [(_, v)] => *v,
        _ => {
            if t <= points[0].0 {
                return points[0].1;
            }
            let seg = points.windows(2).position(|w| t <= w[1].0).unwrap_or(points.len() - 2);
            let (t0, v0) = points[seg];
            let (t1, v1) = points[seg + 1];
            if t1 - t0 <= 0.0 {
                v1
            } else {
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub n: usize,
    pub m: usize,
    pub f: Vec<f64>,
    /// `c[i][j]`; `f64::INFINITY` means facility `i` cannot serve client `j`.
    pub c: Vec<Vec<f64>>,
    /// Time metric over facilities and the root (index `n`).
    pub d: Metric,
    pub tags: Vec<Tag>,
    pub lambda: Option<Vec<f64>>,
    pub k: usize,
    pub budget: Option<f64>,
    pub latency: LatencyFn,
    /// Connection metric over facilities, root and clients, when known.
    pub full_metric: Option<Metric>,
}

impl Instance {
    /// Plain instance with unit weights, one route and identity latency.
    pub fn new(f: Vec<f64>, c: Vec<Vec<f64>>, d: Metric) -> Self {
        let n = f.len();
        let m = c.first().map_or(0, Vec::len);
        Instance {
            n,
            m,
            f,
            c,
            d,
            tags: Vec::new(),
            lambda: None,
            k: 1,
            budget: None,
            latency: LatencyFn::Identity,
            full_metric: None,
        }
    }

    #[inline]
    pub fn root(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d_root(&self, i: usize) -> f64 {
        self.d.d(self.n, i)
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.lambda.as_ref().map_or(1.0, |l| l[j])
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.m).map(|j| self.weight(j)).sum()
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags
            .iter()
            .any(|t| std::mem::discriminant(t) == std::mem::discriminant(&tag))
    }

    pub fn related_factor(&self) -> Option<f64> {
        self.tags.iter().find_map(|t| match t {
            Tag::Related(m) => Some(*m),
            _ => None,
        })
    }

    pub fn is_uniform(&self) -> bool {
        self.has_tag(Tag::Uniform)
    }

    pub fn client_point(&self, j: usize) -> usize {
        self.n + 1 + j
    }

    /// Connection distance between two clients: the full metric when present,
    /// otherwise the shortest two-hop route through a facility.
    pub fn client_distance(&self, j: usize, k: usize) -> f64 {
        if j == k {
            return 0.0;
        }
        if let Some(fm) = &self.full_metric {
            return fm.d(self.client_point(j), self.client_point(k));
        }
        (0..self.n)
            .map(|i| self.c[i][j] + self.c[i][k])
            .fold(f64::INFINITY, f64::min)
    }

    /// Connection distance between two facilities, same fallback rule.
    pub fn facility_distance(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        if let Some(fm) = &self.full_metric {
            return fm.d(a, b);
        }
        (0..self.m)
            .map(|j| self.c[a][j] + self.c[b][j])
            .fold(f64::INFINITY, f64::min)
    }

    /// Cheapest finite connection cost of each client.
    pub fn min_connection(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.c[i][j]).fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn evaluate(&self, sol: &Solution, mode: EvalMode) -> Result<CostBreakdown> {
        evaluate(self, sol, mode)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, msg: impl Into<String>) {
        self.issues.push(msg.into());
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("valid");
        }
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks structure, metric axioms and tag consistency. Report-only.
pub fn validate(inst: &Instance) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let (n, m) = (inst.n, inst.m);
    if n == 0 {
        rep.push("empty facility set");
    }
    if m == 0 {
        rep.push("empty client set");
    }
    if inst.f.len() != n {
        rep.push(format!("f has {} entries, expected {n}", inst.f.len()));
    }
    if inst.c.len() != n || inst.c.iter().any(|row| row.len() != m) {
        rep.push(format!("c must be {n} x {m}"));
    }
    if inst.d.len() != n + 1 {
        rep.push(format!("d is {0} x {0}, expected {1} x {1}", inst.d.len(), n + 1));
    }
    if !rep.is_valid() {
        return rep;
    }

    for (i, &fi) in inst.f.iter().enumerate() {
        if !fi.is_finite() || fi < 0.0 {
            rep.push(format!("f[{i}] = {fi} is not a finite nonnegative cost"));
        }
    }
    for (i, row) in inst.c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij.is_nan() || cij < 0.0 {
                rep.push(format!("c[{i}][{j}] = {cij} is negative or NaN"));
            }
        }
    }
    for j in 0..m {
        if !inst.min_connection(j).is_finite() {
            rep.push(format!("client {j} has no facility with finite connection cost"));
        }
    }
    check_metric(&inst.d, "d", &mut rep);

    if let Some(l) = &inst.lambda {
        if l.len() != m {
            rep.push(format!("lambda has {} entries, expected {m}", l.len()));
        } else if let Some(j) = l.iter().position(|&w| !w.is_finite() || w < 0.0) {
            rep.push(format!("lambda[{j}] = {} is not a finite nonnegative weight", l[j]));
        }
    }
    if inst.k == 0 {
        rep.push("route count k must be at least 1");
    }
    if let Some(b) = inst.budget {
        if b.is_nan() || b < 0.0 {
            rep.push(format!("route budget {b} is negative"));
        }
    }
    if let LatencyFn::Power { p } = inst.latency {
        if !(p >= 1.0) {
            rep.push(format!("latency power {p} must be at least 1"));
        }
    }
    if let LatencyFn::Table { points } = &inst.latency {
        if points.windows(2).any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1) {
            rep.push("latency table must be nondecreasing in both coordinates");
        }
    }

    if let Some(fm) = &inst.full_metric {
        if fm.len() != n + 1 + m {
            rep.push(format!("full metric has {} points, expected {}", fm.len(), n + 1 + m));
        } else {
            check_metric(fm, "full metric", &mut rep);
            for i in 0..n {
                for j in 0..m {
                    let (cij, fij) = (inst.c[i][j], fm.d(i, inst.client_point(j)));
                    if cij.is_finite() && (cij - fij).abs() > METRIC_TOL * (1.0 + fij) {
                        rep.push(format!("c[{i}][{j}] = {cij} disagrees with full metric {fij}"));
                    }
                }
            }
        }
    }

    for tag in &inst.tags {
        match *tag {
            Tag::Related(factor) => check_related(inst, factor, &mut rep),
            Tag::Uniform => {
                for u in 0..=n {
                    for v in 0..=n {
                        if u != v && (inst.d.d(u, v) - 1.0).abs() > METRIC_TOL {
                            rep.push(format!("uniform tag but d({u},{v}) = {}", inst.d.d(u, v)));
                            return rep;
                        }
                    }
                }
            }
            Tag::Mgl => {
                if inst.f.iter().any(|&x| x != 0.0) {
                    rep.push("mgl tag requires zero facility costs");
                }
                if inst.c.iter().flatten().any(|&x| x != 0.0 && x.is_finite()) {
                    rep.push("mgl tag requires connection costs in {0, inf}");
                }
            }
            Tag::Zfc => {
                if inst.f.iter().any(|&x| x != 0.0) {
                    rep.push("zfc tag requires zero facility costs");
                }
            }
            Tag::Metric => {
                if inst.full_metric.is_none() {
                    rep.push("metric tag requires a full connection metric");
                }
            }
            Tag::Euclidean => {}
        }
    }
    rep
}

fn check_metric(metric: &Metric, name: &str, rep: &mut ValidationReport) {
    let size = metric.len();
    for u in 0..size {
        for v in 0..size {
            let duv = metric.d(u, v);
            if !duv.is_finite() || duv < 0.0 {
                rep.push(format!("{name}({u},{v}) = {duv} is not a finite nonnegative distance"));
                return;
            }
        }
    }
    if !metric.is_symmetric(METRIC_TOL) {
        rep.push(format!("{name} is not symmetric with zero diagonal"));
    }
    for (u, v, w) in metric.triangle_violations(METRIC_TOL, 3) {
        rep.push(format!(
            "triangle violation in {name}: d({u},{w}) = {} > d({u},{v}) + d({v},{w}) = {}",
            metric.d(u, w),
            metric.d(u, v) + metric.d(v, w)
        ));
    }
}

fn check_related(inst: &Instance, factor: f64, rep: &mut ValidationReport) {
    if !(factor >= 1.0) {
        rep.push(format!("related factor {factor} must be at least 1"));
        return;
    }
    let Some(fm) = &inst.full_metric else {
        rep.push("related tag requires a full connection metric");
        return;
    };
    if fm.len() != inst.n + 1 + inst.m {
        return;
    }
    for u in 0..=inst.n {
        for v in 0..=inst.n {
            let want = fm.d(u, v) / factor;
            if (inst.d.d(u, v) - want).abs() > METRIC_TOL * (1.0 + want) {
                rep.push(format!(
                    "related({factor}) but d({u},{v}) = {} != c/M = {want}",
                    inst.d.d(u, v)
                ));
                return;
            }
        }
    }
}

/// Open facilities activated along one or more routes from the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Facility sequences; each route implicitly starts at the root.
    pub routes: Vec<Vec<usize>>,
    /// `assignment[j]` is the facility serving client `j`.
    pub assignment: Vec<usize>,
}

impl Solution {
    pub fn single_route(order: Vec<usize>, assignment: Vec<usize>) -> Self {
        Solution {
            routes: vec![order],
            assignment,
        }
    }

    pub fn open_facilities(&self) -> Vec<usize> {
        let mut open: Vec<usize> = self.routes.iter().flatten().copied().collect();
        open.sort_unstable();
        open
    }

    /// Activation time of every facility on a route (`None` if unopened).
    pub fn activation_times(&self, inst: &Instance) -> Vec<Option<f64>> {
        let mut times = vec![None; inst.n];
        for route in &self.routes {
            let mut t = 0.0;
            let mut prev = inst.root();
            for &i in route {
                t += inst.d.d(prev, i);
                if i < inst.n {
                    times[i] = Some(t);
                }
                prev = i;
            }
        }
        times
    }

    /// Path length of each route, root excluded from the count of stops.
    pub fn route_lengths(&self, inst: &Instance) -> Vec<f64> {
        self.routes
            .iter()
            .map(|route| {
                let mut len = 0.0;
                let mut prev = inst.root();
                for &i in route {
                    len += inst.d.d(prev, i);
                    prev = i;
                }
                len
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EvalMode {
    /// Facility + connection + Σ_j λ_j·λ(t_j).
    #[default]
    Sum,
    /// Facility + connection + (Σ_j λ_j·t_j^p)^{1/p}.
    LpNorm(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClientCost {
    pub client: usize,
    pub facility: usize,
    pub connection: f64,
    pub time: f64,
    /// `λ_j·λ(t_j)`.
    pub latency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub latency_cost: f64,
    pub total: f64,
    pub per_client: Vec<ClientCost>,
    /// Weighted L_p norm of activation times, set in [`EvalMode::LpNorm`].
    pub lp_norm: Option<f64>,
    pub route_lengths: Vec<f64>,
    /// Longest route divided by the budget (0 when no budget is set).
    pub budget_violation: f64,
}

/// Computes the exact objective of a solution.
pub fn evaluate(inst: &Instance, sol: &Solution, mode: EvalMode) -> Result<CostBreakdown> {
    if sol.assignment.len() != inst.m {
        return Err(Error::InfeasibleSolution(format!(
            "assignment covers {} clients, instance has {}",
            sol.assignment.len(),
            inst.m
        )));
    }
    let mut seen = vec![false; inst.n];
    for route in &sol.routes {
        for &i in route {
            if i >= inst.n {
                return Err(Error::InfeasibleSolution(format!("route visits unknown facility {i}")));
            }
            if seen[i] {
                return Err(Error::InfeasibleSolution(format!("facility {i} appears twice")));
            }
            seen[i] = true;
        }
    }
    let times = sol.activation_times(inst);
    let facility_cost: f64 = (0..inst.n).filter(|&i| seen[i]).map(|i| inst.f[i]).sum();

    let mut per_client = Vec::with_capacity(inst.m);
    for (j, &i) in sol.assignment.iter().enumerate() {
        let Some(t) = times.get(i).copied().flatten() else {
            return Err(Error::InfeasibleSolution(format!(
                "client {j} assigned to unopened facility {i}"
            )));
        };
        let cij = inst.c[i][j];
        if !cij.is_finite() {
            return Err(Error::InfeasibleSolution(format!(
                "client {j} assigned to facility {i} with infinite connection cost"
            )));
        }
        per_client.push(ClientCost {
            client: j,
            facility: i,
            connection: cij,
            time: t,
            latency: inst.weight(j) * inst.latency.eval(t),
        });
    }
    let connection_cost: f64 = per_client.iter().map(|r| r.connection).sum();
    let (latency_cost, lp_norm) = match mode {
        EvalMode::Sum => (per_client.iter().map(|r| r.latency).sum(), None),
        EvalMode::LpNorm(p) => {
            let s: f64 = per_client.iter().map(|r| inst.weight(r.client) * r.time.powf(p)).sum();
            let norm = s.powf(1.0 / p);
            (norm, Some(norm))
        }
    };
    let route_lengths = sol.route_lengths(inst);
    let budget_violation = match inst.budget {
        Some(b) if b > 0.0 => route_lengths.iter().copied().fold(0.0, f64::max) / b,
        Some(_) if route_lengths.iter().any(|&l| l > 0.0) => f64::INFINITY,
        _ => 0.0,
    };
    let total = facility_cost + connection_cost + latency_cost;
    Ok(CostBreakdown {
        facility_cost,
        connection_cost,
        latency_cost,
        total,
        per_client,
        lp_norm,
        route_lengths,
        budget_violation,
    })
}

/// Builds the cheapest assignment for a fixed set of routes: every client
/// picks the open facility minimising connection cost plus weighted latency.
pub fn best_assignment(inst: &Instance, routes: &[Vec<usize>]) -> Option<Solution> {
    let sol = Solution {
        routes: routes.to_vec(),
        assignment: Vec::new(),
    };
    let times = sol.activation_times(inst);
    let mut assignment = Vec::with_capacity(inst.m);
    for j in 0..inst.m {
        let best = (0..inst.n)
            .filter_map(|i| times[i].map(|t| (i, inst.c[i][j] + inst.weight(j) * inst.latency.eval(t))))
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        assignment.push(best.0);
    }
    Some(Solution {
        routes: routes.to_vec(),
        assignment,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two facilities `a = 0`, `b = 1`, root `2`; two clients.
    pub fn desk1() -> Instance {
        let d = Metric::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 2.0], vec![1.0, 2.0, 0.0]]);
        Instance::new(vec![5.0, 0.0], vec![vec![0.0, 10.0], vec![10.0, 0.0]], d)
    }
}
