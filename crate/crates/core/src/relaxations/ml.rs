//! Edge-variable relaxation for minimum latency: visit times `x_{j,t}` and
//! edge usage `z_{e,t}` with per-time length and root-cut rows.

use super::frac::complete_edges;
use super::timescale::TimeScale;
use crate::error::{Error, Result};
use crate::lpcore::{
    cutting_plane_solve, max_flow, Constraint, FlowNetwork, LpModel, LpStatus, Sense, SeparationOracle, CUT_TOL,
};
use crate::metric::Metric;
use crate::par;

/// Grid horizon for a latency instance: node count times the largest distance.
pub fn ml_horizon(metric: &Metric) -> f64 {
    ((metric.len().saturating_sub(1)) as f64 * metric.max_distance()).max(1.0)
}

#[derive(Debug, Clone)]
pub struct Lp1Layout {
    pub root: usize,
    /// Non-root points, in increasing order; client `j` is `nodes[j]`.
    pub nodes: Vec<usize>,
    pub times: Vec<f64>,
    pub x: Vec<Vec<Option<usize>>>,
    /// Pairs over all metric points.
    pub edges: Vec<(usize, usize)>,
    pub z: Vec<Vec<usize>>,
    points: usize,
}

/// Separates `Σ_{δ(S)} z_{e,t} ≥ Σ_{t'≤t} x_{j,t'}` for `j ∈ S ∌ r` by a
/// root-to-`j` max flow per `(j, t)`.
#[derive(Debug, Clone)]
pub struct Lp1Oracle {
    pub layout: Lp1Layout,
}

impl Lp1Oracle {
    pub fn cut(&self, primal: &[f64], j: usize, k: usize) -> Option<Constraint> {
        let lay = &self.layout;
        let demand: f64 = lay.x[j][..=k].iter().flatten().map(|&v| primal[v]).sum();
        if demand <= CUT_TOL {
            return None;
        }
        let target = lay.nodes[j];
        let mut net = FlowNetwork::new(lay.points, lay.root, target);
        for (e, &(u, v)) in lay.edges.iter().enumerate() {
            let cap = primal[lay.z[e][k]];
            if cap > 0.0 {
                net.add_edge(u, v, cap);
            }
        }
        let flow = max_flow(&net);
        if flow.value >= demand - CUT_TOL {
            return None;
        }
        // smallest set around the target
        let in_s: Vec<bool> = flow.sink_minimal_side.iter().map(|&b| !b).collect();
        let mut coeffs: Vec<(usize, f64)> = lay
            .edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| in_s[u] != in_s[v])
            .map(|(e, _)| (lay.z[e][k], 1.0))
            .collect();
        coeffs.extend(lay.x[j][..=k].iter().flatten().map(|&v| (v, -1.0)));
        Some(Constraint::new(coeffs, Sense::Ge, 0.0).labeled(format!("rootcut_{j}_{k}")))
    }
}

impl SeparationOracle for Lp1Oracle {
    fn separate(&mut self, primal: &[f64]) -> Vec<Constraint> {
        let nt = self.layout.times.len();
        let this = &*self;
        par::map_indices(self.layout.nodes.len() * nt, |q| this.cut(primal, q / nt, q % nt))
            .into_iter()
            .flatten()
            .collect()
    }
}

/// Builds the edge relaxation on `metric` rooted at `root` over grid `ts`.
pub fn build_ml_lp1(metric: &Metric, root: usize, ts: &TimeScale) -> Result<(LpModel, Lp1Oracle)> {
    if root >= metric.len() {
        return Err(Error::InvalidParameter(format!(
            "root {root} outside metric of size {}",
            metric.len()
        )));
    }
    let nodes: Vec<usize> = (0..metric.len()).filter(|&v| v != root).collect();
    let times = ts.times().to_vec();
    let nt = times.len();
    let mut model = LpModel::new();
    let mut x = vec![vec![None; nt]; nodes.len()];
    for (j, &v) in nodes.iter().enumerate() {
        for (k, &t) in times.iter().enumerate() {
            if metric.d(v, root) <= t + 1e-9 {
                x[j][k] = Some(model.add_nonneg("x", &[j, k], t)?);
            }
        }
        if x[j].iter().all(Option::is_none) {
            return Err(Error::InvalidParameter(format!("node {v} lies beyond the time grid")));
        }
    }
    let edges = complete_edges(metric.len());
    let mut z = vec![Vec::with_capacity(nt); edges.len()];
    for (e, col) in z.iter_mut().enumerate() {
        for k in 0..nt {
            col.push(model.add_nonneg("z", &[e, k], 0.0)?);
        }
    }
    for (j, xj) in x.iter().enumerate() {
        let coeffs = xj.iter().flatten().map(|&v| (v, 1.0)).collect();
        model.add_row(Constraint::new(coeffs, Sense::Ge, 1.0).labeled(format!("cover_{j}")))?;
    }
    for (k, &t) in times.iter().enumerate() {
        let coeffs = edges
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| (z[e][k], metric.d(u, v)))
            .filter(|&(_, d)| d > 0.0)
            .collect();
        model.add_row(Constraint::new(coeffs, Sense::Le, t).labeled(format!("len_{k}")))?;
    }
    let layout = Lp1Layout {
        root,
        nodes,
        times,
        x,
        edges,
        z,
        points: metric.len(),
    };
    Ok((model, Lp1Oracle { layout }))
}

/// Fractional solution of the edge relaxation.
#[derive(Debug, Clone)]
pub struct Lp1Solution {
    pub root: usize,
    pub nodes: Vec<usize>,
    pub times: Vec<f64>,
    /// `x[j][k]`, zero where the variable does not exist.
    pub x: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize)>,
    pub z: Vec<Vec<f64>>,
    pub value: f64,
    pub status: LpStatus,
    pub rounds: usize,
}

impl Lp1Solution {
    /// Visit-time bound `L*_j = Σ t x_{j,t}`.
    pub fn l_star(&self, j: usize) -> f64 {
        self.x[j].iter().zip(&self.times).map(|(x, t)| x * t).sum()
    }

    /// `Σ_e d_e z_{e,t}` at grid index `k`.
    pub fn edge_mass(&self, metric: &Metric, k: usize) -> f64 {
        self.edges
            .iter()
            .zip(&self.z)
            .map(|(&(u, v), z)| metric.d(u, v) * z[k])
            .sum()
    }

    pub fn coverage(&self, j: usize) -> f64 {
        self.x[j].iter().sum()
    }
}

pub fn solve_ml_lp1(metric: &Metric, root: usize, ts: &TimeScale, max_rounds: usize) -> Result<Lp1Solution> {
    let (model, mut oracle) = build_ml_lp1(metric, root, ts)?;
    let res = cutting_plane_solve(model, &mut oracle, max_rounds)?;
    let lay = oracle.layout;
    let p = &res.solution.primal;
    let x = lay
        .x
        .iter()
        .map(|row| row.iter().map(|v| v.map_or(0.0, |v| p[v].max(0.0))).collect())
        .collect();
    let z = lay
        .z
        .iter()
        .map(|col| col.iter().map(|&v| p[v].max(0.0)).collect())
        .collect();
    Ok(Lp1Solution {
        root,
        nodes: lay.nodes,
        times: lay.times,
        x,
        edges: lay.edges,
        z,
        value: res.solution.objective,
        status: res.solution.status,
        rounds: res.rounds,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Root 0, u = 1, v = 2 with d(r,u)=1, d(r,v)=2, d(u,v)=1.
    pub fn desk2() -> Metric {
        Metric::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])
    }

    #[test]
    fn desk2_value_at_most_three() {
        let m = desk2();
        let ts = TimeScale::full(ml_horizon(&m));
        let sol = solve_ml_lp1(&m, 0, &ts, 200).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // x_{j,t} only exists from t = d(j, r) on, so 1 + 2 is also a lower bound
        assert!((sol.value - 3.0).abs() < 1e-6, "{}", sol.value);
        for k in 0..sol.times.len() {
            assert!(sol.edge_mass(&m, k) <= sol.times[k] + 1e-7);
        }
    }

    #[test]
    fn single_node_at_distance_one() {
        let m = Metric::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let ts = TimeScale::full(1.0);
        let sol = solve_ml_lp1(&m, 0, &ts, 50).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_edges_cut_isolates_the_node() {
        let m = desk2();
        let ts = TimeScale::full(2.0);
        let (model, oracle) = build_ml_lp1(&m, 0, &ts).unwrap();
        let mut primal = vec![0.0; model.num_vars()];
        primal[oracle.layout.x[0][0].unwrap()] = 1.0;
        let cut = oracle.cut(&primal, 0, 0).unwrap();
        // S = {u}: edges r-u and u-v
        assert_eq!(cut.coeffs.iter().filter(|&&(_, a)| a > 0.0).count(), 2);
        assert!((cut.violation(&primal) - 1.0).abs() < 1e-12);
    }
}
