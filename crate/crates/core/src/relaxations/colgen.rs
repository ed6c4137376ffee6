//! Column generation for the path-column latency relaxation: `a` routes of
//! length at most `b·t` per grid time, priced by exact orienteering.

use super::orienteering::{orienteering_exact, Rewards, Route, Shape, ORIENTEERING_LIMIT};
use super::timescale::TimeScale;
use crate::error::{Error, Result};
use crate::lpcore::{Constraint, LpModel, LpStatus, Sense, Simplex, SimplexOptions, Variable};
use crate::metric::Metric;
use crate::par;

const PRICE_TOL: f64 = 1e-6;

/// A route column serving grid index `time_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathColumn {
    /// Points from the root (visit order for paths).
    pub nodes: Vec<usize>,
    pub length: f64,
    pub time_index: usize,
    /// Clients (or groups) this column covers.
    pub covers: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ColgenOptions {
    /// Route count: right-hand side of the one-route-per-time rows.
    pub a: f64,
    /// Length stretch: columns at time `t` may have length `b·t`; `b ≥ 1`.
    pub b: f64,
    pub shape: Shape,
    /// Group mode: client `j` is covered when any point of `groups[j]` is.
    pub groups: Option<Vec<Vec<usize>>>,
    pub max_columns: usize,
    pub max_iterations: usize,
    pub orienteering_limit: usize,
}

impl Default for ColgenOptions {
    fn default() -> Self {
        ColgenOptions {
            a: 1.0,
            b: 1.0,
            shape: Shape::Path,
            groups: None,
            max_columns: 20_000,
            max_iterations: 2_000,
            orienteering_limit: ORIENTEERING_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColgenStatus {
    /// No column prices out: the value is the exact optimum.
    Converged,
    /// Stopped at a column or iteration cap; the optimum lies in
    /// `[lower_bound, value]`.
    Partial,
}

#[derive(Debug, Clone)]
pub struct Lp2Solution {
    pub status: ColgenStatus,
    pub value: f64,
    pub lower_bound: f64,
    pub times: Vec<f64>,
    /// Client points (node mode) or group indices (group mode).
    pub clients: Vec<usize>,
    /// `x[j][k]`.
    pub x: Vec<Vec<f64>>,
    pub columns: Vec<PathColumn>,
    /// Value of each column.
    pub z: Vec<f64>,
    /// Row duals at the final master: `β_t` and `θ_{j,t}`.
    pub beta: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl Lp2Solution {
    pub fn l_star(&self, j: usize) -> f64 {
        self.x[j].iter().zip(&self.times).map(|(x, t)| x * t).sum()
    }

    /// `Σ_P z_{P,t}` at grid index `k`.
    pub fn route_mass(&self, k: usize) -> f64 {
        self.columns
            .iter()
            .zip(&self.z)
            .filter(|(c, _)| c.time_index == k)
            .map(|(_, z)| z)
            .sum()
    }
}

struct Problem<'a> {
    metric: &'a Metric,
    root: usize,
    clients: Vec<usize>,
    /// Points that cover each client.
    members: Vec<Vec<usize>>,
    times: Vec<f64>,
    opts: &'a ColgenOptions,
}

impl Problem<'_> {
    fn covers(&self, nodes: &[usize]) -> Vec<usize> {
        (0..self.clients.len())
            .filter(|&j| self.members[j].iter().any(|v| nodes.contains(v)))
            .collect()
    }

    fn rewards(&self, theta: &[f64]) -> Rewards {
        match self.opts.groups {
            None => {
                let mut r = vec![0.0; self.metric.len()];
                for (j, &v) in self.clients.iter().enumerate() {
                    r[v] = theta[j];
                }
                Rewards::Nodes(r)
            }
            Some(_) => Rewards::Groups(self.members.iter().cloned().zip(theta.iter().copied()).collect()),
        }
    }

    fn price(&self, k: usize, theta: &[f64]) -> Result<Route> {
        orienteering_exact(
            self.metric,
            self.root,
            &self.rewards(theta),
            self.opts.b * self.times[k],
            self.opts.shape,
            self.opts.orienteering_limit,
        )
    }

    fn column(&self, nodes: Vec<usize>, length: f64, k: usize) -> PathColumn {
        PathColumn {
            covers: self.covers(&nodes),
            nodes,
            length,
            time_index: k,
        }
    }
}

/// Greedy nearest-neighbour walk from the root over `points`.
fn nearest_neighbour(metric: &Metric, root: usize, points: &[usize]) -> Vec<usize> {
    let mut left: Vec<usize> = points.iter().copied().filter(|&v| v != root).collect();
    left.sort_unstable();
    left.dedup();
    let mut walk = vec![root];
    while !left.is_empty() {
        let at = *walk.last().expect("walk starts at the root");
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by(|a, b| metric.d(at, *a.1).total_cmp(&metric.d(at, *b.1)))
            .expect("nonempty");
        walk.push(left.remove(pos));
    }
    walk
}

/// Solves the path-column relaxation by column generation.
pub fn solve_ml_lp2_colgen(metric: &Metric, root: usize, ts: &TimeScale, opts: &ColgenOptions) -> Result<Lp2Solution> {
    if !(opts.a >= 1.0) || !(opts.b >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "route count a and stretch b must be at least 1, got a={}, b={}",
            opts.a, opts.b
        )));
    }
    if root >= metric.len() {
        return Err(Error::InvalidParameter(format!("root {root} outside metric")));
    }
    let (clients, members): (Vec<usize>, Vec<Vec<usize>>) = match &opts.groups {
        None => (0..metric.len()).filter(|&v| v != root).map(|v| (v, vec![v])).unzip(),
        Some(groups) => {
            if let Some(g) = groups
                .iter()
                .position(|g| g.is_empty() || g.iter().any(|&v| v >= metric.len()))
            {
                return Err(Error::InvalidParameter(format!(
                    "group {g} is empty or names an unknown point"
                )));
            }
            ((0..groups.len()).collect(), groups.clone())
        }
    };
    let prob = Problem {
        metric,
        root,
        clients,
        members,
        times: ts.times().to_vec(),
        opts,
    };
    let nj = prob.clients.len();
    let nt = prob.times.len();

    // master rows: cover_j, cap_k, cov_{j,k}
    let mut model = LpModel::new();
    let mut x = vec![vec![None; nt]; nj];
    for j in 0..nj {
        let reach = prob.members[j]
            .iter()
            .map(|&v| metric.d(root, v))
            .fold(f64::INFINITY, f64::min);
        for (k, &t) in prob.times.iter().enumerate() {
            if reach <= t + 1e-9 {
                x[j][k] = Some(model.add_nonneg("x", &[j, k], t)?);
            }
        }
        if x[j].iter().all(Option::is_none) {
            return Err(Error::InvalidParameter(format!("client {j} lies beyond the time grid")));
        }
    }
    for xj in &x {
        model.add_row(Constraint::new(
            xj.iter().flatten().map(|&v| (v, 1.0)).collect(),
            Sense::Ge,
            1.0,
        ))?;
    }
    let cap_row = |k: usize| nj + k;
    for _ in 0..nt {
        model.add_row(Constraint::new(Vec::new(), Sense::Le, opts.a))?;
    }
    let cov_row = |j: usize, k: usize| nj + nt + j * nt + k;
    for xj in &x {
        for k in 0..nt {
            let coeffs = xj[..=k].iter().flatten().map(|&v| (v, -1.0)).collect();
            model.add_row(Constraint::new(coeffs, Sense::Ge, 0.0))?;
        }
    }

    let mut columns: Vec<PathColumn> = Vec::new();
    let all_points: Vec<usize> = prob.members.iter().flatten().copied().collect();
    let tour = nearest_neighbour(metric, root, &all_points);
    let tour_len = metric.walk_length(&tour);
    for (k, &t) in prob.times.iter().enumerate() {
        if tour_len <= opts.b * t + 1e-9 {
            columns.push(prob.column(tour.clone(), tour_len, k));
        }
        for &v in all_points.iter().filter(|&&v| v != root) {
            let len = metric.d(root, v);
            if len <= opts.b * t + 1e-9 && !columns.iter().any(|c| c.time_index == k && c.nodes == [root, v]) {
                columns.push(prob.column(vec![root, v], len, k));
            }
        }
    }
    if !columns.iter().any(|c| c.covers.len() == nj) {
        return Err(Error::InvalidParameter(
            "time grid too short for a route through every client".into(),
        ));
    }
    let entries = |c: &PathColumn| -> Vec<(usize, f64)> {
        std::iter::once((cap_row(c.time_index), 1.0))
            .chain(c.covers.iter().map(|&j| (cov_row(j, c.time_index), 1.0)))
            .collect()
    };
    let new_var = |id: usize| Variable {
        block: "z".into(),
        index: vec![id],
        cost: 0.0,
        lower: 0.0,
        upper: f64::INFINITY,
    };
    let base_vars = model.num_vars();
    for (id, c) in columns.iter().enumerate() {
        let v = model.add_nonneg("z", &[id], 0.0)?;
        for (row, a) in entries(c) {
            model.rows[row].coeffs.push((v, a));
        }
    }

    let mut simplex = Simplex::new(model, SimplexOptions::default())?;
    let mut status = simplex.solve();
    let mut iterations = 0;
    let mut stopped_early = false;
    let mut best_rewards = vec![0.0; nt];
    loop {
        iterations += 1;
        if status != LpStatus::Optimal {
            return Err(Error::Lp(format!("restricted master ended with status {status:?}")));
        }
        let sol = simplex.solution();
        let beta: Vec<f64> = (0..nt).map(|k| (-sol.duals[cap_row(k)]).max(0.0)).collect();
        let theta: Vec<Vec<f64>> = (0..nj)
            .map(|j| (0..nt).map(|k| sol.duals[cov_row(j, k)].max(0.0)).collect())
            .collect();
        let priced: Vec<Result<Route>> = par::map_indices(nt, |k| {
            let th: Vec<f64> = (0..nj).map(|j| theta[j][k]).collect();
            prob.price(k, &th)
        });
        let mut fresh = Vec::new();
        for (k, r) in priced.into_iter().enumerate() {
            let r = r?;
            best_rewards[k] = r.reward;
            if r.reward > beta[k] + PRICE_TOL {
                let col = prob.column(r.nodes, r.length, k);
                if !columns.iter().any(|c| c.time_index == k && c.nodes == col.nodes) {
                    fresh.push(col);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        if columns.len() + fresh.len() > opts.max_columns || iterations >= opts.max_iterations {
            stopped_early = true;
            break;
        }
        let mut batch = Vec::new();
        for c in fresh {
            batch.push((new_var(columns.len()), entries(&c)));
            columns.push(c);
        }
        status = simplex.add_columns(batch)?;
    }

    let sol = simplex.solution();
    let beta: Vec<f64> = (0..nt).map(|k| (-sol.duals[cap_row(k)]).max(0.0)).collect();
    let theta: Vec<Vec<f64>> = (0..nj)
        .map(|j| (0..nt).map(|k| sol.duals[cov_row(j, k)].max(0.0)).collect())
        .collect();
    let value = sol.objective;
    let lower_bound = if stopped_early {
        value + opts.a * (0..nt).map(|k| (beta[k] - best_rewards[k]).min(0.0)).sum::<f64>()
    } else {
        value
    };
    let xs = x
        .iter()
        .map(|row| row.iter().map(|v| v.map_or(0.0, |v| sol.primal[v].max(0.0))).collect())
        .collect();
    let z = (0..columns.len()).map(|c| sol.primal[base_vars + c].max(0.0)).collect();
    Ok(Lp2Solution {
        status: if stopped_early {
            ColgenStatus::Partial
        } else {
            ColgenStatus::Converged
        },
        value,
        lower_bound,
        times: prob.times.clone(),
        clients: prob.clients.clone(),
        x: xs,
        columns,
        z,
        beta,
        theta,
        iterations,
    })
}

/// Re-prices every grid time against the stored duals; returns the largest
/// `best reward − β_t` (at most about zero after convergence).
pub fn max_pricing_violation(metric: &Metric, root: usize, sol: &Lp2Solution, opts: &ColgenOptions) -> Result<f64> {
    let members: Vec<Vec<usize>> = match &opts.groups {
        None => sol.clients.iter().map(|&v| vec![v]).collect(),
        Some(g) => g.clone(),
    };
    let prob = Problem {
        metric,
        root,
        clients: sol.clients.clone(),
        members,
        times: sol.times.clone(),
        opts,
    };
    let mut worst = f64::NEG_INFINITY;
    for k in 0..sol.times.len() {
        let th: Vec<f64> = (0..sol.clients.len()).map(|j| sol.theta[j][k]).collect();
        let r = prob.price(k, &th)?;
        worst = worst.max(r.reward - sol.beta[k]);
    }
    Ok(worst)
}
