use crate::error::{Error, Result};
use crate::instance::Instance;

/// Fractional solution of the time-indexed facility LP.
///
/// `x[i][j][t]`, `y[i][t]` and `z[e][t]` are indexed by position in `times`.
/// Edges are unordered pairs over facilities and the root (index `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalMlufl {
    pub n: usize,
    pub m: usize,
    pub times: Vec<f64>,
    pub x: Vec<Vec<Vec<f64>>>,
    pub y: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize)>,
    pub z: Vec<Vec<f64>>,
}

/// All unordered pairs `u < v` over `0..=n`.
pub fn complete_edges(points: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(points * points.saturating_sub(1) / 2);
    for u in 0..points {
        for v in (u + 1)..points {
            edges.push((u, v));
        }
    }
    edges
}

/// Index of edge `{u, v}` in [`complete_edges`] order.
pub fn edge_index(points: usize, u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a * points - a * (a + 1) / 2 + (b - a - 1)
}

impl FractionalMlufl {
    pub fn zeros(n: usize, m: usize, times: Vec<f64>, with_edges: bool) -> Self {
        let nt = times.len();
        let edges = if with_edges { complete_edges(n + 1) } else { Vec::new() };
        FractionalMlufl {
            n,
            m,
            x: vec![vec![vec![0.0; nt]; m]; n],
            y: vec![vec![0.0; nt]; n],
            z: vec![vec![0.0; nt]; edges.len()],
            edges,
            times,
        }
    }

    /// Integral solution that opens `order` on one route and connects client
    /// `j` to `assignment[j]` at the grid time covering its activation.
    pub fn from_integral(inst: &Instance, times: Vec<f64>, order: &[usize], assignment: &[usize]) -> Self {
        let mut frac = FractionalMlufl::zeros(inst.n, inst.m, times, true);
        let mut t = 0.0;
        let mut prev = inst.root();
        let mut when = vec![None; inst.n];
        let mut path = Vec::new();
        for &i in order {
            t += inst.d.d(prev, i);
            let k = frac.index_at_least(t);
            when[i] = Some(k);
            frac.y[i][k] = 1.0;
            path.push((prev, i, k));
            prev = i;
        }
        for (j, &i) in assignment.iter().enumerate() {
            if let Some(k) = when[i] {
                frac.x[i][j][k] = 1.0;
            }
        }
        // an edge traversed by time t stays traversed afterwards
        for (u, v, k) in path {
            let e = edge_index(inst.n + 1, u, v);
            for kk in k..frac.times.len() {
                frac.z[e][kk] = 1.0;
            }
        }
        frac
    }

    pub fn index_at_least(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t - 1e-9).min(self.times.len() - 1)
    }

    pub fn num_times(&self) -> usize {
        self.times.len()
    }

    pub fn z_at(&self, u: usize, v: usize, k: usize) -> f64 {
        if u == v || self.edges.is_empty() {
            return 0.0;
        }
        self.z[edge_index(self.n + 1, u, v)][k]
    }

    /// `C*_j = Σ c_ij x_{ij,t}`.
    pub fn c_star(&self, inst: &Instance, j: usize) -> f64 {
        (0..self.n)
            .filter(|&i| inst.c[i][j].is_finite())
            .map(|i| inst.c[i][j] * self.x[i][j].iter().sum::<f64>())
            .sum()
    }

    /// `L*_j = Σ t·x_{ij,t}`.
    pub fn l_star(&self, j: usize) -> f64 {
        (0..self.n)
            .map(|i| self.x[i][j].iter().zip(&self.times).map(|(x, t)| x * t).sum::<f64>())
            .sum()
    }

    /// `Σ λ(t)·x_{ij,t}` with the instance latency function.
    pub fn latency_cost(&self, inst: &Instance, j: usize) -> f64 {
        (0..self.n)
            .map(|i| {
                self.x[i][j]
                    .iter()
                    .zip(&self.times)
                    .map(|(x, &t)| x * inst.latency.eval(t))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Weighted average `Σ λ_j L*_j / Σ λ_j` (plain average with unit weights).
    pub fn l_bar(&self, inst: &Instance) -> f64 {
        let w = inst.total_weight();
        if w <= 0.0 {
            return 0.0;
        }
        (0..self.m).map(|j| inst.weight(j) * self.l_star(j)).sum::<f64>() / w
    }

    pub fn coverage(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.x[i][j].iter().sum::<f64>()).sum()
    }

    /// Facility mass `Σ_{t' ≤ t_k} y_{i,t'}`.
    pub fn y_prefix(&self, i: usize, k: usize) -> f64 {
        self.y[i][..=k].iter().sum()
    }

    pub fn facility_cost(&self, inst: &Instance) -> f64 {
        (0..self.n).map(|i| inst.f[i] * self.y[i].iter().sum::<f64>()).sum()
    }

    /// LP objective `Σ f y + Σ (c + λ_j λ(t)) x`.
    pub fn objective(&self, inst: &Instance) -> f64 {
        self.facility_cost(inst)
            + (0..self.m)
                .map(|j| self.c_star(inst, j) + inst.weight(j) * self.latency_cost(inst, j))
                .sum::<f64>()
    }

    /// Checks cover, linking, time-window and per-time length rows (the
    /// connectivity family is checked by [`super::verify_connectivity`]).
    /// `length_factor` is the route count `k`, or `None` to skip the length
    /// rows (uniform LP, where `z` is absent).
    pub fn check(&self, inst: &Instance, length_factor: Option<f64>, tol: f64) -> Result<()> {
        if self.n != inst.n || self.m != inst.m {
            return Err(Error::InvalidFractional("dimension mismatch".into()));
        }
        let nt = self.times.len();
        for j in 0..self.m {
            let cov = self.coverage(j);
            if cov < 1.0 - tol {
                return Err(Error::InvalidFractional(format!("client {j} covered {cov} < 1")));
            }
        }
        for i in 0..self.n {
            for k in 0..nt {
                let y = self.y[i][k];
                if y < -tol {
                    return Err(Error::InvalidFractional(format!("y[{i}][{k}] = {y} < 0")));
                }
                if y > tol && !self.edges.is_empty() && inst.d_root(i) > self.times[k] + 1e-9 {
                    return Err(Error::InvalidFractional(format!(
                        "facility {i} open at t={} before reachable (d={})",
                        self.times[k],
                        inst.d_root(i)
                    )));
                }
                for j in 0..self.m {
                    let x = self.x[i][j][k];
                    if x < -tol || x > y + tol {
                        return Err(Error::InvalidFractional(format!("x[{i}][{j}][{k}] = {x} vs y = {y}")));
                    }
                    if x > tol && !inst.c[i][j].is_finite() {
                        return Err(Error::InvalidFractional(format!(
                            "x[{i}][{j}][{k}] on an infinite cost pair"
                        )));
                    }
                }
            }
        }
        if let Some(kf) = length_factor {
            for k in 0..nt {
                let len: f64 = self
                    .edges
                    .iter()
                    .zip(&self.z)
                    .map(|(&(u, v), z)| inst.d.d(u, v) * z[k])
                    .sum();
                if len > kf * self.times[k] * (1.0 + 1e-7) + tol {
                    return Err(Error::InvalidFractional(format!(
                        "length {len} exceeds {kf}·{} at grid index {k}",
                        self.times[k]
                    )));
                }
            }
        }
        Ok(())
    }
}
