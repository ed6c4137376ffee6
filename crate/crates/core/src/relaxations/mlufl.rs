//! The time-indexed facility LP and its uniform-metric compact variant.

use super::frac::{complete_edges, FractionalMlufl};
use super::timescale::TimeScale;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lpcore::{
    cutting_plane_solve, max_flow, Constraint, FlowNetwork, LpModel, LpStatus, Sense, SeparationOracle, CUT_TOL,
};
use crate::par;

/// Replace the latency term of the objective by the row
/// `Σ λ_j t^p x_{ij,t} ≤ lat^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyCap {
    pub p: f64,
    pub lat: f64,
}

#[derive(Debug, Clone)]
pub struct MluflLpOptions {
    /// Number of routes; the per-time length row becomes `Σ d_e z_{e,t} ≤ k·t`.
    pub routes: usize,
    pub latency_cap: Option<LatencyCap>,
    /// Separate `x ≤ y` lazily instead of writing every row up front.
    pub lazy_linking: bool,
    pub max_rounds: usize,
}

impl Default for MluflLpOptions {
    fn default() -> Self {
        MluflLpOptions {
            routes: 1,
            latency_cap: None,
            lazy_linking: true,
            max_rounds: 500,
        }
    }
}

/// Column indices of every LP variable, `None` where the variable is fixed
/// to zero and was not created.
#[derive(Debug, Clone)]
pub struct MluflLayout {
    pub n: usize,
    pub m: usize,
    pub times: Vec<f64>,
    pub y: Vec<Vec<Option<usize>>>,
    pub x: Vec<Vec<Vec<Option<usize>>>>,
    pub edges: Vec<(usize, usize)>,
    pub z: Vec<Vec<usize>>,
}

impl MluflLayout {
    pub fn extract(&self, primal: &[f64]) -> FractionalMlufl {
        let nt = self.times.len();
        let get = |v: Option<usize>| v.map_or(0.0, |v| primal[v].max(0.0));
        let mut frac = FractionalMlufl::zeros(self.n, self.m, self.times.clone(), false);
        frac.edges = self.edges.clone();
        frac.z = self
            .z
            .iter()
            .map(|col| col.iter().map(|&v| primal[v].max(0.0)).collect())
            .collect();
        for i in 0..self.n {
            for k in 0..nt {
                frac.y[i][k] = get(self.y[i][k]);
                for j in 0..self.m {
                    frac.x[i][j][k] = get(self.x[i][j][k]);
                }
            }
        }
        frac
    }

    fn x_mass(&self, primal: &[f64], i: usize, j: usize, upto: usize) -> f64 {
        self.x[i][j][..=upto].iter().flatten().map(|&v| primal[v]).sum()
    }
}

/// Lazily separates the linking rows `x ≤ y` and the connectivity family
/// `Σ_{e∈δ(S)} z_{e,t} ≥ Σ_{i∈S, t'≤t} x_{ij,t'}` by one max-flow per
/// `(j, t)`.
#[derive(Debug, Clone)]
pub struct MluflOracle {
    pub layout: MluflLayout,
    pub linking: bool,
    pub connectivity: bool,
}

impl MluflOracle {
    /// Violated connectivity row for client `j` at grid index `k`, if any.
    pub fn connectivity_cut(&self, primal: &[f64], j: usize, k: usize) -> Option<Constraint> {
        let lay = &self.layout;
        let n = lay.n;
        let root = n;
        let sink = n + 1;
        let demand: Vec<f64> = (0..n).map(|i| lay.x_mass(primal, i, j, k)).collect();
        let total: f64 = demand.iter().sum();
        if total <= CUT_TOL {
            return None;
        }
        let mut net = FlowNetwork::new(n + 2, root, sink);
        for (e, &(u, v)) in lay.edges.iter().enumerate() {
            let cap = primal[lay.z[e][k]];
            if cap > 0.0 {
                net.add_edge(u, v, cap);
            }
        }
        for (i, &w) in demand.iter().enumerate() {
            if w > 0.0 {
                net.add_arc(i, sink, w);
            }
        }
        let flow = max_flow(&net);
        if flow.value >= total - CUT_TOL {
            return None;
        }
        // Facilities that can still reach the sink form the smallest violated set.
        let in_s: Vec<bool> = (0..n).map(|i| !flow.sink_minimal_side[i]).collect();
        let mut coeffs = Vec::new();
        for (e, &(u, v)) in lay.edges.iter().enumerate() {
            let su = u < n && in_s[u];
            let sv = v < n && in_s[v];
            if su != sv {
                coeffs.push((lay.z[e][k], 1.0));
            }
        }
        for i in (0..n).filter(|&i| in_s[i]) {
            for v in lay.x[i][j][..=k].iter().flatten() {
                coeffs.push((*v, -1.0));
            }
        }
        let lhs: f64 = coeffs.iter().map(|&(v, a)| a * primal[v]).sum();
        (lhs < -CUT_TOL).then(|| Constraint::new(coeffs, Sense::Ge, 0.0).labeled(format!("conn_{j}_{k}")))
    }

    fn linking_cuts(&self, primal: &[f64]) -> Vec<Constraint> {
        let lay = &self.layout;
        let mut cuts = Vec::new();
        for i in 0..lay.n {
            for j in 0..lay.m {
                for (k, xv) in lay.x[i][j].iter().enumerate() {
                    if let (Some(xv), Some(yv)) = (*xv, lay.y[i][k]) {
                        if primal[xv] - primal[yv] > CUT_TOL {
                            cuts.push(linking_row(xv, yv).labeled(format!("link_{i}_{j}_{k}")));
                        }
                    }
                }
            }
        }
        cuts
    }
}

impl SeparationOracle for MluflOracle {
    fn separate(&mut self, primal: &[f64]) -> Vec<Constraint> {
        let mut cuts = if self.linking {
            self.linking_cuts(primal)
        } else {
            Vec::new()
        };
        if self.connectivity && !self.layout.edges.is_empty() {
            let nt = self.layout.times.len();
            let this = &*self;
            let found = par::map_indices(self.layout.m * nt, |q| this.connectivity_cut(primal, q / nt, q % nt));
            cuts.extend(found.into_iter().flatten());
        }
        cuts
    }
}

fn linking_row(xv: usize, yv: usize) -> Constraint {
    Constraint::new(vec![(xv, 1.0), (yv, -1.0)], Sense::Le, 0.0)
}

fn cost_of(inst: &Instance, opts_cap: Option<LatencyCap>, i: usize, j: usize, t: f64) -> f64 {
    match opts_cap {
        Some(_) => inst.c[i][j],
        None => inst.c[i][j] + inst.weight(j) * inst.latency.eval(t),
    }
}

/// Builds the time-indexed LP over the grid `ts` and its separation oracle.
pub fn build_mlufl_lp(inst: &Instance, ts: &TimeScale, opts: &MluflLpOptions) -> Result<(LpModel, MluflOracle)> {
    if opts.routes == 0 {
        return Err(Error::InvalidParameter("route count must be at least 1".into()));
    }
    let (n, m) = (inst.n, inst.m);
    let times = ts.times().to_vec();
    let nt = times.len();
    let mut model = LpModel::new();
    let mut y = vec![vec![None; nt]; n];
    let mut x = vec![vec![vec![None; nt]; m]; n];
    for i in 0..n {
        for (k, &t) in times.iter().enumerate() {
            if inst.d_root(i) <= t + 1e-9 {
                y[i][k] = Some(model.add_nonneg("y", &[i, k], inst.f[i])?);
            }
        }
    }
    for i in 0..n {
        for j in 0..m {
            if !inst.c[i][j].is_finite() {
                continue;
            }
            for (k, &t) in times.iter().enumerate() {
                if y[i][k].is_some() {
                    x[i][j][k] = Some(model.add_nonneg("x", &[i, j, k], cost_of(inst, opts.latency_cap, i, j, t))?);
                }
            }
        }
    }
    let edges = complete_edges(n + 1);
    let mut z = vec![Vec::with_capacity(nt); edges.len()];
    for (e, col) in z.iter_mut().enumerate() {
        for k in 0..nt {
            col.push(model.add_nonneg("z", &[e, k], 0.0)?);
        }
    }
    add_cover_rows(&mut model, &x)?;
    for (k, &t) in times.iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = edges
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| (z[e][k], inst.d.d(u, v)))
            .filter(|&(_, d)| d > 0.0)
            .collect();
        model.add_row(Constraint::new(coeffs, Sense::Le, opts.routes as f64 * t).labeled(format!("len_{k}")))?;
    }
    if let Some(cap) = opts.latency_cap {
        let mut coeffs = Vec::new();
        for i in 0..n {
            for j in 0..m {
                for (k, v) in x[i][j].iter().enumerate() {
                    if let Some(v) = v {
                        coeffs.push((*v, inst.weight(j) * times[k].powf(cap.p)));
                    }
                }
            }
        }
        model.add_row(Constraint::new(coeffs, Sense::Le, cap.lat.powf(cap.p)).labeled("latcap"))?;
    }
    if !opts.lazy_linking {
        add_linking_rows(&mut model, &x, &y)?;
    }
    let layout = MluflLayout {
        n,
        m,
        times,
        y,
        x,
        edges,
        z,
    };
    Ok((
        model,
        MluflOracle {
            layout,
            linking: opts.lazy_linking,
            connectivity: true,
        },
    ))
}

fn add_cover_rows(model: &mut LpModel, x: &[Vec<Vec<Option<usize>>>]) -> Result<()> {
    let m = x.first().map_or(0, |r| r.len());
    for j in 0..m {
        let coeffs: Vec<(usize, f64)> = x
            .iter()
            .flat_map(|xi| xi[j].iter().flatten().map(|&v| (v, 1.0)))
            .collect();
        if coeffs.is_empty() {
            return Err(Error::InvalidInstance(format!("client {j} has no reachable facility")));
        }
        model.add_row(Constraint::new(coeffs, Sense::Ge, 1.0).labeled(format!("cover_{j}")))?;
    }
    Ok(())
}

fn add_linking_rows(model: &mut LpModel, x: &[Vec<Vec<Option<usize>>>], y: &[Vec<Option<usize>>]) -> Result<()> {
    for (i, xi) in x.iter().enumerate() {
        for (j, xij) in xi.iter().enumerate() {
            for (k, xv) in xij.iter().enumerate() {
                if let (Some(xv), Some(yv)) = (*xv, y[i][k]) {
                    model.add_row(linking_row(xv, yv).labeled(format!("link_{i}_{j}_{k}")))?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MluflLpSolution {
    pub frac: FractionalMlufl,
    pub value: f64,
    pub status: LpStatus,
    pub rounds: usize,
    pub cuts: usize,
}

/// Cutting-plane solve of the facility LP on grid `ts`.
pub fn solve_mlufl_lp(inst: &Instance, ts: &TimeScale, opts: &MluflLpOptions) -> Result<MluflLpSolution> {
    let (model, mut oracle) = build_mlufl_lp(inst, ts, opts)?;
    let res = cutting_plane_solve(model, &mut oracle, opts.max_rounds)?;
    let frac = oracle.layout.extract(&res.solution.primal);
    Ok(MluflLpSolution {
        value: res.solution.objective,
        status: res.solution.status,
        rounds: res.rounds,
        cuts: res.cut_count(),
        frac,
    })
}

/// Solution of the capped LP for the guess that minimised
/// `facility + connection + Lat`.
#[derive(Debug, Clone)]
pub struct NormGuess {
    pub lat: f64,
    pub frac: FractionalMlufl,
    /// LP facility plus connection cost at this guess.
    pub base_value: f64,
    /// `base_value + lat`; at most twice the optimum of the norm objective.
    pub bound: f64,
    pub guesses_tried: usize,
}

/// Tries `Lat = 2^q` for `q = 0, 1, …` up to the largest latency norm any
/// solution can have and keeps the best guess.
pub fn solve_lp_norm_guesses(inst: &Instance, ts: &TimeScale, p: f64, opts: &MluflLpOptions) -> Result<NormGuess> {
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "norm exponent must be at least 1, got {p}"
        )));
    }
    let top = (inst.total_weight().max(1.0) * ts.last().powf(p)).powf(1.0 / p);
    let mut best: Option<NormGuess> = None;
    let mut tried = 0;
    let mut lat = 1.0f64;
    loop {
        tried += 1;
        let o = MluflLpOptions {
            latency_cap: Some(LatencyCap { p, lat }),
            ..opts.clone()
        };
        let sol = solve_mlufl_lp(inst, ts, &o)?;
        if sol.status == LpStatus::Optimal && best.as_ref().is_none_or(|b| sol.value + lat < b.bound) {
            best = Some(NormGuess {
                lat,
                base_value: sol.value,
                bound: sol.value + lat,
                frac: sol.frac,
                guesses_tried: 0,
            });
        }
        if lat >= top {
            break;
        }
        lat *= 2.0;
    }
    let mut best = best.ok_or_else(|| Error::Lp("no latency guess gave a feasible LP".into()))?;
    best.guesses_tried = tried;
    Ok(best)
}

/// Compact LP for the uniform time metric: slots `1..=n`, at most `routes`
/// facilities per slot, no edge variables.
pub fn build_uniform_lp(inst: &Instance, routes: usize) -> Result<(LpModel, MluflLayout)> {
    if routes == 0 {
        return Err(Error::InvalidParameter("route count must be at least 1".into()));
    }
    let (n, m) = (inst.n, inst.m);
    let times: Vec<f64> = (1..=n).map(|t| t as f64).collect();
    let mut model = LpModel::new();
    let mut y = vec![vec![None; n]; n];
    let mut x = vec![vec![vec![None; n]; m]; n];
    for i in 0..n {
        for k in 0..n {
            y[i][k] = Some(model.add_nonneg("y", &[i, k], inst.f[i])?);
        }
    }
    for i in 0..n {
        for j in 0..m {
            if inst.c[i][j].is_finite() {
                for (k, &t) in times.iter().enumerate() {
                    x[i][j][k] = Some(model.add_nonneg("x", &[i, j, k], cost_of(inst, None, i, j, t))?);
                }
            }
        }
    }
    add_cover_rows(&mut model, &x)?;
    for k in 0..n {
        let coeffs = (0..n).filter_map(|i| y[i][k]).map(|v| (v, 1.0)).collect();
        model.add_row(Constraint::new(coeffs, Sense::Le, routes as f64).labeled(format!("slot_{k}")))?;
    }
    add_linking_rows(&mut model, &x, &y)?;
    let layout = MluflLayout {
        n,
        m,
        times,
        y,
        x,
        edges: Vec::new(),
        z: Vec::new(),
    };
    Ok((model, layout))
}

/// Solves the uniform LP; returns the fractional solution and its value.
pub fn solve_uniform_lp(inst: &Instance, routes: usize) -> Result<(FractionalMlufl, f64)> {
    let (model, layout) = build_uniform_lp(inst, routes)?;
    let sol = crate::lpcore::solve_lp(&model);
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("uniform LP ended with status {:?}", sol.status)));
    }
    Ok((layout.extract(&sol.primal), sol.objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::desk1;
    use crate::metric::Metric;
    use crate::relaxations::verify_connectivity;

    #[test]
    fn desk1_lp_is_below_optimum_and_clean() {
        let inst = desk1();
        let ts = TimeScale::full_for_instance(&inst);
        let sol = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.value <= 8.0 + 1e-6, "{}", sol.value);
        sol.frac.check(&inst, Some(1.0), 1e-7).unwrap();
        assert!(verify_connectivity(&inst, &sol.frac, 1e-6).is_none());
        assert!((sol.frac.objective(&inst) - sol.value).abs() < 1e-7);
    }

    #[test]
    fn eager_and_lazy_linking_agree() {
        let inst = desk1();
        let ts = TimeScale::geometric(0.1, 4.0).unwrap();
        let lazy = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
        let eager = solve_mlufl_lp(
            &inst,
            &ts,
            &MluflLpOptions {
                lazy_linking: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((lazy.value - eager.value).abs() < 1e-7);
    }

    #[test]
    fn empty_tour_yields_singleton_cut() {
        let inst = desk1();
        let ts = TimeScale::full(2.0);
        let (model, oracle) = build_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
        let mut primal = vec![0.0; model.num_vars()];
        let xv = oracle.layout.x[0][0][0].unwrap();
        primal[xv] = 1.0;
        primal[oracle.layout.y[0][0].unwrap()] = 1.0;
        let cut = oracle.connectivity_cut(&primal, 0, 0).unwrap();
        assert!((cut.violation(&primal) - 1.0).abs() < 1e-12);
        // S = {a}: both edges at a appear, x_{a,1} is the only demand term
        let zs: Vec<_> = cut.coeffs.iter().filter(|&&(_, a)| a > 0.0).collect();
        assert_eq!(zs.len(), 2);
        assert_eq!(cut.coeffs.iter().filter(|&&(_, a)| a < 0.0).count(), 1);
    }

    #[test]
    fn two_routes_double_length_budget() {
        let inst = desk1();
        let ts = TimeScale::full(2.0);
        let opts = MluflLpOptions {
            routes: 2,
            ..Default::default()
        };
        let (model, _) = build_mlufl_lp(&inst, &ts, &opts).unwrap();
        let row = model.rows.iter().find(|r| r.label == "len_0").unwrap();
        assert_eq!(row.rhs, 2.0);
    }

    #[test]
    fn uniform_single_slot() {
        let inst = Instance::new(vec![0.0], vec![vec![0.0]], Metric::uniform(2));
        let (_, v) = solve_uniform_lp(&inst, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_full_capacity_puts_everything_first() {
        let inst = Instance::new(vec![0.0; 3], vec![vec![0.0; 4]; 3], Metric::uniform(4));
        let (_, v) = solve_uniform_lp(&inst, 3).unwrap();
        assert!((v - 4.0).abs() < 1e-9);
    }
}
