//! Minimum-latency rounding from the edge relaxation (α-points, nested
//! tours, concatenation) and from the path-column relaxation (per-phase
//! column sampling).

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ml_latency;
use crate::metric::Metric;
use crate::relaxations::{Lp1Solution, Lp2Solution};
use crate::rng::rng_from_seed;
use crate::treekit::{euler_tour_weighted, gk_concatenate, mst, Direction, Tour};
use crate::CERT_TOL;

/// Per-client visit bound of the deterministic mode: `t_j ≤ 32·τ_j(½)`.
pub const DET_FACTOR: f64 = 32.0;

const MASS_TOL: f64 = 1e-7;

/// Prefix sums of `x_{j,t}` over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPoints {
    pub times: Vec<f64>,
    pub prefix: Vec<Vec<f64>>,
}

impl AlphaPoints {
    pub fn new(times: &[f64], x: &[Vec<f64>]) -> Self {
        let prefix = x
            .iter()
            .map(|row| {
                let mut s = 0.0;
                row.iter()
                    .map(|v| {
                        s += v;
                        s
                    })
                    .collect()
            })
            .collect();
        AlphaPoints {
            times: times.to_vec(),
            prefix,
        }
    }

    /// Grid index of `τ_j(α)`, the first time `j`'s mass reaches `α`.
    pub fn tau_index(&self, j: usize, alpha: f64) -> Option<usize> {
        self.prefix[j].iter().position(|&s| s >= alpha - MASS_TOL)
    }

    pub fn tau(&self, j: usize, alpha: f64) -> Option<f64> {
        self.tau_index(j, alpha).map(|k| self.times[k])
    }

    /// `D_t(α)` at grid index `k`.
    pub fn reached(&self, k: usize, alpha: f64) -> Vec<usize> {
        (0..self.prefix.len())
            .filter(|&j| self.tau_index(j, alpha).is_some_and(|q| q <= k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lp1Mode {
    /// `α` drawn with density `2x`; tours at every grid time, joined by the
    /// concatenation DP.
    Random { seed: u64 },
    /// `α = ½`; tours at powers of two, all walked in order.
    Det,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlTour {
    pub time: f64,
    pub time_index: usize,
    /// Points of the tour, root first.
    pub nodes: Vec<usize>,
    pub cost: f64,
    /// `(4/α)·Σ_e d_e z_{e,t}`.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct Lp1Rounding {
    pub alpha: f64,
    /// Root first.
    pub order: Vec<usize>,
    /// Visit time of every client along `order`.
    pub visit: Vec<f64>,
    pub tau: Vec<f64>,
    pub l_star: Vec<f64>,
    pub tours: Vec<MlTour>,
    /// Tours actually walked.
    pub chosen: Vec<usize>,
    pub latency: f64,
    /// Concatenation bound, random mode only.
    pub gk_bound: Option<f64>,
    pub det: bool,
}

impl Lp1Rounding {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.tours {
            if t.cost > t.bound + CERT_TOL {
                out.push(format!("tour at t={}: cost {} > {}", t.time, t.cost, t.bound));
            }
        }
        for w in self.tours.windows(2) {
            if !w[0].nodes.iter().all(|v| w[1].nodes.contains(v)) {
                out.push(format!("tour at t={} is not nested in t={}", w[0].time, w[1].time));
            }
        }
        if self.det {
            for (j, (&v, &tau)) in self.visit.iter().zip(&self.tau).enumerate() {
                if v > DET_FACTOR * tau + CERT_TOL {
                    out.push(format!("client {j}: visit {v} > {DET_FACTOR}·{tau}"));
                }
            }
        }
        if let Some(b) = self.gk_bound {
            if self.latency > b + CERT_TOL {
                out.push(format!("latency {} > concatenation bound {b}", self.latency));
            }
        }
        out
    }

    pub fn ratio(&self) -> f64 {
        let l: f64 = self.l_star.iter().sum();
        if l > 0.0 {
            self.latency / l
        } else {
            1.0
        }
    }
}

/// Doubled-MST tour on `points ∪ {root}`, direction chosen to favour `fresh`.
fn tree_tour(metric: &Metric, root: usize, points: &[usize], fresh: &[usize]) -> Tour {
    let tree = mst(metric, points, root);
    euler_tour_weighted(&tree, metric, Direction::Best, |v| {
        if fresh.contains(&v) {
            1.0
        } else {
            0.0
        }
    })
}

/// Walks closed tours one after another and keeps first visits.
fn walk(tours: &[&Tour], root: usize) -> Vec<usize> {
    let mut order = vec![root];
    for t in tours {
        for &v in &t.nodes {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    order
}

fn visit_times(metric: &Metric, order: &[usize], points: &[usize]) -> Vec<f64> {
    let tour = Tour::from_sequence(metric, order.to_vec());
    points
        .iter()
        .map(|&v| tour.first_visit(v).unwrap_or(f64::INFINITY))
        .collect()
}

/// Rounds an edge-relaxation solution to a visiting order.
pub fn round_ml_lp1(metric: &Metric, sol: &Lp1Solution, mode: Lp1Mode) -> Result<Lp1Rounding> {
    let root = sol.root;
    let p = sol.nodes.len();
    for j in 0..p {
        if sol.coverage(j) < 1.0 - 1e-6 {
            return Err(Error::InvalidFractional(format!(
                "client {j} covered {} < 1",
                sol.coverage(j)
            )));
        }
    }
    let table = AlphaPoints::new(&sol.times, &sol.x);
    let alpha = match mode {
        Lp1Mode::Det => 0.5,
        Lp1Mode::Random { seed } => {
            let u: f64 = rng_from_seed(seed).gen();
            (1.0 - u).sqrt()
        }
    };
    let tau_index: Vec<usize> = (0..p)
        .map(|j| table.tau_index(j, alpha).expect("coverage reaches α"))
        .collect();
    let tau: Vec<f64> = tau_index.iter().map(|&k| sol.times[k]).collect();

    // grid indices that get a tour
    let phases: Vec<usize> = match mode {
        Lp1Mode::Random { .. } => {
            let mut ks: Vec<usize> = tau_index.clone();
            ks.sort_unstable();
            ks.dedup();
            ks
        }
        Lp1Mode::Det => {
            let tmax = tau.iter().copied().fold(0.0, f64::max);
            let mut ks = Vec::new();
            if sol.times.first() == Some(&0.0) && tau.contains(&0.0) {
                ks.push(0);
            }
            let tmin = sol.times.iter().copied().find(|&t| t > 0.0);
            if let Some(tmin) = tmin.filter(|_| tmax > 0.0) {
                let mut l = tmin.log2().floor() as i32;
                loop {
                    let tl = 2f64.powi(l);
                    if let Some(k) = sol.times.iter().rposition(|&t| t <= tl + 1e-12) {
                        if ks.last() != Some(&k) && tau_index.iter().any(|&q| q <= k) {
                            ks.push(k);
                        }
                    }
                    if tl >= tmax {
                        break;
                    }
                    l += 1;
                }
            }
            ks
        }
    };

    let mut tours = Vec::with_capacity(phases.len());
    let mut walks = Vec::with_capacity(phases.len());
    let mut seen: Vec<usize> = Vec::new();
    for &k in &phases {
        let members: Vec<usize> = (0..p).filter(|&j| tau_index[j] <= k).map(|j| sol.nodes[j]).collect();
        if members == seen {
            continue;
        }
        let fresh: Vec<usize> = members.iter().copied().filter(|v| !seen.contains(v)).collect();
        let tour = tree_tour(metric, root, &members, &fresh);
        seen = members;
        tours.push(MlTour {
            time: sol.times[k],
            time_index: k,
            nodes: tour.nodes.clone(),
            cost: tour.closed_length,
            bound: 4.0 / alpha * sol.edge_mass(metric, k),
        });
        walks.push(tour);
    }
    if walks.is_empty() {
        return Err(Error::InvalidFractional("no tour could be built".into()));
    }

    let (order, chosen, gk_bound) = match mode {
        Lp1Mode::Det => {
            let refs: Vec<&Tour> = walks.iter().collect();
            (walk(&refs, root), (0..walks.len()).collect(), None)
        }
        Lp1Mode::Random { .. } => {
            let plan = gk_concatenate(&walks, &sol.nodes)?;
            (plan.order, plan.chosen, Some(plan.bound))
        }
    };
    let visit = visit_times(metric, &order, &sol.nodes);
    Ok(Lp1Rounding {
        alpha,
        latency: ml_latency(metric, root, &order[1..], None),
        order,
        visit,
        tau,
        l_star: (0..p).map(|j| sol.l_star(j)).collect(),
        tours,
        chosen,
        gk_bound,
        det: matches!(mode, Lp1Mode::Det),
    })
}

/// Systematic sampling: one uniform offset, column `q` taken when an
/// integer shift of it lands in `[S_{q−1}, S_q)`. Each column is picked
/// with probability `min(z_q, 1)` and at most `⌈Σ z⌉` are picked.
pub fn systematic_sample(z: &[f64], u: f64) -> Vec<usize> {
    let mut picked = Vec::new();
    let mut lo = 0.0;
    for (q, &w) in z.iter().enumerate() {
        let hi = lo + w.clamp(0.0, 1.0);
        // smallest u + i at or above lo
        let first = u + (lo - u).max(0.0).ceil();
        if first < hi {
            picked.push(q);
        }
        lo = hi;
    }
    picked
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lp2Phase {
    pub time: f64,
    pub time_index: usize,
    /// `w_t = Σ_Q z_{Q,t}`.
    pub mass: f64,
    /// Indices into the solution's columns.
    pub selected: Vec<usize>,
    pub nodes: Vec<usize>,
    pub cost: f64,
    /// Twice the summed length of the selected columns.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct Lp2Rounding {
    /// Root first.
    pub order: Vec<usize>,
    pub success: bool,
    pub covered: Vec<bool>,
    /// Total latency (over groups in group mode), when every client is covered.
    pub latency: Option<f64>,
    pub phases: Vec<Lp2Phase>,
}

impl Lp2Rounding {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for ph in &self.phases {
            if ph.selected.len() as f64 > (ph.mass - 1e-9).ceil().max(0.0) {
                out.push(format!(
                    "phase t={}: {} columns > ⌈{}⌉",
                    ph.time,
                    ph.selected.len(),
                    ph.mass
                ));
            }
            if ph.cost > ph.bound + CERT_TOL {
                out.push(format!("phase t={}: cost {} > {}", ph.time, ph.cost, ph.bound));
            }
        }
        out
    }
}

/// Rounds a column-generation solution. Phases run at `t_ℓ = 2^ℓ` (the
/// largest grid time not above it), extended past the horizon by
/// `4·log₂ m` extra phases; the walk stops once everything is covered.
pub fn round_ml_lp2(
    metric: &Metric,
    root: usize,
    sol: &Lp2Solution,
    groups: Option<&[Vec<usize>]>,
    seed: u64,
) -> Result<Lp2Rounding> {
    let members: Vec<Vec<usize>> = match groups {
        None => sol.clients.iter().map(|&v| vec![v]).collect(),
        Some(gs) => sol
            .clients
            .iter()
            .map(|&g| {
                gs.get(g)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown group {g}")))
            })
            .collect::<Result<_>>()?,
    };
    let m = members.len();
    let times = &sol.times;
    let last = times
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidFractional("empty time grid".into()))?;
    let tmin = times.iter().copied().find(|&t| t > 0.0).unwrap_or(1.0);
    let lmin = tmin.log2().floor() as i32;
    let lmax = (times[last].max(tmin).log2() + 4.0 * (m.max(2) as f64).log2()).ceil() as i32;
    let mut phase_index: Vec<usize> = Vec::new();
    if times[0] == 0.0 {
        phase_index.push(0);
    }
    for l in lmin..=lmax {
        let tl = 2f64.powi(l);
        if let Some(k) = times.iter().rposition(|&t| t <= tl + 1e-12) {
            phase_index.push(k);
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut covered = vec![false; m];
    let mut visited: Vec<usize> = vec![root];
    let mut phases = Vec::new();
    let mut walks = Vec::new();
    for &k in &phase_index {
        if covered.iter().all(|&c| c) {
            break;
        }
        let cols: Vec<usize> = (0..sol.columns.len())
            .filter(|&q| sol.columns[q].time_index == k)
            .collect();
        let z: Vec<f64> = cols.iter().map(|&q| sol.z[q]).collect();
        let mass: f64 = z.iter().sum();
        let selected: Vec<usize> = systematic_sample(&z, rng.gen()).into_iter().map(|a| cols[a]).collect();
        let mut nodes: Vec<usize> = selected
            .iter()
            .flat_map(|&q| sol.columns[q].nodes.iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let fresh: Vec<usize> = nodes.iter().copied().filter(|v| !visited.contains(v)).collect();
        let tour = tree_tour(metric, root, &nodes, &fresh);
        for &v in &tour.nodes {
            if !visited.contains(&v) {
                visited.push(v);
            }
        }
        for (j, g) in members.iter().enumerate() {
            covered[j] = covered[j] || g.iter().any(|v| visited.contains(v));
        }
        phases.push(Lp2Phase {
            time: times[k],
            time_index: k,
            mass,
            selected: selected.clone(),
            nodes: tour.nodes.clone(),
            cost: tour.closed_length,
            bound: 2.0 * selected.iter().map(|&q| sol.columns[q].length).sum::<f64>(),
        });
        walks.push(tour);
    }
    let refs: Vec<&Tour> = walks.iter().collect();
    let order = walk(&refs, root);
    let success = covered.iter().all(|&c| c);
    let latency = success.then(|| match groups {
        None => {
            let pts: Vec<usize> = members.iter().map(|g| g[0]).collect();
            visit_times(metric, &order, &pts).iter().sum()
        }
        Some(_) => {
            let tour = Tour::from_sequence(metric, order.clone());
            members
                .iter()
                .map(|g| {
                    g.iter()
                        .filter_map(|&v| tour.first_visit(v))
                        .fold(f64::INFINITY, f64::min)
                })
                .sum()
        }
    });
    Ok(Lp2Rounding {
        order,
        success,
        covered,
        latency,
        phases,
    })
}
