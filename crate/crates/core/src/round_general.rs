//! Phased rounding of the facility LP for general instances.
//!
//! Phase `ℓ` works at time `t_ℓ`: it embeds facilities and root into a random
//! tree, lifts the LP edge values onto the tree, hangs a leaf of weight `f_i`
//! under each facility carrying its opening mass, and samples subtrees by
//! GKR rounding. Facilities whose leaf is sampled are opened and toured.
//! Clients are connected to open facilities within `4·C*_j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EvalMode, Instance, Solution};
use crate::lpcore::LpStatus;
use crate::relaxations::{solve_lp_norm_guesses, solve_mlufl_lp, FractionalMlufl, MluflLpOptions, TimeScale};
use crate::rng::{derive_seed, stream};
use crate::treekit::{euler_tour, frt_embed, gkr_round, monotone_cap, Direction, Tour};
use crate::CERT_TOL;

/// How phase times are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PhaseMode {
    /// `t_ℓ = min{2^ℓ, T}`.
    #[default]
    Plain,
    /// `t_ℓ = TS(L̄·2^ℓ)`, starting from the average LP latency.
    Scaled,
    /// `t_ℓ = min{2^(ℓ/p), T}` for latency functions of growth `p`.
    Growth(f64),
}

#[derive(Debug, Clone)]
pub struct GeneralParams {
    pub mode: PhaseMode,
    /// Number of routes; each phase tour is split into this many pieces.
    pub routes: usize,
    pub seed: u64,
    /// Extra attempts with fresh seeds after a failed one.
    pub retries: usize,
}

impl Default for GeneralParams {
    fn default() -> Self {
        GeneralParams {
            mode: PhaseMode::Plain,
            routes: 1,
            seed: 0,
            retries: 5,
        }
    }
}

/// Per-client data the phases are built from.
#[derive(Debug, Clone)]
pub struct PhasePlan {
    /// `t_ℓ` for `ℓ = 0..=N`.
    pub times: Vec<f64>,
    /// Latest LP grid index with time `≤ t_ℓ`.
    pub grid_index: Vec<usize>,
    pub c_star: Vec<f64>,
    pub l_star: Vec<f64>,
    /// `N_j = {i : c_ij ≤ 4·C*_j}`.
    pub near: Vec<Vec<usize>>,
    /// Earliest grid time by which `N_j` carries `2/3` of `j`'s assignment.
    pub tau: Vec<f64>,
    pub tau_max: f64,
}

impl PhasePlan {
    pub fn new(inst: &Instance, frac: &FractionalMlufl, mode: PhaseMode) -> Result<Self> {
        let n = inst.n;
        let m = inst.m;
        let nt = frac.num_times();
        let c_star: Vec<f64> = (0..m).map(|j| frac.c_star(inst, j)).collect();
        let l_star: Vec<f64> = (0..m).map(|j| frac.l_star(j)).collect();
        let mut near = Vec::with_capacity(m);
        let mut tau = Vec::with_capacity(m);
        for j in 0..m {
            let nj: Vec<usize> = (0..n).filter(|&i| inst.c[i][j] <= 4.0 * c_star[j] + CERT_TOL).collect();
            let mut mass = 0.0;
            let mut at = None;
            for k in 0..nt {
                mass += nj.iter().map(|&i| frac.x[i][j][k]).sum::<f64>();
                if mass >= 2.0 / 3.0 - 1e-9 {
                    at = Some(frac.times[k]);
                    break;
                }
            }
            let t = at.ok_or_else(|| {
                Error::InvalidFractional(format!("client {j} has less than 2/3 of its mass within 4·C*"))
            })?;
            near.push(nj);
            tau.push(t);
        }
        let tau_max = tau.iter().copied().fold(1.0, f64::max);
        let big_t = *frac.times.last().expect("grid is nonempty");
        let log_m = (m.max(1) as f64).log2();
        let times: Vec<f64> = match mode {
            PhaseMode::Plain => {
                let count = phase_count((2.0 * tau_max).log2() + 4.0 * log_m);
                (0..=count).map(|l| 2f64.powi(l as i32).min(big_t)).collect()
            }
            PhaseMode::Growth(p) => {
                if p < 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "growth exponent must be at least 1, got {p}"
                    )));
                }
                let count = phase_count(p * (2f64.powf(1.0 / p) * tau_max).log2() + 4.0 * log_m);
                (0..=count).map(|l| 2f64.powf(l as f64 / p).min(big_t)).collect()
            }
            PhaseMode::Scaled => {
                let l_bar = frac.l_bar(inst).max(1.0);
                let count = phase_count((2.0 * tau_max / l_bar).log2() + 4.0 * log_m);
                let idx = |x: f64| frac.times.partition_point(|&s| s < x - 1e-9).min(nt - 1);
                (0..=count)
                    .map(|l| frac.times[idx(l_bar * 2f64.powi(l as i32))])
                    .collect()
            }
        };
        let grid_index = times
            .iter()
            .map(|&t| frac.times.partition_point(|&s| s <= t + 1e-9).saturating_sub(1))
            .collect();
        Ok(PhasePlan {
            times,
            grid_index,
            c_star,
            l_star,
            near,
            tau,
            tau_max,
        })
    }

    /// `D_ℓ = {j : τ_j ≤ t_ℓ}`.
    pub fn ready(&self, phase: usize) -> Vec<usize> {
        (0..self.tau.len())
            .filter(|&j| self.tau[j] <= self.times[phase] + 1e-9)
            .collect()
    }
}

fn phase_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// What one phase did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiag {
    pub phase: usize,
    pub t: f64,
    /// Grid time whose LP values the phase used.
    pub grid_time: f64,
    pub ready: usize,
    /// Index of the accepted batch.
    pub batch: usize,
    /// `Σ_e d_T(e)·𝔷_e` over embedding edges, before capping.
    pub tree_mass: f64,
    /// `Σ_e d_e·z_{e,t}` in the LP.
    pub lp_mass: f64,
    pub opened: usize,
    pub opened_cost: f64,
    /// Budget for `opened_cost` in the batch test.
    pub facility_budget: f64,
    pub kept_tree_length: f64,
    pub tree_budget: f64,
    /// Closed length of the phase tour over newly activated facilities.
    pub tour_length: f64,
    pub connected: usize,
    /// Longest closed route piece in this phase.
    pub segment_max: f64,
    /// `tour_length / k + 2·t_ℓ`.
    pub segment_bound: f64,
}

#[derive(Debug, Clone)]
pub struct GeneralOutcome {
    pub solution: Solution,
    pub phases: Vec<PhaseDiag>,
    pub plan: PhasePlan,
    /// Attempts used, the successful one included.
    pub attempts: usize,
    /// Phase in which each client was connected.
    pub connected_in: Vec<usize>,
}

impl GeneralOutcome {
    /// Clients with `c_{φ(j)j} > 4·C*_j`.
    pub fn connection_violations(&self, inst: &Instance) -> Vec<usize> {
        (0..inst.m)
            .filter(|&j| inst.c[self.solution.assignment[j]][j] > 4.0 * self.plan.c_star[j] + CERT_TOL)
            .collect()
    }
}

/// Rounds `frac` to an integral solution, retrying with fresh seeds when a
/// phase finds no acceptable batch or a client stays unconnected.
pub fn round_general(inst: &Instance, frac: &FractionalMlufl, params: &GeneralParams) -> Result<GeneralOutcome> {
    if frac.edges.is_empty() {
        return Err(Error::InvalidFractional("rounding needs the edge variables z".into()));
    }
    if params.routes == 0 {
        return Err(Error::InvalidParameter("at least one route is needed".into()));
    }
    frac.check(inst, Some(params.routes as f64), 1e-6)?;
    let plan = PhasePlan::new(inst, frac, params.mode)?;
    let mut reason = String::new();
    for attempt in 0..=params.retries {
        let seed = derive_seed(params.seed, stream::RETRY + attempt as u64);
        match run_attempt(inst, frac, &plan, params.routes, seed) {
            Ok((solution, phases, connected_in)) => {
                return Ok(GeneralOutcome {
                    solution,
                    phases,
                    plan,
                    attempts: attempt + 1,
                    connected_in,
                })
            }
            Err(why) => reason = why,
        }
    }
    Err(Error::RoundingFailed {
        attempts: params.retries + 1,
        reason,
    })
}

type Attempt = std::result::Result<(Solution, Vec<PhaseDiag>, Vec<usize>), String>;

fn run_attempt(inst: &Instance, frac: &FractionalMlufl, plan: &PhasePlan, k: usize, seed: u64) -> Attempt {
    let n = inst.n;
    let m = inst.m;
    let root = inst.root();
    let points: Vec<usize> = (0..=n).collect();
    let log_n = (n as f64).log2().max(1.0);
    let runs = (192.0 * log_n).ceil() as usize;
    let batches = ((m.max(1) as f64).log2().ceil() as usize).max(1);
    let factor = 40.0 * 192.0 * log_n;

    let mut assignment: Vec<Option<usize>> = vec![None; m];
    let mut connected_in = vec![usize::MAX; m];
    let mut activated = vec![false; n];
    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut phases = Vec::with_capacity(plan.times.len());

    for (phase, &t) in plan.times.iter().enumerate() {
        let gk = plan.grid_index[phase];
        let phase_seed = derive_seed(seed, stream::PHASE + phase as u64);
        let tree = frt_embed(&inst.d, &points, root, derive_seed(phase_seed, stream::EMBED));
        let leaf: Vec<usize> = points
            .iter()
            .map(|&p| tree.node_of(p).expect("every point is embedded"))
            .collect();
        let mut ext = tree.clone();
        let dummy: Vec<usize> = (0..n).map(|i| ext.add_child(leaf[i], inst.f[i], None)).collect();

        let mut lift = vec![0.0; ext.len()];
        let mut lp_mass = 0.0;
        for (e, &(u, v)) in frac.edges.iter().enumerate() {
            let z = frac.z[e][gk];
            if z <= 0.0 {
                continue;
            }
            lp_mass += inst.d.d(u, v) * z;
            for c in tree.path_edges(leaf[u], leaf[v]) {
                lift[c] += z;
            }
        }
        for i in 0..n {
            lift[dummy[i]] = frac.y_prefix(i, gk);
        }
        let tree_mass: f64 = (1..tree.len()).map(|v| tree.weight(v) * lift[v]).sum();
        let zz = monotone_cap(&ext, &lift);
        let facility_budget = factor * (0..n).map(|i| inst.f[i] * zz[dummy[i]]).sum::<f64>();
        let tree_budget = factor * (1..tree.len()).map(|v| tree.weight(v) * zz[v]).sum::<f64>();

        let mut accepted = None;
        for b in 0..batches {
            let batch_seed = derive_seed(phase_seed, stream::BATCH + b as u64);
            let mut union = vec![false; ext.len()];
            for r in 0..runs {
                let kept = gkr_round(&ext, &zz, derive_seed(batch_seed, r as u64)).map_err(|e| e.to_string())?;
                for (u, kp) in union.iter_mut().zip(kept) {
                    *u |= kp;
                }
            }
            let opened_cost: f64 = (0..n).filter(|&i| union[dummy[i]]).map(|i| inst.f[i]).sum();
            let kept_len: f64 = (1..tree.len()).filter(|&v| union[v]).map(|v| tree.weight(v)).sum();
            if opened_cost <= facility_budget + CERT_TOL && kept_len <= tree_budget + CERT_TOL {
                accepted = Some((b, union, opened_cost, kept_len));
                break;
            }
        }
        let Some((batch, union, opened_cost, kept_len)) = accepted else {
            return Err(format!("no batch passed the budget tests in phase {phase}"));
        };

        let open: Vec<bool> = (0..n).map(|i| union[dummy[i]]).collect();
        let mut keep_tree = union[..tree.len()].to_vec();
        keep_tree[0] = true;
        let sub = tree
            .induced(&keep_tree)
            .map_points(|p| (p == root || open[p]).then_some(p));
        let tour = euler_tour(&sub, &inst.d, Direction::Forward);
        let fresh: Vec<usize> = std::iter::once(root)
            .chain(tour.nodes.iter().copied().filter(|&i| i != root && !activated[i]))
            .collect();
        let fresh_tour = Tour::from_sequence(&inst.d, fresh);
        for &i in &fresh_tour.nodes[1..] {
            activated[i] = true;
        }

        let mut connected = 0;
        for j in 0..m {
            if assignment[j].is_some() {
                continue;
            }
            let best = plan.near[j]
                .iter()
                .copied()
                .filter(|&i| open[i])
                .min_by(|&a, &b| inst.c[a][j].total_cmp(&inst.c[b][j]).then(a.cmp(&b)));
            if let Some(i) = best {
                assignment[j] = Some(i);
                connected_in[j] = phase;
                connected += 1;
            }
        }

        let pieces = split_tour(&fresh_tour, k);
        let mut segment_max = 0.0f64;
        for (q, piece) in pieces.into_iter().enumerate() {
            if piece.is_empty() {
                continue;
            }
            let mut walk = vec![root];
            walk.extend_from_slice(&piece);
            walk.push(root);
            segment_max = segment_max.max(inst.d.walk_length(&walk));
            routes[q].extend(piece);
        }

        phases.push(PhaseDiag {
            phase,
            t,
            grid_time: frac.times[gk],
            ready: plan.ready(phase).len(),
            batch,
            tree_mass,
            lp_mass,
            opened: open.iter().filter(|&&o| o).count(),
            opened_cost,
            facility_budget,
            kept_tree_length: kept_len,
            tree_budget,
            tour_length: fresh_tour.closed_length,
            connected,
            segment_max,
            segment_bound: fresh_tour.closed_length / k as f64 + 2.0 * t,
        });
    }

    let assignment: Vec<usize> = assignment
        .into_iter()
        .enumerate()
        .map(|(j, a)| a.ok_or_else(|| format!("client {j} left unconnected")))
        .collect::<std::result::Result<_, _>>()?;
    Ok((Solution { routes, assignment }, phases, connected_in))
}

/// Cuts a closed tour into `k` consecutive pieces by arrival time, piece `q`
/// taking the points that arrive in `[qL/k, (q+1)L/k)`.
fn split_tour(tour: &Tour, k: usize) -> Vec<Vec<usize>> {
    let mut pieces = vec![Vec::new(); k];
    let len = tour.closed_length;
    for (a, &v) in tour.nodes.iter().enumerate().skip(1) {
        let q = if len > 0.0 {
            ((tour.arrival[a] * k as f64 / len) as usize).min(k - 1)
        } else {
            0
        };
        pieces[q].push(v);
    }
    pieces
}

/// LP solve followed by rounding.
#[derive(Debug, Clone)]
pub struct DriverOutcome {
    pub outcome: GeneralOutcome,
    pub frac: FractionalMlufl,
    pub lp_value: f64,
    pub cost: f64,
    pub ratio: f64,
}

/// Grid for `eps`: the full integer grid when `eps == 0`, geometric otherwise.
pub fn grid_for(inst: &Instance, eps: f64) -> Result<TimeScale> {
    if eps == 0.0 {
        Ok(TimeScale::full_for_instance(inst))
    } else {
        TimeScale::for_instance(inst, eps)
    }
}

pub fn round_general_lp_driver(inst: &Instance, eps: f64, params: &GeneralParams) -> Result<DriverOutcome> {
    let ts = grid_for(inst, eps)?;
    let opts = MluflLpOptions {
        routes: params.routes,
        ..MluflLpOptions::default()
    };
    let lp = solve_mlufl_lp(inst, &ts, &opts)?;
    if lp.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("LP ended with status {:?}", lp.status)));
    }
    let outcome = round_general(inst, &lp.frac, params)?;
    let cost = inst.evaluate(&outcome.solution, EvalMode::Sum)?.total;
    Ok(DriverOutcome {
        ratio: ratio(cost, lp.value),
        outcome,
        frac: lp.frac,
        lp_value: lp.value,
        cost,
    })
}

/// Rounding for the `L_p`-norm objective: the best capped LP guess is
/// rounded and the solution is scored by facility + connection + latency norm.
#[derive(Debug, Clone)]
pub struct NormOutcome {
    pub outcome: GeneralOutcome,
    pub lat: f64,
    /// `LP value + Lat` of the chosen guess.
    pub lp_bound: f64,
    pub cost: f64,
}

pub fn round_lp_norm_driver(inst: &Instance, eps: f64, p: f64, params: &GeneralParams) -> Result<NormOutcome> {
    let ts = grid_for(inst, eps)?;
    let opts = MluflLpOptions {
        routes: params.routes,
        ..MluflLpOptions::default()
    };
    let guess = solve_lp_norm_guesses(inst, &ts, p, &opts)?;
    let outcome = round_general(inst, &guess.frac, params)?;
    let cost = inst.evaluate(&outcome.solution, EvalMode::LpNorm(p))?.total;
    Ok(NormOutcome {
        outcome,
        lat: guess.lat,
        lp_bound: guess.bound,
        cost,
    })
}

fn ratio(cost: f64, lp: f64) -> f64 {
    if lp > 0.0 {
        cost / lp
    } else if cost <= CERT_TOL {
        1.0
    } else {
        f64::INFINITY
    }
}
