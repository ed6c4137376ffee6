//! Deterministic rounding for related instances, where the time metric is
//! the connection metric divided by a factor `M ≥ 1`.
//!
//! Per phase `t_ℓ = 2^ℓ`, ready clients are clustered greedily by `C*_j`, the
//! cluster neighbourhoods `N_j` of the centers are contracted and joined to
//! the root by an MST, and every center is wired to the facilities of its
//! cluster that the MST touches. A disjoint family of clusters then opens one
//! facility each, attached to the earliest phase tree that needs it.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{EvalMode, Instance, Solution};
use crate::relaxations::FractionalMlufl;
use crate::treekit::{euler_tour, Direction, WeightedTree};
use crate::CERT_TOL;

/// Greedy clustering: repeatedly take the remaining client with the smallest
/// key (ties by index) as a center and absorb every remaining `k` with
/// `dist(center, k) ≤ radius(k)`. Returns the centers in pick order and
/// `(client, center)` pairs.
pub fn greedy_cluster(
    clients: &[usize],
    key: impl Fn(usize) -> f64,
    dist: impl Fn(usize, usize) -> f64,
    radius: impl Fn(usize) -> f64,
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut left: Vec<usize> = clients.to_vec();
    left.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mut centers = Vec::new();
    let mut sigma = Vec::new();
    while let Some(&j) = left.first() {
        centers.push(j);
        left.retain(|&k| {
            let absorbed = k == j || dist(j, k) <= radius(k);
            if absorbed {
                sigma.push((k, j));
            }
            !absorbed
        });
    }
    (centers, sigma)
}

/// Per-phase tree sizes and the bounds they are checked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelatedPhase {
    pub phase: usize,
    pub t: f64,
    pub centers: usize,
    /// `Σ_e d_e z_{e,t}` at the grid time used.
    pub lp_mass: f64,
    /// MST over the contracted clusters and the root.
    pub mst: f64,
    /// MST plus the center-to-facility edges.
    pub tree: f64,
    /// Tree plus the facility edges of opened facilities.
    pub augmented: f64,
    /// Degree of each contracted cluster in the MST, summed.
    pub degree_sum: usize,
}

/// Per-client certificate row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelatedClient {
    pub client: usize,
    pub c_star: f64,
    pub l_star: f64,
    pub facility: usize,
    pub connection: f64,
    pub time: f64,
    /// `39·C*_j − c_{φ(j)j}`.
    pub connection_slack: f64,
    /// `384·L*_j − t_j`.
    pub latency_slack: f64,
}

#[derive(Debug, Clone)]
pub struct RelatedOutcome {
    pub solution: Solution,
    pub phases: Vec<RelatedPhase>,
    pub clients: Vec<RelatedClient>,
    pub facility_cost: f64,
    /// `Σ_{i,t} f_i y_{i,t}`.
    pub lp_facility_cost: f64,
    /// Centers whose clusters open a facility.
    pub chosen: Vec<usize>,
    pub near: Vec<Vec<usize>>,
}

impl RelatedOutcome {
    /// Human-readable list of every certificate that fails.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.facility_cost > 1.5 * self.lp_facility_cost + CERT_TOL {
            out.push(format!(
                "facility cost {} > 1.5 × {}",
                self.facility_cost, self.lp_facility_cost
            ));
        }
        for c in &self.clients {
            if c.connection_slack < -CERT_TOL {
                out.push(format!(
                    "client {}: connection {} > 39·{}",
                    c.client, c.connection, c.c_star
                ));
            }
            if c.latency_slack < -CERT_TOL {
                out.push(format!("client {}: time {} > 384·{}", c.client, c.time, c.l_star));
            }
        }
        for p in &self.phases {
            if p.mst > 4.0 * p.t + CERT_TOL {
                out.push(format!("phase {}: MST {} > 4·{}", p.phase, p.mst, p.t));
            }
            if p.tree > 5.0 * p.t + CERT_TOL {
                out.push(format!("phase {}: tree {} > 5·{}", p.phase, p.tree, p.t));
            }
            if p.augmented > 8.0 * p.t + CERT_TOL {
                out.push(format!("phase {}: augmented tree {} > 8·{}", p.phase, p.augmented, p.t));
            }
        }
        for (a, &j) in self.chosen.iter().enumerate() {
            for &k in &self.chosen[a + 1..] {
                if self.near[j].iter().any(|i| self.near[k].contains(i)) {
                    out.push(format!("clusters of {j} and {k} overlap"));
                }
            }
        }
        out
    }
}

/// Distances over facilities, root and clients in the time metric.
struct TimeMetric<'a> {
    inst: &'a Instance,
    factor: f64,
}

impl TimeMetric<'_> {
    fn d(&self, u: usize, v: usize) -> f64 {
        let inst = self.inst;
        let n = inst.n;
        if let Some(fm) = &inst.full_metric {
            return fm.d(u, v) / self.factor;
        }
        match (u <= n, v <= n) {
            (true, true) => inst.d.d(u, v),
            (true, false) | (false, true) => {
                let (p, j) = if u <= n { (u, v - n - 1) } else { (v, u - n - 1) };
                if p < n {
                    inst.c[p][j] / self.factor
                } else {
                    (0..n)
                        .map(|i| inst.d.d(n, i) + inst.c[i][j] / self.factor)
                        .fold(f64::INFINITY, f64::min)
                }
            }
            (false, false) => inst.client_distance(u - n - 1, v - n - 1) / self.factor,
        }
    }
}

pub fn round_related(inst: &Instance, frac: &FractionalMlufl) -> Result<RelatedOutcome> {
    let factor = inst
        .related_factor()
        .ok_or_else(|| Error::InvalidInstance("related rounding needs a related(M) instance".into()))?;
    if frac.edges.is_empty() {
        return Err(Error::InvalidFractional("rounding needs the edge variables z".into()));
    }
    frac.check(inst, Some(1.0), 1e-6)?;
    let n = inst.n;
    let m = inst.m;
    let root = inst.root();
    let client = |j: usize| n + 1 + j;
    let tm = TimeMetric { inst, factor };

    let c_star: Vec<f64> = (0..m).map(|j| frac.c_star(inst, j)).collect();
    let l_star: Vec<f64> = (0..m).map(|j| frac.l_star(j)).collect();
    let near: Vec<Vec<usize>> = (0..m)
        .map(|j| {
            (0..n)
                .filter(|&i| frac.x[i][j].iter().sum::<f64>() > 0.0 && inst.c[i][j] <= 3.0 * c_star[j] + CERT_TOL)
                .collect()
        })
        .collect();
    if let Some(j) = (0..m).find(|&j| near[j].is_empty()) {
        return Err(Error::InvalidFractional(format!(
            "client {j} has no facility within 3·C*"
        )));
    }
    let tau: Vec<f64> = l_star.iter().map(|l| 6.0 * l).collect();
    let big_t = tau
        .iter()
        .copied()
        .fold(*frac.times.last().expect("grid is nonempty"), f64::max);
    let last_phase = big_t.max(1.0).log2().ceil() as usize;

    // R1: clustering and trees per phase
    let mut sigma: Vec<Option<usize>> = vec![None; m];
    let mut center_phase: Vec<Option<usize>> = vec![None; m];
    let mut phase_centers: Vec<Vec<usize>> = Vec::new();
    let mut phase_edges: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut phases = Vec::new();
    for phase in 0..=last_phase {
        let t = 2f64.powi(phase as i32);
        let ready: Vec<usize> = (0..m).filter(|&j| sigma[j].is_none() && tau[j] <= t + 1e-9).collect();
        let (centers, pairs) = greedy_cluster(
            &ready,
            |j| c_star[j],
            |j, k| inst.client_distance(j, k),
            |k| 30.0 * c_star[k],
        );
        for (k, j) in pairs {
            sigma[k] = Some(j);
        }
        for &j in &centers {
            center_phase[j] = Some(phase);
        }
        // MST over supernodes: node 0 is the root, node a+1 is the cluster of centers[a]
        let s = centers.len() + 1;
        let members = |a: usize| -> Vec<usize> {
            if a == 0 {
                vec![root]
            } else {
                near[centers[a - 1]].clone()
            }
        };
        let link = |a: usize, b: usize| -> (f64, usize, usize) {
            let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
            for &u in &members(a) {
                for &v in &members(b) {
                    let d = inst.d.d(u, v);
                    if d < best.0 {
                        best = (d, u, v);
                    }
                }
            }
            best
        };
        let mut in_tree = vec![false; s];
        let mut key = vec![(f64::INFINITY, usize::MAX, usize::MAX, usize::MAX); s];
        key[0] = (0.0, usize::MAX, usize::MAX, usize::MAX);
        let mut mst_edges: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
        for _ in 0..s {
            let a = (0..s)
                .filter(|&a| !in_tree[a])
                .min_by(|&a, &b| key[a].0.total_cmp(&key[b].0).then(a.cmp(&b)))
                .expect("a supernode remains");
            in_tree[a] = true;
            if a != 0 {
                let (w, from, u, v) = key[a];
                mst_edges.push((from, a, u, v, w));
            }
            for b in 0..s {
                if !in_tree[b] {
                    let (w, u, v) = link(a, b);
                    if w < key[b].0 {
                        key[b] = (w, a, u, v);
                    }
                }
            }
        }
        let mst: f64 = mst_edges.iter().map(|e| e.4).sum();
        let mut edges: Vec<(usize, usize)> = mst_edges.iter().map(|e| (e.2, e.3)).collect();
        let mut degree = vec![0usize; s];
        let mut touched: Vec<Vec<usize>> = vec![Vec::new(); s];
        for &(a, b, u, v, _) in &mst_edges {
            degree[a] += 1;
            degree[b] += 1;
            touched[a].push(u);
            touched[b].push(v);
        }
        let mut tree_len = mst;
        for a in 1..s {
            let j = centers[a - 1];
            touched[a].sort_unstable();
            touched[a].dedup();
            for &i in &touched[a] {
                edges.push((client(j), i));
                tree_len += tm.d(client(j), i);
            }
        }
        let gk = frac.times.partition_point(|&x| x <= t + 1e-9).saturating_sub(1);
        let lp_mass = frac
            .edges
            .iter()
            .zip(&frac.z)
            .map(|(&(u, v), z)| inst.d.d(u, v) * z[gk])
            .sum();
        phases.push(RelatedPhase {
            phase,
            t,
            centers: centers.len(),
            lp_mass,
            mst,
            tree: tree_len,
            augmented: tree_len,
            degree_sum: degree[1..].iter().sum(),
        });
        phase_centers.push(centers);
        phase_edges.push(edges);
    }
    if let Some(j) = (0..m).find(|&j| sigma[j].is_none()) {
        return Err(Error::InvalidFractional(format!("client {j} was never clustered")));
    }

    // R2: disjoint clusters, one facility each
    let pool: Vec<usize> = (0..m).filter(|&j| center_phase[j].is_some()).collect();
    let mut left = pool.clone();
    left.sort_by(|&a, &b| c_star[a].total_cmp(&c_star[b]).then(a.cmp(&b)));
    let mut nbr: Vec<Option<usize>> = vec![None; m];
    let mut chosen = Vec::new();
    while let Some(&j) = left.first() {
        chosen.push(j);
        left.retain(|&k| {
            let hit = near[k].iter().any(|i| near[j].contains(i));
            if hit {
                nbr[k] = Some(j);
            }
            !hit
        });
    }
    let mut opened_for: Vec<Option<usize>> = vec![None; m];
    let mut is_open = vec![false; n];
    for &j in &chosen {
        let i = *near[j]
            .iter()
            .min_by(|&&a, &&b| inst.f[a].total_cmp(&inst.f[b]).then(a.cmp(&b)))
            .expect("clusters are nonempty");
        opened_for[j] = Some(i);
        is_open[i] = true;
        let (phase, k) = pool
            .iter()
            .filter(|&&k| nbr[k] == Some(j))
            .map(|&k| (center_phase[k].expect("pool holds centers"), k))
            .min()
            .expect("j is its own neighbour");
        phase_edges[phase].push((i, client(k)));
        phases[phase].augmented += tm.d(i, client(k));
    }

    // R3: tours per phase, concatenated
    let mut order: Vec<usize> = Vec::new();
    for edges in &phase_edges {
        if edges.is_empty() {
            continue;
        }
        let tree = tree_from_edges(root, edges, &tm);
        let tree = tree.map_points(|p| (p == root || (p < n && is_open[p])).then_some(p));
        let tour = euler_tour(&tree, &inst.d, Direction::Forward);
        for &i in &tour.nodes[1..] {
            if !order.contains(&i) {
                order.push(i);
            }
        }
    }

    // R4: assignments
    let assignment: Vec<usize> = (0..m)
        .map(|j| {
            let head = if center_phase[j].is_some() {
                j
            } else {
                sigma[j].expect("every client is clustered")
            };
            let owner = nbr[head].expect("every center has a neighbour");
            opened_for[owner].expect("chosen centers open a facility")
        })
        .collect();
    let solution = Solution::single_route(order, assignment);
    let cost = inst.evaluate(&solution, EvalMode::Sum)?;
    let clients = cost
        .per_client
        .iter()
        .map(|r| RelatedClient {
            client: r.client,
            c_star: c_star[r.client],
            l_star: l_star[r.client],
            facility: r.facility,
            connection: r.connection,
            time: r.time,
            connection_slack: 39.0 * c_star[r.client] - r.connection,
            latency_slack: 384.0 * l_star[r.client] - r.time,
        })
        .collect();
    Ok(RelatedOutcome {
        solution,
        phases,
        clients,
        facility_cost: cost.facility_cost,
        lp_facility_cost: frac.facility_cost(inst),
        chosen,
        near,
    })
}

/// Spanning tree of the edge set, breadth first from `root`; edges that
/// would close a cycle are dropped.
fn tree_from_edges(root: usize, edges: &[(usize, usize)], tm: &TimeMetric) -> WeightedTree {
    let mut adj: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut tree = WeightedTree::new(Some(root));
    let mut seen = std::collections::BTreeSet::from([root]);
    let mut queue = VecDeque::from([(root, 0usize)]);
    while let Some((u, node)) = queue.pop_front() {
        for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(v) {
                let id = tree.add_child(node, tm.d(u, v), Some(v));
                queue.push_back((v, id));
            }
        }
    }
    tree
}
