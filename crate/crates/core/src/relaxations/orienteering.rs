//! Exact rooted orienteering by exhaustive search, used as the pricing
//! oracle of the path-column relaxation.

use crate::error::{Error, Result};
use crate::metric::Metric;

/// Default cap on the number of rewarded points searched exhaustively.
pub const ORIENTEERING_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Simple path from the root; length is the walk length.
    Path,
    /// Tree containing the root; length is its minimum spanning tree weight.
    Tree,
}

/// What a visited point earns.
#[derive(Debug, Clone)]
pub enum Rewards {
    /// `reward[v]` per metric point.
    Nodes(Vec<f64>),
    /// `(members, reward)` per group; a group pays once when any member is
    /// visited.
    Groups(Vec<(Vec<usize>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Visited points starting with the root (path order in path mode).
    pub nodes: Vec<usize>,
    pub length: f64,
    pub reward: f64,
}

/// Best reward reachable within `budget` from `root`. Points with no
/// positive reward are never visited.
pub fn orienteering_exact(
    metric: &Metric,
    root: usize,
    rewards: &Rewards,
    budget: f64,
    shape: Shape,
    limit: usize,
) -> Result<Route> {
    let search = Search::new(metric, root, rewards);
    if search.candidates.len() > limit {
        return Err(Error::TooLarge {
            what: "rewarded points for exhaustive orienteering",
            actual: search.candidates.len(),
            limit,
        });
    }
    Ok(match shape {
        Shape::Path => search.best_path(budget),
        Shape::Tree => search.best_tree(budget),
    })
}

struct Search<'a> {
    metric: &'a Metric,
    root: usize,
    candidates: Vec<usize>,
    /// For each candidate, the groups (or the single node slot) it pays for.
    pays: Vec<Vec<usize>>,
    slot_reward: Vec<f64>,
    root_reward: f64,
}

impl<'a> Search<'a> {
    fn new(metric: &'a Metric, root: usize, rewards: &Rewards) -> Self {
        let mut candidates = Vec::new();
        let mut pays = Vec::new();
        let mut slot_reward = Vec::new();
        let mut root_reward = 0.0;
        match rewards {
            Rewards::Nodes(r) => {
                root_reward = r.get(root).copied().unwrap_or(0.0).max(0.0);
                for v in 0..metric.len() {
                    if v != root && r.get(v).copied().unwrap_or(0.0) > 0.0 {
                        pays.push(vec![slot_reward.len()]);
                        slot_reward.push(r[v]);
                        candidates.push(v);
                    }
                }
            }
            Rewards::Groups(groups) => {
                let mut by_node = vec![Vec::new(); metric.len()];
                for (members, w) in groups {
                    if *w <= 0.0 {
                        continue;
                    }
                    if members.contains(&root) {
                        root_reward += w;
                        continue;
                    }
                    let slot = slot_reward.len();
                    slot_reward.push(*w);
                    for &v in members {
                        if !by_node[v].contains(&slot) {
                            by_node[v].push(slot);
                        }
                    }
                }
                for (v, slots) in by_node.into_iter().enumerate() {
                    if !slots.is_empty() {
                        candidates.push(v);
                        pays.push(slots);
                    }
                }
            }
        }
        Search {
            metric,
            root,
            candidates,
            pays,
            slot_reward,
            root_reward,
        }
    }

    fn gain(&self, c: usize, taken: &[u32]) -> f64 {
        self.pays[c]
            .iter()
            .filter(|&&s| taken[s] == 0)
            .map(|&s| self.slot_reward[s])
            .sum()
    }

    fn best_path(&self, budget: f64) -> Route {
        let k = self.candidates.len();
        let mut best = Route {
            nodes: vec![self.root],
            length: 0.0,
            reward: self.root_reward,
        };
        let mut state = PathState {
            order: Vec::with_capacity(k),
            used: vec![false; k],
            taken: vec![0; self.slot_reward.len()],
            remaining: self.slot_reward.iter().sum(),
        };
        self.extend(&mut state, self.root, 0.0, self.root_reward, budget, &mut best);
        best
    }

    fn extend(&self, st: &mut PathState, at: usize, len: f64, reward: f64, budget: f64, best: &mut Route) {
        if reward > best.reward + 1e-12 {
            best.reward = reward;
            best.length = len;
            best.nodes = std::iter::once(self.root)
                .chain(st.order.iter().map(|&c| self.candidates[c]))
                .collect();
        }
        if reward + st.remaining <= best.reward + 1e-12 {
            return;
        }
        for c in 0..self.candidates.len() {
            if st.used[c] {
                continue;
            }
            let v = self.candidates[c];
            let nl = len + self.metric.d(at, v);
            if nl > budget + 1e-9 {
                continue;
            }
            let g = self.gain(c, &st.taken);
            if g <= 0.0 {
                continue;
            }
            st.used[c] = true;
            st.order.push(c);
            for &s in &self.pays[c] {
                if st.taken[s] == 0 {
                    st.remaining -= self.slot_reward[s];
                }
                st.taken[s] += 1;
            }
            self.extend(st, v, nl, reward + g, budget, best);
            for &s in &self.pays[c] {
                st.taken[s] -= 1;
                if st.taken[s] == 0 {
                    st.remaining += self.slot_reward[s];
                }
            }
            st.order.pop();
            st.used[c] = false;
        }
    }

    fn best_tree(&self, budget: f64) -> Route {
        let k = self.candidates.len();
        let mut best = Route {
            nodes: vec![self.root],
            length: 0.0,
            reward: self.root_reward,
        };
        for mask in 1u64..(1u64 << k) {
            let chosen: Vec<usize> = (0..k).filter(|&c| mask >> c & 1 == 1).collect();
            let mut taken = vec![0u32; self.slot_reward.len()];
            let mut reward = self.root_reward;
            for &c in &chosen {
                reward += self.gain(c, &taken);
                for &s in &self.pays[c] {
                    taken[s] += 1;
                }
            }
            if reward <= best.reward + 1e-12 {
                continue;
            }
            let mut pts = vec![self.root];
            pts.extend(chosen.iter().map(|&c| self.candidates[c]));
            let length = mst_weight(self.metric, &pts);
            if length <= budget + 1e-9 {
                best = Route {
                    nodes: pts,
                    length,
                    reward,
                };
            }
        }
        best
    }
}

struct PathState {
    order: Vec<usize>,
    used: Vec<bool>,
    taken: Vec<u32>,
    remaining: f64,
}

/// Prim's algorithm on the complete graph over `pts`.
pub(crate) fn mst_weight(metric: &Metric, pts: &[usize]) -> f64 {
    let k = pts.len();
    if k <= 1 {
        return 0.0;
    }
    let mut in_tree = vec![false; k];
    let mut dist = vec![f64::INFINITY; k];
    dist[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..k {
        let u = (0..k)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .expect("a vertex remains");
        in_tree[u] = true;
        total += dist[u];
        for v in 0..k {
            if !in_tree[v] {
                dist[v] = dist[v].min(metric.d(pts[u], pts[v]));
            }
        }
    }
    total
}
