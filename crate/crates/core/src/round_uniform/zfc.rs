//! Zero-facility-cost rounding: filter, spread, then order the facilities
//! by greedy min-sum set cover.

use super::spread::{spread_schedule, SpreadCertificate};
use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};
use crate::relaxations::FractionalMlufl;
use crate::CERT_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct MsscOrder {
    /// Every set, contributing ones first in pick order.
    pub order: Vec<usize>,
    /// How many leading sets in `order` cover something new.
    pub useful: usize,
    /// Sum over elements of the 1-based position of their first cover.
    pub cost: usize,
}

/// Cost of visiting `sets` in `order`; `None` if an element stays uncovered.
pub fn mssc_cost(sets: &[Vec<usize>], elements: usize, order: &[usize]) -> Option<usize> {
    let mut covered = vec![false; elements];
    let mut left = elements;
    let mut cost = 0;
    for (pos, &s) in order.iter().enumerate() {
        for &e in &sets[s] {
            if !covered[e] {
                covered[e] = true;
                left -= 1;
                cost += pos + 1;
            }
        }
    }
    (left == 0).then_some(cost)
}

/// Repeatedly picks the set covering the most uncovered elements (ties by
/// index). Sets that add nothing follow in index order.
pub fn greedy_mssc(sets: &[Vec<usize>], elements: usize) -> Result<MsscOrder> {
    let mut covered = vec![false; elements];
    let mut left = elements;
    let mut used = vec![false; sets.len()];
    let mut order = Vec::with_capacity(sets.len());
    let mut cost = 0;
    while left > 0 {
        let gain = |s: usize| {
            let mut seen = std::collections::BTreeSet::new();
            sets[s].iter().filter(|&&e| !covered[e] && seen.insert(e)).count()
        };
        let best = (0..sets.len())
            .filter(|&s| !used[s])
            .map(|s| (gain(s), s))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let Some((g, s)) = best.filter(|&(g, _)| g > 0) else {
            return Err(Error::InvalidParameter(format!("{left} element(s) belong to no set")));
        };
        used[s] = true;
        order.push(s);
        for &e in &sets[s] {
            if !covered[e] {
                covered[e] = true;
                left -= 1;
            }
        }
        cost += g * order.len();
    }
    let useful = order.len();
    order.extend((0..sets.len()).filter(|&s| !used[s]));
    Ok(MsscOrder { order, useful, cost })
}

#[derive(Debug, Clone)]
pub struct ZfcOutcome {
    pub solution: Solution,
    /// Facilities in visiting order; facility `order[p]` sits at position `p + 1`.
    pub order: Vec<usize>,
    pub assignment: Vec<usize>,
    /// `N_j = {i : c_ij ≤ C*_j / (1 − α)}`.
    pub near: Vec<Vec<usize>>,
    pub c_star: Vec<f64>,
    pub l_star: Vec<f64>,
    pub alpha: f64,
    pub spread: SpreadCertificate,
    /// Value of the set-cover LP solution read off the spread schedule.
    pub mssc_lp: f64,
    /// Total latency of the greedy order.
    pub latency: f64,
    /// `(4/α)·⌈1/α⌉·Σ_j L*_j`, monitored rather than enforced.
    pub latency_bound: f64,
}

impl ZfcOutcome {
    pub fn position(&self, i: usize) -> Option<usize> {
        self.order.iter().position(|&f| f == i).map(|p| p + 1)
    }

    /// Connection and spreading certificates; these must always hold.
    pub fn violations(&self, inst: &Instance) -> Vec<String> {
        let mut out = Vec::new();
        for (j, &i) in self.assignment.iter().enumerate() {
            let bound = self.c_star[j] / (1.0 - self.alpha);
            if inst.c[i][j] > bound + CERT_TOL {
                out.push(format!("client {j}: connection {} > C*/(1−α) = {bound}", inst.c[i][j]));
            }
        }
        out.extend(self.spread.violations());
        out
    }

    pub fn latency_exceeded(&self) -> bool {
        self.latency > self.latency_bound + CERT_TOL
    }
}

pub(crate) fn ceil_inv(alpha: f64) -> usize {
    (1.0 / alpha - 1e-12).ceil() as usize
}

/// Rounds a uniform LP solution of a zero-facility-cost instance.
pub fn round_zfc(inst: &Instance, frac: &FractionalMlufl, alpha: f64) -> Result<ZfcOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if inst.f.iter().any(|&f| f != 0.0) {
        return Err(Error::InvalidParameter(
            "zero-cost rounding needs all facility costs zero".into(),
        ));
    }
    let (n, m) = (inst.n, inst.m);
    let nt = frac.num_times();
    let c_star: Vec<f64> = (0..m).map(|j| frac.c_star(inst, j)).collect();
    let l_star: Vec<f64> = (0..m).map(|j| frac.l_star(j)).collect();
    let near: Vec<Vec<usize>> = (0..m)
        .map(|j| {
            let bound = c_star[j] / (1.0 - alpha) + 1e-9;
            (0..n).filter(|&i| inst.c[i][j] <= bound).collect()
        })
        .collect();

    let mut hat = FractionalMlufl::zeros(n, m, frac.times.clone(), false);
    for i in 0..n {
        for t in 0..nt {
            hat.y[i][t] = frac.y[i][t] / alpha;
        }
    }
    for (j, nj) in near.iter().enumerate() {
        for &i in nj {
            for t in 0..nt {
                hat.x[i][j][t] = frac.x[i][j][t] / alpha;
            }
        }
    }
    let spread = spread_schedule(inst, &hat, ceil_inv(alpha))?;

    // Earliest unit of each client's spread mass, a feasible set-cover LP point.
    let mut mssc_lp = 0.0;
    for j in 0..m {
        let mut need = 1.0f64;
        for (t, &slot) in spread.frac.times.iter().enumerate() {
            let mass: f64 = (0..n).map(|i| spread.frac.x[i][j][t]).sum();
            let take = mass.min(need);
            mssc_lp += slot * take;
            need -= take;
            if need <= 0.0 {
                break;
            }
        }
    }

    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, nj) in near.iter().enumerate() {
        for &i in nj {
            sets[i].push(j);
        }
    }
    let greedy = greedy_mssc(&sets, m)?;
    let order: Vec<usize> = greedy.order[..greedy.useful].to_vec();
    let assignment: Vec<usize> = (0..m)
        .map(|j| {
            *order
                .iter()
                .find(|&&i| near[j].contains(&i))
                .expect("greedy covers every client")
        })
        .collect();
    let latency_bound = 4.0 / alpha * ceil_inv(alpha) as f64 * l_star.iter().sum::<f64>();
    Ok(ZfcOutcome {
        solution: Solution::single_route(order.clone(), assignment.clone()),
        order,
        assignment,
        near,
        c_star,
        l_star,
        alpha,
        spread: spread.certificate,
        mssc_lp,
        latency: greedy.cost as f64,
        latency_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, EvalMode, Family, GenSpec, Tag};
    use crate::metric::Metric;
    use crate::relaxations::solve_uniform_lp;

    /// Elements {1,2,3}; A = {1,2}, B = {3}.
    fn desk_mssc() -> Instance {
        let inf = f64::INFINITY;
        let mut inst = Instance::new(
            vec![0.0, 0.0],
            vec![vec![0.0, 0.0, inf], vec![inf, inf, 0.0]],
            Metric::uniform(3),
        );
        inst.tags = vec![Tag::Uniform, Tag::Zfc];
        inst
    }

    #[test]
    fn greedy_on_two_sets() {
        let sets = vec![vec![0, 1], vec![2]];
        let g = greedy_mssc(&sets, 3).unwrap();
        assert_eq!(g.order, vec![0, 1]);
        assert_eq!(g.cost, 4);
        assert_eq!(mssc_cost(&sets, 3, &[1, 0]), Some(5));
    }

    #[test]
    fn greedy_disjoint_singletons() {
        let sets: Vec<Vec<usize>> = (0..5).map(|e| vec![e]).collect();
        assert_eq!(greedy_mssc(&sets, 5).unwrap().cost, 15);
    }

    #[test]
    fn greedy_nested_sets_pick_the_larger() {
        let sets = vec![vec![1], vec![0, 1, 2]];
        let g = greedy_mssc(&sets, 3).unwrap();
        assert_eq!(g.order, vec![1, 0]);
        assert_eq!(g.useful, 1);
        assert!(greedy_mssc(&[vec![0]], 2).is_err());
    }

    #[test]
    fn desk_mssc_latency() {
        let inst = desk_mssc();
        let (frac, _) = solve_uniform_lp(&inst, 1).unwrap();
        let out = round_zfc(&inst, &frac, 8.0 / 9.0).unwrap();
        assert_eq!(out.latency, 4.0);
        assert_eq!(out.solution.routes, vec![vec![0, 1]]);
        assert_eq!(inst.evaluate(&out.solution, EvalMode::Sum).unwrap().total, 4.0);
        assert!(out.violations(&inst).is_empty());
    }

    #[test]
    fn integral_lp_is_a_fixed_point() {
        // one facility per client group, c = 0 inside, LP integral
        let inst = desk_mssc();
        let mut frac = FractionalMlufl::zeros(2, 3, vec![1.0, 2.0], false);
        frac.y[0][0] = 1.0;
        frac.y[1][1] = 1.0;
        frac.x[0][0][0] = 1.0;
        frac.x[0][1][0] = 1.0;
        frac.x[1][2][1] = 1.0;
        let out = round_zfc(&inst, &frac, 8.0 / 9.0).unwrap();
        assert_eq!(out.latency, frac.objective(&inst));
    }

    #[test]
    fn bad_alpha_and_costs() {
        let inst = desk_mssc();
        let frac = FractionalMlufl::zeros(2, 3, vec![1.0, 2.0], false);
        assert!(round_zfc(&inst, &frac, 1.0).is_err());
        assert!(round_zfc(&inst, &frac, 0.0).is_err());
        let mut paid = inst.clone();
        paid.f[0] = 1.0;
        assert!(round_zfc(&paid, &frac, 0.5).is_err());
    }

    #[test]
    fn random_zfc_certificates() {
        for s in 0..8 {
            let inst = generate(&GenSpec::new(Family::Zfc, 6, 7), 300 + s).unwrap();
            let (frac, lp) = solve_uniform_lp(&inst, 1).unwrap();
            let out = round_zfc(&inst, &frac, 8.0 / 9.0).unwrap();
            assert!(out.violations(&inst).is_empty(), "{:?}", out.violations(&inst));
            let cost = inst.evaluate(&out.solution, EvalMode::Sum).unwrap().total;
            assert!(cost >= lp - 1e-6);
        }
    }
}
