//! Roundings for the uniform time metric, where every hop takes one unit
//! and a facility's activation time is its slot in the order.
//!
//! * [`spread_schedule`] removes slot overloads at a bounded latency cost.
//! * [`round_uniform_general`] handles arbitrary costs with `O(ln m)` loss.
//! * [`round_zfc`] filters, spreads and orders by greedy min-sum set cover
//!   when facilities are free.
//! * [`round_ufl`] and [`combine_metric_uniform`] solve the metric case by
//!   merging a facility-location solution with a zero-cost one.

mod combine;
mod general;
mod spread;
mod ufl;
mod zfc;

pub use combine::{
    combine_metric_uniform, ratio_factor, round_metric_uniform, CombineClient, CombineOutcome, MetricUniformOutcome,
    MetricUniformParams,
};
pub use general::{round_uniform_general, UniformClient, UniformGeneralOutcome};
pub use spread::{spread_schedule, Spread, SpreadCertificate};
pub use ufl::{round_ufl, UflFrac, UflOutcome};
pub use zfc::{greedy_mssc, mssc_cost, round_zfc, MsscOrder, ZfcOutcome};

use crate::instance::Solution;
use crate::relaxations::FractionalMlufl;

/// Facilities per slot and the `(facility, slot)` each client uses. Slots
/// are numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub slots: Vec<Vec<usize>>,
    pub assignment: Vec<(usize, usize)>,
}

impl Schedule {
    /// Reads an integral slot solution (values above one half count as set).
    pub fn from_integral(frac: &FractionalMlufl) -> Self {
        let nt = frac.num_times();
        let slots = (0..nt)
            .map(|t| (0..frac.n).filter(|&i| frac.y[i][t] > 0.5).collect())
            .collect();
        let assignment = (0..frac.m)
            .map(|j| {
                (0..nt)
                    .find_map(|t| (0..frac.n).find(|&i| frac.x[i][j][t] > 0.5).map(|i| (i, t + 1)))
                    .expect("every client is assigned")
            })
            .collect();
        Schedule { slots, assignment }
    }

    pub fn capacity(&self) -> usize {
        self.slots.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Routes for the schedule. Facilities no client uses are left out and
    /// empty slots are skipped, which can only move a facility earlier. With
    /// capacity `k`, the `q`-th facility of every slot goes to route `q`.
    pub fn to_solution(&self) -> Solution {
        let used: std::collections::BTreeSet<usize> = self.assignment.iter().map(|&(i, _)| i).collect();
        let mut seen = std::collections::BTreeSet::new();
        let mut routes: Vec<Vec<usize>> = vec![Vec::new(); self.capacity().max(1)];
        for slot in &self.slots {
            let fresh: Vec<usize> = slot
                .iter()
                .copied()
                .filter(|i| used.contains(i) && seen.insert(*i))
                .collect();
            for (q, i) in fresh.into_iter().enumerate() {
                routes[q].push(i);
            }
        }
        routes.retain(|r| !r.is_empty());
        if routes.is_empty() {
            routes.push(Vec::new());
        }
        Solution {
            routes,
            assignment: self.assignment.iter().map(|&(i, _)| i).collect(),
        }
    }
}

/// Scales every client's assignment to total one and sets
/// `y_{i,t} = max_j x_{ij,t}`. Neither step raises the cost.
pub fn normalize(frac: &FractionalMlufl) -> FractionalMlufl {
    let mut out = frac.clone();
    for j in 0..frac.m {
        let cov = frac.coverage(j);
        if cov > 0.0 {
            for i in 0..frac.n {
                for x in out.x[i][j].iter_mut() {
                    *x /= cov;
                }
            }
        }
    }
    for i in 0..frac.n {
        for t in 0..frac.num_times() {
            out.y[i][t] = (0..frac.m).map(|j| out.x[i][j][t]).fold(0.0, f64::max);
        }
    }
    out
}
