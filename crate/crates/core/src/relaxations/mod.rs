//! LP relaxations over a discretised time grid, with their separation and
//! pricing oracles.

mod colgen;
mod frac;
pub(crate) mod ml;
mod mlufl;
pub(crate) mod orienteering;
mod timescale;

pub use colgen::{max_pricing_violation, solve_ml_lp2_colgen, ColgenOptions, ColgenStatus, Lp2Solution, PathColumn};
pub use frac::{complete_edges, edge_index, FractionalMlufl};
pub use ml::{build_ml_lp1, ml_horizon, solve_ml_lp1, Lp1Layout, Lp1Oracle, Lp1Solution};
pub use mlufl::{
    build_mlufl_lp, build_uniform_lp, solve_lp_norm_guesses, solve_mlufl_lp, solve_uniform_lp, LatencyCap, MluflLayout,
    MluflLpOptions, MluflLpSolution, MluflOracle, NormGuess,
};
pub use orienteering::{orienteering_exact, Rewards, Route, Shape, ORIENTEERING_LIMIT};
pub use timescale::{horizon, TimeScale};

use crate::instance::Instance;

/// A connectivity row `Σ_{δ(S)} z_{e,t} ≥ Σ_{i∈S,t'≤t} x_{ij,t'}` found violated.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityViolation {
    pub client: usize,
    pub time_index: usize,
    pub set: Vec<usize>,
    pub amount: f64,
}

/// Exhaustive check of the connectivity rows over every nonempty `S ⊆ F`.
/// Returns the largest violation above `tol`, if any. Meant for `n ≤ 12`.
pub fn verify_connectivity(inst: &Instance, frac: &FractionalMlufl, tol: f64) -> Option<ConnectivityViolation> {
    let n = inst.n;
    assert!(n <= 20, "exhaustive connectivity check is limited to 20 facilities");
    let nt = frac.num_times();
    let root = n;
    let mut worst: Option<ConnectivityViolation> = None;
    for k in 0..nt {
        let z: Vec<f64> = frac.z.iter().map(|col| col[k]).collect();
        for mask in 1u32..(1 << n) {
            let inside = |u: usize| u != root && mask >> u & 1 == 1;
            let boundary: f64 = frac
                .edges
                .iter()
                .zip(&z)
                .filter(|(&(u, v), _)| inside(u) != inside(v))
                .map(|(_, &z)| z)
                .sum();
            for j in 0..inst.m {
                let demand: f64 = (0..n)
                    .filter(|&i| inside(i))
                    .map(|i| frac.x[i][j][..=k].iter().sum::<f64>())
                    .sum();
                let amount = demand - boundary;
                if amount > tol && worst.as_ref().is_none_or(|w| amount > w.amount) {
                    worst = Some(ConnectivityViolation {
                        client: j,
                        time_index: k,
                        set: (0..n).filter(|&i| inside(i)).collect(),
                        amount,
                    });
                }
            }
        }
    }
    worst
}
