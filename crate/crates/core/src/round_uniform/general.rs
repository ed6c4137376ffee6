//! Randomized rounding for uniform instances with arbitrary costs.

use rand::Rng;
use serde::Serialize;

use super::spread::{spread_schedule, SpreadCertificate};
use super::{normalize, Schedule};
use crate::error::Result;
use crate::instance::{Instance, Solution};
use crate::relaxations::FractionalMlufl;
use crate::rng::rng_from_seed;
use crate::CERT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformClient {
    pub client: usize,
    pub c_star: f64,
    pub l_star: f64,
    pub facility: usize,
    /// Slot of the chosen pair before spreading.
    pub slot: usize,
    pub connection: f64,
    /// Position after spreading.
    pub final_slot: usize,
    /// Whether step U2 had to open the fallback facility.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct UniformGeneralOutcome {
    pub solution: Solution,
    /// Spread capacity-one schedule the solution is read from.
    pub schedule: Schedule,
    /// Largest number of pairs opened in one slot.
    pub k: usize,
    pub clients: Vec<UniformClient>,
    pub opened: usize,
    pub spread: SpreadCertificate,
}

impl UniformGeneralOutcome {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.clients {
            let pre = c.connection + c.slot as f64;
            if pre > 2.0 * (c.c_star + c.l_star) + CERT_TOL {
                out.push(format!(
                    "client {}: {} + {} > 2·({} + {})",
                    c.client, c.connection, c.slot, c.c_star, c.l_star
                ));
            }
            if c.final_slot > self.k * c.slot {
                out.push(format!(
                    "client {}: slot {} > {}·{}",
                    c.client, c.final_slot, self.k, c.slot
                ));
            }
        }
        out.extend(self.spread.violations());
        out
    }
}

/// Opens each `(i, t)` with probability `min(4 ln m · y_{i,t}, 1)`, adds the
/// cheapest pair of `N_j` for every client left without one, assigns each
/// client to its cheapest open pair in `N_j`, and spreads the result.
pub fn round_uniform_general(inst: &Instance, frac: &FractionalMlufl, seed: u64) -> Result<UniformGeneralOutcome> {
    let frac = normalize(frac);
    let (n, m) = (inst.n, inst.m);
    let nt = frac.num_times();
    let scale = 4.0 * (m as f64).ln();
    let mut rng = rng_from_seed(seed);
    let mut open = vec![vec![false; nt]; n];
    for i in 0..n {
        for t in 0..nt {
            let u: f64 = rng.gen();
            open[i][t] = u < (scale * frac.y[i][t]).min(1.0);
        }
    }

    let slot = |t: usize| (t + 1) as f64;
    let mut picks = Vec::with_capacity(m);
    for j in 0..m {
        let c_star = frac.c_star(inst, j);
        let l_star = frac.l_star(j);
        let limit = 2.0 * (c_star + l_star) + 1e-9;
        let near = |i: usize, t: usize| inst.c[i][j].is_finite() && inst.c[i][j] + slot(t) <= limit;
        let hit = (0..n).any(|i| (0..nt).any(|t| open[i][t] && near(i, t)));
        let mut fallback = false;
        if !hit {
            // (i_j, 1) ∈ N_j whenever (i_j, t) ∈ N_j
            let ij = (0..n)
                .filter(|&i| (0..nt).any(|t| near(i, t)))
                .min_by(|&a, &b| inst.f[a].total_cmp(&inst.f[b]).then(a.cmp(&b)))
                .expect("N_j holds half the client's mass");
            open[ij][0] = true;
            fallback = true;
        }
        picks.push((c_star, l_star, fallback));
    }
    let mut assign = Vec::with_capacity(m);
    for j in 0..m {
        let limit = 2.0 * (picks[j].0 + picks[j].1) + 1e-9;
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for t in 0..nt {
                let v = inst.c[i][j] + slot(t);
                if open[i][t] && inst.c[i][j].is_finite() && v <= limit && best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, t));
                }
            }
        }
        let (_, i, t) = best.expect("U2 leaves an open pair in N_j");
        assign.push((i, t));
    }

    let k = (0..nt)
        .map(|t| (0..n).filter(|&i| open[i][t]).count())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut integral = FractionalMlufl::zeros(n, m, frac.times.clone(), false);
    for i in 0..n {
        for t in 0..nt {
            if open[i][t] {
                integral.y[i][t] = 1.0;
            }
        }
    }
    for (j, &(i, t)) in assign.iter().enumerate() {
        integral.x[i][j][t] = 1.0;
    }
    let spread = spread_schedule(inst, &integral, k)?;
    let schedule = Schedule::from_integral(&spread.frac);

    let clients = (0..m)
        .map(|j| {
            let (i, t) = assign[j];
            UniformClient {
                client: j,
                c_star: picks[j].0,
                l_star: picks[j].1,
                facility: i,
                slot: t + 1,
                connection: inst.c[i][j],
                final_slot: schedule.assignment[j].1,
                fallback: picks[j].2,
            }
        })
        .collect();
    let opened = open.iter().flatten().filter(|&&o| o).count();
    Ok(UniformGeneralOutcome {
        solution: schedule.to_solution(),
        schedule,
        k,
        clients,
        opened,
        spread: spread.certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, EvalMode, Family, GenSpec};
    use crate::metric::Metric;
    use crate::relaxations::solve_uniform_lp;

    #[test]
    fn integral_input_is_a_fixed_point() {
        let mut inst = Instance::new(vec![1.0, 2.0], vec![vec![0.0, 5.0], vec![5.0, 0.0]], Metric::uniform(3));
        inst.tags.push(crate::instance::Tag::Uniform);
        let mut frac = FractionalMlufl::zeros(2, 2, vec![1.0, 2.0], false);
        frac.y[0][0] = 1.0;
        frac.y[1][1] = 1.0;
        frac.x[0][0][0] = 1.0;
        frac.x[1][1][1] = 1.0;
        for seed in 0..20 {
            let out = round_uniform_general(&inst, &frac, seed).unwrap();
            assert_eq!(out.k, 1);
            assert_eq!(out.solution.routes, vec![vec![0, 1]]);
            assert_eq!(out.solution.assignment, vec![0, 1]);
            assert!(out.violations().is_empty());
        }
    }

    #[test]
    fn random_instances_meet_certificates() {
        for s in 0..5 {
            let inst = generate(&GenSpec::new(Family::Uniform, 6, 6), 40 + s).unwrap();
            let (frac, lp) = solve_uniform_lp(&inst, 1).unwrap();
            for seed in 0..10 {
                let out = round_uniform_general(&inst, &frac, seed).unwrap();
                assert!(out.violations().is_empty(), "{:?}", out.violations());
                let cost = inst.evaluate(&out.solution, EvalMode::Sum).unwrap().total;
                assert!(cost >= lp - 1e-6);
            }
        }
    }
}
