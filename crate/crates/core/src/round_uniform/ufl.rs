//! Deterministic filter-and-cluster rounding for facility location, used on
//! the latency-free part of a metric uniform instance.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::relaxations::FractionalMlufl;
use crate::CERT_TOL;

/// Facility-location LP point: `x[i][j]`, `y[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UflFrac {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl UflFrac {
    /// Sums the time-indexed values over time, after scaling every client's
    /// assignment to total one.
    pub fn from_mlufl(frac: &FractionalMlufl) -> Self {
        let x = (0..frac.n)
            .map(|i| {
                (0..frac.m)
                    .map(|j| {
                        let cov = frac.coverage(j);
                        let s: f64 = frac.x[i][j].iter().sum();
                        if cov > 0.0 {
                            s / cov
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let y = frac.y.iter().map(|row| row.iter().sum()).collect();
        UflFrac { x, y }
    }

    pub fn facility_cost(&self, inst: &Instance) -> f64 {
        self.y.iter().zip(&inst.f).map(|(y, f)| y * f).sum()
    }

    pub fn c_star(&self, inst: &Instance, j: usize) -> f64 {
        (0..self.x.len())
            .filter(|&i| self.x[i][j] > 0.0)
            .map(|i| inst.c[i][j] * self.x[i][j])
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct UflOutcome {
    pub open: Vec<usize>,
    pub assignment: Vec<usize>,
    pub centers: Vec<usize>,
    pub beta: f64,
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub lp_facility_cost: f64,
    pub c_star: Vec<f64>,
}

impl UflOutcome {
    /// Facility cost within `1/β` of the LP and every client within
    /// `3/(1−β)` of its LP connection cost.
    pub fn violations(&self, inst: &Instance) -> Vec<String> {
        let mut out = Vec::new();
        if self.facility_cost > self.lp_facility_cost / self.beta + CERT_TOL {
            out.push(format!(
                "facility cost {} > {} / β",
                self.facility_cost, self.lp_facility_cost
            ));
        }
        let rho = 3.0 / (1.0 - self.beta);
        for (j, &i) in self.assignment.iter().enumerate() {
            if inst.c[i][j] > rho * self.c_star[j] + CERT_TOL {
                out.push(format!(
                    "client {j}: connection {} > {rho}·{}",
                    inst.c[i][j], self.c_star[j]
                ));
            }
        }
        let total_c: f64 = self.c_star.iter().sum();
        if self.connection_cost > rho * total_c + CERT_TOL {
            out.push(format!("connection {} > {rho}·{total_c}", self.connection_cost));
        }
        out
    }
}

/// Filters each client to `N_j = {i : c_ij ≤ C*_j/(1−β)}`, then takes
/// clients by increasing `C*_j`: a client whose `N_j` misses every earlier
/// center's becomes a center and opens the cheapest facility in `N_j`.
/// Clients connect to their nearest open facility. Needs metric costs.
pub fn round_ufl(inst: &Instance, frac: &UflFrac, beta: f64) -> Result<UflOutcome> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    let (n, m) = (inst.n, inst.m);
    let c_star: Vec<f64> = (0..m).map(|j| frac.c_star(inst, j)).collect();
    let near: Vec<Vec<usize>> = (0..m)
        .map(|j| {
            let g = c_star[j] / (1.0 - beta) + 1e-9;
            (0..n).filter(|&i| inst.c[i][j] <= g && frac.x[i][j] > 0.0).collect()
        })
        .collect();
    let mut by_cost: Vec<usize> = (0..m).collect();
    by_cost.sort_by(|&a, &b| c_star[a].total_cmp(&c_star[b]).then(a.cmp(&b)));
    let mut taken = vec![false; n];
    let mut centers = Vec::new();
    let mut open = Vec::new();
    for &j in &by_cost {
        if near[j].iter().any(|&i| taken[i]) {
            continue;
        }
        let Some(&i) = near[j]
            .iter()
            .min_by(|&&a, &&b| inst.f[a].total_cmp(&inst.f[b]).then(a.cmp(&b)))
        else {
            return Err(Error::InvalidFractional(format!("client {j} has no LP mass near it")));
        };
        for &k in &near[j] {
            taken[k] = true;
        }
        centers.push(j);
        open.push(i);
    }
    open.sort_unstable();
    open.dedup();
    let assignment: Vec<usize> = (0..m)
        .map(|j| {
            *open
                .iter()
                .min_by(|&&a, &&b| inst.c[a][j].total_cmp(&inst.c[b][j]).then(a.cmp(&b)))
                .expect("at least one facility is open")
        })
        .collect();
    Ok(UflOutcome {
        facility_cost: open.iter().map(|&i| inst.f[i]).sum(),
        connection_cost: assignment.iter().enumerate().map(|(j, &i)| inst.c[i][j]).sum(),
        lp_facility_cost: frac.facility_cost(inst),
        open,
        assignment,
        centers,
        beta,
        c_star,
    })
}
