//! Metric uniform instances: merge a facility-location solution with a
//! zero-facility-cost one by moving every facility of the latter to its
//! nearest open facility of the former.

use serde::Serialize;

use super::ufl::{round_ufl, UflFrac};
use super::zfc::{ceil_inv, round_zfc, ZfcOutcome};
use crate::error::{Error, Result};
use crate::exact::exact_ufl;
use crate::instance::{EvalMode, Instance, Solution, Tag};
use crate::relaxations::solve_uniform_lp;
use crate::CERT_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombineClient {
    pub client: usize,
    /// `φ(j) = μ(σ₂(j))`.
    pub facility: usize,
    pub sigma1: usize,
    pub sigma2: usize,
    pub connection: f64,
    /// `c_{σ₁(j)j} + 2·c_{σ₂(j)j}`.
    pub connection_bound: f64,
    /// Position of `φ(j)` in the merged order.
    pub kappa: usize,
    /// Position of `σ₂(j)` in the zero-cost order.
    pub pi: usize,
}

#[derive(Debug, Clone)]
pub struct CombineOutcome {
    pub solution: Solution,
    /// `(i, μ(i))` for every facility `i` of the zero-cost solution.
    pub mu: Vec<(usize, usize)>,
    pub clients: Vec<CombineClient>,
    /// `Σ_{F₁} f + Σ_j (c_{σ₁(j)j} + 2c_{σ₂(j)j} + π(σ₂(j)))`.
    pub bound: f64,
    pub cost: f64,
}

impl CombineOutcome {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.clients {
            if c.connection > c.connection_bound + CERT_TOL {
                out.push(format!(
                    "client {}: connection {} > {}",
                    c.client, c.connection, c.connection_bound
                ));
            }
            if c.kappa > c.pi {
                out.push(format!("client {}: position {} > {}", c.client, c.kappa, c.pi));
            }
        }
        if self.cost > self.bound + CERT_TOL {
            out.push(format!("cost {} > {}", self.cost, self.bound));
        }
        out
    }
}

/// Merges `(F₁, σ₁)` with the ordered zero-cost solution `(order₂, σ₂)`.
/// Connection costs must come from a metric over facilities and clients.
pub fn combine_metric_uniform(
    inst: &Instance,
    f1: &[usize],
    sigma1: &[usize],
    order2: &[usize],
    sigma2: &[usize],
) -> Result<CombineOutcome> {
    if f1.is_empty() {
        return Err(Error::InvalidParameter(
            "facility-location solution opens nothing".into(),
        ));
    }
    if sigma1.len() != inst.m || sigma2.len() != inst.m {
        return Err(Error::InvalidParameter("assignments must cover every client".into()));
    }
    let pi = |i: usize| order2.iter().position(|&f| f == i).map(|p| p + 1);
    let nearest = |i: usize| {
        *f1.iter()
            .min_by(|&&a, &&b| {
                inst.facility_distance(i, a)
                    .total_cmp(&inst.facility_distance(i, b))
                    .then(a.cmp(&b))
            })
            .expect("F₁ is nonempty")
    };
    let mu: Vec<(usize, usize)> = order2.iter().map(|&i| (i, nearest(i))).collect();
    // order₂ is already by position, so first sight of μ(i) is its earliest slot
    let mut merged: Vec<usize> = Vec::new();
    for &(_, g) in &mu {
        if !merged.contains(&g) {
            merged.push(g);
        }
    }
    let mut clients = Vec::with_capacity(inst.m);
    let mut assignment = Vec::with_capacity(inst.m);
    for j in 0..inst.m {
        let s2 = sigma2[j];
        let p = pi(s2).ok_or_else(|| Error::InvalidParameter(format!("client {j} uses an unordered facility")))?;
        let phi = mu[p - 1].1;
        let kappa = merged.iter().position(|&g| g == phi).expect("φ(j) is merged") + 1;
        assignment.push(phi);
        clients.push(CombineClient {
            client: j,
            facility: phi,
            sigma1: sigma1[j],
            sigma2: s2,
            connection: inst.c[phi][j],
            connection_bound: inst.c[sigma1[j]][j] + 2.0 * inst.c[s2][j],
            kappa,
            pi: p,
        });
    }
    let bound = f1.iter().map(|&i| inst.f[i]).sum::<f64>()
        + clients.iter().map(|c| c.connection_bound + c.pi as f64).sum::<f64>();
    let solution = Solution::single_route(merged, assignment);
    let cost = inst.evaluate(&solution, EvalMode::Sum)?.total;
    Ok(CombineOutcome {
        solution,
        mu,
        clients,
        bound,
        cost,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricUniformParams {
    pub alpha: f64,
    pub beta: f64,
    /// Open at most this many facilities, using the exact cardinality-capped
    /// facility-location oracle in place of the LP rounding.
    pub kmedian: Option<usize>,
}

impl Default for MetricUniformParams {
    fn default() -> Self {
        MetricUniformParams {
            alpha: 8.0 / 9.0,
            beta: 0.5,
            kmedian: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricUniformOutcome {
    pub combine: CombineOutcome,
    pub f1: Vec<usize>,
    pub sigma1: Vec<usize>,
    pub zfc: ZfcOutcome,
    pub ufl_violations: Vec<String>,
    pub lp_value: f64,
    /// `max{1/β, 3/(1−β) + 2/(1−α), (4/α)⌈1/α⌉}`.
    pub factor: f64,
}

impl MetricUniformOutcome {
    pub fn violations(&self, inst: &Instance) -> Vec<String> {
        let mut out = self.combine.violations();
        out.extend(self.ufl_violations.iter().cloned());
        out.extend(self.zfc.violations(inst));
        if self.combine.cost > self.factor * self.lp_value + CERT_TOL {
            out.push(format!(
                "cost {} > {}·{}",
                self.combine.cost, self.factor, self.lp_value
            ));
        }
        out
    }
}

pub fn ratio_factor(alpha: f64, beta: f64) -> f64 {
    let a = 1.0 / beta;
    let b = 3.0 / (1.0 - beta) + 2.0 / (1.0 - alpha);
    let c = 4.0 / alpha * ceil_inv(alpha) as f64;
    a.max(b).max(c)
}

/// Solves the uniform LP once and feeds it to both subroutines.
pub fn round_metric_uniform(inst: &Instance, params: &MetricUniformParams) -> Result<MetricUniformOutcome> {
    let (frac, lp_value) = solve_uniform_lp(inst, 1)?;
    let (f1, sigma1, ufl_violations) = match params.kmedian {
        Some(k) => {
            let sol = exact_ufl(inst, Some(k))?;
            (sol.open, sol.assignment, Vec::new())
        }
        None => {
            let out = round_ufl(inst, &UflFrac::from_mlufl(&frac), params.beta)?;
            let v = out.violations(inst);
            (out.open, out.assignment, v)
        }
    };
    let mut free = inst.clone();
    free.f = vec![0.0; inst.n];
    if !free.has_tag(Tag::Zfc) {
        free.tags.push(Tag::Zfc);
    }
    let zfc = round_zfc(&free, &frac, params.alpha)?;
    let combine = combine_metric_uniform(inst, &f1, &sigma1, &zfc.order, &zfc.assignment)?;
    Ok(MetricUniformOutcome {
        combine,
        f1,
        sigma1,
        zfc,
        ufl_violations,
        lp_value,
        factor: ratio_factor(params.alpha, params.beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, Family, GenSpec};
    use crate::metric::Metric;

    #[test]
    fn identical_facility_sets_keep_the_zero_cost_order() {
        let fm = Metric::from_rows(&[
            vec![0.0, 4.0, 1.0, 1.0, 4.0],
            vec![4.0, 0.0, 1.0, 4.0, 1.0],
            vec![1.0, 1.0, 0.0, 2.0, 2.0],
            vec![1.0, 4.0, 2.0, 0.0, 5.0],
            vec![4.0, 1.0, 2.0, 5.0, 0.0],
        ]);
        let mut inst = Instance::new(vec![1.0, 1.0], vec![vec![1.0, 4.0], vec![4.0, 1.0]], Metric::uniform(3));
        inst.full_metric = Some(fm);
        let out = combine_metric_uniform(&inst, &[0, 1], &[0, 1], &[1, 0], &[0, 1]).unwrap();
        assert_eq!(out.solution.routes, vec![vec![1, 0]]);
        assert_eq!(out.solution.assignment, vec![0, 1]);
        assert!(out.violations().is_empty());
    }

    #[test]
    fn single_client_bound() {
        let fm = Metric::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]);
        let mut inst = Instance::new(vec![3.0], vec![vec![2.0]], Metric::uniform(2));
        inst.full_metric = Some(fm);
        let out = combine_metric_uniform(&inst, &[0], &[0], &[0], &[0]).unwrap();
        assert!(out.cost <= 3.0 + 2.0 + 2.0 * 2.0 + 1.0);
        assert_eq!(out.cost, 6.0);
    }

    #[test]
    fn factor_with_default_parameters() {
        assert!((ratio_factor(8.0 / 9.0, 0.5) - 24.0).abs() < 1e-9);
    }

    #[test]
    fn random_metric_uniform_pipeline() {
        for s in 0..6 {
            let inst = generate(&GenSpec::new(Family::MetricUniform, 5, 6), 800 + s).unwrap();
            let out = round_metric_uniform(&inst, &MetricUniformParams::default()).unwrap();
            assert!(out.violations(&inst).is_empty(), "{:?}", out.violations(&inst));
            assert!(out.combine.cost >= out.lp_value - 1e-6);
        }
    }

    #[test]
    fn kmedian_flag_caps_open_facilities() {
        let inst = generate(&GenSpec::new(Family::MetricUniform, 5, 6), 7).unwrap();
        let params = MetricUniformParams {
            kmedian: Some(2),
            ..Default::default()
        };
        let out = round_metric_uniform(&inst, &params).unwrap();
        assert!(out.combine.solution.open_facilities().len() <= 2);
        assert!(out.combine.violations().is_empty());
    }
}
