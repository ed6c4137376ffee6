//! Cutting-plane loop over a lazily separated constraint family.

use super::model::{Constraint, LpModel};
use super::simplex::{LpSolution, LpStatus, Simplex, SimplexOptions};
use crate::error::Result;

/// Violation threshold below which a row is not reported as a cut.
pub const CUT_TOL: f64 = 1e-6;

/// Returns rows violated by more than [`CUT_TOL`] at `primal`, or none.
pub trait SeparationOracle {
    fn separate(&mut self, primal: &[f64]) -> Vec<Constraint>;
}

impl<F: FnMut(&[f64]) -> Vec<Constraint>> SeparationOracle for F {
    fn separate(&mut self, primal: &[f64]) -> Vec<Constraint> {
        self(primal)
    }
}

#[derive(Debug, Clone)]
pub struct CutRound {
    pub round: usize,
    pub objective: f64,
    pub cuts: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CuttingPlaneResult {
    pub solution: LpSolution,
    /// Base model plus the cuts still present at the end; cuts that went
    /// slack were purged along the way.
    pub model: LpModel,
    pub rounds: usize,
    pub log: Vec<CutRound>,
}

impl CuttingPlaneResult {
    pub fn cut_count(&self) -> usize {
        self.log.iter().map(|r| r.cuts.len()).sum()
    }
}

/// Solves `base`, asks the oracle for violated rows, appends them and
/// re-optimises warm, until the oracle is silent or `max_rounds` LP solves
/// have happened (status `IterationLimit`). Cuts whose slack becomes basic
/// are dropped again to keep the tableau small.
pub fn cutting_plane_solve(
    base: LpModel,
    oracle: &mut dyn SeparationOracle,
    max_rounds: usize,
) -> Result<CuttingPlaneResult> {
    let mut simplex = Simplex::new(base, SimplexOptions::default())?;
    let mut status = simplex.solve();
    let mut log = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        if status != LpStatus::Optimal {
            break;
        }
        let sol = simplex.solution();
        let cuts = oracle.separate(&sol.primal);
        if cuts.is_empty() {
            break;
        }
        log.push(CutRound {
            round: rounds,
            objective: sol.objective,
            cuts: cuts.iter().map(|c| c.label.clone()).collect(),
        });
        if rounds >= max_rounds {
            status = LpStatus::IterationLimit;
            break;
        }
        status = simplex.add_rows(cuts)?;
        if status == LpStatus::Optimal {
            // Rows whose slack is basic carry a zero dual; dropping them keeps
            // the basis optimal.
            simplex.purge_slack_rows(f64::NEG_INFINITY);
        }
        if status == LpStatus::Optimal && simplex.solution().max_violation > 1e-7 {
            // Numerical drift after many warm pivots: rebuild from the rows.
            simplex = Simplex::new(simplex.into_model(), SimplexOptions::default())?;
            status = simplex.solve();
        }
    }
    let mut solution = simplex.solution();
    solution.status = status;
    Ok(CuttingPlaneResult {
        solution,
        model: simplex.into_model(),
        rounds,
        log,
    })
}
