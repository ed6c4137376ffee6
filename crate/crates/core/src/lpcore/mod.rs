//! LP representation, simplex solver, max flow and the cutting-plane driver.

mod cutting;
mod dump;
mod maxflow;
mod model;
mod simplex;

pub use cutting::{cutting_plane_solve, CutRound, CuttingPlaneResult, SeparationOracle, CUT_TOL};
pub use dump::to_lp_format;
pub use maxflow::{max_flow, FlowNetwork, MaxFlow};
pub use model::{Constraint, LpModel, Sense, Variable};
pub use simplex::{solve_lp, solve_lp_with, LpSolution, LpStatus, Simplex, SimplexOptions};

/// Feasibility tolerance promised for returned primal solutions.
pub const FEAS_TOL: f64 = 1e-7;
