//! Seeded batch runs: one LP per (algorithm, instance), then independent
//! rounding trials.

use std::time::Instant;

use mlufl::exact::{exact_ml, exact_mlufl, ExactLimits};
use mlufl::instance::{generate, read_instance};
use mlufl::relaxations::{
    ml_horizon, solve_lp_norm_guesses, solve_ml_lp1, solve_ml_lp2_colgen, solve_mlufl_lp, solve_uniform_lp,
    ColgenOptions, FractionalMlufl, Lp1Solution, Lp2Solution, MluflLpOptions, TimeScale,
};
use mlufl::rng::derive_seed;
use mlufl::round_general::{grid_for, round_general, GeneralParams, PhaseMode};
use mlufl::round_ml::{round_ml_lp1, round_ml_lp2, Lp1Mode};
use mlufl::round_related::round_related;
use mlufl::round_uniform::{round_metric_uniform, round_uniform_general, round_zfc, MetricUniformParams};
use mlufl::{par, EvalMode, Instance, LatencyFn, Solution, Tag, CERT_TOL};

use crate::config::{Algo, ExperimentConfig, Objective, Source};
use crate::Failure;

/// Instance `i` is generated from `derive_seed(seed, 2i)`; its trials draw
/// from `derive_seed(derive_seed(seed, 2i + 1), t)`.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, 2 * index as u64)
}

pub fn trial_seed(seed: u64, index: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(seed, 2 * index as u64 + 1), trial as u64)
}

pub fn load_instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>, Failure> {
    let mut list = match &cfg.source {
        Source::File(path) => vec![read_instance(path)?],
        Source::Generated { spec, count } => (0..*count)
            .map(|i| generate(spec, instance_seed(cfg.seed, i)))
            .collect::<Result<_, _>>()?,
    };
    for inst in &mut list {
        inst.k = cfg.k;
        if cfg.budget.is_some() {
            inst.budget = cfg.budget;
        }
        if cfg.objective == Objective::Power {
            inst.latency = LatencyFn::Power { p: cfg.p };
        }
    }
    Ok(list)
}

/// Rejects algorithm and instance pairs the algorithm has no guarantee for.
pub fn check_compat(algo: Algo, inst: &Instance) -> Result<(), Failure> {
    let why = match algo {
        Algo::Related if inst.related_factor().is_none() => Some("a related instance"),
        Algo::UniformGeneral | Algo::Zfc | Algo::MetricUniform if !inst.is_uniform() => Some("a uniform time metric"),
        Algo::Zfc if inst.f.iter().any(|&f| f != 0.0) => Some("zero facility costs"),
        Algo::MetricUniform if inst.full_metric.is_none() => Some("metric connection costs"),
        Algo::MlLp1 if inst.has_tag(Tag::Mgl) => Some("singleton groups"),
        Algo::General | Algo::Related if inst.has_tag(Tag::Mgl) => Some("finite connection costs"),
        _ => None,
    };
    match why {
        Some(w) => Err(Failure::Usage(format!("{} needs {w}", algo.id()))),
        None => Ok(()),
    }
}

/// Client groups of a group-latency instance: the facilities that can serve each client.
pub fn ml_groups(inst: &Instance) -> Option<Vec<Vec<usize>>> {
    inst.has_tag(Tag::Mgl).then(|| {
        (0..inst.m)
            .map(|j| (0..inst.n).filter(|&i| inst.c[i][j].is_finite()).collect())
            .collect()
    })
}

fn ml_grid(inst: &Instance, eps: f64) -> Result<TimeScale, Failure> {
    let h = ml_horizon(&inst.d);
    let ts = if eps == 0.0 {
        TimeScale::full(h)
    } else {
        TimeScale::geometric(eps, h)?
    };
    Ok(ts.with_zero_for_metric(&inst.d, inst.root()))
}

/// Relaxation solved once per (algorithm, instance).
pub enum Prepared {
    Mlufl(FractionalMlufl),
    /// The metric uniform pipeline solves its own LP and is deterministic.
    MetricUniform,
    Lp1(Lp1Solution),
    Lp2(Lp2Solution, Option<Vec<Vec<usize>>>),
}

pub struct Relaxation {
    pub value: f64,
    pub prepared: Prepared,
    pub detail: String,
}

pub fn prepare(algo: Algo, inst: &Instance, cfg: &ExperimentConfig) -> Result<Relaxation, Failure> {
    check_compat(algo, inst)?;
    let opts = MluflLpOptions {
        routes: cfg.k,
        ..MluflLpOptions::default()
    };
    Ok(match algo {
        Algo::General | Algo::Related => {
            let ts = grid_for(inst, cfg.eps)?;
            if cfg.objective == Objective::Norm {
                let g = solve_lp_norm_guesses(inst, &ts, cfg.p, &opts)?;
                Relaxation {
                    value: g.bound,
                    detail: format!("grid {} guesses {} lat {}", ts.len(), g.guesses_tried, g.lat),
                    prepared: Prepared::Mlufl(g.frac),
                }
            } else {
                let lp = solve_mlufl_lp(inst, &ts, &opts)?;
                Relaxation {
                    value: lp.value,
                    detail: format!(
                        "grid {} rounds {} cuts {} {:?}",
                        ts.len(),
                        lp.rounds,
                        lp.cuts,
                        lp.status
                    ),
                    prepared: Prepared::Mlufl(lp.frac),
                }
            }
        }
        Algo::UniformGeneral | Algo::Zfc => {
            let (frac, value) = solve_uniform_lp(inst, 1)?;
            Relaxation {
                value,
                detail: format!("slots {}", frac.times.len()),
                prepared: Prepared::Mlufl(frac),
            }
        }
        Algo::MetricUniform => {
            let (_, value) = solve_uniform_lp(inst, 1)?;
            Relaxation {
                value,
                detail: String::new(),
                prepared: Prepared::MetricUniform,
            }
        }
        Algo::MlLp1 => {
            let ts = ml_grid(inst, cfg.eps)?;
            let sol = solve_ml_lp1(&inst.d, inst.root(), &ts, 500)?;
            Relaxation {
                value: sol.value,
                detail: format!("grid {} rounds {} {:?}", ts.len(), sol.rounds, sol.status),
                prepared: Prepared::Lp1(sol),
            }
        }
        Algo::MlLp2 => {
            let ts = ml_grid(inst, cfg.eps)?;
            let groups = ml_groups(inst);
            let opts = ColgenOptions {
                groups: groups.clone(),
                ..ColgenOptions::default()
            };
            let sol = solve_ml_lp2_colgen(&inst.d, inst.root(), &ts, &opts)?;
            Relaxation {
                value: sol.value,
                detail: format!("grid {} columns {} {:?}", ts.len(), sol.columns.len(), sol.status),
                prepared: Prepared::Lp2(sol, groups),
            }
        }
    })
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub success: bool,
    pub cost: Option<f64>,
    pub violations: Vec<String>,
    pub solution: Option<Solution>,
    /// Why an unsuccessful trial failed. Failures are not violations.
    pub failure: Option<String>,
}

impl Trial {
    fn failed(reason: String) -> Self {
        Trial {
            success: false,
            cost: None,
            violations: Vec::new(),
            solution: None,
            failure: Some(reason),
        }
    }
}

fn mlufl_trial(inst: &Instance, sol: Solution, violations: Vec<String>, mode: EvalMode) -> Result<Trial, Failure> {
    let cost = inst.evaluate(&sol, mode)?.total;
    Ok(Trial {
        success: true,
        cost: Some(cost),
        violations,
        solution: Some(sol),
        failure: None,
    })
}

pub fn trial(
    algo: Algo,
    inst: &Instance,
    cfg: &ExperimentConfig,
    relax: &Relaxation,
    seed: u64,
) -> Result<Trial, Failure> {
    let mode = match cfg.objective {
        Objective::Norm => EvalMode::LpNorm(cfg.p),
        _ => EvalMode::Sum,
    };
    let mut out = match (&relax.prepared, algo) {
        (Prepared::Mlufl(frac), Algo::General) => {
            let params = GeneralParams {
                mode: match cfg.objective {
                    Objective::Power => PhaseMode::Growth(cfg.p),
                    _ => PhaseMode::Plain,
                },
                routes: cfg.k,
                seed,
                ..GeneralParams::default()
            };
            match round_general(inst, frac, &params) {
                Ok(o) => {
                    let mut v: Vec<String> = o
                        .connection_violations(inst)
                        .into_iter()
                        .map(|j| format!("client {j}: connection above 4C*"))
                        .collect();
                    for (l, ph) in o.phases.iter().enumerate() {
                        if ph.segment_max > ph.segment_bound + CERT_TOL {
                            v.push(format!("phase {l}: segment {} > {}", ph.segment_max, ph.segment_bound));
                        }
                    }
                    mlufl_trial(inst, o.solution, v, mode)?
                }
                Err(mlufl::Error::RoundingFailed { attempts, reason }) => {
                    Trial::failed(format!("{attempts} attempts: {reason}"))
                }
                Err(e) => return Err(e.into()),
            }
        }
        (Prepared::Mlufl(frac), Algo::Related) => {
            let o = round_related(inst, frac)?;
            let v = o.violations();
            mlufl_trial(inst, o.solution, v, mode)?
        }
        (Prepared::Mlufl(frac), Algo::UniformGeneral) => {
            let o = round_uniform_general(inst, frac, seed)?;
            let v = o.violations();
            mlufl_trial(inst, o.solution, v, mode)?
        }
        (Prepared::Mlufl(frac), Algo::Zfc) => {
            let o = round_zfc(inst, frac, cfg.alpha)?;
            let v = o.violations(inst);
            mlufl_trial(inst, o.solution, v, mode)?
        }
        (Prepared::MetricUniform, Algo::MetricUniform) => {
            let params = MetricUniformParams {
                alpha: cfg.alpha,
                beta: cfg.beta,
                kmedian: None,
            };
            let o = round_metric_uniform(inst, &params)?;
            let v = o.violations(inst);
            mlufl_trial(inst, o.combine.solution, v, mode)?
        }
        (Prepared::Lp1(sol), Algo::MlLp1) => {
            let r = round_ml_lp1(&inst.d, sol, Lp1Mode::Random { seed })?;
            Trial {
                success: true,
                cost: Some(r.latency),
                violations: r.violations(),
                solution: None,
                failure: None,
            }
        }
        (Prepared::Lp2(sol, groups), Algo::MlLp2) => {
            let r = round_ml_lp2(&inst.d, inst.root(), sol, groups.as_deref(), seed)?;
            Trial {
                success: r.success,
                cost: r.latency,
                violations: r.violations(),
                solution: None,
                failure: (!r.success).then(|| "phases ended with uncovered clients".to_string()),
            }
        }
        _ => unreachable!("relaxation prepared for another algorithm"),
    };
    if cfg.inject_violation {
        out.violations.push("injected violation".into());
    }
    Ok(out)
}

/// Exact optimum when the instance is within the oracle limits.
pub fn exact_value(algo: Algo, inst: &Instance, cfg: &ExperimentConfig) -> Result<Option<f64>, Failure> {
    if cfg.objective == Objective::Norm {
        return Ok(None);
    }
    let limits = ExactLimits::default();
    let res = if algo.is_ml() {
        let groups = ml_groups(inst);
        exact_ml(&inst.d, inst.root(), groups.as_deref(), &limits).map(|e| e.value)
    } else {
        exact_mlufl(inst, &limits).map(|e| e.value)
    };
    match res {
        Ok(v) => Ok(Some(v)),
        Err(mlufl::Error::TooLarge { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub instance: usize,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub cost: Option<f64>,
    pub lp_value: f64,
    pub exact: Option<f64>,
    pub violations: Vec<String>,
}

impl Row {
    pub fn ratio_lp(&self) -> Option<f64> {
        ratio(self.cost?, self.lp_value)
    }

    pub fn ratio_exact(&self) -> Option<f64> {
        ratio(self.cost?, self.exact?)
    }
}

fn ratio(cost: f64, base: f64) -> Option<f64> {
    if base > 0.0 {
        Some(cost / base)
    } else if cost <= CERT_TOL {
        Some(1.0)
    } else {
        None
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub algo: Algo,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub instances: usize,
    pub rows: Vec<Row>,
    pub seconds: f64,
}

impl Report {
    pub fn violation_count(&self) -> usize {
        self.rows.iter().map(|r| r.violations.len()).sum()
    }
}

pub fn run(cfg: &ExperimentConfig, instances: &[Instance]) -> Result<Vec<Report>, Failure> {
    for &algo in &cfg.algos {
        for inst in instances {
            check_compat(algo, inst)?;
        }
    }
    let mut reports = Vec::new();
    for &algo in &cfg.algos {
        let start = Instant::now();
        let mut rows = Vec::new();
        if cfg.trials > 0 {
            for (index, inst) in instances.iter().enumerate() {
                let relax = prepare(algo, inst, cfg)?;
                let exact = exact_value(algo, inst, cfg)?;
                let trials = par::map_indices(cfg.trials, |t| {
                    let seed = trial_seed(cfg.seed, index, t);
                    trial(algo, inst, cfg, &relax, seed).map(|tr| (t, seed, tr))
                });
                for res in trials {
                    let (t, seed, tr) = res?;
                    let mut violations = tr.violations;
                    if let (Some(c), Some(x)) = (tr.cost, exact) {
                        if c < x - CERT_TOL {
                            violations.push(format!("cost {c} below the exact optimum {x}"));
                        }
                    }
                    rows.push(Row {
                        instance: index,
                        trial: t,
                        seed,
                        success: tr.success,
                        cost: tr.cost,
                        lp_value: relax.value,
                        exact,
                        violations,
                    });
                }
            }
        }
        reports.push(Report {
            algo,
            family: cfg.family_label(),
            n: instances.first().map_or(0, |i| i.n),
            m: instances.first().map_or(0, |i| i.m),
            instances: instances.len(),
            rows,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(reports)
}
