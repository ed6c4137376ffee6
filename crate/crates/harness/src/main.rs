//! `mlufl` command-line harness.
//!
//! Exit codes: 0 ok, 1 certificate violation (or invalid instance), 2 usage
//! or configuration error, 3 solver failure.

mod config;
mod report;
mod run;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mlufl::exact::{exact_ml, exact_mlufl, ExactLimits};
use mlufl::instance::{instance_to_json, read_instance, write_breakdown_csv};
use mlufl::{EvalMode, Solution};

use config::{ExperimentConfig, Settings};
use report::{summary, write_trials_csv, Table};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Violation(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Violation(m) => write!(f, "certificate violation: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl From<mlufl::Error> for Failure {
    fn from(e: mlufl::Error) -> Self {
        use mlufl::Error as E;
        match e {
            E::Lp(_) | E::RoundingFailed { .. } | E::InvalidFractional(_) | E::InfeasibleSolution(_) => {
                Failure::Solver(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "mlufl", version, about = "Minimum-latency facility location experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the relaxation for each algorithm and print its value
    Solve(Settings),
    /// Solve and round once with --seed, printing the cost and certificates
    Round(Settings),
    /// Exact optimum of the first instance
    Exact(Settings),
    /// Seeded batch run with ratio tables
    Bench(Settings),
    /// Check an instance file, and optionally a solution for it
    Validate(ValidateArgs),
    /// Write a generated instance as JSON (to --out or stdout)
    Generate(Settings),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// JSON solution: {"routes": [[...]], "assignment": [...]}
    #[arg(long)]
    solution: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Solve(s) => solve(s),
        Cmd::Round(s) => round(s),
        Cmd::Exact(s) => exact(s),
        Cmd::Bench(s) => bench(s),
        Cmd::Validate(a) => validate(a),
        Cmd::Generate(s) => generate(s),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}

fn solve(s: Settings) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(s)?;
    let instances = run::load_instances(&cfg)?;
    let mut t = Table::new(&["algo", "instance", "lp_value", "detail"]);
    for &algo in &cfg.algos {
        for (i, inst) in instances.iter().enumerate() {
            let r = run::prepare(algo, inst, &cfg)?;
            t.push(vec![algo.id().into(), i.to_string(), r.value.to_string(), r.detail]);
        }
    }
    print!("{}", t.render(cfg.format));
    Ok(())
}

fn round(s: Settings) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(s)?;
    let instances = run::load_instances(&cfg)?;
    let inst = &instances[0];
    let mut t = Table::new(&["algo", "seed", "success", "cost", "lp_value", "cost_lp", "violations"]);
    let mut violated = Vec::new();
    let mut failed = Vec::new();
    for &algo in &cfg.algos {
        let relax = run::prepare(algo, inst, &cfg)?;
        let tr = run::trial(algo, inst, &cfg, &relax, cfg.seed)?;
        let ratio = tr.cost.filter(|_| relax.value > 0.0).map(|c| c / relax.value);
        t.push(vec![
            algo.id().into(),
            cfg.seed.to_string(),
            tr.success.to_string(),
            tr.cost.map(|c| c.to_string()).unwrap_or_default(),
            relax.value.to_string(),
            ratio.map(|r| format!("{r:.4}")).unwrap_or_default(),
            tr.violations.len().to_string(),
        ]);
        for v in &tr.violations {
            eprintln!("{}: {v}", algo.id());
        }
        if !tr.violations.is_empty() {
            violated.push(algo.id());
        }
        if let Some(reason) = &tr.failure {
            failed.push(format!("{}: {reason}", algo.id()));
        }
        if let (Some(dir), Some(sol)) = (&cfg.out, &tr.solution) {
            fs::create_dir_all(dir)?;
            let json = serde_json::to_string_pretty(sol).expect("solutions serialize");
            fs::write(dir.join(format!("solution-{}.json", algo.id())), json + "\n")?;
            let cb = inst.evaluate(sol, EvalMode::Sum)?;
            write_breakdown_csv(&cb, fs::File::create(dir.join(format!("breakdown-{}.csv", algo.id())))?)?;
        }
    }
    print!("{}", t.render(cfg.format));
    if !violated.is_empty() {
        return Err(Failure::Violation(violated.join(", ")));
    }
    if !failed.is_empty() {
        return Err(Failure::Solver(failed.join("; ")));
    }
    Ok(())
}

fn exact(s: Settings) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(s)?;
    let instances = run::load_instances(&cfg)?;
    let inst = &instances[0];
    let limits = ExactLimits::default();
    let mut t = Table::new(&["problem", "value", "order"]);
    let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    if cfg.algos.iter().any(|a| a.is_ml()) {
        let groups = run::ml_groups(inst);
        let e = exact_ml(&inst.d, inst.root(), groups.as_deref(), &limits)?;
        t.push(vec!["latency".into(), e.value.to_string(), join(&e.order)]);
    } else {
        let e = exact_mlufl(inst, &limits)?;
        let routes: Vec<String> = e.solution.routes.iter().map(|r| join(r)).collect();
        t.push(vec!["mlufl".into(), e.value.to_string(), routes.join(" | ")]);
    }
    print!("{}", t.render(cfg.format));
    Ok(())
}

fn bench(s: Settings) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(s)?;
    let instances = run::load_instances(&cfg)?;
    let reports = run::run(&cfg, &instances)?;
    let table = summary(&reports, cfg.format);
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        write_trials_csv(&reports, fs::File::create(dir.join("trials.csv"))?)?;
        let name = match cfg.format {
            config::Format::Csv => "summary.csv",
            config::Format::Md => "summary.md",
        };
        fs::write(dir.join(name), table.render(cfg.format))?;
    }
    print!("{}", table.render(cfg.format));
    let bad: usize = reports.iter().map(|r| r.violation_count()).sum();
    for r in &reports {
        for row in r.rows.iter().filter(|x| !x.violations.is_empty()) {
            eprintln!(
                "{} instance {} trial {}: {}",
                r.algo.id(),
                row.instance,
                row.trial,
                row.violations.join("; ")
            );
        }
    }
    if bad > 0 {
        return Err(Failure::Violation(format!("{bad} certificate checks failed")));
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let inst = read_instance(&a.instance)?;
    let rep = inst.validate();
    if !rep.is_valid() {
        return Err(Failure::Violation(format!("invalid instance\n{rep}")));
    }
    println!("instance: valid (n={}, m={})", inst.n, inst.m);
    if let Some(path) = a.solution {
        let text = fs::read_to_string(&path)?;
        let sol: Solution =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let cb = inst
            .evaluate(&sol, EvalMode::Sum)
            .map_err(|e| Failure::Violation(format!("solution: {e}")))?;
        write_breakdown_csv(&cb, std::io::stdout().lock())?;
        if cb.budget_violation > 1.0 + mlufl::CERT_TOL {
            return Err(Failure::Violation(format!(
                "longest route is {} times the budget",
                cb.budget_violation
            )));
        }
    }
    Ok(())
}

fn generate(s: Settings) -> Result<(), Failure> {
    let out = s.out.clone();
    let cfg = ExperimentConfig::load(Settings { out: None, ..s })?;
    let inst = &run::load_instances(&cfg)?[0];
    let json = instance_to_json(inst);
    match out {
        Some(path) => fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}
