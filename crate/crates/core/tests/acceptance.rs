//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::time::Instant;

use mlufl::exact::{exact_ml, exact_ml_permutations, exact_mlufl, exact_mssc, ExactLimits};
use mlufl::instance::{generate, Family, GenSpec};
use mlufl::relaxations::{
    max_pricing_violation, ml_horizon, solve_ml_lp1, solve_ml_lp2_colgen, solve_mlufl_lp, solve_uniform_lp,
    verify_connectivity, ColgenOptions, FractionalMlufl, MluflLpOptions, TimeScale,
};
use mlufl::rng::{derive_seed, rng_from_seed};
use mlufl::round_general::{round_general, round_lp_norm_driver, GeneralParams, PhaseMode, PhasePlan};
use mlufl::round_ml::{round_ml_lp1, round_ml_lp2, Lp1Mode};
use mlufl::round_related::round_related;
use mlufl::round_uniform::{
    greedy_mssc, round_metric_uniform, round_uniform_general, round_zfc, spread_schedule, MetricUniformParams,
};
use mlufl::treekit::{gkr_round, group_flow, WeightedTree};
use mlufl::{EvalMode, Instance, LatencyFn, Metric, Tag};
use rand::Rng;

const TOL: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn integral_metric(points: usize, side: u32, seed: u64) -> Metric {
    let mut rng = rng_from_seed(seed);
    let pts: Vec<(f64, f64)> = (0..points)
        .map(|_| (rng.gen_range(0..side) as f64, rng.gen_range(0..side) as f64))
        .collect();
    Metric::euclidean(&pts, true)
}

fn small_euclidean(n: usize, m: usize, scale: f64, seed: u64) -> Instance {
    let mut spec = GenSpec::new(Family::Euclidean, n, m);
    spec.scale = scale;
    generate(&spec, seed).expect("generator accepts the spec")
}

fn latency_grid(m: &Metric) -> TimeScale {
    TimeScale::full(ml_horizon(m)).with_zero_for_metric(m, 0)
}

fn c1_exact_oracles() -> Verdict {
    let limits = ExactLimits::default();
    let mut mismatches = 0;
    for s in 0..200 {
        let m = integral_metric(8, 8, derive_seed(1, s));
        let dp = exact_ml(&m, 0, None, &limits).unwrap();
        let bf = exact_ml_permutations(&m, 0, None, &limits).unwrap();
        if dp.value != bf.value {
            mismatches += 1;
        }
    }
    let d = Metric::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 2.0], vec![1.0, 2.0, 0.0]]);
    let fixture = Instance::new(vec![5.0, 0.0], vec![vec![0.0, 10.0], vec![10.0, 0.0]], d);
    let opt = exact_mlufl(&fixture, &limits).unwrap().value;
    verdict(
        mismatches == 0 && opt == 8.0,
        format!("DP vs permutations mismatches {mismatches}/200, two-facility fixture optimum {opt}"),
    )
}

fn c2_lp_lower_bound() -> Verdict {
    let limits = ExactLimits::default();
    let (mut above, mut cut_viol, mut not_opt) = (0, 0, 0);
    let mut worst_gap = f64::NEG_INFINITY;
    for s in 0..100u64 {
        let mut rng = rng_from_seed(derive_seed(2, s));
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(2..=8);
        let inst = small_euclidean(n, m, 3.0, derive_seed(20, s));
        let ts = TimeScale::full_for_instance(&inst);
        let lp = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
        if lp.status != mlufl::lpcore::LpStatus::Optimal {
            not_opt += 1;
        }
        let opt = exact_mlufl(&inst, &limits).unwrap().value;
        worst_gap = worst_gap.max(lp.value - opt);
        if lp.value > opt + TOL {
            above += 1;
        }
        if verify_connectivity(&inst, &lp.frac, TOL).is_some() {
            cut_viol += 1;
        }
    }
    verdict(
        above == 0 && cut_viol == 0 && not_opt == 0,
        format!(
            "LP above exact {above}/100 (max LP−OPT {worst_gap:.2e}), cut violations {cut_viol}, non-optimal {not_opt}"
        ),
    )
}

fn c3_time_scale() -> Verdict {
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let mut rng = rng_from_seed(derive_seed(3, s));
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(2..=5);
        let inst = small_euclidean(n, m, 5.0, derive_seed(30, s));
        assert!(inst.d.max_distance() <= 8.0);
        let opts = MluflLpOptions::default();
        let full = solve_mlufl_lp(&inst, &TimeScale::full_for_instance(&inst), &opts)
            .unwrap()
            .value;
        for eps in [0.1, 0.5, 1.0] {
            let grid = solve_mlufl_lp(&inst, &TimeScale::for_instance(&inst, eps).unwrap(), &opts)
                .unwrap()
                .value;
            if full > 0.0 {
                worst = worst.max(grid / full / (1.0 + eps));
            }
            if grid > (1.0 + eps) * full + TOL {
                bad += 1;
            }
        }
    }
    verdict(
        bad == 0,
        format!("violations {bad}/150, max grid/((1+ε)·full) {worst:.4}"),
    )
}

fn c4_related() -> Verdict {
    let mut bad = 0;
    let mut first = String::new();
    for s in 0..100u64 {
        let factor = [1.0, 2.0, 5.0][(s % 3) as usize];
        let n = 4 + (s as usize * 7) % 9;
        let m = 4 + (s as usize * 5) % 9;
        let inst = generate(&GenSpec::new(Family::Related(factor), n, m), 1000 + s).unwrap();
        let ts = TimeScale::for_instance(&inst, 1.0).unwrap();
        let lp = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
        let out = round_related(&inst, &lp.frac).unwrap();
        let v = out.violations();
        if !v.is_empty() {
            bad += 1;
            if first.is_empty() {
                first = v[0].clone();
            }
        }
    }
    verdict(
        bad == 0,
        format!("instances with violations {bad}/100 {first}")
            .trim_end()
            .to_string(),
    )
}

fn c5_uniform_general() -> Verdict {
    let (mut bad, mut big_k, mut runs) = (0, 0, 0);
    let threshold = 8.0 * 8f64.ln();
    for s in 0..10u64 {
        let inst = generate(&GenSpec::new(Family::Uniform, 8, 8), derive_seed(5, s)).unwrap();
        let (frac, _) = solve_uniform_lp(&inst, 1).unwrap();
        for seed in 0..50 {
            let out = round_uniform_general(&inst, &frac, derive_seed(50 + s, seed)).unwrap();
            runs += 1;
            bad += out
                .clients
                .iter()
                .filter(|c| c.connection + c.slot as f64 > 2.0 * (c.c_star + c.l_star) + TOL)
                .count();
            if out.k as f64 > threshold {
                big_k += 1;
            }
        }
    }
    let freq = big_k as f64 / runs as f64;
    verdict(
        bad == 0 && freq <= 0.1,
        format!("pre-spread violations {bad} over {runs} runs, Pr[K > 8 ln m] = {freq:.3}"),
    )
}

/// A random fractional schedule with at most `k` mass per slot, every
/// client fully covered and `x ≤ y`.
fn random_schedule(seed: u64) -> (Instance, FractionalMlufl, usize) {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let k = rng.gen_range(1..=3);
    let slots = rng.gen_range(1..=5);
    let c: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..10) as f64).collect())
        .collect();
    let mut inst = Instance::new(vec![1.0; n], c, Metric::uniform(n + 1));
    inst.tags.push(Tag::Uniform);
    let times: Vec<f64> = (1..=slots).map(|t| t as f64).collect();
    let mut frac = FractionalMlufl::zeros(n, m, times, false);
    for t in 0..slots {
        let mut room = k as f64;
        for i in 0..n {
            let y: f64 = rng.gen_range(0.0..=1.0f64).min(room);
            frac.y[i][t] = y;
            room -= y;
        }
    }
    // make sure there is at least unit mass to cover with
    let total: f64 = frac.y.iter().flatten().sum();
    if total < 1.0 {
        frac.y[0][0] = 1.0;
        for i in 1..n {
            frac.y[i][0] = frac.y[i][0].min((k as f64 - 1.0) / (n - 1).max(1) as f64);
        }
    }
    for j in 0..m {
        let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..slots).map(move |t| (i, t))).collect();
        for a in (1..pairs.len()).rev() {
            pairs.swap(a, rng.gen_range(0..=a));
        }
        let mut need = 1.0f64;
        for (i, t) in pairs {
            let take = frac.y[i][t].min(need);
            frac.x[i][j][t] = take;
            need -= take;
            if need <= 0.0 {
                break;
            }
        }
        if need > 1e-12 {
            // rescale onto what is available
            let got = 1.0 - need;
            for i in 0..n {
                for t in 0..slots {
                    frac.x[i][j][t] /= got;
                    frac.y[i][t] = frac.y[i][t].max(frac.x[i][j][t]);
                }
            }
        }
    }
    let k = (0..slots)
        .map(|t| (0..n).map(|i| frac.y[i][t]).sum::<f64>())
        .fold(k as f64, f64::max)
        .ceil() as usize;
    (inst, frac, k)
}

fn c6_spread() -> Verdict {
    let mut bad = 0;
    for s in 0..1000u64 {
        let (inst, frac, k) = random_schedule(derive_seed(6, s));
        match spread_schedule(&inst, &frac, k) {
            Ok(out) if out.certificate.violations().is_empty() => {}
            _ => bad += 1,
        }
    }
    verdict(bad == 0, format!("inputs failing (i)-(iii): {bad}/1000"))
}

fn c7_zfc() -> Verdict {
    let (mut conn, mut exceed) = (0, 0);
    for s in 0..100u64 {
        let inst = generate(&GenSpec::new(Family::Zfc, 6, 7), derive_seed(7, s)).unwrap();
        let (frac, _) = solve_uniform_lp(&inst, 1).unwrap();
        let out = round_zfc(&inst, &frac, 8.0 / 9.0).unwrap();
        conn += out.violations(&inst).len();
        exceed += out.latency_exceeded() as usize;
    }
    let limits = ExactLimits::default();
    let (mut ratio_bad, mut worst, mut cases) = (0, 0.0f64, 0);
    for s in 0..1000u64 {
        let mut rng = rng_from_seed(derive_seed(70, s));
        let elements = rng.gen_range(1..=8);
        let count = rng.gen_range(1..=6);
        let mut sets: Vec<Vec<usize>> = (0..count)
            .map(|_| (0..elements).filter(|_| rng.gen_bool(0.35)).collect())
            .collect();
        for e in 0..elements {
            if !sets.iter().any(|s| s.contains(&e)) {
                let a = rng.gen_range(0..count);
                sets[a].push(e);
            }
        }
        let g = greedy_mssc(&sets, elements).unwrap().cost as f64;
        let opt = exact_mssc(&sets, elements, &limits).unwrap().value as f64;
        cases += 1;
        worst = worst.max(g / opt);
        if g > 4.0 * opt {
            ratio_bad += 1;
        }
    }
    verdict(
        conn == 0 && ratio_bad == 0,
        format!(
            "connection violations {conn}, greedy > 4·exact {ratio_bad}/{cases} (worst {worst:.3}), latency bound exceeded {exceed}/100 (monitored)"
        ),
    )
}

fn c8_metric_uniform() -> Verdict {
    let (mut bad, mut worst) = (0, 0.0f64);
    for s in 0..100u64 {
        let inst = generate(&GenSpec::new(Family::MetricUniform, 7, 7), 5000 + s).unwrap();
        let out = round_metric_uniform(&inst, &MetricUniformParams::default()).unwrap();
        if !out.violations(&inst).is_empty() || (out.factor - 24.0).abs() > 1e-9 {
            bad += 1;
        }
        if out.lp_value > 0.0 {
            worst = worst.max(out.combine.cost / out.lp_value);
        }
    }
    verdict(
        bad == 0,
        format!("instances with violations {bad}/100, worst cost/V_LP {worst:.3} (bound 24)"),
    )
}

/// Mean of `total/ΣL*` for five random-α runs on each instance, frozen.
const C9_RANDOM_MEAN: f64 = 1.685418;

fn c9_ml_lp1() -> Verdict {
    let mut bad = 0;
    let mut ratios = Vec::new();
    for s in 0..200u64 {
        let m = integral_metric(12, 6, 7000 + s);
        let ts = TimeScale::geometric(0.5, ml_horizon(&m))
            .unwrap()
            .with_zero_for_metric(&m, 0);
        let sol = solve_ml_lp1(&m, 0, &ts, 200).unwrap();
        let det = round_ml_lp1(&m, &sol, Lp1Mode::Det).unwrap();
        bad += det.violations().len();
        for seed in 0..5 {
            let r = round_ml_lp1(&m, &sol, Lp1Mode::Random { seed }).unwrap();
            bad += r.violations().len();
            ratios.push(r.ratio());
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let frozen = (mean - C9_RANDOM_MEAN).abs() <= 1e-5;
    verdict(
        bad == 0 && frozen,
        format!("det/random violations {bad}, random-α mean ratio {mean:.6} (frozen {C9_RANDOM_MEAN})"),
    )
}

fn seven_edge_tree() -> (WeightedTree, Vec<f64>) {
    let mut t = WeightedTree::new(Some(0));
    let a = t.add_child(0, 1.0, None);
    let b = t.add_child(0, 1.0, None);
    t.add_child(a, 1.0, Some(1));
    t.add_child(a, 1.0, Some(2));
    let c = t.add_child(b, 1.0, None);
    t.add_child(b, 1.0, Some(3));
    t.add_child(c, 1.0, Some(4));
    (t, vec![1.0, 0.8, 0.5, 0.6, 0.3, 0.4, 0.25, 0.2])
}

fn c10_gkr() -> Verdict {
    let (t, z) = seven_edge_tree();
    let groups: Vec<Vec<usize>> = vec![vec![3, 4], vec![3, 7], vec![6, 7], vec![3, 4, 6, 7]];
    let trials = 20_000usize;
    let mut edge_hits = vec![0usize; t.len()];
    let mut misses = vec![0usize; groups.len()];
    for s in 0..trials {
        let kept = gkr_round(&t, &z, derive_seed(10, s as u64)).unwrap();
        for v in 0..t.len() {
            edge_hits[v] += kept[v] as usize;
        }
        for (g, group) in groups.iter().enumerate() {
            if !group.iter().any(|&v| kept[v]) {
                misses[g] += 1;
            }
        }
    }
    let nf = trials as f64;
    let mut bad_edges = 0;
    for v in 1..t.len() {
        let p = edge_hits[v] as f64 / nf;
        let sigma = (z[v] * (1.0 - z[v]) / nf).sqrt();
        if (p - z[v]).abs() > 3.0 * sigma {
            bad_edges += 1;
        }
    }
    let leaves = 4f64;
    let mut bad_groups = 0;
    let mut detail = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        let nu = group_flow(&t, &z, group).min(1.0);
        let bound = (-nu / (64.0 * leaves.log2().max(1.0))).exp();
        let freq = misses[g] as f64 / nf;
        let sigma = (bound * (1.0 - bound) / nf).sqrt();
        if freq > bound + 3.0 * sigma {
            bad_groups += 1;
        }
        detail.push(format!("{freq:.3}≤{bound:.3}"));
    }
    verdict(
        bad_edges == 0 && bad_groups == 0,
        format!("edges outside 3σ {bad_edges}/7, group misses [{}]", detail.join(", ")),
    )
}

/// Mean of cost/V_LP over the successful runs, frozen.
const C11_MEAN_RATIO: f64 = 1.069071;

fn c11_general() -> Verdict {
    let (mut ok, mut conn_bad, mut runs) = (0, 0, 0);
    let mut ratios = Vec::new();
    let mut fractional = 0;
    for s in 0..20u64 {
        let inst = generate(&GenSpec::new(Family::Euclidean, 10, 10), derive_seed(11, s)).unwrap();
        let ts = TimeScale::for_instance(&inst, 0.5).unwrap();
        let lp = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
        fractional += lp.frac.y.iter().flatten().any(|&v| v > TOL && v < 1.0 - TOL) as usize;
        for seed in 0..10 {
            runs += 1;
            let params = GeneralParams {
                seed: derive_seed(110 + s, seed),
                retries: 0,
                ..GeneralParams::default()
            };
            if let Ok(out) = round_general(&inst, &lp.frac, &params) {
                ok += 1;
                conn_bad += out.connection_violations(&inst).len();
                let cost = inst.evaluate(&out.solution, EvalMode::Sum).unwrap().total;
                ratios.push(cost / lp.value);
            }
        }
    }
    ratios.sort_by(f64::total_cmp);
    let median = ratios.get(ratios.len() / 2).copied().unwrap_or(f64::NAN);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let rate = ok as f64 / runs as f64;
    let frozen = (mean - C11_MEAN_RATIO).abs() <= 1e-5;
    verdict(
        rate >= 0.95 && conn_bad == 0 && frozen,
        format!(
            "success {ok}/{runs} on {fractional}/20 fractional LPs, connection violations {conn_bad}, cost/V_LP median {median:.4} max {:.4} mean {mean:.6} (frozen {C11_MEAN_RATIO})",
            ratios.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn c12_lp2() -> Verdict {
    let opts = ColgenOptions::default();
    let limits = ExactLimits::default();
    let (mut above, mut priced, mut ok, mut runs) = (0, 0, 0, 0);
    let mut worst_price = 0.0f64;
    for s in 0..50u64 {
        let mut rng = rng_from_seed(8000 + s);
        let size = rng.gen_range(4..=8);
        let m = integral_metric(size, 6, derive_seed(12, s));
        let sol = solve_ml_lp2_colgen(&m, 0, &latency_grid(&m), &opts).unwrap();
        let opt = exact_ml(&m, 0, None, &limits).unwrap().value;
        if sol.value > opt + TOL {
            above += 1;
        }
        let v = max_pricing_violation(&m, 0, &sol, &opts).unwrap();
        worst_price = worst_price.max(v);
        if v > TOL {
            priced += 1;
        }
        for seed in 0..4 {
            runs += 1;
            ok += round_ml_lp2(&m, 0, &sol, None, derive_seed(120 + s, seed))
                .unwrap()
                .success as usize;
        }
    }
    let rate = ok as f64 / runs as f64;
    verdict(
        above == 0 && priced == 0 && rate >= 0.95,
        format!(
            "LP2 above exact {above}/50, re-pricing violations {priced} (max {worst_price:.1e}), rounding success {ok}/{runs}"
        ),
    )
}

fn c13_extensions() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    // k = 2 routes
    let mut inst = small_euclidean(6, 6, 6.0, derive_seed(13, 0));
    inst.k = 2;
    let ts = TimeScale::for_instance(&inst, 0.5).unwrap();
    let opts = MluflLpOptions {
        routes: 2,
        ..MluflLpOptions::default()
    };
    let lp = solve_mlufl_lp(&inst, &ts, &opts).unwrap();
    let params = GeneralParams {
        routes: 2,
        seed: 13,
        ..GeneralParams::default()
    };
    match round_general(&inst, &lp.frac, &params) {
        Ok(out) => {
            let routes_ok = out.solution.routes.len() == 2;
            let seg_ok = out.phases.iter().all(|p| p.segment_max <= p.segment_bound + TOL);
            let feasible = inst.evaluate(&out.solution, EvalMode::Sum).is_ok();
            pass &= routes_ok && seg_ok && feasible && out.connection_violations(&inst).is_empty();
            notes.push(format!("k=2 routes {} segments ok {seg_ok}", out.solution.routes.len()));
        }
        Err(e) => {
            pass = false;
            notes.push(format!("k=2 failed: {e}"));
        }
    }

    // growth p = 2
    let mut inst = small_euclidean(6, 6, 6.0, derive_seed(13, 1));
    inst.latency = LatencyFn::Power { p: 2.0 };
    let ts = TimeScale::for_instance(&inst, 0.5).unwrap();
    let lp = solve_mlufl_lp(&inst, &ts, &MluflLpOptions::default()).unwrap();
    let plan = PhasePlan::new(&inst, &lp.frac, PhaseMode::Growth(2.0)).unwrap();
    let expect = (2.0 * (2f64.sqrt() * plan.tau_max).log2() + 4.0 * (inst.m as f64).log2() - 1e-9)
        .ceil()
        .max(0.0) as usize;
    let (mut ok, mut conn) = (0, 0);
    for seed in 0..40 {
        let params = GeneralParams {
            mode: PhaseMode::Growth(2.0),
            seed: derive_seed(131, seed),
            retries: 0,
            ..GeneralParams::default()
        };
        if let Ok(out) = round_general(&inst, &lp.frac, &params) {
            ok += 1;
            conn += out.connection_violations(&inst).len();
        }
    }
    let phases_ok = plan.times.len() == expect + 1;
    pass &= phases_ok && ok >= 38 && conn == 0;
    notes.push(format!(
        "growth N={} (expected {expect}) success {ok}/40",
        plan.times.len() - 1
    ));

    // L_2 norm driver
    let inst = small_euclidean(5, 5, 6.0, derive_seed(13, 2));
    match round_lp_norm_driver(&inst, 0.5, 2.0, &GeneralParams::default()) {
        Ok(out) => {
            let within = out.cost <= 2.0 * out.lp_bound + TOL;
            pass &= within;
            notes.push(format!("L2 cost {:.2} vs 2×bound {:.2}", out.cost, 2.0 * out.lp_bound));
        }
        Err(e) => {
            pass = false;
            notes.push(format!("L2 failed: {e}"));
        }
    }
    verdict(pass, notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("exact oracles", c1_exact_oracles),
        ("LP lower bound", c2_lp_lower_bound),
        ("time-scale grid", c3_time_scale),
        ("related rounding", c4_related),
        ("uniform general rounding", c5_uniform_general),
        ("spread schedule", c6_spread),
        ("ZFC rounding", c7_zfc),
        ("metric uniform combiner", c8_metric_uniform),
        ("ML LP1 rounding", c9_ml_lp1),
        ("GKR marginals", c10_gkr),
        ("general rounding end-to-end", c11_general),
        ("LP2 column generation", c12_lp2),
        ("extensions smoke", c13_extensions),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let mark = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {mark} {name}: {} [{:.1}s]",
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
