use mlufl::exact::{exact_ml, exact_ml_permutations, exact_mssc, ExactLimits};
use mlufl::instance::{best_assignment, generate, instance_from_json, instance_to_json, Family, GenSpec};
use mlufl::par;
use mlufl::round_ml::systematic_sample;
use mlufl::round_uniform::greedy_mssc;
use mlufl::treekit::{euler_tour, frt_embed, mst, Direction};
use mlufl::{EvalMode, Metric, Solution};
use proptest::prelude::*;

fn points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0u8..8, 0u8..8), 2..=max)
        .prop_map(|v| v.into_iter().map(|(x, y)| (x as f64, y as f64)).collect())
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Euclidean),
        Just(Family::Related(2.0)),
        Just(Family::Uniform),
        Just(Family::MetricUniform),
        Just(Family::Zfc),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generation_is_seed_deterministic(fam in family(), n in 1usize..6, m in 1usize..6, seed: u64) {
        let spec = GenSpec::new(fam, n, m);
        prop_assert_eq!(generate(&spec, seed).unwrap(), generate(&spec, seed).unwrap());
    }

    #[test]
    fn json_round_trip(fam in family(), n in 1usize..6, m in 1usize..6, seed: u64) {
        let inst = generate(&GenSpec::new(fam, n, m), seed).unwrap();
        prop_assert!(inst.validate().is_valid());
        prop_assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn breakdown_adds_up(n in 1usize..6, m in 1usize..6, seed: u64, perm_seed: u64) {
        let inst = generate(&GenSpec::new(Family::Euclidean, n, m), seed).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        let k = (perm_seed as usize) % n;
        order.rotate_left(k);
        let sol = best_assignment(&inst, &[order.clone()]).unwrap();
        let cb = inst.evaluate(&sol, EvalMode::Sum).unwrap();
        let sum = cb.facility_cost + cb.connection_cost + cb.latency_cost;
        prop_assert!((cb.total - sum).abs() <= 1e-9 * sum.max(1.0));
        // any other assignment to the same route costs at least as much
        let other = Solution::single_route(order, vec![sol.routes[0][0]; m]);
        prop_assert!(inst.evaluate(&other, EvalMode::Sum).unwrap().total >= cb.total - 1e-9);
    }

    #[test]
    fn frt_dominates_the_metric(pts in points(10), seed: u64) {
        let metric = Metric::euclidean(&pts, false);
        let root = pts.len() - 1;
        let members: Vec<usize> = (0..root).collect();
        let tree = frt_embed(&metric, &members, root, seed);
        for u in 0..pts.len() {
            for v in 0..pts.len() {
                let dt = tree.point_distance(u, v).unwrap();
                prop_assert!(dt >= metric.d(u, v) - 1e-9);
            }
        }
    }

    #[test]
    fn doubled_mst_tour(pts in points(10)) {
        let metric = Metric::euclidean(&pts, false);
        let root = 0;
        let members: Vec<usize> = (1..pts.len()).collect();
        let tree = mst(&metric, &members, root);
        let tour = euler_tour(&tree, &metric, Direction::Forward);
        for &p in &members {
            prop_assert!(tour.contains(p));
        }
        prop_assert!(tour.closed_length <= 2.0 * tree.total_weight() + 1e-9);
        prop_assert!(tour.closed_length >= tree.total_weight() - 1e-9);
    }

    #[test]
    fn latency_dp_matches_permutations(pts in points(7)) {
        let metric = Metric::euclidean(&pts, true);
        let limits = ExactLimits::default();
        let dp = exact_ml(&metric, 0, None, &limits).unwrap();
        let bf = exact_ml_permutations(&metric, 0, None, &limits).unwrap();
        prop_assert_eq!(dp.value, bf.value);
    }

    #[test]
    fn systematic_sample_size(z in prop::collection::vec(0.0f64..=1.0, 1..12), u in 0.0f64..1.0) {
        let picked = systematic_sample(&z, u);
        let total: f64 = z.iter().sum();
        prop_assert!(picked.len() as f64 <= total.ceil() + 1e-9);
        prop_assert!(picked.len() as f64 >= total.floor() - 1e-9);
        prop_assert!(picked.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(picked.iter().all(|&i| z[i] > 0.0));
    }

    #[test]
    fn greedy_set_cover_within_four(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..=6), 1..=5)
    ) {
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let mut covered: Vec<usize> = sets.iter().flatten().copied().collect();
        covered.sort_unstable();
        covered.dedup();
        // relabel so the ground set is exactly the covered elements
        let relabel = |e: usize| covered.binary_search(&e).unwrap();
        let sets: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().map(|&e| relabel(e)).collect()).collect();
        let g = greedy_mssc(&sets, covered.len()).unwrap().cost;
        let opt = exact_mssc(&sets, covered.len(), &ExactLimits::default()).unwrap().value;
        prop_assert!(opt <= g);
        prop_assert!(g <= 4 * opt);
    }

    #[test]
    fn batch_helpers_agree(len in 0usize..200) {
        let f = |i: usize| i.wrapping_mul(2654435761) % 97;
        prop_assert_eq!(par::map_indices(len, f), par::map_indices_seq(len, f));
    }
}
