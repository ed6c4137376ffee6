//! Brute-force and dynamic-programming oracles for desk-sized instances.

use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};
use crate::metric::Metric;

/// Hard size caps, checked before any enumeration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    pub mlufl: usize,
    pub ml_dp: usize,
    pub ml_permutations: usize,
    pub mssc: usize,
    pub ufl: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            mlufl: 8,
            ml_dp: 14,
            ml_permutations: 9,
            mssc: 8,
            ufl: 16,
        }
    }
}

fn too_large(what: &'static str, actual: usize, limit: usize) -> Error {
    Error::TooLarge { what, actual, limit }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMlufl {
    pub value: f64,
    pub solution: Solution,
}

struct MluflSearch<'a> {
    inst: &'a Instance,
    routes: Vec<Vec<usize>>,
    ends: Vec<(usize, f64)>,
    used: Vec<bool>,
    best_value: f64,
    best_routes: Vec<Vec<usize>>,
}

impl MluflSearch<'_> {
    /// `serve[j]` is client `j`'s cheapest connection-plus-latency so far.
    fn visit(&mut self, fcost: f64, serve: &[f64]) {
        let inst = self.inst;
        if serve.iter().all(|v| v.is_finite()) {
            let value = fcost + serve.iter().sum::<f64>();
            if value < self.best_value - 1e-12 {
                self.best_value = value;
                self.best_routes = self.routes.clone();
            }
        }
        // routes are interchangeable: only extend nonempty ones and the first empty one
        let active = self.routes.iter().take_while(|r| !r.is_empty()).count();
        let reach = (active + 1).min(inst.k.max(1));
        for i in 0..inst.n {
            if self.used[i] {
                continue;
            }
            for q in 0..reach {
                let (prev, t0) = self.ends[q];
                let t = t0 + inst.d.d(prev, i);
                if inst.budget.is_some_and(|b| t > b + 1e-9) {
                    continue;
                }
                let next: Vec<f64> = (0..inst.m)
                    .map(|j| serve[j].min(inst.c[i][j] + inst.weight(j) * inst.latency.eval(t)))
                    .collect();
                self.used[i] = true;
                self.routes[q].push(i);
                let saved = self.ends[q];
                self.ends[q] = (i, t);
                self.visit(fcost + inst.f[i], &next);
                self.ends[q] = saved;
                self.routes[q].pop();
                self.used[i] = false;
            }
        }
    }
}

/// Enumerates every open set, its split over the `k` routes and every order
/// on each route; clients take their cheapest open facility. Uses the sum
/// objective and respects the route budget when one is set.
pub fn exact_mlufl(inst: &Instance, limits: &ExactLimits) -> Result<ExactMlufl> {
    if inst.n > limits.mlufl {
        return Err(too_large("exact_mlufl", inst.n, limits.mlufl));
    }
    let k = inst.k.max(1);
    let mut search = MluflSearch {
        inst,
        routes: vec![Vec::new(); k],
        ends: vec![(inst.root(), 0.0); k],
        used: vec![false; inst.n],
        best_value: f64::INFINITY,
        best_routes: Vec::new(),
    };
    search.visit(0.0, &vec![f64::INFINITY; inst.m]);
    if !search.best_value.is_finite() {
        return Err(Error::InvalidInstance("no feasible solution".into()));
    }
    let mut routes = search.best_routes;
    routes.retain(|r| !r.is_empty());
    let solution = crate::instance::best_assignment(inst, &routes).expect("optimum serves every client");
    Ok(ExactMlufl {
        value: search.best_value,
        solution,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMl {
    pub value: f64,
    /// Visiting order, root excluded.
    pub order: Vec<usize>,
}

/// Minimum latency tour from `root` by a DP over (visited set, last node).
/// Every non-root point is a client; with `groups`, a group is served when
/// any member is visited and only groups count.
pub fn exact_ml(metric: &Metric, root: usize, groups: Option<&[Vec<usize>]>, limits: &ExactLimits) -> Result<ExactMl> {
    let nodes: Vec<usize> = (0..metric.len()).filter(|&v| v != root).collect();
    let p = nodes.len();
    if p > limits.ml_dp {
        return Err(too_large("exact_ml", p, limits.ml_dp));
    }
    let bit = |v: usize| nodes.iter().position(|&u| u == v);
    let masks: Vec<u32> = match groups {
        None => (0..p).map(|b| 1u32 << b).collect(),
        Some(gs) => gs
            .iter()
            .map(|g| {
                let mut mask = 0u32;
                for &v in g {
                    if let Some(b) = bit(v) {
                        mask |= 1 << b;
                    }
                }
                mask
            })
            .collect(),
    };
    // groups containing the root are served at time zero
    let masks: Vec<u32> = match groups {
        Some(gs) => masks
            .into_iter()
            .zip(gs)
            .filter(|(_, g)| !g.contains(&root))
            .map(|(m, _)| m)
            .collect(),
        None => masks,
    };
    if masks.contains(&0) {
        return Err(Error::InvalidInstance("a group has no reachable member".into()));
    }
    if masks.is_empty() {
        return Ok(ExactMl {
            value: 0.0,
            order: Vec::new(),
        });
    }
    let uncovered = |s: u32| masks.iter().filter(|&&m| m & s == 0).count() as f64;
    let full = 1usize << p;
    let mut val = vec![f64::INFINITY; full * p];
    let mut from = vec![usize::MAX; full * p];
    for b in 0..p {
        val[(1 << b) * p + b] = metric.d(root, nodes[b]) * uncovered(0);
    }
    let mut best = (f64::INFINITY, 0usize, 0usize);
    for s in 1..full {
        let left = uncovered(s as u32);
        for last in 0..p {
            let v = val[s * p + last];
            if !v.is_finite() {
                continue;
            }
            if left == 0.0 {
                if v < best.0 - 1e-12 {
                    best = (v, s, last);
                }
                continue;
            }
            for b in 0..p {
                if s & (1 << b) != 0 {
                    continue;
                }
                let t = s | (1 << b);
                let w = v + metric.d(nodes[last], nodes[b]) * left;
                if w < val[t * p + b] {
                    val[t * p + b] = w;
                    from[t * p + b] = last;
                }
            }
        }
    }
    let (value, mut s, mut last) = best;
    let mut order = Vec::new();
    loop {
        order.push(nodes[last]);
        let prev = from[s * p + last];
        if prev == usize::MAX {
            break;
        }
        s &= !(1 << last);
        last = prev;
    }
    order.reverse();
    Ok(ExactMl { value, order })
}

/// Latency of visiting `order` from `root`, counting groups when given.
pub fn ml_latency(metric: &Metric, root: usize, order: &[usize], groups: Option<&[Vec<usize>]>) -> f64 {
    let mut t = 0.0;
    let mut prev = root;
    let mut first = vec![f64::INFINITY; metric.len()];
    first[root] = 0.0;
    for &v in order {
        t += metric.d(prev, v);
        first[v] = first[v].min(t);
        prev = v;
    }
    match groups {
        None => (0..metric.len()).filter(|&v| v != root).map(|v| first[v]).sum(),
        Some(gs) => gs
            .iter()
            .map(|g| g.iter().map(|&v| first[v]).fold(f64::INFINITY, f64::min))
            .sum(),
    }
}

/// Permutation brute force, kept as an independent check on [`exact_ml`].
pub fn exact_ml_permutations(
    metric: &Metric,
    root: usize,
    groups: Option<&[Vec<usize>]>,
    limits: &ExactLimits,
) -> Result<ExactMl> {
    let mut nodes: Vec<usize> = (0..metric.len()).filter(|&v| v != root).collect();
    if nodes.len() > limits.ml_permutations {
        return Err(too_large("exact_ml_permutations", nodes.len(), limits.ml_permutations));
    }
    let mut best = ExactMl {
        value: ml_latency(metric, root, &nodes, groups),
        order: nodes.clone(),
    };
    // Heap's algorithm
    let n = nodes.len();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                nodes.swap(0, i);
            } else {
                nodes.swap(c[i], i);
            }
            let v = ml_latency(metric, root, &nodes, groups);
            if v < best.value - 1e-12 {
                best = ExactMl {
                    value: v,
                    order: nodes.clone(),
                };
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMssc {
    pub value: usize,
    /// Sets in visiting order, only those needed to cover everything.
    pub order: Vec<usize>,
}

/// Optimal min-sum set cover: the cost of an order is the sum over its
/// prefixes of the elements still uncovered, minimised by a DP over the
/// set of sets already used.
pub fn exact_mssc(sets: &[Vec<usize>], elements: usize, limits: &ExactLimits) -> Result<ExactMssc> {
    let s = sets.len();
    if s > limits.mssc {
        return Err(too_large("exact_mssc", s, limits.mssc));
    }
    let cover = |mask: usize| {
        let mut seen = vec![false; elements];
        for (k, set) in sets.iter().enumerate() {
            if mask & (1 << k) != 0 {
                for &e in set {
                    seen[e] = true;
                }
            }
        }
        seen.iter().filter(|&&b| !b).count()
    };
    let full = 1usize << s;
    let left: Vec<usize> = (0..full).map(cover).collect();
    if left[full - 1] > 0 {
        return Err(Error::InvalidParameter(format!(
            "{} element(s) belong to no set",
            left[full - 1]
        )));
    }
    let mut val = vec![usize::MAX; full];
    let mut from = vec![usize::MAX; full];
    val[0] = 0;
    let mut best = (usize::MAX, 0usize);
    for mask in 0..full {
        if val[mask] == usize::MAX {
            continue;
        }
        if left[mask] == 0 {
            if val[mask] < best.0 {
                best = (val[mask], mask);
            }
            continue;
        }
        for k in 0..s {
            if mask & (1 << k) != 0 {
                continue;
            }
            let next = mask | (1 << k);
            let v = val[mask] + left[mask];
            if v < val[next] {
                val[next] = v;
                from[next] = k;
            }
        }
    }
    let (value, mut mask) = best;
    let mut order = Vec::new();
    while mask != 0 {
        let k = from[mask];
        order.push(k);
        mask &= !(1 << k);
    }
    order.reverse();
    Ok(ExactMssc { value, order })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactUfl {
    pub value: f64,
    pub open: Vec<usize>,
    pub assignment: Vec<usize>,
}

/// Facility location ignoring latency, over every open set of size at most
/// `cardinality` when given.
pub fn exact_ufl(inst: &Instance, cardinality: Option<usize>) -> Result<ExactUfl> {
    let limit = ExactLimits::default().ufl;
    if inst.n > limit {
        return Err(too_large("exact_ufl", inst.n, limit));
    }
    let cap = cardinality.unwrap_or(inst.n);
    if cap == 0 {
        return Err(Error::InvalidParameter("cardinality must be positive".into()));
    }
    let mut best: Option<ExactUfl> = None;
    for mask in 1usize..(1 << inst.n) {
        if mask.count_ones() as usize > cap {
            continue;
        }
        let open: Vec<usize> = (0..inst.n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut value: f64 = open.iter().map(|&i| inst.f[i]).sum();
        let mut assignment = Vec::with_capacity(inst.m);
        for j in 0..inst.m {
            let &i = open
                .iter()
                .min_by(|&&a, &&b| inst.c[a][j].total_cmp(&inst.c[b][j]).then(a.cmp(&b)))
                .expect("open set is nonempty");
            value += inst.c[i][j];
            assignment.push(i);
        }
        if value.is_finite() && best.as_ref().is_none_or(|b| value < b.value - 1e-12) {
            best = Some(ExactUfl {
                value,
                open,
                assignment,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidInstance("no open set serves every client".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::desk1;
    use crate::instance::EvalMode;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn desk2() -> Metric {
        Metric::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])
    }

    #[test]
    fn desk1_optimum() {
        let inst = desk1();
        let out = exact_mlufl(&inst, &ExactLimits::default()).unwrap();
        assert_eq!(out.value, 8.0);
        assert_eq!(out.solution.routes, vec![vec![0, 1]]);
        assert_eq!(inst.evaluate(&out.solution, EvalMode::Sum).unwrap().total, 8.0);
    }

    #[test]
    fn single_free_facility() {
        let d = Metric::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let inst = Instance::new(vec![0.0], vec![vec![0.0, 0.0, 0.0]], d);
        assert_eq!(exact_mlufl(&inst, &ExactLimits::default()).unwrap().value, 3.0);
    }

    #[test]
    fn expensive_facilities_are_avoided() {
        let d = Metric::from_fn(4, |a, b| if a == b { 0.0 } else { 1.0 });
        let inst = Instance::new(vec![1e6, 1.0, 1e6], vec![vec![0.0], vec![3.0], vec![0.0]], d);
        let out = exact_mlufl(&inst, &ExactLimits::default()).unwrap();
        assert_eq!(out.solution.routes, vec![vec![1]]);
        assert_eq!(out.value, 5.0);
    }

    #[test]
    fn mlufl_cap() {
        let d = Metric::zeros(10);
        let inst = Instance::new(vec![0.0; 9], vec![vec![0.0]; 9], d);
        assert!(matches!(
            exact_mlufl(&inst, &ExactLimits::default()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn two_routes_never_hurt() {
        let inst = desk1();
        let mut two = inst.clone();
        two.k = 2;
        let one = exact_mlufl(&inst, &ExactLimits::default()).unwrap().value;
        let out = exact_mlufl(&two, &ExactLimits::default()).unwrap();
        assert!(out.value <= one);
        // r→b directly takes 2, the same as going through a
        assert_eq!(out.value, 8.0);
    }

    #[test]
    fn desk2_latency() {
        let out = exact_ml(&desk2(), 0, None, &ExactLimits::default()).unwrap();
        assert_eq!(out.value, 3.0);
        assert_eq!(out.order, vec![1, 2]);
    }

    #[test]
    fn one_node() {
        let m = Metric::from_rows(&[vec![0.0, 2.5], vec![2.5, 0.0]]);
        assert_eq!(exact_ml(&m, 0, None, &ExactLimits::default()).unwrap().value, 2.5);
    }

    #[test]
    fn dp_matches_permutations() {
        let limits = ExactLimits::default();
        for s in 0..20 {
            let mut rng = rng_from_seed(900 + s);
            let pts: Vec<(f64, f64)> = (0..7)
                .map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            let m = Metric::euclidean(&pts, false);
            let dp = exact_ml(&m, 0, None, &limits).unwrap();
            let bf = exact_ml_permutations(&m, 0, None, &limits).unwrap();
            assert!((dp.value - bf.value).abs() < 1e-9);
            assert!((ml_latency(&m, 0, &dp.order, None) - dp.value).abs() < 1e-9);
            let groups = vec![vec![1, 2], vec![3], vec![4, 5, 6]];
            let dp = exact_ml(&m, 0, Some(&groups), &limits).unwrap();
            let bf = exact_ml_permutations(&m, 0, Some(&groups), &limits).unwrap();
            assert!((dp.value - bf.value).abs() < 1e-9);
        }
    }

    #[test]
    fn mssc_fixtures() {
        let limits = ExactLimits::default();
        let out = exact_mssc(&[vec![0, 1], vec![2]], 3, &limits).unwrap();
        assert_eq!((out.value, out.order), (4, vec![0, 1]));
        assert_eq!(exact_mssc(&[vec![0, 1, 2, 3]], 4, &limits).unwrap().value, 4);
        let dup = exact_mssc(&[vec![0, 1], vec![0, 1], vec![2]], 3, &limits).unwrap();
        assert_eq!(dup.value, 4);
        assert_eq!(dup.order.len(), 2);
        assert!(exact_mssc(&[vec![0]], 2, &limits).is_err());
    }

    #[test]
    fn ufl_fixtures() {
        let inst = desk1();
        let out = exact_ufl(&inst, None).unwrap();
        assert_eq!(out.value, 5.0);
        assert_eq!(out.open, vec![0, 1]);
        let capped = exact_ufl(&inst, Some(1)).unwrap();
        assert_eq!(capped.value, 10.0);
        assert_eq!(capped.open.len(), 1);

        let free = Instance::new(vec![0.0; 2], vec![vec![1.0, 4.0], vec![3.0, 2.0]], Metric::uniform(3));
        assert_eq!(exact_ufl(&free, None).unwrap().value, 3.0);
        let single = Instance::new(vec![7.0], vec![vec![1.0, 2.0]], Metric::uniform(2));
        assert_eq!(exact_ufl(&single, None).unwrap().open, vec![0]);
    }
}
