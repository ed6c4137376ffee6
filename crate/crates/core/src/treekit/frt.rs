use rand::seq::SliceRandom;
use rand::Rng;

use super::WeightedTree;
use crate::metric::Metric;
use crate::rng::rng_from_seed;

/// Random hierarchically separated tree over `points ∪ {root}`, rooted at
/// the leaf of `root`. Every point is a node, internal nodes carry no point,
/// and tree distances dominate metric distances.
///
/// Clusters at level `i` have radius `r_i = β·2^(i-1)·dmin` around the first
/// point of a random order within that radius. A level-`i` cluster hangs
/// below its parent by an edge of weight `r_max(i,1)`, so two points split
/// below a level-`i+1` cluster are `2·r_(i+1)` apart in the tree, which is
/// the diameter bound of that cluster.
pub fn frt_embed(metric: &Metric, points: &[usize], root: usize, seed: u64) -> WeightedTree {
    let mut pts: Vec<usize> = points.to_vec();
    pts.push(root);
    pts.sort_unstable();
    pts.dedup();
    if pts.len() == 1 {
        return WeightedTree::new(Some(root));
    }
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for (a, &u) in pts.iter().enumerate() {
        for &v in &pts[a + 1..] {
            let d = metric.d(u, v);
            if d > 0.0 {
                dmin = dmin.min(d);
            }
            dmax = dmax.max(d);
        }
    }
    if dmax == 0.0 {
        let mut t = WeightedTree::new(Some(root));
        for &p in pts.iter().filter(|&&p| p != root) {
            t.add_child(0, 0.0, Some(p));
        }
        return t;
    }

    let mut rng = rng_from_seed(seed);
    let mut order = pts.clone();
    order.shuffle(&mut rng);
    let beta: f64 = rng.gen_range(1.0..2.0);
    let top = ((dmax / dmin).log2().ceil() as i32 + 1).max(1);
    let radius = |i: i32| beta * 2f64.powi(i - 1) * dmin;

    let mut tree = WeightedTree::new(None);
    // (tree node, members, level)
    let mut stack = vec![(0usize, pts.clone(), top)];
    while let Some((node, members, level)) = stack.pop() {
        if level == 0 {
            if members.len() == 1 {
                tree.point[node] = Some(members[0]);
            } else {
                for &p in &members {
                    tree.add_child(node, 0.0, Some(p));
                }
            }
            continue;
        }
        let r = radius(level - 1);
        let mut parts: Vec<(usize, Vec<usize>)> = Vec::new();
        for &v in &members {
            let c = order
                .iter()
                .position(|&u| metric.d(u, v) <= r)
                .expect("a point lies within its own radius");
            match parts.iter_mut().find(|(k, _)| *k == c) {
                Some((_, m)) => m.push(v),
                None => parts.push((c, vec![v])),
            }
        }
        parts.sort_by_key(|(c, _)| *c);
        let w = radius((level - 1).max(1));
        for (_, part) in parts {
            let child = tree.add_child(node, w, None);
            stack.push((child, part, level - 1));
        }
    }
    let at = tree.node_of(root).expect("root is embedded");
    tree.rerooted(at)
}
