use super::WeightedTree;
use crate::metric::Metric;

/// Prim's minimum spanning tree on `points ∪ {root}`, rooted at `root`.
/// Ties go to the smaller point index.
pub fn mst(metric: &Metric, points: &[usize], root: usize) -> WeightedTree {
    let mut pts: Vec<usize> = points.iter().copied().filter(|&p| p != root).collect();
    pts.sort_unstable();
    pts.dedup();
    pts.insert(0, root);
    let k = pts.len();
    let mut in_tree = vec![false; k];
    let mut key = vec![f64::INFINITY; k];
    let mut link = vec![0usize; k];
    key[0] = 0.0;
    for _ in 0..k {
        let mut u = usize::MAX;
        for v in 0..k {
            if !in_tree[v] && (u == usize::MAX || key[v] < key[u] || (key[v] == key[u] && pts[v] < pts[u])) {
                u = v;
            }
        }
        in_tree[u] = true;
        for v in 0..k {
            if in_tree[v] {
                continue;
            }
            let d = metric.d(pts[u], pts[v]);
            if d < key[v] || (d == key[v] && pts[u] < pts[link[v]]) {
                key[v] = d;
                link[v] = u;
            }
        }
    }
    let mut children = vec![Vec::new(); k];
    for v in 1..k {
        children[link[v]].push(v);
    }
    let mut tree = WeightedTree::new(Some(root));
    let mut queue = std::collections::VecDeque::from([(0usize, 0usize)]);
    while let Some((v, node)) = queue.pop_front() {
        for &c in &children[v] {
            let id = tree.add_child(node, key[c], Some(pts[c]));
            queue.push_back((c, id));
        }
    }
    tree
}
