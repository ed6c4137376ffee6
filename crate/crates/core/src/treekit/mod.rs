//! Rooted weighted trees and the tree algorithms the roundings share:
//! random tree embeddings, GKR subtree sampling, minimum spanning trees,
//! Euler tours and tour concatenation.

mod frt;
mod gk;
mod gkr;
mod mst;
mod tour;

pub use frt::frt_embed;
pub use gk::{gk_concatenate, GkPlan};
pub use gkr::{gkr_round, group_flow, monotone_cap};
pub use mst::mst;
pub use tour::{euler_tour, euler_tour_weighted, Direction, Tour};

/// A rooted tree whose nodes may stand for metric points.
///
/// Parents always have smaller indices than their children, so a forward
/// scan visits every node after its parent.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    parent: Vec<Option<usize>>,
    /// Weight of the edge to the parent (0 at the root).
    weight: Vec<f64>,
    point: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl WeightedTree {
    pub fn new(root_point: Option<usize>) -> Self {
        WeightedTree {
            parent: vec![None],
            weight: vec![0.0],
            point: vec![root_point],
            children: vec![Vec::new()],
        }
    }

    pub fn add_child(&mut self, parent: usize, weight: f64, point: Option<usize>) -> usize {
        assert!(parent < self.len(), "parent {parent} does not exist");
        let v = self.len();
        self.parent.push(Some(parent));
        self.weight.push(weight);
        self.point.push(point);
        self.children.push(Vec::new());
        self.children[parent].push(v);
        v
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weight[v]
    }

    pub fn point(&self, v: usize) -> Option<usize> {
        self.point[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn node_of(&self, point: usize) -> Option<usize> {
        self.point.iter().position(|&p| p == Some(point))
    }

    /// Points carried by the nodes, in node order.
    pub fn points(&self) -> Vec<usize> {
        self.point.iter().flatten().copied().collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }

    /// Total weight of the edges above the nodes marked in `kept`.
    pub fn weight_of(&self, kept: &[bool]) -> f64 {
        (1..self.len()).filter(|&v| kept[v]).map(|v| self.weight[v]).sum()
    }

    fn ancestors(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(p) = self.parent[v] {
            out.push(p);
            v = p;
        }
        out
    }

    /// Non-root nodes whose parent edge lies on the `u`–`v` path.
    pub fn path_edges(&self, u: usize, v: usize) -> Vec<usize> {
        let au = self.ancestors(u);
        let av = self.ancestors(v);
        let mut i = au.len();
        let mut j = av.len();
        while i > 0 && j > 0 && au[i - 1] == av[j - 1] {
            i -= 1;
            j -= 1;
        }
        au[..i].iter().chain(&av[..j]).copied().collect()
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.path_edges(u, v).iter().map(|&e| self.weight[e]).sum()
    }

    /// Tree distance between the nodes of two points.
    pub fn point_distance(&self, p: usize, q: usize) -> Option<f64> {
        Some(self.distance(self.node_of(p)?, self.node_of(q)?))
    }

    /// Same tree rooted at `new_root`, with point-less nodes of degree two
    /// spliced out (their two edges merge).
    pub fn rerooted(&self, new_root: usize) -> WeightedTree {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.len()];
        for v in 1..self.len() {
            let p = self.parent[v].expect("non-root node has a parent");
            adj[v].push((p, self.weight[v]));
            adj[p].push((v, self.weight[v]));
        }
        let mut out = WeightedTree::new(self.point[new_root]);
        // (old node, previous old node, new parent, accumulated weight)
        let mut stack: Vec<(usize, usize, usize, f64)> = Vec::new();
        for &(c, w) in adj[new_root].iter().rev() {
            stack.push((c, new_root, 0, w));
        }
        while let Some((u, from, new_parent, w)) = stack.pop() {
            let onward: Vec<(usize, f64)> = adj[u].iter().copied().filter(|&(x, _)| x != from).collect();
            if self.point[u].is_none() && onward.len() == 1 {
                let (next, w2) = onward[0];
                stack.push((next, u, new_parent, w + w2));
                continue;
            }
            let me = out.add_child(new_parent, w, self.point[u]);
            for &(c, w2) in onward.iter().rev() {
                stack.push((c, u, me, w2));
            }
        }
        out
    }

    /// Same shape with every node's point replaced by `f(point)`.
    pub fn map_points(&self, f: impl Fn(usize) -> Option<usize>) -> WeightedTree {
        let mut out = self.clone();
        for p in out.point.iter_mut() {
            *p = p.and_then(&f);
        }
        out
    }

    /// Whether `kept` is a rooted subtree: the root is kept and so is the
    /// parent of every kept node.
    pub fn is_connected_subtree(&self, kept: &[bool]) -> bool {
        kept[self.root()] && (1..self.len()).all(|v| !kept[v] || kept[self.parent[v].expect("has parent")])
    }

    /// The kept part as a tree of its own (kept must be a rooted subtree).
    pub fn induced(&self, kept: &[bool]) -> WeightedTree {
        let mut out = WeightedTree::new(self.point[0]);
        let mut map = vec![usize::MAX; self.len()];
        map[0] = 0;
        for v in 1..self.len() {
            let p = self.parent[v].expect("has parent");
            if kept[v] && map[p] != usize::MAX {
                map[v] = out.add_child(map[p], self.weight[v], self.point[v]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WeightedTree {
        // 0 -(1)- 1 -(2)- 2, 1 -(3)- 3, 0 -(4)- 4
        let mut t = WeightedTree::new(Some(10));
        let a = t.add_child(0, 1.0, None);
        t.add_child(a, 2.0, Some(12));
        t.add_child(a, 3.0, Some(13));
        t.add_child(0, 4.0, Some(14));
        t
    }

    #[test]
    fn distances_follow_the_path() {
        let t = sample();
        assert_eq!(t.distance(2, 3), 5.0);
        assert_eq!(t.distance(2, 4), 7.0);
        assert_eq!(t.point_distance(12, 10), Some(3.0));
        assert_eq!(t.total_weight(), 10.0);
    }

    #[test]
    fn rerooting_preserves_point_distances() {
        let t = sample();
        let r = t.rerooted(2);
        assert_eq!(r.point(0), Some(12));
        for p in [10, 12, 13, 14] {
            for q in [10, 12, 13, 14] {
                assert_eq!(t.point_distance(p, q), r.point_distance(p, q));
            }
        }
        for v in 1..r.len() {
            assert!(r.parent(v).unwrap() < v);
        }
    }

    #[test]
    fn induced_subtree() {
        let t = sample();
        let kept = vec![true, true, false, true, false];
        assert!(t.is_connected_subtree(&kept));
        let s = t.induced(&kept);
        assert_eq!(s.points(), vec![10, 13]);
        assert_eq!(s.total_weight(), 4.0);
        assert!(!t.is_connected_subtree(&[true, false, true, false, false]));
    }
}
