use super::WeightedTree;
use crate::metric::Metric;

/// A walk from the root, visiting each point once.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    /// Points in visiting order; `nodes[0]` is the root.
    pub nodes: Vec<usize>,
    /// `arrival[a]` is the walk length up to `nodes[a]`.
    pub arrival: Vec<f64>,
    /// Length of the open walk, ending at the last point.
    pub length: f64,
    /// Length including the return to the root.
    pub closed_length: f64,
}

impl Tour {
    pub fn from_sequence(metric: &Metric, nodes: Vec<usize>) -> Tour {
        assert!(!nodes.is_empty(), "a tour contains at least its root");
        let mut arrival = Vec::with_capacity(nodes.len());
        let mut at = 0.0;
        arrival.push(0.0);
        for w in nodes.windows(2) {
            at += metric.d(w[0], w[1]);
            arrival.push(at);
        }
        let back = metric.d(*nodes.last().expect("nonempty"), nodes[0]);
        Tour {
            nodes,
            arrival,
            length: at,
            closed_length: at + back,
        }
    }

    pub fn root(&self) -> usize {
        self.nodes[0]
    }

    pub fn first_visit(&self, point: usize) -> Option<f64> {
        self.nodes.iter().position(|&v| v == point).map(|a| self.arrival[a])
    }

    pub fn contains(&self, point: usize) -> bool {
        self.nodes.contains(&point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Children in index order.
    Forward,
    /// Children in reverse index order, i.e. the Euler circuit walked backwards.
    Reverse,
    /// Whichever of the two has the smaller total arrival time.
    Best,
}

/// Shortcut Euler tour of `tree`, starting at the root's point.
pub fn euler_tour(tree: &WeightedTree, metric: &Metric, direction: Direction) -> Tour {
    euler_tour_weighted(tree, metric, direction, |_| 1.0)
}

/// As [`euler_tour`]; `Best` compares `Σ weight(v)·arrival(v)`.
pub fn euler_tour_weighted(
    tree: &WeightedTree,
    metric: &Metric,
    direction: Direction,
    weight: impl Fn(usize) -> f64,
) -> Tour {
    match direction {
        Direction::Forward => Tour::from_sequence(metric, preorder(tree, false)),
        Direction::Reverse => Tour::from_sequence(metric, preorder(tree, true)),
        Direction::Best => {
            let fwd = Tour::from_sequence(metric, preorder(tree, false));
            let rev = Tour::from_sequence(metric, preorder(tree, true));
            let score = |t: &Tour| -> f64 { t.nodes.iter().zip(&t.arrival).map(|(&v, a)| weight(v) * a).sum() };
            if score(&rev) < score(&fwd) - 1e-12 {
                rev
            } else {
                fwd
            }
        }
    }
}

fn preorder(tree: &WeightedTree, reverse: bool) -> Vec<usize> {
    let root_point = tree.point(tree.root()).expect("tour root carries a point");
    let mut seen = vec![root_point];
    let mut stack = vec![tree.root()];
    while let Some(v) = stack.pop() {
        if let Some(p) = tree.point(v) {
            if !seen.contains(&p) {
                seen.push(p);
            }
        }
        let ch = tree.children(v);
        if reverse {
            stack.extend(ch.iter().copied());
        } else {
            stack.extend(ch.iter().rev().copied());
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxations::ml::tests::desk2;
    use crate::treekit::mst;

    #[test]
    fn path_tree() {
        let m = desk2();
        let mut t = WeightedTree::new(Some(0));
        t.add_child(0, 1.0, Some(1));
        let tour = euler_tour(&t, &m, Direction::Forward);
        assert_eq!(tour.nodes, vec![0, 1]);
        assert!(tour.closed_length <= 2.0);
    }

    #[test]
    fn unit_star_within_doubling() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
        let m = Metric::euclidean(&pts, false);
        let mut t = WeightedTree::new(Some(0));
        for v in 1..4 {
            t.add_child(0, 1.0, Some(v));
        }
        for dir in [Direction::Forward, Direction::Reverse, Direction::Best] {
            let tour = euler_tour(&t, &m, dir);
            assert_eq!(tour.nodes.len(), 4);
            assert!(tour.closed_length <= 6.0 + 1e-12);
        }
        assert_eq!(euler_tour(&t, &m, Direction::Reverse).nodes, vec![0, 3, 2, 1]);
    }

    #[test]
    fn desk2_mst_tour() {
        let m = desk2();
        let tree = mst(&m, &[0, 1, 2], 0);
        let tour = euler_tour(&tree, &m, Direction::Best);
        assert!(tour.closed_length <= 4.0 + 1e-12);
        assert_eq!(tour.nodes, vec![0, 1, 2]);
        assert_eq!(tour.arrival, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn best_picks_smaller_latency_sum() {
        // root with a near leaf (index 2) listed after a far one (index 1)
        let m = Metric::from_rows(&[vec![0.0, 5.0, 1.0], vec![5.0, 0.0, 6.0], vec![1.0, 6.0, 0.0]]);
        let mut t = WeightedTree::new(Some(0));
        t.add_child(0, 5.0, Some(1));
        t.add_child(0, 1.0, Some(2));
        let best = euler_tour(&t, &m, Direction::Best);
        assert_eq!(best.nodes, vec![0, 2, 1]);
        let fwd = euler_tour(&t, &m, Direction::Forward);
        assert!(best.arrival.iter().sum::<f64>() <= fwd.arrival.iter().sum::<f64>());
    }
}
