use rand::Rng;

use super::WeightedTree;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const MONOTONE_TOL: f64 = 1e-9;

/// GKR rounding: each root edge is kept with probability `z_e`, every other
/// edge with probability `z_e / z_parent(e)` once its parent edge is kept.
/// `z[v]` is the value of the edge above node `v`; `z[root]` is ignored.
/// Returns the kept nodes, always a rooted connected subtree.
pub fn gkr_round(tree: &WeightedTree, z: &[f64], seed: u64) -> Result<Vec<bool>> {
    let z = checked(tree, z)?;
    let mut rng = rng_from_seed(seed);
    let mut kept = vec![false; tree.len()];
    kept[0] = true;
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root node has a parent");
        if !kept[p] {
            continue;
        }
        let prob = if p == 0 {
            z[v]
        } else if z[p] > 0.0 {
            z[v] / z[p]
        } else {
            0.0
        };
        kept[v] = prob >= 1.0 || rng.gen::<f64>() < prob;
    }
    Ok(kept)
}

/// Clamps to `[0, 1]` and caps every edge by its parent edge, top down.
/// Max flow from the root to any node set is unchanged by the capping, since
/// each unit of flow through an edge already passed its parent edge.
pub fn monotone_cap(tree: &WeightedTree, z: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = z.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    out[0] = 1.0;
    for v in 1..tree.len() {
        let p = tree.parent(v).expect("non-root node has a parent");
        if p != 0 {
            out[v] = out[v].min(out[p]);
        }
    }
    out
}

/// Max flow from the root to the nodes in `group` when edge `v` has capacity `z[v]`.
pub fn group_flow(tree: &WeightedTree, z: &[f64], group: &[usize]) -> f64 {
    let mut flow = vec![0.0; tree.len()];
    for v in (1..tree.len()).rev() {
        let below = if group.contains(&v) {
            f64::INFINITY
        } else {
            tree.children(v).iter().map(|&c| flow[c]).sum()
        };
        flow[v] = z[v].min(below);
    }
    if group.contains(&0) {
        return f64::INFINITY;
    }
    tree.children(0).iter().map(|&c| flow[c]).sum()
}

fn checked(tree: &WeightedTree, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != tree.len() {
        return Err(Error::InvalidFractional(format!(
            "{} edge values for a tree with {} nodes",
            z.len(),
            tree.len()
        )));
    }
    let mut out = z.to_vec();
    for v in 1..tree.len() {
        if !(-MONOTONE_TOL..=1.0 + MONOTONE_TOL).contains(&z[v]) {
            return Err(Error::InvalidFractional(format!(
                "edge value {} at node {v} outside [0, 1]",
                z[v]
            )));
        }
        out[v] = out[v].clamp(0.0, 1.0);
        let p = tree.parent(v).expect("non-root node has a parent");
        if p != 0 && out[v] > out[p] {
            if out[v] > out[p] + MONOTONE_TOL {
                return Err(Error::InvalidFractional(format!(
                    "edge value {} at node {v} exceeds its parent's {}",
                    out[v], out[p]
                )));
            }
            out[v] = out[p];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_seed;

    /// Root with two subtrees; seven edges, four leaves.
    pub(crate) fn seven_edge_tree() -> (WeightedTree, Vec<f64>) {
        let mut t = WeightedTree::new(Some(0));
        let a = t.add_child(0, 1.0, None);
        let b = t.add_child(0, 1.0, None);
        t.add_child(a, 1.0, Some(1));
        t.add_child(a, 1.0, Some(2));
        let c = t.add_child(b, 1.0, None);
        t.add_child(b, 1.0, Some(3));
        t.add_child(c, 1.0, Some(4));
        let z = vec![1.0, 0.8, 0.5, 0.6, 0.3, 0.4, 0.25, 0.2];
        (t, z)
    }

    #[test]
    fn all_ones_keeps_everything() {
        let (t, _) = seven_edge_tree();
        let kept = gkr_round(&t, &vec![1.0; t.len()], 1).unwrap();
        assert!(kept.iter().all(|&k| k));
    }

    #[test]
    fn all_zeros_keeps_the_root() {
        let (t, _) = seven_edge_tree();
        let kept = gkr_round(&t, &vec![0.0; t.len()], 1).unwrap();
        assert_eq!(kept.iter().filter(|&&k| k).count(), 1);
        assert!(kept[0]);
    }

    #[test]
    fn rejects_non_monotone_values() {
        let (t, mut z) = seven_edge_tree();
        z[3] = 0.9;
        assert!(gkr_round(&t, &z, 1).is_err());
        z[3] = 0.8 + 1e-12;
        assert!(gkr_round(&t, &z, 1).is_ok());
        let capped = monotone_cap(&t, &[1.0, 0.5, 0.5, 0.9, 0.1, 0.4, 0.6, 2.0]);
        assert_eq!(capped, vec![1.0, 0.5, 0.5, 0.5, 0.1, 0.4, 0.5, 0.4]);
    }

    #[test]
    fn marginals_match_edge_values() {
        let (t, z) = seven_edge_tree();
        let trials = 20000;
        let mut hits = vec![0usize; t.len()];
        for s in 0..trials {
            let kept = gkr_round(&t, &z, derive_seed(42, s)).unwrap();
            assert!(t.is_connected_subtree(&kept));
            for v in 0..t.len() {
                hits[v] += kept[v] as usize;
            }
        }
        for v in 1..t.len() {
            let p = hits[v] as f64 / trials as f64;
            let sigma = (z[v] * (1.0 - z[v]) / trials as f64).sqrt();
            assert!((p - z[v]).abs() <= 3.0 * sigma, "edge {v}: {p} vs {}", z[v]);
        }
    }

    #[test]
    fn group_flow_on_the_fixture() {
        let (t, z) = seven_edge_tree();
        // leaves 3 and 7: min(0.8, 0.6) + min(0.5, 0.25, 0.2)
        assert!((group_flow(&t, &z, &[3, 7]) - 0.8).abs() < 1e-12);
        assert!((group_flow(&t, &z, &[3, 4]) - 0.8).abs() < 1e-12);
    }
}
