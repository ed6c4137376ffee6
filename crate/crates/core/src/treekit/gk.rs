use super::Tour;
use crate::error::{Error, Result};

/// A subsequence of closed tours to be walked one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct GkPlan {
    /// Indices into the input tours, increasing.
    pub chosen: Vec<usize>,
    /// Points in visiting order, root first, duplicates skipped.
    pub order: Vec<usize>,
    /// Upper bound on the summed visit times of the universe along `order`.
    pub bound: f64,
}

/// Picks the subsequence of `tours` (ending with the last one) minimising
/// `Σ_a C_a·(points of the universe not covered by the previously chosen tour)`,
/// where `C_a` is the closed length of the `a`-th chosen tour. A point first
/// covered by tour `a` is reached no later than the sum of the closed
/// lengths up to `a`, which makes the value an upper bound on the latency.
pub fn gk_concatenate(tours: &[Tour], universe: &[usize]) -> Result<GkPlan> {
    let last = tours
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidParameter("no tours to concatenate".into()))?;
    if let Some(&v) = universe.iter().find(|&&v| !tours[last].contains(v)) {
        return Err(Error::InvalidParameter(format!(
            "last tour misses point {v} of the universe"
        )));
    }
    let u = universe.len() as f64;
    let covered: Vec<f64> = tours
        .iter()
        .map(|t| universe.iter().filter(|&&v| t.contains(v)).count() as f64)
        .collect();
    let mut best = vec![f64::INFINITY; tours.len()];
    let mut prev = vec![None; tours.len()];
    for i in 0..tours.len() {
        best[i] = tours[i].closed_length * u;
        for p in 0..i {
            let cand = best[p] + tours[i].closed_length * (u - covered[p]);
            if cand < best[i] {
                best[i] = cand;
                prev[i] = Some(p);
            }
        }
    }
    let mut chosen = vec![last];
    while let Some(p) = prev[*chosen.last().expect("nonempty")] {
        chosen.push(p);
    }
    chosen.reverse();
    let root = tours[chosen[0]].root();
    let mut order = vec![root];
    for &i in &chosen {
        for &v in &tours[i].nodes {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }
    Ok(GkPlan {
        chosen,
        order,
        bound: best[last],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    fn tour(nodes: Vec<usize>, closed: f64) -> Tour {
        let k = nodes.len();
        Tour {
            nodes,
            arrival: vec![0.0; k],
            length: closed,
            closed_length: closed,
        }
    }

    #[test]
    fn single_tour_is_itself() {
        let t = tour(vec![0, 1, 2], 4.0);
        let plan = gk_concatenate(&[t], &[1, 2]).unwrap();
        assert_eq!(plan.chosen, vec![0]);
        assert_eq!(plan.order, vec![0, 1, 2]);
        assert_eq!(plan.bound, 8.0);
    }

    #[test]
    fn skips_a_useless_short_tour() {
        let t1 = tour(vec![0, 1], 10.0);
        let t2 = tour(vec![0, 1, 2, 3, 4, 5], 10.0);
        let plan = gk_concatenate(&[t1, t2], &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(plan.chosen, vec![1]);
        assert_eq!(plan.bound, 50.0);
    }

    #[test]
    fn zero_cost_tours() {
        let plan = gk_concatenate(&[tour(vec![0, 1], 0.0), tour(vec![0, 1, 2], 0.0)], &[1, 2]).unwrap();
        assert_eq!(plan.bound, 0.0);
    }

    #[test]
    fn last_tour_must_cover() {
        assert!(gk_concatenate(&[tour(vec![0, 1], 1.0)], &[1, 2]).is_err());
        assert!(gk_concatenate(&[], &[1]).is_err());
    }

    #[test]
    fn bound_dominates_the_walk() {
        // points on a line: 0 root, 1 at 1, 2 at 3, 3 at 8
        let m = Metric::from_fn(4, |a, b| {
            let x = [0.0, 1.0, 3.0, 8.0];
            f64::abs(x[a] - x[b])
        });
        let tours = vec![
            Tour::from_sequence(&m, vec![0, 1]),
            Tour::from_sequence(&m, vec![0, 1, 2]),
            Tour::from_sequence(&m, vec![0, 2, 1, 3]),
        ];
        let universe = [1, 2, 3];
        let plan = gk_concatenate(&tours, &universe).unwrap();
        let walk = Tour::from_sequence(&m, plan.order.clone());
        let latency: f64 = universe.iter().map(|&v| walk.first_visit(v).unwrap()).sum();
        assert!(latency <= plan.bound + 1e-12);
        let all: f64 = tours[0].closed_length * 3.0 + tours[1].closed_length * 2.0 + tours[2].closed_length * 1.0;
        assert!(plan.bound <= all);
    }
}
