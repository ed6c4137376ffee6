use serde::{Deserialize, Serialize};

/// Symmetric distance matrix over `len()` points, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    size: usize,
    dist: Vec<f64>,
}

impl Metric {
    pub fn zeros(size: usize) -> Self {
        Metric {
            size,
            dist: vec![0.0; size * size],
        }
    }

    /// Builds a metric from nested rows; the caller is responsible for symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let size = rows.len();
        let mut m = Metric::zeros(size);
        for (u, row) in rows.iter().enumerate() {
            for (v, &d) in row.iter().enumerate().take(size) {
                m.dist[u * size + v] = d;
            }
        }
        m
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Metric::zeros(size);
        for u in 0..size {
            for v in 0..size {
                m.dist[u * size + v] = if u == v { 0.0 } else { f(u, v) };
            }
        }
        m
    }

    /// Euclidean distances between points, optionally rounded up to integers.
    /// Ceiling preserves the triangle inequality.
    pub fn euclidean(points: &[(f64, f64)], integral: bool) -> Self {
        Metric::from_fn(points.len(), |u, v| {
            let (dx, dy) = (points[u].0 - points[v].0, points[u].1 - points[v].1);
            let d = (dx * dx + dy * dy).sqrt();
            if integral {
                d.ceil()
            } else {
                d
            }
        })
    }

    pub fn uniform(size: usize) -> Self {
        Metric::from_fn(size, |_, _| 1.0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.size + v]
    }

    pub fn set(&mut self, u: usize, v: usize, d: f64) {
        self.dist[u * self.size + v] = d;
        self.dist[v * self.size + u] = d;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|u| self.dist[u * self.size..(u + 1) * self.size].to_vec())
            .collect()
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Restriction to `points`, in the given order.
    pub fn submetric(&self, points: &[usize]) -> Metric {
        Metric::from_fn(points.len(), |a, b| self.d(points[a], points[b]))
    }

    /// Length of the walk visiting `seq` in order.
    pub fn walk_length(&self, seq: &[usize]) -> f64 {
        seq.windows(2).map(|w| self.d(w[0], w[1])).sum()
    }

    /// Returns every `(u, v, w)` with `d(u,w) > d(u,v) + d(v,w) + tol`, capped at `limit`.
    pub fn triangle_violations(&self, tol: f64, limit: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.size {
            for w in (u + 1)..self.size {
                for v in 0..self.size {
                    if v != u && v != w && self.d(u, w) > self.d(u, v) + self.d(v, w) + tol {
                        out.push((u, v, w));
                        if out.len() >= limit {
                            return out;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.size)
            .all(|u| (0..self.size).all(|v| (self.d(u, v) - self.d(v, u)).abs() <= tol) && self.d(u, u).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceiling_keeps_triangle_inequality() {
        let pts = [(0.0, 0.0), (0.4, 0.3), (1.3, 0.1), (2.2, 2.9)];
        let m = Metric::euclidean(&pts, true);
        assert!(m.triangle_violations(1e-9, 1).is_empty());
        assert_eq!(m.d(0, 1), 1.0);
    }

    #[test]
    fn detects_violation() {
        let m = Metric::from_rows(&[vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]]);
        assert_eq!(m.triangle_violations(1e-9, 10), vec![(0, 1, 2)]);
    }
}
