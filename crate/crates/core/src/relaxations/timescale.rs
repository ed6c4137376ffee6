use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::metric::Metric;

/// Sorted, strictly increasing set of integer time points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale {
    /// Geometric ratio minus one, or 0 for the full integer grid.
    pub eps: f64,
    times: Vec<f64>,
}

impl TimeScale {
    /// `{⌈(1+ε)^r⌉ : r ≥ 0}` (distinct values) up to the first point at or
    /// beyond `horizon`.
    pub fn geometric(eps: f64, horizon: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
        }
        let horizon = horizon.max(1.0);
        let mut times: Vec<f64> = Vec::new();
        let mut r = 0i32;
        loop {
            // Guard against powers that land a hair above an integer.
            let t = ((1.0 + eps).powi(r) - 1e-9).ceil().max(1.0);
            if times.last() != Some(&t) {
                times.push(t);
            }
            if t >= horizon {
                break;
            }
            r += 1;
        }
        Ok(TimeScale { eps, times })
    }

    /// Every integer `1..=⌈horizon⌉`.
    pub fn full(horizon: f64) -> Self {
        let last = horizon.max(1.0).ceil() as usize;
        TimeScale {
            eps: 0.0,
            times: (1..=last).map(|t| t as f64).collect(),
        }
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
            return Err(Error::InvalidParameter(
                "time grid must be nonnegative and strictly increasing".into(),
            ));
        }
        Ok(TimeScale { eps: 0.0, times })
    }

    /// Geometric grid for `inst`, starting at 0 when some facility sits at
    /// the root and can be activated immediately.
    pub fn for_instance(inst: &Instance, eps: f64) -> Result<Self> {
        Ok(Self::geometric(eps, horizon(inst))?.with_zero_for(inst))
    }

    pub fn full_for_instance(inst: &Instance) -> Self {
        Self::full(horizon(inst)).with_zero_for(inst)
    }

    /// Adds time 0 when some point of `metric` other than `root` sits on it.
    pub fn with_zero_for_metric(mut self, metric: &Metric, root: usize) -> Self {
        if self.times[0] > 0.0 && (0..metric.len()).any(|v| v != root && metric.d(root, v) == 0.0) {
            self.times.insert(0, 0.0);
        }
        self
    }

    fn with_zero_for(mut self, inst: &Instance) -> Self {
        if (0..inst.n).any(|i| inst.d_root(i) == 0.0) {
            self.times.insert(0, 0.0);
        }
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().expect("time scale is never empty")
    }

    /// Index of the earliest grid time `≥ x`, clamped to the last point.
    pub fn index_at_least(&self, x: f64) -> usize {
        self.times.partition_point(|&t| t < x - 1e-9).min(self.times.len() - 1)
    }

    /// Earliest grid time `≥ x`; the last point when `x` is beyond the grid.
    pub fn ts(&self, x: f64) -> f64 {
        self.times[self.index_at_least(x)]
    }

    /// Index of the latest grid time `≤ x`, if any.
    pub fn index_at_most(&self, x: f64) -> Option<usize> {
        self.times.partition_point(|&t| t <= x + 1e-9).checked_sub(1)
    }
}

/// Latest activation time any sensible solution needs: the route budget when
/// one is given, otherwise `min{n, m}·d_max`.
pub fn horizon(inst: &Instance) -> f64 {
    if let Some(b) = inst.budget.filter(|b| b.is_finite()) {
        return b.max(1.0);
    }
    (inst.n.min(inst.m) as f64 * inst.d.max_distance()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_grid() {
        let ts = TimeScale::geometric(1.0, 8.0).unwrap();
        assert_eq!(ts.times(), &[1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn fine_grid_is_distinct_and_bounded() {
        let ts = TimeScale::geometric(0.1, 100.0).unwrap();
        assert!(ts.times().windows(2).all(|w| w[0] < w[1]));
        assert!(ts.last() >= 100.0);
        for x in 1..=100 {
            let x = x as f64;
            assert!(ts.ts(x) >= x && ts.ts(x) <= 1.1 * x + 1e-9, "x={x}");
        }
    }

    #[test]
    fn map_and_clamp() {
        let ts = TimeScale::geometric(0.5, 10.0).unwrap();
        // 1, 2, 3, 4, 6, 8, 12
        assert_eq!(ts.times(), &[1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0]);
        assert_eq!(ts.ts(3.0), 3.0);
        assert_eq!(ts.ts(5.0), 6.0);
        assert_eq!(ts.ts(100.0), 12.0);
        assert_eq!(ts.index_at_most(5.0), Some(3));
        assert_eq!(ts.index_at_most(0.5), None);
    }

    #[test]
    fn facility_at_the_root_adds_time_zero() {
        let d = crate::metric::Metric::from_rows(&[vec![0.0, 2.0, 0.0], vec![2.0, 0.0, 2.0], vec![0.0, 2.0, 0.0]]);
        let inst = Instance::new(vec![0.0, 0.0], vec![vec![0.0], vec![0.0]], d);
        assert_eq!(TimeScale::full_for_instance(&inst).times(), &[0.0, 1.0, 2.0]);
        assert_eq!(TimeScale::for_instance(&inst, 1.0).unwrap().times(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(TimeScale::geometric(0.0, 4.0).is_err());
        assert!(TimeScale::geometric(1.5, 4.0).is_err());
    }
}
