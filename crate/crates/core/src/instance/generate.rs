//! Seeded random instance families.

use super::{Instance, Tag};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Points in the square; time and connection share the plane distance.
    Euclidean,
    /// Connection metric on points, time metric equal to it divided by `M`.
    Related(f64),
    /// Unit time metric, arbitrary connection costs.
    Uniform,
    /// Unit time metric, connection costs from a point metric.
    MetricUniform,
    /// Zero facility costs on a unit time metric.
    Zfc,
    /// Group latency: client `j` is a group of facilities (c = 0 inside, ∞ outside).
    Mgl { disjoint: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    /// Side of the square points are drawn from; also the cost range.
    pub scale: f64,
    /// Round distances and costs up to integers.
    pub integral: bool,
}

impl GenSpec {
    pub fn new(family: Family, n: usize, m: usize) -> Self {
        GenSpec {
            family,
            n,
            m,
            scale: 10.0,
            integral: true,
        }
    }
}

fn round(v: f64, integral: bool) -> f64 {
    if integral {
        v.ceil()
    } else {
        v
    }
}

/// Same spec and seed give the identical instance.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Instance> {
    let (n, m) = (spec.n, spec.m);
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!("need n, m >= 1, got n={n}, m={m}")));
    }
    if !(spec.scale > 0.0) {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    if let Family::Mgl { disjoint: true } = spec.family {
        if m > n {
            return Err(Error::InvalidParameter(format!(
                "{m} disjoint groups need at least {m} facilities, got {n}"
            )));
        }
    }
    if let Family::Related(factor) = spec.family {
        if !(factor >= 1.0) {
            return Err(Error::InvalidParameter(format!("related factor {factor} must be >= 1")));
        }
    }
    let mut rng = rng_from_seed(seed);
    let s = spec.scale;
    let ig = spec.integral;
    let mut points = |count: usize| -> Vec<(f64, f64)> {
        (0..count)
            .map(|_| (rng.gen_range(0.0..s), rng.gen_range(0.0..s)))
            .collect()
    };
    let pts = points(n + 1 + m);
    let mut rng = rng_from_seed(seed ^ 0x5eed_c057);
    let mut costs = |count: usize| -> Vec<f64> { (0..count).map(|_| round(rng.gen_range(0.0..s), ig)).collect() };

    let point_metric = || Metric::euclidean(&pts, ig);
    let c_from =
        |fm: &Metric| -> Vec<Vec<f64>> { (0..n).map(|i| (0..m).map(|j| fm.d(i, n + 1 + j)).collect()).collect() };

    let inst = match spec.family {
        Family::Euclidean => {
            let fm = point_metric();
            let mut inst = Instance::new(costs(n), c_from(&fm), fm.submetric(&(0..=n).collect::<Vec<_>>()));
            inst.tags = vec![Tag::Euclidean, Tag::Metric];
            inst.full_metric = Some(fm);
            inst
        }
        Family::Related(factor) => {
            let base = point_metric();
            let fm = Metric::from_fn(base.len(), |u, v| factor * base.d(u, v));
            let d = Metric::from_fn(n + 1, |u, v| fm.d(u, v) / factor);
            let mut inst = Instance::new(costs(n), c_from(&fm), d);
            inst.tags = vec![Tag::Related(factor), Tag::Metric];
            inst.full_metric = Some(fm);
            inst
        }
        Family::Uniform => {
            let f = costs(n);
            let c = (0..n).map(|_| costs(m)).collect();
            let mut inst = Instance::new(f, c, Metric::uniform(n + 1));
            inst.tags = vec![Tag::Uniform];
            inst
        }
        Family::MetricUniform => {
            let fm = point_metric();
            let mut inst = Instance::new(costs(n), c_from(&fm), Metric::uniform(n + 1));
            inst.tags = vec![Tag::Uniform, Tag::Metric];
            inst.full_metric = Some(fm);
            inst
        }
        Family::Zfc => {
            let c = (0..n).map(|_| costs(m)).collect();
            let mut inst = Instance::new(vec![0.0; n], c, Metric::uniform(n + 1));
            inst.tags = vec![Tag::Uniform, Tag::Zfc];
            inst
        }
        Family::Mgl { disjoint } => {
            let fm = point_metric();
            let d = fm.submetric(&(0..=n).collect::<Vec<_>>());
            let mut grng = rng_from_seed(seed ^ 0x0067_7275_7073);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
            if disjoint {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut grng);
                for (pos, &i) in perm.iter().enumerate() {
                    let g = if pos < m { pos } else { grng.gen_range(0..m) };
                    members[g].push(i);
                }
            } else {
                for group in members.iter_mut() {
                    let size = grng.gen_range(1..=n.min(3));
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.shuffle(&mut grng);
                    group.extend_from_slice(&perm[..size]);
                }
            }
            let mut c = vec![vec![f64::INFINITY; m]; n];
            for (j, group) in members.iter().enumerate() {
                for &i in group {
                    c[i][j] = 0.0;
                }
            }
            let mut inst = Instance::new(vec![0.0; n], c, d);
            inst.tags = vec![Tag::Mgl, Tag::Zfc];
            inst
        }
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::super::instance_to_json;
    use super::*;

    #[test]
    fn uniform_family() {
        let inst = generate(&GenSpec::new(Family::Uniform, 4, 3), 7).unwrap();
        assert!(inst.validate().is_valid());
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(inst.d.d(u, v), if u == v { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn related_family_is_consistent() {
        for factor in [1.0, 2.0, 3.0, 5.0] {
            let inst = generate(&GenSpec::new(Family::Related(factor), 5, 4), 3).unwrap();
            let rep = inst.validate();
            assert!(rep.is_valid(), "{rep}");
            let fm = inst.full_metric.as_ref().unwrap();
            assert_eq!(inst.d.d(0, 5), fm.d(0, 5) / factor);
        }
    }

    #[test]
    fn mgl_family() {
        let inst = generate(&GenSpec::new(Family::Mgl { disjoint: true }, 6, 3), 1).unwrap();
        assert!(inst.validate().is_valid());
        assert!(inst.f.iter().all(|&f| f == 0.0));
        assert!(inst.c.iter().flatten().all(|&c| c == 0.0 || c.is_infinite()));
        for i in 0..6 {
            assert_eq!(inst.c[i].iter().filter(|c| **c == 0.0).count(), 1);
        }
    }

    #[test]
    fn every_family_validates() {
        let fams = [
            Family::Euclidean,
            Family::Related(2.0),
            Family::Uniform,
            Family::MetricUniform,
            Family::Zfc,
            Family::Mgl { disjoint: false },
        ];
        for fam in fams {
            for seed in 0..5 {
                let mut spec = GenSpec::new(fam, 5, 6);
                spec.integral = seed % 2 == 0;
                let inst = generate(&spec, seed).unwrap();
                let rep = inst.validate();
                assert!(rep.is_valid(), "{fam:?}: {rep}");
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let spec = GenSpec::new(Family::Euclidean, 6, 5);
        let a = instance_to_json(&generate(&spec, 99).unwrap());
        let b = instance_to_json(&generate(&spec, 99).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, instance_to_json(&generate(&spec, 100).unwrap()));
    }

    #[test]
    fn infeasible_sizes() {
        assert!(generate(&GenSpec::new(Family::Uniform, 0, 3), 0).is_err());
        assert!(generate(&GenSpec::new(Family::Mgl { disjoint: true }, 2, 3), 0).is_err());
    }
}
