//! Turning a slot-capacity-`k` fractional schedule into a capacity-one one.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::relaxations::FractionalMlufl;

/// Mass below this is treated as absent.
const EPS: f64 = 1e-12;

/// Totals before and after spreading.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadCertificate {
    pub k: usize,
    pub facility_before: f64,
    pub facility_after: f64,
    pub connection_before: f64,
    pub connection_after: f64,
    /// `Σ_{j,i,t} t·x`.
    pub latency_before: f64,
    pub latency_after: f64,
    pub client_latency_before: Vec<f64>,
    pub client_latency_after: Vec<f64>,
}

impl SpreadCertificate {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        if !close(self.facility_before, self.facility_after) {
            out.push(format!(
                "facility mass {} became {}",
                self.facility_before, self.facility_after
            ));
        }
        if !close(self.connection_before, self.connection_after) {
            out.push(format!(
                "connection {} became {}",
                self.connection_before, self.connection_after
            ));
        }
        let k = self.k as f64;
        if self.latency_after > k * self.latency_before + 1e-9 {
            out.push(format!("latency {} > {k}·{}", self.latency_after, self.latency_before));
        }
        for (j, (&a, &b)) in self
            .client_latency_after
            .iter()
            .zip(&self.client_latency_before)
            .enumerate()
        {
            if a > k * b + 1e-9 {
                out.push(format!("client {j}: latency {a} > {k}·{b}"));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Spread {
    /// Capacity-one solution over slots `1..=groups`.
    pub frac: FractionalMlufl,
    pub certificate: SpreadCertificate,
}

fn totals(inst: &Instance, frac: &FractionalMlufl) -> (f64, f64, Vec<f64>) {
    let facility: f64 = (0..frac.n).map(|i| inst.f[i] * frac.y[i].iter().sum::<f64>()).sum();
    let connection: f64 = (0..frac.m).map(|j| frac.c_star(inst, j)).sum();
    let lat = (0..frac.m).map(|j| frac.l_star(j)).collect();
    (facility, connection, lat)
}

/// Cuts the `(i, t)` pairs, ordered by slot, into consecutive groups of
/// `y`-weight exactly one (splitting a pair across groups where needed) and
/// makes group `ℓ` slot `ℓ`. Slots of `frac` are its indices plus one.
pub fn spread_schedule(inst: &Instance, frac: &FractionalMlufl, k: usize) -> Result<Spread> {
    let (n, m) = (frac.n, frac.m);
    let nt = frac.num_times();
    let cap = k as f64;
    for t in 0..nt {
        let load: f64 = (0..n).map(|i| frac.y[i][t]).sum();
        if load > cap + 1e-9 {
            return Err(Error::InvalidFractional(format!("slot {} carries {load} > {k}", t + 1)));
        }
    }
    for j in 0..m {
        let cov = frac.coverage(j);
        if cov < 1.0 - 1e-9 {
            return Err(Error::InvalidFractional(format!("client {j} covered {cov} < 1")));
        }
    }
    for i in 0..n {
        for t in 0..nt {
            for j in 0..m {
                if frac.x[i][j][t] > frac.y[i][t] + 1e-9 {
                    return Err(Error::InvalidFractional(format!("x[{i}][{j}][{t}] exceeds y")));
                }
            }
        }
    }

    let total: f64 = frac.y.iter().flatten().sum();
    let groups = ((total - 1e-9).ceil() as usize).max(1);
    let mut out = FractionalMlufl::zeros(n, m, (1..=groups).map(|g| g as f64).collect(), false);
    let mut group = 0usize;
    let mut room = 1.0f64;
    for t in 0..nt {
        for i in 0..n {
            let mut yw = frac.y[i][t];
            if yw <= EPS {
                continue;
            }
            let mut xs: Vec<f64> = (0..m).map(|j| frac.x[i][j][t]).collect();
            while yw > EPS {
                let g = group.min(groups - 1);
                if yw <= room + EPS {
                    out.y[i][g] += yw;
                    for (j, x) in xs.iter_mut().enumerate() {
                        out.x[i][j][g] += *x;
                        *x = 0.0;
                    }
                    room -= yw;
                    yw = 0.0;
                } else {
                    let take = room;
                    out.y[i][g] += take;
                    for (j, x) in xs.iter_mut().enumerate() {
                        let part = x.min(take);
                        out.x[i][j][g] += part;
                        *x -= part;
                    }
                    yw -= take;
                    room = 0.0;
                }
                if room <= EPS {
                    group += 1;
                    room = 1.0;
                }
            }
        }
    }

    let (fb, cb, lb) = totals(inst, frac);
    let (fa, ca, la) = totals(inst, &out);
    let certificate = SpreadCertificate {
        k,
        facility_before: fb,
        facility_after: fa,
        connection_before: cb,
        connection_after: ca,
        latency_before: lb.iter().sum(),
        latency_after: la.iter().sum(),
        client_latency_before: lb,
        client_latency_after: la,
    };
    Ok(Spread { frac: out, certificate })
}
