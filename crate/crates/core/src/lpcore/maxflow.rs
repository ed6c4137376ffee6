//! Shortest-augmenting-path max flow on small dense networks.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub nodes: usize,
    /// Directed arcs `(from, to, capacity)`; parallel arcs add up.
    pub arcs: Vec<(usize, usize, f64)>,
    pub source: usize,
    pub sink: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
            source,
            sink,
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: f64) {
        self.arcs.push((from, to, cap.max(0.0)));
    }

    /// Adds both directions with the same capacity.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64) {
        self.add_arc(u, v, cap);
        self.add_arc(v, u, cap);
    }

    /// Total capacity of arcs leaving the node set marked `true`.
    pub fn cut_capacity(&self, side: &[bool]) -> f64 {
        self.arcs
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct MaxFlow {
    pub value: f64,
    /// Nodes reachable from the source in the residual graph.
    pub source_side: Vec<bool>,
    /// Complement of the nodes that reach the sink in the residual graph;
    /// the minimum cut whose sink side is smallest.
    pub sink_minimal_side: Vec<bool>,
    /// Net flow `flow[u][v] = -flow[v][u]`.
    pub flow: Vec<Vec<f64>>,
}

const EPS: f64 = 1e-12;

pub fn max_flow(net: &FlowNetwork) -> MaxFlow {
    let n = net.nodes;
    let mut cap = vec![vec![0.0; n]; n];
    for &(u, v, c) in &net.arcs {
        if u != v {
            cap[u][v] += c;
        }
    }
    let mut flow = vec![vec![0.0; n]; n];
    let (s, t) = (net.source, net.sink);
    let mut value = 0.0;
    if s != t {
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for v in 0..n {
                    if prev[v] == usize::MAX && cap[u][v] - flow[u][v] > EPS {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                break;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let u = prev[v];
                push = push.min(cap[u][v] - flow[u][v]);
                v = u;
            }
            let mut v = t;
            while v != s {
                let u = prev[v];
                flow[u][v] += push;
                flow[v][u] -= push;
                v = u;
            }
            value += push;
        }
    }
    let residual = |u: usize, v: usize| cap[u][v] - flow[u][v] > EPS;
    let mut source_side = vec![false; n];
    source_side[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !source_side[v] && residual(u, v) {
                source_side[v] = true;
                queue.push_back(v);
            }
        }
    }
    let mut reaches_sink = vec![false; n];
    reaches_sink[t] = true;
    let mut queue = VecDeque::from([t]);
    while let Some(v) = queue.pop_front() {
        for u in 0..n {
            if !reaches_sink[u] && residual(u, v) {
                reaches_sink[u] = true;
                queue.push_back(u);
            }
        }
    }
    let sink_minimal_side = reaches_sink.iter().map(|&b| !b).collect();
    MaxFlow {
        value,
        source_side,
        sink_minimal_side,
        flow,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, 5.0);
        let mf = max_flow(&net);
        assert_eq!(mf.value, 5.0);
        assert_eq!(mf.source_side, vec![true, false]);
    }

    #[test]
    fn parallel_paths() {
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_arc(0, 1, 2.0);
        net.add_arc(1, 3, 2.0);
        net.add_arc(0, 2, 3.0);
        net.add_arc(2, 3, 3.0);
        assert_eq!(max_flow(&net).value, 5.0);
    }

    #[test]
    fn diamond_matches_cut_enumeration() {
        let mut net = FlowNetwork::new(6, 0, 5);
        for &(u, v, c) in &[
            (0, 1, 3.0),
            (0, 2, 2.0),
            (1, 3, 1.0),
            (2, 3, 1.0),
            (3, 4, 1.0),
            (1, 4, 0.5),
            (4, 5, 4.0),
            (2, 5, 0.25),
        ] {
            net.add_arc(u, v, c);
        }
        let mf = max_flow(&net);
        let mut best = f64::INFINITY;
        for mask in 0u32..64 {
            if mask & 1 == 1 && mask & 32 == 0 {
                let side: Vec<bool> = (0..6).map(|b| mask >> b & 1 == 1).collect();
                best = best.min(net.cut_capacity(&side));
            }
        }
        assert!((mf.value - best).abs() < 1e-12);
        assert!((net.cut_capacity(&mf.source_side) - mf.value).abs() < 1e-12);
        assert!((net.cut_capacity(&mf.sink_minimal_side) - mf.value).abs() < 1e-12);
        for v in 1..5 {
            let net_out: f64 = mf.flow[v].iter().sum();
            assert!(net_out.abs() < 1e-9);
        }
    }
}
