//! Source-to-sink connectivity of the working subgraph `G(X)`.
//!
//! [`LayeredSearch`] builds layers `L_1 = {source}`, `L_l` = unvisited heads
//! of working arcs leaving `L_{l-1}`, stopping as soon as the sink enters a
//! layer or a layer comes up empty. Visited nodes are never re-entered, so
//! there are at most `n` layers even on cyclic graphs.
//!
//! [`dfs_connected`] is a separate depth-first check used as an oracle.

use serde::Serialize;

use crate::graph::{Network, NetworkError, NodeId, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Connected,
    Disconnected,
}

/// Layers produced by one layered search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerTrace {
    /// `layers[0]` is `L_1`. Each layer is sorted ascending.
    pub layers: Vec<Vec<NodeId>>,
    pub verdict: Verdict,
}

/// Reusable layered-search state for one network. One instance per worker.
#[derive(Debug, Clone)]
pub struct LayeredSearch<'a> {
    network: &'a Network,
    // out-arcs of node v (0-based) are entries offsets[v]..offsets[v + 1]
    offsets: Vec<usize>,
    out: Vec<(u64, u32)>,
    stamp: Vec<u32>,
    epoch: u32,
    layer: Vec<u32>,
    next: Vec<u32>,
}

impl<'a> LayeredSearch<'a> {
    pub fn new(network: &'a Network) -> Self {
        let n = network.node_count() as usize;
        let mut degree = vec![0usize; n + 1];
        for a in network.arcs() {
            degree[a.tail as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v + 1];
        }
        let mut fill = offsets.clone();
        let mut out = vec![(0u64, 0u32); network.arc_count()];
        for (i, a) in network.arcs().iter().enumerate() {
            let v = a.tail as usize - 1;
            out[fill[v]] = (1u64 << i, a.head - 1);
            fill[v] += 1;
        }
        LayeredSearch {
            network,
            offsets,
            out,
            stamp: vec![0; n],
            epoch: 0,
            layer: Vec::with_capacity(n),
            next: Vec::with_capacity(n),
        }
    }

    pub fn network(&self) -> &'a Network {
        self.network
    }

    fn begin(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    /// Whether a working directed path joins source to sink.
    ///
    /// `x` must have one coordinate per arc; this is only checked in debug
    /// builds. Use [`plsa_connected`] for a checked call.
    #[inline]
    pub fn connected(&mut self, x: &StateVector) -> bool {
        debug_assert_eq!(x.len(), self.network.arc_count());
        self.search(x.bits(), None)
    }

    /// Runs the search and records every layer up to the terminating one.
    pub fn trace(&mut self, x: &StateVector) -> Result<LayerTrace, NetworkError> {
        self.network.check_len(x)?;
        let mut layers = Vec::new();
        let connected = self.search(x.bits(), Some(&mut layers));
        Ok(LayerTrace { layers, verdict: if connected { Verdict::Connected } else { Verdict::Disconnected } })
    }

    fn search(&mut self, working: u64, mut trace: Option<&mut Vec<Vec<NodeId>>>) -> bool {
        self.begin();
        let epoch = self.epoch;
        let sink = self.network.sink() - 1;
        let source = self.network.source() - 1;

        self.layer.clear();
        self.layer.push(source);
        self.stamp[source as usize] = epoch;
        if let Some(t) = trace.as_deref_mut() {
            t.push(vec![source + 1]);
        }

        loop {
            self.next.clear();
            let mut reached = false;
            for &u in &self.layer {
                let u = u as usize;
                for &(mask, v) in &self.out[self.offsets[u]..self.offsets[u + 1]] {
                    if working & mask != 0 && self.stamp[v as usize] != epoch {
                        self.stamp[v as usize] = epoch;
                        self.next.push(v);
                        reached |= v == sink;
                    }
                }
            }
            if self.next.is_empty() {
                return false;
            }
            if let Some(t) = trace.as_deref_mut() {
                let mut l: Vec<NodeId> = self.next.iter().map(|v| v + 1).collect();
                l.sort_unstable();
                t.push(l);
            }
            if reached {
                return true;
            }
            std::mem::swap(&mut self.layer, &mut self.next);
        }
    }
}

/// Checked one-shot layered search.
pub fn plsa_connected(network: &Network, x: &StateVector) -> Result<bool, NetworkError> {
    network.check_len(x)?;
    Ok(LayeredSearch::new(network).connected(x))
}

pub fn plsa_trace(network: &Network, x: &StateVector) -> Result<LayerTrace, NetworkError> {
    LayeredSearch::new(network).trace(x)
}

/// Depth-first reachability over the working arcs; oracle for the layered search.
pub fn dfs_connected(network: &Network, x: &StateVector) -> Result<bool, NetworkError> {
    network.check_len(x)?;
    let n = network.node_count() as usize;
    let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n + 1];
    for (k, arc) in network.arcs().iter().enumerate() {
        if x.get(k + 1) {
            adjacency[arc.tail as usize].push(arc.head);
        }
    }
    let mut seen = vec![false; n + 1];
    let mut stack = vec![network.source()];
    seen[network.source() as usize] = true;
    while let Some(u) = stack.pop() {
        if u == network.sink() {
            return Ok(true);
        }
        for &v in &adjacency[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{bat_sequence, Mode};
    use crate::fixtures::figure1;
    use crate::generate::random_network;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sv(c: &[u8]) -> StateVector {
        StateVector::from_coords(c).unwrap()
    }

    #[test]
    fn all_one_layers() {
        let net = figure1();
        let trace = plsa_trace(&net, &StateVector::ones(6)).unwrap();
        assert_eq!(trace.layers, vec![vec![1], vec![2, 3], vec![4, 5]]);
        assert_eq!(trace.verdict, Verdict::Connected);
    }

    #[test]
    fn all_zero_is_disconnected() {
        let net = figure1();
        let trace = plsa_trace(&net, &StateVector::zeros(6)).unwrap();
        assert_eq!(trace.layers, vec![vec![1]]);
        assert_eq!(trace.verdict, Verdict::Disconnected);
    }

    #[test]
    fn two_arc_path() {
        let net = figure1();
        assert!(plsa_connected(&net, &sv(&[0, 1, 0, 0, 1, 0])).unwrap());
        assert!(!plsa_connected(&net, &sv(&[0, 1, 0, 0, 0, 0])).unwrap());
    }

    #[test]
    fn length_mismatch() {
        let net = figure1();
        let short = StateVector::zeros(5);
        assert!(plsa_connected(&net, &short).is_err());
        assert!(dfs_connected(&net, &short).is_err());
        assert!(plsa_trace(&net, &short).is_err());
    }

    #[test]
    fn single_arc() {
        let net = Network::new(2, [(1, 2)], 1, 2, vec![0.7]).unwrap();
        assert!(dfs_connected(&net, &sv(&[1])).unwrap());
        assert!(!dfs_connected(&net, &sv(&[0])).unwrap());
        assert!(plsa_connected(&net, &sv(&[1])).unwrap());
        assert!(!plsa_connected(&net, &sv(&[0])).unwrap());
    }

    #[test]
    fn arcs_into_source_and_out_of_sink_are_harmless() {
        // 2 -> 1 and 3 -> 2 point backwards; only 1 -> 3 helps
        let net = Network::new(3, [(2, 1), (3, 2), (1, 3)], 1, 3, vec![0.5; 3]).unwrap();
        assert!(plsa_connected(&net, &sv(&[1, 1, 1])).unwrap());
        assert!(!plsa_connected(&net, &sv(&[1, 1, 0])).unwrap());
    }

    #[test]
    fn cycle_with_unreachable_sink_terminates() {
        // 1 -> 2 -> 3 -> 1 cycle, sink 4 has no incoming arc
        let net = Network::new(4, [(1, 2), (2, 3), (3, 1), (4, 1)], 1, 4, vec![0.5; 4]).unwrap();
        let trace = plsa_trace(&net, &StateVector::ones(4)).unwrap();
        assert_eq!(trace.verdict, Verdict::Disconnected);
        assert!(trace.layers.len() <= 4);
        assert!(!dfs_connected(&net, &StateVector::ones(4)).unwrap());
    }

    #[test]
    fn agrees_with_dfs_on_figure1() {
        let net = figure1();
        let mut plsa = LayeredSearch::new(&net);
        for x in bat_sequence(6, Mode::Backward).unwrap() {
            assert_eq!(plsa.connected(&x), dfs_connected(&net, &x).unwrap(), "{x}");
        }
    }

    #[test]
    fn agrees_with_dfs_exhaustively_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=14 {
            let net = random_network(&mut rng, m);
            let mut plsa = LayeredSearch::new(&net);
            for x in bat_sequence(m, Mode::Backward).unwrap() {
                assert_eq!(plsa.connected(&x), dfs_connected(&net, &x).unwrap(), "m={m} {x}");
            }
        }
    }

    /// Breadth-first distances computed without layers, for checking layer soundness.
    fn bfs_distance(net: &Network, x: &StateVector) -> Vec<Option<usize>> {
        let n = net.node_count() as usize;
        let mut dist = vec![None; n + 1];
        dist[net.source() as usize] = Some(0);
        let mut queue = std::collections::VecDeque::from([net.source()]);
        while let Some(u) = queue.pop_front() {
            for (k, a) in net.arcs().iter().enumerate() {
                if a.tail == u && x.get(k + 1) && dist[a.head as usize].is_none() {
                    dist[a.head as usize] = Some(dist[u as usize].unwrap() + 1);
                    queue.push_back(a.head);
                }
            }
        }
        dist
    }

    proptest! {
        #[test]
        fn random_vectors_agree_and_layers_are_sound(seed in any::<u64>(), m in 1usize..=40, raw in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_network(&mut rng, m);
            let x = StateVector::from_bits(raw, m);
            let trace = plsa_trace(&net, &x).unwrap();
            let connected = trace.verdict == Verdict::Connected;
            prop_assert_eq!(connected, dfs_connected(&net, &x).unwrap());
            prop_assert_eq!(&trace.layers[0], &vec![net.source()]);
            prop_assert!(trace.layers.len() <= net.node_count() as usize);
            let dist = bfs_distance(&net, &x);
            let mut seen = std::collections::HashSet::new();
            for (l, layer) in trace.layers.iter().enumerate() {
                for &v in layer {
                    prop_assert!(seen.insert(v));
                    prop_assert_eq!(dist[v as usize], Some(l));
                }
            }
        }

        #[test]
        fn connectivity_is_monotone(seed in any::<u64>(), m in 1usize..=20, raw in any::<u64>(), extra in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_network(&mut rng, m);
            let x = StateVector::from_bits(raw, m);
            let y = StateVector::from_bits(raw | extra, m);
            let mut s = LayeredSearch::new(&net);
            if s.connected(&x) {
                prop_assert!(s.connected(&y));
            }
        }
    }
}
