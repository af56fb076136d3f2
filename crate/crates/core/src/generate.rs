//! Seeded random networks for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{Network, NetworkError, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("{nodes} nodes admit at most {max} arcs, {arcs} requested")]
    TooDense { nodes: u32, arcs: usize, max: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Arc reliabilities for generated networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcReliability {
    Uniform(f64),
    /// Drawn independently from `[lo, hi)`.
    Random {
        lo: f64,
        hi: f64,
    },
}

/// Smallest node count whose complete digraph has at least `m` arcs.
pub fn min_nodes_for(m: usize) -> u32 {
    let mut n = 2u32;
    while (n as usize) * (n as usize - 1) < m {
        n += 1;
    }
    n
}

/// Network on `nodes` nodes with `arcs` distinct arcs, source 1 and sink
/// `nodes`. The first arcs form a random source-to-sink path so the sink is
/// reachable when every arc works; the rest are drawn uniformly.
pub fn random_network_with<R: Rng + ?Sized>(
    rng: &mut R,
    nodes: u32,
    arcs: usize,
    reliability: ArcReliability,
) -> Result<Network, GenerateError> {
    let max = nodes as usize * (nodes as usize).saturating_sub(1);
    if arcs > max {
        return Err(GenerateError::TooDense { nodes, arcs, max });
    }
    let mut chosen: Vec<(NodeId, NodeId)> = Vec::with_capacity(arcs);

    let mut inner: Vec<NodeId> = (2..nodes).collect();
    inner.shuffle(rng);
    let hops = rng.gen_range(0..=inner.len());
    let mut path = vec![1];
    path.extend_from_slice(&inner[..hops]);
    path.push(nodes);
    for w in path.windows(2) {
        if chosen.len() < arcs {
            chosen.push((w[0], w[1]));
        }
    }

    let mut rest: Vec<(NodeId, NodeId)> = (1..=nodes)
        .flat_map(|u| (1..=nodes).filter(move |&v| v != u).map(move |v| (u, v)))
        .filter(|a| !chosen.contains(a))
        .collect();
    rest.shuffle(rng);
    chosen.extend(rest.into_iter().take(arcs - chosen.len()));
    chosen.shuffle(rng);

    let probs = (0..arcs)
        .map(|_| match reliability {
            ArcReliability::Uniform(p) => p,
            ArcReliability::Random { lo, hi } => rng.gen_range(lo..hi),
        })
        .collect();
    Ok(Network::new(nodes, chosen, 1, nodes, probs)?)
}

/// Random network with `m` arcs, a random node count between the minimum
/// that fits and `m / 2 + 3`, and reliabilities drawn from `[0, 1)`.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Network {
    let lo = min_nodes_for(m);
    let hi = lo.max(m as u32 / 2 + 3);
    let nodes = rng.gen_range(lo..=hi);
    random_network_with(rng, nodes, m, ArcReliability::Random { lo: 0.0, hi: 1.0 }).expect("node count fits arc count")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::plsa_connected;
    use crate::graph::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_networks_are_valid_and_reachable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..=40 {
            let net = random_network(&mut rng, m);
            assert_eq!(net.arc_count(), m);
            if m >= net.node_count() as usize - 1 {
                assert!(plsa_connected(&net, &StateVector::ones(m)).unwrap());
            }
        }
    }

    #[test]
    fn same_seed_same_network() {
        let a = random_network(&mut ChaCha8Rng::seed_from_u64(9), 20);
        let b = random_network(&mut ChaCha8Rng::seed_from_u64(9), 20);
        assert_eq!(a, b);
    }

    #[test]
    fn too_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            random_network_with(&mut rng, 3, 7, ArcReliability::Uniform(0.9)),
            Err(GenerateError::TooDense { max: 6, .. })
        ));
        assert_eq!(min_nodes_for(6), 3);
        assert_eq!(min_nodes_for(7), 4);
    }
}
