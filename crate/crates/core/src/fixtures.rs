//! Small reference networks.

use crate::graph::Network;

/// Five-node, six-arc example network with source 1 and sink 4.
///
/// Arcs in order: 1->2, 1->3, 2->3, 3->5, 3->4, 5->4. The working arc sets
/// that join the terminals minimally are {a2, a5}, {a2, a4, a6},
/// {a1, a3, a5} and {a1, a3, a4, a6}.
pub fn figure1() -> Network {
    Network::new(5, [(1, 2), (1, 3), (2, 3), (3, 5), (3, 4), (5, 4)], 1, 4, vec![0.99, 0.89, 0.88, 0.95, 0.85, 0.87])
        .expect("valid fixture")
}

/// Directed bridge: 1->2, 1->3, 2->3, 2->4, 3->4, source 1, sink 4, every
/// arc working with probability `p`.
///
/// Its reliability polynomial is `2p^2 + p^3 - 3p^4 + p^5`.
pub fn bridge(p: f64) -> Network {
    Network::new(4, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)], 1, 4, vec![p; 5]).expect("valid fixture")
}

/// Bridge whose middle link is a pair of opposed arcs 2->3 and 3->2, so it
/// can be crossed either way. Six arcs; reliability `2p^2 + 2p^3 - 5p^4 + 2p^5`.
pub fn two_way_bridge(p: f64) -> Network {
    Network::new(4, [(1, 2), (1, 3), (2, 3), (3, 2), (2, 4), (3, 4)], 1, 4, vec![p; 6]).expect("valid fixture")
}
