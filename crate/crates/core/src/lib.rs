//! Exact two-terminal reliability of binary-state networks.
//!
//! Every arc-state vector is enumerated with a binary-addition-tree (BAT)
//! counter and tested for source-to-sink connectivity with a layered
//! search. The vector space can be cut into `chi = 2^c` equal divisions
//! that are swept on separate threads and merged in a fixed order.
//!
//! ```
//! use pbat_core::{fixtures, parallel_reliability, EngineOptions};
//!
//! let report = parallel_reliability(&fixtures::figure1(), 4, &EngineOptions::default()).unwrap();
//! assert!((report.reliability - 0.960175722).abs() < 1e-9);
//! ```

pub mod bench;
pub mod connectivity;
pub mod enumeration;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod reliability;
pub mod verify;

pub use connectivity::{dfs_connected, plsa_connected, plsa_trace, LayerTrace, LayeredSearch, Verdict};
pub use enumeration::{
    bat_sequence, dec, dec_inv, division_enumerate, solution_space_size, BatCursor, DivisionPlan, EnumerationError,
    Mode,
};
pub use graph::{parse_network, Arc, Network, NetworkError, NodeId, ParseError, StateVector};
pub use reliability::{
    brute_force_reliability, parallel_reliability, serial_reliability, vector_prob, DivisionResult, EngineOptions,
    ReliabilityError, ReliabilityReport, Summation,
};
