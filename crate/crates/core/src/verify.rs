//! Cross-checks the engine against its oracles on one network.

use serde::Serialize;

use crate::connectivity::{dfs_connected, LayeredSearch};
use crate::enumeration::{bat_sequence, Mode};
use crate::graph::{Network, StateVector};
use crate::reliability::{
    brute_force_reliability, parallel_reliability_with, EngineOptions, ReliabilityError, ORACLE_MAX_ARCS,
};

/// Agreement threshold between independently computed reliabilities.
pub const VERIFY_TOLERANCE: f64 = 1e-12;

/// Largest `chi` exercised by [`verify`].
pub const VERIFY_MAX_CHI: u64 = 64;

// Reported mismatching vectors are truncated to this many.
const MAX_REPORTED_VECTORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiCheck {
    pub chi: u64,
    pub reliability: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub brute_force: f64,
    pub serial: f64,
    pub parallel: Vec<ChiCheck>,
    /// Number of vectors on which the layered search and DFS disagree.
    pub connectivity_mismatches: u64,
    /// First few disagreeing vectors.
    pub mismatched_vectors: Vec<String>,
    pub max_discrepancy: f64,
    pub passed: bool,
}

impl VerifyReport {
    /// `chi` values whose total is off by more than the tolerance.
    pub fn failing_chis(&self) -> Vec<u64> {
        self.parallel.iter().filter(|c| c.discrepancy > VERIFY_TOLERANCE).map(|c| c.chi).collect()
    }
}

/// Verifies the production engine: serial and every `chi` up to
/// [`VERIFY_MAX_CHI`] against the brute-force oracle, plus layered search
/// against DFS on every vector.
pub fn verify(network: &Network, options: &EngineOptions) -> Result<VerifyReport, ReliabilityError> {
    verify_with(network, options, || {
        let mut search = LayeredSearch::new(network);
        move |x: &StateVector| search.connected(x)
    })
}

/// [`verify`] with the connectivity test under scrutiny supplied by the caller.
pub fn verify_with<F, P>(
    network: &Network,
    options: &EngineOptions,
    make_probe: F,
) -> Result<VerifyReport, ReliabilityError>
where
    F: Fn() -> P + Sync,
    P: FnMut(&StateVector) -> bool,
{
    let m = network.arc_count();
    if m > ORACLE_MAX_ARCS {
        return Err(ReliabilityError::OracleBound { m });
    }
    let brute_force = brute_force_reliability(network)?;

    let serial = parallel_reliability_with(network, 1, options, &make_probe)?.reliability;
    let mut max_discrepancy = (serial - brute_force).abs();

    let mut parallel = Vec::new();
    let top = VERIFY_MAX_CHI.min(1u64 << m);
    let mut chi = 2;
    while chi <= top {
        let r = parallel_reliability_with(network, chi, options, &make_probe)?.reliability;
        let discrepancy = (r - brute_force).abs().max((r - serial).abs());
        max_discrepancy = max_discrepancy.max(discrepancy);
        parallel.push(ChiCheck { chi, reliability: r, discrepancy });
        chi *= 2;
    }

    let mut probe = make_probe();
    let mut connectivity_mismatches = 0;
    let mut mismatched_vectors = Vec::new();
    for x in bat_sequence(m, Mode::Backward)? {
        if probe(&x) != dfs_connected(network, &x)? {
            connectivity_mismatches += 1;
            if mismatched_vectors.len() < MAX_REPORTED_VECTORS {
                mismatched_vectors.push(x.to_string());
            }
        }
    }

    let passed = max_discrepancy <= VERIFY_TOLERANCE && connectivity_mismatches == 0;
    Ok(VerifyReport {
        brute_force,
        serial,
        parallel,
        connectivity_mismatches,
        mismatched_vectors,
        max_discrepancy,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::figure1;

    #[test]
    fn figure1_passes() {
        let r = verify(&figure1(), &EngineOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_discrepancy <= 1e-12);
        assert_eq!(r.parallel.iter().map(|c| c.chi).collect::<Vec<_>>(), vec![2, 4, 8, 16, 32, 64]);
    }

    #[test]
    fn unreachable_sink_passes_with_zero() {
        let net = Network::new(3, [(1, 2), (2, 1), (3, 2)], 1, 3, vec![0.5; 3]).unwrap();
        let r = verify(&net, &EngineOptions::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.brute_force, 0.0);
        assert_eq!(r.serial, 0.0);
        assert!(r.parallel.iter().all(|c| c.reliability == 0.0));
    }

    #[test]
    fn corrupted_connectivity_is_caught() {
        let net = figure1();
        let target = StateVector::from_coords(&[1, 0, 1, 0, 1, 0]).unwrap();
        let r = verify_with(&net, &EngineOptions::default(), || {
            let mut search = LayeredSearch::new(&net);
            move |x: &StateVector| search.connected(x) ^ (*x == target)
        })
        .unwrap();
        assert!(!r.passed);
        assert_eq!(r.connectivity_mismatches, 1);
        assert_eq!(r.mismatched_vectors, vec!["(1, 0, 1, 0, 1, 0)".to_string()]);
        assert!(r.max_discrepancy > 1e-6);
        assert_eq!(r.failing_chis(), vec![2, 4, 8, 16, 32, 64]);
    }
}
