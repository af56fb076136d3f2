//! Exact two-terminal reliability by full enumeration.
//!
//! `R(G)` is the probability mass of every state vector whose working arcs
//! join source to sink, where `Pr(X)` multiplies `p_k` over working arcs
//! and `1 - p_k` over failed ones.
//!
//! [`parallel_reliability`] splits the vector space into `chi` equal
//! divisions, sweeps each on its own thread with its own layered-search
//! scratch and accumulator, then adds the partial sums in ascending
//! division order. Each partial depends only on its division, so for a
//! fixed `chi` the result does not depend on thread scheduling.

use std::ops::ControlFlow;
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::connectivity::{dfs_connected, LayeredSearch};
use crate::enumeration::{dec_inv, division_try_enumerate, solution_space_size, DivisionPlan, EnumerationError, Mode};
use crate::graph::{Network, NetworkError, StateVector};

/// Default arc-count cap for full enumeration.
pub const DEFAULT_MAX_ARCS: usize = 40;
/// Largest arc count the brute-force oracle accepts.
pub const ORACLE_MAX_ARCS: usize = 24;
/// Default ceiling on worker threads; larger `chi` shares workers.
pub const DEFAULT_MAX_WORKERS: usize = 1024;

// Deadline polling interval, in vectors.
const DEADLINE_STRIDE: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReliabilityError {
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("time budget of {budget:?} exhausted after {visited} of {total} vectors")]
    Timeout { budget: Duration, visited: u64, total: u64 },
    #[error("brute-force oracle handles at most {ORACLE_MAX_ARCS} arcs, network has {m}")]
    OracleBound { m: usize },
    #[error("worker for division {t} panicked")]
    WorkerPanicked { t: u64 },
}

/// How partial sums are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Summation {
    /// Plain `f64` additions in emission order.
    #[default]
    Plain,
    /// Neumaier-compensated additions; slower, for very large sweeps.
    Compensated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub max_arcs: usize,
    pub timeout: Option<Duration>,
    pub summation: Summation,
    pub max_workers: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_arcs: DEFAULT_MAX_ARCS,
            timeout: None,
            summation: Summation::Plain,
            max_workers: DEFAULT_MAX_WORKERS,
        }
    }
}

/// Outcome of sweeping one division.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionResult {
    pub t: u64,
    /// Probability mass of the connected vectors in the division, `R_t`.
    pub reliability: f64,
    /// Vectors visited, `N_t`; equals `mu` on completion.
    pub visited: u64,
    pub connected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityReport {
    pub reliability: f64,
    pub chi: u64,
    pub divisions: Vec<DivisionResult>,
    #[serde(rename = "elapsed_seconds", serialize_with = "as_secs")]
    pub elapsed: Duration,
    pub vectors_per_second: f64,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// `Pr(X)`: product of `p_k` over working arcs and `1 - p_k` over failed arcs.
pub fn vector_prob(x: &StateVector, reliabilities: &[f64]) -> Result<f64, NetworkError> {
    if x.len() != reliabilities.len() {
        return Err(NetworkError::LengthMismatch { expected: reliabilities.len(), found: x.len() });
    }
    Ok(prob_unchecked(x.bits(), reliabilities))
}

#[inline]
fn prob_unchecked(bits: u64, reliabilities: &[f64]) -> f64 {
    let mut pr = 1.0;
    for (i, &p) in reliabilities.iter().enumerate() {
        pr *= if bits >> i & 1 == 1 { p } else { 1.0 - p };
    }
    pr
}

#[derive(Debug, Clone, Copy)]
struct Accumulator {
    sum: f64,
    carry: f64,
    mode: Summation,
}

impl Accumulator {
    fn new(mode: Summation) -> Self {
        Accumulator { sum: 0.0, carry: 0.0, mode }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        match self.mode {
            Summation::Plain => self.sum += v,
            Summation::Compensated => {
                let t = self.sum + v;
                if self.sum.abs() >= v.abs() {
                    self.carry += (self.sum - t) + v;
                } else {
                    self.carry += (v - t) + self.sum;
                }
                self.sum = t;
            }
        }
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sweeps the full backward BAT on the calling thread.
pub fn serial_reliability(network: &Network, options: &EngineOptions) -> Result<ReliabilityReport, ReliabilityError> {
    parallel_reliability(network, 1, options)
}

/// Equal-division reliability with one worker per division (up to
/// `options.max_workers`).
pub fn parallel_reliability(
    network: &Network,
    chi: u64,
    options: &EngineOptions,
) -> Result<ReliabilityReport, ReliabilityError> {
    parallel_reliability_with(network, chi, options, || {
        let mut search = LayeredSearch::new(network);
        move |x: &StateVector| search.connected(x)
    })
}

/// [`parallel_reliability`] with a caller-supplied connectivity test.
/// `make_probe` is called once per worker.
pub fn parallel_reliability_with<F, P>(
    network: &Network,
    chi: u64,
    options: &EngineOptions,
    make_probe: F,
) -> Result<ReliabilityReport, ReliabilityError>
where
    F: Fn() -> P + Sync,
    P: FnMut(&StateVector) -> bool,
{
    let m = network.arc_count();
    let total = solution_space_size(m, options.max_arcs)?;
    let plan = DivisionPlan::new(m, chi)?;
    let started = Instant::now();
    let deadline = options.timeout.map(|d| started + d);

    let workers = (options.max_workers.max(1) as u64).min(chi);
    let sweep = |first: u64| -> Vec<(u64, Result<DivisionResult, u64>)> {
        let mut probe = make_probe();
        (first..=chi)
            .step_by(workers as usize)
            .map(|t| (t, sweep_division(&plan, t, network.reliabilities(), &mut probe, deadline, options.summation)))
            .collect()
    };

    let outcomes: Vec<(u64, Result<DivisionResult, u64>)> = if workers == 1 {
        sweep(1)
    } else {
        let sweep = &sweep;
        thread::scope(|scope| {
            let handles: Vec<_> = (1..=workers).map(|first| (first, scope.spawn(move || sweep(first)))).collect();
            let mut all = Vec::with_capacity(chi as usize);
            for (first, h) in handles {
                match h.join() {
                    Ok(part) => all.extend(part),
                    Err(_) => return Err(ReliabilityError::WorkerPanicked { t: first }),
                }
            }
            Ok(all)
        })?
    };

    let mut slots: Vec<Option<Result<DivisionResult, u64>>> = vec![None; chi as usize];
    for (t, r) in outcomes {
        slots[(t - 1) as usize] = Some(r);
    }

    let mut divisions = Vec::with_capacity(chi as usize);
    let mut visited_on_timeout = 0u64;
    let mut timed_out = false;
    for slot in slots {
        match slot.expect("every division swept") {
            Ok(d) => {
                visited_on_timeout += d.visited;
                divisions.push(d);
            }
            Err(visited) => {
                visited_on_timeout += visited;
                timed_out = true;
            }
        }
    }
    if timed_out {
        return Err(ReliabilityError::Timeout {
            budget: options.timeout.unwrap_or_default(),
            visited: visited_on_timeout,
            total,
        });
    }

    let mut acc = Accumulator::new(options.summation);
    for d in &divisions {
        acc.add(d.reliability);
    }
    let elapsed = started.elapsed();
    Ok(ReliabilityReport {
        reliability: acc.total(),
        chi,
        divisions,
        elapsed,
        vectors_per_second: total as f64 / elapsed.as_secs_f64().max(f64::MIN_POSITIVE),
    })
}

/// Sweeps division `t`; on timeout returns the number of vectors visited.
fn sweep_division<P>(
    plan: &DivisionPlan,
    t: u64,
    reliabilities: &[f64],
    probe: &mut P,
    deadline: Option<Instant>,
    summation: Summation,
) -> Result<DivisionResult, u64>
where
    P: FnMut(&StateVector) -> bool,
{
    let mut acc = Accumulator::new(summation);
    let mut connected = 0u64;
    let mut seen = 0u64;
    let flow = division_try_enumerate(plan, t, |x| {
        seen += 1;
        if probe(x) {
            connected += 1;
            acc.add(prob_unchecked(x.bits(), reliabilities));
        }
        match deadline {
            Some(d) if seen.is_multiple_of(DEADLINE_STRIDE) && Instant::now() >= d => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    })
    .expect("division index comes from the plan");
    match flow {
        ControlFlow::Continue(visited) => Ok(DivisionResult { t, reliability: acc.total(), visited, connected }),
        ControlFlow::Break(((), visited)) => Err(visited),
    }
}

/// Reference reliability: decodes every index directly, tests connectivity
/// depth-first and sums `Pr(X)` in index order.
pub fn brute_force_reliability(network: &Network) -> Result<f64, ReliabilityError> {
    let m = network.arc_count();
    brute_force_mass(network, 1, 1u64 << m.min(63))
}

/// Reference mass of connected vectors with backward indices in `start..=end`.
pub fn brute_force_mass(network: &Network, start: u64, end: u64) -> Result<f64, ReliabilityError> {
    let m = network.arc_count();
    if m > ORACLE_MAX_ARCS {
        return Err(ReliabilityError::OracleBound { m });
    }
    let mut sum = 0.0;
    for i in start..=end {
        let x = dec_inv(i, m, Mode::Backward)?;
        if dfs_connected(network, &x)? {
            sum += vector_prob(&x, network.reliabilities())?;
        }
    }
    Ok(sum)
}
