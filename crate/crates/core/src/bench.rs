//! Thread-sweep timing: mean runtime per `chi` plus speedup ratios.
//!
//! Times are wall-clock seconds per full reliability computation, file
//! parsing excluded. For `a < b`, the ratio `T_a / T_b` is the observed
//! speedup and `(T_a / T_b) / (b / a)` the utility rate against the ideal
//! linear speedup.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::enumeration::solution_space_size;
use crate::graph::Network;
use crate::reliability::{parallel_reliability, EngineOptions, ReliabilityError};

pub const DEFAULT_RUNS: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("thread list is empty")]
    NoThreadCounts,
    #[error("run count must be at least 1")]
    NoRuns,
    #[error("{name}: {source}")]
    Engine { name: String, source: ReliabilityError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub chis: Vec<u64>,
    pub runs: usize,
    pub engine: EngineOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub chi: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ratio {
    pub a: u64,
    pub b: u64,
    /// `T_a / T_b`.
    pub ratio: f64,
    /// `(T_a / T_b) / (b / a)`.
    pub utility_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub name: String,
    pub n: u32,
    pub m: usize,
    #[serde(rename = "N")]
    pub space: u64,
    #[serde(rename = "R")]
    pub reliability: f64,
    /// Largest difference between the reliabilities reported across `chi`.
    pub reliability_spread: f64,
    pub runs: usize,
    pub timings: Vec<Timing>,
    pub ratios: Vec<Ratio>,
}

impl BenchRecord {
    pub fn timing(&self, chi: u64) -> Option<&Timing> {
        self.timings.iter().find(|t| t.chi == chi)
    }
}

pub fn utility_rate(t_a: f64, t_b: f64, a: u64, b: u64) -> f64 {
    (t_a / t_b) / (b as f64 / a as f64)
}

/// One entry per pair `a < b` of the timed thread counts, ordered by `a`
/// then `b`.
pub fn ratio_table(timings: &[Timing]) -> Vec<Ratio> {
    let mut sorted: Vec<&Timing> = timings.iter().collect();
    sorted.sort_by_key(|t| t.chi);
    let mut out = Vec::new();
    for (i, ta) in sorted.iter().enumerate() {
        for tb in &sorted[i + 1..] {
            if ta.chi == tb.chi {
                continue;
            }
            out.push(Ratio {
                a: ta.chi,
                b: tb.chi,
                ratio: ta.mean / tb.mean,
                utility_rate: utility_rate(ta.mean, tb.mean, ta.chi, tb.chi),
            });
        }
    }
    out
}

/// Runs the engine `config.runs` times for every `chi`, one run at a time.
pub fn bench_network(name: &str, network: &Network, config: &BenchConfig) -> Result<BenchRecord, BenchError> {
    if config.chis.is_empty() {
        return Err(BenchError::NoThreadCounts);
    }
    if config.runs == 0 {
        return Err(BenchError::NoRuns);
    }
    let engine_err = |source| BenchError::Engine { name: name.to_string(), source };
    let space = solution_space_size(network.arc_count(), config.engine.max_arcs).map_err(|e| engine_err(e.into()))?;

    let mut timings = Vec::with_capacity(config.chis.len());
    for &chi in &config.chis {
        let mut secs = Vec::with_capacity(config.runs);
        let mut reliability = f64::NAN;
        for _ in 0..config.runs {
            let report = parallel_reliability(network, chi, &config.engine).map_err(engine_err)?;
            secs.push(report.elapsed.as_secs_f64());
            reliability = report.reliability;
        }
        timings.push(Timing {
            chi,
            mean: secs.iter().sum::<f64>() / secs.len() as f64,
            min: secs.iter().copied().fold(f64::INFINITY, f64::min),
            max: secs.iter().copied().fold(0.0, f64::max),
            reliability,
        });
    }

    let reliability = timings[0].reliability;
    let reliability_spread = timings.iter().map(|t| (t.reliability - reliability).abs()).fold(0.0, f64::max);
    Ok(BenchRecord {
        name: name.to_string(),
        n: network.node_count(),
        m: network.arc_count(),
        space,
        reliability,
        reliability_spread,
        runs: config.runs,
        ratios: ratio_table(&timings),
        timings,
    })
}

/// Aligned text tables: one runtime table, then one ratio table.
pub fn render_text(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let chis: Vec<u64> = records.first().map(|r| r.timings.iter().map(|t| t.chi).collect()).unwrap_or_default();

    let _ = write!(out, "{:<20} {:>4} {:>4} {:>14} {:>14}", "network", "n", "m", "N", "R(G)");
    for chi in &chis {
        let _ = write!(out, " {:>12}", format!("T_{chi}"));
    }
    out.push('\n');
    for r in records {
        let _ = write!(out, "{:<20} {:>4} {:>4} {:>14} {:>14.10}", r.name, r.n, r.m, r.space, r.reliability);
        for t in &r.timings {
            let _ = write!(out, " {:>12.7}", t.mean);
        }
        out.push('\n');
    }

    let pairs: Vec<(u64, u64)> =
        records.first().map(|r| r.ratios.iter().map(|q| (q.a, q.b)).collect()).unwrap_or_default();
    if !pairs.is_empty() {
        out.push('\n');
        let _ = write!(out, "{:<20}", "ratio");
        for (a, b) in &pairs {
            let _ = write!(out, " {:>10}", format!("T{a}/T{b}"));
        }
        out.push('\n');
        for r in records {
            let _ = write!(out, "{:<20}", r.name);
            for q in &r.ratios {
                let _ = write!(out, " {:>10.6}", q.ratio);
            }
            out.push('\n');
            let _ = write!(out, "{:<20}", "  utility rate");
            for q in &r.ratios {
                let _ = write!(out, " {:>10.6}", q.utility_rate);
            }
            out.push('\n');
        }
    }
    out
}

pub fn render_json(records: &[BenchRecord]) -> String {
    serde_json::to_string_pretty(records).expect("bench records serialize")
}
