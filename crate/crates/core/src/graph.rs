//! Network data model, state vectors and the text network format.
//!
//! A network is a directed graph on nodes `1..=n` whose arcs fail
//! independently. Arc `a_k` is the `k`-th arc in declaration order, and
//! coordinate `k` of a [`StateVector`] is the state of `a_k`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// 1-based node identifier.
pub type NodeId = u32;

/// Hard ceiling imposed by the `u64` state-vector representation.
pub const MAX_REPRESENTABLE_ARCS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("network must have at least one node")]
    NoNodes,
    #[error("network must have at least one arc")]
    NoArcs,
    #[error("{m} arcs exceed the representable maximum of {MAX_REPRESENTABLE_ARCS}")]
    TooManyArcs { m: usize },
    #[error("{role} node {node} is outside 1..={n}")]
    TerminalOutOfRange { role: &'static str, node: NodeId, n: u32 },
    #[error("source and sink are both node {0}")]
    SourceIsSink(NodeId),
    #[error("arc a{arc} references node {node} outside 1..={n}")]
    NodeOutOfRange { arc: usize, node: NodeId, n: u32 },
    #[error("arc a{arc} is a self-loop on node {node}")]
    SelfLoop { arc: usize, node: NodeId },
    #[error("arc a{arc} ({tail}, {head}) duplicates arc a{first}")]
    ParallelArc { arc: usize, first: usize, tail: NodeId, head: NodeId },
    #[error("expected {expected} reliabilities, found {found}")]
    ReliabilityCount { expected: usize, found: usize },
    #[error("reliability {p} of arc a{arc} is outside [0, 1]")]
    ReliabilityOutOfRange { arc: usize, p: f64 },
    #[error("state vector has {found} coordinates, network has {expected} arcs")]
    LengthMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("keyword `{0}` appears twice")]
    DuplicateKeyword(&'static str),
    #[error("missing `{0}` declaration")]
    MissingKeyword(&'static str),
    #[error("expected {expected} arc lines, found {found}")]
    ArcCount { expected: usize, found: usize },
    #[error(transparent)]
    Invalid(#[from] NetworkError),
}

/// A directed arc `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
}

/// Binary-state network `G(V, E, D_b)` with designated source and sink.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    node_count: u32,
    arcs: Vec<Arc>,
    source: NodeId,
    sink: NodeId,
    reliabilities: Vec<f64>,
}

impl Network {
    /// Builds a network, checking that there are no self-loops or parallel
    /// arcs, that both terminals exist and differ, and that every
    /// reliability is a probability.
    pub fn new(
        node_count: u32,
        arcs: impl IntoIterator<Item = (NodeId, NodeId)>,
        source: NodeId,
        sink: NodeId,
        reliabilities: Vec<f64>,
    ) -> Result<Self, NetworkError> {
        let arcs: Vec<Arc> = arcs.into_iter().map(|(tail, head)| Arc { tail, head }).collect();
        if node_count == 0 {
            return Err(NetworkError::NoNodes);
        }
        for (role, node) in [("source", source), ("sink", sink)] {
            if node == 0 || node > node_count {
                return Err(NetworkError::TerminalOutOfRange { role, node, n: node_count });
            }
        }
        if source == sink {
            return Err(NetworkError::SourceIsSink(source));
        }
        if arcs.is_empty() {
            return Err(NetworkError::NoArcs);
        }
        if arcs.len() > MAX_REPRESENTABLE_ARCS {
            return Err(NetworkError::TooManyArcs { m: arcs.len() });
        }
        let mut seen: HashMap<Arc, usize> = HashMap::with_capacity(arcs.len());
        for (i, arc) in arcs.iter().enumerate() {
            let k = i + 1;
            for node in [arc.tail, arc.head] {
                if node == 0 || node > node_count {
                    return Err(NetworkError::NodeOutOfRange { arc: k, node, n: node_count });
                }
            }
            if arc.tail == arc.head {
                return Err(NetworkError::SelfLoop { arc: k, node: arc.tail });
            }
            if let Some(&first) = seen.get(arc) {
                return Err(NetworkError::ParallelArc { arc: k, first, tail: arc.tail, head: arc.head });
            }
            seen.insert(*arc, k);
        }
        if reliabilities.len() != arcs.len() {
            return Err(NetworkError::ReliabilityCount { expected: arcs.len(), found: reliabilities.len() });
        }
        for (i, &p) in reliabilities.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(NetworkError::ReliabilityOutOfRange { arc: i + 1, p });
            }
        }
        Ok(Network { node_count, arcs, source, sink, reliabilities })
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    /// Number of arcs `m`.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Arc `a_k`, 1-based.
    pub fn arc(&self, k: usize) -> Arc {
        self.arcs[k - 1]
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn reliabilities(&self) -> &[f64] {
        &self.reliabilities
    }

    /// Same topology with every arc working with probability `p`.
    pub fn with_uniform_reliability(&self, p: f64) -> Result<Network, NetworkError> {
        Network::new(
            self.node_count,
            self.arcs.iter().map(|a| (a.tail, a.head)),
            self.source,
            self.sink,
            vec![p; self.arcs.len()],
        )
    }

    /// `E(X)`: 1-based indices of the arcs that work in `x`, ascending.
    pub fn working_arcs(&self, x: &StateVector) -> Result<Vec<usize>, NetworkError> {
        self.check_len(x)?;
        Ok((1..=x.len()).filter(|&k| x.get(k)).collect())
    }

    pub(crate) fn check_len(&self, x: &StateVector) -> Result<(), NetworkError> {
        if x.len() != self.arcs.len() {
            return Err(NetworkError::LengthMismatch { expected: self.arcs.len(), found: x.len() });
        }
        Ok(())
    }
}

/// Canonical text form; `parse_network` reads it back to an equal network.
impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes {}", self.node_count)?;
        writeln!(f, "source {}", self.source)?;
        writeln!(f, "sink {}", self.sink)?;
        writeln!(f, "arcs {}", self.arcs.len())?;
        for (arc, p) in self.arcs.iter().zip(&self.reliabilities) {
            // `{}` on f64 prints the shortest string that round-trips.
            writeln!(f, "{} {} {}", arc.tail, arc.head, p)?;
        }
        Ok(())
    }
}

impl FromStr for Network {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_network(s)
    }
}

/// Parses the line-oriented network format:
///
/// ```text
/// nodes <n>
/// source <id>
/// sink <id>
/// arcs <m>
/// <tail> <head> <p>     (exactly m lines, in arc order)
/// ```
///
/// `#` starts a comment running to the end of the line.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let mut nodes: Option<(u32, usize)> = None;
    let mut source: Option<(NodeId, usize)> = None;
    let mut sink: Option<(NodeId, usize)> = None;
    let mut arc_header: Option<(usize, usize)> = None;
    let mut arcs = Vec::new();
    let mut probs = Vec::new();
    let mut arc_lines = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |kind| ParseError { line, kind };
        let tokens: Vec<&str> = content.split_whitespace().collect();

        if let Some((expected, _)) = arc_header {
            if arcs.len() < expected {
                let [tail, head, p] = tokens[..] else {
                    return Err(err(ParseErrorKind::Malformed(format!(
                        "arc line needs `<tail> <head> <p>`, got `{content}`"
                    ))));
                };
                let tail = parse_num::<NodeId>(tail, "tail").map_err(err)?;
                let head = parse_num::<NodeId>(head, "head").map_err(err)?;
                let p = parse_num::<f64>(p, "reliability").map_err(err)?;
                arcs.push((tail, head));
                probs.push(p);
                arc_lines.push(line);
                continue;
            }
            return Err(err(ParseErrorKind::ArcCount { expected, found: expected + 1 }));
        }

        let [keyword, value] = tokens[..] else {
            return Err(err(ParseErrorKind::Malformed(format!("expected `<keyword> <value>`, got `{content}`"))));
        };
        match keyword {
            "nodes" => set_once(&mut nodes, "nodes", value, line)?,
            "source" => set_once(&mut source, "source", value, line)?,
            "sink" => set_once(&mut sink, "sink", value, line)?,
            "arcs" => {
                set_once(&mut arc_header, "arcs", value, line)?;
                for (missing, name) in
                    [(nodes.is_none(), "nodes"), (source.is_none(), "source"), (sink.is_none(), "sink")]
                {
                    if missing {
                        return Err(err(ParseErrorKind::MissingKeyword(name)));
                    }
                }
            }
            other => return Err(err(ParseErrorKind::UnknownKeyword(other.to_string()))),
        }
    }

    let eof = last_line + 1;
    let (n, n_line) = nodes.ok_or(ParseError { line: eof, kind: ParseErrorKind::MissingKeyword("nodes") })?;
    let (src, src_line) = source.ok_or(ParseError { line: eof, kind: ParseErrorKind::MissingKeyword("source") })?;
    let (snk, snk_line) = sink.ok_or(ParseError { line: eof, kind: ParseErrorKind::MissingKeyword("sink") })?;
    let (expected, arcs_line) =
        arc_header.ok_or(ParseError { line: eof, kind: ParseErrorKind::MissingKeyword("arcs") })?;
    if arcs.len() != expected {
        return Err(ParseError { line: eof, kind: ParseErrorKind::ArcCount { expected, found: arcs.len() } });
    }

    Network::new(n, arcs, src, snk, probs).map_err(|e| {
        let line = match &e {
            NetworkError::NoNodes => n_line,
            NetworkError::NoArcs | NetworkError::TooManyArcs { .. } => arcs_line,
            NetworkError::TerminalOutOfRange { role: "source", .. } => src_line,
            NetworkError::TerminalOutOfRange { .. } => snk_line,
            NetworkError::SourceIsSink(_) => src_line.max(snk_line),
            NetworkError::NodeOutOfRange { arc, .. }
            | NetworkError::SelfLoop { arc, .. }
            | NetworkError::ParallelArc { arc, .. }
            | NetworkError::ReliabilityOutOfRange { arc, .. } => arc_lines[arc - 1],
            NetworkError::ReliabilityCount { .. } | NetworkError::LengthMismatch { .. } => arcs_line,
        };
        ParseError { line, kind: ParseErrorKind::Invalid(e) }
    })
}

fn parse_num<T: FromStr>(token: &str, what: &str) -> Result<T, ParseErrorKind> {
    token.parse().map_err(|_| ParseErrorKind::Malformed(format!("invalid {what} `{token}`")))
}

fn set_once<T: FromStr>(
    slot: &mut Option<(T, usize)>,
    name: &'static str,
    value: &str,
    line: usize,
) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError { line, kind: ParseErrorKind::DuplicateKeyword(name) });
    }
    let v = parse_num(value, name).map_err(|kind| ParseError { line, kind })?;
    *slot = Some((v, line));
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateVectorError {
    #[error("state vectors hold 1..={MAX_REPRESENTABLE_ARCS} coordinates, got {0}")]
    Length(usize),
    #[error("coordinate {index} is {value}, expected 0 or 1")]
    NotBinary { index: usize, value: u8 },
}

/// Arc-state vector `X = (x_1, ..., x_m)`; `x_k = 1` means arc `a_k` works.
///
/// Coordinate `k` is stored in bit `k - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateVector {
    bits: u64,
    len: u8,
}

impl StateVector {
    /// All-zero vector of `len` coordinates. Panics if `len > 64`.
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_REPRESENTABLE_ARCS, "state vector length {len} exceeds 64");
        StateVector { bits: 0, len: len as u8 }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self::zeros(len);
        x.bits = low_mask(len);
        x
    }

    pub fn from_coords(coords: &[u8]) -> Result<Self, StateVectorError> {
        if coords.len() > MAX_REPRESENTABLE_ARCS {
            return Err(StateVectorError::Length(coords.len()));
        }
        let mut x = Self::zeros(coords.len());
        for (i, &c) in coords.iter().enumerate() {
            match c {
                0 => {}
                1 => x.bits |= 1 << i,
                value => return Err(StateVectorError::NotBinary { index: i + 1, value }),
            }
        }
        Ok(x)
    }

    /// Vector whose coordinate `k` is bit `k - 1` of `bits`; higher bits are dropped.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        let mut x = Self::zeros(len);
        x.bits = bits & low_mask(len);
        x
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// State of coordinate `k` (1-based).
    #[inline]
    pub fn get(&self, k: usize) -> bool {
        debug_assert!(k >= 1 && k <= self.len());
        self.bits >> (k - 1) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize, on: bool) {
        debug_assert!(k >= 1 && k <= self.len());
        if on {
            self.bits |= 1 << (k - 1);
        } else {
            self.bits &= !(1 << (k - 1));
        }
    }

    pub fn coords(&self) -> Vec<u8> {
        (1..=self.len()).map(|k| self.get(k) as u8).collect()
    }

    pub fn complement(&self) -> Self {
        Self::from_bits(!self.bits, self.len())
    }

    /// Coordinate-wise `self >= other`.
    pub fn dominates(&self, other: &StateVector) -> bool {
        self.len == other.len && other.bits & !self.bits == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }
}

#[inline]
pub(crate) fn low_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for k in 1..=self.len() {
            if k > 1 {
                f.write_str(", ")?;
            }
            f.write_str(if self.get(k) { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIGURE1: &str = "\
# example network
nodes 5
source 1
sink 4
arcs 6
1 2 0.99
1 3 0.89
2 3 0.88
3 5 0.95
3 4 0.85
5 4 0.87
";

    fn sv(c: &[u8]) -> StateVector {
        StateVector::from_coords(c).unwrap()
    }

    #[test]
    fn parses_example_network() {
        let net = parse_network(FIGURE1).unwrap();
        assert_eq!(net.arc_count(), 6);
        assert_eq!(net.node_count(), 5);
        assert_eq!(net.source(), 1);
        assert_eq!(net.sink(), 4);
        assert_eq!(net.arc(4), Arc { tail: 3, head: 5 });
        assert_eq!(net.reliabilities(), &[0.99, 0.89, 0.88, 0.95, 0.85, 0.87]);
    }

    fn parse_err(text: &str) -> ParseError {
        parse_network(text).unwrap_err()
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 2\n1 2 0.5\n3 3 0.5\n");
        assert_eq!(e.line, 6);
        assert!(matches!(e.kind, ParseErrorKind::Invalid(NetworkError::SelfLoop { arc: 2, node: 3 })));
    }

    #[test]
    fn parallel_arc_rejected_with_line() {
        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 3\n1 2 0.5\n2 3 0.5\n1 2 0.7\n");
        assert_eq!(e.line, 7);
        assert!(matches!(e.kind, ParseErrorKind::Invalid(NetworkError::ParallelArc { arc: 3, first: 1, .. })));
    }

    #[test]
    fn antiparallel_arcs_are_distinct() {
        let net = parse_network("nodes 2\nsource 1\nsink 2\narcs 2\n1 2 0.5\n2 1 0.5\n").unwrap();
        assert_eq!(net.arc_count(), 2);
    }

    #[test]
    fn other_parse_errors() {
        let e = parse_err("nodes 3\nsource 1\nsink 3\nedges 2\n");
        assert_eq!((e.line, e.kind), (4, ParseErrorKind::UnknownKeyword("edges".into())));

        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 1\n1 4 0.5\n");
        assert_eq!(e.line, 5);
        assert!(matches!(e.kind, ParseErrorKind::Invalid(NetworkError::NodeOutOfRange { node: 4, .. })));

        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 1\n1 2 1.5\n");
        assert_eq!(e.line, 5);
        assert!(matches!(e.kind, ParseErrorKind::Invalid(NetworkError::ReliabilityOutOfRange { .. })));

        let e = parse_err("nodes 3\nsource 2\nsink 2\narcs 1\n1 2 0.5\n");
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::Invalid(NetworkError::SourceIsSink(2))));

        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 1\n1 2\n");
        assert_eq!(e.line, 5);
        assert!(matches!(e.kind, ParseErrorKind::Malformed(_)));

        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 2\n1 2 0.5\n");
        assert!(matches!(e.kind, ParseErrorKind::ArcCount { expected: 2, found: 1 }));

        let e = parse_err("nodes 3\nsource 1\nsink 3\narcs 1\n1 2 0.5\n2 3 0.5\n");
        assert_eq!(e.line, 6);

        let e = parse_err("nodes 3\nsink 3\narcs 1\n1 2 0.5\n");
        assert_eq!((e.line, e.kind), (3, ParseErrorKind::MissingKeyword("source")));

        let e = parse_err("nodes 3\nnodes 4\n");
        assert_eq!((e.line, e.kind), (2, ParseErrorKind::DuplicateKeyword("nodes")));

        let e = parse_err("nodes x\n");
        assert_eq!(e.line, 1);
    }

    #[test]
    fn working_arcs_examples() {
        let net = parse_network(FIGURE1).unwrap();
        assert_eq!(net.working_arcs(&sv(&[0, 1, 1, 0, 1, 1])).unwrap(), vec![2, 3, 5, 6]);
        assert!(net.working_arcs(&StateVector::zeros(6)).unwrap().is_empty());
        assert_eq!(net.working_arcs(&StateVector::ones(6)).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(
            net.working_arcs(&StateVector::zeros(5)),
            Err(NetworkError::LengthMismatch { expected: 6, found: 5 })
        );
    }

    #[test]
    fn state_vector_basics() {
        let x = sv(&[1, 0, 1]);
        assert_eq!(x.to_string(), "(1, 0, 1)");
        assert_eq!(x.coords(), vec![1, 0, 1]);
        assert_eq!(x.complement(), sv(&[0, 1, 0]));
        assert!(StateVector::ones(3).dominates(&x));
        assert!(!x.dominates(&StateVector::ones(3)));
        assert_eq!(StateVector::from_coords(&[0, 2]), Err(StateVectorError::NotBinary { index: 2, value: 2 }));
        assert_eq!(StateVector::ones(64).count_ones(), 64);
    }

    fn arb_network() -> impl Strategy<Value = Network> {
        (2u32..7)
            .prop_flat_map(|n| {
                let pairs: Vec<(u32, u32)> =
                    (1..=n).flat_map(|u| (1..=n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
                let len = pairs.len();
                (Just(n), proptest::sample::subsequence(pairs, 1..=len.min(12)).prop_shuffle(), 1..=n, 1..=n)
            })
            .prop_filter("source != sink", |(_, _, s, t)| s != t)
            .prop_flat_map(|(n, arcs, s, t)| {
                let m = arcs.len();
                (Just(n), Just(arcs), Just(s), Just(t), proptest::collection::vec(0.0f64..=1.0, m))
            })
            .prop_map(|(n, arcs, s, t, p)| Network::new(n, arcs, s, t, p).unwrap())
    }

    proptest! {
        #[test]
        fn serialize_then_parse_round_trips(net in arb_network()) {
            let text = net.to_string();
            prop_assert_eq!(parse_network(&text).unwrap(), net);
        }

        #[test]
        fn working_arcs_partition(net in arb_network(), bits in any::<u64>()) {
            let x = StateVector::from_bits(bits, net.arc_count());
            let on = net.working_arcs(&x).unwrap();
            let off = net.working_arcs(&x.complement()).unwrap();
            let mut all: Vec<usize> = on.iter().chain(&off).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (1..=net.arc_count()).collect::<Vec<_>>());
            prop_assert!(on.iter().all(|k| !off.contains(k)));
        }

        // Arbitrary arc lists over a small node range: construction succeeds
        // exactly when every structural condition holds.
        #[test]
        fn validation_matches_conditions(
            n in 1u32..5,
            arcs in proptest::collection::vec((0u32..6, 0u32..6), 1..8),
            s in 0u32..6,
            t in 0u32..6,
            probs in proptest::collection::vec(-0.5f64..1.5, 1..8),
        ) {
            let in_range = |v: u32| v >= 1 && v <= n;
            let mut uniq = std::collections::HashSet::new();
            let ok = in_range(s) && in_range(t) && s != t
                && arcs.iter().all(|&(a, b)| in_range(a) && in_range(b) && a != b)
                && arcs.iter().all(|a| uniq.insert(*a))
                && probs.len() == arcs.len()
                && probs.iter().all(|p| (0.0..=1.0).contains(p));
            let built = Network::new(n, arcs.clone(), s, t, probs.clone());
            prop_assert_eq!(built.is_ok(), ok, "{:?}", built);
        }
    }
}
