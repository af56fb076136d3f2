//! Binary-addition-tree (BAT) enumeration of arc-state vectors.
//!
//! The backward BAT starts at the all-zero vector and repeatedly sets the
//! last zero coordinate to one while clearing every coordinate after it,
//! halting once the all-one vector has been emitted. Read with coordinate 1
//! as the most significant digit, this is ordinary binary counting, so the
//! 1-based emission index of `X` is `Dec(X) = sum x_k 2^(m-k) + 1`. The
//! forward BAT mirrors this from coordinate 1.
//!
//! Equal divisions split the index range `[1, 2^m]` into `chi = 2^c` slices
//! of `mu = 2^m / chi` vectors. Every vector in slice `t` shares its first
//! `c` coordinates with the `t`-th vector of a `c`-coordinate BAT, so a
//! slice is enumerated by fixing that prefix and running a BAT over the
//! remaining `m - c` coordinates.

use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{low_mask, StateVector};

/// Largest arc count for which 1-based vector indices fit in a `u64`.
pub const MAX_INDEXED_ARCS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("enumeration needs at least one coordinate")]
    NoCoordinates,
    #[error("{m} coordinates exceed the indexable maximum of {MAX_INDEXED_ARCS}")]
    TooManyCoordinates { m: usize },
    #[error("{m} arcs exceed the configured cap of {cap}")]
    CapExceeded { m: usize, cap: usize },
    #[error("BAT cursor is exhausted")]
    Exhausted,
    #[error("vector index {index} is outside 1..=2^{m}")]
    IndexOutOfRange { index: u64, m: usize },
    #[error("thread count {0} must be a power of two")]
    ChiNotPowerOfTwo(u64),
    #[error("thread count {chi} exceeds the 2^{m} vectors to divide")]
    ChiTooLarge { chi: u64, m: usize },
    #[error("division {t} is outside 1..={chi}")]
    DivisionOutOfRange { t: u64, chi: u64 },
}

/// Direction in which the BAT counter carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Updates from coordinate `m` toward coordinate 1.
    #[default]
    Backward,
    /// Updates from coordinate 1 toward coordinate `m`.
    Forward,
}

/// `2^m`, the number of arc-state vectors, provided `1 <= m <= cap`.
pub fn solution_space_size(m: usize, cap: usize) -> Result<u64, EnumerationError> {
    check_width(m)?;
    if m > cap {
        return Err(EnumerationError::CapExceeded { m, cap });
    }
    Ok(1u64 << m)
}

fn check_width(m: usize) -> Result<(), EnumerationError> {
    if m == 0 {
        Err(EnumerationError::NoCoordinates)
    } else if m > MAX_INDEXED_ARCS {
        Err(EnumerationError::TooManyCoordinates { m })
    } else {
        Ok(())
    }
}

/// Position of `x` in the BAT emission order of the given mode, 1-based.
pub fn dec(x: &StateVector, mode: Mode) -> Result<u64, EnumerationError> {
    let m = x.len();
    check_width(m)?;
    let value = match mode {
        Mode::Forward => x.bits(),
        // Coordinate 1 is the most significant digit.
        Mode::Backward => x.bits().reverse_bits() >> (64 - m),
    };
    Ok(value + 1)
}

/// The unique `m`-coordinate vector with `dec(x, mode) == index`.
pub fn dec_inv(index: u64, m: usize, mode: Mode) -> Result<StateVector, EnumerationError> {
    check_width(m)?;
    if index == 0 || index > 1u64 << m {
        return Err(EnumerationError::IndexOutOfRange { index, m });
    }
    let value = index - 1;
    let bits = match mode {
        Mode::Forward => value,
        Mode::Backward => value.reverse_bits() >> (64 - m),
    };
    Ok(StateVector::from_bits(bits, m))
}

/// Single-vector BAT state: the current vector, the coordinate pointer and
/// the carry direction.
///
/// A cursor may be confined to coordinates `floor..=m`, leaving the first
/// `floor - 1` coordinates fixed; this is how a division sweeps beneath its
/// prefix.
#[derive(Debug, Clone)]
pub struct BatCursor {
    current: StateVector,
    pointer: usize,
    floor: usize,
    mode: Mode,
    exhausted: bool,
}

impl BatCursor {
    /// Positions a cursor on `X_1 = 0`.
    pub fn first(m: usize, mode: Mode) -> Result<Self, EnumerationError> {
        check_width(m)?;
        Ok(BatCursor {
            current: StateVector::zeros(m),
            pointer: start_pointer(m, 1, mode),
            floor: 1,
            mode,
            exhausted: false,
        })
    }

    /// Backward cursor over an `m`-coordinate space whose leading
    /// coordinates are pinned to `prefix`. With a full-length prefix the
    /// cursor emits only that vector.
    pub fn beneath_prefix(prefix: &StateVector, m: usize) -> Result<Self, EnumerationError> {
        check_width(m)?;
        let c = prefix.len();
        debug_assert!(c <= m);
        Ok(BatCursor {
            current: StateVector::from_bits(prefix.bits(), m),
            pointer: m,
            floor: c + 1,
            mode: Mode::Backward,
            exhausted: false,
        })
    }

    pub fn current(&self) -> &StateVector {
        &self.current
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Coordinate the next update starts from.
    pub fn pointer(&self) -> usize {
        self.pointer
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Moves to the next vector. Returns `Ok(None)` once the all-one vector
    /// has been passed, and `Err(Exhausted)` on any later call.
    pub fn advance(&mut self) -> Result<Option<StateVector>, EnumerationError> {
        if self.exhausted {
            return Err(EnumerationError::Exhausted);
        }
        let m = self.current.len();
        if self.floor > m {
            self.exhausted = true;
            return Ok(None);
        }
        let mut x = self.current;
        let mut k = self.pointer;
        match self.mode {
            Mode::Backward => loop {
                if !x.get(k) {
                    x.set(k, true);
                    break;
                }
                if k == self.floor {
                    self.exhausted = true;
                    return Ok(None);
                }
                x.set(k, false);
                k -= 1;
            },
            Mode::Forward => loop {
                if !x.get(k) {
                    x.set(k, true);
                    break;
                }
                if k == m {
                    self.exhausted = true;
                    return Ok(None);
                }
                x.set(k, false);
                k += 1;
            },
        }
        self.current = x;
        self.pointer = start_pointer(m, self.floor, self.mode);
        Ok(Some(x))
    }

    /// Every vector from the current one onward.
    pub fn into_iter_from_current(self) -> BatIter {
        BatIter { cursor: self, started: false }
    }
}

fn start_pointer(m: usize, floor: usize, mode: Mode) -> usize {
    match mode {
        Mode::Backward => m,
        Mode::Forward => floor,
    }
}

/// Iterator adaptor over a [`BatCursor`], yielding the cursor's current
/// vector first.
#[derive(Debug, Clone)]
pub struct BatIter {
    cursor: BatCursor,
    started: bool,
}

impl Iterator for BatIter {
    type Item = StateVector;

    fn next(&mut self) -> Option<StateVector> {
        if !self.started {
            self.started = true;
            return Some(*self.cursor.current());
        }
        if self.cursor.is_exhausted() {
            return None;
        }
        self.cursor.advance().ok().flatten()
    }
}

/// Full BAT sequence for `m` coordinates.
pub fn bat_sequence(m: usize, mode: Mode) -> Result<BatIter, EnumerationError> {
    Ok(BatCursor::first(m, mode)?.into_iter_from_current())
}

/// One slice of the index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Division {
    /// 1-based division number `t`.
    pub t: u64,
    /// Shared leading coordinates, `c` long.
    pub prefix: StateVector,
    /// First index, `(t - 1) * mu + 1`.
    pub start: u64,
    /// Last index, `t * mu`.
    pub end: u64,
}

/// Equal division of `[1, 2^m]` into `chi` slices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionPlan {
    m: usize,
    chi: u64,
    prefix_len: usize,
    mu: u64,
    prefixes: Vec<StateVector>,
}

impl DivisionPlan {
    /// Plans `chi` divisions of the `m`-coordinate space. `chi` must be a
    /// power of two no larger than `2^m`.
    pub fn new(m: usize, chi: u64) -> Result<Self, EnumerationError> {
        check_width(m)?;
        if !chi.is_power_of_two() {
            return Err(EnumerationError::ChiNotPowerOfTwo(chi));
        }
        let c = chi.trailing_zeros() as usize;
        if c > m {
            return Err(EnumerationError::ChiTooLarge { chi, m });
        }
        // The division heads come from a c-coordinate BAT.
        let prefixes = if c == 0 { vec![StateVector::zeros(0)] } else { bat_sequence(c, Mode::Backward)?.collect() };
        debug_assert_eq!(prefixes.len() as u64, chi);
        Ok(DivisionPlan { m, chi, prefix_len: c, mu: 1u64 << (m - c), prefixes })
    }

    pub fn arc_count(&self) -> usize {
        self.m
    }

    pub fn chi(&self) -> u64 {
        self.chi
    }

    /// `c = log2(chi)`.
    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    /// Vectors per division.
    pub fn mu(&self) -> u64 {
        self.mu
    }

    pub fn division(&self, t: u64) -> Result<Division, EnumerationError> {
        if t == 0 || t > self.chi {
            return Err(EnumerationError::DivisionOutOfRange { t, chi: self.chi });
        }
        Ok(Division { t, prefix: self.prefixes[(t - 1) as usize], start: (t - 1) * self.mu + 1, end: t * self.mu })
    }

    pub fn divisions(&self) -> impl Iterator<Item = Division> + '_ {
        (1..=self.chi).map(|t| self.division(t).expect("t in range"))
    }

    /// First vector of division `t`: its prefix followed by zeros.
    pub fn head(&self, t: u64) -> Result<StateVector, EnumerationError> {
        let d = self.division(t)?;
        Ok(StateVector::from_bits(d.prefix.bits(), self.m))
    }

    /// Last vector of division `t`: its prefix followed by ones.
    pub fn tail(&self, t: u64) -> Result<StateVector, EnumerationError> {
        let d = self.division(t)?;
        let ones_after_prefix = low_mask(self.m) & !low_mask(self.prefix_len);
        Ok(StateVector::from_bits(d.prefix.bits() | ones_after_prefix, self.m))
    }
}

/// Calls `visitor` on each vector of division `t` in index order and
/// returns how many were visited (always `mu`).
pub fn division_enumerate<F>(plan: &DivisionPlan, t: u64, mut visitor: F) -> Result<u64, EnumerationError>
where
    F: FnMut(&StateVector),
{
    let flow = division_try_enumerate(plan, t, |x| {
        visitor(x);
        ControlFlow::<()>::Continue(())
    })?;
    match flow {
        ControlFlow::Continue(n) => Ok(n),
        ControlFlow::Break(_) => unreachable!("visitor never breaks"),
    }
}

/// Like [`division_enumerate`], but the visitor may stop the sweep early.
/// On `Break`, returns the break value together with the number of vectors
/// visited so far, including the one that broke.
pub fn division_try_enumerate<F, B>(
    plan: &DivisionPlan,
    t: u64,
    mut visitor: F,
) -> Result<ControlFlow<(B, u64), u64>, EnumerationError>
where
    F: FnMut(&StateVector) -> ControlFlow<B>,
{
    let d = plan.division(t)?;
    let mut cursor = BatCursor::beneath_prefix(&d.prefix, plan.m)?;
    let mut visited = 0u64;
    let mut x = *cursor.current();
    loop {
        visited += 1;
        if let ControlFlow::Break(b) = visitor(&x) {
            return Ok(ControlFlow::Break((b, visited)));
        }
        match cursor.advance()? {
            Some(next) => x = next,
            None => break,
        }
    }
    debug_assert_eq!(visited, plan.mu);
    Ok(ControlFlow::Continue(visited))
}
