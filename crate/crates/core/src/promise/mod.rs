//! Promise functions: binary functions on the real line, promised to be
//! either constant or balanced.
//!
//! A [`PromiseFunction`] is a list of disjoint [`IntervalPiece`]s plus an
//! optional `else` value, usually parsed from the mini-language in
//! [`parser`]. Binding it to a [`Grid`] samples it at the cell centers and
//! yields a [`SampledFunction`], which is what the oracles consume.
//!
//! Balance is reported two ways. Grid balance (equal cell counts) is what
//! the simulator's exactness rests on; the analytic measure of each
//! level set, clipped to `[-L, L)`, is reported alongside it.

pub mod parser;

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DslError, DslErrorKind, Error, Position, Result};
use crate::grid::Grid;

pub use parser::parse_fnspec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPiece {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub value: u8,
}

impl IntervalPiece {
    pub(crate) fn validate(&self) -> std::result::Result<(), String> {
        if self.value > 1 {
            return Err(format!("value {} is not a bit", self.value));
        }
        if self.lo.is_nan() || self.hi.is_nan() {
            return Err("bound is NaN".into());
        }
        match self.lo.partial_cmp(&self.hi) {
            Some(Ordering::Less) => Ok(()),
            Some(Ordering::Equal) if self.lo_closed && self.hi_closed && self.lo.is_finite() => {
                Ok(())
            }
            Some(Ordering::Equal) => Err(format!(
                "interval at {} is empty (a single point needs both ends closed)",
                self.lo
            )),
            _ => Err(format!(
                "lower bound {} exceeds upper bound {}",
                self.lo, self.hi
            )),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    /// Length of the piece intersected with `[lo, hi)`.
    fn clipped_length(&self, lo: f64, hi: f64) -> f64 {
        (self.hi.min(hi) - self.lo.max(lo)).max(0.0)
    }

    /// Orders pieces by where they start; `[a` starts before `(a`.
    fn start_cmp(&self, other: &Self) -> Ordering {
        self.lo
            .total_cmp(&other.lo)
            .then_with(|| other.lo_closed.cmp(&self.lo_closed))
    }

    /// Orders pieces by where they end; `a)` ends before `a]`.
    fn end_cmp(&self, other: &Self) -> Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| self.hi_closed.cmp(&other.hi_closed))
    }
}

fn fmt_bound(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if x == f64::INFINITY {
        f.write_str("inf")
    } else if x == f64::NEG_INFINITY {
        f.write_str("-inf")
    } else {
        // shortest representation that parses back to the same value
        write!(f, "{x}")
    }
}

impl fmt::Display for IntervalPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.lo_closed { "[" } else { "(" })?;
        fmt_bound(self.lo, f)?;
        f.write_str(",")?;
        fmt_bound(self.hi, f)?;
        f.write_str(if self.hi_closed { "]" } else { ")" })?;
        write!(f, "->{}", self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DeclaredClass {
    Constant,
    Balanced,
    #[default]
    Unknown,
}

/// Class requested from [`random_promise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromiseClass {
    Constant,
    Balanced,
}

#[derive(Debug, Clone)]
pub struct PromiseFunction {
    pieces: Vec<IntervalPiece>,
    else_value: Option<u8>,
    source: String,
    declared_class: DeclaredClass,
    constant_form: bool,
    /// Indices into `pieces`, sorted by start.
    order: Vec<usize>,
    spans: Vec<Position>,
    end: Position,
}

/// Structural equality; source text and positions are ignored.
impl PartialEq for PromiseFunction {
    fn eq(&self, other: &Self) -> bool {
        self.pieces == other.pieces
            && self.else_value == other.else_value
            && self.constant_form == other.constant_form
    }
}

impl PromiseFunction {
    pub fn constant(value: u8) -> Self {
        let value = value.min(1);
        let mut f = Self::constant_with_source(value, String::new());
        f.source = f.to_string();
        f.declared_class = DeclaredClass::Constant;
        f
    }

    pub(crate) fn constant_with_source(value: u8, source: String) -> Self {
        PromiseFunction {
            pieces: vec![IntervalPiece {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                lo_closed: false,
                hi_closed: false,
                value,
            }],
            else_value: None,
            source,
            declared_class: DeclaredClass::Unknown,
            constant_form: true,
            order: vec![0],
            spans: vec![Position { line: 1, column: 1 }],
            end: Position { line: 1, column: 1 },
        }
    }

    /// Builds a piecewise function, checking each piece and disjointness.
    /// The source text is regenerated from the pieces.
    pub fn piecewise(pieces: Vec<IntervalPiece>, else_value: Option<u8>) -> Result<Self> {
        let spans = vec![Position::default(); pieces.len()];
        let mut f = Self::piecewise_with_spans(
            pieces,
            else_value,
            String::new(),
            spans,
            Position::default(),
        )?;
        f.source = f.to_string();
        Ok(f)
    }

    pub(crate) fn piecewise_with_spans(
        pieces: Vec<IntervalPiece>,
        else_value: Option<u8>,
        source: String,
        spans: Vec<Position>,
        end: Position,
    ) -> std::result::Result<Self, DslError> {
        if pieces.is_empty() {
            return Err(DslError::new(
                DslErrorKind::Syntax,
                end,
                "piecewise needs at least one piece",
            ));
        }
        if let Some(b) = else_value.filter(|&b| b > 1) {
            return Err(DslError::new(
                DslErrorKind::InvalidBit,
                end,
                format!("else value {b} is not 0 or 1"),
            ));
        }
        for (p, &pos) in pieces.iter().zip(&spans) {
            p.validate()
                .map_err(|msg| DslError::new(DslErrorKind::InvalidInterval, pos, msg))?;
        }
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&a, &b| pieces[a].start_cmp(&pieces[b]).then(a.cmp(&b)));

        // Sweep in start order; a piece overlaps some earlier-starting piece
        // iff it starts before the furthest end seen so far.
        let mut reach: Option<usize> = None;
        for &i in &order {
            if let Some(r) = reach {
                let (prev, cur) = (&pieces[r], &pieces[i]);
                let overlaps =
                    cur.lo < prev.hi || (cur.lo == prev.hi && cur.lo_closed && prev.hi_closed);
                if overlaps {
                    let later = r.max(i);
                    let earlier = r.min(i);
                    return Err(DslError::new(
                        DslErrorKind::Overlap,
                        spans[later],
                        format!("piece {} overlaps piece {}", pieces[later], pieces[earlier]),
                    ));
                }
            }
            if reach.is_none_or(|r| pieces[i].end_cmp(&pieces[r]) == Ordering::Greater) {
                reach = Some(i);
            }
        }
        Ok(PromiseFunction {
            pieces,
            else_value,
            source,
            declared_class: DeclaredClass::Unknown,
            constant_form: false,
            order,
            spans,
            end,
        })
    }

    /// Piecewise spec that assigns `bits[j]` to the grid tile
    /// `[x_j, x_j + spacing)`, merging equal neighbours. The outermost
    /// pieces extend to infinity.
    pub fn from_cell_bits(grid: Grid, bits: &[u8]) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: bits.len(),
            });
        }
        let n = bits.len();
        let mut pieces = Vec::new();
        let mut start = 0;
        while start < n {
            let value = bits[start].min(1);
            let mut end = start + 1;
            while end < n && bits[end].min(1) == value {
                end += 1;
            }
            pieces.push(IntervalPiece {
                lo: if start == 0 {
                    f64::NEG_INFINITY
                } else {
                    grid.coordinate(start)
                },
                hi: if end == n {
                    f64::INFINITY
                } else {
                    grid.coordinate(end)
                },
                lo_closed: true,
                hi_closed: false,
                value,
            });
            start = end;
        }
        Self::piecewise(pieces, None)
    }

    pub fn with_declared_class(mut self, class: DeclaredClass) -> Self {
        self.declared_class = class;
        self
    }

    pub fn pieces(&self) -> &[IntervalPiece] {
        &self.pieces
    }

    pub fn else_value(&self) -> Option<u8> {
        self.else_value
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn declared_class(&self) -> DeclaredClass {
        self.declared_class
    }

    /// Value at `x`, or `None` if no piece covers it and there is no else.
    pub fn eval(&self, x: f64) -> Option<u8> {
        // Disjointness leaves at most two candidates: the pieces with the
        // greatest start <= x, `[a` and `(a` sharing the same a.
        let k = self.order.partition_point(|&i| self.pieces[i].lo <= x);
        self.order[..k]
            .iter()
            .rev()
            .take(2)
            .map(|&i| &self.pieces[i])
            .find(|p| p.contains(x))
            .map(|p| p.value)
            .or(self.else_value)
    }

    /// Checks that every point of `[-L, L)` is covered by a piece or the
    /// else clause.
    pub fn check_coverage(&self, grid: Grid) -> std::result::Result<(), DslError> {
        if self.else_value.is_some() {
            return Ok(());
        }
        let (lo, hi) = (-grid.half_extent(), grid.half_extent());
        // everything below `frontier` is covered; the point itself is
        // covered iff `inclusive`
        let mut frontier = lo;
        let mut inclusive = false;
        for &i in &self.order {
            if frontier >= hi {
                break;
            }
            let p = &self.pieces[i];
            if p.hi < frontier || (p.hi == frontier && !p.hi_closed) {
                continue;
            }
            let gap = p.lo > frontier || (p.lo == frontier && !p.lo_closed && !inclusive);
            if gap {
                return Err(DslError::new(
                    DslErrorKind::CoverageGap,
                    self.spans[i],
                    format!("no piece covers {frontier} (simulated interval is [{lo}, {hi}); add pieces or an else clause)"),
                ));
            }
            if p.hi > frontier || (p.hi == frontier && p.hi_closed) {
                frontier = p.hi;
                inclusive = p.hi_closed;
            }
        }
        if frontier < hi {
            return Err(DslError::new(
                DslErrorKind::CoverageGap,
                self.end,
                format!("no piece covers {frontier} (simulated interval is [{lo}, {hi}); add pieces or an else clause)"),
            ));
        }
        Ok(())
    }

    /// Binds the function to `grid`: coverage check, then sampling.
    pub fn sample(&self, grid: Grid) -> Result<SampledFunction> {
        self.check_coverage(grid)?;
        Ok(sample_on_grid(self, grid))
    }

    /// Lengths of the 0- and 1-level sets within `[-L, L)`.
    pub fn analytic_measures(&self, grid: Grid) -> [f64; 2] {
        let (lo, hi) = (-grid.half_extent(), grid.half_extent());
        let mut measure = [0.0; 2];
        let mut covered = 0.0;
        for p in &self.pieces {
            let len = p.clipped_length(lo, hi);
            measure[p.value as usize] += len;
            covered += len;
        }
        if let Some(b) = self.else_value {
            measure[b as usize] += (grid.extent() - covered).max(0.0);
        }
        measure
    }
}

impl fmt::Display for PromiseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.constant_form {
            return write!(f, "constant({})", self.pieces[0].value);
        }
        f.write_str("piecewise{")?;
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")?;
        if let Some(b) = self.else_value {
            write!(f, " else->{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PromiseFunction {
    type Err = DslError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_fnspec(s)
    }
}

/// A promise function evaluated at the centers of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    bits: Vec<u8>,
}

impl SampledFunction {
    pub fn from_bits(grid: Grid, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: bits.len(),
            });
        }
        if let Some(j) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Dsl(DslError::new(
                DslErrorKind::InvalidBit,
                Position::default(),
                format!("cell {j} holds {}", bits[j]),
            )));
        }
        Ok(SampledFunction { grid, bits })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn bit(&self, j: usize) -> u8 {
        self.bits[j]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// `bit[j] = f(coordinate(j))`. Uncovered points (only possible without
/// a prior [`PromiseFunction::check_coverage`]) read as 0.
pub fn sample_on_grid(f: &PromiseFunction, grid: Grid) -> SampledFunction {
    let bits = grid.coordinates().map(|x| f.eval(x).unwrap_or(0)).collect();
    SampledFunction { grid, bits }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Constant0,
    Constant1,
    GridBalanced,
    /// Neither constant nor grid-balanced: the promise is violated.
    #[serde(rename = "NeitherError")]
    Neither,
}

impl Classification {
    pub fn is_constant(self) -> bool {
        matches!(self, Classification::Constant0 | Classification::Constant1)
    }

    pub fn honors_promise(self) -> bool {
        self != Classification::Neither
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Constant0 => "Constant0",
            Classification::Constant1 => "Constant1",
            Classification::GridBalanced => "GridBalanced",
            Classification::Neither => "NeitherError",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub grid_count_0: usize,
    pub grid_count_1: usize,
    pub analytic_measure_0: f64,
    pub analytic_measure_1: f64,
    pub grid_balanced: bool,
    pub analytic_balanced: bool,
}

/// Relative tolerance for analytic balance, scaled by `2L`.
pub const ANALYTIC_BALANCE_TOLERANCE: f64 = 1e-12;

pub fn classify_sampled(f: &SampledFunction) -> Classification {
    let ones = f.count_ones();
    let n = f.len();
    if ones == 0 {
        Classification::Constant0
    } else if ones == n {
        Classification::Constant1
    } else if 2 * ones == n {
        Classification::GridBalanced
    } else {
        Classification::Neither
    }
}

/// Classifies `f` on `grid`. A promise violation is a returned
/// classification; the only error is a coverage gap.
pub fn classify(f: &PromiseFunction, grid: Grid) -> Result<(Classification, BalanceReport)> {
    let sampled = f.sample(grid)?;
    let ones = sampled.count_ones();
    let [m0, m1] = f.analytic_measures(grid);
    let report = BalanceReport {
        grid_count_0: grid.len() - ones,
        grid_count_1: ones,
        analytic_measure_0: m0,
        analytic_measure_1: m1,
        grid_balanced: 2 * ones == grid.len(),
        analytic_balanced: (m0 - m1).abs() <= ANALYTIC_BALANCE_TOLERANCE * grid.extent(),
    };
    Ok((classify_sampled(&sampled), report))
}

/// Deterministic random promise function.
///
/// Constant draws the bit from the seed; Balanced marks a uniformly random
/// half of the cells with 1, expressed over grid tiles.
pub fn random_promise(grid: Grid, class: PromiseClass, seed: u64) -> PromiseFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match class {
        PromiseClass::Constant => PromiseFunction::constant(rng.gen_range(0..=1)),
        PromiseClass::Balanced => {
            let n = grid.len();
            let mut bits = vec![0u8; n];
            for j in rand::seq::index::sample(&mut rng, n, n / 2) {
                bits[j] = 1;
            }
            PromiseFunction::from_cell_bits(grid, &bits)
                .expect("tile pieces are ordered and disjoint")
                .with_declared_class(DeclaredClass::Balanced)
        }
    }
}

/// All `C(n, n/2)` grid-balanced bit patterns, in lexicographic order.
pub fn balanced_patterns(n: usize) -> Vec<Vec<u8>> {
    fn rec(n: usize, ones: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let remaining = n - prefix.len();
        let placed = prefix.iter().filter(|&&b| b == 1).count();
        let need = ones - placed;
        if need > remaining {
            return;
        }
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for b in [0u8, 1] {
            if b == 1 && need == 0 {
                continue;
            }
            prefix.push(b);
            rec(n, ones, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n / 2, &mut Vec::with_capacity(n), &mut out);
    out
}
