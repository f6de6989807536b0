//! Discretization of the position axis.
//!
//! A query [`Grid`] of `n` cells has spacing `sqrt(pi / n)` and centered
//! coordinates `(i - n/2) * spacing`, covering the half-open interval
//! `[-L, L)` with `L = n * spacing / 2`. Zero is always a grid point.
//!
//! The ancilla register uses an [`AncillaGrid`]: integer coordinates
//! `0..m` with unit spacing and arithmetic modulo `m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported query cell count.
pub const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    spacing: f64,
}

impl Grid {
    /// Builds the centered grid with `n` cells.
    ///
    /// `n` must be even and within `[2, MAX_CELLS]`.
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_CELLS).contains(&n) {
            return Err(Error::Capacity {
                n,
                min: 2,
                max: MAX_CELLS,
            });
        }
        if !n.is_multiple_of(2) {
            return Err(Error::OddCells(n));
        }
        Ok(Grid {
            n,
            spacing: (PI / n as f64).sqrt(),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Index of the cell centered on zero.
    #[inline]
    pub fn offset(&self) -> usize {
        self.n / 2
    }

    /// Half-width `L` of the simulated interval `[-L, L)`.
    #[inline]
    pub fn half_extent(&self) -> f64 {
        self.n as f64 * self.spacing / 2.0
    }

    /// Total length `2L`.
    #[inline]
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.spacing
    }

    /// Center of cell `index`. Does not check the range.
    #[inline]
    pub fn coordinate(&self, index: usize) -> f64 {
        (index as f64 - self.offset() as f64) * self.spacing
    }

    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.coordinate(i))
    }

    /// Nearest cell center to `x`. A point exactly halfway between two
    /// centers resolves to the lower index.
    pub fn index_of(&self, x: f64) -> Result<usize> {
        let l = self.half_extent();
        if !(x >= -l && x < l) {
            return Err(Error::CoordinateOutOfRange { x, lo: -l, hi: l });
        }
        let t = x / self.spacing + self.offset() as f64;
        let idx = (t - 0.5).ceil().max(0.0) as usize;
        Ok(idx.min(self.n - 1))
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.n })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaGrid {
    m: usize,
}

impl AncillaGrid {
    /// Default ancilla size.
    pub const DEFAULT_CELLS: usize = 2;

    pub fn new(m: usize) -> Result<Self> {
        if !(2..=MAX_CELLS).contains(&m) {
            return Err(Error::Capacity {
                n: m,
                min: 2,
                max: MAX_CELLS,
            });
        }
        if !m.is_multiple_of(2) {
            return Err(Error::OddCells(m));
        }
        Ok(AncillaGrid { m })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(k + shift) mod m`.
    #[inline]
    pub fn shift(&self, k: usize, shift: usize) -> usize {
        (k + shift) % self.m
    }
}

impl Default for AncillaGrid {
    fn default() -> Self {
        AncillaGrid {
            m: Self::DEFAULT_CELLS,
        }
    }
}
