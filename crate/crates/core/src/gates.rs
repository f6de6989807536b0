//! Unitary gate set.
//!
//! - [`fourier`]: the centered DFT that the continuum kernel `exp(2ixy)`
//!   becomes on a grid with spacing `sqrt(pi / n)`.
//! - [`xor_add`]: the modular adder `|j⟩|k⟩ → |j⟩|j + k mod m⟩`.
//! - [`oracle_faithful`]: `|j⟩|k⟩ → |j⟩|k + f(x_j) mod m⟩` on the joint state.
//! - [`oracle_fast`]: the phase form `(-1)^f(x_j)` on the query register only.
//!
//! Every fast path has a dense matrix twin, applied with
//! [`dense_reference_apply`], for brute-force checking.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AncillaGrid, Grid};
use crate::promise::SampledFunction;
use crate::qstate::{JointState, StateVector, NORM_TOLERANCE};

/// Largest dimension accepted by the dense reference path.
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Kernel `exp(+2πi (j - n/2)(k - n/2) / n)`.
    Forward,
    /// Conjugate kernel.
    Inverse,
}

/// Which implementation executes a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecPath {
    #[default]
    Fast,
    /// Explicit dense matrices, O(n²) memory.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Shift the ancilla register by `f(x)`.
    Faithful,
    /// Apply `(-1)^f(x)` to the query register, ancilla factored out.
    #[default]
    Fast,
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleMode::Faithful => "faithful",
            OracleMode::Fast => "fast",
        })
    }
}

impl std::str::FromStr for OracleMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "faithful" => Ok(OracleMode::Faithful),
            "fast" => Ok(OracleMode::Fast),
            other => Err(format!(
                "unknown oracle mode `{other}` (expected faithful|fast)"
            )),
        }
    }
}

/// Counts oracle applications within one experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleCallCounter {
    calls: u64,
}

impl OracleCallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn calls(&self) -> u64 {
        self.calls
    }

    #[inline]
    fn record(&mut self) {
        self.calls += 1;
    }
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    fn zeros(dim: usize) -> Result<Self> {
        if dim > DENSE_CAP {
            return Err(Error::DenseCap {
                dim,
                max: DENSE_CAP,
            });
        }
        Ok(DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Permutation matrix sending basis state `c` to `perm(c)`.
    fn permutation(dim: usize, perm: impl Fn(usize) -> usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for c in 0..dim {
            m.data[perm(c) * dim + c] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        DenseMatrix { dim: d, data }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let d = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        Ok(DenseMatrix { dim: d, data })
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Plain matrix-vector product.
pub fn dense_reference_apply(u: &DenseMatrix, amps: &[Complex64]) -> Result<Vec<Complex64>> {
    if amps.len() != u.dim {
        return Err(Error::DimensionMismatch {
            expected: u.dim,
            actual: amps.len(),
        });
    }
    Ok(u.data
        .chunks_exact(u.dim)
        .map(|row| row.iter().zip(amps).map(|(a, b)| a * b).sum())
        .collect())
}

/// Dense centered-DFT matrix, built straight from the kernel.
pub fn fourier_matrix(grid: Grid, direction: Direction) -> Result<DenseMatrix> {
    let n = grid.len();
    let c = grid.offset() as i64;
    let scale = 1.0 / (n as f64).sqrt();
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => -1.0,
    };
    DenseMatrix::from_fn(n, |k, j| {
        // reduce the phase index exactly before going to floating point
        let p = ((j as i64 - c) * (k as i64 - c)).rem_euclid(n as i64);
        Complex64::from_polar(scale, sign * 2.0 * PI * p as f64 / n as f64)
    })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Centered DFT in place via a standard FFT with `(-1)^j` pre- and
/// post-twiddles and the global factor `(-1)^(n/2)`.
fn fourier_fast_in_place(buf: &mut [Complex64], direction: Direction) {
    let n = buf.len();
    let fft_dir = match direction {
        // rustfft's inverse carries the positive exponent
        Direction::Forward => FftDirection::Inverse,
        Direction::Inverse => FftDirection::Forward,
    };
    for a in buf.iter_mut().skip(1).step_by(2) {
        *a = -*a;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, fft_dir));
    fft.process(buf);
    let global = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let scale = global / (n as f64).sqrt();
    for (k, a) in buf.iter_mut().enumerate() {
        *a *= if k % 2 == 0 { scale } else { -scale };
    }
}

fn debug_check_norm(before: f64, after: f64) {
    debug_assert!(
        (before - after).abs() <= NORM_TOLERANCE,
        "gate changed the norm: {before} -> {after}"
    );
}

/// Fourier transform of a query state.
pub fn fourier(psi: &StateVector, direction: Direction, path: ExecPath) -> Result<StateVector> {
    let grid = psi.grid();
    let out = match path {
        ExecPath::Fast => {
            let mut buf = psi.amplitudes().to_vec();
            fourier_fast_in_place(&mut buf, direction);
            buf
        }
        ExecPath::Reference => {
            dense_reference_apply(&fourier_matrix(grid, direction)?, psi.amplitudes())?
        }
    };
    let out = StateVector::from_amplitudes(grid, out)?;
    debug_check_norm(psi.norm_sqr(), out.norm_sqr());
    Ok(out)
}

/// Fourier transform of the query factor of a joint state (`F ⊗ I`).
pub fn fourier_query(j: &JointState, direction: Direction, path: ExecPath) -> Result<JointState> {
    let (n, m) = (j.rows(), j.cols());
    let dense = match path {
        ExecPath::Fast => None,
        ExecPath::Reference => Some(fourier_matrix(j.query_grid(), direction)?),
    };
    let mut out = j.clone();
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..m {
        for (r, slot) in column.iter_mut().enumerate() {
            *slot = j.get(r, k);
        }
        let transformed = match &dense {
            None => {
                fourier_fast_in_place(&mut column, direction);
                column.clone()
            }
            Some(u) => dense_reference_apply(u, &column)?,
        };
        let amps = out.amplitudes_mut();
        for (r, v) in transformed.into_iter().enumerate() {
            amps[r * m + k] = v;
        }
    }
    debug_check_norm(j.norm_sqr(), out.norm_sqr());
    Ok(out)
}

/// Moves each amplitude of row `j` from column `k` to column `shift(j, k)`.
fn shift_rows(j: &JointState, shift: impl Fn(usize) -> usize) -> JointState {
    let m = j.cols();
    let mut out = j.clone();
    let dst = out.amplitudes_mut();
    for (r, row) in j.amplitudes().chunks_exact(m).enumerate() {
        let s = shift(r) % m;
        for (k, &a) in row.iter().enumerate() {
            dst[r * m + (k + s) % m] = a;
        }
    }
    out
}

fn require_equal_sizes(j: &JointState) -> Result<()> {
    if j.rows() != j.cols() {
        return Err(Error::RegisterSizes {
            n: j.rows(),
            m: j.cols(),
        });
    }
    Ok(())
}

/// `|j⟩|k⟩ → |j⟩|j + k mod m⟩`. Index arithmetic, so `n` must equal `m`.
pub fn xor_add(j: &JointState) -> Result<JointState> {
    require_equal_sizes(j)?;
    Ok(shift_rows(j, |r| r))
}

pub fn xor_add_matrix(qgrid: Grid, agrid: AncillaGrid) -> Result<DenseMatrix> {
    let (n, m) = (qgrid.len(), agrid.len());
    if n != m {
        return Err(Error::RegisterSizes { n, m });
    }
    DenseMatrix::permutation(n * m, |c| {
        let (r, k) = (c / m, c % m);
        r * m + (r + k) % m
    })
}

fn check_function_grid(f: &SampledFunction, grid: Grid) -> Result<()> {
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `|j⟩|k⟩ → |j⟩|k + f(x_j) mod m⟩`. Counts one oracle call.
///
/// On `|x⟩ ⊗ kicked ancilla` the output is `(-1)^f(x)` times the input,
/// since shifting the alternating vector by one cell negates it.
pub fn oracle_faithful(
    j: &JointState,
    f: &SampledFunction,
    ctr: &mut OracleCallCounter,
) -> Result<JointState> {
    check_function_grid(f, j.query_grid())?;
    let out = shift_rows(j, |r| f.bit(r) as usize);
    ctr.record();
    debug_check_norm(j.norm_sqr(), out.norm_sqr());
    Ok(out)
}

pub fn oracle_faithful_matrix(f: &SampledFunction, agrid: AncillaGrid) -> Result<DenseMatrix> {
    let m = agrid.len();
    DenseMatrix::permutation(f.len() * m, |c| {
        let (r, k) = (c / m, c % m);
        r * m + agrid.shift(k, f.bit(r) as usize)
    })
}

/// Dense twin of [`oracle_faithful`]. Counts one oracle call.
pub fn oracle_faithful_reference(
    j: &JointState,
    f: &SampledFunction,
    ctr: &mut OracleCallCounter,
) -> Result<JointState> {
    check_function_grid(f, j.query_grid())?;
    let u = oracle_faithful_matrix(f, j.ancilla_grid())?;
    let out = dense_reference_apply(&u, j.amplitudes())?;
    ctr.record();
    JointState::from_amplitudes(j.query_grid(), j.ancilla_grid(), out)
}

/// `ψ[j] → (-1)^f(x_j) ψ[j]`. Counts one oracle call.
pub fn oracle_fast(
    psi: &StateVector,
    f: &SampledFunction,
    ctr: &mut OracleCallCounter,
) -> Result<StateVector> {
    check_function_grid(f, psi.grid())?;
    let amps = psi
        .amplitudes()
        .iter()
        .zip(f.bits())
        .map(|(&a, &b)| if b == 1 { -a } else { a })
        .collect();
    ctr.record();
    StateVector::from_amplitudes(psi.grid(), amps)
}

pub fn phase_oracle_matrix(f: &SampledFunction) -> Result<DenseMatrix> {
    let mut u = DenseMatrix::identity(f.len())?;
    for (r, &b) in f.bits().iter().enumerate() {
        if b == 1 {
            u.data[r * u.dim + r] = Complex64::new(-1.0, 0.0);
        }
    }
    Ok(u)
}

/// Dense twin of [`oracle_fast`]. Counts one oracle call.
pub fn oracle_fast_reference(
    psi: &StateVector,
    f: &SampledFunction,
    ctr: &mut OracleCallCounter,
) -> Result<StateVector> {
    check_function_grid(f, psi.grid())?;
    let out = dense_reference_apply(&phase_oracle_matrix(f)?, psi.amplitudes())?;
    ctr.record();
    StateVector::from_amplitudes(psi.grid(), out)
}
