//! Pure states of the query register, the ancilla register, and the joint
//! query⊗ancilla system.
//!
//! No operation in this crate renormalizes silently. Norm drift is bounded
//! by tests instead, and debug builds assert it after each gate.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{AncillaGrid, Grid};

/// Norm tolerance shared by the gate debug assertions.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// A register discretization that fixes the length of a state vector.
pub trait Register: Copy + PartialEq + std::fmt::Debug {
    fn dim(&self) -> usize;
}

impl Register for Grid {
    fn dim(&self) -> usize {
        self.len()
    }
}

impl Register for AncillaGrid {
    fn dim(&self) -> usize {
        self.len()
    }
}

/// Amplitudes of a single register. Defaults to the query register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<R: Register = Grid> {
    register: R,
    amps: Vec<Complex64>,
}

impl<R: Register> StateVector<R> {
    pub fn from_amplitudes(register: R, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != register.dim() {
            return Err(Error::DimensionMismatch {
                expected: register.dim(),
                actual: amps.len(),
            });
        }
        Ok(StateVector { register, amps })
    }

    pub fn basis(register: R, index: usize) -> Result<Self> {
        let dim = register.dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { register, amps })
    }

    #[inline]
    pub fn register(&self) -> R {
        self.register
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

impl StateVector<Grid> {
    pub fn grid(&self) -> Grid {
        self.register
    }
}

/// `|index⟩` on the query grid.
pub fn basis_state(grid: Grid, index: usize) -> Result<StateVector> {
    StateVector::basis(grid, index)
}

/// The ancilla prepared in its kicked form, `(-1)^k / sqrt(m)`.
///
/// This is the discrete image of the Fourier transform of the `|pi/2⟩`
/// eigenstate. It is built directly because `pi/2` is not an ancilla grid
/// point. A cyclic shift by one cell negates it whenever `m` is even.
pub fn ancilla_kicked_state(ancilla: AncillaGrid) -> StateVector<AncillaGrid> {
    let m = ancilla.len();
    let a = 1.0 / (m as f64).sqrt();
    let amps = (0..m)
        .map(|k| Complex64::new(if k % 2 == 0 { a } else { -a }, 0.0))
        .collect();
    StateVector {
        register: ancilla,
        amps,
    }
}

/// Query⊗ancilla state stored dense and row-major: row = query cell,
/// column = ancilla cell.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    qgrid: Grid,
    agrid: AncillaGrid,
    amps: Vec<Complex64>,
}

impl JointState {
    pub fn from_amplitudes(qgrid: Grid, agrid: AncillaGrid, amps: Vec<Complex64>) -> Result<Self> {
        let expected = qgrid.len() * agrid.len();
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amps.len(),
            });
        }
        Ok(JointState { qgrid, agrid, amps })
    }

    #[inline]
    pub fn query_grid(&self) -> Grid {
        self.qgrid
    }

    #[inline]
    pub fn ancilla_grid(&self) -> AncillaGrid {
        self.agrid
    }

    /// Number of query rows.
    #[inline]
    pub fn rows(&self) -> usize {
        self.qgrid.len()
    }

    /// Number of ancilla columns.
    #[inline]
    pub fn cols(&self) -> usize {
        self.agrid.len()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.amps[j * self.cols() + k]
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let m = self.cols();
        &self.amps[j * m..(j + 1) * m]
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Probability of each query cell with the ancilla traced out.
    pub fn query_marginals(&self) -> Vec<f64> {
        self.amps.chunks_exact(self.cols()).map(norm_sqr).collect()
    }
}

/// Product state `q ⊗ a`.
pub fn tensor(q: &StateVector, a: &StateVector<AncillaGrid>) -> JointState {
    let amps = q
        .amplitudes()
        .iter()
        .flat_map(|&x| a.amplitudes().iter().map(move |&y| x * y))
        .collect();
    JointState {
        qgrid: q.grid(),
        agrid: a.register(),
        amps,
    }
}

/// Anything that exposes a flat amplitude array.
pub trait Amplitudes {
    fn amps(&self) -> &[Complex64];
}

impl<R: Register> Amplitudes for StateVector<R> {
    fn amps(&self) -> &[Complex64] {
        &self.amps
    }
}

impl Amplitudes for JointState {
    fn amps(&self) -> &[Complex64] {
        &self.amps
    }
}

/// `⟨u|v⟩`, conjugating `u`.
pub fn inner<A: Amplitudes + ?Sized>(u: &A, v: &A) -> Result<Complex64> {
    let (u, v) = (u.amps(), v.amps());
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    Ok(u.iter().zip(v).map(|(a, b)| a.conj() * b).sum())
}

/// `|⟨u|v⟩|²`.
pub fn fidelity<A: Amplitudes + ?Sized>(u: &A, v: &A) -> Result<f64> {
    inner(u, v).map(|z| z.norm_sqr())
}

pub(crate) fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Magic bytes of the binary state dump.
pub const DUMP_MAGIC: &[u8; 4] = b"QNAT";
pub const DUMP_VERSION: u16 = 1;
pub const DUMP_HEADER_LEN: usize = 16;

/// A state read back from a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDump {
    pub n: u32,
    /// Ancilla cells; 1 for a single query register.
    pub m: u32,
    pub amps: Vec<Complex64>,
}

/// Writes the 16-byte header followed by little-endian `(re, im)` pairs.
///
/// Header layout: magic `QNAT`, version `u16`, two reserved zero bytes,
/// `n: u32`, `m: u32`.
pub fn write_dump<W: Write>(mut w: W, n: usize, m: usize, amps: &[Complex64]) -> Result<()> {
    if amps.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            actual: amps.len(),
        });
    }
    let mut header = [0u8; DUMP_HEADER_LEN];
    header[0..4].copy_from_slice(DUMP_MAGIC);
    header[4..6].copy_from_slice(&DUMP_VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&(n as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(m as u32).to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(amps.len() * 16);
    for a in amps {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<StateDump> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != DUMP_MAGIC {
        return Err(Error::StateDump("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != DUMP_VERSION {
        return Err(Error::StateDump(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let m = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let count = n as usize * m as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != count * 16 {
        return Err(Error::StateDump(format!(
            "expected {} payload bytes, found {}",
            count * 16,
            body.len()
        )));
    }
    let amps = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok(StateDump { n, m, amps })
}

impl StateVector<Grid> {
    pub fn write_dump<W: Write>(&self, w: W) -> Result<()> {
        write_dump(w, self.len(), 1, &self.amps)
    }
}

impl JointState {
    pub fn write_dump<W: Write>(&self, w: W) -> Result<()> {
        write_dump(w, self.rows(), self.cols(), &self.amps)
    }
}
