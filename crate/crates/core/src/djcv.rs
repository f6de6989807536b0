//! The end-to-end continuous-variable Deutsch-Jozsa run.
//!
//! 1. Prepare `|x0⟩` (tensored with the kicked ancilla in faithful mode).
//! 2. Fourier transform the query register.
//! 3. One oracle call.
//! 4. Inverse Fourier transform of the query register.
//! 5. Project onto the measurement window around `x0`.
//!
//! With a constant function the final query state is `±|x0⟩`; with a
//! grid-balanced one the amplitude at `x0` is `(1/n) Σ (-1)^f(x_j) = 0`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{
    fourier, fourier_query, oracle_faithful, oracle_faithful_reference, oracle_fast,
    oracle_fast_reference, Direction, ExecPath, OracleCallCounter, OracleMode,
};
use crate::grid::{AncillaGrid, Grid};
use crate::promise::{
    classify_sampled, parse_fnspec, Classification, PromiseFunction, SampledFunction,
};
use crate::qstate::{ancilla_kicked_state, basis_state, tensor, JointState, StateVector};

/// Cells `center - half_width ..= center + half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementWindow {
    pub center_index: usize,
    pub half_width_cells: usize,
}

impl MeasurementWindow {
    pub fn single(center_index: usize) -> Self {
        MeasurementWindow {
            center_index,
            half_width_cells: 0,
        }
    }

    pub fn new(center_index: usize, half_width_cells: usize) -> Self {
        MeasurementWindow {
            center_index,
            half_width_cells,
        }
    }

    /// Index range of the window, checked against `n` cells.
    pub fn cells(&self, n: usize) -> Result<std::ops::RangeInclusive<usize>> {
        let lo = self.center_index as i64 - self.half_width_cells as i64;
        let hi = self.center_index as i64 + self.half_width_cells as i64;
        if lo < 0 || hi >= n as i64 {
            return Err(Error::InvalidWindow { lo, hi, n });
        }
        Ok(lo as usize..=hi as usize)
    }

    pub fn width(&self) -> usize {
        2 * self.half_width_cells + 1
    }
}

/// Probability mass of `ψ` inside the window, `⟨ψ|P|ψ⟩`.
pub fn projection_probability(psi: &StateVector, w: &MeasurementWindow) -> Result<f64> {
    let cells = w.cells(psi.len())?;
    Ok(psi.amplitudes()[cells].iter().map(|a| a.norm_sqr()).sum())
}

/// `P ψ`: amplitudes outside the window zeroed.
pub fn project(psi: &StateVector, w: &MeasurementWindow) -> Result<StateVector> {
    let cells = w.cells(psi.len())?;
    let amps = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            if cells.contains(&j) {
                a
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    StateVector::from_amplitudes(psi.grid(), amps)
}

/// Window probability of a joint state with the ancilla traced out.
pub fn projection_probability_joint(j: &JointState, w: &MeasurementWindow) -> Result<f64> {
    let cells = w.cells(j.rows())?;
    Ok(cells
        .map(|r| j.row(r).iter().map(|a| a.norm_sqr()).sum::<f64>())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Constant,
    Balanced,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::Constant => "Constant",
            Decision::Balanced => "Balanced",
        })
    }
}

impl Classification {
    /// Decision the algorithm should reach; `None` when the promise fails.
    pub fn expected_decision(self) -> Option<Decision> {
        match self {
            Classification::Constant0 | Classification::Constant1 => Some(Decision::Constant),
            Classification::GridBalanced => Some(Decision::Balanced),
            Classification::Neither => None,
        }
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Pipeline settings shared by single runs and sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub mode: OracleMode,
    pub path: ExecPath,
    pub ancilla: AncillaGrid,
    pub theta: f64,
    pub seed: Option<u64>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            mode: OracleMode::Fast,
            path: ExecPath::Fast,
            ancilla: AncillaGrid::default(),
            theta: DEFAULT_THRESHOLD,
            seed: None,
        }
    }
}

/// One run's outcome and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub decision: Decision,
    pub p_success: f64,
    pub oracle_calls: u64,
    pub truth: Classification,
    /// False when the promise is violated, since no answer is correct then.
    pub correct: bool,
    pub mode: OracleMode,
    pub reference: bool,
    pub n: usize,
    pub m: usize,
    pub x0_index: usize,
    pub x0: f64,
    pub window: MeasurementWindow,
    pub theta: f64,
    pub seed: Option<u64>,
    pub function: String,
    pub wall_time_us: u64,
}

/// Final query state of a run, kept for `--dump-state`.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    Query(StateVector),
    Joint(JointState),
}

impl FinalState {
    pub fn write_dump<W: std::io::Write>(&self, w: W) -> Result<()> {
        match self {
            FinalState::Query(s) => s.write_dump(w),
            FinalState::Joint(j) => j.write_dump(w),
        }
    }
}

/// Runs steps 1-4 and returns the final state and the oracle count.
pub fn evolve(
    f: &SampledFunction,
    x0_index: usize,
    params: &PipelineParams,
) -> Result<(FinalState, OracleCallCounter)> {
    let grid = f.grid();
    let path = params.path;
    let mut ctr = OracleCallCounter::new();
    let start = basis_state(grid, x0_index)?;
    let state = match params.mode {
        OracleMode::Fast => {
            let psi = fourier(&start, Direction::Forward, path)?;
            let psi = match path {
                ExecPath::Fast => oracle_fast(&psi, f, &mut ctr)?,
                ExecPath::Reference => oracle_fast_reference(&psi, f, &mut ctr)?,
            };
            FinalState::Query(fourier(&psi, Direction::Inverse, path)?)
        }
        OracleMode::Faithful => {
            let joint = tensor(&start, &ancilla_kicked_state(params.ancilla));
            let joint = fourier_query(&joint, Direction::Forward, path)?;
            let joint = match path {
                ExecPath::Fast => oracle_faithful(&joint, f, &mut ctr)?,
                ExecPath::Reference => oracle_faithful_reference(&joint, f, &mut ctr)?,
            };
            FinalState::Joint(fourier_query(&joint, Direction::Inverse, path)?)
        }
    };
    Ok((state, ctr))
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(theta))
    }
}

/// Runs the pipeline on an already sampled function.
pub fn run_sampled(
    f: &SampledFunction,
    source: &str,
    x0_index: usize,
    window_half_cells: usize,
    params: &PipelineParams,
) -> Result<(ExperimentResult, FinalState)> {
    check_theta(params.theta)?;
    let grid = f.grid();
    grid.check_index(x0_index)?;
    let window = MeasurementWindow::new(x0_index, window_half_cells);
    window.cells(grid.len())?;

    let t0 = Instant::now();
    let (state, ctr) = evolve(f, x0_index, params)?;
    let p = match &state {
        FinalState::Query(s) => projection_probability(s, &window)?,
        FinalState::Joint(j) => projection_probability_joint(j, &window)?,
    };
    let wall_time_us = t0.elapsed().as_micros() as u64;

    let decision = if p >= params.theta {
        Decision::Constant
    } else {
        Decision::Balanced
    };
    let truth = classify_sampled(f);
    let result = ExperimentResult {
        decision,
        p_success: p,
        oracle_calls: ctr.calls(),
        truth,
        correct: truth.expected_decision() == Some(decision),
        mode: params.mode,
        reference: params.path == ExecPath::Reference,
        n: grid.len(),
        m: params.ancilla.len(),
        x0_index,
        x0: grid.coordinate(x0_index),
        window,
        theta: params.theta,
        seed: params.seed,
        function: source.to_string(),
        wall_time_us,
    };
    Ok((result, state))
}

/// Full run: bind `f` to `grid`, then execute the pipeline.
pub fn run_djcv(
    grid: Grid,
    x0_index: usize,
    f: &PromiseFunction,
    window: MeasurementWindow,
    params: &PipelineParams,
) -> Result<ExperimentResult> {
    if window.center_index != x0_index {
        return Err(Error::InvalidWindow {
            lo: window.center_index as i64,
            hi: window.center_index as i64,
            n: grid.len(),
        });
    }
    let sampled = f.sample(grid)?;
    run_sampled(
        &sampled,
        f.source(),
        x0_index,
        window.half_width_cells,
        params,
    )
    .map(|(r, _)| r)
}

/// Query position for runs over several grids.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0 {
    #[default]
    Center,
    Coordinate(f64),
}

impl X0 {
    pub fn resolve(&self, grid: Grid) -> Result<usize> {
        match self {
            X0::Center => Ok(grid.offset()),
            X0::Coordinate(x) => grid.index_of(*x),
        }
    }
}

/// One sweep entry; failures are kept in place of a result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepEntry {
    Ok(ExperimentResult),
    Failed { n: usize, error: String },
}

impl SweepEntry {
    pub fn n(&self) -> usize {
        match self {
            SweepEntry::Ok(r) => r.n,
            SweepEntry::Failed { n, .. } => *n,
        }
    }

    pub fn result(&self) -> Option<&ExperimentResult> {
        match self {
            SweepEntry::Ok(r) => Some(r),
            SweepEntry::Failed { .. } => None,
        }
    }
}

/// Re-samples the same analytic function on each grid size in `ns` and
/// runs the pipeline. Runs execute in parallel; output is sorted by `n`.
pub fn sweep_resolution(
    f_spec: &str,
    ns: &[usize],
    x0: X0,
    window_half_cells: usize,
    params: &PipelineParams,
) -> std::result::Result<Vec<SweepEntry>, crate::error::DslError> {
    let f = parse_fnspec(f_spec)?;
    let mut entries: Vec<SweepEntry> = ns
        .par_iter()
        .map(|&n| {
            let run = || -> Result<ExperimentResult> {
                let grid = Grid::new(n)?;
                let x0_index = x0.resolve(grid)?;
                run_djcv(
                    grid,
                    x0_index,
                    &f,
                    MeasurementWindow::new(x0_index, window_half_cells),
                    params,
                )
            };
            match run() {
                Ok(r) => SweepEntry::Ok(r),
                Err(e) => SweepEntry::Failed {
                    n,
                    error: e.to_string(),
                },
            }
        })
        .collect();
    entries.sort_by_key(|e| e.n());
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{dense_reference_apply, fourier_matrix, phase_oracle_matrix};
    use crate::promise::{balanced_patterns, random_promise, PromiseClass};
    use num_complex::Complex64;

    const STEP: &str = "piecewise{[-inf,0)->0, [0,inf)->1}";

    fn params(mode: OracleMode, path: ExecPath) -> PipelineParams {
        PipelineParams {
            mode,
            path,
            ..Default::default()
        }
    }

    fn run(f: &PromiseFunction, n: usize, p: &PipelineParams) -> ExperimentResult {
        let g = Grid::new(n).unwrap();
        run_djcv(g, g.offset(), f, MeasurementWindow::single(g.offset()), p).unwrap()
    }

    #[test]
    fn constant_run() {
        let f = parse_fnspec("constant(1)").unwrap();
        for mode in [OracleMode::Fast, OracleMode::Faithful] {
            let r = run(&f, 64, &params(mode, ExecPath::Fast));
            assert_eq!(r.decision, Decision::Constant);
            assert!((r.p_success - 1.0).abs() <= 1e-9);
            assert_eq!(r.oracle_calls, 1);
            assert!(r.correct);
            assert_eq!(r.truth, Classification::Constant1);
        }
    }

    #[test]
    fn balanced_run() {
        let f = parse_fnspec(STEP).unwrap();
        for mode in [OracleMode::Fast, OracleMode::Faithful] {
            let r = run(&f, 64, &params(mode, ExecPath::Fast));
            assert_eq!(r.decision, Decision::Balanced);
            assert!(r.p_success.abs() <= 1e-9);
            assert_eq!(r.oracle_calls, 1);
            assert!(r.correct);
        }
    }

    #[test]
    fn exhaustive_n4_reference() {
        let g = Grid::new(4).unwrap();
        for bits in balanced_patterns(4) {
            let f = SampledFunction::from_bits(g, bits).unwrap();
            for mode in [OracleMode::Fast, OracleMode::Faithful] {
                for x0 in 0..4 {
                    let (r, _) =
                        run_sampled(&f, "", x0, 0, &params(mode, ExecPath::Reference)).unwrap();
                    assert!(r.p_success.abs() <= 1e-12, "{:?}", f.bits());
                    assert_eq!(r.decision, Decision::Balanced);
                }
            }
        }
    }

    #[test]
    fn promise_violation_gives_quarter() {
        // |Σ(-1)^f|² / n² = (2/4)² for a 3/1 split at n = 4
        let g = Grid::new(4).unwrap();
        for bits in [[0, 0, 0, 1], [1, 0, 0, 0], [1, 1, 0, 1]] {
            let f = SampledFunction::from_bits(g, bits.to_vec()).unwrap();
            for x0 in 0..4 {
                for mode in [OracleMode::Fast, OracleMode::Faithful] {
                    let (r, _) = run_sampled(&f, "", x0, 0, &params(mode, ExecPath::Fast)).unwrap();
                    assert!((r.p_success - 0.25).abs() <= 1e-9);
                    assert_eq!(r.truth, Classification::Neither);
                    assert!(!r.correct);
                }
            }
        }
    }

    #[test]
    fn dichotomy_every_x0() {
        let g = Grid::new(16).unwrap();
        for seed in 0..20 {
            let class = if seed % 2 == 0 {
                PromiseClass::Constant
            } else {
                PromiseClass::Balanced
            };
            let f = random_promise(g, class, seed).sample(g).unwrap();
            for x0 in 0..16 {
                let (r, _) = run_sampled(&f, "", x0, 0, &PipelineParams::default()).unwrap();
                assert!(r.correct);
                let target = if class == PromiseClass::Constant {
                    1.0
                } else {
                    0.0
                };
                assert!((r.p_success - target).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let g = Grid::new(16).unwrap();
        let e = basis_state(g, 5).unwrap();
        for hw in 0..5 {
            assert_eq!(
                projection_probability(&e, &MeasurementWindow::new(5, hw)).unwrap(),
                1.0
            );
        }
        assert_eq!(
            projection_probability(&e, &MeasurementWindow::new(9, 2)).unwrap(),
            0.0
        );
        let uniform = fourier(&e, Direction::Forward, ExecPath::Fast).unwrap();
        for k in 0..4 {
            let p = projection_probability(&uniform, &MeasurementWindow::new(8, k)).unwrap();
            assert!((p - (2 * k + 1) as f64 / 16.0).abs() < 1e-12);
        }
        // idempotence
        let w = MeasurementWindow::new(8, 3);
        let once = project(&uniform, &w).unwrap();
        let twice = project(&once, &w).unwrap();
        assert_eq!(once, twice);
        assert!((once.norm_sqr() - projection_probability(&uniform, &w).unwrap()).abs() < 1e-15);
        assert!(matches!(
            projection_probability(&e, &MeasurementWindow::new(1, 2)),
            Err(Error::InvalidWindow { lo: -1, .. })
        ));
        assert!(projection_probability(&e, &MeasurementWindow::new(15, 1)).is_err());
    }

    #[test]
    fn invalid_inputs() {
        let g = Grid::new(8).unwrap();
        let f = PromiseFunction::constant(0);
        assert!(matches!(
            run_djcv(
                g,
                8,
                &f,
                MeasurementWindow::single(8),
                &PipelineParams::default()
            ),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            run_djcv(
                g,
                0,
                &f,
                MeasurementWindow::new(0, 1),
                &PipelineParams::default()
            ),
            Err(Error::InvalidWindow { .. })
        ));
        let bad_theta = PipelineParams {
            theta: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            run_djcv(g, 4, &f, MeasurementWindow::single(4), &bad_theta),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn sweep_examples() {
        let ns = [4, 16, 64, 256];
        let entries = sweep_resolution(
            "constant(0)",
            &ns,
            X0::Center,
            0,
            &PipelineParams::default(),
        )
        .unwrap();
        assert_eq!(entries.len(), 4);
        for e in &entries {
            assert!((e.result().unwrap().p_success - 1.0).abs() <= 1e-9);
        }
        for path in [ExecPath::Fast, ExecPath::Reference] {
            let entries =
                sweep_resolution(STEP, &ns, X0::Center, 0, &params(OracleMode::Fast, path))
                    .unwrap();
            let got: Vec<usize> = entries.iter().map(|e| e.n()).collect();
            assert_eq!(got, ns);
            for e in &entries {
                let r = e.result().unwrap();
                assert!(r.p_success.abs() <= 1e-9);
                assert_eq!(r.truth, Classification::GridBalanced);
            }
        }
        let entries = sweep_resolution(
            "constant(1)",
            &[8, 7, 4],
            X0::Center,
            0,
            &PipelineParams::default(),
        )
        .unwrap();
        assert!(matches!(entries[1], SweepEntry::Failed { n: 7, .. }));
        assert!(entries[0].result().is_some() && entries[2].result().is_some());
        assert!(
            sweep_resolution("bogus", &[4], X0::Center, 0, &PipelineParams::default()).is_err()
        );
    }

    #[test]
    fn wide_window_matches_brute_force() {
        for n in [16, 64, 256] {
            let g = Grid::new(n).unwrap();
            let f = random_promise(g, PromiseClass::Balanced, n as u64)
                .sample(g)
                .unwrap();
            let x0 = g.offset();
            let hw = n / 4;
            let fwd = fourier_matrix(g, Direction::Forward).unwrap();
            let inv = fourier_matrix(g, Direction::Inverse).unwrap();
            let mut psi = vec![Complex64::new(0.0, 0.0); n];
            psi[x0] = Complex64::new(1.0, 0.0);
            let psi = dense_reference_apply(&fwd, &psi).unwrap();
            let psi = dense_reference_apply(&phase_oracle_matrix(&f).unwrap(), &psi).unwrap();
            let psi = dense_reference_apply(&inv, &psi).unwrap();
            let want: f64 = psi[x0 - hw..=x0 + hw].iter().map(|a| a.norm_sqr()).sum();
            for mode in [OracleMode::Fast, OracleMode::Faithful] {
                let (r, _) = run_sampled(&f, "", x0, hw, &params(mode, ExecPath::Fast)).unwrap();
                assert!((r.p_success - want).abs() < 1e-10);
                assert!((0.0..=1.0 + 1e-12).contains(&r.p_success));
            }
        }
    }
}
