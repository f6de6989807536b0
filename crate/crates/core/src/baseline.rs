//! Classical query strategies on sampled promise functions, and the table
//! comparing them with the single quantum oracle call.
//!
//! These are finite-grid proxies: on `n` cells the deterministic worst
//! case is `n/2 + 1` queries, which grows without bound as the grid is
//! refined.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::djcv::{run_sampled, Decision, PipelineParams};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::promise::{random_promise, PromiseClass, PromiseFunction};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTranscript {
    pub queried_indices: Vec<usize>,
    pub observed_bits: Vec<u8>,
    pub decision: Decision,
    pub query_count: usize,
}

impl QueryTranscript {
    fn new(decision: Decision, queried_indices: Vec<usize>, observed_bits: Vec<u8>) -> Self {
        QueryTranscript {
            query_count: queried_indices.len(),
            queried_indices,
            observed_bits,
            decision,
        }
    }
}

/// Queries cells `0, 1, 2, ...`; answers Balanced at the first bit that
/// differs from the first one, Constant after `n/2 + 1` equal bits.
///
/// Always correct when the promise holds. On a promise violation the
/// answer carries no guarantee.
pub fn deterministic_decide(bits: &[u8]) -> Result<QueryTranscript> {
    let n = bits.len();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddCells(n));
    }
    let budget = n / 2 + 1;
    let mut indices = Vec::with_capacity(budget);
    let mut observed = Vec::with_capacity(budget);
    for (j, &b) in bits.iter().enumerate().take(budget) {
        indices.push(j);
        observed.push(b);
        if b != observed[0] {
            return Ok(QueryTranscript::new(Decision::Balanced, indices, observed));
        }
    }
    Ok(QueryTranscript::new(Decision::Constant, indices, observed))
}

/// Samples `k` cells uniformly with replacement; Balanced on any mismatch.
///
/// One-sided: never wrong on a constant function. On a grid-balanced one
/// every sample is an independent fair bit, so the error is `2^(1-k)`.
pub fn randomized_decide(bits: &[u8], k: usize, seed: u64) -> Result<QueryTranscript> {
    if k < 2 {
        return Err(Error::QueryBudget(k));
    }
    if bits.is_empty() {
        return Err(Error::OddCells(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = (0..k).map(|_| rng.gen_range(0..bits.len())).collect();
    let observed: Vec<u8> = indices.iter().map(|&j| bits[j]).collect();
    let decision = if observed.iter().all(|&b| b == observed[0]) {
        Decision::Constant
    } else {
        Decision::Balanced
    };
    Ok(QueryTranscript::new(decision, indices, observed))
}

/// Leading-order error of the randomized strategy on a balanced input.
pub fn randomized_error_bound(k: usize) -> f64 {
    2f64.powi(1 - k as i32)
}

/// Smallest `k >= 2` with `2^(1-k) <= target`.
pub fn randomized_budget_for(target: f64) -> usize {
    let mut k = 2;
    while randomized_error_bound(k) > target {
        k += 1;
    }
    k
}

/// Empirical error of [`randomized_decide`] on a fixed input over
/// `trials` runs seeded `seed + t`.
pub fn randomized_error_rate(
    bits: &[u8],
    truth: Decision,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::QueryBudget(k));
    }
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let tr = randomized_decide(bits, k, seed.wrapping_add(t)).expect("validated inputs");
            (tr.decision != truth) as u64
        })
        .sum();
    Ok(errors as f64 / trials.max(1) as f64)
}

/// Target error used to size the randomized strategy in the report.
pub const RANDOMIZED_TARGET_ERROR: f64 = 1e-3;

/// One row of the separation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub n: usize,
    /// Largest oracle-call count over all quantum runs for this `n`.
    pub quantum_oracle_calls: u64,
    pub quantum_all_correct: bool,
    /// `n/2 + 1`.
    pub deterministic_worst_case: usize,
    /// Largest count actually observed when executing the strategy.
    pub deterministic_observed_max: usize,
    pub deterministic_all_correct: bool,
    pub randomized_k: usize,
    pub randomized_target_error: f64,
    /// Error over `trials` random balanced instances at `randomized_k`.
    pub randomized_empirical_error: f64,
    pub trials: u64,
    pub regime: String,
}

/// For each `n`: run the quantum pipeline on both constant functions and
/// `trials` random balanced ones, execute the deterministic strategy on
/// the same inputs, and estimate the randomized error at the budget that
/// meets [`RANDOMIZED_TARGET_ERROR`]. Instance `t` uses seed `seed + t`.
pub fn separation_report(n_list: &[usize], trials: u64, seed: u64) -> Result<Vec<SeparationRow>> {
    let k = randomized_budget_for(RANDOMIZED_TARGET_ERROR);
    let mut rows: Vec<SeparationRow> = n_list
        .par_iter()
        .map(|&n| separation_row(n, trials, seed, k))
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

fn separation_row(n: usize, trials: u64, seed: u64, k: usize) -> Result<SeparationRow> {
    let grid = Grid::new(n)?;
    let params = PipelineParams::default();
    let mut instances: Vec<(PromiseFunction, Decision, u64)> = vec![
        (PromiseFunction::constant(0), Decision::Constant, seed),
        (PromiseFunction::constant(1), Decision::Constant, seed),
    ];
    for t in 0..trials {
        let s = seed.wrapping_add(t);
        instances.push((
            random_promise(grid, PromiseClass::Balanced, s),
            Decision::Balanced,
            s,
        ));
    }

    struct Outcome {
        calls: u64,
        quantum_ok: bool,
        det_queries: usize,
        det_ok: bool,
        rand_wrong: bool,
        balanced: bool,
    }
    let outcomes: Vec<Outcome> = instances
        .par_iter()
        .map(|(f, truth, s)| -> Result<Outcome> {
            let sampled = f.sample(grid)?;
            let (r, _) = run_sampled(&sampled, f.source(), grid.offset(), 0, &params)?;
            let det = deterministic_decide(sampled.bits())?;
            let rnd = randomized_decide(sampled.bits(), k, *s)?;
            Ok(Outcome {
                calls: r.oracle_calls,
                quantum_ok: r.decision == *truth,
                det_queries: det.query_count,
                det_ok: det.decision == *truth,
                rand_wrong: rnd.decision != *truth,
                balanced: *truth == Decision::Balanced,
            })
        })
        .collect::<Result<_>>()?;

    let balanced_runs = outcomes.iter().filter(|o| o.balanced).count();
    let rand_errors = outcomes
        .iter()
        .filter(|o| o.balanced && o.rand_wrong)
        .count();
    Ok(SeparationRow {
        n,
        quantum_oracle_calls: outcomes.iter().map(|o| o.calls).max().unwrap_or(0),
        quantum_all_correct: outcomes.iter().all(|o| o.quantum_ok),
        deterministic_worst_case: n / 2 + 1,
        deterministic_observed_max: outcomes.iter().map(|o| o.det_queries).max().unwrap_or(0),
        deterministic_all_correct: outcomes.iter().all(|o| o.det_ok),
        randomized_k: k,
        randomized_target_error: RANDOMIZED_TARGET_ERROR,
        randomized_empirical_error: if balanced_runs == 0 {
            0.0
        } else {
            rand_errors as f64 / balanced_runs as f64
        },
        trials,
        regime: "finite-grid proxy".into(),
    })
}
