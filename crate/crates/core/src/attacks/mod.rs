//! Eve's strategies: random-basis interception with known tag bits, LCG
//! state recovery, their composition over an observed session, and the
//! angle-optimal single-qubit measurement.

mod lcg;
mod pipeline;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::error::{Error, Result};
use crate::quantum::{breidbart_measurement, effect_probability, encode_qubit, measure_in_bases, binary_entropy, PureState};
use crate::seed::trial_rng;
pub use lcg::{
    degraded_lcg_recover, lcg_delta, lcg_recover, random_prime_lcg, Confidence, DegradedRecovery, RecoveredLcgSeed, DEFAULT_DELTAS,
};
pub use pipeline::{corollary1_pipeline, recovered_outputs, Corollary1Report, PipelineInput, RecoveryStage};

/// One intercepted qubit.
///
/// A mismatch between the outcome and the known tag bit proves the qubit
/// was encoded in the other basis: measuring in the computational basis
/// then reveals `X = 1`, measuring in the diagonal basis reveals `X = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterceptRecord {
    pub position: usize,
    pub basis_chosen: u8,
    pub outcome: u8,
    pub reference: u8,
    pub conclusive: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inferred_x: Option<u8>,
}

impl InterceptRecord {
    pub fn new(position: usize, basis_chosen: u8, outcome: u8, reference: u8) -> Self {
        let conclusive = outcome != reference;
        InterceptRecord {
            position,
            basis_chosen,
            outcome,
            reference,
            conclusive,
            inferred_x: conclusive.then_some(1 - basis_chosen),
        }
    }
}

/// Measures each qubit in a uniformly random basis and compares the outcome
/// with the known tag bit.
pub fn random_basis_intercept<R: Rng + ?Sized>(
    qubits: &[PureState],
    y_bits: &BitBlock,
    rng: &mut R,
) -> Result<Vec<InterceptRecord>> {
    if qubits.len() != y_bits.len() {
        return Err(Error::LengthMismatch {
            expected: qubits.len(),
            actual: y_bits.len(),
        });
    }
    qubits
        .iter()
        .zip(y_bits.iter())
        .enumerate()
        .map(|(i, (q, y))| {
            let basis = rng.random::<bool>() as u8;
            let m = measure_in_bases(q, &BitBlock::from_u64(basis as u64, 1), rng)?;
            Ok(InterceptRecord::new(i, basis, m.outcomes.get(0).expect("one qubit"), y))
        })
        .collect()
}

/// One row of the single-qubit interception table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptCase {
    pub x: u8,
    pub t: u8,
    pub basis: u8,
    pub outcome: u8,
    pub probability: f64,
    pub record: InterceptRecord,
}

/// All 16 `(x, t, basis, outcome)` combinations with their Born
/// probabilities.
pub fn intercept_table() -> Vec<InterceptCase> {
    let mut rows = Vec::with_capacity(16);
    for x in 0..2u8 {
        for t in 0..2u8 {
            let state = encode_qubit(x, t);
            for basis in 0..2u8 {
                for outcome in 0..2u8 {
                    let projector = encode_qubit(basis, outcome);
                    rows.push(InterceptCase {
                        x,
                        t,
                        basis,
                        outcome,
                        probability: state.overlap(&projector),
                        record: InterceptRecord::new(0, basis, outcome, t),
                    });
                }
            }
        }
    }
    rows
}

/// `exp(−2p)`, the bound displayed for fewer than `p` conclusive results
/// among `8p` intercepted qubits.
pub fn hoeffding_failure_bound(p: u32) -> f64 {
    (-2.0 * p as f64).exp()
}

/// `exp(−2(2p − p)²/(8p)) = exp(−p/4)`, the textbook Hoeffding tail for the
/// same event.
pub fn standard_hoeffding_bound(p: u32) -> f64 {
    (-(p as f64) / 4.0).exp()
}

/// `P[Bin(8p, 1/4) < p]`, summed in log space.
pub fn exact_intercept_failure(p: u32) -> f64 {
    let n = 8 * p as u64;
    let (lq, lr) = (0.25f64.ln(), 0.75f64.ln());
    let mut log_binom = 0.0;
    let mut total = 0.0;
    for i in 0..p as u64 {
        if i > 0 {
            log_binom += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        total += (log_binom + i as f64 * lq + (n - i) as f64 * lr).exp();
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingRow {
    pub p: u32,
    pub qubits: u64,
    pub exact: f64,
    pub displayed_bound: f64,
    pub displayed_bound_holds: bool,
    pub standard_bound: f64,
    pub standard_bound_holds: bool,
}

pub fn hoeffding_row(p: u32) -> HoeffdingRow {
    let exact = exact_intercept_failure(p);
    let displayed_bound = hoeffding_failure_bound(p);
    let standard_bound = standard_hoeffding_bound(p);
    HoeffdingRow {
        p,
        qubits: 8 * p as u64,
        exact,
        displayed_bound,
        displayed_bound_holds: exact <= displayed_bound,
        standard_bound,
        standard_bound_holds: exact <= standard_bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterceptExperiment {
    pub p: u32,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub conclusive_fraction: f64,
    pub exact: f64,
}

/// Simulates `trials` rounds of `8p` fairly encoded qubits intercepted in
/// random bases and counts rounds with fewer than `p` conclusive records.
pub fn intercept_success_experiment(p: u32, trials: u64, master_seed: u64) -> Result<InterceptExperiment> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let n = 8 * p as usize;
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(master_seed, "attacks/intercept", trial);
            let x: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
            let t = BitBlock::from_bools((0..n).map(|_| rng.random::<bool>()));
            let qubits: Vec<PureState> = x.iter().zip(t.iter()).map(|(&x, t)| encode_qubit(x, t)).collect();
            random_basis_intercept(&qubits, &t, &mut rng).map(|r| r.iter().filter(|r| r.conclusive).count())
        })
        .collect::<Result<_>>()?;
    let failures = counts.iter().filter(|&&c| c < p as usize).count() as u64;
    let conclusive: usize = counts.iter().sum();
    Ok(InterceptExperiment {
        p,
        trials,
        failures,
        failure_rate: failures as f64 / trials.max(1) as f64,
        conclusive_fraction: conclusive as f64 / (trials.max(1) as f64 * n as f64),
        exact: exact_intercept_failure(p),
    })
}

/// Key-bit guesses from measuring every qubit at angle `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGuess {
    pub guesses: BitBlock,
    /// Per-bit probability that a guess is right when key and tag bits are fair.
    pub expected_accuracy: f64,
}

impl MeasurementGuess {
    pub fn accuracy_against(&self, truth: &BitBlock) -> Result<f64> {
        let wrong = self.guesses.xor(truth)?.count_ones();
        Ok(1.0 - wrong as f64 / truth.len().max(1) as f64)
    }
}

/// Measures each qubit with the projectors at angle `theta` and guesses the
/// encoding basis as `outcome ⊕ y`. At `θ = −π/8` each guess is right with
/// probability `cos²(π/8)` whatever the tag bit.
pub fn breidbart_attack<R: Rng + ?Sized>(
    qubits: &[PureState],
    y_bits: &BitBlock,
    theta: f64,
    rng: &mut R,
) -> Result<MeasurementGuess> {
    if qubits.len() != y_bits.len() {
        return Err(Error::LengthMismatch {
            expected: qubits.len(),
            actual: y_bits.len(),
        });
    }
    let povm = breidbart_measurement(theta);
    let mut guesses = BitBlock::default();
    for (q, y) in qubits.iter().zip(y_bits.iter()) {
        if q.qubits() != 1 {
            return Err(Error::InvalidArgument("expected single-qubit states".into()));
        }
        let p0 = effect_probability(&povm.effects()[0], q);
        let outcome = u8::from(rng.random::<f64>() >= p0);
        guesses.push((outcome ^ y) == 1);
    }
    Ok(MeasurementGuess {
        guesses,
        expected_accuracy: angle_accuracy(theta),
    })
}

/// Mean probability, over fair key and tag bits, that `outcome ⊕ y` equals
/// the key bit when measuring at angle `theta`.
pub fn angle_accuracy(theta: f64) -> f64 {
    let povm = breidbart_measurement(theta);
    let mut total = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            let state = encode_qubit(x, y);
            // Outcome o is right when o = x ⊕ y.
            total += effect_probability(&povm.effects()[(x ^ y) as usize], &state);
        }
    }
    total / 4.0
}

/// `1 − H₂(cos²(π/8))`: what the optimal single-qubit guess reveals per key bit.
pub fn breidbart_channel_information() -> f64 {
    1.0 - binary_entropy((PI / 8.0).cos().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::BREIDBART_ANGLE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_inference_is_sound() {
        let table = intercept_table();
        assert_eq!(table.len(), 16);
        for row in &table {
            let r = row.record;
            assert_eq!(r.conclusive, r.outcome != r.reference);
            assert_eq!(r.inferred_x.is_some(), r.conclusive);
            if row.probability > 1e-12 && r.conclusive {
                assert_eq!(r.inferred_x, Some(row.x), "{row:?}");
            }
        }
        // Matched bases never produce a mismatch.
        assert!(table
            .iter()
            .filter(|r| r.basis == r.x && r.outcome != r.t)
            .all(|r| r.probability < 1e-12));
        let conclusive: f64 = table.iter().filter(|r| r.record.conclusive).map(|r| r.probability).sum();
        // 8 equally likely (x, t, basis) triples.
        assert!((conclusive / 8.0 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn matched_bases_give_no_conclusive_records() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Every qubit encoded in both bases would be impossible; instead
        // check that whenever Eve's basis matched, the record is inconclusive.
        let qubits: Vec<PureState> = (0..2000).map(|i| encode_qubit((i % 2) as u8, ((i / 2) % 2) as u8)).collect();
        let y = BitBlock::from_bools((0..2000).map(|i| (i / 2) % 2 == 1));
        let records = random_basis_intercept(&qubits, &y, &mut rng).unwrap();
        for (i, r) in records.iter().enumerate() {
            if r.basis_chosen == (i % 2) as u8 {
                assert!(!r.conclusive);
            }
            if let Some(x) = r.inferred_x {
                assert_eq!(x, (i % 2) as u8);
            }
        }
    }

    #[test]
    fn hoeffding_values() {
        assert!((hoeffding_failure_bound(1) - (-2f64).exp()).abs() < 1e-15);
        let exact2 = 0.75f64.powi(16) + 16.0 * 0.25 * 0.75f64.powi(15);
        assert!((exact_intercept_failure(2) - exact2).abs() < 1e-15);
        assert!((exact_intercept_failure(2) - 0.063476).abs() < 1e-6);
        let row = hoeffding_row(2);
        assert!(!row.displayed_bound_holds && row.standard_bound_holds);
        assert!((exact_intercept_failure(16) - 1.5079e-4).abs() < 1e-7);
        for p in [1, 2, 4, 8, 16] {
            assert!(hoeffding_row(p).standard_bound_holds);
        }
    }

    #[test]
    fn experiment_tracks_exact_rate() {
        let e = intercept_success_experiment(2, 20_000, 3).unwrap();
        let sd = (e.exact * (1.0 - e.exact) / 20_000.0).sqrt();
        assert!((e.failure_rate - e.exact).abs() < 4.0 * sd, "{e:?}");
        assert!((e.conclusive_fraction - 0.25).abs() < 0.01);
        let again = intercept_success_experiment(2, 20_000, 3).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn breidbart_accuracy() {
        assert!((angle_accuracy(BREIDBART_ANGLE) - (PI / 8.0).cos().powi(2)).abs() < 1e-12);
        assert!((breidbart_channel_information() - 0.39912396330714384).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let x = BitBlock::from_bools((0..n).map(|_| rng.random::<bool>()));
        let y = BitBlock::from_bools((0..n).map(|_| rng.random::<bool>()));
        let qubits: Vec<PureState> = x.iter().zip(y.iter()).map(|(a, b)| encode_qubit(a, b)).collect();
        let g = breidbart_attack(&qubits, &y, BREIDBART_ANGLE, &mut rng).unwrap();
        let acc = g.accuracy_against(&x).unwrap();
        assert!((acc - 0.853553).abs() < 0.004, "{acc}");
        // Computational-basis inputs and a computational measurement.
        let zeros = BitBlock::zeros(1000);
        let qubits: Vec<PureState> = y.slice(0..1000).iter().map(|b| encode_qubit(0, b)).collect();
        let g = breidbart_attack(&qubits, &y.slice(0..1000), 0.0, &mut rng).unwrap();
        assert_eq!(g.accuracy_against(&zeros).unwrap(), 1.0);
    }
}
