//! Passive interception of a fixed-hash session followed by LCG recovery.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lcg::{degraded_lcg_recover, lcg_recover, DegradedRecovery, RecoveredLcgSeed, DEFAULT_DELTAS};
use super::random_basis_intercept;
use crate::bitsource::{GeneratorFamily, GeneratorSpec};
use crate::error::{Error, Result};
use crate::hashing::{hash_eval, HashFunction};
use crate::protocol::{Carrier, SchemeConfig, SchemeVariant, Transcript};

/// What Eve has to work with beyond the transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInput<'a> {
    pub config: &'a SchemeConfig,
    pub transcript: &'a Transcript,
    /// The pre-shared hash, assumed public.
    pub public_hash: Option<&'a HashFunction>,
    /// Bits per LCG output; defaults to the configured generator's width.
    pub output_width: Option<usize>,
    /// Seeds to brute-force when no run of complete outputs is long enough.
    pub seed_space: Option<GeneratorFamily>,
    /// Debug side channel: read the true basis bits instead of measuring.
    pub side_channel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum RecoveryStage {
    /// Direct recovery from a run of complete outputs starting at output
    /// index `first_output` (0-based, so the recovered `s0` precedes it).
    Lcg {
        first_output: u64,
        run_length: usize,
        seed: RecoveredLcgSeed,
    },
    Degraded(DegradedRecovery),
    Insufficient {
        complete_outputs: usize,
        longest_run: usize,
        needed_run: usize,
    },
    NotApplicable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary1Report {
    pub qubits_seen: usize,
    pub conclusive_count: usize,
    /// `(stream position, bit)`, sorted by position.
    pub recovered_bits: Vec<(u64, u8)>,
    pub recovery: RecoveryStage,
}

/// Groups known stream bits into complete `width`-bit outputs, keyed by
/// 0-based output index.
pub fn recovered_outputs(bits: &[(u64, u8)], width: usize) -> BTreeMap<u64, u64> {
    let mut partial: BTreeMap<u64, (u32, u64)> = BTreeMap::new();
    for &(pos, bit) in bits {
        let index = pos / width as u64;
        let shift = width as u64 - 1 - pos % width as u64;
        let entry = partial.entry(index).or_default();
        entry.0 += 1;
        entry.1 |= (bit as u64) << shift;
    }
    partial
        .into_iter()
        .filter(|(_, (n, _))| *n as usize == width)
        .map(|(i, (_, v))| (i, v))
        .collect()
}

fn longest_run(outputs: &BTreeMap<u64, u64>) -> (u64, Vec<u64>) {
    let mut best: (u64, Vec<u64>) = (0, Vec::new());
    let mut current: (u64, Vec<u64>) = (0, Vec::new());
    let mut prev: Option<u64> = None;
    for (&i, &v) in outputs {
        if prev.map(|p| p + 1) != Some(i) {
            current = (i, Vec::new());
        }
        current.1.push(v);
        if current.1.len() > best.1.len() {
            best = current.clone();
        }
        prev = Some(i);
    }
    best
}

/// Intercepts every tag qubit of a fixed-hash session in random bases, using
/// `h(Y)` of the public message as reference, maps conclusive inferences to
/// key-stream positions and runs the LCG recovery on what was learned.
pub fn corollary1_pipeline<R: Rng + ?Sized>(input: PipelineInput<'_>, rng: &mut R) -> Result<Corollary1Report> {
    let config = input.config;
    if config.variant != SchemeVariant::QuantumFixedHash {
        return Err(Error::InvalidArgument(format!(
            "reference bits unavailable: the {:?} variant keeps the hash secret or sends no qubits",
            config.variant
        )));
    }
    let Some(hash) = input.public_hash else {
        return Err(Error::InvalidArgument("reference bits unavailable: no public hash".into()));
    };
    let k = config.shape.k;
    let true_stream = if input.side_channel {
        Some(config.generator.stream(input.transcript.key_bits_consumed as usize)?)
    } else {
        None
    };
    let mut qubits_seen = 0;
    let mut conclusive_count = 0;
    let mut known: BTreeMap<u64, u8> = BTreeMap::new();
    for round in &input.transcript.rounds {
        let sent = round
            .sent
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("transcript lacks the transmitted carriers".into()))?;
        let Carrier::Quantum(qubits) = &sent.carrier else {
            return Err(Error::CarrierMismatch("classical carrier in a quantum session".into()));
        };
        qubits_seen += qubits.len();
        if let Some(stream) = &true_stream {
            for i in 0..k {
                let pos = sent.tag_key_position(k, i);
                known.insert(pos, stream.get(pos as usize).expect("stream covers the session"));
            }
            continue;
        }
        let reference = hash_eval(hash, &sent.message)?;
        for r in random_basis_intercept(qubits, &reference, rng)? {
            if let Some(x) = r.inferred_x {
                conclusive_count += 1;
                known.insert(sent.tag_key_position(k, r.position), x);
            }
        }
    }
    if input.side_channel {
        conclusive_count = known.len();
    }
    let recovered_bits: Vec<(u64, u8)> = known.into_iter().collect();

    let width = match (input.output_width, config.generator) {
        (Some(w), _) => Some(w),
        (None, GeneratorSpec::Lcg(p)) => Some(p.width()),
        (None, GeneratorSpec::Fair { .. }) => None,
    };
    let recovery = match width {
        None => RecoveryStage::NotApplicable {
            reason: "the key stream is not an LCG".into(),
        },
        Some(w) => {
            let outputs = recovered_outputs(&recovered_bits, w);
            let (first, run) = longest_run(&outputs);
            let needed = DEFAULT_DELTAS + 3;
            if run.len() >= needed {
                RecoveryStage::Lcg {
                    first_output: first,
                    run_length: run.len(),
                    seed: lcg_recover(&run)?,
                }
            } else if let Some(space) = &input.seed_space {
                RecoveryStage::Degraded(degraded_lcg_recover(&recovered_bits, space)?)
            } else {
                RecoveryStage::Insufficient {
                    complete_outputs: outputs.len(),
                    longest_run: run.len(),
                    needed_run: needed,
                }
            }
        }
    };
    Ok(Corollary1Report {
        qubits_seen,
        conclusive_count,
        recovered_bits,
        recovery,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitBlock;
    use crate::bitsource::LcgParams;
    use crate::hashing::HashFamilyShape;
    use crate::protocol::{run_session, EveStrategy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn session(variant: SchemeVariant, rounds: usize) -> (SchemeConfig, Transcript) {
        let shape = HashFamilyShape::new(4, 4).unwrap();
        let config = SchemeConfig {
            variant,
            shape,
            generator: GeneratorSpec::Lcg(LcgParams::new(251, 33, 17, 5).unwrap()),
            fixed_hash_key: variant.uses_fixed_hash().then(|| "01101001011".parse().unwrap()),
        };
        let msgs: Vec<BitBlock> = (0..rounds as u64).map(|i| BitBlock::from_u64(i * 7 % 16, 4)).collect();
        let t = run_session(&config, &msgs, EveStrategy::None, 1, None).unwrap();
        (config, t)
    }

    #[test]
    fn recovered_bits_match_the_stream() {
        let (config, t) = session(SchemeVariant::QuantumFixedHash, 32);
        let h = config.fixed_hash().unwrap().unwrap();
        let truth = config.generator.stream(t.key_bits_consumed as usize).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let input = PipelineInput {
            config: &config,
            transcript: &t,
            public_hash: Some(&h),
            output_width: None,
            seed_space: Some(GeneratorFamily::lcg_state_only(251, 33, 17)),
            side_channel: false,
        };
        let r = corollary1_pipeline(input, &mut rng).unwrap();
        assert_eq!(r.qubits_seen, 128);
        assert!(r.conclusive_count >= 16);
        for &(pos, bit) in &r.recovered_bits {
            assert_eq!(truth.get(pos as usize), Some(bit));
        }
        if let RecoveryStage::Degraded(d) = &r.recovery {
            assert!(d.candidates >= 1);
        }
    }

    #[test]
    fn side_channel_matches_direct_recovery() {
        let (config, t) = session(SchemeVariant::QuantumFixedHash, 16);
        let h = config.fixed_hash().unwrap().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let input = PipelineInput {
            config: &config,
            transcript: &t,
            public_hash: Some(&h),
            output_width: None,
            seed_space: None,
            side_channel: true,
        };
        let r = corollary1_pipeline(input, &mut rng).unwrap();
        let GeneratorSpec::Lcg(p) = config.generator else { unreachable!() };
        let direct = lcg_recover(&p.outputs(8)).unwrap();
        match r.recovery {
            RecoveryStage::Lcg { first_output, run_length, seed } => {
                assert_eq!(first_output, 0);
                assert_eq!(run_length, 8);
                assert_eq!(seed, direct);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refuses_secret_hash_variants() {
        let (config, t) = session(SchemeVariant::QuantumSingleKey, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let input = PipelineInput {
            config: &config,
            transcript: &t,
            public_hash: None,
            output_width: None,
            seed_space: None,
            side_channel: false,
        };
        assert!(corollary1_pipeline(input, &mut rng).is_err());
    }

    #[test]
    fn output_grouping() {
        let bits = [(0, 1), (1, 0), (2, 1), (4, 1)];
        let out = recovered_outputs(&bits, 3);
        assert_eq!(out.len(), 1);
        assert_eq!(out[&0], 0b101);
    }
}
