//! Alice/Bob authentication rounds over ideal channels, for the classical
//! one-time-padded tag and the three conjugate-coding variants.
//!
//! Per message the key stream is consumed in a fixed order: hash-selection
//! bits first (single-key variants), then the pad or basis bits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::bitsource::{BitGenerator, GeneratorSpec};
use crate::error::{Error, Result};
use crate::hashing::{hash_eval, hash_from_key_bits, HashFamilyShape, HashFunction};
use crate::quantum::{encode_qubit, measure_in_bases, PureState};
use crate::seed::component_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeVariant {
    /// Pre-shared hash, tag one-time-padded with `k` key bits.
    ClassicalBrassard,
    /// Pre-shared hash, tag conjugate-coded with `k` basis bits.
    QuantumFixedHash,
    /// Fresh hash and bases from the key stream for every message.
    QuantumSingleKey,
    /// Hash drawn once from the key stream, fresh bases per message.
    SingleKeyReusedHash,
}

impl SchemeVariant {
    pub const ALL: [SchemeVariant; 4] = [
        SchemeVariant::ClassicalBrassard,
        SchemeVariant::QuantumFixedHash,
        SchemeVariant::QuantumSingleKey,
        SchemeVariant::SingleKeyReusedHash,
    ];

    pub fn is_quantum(self) -> bool {
        self != SchemeVariant::ClassicalBrassard
    }

    pub fn uses_fixed_hash(self) -> bool {
        matches!(self, SchemeVariant::ClassicalBrassard | SchemeVariant::QuantumFixedHash)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub variant: SchemeVariant,
    pub shape: HashFamilyShape,
    pub generator: GeneratorSpec,
    /// Pre-shared hash key of `m + 2k − 1` bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_hash_key: Option<BitBlock>,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        HashFamilyShape::new(self.shape.m, self.shape.k)?;
        match (self.variant.uses_fixed_hash(), &self.fixed_hash_key) {
            (true, None) => Err(Error::config("fixed_hash_key", "this variant needs a pre-shared hash key")),
            (false, Some(_)) => Err(Error::config(
                "fixed_hash_key",
                "this variant derives its hash from the key stream; remove the pre-shared key",
            )),
            (true, Some(u)) if u.len() != self.shape.key_bits() => Err(Error::config(
                "fixed_hash_key",
                format!("expected {} bits, got {}", self.shape.key_bits(), u.len()),
            )),
            _ => Ok(()),
        }
    }

    pub fn fixed_hash(&self) -> Result<Option<HashFunction>> {
        self.fixed_hash_key
            .as_ref()
            .map(|u| hash_from_key_bits(self.shape, u))
            .transpose()
    }

    /// Key bits consumed by message number `index` (0-based).
    pub fn key_cost(&self, index: usize) -> usize {
        let (l, k) = (self.shape.key_bits(), self.shape.k);
        match self.variant {
            SchemeVariant::ClassicalBrassard | SchemeVariant::QuantumFixedHash => k,
            SchemeVariant::QuantumSingleKey => l + k,
            SchemeVariant::SingleKeyReusedHash if index == 0 => l + k,
            SchemeVariant::SingleKeyReusedHash => k,
        }
    }
}

struct ReplayBits {
    pad: BitBlock,
    position: u64,
}

impl BitGenerator for ReplayBits {
    fn next_bit(&mut self) -> u8 {
        let bit = self.pad.get(self.position as usize).unwrap_or(0);
        self.position += 1;
        bit
    }

    fn position(&self) -> u64 {
        self.position
    }
}

/// Sequential reader over a party's copy of the key stream.
pub struct KeyCursor {
    generator: Box<dyn BitGenerator + Send>,
    budget: Option<u64>,
    reused_hash: Option<HashFunction>,
}

impl KeyCursor {
    pub fn new(spec: &GeneratorSpec, budget: Option<u64>) -> Result<Self> {
        Ok(KeyCursor {
            generator: spec.build()?,
            budget,
            reused_hash: None,
        })
    }

    /// Reads a fixed pad; taking past its end fails with `KeyExhausted`.
    pub fn from_bits(pad: BitBlock) -> Self {
        let budget = pad.len() as u64;
        KeyCursor {
            generator: Box::new(ReplayBits { pad, position: 0 }),
            budget: Some(budget),
            reused_hash: None,
        }
    }

    pub fn position(&self) -> u64 {
        self.generator.position()
    }

    pub fn take(&mut self, count: usize) -> Result<BitBlock> {
        let position = self.position();
        if let Some(available) = self.budget {
            if position + count as u64 > available {
                return Err(Error::KeyExhausted {
                    needed: count,
                    position: position as usize,
                    available: available as usize,
                });
            }
        }
        Ok(self.generator.take_bits(count))
    }

    /// The hash for the current message; draws key bits when the variant
    /// calls for a fresh or first-time hash.
    fn hash(&mut self, config: &SchemeConfig) -> Result<HashFunction> {
        match config.variant {
            SchemeVariant::ClassicalBrassard | SchemeVariant::QuantumFixedHash => Ok(config
                .fixed_hash()?
                .ok_or_else(|| Error::config("fixed_hash_key", "missing"))?),
            SchemeVariant::QuantumSingleKey => {
                let bits = self.take(config.shape.key_bits())?;
                hash_from_key_bits(config.shape, &bits)
            }
            SchemeVariant::SingleKeyReusedHash => {
                if self.reused_hash.is_none() {
                    let bits = self.take(config.shape.key_bits())?;
                    self.reused_hash = Some(hash_from_key_bits(config.shape, &bits)?);
                }
                Ok(self.reused_hash.clone().expect("set above"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Carrier {
    Classical(BitBlock),
    Quantum(Vec<PureState>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyWindow {
    pub start: u64,
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthenticatedMessage {
    pub message: BitBlock,
    pub carrier: Carrier,
    /// Key bits this round consumed; the last `k` are the pad or bases.
    pub key_window: KeyWindow,
}

impl AuthenticatedMessage {
    /// Stream position of the pad or basis bit guarding tag bit `i`.
    pub fn tag_key_position(&self, k: usize, i: usize) -> u64 {
        self.key_window.start + self.key_window.len - k as u64 + i as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub recomputed_tag: BitBlock,
    pub received_tag: BitBlock,
}

fn check_message(config: &SchemeConfig, y: &BitBlock) -> Result<()> {
    if y.len() != config.shape.m {
        return Err(Error::LengthMismatch {
            expected: config.shape.m,
            actual: y.len(),
        });
    }
    Ok(())
}

pub fn alice_round(config: &SchemeConfig, y: &BitBlock, cursor: &mut KeyCursor) -> Result<AuthenticatedMessage> {
    check_message(config, y)?;
    let start = cursor.position();
    let h = cursor.hash(config)?;
    let tag = hash_eval(&h, y)?;
    let key = cursor.take(config.shape.k)?;
    let carrier = if config.variant.is_quantum() {
        Carrier::Quantum(key.iter().zip(tag.iter()).map(|(x, t)| encode_qubit(x, t)).collect())
    } else {
        Carrier::Classical(tag.xor(&key)?)
    };
    Ok(AuthenticatedMessage {
        message: y.clone(),
        carrier,
        key_window: KeyWindow {
            start,
            len: cursor.position() - start,
        },
    })
}

/// Bob's cursor advances exactly as Alice's does, whatever the verdict.
pub fn bob_round<R: Rng + ?Sized>(
    config: &SchemeConfig,
    received: &AuthenticatedMessage,
    cursor: &mut KeyCursor,
    rng: &mut R,
) -> Result<Verdict> {
    check_message(config, &received.message)?;
    let h = cursor.hash(config)?;
    let expected = hash_eval(&h, &received.message)?;
    let key = cursor.take(config.shape.k)?;
    let (recomputed_tag, received_tag) = match (&received.carrier, config.variant.is_quantum()) {
        (Carrier::Classical(tag), false) => (expected.xor(&key)?, tag.clone()),
        (Carrier::Quantum(qubits), true) => {
            if qubits.len() != config.shape.k {
                return Err(Error::LengthMismatch {
                    expected: config.shape.k,
                    actual: qubits.len(),
                });
            }
            let mut measured = BitBlock::default();
            for (q, basis) in qubits.iter().zip(key.iter()) {
                let m = measure_in_bases(q, &BitBlock::from_u64(basis as u64, 1), rng)?;
                measured.push(m.outcomes.get(0) == Some(1));
            }
            (expected, measured)
        }
        (carrier, _) => {
            let kind = match carrier {
                Carrier::Classical(_) => "classical",
                Carrier::Quantum(_) => "quantum",
            };
            return Err(Error::CarrierMismatch(format!(
                "{kind} carrier received by a {:?} receiver",
                config.variant
            )));
        }
    };
    Ok(Verdict {
        accepted: recomputed_tag == received_tag,
        recomputed_tag,
        received_tag,
    })
}

/// What Eve does to each message in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveStrategy {
    #[default]
    None,
    /// Replace the carrier with a freshly random one.
    Substitute,
    /// Flip one random message bit; carrier untouched.
    Tamper,
    /// Measure every qubit in a random basis and resend the post-measurement state.
    InterceptResend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveObservation {
    pub qubit: usize,
    pub basis: u8,
    pub outcome: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub message: BitBlock,
    pub delivered_message: BitBlock,
    pub key_window: KeyWindow,
    pub consumed_bits: u64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eve_records: Vec<EveObservation>,
    /// Alice's output before Eve touched it.
    #[serde(skip)]
    pub sent: Option<AuthenticatedMessage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub variant: SchemeVariant,
    pub eve: EveStrategy,
    pub rounds: Vec<RoundRecord>,
    pub accepted: usize,
    pub key_bits_consumed: u64,
}

impl Transcript {
    pub fn accept_rate(&self) -> f64 {
        if self.rounds.is_empty() {
            0.0
        } else {
            self.accepted as f64 / self.rounds.len() as f64
        }
    }
}

fn random_block<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitBlock {
    BitBlock::from_bools((0..len).map(|_| rng.random::<bool>()))
}

fn interfere<R: Rng + ?Sized>(
    eve: EveStrategy,
    config: &SchemeConfig,
    sent: &AuthenticatedMessage,
    rng: &mut R,
) -> Result<(AuthenticatedMessage, Vec<EveObservation>)> {
    let mut out = sent.clone();
    let mut records = Vec::new();
    let k = config.shape.k;
    match eve {
        EveStrategy::None => {}
        EveStrategy::Substitute => {
            out.carrier = match sent.carrier {
                Carrier::Classical(_) => Carrier::Classical(random_block(k, rng)),
                Carrier::Quantum(_) => Carrier::Quantum(
                    (0..k)
                        .map(|_| encode_qubit(rng.random::<bool>() as u8, rng.random::<bool>() as u8))
                        .collect(),
                ),
            };
        }
        EveStrategy::Tamper => {
            let i = rng.random_range(0..out.message.len());
            out.message.flip(i);
        }
        EveStrategy::InterceptResend => {
            let Carrier::Quantum(qubits) = &sent.carrier else {
                return Err(Error::config("eve", "intercept-resend needs a quantum variant"));
            };
            let mut resent = Vec::with_capacity(qubits.len());
            for (i, q) in qubits.iter().enumerate() {
                let basis = rng.random::<bool>() as u8;
                let m = measure_in_bases(q, &BitBlock::from_u64(basis as u64, 1), rng)?;
                let outcome = m.outcomes.get(0).expect("one qubit");
                records.push(EveObservation { qubit: i, basis, outcome });
                resent.push(encode_qubit(basis, outcome));
            }
            out.carrier = Carrier::Quantum(resent);
        }
    }
    Ok((out, records))
}

/// Runs every message through Alice, Eve and Bob. Randomness for Bob's and
/// Eve's measurements derives from `master_seed`; the key stream comes from
/// the configured generator.
pub fn run_session(
    config: &SchemeConfig,
    messages: &[BitBlock],
    eve: EveStrategy,
    master_seed: u64,
    key_budget: Option<u64>,
) -> Result<Transcript> {
    config.validate()?;
    if eve == EveStrategy::InterceptResend && !config.variant.is_quantum() {
        return Err(Error::config("eve", "intercept-resend needs a quantum variant"));
    }
    let alice = KeyCursor::new(&config.generator, key_budget)?;
    let bob = KeyCursor::new(&config.generator, key_budget)?;
    run_with_cursors(config, messages, eve, master_seed, alice, bob)
}

/// Like [`run_session`] but both parties read `pad` instead of the configured generator.
pub fn run_session_with_pad(
    config: &SchemeConfig,
    messages: &[BitBlock],
    eve: EveStrategy,
    master_seed: u64,
    pad: &BitBlock,
) -> Result<Transcript> {
    config.validate()?;
    if eve == EveStrategy::InterceptResend && !config.variant.is_quantum() {
        return Err(Error::config("eve", "intercept-resend needs a quantum variant"));
    }
    let alice = KeyCursor::from_bits(pad.clone());
    let bob = KeyCursor::from_bits(pad.clone());
    run_with_cursors(config, messages, eve, master_seed, alice, bob)
}

fn run_with_cursors(
    config: &SchemeConfig,
    messages: &[BitBlock],
    eve: EveStrategy,
    master_seed: u64,
    mut alice: KeyCursor,
    mut bob: KeyCursor,
) -> Result<Transcript> {
    let mut bob_rng = component_rng(master_seed, "protocol/bob");
    let mut eve_rng = component_rng(master_seed, "protocol/eve");
    let mut rounds = Vec::with_capacity(messages.len());
    for y in messages {
        let sent = alice_round(config, y, &mut alice)?;
        let (delivered, eve_records) = interfere(eve, config, &sent, &mut eve_rng)?;
        let verdict = bob_round(config, &delivered, &mut bob, &mut bob_rng)?;
        debug_assert_eq!(alice.position(), bob.position());
        rounds.push(RoundRecord {
            message: y.clone(),
            delivered_message: delivered.message,
            key_window: sent.key_window,
            consumed_bits: sent.key_window.len,
            verdict,
            eve_records,
            sent: Some(sent),
        });
    }
    Ok(Transcript {
        variant: config.variant,
        eve,
        accepted: rounds.iter().filter(|r| r.verdict.accepted).count(),
        key_bits_consumed: alice.position(),
        rounds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub variant: SchemeVariant,
    pub shape: HashFamilyShape,
    pub hash_keys: u64,
    pub rounds: u64,
    pub accepted: u64,
}

/// Runs every message honestly under every hash key of the family. Pad and
/// basis bits come from a fair stream seeded by `master_seed`.
pub fn honest_completeness(
    variant: SchemeVariant,
    shape: HashFamilyShape,
    master_seed: u64,
) -> Result<CompletenessReport> {
    let l = shape.key_bits();
    if l > 16 {
        return Err(Error::Capacity(format!("exhaustive check over 2^{l} hash keys")));
    }
    let messages: Vec<BitBlock> = (0..1u64 << shape.m).map(|y| BitBlock::from_u64(y, shape.m)).collect();
    let n = messages.len();
    let fresh = crate::bitsource::fair_bitstream(master_seed, n * shape.k)?;
    let mut rounds = 0u64;
    let mut accepted = 0u64;
    for u in 0..1u64 << l {
        let key = BitBlock::from_u64(u, l);
        let uses_fixed = variant.uses_fixed_hash();
        let mut pad = BitBlock::default();
        for i in 0..n {
            let reuse = variant == SchemeVariant::SingleKeyReusedHash && i > 0;
            if !uses_fixed && !reuse {
                pad.extend(&key);
            }
            pad.extend(&fresh.slice(i * shape.k..(i + 1) * shape.k));
        }
        let config = SchemeConfig {
            variant,
            shape,
            generator: GeneratorSpec::Fair { seed: master_seed },
            fixed_hash_key: uses_fixed.then(|| key.clone()),
        };
        let t = run_session_with_pad(&config, &messages, EveStrategy::None, master_seed, &pad)?;
        rounds += t.rounds.len() as u64;
        accepted += t.accepted as u64;
    }
    Ok(CompletenessReport {
        variant,
        shape,
        hash_keys: 1 << l,
        rounds,
        accepted,
    })
}
