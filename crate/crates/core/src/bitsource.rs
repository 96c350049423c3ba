//! Key bit streams: an ideal fair source and the linear congruential
//! generator, plus exact block distributions obtained by enumerating seeds.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::error::{Error, Result};

/// Largest modulus accepted for an LCG; keeps every product inside `u128`
/// and every determinant inside `i128`.
pub const MAX_MODULUS: u64 = 1 << 32;
/// Largest block length for which a distribution is enumerated.
pub const MAX_BLOCK_BITS: usize = 16;
/// Largest number of seeds enumerated by [`block_distribution`].
pub const MAX_ENUMERATED_SEEDS: u64 = 1 << 24;
/// Largest modulus for state-only enumeration.
pub const MAX_STATE_ONLY_MODULUS: u64 = 1 << 12;

/// Seed `(A, s0, a, b)` of `s_i = a·s_{i-1} + b mod A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcgParams {
    #[serde(rename = "A")]
    pub modulus: u64,
    #[serde(rename = "a")]
    pub multiplier: u64,
    #[serde(rename = "b")]
    pub increment: u64,
    pub s0: u64,
}

impl LcgParams {
    pub fn new(modulus: u64, multiplier: u64, increment: u64, s0: u64) -> Result<Self> {
        let params = LcgParams {
            modulus,
            multiplier,
            increment,
            s0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modulus < 2 || self.modulus > MAX_MODULUS {
            return Err(Error::Range(format!(
                "LCG modulus must lie in [2, 2^32], got {}",
                self.modulus
            )));
        }
        for (name, v) in [("a", self.multiplier), ("b", self.increment), ("s0", self.s0)] {
            if v >= self.modulus {
                return Err(Error::Range(format!(
                    "LCG parameter {name}={v} is not in Z_{}",
                    self.modulus
                )));
            }
        }
        Ok(())
    }

    /// Bits per emitted value: `⌈log2 A⌉`.
    pub fn width(&self) -> usize {
        ceil_log2(self.modulus)
    }

    /// Seed length `n = 4·⌈log2 A⌉`.
    pub fn seed_bits(&self) -> usize {
        4 * self.width()
    }

    /// The first `count` emitted values `s_1 … s_count` (`s0` is not emitted).
    pub fn outputs(&self, count: usize) -> Vec<u64> {
        let mut state = self.s0;
        (0..count)
            .map(|_| {
                state = lcg_step(state, self);
                state
            })
            .collect()
    }
}

pub(crate) fn ceil_log2(x: u64) -> usize {
    debug_assert!(x >= 1);
    (64 - (x - 1).leading_zeros()) as usize
}

pub fn lcg_step(state: u64, params: &LcgParams) -> u64 {
    ((params.multiplier as u128 * state as u128 + params.increment as u128) % params.modulus as u128)
        as u64
}

/// Big-endian `⌈log2 A⌉`-bit expansions of `s_1 … s_count`, concatenated.
pub fn lcg_bitstream(params: &LcgParams, count: usize) -> Result<BitBlock> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    params.validate()?;
    let width = params.width();
    let mut out = BitBlock::default();
    for s in params.outputs(count) {
        out.extend(&BitBlock::from_u64(s, width));
    }
    Ok(out)
}

/// `count` i.i.d. fair bits, reproducible from `master_seed`.
pub fn fair_bitstream(master_seed: u64, count: usize) -> Result<BitBlock> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut gen = FairBits::new(master_seed);
    Ok(gen.take_bits(count))
}

/// `G(X, i)`: a deterministic bit source addressed by position.
pub trait BitGenerator {
    fn next_bit(&mut self) -> u8;

    /// Number of bits emitted so far.
    fn position(&self) -> u64;

    fn take_bits(&mut self, count: usize) -> BitBlock {
        BitBlock::from_bools((0..count).map(|_| self.next_bit() == 1))
    }
}

/// Fair Bernoulli bits from ChaCha8 in counter mode, 32 bits per block,
/// most significant bit first.
#[derive(Debug, Clone)]
pub struct FairBits {
    rng: ChaCha8Rng,
    word: u32,
    remaining: u32,
    position: u64,
}

impl FairBits {
    pub fn new(master_seed: u64) -> Self {
        FairBits {
            rng: ChaCha8Rng::seed_from_u64(master_seed),
            word: 0,
            remaining: 0,
            position: 0,
        }
    }
}

impl BitGenerator for FairBits {
    fn next_bit(&mut self) -> u8 {
        if self.remaining == 0 {
            self.word = self.rng.next_u32();
            self.remaining = 32;
        }
        self.remaining -= 1;
        self.position += 1;
        ((self.word >> self.remaining) & 1) as u8
    }

    fn position(&self) -> u64 {
        self.position
    }
}

#[derive(Debug, Clone)]
pub struct LcgBits {
    params: LcgParams,
    state: u64,
    width: usize,
    word: u64,
    remaining: usize,
    position: u64,
}

impl LcgBits {
    pub fn new(params: LcgParams) -> Result<Self> {
        params.validate()?;
        Ok(LcgBits {
            params,
            state: params.s0,
            width: params.width(),
            word: 0,
            remaining: 0,
            position: 0,
        })
    }
}

impl BitGenerator for LcgBits {
    fn next_bit(&mut self) -> u8 {
        if self.remaining == 0 {
            self.state = lcg_step(self.state, &self.params);
            self.word = self.state;
            self.remaining = self.width;
        }
        self.remaining -= 1;
        self.position += 1;
        ((self.word >> self.remaining) & 1) as u8
    }

    fn position(&self) -> u64 {
        self.position
    }
}

/// Generator description as it appears in config files:
/// `{"kind":"lcg","A":…,"a":…,"b":…,"s0":…}` or `{"kind":"fair","seed":…}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Lcg(LcgParams),
    Fair { seed: u64 },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Box<dyn BitGenerator + Send>> {
        Ok(match *self {
            GeneratorSpec::Lcg(params) => Box::new(LcgBits::new(params)?),
            GeneratorSpec::Fair { seed } => Box::new(FairBits::new(seed)),
        })
    }

    pub fn stream(&self, count: usize) -> Result<BitBlock> {
        match self {
            GeneratorSpec::Lcg(params) => {
                let width = params.width();
                let mut bits = lcg_bitstream(params, count.div_ceil(width).max(1))?;
                bits = bits.slice(0..count);
                Ok(bits)
            }
            GeneratorSpec::Fair { seed } => {
                if count == 0 {
                    return Ok(BitBlock::default());
                }
                fair_bitstream(*seed, count)
            }
        }
    }

    /// The `index`-th generated bit.
    pub fn bit(&self, index: u64) -> Result<u8> {
        let mut gen = self.build()?;
        for _ in 0..index {
            gen.next_bit();
        }
        Ok(gen.next_bit())
    }
}

/// Which part of the LCG seed is treated as uniformly random when
/// computing a block distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMode {
    /// Enumerate `s0 ∈ Z_A`; `A`, `a`, `b` fixed.
    #[default]
    StateOnly,
    /// Enumerate `(a, b, s0) ∈ Z_A³`; `A` fixed.
    FullSeed,
}

/// A generator together with the prior over its secret seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorFamily {
    Fair,
    Lcg {
        #[serde(rename = "A")]
        modulus: u64,
        #[serde(rename = "a", default)]
        multiplier: u64,
        #[serde(rename = "b", default)]
        increment: u64,
        #[serde(default)]
        enumerate: EnumerationMode,
    },
}

impl GeneratorFamily {
    pub fn lcg_state_only(modulus: u64, multiplier: u64, increment: u64) -> Self {
        GeneratorFamily::Lcg {
            modulus,
            multiplier,
            increment,
            enumerate: EnumerationMode::StateOnly,
        }
    }
}

/// `p_j = Pr[X^k = j]`, with `j` read as a big-endian `k`-bit word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDistribution {
    k: usize,
    probabilities: Vec<f64>,
}

impl BlockDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(k: usize, probabilities: Vec<f64>) -> Result<Self> {
        if k > 30 {
            return Err(Error::Capacity(format!("block length {k} too large")));
        }
        if probabilities.len() != 1 << k {
            return Err(Error::LengthMismatch {
                expected: 1 << k,
                actual: probabilities.len(),
            });
        }
        if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("probability {p} is negative or not finite")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(BlockDistribution { k, probabilities })
    }

    /// Rescales non-negative weights to sum to one.
    pub fn from_weights(k: usize, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights must have positive total".into()));
        }
        Self::new(k, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Self {
        let n = 1usize << k;
        BlockDistribution {
            k,
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(k: usize, j: usize) -> Self {
        let mut probabilities = vec![0.0; 1 << k];
        probabilities[j] = 1.0;
        BlockDistribution { k, probabilities }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.probabilities[j]
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        crate::bounds::shannon_entropy(&self.probabilities)
    }
}

/// Exact distribution of the `k`-bit window starting at bit `start_index`,
/// under a uniform prior over the family's enumerated seeds.
pub fn block_distribution(
    family: &GeneratorFamily,
    k: usize,
    start_index: u64,
) -> Result<BlockDistribution> {
    if k == 0 || k > MAX_BLOCK_BITS {
        return Err(Error::Capacity(format!(
            "block length must lie in [1, {MAX_BLOCK_BITS}], got {k}"
        )));
    }
    let (modulus, multiplier, increment, mode) = match *family {
        GeneratorFamily::Fair => return Ok(BlockDistribution::uniform(k)),
        GeneratorFamily::Lcg {
            modulus,
            multiplier,
            increment,
            enumerate,
        } => (modulus, multiplier, increment, enumerate),
    };
    if start_index > 1 << 20 {
        return Err(Error::Capacity(format!("start index {start_index} exceeds 2^20")));
    }
    let seeds: Vec<LcgParams> = match mode {
        EnumerationMode::StateOnly => {
            if modulus > MAX_STATE_ONLY_MODULUS {
                return Err(Error::Capacity(format!(
                    "state-only enumeration supports A ≤ {MAX_STATE_ONLY_MODULUS}, got {modulus}"
                )));
            }
            (0..modulus)
                .map(|s0| LcgParams::new(modulus, multiplier, increment, s0))
                .collect::<Result<_>>()?
        }
        EnumerationMode::FullSeed => {
            let count = (modulus as u128).pow(3);
            if count > MAX_ENUMERATED_SEEDS as u128 {
                return Err(Error::Capacity(format!(
                    "full-seed enumeration of A={modulus} needs {count} seeds, limit {MAX_ENUMERATED_SEEDS}"
                )));
            }
            let mut v = Vec::with_capacity(count as usize);
            for a in 0..modulus {
                for b in 0..modulus {
                    for s0 in 0..modulus {
                        v.push(LcgParams::new(modulus, a, b, s0)?);
                    }
                }
            }
            v
        }
    };

    let mut counts = vec![0u64; 1 << k];
    for params in &seeds {
        counts[lcg_window(params, start_index, k)] += 1;
    }
    let total = seeds.len() as f64;
    BlockDistribution::new(k, counts.into_iter().map(|c| c as f64 / total).collect())
}

fn lcg_window(params: &LcgParams, start_index: u64, k: usize) -> usize {
    let width = params.width() as u64;
    let mut state = params.s0;
    for _ in 0..start_index / width {
        state = lcg_step(state, params);
    }
    let mut gen = LcgBits {
        params: *params,
        state,
        width: width as usize,
        word: 0,
        remaining: 0,
        position: 0,
    };
    for _ in 0..start_index % width {
        gen.next_bit();
    }
    (0..k).fold(0usize, |acc, _| (acc << 1) | gen.next_bit() as usize)
}

/// `B(p) = ½ Σ_j |p_j − 2^{−k}|`, the trace distance to the uniform block law.
pub fn bias(p: &BlockDistribution) -> f64 {
    let u = 1.0 / p.probabilities.len() as f64;
    0.5 * p.probabilities.iter().map(|x| (x - u).abs()).sum::<f64>()
}
