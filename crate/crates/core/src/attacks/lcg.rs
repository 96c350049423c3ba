//! State recovery for `s_{i+1} = a·s_i + b mod A` from consecutive outputs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitsource::{
    lcg_step, EnumerationMode, GeneratorFamily, LcgBits, LcgParams, BitGenerator, MAX_ENUMERATED_SEEDS,
    MAX_MODULUS,
};
use crate::error::{Error, Result};

/// Deltas folded into the gcd before considering extension.
pub const DEFAULT_DELTAS: usize = 5;
/// Cap on cofactors tried when the gcd overshoots the modulus.
const MAX_COFACTOR_STEPS: u128 = 1 << 20;

/// `det [[s0, s1, 1], [s1, s2, 1], [s2, s3, 1]]`, a multiple of `A` for any
/// four consecutive outputs.
pub fn lcg_delta(s: [u64; 4]) -> i128 {
    let [s0, s1, s2, s3] = s.map(|x| x as i128);
    s0 * (s2 - s3) - s1 * (s1 - s2) + (s1 * s3 - s2 * s2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    /// The recovered parameters regenerate every observed output.
    Exact,
    /// Only a multiple of the modulus is known.
    MultipleOfA,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveredLcgSeed {
    #[serde(rename = "A")]
    pub modulus: u128,
    #[serde(rename = "a")]
    pub multiplier: u64,
    #[serde(rename = "b")]
    pub increment: u64,
    pub s0: u64,
    pub confidence: Confidence,
    pub deltas_used: usize,
    /// `false` when several seeds `s0` lead to the same outputs.
    pub s0_unique: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RecoveredLcgSeed {
    pub fn params(&self) -> Option<LcgParams> {
        if self.confidence != Confidence::Exact {
            return None;
        }
        LcgParams::new(self.modulus as u64, self.multiplier, self.increment, self.s0).ok()
    }

    fn failed(modulus: u128, deltas_used: usize, diagnostic: String) -> Self {
        RecoveredLcgSeed {
            modulus,
            multiplier: 0,
            increment: 0,
            s0: 0,
            confidence: if modulus == 0 { Confidence::Failed } else { Confidence::MultipleOfA },
            deltas_used,
            s0_unique: false,
            diagnostic: Some(diagnostic),
        }
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i128) as u128)
}

fn sub_mod(x: u64, y: u64, m: u128) -> u128 {
    ((x as u128 + m) - (y as u128 % m)) % m
}

/// Multiplier, increment and seed consistent with every observed transition
/// modulo `m`, or `None`.
fn fit(observed: &[u64], m: u128) -> Option<(u64, u64, u64, bool)> {
    if m < 2 || m > MAX_MODULUS as u128 || observed.iter().any(|&s| s as u128 >= m) {
        return None;
    }
    let a = observed.windows(3).find_map(|w| {
        let inv = mod_inverse(sub_mod(w[0], w[1], m), m)?;
        Some(sub_mod(w[1], w[2], m) * inv % m)
    })?;
    let b = (observed[1] as u128 + m * m - a * observed[0] as u128 % m) % m;
    let params = LcgParams::new(m as u64, a as u64, b as u64, observed[0]).ok()?;
    let mut s = observed[0];
    for &next in &observed[1..] {
        s = lcg_step(s, &params);
        if s != next {
            return None;
        }
    }
    // Back-solve a·s0 ≡ s1 − b.
    let rhs = sub_mod(observed[0], b as u64, m);
    let g = gcd(a, m);
    if !rhs.is_multiple_of(g) {
        return None;
    }
    let reduced = m / g;
    let s0 = if reduced == 1 {
        0
    } else {
        (rhs / g) * mod_inverse((a / g) % reduced, reduced)? % reduced
    };
    Some((a as u64, b as u64, s0 as u64, g == 1))
}

/// Recovers `(A, a, b, s0)` from consecutive outputs `s_1, s_2, …`.
///
/// The modulus starts as the gcd of the first five non-zero deltas, extended
/// with the remaining deltas when it still exceeds the largest output plus
/// one. If no full fit exists at that modulus, its divisors above the
/// largest output are tried from the smallest up.
pub fn lcg_recover(observed: &[u64]) -> Result<RecoveredLcgSeed> {
    if observed.len() < DEFAULT_DELTAS + 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} outputs, got {}",
            DEFAULT_DELTAS + 3,
            observed.len()
        )));
    }
    let deltas: Vec<u128> = observed
        .windows(4)
        .map(|w| lcg_delta([w[0], w[1], w[2], w[3]]).unsigned_abs())
        .filter(|&d| d != 0)
        .collect();
    if deltas.is_empty() {
        return Ok(RecoveredLcgSeed::failed(0, 0, "all deltas are zero".into()));
    }
    let max = *observed.iter().max().expect("non-empty") as u128;
    let mut used = deltas.len().min(DEFAULT_DELTAS);
    let mut g = deltas[..used].iter().fold(0, |acc, &d| gcd(acc, d));
    if g > max + 1 && used < deltas.len() {
        g = deltas.iter().fold(g, |acc, &d| gcd(acc, d));
        used = deltas.len();
    }
    if g <= max {
        return Ok(RecoveredLcgSeed::failed(
            g,
            used,
            format!("gcd {g} does not exceed the largest output {max}"),
        ));
    }
    let hi = g / (max + 1);
    let lo = hi.saturating_sub(MAX_COFACTOR_STEPS).max(1);
    for c in (lo..=hi).rev() {
        if g % c != 0 {
            continue;
        }
        let m = g / c;
        if let Some((a, b, s0, unique)) = fit(observed, m) {
            return Ok(RecoveredLcgSeed {
                modulus: m,
                multiplier: a,
                increment: b,
                s0,
                confidence: Confidence::Exact,
                deltas_used: used,
                s0_unique: unique,
                diagnostic: (c > 1).then(|| format!("gcd {g} was {c}·A")),
            });
        }
    }
    Ok(RecoveredLcgSeed::failed(
        g,
        used,
        "no divisor of the gcd admits an invertible linear fit".into(),
    ))
}

/// Outcome of a brute-force search for seeds matching known stream bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegradedRecovery {
    pub seed_space: u64,
    pub known_bits: usize,
    pub candidates: u64,
    /// The unique consistent seed, when there is exactly one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique: Option<LcgParams>,
}

/// Enumerates `space` and counts seeds whose bit stream agrees with every
/// `(position, bit)` in `known`.
pub fn degraded_lcg_recover(known: &[(u64, u8)], space: &GeneratorFamily) -> Result<DegradedRecovery> {
    let GeneratorFamily::Lcg {
        modulus,
        multiplier,
        increment,
        enumerate,
    } = *space
    else {
        return Err(Error::InvalidArgument("seed search needs an LCG family".into()));
    };
    let seed_space = match enumerate {
        EnumerationMode::StateOnly => modulus as u128,
        EnumerationMode::FullSeed => (modulus as u128).pow(3),
    };
    if seed_space > MAX_ENUMERATED_SEEDS as u128 {
        return Err(Error::Capacity(format!(
            "seed space of {seed_space} exceeds the {MAX_ENUMERATED_SEEDS} limit"
        )));
    }
    let mut sorted: Vec<(u64, u8)> = known.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument("conflicting bits at one position".into()));
    }
    let consistent = |params: LcgParams| -> Result<bool> {
        let mut gen = LcgBits::new(params)?;
        for &(pos, bit) in &sorted {
            while gen.position() < pos {
                gen.next_bit();
            }
            if gen.next_bit() != bit {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut candidates = 0u64;
    let mut unique = None;
    let mut visit = |params: LcgParams| -> Result<()> {
        if consistent(params)? {
            candidates += 1;
            unique = if candidates == 1 { Some(params) } else { None };
        }
        Ok(())
    };
    match enumerate {
        EnumerationMode::StateOnly => {
            for s0 in 0..modulus {
                visit(LcgParams::new(modulus, multiplier, increment, s0)?)?;
            }
        }
        EnumerationMode::FullSeed => {
            for a in 0..modulus {
                for b in 0..modulus {
                    for s0 in 0..modulus {
                        visit(LcgParams::new(modulus, a, b, s0)?)?;
                    }
                }
            }
        }
    }
    Ok(DegradedRecovery {
        seed_space: seed_space as u64,
        known_bits: sorted.len(),
        candidates,
        unique,
    })
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// A uniformly drawn prime modulus in `[low, high]` with `a ∈ [2, A)` and
/// `b`, `s0` uniform in `Z_A`.
pub fn random_prime_lcg<R: Rng + ?Sized>(low: u64, high: u64, rng: &mut R) -> Result<LcgParams> {
    if !(2..=high).contains(&low) || high > MAX_MODULUS || !(low..=high).any(is_prime) {
        return Err(Error::Range(format!("no prime modulus in [{low}, {high}]")));
    }
    let modulus = loop {
        let c = rng.random_range(low..=high);
        if is_prime(c) {
            break c;
        }
    };
    let multiplier = if modulus > 2 { rng.random_range(2..modulus) } else { 0 };
    LcgParams::new(modulus, multiplier, rng.random_range(0..modulus), rng.random_range(0..modulus))
}
