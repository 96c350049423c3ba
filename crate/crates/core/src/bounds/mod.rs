//! Information measures and the security bounds of the scheme: Holevo
//! floors, trace-distance and entropy-continuity bounds, block-length
//! limits, and the tag-equivocation identities, each checked on exactly
//! enumerated joint laws.

mod info;
mod sampling;

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::bitsource::{bias, BlockDistribution};
use crate::error::{Error, Result};
use crate::hashing::{all_hash_functions, hash_eval, hash_from_key_bits, HashFamilyShape};
use crate::quantum::{
    density_for_block, effect_probability, encode_block, trace_distance, von_neumann_entropy, Povm, MAX_QUBITS,
};
pub use info::{shannon_entropy, JointTable};
pub use sampling::{dirichlet_block_distribution, sample_in_bias_band, worst_case_bias_distribution};

/// Slack allowed when deciding whether a computed value respects its bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// Upper end of the range where the Fannes bound applies.
pub const FANNES_LIMIT: f64 = 1.0 / (2.0 * E);
/// Enumeration budget for joint laws built by brute force.
pub const MAX_JOINT_WORK: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Bits,
    Nats,
    Probability,
    Count,
}

/// A computed quantity compared against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub units: Units,
    pub satisfied: bool,
    pub slack: f64,
}

impl BoundReport {
    /// `value ≤ bound`.
    pub fn upper(name: impl Into<String>, value: f64, bound: f64, units: Units) -> Self {
        let slack = bound - value;
        BoundReport {
            name: name.into(),
            value,
            bound,
            units,
            satisfied: slack >= -BOUND_TOLERANCE,
            slack,
        }
    }

    /// `value ≥ bound`.
    pub fn lower(name: impl Into<String>, value: f64, bound: f64, units: Units) -> Self {
        let slack = value - bound;
        BoundReport {
            name: name.into(),
            value,
            bound,
            units,
            satisfied: slack >= -BOUND_TOLERANCE,
            slack,
        }
    }

    /// `value = bound` within `tolerance`; slack is the unused tolerance.
    pub fn equality(name: impl Into<String>, value: f64, bound: f64, units: Units, tolerance: f64) -> Self {
        let dev = (value - bound).abs();
        BoundReport {
            name: name.into(),
            value,
            bound,
            units,
            satisfied: dev <= tolerance,
            slack: tolerance - dev,
        }
    }
}

fn check_block(p: &BlockDistribution, y_block: &BitBlock) -> Result<usize> {
    let k = y_block.len();
    if k > MAX_QUBITS {
        return Err(Error::Capacity(format!("k={k} exceeds the {MAX_QUBITS}-qubit limit")));
    }
    if p.k() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: p.k(),
        });
    }
    Ok(k)
}

/// `H(X^k) − S(ρ_{Y^k})`: no measurement leaves Eve with less uncertainty
/// about the key block than this.
pub fn holevo_floor(p: &BlockDistribution, y_block: &BitBlock) -> Result<BoundReport> {
    check_block(p, y_block)?;
    let rho = density_for_block(y_block, p)?;
    let floor = p.entropy_bits() - von_neumann_entropy(&rho)?;
    Ok(BoundReport::lower("holevo_floor", floor, 0.0, Units::Bits))
}

/// Exact joint law of `(X, Z)` when the key block `X ~ p` selects the bases,
/// `y_block` the tag bits, and `Z` is the outcome of `povm`.
pub fn key_outcome_joint(p: &BlockDistribution, y_block: &BitBlock, povm: &Povm) -> Result<JointTable> {
    let k = check_block(p, y_block)?;
    if povm.dim() != 1 << k {
        return Err(Error::LengthMismatch {
            expected: 1 << k,
            actual: povm.dim(),
        });
    }
    let mut events = Vec::new();
    for (x, &px) in p.probabilities().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let phi = encode_block(&BitBlock::from_u64(x as u64, k), y_block)?;
        for (z, e) in povm.effects().iter().enumerate() {
            events.push((vec![x, z], px * effect_probability(e, &phi).max(0.0)));
        }
    }
    let total: f64 = events.iter().map(|e| e.1).sum();
    JointTable::from_events(
        &["X", "Z"],
        &[1 << k, povm.outcomes()],
        events.into_iter().map(|(i, w)| (i, w / total)),
    )
}

/// `I(X; Z | Y) ≤ S(ρ_{Y^k})` for the given measurement.
pub fn verify_holevo_against_povm(p: &BlockDistribution, y_block: &BitBlock, povm: &Povm) -> Result<BoundReport> {
    let joint = key_outcome_joint(p, y_block, povm)?;
    let info = joint.mutual_information(&["X"], &["Z"], &[])?;
    let s = von_neumann_entropy(&density_for_block(y_block, p)?)?;
    Ok(BoundReport::upper("holevo", info, s, Units::Bits))
}

/// `σ_{Y^k}`: the encoding mixture under a uniform key block.
fn uniform_mixture(y_block: &BitBlock) -> Result<crate::quantum::DensityMatrix> {
    density_for_block(y_block, &BlockDistribution::uniform(y_block.len()))
}

/// `D(ρ_{Y^k}, σ_{Y^k}) ≤ B(p)`.
pub fn proposition2_check(p: &BlockDistribution, y_block: &BitBlock) -> Result<BoundReport> {
    check_block(p, y_block)?;
    let d = trace_distance(&density_for_block(y_block, p)?, &uniform_mixture(y_block)?)?;
    Ok(BoundReport::upper("trace_distance_vs_bias", d, bias(p), Units::Bits))
}

/// `2D·ln(N/(2D))` nats, the entropy-continuity bound for states at trace
/// distance `D ≤ 1/(2e)` in dimension `N`. `D = 0` gives the limit 0.
pub fn fannes_bound(d: f64, dimension: usize) -> Result<f64> {
    if !(0.0..=FANNES_LIMIT).contains(&d) {
        return Err(Error::Range(format!("trace distance {d} outside [0, 1/(2e) = {FANNES_LIMIT}]")));
    }
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * d * (dimension as f64 / (2.0 * d)).ln())
}

/// `2·ln2·(k−1)·ε + 2ε·ln(1/ε)` nats, for `0 ≤ ε ≤ 1/e`.
pub fn theorem2_bound(eps: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0 / E).contains(&eps) {
        return Err(Error::Range(format!("eps {eps} outside [0, 1/e]")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * LN_2 * (k as f64 - 1.0) * eps + 2.0 * eps * (1.0 / eps).ln())
}

/// `|S(ρ_{Y^k}) − S(σ_{Y^k})|` in nats against [`theorem2_bound`].
pub fn theorem2_check(p: &BlockDistribution, y_block: &BitBlock, eps: f64) -> Result<BoundReport> {
    let k = check_block(p, y_block)?;
    let b = bias(p);
    if b > eps + BOUND_TOLERANCE {
        return Err(Error::Range(format!("bias {b} exceeds eps {eps}")));
    }
    let bound = theorem2_bound(eps, k)?;
    let s_rho = von_neumann_entropy(&density_for_block(y_block, p)?)?;
    let s_sigma = von_neumann_entropy(&uniform_mixture(y_block)?)?;
    Ok(BoundReport::upper("entropy_gap", ((s_rho - s_sigma) * LN_2).abs(), bound, Units::Nats))
}

/// `1 + (δ/ε)/(2 ln 2) − log2(1/ε)`: the longest block for which an
/// `ε`-biased key keeps the entropy gap below `δ`.
pub fn max_block_length(eps: f64, delta: f64) -> Result<f64> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(Error::Range(format!("eps={eps} and delta={delta} must be positive")));
    }
    Ok(1.0 + (delta / eps) / (2.0 * LN_2) - (1.0 / eps).ln() / LN_2)
}

/// `1 + 1/(ε ln 4)`.
pub fn max_block_length_simple(eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Range(format!("eps={eps} must be positive")));
    }
    Ok(1.0 + 1.0 / (eps * 4f64.ln()))
}

/// [`max_block_length`] with the measured bias of `p` in place of `ε`.
pub fn max_block_length_bias(p: &BlockDistribution, delta: f64) -> Result<f64> {
    max_block_length(bias(p), delta)
}

/// Both block-length formulas at the same `ε`, with `δ = ε` for the full one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockLengthComparison {
    pub eps: f64,
    pub full_with_delta_eq_eps: f64,
    pub simple: f64,
}

pub fn block_length_comparison(eps: f64) -> Result<BlockLengthComparison> {
    Ok(BlockLengthComparison {
        eps,
        full_with_delta_eq_eps: max_block_length(eps, eps)?,
        simple: max_block_length_simple(eps)?,
    })
}

/// Bias as a function of block length and sweep index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BiasSchedule {
    Zero,
    Constant { value: f64 },
    /// `n^{−exponent}`.
    InversePower { exponent: f64 },
}

impl BiasSchedule {
    pub fn eval(&self, _k: usize, n: u64) -> f64 {
        match *self {
            BiasSchedule::Zero => 0.0,
            BiasSchedule::Constant { value } => value,
            BiasSchedule::InversePower { exponent } => (n as f64).powf(-exponent),
        }
    }
}

/// Block length as a function of the sweep index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockSchedule {
    Constant { k: usize },
    /// `min(⌊log2 n⌋, cap)`.
    Log2Capped { cap: usize },
}

impl BlockSchedule {
    pub fn eval(&self, n: u64) -> usize {
        match *self {
            BlockSchedule::Constant { k } => k,
            BlockSchedule::Log2Capped { cap } => (n.max(1).ilog2() as usize).min(cap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u64,
    pub k: usize,
    pub bias: f64,
    pub gap_nats: f64,
    /// Present when the bias lies in the bound's domain.
    pub theorem2_bound: Option<f64>,
    pub within_bound: Option<bool>,
}

/// Entropy gap `|S(ρ) − S(σ)|` along a schedule of block lengths and
/// biases, using the worst-case-bias distribution at each point.
pub fn asymptotic_gap_sweep(f: BiasSchedule, g: BlockSchedule, n_values: &[u64]) -> Result<Vec<GapRow>> {
    n_values
        .iter()
        .map(|&n| {
            let k = g.eval(n);
            if k == 0 || k > MAX_QUBITS {
                return Err(Error::Capacity(format!("block length {k} at n={n} outside [1, {MAX_QUBITS}]")));
            }
            let b = f.eval(k, n);
            let p = worst_case_bias_distribution(k, b)?;
            let y = BitBlock::zeros(k);
            let s_rho = von_neumann_entropy(&density_for_block(&y, &p)?)?;
            let s_sigma = von_neumann_entropy(&uniform_mixture(&y)?)?;
            let gap_nats = ((s_rho - s_sigma) * LN_2).abs();
            let bound = theorem2_bound(b, k).ok();
            Ok(GapRow {
                n,
                k,
                bias: b,
                gap_nats,
                theorem2_bound: bound,
                within_bound: bound.map(|t| gap_nats <= t + BOUND_TOLERANCE),
            })
        })
        .collect()
}

/// Entropies along the one-time-pad equivalence chain
/// `H(T,X|Y,Z) = H(T|Y,Z) + H(X|T,Y,Z) = H(T|Y,Z) = H(T|Y) = log2|T|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneTimePadChain {
    pub tag_and_key_given_view: f64,
    pub key_given_tag_and_view: f64,
    pub tag_given_view: f64,
    pub tag_given_message: f64,
    pub log_tag_space: f64,
    pub report: BoundReport,
    pub equivalent: bool,
}

/// Evaluates, on [`wegman_carter_joint`], the chain that makes the XOR
/// variant a one-time pad over the tag.
pub fn wegman_carter_equivalence(shape: HashFamilyShape, key: &BlockDistribution) -> Result<OneTimePadChain> {
    let joint = wegman_carter_joint(shape, key)?;
    let k = shape.k;
    let tag_and_key_given_view = joint.conditional_entropy(&["T", "X"], &["Y", "Z"])?;
    let key_given_tag_and_view = joint.conditional_entropy(&["X"], &["T", "Y", "Z"])?;
    let tag_given_view = joint.conditional_entropy(&["T"], &["Y", "Z"])?;
    let tag_given_message = joint.conditional_entropy(&["T"], &["Y"])?;
    let log_tag_space = k as f64;
    let report = BoundReport::equality(
        "tag_equivocation_vs_log_tag_space",
        tag_given_view,
        log_tag_space,
        Units::Bits,
        IDENTITY_TOLERANCE,
    );
    let equivalent = report.satisfied
        && (tag_and_key_given_view - log_tag_space).abs() <= IDENTITY_TOLERANCE
        && (tag_given_message - log_tag_space).abs() <= IDENTITY_TOLERANCE;
    Ok(OneTimePadChain {
        tag_and_key_given_view,
        key_given_tag_and_view,
        tag_given_view,
        tag_given_message,
        log_tag_space,
        report,
        equivalent,
    })
}

/// Law of `(H, T, X, Y, Z)` with the hash index `H` uniform over the
/// family, `Y` uniform, `X ~ key`, `T = h(Y)` and `Z = T ⊕ X`.
pub fn wegman_carter_joint(shape: HashFamilyShape, key: &BlockDistribution) -> Result<JointTable> {
    let (m, k) = (shape.m, shape.k);
    if key.k() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: key.k(),
        });
    }
    let cell_bits = shape.key_bits() + 3 * k + m;
    if cell_bits > MAX_JOINT_WORK.ilog2() as usize {
        return Err(Error::Capacity(format!(
            "joint over {} hash keys and 2^{m} messages needs 2^{cell_bits} cells",
            1u64 << shape.key_bits()
        )));
    }
    let family = (1u64 << shape.key_bits()) as f64;
    let py = 1.0 / (1u64 << m) as f64;
    let mut events = Vec::new();
    for (hi, h) in all_hash_functions(shape)?.enumerate() {
        for y in 0..1usize << m {
            let t = h.eval_word(y as u64) as usize;
            for (x, &px) in key.probabilities().iter().enumerate() {
                if px > 0.0 {
                    events.push((vec![hi, t, x, y, t ^ x], px * py / family));
                }
            }
        }
    }
    JointTable::from_events(
        &["H", "T", "X", "Y", "Z"],
        &[1 << shape.key_bits(), 1 << k, 1 << k, 1 << m, 1 << k],
        events,
    )
}

/// Law of `(X, Y, Z)` for the plain XOR cipher `Z = X ⊕ Y`, `Y` uniform.
pub fn xor_scheme_joint(key: &BlockDistribution) -> Result<JointTable> {
    let k = key.k();
    let n = 1usize << k;
    let events = key.probabilities().iter().enumerate().flat_map(|(x, &px)| {
        (0..n).map(move |y| (vec![x, y, x ^ y], px / n as f64))
    });
    JointTable::from_events(&["X", "Y", "Z"], &[n, n, n], events)
}

/// Result of checking `H(T|Y,Z) = I(T; X | Y, Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagEquivocation {
    pub report: BoundReport,
    pub tag_entropy: f64,
    /// `H(T|Y,Z) = H(T)`: the view reveals nothing about the tag.
    pub unconditionally_secure: bool,
}

/// Requires variables `T`, `Y`, `Z` and the secret-key variables `key`,
/// with `T` a function of `(key, Y)`.
pub fn tag_equivocation_identity(joint: &JointTable, key: &[&str]) -> Result<TagEquivocation> {
    for v in ["T", "Y", "Z"].iter().chain(key) {
        if !joint.contains(v) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
    }
    let given: Vec<&str> = key.iter().copied().chain(["Y"]).collect();
    let residual = joint.conditional_entropy(&["T"], &given)?;
    if residual > IDENTITY_TOLERANCE {
        return Err(Error::FunctionalDependence(format!(
            "H(T|{},Y) = {residual:e}; the tag is not determined by key and message",
            key.join(",")
        )));
    }
    let equivocation = joint.conditional_entropy(&["T"], &["Y", "Z"])?;
    let info = joint.mutual_information(&["T"], key, &["Y", "Z"])?;
    let tag_entropy = joint.entropy(&["T"])?;
    Ok(TagEquivocation {
        report: BoundReport::equality("tag_equivocation_identity", equivocation, info, Units::Bits, IDENTITY_TOLERANCE),
        tag_entropy,
        unconditionally_secure: (equivocation - tag_entropy).abs() <= IDENTITY_TOLERANCE,
    })
}

/// Exact law of `(T, X, Y, Z)` for the single-key quantum scheme: a fair key
/// `X` whose first `m+2k−1` bits pick the hash and last `k` bits the bases,
/// `Y` uniform, `T = h(Y)`, `Z` the outcome of `povm` on the tag qubits.
pub fn single_key_quantum_joint(shape: HashFamilyShape, povm: &Povm) -> Result<JointTable> {
    let (m, k) = (shape.m, shape.k);
    let hash_bits = shape.key_bits();
    let key_bits = hash_bits + k;
    if povm.dim() != 1 << k {
        return Err(Error::LengthMismatch {
            expected: 1 << k,
            actual: povm.dim(),
        });
    }
    let work = ((1u64 << key_bits) << m) * povm.outcomes() as u64;
    if key_bits > 20 || work > MAX_JOINT_WORK {
        return Err(Error::Capacity(format!("single-key joint needs {work} cells")));
    }
    let weight = 1.0 / ((1u64 << key_bits) << m) as f64;
    let mut events = Vec::with_capacity(work as usize);
    for x in 0..1u64 << key_bits {
        let key = BitBlock::from_u64(x, key_bits);
        let h = hash_from_key_bits(shape, &key.slice(0..hash_bits))?;
        let bases = key.slice(hash_bits..key_bits);
        for y in 0..1u64 << m {
            let tag = hash_eval(&h, &BitBlock::from_u64(y, m))?;
            let phi = encode_block(&bases, &tag)?;
            let t = tag.to_u64() as usize;
            for (z, e) in povm.effects().iter().enumerate() {
                events.push((vec![t, x as usize, y as usize, z], weight * effect_probability(e, &phi).max(0.0)));
            }
        }
    }
    let total: f64 = events.iter().map(|e| e.1).sum();
    JointTable::from_events(
        &["T", "X", "Y", "Z"],
        &[1 << k, 1 << key_bits, 1 << m, povm.outcomes()],
        events.into_iter().map(|(i, w)| (i, w / total)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{breidbart_measurement, fair_single_qubit_entropy, BREIDBART_ANGLE};

    fn s_star() -> f64 {
        fair_single_qubit_entropy()
    }

    #[test]
    fn holevo_floor_examples() {
        let r = holevo_floor(&BlockDistribution::uniform(1), &"0".parse().unwrap()).unwrap();
        assert!((r.value - (1.0 - s_star())).abs() < 1e-9);
        assert!((r.value - 0.3991).abs() < 1e-4);
        let r = holevo_floor(&BlockDistribution::uniform(3), &"101".parse().unwrap()).unwrap();
        assert!((r.value - 3.0 * (1.0 - s_star())).abs() < 1e-8);
        let r = holevo_floor(&BlockDistribution::point_mass(2, 3), &"01".parse().unwrap()).unwrap();
        assert!(r.value.abs() < 1e-9 && r.satisfied);
    }

    #[test]
    fn holevo_against_measurements() {
        let y: BitBlock = "0".parse().unwrap();
        let fair = BlockDistribution::uniform(1);
        let comp = verify_holevo_against_povm(&fair, &y, &Povm::computational(1)).unwrap();
        // X=0 → |0⟩ always gives Z=0; X=1 → |+⟩ gives a fair coin.
        let oracle = crate::quantum::binary_entropy(0.75) - 0.5;
        assert!((comp.value - oracle).abs() < 1e-12);
        assert!(comp.satisfied);
        let b = verify_holevo_against_povm(&fair, &y, &breidbart_measurement(BREIDBART_ANGLE)).unwrap();
        let c2 = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((b.value - (1.0 - crate::quantum::binary_entropy(c2))).abs() < 1e-9);
        assert!((b.slack - 0.2018).abs() < 1e-3);
        let t = verify_holevo_against_povm(&fair, &y, &Povm::trivial(1)).unwrap();
        assert!(t.value.abs() < 1e-12 && t.satisfied);
    }

    #[test]
    fn trace_distance_vs_bias_examples() {
        let y: BitBlock = "0".parse().unwrap();
        let r = proposition2_check(&BlockDistribution::uniform(1), &y).unwrap();
        assert!(r.value.abs() < 1e-12 && r.bound.abs() < 1e-12);
        let p = BlockDistribution::new(1, vec![0.3, 0.7]).unwrap();
        let r = proposition2_check(&p, &y).unwrap();
        assert!((r.bound - 0.2).abs() < 1e-12);
        // ρ − σ = −0.2|0⟩⟨0| + 0.2|+⟩⟨+|, eigenvalues ±0.2·sin(π/4).
        assert!((r.value - 0.2 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(r.satisfied);
    }

    #[test]
    fn continuity_bound_values() {
        assert_eq!(fannes_bound(0.0, 4).unwrap(), 0.0);
        assert!((fannes_bound(0.1, 4).unwrap() - 0.2 * 20f64.ln()).abs() < 1e-15);
        assert!(matches!(fannes_bound(0.2, 4), Err(Error::Range(_))));
        assert!((theorem2_bound(0.01, 4).unwrap() - 0.13369223455335855).abs() < 1e-12);
        assert_eq!(theorem2_bound(0.0, 4).unwrap(), 0.0);
        assert!(theorem2_bound(0.5, 4).is_err());
        let r = theorem2_check(&BlockDistribution::uniform(2), &"00".parse().unwrap(), 0.0).unwrap();
        assert!(r.value.abs() < 1e-9 && r.satisfied);
        let p = worst_case_bias_distribution(2, 0.1).unwrap();
        assert!(theorem2_check(&p, &"00".parse().unwrap(), 0.05).is_err());
    }

    #[test]
    fn block_length_values() {
        assert!((max_block_length(0.001, 0.1).unwrap() - 63.16896775978609).abs() < 1e-9);
        assert!((max_block_length_simple(0.01).unwrap() - 73.13475204444816).abs() < 1e-9);
        let c = block_length_comparison(0.01).unwrap();
        assert!(c.full_with_delta_eq_eps < 0.0 && c.simple > 0.0);
        assert!(max_block_length(0.0, 1.0).is_err());
        let p = worst_case_bias_distribution(3, 0.001).unwrap();
        assert!((max_block_length_bias(&p, 0.1).unwrap() - 63.16896775978609).abs() < 1e-6);
    }

    #[test]
    fn sweeps() {
        let rows = asymptotic_gap_sweep(BiasSchedule::Zero, BlockSchedule::Constant { k: 2 }, &[2, 4, 8]).unwrap();
        assert!(rows.iter().all(|r| r.gap_nats < 1e-9));
        let rows = asymptotic_gap_sweep(
            BiasSchedule::InversePower { exponent: 2.0 },
            BlockSchedule::Log2Capped { cap: 6 },
            &[4, 8, 16, 32, 64],
        )
        .unwrap();
        for w in rows.windows(2) {
            assert!(w[1].gap_nats < w[0].gap_nats);
        }
        assert!(rows.iter().all(|r| r.within_bound == Some(true)));
        let rows = asymptotic_gap_sweep(
            BiasSchedule::InversePower { exponent: 1.0 },
            BlockSchedule::Constant { k: 2 },
            &[4, 16, 64, 256],
        )
        .unwrap();
        assert!(rows.last().unwrap().gap_nats < rows[0].gap_nats / 10.0);
        assert!(asymptotic_gap_sweep(BiasSchedule::Zero, BlockSchedule::Constant { k: 11 }, &[2]).is_err());
    }

    #[test]
    fn one_time_pad_chain() {
        for (m, k) in [(2, 1), (3, 2)] {
            let shape = HashFamilyShape::new(m, k).unwrap();
            let c = wegman_carter_equivalence(shape, &BlockDistribution::uniform(k)).unwrap();
            assert!(c.equivalent, "{c:?}");
            assert!((c.tag_given_view - k as f64).abs() < 1e-10);
            assert!(c.key_given_tag_and_view.abs() < 1e-10);
        }
        let shape = HashFamilyShape::new(2, 1).unwrap();
        let c = wegman_carter_equivalence(shape, &BlockDistribution::point_mass(1, 0)).unwrap();
        assert!(!c.equivalent);
        assert!(c.tag_given_view.abs() < 1e-10);
        assert!((c.tag_given_message - 1.0).abs() < 1e-10);
    }

    #[test]
    fn xor_scheme_leaks_key_to_full_view() {
        let t = xor_scheme_joint(&BlockDistribution::uniform(1)).unwrap();
        assert!(t.conditional_entropy(&["X"], &["Y", "Z"]).unwrap().abs() < 1e-12);
        assert!((t.conditional_entropy(&["X"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tag_identity_instances() {
        // T = X ⊕ Y on single bits, Z independent noise.
        let independent = JointTable::from_events(
            &["T", "X", "Y", "Z"],
            &[2, 2, 2, 2],
            (0..8).map(|i| {
                let (x, y, z) = (i >> 2, (i >> 1) & 1, i & 1);
                (vec![x ^ y, x, y, z], 0.125)
            }),
        )
        .unwrap();
        let r = tag_equivocation_identity(&independent, &["X"]).unwrap();
        assert!(r.report.satisfied);
        assert!((r.report.value - 1.0).abs() < 1e-12 && r.unconditionally_secure);

        let leaked = JointTable::from_events(
            &["T", "X", "Y", "Z"],
            &[2, 2, 2, 2],
            (0..4).map(|i| {
                let (x, y) = (i >> 1, i & 1);
                (vec![x ^ y, x, y, x], 0.25)
            }),
        )
        .unwrap();
        let r = tag_equivocation_identity(&leaked, &["X"]).unwrap();
        assert!(r.report.satisfied && r.report.value.abs() < 1e-12);

        let not_functional = JointTable::from_events(
            &["T", "X", "Y", "Z"],
            &[2, 2, 2, 2],
            (0..2).map(|t| (vec![t, 0, 0, 0], 0.5)),
        )
        .unwrap();
        assert!(matches!(
            tag_equivocation_identity(&not_functional, &["X"]),
            Err(Error::FunctionalDependence(_))
        ));

        let shape = HashFamilyShape::new(2, 1).unwrap();
        let quantum = single_key_quantum_joint(shape, &breidbart_measurement(BREIDBART_ANGLE)).unwrap();
        let r = tag_equivocation_identity(&quantum, &["X"]).unwrap();
        assert!(r.report.satisfied, "{r:?}");
        // Under a fair basis the outcome law is the same for both tag values.
        assert!((r.report.value - 1.0).abs() < 1e-10 && r.unconditionally_secure);

        let wc = wegman_carter_joint(HashFamilyShape::new(3, 2).unwrap(), &BlockDistribution::uniform(2)).unwrap();
        let r = tag_equivocation_identity(&wc, &["H", "X"]).unwrap();
        assert!(r.report.satisfied && (r.report.value - 2.0).abs() < 1e-10);
        assert!(matches!(
            tag_equivocation_identity(&wc, &["X"]),
            Err(Error::FunctionalDependence(_))
        ));
    }
}
