//! Conjugate coding of tag bits, density operators, measurements,
//! entropies and trace distance.
//!
//! Qubit ordering: the leftmost bit of a block is the most significant
//! tensor factor, so basis index `j` of a `k`-qubit register reads its bits
//! big-endian.

pub mod linalg;

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitBlock;
use crate::bitsource::BlockDistribution;
use crate::error::{Error, Result};
pub use linalg::{hermitian_eigen, CMatrix, HermitianEigen};

/// Largest register handled by the dense routines.
pub const MAX_QUBITS: usize = 10;
pub const STATE_TOLERANCE: f64 = 1e-10;
/// Eigenvalues in `[−CLIP_TOLERANCE, 0)` are rounding noise and clip to 0.
pub const CLIP_TOLERANCE: f64 = 1e-10;
/// The measurement angle that best separates the two encodings of a bit.
pub const BREIDBART_ANGLE: f64 = -PI / 8.0;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_qubits(q: usize) -> Result<()> {
    if q > MAX_QUBITS {
        return Err(Error::Capacity(format!("{q} qubits exceed the {MAX_QUBITS}-qubit limit")));
    }
    Ok(())
}

/// Unit vector in `C^{2^q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("state dimension {n} is not a power of two")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::Invariant(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { amplitudes })
    }

    pub fn basis(q: usize, index: usize) -> Self {
        let mut amplitudes = vec![c(0.0); 1 << q];
        amplitudes[index] = c(1.0);
        PureState { amplitudes }
    }

    pub fn qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        PureState { amplitudes }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: CMatrix::outer(&self.amplitudes),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Serialized as an array of `[re, im]` amplitudes.
impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = self.amplitudes.iter().map(|a| [a.re, a.im]).collect();
        v.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(deserializer)?;
        PureState::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
///
/// Hermiticity and trace are checked on construction; positivity is checked
/// whenever the spectrum is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CMatrix", into = "CMatrix")]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl TryFrom<CMatrix> for DensityMatrix {
    type Error = Error;
    fn try_from(m: CMatrix) -> Result<Self> {
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for CMatrix {
    fn from(d: DensityMatrix) -> CMatrix {
        d.matrix
    }
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.dim().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "density matrix dimension {} is not a power of two",
                matrix.dim()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOLERANCE {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidTrace(tr.re));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(q: usize) -> Self {
        let n = 1 << q;
        DensityMatrix {
            matrix: CMatrix::identity(n).scale(1.0 / n as f64),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kron(&other.matrix),
        }
    }
}

/// Measurement effects indexed by outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;

    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidArgument("a POVM needs at least one effect".into()))?;
        let n = first.dim();
        let mut sum = CMatrix::zeros(n);
        for (i, e) in effects.iter().enumerate() {
            if e.dim() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: e.dim(),
                });
            }
            let eig = hermitian_eigen(e, false)?;
            let min = eig.values.last().copied().unwrap_or(0.0);
            if min < -Self::COMPLETENESS_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "effect {i} is not positive semidefinite (eigenvalue {min:e})"
                )));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(n));
        if dev > Self::COMPLETENESS_TOLERANCE {
            return Err(Error::Invariant(format!("effects sum to identity only within {dev:e}")));
        }
        Ok(Povm { effects })
    }

    /// Projective measurement onto an orthonormal basis given as states.
    pub fn from_basis(states: &[PureState]) -> Result<Self> {
        Self::new(states.iter().map(|s| CMatrix::outer(s.amplitudes())).collect())
    }

    pub fn computational(q: usize) -> Self {
        let n = 1 << q;
        Povm {
            effects: (0..n).map(|i| CMatrix::outer(PureState::basis(q, i).amplitudes())).collect(),
        }
    }

    pub fn trivial(q: usize) -> Self {
        Povm {
            effects: vec![CMatrix::identity(1 << q)],
        }
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    /// Outcome-wise tensor product; outcome `(i, j)` maps to `i·|other| + j`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        Povm {
            effects: self
                .effects
                .iter()
                .flat_map(|a| other.effects.iter().map(move |b| a.kron(b)))
                .collect(),
        }
    }
}

/// Eigenvalues of a density matrix, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Shannon entropy of the (clipped) eigenvalues, in bits.
    pub fn entropy_bits(&self) -> f64 {
        -self
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l * l.log2())
            .sum::<f64>()
    }
}

/// Conjugate coding of one tag bit `t` in the basis selected by key bit `x`:
/// `x = 0` → `{|0⟩, |1⟩}`, `x = 1` → `{|+⟩, |−⟩}`.
pub fn encode_qubit(x: u8, t: u8) -> PureState {
    let h = FRAC_1_SQRT_2;
    let amplitudes = match (x & 1, t & 1) {
        (0, 0) => [c(1.0), c(0.0)],
        (0, _) => [c(0.0), c(1.0)],
        (_, 0) => [c(h), c(h)],
        (_, _) => [c(h), c(-h)],
    };
    PureState {
        amplitudes: amplitudes.to_vec(),
    }
}

pub fn encode_block(x_block: &BitBlock, t_block: &BitBlock) -> Result<PureState> {
    if x_block.len() != t_block.len() {
        return Err(Error::LengthMismatch {
            expected: x_block.len(),
            actual: t_block.len(),
        });
    }
    check_qubits(x_block.len())?;
    Ok(x_block
        .iter()
        .zip(t_block.iter())
        .map(|(x, t)| encode_qubit(x, t))
        .fold(PureState::basis(0, 0), |acc, q| acc.tensor(&q)))
}

/// Result of a qubit-by-qubit projective measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisMeasurement {
    pub outcomes: BitBlock,
    /// Per qubit: the observed outcome had probability 1.
    pub certain: Vec<bool>,
}

/// Measures each qubit in turn, `0` → computational, `1` → diagonal basis.
/// The state collapses after every qubit.
pub fn measure_in_bases<R: Rng + ?Sized>(
    state: &PureState,
    basis_bits: &BitBlock,
    rng: &mut R,
) -> Result<BasisMeasurement> {
    let q = state.qubits();
    if basis_bits.len() != q {
        return Err(Error::LengthMismatch {
            expected: q,
            actual: basis_bits.len(),
        });
    }
    let mut amps = state.amplitudes.clone();
    let n = amps.len();
    let mut outcomes = BitBlock::default();
    let mut certain = Vec::with_capacity(q);
    for (i, basis) in basis_bits.iter().enumerate() {
        let mask = 1usize << (q - 1 - i);
        if basis == 1 {
            apply_hadamard(&mut amps, mask);
        }
        let p1: f64 = (0..n).filter(|j| j & mask != 0).map(|j| amps[j].norm_sqr()).sum();
        let p1 = p1.clamp(0.0, 1.0);
        let bit = rng.random::<f64>() < p1;
        let p_bit = if bit { p1 } else { 1.0 - p1 };
        let scale = 1.0 / p_bit.sqrt();
        for (j, a) in amps.iter_mut().enumerate() {
            if (j & mask != 0) == bit {
                *a *= scale;
            } else {
                *a = c(0.0);
            }
        }
        if basis == 1 {
            apply_hadamard(&mut amps, mask);
        }
        outcomes.push(bit);
        certain.push(p_bit > 1.0 - 1e-12);
    }
    Ok(BasisMeasurement { outcomes, certain })
}

fn apply_hadamard(amps: &mut [Complex64], mask: usize) {
    let h = FRAC_1_SQRT_2;
    for j in 0..amps.len() {
        if j & mask == 0 {
            let (a, b) = (amps[j], amps[j | mask]);
            amps[j] = (a + b) * h;
            amps[j | mask] = (a - b) * h;
        }
    }
}

/// `p_0|φ_0(y)⟩⟨φ_0(y)| + p_1|φ_1(y)⟩⟨φ_1(y)|` with `|φ_x(y)⟩` the encoding
/// of tag bit `y` in basis `x`.
pub fn density_for_message(y: u8, p: &BlockDistribution) -> Result<DensityMatrix> {
    if p.k() != 1 {
        return Err(Error::LengthMismatch {
            expected: 1,
            actual: p.k(),
        });
    }
    density_for_block(&BitBlock::from_u64(y as u64 & 1, 1), p)
}

/// `ρ_{Y^k} = Σ_j p_j |φ_j⟩⟨φ_j|`, `|φ_j⟩ = ⊗_i |φ_{j_i}(Y_i)⟩`.
pub fn density_for_block(y_block: &BitBlock, p: &BlockDistribution) -> Result<DensityMatrix> {
    let k = y_block.len();
    check_qubits(k)?;
    if p.k() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: p.k(),
        });
    }
    let mut matrix = CMatrix::zeros(1 << k);
    for (j, &pj) in p.probabilities().iter().enumerate() {
        if pj == 0.0 {
            continue;
        }
        let phi = encode_block(&BitBlock::from_u64(j as u64, k), y_block)?;
        matrix.add_outer(pj, phi.amplitudes());
    }
    Ok(DensityMatrix { matrix })
}

pub fn spectrum(rho: &DensityMatrix) -> Result<Spectrum> {
    let eig = hermitian_eigen(&rho.matrix, false)?;
    let mut eigenvalues = eig.values;
    for l in &mut eigenvalues {
        if *l < 0.0 {
            if *l < -CLIP_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "density matrix has eigenvalue {l:e} below −{CLIP_TOLERANCE:e}"
                )));
            }
            *l = 0.0;
        }
    }
    Ok(Spectrum { eigenvalues })
}

/// `S(ρ) = −Σ λ log2 λ`, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(spectrum(rho)?.entropy_bits())
}

pub fn von_neumann_entropy_nats(rho: &DensityMatrix) -> Result<f64> {
    Ok(von_neumann_entropy(rho)? * LN_2)
}

/// `½ tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::LengthMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let diff = &rho.matrix - &sigma.matrix;
    let eig = hermitian_eigen(&diff, false)?;
    Ok(0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Projectors onto `ψ_θ = cosθ|0⟩ + sinθ|1⟩` (outcome 0) and
/// `ψ⊥_θ = sinθ|0⟩ − cosθ|1⟩` (outcome 1).
pub fn breidbart_measurement(theta: f64) -> Povm {
    let psi = [c(theta.cos()), c(theta.sin())];
    let perp = [c(theta.sin()), c(-theta.cos())];
    Povm {
        effects: vec![CMatrix::outer(&psi), CMatrix::outer(&perp)],
    }
}

/// Outcome probabilities `tr(E_m ρ)`.
pub fn apply_povm(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::LengthMismatch {
            expected: povm.dim(),
            actual: rho.dim(),
        });
    }
    let probs: Vec<f64> = povm.effects.iter().map(|e| trace_of_product(e, &rho.matrix)).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > Povm::COMPLETENESS_TOLERANCE {
        return Err(Error::Invariant(format!("outcome probabilities sum to {total}")));
    }
    Ok(probs)
}

/// `⟨ψ|E|ψ⟩` for a pure state.
pub fn effect_probability(effect: &CMatrix, state: &PureState) -> f64 {
    let n = effect.dim();
    let a = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let row: Complex64 = (0..n).map(|j| effect[(i, j)] * a[j]).sum();
        acc += a[i].conj() * row;
    }
    acc.re
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

/// `H₂(p) = −p log2 p − (1−p) log2(1−p)`.
pub fn binary_entropy(p: f64) -> f64 {
    crate::bounds::shannon_entropy(&[p, 1.0 - p])
}

/// `S(ρ(Y))` for fair weights:
/// `−2cos²(π/8)·log2 cos(π/8) − 2sin²(π/8)·log2 sin(π/8)`.
pub fn fair_single_qubit_entropy() -> f64 {
    let (s, c) = (PI / 8.0).sin_cos();
    -2.0 * c * c * c.log2() - 2.0 * s * s * s.log2()
}

fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut g = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    g
}

/// Random `outcomes`-element POVM on `q` qubits: `E_i = S^{−1/2} A_i S^{−1/2}`
/// with `A_i = G_i G_i†` for complex Gaussian `G_i` and `S = Σ A_i`.
pub fn random_povm<R: Rng + ?Sized>(q: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    check_qubits(q)?;
    if outcomes == 0 {
        return Err(Error::InvalidArgument("a POVM needs at least one outcome".into()));
    }
    let n = 1 << q;
    let parts: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = gaussian_matrix(n, rng);
            &g * &g.adjoint()
        })
        .collect();
    let sum = parts.iter().fold(CMatrix::zeros(n), |acc, a| &acc + a);
    let inv_sqrt = linalg::hermitian_function(&sum, |x| 1.0 / x.max(1e-300).sqrt())?;
    let effects = parts.iter().map(|a| &(&inv_sqrt * a) * &inv_sqrt).map(symmetrized).collect();
    Povm::new(effects)
}

fn symmetrized(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (&m + &adj).scale(0.5)
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_qubits(q)?;
    let g = gaussian_matrix(1 << q, rng);
    let a = symmetrized(&g * &g.adjoint());
    let tr = a.trace().re;
    DensityMatrix::new(a.scale(1.0 / tr))
}
