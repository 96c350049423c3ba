//! Toeplitz-affine hashing over GF(2), a strongly universal-2 family, with
//! exhaustive checks of both ε-ASU2 conditions at small sizes.
//!
//! A member maps an `m`-bit message to a `k`-bit tag as
//! `T = M·Y ⊕ offset`, where `M` is the `k×m` Toeplitz matrix whose entry
//! `(r, c)` is `diagonals[r − c + m − 1]`. A member is selected by
//! `m + 2k − 1` key bits: the `m + k − 1` diagonals followed by the `k`
//! offset bits, so `|H| = 2^{m+2k−1}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitBlock;
use crate::error::{Error, Result};

/// Largest key length `m + 2k − 1` the verification routines enumerate.
pub const MAX_ENUMERATED_KEY_BITS: usize = 24;
/// Work limit, in (function, message[, message]) visits, for verification.
pub const MAX_VERIFICATION_WORK: u128 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashFamilyShape {
    pub m: usize,
    pub k: usize,
}

impl HashFamilyShape {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if k < 1 || m < k {
            return Err(Error::InvalidArgument(format!(
                "hash shape requires m ≥ k ≥ 1, got m={m}, k={k}"
            )));
        }
        if m + 2 * k - 1 > 64 {
            return Err(Error::Capacity(format!(
                "hash key of {} bits exceeds 64",
                m + 2 * k - 1
            )));
        }
        Ok(HashFamilyShape { m, k })
    }

    /// `l = log2 |H| = m + 2k − 1`.
    pub fn key_bits(&self) -> usize {
        self.m + 2 * self.k - 1
    }

    pub fn diagonal_bits(&self) -> usize {
        self.m + self.k - 1
    }

    /// `log2 |H|`; equals [`Self::key_bits`] since `|H|` is a power of two.
    pub fn log2_family_size(&self) -> usize {
        self.key_bits()
    }

    pub fn hex_digits(&self) -> usize {
        self.key_bits().div_ceil(4)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HashFunction {
    shape: HashFamilyShape,
    diagonals: BitBlock,
    offset: BitBlock,
}

impl HashFunction {
    pub fn new(shape: HashFamilyShape, diagonals: BitBlock, offset: BitBlock) -> Result<Self> {
        if diagonals.len() != shape.diagonal_bits() {
            return Err(Error::LengthMismatch {
                expected: shape.diagonal_bits(),
                actual: diagonals.len(),
            });
        }
        if offset.len() != shape.k {
            return Err(Error::LengthMismatch {
                expected: shape.k,
                actual: offset.len(),
            });
        }
        Ok(HashFunction {
            shape,
            diagonals,
            offset,
        })
    }

    pub fn shape(&self) -> HashFamilyShape {
        self.shape
    }

    pub fn diagonals(&self) -> &BitBlock {
        &self.diagonals
    }

    pub fn offset(&self) -> &BitBlock {
        &self.offset
    }

    /// `diagonals ‖ offset`.
    pub fn key_bits(&self) -> BitBlock {
        self.diagonals.concat(&self.offset)
    }

    /// Hex encoding of `diagonals ‖ offset` read as a big-endian integer,
    /// left-padded to `⌈(m + 2k − 1)/4⌉` digits.
    pub fn to_hex(&self) -> String {
        format!(
            "{:0width$x}",
            self.key_bits().to_u64(),
            width = self.shape.hex_digits()
        )
    }

    pub fn from_hex(shape: HashFamilyShape, hex: &str) -> Result<Self> {
        if hex.len() != shape.hex_digits() {
            return Err(Error::LengthMismatch {
                expected: shape.hex_digits(),
                actual: hex.len(),
            });
        }
        let value = u64::from_str_radix(hex, 16)
            .map_err(|e| Error::InvalidArgument(format!("bad hash key hex {hex:?}: {e}")))?;
        let bits = shape.key_bits();
        if bits < 64 && value >> bits != 0 {
            return Err(Error::InvalidArgument(format!(
                "hash key hex {hex:?} has bits set above position {bits}"
            )));
        }
        hash_from_key_bits(shape, &BitBlock::from_u64(value, bits))
    }

    /// Word-level evaluation used by the enumerators; see [`KeyedToeplitz`].
    fn words(&self) -> KeyedToeplitz {
        KeyedToeplitz::new(self.shape, self.key_bits().to_u64())
    }
}

impl Serialize for HashFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            m: usize,
            k: usize,
            key: String,
        }
        Repr {
            m: self.shape.m,
            k: self.shape.k,
            key: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HashFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            m: usize,
            k: usize,
            key: String,
        }
        let r = Repr::deserialize(deserializer)?;
        let shape = HashFamilyShape::new(r.m, r.k).map_err(serde::de::Error::custom)?;
        HashFunction::from_hex(shape, &r.key).map_err(serde::de::Error::custom)
    }
}

/// Row masks of the Toeplitz matrix packed as words, for fast enumeration.
#[derive(Debug, Clone)]
struct KeyedToeplitz {
    rows: Vec<u64>,
    offset: u64,
    k: usize,
}

impl KeyedToeplitz {
    fn new(shape: HashFamilyShape, key: u64) -> Self {
        let HashFamilyShape { m, k } = shape;
        let diag_bits = m + k - 1;
        let diag_word = key >> k;
        let offset = key & ((1u64 << k) - 1);
        // diagonals[i] sits at bit (diag_bits − 1 − i) of diag_word; message
        // bit c sits at bit (m − 1 − c) of the message word.
        let rows = (0..k)
            .map(|r| {
                (0..m).fold(0u64, |row, c| {
                    let i = r + m - 1 - c;
                    let d = (diag_word >> (diag_bits - 1 - i)) & 1;
                    row | (d << (m - 1 - c))
                })
            })
            .collect();
        KeyedToeplitz { rows, offset, k }
    }

    fn eval(&self, message: u64) -> u64 {
        let product = self.rows.iter().fold(0u64, |acc, &row| {
            (acc << 1) | u64::from((row & message).count_ones() & 1)
        });
        debug_assert!(product < 1 << self.k);
        product ^ self.offset
    }
}

/// `T = M_h·message ⊕ offset` over GF(2).
pub fn hash_eval(h: &HashFunction, message: &BitBlock) -> Result<BitBlock> {
    let HashFamilyShape { m, k } = h.shape;
    if message.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: message.len(),
        });
    }
    let tag = (0..k).map(|r| {
        let dot = (0..m).fold(0u8, |acc, c| {
            acc ^ (h.diagonals.bits()[r + m - 1 - c] & message.bits()[c])
        });
        dot ^ h.offset.bits()[r] == 1
    });
    Ok(BitBlock::from_bools(tag))
}

/// Splits `key_bits` into diagonals (first `m + k − 1`) and offset (last `k`).
pub fn hash_from_key_bits(shape: HashFamilyShape, key_bits: &BitBlock) -> Result<HashFunction> {
    if key_bits.len() != shape.key_bits() {
        return Err(Error::LengthMismatch {
            expected: shape.key_bits(),
            actual: key_bits.len(),
        });
    }
    let d = shape.diagonal_bits();
    HashFunction::new(
        shape,
        key_bits.slice(0..d),
        key_bits.slice(d..shape.key_bits()),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition1Report {
    pub holds: bool,
    pub family_size: u64,
    pub expected_count: u64,
    pub min_count: u64,
    pub max_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition2Report {
    /// Largest observed fraction; the family is ε-ASU2 for any ε ≥ this.
    pub epsilon: f64,
    pub message_pairs: u64,
}

fn check_enumerable(shape: HashFamilyShape, pair_work: bool) -> Result<()> {
    if shape.key_bits() > MAX_ENUMERATED_KEY_BITS {
        return Err(Error::Capacity(format!(
            "family of 2^{} functions exceeds the 2^{MAX_ENUMERATED_KEY_BITS} enumeration limit",
            shape.key_bits()
        )));
    }
    let messages = 1u128 << shape.m;
    let work = (1u128 << shape.key_bits()) * if pair_work { messages * messages } else { messages };
    if work > MAX_VERIFICATION_WORK {
        return Err(Error::Capacity(format!(
            "verification needs {work} evaluations, limit {MAX_VERIFICATION_WORK}"
        )));
    }
    Ok(())
}

/// Tag of every (function, message) pair, indexed `[key][message]`.
fn tag_table(shape: HashFamilyShape) -> Vec<u32> {
    let messages = 1usize << shape.m;
    let functions = 1u64 << shape.key_bits();
    let mut table = Vec::with_capacity(functions as usize * messages);
    for key in 0..functions {
        let h = KeyedToeplitz::new(shape, key);
        table.extend((0..messages as u64).map(|y| h.eval(y) as u32));
    }
    table
}

/// Condition 1: every message reaches every tag under exactly `|H|/|T|` members.
pub fn verify_condition1(shape: HashFamilyShape) -> Result<Condition1Report> {
    check_enumerable(shape, false)?;
    let messages = 1usize << shape.m;
    let tags = 1usize << shape.k;
    let table = tag_table(shape);
    let mut counts = vec![0u64; messages * tags];
    for row in table.chunks_exact(messages) {
        for (y, &t) in row.iter().enumerate() {
            counts[y * tags + t as usize] += 1;
        }
    }
    let family_size = 1u64 << shape.key_bits();
    let expected_count = family_size / tags as u64;
    let min_count = *counts.iter().min().unwrap_or(&0);
    let max_count = *counts.iter().max().unwrap_or(&0);
    Ok(Condition1Report {
        holds: min_count == expected_count && max_count == expected_count,
        family_size,
        expected_count,
        min_count,
        max_count,
    })
}

/// Condition 2: the largest fraction, over `Y ≠ Y′` and tags `(T, T′)`, of
/// members taking `Y → T` that also take `Y′ → T′`.
pub fn verify_condition2(shape: HashFamilyShape) -> Result<Condition2Report> {
    check_enumerable(shape, true)?;
    let messages = 1usize << shape.m;
    let tags = 1usize << shape.k;
    let table = tag_table(shape);
    let mut single = vec![0u64; tags];
    let mut joint = vec![0u64; tags * tags];
    let mut epsilon = 0.0f64;
    let mut pairs = 0u64;
    for y in 0..messages {
        for y2 in (0..messages).filter(|&y2| y2 != y) {
            single.iter_mut().for_each(|c| *c = 0);
            joint.iter_mut().for_each(|c| *c = 0);
            for row in table.chunks_exact(messages) {
                let (t, t2) = (row[y] as usize, row[y2] as usize);
                single[t] += 1;
                joint[t * tags + t2] += 1;
            }
            for t in 0..tags {
                if single[t] == 0 {
                    continue;
                }
                for t2 in 0..tags {
                    epsilon = epsilon.max(joint[t * tags + t2] as f64 / single[t] as f64);
                }
            }
            pairs += 1;
        }
    }
    Ok(Condition2Report {
        epsilon,
        message_pairs: pairs,
    })
}

/// Enumerates every member of the family.
pub fn all_hash_functions(shape: HashFamilyShape) -> Result<impl Iterator<Item = HashFunction>> {
    if shape.key_bits() > MAX_ENUMERATED_KEY_BITS {
        return Err(Error::Capacity(format!(
            "family of 2^{} functions exceeds the enumeration limit",
            shape.key_bits()
        )));
    }
    let bits = shape.key_bits();
    Ok((0..1u64 << bits).map(move |key| {
        hash_from_key_bits(shape, &BitBlock::from_u64(key, bits)).expect("key length matches shape")
    }))
}

impl HashFunction {
    /// Same result as [`hash_eval`] via the packed-word route.
    pub fn eval_word(&self, message: u64) -> u64 {
        self.words().eval(message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(m: usize, k: usize) -> HashFamilyShape {
        HashFamilyShape::new(m, k).unwrap()
    }

    fn bits(s: &str) -> BitBlock {
        s.parse().unwrap()
    }

    /// Independent oracle: build the Toeplitz matrix explicitly as rows of
    /// bits, multiply over GF(2), add the offset.
    fn oracle_eval(m: usize, k: usize, diagonals: &[u8], offset: &[u8], msg: &[u8]) -> Vec<u8> {
        let mut matrix = vec![vec![0u8; m]; k];
        for (r, row) in matrix.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = diagonals[(r + m - 1) - c];
            }
        }
        matrix
            .iter()
            .zip(offset)
            .map(|(row, o)| (row.iter().zip(msg).map(|(a, b)| a * b).sum::<u8>() % 2) ^ o)
            .collect()
    }

    #[test]
    fn zero_map_and_offset_only() {
        let s = shape(3, 2);
        let zero = HashFunction::new(s, BitBlock::zeros(4), BitBlock::zeros(2)).unwrap();
        for y in 0..8 {
            assert_eq!(hash_eval(&zero, &BitBlock::from_u64(y, 3)).unwrap(), BitBlock::zeros(2));
        }
        let off = HashFunction::new(s, bits("0000"), bits("10")).unwrap();
        assert_eq!(hash_eval(&off, &bits("111")).unwrap(), bits("10"));
    }

    #[test]
    fn matches_explicit_matrix_oracle() {
        let s = shape(3, 2);
        let h = HashFunction::new(s, bits("1011"), bits("00")).unwrap();
        let expected = oracle_eval(3, 2, &[1, 0, 1, 1], &[0, 0], &[1, 0, 1]);
        assert_eq!(expected, vec![0, 1]);
        assert_eq!(hash_eval(&h, &bits("101")).unwrap().bits(), expected.as_slice());
    }

    #[test]
    fn word_route_agrees_with_bit_route_exhaustively() {
        for (m, k) in [(1, 1), (2, 1), (3, 2), (4, 2), (4, 3)] {
            let s = shape(m, k);
            for h in all_hash_functions(s).unwrap() {
                for y in 0..1u64 << m {
                    let msg = BitBlock::from_u64(y, m);
                    let slow = hash_eval(&h, &msg).unwrap();
                    let oracle = oracle_eval(m, k, h.diagonals().bits(), h.offset().bits(), msg.bits());
                    assert_eq!(slow.bits(), oracle.as_slice());
                    assert_eq!(h.eval_word(y), slow.to_u64());
                }
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let h = HashFunction::new(shape(3, 2), BitBlock::zeros(4), BitBlock::zeros(2)).unwrap();
        assert!(matches!(hash_eval(&h, &bits("10")), Err(Error::LengthMismatch { .. })));
        assert!(HashFunction::new(shape(3, 2), BitBlock::zeros(3), BitBlock::zeros(2)).is_err());
        assert!(hash_from_key_bits(shape(3, 2), &BitBlock::zeros(5)).is_err());
    }

    #[test]
    fn condition1_examples() {
        let r = verify_condition1(shape(3, 2)).unwrap();
        assert!(r.holds);
        assert_eq!((r.family_size, r.expected_count), (64, 16));
        let r = verify_condition1(shape(2, 2)).unwrap();
        assert!(r.holds);
        assert_eq!(r.expected_count, 8);
        let r = verify_condition1(shape(1, 1)).unwrap();
        assert!(r.holds);
        assert_eq!((r.family_size, r.expected_count), (4, 2));
    }

    #[test]
    fn condition2_examples() {
        assert_eq!(verify_condition2(shape(3, 2)).unwrap().epsilon, 0.25);
        assert_eq!(verify_condition2(shape(2, 1)).unwrap().epsilon, 0.5);
        assert_eq!(verify_condition2(shape(4, 2)).unwrap().epsilon, 0.25);
    }

    #[test]
    fn capacity_errors() {
        assert!(matches!(verify_condition1(shape(20, 3)), Err(Error::Capacity(_))));
        assert!(matches!(verify_condition2(shape(12, 4)), Err(Error::Capacity(_))));
    }

    #[test]
    fn key_bits_split_and_injective() {
        let s = shape(3, 2);
        let h = hash_from_key_bits(s, &BitBlock::zeros(6)).unwrap();
        assert_eq!(h, HashFunction::new(s, BitBlock::zeros(4), BitBlock::zeros(2)).unwrap());
        let key = bits("101101");
        let h = hash_from_key_bits(s, &key).unwrap();
        assert_eq!(h.diagonals(), &bits("1011"));
        assert_eq!(h.offset(), &bits("01"));
        assert_eq!(h.key_bits(), key);

        let s = shape(2, 1);
        let all: Vec<_> = all_hash_functions(s).unwrap().collect();
        let distinct: std::collections::HashSet<_> =
            all.iter().map(|h| (h.diagonals().clone(), h.offset().clone())).collect();
        assert_eq!(distinct.len(), all.len());
        assert_eq!(all.len(), 1 << s.key_bits());
    }

    #[test]
    fn hex_round_trip() {
        let s = shape(3, 2);
        let h = hash_from_key_bits(s, &bits("101101")).unwrap();
        assert_eq!(h.to_hex(), "2d");
        assert_eq!(HashFunction::from_hex(s, "2d").unwrap(), h);
        assert!(HashFunction::from_hex(s, "7f").is_err());
        assert!(HashFunction::from_hex(s, "02d").is_err());
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"m":3,"k":2,"key":"2d"}"#);
        assert_eq!(serde_json::from_str::<HashFunction>(&json).unwrap(), h);
    }

    #[test]
    fn shape_validation() {
        assert!(HashFamilyShape::new(1, 2).is_err());
        assert!(HashFamilyShape::new(3, 0).is_err());
    }
}
