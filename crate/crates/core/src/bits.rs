//! Ordered bit sequences used for keys, messages and tags.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An ordered, finite sequence of bits. Index 0 is the leftmost bit.
///
/// Integer conversions are big-endian: the leftmost bit is the most
/// significant one. Serialized as a string of `0`/`1` characters.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!("bit value {b} is not 0 or 1")));
        }
        Ok(BitBlock(bits))
    }

    pub fn zeros(len: usize) -> Self {
        BitBlock(vec![0; len])
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        BitBlock(bits.into_iter().map(u8::from).collect())
    }

    /// Big-endian `len`-bit expansion of `value`. Bits above `len` are dropped.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "BitBlock::from_u64 supports at most 64 bits");
        BitBlock((0..len).map(|i| ((value >> (len - 1 - i)) & 1) as u8).collect())
    }

    /// Big-endian integer value. Panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.0.len() <= 64, "BitBlock::to_u64 supports at most 64 bits");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.0.get(i).copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(u8::from(bit));
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn slice(&self, range: Range<usize>) -> BitBlock {
        BitBlock(self.0[range].to_vec())
    }

    pub fn concat(&self, other: &BitBlock) -> BitBlock {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        BitBlock(bits)
    }

    pub fn extend(&mut self, other: &BitBlock) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(BitBlock(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBlock({self})")
    }
}

impl FromStr for BitBlock {
    type Err = Error;

    /// Parses `0`/`1` characters; spaces and underscores are ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !matches!(c, ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitBlock)
    }
}

impl Serialize for BitBlock {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitBlock {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_binary_values() {
        assert!(BitBlock::new(vec![0, 1, 2]).is_err());
        assert!("01x".parse::<BitBlock>().is_err());
    }

    #[test]
    fn big_endian_conversions() {
        let b = BitBlock::from_u64(182, 8);
        assert_eq!(b.to_string(), "10110110");
        assert_eq!(b.to_u64(), 182);
        assert_eq!("0000 0011".parse::<BitBlock>().unwrap().to_u64(), 3);
    }

    #[test]
    fn xor_requires_equal_lengths() {
        let a: BitBlock = "1100".parse().unwrap();
        let b: BitBlock = "1010".parse().unwrap();
        assert_eq!(a.xor(&b).unwrap().to_string(), "0110");
        assert!(a.xor(&BitBlock::zeros(3)).is_err());
    }

    #[test]
    fn serde_as_string() {
        let b: BitBlock = "101".parse().unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, "\"101\"");
        assert_eq!(serde_json::from_str::<BitBlock>(&json).unwrap(), b);
    }
}
