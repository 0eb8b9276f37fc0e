//! Ordered bit sequences.
//!
//! All bit-to-integer conversions in this crate are big-endian: the first bit
//! of a sequence is the most significant bit of the integer it encodes.

use std::fmt;

use crate::error::{Result, SkgError};

/// An ordered sequence of bits.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSeq {
    bits: Vec<bool>,
}

impl BitSeq {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSeq { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitSeq {
            bits: vec![false; len],
        }
    }

    /// Big-endian encoding of the low `width` bits of `value`.
    pub fn from_u64(value: u64, width: usize) -> Self {
        assert!(width <= 64, "width {width} exceeds 64 bits");
        let bits = (0..width)
            .rev()
            .map(|shift| (value >> shift) & 1 == 1)
            .collect();
        BitSeq { bits }
    }

    /// Parses a string of `'0'` and `'1'` characters.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(SkgError::Precondition(format!(
                    "invalid bit character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitSeq::new)
    }

    /// Unpacks bytes most-significant bit first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let bits = bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |shift| (b >> shift) & 1 == 1))
            .collect();
        BitSeq { bits }
    }

    /// Packs bits most-significant first; a trailing partial byte is zero padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
            })
            .collect()
    }

    /// Big-endian integer value. Fails for sequences longer than 64 bits.
    pub fn to_u64(&self) -> Result<u64> {
        if self.bits.len() > 64 {
            return Err(SkgError::Precondition(format!(
                "{} bits do not fit in a 64-bit integer",
                self.bits.len()
            )));
        }
        Ok(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.bits.get(index).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitSeq) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn flip(&mut self, index: usize) {
        self.bits[index] = !self.bits[index];
    }

    /// Bitwise complement.
    pub fn not(&self) -> BitSeq {
        BitSeq {
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn xor(&self, other: &BitSeq) -> Result<BitSeq> {
        check_len(self.len(), other.len())?;
        Ok(BitSeq {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a ^ b)
                .collect(),
        })
    }

    pub fn hamming(&self, other: &BitSeq) -> Result<usize> {
        check_len(self.len(), other.len())?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Splits into `parts` consecutive pieces of equal length.
    pub fn split_equal(&self, parts: usize) -> Result<Vec<BitSeq>> {
        if parts == 0 || !self.len().is_multiple_of(parts) {
            return Err(SkgError::Precondition(format!(
                "{} bits cannot be split into {parts} equal parts",
                self.len()
            )));
        }
        let width = self.len() / parts;
        Ok(self
            .bits
            .chunks(width)
            .map(|chunk| BitSeq::new(chunk.to_vec()))
            .collect())
    }

    pub fn concat(parts: &[BitSeq]) -> BitSeq {
        BitSeq {
            bits: parts.iter().flat_map(|p| p.bits.iter().copied()).collect(),
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(SkgError::LengthMismatch { expected, found });
    }
    Ok(())
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSeq({self})")
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitSeq::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};

    #[test]
    fn big_endian_conversion() {
        let b = BitSeq::from_u64(5, 4);
        assert_eq!(b.to_string(), "0101");
        assert_eq!(b.to_u64().unwrap(), 5);
    }

    #[test]
    fn xor_rejects_length_mismatch() {
        let a = BitSeq::zeros(4);
        let b = BitSeq::zeros(5);
        assert!(matches!(
            a.xor(&b),
            Err(SkgError::LengthMismatch {
                expected: 4,
                found: 5
            })
        ));
    }

    #[test]
    fn split_requires_divisibility() {
        assert!(BitSeq::zeros(10).split_equal(3).is_err());
        let parts = BitSeq::parse("110010").unwrap().split_equal(3).unwrap();
        assert_eq!(parts[2].to_string(), "10");
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            prop_assert_eq!(BitSeq::from_bytes(&bytes).to_bytes(), bytes);
        }

        #[test]
        fn u64_round_trip(value in any::<u64>(), width in 1usize..=64) {
            let masked = if width == 64 { value } else { value & ((1u64 << width) - 1) };
            prop_assert_eq!(BitSeq::from_u64(value, width).to_u64().unwrap(), masked);
        }
    }
}
