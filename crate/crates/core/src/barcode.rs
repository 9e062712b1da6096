//! Packed binary barcodes.
//!
//! Bits are stored most-significant-bit first in 64-bit words, so that the
//! big-endian bytes of the words are exactly the packed on-disk bytes. Pad
//! bits past `len` are always zero; equality of the storage is equality of
//! the logical bit sequences.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncoderKind {
    Rbc,
    Lbp,
    Lrbp,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Rbc => "RBC",
            EncoderKind::Lbp => "LBP",
            EncoderKind::Lrbp => "LRBP",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RBC" => Ok(EncoderKind::Rbc),
            "LBP" => Ok(EncoderKind::Lbp),
            "LRBP" => Ok(EncoderKind::Lrbp),
            _ => Err(Error::InvalidConfig(format!("unknown encoder {s:?}"))),
        }
    }
}

/// Which encoder produced a barcode, with its projection count where the
/// encoder has one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncoderTag {
    pub kind: EncoderKind,
    pub n_p: Option<u32>,
}

impl EncoderTag {
    /// Short method label in the style of a results table: `RBC4`, `LBP`,
    /// `LRBP32`.
    pub fn method_name(&self) -> String {
        match self.n_p {
            Some(n) => format!("{}{}", self.kind, n),
            None => self.kind.to_string(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Barcode {
    words: Vec<u64>,
    len: usize,
    tag: Option<EncoderTag>,
}

impl Barcode {
    /// Packs a bit sequence. Bit `i` of the barcode is `bits[i]`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        Self::from_bit_iter(bits.iter().copied())
    }

    pub fn from_bit_iter<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let mut words = Vec::new();
        let mut len = 0usize;
        for bit in bits {
            if len.is_multiple_of(WORD_BITS) {
                words.push(0u64);
            }
            if bit {
                let w = words.last_mut().expect("word pushed above");
                *w |= 1u64 << (WORD_BITS - 1 - len % WORD_BITS);
            }
            len += 1;
        }
        if len == 0 {
            return Err(Error::EmptyBarcode);
        }
        Ok(Barcode {
            words,
            len,
            tag: None,
        })
    }

    /// Returns the same bits labelled with the encoder that produced them.
    pub fn tagged(mut self, tag: EncoderTag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn tag(&self) -> Option<EncoderTag> {
        self.tag
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| (self.words[i / WORD_BITS] >> (WORD_BITS - 1 - i % WORD_BITS)) & 1 == 1)
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i).expect("index within length"))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Packed bytes, MSB-first, `ceil(len / 8)` of them.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_be_bytes())
            .take(n)
            .collect()
    }

    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Result<Self> {
        if bit_len == 0 {
            return Err(Error::EmptyBarcode);
        }
        let n = bit_len.div_ceil(8);
        if bytes.len() != n {
            return Err(Error::InvalidHex(format!(
                "{} bytes for {bit_len} bits, expected {n}",
                bytes.len()
            )));
        }
        let pad = n * 8 - bit_len;
        if pad > 0 && bytes[n - 1] & ((1u8 << pad) - 1) != 0 {
            return Err(Error::InvalidHex("nonzero padding bits".into()));
        }
        let words = bytes
            .chunks(8)
            .map(|chunk| {
                let mut buf = [0u8; 8];
                buf[..chunk.len()].copy_from_slice(chunk);
                u64::from_be_bytes(buf)
            })
            .collect();
        Ok(Barcode {
            words,
            len: bit_len,
            tag: None,
        })
    }

    /// Lowercase hex of the packed bytes.
    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, bit_len: usize) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::InvalidHex(e.to_string()))?;
        Self::from_bytes(&bytes, bit_len)
    }

    /// Hamming distance by XOR and popcount over packed words.
    pub fn hamming_distance(&self, other: &Barcode) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(xor_popcount(&self.words, &other.words))
    }
}

#[inline]
pub(crate) fn xor_popcount(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

impl fmt::Debug for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Barcode")
            .field("len", &self.len)
            .field("tag", &self.tag)
            .field("hex", &self.to_hex())
            .finish()
    }
}
