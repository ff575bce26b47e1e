//! Binary encoding of a unit's candidate lists for network input.
//!
//! Nine cells times nine digits gives 81 bits. Segment `k` (bits `9k..9k+8`)
//! describes cell `k` of the unit in canonical order; bit `9k + (d-1)` is set
//! iff digit `d` is a candidate of cell `k`. Solved cells encode as the
//! singleton set of their digit, which is exactly how they look to a player
//! scanning candidate lists.

use thiserror::Error;

use crate::board::{CandidateSet, Digit, Grid, Unit};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("malformed encoding: expected 81 binary values, got {0}")]
    MalformedEncoding(String),
}

/// An 81-bit unit encoding, bits in {0,1}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UnitEncoding {
    bits: [u8; 81],
}

impl UnitEncoding {
    pub fn from_bits(bits: &[u8]) -> Result<UnitEncoding, EncodingError> {
        if bits.len() != 81 {
            return Err(EncodingError::MalformedEncoding(format!(
                "length {}",
                bits.len()
            )));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(EncodingError::MalformedEncoding(format!("value {bad}")));
        }
        let mut out = [0u8; 81];
        out.copy_from_slice(bits);
        Ok(UnitEncoding { bits: out })
    }

    /// Encodes nine candidate lists directly.
    pub fn from_lists(lists: &[CandidateSet; 9]) -> UnitEncoding {
        let mut bits = [0u8; 81];
        for (k, set) in lists.iter().enumerate() {
            for d in set.iter() {
                bits[9 * k + d.index()] = 1;
            }
        }
        UnitEncoding { bits }
    }

    pub fn bits(&self) -> &[u8; 81] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| usize::from(b)).sum()
    }

    /// The encoding as network input values.
    pub fn as_input(&self) -> [f64; 81] {
        self.bits.map(f64::from)
    }

    /// Exact inverse of the per-cell encoding.
    pub fn decode(&self) -> [CandidateSet; 9] {
        std::array::from_fn(|k| {
            let mut set = CandidateSet::EMPTY;
            for d in Digit::ALL {
                if self.bits[9 * k + d.index()] == 1 {
                    set.insert(d);
                }
            }
            set
        })
    }
}

/// Encodes a unit of `grid`, solved cells as singletons.
pub fn encode_unit(grid: &Grid, unit: Unit) -> UnitEncoding {
    UnitEncoding::from_lists(&grid.candidate_view(unit))
}

/// Decodes an encoding back to nine candidate lists.
pub fn decode_unit(encoding: &UnitEncoding) -> [CandidateSet; 9] {
    encoding.decode()
}
