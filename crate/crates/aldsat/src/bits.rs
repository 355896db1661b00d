//! Fixed-length bitsets for per-subtree flags, with a compact hex text form.
//!
//! The hex form packs four bits per character in little-endian nibble order:
//! the first character holds bits 0..4 with bit 0 as the nibble's least
//! significant bit, the second character bits 4..8, and so on. A map over
//! 2^d subtrees therefore serializes to exactly 2^d / 4 characters (d ≥ 2).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitSetError {
    #[error("hex string has {found} characters, expected {expected} for {len} bits")]
    WrongLength {
        len: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid hex character {0:?}")]
    BadChar(char),
    #[error("padding bits beyond length {0} must be zero")]
    DirtyPadding(usize),
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Iterator over the positions of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn to_hex(&self) -> String {
        let nchars = self.len.div_ceil(4);
        let mut out = String::with_capacity(nchars);
        for c in 0..nchars {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = c * 4 + b;
                if i < self.len && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self, BitSetError> {
        let expected = len.div_ceil(4);
        let found = s.chars().count();
        if found != expected {
            return Err(BitSetError::WrongLength {
                len,
                expected,
                found,
            });
        }
        let mut out = Self::new(len);
        for (c, ch) in s.chars().enumerate() {
            let nibble = ch.to_digit(16).ok_or(BitSetError::BadChar(ch))? as u8;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = c * 4 + b;
                    if i >= len {
                        return Err(BitSetError::DirtyPadding(len));
                    }
                    out.set(i, true);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_char_covers_lowest_bits() {
        let mut b = BitSet::new(8);
        b.set(0, true); // LSB of first nibble
        assert_eq!(b.to_hex(), "10");
        b.set(3, true);
        assert_eq!(b.to_hex(), "90");
        b.set(4, true);
        assert_eq!(b.to_hex(), "91");
    }

    #[test]
    fn from_hex_rejects_garbage() {
        assert_eq!(
            BitSet::from_hex(8, "zz"),
            Err(BitSetError::BadChar('z'))
        );
        assert!(matches!(
            BitSet::from_hex(8, "123"),
            Err(BitSetError::WrongLength { .. })
        ));
        // 6-bit set: second char may only use its low two bits.
        assert_eq!(
            BitSet::from_hex(6, "04"),
            Err(BitSetError::DirtyPadding(6))
        );
        assert!(BitSet::from_hex(6, "03").is_ok());
    }

    #[test]
    fn count_and_ones_agree() {
        let mut b = BitSet::new(100);
        for i in [0, 17, 63, 64, 99] {
            b.set(i, true);
        }
        assert_eq!(b.count_ones(), 5);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 17, 63, 64, 99]);
        b.set(17, false);
        assert_eq!(b.count_ones(), 4);
    }

    proptest! {
        #[test]
        fn hex_round_trip(len in 1usize..300, seed in any::<u64>()) {
            let mut rng = crate::rng::Xorshift64Star::new(seed);
            let mut b = BitSet::new(len);
            for i in 0..len {
                b.set(i, rng.next_bool());
            }
            let hex = b.to_hex();
            let back = BitSet::from_hex(len, &hex).unwrap();
            prop_assert_eq!(&back, &b);
            prop_assert_eq!(back.to_hex(), hex);
        }
    }
}
