//! Packed binary vectors over GF(2).
//!
//! Positions are 1-based in the public API: position `p` is stored in bit
//! `(p - 1) % 64` of word `(p - 1) / 64`. Bits past the declared length are
//! kept at zero so that word-level XOR and popcount stay exact.
//!
//! Shift amounts are 0-based. `cyclic_shift(v, j)` is the clockwise shift
//! `v * C_L^j`: output position `p` holds input position `p - j` (mod `L`),
//! which in the polynomial view is multiplication by `x^j mod (x^L - 1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Fixed-length binary vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// Unit vector `e_pos` (1-based).
    pub fn unit(len: usize, pos: usize) -> Result<Self> {
        let mut v = Self::zeros(len);
        v.set(pos, true)?;
        Ok(v)
    }

    /// Builds a vector from 0/1 values, first element at position 1.
    pub fn from_bits<I>(bits: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<bool>,
    {
        let bits: Vec<bool> = bits.into_iter().map(Into::into).collect();
        let mut v = Self::zeros(bits.len());
        for (idx, b) in bits.into_iter().enumerate() {
            if b {
                v.words[idx / WORD_BITS] |= 1 << (idx % WORD_BITS);
            }
        }
        v
    }

    /// Builds a vector from raw words; bits beyond `len` are discarded.
    pub fn from_words(len: usize, words: &[u64]) -> Self {
        let mut w = words.to_vec();
        w.resize(words_for(len), 0);
        let mut v = Self { len, words: w };
        v.clear_tail();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bit at 1-based position `pos`. Panics when `pos` is out of range.
    pub fn get(&self, pos: usize) -> bool {
        assert!(
            pos >= 1 && pos <= self.len,
            "position {pos} outside 1..={}",
            self.len
        );
        let idx = pos - 1;
        (self.words[idx / WORD_BITS] >> (idx % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, pos: usize, value: bool) -> Result<()> {
        if pos == 0 || pos > self.len {
            return Err(Error::IndexOutOfRange {
                index: pos,
                max: self.len,
            });
        }
        let idx = pos - 1;
        let mask = 1u64 << (idx % WORD_BITS);
        if value {
            self.words[idx / WORD_BITS] |= mask;
        } else {
            self.words[idx / WORD_BITS] &= !mask;
        }
        Ok(())
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// 1-based positions holding a one, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + tz + 1)
            })
        })
    }

    /// Bits as 0/1 bytes, position 1 first.
    pub fn to_bits(&self) -> Vec<u8> {
        (1..=self.len).map(|p| self.get(p) as u8).collect()
    }

    pub fn xor_assign(&mut self, other: &BitVec) -> Result<()> {
        self.check_len(other.len)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// Clockwise cyclic shift by `j` places (`j` reduced mod the length).
    pub fn cyclic_shift(&self, j: usize) -> BitVec {
        if self.len == 0 {
            return self.clone();
        }
        let j = j % self.len;
        if j == 0 {
            return self.clone();
        }
        if self.len <= WORD_BITS {
            let w = self.words[0];
            let mask = low_mask(self.len);
            let rotated = ((w << j) | (w >> (self.len - j))) & mask;
            return Self {
                len: self.len,
                words: vec![rotated],
            };
        }
        let mut out = shl_words(&self.words, j);
        let wrapped = shr_words(&self.words, self.len - j);
        for (a, b) in out.iter_mut().zip(wrapped) {
            *a |= b;
        }
        let mut v = Self {
            len: self.len,
            words: out,
        };
        v.clear_tail();
        v
    }

    /// XOR of `cyclic_shift(self, l)` over every `l` in the shift set.
    pub fn apply_shift_set(&self, shifts: &ShiftSet) -> Result<BitVec> {
        self.check_len(shifts.modulus())?;
        let mut acc = BitVec::zeros(self.len);
        for &l in shifts.iter() {
            let shifted = self.cyclic_shift(l);
            for (a, b) in acc.words.iter_mut().zip(&shifted.words) {
                *a ^= b;
            }
        }
        Ok(acc)
    }

    fn check_len(&self, other: usize) -> Result<()> {
        if self.len != other {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: other,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(rem);
            }
        }
    }
}

fn low_mask(bits: usize) -> u64 {
    if bits >= WORD_BITS {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Moves bit `b` to `b + k`, dropping anything past the word array.
fn shl_words(src: &[u64], k: usize) -> Vec<u64> {
    let (q, r) = (k / WORD_BITS, k % WORD_BITS);
    let mut out = vec![0u64; src.len()];
    for w in q..src.len() {
        let mut val = src[w - q] << r;
        if r != 0 && w > q {
            val |= src[w - q - 1] >> (WORD_BITS - r);
        }
        out[w] = val;
    }
    out
}

/// Moves bit `b` to `b - k`, dropping anything below zero.
fn shr_words(src: &[u64], k: usize) -> Vec<u64> {
    let (q, r) = (k / WORD_BITS, k % WORD_BITS);
    let mut out = vec![0u64; src.len()];
    for w in 0..src.len().saturating_sub(q) {
        let mut val = src[w + q] >> r;
        if r != 0 && w + q + 1 < src.len() {
            val |= src[w + q + 1] << (WORD_BITS - r);
        }
        out[w] = val;
    }
    out
}

pub fn cyclic_shift(v: &BitVec, j: usize) -> BitVec {
    v.cyclic_shift(j)
}

pub fn apply_shift_set(v: &BitVec, shifts: &ShiftSet) -> Result<BitVec> {
    v.apply_shift_set(shifts)
}

pub fn hamming_weight(v: &BitVec) -> usize {
    v.weight()
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 1..=self.len {
            f.write_str(if self.get(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(bad) = s.chars().find(|c| *c != '0' && *c != '1') {
            return Err(Error::InvalidBitString(format!(
                "unexpected character {bad:?} in {s:?}"
            )));
        }
        Ok(Self::from_bits(s.chars().map(|c| c == '1')))
    }
}

/// Set of distinct cyclic shift amounts `l` in `0..modulus`, naming the
/// GF(2) matrix sum of `C^l`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ShiftSet {
    modulus: usize,
    shifts: Vec<usize>,
}

impl ShiftSet {
    pub fn new<I: IntoIterator<Item = usize>>(modulus: usize, shifts: I) -> Result<Self> {
        let mut v: Vec<usize> = shifts.into_iter().collect();
        v.sort_unstable();
        for pair in v.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateShift(pair[0]));
            }
        }
        if let Some(&bad) = v.iter().find(|&&l| l >= modulus) {
            return Err(Error::ShiftOutOfRange {
                shift: bad,
                modulus,
            });
        }
        Ok(Self { modulus, shifts: v })
    }

    /// Reduces a multiset of shifts mod 2: amounts appearing an even number
    /// of times cancel. Amounts are taken mod `modulus`.
    pub fn from_multiset<I: IntoIterator<Item = usize>>(modulus: usize, shifts: I) -> Self {
        let mut odd = vec![false; modulus];
        for l in shifts {
            odd[l % modulus] ^= true;
        }
        Self {
            modulus,
            shifts: (0..modulus).filter(|&l| odd[l]).collect(),
        }
    }

    pub fn empty(modulus: usize) -> Self {
        Self {
            modulus,
            shifts: Vec::new(),
        }
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Number of shifts in the set.
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn contains(&self, l: usize) -> bool {
        self.shifts.binary_search(&l).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.shifts.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.shifts
    }

    /// GF(2) sum of the two shift-matrix sums.
    pub fn symmetric_difference(&self, other: &ShiftSet) -> Result<ShiftSet> {
        if self.modulus != other.modulus {
            return Err(Error::LengthMismatch {
                expected: self.modulus,
                found: other.modulus,
            });
        }
        Ok(Self::from_multiset(
            self.modulus,
            self.shifts.iter().chain(&other.shifts).copied(),
        ))
    }
}

impl fmt::Display for ShiftSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.shifts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}
