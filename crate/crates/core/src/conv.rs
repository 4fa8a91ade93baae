//! Rate-1 convolutional transform `u = v T`.
//!
//! `T` is the upper-triangular Toeplitz matrix whose first row starts with
//! the connection coefficients `c_0, ..., c_m`. Octal connection strings are
//! read most-significant bit first as `(c_0, c_1, ..., c_m)`, so `"133"`
//! (binary `1011011`) gives `c = (1, 0, 1, 1, 0, 1, 1)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::BitVec;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ConnectionPolynomial {
    coeffs: Vec<u8>,
}

impl ConnectionPolynomial {
    /// Validates `c_0 = c_m = 1` and that every coefficient is a bit.
    pub fn from_coeffs(coeffs: Vec<u8>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("no coefficients".into()));
        }
        if coeffs.iter().any(|&c| c > 1) {
            return Err(Error::InvalidPolynomial(
                "coefficients must be 0 or 1".into(),
            ));
        }
        if coeffs[0] != 1 {
            return Err(Error::InvalidPolynomial("c_0 must be 1".into()));
        }
        if coeffs[coeffs.len() - 1] != 1 {
            return Err(Error::InvalidPolynomial("c_m must be 1".into()));
        }
        Ok(Self { coeffs })
    }

    /// `c = (1)`: the identity transform.
    pub fn identity() -> Self {
        Self { coeffs: vec![1] }
    }

    pub fn parse_octal(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidPolynomial("empty octal string".into()));
        }
        let mut bits = Vec::with_capacity(3 * s.len());
        for ch in s.chars() {
            let digit = ch
                .to_digit(8)
                .ok_or_else(|| Error::InvalidPolynomial(format!("{ch:?} is not an octal digit")))?;
            bits.extend([(digit >> 2) & 1, (digit >> 1) & 1, digit & 1].map(|b| b as u8));
        }
        let first_one = bits
            .iter()
            .position(|&b| b == 1)
            .ok_or_else(|| Error::InvalidPolynomial(format!("{s:?} is zero")))?;
        Self::from_coeffs(bits.split_off(first_one))
    }

    /// Octal text that [`parse_octal`](Self::parse_octal) maps back to `self`.
    pub fn to_octal(&self) -> String {
        let pad = (3 - self.coeffs.len() % 3) % 3;
        let bits: Vec<u8> = std::iter::repeat_n(0, pad)
            .chain(self.coeffs.iter().copied())
            .collect();
        bits.chunks(3)
            .map(|c| char::from(b'0' + (c[0] << 2 | c[1] << 1 | c[2])))
            .collect::<String>()
            .trim_start_matches('0')
            .to_string()
    }

    /// Memory `m` (degree).
    pub fn memory(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    /// Exponents `t` with `c_t = 1`.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(t, _)| t)
    }

    /// `c'_t = c_{m-t}`.
    pub fn reciprocal(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { coeffs }
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs.len() == 1
    }
}

impl fmt::Display for ConnectionPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_octal())
    }
}

/// Upper-triangular Toeplitz matrix defined by its first row.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ToeplitzUT {
    first_row: BitVec,
}

impl ToeplitzUT {
    pub fn new(c: &ConnectionPolynomial, len: usize) -> Result<Self> {
        if c.memory() >= len {
            return Err(Error::PolynomialTooLong {
                memory: c.memory(),
                len,
            });
        }
        let mut first_row = BitVec::zeros(len);
        for t in c.support() {
            first_row.set(t + 1, true)?;
        }
        Ok(Self { first_row })
    }

    /// `D_N^m`: ones on the main diagonal and the `m`-th superdiagonal
    /// (`D_N^0` is the identity).
    pub fn d_matrix(m: usize, len: usize) -> Result<Self> {
        if m >= len {
            return Err(Error::PolynomialTooLong { memory: m, len });
        }
        let mut first_row = BitVec::zeros(len);
        first_row.set(1, true)?;
        first_row.set(m + 1, true)?;
        Ok(Self { first_row })
    }

    pub fn len(&self) -> usize {
        self.first_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_row.is_empty()
    }

    pub fn first_row(&self) -> &BitVec {
        &self.first_row
    }

    /// Entry `(r, s)`, 1-based: `c_{s-r}` on and above the diagonal.
    pub fn entry(&self, r: usize, s: usize) -> bool {
        s >= r && self.first_row.get(s - r + 1)
    }

    /// Row `r` (1-based).
    pub fn row(&self, r: usize) -> Result<BitVec> {
        let len = self.len();
        if r == 0 || r > len {
            return Err(Error::IndexOutOfRange { index: r, max: len });
        }
        Ok(BitVec::from_bits((1..=len).map(|s| self.entry(r, s))))
    }

    /// Explicit vector-matrix product `v T` as an XOR of rows.
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: v.len(),
            });
        }
        let mut acc = BitVec::zeros(self.len());
        for r in v.support() {
            acc.xor_assign(&self.row(r)?)?;
        }
        Ok(acc)
    }

    /// Entrywise GF(2) sum.
    pub fn add(&self, other: &ToeplitzUT) -> Result<ToeplitzUT> {
        Ok(Self {
            first_row: self.first_row.xor(&other.first_row)?,
        })
    }
}

pub fn toeplitz(c: &ConnectionPolynomial, len: usize) -> Result<ToeplitzUT> {
    ToeplitzUT::new(c, len)
}

/// Shift-register form of `u = v T`:
/// `u_j = XOR_{t=0..min(m, j-1)} c_t v_{j-t}`.
pub fn conv_encode(v: &BitVec, c: &ConnectionPolynomial) -> Result<BitVec> {
    let len = v.len();
    if c.memory() >= len {
        return Err(Error::PolynomialTooLong {
            memory: c.memory(),
            len,
        });
    }
    let taps: Vec<usize> = c.support().collect();
    let bits = v.to_bits();
    let mut out = vec![false; len];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0u8;
        for &t in &taps {
            if t > j {
                break;
            }
            acc ^= bits[j - t];
        }
        *o = acc == 1;
    }
    Ok(BitVec::from_bits(out))
}

/// Inverts `u = v T` by back-substitution (`c_0 = 1` makes `T` unit upper
/// triangular).
pub fn conv_decode(u: &BitVec, c: &ConnectionPolynomial) -> Result<BitVec> {
    let len = u.len();
    if c.memory() >= len {
        return Err(Error::PolynomialTooLong {
            memory: c.memory(),
            len,
        });
    }
    let taps: Vec<usize> = c.support().skip(1).collect();
    let ubits = u.to_bits();
    let mut v = vec![0u8; len];
    for j in 0..len {
        let mut acc = ubits[j];
        for &t in &taps {
            if t > j {
                break;
            }
            acc ^= v[j - t];
        }
        v[j] = acc;
    }
    Ok(BitVec::from_bits(v.iter().map(|&b| b == 1)))
}

/// Set `M` with `sum_{m in M} D^m = T`: the nonzero taps, plus `D^0` when
/// their count is even.
pub fn d_decomposition(c: &ConnectionPolynomial) -> BTreeSet<usize> {
    let mut set: BTreeSet<usize> = c.support().filter(|&t| t > 0).collect();
    if set.len().is_multiple_of(2) {
        set.insert(0);
    }
    set
}
