//! PAC encoding chain: data insertion, convolutional transform, polar
//! transform.

use crate::conv::{conv_encode, ConnectionPolynomial};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::polar::{polar_encode, PolarDim, RateProfile};

/// PAC code `(N, K, A, T)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PacCode {
    profile: RateProfile,
    poly: ConnectionPolynomial,
}

/// Intermediate vectors of one encoding: carrier `v`, convolution output
/// `u` and codeword `x`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EncodeTrace {
    pub v: BitVec,
    pub u: BitVec,
    pub x: BitVec,
}

impl PacCode {
    pub fn new(profile: RateProfile, poly: ConnectionPolynomial) -> Result<Self> {
        let len = profile.dim().len();
        if poly.memory() >= len {
            return Err(Error::PolynomialTooLong {
                memory: poly.memory(),
                len,
            });
        }
        Ok(Self { profile, poly })
    }

    /// Plain polar/RM-like code: identity convolution.
    pub fn polar(profile: RateProfile) -> Self {
        Self {
            profile,
            poly: ConnectionPolynomial::identity(),
        }
    }

    pub fn dim(&self) -> PolarDim {
        self.profile.dim()
    }

    pub fn len(&self) -> usize {
        self.dim().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.profile.k()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    pub fn profile(&self) -> &RateProfile {
        &self.profile
    }

    pub fn poly(&self) -> &ConnectionPolynomial {
        &self.poly
    }

    /// Same profile, identity convolution.
    pub fn without_convolution(&self) -> Self {
        Self::polar(self.profile.clone())
    }

    pub fn encode(&self, d: &BitVec) -> Result<BitVec> {
        Ok(self.encode_traced(d)?.x)
    }

    pub fn encode_traced(&self, d: &BitVec) -> Result<EncodeTrace> {
        let v = insert_data(d, &self.profile)?;
        let u = conv_encode(&v, &self.poly)?;
        let x = polar_encode(&u, self.dim())?;
        Ok(EncodeTrace { v, u, x })
    }

    /// Row `k` is the codeword of the `k`-th unit data word.
    pub fn effective_generator(&self) -> Vec<BitVec> {
        (1..=self.k())
            .map(|k| {
                let e = BitVec::unit(self.k(), k).expect("k within 1..=K");
                self.encode(&e).expect("unit word has length K")
            })
            .collect()
    }
}

/// Places `d` on the profile positions in increasing order; zeros elsewhere.
pub fn insert_data(d: &BitVec, profile: &RateProfile) -> Result<BitVec> {
    if d.len() != profile.k() {
        return Err(Error::LengthMismatch {
            expected: profile.k(),
            found: d.len(),
        });
    }
    let mut v = BitVec::zeros(profile.dim().len());
    for (k, &i) in profile.indices().iter().enumerate() {
        if d.get(k + 1) {
            v.set(i, true)?;
        }
    }
    Ok(v)
}

/// Restriction of `v` to the profile positions.
pub fn extract_data(v: &BitVec, profile: &RateProfile) -> Result<BitVec> {
    if v.len() != profile.dim().len() {
        return Err(Error::LengthMismatch {
            expected: profile.dim().len(),
            found: v.len(),
        });
    }
    Ok(BitVec::from_bits(
        profile.indices().iter().map(|&i| v.get(i)),
    ))
}

pub fn pac_encode(d: &BitVec, code: &PacCode) -> Result<BitVec> {
    code.encode(d)
}
