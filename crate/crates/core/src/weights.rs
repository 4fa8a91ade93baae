//! Exact weight spectra by Gray-order enumeration, minimum distance and the
//! union bound.
//!
//! The `2^K` codewords are split on the top `p` data bits into `2^p`
//! independent chunks. Each chunk encodes its fixed prefix once and then walks
//! the remaining `K - p` bits in reflected binary order, so every step XORs a
//! single generator row into the running codeword before tallying its weight.
//! Per-chunk histograms are summed, which makes the result independent of
//! both `p` and the number of worker threads.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::pac::PacCode;
use crate::polar::{row_weight, RateProfile};

/// Default ceiling on K for exhaustive enumeration.
pub const DEFAULT_GUARD_K: usize = 30;

/// Codeword counts `A_d` for `d = 0..=N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightSpectrum {
    len: usize,
    k: usize,
    counts: Vec<u64>,
}

impl WeightSpectrum {
    /// Builds a spectrum from explicit counts, checking `sum A_d = 2^K` and
    /// `A_0 = 1`.
    pub fn from_counts(len: usize, k: usize, mut counts: Vec<u64>) -> Result<Self> {
        if counts.iter().skip(len + 1).any(|&c| c > 0) {
            return Err(Error::Config(format!(
                "spectrum has weights beyond N={len}"
            )));
        }
        counts.resize(len + 1, 0);
        let total: u128 = counts.iter().map(|&c| c as u128).sum();
        if total != 1u128 << k || counts[0] != 1 {
            return Err(Error::Config(format!(
                "spectrum does not describe 2^{k} codewords with one zero word"
            )));
        }
        Ok(Self { len, k, counts })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `A_d`, zero for `d > N`.
    pub fn count(&self, d: usize) -> u64 {
        self.counts.get(d).copied().unwrap_or(0)
    }

    /// Non-zero entries `(d, A_d)` in increasing weight.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(d, &c)| (d, c))
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// `weight,count` CSV body, header included.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("weight,count\n");
        for (d, c) in self.iter() {
            out.push_str(&format!("{d},{c}\n"));
        }
        out
    }
}

impl fmt::Display for WeightSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(d, c)| format!("{d}:{c}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Exact spectrum of the code spanned by `gen` (all rows of equal length).
///
/// `chunks` is rounded down to a power of two and capped at `2^K`.
pub fn weight_spectrum(gen: &[BitVec], guard_k: usize, chunks: usize) -> Result<WeightSpectrum> {
    let k = gen.len();
    if k > guard_k {
        return Err(Error::EnumerationGuard { k, guard: guard_k });
    }
    if k >= 64 {
        return Err(Error::EnumerationGuard { k, guard: 63 });
    }
    let len = gen.first().map_or(0, BitVec::len);
    if let Some(bad) = gen.iter().find(|r| r.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let prefix_bits = if chunks <= 1 {
        0
    } else {
        (usize::BITS - 1 - chunks.leading_zeros()) as usize
    }
    .min(k);
    let words = len.div_ceil(64);
    let counts = match words {
        0 | 1 => enumerate::<1>(gen, len, prefix_bits),
        2 => enumerate::<2>(gen, len, prefix_bits),
        3 | 4 => enumerate::<4>(gen, len, prefix_bits),
        _ => enumerate_dyn(gen, len, prefix_bits),
    };
    WeightSpectrum::from_counts(len, k, counts)
}

fn enumerate<const W: usize>(gen: &[BitVec], len: usize, prefix_bits: usize) -> Vec<u64> {
    let rows: Vec<[u64; W]> = gen
        .iter()
        .map(|r| {
            let mut a = [0u64; W];
            a[..r.words().len()].copy_from_slice(r.words());
            a
        })
        .collect();
    let k = rows.len();
    let free = k - prefix_bits;
    let (gray_rows, prefix_rows) = rows.split_at(free);
    (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut cur = [0u64; W];
            for (b, row) in prefix_rows.iter().enumerate() {
                if prefix >> b & 1 == 1 {
                    for w in 0..W {
                        cur[w] ^= row[w];
                    }
                }
            }
            let mut hist = vec![0u64; len + 1];
            hist[weight_of(&cur)] += 1;
            for step in 1u64..1 << free {
                let row = &gray_rows[step.trailing_zeros() as usize];
                for w in 0..W {
                    cur[w] ^= row[w];
                }
                hist[weight_of(&cur)] += 1;
            }
            hist
        })
        .reduce(|| vec![0u64; len + 1], add_hist)
}

#[inline(always)]
fn weight_of<const W: usize>(v: &[u64; W]) -> usize {
    v.iter().map(|w| w.count_ones() as usize).sum()
}

fn enumerate_dyn(gen: &[BitVec], len: usize, prefix_bits: usize) -> Vec<u64> {
    let k = gen.len();
    let free = k - prefix_bits;
    let (gray_rows, prefix_rows) = gen.split_at(free);
    (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut cur = BitVec::zeros(len);
            for (b, row) in prefix_rows.iter().enumerate() {
                if prefix >> b & 1 == 1 {
                    cur.xor_assign(row).expect("equal lengths");
                }
            }
            let mut hist = vec![0u64; len + 1];
            hist[cur.weight()] += 1;
            for step in 1u64..1 << free {
                cur.xor_assign(&gray_rows[step.trailing_zeros() as usize])
                    .expect("equal lengths");
                hist[cur.weight()] += 1;
            }
            hist
        })
        .reduce(|| vec![0u64; len + 1], add_hist)
}

fn add_hist(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Spectrum of a PAC code from its effective generator.
pub fn code_spectrum(code: &PacCode, guard_k: usize, chunks: usize) -> Result<WeightSpectrum> {
    weight_spectrum(&code.effective_generator(), guard_k, chunks)
}

/// Smallest nonzero weight and its multiplicity; `None` for the zero code.
pub fn min_distance(spectrum: &WeightSpectrum) -> Option<(usize, u64)> {
    spectrum.iter().find(|&(d, _)| d > 0)
}

/// Minimum weight of the selected rows of `G_n`, which equals the minimum
/// distance of the plain polar/RM-like code on `profile`.
pub fn dmin_lower_bound(profile: &RateProfile) -> usize {
    profile
        .indices()
        .iter()
        .map(|&i| row_weight(i, profile.dim()).expect("profile indices are in range"))
        .min()
        .expect("profiles are nonempty")
}

/// Gaussian tail `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `sum_{d>0} A_d Q(sqrt(2 d R Eb/N0))` for BPSK on AWGN.
pub fn union_bound(spectrum: &WeightSpectrum, rate: f64, ebn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    spectrum
        .iter()
        .filter(|&(d, _)| d > 0)
        .map(|(d, a)| a as f64 * q_function((2.0 * d as f64 * rate * ebn0).sqrt()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{kron_row, PolarDim};

    fn dim(n: u32) -> PolarDim {
        PolarDim::new(n).unwrap()
    }

    #[test]
    fn rm_8_4_spectrum() {
        let gen: Vec<BitVec> = [4, 6, 7, 8]
            .iter()
            .map(|&i| kron_row(i, dim(3)).unwrap())
            .collect();
        for chunks in [1, 2, 4, 16, 64] {
            let s = weight_spectrum(&gen, DEFAULT_GUARD_K, chunks).unwrap();
            assert_eq!(s.count(0), 1);
            assert_eq!(s.count(4), 14);
            assert_eq!(s.count(8), 1);
            assert_eq!(s.total(), 16);
            assert_eq!(min_distance(&s), Some((4, 14)));
        }
        let single = weight_spectrum(&[kron_row(8, dim(3)).unwrap()], 30, 1).unwrap();
        assert_eq!(single.to_string(), "{0:1, 8:1}");
        assert_eq!(min_distance(&single), Some((8, 1)));
        assert_eq!(single.to_csv(), "weight,count\n0,1\n8,1\n");
    }

    #[test]
    fn guard_and_shape_errors() {
        let gen = vec![BitVec::ones(8); 5];
        assert!(matches!(
            weight_spectrum(&gen, 4, 1),
            Err(Error::EnumerationGuard { k: 5, guard: 4 })
        ));
        let bad = vec![BitVec::ones(8), BitVec::ones(4)];
        assert!(weight_spectrum(&bad, 30, 1).is_err());
    }

    #[test]
    fn wide_vectors_use_generic_path() {
        // 320-bit rows: five words
        let d = dim(9);
        let gen: Vec<BitVec> = [512, 511, 510]
            .iter()
            .map(|&i| BitVec::from_words(320, kron_row(i, d).unwrap().words()))
            .collect();
        let s = weight_spectrum(&gen, 30, 2).unwrap();
        assert_eq!(s.total(), 8);
    }

    #[test]
    fn lower_bounds() {
        let p = RateProfile::new(dim(3), [4, 7, 8]).unwrap();
        assert_eq!(dmin_lower_bound(&p), 4);
        assert_eq!(dmin_lower_bound(&RateProfile::new(dim(3), [8]).unwrap()), 8);
        assert_eq!(
            dmin_lower_bound(&crate::polar::rm_profile(dim(7), 29).unwrap()),
            32
        );
    }

    #[test]
    fn union_bound_terms() {
        let zero = WeightSpectrum::from_counts(8, 0, vec![1]).unwrap();
        assert_eq!(union_bound(&zero, 0.5, 0.0), 0.0);
        assert!(WeightSpectrum::from_counts(8, 1, vec![1]).is_err());
    }
}
