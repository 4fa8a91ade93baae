//! The polar transform `G_n = F^{⊗n}` with `F = [[1, 0], [1, 1]]`, its rows,
//! and rate-profile construction.
//!
//! Row `i` (1-based) of `G_n` has a one in column `j` exactly when the binary
//! expansion of `j - 1` is covered by that of `i - 1`, so its weight is
//! `2^popcount(i - 1)`.

use std::fmt;
use std::path::Path;

use crate::error::{Error, ProfileError, Result};
use crate::gf2::BitVec;

/// Largest supported `n` (block length `2^n`).
pub const MAX_LOG_LEN: u32 = 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PolarDim {
    n: u32,
}

impl PolarDim {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_LOG_LEN {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self { n })
    }

    /// Dimension for block length `len`, which must be a power of two >= 2.
    pub fn from_len(len: usize) -> Result<Self> {
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Config(format!(
                "block length {len} is not a power of two >= 2"
            )));
        }
        Self::new(len.trailing_zeros())
    }

    pub fn log_len(self) -> u32 {
        self.n
    }

    /// Block length `N = 2^n`.
    pub fn len(self) -> usize {
        1 << self.n
    }

    pub fn is_empty(self) -> bool {
        false
    }

    fn check_row(self, i: usize) -> Result<()> {
        if i == 0 || i > self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                max: self.len(),
            });
        }
        Ok(())
    }
}

/// Row `i` of `G_n`.
pub fn kron_row(i: usize, dim: PolarDim) -> Result<BitVec> {
    dim.check_row(i)?;
    let len = dim.len();
    let r = i - 1;
    let mut words = vec![0u64; len.div_ceil(64)];
    // enumerate submasks of r
    let mut sub = r;
    loop {
        words[sub / 64] |= 1 << (sub % 64);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & r;
    }
    Ok(BitVec::from_words(len, &words))
}

/// Closed-form weight of row `i`: `2^popcount(i - 1)`.
pub fn row_weight(i: usize, dim: PolarDim) -> Result<usize> {
    dim.check_row(i)?;
    Ok(1 << (i - 1).count_ones())
}

/// `u * G_n` by the in-place butterfly.
pub fn polar_encode(u: &BitVec, dim: PolarDim) -> Result<BitVec> {
    let len = dim.len();
    if u.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: u.len(),
        });
    }
    let mut words = u.words().to_vec();
    polar_transform_words(&mut words, len);
    Ok(BitVec::from_words(len, &words))
}

/// Butterfly on packed words. For each stage `s`, every index with bit `s`
/// clear absorbs the index with that bit set.
pub(crate) fn polar_transform_words(words: &mut [u64], len: usize) {
    const STAGE_MASKS: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0F0F_0F0F_0F0F_0F0F,
        0x00FF_00FF_00FF_00FF,
        0x0000_FFFF_0000_FFFF,
        0x0000_0000_FFFF_FFFF,
    ];
    let mut stride = 1;
    while stride < len {
        if stride < 64 {
            let mask = STAGE_MASKS[stride.trailing_zeros() as usize];
            for w in words.iter_mut() {
                *w ^= (*w >> stride) & mask;
            }
        } else {
            let ws = stride / 64;
            for base in 0..words.len() {
                if base & ws == 0 {
                    words[base] ^= words[base + ws];
                }
            }
        }
        stride <<= 1;
    }
}

/// Polar transform of a short slice of 0/1 values, in place.
pub(crate) fn polar_transform_bits(bits: &mut [u8]) {
    let len = bits.len();
    let mut stride = 1;
    while stride < len {
        for idx in 0..len {
            if idx & stride == 0 {
                bits[idx] ^= bits[idx | stride];
            }
        }
        stride <<= 1;
    }
}

/// Data index set `A` (1-based, ascending) of a rate profile.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RateProfile {
    dim: PolarDim,
    indices: Vec<usize>,
}

impl RateProfile {
    pub fn new<I: IntoIterator<Item = usize>>(dim: PolarDim, indices: I) -> Result<Self> {
        Ok(Self::validated(dim, indices.into_iter().collect())?)
    }

    fn validated(
        dim: PolarDim,
        mut indices: Vec<usize>,
    ) -> std::result::Result<Self, ProfileError> {
        let len = dim.len();
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > len) {
            return Err(ProfileError::IndexOutOfRange { index: bad, len });
        }
        indices.sort_unstable();
        if let Some(pair) = indices.windows(2).find(|p| p[0] == p[1]) {
            return Err(ProfileError::DuplicateIndex(pair[0]));
        }
        if indices.is_empty() {
            return Err(ProfileError::Empty);
        }
        Ok(Self { dim, indices })
    }

    pub fn dim(&self) -> PolarDim {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Membership flags indexed by 0-based position.
    pub fn info_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim.len()];
        for &i in &self.indices {
            mask[i - 1] = true;
        }
        mask
    }

    /// Profile-file text: `N=<len>` then the indices on one line.
    pub fn to_file_string(&self) -> String {
        format!("N={}\n{}\n", self.dim.len(), self)
    }

    pub fn parse(text: &str) -> std::result::Result<Self, ProfileError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ProfileError::Malformed("empty file".into()))?;
        let len: usize = header
            .strip_prefix("N=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| {
                ProfileError::Malformed(format!("expected `N=<int>`, got {header:?}"))
            })?;
        let dim = PolarDim::from_len(len)
            .map_err(|_| ProfileError::Malformed(format!("N={len} is not a power of two >= 2")))?;
        let body = lines
            .next()
            .ok_or_else(|| ProfileError::Malformed("missing index line".into()))?;
        if let Some(extra) = lines.next() {
            return Err(ProfileError::Malformed(format!(
                "unexpected line {extra:?}"
            )));
        }
        let indices = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| ProfileError::Malformed(format!("bad index {tok:?}")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::validated(dim, indices)
    }
}

impl fmt::Display for RateProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, i) in self.indices.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

fn check_k(dim: PolarDim, k: usize) -> Result<()> {
    if k == 0 || k > dim.len() {
        return Err(Error::InvalidK { k, len: dim.len() });
    }
    Ok(())
}

/// Reed-Muller-like profile: the `k` rows of largest weight, ties going to
/// the larger index.
pub fn rm_profile(dim: PolarDim, k: usize) -> Result<RateProfile> {
    check_k(dim, k)?;
    let mut order: Vec<usize> = (1..=dim.len()).collect();
    order.sort_by(|&a, &b| {
        let (wa, wb) = ((a - 1).count_ones(), (b - 1).count_ones());
        wb.cmp(&wa).then(b.cmp(&a))
    });
    order.truncate(k);
    RateProfile::new(dim, order)
}

/// Bhattacharyya parameters of the synthetic channels for an erasure
/// channel with parameter `design_erasure`, 0-based index order.
pub fn bhattacharyya_parameters(dim: PolarDim, design_erasure: f64) -> Vec<f64> {
    let mut z = vec![design_erasure];
    for _ in 0..dim.log_len() {
        z = z.iter().flat_map(|&p| [2.0 * p - p * p, p * p]).collect();
    }
    z
}

/// Profile of the `k` indices with smallest Bhattacharyya parameter, ties
/// going to the larger index.
pub fn bhattacharyya_profile(dim: PolarDim, k: usize, design_erasure: f64) -> Result<RateProfile> {
    check_k(dim, k)?;
    if !(design_erasure > 0.0 && design_erasure < 1.0) {
        return Err(Error::Config(format!(
            "design erasure probability {design_erasure} outside (0, 1)"
        )));
    }
    let z = bhattacharyya_parameters(dim, design_erasure);
    let mut order: Vec<usize> = (1..=dim.len()).collect();
    order.sort_by(|&a, &b| z[a - 1].total_cmp(&z[b - 1]).then(b.cmp(&a)));
    order.truncate(k);
    RateProfile::new(dim, order)
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<RateProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(RateProfile::parse(&text)?)
}
