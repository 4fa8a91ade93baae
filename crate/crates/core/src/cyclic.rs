//! Cyclic-shift view of PAC encoding.
//!
//! Each band matrix `D_N^m` satisfies `D_N^m G_n = G_n * sum_{l in S_m} C_N^l`
//! where `S_m` is read off row `m + 1` of `G_n` (positions 2..N, shifted down
//! by one). Summing over the decomposition of `T` gives a single shift set
//! `S` with `v T G_n = (v G_n) * sum_{s in S} C_N^s`: an outer polar/RM-like
//! code followed by an inner cyclic code.
//!
//! The verifiers here check these identities and the weight bound
//! `w(row_sum(i) * sum_{l in L} C^l) >= w(g_i)` for odd `|L|` by enumeration.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conv::{d_decomposition, ConnectionPolynomial, ToeplitzUT};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, ShiftSet};
use crate::pac::{insert_data, PacCode};
use crate::polar::{kron_row, polar_encode, row_weight, PolarDim};

/// Largest block length for which exhaustive weight-bound checks run.
pub const EXHAUSTIVE_MAX_LEN: usize = 8;

/// `g_i` plus the rows below it selected by `mask` (`mask[t]` selects row
/// `i + 1 + t`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RowSumSpec {
    pub i: usize,
    pub mask: Vec<bool>,
}

impl RowSumSpec {
    pub fn new(i: usize, mask: Vec<bool>) -> Self {
        Self { i, mask }
    }

    /// The carrier vector `u` whose first one sits at position `i`.
    pub fn carrier(&self, dim: PolarDim) -> Result<BitVec> {
        let len = dim.len();
        if self.i == 0 || self.i > len {
            return Err(Error::IndexOutOfRange {
                index: self.i,
                max: len,
            });
        }
        if self.mask.len() != len - self.i {
            return Err(Error::LengthMismatch {
                expected: len - self.i,
                found: self.mask.len(),
            });
        }
        let mut u = BitVec::zeros(len);
        u.set(self.i, true)?;
        for (t, &b) in self.mask.iter().enumerate() {
            if b {
                u.set(self.i + 1 + t, true)?;
            }
        }
        Ok(u)
    }
}

pub fn row_sum(spec: &RowSumSpec, dim: PolarDim) -> Result<BitVec> {
    polar_encode(&spec.carrier(dim)?, dim)
}

/// Shift set of `D_N^m`: `{0}` for `m = 0`, otherwise the `l` in `1..N`
/// with bit `l + 1` of row `m + 1` set.
pub fn shift_set(m: usize, dim: PolarDim) -> Result<ShiftSet> {
    let len = dim.len();
    if m >= len {
        return Err(Error::ShiftOutOfRange {
            shift: m,
            modulus: len,
        });
    }
    if m == 0 {
        return ShiftSet::new(len, [0]);
    }
    let row = kron_row(m + 1, dim)?;
    ShiftSet::new(len, row.support().filter(|&p| p >= 2).map(|p| p - 1))
}

/// Mod-2 reduction of the shift sets over the `D^m` decomposition of `T`.
pub fn total_shift_set(c: &ConnectionPolynomial, dim: PolarDim) -> Result<ShiftSet> {
    let len = dim.len();
    if c.memory() >= len {
        return Err(Error::PolynomialTooLong {
            memory: c.memory(),
            len,
        });
    }
    let mut acc = ShiftSet::empty(len);
    for m in d_decomposition(c) {
        acc = acc.symmetric_difference(&shift_set(m, dim)?)?;
    }
    Ok(acc)
}

/// Inner-cyclic / outer-polar encoder: polar-encode the carrier, then apply
/// the total shift set. Agrees with [`PacCode::encode`].
pub fn equiv_encode(d: &BitVec, code: &PacCode) -> Result<BitVec> {
    let shifts = total_shift_set(code.poly(), code.dim())?;
    equiv_encode_with(d, code, &shifts)
}

/// [`equiv_encode`] with a precomputed shift set.
pub fn equiv_encode_with(d: &BitVec, code: &PacCode, shifts: &ShiftSet) -> Result<BitVec> {
    let v = insert_data(d, code.profile())?;
    polar_encode(&v, code.dim())?.apply_shift_set(shifts)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TheoremViolation {
    pub m: usize,
    pub k: usize,
    /// `g_k ^ g_{k+m}`, or `g_k` when `k + m > N`.
    pub expected: BitVec,
    /// Row `k` of `G_n * sum C^l`.
    pub shifted: BitVec,
    /// Row `k` of `D^m G_n`.
    pub band: BitVec,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TheoremReport {
    pub dim: PolarDim,
    pub rows_checked: usize,
    pub violations: Vec<TheoremViolation>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "theorem n={} N={}: {} row identities checked, {} violations",
            self.dim.log_len(),
            self.dim.len(),
            self.rows_checked,
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(
                f,
                "  m={} k={}: expected {} shifted {} band {}",
                v.m, v.k, v.expected, v.shifted, v.band
            )?;
        }
        Ok(())
    }
}

/// Checks `D_N^m G_n = G_n * sum_{l in shift_set(m)} C^l` row by row for every
/// `m` in `0..N`. Each row `k` is compared three ways: the shifted row, the
/// row of the explicit product `D^m G_n`, and the closed form (`g_k ^ g_{k+m}`
/// when `k + m <= N`, else `g_k`).
pub fn verify_theorem(dim: PolarDim) -> TheoremReport {
    let len = dim.len();
    let rows: Vec<BitVec> = (1..=len)
        .map(|i| kron_row(i, dim).expect("row in range"))
        .collect();
    let violations: Vec<TheoremViolation> = (0..len)
        .into_par_iter()
        .flat_map_iter(|m| {
            let shifts = shift_set(m, dim).expect("m < N");
            let band = ToeplitzUT::d_matrix(m, len).expect("m < N");
            let rows = &rows;
            (1..=len).filter_map(move |k| {
                let expected = if m > 0 && k + m <= len {
                    rows[k - 1].xor(&rows[k + m - 1]).expect("equal lengths")
                } else {
                    rows[k - 1].clone()
                };
                let shifted = rows[k - 1].apply_shift_set(&shifts).expect("equal lengths");
                let band_row =
                    polar_encode(&band.row(k).expect("k in range"), dim).expect("length N");
                (shifted != expected || band_row != expected).then_some(TheoremViolation {
                    m,
                    k,
                    expected,
                    shifted,
                    band: band_row,
                })
            })
        })
        .collect();
    TheoremReport {
        dim,
        rows_checked: len * len,
        violations,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Prop1Mode {
    Exhaustive,
    Randomized { samples: u64, seed: u64 },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Prop1Violation {
    pub spec: RowSumSpec,
    pub shifts: ShiftSet,
    pub weight: usize,
    pub bound: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Prop1Report {
    pub dim: PolarDim,
    pub mode: Prop1Mode,
    pub checks: u64,
    pub violations: Vec<Prop1Violation>,
}

impl Prop1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Prop1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Prop1Mode::Exhaustive => "exhaustive".to_string(),
            Prop1Mode::Randomized { samples, seed } => {
                format!("randomized samples={samples} seed={seed}")
            }
        };
        writeln!(
            f,
            "odd-shift weight bound N={} ({mode}): {} checks, {} violations",
            self.dim.len(),
            self.checks,
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(
                f,
                "  i={} mask={:?} shifts={} weight={} < {}",
                v.spec.i, v.spec.mask, v.shifts, v.weight, v.bound
            )?;
        }
        Ok(())
    }
}

fn check_prop1(dim: PolarDim, spec: &RowSumSpec, shifts: &ShiftSet) -> Option<Prop1Violation> {
    let bound = row_weight(spec.i, dim).expect("valid row");
    let weight = row_sum(spec, dim)
        .expect("valid spec")
        .apply_shift_set(shifts)
        .expect("length N")
        .weight();
    (weight < bound).then(|| Prop1Violation {
        spec: spec.clone(),
        shifts: shifts.clone(),
        weight,
        bound,
    })
}

/// Checks `w(row_sum(i, mask) * sum_{l in L} C^l) >= w(g_i)` over odd-size
/// `L` in `0..N`.
///
/// Exhaustive mode walks every `(i, mask, L)` and is limited to
/// `N <= 8`. Randomized mode draws sample `s` from its own ChaCha8 stream
/// (`seed`, stream `s`): `i` uniform, mask uniform, `|L|` uniform over the
/// odd sizes, then `L` a uniform subset of that size. The report depends
/// only on `(samples, seed)`.
pub fn verify_prop1(dim: PolarDim, mode: Prop1Mode) -> Result<Prop1Report> {
    let len = dim.len();
    match mode {
        Prop1Mode::Exhaustive => {
            if len > EXHAUSTIVE_MAX_LEN {
                return Err(Error::ExhaustiveTooLarge {
                    len,
                    max: EXHAUSTIVE_MAX_LEN,
                });
            }
            let odd_sets: Vec<ShiftSet> = (0u32..1 << len)
                .filter(|s| s.count_ones() % 2 == 1)
                .map(|s| ShiftSet::new(len, (0..len).filter(|&l| s >> l & 1 == 1)).unwrap())
                .collect();
            let mut checks = 0u64;
            let mut violations = Vec::new();
            for i in 1..=len {
                for mask_bits in 0u32..1 << (len - i) {
                    let spec =
                        RowSumSpec::new(i, (0..len - i).map(|t| mask_bits >> t & 1 == 1).collect());
                    for shifts in &odd_sets {
                        checks += 1;
                        violations.extend(check_prop1(dim, &spec, shifts));
                    }
                }
            }
            Ok(Prop1Report {
                dim,
                mode,
                checks,
                violations,
            })
        }
        Prop1Mode::Randomized { samples, seed } => {
            let violations: Vec<Prop1Violation> = (0..samples)
                .into_par_iter()
                .filter_map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(s);
                    let (spec, shifts) = sample_prop1_case(dim, &mut rng);
                    check_prop1(dim, &spec, &shifts)
                })
                .collect();
            Ok(Prop1Report {
                dim,
                mode,
                checks: samples,
                violations,
            })
        }
    }
}

fn sample_prop1_case(dim: PolarDim, rng: &mut impl Rng) -> (RowSumSpec, ShiftSet) {
    let len = dim.len();
    let i = rng.random_range(1..=len);
    let mask = (0..len - i).map(|_| rng.random::<bool>()).collect();
    // odd sizes 1, 3, ..., up to len - 1 (len is even)
    let size = 2 * rng.random_range(0..len / 2) + 1;
    let picks = rand::seq::index::sample(rng, len, size);
    let shifts = ShiftSet::new(len, picks).expect("distinct picks");
    (RowSumSpec::new(i, mask), shifts)
}

/// Outcome of comparing [`equiv_encode`] with [`PacCode::encode`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EquivReport {
    pub words_checked: u64,
    pub exhaustive: bool,
    pub mismatches: Vec<BitVec>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for EquivReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "encoder equivalence ({}): {} data words checked, {} mismatches",
            if self.exhaustive {
                "full codebook"
            } else {
                "random words"
            },
            self.words_checked,
            self.mismatches.len()
        )?;
        for d in &self.mismatches {
            writeln!(f, "  d={d}")?;
        }
        Ok(())
    }
}

/// Largest K for which [`verify_equivalence`] walks the full codebook.
pub const EQUIV_EXHAUSTIVE_MAX_K: usize = 16;

/// Full codebook when `K <= 16`, otherwise `samples` random data words drawn
/// from per-sample ChaCha8 streams of `seed`.
pub fn verify_equivalence(code: &PacCode, samples: u64, seed: u64) -> Result<EquivReport> {
    let shifts = total_shift_set(code.poly(), code.dim())?;
    let k = code.k();
    let exhaustive = k <= EQUIV_EXHAUSTIVE_MAX_K;
    let count = if exhaustive { 1u64 << k } else { samples };
    let mismatches: Vec<BitVec> = (0..count)
        .into_par_iter()
        .filter_map(|w| {
            let d = if exhaustive {
                BitVec::from_bits((0..k).map(|b| w >> b & 1 == 1))
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(w);
                BitVec::from_bits((0..k).map(|_| rng.random::<bool>()))
            };
            let direct = code.encode(&d).expect("length K");
            let cyclic = equiv_encode_with(&d, code, &shifts).expect("length K");
            (direct != cyclic).then_some(d)
        })
        .collect();
    Ok(EquivReport {
        words_checked: count,
        exhaustive,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{rm_profile, RateProfile};

    fn dim(n: u32) -> PolarDim {
        PolarDim::new(n).unwrap()
    }

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn oct(s: &str) -> ConnectionPolynomial {
        ConnectionPolynomial::parse_octal(s).unwrap()
    }

    fn shifts(len: usize, l: &[usize]) -> ShiftSet {
        ShiftSet::new(len, l.iter().copied()).unwrap()
    }

    #[test]
    fn row_sums() {
        assert_eq!(
            row_sum(&RowSumSpec::new(8, vec![]), dim(3)).unwrap(),
            bv("11111111")
        );
        assert_eq!(
            row_sum(&RowSumSpec::new(1, vec![false; 7]), dim(3)).unwrap(),
            BitVec::unit(8, 1).unwrap()
        );
        assert_eq!(
            row_sum(&RowSumSpec::new(7, vec![true]), dim(3)).unwrap(),
            bv("01010101")
        );
        assert!(row_sum(&RowSumSpec::new(9, vec![]), dim(3)).is_err());
        assert!(row_sum(&RowSumSpec::new(7, vec![]), dim(3)).is_err());
    }

    #[test]
    fn shift_sets_for_g3() {
        assert_eq!(shift_set(0, dim(3)).unwrap(), shifts(8, &[0]));
        assert_eq!(shift_set(2, dim(3)).unwrap(), shifts(8, &[2]));
        assert_eq!(shift_set(3, dim(3)).unwrap(), shifts(8, &[1, 2, 3]));
        assert_eq!(shift_set(5, dim(3)).unwrap(), shifts(8, &[1, 4, 5]));
        assert_eq!(shift_set(6, dim(3)).unwrap(), shifts(8, &[2, 4, 6]));
        assert!(shift_set(8, dim(3)).is_err());
    }

    #[test]
    fn shift_sets_have_odd_size() {
        for n in 1..=6 {
            for m in 1..(1usize << n) {
                assert_eq!(shift_set(m, dim(n)).unwrap().len() % 2, 1, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn total_shift_sets() {
        assert_eq!(
            total_shift_set(&oct("133"), dim(3)).unwrap(),
            shifts(8, &[0, 2, 3, 5, 6])
        );
        assert_eq!(
            total_shift_set(&ConnectionPolynomial::identity(), dim(5)).unwrap(),
            shifts(32, &[0])
        );
        // {1} ^ {1,2,3} ^ {2,4,6} = {3,4,6}
        assert_eq!(
            total_shift_set(&oct("151"), dim(3)).unwrap(),
            shifts(8, &[3, 4, 6])
        );
        assert!(total_shift_set(&oct("3211"), dim(3)).is_err());
    }

    #[test]
    fn theorem_examples_n2() {
        let g = |i| kron_row(i, dim(2)).unwrap();
        let d2g = ["0010", "0011", "1010", "1111"];
        let s2 = shift_set(2, dim(2)).unwrap();
        assert_eq!(s2, shifts(4, &[2]));
        for (k, row) in d2g.iter().enumerate() {
            assert_eq!(g(k + 1).apply_shift_set(&s2).unwrap(), bv(row));
        }
        let d3g = ["0111", "1100", "1010", "1111"];
        let s3 = shift_set(3, dim(2)).unwrap();
        assert_eq!(s3, shifts(4, &[1, 2, 3]));
        for (k, row) in d3g.iter().enumerate() {
            assert_eq!(g(k + 1).apply_shift_set(&s3).unwrap(), bv(row));
        }
        assert!(verify_theorem(dim(2)).passed());
    }

    #[test]
    fn theorem_examples_n4() {
        let g = |i| kron_row(i, dim(4)).unwrap();
        let cases: [(usize, usize, &[usize]); 4] = [
            (12, 15, &[1, 2, 3]),
            (2, 8, &[2, 4, 6]),
            (7, 16, &[1, 8, 9]),
            (8, 15, &[1, 2, 3, 4, 5, 6, 7]),
        ];
        for (k, i, l) in cases {
            let s = shifts(16, l);
            assert_eq!(shift_set(i - k, dim(4)).unwrap(), s, "m = {}", i - k);
            assert_eq!(g(k).apply_shift_set(&s).unwrap(), g(k).xor(&g(i)).unwrap());
        }
        // k + m > N: g_6 is fixed by the shift set of m = 3 at n = 3
        let g6 = kron_row(6, dim(3)).unwrap();
        assert_eq!(
            g6.apply_shift_set(&shift_set(3, dim(3)).unwrap()).unwrap(),
            g6
        );
    }

    #[test]
    fn theorem_small_dims() {
        for n in 1..=4 {
            let report = verify_theorem(dim(n));
            assert!(report.passed(), "{report}");
            assert_eq!(report.rows_checked, 1 << (2 * n));
        }
    }

    #[test]
    fn prop1_small_exhaustive() {
        let r = verify_prop1(dim(1), Prop1Mode::Exhaustive).unwrap();
        // rows 1 and 2, masks 2 + 1, odd sets {0} and {1}
        assert_eq!(r.checks, 6);
        assert!(r.passed());
        let r = verify_prop1(dim(2), Prop1Mode::Exhaustive).unwrap();
        assert!(r.passed());
        assert!(matches!(
            verify_prop1(dim(4), Prop1Mode::Exhaustive),
            Err(Error::ExhaustiveTooLarge { .. })
        ));
    }

    #[test]
    fn prop1_randomized_is_reproducible() {
        let mode = Prop1Mode::Randomized {
            samples: 2000,
            seed: 7,
        };
        let a = verify_prop1(dim(4), mode).unwrap();
        let b = verify_prop1(dim(4), mode).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
    }

    #[test]
    fn equivalence_example_code() {
        let profile = RateProfile::new(dim(3), [4, 7, 8]).unwrap();
        let code = PacCode::new(profile, oct("151")).unwrap();
        for w in 0u32..8 {
            let d = BitVec::from_bits((0..3).map(|b| w >> b & 1 == 1));
            assert_eq!(equiv_encode(&d, &code).unwrap(), code.encode(&d).unwrap());
        }
        assert!(equiv_encode(&BitVec::zeros(3), &code).unwrap().is_zero());
        let report = verify_equivalence(&code, 0, 0).unwrap();
        assert!(report.exhaustive && report.passed());
        assert_eq!(report.words_checked, 8);
    }

    #[test]
    fn equivalence_random_words() {
        let code = PacCode::new(rm_profile(dim(6), 22).unwrap(), oct("3211")).unwrap();
        let report = verify_equivalence(&code, 500, 1).unwrap();
        assert!(!report.exhaustive);
        assert!(report.passed(), "{report}");
    }
}
