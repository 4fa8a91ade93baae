//! Fano sequential decoding of PAC codes over the polar tree.
//!
//! The search runs over the carrier bits `v_1..v_N`. Depth `i` branches on
//! `v_i` when `i` is in the rate profile and is forced to `v_i = 0`
//! otherwise. Either way the convolution output
//! `u_i = v_i ^ sum_{t>=1} c_t v_{i-t}` is scored against the successive
//! cancellation LLR of position `i` with
//! `gamma = 1 - log2(1 + exp(-(1 - 2 u_i) lambda_i)) - bias`.
//!
//! Threshold handling follows the classic Fano rules: move forward when the
//! best untried child clears the threshold (tightening it on a first visit),
//! otherwise step back if the parent clears it and try its next child, or
//! lower the threshold by `delta` and retry the best child.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::pac::{extract_data, PacCode};
use crate::polar::polar_transform_bits;

/// Lower clip for branch metrics.
pub const METRIC_FLOOR: f64 = -1.0e4;

pub const DEFAULT_DELTA: f64 = 2.0;

/// Default visit cap is this many forward moves per code bit.
pub const DEFAULT_VISITS_PER_BIT: u64 = 1_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlrDomain {
    /// `2 atanh(tanh(a/2) tanh(b/2))`.
    #[default]
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    MinSum,
}

/// Which length divides the forward-visit count in the ANV figure.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub enum AnvDenominator {
    /// Visits per code bit (`N`).
    #[default]
    #[serde(rename = "N")]
    CodeLength,
    /// Visits per data bit (`K`).
    #[serde(rename = "K")]
    DataLength,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DecoderConfig {
    pub delta: f64,
    pub bias: f64,
    pub max_visits: u64,
    pub llr_domain: LlrDomain,
    pub anv_denominator: AnvDenominator,
}

impl DecoderConfig {
    /// Defaults for `code`: `delta = 2`, bias equal to the code rate, and a
    /// cap of `10^6 N` forward visits.
    pub fn for_code(code: &PacCode) -> Self {
        Self {
            delta: DEFAULT_DELTA,
            bias: code.rate(),
            max_visits: DEFAULT_VISITS_PER_BIT * code.len() as u64,
            llr_domain: LlrDomain::Exact,
            anv_denominator: AnvDenominator::CodeLength,
        }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta {} must be positive",
                self.delta
            )));
        }
        if !self.bias.is_finite() {
            return Err(Error::Config("bias must be finite".into()));
        }
        if self.max_visits < len as u64 {
            return Err(Error::Config(format!(
                "max_visits {} below block length {len}",
                self.max_visits
            )));
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct DecodeResult {
    pub v_hat: BitVec,
    pub d_hat: BitVec,
    pub forward_visits: u64,
    pub anv: f64,
    pub timed_out: bool,
}

/// Check-node update.
pub fn f_update(a: f64, b: f64, domain: LlrDomain) -> f64 {
    let m = a.abs().min(b.abs());
    let signed = if (a < 0.0) != (b < 0.0) { -m } else { m };
    match domain {
        LlrDomain::MinSum => signed,
        LlrDomain::Exact => {
            signed + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
        }
    }
}

/// Variable-node update given the partial-sum bit of the upper branch.
pub fn g_update(a: f64, b: f64, u: u8) -> f64 {
    if u & 1 == 0 {
        b + a
    } else {
        b - a
    }
}

/// `1 - log2(1 + exp(-(1 - 2u) lambda)) - bias`, clipped at [`METRIC_FLOOR`].
pub fn branch_metric(lambda: f64, u_bit: u8, bias: f64) -> f64 {
    let x = if u_bit & 1 == 0 { lambda } else { -lambda };
    let ln_term = if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    };
    (1.0 - ln_term / std::f64::consts::LN_2 - bias).max(METRIC_FLOOR)
}

/// Incremental successive-cancellation LLR tree.
///
/// `alpha[s]` holds the LLRs of the size-`2^s` block containing the most
/// recently evaluated position. A stored block stays valid for a new
/// position in the same block as long as no bit before the block start has
/// changed since, so only the levels below the first valid one are redone.
struct ScTree {
    levels: usize,
    alpha: Vec<Vec<f64>>,
    u: Vec<u8>,
    last: Option<usize>,
    dirty_from: usize,
    domain: LlrDomain,
    scratch: Vec<u8>,
}

impl ScTree {
    fn new(llrs: &[f64], domain: LlrDomain) -> Self {
        let len = llrs.len();
        let levels = len.trailing_zeros() as usize;
        let mut alpha: Vec<Vec<f64>> = (0..levels).map(|s| vec![0.0; 1 << s]).collect();
        alpha.push(llrs.to_vec());
        Self {
            levels,
            alpha,
            u: vec![0; len],
            last: None,
            dirty_from: usize::MAX,
            domain,
            scratch: vec![0; len / 2],
        }
    }

    fn set_bit(&mut self, pos: usize, bit: u8) {
        if self.u[pos] != bit || self.dirty_from > pos {
            self.u[pos] = bit;
            self.dirty_from = self.dirty_from.min(pos);
        }
    }

    /// LLR of 0-based position `i` given the bits currently stored before it.
    fn llr(&mut self, i: usize) -> f64 {
        let start = match self.last {
            None => self.levels,
            Some(last) => (0..=self.levels)
                .find(|&s| i >> s == last >> s && (i >> s) << s <= self.dirty_from)
                .expect("top level is always shared"),
        };
        for t in (0..start).rev() {
            let size = 1usize << t;
            let block = i >> t;
            let (lower, upper) = self.alpha.split_at_mut(t + 1);
            let child = &mut lower[t];
            let parent = &upper[0];
            if block & 1 == 0 {
                for k in 0..size {
                    child[k] = f_update(parent[k], parent[k + size], self.domain);
                }
            } else {
                let from = (block - 1) << t;
                let partial = &mut self.scratch[..size];
                partial.copy_from_slice(&self.u[from..from + size]);
                polar_transform_bits(partial);
                for k in 0..size {
                    child[k] = g_update(parent[k], parent[k + size], partial[k]);
                }
            }
        }
        self.last = Some(i);
        self.dirty_from = usize::MAX;
        self.alpha[0][0]
    }
}

fn check_llr_len(llrs: &[f64], expected: Option<usize>) -> Result<()> {
    let len = llrs.len();
    if let Some(expected) = expected {
        if len != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: len,
            });
        }
    }
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Config(format!(
            "LLR vector length {len} is not a power of two >= 2"
        )));
    }
    Ok(())
}

/// LLR of bit `|u_prefix| + 1` of `u` given channel LLRs and the decided
/// prefix, via the `f`/`g` recursions.
pub fn path_llr(llrs: &[f64], u_prefix: &[u8], domain: LlrDomain) -> Result<f64> {
    check_llr_len(llrs, None)?;
    if u_prefix.len() >= llrs.len() {
        return Err(Error::LengthMismatch {
            expected: llrs.len() - 1,
            found: u_prefix.len(),
        });
    }
    let mut tree = ScTree::new(llrs, domain);
    for (pos, &b) in u_prefix.iter().enumerate() {
        tree.set_bit(pos, b & 1);
    }
    Ok(tree.llr(u_prefix.len()))
}

#[derive(Clone, Copy)]
struct Branch {
    v: u8,
    u: u8,
    gamma: f64,
}

/// Runs the Fano search; a visit-cap timeout is reported in the result.
pub fn fano_decode(llrs: &[f64], code: &PacCode, cfg: &DecoderConfig) -> Result<DecodeResult> {
    let len = code.len();
    check_llr_len(llrs, Some(len))?;
    cfg.validate(len)?;

    let info = code.profile().info_mask();
    let taps: Vec<usize> = code.poly().support().skip(1).collect();
    let mut tree = ScTree::new(llrs, cfg.llr_domain);

    let mut v = vec![0u8; len];
    let mut path_metric = vec![0.0f64; len + 1];
    let dummy = Branch {
        v: 0,
        u: 0,
        gamma: 0.0,
    };
    let mut branches = vec![[dummy; 2]; len];
    let mut n_branches = vec![0usize; len];
    let mut choice = vec![0usize; len];

    let expand = |depth: usize,
                  v: &[u8],
                  tree: &mut ScTree,
                  branches: &mut [[Branch; 2]],
                  n_branches: &mut [usize]| {
        let lambda = tree.llr(depth);
        let carry = taps
            .iter()
            .take_while(|&&t| t <= depth)
            .fold(0u8, |acc, &t| acc ^ v[depth - t]);
        let zero = Branch {
            v: 0,
            u: carry,
            gamma: branch_metric(lambda, carry, cfg.bias),
        };
        if info[depth] {
            let one = Branch {
                v: 1,
                u: carry ^ 1,
                gamma: branch_metric(lambda, carry ^ 1, cfg.bias),
            };
            branches[depth] = if one.gamma > zero.gamma {
                [one, zero]
            } else {
                [zero, one]
            };
            n_branches[depth] = 2;
        } else {
            branches[depth] = [zero, dummy];
            n_branches[depth] = 1;
        }
    };

    let delta = cfg.delta;
    let mut threshold = 0.0f64;
    let mut depth = 0usize;
    let mut visits = 0u64;
    let mut timed_out = false;
    expand(0, &v, &mut tree, &mut branches, &mut n_branches);
    choice[0] = 0;

    loop {
        let branch = branches[depth][choice[depth]];
        let forward = path_metric[depth] + branch.gamma;
        if forward >= threshold {
            if path_metric[depth] < threshold + delta {
                threshold += ((forward - threshold) / delta).floor() * delta;
            }
            v[depth] = branch.v;
            tree.set_bit(depth, branch.u);
            path_metric[depth + 1] = forward;
            visits += 1;
            depth += 1;
            if depth == len {
                break;
            }
            if visits >= cfg.max_visits {
                timed_out = true;
                break;
            }
            expand(depth, &v, &mut tree, &mut branches, &mut n_branches);
            choice[depth] = 0;
        } else {
            loop {
                if depth == 0 {
                    threshold -= delta;
                    choice[0] = 0;
                    break;
                }
                if path_metric[depth - 1] >= threshold {
                    depth -= 1;
                    if choice[depth] + 1 < n_branches[depth] {
                        choice[depth] += 1;
                        break;
                    }
                } else {
                    threshold -= delta;
                    choice[depth] = 0;
                    break;
                }
            }
        }
    }

    for bit in v.iter_mut().skip(depth) {
        *bit = 0;
    }
    let v_hat = BitVec::from_bits(v.iter().map(|&b| b == 1));
    let d_hat = extract_data(&v_hat, code.profile())?;
    let denom = match cfg.anv_denominator {
        AnvDenominator::CodeLength => len,
        AnvDenominator::DataLength => code.k(),
    };
    Ok(DecodeResult {
        v_hat,
        d_hat,
        forward_visits: visits,
        anv: visits as f64 / denom as f64,
        timed_out,
    })
}

/// Largest K accepted by [`ml_decode_oracle`].
pub const ML_MAX_K: usize = 16;

/// Exhaustive maximum-correlation decoding. Data words are tried in
/// increasing value of `sum_k d_k 2^(k-1)`; the first maximum wins.
pub fn ml_decode_oracle(llrs: &[f64], code: &PacCode) -> Result<BitVec> {
    let k = code.k();
    if k > ML_MAX_K {
        return Err(Error::EnumerationGuard { k, guard: ML_MAX_K });
    }
    check_llr_len(llrs, Some(code.len()))?;
    let gen = code.effective_generator();
    let mut best_word = 0u32;
    let mut best_corr = f64::NEG_INFINITY;
    for w in 0u32..1 << k {
        let mut x = BitVec::zeros(code.len());
        for (b, row) in gen.iter().enumerate() {
            if w >> b & 1 == 1 {
                x.xor_assign(row)?;
            }
        }
        let corr: f64 = llrs
            .iter()
            .enumerate()
            .map(|(i, &l)| if x.get(i + 1) { -l } else { l })
            .sum();
        if corr > best_corr {
            best_corr = corr;
            best_word = w;
        }
    }
    Ok(BitVec::from_bits((0..k).map(|b| best_word >> b & 1 == 1)))
}
