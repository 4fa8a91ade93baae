use pac_core::channel::{llr, modulate, transmit, ChannelConfig, RngStream};
use pac_core::fano::{fano_decode, ml_decode_oracle, AnvDenominator, DecoderConfig, LlrDomain};
use pac_core::pac::insert_data;
use pac_core::polar::{polar_encode, rm_profile};
use pac_core::{BitVec, ConnectionPolynomial, PacCode, PolarDim, RateProfile};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;

/// Textbook recursive successive cancellation with hard decisions
/// (`u = 1` iff the LLR is negative). Returns `u_hat`.
fn sc_reference(llrs: &[f64], frozen: &[bool], minsum: bool) -> Vec<u8> {
    fn f(a: f64, b: f64, minsum: bool) -> f64 {
        if minsum {
            a.signum() * b.signum() * a.abs().min(b.abs())
        } else {
            2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh()
        }
    }
    // returns (u_hat, x_hat) for this subtree
    fn rec(l: &[f64], frozen: &[bool], minsum: bool) -> (Vec<u8>, Vec<u8>) {
        if l.len() == 1 {
            let u = if frozen[0] { 0 } else { (l[0] < 0.0) as u8 };
            return (vec![u], vec![u]);
        }
        let h = l.len() / 2;
        let left: Vec<f64> = (0..h).map(|k| f(l[k], l[k + h], minsum)).collect();
        let (u1, x1) = rec(&left, &frozen[..h], minsum);
        let right: Vec<f64> = (0..h)
            .map(|k| l[k + h] + if x1[k] == 1 { -l[k] } else { l[k] })
            .collect();
        let (u2, x2) = rec(&right, &frozen[h..], minsum);
        let x: Vec<u8> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| a ^ b)
            .chain(x2.iter().copied())
            .collect();
        (u1.into_iter().chain(u2).collect(), x)
    }
    rec(llrs, frozen, minsum).0
}

fn noisy_llrs(code: &PacCode, snr: f64, seed: u64, trial: u64) -> (BitVec, Vec<f64>) {
    let ch = ChannelConfig::new(snr, code.rate()).unwrap();
    let mut rng = RngStream::new(seed, trial).rng();
    let d = BitVec::from_bits((0..code.k()).map(|_| rng.random::<bool>()));
    let y = transmit(&modulate(&code.encode(&d).unwrap()), &ch, &mut rng);
    (d, llr(&y, &ch))
}

#[test]
fn without_backtracking_fano_is_sc() {
    for n in 1..=4u32 {
        let dim = PolarDim::new(n).unwrap();
        let len = dim.len();
        for trial in 0..200u64 {
            let mut rng = RngStream::new(77, trial + 1000 * n as u64).rng();
            let k = rng.random_range(1..=len);
            let profile =
                RateProfile::new(dim, sample(&mut rng, len, k).into_iter().map(|i| i + 1)).unwrap();
            let code = PacCode::polar(profile);
            let llrs: Vec<f64> = (0..len).map(|_| rng.random_range(-6.0..6.0)).collect();
            let frozen: Vec<bool> = code.profile().info_mask().iter().map(|b| !b).collect();
            for (domain, minsum) in [(LlrDomain::Exact, false), (LlrDomain::MinSum, true)] {
                // huge delta and a large negative bias keep every metric
                // increment positive, so the threshold never forces a step back
                let cfg = DecoderConfig {
                    delta: 1e12,
                    bias: -1e6,
                    max_visits: 10 * len as u64,
                    llr_domain: domain,
                    anv_denominator: AnvDenominator::CodeLength,
                };
                let r = fano_decode(&llrs, &code, &cfg).unwrap();
                let u_sc = sc_reference(&llrs, &frozen, minsum);
                assert_eq!(r.v_hat.to_bits(), u_sc, "n={n} trial={trial} {domain:?}");
                assert_eq!(r.forward_visits, len as u64);
            }
        }
    }
}

#[test]
fn decoded_words_are_codewords() {
    let dim = PolarDim::new(5).unwrap();
    let code = PacCode::new(
        rm_profile(dim, 16).unwrap(),
        ConnectionPolynomial::parse_octal("133").unwrap(),
    )
    .unwrap();
    let cfg = DecoderConfig::for_code(&code);
    let frozen: Vec<usize> = (1..=32).filter(|&i| !code.profile().contains(i)).collect();
    for t in 0..300 {
        let (_, l) = noisy_llrs(&code, 1.0, 5, t);
        let r = fano_decode(&l, &code, &cfg).unwrap();
        assert!(r.anv >= 1.0);
        assert!(frozen.iter().all(|&i| !r.v_hat.get(i)));
        assert_eq!(insert_data(&r.d_hat, code.profile()).unwrap(), r.v_hat);
        // same input, same output
        assert_eq!(fano_decode(&l, &code, &cfg).unwrap(), r);
    }
}

#[test]
fn anv_denominator_flag() {
    let dim = PolarDim::new(4).unwrap();
    let code = PacCode::new(
        rm_profile(dim, 5).unwrap(),
        ConnectionPolynomial::parse_octal("13").unwrap(),
    )
    .unwrap();
    let (_, l) = noisy_llrs(&code, 0.0, 1, 1);
    let mut cfg = DecoderConfig::for_code(&code);
    let per_n = fano_decode(&l, &code, &cfg).unwrap();
    cfg.anv_denominator = AnvDenominator::DataLength;
    let per_k = fano_decode(&l, &code, &cfg).unwrap();
    assert_eq!(per_n.forward_visits, per_k.forward_visits);
    assert!((per_k.anv * 5.0 - per_n.anv * 16.0).abs() < 1e-9);
}

#[test]
fn ml_oracle_matches_direct_enumeration() {
    let code = PacCode::new(
        RateProfile::new(PolarDim::new(3).unwrap(), [4, 7, 8]).unwrap(),
        ConnectionPolynomial::parse_octal("151").unwrap(),
    )
    .unwrap();
    for t in 0..200 {
        let (_, l) = noisy_llrs(&code, 0.0, 8, t);
        let score = |w: u32| {
            let d = BitVec::from_bits((0..3).map(|b| w >> b & 1 == 1));
            let x = code.encode(&d).unwrap();
            let s: f64 = (1..=8)
                .map(|p| if x.get(p) { -l[p - 1] } else { l[p - 1] })
                .sum();
            (s, d)
        };
        let best = (0..8u32)
            .map(score)
            .fold(None::<(f64, BitVec)>, |acc, (s, d)| match acc {
                Some((bs, _)) if bs >= s => acc,
                _ => Some((s, d)),
            });
        assert_eq!(ml_decode_oracle(&l, &code).unwrap(), best.unwrap().1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_recovery(n in 2u32..=6, seed in any::<u64>(), poly in prop::sample::select(vec!["1", "3", "13", "133"])) {
        let dim = PolarDim::new(n).unwrap();
        let poly = ConnectionPolynomial::parse_octal(poly).unwrap();
        prop_assume!(poly.memory() < dim.len());
        let mut rng = RngStream::new(seed, 0).rng();
        let k = rng.random_range(1..=dim.len());
        let code = PacCode::new(rm_profile(dim, k).unwrap(), poly).unwrap();
        let d = BitVec::from_bits((0..k).map(|_| rng.random::<bool>()));
        let x = code.encode(&d).unwrap();
        let ch = ChannelConfig::noiseless(code.rate()).unwrap();
        let l = llr(&transmit(&modulate(&x), &ch, &mut rng), &ch);
        let r = fano_decode(&l, &code, &DecoderConfig::for_code(&code)).unwrap();
        prop_assert_eq!(r.d_hat, d);
        prop_assert_eq!(r.forward_visits, dim.len() as u64);
        prop_assert!(!r.timed_out);
    }

    #[test]
    fn polar_encode_of_sc_estimate_is_consistent(n in 1u32..=5, seed in any::<u64>()) {
        // the decoded carrier re-encodes to a codeword of the same code
        let dim = PolarDim::new(n).unwrap();
        let mut rng = RngStream::new(seed, 3).rng();
        let k = rng.random_range(1..=dim.len());
        let code = PacCode::polar(rm_profile(dim, k).unwrap());
        let l: Vec<f64> = (0..dim.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let r = fano_decode(&l, &code, &DecoderConfig::for_code(&code)).unwrap();
        prop_assert_eq!(polar_encode(&r.v_hat, dim).unwrap(), code.encode(&r.d_hat).unwrap());
    }
}
