use pac_core::polar::{kron_row, rm_profile, row_weight};
use pac_core::weights::{code_spectrum, dmin_lower_bound, min_distance, q_function, union_bound};
use pac_core::{ConnectionPolynomial, PacCode, PolarDim, WeightSpectrum};
use proptest::prelude::*;

/// `Q(x)` by composite Simpson integration of the standard normal density
/// over `[x, x + 40]`.
fn q_simpson(x: f64) -> f64 {
    let steps = 200_000;
    let h = 40.0 / steps as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(x) + pdf(x + 40.0);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * pdf(x + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn q_function_against_quadrature() {
    for x in [0.0, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0] {
        let (a, b) = (q_function(x), q_simpson(x));
        assert!((a / b - 1.0).abs() < 1e-9, "x={x}: {a} vs {b}");
    }
    assert!((q_function(0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn union_bound_against_quadrature() {
    let dim = PolarDim::new(5).unwrap();
    let code = PacCode::new(
        rm_profile(dim, 16).unwrap(),
        ConnectionPolynomial::parse_octal("133").unwrap(),
    )
    .unwrap();
    let s = code_spectrum(&code, 30, 4).unwrap();
    let r = code.rate();
    for snr in [0.0, 2.0, 4.0, 6.0] {
        let ebn0 = 10f64.powf(snr / 10.0);
        let oracle: f64 = s
            .iter()
            .filter(|&(d, _)| d > 0)
            .map(|(d, a)| a as f64 * q_simpson((2.0 * d as f64 * r * ebn0).sqrt()))
            .sum();
        let ub = union_bound(&s, r, snr);
        assert!(
            (ub / oracle - 1.0).abs() < 1e-8,
            "{snr} dB: {ub} vs {oracle}"
        );
    }
    let a = union_bound(&s, r, 3.0);
    assert!(union_bound(&s, r, 4.0) < a && a < union_bound(&s, r, 2.0));
}

#[test]
fn rm_128_29_profile_is_the_weight_32_rows() {
    let dim = PolarDim::new(7).unwrap();
    let p = rm_profile(dim, 29).unwrap();
    let want: Vec<usize> = (1..=128)
        .filter(|i: &usize| (i - 1).count_ones() >= 5)
        .collect();
    assert_eq!(p.indices(), want.as_slice());
    assert_eq!(dmin_lower_bound(&p), 32);
}

#[test]
fn rm_profile_examples() {
    let dim = PolarDim::new(3).unwrap();
    assert_eq!(rm_profile(dim, 1).unwrap().indices(), &[8]);
    assert_eq!(rm_profile(dim, 4).unwrap().indices(), &[4, 6, 7, 8]);
    assert_eq!(
        rm_profile(dim, 8).unwrap().indices(),
        &[1, 2, 3, 4, 5, 6, 7, 8]
    );
}

#[test]
fn spectrum_csv_contract() {
    let s = WeightSpectrum::from_counts(8, 2, vec![1, 0, 0, 0, 2, 0, 0, 0, 1]).unwrap();
    let csv = s.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("weight,count"));
    let weights: Vec<usize> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(weights.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectra_are_consistent(n in 2u32..=5, k_frac in 0.0f64..1.0, poly in prop::sample::select(vec!["1", "3", "15", "133"])) {
        let dim = PolarDim::new(n).unwrap();
        let poly = ConnectionPolynomial::parse_octal(poly).unwrap();
        prop_assume!(poly.memory() < dim.len());
        let k = 1 + ((dim.len() - 1) as f64 * k_frac) as usize;
        let profile = rm_profile(dim, k).unwrap();
        let pac = PacCode::new(profile.clone(), poly).unwrap();
        let s = code_spectrum(&pac, 30, 8).unwrap();
        prop_assert_eq!(s.total(), 1u128 << k);
        prop_assert_eq!(s.count(0), 1);
        let (dmin, _) = min_distance(&s).unwrap();
        let polar = min_distance(&code_spectrum(&PacCode::polar(profile.clone()), 30, 1).unwrap()).unwrap().0;
        prop_assert!(dmin >= polar);
        prop_assert_eq!(polar, dmin_lower_bound(&profile));
        // the last row (all ones) lies in every RM-profile code
        prop_assert_eq!(s.count(dim.len()), 1);
        for (d, a) in s.iter() {
            prop_assert_eq!(a, s.count(dim.len() - d));
        }
    }

    #[test]
    fn row_weight_closed_form(n in 1u32..=6, i_frac in 0.0f64..1.0) {
        let dim = PolarDim::new(n).unwrap();
        let i = 1 + ((dim.len() - 1) as f64 * i_frac) as usize;
        prop_assert_eq!(kron_row(i, dim).unwrap().weight(), row_weight(i, dim).unwrap());
    }
}
