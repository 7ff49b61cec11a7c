use proptest::prelude::*;
use shuffle_rdp_core::numerics::{
    binom_central_moment, binom_scaled_central_moment, ln_binomial, ln_gamma, MomentSpec,
    SummationWindow,
};

#[test]
fn ln_gamma_agrees_with_libm() {
    let mut z = 1e-3;
    while z < 1e6 {
        let ours = ln_gamma(z).unwrap();
        let reference = libm::lgamma(z);
        let tol = 1e-13 * reference.abs().max(1.0);
        assert!((ours - reference).abs() <= tol, "z={z}: {ours} vs {reference}");
        z *= 1.37;
    }
}

#[test]
fn ln_gamma_rejects_non_positive() {
    assert!(ln_gamma(0.0).is_err());
    assert!(ln_gamma(-2.5).is_err());
    assert!(ln_gamma(f64::NAN).is_err());
}

#[test]
fn central_binomial_coefficient_matches_stirling() {
    // ln C(2m, m) = 2m ln 2 - ln(pi m)/2 - 1/(8m) + 1/(192 m^3) + ...
    let m = 500_000.0f64;
    let stirling = 2.0 * m * core::f64::consts::LN_2 - 0.5 * (core::f64::consts::PI * m).ln()
        - 1.0 / (8.0 * m)
        + 1.0 / (192.0 * m * m * m);
    let ours = ln_binomial(1_000_000, 500_000).ln();
    assert!((ours - stirling).abs() <= 1e-12 * stirling, "{ours} vs {stirling}");
}

#[test]
fn small_binomials_are_exact() {
    assert_eq!(ln_binomial(10, 3).to_linear().round(), 120.0);
    assert_eq!(ln_binomial(52, 5).to_linear().round(), 2_598_960.0);
    assert!(ln_binomial(3, 4).is_zero());
}

fn brute_force_moment(n: u64, p: f64, order: i32) -> f64 {
    let mean = n as f64 * p;
    (0..=n)
        .map(|k| {
            let pmf = ln_binomial(n, k).to_linear() * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            pmf * (k as f64 - mean).powi(order)
        })
        .sum()
}

#[test]
fn fourth_moment_of_ten_fair_coins() {
    let spec = MomentSpec::new(10, 0.5, 4).unwrap();
    let m = binom_central_moment(&spec);
    assert!((m - 17.5).abs() < 1e-12, "{m}");
    assert!((brute_force_moment(10, 0.5, 4) - 17.5).abs() < 1e-12);
}

proptest! {
    #[test]
    fn moments_match_brute_force(n in 1u64..40, p in 0.01f64..0.99, order in 2u32..9) {
        let spec = MomentSpec::new(n, p, order).unwrap();
        let ours = binom_scaled_central_moment(&spec, 1.0, SummationWindow::Full);
        let reference = brute_force_moment(n, p, order as i32);
        let scale = brute_force_moment(n, p, 2).powf(order as f64 / 2.0).max(1e-300);
        prop_assert!((ours - reference).abs() <= 1e-10 * scale, "{} vs {}", ours, reference);
    }

    #[test]
    fn windowed_moments_match_full(n in 50u64..5_000, p in 0.05f64..0.95, order in 2u32..12) {
        let spec = MomentSpec::new(n, p, order).unwrap();
        let windowed = binom_central_moment(&spec);
        let full = binom_scaled_central_moment(&spec, 1.0, SummationWindow::Full);
        let scale = binom_scaled_central_moment(&MomentSpec::new(n, p, order + order % 2).unwrap(), 1.0, SummationWindow::Full);
        prop_assert!((windowed - full).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn ln_binomial_recurrence(n in 2u64..100_000, k in 1u64..1_000) {
        prop_assume!(k < n);
        // C(n, k) = C(n-1, k-1) + C(n-1, k), checked in the log domain
        let lhs = ln_binomial(n, k).ln();
        let rhs = (ln_binomial(n - 1, k - 1) + ln_binomial(n - 1, k)).ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}
