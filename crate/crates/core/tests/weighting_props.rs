use bsg_core::weighting::{prelec_weight, prelec_weight_derivative, Prelec};
use core::f64::consts::E;
use proptest::prelude::*;

proptest! {
    #[test]
    fn identity_at_alpha_one(p in 0.0f64..=1.0) {
        prop_assert!((prelec_weight(p, 1.0).unwrap() - p).abs() < 1e-14);
    }

    #[test]
    fn inverse_e_fixed_for_every_alpha(alpha in 1e-3f64..=1.0) {
        prop_assert!((prelec_weight(1.0 / E, alpha).unwrap() - 1.0 / E).abs() < 1e-14);
    }

    #[test]
    fn strictly_increasing(p1 in 1e-6f64..0.999, gap in 1e-4f64..0.5, alpha in 0.05f64..=1.0) {
        let p2 = (p1 + gap).min(0.9999);
        prop_assume!(p2 > p1);
        let w = Prelec::new(alpha).unwrap();
        prop_assert!(w.weight(p1).unwrap() < w.weight(p2).unwrap());
    }

    #[test]
    fn overweights_below_inverse_e(p in 1e-9f64..0.36, alpha in 0.05f64..0.99) {
        prop_assert!(prelec_weight(p, alpha).unwrap() > p);
    }

    #[test]
    fn underweights_above_inverse_e(p in 0.37f64..0.999_999, alpha in 0.05f64..0.99) {
        prop_assert!(prelec_weight(p, alpha).unwrap() < p);
    }
}

#[test]
fn derivative_matches_central_difference_on_grid() {
    let h = 1e-7;
    for pi in 1..=99 {
        let p = pi as f64 / 100.0;
        for ai in 2..=10 {
            let alpha = ai as f64 / 10.0;
            let fd = (prelec_weight(p + h, alpha).unwrap() - prelec_weight(p - h, alpha).unwrap()) / (2.0 * h);
            let analytic = prelec_weight_derivative(p, alpha).unwrap();
            assert!(analytic > 0.0);
            let rel = (analytic - fd).abs() / analytic;
            assert!(rel < 1e-5, "p={p} alpha={alpha}: analytic {analytic} fd {fd}");
        }
    }
}

#[test]
fn half_probability_finite_difference_oracle() {
    // central difference frozen from a 40-digit evaluation of exp(-(-ln p)^0.5)
    let h = 1e-7;
    let fd = (prelec_weight(0.5 + h, 0.5).unwrap() - prelec_weight(0.5 - h, 0.5).unwrap()) / (2.0 * h);
    assert!((fd - 0.522_412_302_614_846_8).abs() < 1e-8);
    assert!((prelec_weight_derivative(0.5, 0.5).unwrap() - fd).abs() < 1e-8);
}
