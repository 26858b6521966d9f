use std::f64::consts::TAU;

use proptest::prelude::*;
use swe_core::fields::{divergence, gradient, Spectrum};
use swe_core::inequality::{gn_theta, random_field, Exponent, Lcg64};
use swe_core::model::{curl_defect, lame_apply, psi_from_phi, RegularizationParams};
use swe_core::{Grid2D, ModelSpec, ScalarField, Variant, VectorField};

fn field(n: usize, seed: u64) -> ScalarField {
    let g = Grid2D::new(n, TAU).unwrap();
    random_field(g, &mut Lcg64::new(seed))
}

fn grad_sq(u: &VectorField) -> f64 {
    u.comps()
        .iter()
        .map(|c| {
            let d = gradient(c);
            d.dot(&d).integral()
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_round_trip(seed in any::<u64>(), log_n in 3u32..7) {
        let f = field(1 << log_n, seed);
        let back = Spectrum::forward(&f).inverse();
        prop_assert!(back.sub(&f).sup_abs() <= 1e-12 * f.sup_abs().max(1.0));
    }

    #[test]
    fn psi_from_positive_phi_is_curl_free(seed in any::<u64>(), gamma in 2.2f64..4.0) {
        let f = field(32, seed);
        let phi = f.scale(0.5 / f.sup_abs().max(1e-300)).map(|v| 1.0 + v);
        let spec = ModelSpec::new(gamma, 1.0, 1.0, 0.0, Variant::FullQ).unwrap();
        let reg = RegularizationParams::for_initial(&phi, 0.0).unwrap();
        let psi = psi_from_phi(&phi, &spec, &reg);
        prop_assert!(curl_defect(&psi) <= 1e-10 * psi.sup_abs().max(1.0));
    }

    #[test]
    fn lame_operator_is_coercive(seed in any::<u64>(), alpha in 0.1f64..3.0, shift in 0.0f64..3.0) {
        let beta = shift - alpha;
        let u = VectorField::new(field(32, seed), field(32, seed ^ 0x5555)).unwrap();
        let lu = lame_apply(&u, alpha, beta);
        let energy = lu.dot(&u).integral();
        let div = divergence(&u);
        let expected = alpha * grad_sq(&u) + (alpha + beta) * div.mul(&div).integral();
        prop_assert!(energy >= alpha * grad_sq(&u) * (1.0 - 1e-10));
        prop_assert!((energy - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn gn_exponent_is_a_fraction_of_one(p in 1i64..12, q in 1i64..24, r in 1i64..12) {
        if let Ok(theta) = gn_theta(Exponent::int(p), Exponent::int(q), Exponent::int(r)) {
            prop_assert!(*theta.numer() >= 0 && theta.numer() <= theta.denom());
        }
    }

    #[test]
    fn lame_admissibility(alpha in -2.0f64..2.0, beta in -4.0f64..4.0) {
        let ok = ModelSpec::new(2.0, 1.0, alpha, beta, Variant::FullQ).is_ok();
        prop_assert_eq!(ok, alpha > 0.0 && alpha + beta >= 0.0);
    }
}
