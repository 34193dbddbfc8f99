use germlie::complexify::{certify_cocycles, extend_transitions, WarpedCircle, CERTIFY_TOL};
use germlie::germ_group::GermGroup;
use germlie::germ_space::GermSpace;
use germlie::lie::{exp_mat, log_mat};
use germlie::random::{random_algebra_element, random_series, substream};
use germlie::{CoefficientSpace, MatrixLieBackend, TruncatedSeries};
use num_complex::Complex64;
use proptest::prelude::*;

fn origin() -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0)]
}

fn series(seed: u64, degree: usize, space: CoefficientSpace) -> TruncatedSeries {
    let mut rng = substream(seed, 0);
    random_series(&mut rng, space, origin(), 12, degree, 1.0, 1.0, 0.7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn majorant_bounds_sampled_sup(seed in 0u64..10_000, degree in 0usize..12) {
        let s = series(seed, degree, CoefficientSpace::Matrix(2));
        for rho in [0.3, 0.7, 1.0] {
            let sampled = s.sample_sup(rho, 64).unwrap();
            prop_assert!(sampled <= s.majorant_norm(rho).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn product_is_pointwise(seed in 0u64..10_000, da in 0usize..7, db in 0usize..7) {
        let a = series(seed, da, CoefficientSpace::Matrix(2));
        let b = series(seed + 1, db, CoefficientSpace::Matrix(2));
        let p = a.mul(&b).unwrap();
        let x = [Complex64::from_polar(0.5, seed as f64)];
        let direct = a.eval(&x) * b.eval(&x);
        prop_assert!((p.eval(&x) - direct).norm() <= p.tail_bound() + 1e-12);
    }

    #[test]
    fn exp_then_log_is_identity_near_zero(seed in 0u64..10_000, norm in 0.01f64..0.5) {
        let mut rng = substream(seed, 0);
        let x = random_algebra_element(&mut rng, 2, norm);
        let back = log_mat(&exp_mat(&x)).unwrap();
        prop_assert!((back - x).norm() < 1e-12);
    }

    #[test]
    fn bch_inverse_and_identity(seed in 0u64..10_000, norm in 0.01f64..0.3) {
        let lie = MatrixLieBackend::new(2);
        let mut rng = substream(seed, 0);
        let x = random_algebra_element(&mut rng, 2, norm);
        let zero = x.clone() * Complex64::new(0.0, 0.0);
        prop_assert!((lie.bch(&x, &zero).unwrap().value - &x).norm() < 1e-15);
        prop_assert!(lie.bch(&x, &(-x.clone())).unwrap().value.norm() < 1e-15);
    }

    #[test]
    fn germ_equality_is_bond_invariant(seed in 0u64..10_000) {
        let space = GermSpace::origin(CoefficientSpace::Scalar, 5);
        let p = series(seed, 6, CoefficientSpace::Scalar);
        let e = space.element(1, vec![p]).unwrap();
        let deeper = space.bond(&e, 3).unwrap();
        prop_assert!(space.germ_eq(&space.germ(e), &space.germ(deeper)).unwrap());
    }

    #[test]
    fn group_inverse_cancels(seed in 0u64..10_000, norm in 0.05f64..0.6) {
        let g = GermGroup::new(GermSpace::origin(CoefficientSpace::Matrix(2), 4), MatrixLieBackend::new(2)).unwrap();
        let mut rng = substream(seed, 0);
        let x = g.random_algebra_germ(&mut rng, 1, 3, norm).unwrap();
        let e = g.exp(&x).unwrap();
        let prod = g.group_mul(&e, &g.group_inv(&e).unwrap()).unwrap();
        let id = g.identity(prod.level()).unwrap();
        let pt = [Complex64::from_polar(0.4, seed as f64)];
        prop_assert!((prod.element().eval(&pt).unwrap() - id.element().eval(&pt).unwrap()).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn warped_circles_certify(warp in 0.0f64..0.3, height in 0.05f64..0.4) {
        let circle = WarpedCircle::new(warp, 3, 2.5).unwrap();
        let ca = extend_transitions(&circle.atlas(30).unwrap(), height).unwrap();
        let report = certify_cocycles(&ca, CERTIFY_TOL).unwrap();
        prop_assert!(report.passed, "{:?}", report.failures);
    }
}
