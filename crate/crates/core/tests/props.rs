mod common;

use deformexp::io;
use deformexp::lab::{DeformedFn, LabFunction};
use deformexp::operator::{loewner2_det, psd_order_leq, PSD_TOL};
use deformexp::random;
use deformexp::state::{self, ModelConfig};
use deformexp::{scalar, DeformationParameter, ScalarEvalConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn exp_log_round_trip(u in -1e4f64..1e4, lam in 0.05f64..20.0) {
        let p = DeformationParameter::new(lam).unwrap();
        let w = scalar::exp_phi_ln(u, p, &ScalarEvalConfig::default()).unwrap();
        // log_φ(e^w), which stays finite after e^w underflows
        let back = w.exp_m1() + lam * w;
        prop_assert!((back - u).abs() <= 1e-10 * (1.0 + u.abs()));
        if w > -700.0 {
            let direct = scalar::log_phi(w.exp(), p).unwrap();
            prop_assert!((direct - u).abs() <= 1e-10 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn exp_phi_is_increasing(a in -100f64..100.0, d in 1e-6f64..10.0) {
        let c = ScalarEvalConfig::default();
        let p = DeformationParameter::UNIT;
        prop_assert!(scalar::exp_phi(a, p, &c).unwrap() < scalar::exp_phi(a + d, p, &c).unwrap());
    }

    #[test]
    fn matrix_file_round_trip(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = random::seeded(seed);
        let m = random::hermitian(&mut rng, n, 3.0);
        let back = io::matrix_from_json(&io::matrix_to_json(&m)).unwrap();
        prop_assert_eq!(back.max_abs_diff(&m).unwrap(), 0.0);
    }

    #[test]
    fn loewner_determinant_is_symmetric(u in -20f64..20.0, v in -20f64..20.0) {
        let f = DeformedFn::new(LabFunction::LogExpPhi, DeformationParameter::UNIT);
        let a = loewner2_det(&f, u, v).unwrap().determinant;
        let b = loewner2_det(&f, v, u).unwrap().determinant;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normalization_is_decreasing(seed in any::<u64>(), b in -5f64..5.0, d in 1e-3f64..3.0) {
        let mut rng = random::seeded(seed);
        let rho = random::density(&mut rng, 3).unwrap();
        let dir = random::direction(&mut rng, &rho, 1.0).unwrap();
        let c = ModelConfig::default();
        let lo = state::normalization_value(&dir, b, &c).unwrap();
        let hi = state::normalization_value(&dir, b + d, &c).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn order_is_reflexive(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = random::seeded(seed);
        let m = random::hermitian(&mut rng, n, 10.0);
        prop_assert!(psd_order_leq(&m, &m, PSD_TOL).unwrap());
    }

    #[test]
    fn alpha_matches_classical_on_diagonals(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = random::seeded(seed);
        let p = random::probability(&mut rng, n);
        let k = random::centered_values(&mut rng, &p, 2.0);
        let c = ModelConfig::default();
        let rho = state::FaithfulDensity::new(common::diag(&p)).unwrap();
        let d = state::Direction::new(&rho, common::diag(&k)).unwrap();
        let alpha = state::solve_alpha(&d, &c).unwrap();
        prop_assert!((alpha - common::classical_alpha(&p, &k, 1.0)).abs() < 1e-10);
    }
}
