//! Randomized properties of the exact and floating-point kernels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use radlen::decomposition::bch;
use radlen::distortion::{classify_distortion, default_tgrid, RayProfile, Verdict};
use radlen::fixtures;
use radlen::group::{exp_nilpotent, expm, log_unipotent, logm, operator_norm, spectral_norm, CMat, GroupElement};
use radlen::length::{length_pi, length_pi_sym};
use radlen::linalg::QMatrix;
use radlen::pi::{witness_functional, witness_on_exp};
use radlen::scalar::{Gq, QVec};

fn gq() -> impl Strategy<Value = Gq> {
    (-12i64..=12, prop::sample::select(vec![1i64, 2, 4])).prop_map(|(n, d)| Gq::ratio(n, d))
}

fn qvec(n: usize) -> impl Strategy<Value = QVec> {
    prop::collection::vec(gq(), n)
}

fn cmat(n: usize, scale: f64) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex64::new(a * scale, b * scale)))
    })
}

/// Strictly upper triangular, not zero.
fn nilpotent4() -> impl Strategy<Value = QMatrix> {
    prop::collection::vec(-3i64..=3, 6).prop_filter("nonzero", |v| v.iter().any(|x| *x != 0)).prop_map(|v| {
        let mut m = QMatrix::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                m[(i, j)] = Gq::int(v[k]);
                k += 1;
            }
        }
        m
    })
}

fn nilpotent_fixture() -> impl Strategy<Value = fixtures::Fixture> {
    prop::sample::select(vec!["heisenberg3", "filiform4", "filiform5"]).prop_map(|n| fixtures::by_name(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unipotent_log_round_trip((f, x) in nilpotent_fixture().prop_flat_map(|f| { let n = f.dim(); (Just(f), qvec(n)) })) {
        let rep = f.rep().unwrap();
        let a = rep.image(&x);
        let g = exp_nilpotent(&a).unwrap();
        prop_assert_eq!(&log_unipotent(&g).unwrap(), &a);
        prop_assert_eq!(exp_nilpotent(&log_unipotent(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn bch_matches_the_matrix_oracle((f, x, y) in nilpotent_fixture().prop_flat_map(|f| { let n = f.dim(); (Just(f), qvec(n), qvec(n)) })) {
        let rep = f.rep().unwrap();
        let z = bch(&f.algebra, &x, &y).unwrap();
        let prod = exp_nilpotent(&rep.image(&x)).unwrap().mul(&exp_nilpotent(&rep.image(&y)).unwrap());
        prop_assert_eq!(rep.image(&z), log_unipotent(&prod).unwrap());
    }

    #[test]
    fn logm_inverts_expm(a in cmat(4, 0.4)) {
        let e = expm(&a).to_plain();
        let l = logm(&e).unwrap();
        prop_assert!((&l - &a).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn spectral_norm_agrees_with_svd(a in cmat(5, 10.0)) {
        let svd = a.clone().svd(false, false).singular_values.max();
        prop_assert!((spectral_norm(&a) - svd).abs() <= 1e-10 * svd.max(1e-300));
    }

    #[test]
    fn operator_norm_is_submultiplicative(a in cmat(4, 3.0), b in cmat(4, 3.0)) {
        prop_assert!(operator_norm(&(&a * &b)) <= operator_norm(&a) * operator_norm(&b) * (1.0 + 1e-10));
    }

    #[test]
    fn log_norm_lengths_are_subadditive((f, x, y) in nilpotent_fixture().prop_flat_map(|f| { let n = f.dim(); (Just(f), qvec(n), qvec(n)) })) {
        let rep = f.rep().unwrap();
        let (g, h) = (GroupElement::exp(rep, &x), GroupElement::exp(rep, &y));
        for l in [length_pi(rep), length_pi_sym(rep)] {
            let lhs = l.eval(&g.mul(&h)).unwrap();
            prop_assert!(lhs <= l.eval(&g).unwrap() + l.eval(&h).unwrap() + 1e-10);
        }
    }

    #[test]
    fn witness_constraints_hold(a in nilpotent4()) {
        let w = witness_functional(&a).unwrap();
        let pair = |m: &QMatrix| -> Gq {
            w.unit.entries().iter().zip(m.entries()).fold(Gq::int(0), |s, (f, x)| s + f * x)
        };
        prop_assert_eq!(pair(&QMatrix::identity(4)), Gq::int(0));
        prop_assert_eq!(pair(&a), Gq::int(1));
        for k in 2..w.index as u32 {
            prop_assert_eq!(pair(&a.pow(k)), Gq::int(0));
        }
        let on_exp = witness_on_exp(&w, &a);
        prop_assert!((on_exp.re - w.scale).abs() <= 1e-9 * w.scale && on_exp.im.abs() <= 1e-9 * w.scale);
    }

    #[test]
    fn synthetic_profiles_are_recovered(a in 0.1f64..100.0, b in -10.0f64..10.0, w in 1u32..=6) {
        let t: Vec<f64> = default_tgrid().iter().map(Gq::abs_f64).collect();
        let log = RayProfile::from_values(t.clone(), t.iter().map(|x| a * x.ln_1p() + b).collect());
        prop_assert_eq!(classify_distortion(&log, 6).verdict, Verdict::Logarithmic);
        let p = 1.0 / w as f64;
        let pow = RayProfile::from_values(t.clone(), t.iter().map(|x| a * x.powf(p) + b).collect());
        match classify_distortion(&pow, 6).verdict {
            Verdict::Power { p: q, fitted } => {
                prop_assert_eq!(q, p);
                prop_assert!((fitted - p).abs() < 0.02);
            }
            v => prop_assert!(false, "{:?}", v),
        }
    }
}
