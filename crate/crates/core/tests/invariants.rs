//! Structural invariants checked on every built-in fixture.

use std::sync::Arc;

use radlen::decomposition::{relative_distance, tri_compose, tri_decompose, DecompContext};
use radlen::distortion::{dominates, equivalent, LevelSampler};
use radlen::fixtures::{self, Fixture};
use radlen::group::{sample_elements, GroupElement};
use radlen::length::{
    ellprime_build, length_compose_f, length_pi, length_pi_sym, phi_build, word_proxy, LengthFunction, Vetted,
};
use radlen::linalg::{QMatrix, Subspace};
use radlen::pi::check_nilpotent_image;
use radlen::scalar::unit_vec;
use radlen::suites::{self, SuiteConfig};

const SEED: u64 = 5;

fn context(f: &Fixture, n: &Subspace) -> Arc<DecompContext> {
    suites::context(f, n, SEED).unwrap_or_else(|e| panic!("{}: {e}", f.name))
}

#[test]
fn radicals_are_nested_and_nilpotent() {
    for f in fixtures::all() {
        let a = &f.algebra;
        let r = a.solvable_radical().unwrap();
        assert!(a.derived_series(&r).unwrap().reaches_zero(), "{}", f.name);
        let n = a.nilpotent_radical_from(&r).unwrap();
        assert_eq!(n, a.derived_algebra().intersect(&r), "{}", f.name);
        assert!(a.lower_central_series(&n).unwrap().reaches_zero(), "{}", f.name);
        let e = a.exponential_radical(&f.levi).unwrap();
        assert!(e.is_subspace_of(&n), "{}", f.name);
    }
}

#[test]
fn cartan_subalgebras_are_nilpotent_and_self_normalizing() {
    for f in fixtures::all() {
        let a = &f.algebra;
        let r = a.solvable_radical().unwrap();
        for seed in [1, 2, 3] {
            let h = a.cartan_subalgebra(&r, seed).unwrap();
            assert!(a.lower_central_series(&h).unwrap().reaches_zero(), "{}", f.name);
            assert_eq!(a.normalizer_in(&r, &h), h, "{}", f.name);
        }
    }
}

#[test]
fn nprime_plus_cartan_is_b_and_dtau_is_an_isomorphism() {
    for f in fixtures::all() {
        for n in f.subgroups.values() {
            let ctx = context(&f, n);
            assert_eq!(ctx.nprime.sum(&ctx.h), ctx.semidirect.b, "{}", f.name);
            let cols: Vec<_> = ctx.v.basis().iter().map(|x| ctx.quotient.project(x).unwrap()).collect();
            let q = ctx.quotient.dim();
            assert_eq!(cols.len(), q);
            if q > 0 {
                assert_eq!(QMatrix::from_columns(q, &cols).rank(), q, "{}", f.name);
            }
        }
    }
}

#[test]
fn equal_subspaces_compare_equal() {
    let a = Subspace::span(3, &[unit_vec(3, 0), unit_vec(3, 1)]);
    let b = Subspace::span(3, &[radlen::scalar::vec_add(&unit_vec(3, 0), &unit_vec(3, 1)), unit_vec(3, 1)]);
    assert_eq!(a, b);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn image_of_the_nilradical_is_exactly_nilpotent() {
    for f in fixtures::all() {
        let n = f.algebra.nilpotent_radical().unwrap();
        let rep = f.rep().unwrap();
        let report = check_nilpotent_image(rep, &n, SEED, 16);
        assert!(report.all_nilpotent, "{}", f.name);
        assert!(report.max_index <= rep.degree());
    }
}

#[test]
fn decomposition_inverts_composition() {
    for f in fixtures::all() {
        let rep = f.rep().unwrap();
        let scale = if f.is_unipotent() { 1e3 } else { 4.0 };
        let elems = sample_elements(&f.algebra, rep, SEED, 50, scale);
        for n in f.subgroups.values() {
            let ctx = context(&f, n);
            for g in &elems {
                let t = tri_decompose(g, &ctx).unwrap();
                let back = tri_compose(&t, &ctx);
                assert!(relative_distance(&g.to_scaled(), &back.to_scaled()) <= 1e-9, "{}", f.name);
                let again = tri_decompose(&back, &ctx).unwrap();
                let tol = if t.exact { 0.0 } else { 1e-6 };
                let d = radlen::scalar::vec_norm_f64(&radlen::scalar::vec_sub(&again.eta, &t.eta));
                assert!(d <= tol * (1.0 + radlen::scalar::vec_norm_f64(&t.eta)), "{}: {d}", f.name);
                assert_eq!(again.xi, t.xi, "{}", f.name);
            }
        }
    }
}

#[test]
fn norms_of_inverse_pairs_are_at_least_one() {
    for f in fixtures::all() {
        let rep = f.rep().unwrap();
        let scale = if f.is_unipotent() { 1e3 } else { 8.0 };
        for g in sample_elements(&f.algebra, rep, SEED, 100, scale) {
            let s = g.log_norm() + g.inverse(rep).log_norm();
            assert!(s >= -1e-10, "{}: {s}", f.name);
        }
    }
}

#[test]
fn symmetrized_lengths_are_symmetric_and_phi_is_deterministic() {
    for f in fixtures::all() {
        let rep = f.rep().unwrap();
        let sym = length_pi_sym(rep);
        let phi = phi_build(context(&f, &suites::default_nprime(&f).unwrap()));
        let scale = if f.is_unipotent() { 1e3 } else { 8.0 };
        for g in sample_elements(&f.algebra, rep, SEED, 100, scale) {
            assert_eq!(sym.eval(&g).unwrap(), sym.eval(&g.inverse(rep)).unwrap(), "{}", f.name);
            assert_eq!(phi.eval(&g).unwrap().to_bits(), phi.eval(&g).unwrap().to_bits());
        }
    }
}

#[test]
fn ellprime_is_equivalent_to_phi_on_every_fixture() {
    let cfg = SuiteConfig::default();
    for f in fixtures::all() {
        let ctx = context(&f, &suites::default_nprime(&f).unwrap());
        let samples = suites::level_sampler(&f, &cfg).sample(&ctx.rep);
        let eq = equivalent(&ellprime_build(ctx.clone()).unwrap(), &phi_build(ctx), &samples).unwrap();
        assert!(eq.holds, "{}: {:?} {:?}", f.name, eq.forward.growth, eq.backward.growth);
        assert!(eq.forward.c.is_finite() && eq.backward.c.is_finite());
    }
}

#[test]
fn vetted_functions_preserve_domination() {
    let f = fixtures::heisenberg3();
    let ctx = context(&f, &f.subgroups["N"]);
    let rep = f.rep().unwrap();
    let samples = LevelSampler::new(SEED, 1e6, (0..3).map(|i| unit_vec(3, i)).collect()).sample(rep);
    let pairs: Vec<(LengthFunction, LengthFunction)> =
        vec![(length_pi(rep), phi_build(ctx.clone())), (length_pi_sym(rep), ellprime_build(ctx.clone()).unwrap())];
    for (a, b) in pairs {
        assert!(dominates(&a, &b, &samples).unwrap().holds);
        for v in ["identity", "log1p", "pow:0.5", "min:3"] {
            let fv = Vetted::parse(v).unwrap();
            let d = dominates(&length_compose_f(&a, fv), &length_compose_f(&b, fv), &samples).unwrap();
            assert!(d.holds, "{v}");
        }
    }
}

#[test]
fn equivalence_is_an_equivalence_relation_on_the_catalog() {
    let f = fixtures::heisenberg3();
    let ctx = context(&f, &f.subgroups["N"]);
    let rep = f.rep().unwrap();
    let mut cat = suites::catalog(&f, &ctx).unwrap();
    cat.push(phi_build(ctx.clone()));
    cat.push(word_proxy(&f.algebra, rep).unwrap());
    let samples = LevelSampler::new(SEED, 1e6, (0..3).map(|i| unit_vec(3, i)).collect()).sample(rep);
    let k = cat.len();
    let mut eq = vec![vec![false; k]; k];
    for i in 0..k {
        for j in 0..k {
            eq[i][j] = equivalent(&cat[i], &cat[j], &samples).unwrap().holds;
        }
    }
    for i in 0..k {
        assert!(eq[i][i], "{} not reflexive", cat[i].name());
        for j in 0..k {
            assert_eq!(eq[i][j], eq[j][i]);
            for l in 0..k {
                if eq[i][j] && eq[j][l] {
                    assert!(eq[i][l], "{} {} {}", cat[i].name(), cat[j].name(), cat[l].name());
                }
            }
        }
    }
}

#[test]
fn exponential_of_nilradical_elements_is_the_matrix_exponential() {
    for f in fixtures::all() {
        let rep = f.rep().unwrap();
        let n = f.algebra.nilpotent_radical().unwrap();
        for v in n.basis() {
            let x = radlen::scalar::vec_scale(&radlen::scalar::Gq::ratio(7, 3), v);
            let g = GroupElement::exp(rep, &x);
            let expected = radlen::group::exp_nilpotent(&rep.image(&x)).unwrap();
            assert_eq!(g.exact(), Some(&expected), "{}", f.name);
        }
    }
}
