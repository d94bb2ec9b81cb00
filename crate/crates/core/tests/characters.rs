use std::sync::Arc;

use heckelab::characters::*;
use heckelab::quadfield::{make_field, Ideal, QuadInt};
use num_complex::Complex64;
use proptest::prelude::*;

fn characters() -> Vec<HeckeCharacter> {
    let mut out = Vec::new();
    for d in [-4i64, -7, -23, -47] {
        let k = Arc::new(make_field(d).unwrap());
        let phi = canonical_character(k.clone()).unwrap();
        out.extend(phi.galois_lifts());
        out.push(phi.clone());
    }
    let k = Arc::new(make_field(-4).unwrap());
    let phi = canonical_character(k.clone()).unwrap();
    for (c, e) in [(5i64, 1i64), (25, 1), (25, 2)] {
        let rho = ring_class_character(&k, c, &[e], Some(&[5])).unwrap();
        out.push(phi.twist(&rho).unwrap());
    }
    let k = Arc::new(make_field(-7).unwrap());
    let phi = canonical_character(k.clone()).unwrap();
    let rho = ring_class_character(&k, 9, &[1], Some(&[3])).unwrap();
    out.push(phi.twist(&rho).unwrap());
    out
}

#[test]
fn norm_and_conjugation_laws() {
    let chars = characters();
    assert!(chars.len() >= 6);
    for chi in &chars {
        let k = chi.field();
        for a in k.enumerate_ideals(1000.0) {
            let v = chi.eval_complex(&a);
            if !chi.is_coprime_to_conductor(&a) {
                assert_eq!(v, Complex64::new(0.0, 0.0));
                continue;
            }
            let n = a.norm() as f64;
            assert!((v.norm_sqr() - n).abs() <= 1e-10 * n, "{a}: {v}");
            let vc = chi.eval_complex(&a.conjugate(k.d));
            assert!((vc - v.conj()).norm() <= 1e-10 * n.sqrt().max(1.0), "{a}");
        }
    }
}

#[test]
fn infinite_type_on_principal_ideals() {
    // chi((w)) = eps(w) w for w coprime to the conductor
    for chi in characters() {
        let d = chi.field().d;
        for x in -12i64..12 {
            for y in -12i64..12 {
                let w = QuadInt::new(x, y);
                if w.is_zero() || !chi.is_unit_mod_conductor(&w) {
                    continue;
                }
                let v = chi.eval_complex(&Ideal::principal(&w, d));
                let expect = chi.eps_complex(&w) * w.to_complex(d);
                assert!((v - expect).norm() < 1e-9 * expect.norm().max(1.0), "D = {d}, w = {w:?}");
            }
        }
    }
}

#[test]
fn property1_holds_and_breaks() {
    for chi in characters() {
        let r = property1_check(&chi, 1000.0);
        assert!(r.equivariant && r.kappa_matches && r.equivalence_holds);
    }
    let k = Arc::new(make_field(-4).unwrap());
    let m = Ideal::principal(&QuadInt::new(4, 1), -4).pow(2, -4);
    let units = Arc::new(unit_group_mod(&k, &m));
    let psi = ExplicitEps::new(units, vec![1], 5).unwrap();
    let eps = canonical_epsilon(&k)
        .unwrap()
        .with_component(&k, FiniteComponent::Explicit(psi));
    let broken = build_hecke_character(k, eps).unwrap();
    let r = property1_check(&broken, 1000.0);
    assert!(!r.equivariant && !r.kappa_matches);
    assert!(r.equivariance_witness.is_some() && r.kappa_witness.is_some());
    assert!(r.equivalence_holds);
}

#[test]
fn integers_go_to_kappa_n_times_n() {
    for chi in characters() {
        let k = chi.field();
        for n in 1..200i64 {
            let a = Ideal::from_int(n);
            if !chi.is_coprime_to_conductor(&a) {
                continue;
            }
            let v = chi.eval_complex(&a);
            assert!((v - Complex64::new((k.kronecker(n) as i64 * n) as f64, 0.0)).norm() < 1e-9);
        }
    }
}

#[test]
fn descriptor_round_trip() {
    for chi in characters() {
        let s = serde_json::to_string(&chi.descriptor()).unwrap();
        let back: CharacterDescriptor = serde_json::from_str(&s).unwrap();
        let again = HeckeCharacter::from_descriptor(chi.field_arc(), &back).unwrap();
        for a in chi.field().enumerate_ideals(200.0) {
            assert!((again.eval_complex(&a) - chi.eval_complex(&a)).norm() < 1e-9);
        }
    }
}

#[test]
fn unit_inconsistency_is_reported() {
    // (O / f)^x with a trivial eps cannot kill the unit -1
    let k = Arc::new(make_field(-23).unwrap());
    let p = k.prime_ideals_above(3)[0].0;
    let units = Arc::new(unit_group_mod(&k, &p));
    let trivial = ExplicitEps::new(units, vec![0], 1).unwrap();
    let eps = FinitePart::new(&k, vec![FiniteComponent::Explicit(trivial)]);
    assert!(matches!(
        build_hecke_character(k, eps),
        Err(CharacterError::UnitInconsistent(_))
    ));
}

#[test]
fn ring_class_characters_are_class_functions() {
    let k = make_field(-23).unwrap();
    let g = heckelab::quadfield::class_group(-23 * 64).unwrap();
    for e in 0..g.invariants()[0] {
        let exps: Vec<i64> = std::iter::once(e).chain(vec![0; g.invariants().len() - 1]).collect();
        let rho = ring_class_character(&k, 8, &exps, Some(&[2])).unwrap();
        for x in -10i64..10 {
            let w = QuadInt::new(x * 8 + 1, 0);
            let a = Ideal::principal(&w, -23);
            // rational integers coprime to c are trivial in Pic(O_c)
            if let Some(v) = rho.eval(&k, &a) {
                assert_eq!(v.rem_euclid(rho.level()), 0);
            }
        }
    }
    assert!(ring_class_character(&k, 9, &[1], Some(&[2])).is_err());
}

proptest! {
    #[test]
    fn multiplicative(i in 0usize..300, j in 0usize..300, which in 0usize..8) {
        let chars = characters();
        let chi = &chars[which % chars.len()];
        let k = chi.field();
        let ideals = k.enumerate_ideals(150.0);
        let (a, b) = (ideals[i % ideals.len()], ideals[j % ideals.len()]);
        let lhs = chi.eval_complex(&a.mul(&b, k.d));
        let rhs = chi.eval_complex(&a) * chi.eval_complex(&b);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }
}
