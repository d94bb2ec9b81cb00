use std::collections::BTreeSet;

use heckelab::arith::{divisors, kronecker};
use heckelab::quadfield::*;
use proptest::prelude::*;

/// Reduced primitive forms of discriminant `disc`, by direct search.
fn brute_reduced(disc: i64) -> BTreeSet<(i64, i64, i64)> {
    let mut out = BTreeSet::new();
    let amax = ((-disc as f64) / 3.0).sqrt() as i64 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if heckelab::arith::gcd(heckelab::arith::gcd(a, b), c) == 1 {
                out.insert((a, b, c));
            }
        }
    }
    out
}

#[test]
fn ideal_counts_match_divisor_sums() {
    for d in [-4i64, -23, -47] {
        let k = make_field(d).unwrap();
        let mut counts = vec![0i64; 10_001];
        for a in k.enumerate_ideals(10_000.0) {
            counts[a.norm() as usize] += 1;
        }
        for n in 1..=10_000i64 {
            let expect: i64 = divisors(n).iter().map(|&e| kronecker(d, e) as i64).sum();
            assert_eq!(counts[n as usize], expect, "D = {d}, n = {n}");
        }
    }
}

#[test]
fn class_numbers_by_two_routes() {
    for (d, h) in [(-3i64, 1i64), (-4, 1), (-7, 1), (-23, 3), (-47, 5), (-71, 7), (-56, 4)] {
        let k = make_field(d).unwrap();
        assert_eq!(k.h, h);
        assert_eq!(k.class_number_by_ideals(), h, "D = {d}");
        assert_eq!(brute_reduced(d).len() as i64, h);
    }
    let g = class_group(-100).unwrap();
    assert_eq!(g.order(), 2);
    assert_eq!(brute_reduced(-100).len(), 2);
    assert_eq!(make_field(-4).unwrap().ring_class_number(5), 2);
}

#[test]
fn ring_class_numbers_match_form_counts() {
    for d in [-4i64, -7, -23] {
        let k = make_field(d).unwrap();
        for c in [2i64, 3, 4, 5, 6, 9, 25] {
            let forms = brute_reduced(c * c * d).len() as i64;
            assert_eq!(k.ring_class_number(c), forms, "D = {d}, c = {c}");
            assert_eq!(class_group(c * c * d).unwrap().order(), forms);
        }
    }
}

#[test]
fn reduced_forms_match_search() {
    for disc in [-20i64, -23, -84, -368, -400] {
        let got: BTreeSet<(i64, i64, i64)> = reduced_forms(disc).iter().map(|f| (f.a, f.b, f.c)).collect();
        assert_eq!(got, brute_reduced(disc), "disc = {disc}");
    }
}

#[test]
fn rejects_bad_discriminants() {
    assert!(matches!(make_field(-12), Err(QuadFieldError::NonFundamental(-12))));
    assert!(make_field(5).is_err());
    assert!(class_group(-5).is_err());
}

#[test]
fn splitting_types() {
    let k = make_field(-4).unwrap();
    assert_eq!(k.splitting(2), Splitting::Ramified);
    assert_eq!(k.splitting(3), Splitting::Inert);
    assert_eq!(k.splitting(5), Splitting::Split);
    let above5 = k.prime_ideals_above(5);
    assert_eq!(above5.len(), 2);
    assert_eq!(above5[0].0.mul(&above5[1].0, -4), Ideal::from_int(5));
    assert_eq!(above5[0].0.conjugate(-4), above5[1].0);
}

#[test]
fn units_and_different() {
    assert_eq!(make_field(-4).unwrap().units().len(), 4);
    assert_eq!(make_field(-3).unwrap().units().len(), 6);
    assert_eq!(make_field(-23).unwrap().units().len(), 2);
}

fn group_forms(disc: i64) -> Vec<QuadForm> {
    class_group(disc).unwrap().forms().to_vec()
}

proptest! {
    #[test]
    fn norm_is_multiplicative(x1 in -50i64..50, y1 in -50i64..50, x2 in -50i64..50, y2 in -50i64..50,
                              d in prop::sample::select(vec![-3i64, -4, -7, -23, -47])) {
        let a = QuadInt::new(x1, y1);
        let b = QuadInt::new(x2, y2);
        prop_assert_eq!(a.mul(&b, d).norm(d), a.norm(d) * b.norm(d));
        let ia = Ideal::principal(&a, d);
        let ib = Ideal::principal(&b, d);
        prop_assert_eq!(ia.mul(&ib, d).norm(), ia.norm() * ib.norm());
        prop_assert_eq!(ia.mul(&ib, d), Ideal::principal(&a.mul(&b, d), d));
    }

    #[test]
    fn composition_is_a_group_law(i in 0usize..64, j in 0usize..64, l in 0usize..64,
                                  disc in prop::sample::select(vec![-47i64, -368, -2300, -1175])) {
        let fs = group_forms(disc);
        let (f, g, h) = (fs[i % fs.len()], fs[j % fs.len()], fs[l % fs.len()]);
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        prop_assert_eq!(f.compose(&g), g.compose(&f));
        prop_assert_eq!(f.compose(&f.inverse()), QuadForm::identity(disc));
        prop_assert!(f.compose(&g).is_reduced());
        prop_assert_eq!(f.compose(&g).discriminant(), disc);
    }

    #[test]
    fn ideal_classes_respect_products(i in 0usize..200, j in 0usize..200) {
        let k = make_field(-47).unwrap();
        let ideals = k.enumerate_ideals(120.0);
        let (a, b) = (ideals[i % ideals.len()], ideals[j % ideals.len()]);
        let g = k.class_group();
        let lhs = k.form_of_ideal(&a.mul(&b, -47));
        let rhs = k.form_of_ideal(&a).compose(&k.form_of_ideal(&b));
        prop_assert_eq!(g.dlog(&lhs), g.dlog(&rhs));
        prop_assert_eq!(k.is_principal(&a.mul(&a.conjugate(-47), -47)), true);
    }
}
