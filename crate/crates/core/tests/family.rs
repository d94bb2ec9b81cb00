use std::sync::Arc;

use heckelab::arith::{euler_phi, gcd, moebius};
use heckelab::characters::{canonical_character, HeckeCharacter};
use heckelab::family::*;
use heckelab::lseries::{central_value, dirichlet_l1};
use heckelab::quadfield::{class_group, make_field, FieldContext, Ideal, QuadInt};
use num_complex::Complex64;
use proptest::prelude::*;

fn setup(d: i64) -> (Arc<FieldContext>, HeckeCharacter) {
    let k = Arc::new(make_field(d).unwrap());
    let phi = canonical_character(k.clone()).unwrap();
    (k, phi)
}

#[test]
fn enumeration_examples() {
    let (k, phi) = setup(-4);
    let o = enumerate_twists(&k, &phi, &[5], 5).unwrap();
    assert_eq!(o.len(), 2);
    assert_eq!((o[1].conductor, o[1].order), (5, 2));
    let only = enumerate_twists(&k, &phi, &[5], 1).unwrap();
    assert_eq!(only.len(), 1);
    assert!(only[0].rho.is_none());
    assert_eq!(supported_conductors(&[2, 3], 20), vec![1, 2, 3, 4, 6, 8, 9, 12, 16, 18]);
}

/// Characters of exact conductor `c`: those of `Pic(O_c)` not coming from
/// any `Pic(O_{c/p})`, counted by Moebius inversion over divisors of `c`.
fn exact_character_count(d: i64, c: i64) -> i64 {
    heckelab::arith::divisors(c)
        .iter()
        .map(|&e| moebius(c / e) * class_group(e * e * d).unwrap().order())
        .sum()
}

#[test]
fn orbit_sizes_match_group_enumeration() {
    for (d, p, c_max) in [(-23i64, 2i64, 4i64), (-4, 5, 125), (-7, 3, 27)] {
        let (k, phi) = setup(d);
        let orbits = enumerate_twists(&k, &phi, &[p], c_max).unwrap();
        for c in supported_conductors(&[p], c_max).into_iter().filter(|&c| c > 1) {
            let members: usize = orbits.iter().filter(|o| o.conductor == c).map(|o| o.size()).sum();
            assert_eq!(members as i64, exact_character_count(d, c), "D = {d}, c = {c}");
        }
    }
}

#[test]
fn twist_average_matches_orbit_mean() {
    let (k, phi) = setup(-4);
    let orbits = enumerate_twists(&k, &phi, &[5], 125).unwrap();
    let ideals = k.enumerate_ideals(400.0);
    let mut checked = 0;
    for o in &orbits {
        let members = o.member_characters(&phi).unwrap();
        for a in &ideals {
            let direct = members.iter().map(|m| m.eval_complex(a)).sum::<Complex64>() / members.len() as f64;
            let av = twist_average_value(&phi, o, a).unwrap();
            assert!((av.to_complex() - direct).norm() < 1e-8, "{a} c = {}", o.conductor);
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}

#[test]
fn average_zero_iff_moebius_vanishes() {
    let (k, phi) = setup(-4);
    let orbits = enumerate_twists(&k, &phi, &[5], 125).unwrap();
    for o in orbits.iter().filter(|o| o.order > 1) {
        let rho = o.rho.as_ref().unwrap();
        for a in k.enumerate_ideals(300.0) {
            if !o.chi.is_coprime_to_conductor(&a) {
                continue;
            }
            let j = rho.eval(&k, &a).unwrap() * o.order / rho.level();
            let g = gcd(j, o.order);
            let av = twist_average_value(&phi, o, &a).unwrap();
            assert_eq!(av.is_zero(), moebius(o.order / g) == 0);
            if let AverageValue::Exact { factor, .. } = av {
                let expect = moebius(o.order / g) * euler_phi(o.order) / euler_phi(o.order / g);
                assert_eq!(*factor.numer() * euler_phi(o.order) / *factor.denom(), expect);
            }
        }
    }
}

#[test]
fn count_n_examples() {
    let (k, phi) = setup(-4);
    let orbits = enumerate_twists(&k, &phi, &[5], 25).unwrap();
    let trivial = OrbitAverager::new(&phi, &orbits[0]).unwrap();
    assert_eq!(trivial.count_n(1.5, None), 0);
    assert_eq!(trivial.count_n(5.0, None), 2);
    for o in &orbits {
        let av = OrbitAverager::new(&phi, o).unwrap();
        let mut last = 0;
        for t in [2.0, 10.0, 50.0, 200.0] {
            let n = av.count_n(t, None);
            assert!(n >= last);
            assert!(n <= 2 * k.enumerate_ideals(t).len());
            last = n;
        }
        let anchors = class_anchors(&k, &o.chi.conductor());
        assert_eq!(anchors.len(), 1);
        assert_eq!(av.count_n(200.0, Some(&anchors[0])), last);
    }
}

#[test]
fn class_restricted_counts_add_up() {
    let (k, phi) = setup(-23);
    let orbits = enumerate_twists(&k, &phi, &[2], 8).unwrap();
    for o in &orbits {
        let av = OrbitAverager::new(&phi, o).unwrap();
        let anchors = class_anchors(&k, &o.chi.conductor());
        assert_eq!(anchors.len(), 3);
        let split: usize = anchors.iter().map(|a| av.count_n(300.0, Some(a))).sum();
        assert_eq!(split, av.count_n(300.0, None));
    }
}

#[test]
fn averaged_l_equals_mean_of_members() {
    let tol = 1e-12;
    let (k, phi) = setup(-4);
    for o in enumerate_twists(&k, &phi, &[5], 125).unwrap() {
        let w = heckelab::rootnumber::root_number_sign(&o.chi).unwrap();
        let v = if w == 1 { 0 } else { 1 };
        let members = o.member_characters(&phi).unwrap();
        let mean = members
            .iter()
            .map(|m| central_value(m, v, tol).unwrap().value)
            .sum::<f64>()
            / members.len() as f64;
        let av = averaged_l(&phi, &o, v, tol).unwrap();
        assert!((av - mean).abs() <= 2.0 * tol * mean.abs().max(1.0), "{av} vs {mean}");
    }
}

#[test]
fn scan_records_are_consistent() {
    let (k, phi) = setup(-4);
    let recs = scan_report(&k, &phi, &[5], 25, 1e-12, 2).unwrap();
    assert_eq!(recs.len(), 4);
    for r in &recs {
        assert!(r.error.is_none());
        assert_eq!(r.v as i32, (1 - r.w) / 2);
        assert_eq!(r.verdict, Verdict::Nonzero);
        assert!(r.lv.abs() > 1e3 * r.tail_bound);
        assert!(r.main_lemma.bound_holds);
    }
    let single = scan_report(&k, &phi, &[], 100, 1e-12, 2).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].order, 1);
    let lone = central_value(&phi, single[0].v, 1e-12).unwrap();
    assert_eq!(single[0].lv_av, lone.value);
}

#[test]
fn main_lemma_bound_on_small_family() {
    let (k, phi) = setup(-23);
    let recs = scan_report(&k, &phi, &[2], 8, 1e-12, 2).unwrap();
    assert!(recs.iter().all(|r| r.main_lemma.bound_holds));
    assert!(recs.iter().all(|r| r.verdict == Verdict::Nonzero));
}

#[test]
fn v0_averages_approach_the_imprimitive_target() {
    let (k, phi) = setup(-4);
    let recs = scan_report(&k, &phi, &[5], 625, 1e-12, 2).unwrap();
    let l1 = dirichlet_l1(&k).class_number_formula;
    let gaps: Vec<f64> = recs
        .iter()
        .filter(|r| r.v == 0 && r.orbit_size > 1)
        .map(|r| {
            assert!((r.l1_kappa - imprimitive_l1(&k, l1, &r.ramified)).abs() < 1e-15);
            (r.lv_av - 2.0 * r.l1_kappa).abs()
        })
        .collect();
    assert!(gaps.len() >= 3);
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{gaps:?}");
}

#[test]
fn verdict_bands() {
    assert_eq!(verdict(1.0, 1e-4), Verdict::Nonzero);
    assert_eq!(verdict(1e-5, 1e-4), Verdict::Zero);
    assert_eq!(verdict(1e-2, 1e-4), Verdict::Indeterminate);
}

#[test]
fn ramification_filter_and_csv() {
    let (k, phi) = setup(-4);
    let recs = scan_report(&k, &phi, &[5], 25, 1e-12, 2).unwrap();
    assert_eq!(filter_ramification(&recs, &[2]).len(), 1);
    assert_eq!(filter_ramification(&recs, &[5, 2]).len(), 3);
    let csv = summary_csv(&recs);
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), recs.len() + 1);
    let dir = tempdir();
    persist(&dir, &recs, "D=-4").unwrap();
    persist(&dir, &recs, "D=-4").unwrap();
    let log = std::fs::read_to_string(dir.join("run.log")).unwrap();
    assert_eq!(log.lines().count(), 2);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("family_records.json")).unwrap()).unwrap();
    assert!(json[0]["f"].is_string());
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("heckelab-family-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn average_is_rational_multiple_of_phi(x in -40i64..40, y in -40i64..40) {
        let (k, phi) = setup(-4);
        let w = QuadInt::new(x, y);
        prop_assume!(!w.is_zero());
        let a = Ideal::principal(&w, -4);
        let orbits = enumerate_twists(&k, &phi, &[5], 25).unwrap();
        for o in &orbits {
            if let AverageValue::Exact { factor, value } = twist_average_value(&phi, o, &a).unwrap() {
                let p = phi.eval_complex(&a);
                let r = *factor.numer() as f64 / *factor.denom() as f64;
                prop_assert!((value - p * r).norm() < 1e-9);
                prop_assert!(r.abs() <= 1.0);
            }
        }
    }
}
