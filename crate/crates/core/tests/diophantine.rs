use heckelab::diophantine::*;
use num_bigint::BigInt;
use proptest::prelude::*;

/// sqrt(2) in Z_7 congruent to 3, digit by digit.
fn sqrt2_digits(k: u32) -> i128 {
    let mut r: i128 = 3;
    let mut pk: i128 = 7;
    for _ in 1..k {
        let next = pk * 7;
        r = (0..7)
            .map(|d| r + d * pk)
            .find(|x| {
                let b = BigInt::from(*x);
                (&b * &b - 2u32) % BigInt::from(next) == BigInt::from(0)
            })
            .unwrap();
        pk = next;
    }
    r
}

fn v7(mut x: i128) -> u32 {
    let mut v = 0;
    while x != 0 && x % 7 == 0 {
        x /= 7;
        v += 1;
    }
    v
}

fn sqrt2_pairs() -> Vec<CongruencePair> {
    RidoutInstance::sqrt2_in_z7(2.5, 10).pairs()
}

#[test]
fn hensel_matches_digit_search() {
    for k in [1, 2, 5, 13, 30] {
        let r = hensel_lift(7, &[-2, 0, 1], 3, k).unwrap();
        assert_eq!(r.residue, BigInt::from(sqrt2_digits(k)));
        assert_eq!(r.valuation, 0);
    }
}

#[test]
fn cube_root_lift() {
    // x^3 - 3 has the simple root 2 mod 5 (8 = 3 mod 5)
    let poly = [-3, 0, 0, 1];
    let r = hensel_lift(5, &poly, 2, 12).unwrap();
    let m = BigInt::from(5).pow(12);
    let val = (&r.residue * &r.residue * &r.residue - 3) % &m;
    assert_eq!(val, BigInt::from(0));
}

#[test]
fn padic_arithmetic() {
    let x = PadicNumber::from_int(7, 5, 49);
    assert_eq!(x.valuation, 2);
    assert!((x.abs_p() - 1.0 / 49.0).abs() < 1e-15);
    let y = PadicNumber::from_int(7, 5, -49);
    let z = x.add(&y);
    assert!(z.is_zero());
    assert_eq!(z.exact, Some(0));
    assert_eq!(z.valuation, 5);
    let w = PadicNumber::from_int(7, 5, 3).mul(&PadicNumber::from_int(7, 5, 5));
    assert_eq!(w.residue, BigInt::from(15));
    assert_eq!(w.sub(&PadicNumber::from_int(7, 5, 16)).residue, BigInt::from(16806));
}

#[test]
fn count_m_small_example() {
    let pairs = vec![CongruencePair {
        p: 2,
        alpha: PadicSource::Integer { value: 0 },
        beta: PadicSource::Integer { value: 1 },
    }];
    let r = count_m(2, 2.0, &pairs).unwrap();
    assert_eq!(r.count, 10);
    assert!(r.witnesses.iter().all(|(u, _)| u.abs() == 2));
    assert_eq!(count_m(2, 0.5, &pairs).unwrap().count, 0);
}

#[test]
fn count_m_trivial_modulus_is_the_box() {
    // q = 1: only the nonvanishing condition remains
    let r = count_m(1, 3.0, &sqrt2_pairs()).unwrap();
    assert_eq!(r.count, 48);
}

#[test]
fn count_m_matches_brute_force() {
    for k in 1..=4u32 {
        let q = 7i128.pow(k);
        let g = sqrt2_digits(k);
        for t in [1i128, 3, 10, 25, 60] {
            let mut brute = 0;
            for u in -t..=t {
                for v in -t..=t {
                    if (u, v) != (0, 0) && (u - v * g).rem_euclid(q) == 0 {
                        brute += 1;
                    }
                }
            }
            let r = count_m(q, t as f64, &sqrt2_pairs()).unwrap();
            assert_eq!(r.count, brute, "q = {q}, t = {t}");
        }
    }
}

#[test]
fn count_m_with_two_primes_and_integer_data() {
    // alpha = (3, 5), beta = (1, 2) at p = 2, 3; q = 12
    let pairs = vec![
        CongruencePair {
            p: 2,
            alpha: PadicSource::Integer { value: 3 },
            beta: PadicSource::Integer { value: 1 },
        },
        CongruencePair {
            p: 3,
            alpha: PadicSource::Integer { value: 5 },
            beta: PadicSource::Integer { value: 2 },
        },
    ];
    let t = 20i128;
    let mut brute = 0;
    for u in -t..=t {
        for v in -t..=t {
            let a = u - 3 * v;
            let b = 2 * u - 5 * v;
            if a.rem_euclid(4) == 0 && b.rem_euclid(3) == 0 && a != 0 && b != 0 {
                brute += 1;
            }
        }
    }
    assert_eq!(count_m(12, t as f64, &pairs).unwrap().count, brute);
}

#[test]
fn count_m_rejects_foreign_modulus() {
    assert!(matches!(
        count_m(10, 5.0, &sqrt2_pairs()),
        Err(DiophantineError::InvalidInstance(_))
    ));
}

#[test]
fn ridout_matches_brute_force() {
    let h = 60i128;
    let g = sqrt2_digits(30);
    for kappa in [2.1, 2.5, 3.0] {
        let mut brute = Vec::new();
        for v in 0..=h {
            for u in -h..=h {
                if (v == 0 && u != 1) || num_integer::Integer::gcd(&u, &v) != 1 {
                    continue;
                }
                let e = v7(u - v * g);
                let height = u.abs().max(v) as f64;
                if 7f64.powi(-(e as i32)) <= height.powf(-kappa) {
                    brute.push((u as i64, v as i64));
                }
            }
        }
        brute.sort_by_key(|&(u, v)| (u.abs().max(v.abs()), u, v));
        let r = ridout_scan(&RidoutInstance::sqrt2_in_z7(kappa, h as i64)).unwrap();
        let got: Vec<(i64, i64)> = r.solutions.iter().map(|s| (s.u, s.v)).collect();
        assert_eq!(got, brute, "kappa = {kappa}");
    }
}

#[test]
fn ridout_strong_exponent_is_nearly_empty() {
    let r = ridout_scan(&RidoutInstance::sqrt2_in_z7(10.0, 1000)).unwrap();
    assert!(r.solutions.iter().all(|s| s.height == 1), "{:?}", r.solutions);
}

#[test]
fn ridout_rejects_small_kappa() {
    assert!(ridout_scan(&RidoutInstance::sqrt2_in_z7(2.0, 100)).is_err());
}

#[test]
fn ridout_csv_has_header_and_rows() {
    let r = ridout_scan(&RidoutInstance::sqrt2_in_z7(2.5, 100)).unwrap();
    let csv = solutions_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("u,v,residual,height"));
    assert_eq!(lines.count(), r.solutions.len());
}

#[test]
fn proposition4_table_shape() {
    let inst = RidoutInstance::sqrt2_in_z7(2.5, 10);
    let tab = proposition4_experiment(&inst, 0.4, &[0.6], 0.49, &[2, 4, 6, 8]).unwrap();
    assert_eq!(tab.rows.len(), 4);
    assert!(tab.rows.iter().all(|r| r.m_c == 0 && r.m_d.len() == 1));
    assert_eq!(tab.zero_from, Some(2));
    assert!(proposition4_experiment(&inst, 0.5, &[], 0.49, &[2]).is_err());
}

proptest! {
    #[test]
    fn hensel_output_is_a_root(k in 1u32..60, seed in prop::sample::select(vec![3i64, 4])) {
        let r = hensel_lift(7, &[-2, 0, 1], seed, k).unwrap();
        let m = BigInt::from(7).pow(k);
        prop_assert_eq!((&r.residue * &r.residue - 2) % &m, BigInt::from(0));
        prop_assert_eq!(&r.residue % 7, BigInt::from(seed));
    }

    #[test]
    fn count_m_monotone(k in 1u32..6, t in 1.0f64..200.0) {
        let pairs = sqrt2_pairs();
        let q = 7i128.pow(k);
        let a = count_m(q, t, &pairs).unwrap().count;
        prop_assert!(count_m(q, t * 1.5, &pairs).unwrap().count >= a);
        prop_assert!(count_m(q * 7, t, &pairs).unwrap().count <= a);
    }

    #[test]
    fn count_m_homogeneous(k in 1u32..5, t in 1.0f64..60.0, n in prop::sample::select(vec![2i128, 3, 5])) {
        let pairs = sqrt2_pairs();
        let q = 7i128.pow(k);
        let small = count_m(q, t, &pairs).unwrap();
        let big = count_m(q, t * n as f64, &pairs).unwrap();
        for (u, v) in &small.witnesses {
            prop_assert!(big.witnesses.contains(&(u * n, v * n)) || big.witnesses.len() == WITNESS_LIMIT);
        }
    }

    #[test]
    fn ridout_solutions_nest(h in 5i64..400) {
        let small = ridout_scan(&RidoutInstance::sqrt2_in_z7(2.5, h)).unwrap();
        let big = ridout_scan(&RidoutInstance::sqrt2_in_z7(2.5, h * 3)).unwrap();
        for s in &small.solutions {
            prop_assert!(big.solutions.iter().any(|b| (b.u, b.v) == (s.u, s.v)));
        }
    }
}
