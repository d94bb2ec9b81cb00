//! Root numbers: the Gauss-sum formula and an independent estimate from the
//! theta transformation `theta(1/t, chi) = W t^2 theta(t, conj chi)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{gcd, lcm};
use crate::characters::{HeckeCharacter, RingClassCharacter};
use crate::lseries::{truncation, ThetaSeries};
use crate::quadfield::{FieldContext, Ideal, QuadInt};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootNumberError {
    #[error("NumericalInstability: |W| - 1 = {0:e}")]
    NumericalInstability(f64),
    #[error("DegenerateQuotient: theta vanishes numerically at t = {0}")]
    DegenerateQuotient(f64),
    #[error("NonRealRootNumber: W = {0} + {1}i")]
    NonRealRootNumber(f64, f64),
}

/// Largest denominator for which the Gauss sum is accumulated exactly.
const EXACT_LEVEL: i64 = 10_000;
/// Points at which the theta transformation is evaluated.
const FE_POINTS: [f64; 2] = [1.3, 1.6];

/// `delta = sqrt(D) = 2 omega - D`, a generator of the different with
/// `delta / |delta| = i`.
pub fn different_gen(field: &FieldContext) -> QuadInt {
    QuadInt::new(-field.d, 2)
}

/// An integral ideal `c` coprime to `f` with `f c = (b)`, of least norm.
pub fn auxiliary_pair_for(field: &FieldContext, f: &Ideal) -> (Ideal, QuadInt) {
    let d = field.d;
    if let Some(b) = field.principal_generator(f) {
        return (Ideal::UNIT, b);
    }
    let target: Vec<i64> = field
        .ideal_class_of(f)
        .iter()
        .zip(field.class_group().invariants())
        .map(|(e, m)| (-e).rem_euclid(*m))
        .collect();
    let primes = field.prime_divisors(f);
    let mut bound = 16.0;
    loop {
        for c in field.enumerate_ideals(bound) {
            if primes.iter().any(|p| p.contains_ideal(&c)) || field.ideal_class_of(&c) != target {
                continue;
            }
            let fc = f.mul(&c, d);
            let b = field
                .principal_generator(&fc)
                .expect("f c lies in the trivial class");
            return (c, b);
        }
        bound *= 4.0;
    }
}

pub fn auxiliary_pair(chi: &HeckeCharacter) -> (Ideal, QuadInt) {
    auxiliary_pair_for(chi.field(), &chi.conductor())
}

/// Representatives of `c / f c` taken from the canonical residues of `O / f c`.
pub fn transversal(field: &FieldContext, c: &Ideal, f: &Ideal) -> Vec<QuadInt> {
    let fc = f.mul(c, field.d);
    fc.residues().filter(|w| c.contains(w)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussSumResult {
    /// `[re, im]`
    pub w: [f64; 2],
    pub delta: QuadInt,
    pub aux_ideal: Ideal,
    pub aux_generator: QuadInt,
    pub transversal_size: usize,
    /// the exponential sum was accumulated as exact integer counts
    pub exact: bool,
}

impl GaussSumResult {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.w[0], self.w[1])
    }
}

/// `W = (-i) f^-1 (delta/|delta|) (b/|b|) (N(c)^(1/2) / chi(c)) sum_w eps(w) e(Tr(w / (delta b)))`.
///
/// The sum over `c / f c` is split along the prime powers `q` of `f`: with
/// `w = sum_q r_q E_q`, `E_q` in `c` congruent to 1 mod `q` and to 0 mod `f/q`,
/// both `eps` and the additive character factor, so the sum is a product of
/// sums over `O / q`.
pub fn gauss_sum_root_number(chi: &HeckeCharacter) -> Result<GaussSumResult, RootNumberError> {
    let setup = GaussSetup::new(chi);
    let field = chi.field();
    let d = field.d;
    let f = chi.conductor();
    let parts = prime_power_parts(field, &f);
    let mut sum = Complex64::new(1.0, 0.0);
    for q in &parts {
        let rest = f.div_exact(q, d).expect("q divides f");
        let e_eps = idempotent(q, &rest, d);
        let e_add = idempotent(q, &rest.mul(&setup.aux, d), d);
        let one_minus = QuadInt::ONE.sub(&e_eps);
        let terms = q.residues().filter_map(|r| {
            let k = chi.eps_exponent(&f.reduce(&r.mul(&e_eps, d).add(&one_minus)))?;
            let t = fc_trace(&setup, &r.mul(&e_add, d));
            Some((k, t))
        });
        sum *= setup.accumulate(terms);
    }
    setup.finish(chi, sum, f.norm() as usize)
}

/// The defining sum taken literally over the residues of `f c` lying in `c`,
/// translated by `shift` (any element of `f c` leaves the value unchanged).
pub fn gauss_sum_shifted(
    chi: &HeckeCharacter,
    shift: QuadInt,
) -> Result<GaussSumResult, RootNumberError> {
    let setup = GaussSetup::new(chi);
    let d = chi.field().d;
    let c = setup.aux;
    let fc = chi.conductor().mul(&c, d);
    let terms = fc.residues().filter(|w| c.contains(w)).filter_map(|w| {
        let w = w.add(&shift);
        let k = chi.eps_exponent(&w)?;
        Some((k, fc_trace(&setup, &w)))
    });
    let sum = setup.accumulate(terms);
    setup.finish(chi, sum, (fc.norm() / c.norm()) as usize)
}

struct GaussSetup {
    aux: Ideal,
    aux_generator: QuadInt,
    delta: QuadInt,
    /// `conj(delta b)`
    dual: QuadInt,
    /// `N(delta b)`
    den: i64,
    /// traces on `c` are multiples of `g`
    g: i64,
    m: i64,
    level: i64,
    d: i64,
}

fn fc_trace(s: &GaussSetup, w: &QuadInt) -> i64 {
    w.mul(&s.dual, s.d).trace(s.d).rem_euclid(s.den)
}

impl GaussSetup {
    fn new(chi: &HeckeCharacter) -> Self {
        let field = chi.field();
        let d = field.d;
        let (c, b) = auxiliary_pair(chi);
        let delta = different_gen(field);
        let db = delta.mul(&b, d);
        // Tr(w / (delta b)) = Tr(w conj(delta b)) / N(delta b)
        let den = db.norm(d);
        let dual = db.conj(d);
        let g = c
            .basis()
            .iter()
            .fold(den, |acc, e| gcd(acc, e.mul(&dual, d).trace(d)));
        let m = chi.finite_part().order();
        GaussSetup {
            aux: c,
            aux_generator: b,
            delta,
            dual,
            den,
            g,
            m,
            level: lcm(m, den / g),
            d,
        }
    }

    fn exact(&self) -> bool {
        self.level <= EXACT_LEVEL
    }

    /// `sum zeta_m^k e(t / den)`, as integer counts per residue when the
    /// common level is small.
    fn accumulate(&self, terms: impl Iterator<Item = (i64, i64)>) -> Complex64 {
        let (m, den, g, level) = (self.m, self.den, self.g, self.level);
        if self.exact() {
            let mut counts = vec![0i64; level as usize];
            for (k, t) in terms {
                let j = (k * (level / m) + (t / g) * (level / (den / g))).rem_euclid(level);
                counts[j as usize] += 1;
            }
            let mut z = Complex64::new(0.0, 0.0);
            for (j, n) in counts.iter().enumerate() {
                if *n != 0 {
                    z += Complex64::from_polar(*n as f64, 2.0 * PI * j as f64 / level as f64);
                }
            }
            z
        } else {
            terms
                .map(|(k, t)| {
                    let phase = k as f64 / m as f64 + t as f64 / den as f64;
                    Complex64::from_polar(1.0, 2.0 * PI * phase)
                })
                .sum()
        }
    }

    fn finish(&self, chi: &HeckeCharacter, sum: Complex64, size: usize) -> Result<GaussSumResult, RootNumberError> {
        let d = self.d;
        let i = Complex64::new(0.0, 1.0);
        let bc = self.aux_generator.to_complex(d);
        let chi_c = chi.eval_complex(&self.aux);
        let nc = (self.aux.norm() as f64).sqrt();
        let w = -i * i * (bc / bc.norm()) * (nc / chi_c) * sum / chi.f_value();
        let dev = (w.norm() - 1.0).abs();
        if dev > 1e-6 {
            return Err(RootNumberError::NumericalInstability(dev));
        }
        Ok(GaussSumResult {
            w: [w.re, w.im],
            delta: self.delta,
            aux_ideal: self.aux,
            aux_generator: self.aux_generator,
            transversal_size: size,
            exact: self.exact(),
        })
    }
}

/// The prime power factors of `f`.
pub fn prime_power_parts(field: &FieldContext, f: &Ideal) -> Vec<Ideal> {
    let d = field.d;
    field
        .prime_divisors(f)
        .iter()
        .map(|p| {
            let mut q = *p;
            let mut rest = f.div_exact(p, d).expect("p divides f");
            while p.contains_ideal(&rest) {
                q = q.mul(p, d);
                rest = rest.div_exact(p, d).expect("p divides the cofactor");
            }
            q
        })
        .collect()
}

/// An element of `b` congruent to 1 modulo `a`, for coprime `a` and `b`.
pub fn idempotent(a: &Ideal, b: &Ideal, d: i64) -> QuadInt {
    // write 1 = x_a + x_b by integer row reduction of the four basis
    // vectors, carrying the part that comes from b (kept modulo ab)
    let ab = a.mul(b, d);
    let mut rows: Vec<((i64, i64), QuadInt)> = a
        .basis()
        .into_iter()
        .map(|e| ((e.x, e.y), QuadInt::ZERO))
        .chain(b.basis().into_iter().map(|e| ((e.x, e.y), e)))
        .collect();
    // coordinate 1 first, then coordinate 0 among rows with zero y
    for coord in [1usize, 0] {
        let entry = |r: &((i64, i64), QuadInt)| if coord == 1 { r.0 .1 } else { r.0 .0 };
        loop {
            let live: Vec<usize> = (0..rows.len())
                .filter(|&i| entry(&rows[i]) != 0 && (coord == 1 || rows[i].0 .1 == 0))
                .collect();
            if live.len() <= 1 {
                break;
            }
            let pivot = *live.iter().min_by_key(|&&i| entry(&rows[i]).abs()).unwrap();
            let (vp, tp) = rows[pivot];
            let ep = entry(&rows[pivot]);
            for &i in live.iter().filter(|&&i| i != pivot) {
                let q = entry(&rows[i]) / ep;
                let (v, t) = &mut rows[i];
                *v = (v.0 - q * vp.0, v.1 - q * vp.1);
                *t = ab.reduce(&t.sub(&tp.scale(q)));
            }
        }
    }
    let (v, t) = rows
        .iter()
        .find(|(v, _)| v.1 == 0 && v.0.abs() == 1)
        .copied()
        .expect("a and b are coprime");
    if v.0 == 1 {
        t
    } else {
        ab.reduce(&t.scale(-1))
    }
}

/// The Gauss-sum root number rounded to `+1` or `-1`.
pub fn root_number_sign(chi: &HeckeCharacter) -> Result<i32, RootNumberError> {
    let w = gauss_sum_root_number(chi)?.complex();
    sign_of(w)
}

fn sign_of(w: Complex64) -> Result<i32, RootNumberError> {
    if w.im.abs() > 1e-8 || (w.re.abs() - 1.0).abs() > 1e-8 {
        return Err(RootNumberError::NonRealRootNumber(w.re, w.im));
    }
    Ok(if w.re > 0.0 { 1 } else { -1 })
}

/// `W = theta(1/t, chi) / (t^2 theta(t, conj chi))` at `t = 1.3` and `1.6`.
pub fn root_number_via_fe(chi: &HeckeCharacter, tol: f64) -> Result<[Complex64; 2], RootNumberError> {
    let af = chi.field().a_const * chi.f_value();
    let series = ThetaSeries::with_truncation(chi, truncation(af, tol) * 1.7);
    root_number_from_series(&series)
}

pub fn root_number_from_series(series: &ThetaSeries) -> Result<[Complex64; 2], RootNumberError> {
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (slot, t) in out.iter_mut().zip(FE_POINTS) {
        let (num, _) = series.theta(1.0 / t, false);
        let (den, scale) = series.theta(t, true);
        if den.norm() < 1e-12 * scale.max(1.0) {
            return Err(RootNumberError::DegenerateQuotient(t));
        }
        *slot = num / (den * t * t);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RootNumberResult {
    pub w_gauss: [f64; 2],
    /// estimates at `t = 1.3` and `t = 1.6`
    pub w_fe: [[f64; 2]; 2],
    pub sign: i32,
    pub delta: QuadInt,
    pub aux_ideal: Ideal,
    pub aux_generator: QuadInt,
    pub exact: bool,
    /// `max |W_gauss - W_fe|`
    pub discrepancy: f64,
}

/// Both routes together.
pub fn root_number(chi: &HeckeCharacter, tol: f64) -> Result<RootNumberResult, RootNumberError> {
    let g = gauss_sum_root_number(chi)?;
    let fe = root_number_via_fe(chi, tol)?;
    let wg = g.complex();
    let discrepancy = fe.iter().map(|z| (z - wg).norm()).fold(0.0, f64::max);
    Ok(RootNumberResult {
        w_gauss: g.w,
        w_fe: [[fe[0].re, fe[0].im], [fe[1].re, fe[1].im]],
        sign: sign_of(wg)?,
        delta: g.delta,
        aux_ideal: g.aux_ideal,
        aux_generator: g.aux_generator,
        exact: g.exact,
        discrepancy,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub order: i64,
    /// `(m, W(phi rho^m))`
    pub values: Vec<(i64, [f64; 2])>,
    pub constant: bool,
}

/// `W(phi rho^m)` for every `m` prime to the order of `rho`.
pub fn conjugation_invariance_check(
    phi: &HeckeCharacter,
    rho: &RingClassCharacter,
) -> Result<InvarianceReport, RootNumberError> {
    let n = rho.order();
    let mut values = Vec::new();
    for m in (1..=n.max(1)).filter(|m| gcd(*m, n) == 1) {
        let chi = phi
            .twist(&rho.power(m))
            .expect("powers of a ring class character twist consistently");
        values.push((m, gauss_sum_root_number(&chi)?.w));
    }
    let first = values[0].1;
    let constant = values
        .iter()
        .all(|(_, w)| (w[0] - first[0]).abs() <= 1e-6 && (w[1] - first[1]).abs() <= 1e-6);
    Ok(InvarianceReport {
        order: n,
        values,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::characters::canonical_character;
    use crate::quadfield::make_field;

    #[test]
    fn different_generators() {
        for d in [-4i64, -23, -8] {
            let k = make_field(d).unwrap();
            let delta = different_gen(&k);
            assert_eq!(delta.norm(d), -d);
            let z = delta.to_complex(d);
            assert!(z.re.abs() < 1e-12 && z.im > 0.0);
        }
        assert_eq!(different_gen(&make_field(-4).unwrap()).to_complex(-4).im, 2.0);
    }

    #[test]
    fn gaussian_root_number_is_one() {
        let chi = canonical_character(Arc::new(make_field(-4).unwrap())).unwrap();
        let r = root_number(&chi, 1e-12).unwrap();
        assert_eq!(r.sign, 1);
        assert!(r.discrepancy < 1e-6, "{r:?}");
    }
}
