//! Imaginary quadratic fields: elements, HNF ideals, binary quadratic forms
//! and (ring) class groups.
//!
//! The integral basis is `{1, omega}` with `omega = (D + sqrt(D)) / 2`, which
//! works for both parities of the discriminant.

mod element;
mod forms;
mod ideal;

use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

pub use element::{omega_norm, KElem, QuadInt};
pub use forms::{reduced_forms, ClassGroup, QuadForm};
pub use ideal::Ideal;

use crate::arith::{self, crt, isqrt, mod_inv, sqrt_mod_prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadFieldError {
    #[error("NonFundamental: {0} is not a negative fundamental discriminant")]
    NonFundamental(i64),
    #[error("BadDiscriminant: {0} is not a negative discriminant")]
    BadDiscriminant(i64),
}

/// How a rational prime decomposes in the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

pub fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => arith::is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && arith::is_squarefree(m)
        }
        _ => false,
    }
}

/// Form class group of a negative discriminant (fundamental or `c^2 D`).
pub fn class_group(disc: i64) -> Result<ClassGroup, QuadFieldError> {
    if disc >= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
        return Err(QuadFieldError::BadDiscriminant(disc));
    }
    Ok(ClassGroup::build(disc))
}

/// An imaginary quadratic field with its class group and basic constants.
#[derive(Debug, Clone)]
pub struct FieldContext {
    pub d: i64,
    pub h: i64,
    pub w_k: i64,
    /// `|D|^(1/2) / (2 pi)`
    pub a_const: f64,
    class_group: ClassGroup,
    units: Vec<QuadInt>,
}

pub fn make_field(d: i64) -> Result<FieldContext, QuadFieldError> {
    if !is_fundamental(d) {
        return Err(QuadFieldError::NonFundamental(d));
    }
    let class_group = ClassGroup::build(d);
    let h = class_group.order();
    let mut field = FieldContext {
        d,
        h,
        w_k: 0,
        a_const: (-d as f64).sqrt() / (2.0 * PI),
        class_group,
        units: Vec::new(),
    };
    field.units = field.elements_of_norm(1);
    field.w_k = field.units.len() as i64;
    Ok(field)
}

impl FieldContext {
    pub fn omega_norm(&self) -> i64 {
        omega_norm(self.d)
    }

    pub fn class_group(&self) -> &ClassGroup {
        &self.class_group
    }

    /// Roots of unity of `O`, starting with `1`.
    pub fn units(&self) -> &[QuadInt] {
        &self.units
    }

    /// `kappa(n) = (D / n)`.
    pub fn kronecker(&self, n: i64) -> i32 {
        arith::kronecker(self.d, n)
    }

    pub fn splitting(&self, p: i64) -> Splitting {
        match self.kronecker(p) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }

    pub fn prime_ideals_above(&self, p: i64) -> Vec<(Ideal, Splitting)> {
        let s = self.splitting(p);
        match s {
            Splitting::Inert => vec![(Ideal::from_int(p), s)],
            _ => self
                .omega_roots_prime_power(p, 1)
                .into_iter()
                .map(|r| (Ideal { a: p, b: r, c: 1 }, s))
                .collect(),
        }
    }

    /// Prime ideals dividing `x`, sorted.
    pub fn prime_divisors(&self, x: &Ideal) -> Vec<Ideal> {
        let mut out: Vec<Ideal> = arith::prime_divisors(x.norm())
            .into_iter()
            .flat_map(|p| self.prime_ideals_above(p))
            .map(|(q, _)| q)
            .filter(|q| q.contains_ideal(x))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// `v_q(x)` for a prime ideal `q`.
    pub fn prime_valuation(&self, x: &Ideal, q: &Ideal) -> u32 {
        let mut cur = *x;
        let mut v = 0;
        while let Some(next) = cur.div_exact(q, self.d) {
            cur = next;
            v += 1;
        }
        v
    }

    pub fn mul(&self, x: &Ideal, y: &Ideal) -> Ideal {
        x.mul(y, self.d)
    }

    pub fn conjugate(&self, x: &Ideal) -> Ideal {
        x.conjugate(self.d)
    }

    /// Roots of `t^2 + D t + N(omega)` modulo `p^e`, i.e. the `B` for which
    /// `p^e Z + (B + omega) Z` is an ideal.
    fn omega_roots_prime_power(&self, p: i64, e: u32) -> Vec<i64> {
        let n0 = self.omega_norm() as i128;
        let d = self.d as i128;
        let f = |t: i128, m: i128| (t * t + d * t + n0).rem_euclid(m) == 0;
        let p128 = p as i128;
        let mut roots: Vec<i128> = if p == 2 {
            (0..2).filter(|&t| f(t, 2)).collect()
        } else {
            // t = (-D +- sqrt(D)) / 2
            let inv2 = mod_inv(2, p128).unwrap();
            let mut r: Vec<i128> = sqrt_mod_prime(d, p128)
                .into_iter()
                .map(|s| ((s - d) * inv2).rem_euclid(p128))
                .collect();
            r.sort_unstable();
            r.dedup();
            r
        };
        let mut m = p128;
        for _ in 1..e {
            let next = m * p128;
            let mut lifted = Vec::new();
            for &r in &roots {
                for t in 0..p128 {
                    let cand = r + t * m;
                    if f(cand, next) {
                        lifted.push(cand);
                    }
                }
            }
            roots = lifted;
            m = next;
        }
        roots.sort_unstable();
        roots.into_iter().map(|r| r as i64).collect()
    }

    /// All integral ideals of norm at most `bound`, sorted by norm then HNF.
    pub fn enumerate_ideals(&self, bound: f64) -> Vec<Ideal> {
        if bound < 1.0 {
            return Vec::new();
        }
        let x = bound.floor() as usize;
        let roots = self.primitive_roots_table(x);
        let mut out = Vec::new();
        let mut c = 1usize;
        while c * c <= x {
            let amax = x / (c * c);
            for (a, rs) in roots.iter().enumerate().take(amax + 1).skip(1) {
                for &b in rs {
                    out.push(Ideal {
                        a: (c * a) as i64,
                        b: c as i64 * b,
                        c: c as i64,
                    });
                }
            }
            c += 1;
        }
        out.sort_by_key(|i| (i.norm(), *i));
        out
    }

    /// `table[A]` lists the `B` with `A Z + (B + omega) Z` an ideal.
    fn primitive_roots_table(&self, x: usize) -> Vec<Vec<i64>> {
        let mut spf = vec![0usize; x + 1];
        for i in 2..=x {
            if spf[i] == 0 {
                let mut j = i;
                while j <= x {
                    if spf[j] == 0 {
                        spf[j] = i;
                    }
                    j += i;
                }
            }
        }
        let mut table: Vec<Vec<i64>> = vec![Vec::new(); x + 1];
        if x >= 1 {
            table[1] = vec![0];
        }
        let mut pp_cache: HashMap<(i64, u32), Vec<i64>> = HashMap::new();
        for a in 2..=x {
            let p = spf[a];
            let mut pe = 1usize;
            let mut e = 0u32;
            let mut rest = a;
            while rest % p == 0 {
                rest /= p;
                pe *= p;
                e += 1;
            }
            let local = pp_cache
                .entry((p as i64, e))
                .or_insert_with(|| self.omega_roots_prime_power(p as i64, e))
                .clone();
            if rest == 1 {
                table[a] = local;
                continue;
            }
            let mut combined = Vec::with_capacity(local.len() * table[rest].len());
            for &r1 in &local {
                for &r2 in &table[rest] {
                    combined.push(crt(r1 as i128, pe as i128, r2 as i128, rest as i128) as i64);
                }
            }
            combined.sort_unstable();
            table[a] = combined;
        }
        table
    }

    /// Reduced form attached to the class of `x` (content is ignored).
    pub fn form_of_ideal(&self, x: &Ideal) -> QuadForm {
        let p = x.primitive_part();
        let b = p.b as i128;
        let n = (b * b + self.d as i128 * b + self.omega_norm() as i128) / p.a as i128;
        QuadForm::new(p.a, -(2 * p.b + self.d), n as i64).reduce()
    }

    /// Form of discriminant `c^2 D` attached to the image of `x` in `Pic(O_c)`.
    /// `x` must be coprime to `c`.
    pub fn ring_class_form(&self, x: &Ideal, c: i64) -> Option<QuadForm> {
        let p = x.primitive_part();
        if arith::gcd(p.a * p.c, c) != 1 || arith::gcd(x.content(), c) != 1 {
            return None;
        }
        // (a, -c(2b + D), c^2 N(b + omega)/a), translated so |B| <= a first
        let (a, b, c) = (p.a as i128, p.b as i128, c as i128);
        let big_b = (-c * (2 * b + self.d as i128)).rem_euclid(2 * a);
        let big_b = if big_b > a { big_b - 2 * a } else { big_b };
        let disc = c * c * self.d as i128;
        let big_c = (big_b * big_b - disc) / (4 * a);
        Some(QuadForm::new(p.a, big_b as i64, big_c as i64).reduce())
    }

    /// A primitive ideal in the class of the form `f` of discriminant `D`.
    pub fn ideal_of_form(&self, f: &QuadForm) -> Ideal {
        let b = (-f.b - self.d).div_euclid(2).rem_euclid(f.a);
        Ideal { a: f.a, b, c: 1 }
    }

    /// Exponent vector of the class of `x` in the class group.
    pub fn ideal_class_of(&self, x: &Ideal) -> Vec<i64> {
        self.class_group.dlog(&self.form_of_ideal(x))
    }

    /// All elements of the given norm, in a fixed order.
    pub fn elements_of_norm(&self, n: i64) -> Vec<QuadInt> {
        // (2x + D y)^2 = 4n + D y^2
        let mut out = Vec::new();
        if n < 0 {
            return out;
        }
        if n == 0 {
            out.push(QuadInt::ZERO);
            return out;
        }
        let d = self.d as i128;
        let four_n = 4 * n as i128;
        let ymax = isqrt(four_n / (-d));
        for y in -ymax..=ymax {
            let disc = four_n + d * y * y;
            if disc < 0 {
                continue;
            }
            let s = isqrt(disc);
            if s * s != disc {
                continue;
            }
            let mut roots = vec![s, -s];
            roots.dedup();
            for t in roots {
                let num = t - d * y;
                if num % 2 == 0 {
                    out.push(QuadInt::new((num / 2) as i64, y as i64));
                }
            }
        }
        out.sort_by_key(|w| (w.x.abs() + w.y.abs(), *w));
        out.dedup();
        out
    }

    /// A generator of `x` when it is principal.
    pub fn principal_generator(&self, x: &Ideal) -> Option<QuadInt> {
        self.elements_of_norm(x.norm())
            .into_iter()
            .find(|w| x.contains(w))
    }

    pub fn is_principal(&self, x: &Ideal) -> bool {
        self.principal_generator(x).is_some()
    }

    /// Class number computed from ideals below the Minkowski bound, with the
    /// equivalence test `a ~ b <=> a * conj(b)` principal. Independent of forms.
    pub fn class_number_by_ideals(&self) -> i64 {
        let bound = (2.0 / PI) * (-self.d as f64).sqrt();
        let mut reps: Vec<Ideal> = Vec::new();
        for a in self.enumerate_ideals(bound.max(1.0)) {
            let fresh = reps
                .iter()
                .all(|r| !self.is_principal(&a.mul(&r.conjugate(self.d), self.d)));
            if fresh {
                reps.push(a);
            }
        }
        reps.len() as i64
    }

    /// `|Pic(O_c)|` from the class number formula for orders.
    pub fn ring_class_number(&self, c: i64) -> i64 {
        if c == 1 {
            return self.h;
        }
        let mut num = self.h * c;
        let mut den = 1;
        for p in arith::prime_divisors(c) {
            num *= p - self.kronecker(p) as i64;
            den *= p;
        }
        num / den / (self.w_k / 2)
    }

    pub fn omega_complex(&self) -> num_complex::Complex64 {
        QuadInt::new(0, 1).to_complex(self.d)
    }
}
