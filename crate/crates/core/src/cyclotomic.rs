//! Exact arithmetic in cyclotomic fields `Q(zeta_N)` and traces down to
//! abelian subfields.
//!
//! Elements live on the redundant basis `zeta_N^0, ..., zeta_N^(N-1)`. For
//! every prime `p | N` the relation `sum_t zeta^(i + t N/p) = 0` is used to
//! clear every index whose `p`-component has leading base-`p` digit `p - 1`;
//! what remains is a basis of size `phi(N)`, so the reduced vector is
//! canonical.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{factorize, gcd, lcm};

pub type Rational = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclotomicError {
    #[error("SubfieldMismatch: {0}")]
    SubfieldMismatch(String),
}

#[derive(Debug, Clone)]
pub struct CyclotomicElement {
    n: usize,
    coeffs: Vec<Rational>,
}

/// Equality of field elements, independent of the level they are stored at.
impl PartialEq for CyclotomicElement {
    fn eq(&self, o: &Self) -> bool {
        if self.n == o.n {
            return self.coeffs == o.coeffs;
        }
        let (a, b) = self.common(o);
        a.coeffs == b.coeffs
    }
}

impl Eq for CyclotomicElement {}

impl CyclotomicElement {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1);
        CyclotomicElement {
            n,
            coeffs: vec![Rational::zero(); n],
        }
    }

    pub fn from_rational(n: usize, r: Rational) -> Self {
        let mut x = Self::zero(n);
        x.coeffs[0] = r;
        x.canonicalize();
        x
    }

    pub fn from_int(n: usize, k: i128) -> Self {
        Self::from_rational(n, Rational::from_integer(k))
    }

    /// `zeta_n^k`.
    pub fn zeta(n: usize, k: i64) -> Self {
        let mut x = Self::zero(n);
        x.coeffs[k.rem_euclid(n as i64) as usize] = Rational::one();
        x.canonicalize();
        x
    }

    /// Builds `sum_i counts[i] zeta_n^i`.
    pub fn from_coefficients(n: usize, counts: &[Rational]) -> Self {
        assert_eq!(counts.len(), n);
        let mut x = CyclotomicElement {
            n,
            coeffs: counts.to_vec(),
        };
        x.canonicalize();
        x
    }

    pub fn from_integer_counts(n: usize, counts: &[i64]) -> Self {
        let coeffs: Vec<Rational> = counts
            .iter()
            .map(|&c| Rational::from_integer(c as i128))
            .collect();
        Self::from_coefficients(n, &coeffs)
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    fn canonicalize(&mut self) {
        let n = self.n;
        for (p, e) in factorize(n as i64) {
            let p = p as usize;
            let pe = p.pow(e);
            let top = pe / p;
            let step = n / p;
            for i in 0..n {
                if (i % pe) / top != p - 1 || self.coeffs[i].is_zero() {
                    continue;
                }
                let c = std::mem::replace(&mut self.coeffs[i], Rational::zero());
                for t in 1..p {
                    let j = (i + t * step) % n;
                    self.coeffs[j] -= c;
                }
            }
        }
    }

    /// The same element viewed in `Q(zeta_m)` for a multiple `m` of the level.
    pub fn embed(&self, m: usize) -> Self {
        assert!(m % self.n == 0, "level {} does not divide {m}", self.n);
        let k = m / self.n;
        let mut out = Self::zero(m);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[i * k] = *c;
            }
        }
        out.canonicalize();
        out
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let m = lcm(self.n as i64, o.n as i64) as usize;
        (self.embed(m), o.embed(m))
    }

    pub fn add(&self, o: &Self) -> Self {
        let (mut a, b) = self.common(o);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += *y;
        }
        a.canonicalize();
        a
    }

    pub fn neg(&self) -> Self {
        CyclotomicElement {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| -*c).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, r: Rational) -> Self {
        let mut x = CyclotomicElement {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| *c * r).collect(),
        };
        x.canonicalize();
        x
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let n = a.n;
        let mut out = Self::zero(n);
        let nz: Vec<(usize, Rational)> = b
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, *c))
            .collect();
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &(j, y) in &nz {
                out.coeffs[(i + j) % n] += *x * y;
            }
        }
        out.canonicalize();
        out
    }

    /// `sigma_a : zeta -> zeta^a` for `a` coprime to the level.
    pub fn galois(&self, a: i64) -> Self {
        let n = self.n;
        assert_eq!(gcd(a, n as i64), 1, "{a} is not a unit mod {n}");
        let a = a.rem_euclid(n as i64) as usize;
        let mut out = Self::zero(n);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[i * a % n] += *c;
            }
        }
        out.canonicalize();
        out
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.n as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let v = *c.numer() as f64 / *c.denom() as f64;
                Complex64::from_polar(v, 2.0 * std::f64::consts::PI * i as f64 / n)
            })
            .sum()
    }
}

/// The fixed field inside `Q(zeta_n)` of `{sigma_a : a in H}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianSubfield {
    n: usize,
    h: Vec<usize>,
}

impl AbelianSubfield {
    pub fn new(n: usize, h: &[usize]) -> Result<Self, CyclotomicError> {
        if n == 0 {
            return Err(CyclotomicError::SubfieldMismatch("level 0".into()));
        }
        let mut h: Vec<usize> = h.iter().map(|a| a % n).collect();
        h.sort_unstable();
        h.dedup();
        if h.iter().any(|&a| gcd(a as i64, n as i64) != 1) {
            return Err(CyclotomicError::SubfieldMismatch(format!(
                "H contains a non-unit modulo {n}"
            )));
        }
        if !h.contains(&(1 % n)) {
            return Err(CyclotomicError::SubfieldMismatch("H must contain 1".into()));
        }
        for &a in &h {
            for &b in &h {
                if h.binary_search(&(a * b % n)).is_err() {
                    return Err(CyclotomicError::SubfieldMismatch(format!(
                        "H is not closed: {a} * {b} mod {n}"
                    )));
                }
            }
        }
        Ok(AbelianSubfield { n, h })
    }

    pub fn rationals() -> Self {
        AbelianSubfield { n: 1, h: vec![0] }
    }

    /// `Q(zeta_n)` itself.
    pub fn full(n: usize) -> Self {
        AbelianSubfield { n, h: vec![1 % n] }
    }

    /// The quadratic field of fundamental discriminant `d`, as the fixed
    /// field of `ker (d / .)` inside `Q(zeta_|d|)`.
    pub fn quadratic(d: i64) -> Self {
        let n = d.unsigned_abs() as usize;
        let h = (1..n.max(2))
            .filter(|&a| crate::arith::kronecker(d, a as i64) == 1)
            .collect();
        AbelianSubfield { n, h }
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn subgroup(&self) -> &[usize] {
        &self.h
    }

    /// `[F : Q]`.
    pub fn degree(&self) -> usize {
        units_mod(self.n).len() / self.h.len()
    }

    /// Preimage of `H` in `(Z/m)^x`, `n | m`.
    fn lift_subgroup(&self, m: usize) -> Vec<usize> {
        units_mod(m)
            .into_iter()
            .filter(|a| self.h.binary_search(&(a % self.n)).is_ok())
            .collect()
    }
}

fn units_mod(n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&a| gcd(a as i64, n as i64) == 1).collect()
}

/// `Tr_{F(zeta_N)/F}(x)` for `x` in `Q(zeta_N)`; when `F` lies inside
/// `Q(zeta_N)` this is the trace from `Q(zeta_N)` down to `F`.
pub fn trace_to_subfield(x: &CyclotomicElement, f: &AbelianSubfield) -> CyclotomicElement {
    let l = lcm(x.level() as i64, f.level() as i64) as usize;
    let xl = x.embed(l);
    let group = f.lift_subgroup(l);
    let n = x.level();
    // [Q(zeta_L) : F(zeta_N)]
    let stab = group.iter().filter(|&&a| a % n == 1 % n).count();
    let mut acc = CyclotomicElement::zero(l);
    for &a in &group {
        for (i, c) in xl.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc.coeffs[i * a % l] += *c;
            }
        }
    }
    acc.canonicalize();
    acc.scale(Rational::new(1, stab as i128))
}

/// `Tr_{F1/F2}(y)` for `y` in `F1`, where `F2` is a subfield of `F1`.
pub fn trace_between(
    y: &CyclotomicElement,
    big: &AbelianSubfield,
    small: &AbelianSubfield,
) -> Result<CyclotomicElement, CyclotomicError> {
    let l = [y.level(), big.level(), small.level()]
        .iter()
        .fold(1i64, |acc, &v| lcm(acc, v as i64)) as usize;
    let hb = big.lift_subgroup(l);
    let hs = small.lift_subgroup(l);
    if !hb.iter().all(|a| hs.binary_search(a).is_ok()) {
        return Err(CyclotomicError::SubfieldMismatch(
            "target is not a subfield of the source".into(),
        ));
    }
    // coset representatives of hs / hb
    let mut seen = vec![false; l.max(1)];
    let mut reps = Vec::new();
    for &a in &hs {
        if seen[a % l.max(1)] {
            continue;
        }
        reps.push(a);
        for &b in &hb {
            seen[a * b % l.max(1)] = true;
        }
    }
    let yl = y.embed(l);
    let mut acc = CyclotomicElement::zero(l);
    for a in reps {
        acc = acc.add(&yl.galois(a.max(1) as i64));
    }
    Ok(acc)
}

/// Ramanujan sum `c_n(k) = mu(n/g) phi(n) / phi(n/g)`, `g = gcd(n, k)`.
pub fn ramanujan_sum(n: i64, k: i64) -> i64 {
    assert!(n >= 1);
    let g = gcd(n, k);
    let g = if g == 0 { n } else { g };
    let q = n / g;
    crate::arith::moebius(q) * crate::arith::euler_phi(n) / crate::arith::euler_phi(q)
}

/// `c_n(k)` computed as the exact trace `sum_{m in (Z/n)^x} zeta_n^(k m)`.
pub fn ramanujan_trace(n: usize, k: i64) -> i64 {
    let mut counts = vec![0i64; n];
    for m in units_mod(n) {
        counts[(k.rem_euclid(n as i64) as usize * m) % n] += 1;
    }
    let x = CyclotomicElement::from_integer_counts(n, &counts);
    let r = x.as_rational().expect("Ramanujan sum is rational");
    debug_assert!(r.is_integer());
    *r.numer() as i64
}

/// `Tr_{F(xi)/F}(xi)` for a primitive `N`-th root of unity `xi`.
pub fn root_of_unity_trace(f: &AbelianSubfield, n: usize) -> CyclotomicElement {
    trace_to_subfield(&CyclotomicElement::zeta(n, 1), f)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Lemma1Report {
    pub p: i64,
    pub n_max: usize,
    /// Smallest exponent `mu` with `Tr(xi) = 0` for all `p^mu | N <= n_max`.
    pub mu: u32,
    /// Orders `N` divisible by `p^(mu-1)` with non-zero trace.
    pub witnesses: Vec<usize>,
}

/// Empirical search for the exponent in the vanishing of root-of-unity traces.
pub fn lemma1_mu_search(f: &AbelianSubfield, p: i64, n_max: usize) -> Lemma1Report {
    assert!(crate::arith::is_prime(p));
    let p = p as usize;
    let mut nonzero: Vec<(usize, u32)> = Vec::new();
    let mut n = p;
    while n <= n_max {
        if !root_of_unity_trace(f, n).is_zero() {
            nonzero.push((n, crate::arith::valuation(n as i64, p as i64)));
        }
        n += p;
    }
    let mu = nonzero.iter().map(|&(_, v)| v + 1).max().unwrap_or(1);
    let witnesses = nonzero
        .iter()
        .filter(|&&(_, v)| v + 1 == mu)
        .map(|&(n, _)| n)
        .collect();
    Lemma1Report {
        p: p as i64,
        n_max,
        mu,
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_identities() {
        let i = CyclotomicElement::zeta(4, 1);
        assert_eq!(i.mul(&i), CyclotomicElement::from_int(4, -1));
        let s = CyclotomicElement::zeta(3, 1).add(&CyclotomicElement::zeta(3, 2));
        assert_eq!(s.as_rational(), Some(Rational::from_integer(-1)));
        let z = CyclotomicElement::zeta(12, 1).mul(&CyclotomicElement::zeta(12, 5));
        assert_eq!(z, CyclotomicElement::from_int(12, -1));
        let x = CyclotomicElement::zeta(15, 7).add(&CyclotomicElement::zeta(5, 2));
        assert!(x.add(&x.neg()).is_zero());
        assert!((x.to_complex() - x.conj().to_complex().conj()).norm() < 1e-12);
    }

    #[test]
    fn canonical_size_is_phi() {
        for n in [1usize, 2, 6, 8, 9, 12, 30, 36, 45] {
            let mut count = 0;
            for k in 0..n as i64 {
                let z = CyclotomicElement::zeta(n, k);
                count = count.max(z.coeffs().iter().filter(|c| !c.is_zero()).count());
            }
            let all: Vec<i64> = (0..n).map(|i| i as i64 + 1).collect();
            let x = CyclotomicElement::from_integer_counts(n, &all);
            let support = x.coeffs().iter().filter(|c| !c.is_zero()).count();
            assert!(support <= crate::arith::euler_phi(n as i64) as usize);
            assert!(count >= 1);
        }
    }

    #[test]
    fn full_trace_is_moebius() {
        for n in 1..=60usize {
            let t = root_of_unity_trace(&AbelianSubfield::rationals(), n);
            assert_eq!(
                t.as_rational(),
                Some(Rational::from_integer(crate::arith::moebius(n as i64) as i128)),
                "n = {n}"
            );
        }
    }

    #[test]
    fn trace_of_scalar_and_minus_one() {
        let f = AbelianSubfield::quadratic(-4);
        let r = CyclotomicElement::from_int(12, 3);
        // [Q(zeta_12) : Q(i)] = 2
        assert_eq!(trace_to_subfield(&r, &f), CyclotomicElement::from_int(4, 6));
        let m1 = CyclotomicElement::zeta(4, 2);
        let t = trace_to_subfield(&m1, &AbelianSubfield::rationals());
        assert_eq!(t.as_rational(), Some(Rational::from_integer(-2)));
    }

    #[test]
    fn ramanujan_routes_agree() {
        for n in 1..=80usize {
            for k in -3..=(n as i64 + 2) {
                assert_eq!(ramanujan_trace(n, k), ramanujan_sum(n as i64, k), "c_{n}({k})");
            }
        }
        assert_eq!(ramanujan_sum(12, 1), 0);
        assert_eq!(ramanujan_sum(4, 2), -2);
        assert_eq!(ramanujan_sum(1, 17), 1);
    }

    #[test]
    fn lemma1_small_cases() {
        let q = AbelianSubfield::rationals();
        assert_eq!(lemma1_mu_search(&q, 3, 500).mu, 2);
        assert!(root_of_unity_trace(&q, 25).is_zero());
        let gaussian = AbelianSubfield::quadratic(-4);
        let rep = lemma1_mu_search(&gaussian, 2, 200);
        assert_eq!(rep.mu, 3);
        assert!(rep.witnesses.contains(&12));
    }

    #[test]
    fn subfield_validation() {
        assert!(AbelianSubfield::new(8, &[1, 3]).is_ok());
        assert!(AbelianSubfield::new(8, &[3]).is_err());
        assert!(AbelianSubfield::new(8, &[1, 2]).is_err());
        assert!(AbelianSubfield::new(7, &[1, 2]).is_err());
        assert_eq!(AbelianSubfield::quadratic(-23).degree(), 2);
    }
}
