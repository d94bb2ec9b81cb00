//! Truncated p-adic integers, Hensel lifting, the congruence-pair count
//! `M(q, t)` and exhaustive scans of the p-adic Ridout inequality.
//!
//! Pairs `(u, v)` with `u beta - v alpha = 0 mod q` form a lattice of rank 2;
//! counts and scans enumerate a Lagrange-reduced basis of that lattice in the
//! height box instead of the box itself.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{gcd_i128, is_prime};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("SingularRoot: derivative vanishes at {r0} mod {p}")]
    SingularRoot { p: i64, r0: i64 },
    #[error("NoRoot: {r0} is not a root mod {p}")]
    NoRoot { p: i64, r0: i64 },
    #[error("InsufficientPrecision: value is 0 mod {p}^{k}")]
    InsufficientPrecision { p: i64, k: u32 },
    #[error("InvalidInstance: {0}")]
    InvalidInstance(String),
    #[error("Overflow: lattice entries exceed 128 bits")]
    Overflow,
}

/// Largest working precision tried by the automatic retries.
const MAX_PRECISION: u32 = 640;
/// Default safety margin in base-`p` digits.
pub const PRECISION_MARGIN: u32 = 20;

/// An element of `Z_p` known modulo `p^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicNumber {
    pub p: i64,
    pub k: u32,
    /// canonical residue in `[0, p^k)`
    pub residue: BigInt,
    /// `v_p`, or `k` when the residue is 0
    pub valuation: u32,
    /// set when the number is a known rational integer
    pub exact: Option<i64>,
}

impl PadicNumber {
    pub fn new(p: i64, k: u32, residue: BigInt) -> Self {
        let m = BigInt::from(p).pow(k);
        let residue = residue.mod_floor(&m);
        let valuation = big_valuation(&residue, p, k);
        PadicNumber {
            p,
            k,
            residue,
            valuation,
            exact: None,
        }
    }

    pub fn from_int(p: i64, k: u32, n: i64) -> Self {
        PadicNumber {
            exact: Some(n),
            ..Self::new(p, k, BigInt::from(n))
        }
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.k)
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    /// `|x|_p = p^-v`.
    pub fn abs_p(&self) -> f64 {
        (self.p as f64).powi(-(self.valuation as i32))
    }

    fn combine(&self, o: &PadicNumber, r: BigInt, exact: Option<i64>) -> PadicNumber {
        assert_eq!(self.p, o.p, "p-adic numbers over different primes");
        let k = self.k.min(o.k);
        PadicNumber {
            exact,
            ..PadicNumber::new(self.p, k, r)
        }
    }

    pub fn add(&self, o: &PadicNumber) -> PadicNumber {
        let exact = self.exact.zip(o.exact).and_then(|(a, b)| a.checked_add(b));
        self.combine(o, &self.residue + &o.residue, exact)
    }

    pub fn sub(&self, o: &PadicNumber) -> PadicNumber {
        let exact = self.exact.zip(o.exact).and_then(|(a, b)| a.checked_sub(b));
        self.combine(o, &self.residue - &o.residue, exact)
    }

    pub fn mul(&self, o: &PadicNumber) -> PadicNumber {
        let exact = self.exact.zip(o.exact).and_then(|(a, b)| a.checked_mul(b));
        self.combine(o, &self.residue * &o.residue, exact)
    }

    pub fn scale(&self, n: i64) -> PadicNumber {
        let exact = self.exact.and_then(|a| a.checked_mul(n));
        PadicNumber {
            exact,
            ..PadicNumber::new(self.p, self.k, &self.residue * n)
        }
    }

    /// Residue modulo `p^j`, `j <= k`.
    pub fn residue_mod(&self, j: u32) -> BigInt {
        assert!(j <= self.k);
        self.residue.mod_floor(&BigInt::from(self.p).pow(j))
    }
}

fn big_valuation(x: &BigInt, p: i64, k: u32) -> u32 {
    if x.is_zero() {
        return k;
    }
    let bp = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while (&x % &bp).is_zero() && v < k {
        x /= &bp;
        v += 1;
    }
    v
}

/// Polynomial with integer coefficients, lowest degree first.
fn eval_poly(poly: &[i64], x: &BigInt) -> BigInt {
    poly.iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * x + BigInt::from(*c))
}

fn derivative(poly: &[i64]) -> Vec<i64> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as i64)
        .collect()
}

/// Newton lifting of a simple root; also returns the precision reached
/// after each step (1, 2, 4, ...).
pub fn hensel_lift_traced(
    p: i64,
    poly: &[i64],
    r0: i64,
    k: u32,
) -> Result<(PadicNumber, Vec<u32>), DiophantineError> {
    let bp = BigInt::from(p);
    let r = BigInt::from(r0).mod_floor(&bp);
    if !eval_poly(poly, &r).mod_floor(&bp).is_zero() {
        return Err(DiophantineError::NoRoot { p, r0 });
    }
    let dpoly = derivative(poly);
    if eval_poly(&dpoly, &r).mod_floor(&bp).is_zero() {
        return Err(DiophantineError::SingularRoot { p, r0 });
    }
    let mut r = r;
    let mut prec = 1u32;
    let mut trace = vec![1];
    while prec < k {
        prec = (2 * prec).min(k);
        let m = bp.pow(prec);
        let fr = eval_poly(poly, &r).mod_floor(&m);
        let dr = eval_poly(&dpoly, &r).mod_floor(&m);
        let inv = big_mod_inv(&dr, &m).expect("derivative is a unit");
        r = (&r - fr * inv).mod_floor(&m);
        trace.push(prec);
    }
    Ok((PadicNumber::new(p, k, r), trace))
}

/// The root of `poly` in `Z_p` congruent to `r0` mod `p`, modulo `p^k`.
pub fn hensel_lift(p: i64, poly: &[i64], r0: i64, k: u32) -> Result<PadicNumber, DiophantineError> {
    Ok(hensel_lift_traced(p, poly, r0, k)?.0)
}

/// All simple roots of `poly` in `Z_p`, lifted to precision `k`.
pub fn simple_roots(p: i64, poly: &[i64], k: u32) -> Vec<PadicNumber> {
    (0..p)
        .filter_map(|r| hensel_lift(p, poly, r, k).ok())
        .collect()
}

fn big_mod_inv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// A `Z_p`-element given exactly or as a root of an integer polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PadicSource {
    Integer { value: i64 },
    Root { polynomial: Vec<i64>, seed: i64 },
}

impl PadicSource {
    pub fn at_precision(&self, p: i64, k: u32) -> Result<PadicNumber, DiophantineError> {
        match self {
            PadicSource::Integer { value } => Ok(PadicNumber::from_int(p, k, *value)),
            PadicSource::Root { polynomial, seed } => hensel_lift(p, polynomial, *seed, k),
        }
    }
}

/// `(alpha_p, beta_p)` at one prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruencePair {
    pub p: i64,
    pub alpha: PadicSource,
    pub beta: PadicSource,
}

/// Rank-2 lattice with rows `b1`, `b2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice2 {
    pub b1: (i128, i128),
    pub b2: (i128, i128),
}

impl Lattice2 {
    pub fn det(&self) -> i128 {
        (self.b1.0 * self.b2.1 - self.b1.1 * self.b2.0).abs()
    }

    /// Lagrange reduction; `|b1| <= |b2|` afterwards.
    pub fn reduce(mut self) -> Result<Lattice2, DiophantineError> {
        let norm = |b: (i128, i128)| -> Result<i128, DiophantineError> {
            b.0.checked_mul(b.0)
                .and_then(|x| b.1.checked_mul(b.1).and_then(|y| x.checked_add(y)))
                .ok_or(DiophantineError::Overflow)
        };
        let dot = |a: (i128, i128), b: (i128, i128)| -> Result<i128, DiophantineError> {
            a.0.checked_mul(b.0)
                .and_then(|x| a.1.checked_mul(b.1).and_then(|y| x.checked_add(y)))
                .ok_or(DiophantineError::Overflow)
        };
        if norm(self.b1)? > norm(self.b2)? {
            std::mem::swap(&mut self.b1, &mut self.b2);
        }
        loop {
            let n1 = norm(self.b1)?;
            if n1 == 0 {
                return Ok(self);
            }
            let m = div_round(dot(self.b1, self.b2)?, n1);
            self.b2 = (self.b2.0 - m * self.b1.0, self.b2.1 - m * self.b1.1);
            if norm(self.b2)? >= n1 {
                return Ok(self);
            }
            std::mem::swap(&mut self.b1, &mut self.b2);
        }
    }

    /// Squared length of the shortest vector of a reduced basis.
    pub fn min_norm(&self) -> f64 {
        (self.b1.0 as f64).powi(2) + (self.b1.1 as f64).powi(2)
    }

    /// All nonzero lattice points with `|u|, |v| <= x`, in increasing order.
    pub fn points_in_box(&self, x: i128) -> Vec<(i128, i128)> {
        let det = self.b1.0 * self.b2.1 - self.b1.1 * self.b2.0;
        assert!(det != 0, "degenerate lattice");
        // y = (b1u v - b1v u) / det
        let ymax = (x * (self.b1.0.abs() + self.b1.1.abs())) / det.abs();
        let mut out = Vec::new();
        for y in -ymax..=ymax {
            let (mut lo, mut hi) = (i128::MIN, i128::MAX);
            for (b, c) in [(self.b1.0, y * self.b2.0), (self.b1.1, y * self.b2.1)] {
                // |x b + c| <= x_bound
                if b == 0 {
                    if c.abs() > x {
                        lo = 1;
                        hi = 0;
                    }
                    continue;
                }
                let (a1, a2) = ((-x - c), (x - c));
                let (l, h) = if b > 0 {
                    (div_ceil(a1, b), div_floor(a2, b))
                } else {
                    (div_ceil(a2, b), div_floor(a1, b))
                };
                lo = lo.max(l);
                hi = hi.min(h);
            }
            for k in lo..=hi {
                let u = k * self.b1.0 + y * self.b2.0;
                let v = k * self.b1.1 + y * self.b2.1;
                if (u, v) != (0, 0) {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn div_round(a: i128, b: i128) -> i128 {
    (2 * a + b).div_euclid(2 * b)
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

fn modinv_i128(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// Lattice `{(u, v) : u b - v a = 0 mod q}`.
pub fn congruence_lattice(a: i128, b: i128, q: i128) -> Result<Lattice2, DiophantineError> {
    let (a, b) = (a.rem_euclid(q), b.rem_euclid(q));
    let g = gcd_i128(b, q);
    // v a = 0 mod g
    let c = g / gcd_i128(a, g);
    let qg = q / g;
    let u0 = if qg == 1 {
        0
    } else {
        let inv = modinv_i128(b / g, qg).expect("b/g is invertible mod q/g");
        let rhs = (c.checked_mul(a).ok_or(DiophantineError::Overflow)? / g).rem_euclid(qg);
        rhs.checked_mul(inv).ok_or(DiophantineError::Overflow)?.rem_euclid(qg)
    };
    Lattice2 {
        b1: (qg, 0),
        b2: (u0, c),
    }
    .reduce()
}

fn crt_i128(r1: i128, m1: i128, r2: i128, m2: i128) -> i128 {
    let inv = modinv_i128(m1 % m2, m2).expect("coprime moduli");
    let t = ((r2 - r1).rem_euclid(m2) * inv).rem_euclid(m2);
    (r1 + m1 * t).rem_euclid(m1 * m2)
}

/// Result of a congruence-pair count.
#[derive(Debug, Clone, Serialize)]
pub struct MCount {
    pub q: i128,
    pub t: f64,
    pub count: usize,
    /// at most `WITNESS_LIMIT` pairs, in increasing order
    pub witnesses: Vec<(i128, i128)>,
    /// precision (in digits) used at each prime
    pub precision: Vec<(i64, u32)>,
}

pub const WITNESS_LIMIT: usize = 1000;

/// `M(q, t)`: pairs with `u beta_p - v alpha_p = 0 mod q Z_p` for every `p`,
/// `u beta_p - v alpha_p != 0`, and `|u|, |v| <= t`. Nonvanishing is decided
/// at precision `v_p(q) + 20` digits, doubled on failure.
pub fn count_m(q: i128, t: f64, pairs: &[CongruencePair]) -> Result<MCount, DiophantineError> {
    let mut extra = PRECISION_MARGIN;
    loop {
        match count_m_at(q, t, pairs, extra) {
            Err(DiophantineError::InsufficientPrecision { .. }) if extra < MAX_PRECISION => {
                extra *= 2;
            }
            r => return r,
        }
    }
}

fn count_m_at(q: i128, t: f64, pairs: &[CongruencePair], extra: u32) -> Result<MCount, DiophantineError> {
    if q < 1 {
        return Err(DiophantineError::InvalidInstance(format!("q = {q}")));
    }
    let mut rest = q;
    for pr in pairs {
        while rest % pr.p as i128 == 0 {
            rest /= pr.p as i128;
        }
    }
    if rest != 1 {
        return Err(DiophantineError::InvalidInstance(format!(
            "q = {q} has prime factors outside the instance"
        )));
    }
    // one congruence mod q by CRT
    let (mut a, mut b, mut m) = (0i128, 0i128, 1i128);
    let mut padics = Vec::new();
    let mut precision = Vec::new();
    for pr in pairs {
        let e = valuation_i128(q, pr.p as i128);
        let k = e + extra;
        let alpha = pr.alpha.at_precision(pr.p, k)?;
        let beta = pr.beta.at_precision(pr.p, k)?;
        if e > 0 {
            let pe = (pr.p as i128).pow(e);
            let ra = alpha.residue_mod(e).to_i128().expect("residue fits");
            let rb = beta.residue_mod(e).to_i128().expect("residue fits");
            a = crt_i128(a, m, ra, pe);
            b = crt_i128(b, m, rb, pe);
            m *= pe;
        }
        precision.push((pr.p, k));
        padics.push((alpha, beta));
    }
    let tb = t.floor() as i128;
    if tb < 1 {
        return Ok(MCount {
            q,
            t,
            count: 0,
            witnesses: Vec::new(),
            precision,
        });
    }
    let lattice = congruence_lattice(a, b, q)?;
    let candidates = lattice.points_in_box(tb);
    let checked: Result<Vec<bool>, DiophantineError> = candidates
        .par_iter()
        .map(|&(u, v)| nonvanishing(u, v, &padics))
        .collect();
    let mut witnesses = Vec::new();
    let mut count = 0;
    for (pt, ok) in candidates.iter().zip(checked?) {
        if ok {
            count += 1;
            if witnesses.len() < WITNESS_LIMIT {
                witnesses.push(*pt);
            }
        }
    }
    Ok(MCount {
        q,
        t,
        count,
        witnesses,
        precision,
    })
}

fn valuation_i128(mut x: i128, p: i128) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// `u beta_p - v alpha_p != 0` for all `p`; exact for integer data.
fn nonvanishing(u: i128, v: i128, padics: &[(PadicNumber, PadicNumber)]) -> Result<bool, DiophantineError> {
    for (alpha, beta) in padics {
        if let (Some(a), Some(b)) = (alpha.exact, beta.exact) {
            if u * b as i128 - v * a as i128 == 0 {
                return Ok(false);
            }
            continue;
        }
        let x = &beta.residue * BigInt::from(u) - &alpha.residue * BigInt::from(v);
        if x.mod_floor(&alpha.modulus()).is_zero() {
            return Err(DiophantineError::InsufficientPrecision {
                p: alpha.p,
                k: alpha.k,
            });
        }
    }
    Ok(true)
}

/// Instance of the p-adic Ridout inequality `prod_p |u - v gamma_p|_p <= H(u,v)^-kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidoutInstance {
    pub primes: Vec<i64>,
    /// integer polynomials, lowest degree first
    pub polynomials: Vec<Vec<i64>>,
    pub seeds: Vec<i64>,
    pub kappa: f64,
    pub height: i64,
}

impl RidoutInstance {
    /// `gamma_7 = sqrt(2)` with `gamma = 3 mod 7`.
    pub fn sqrt2_in_z7(kappa: f64, height: i64) -> Self {
        RidoutInstance {
            primes: vec![7],
            polynomials: vec![vec![-2, 0, 1]],
            seeds: vec![3],
            kappa,
            height,
        }
    }

    pub fn validate(&self) -> Result<(), DiophantineError> {
        let n = self.primes.len();
        if n == 0 || self.polynomials.len() != n || self.seeds.len() != n {
            return Err(DiophantineError::InvalidInstance(
                "primes, polynomials and seeds must have equal nonzero length".into(),
            ));
        }
        if let Some(p) = self.primes.iter().find(|p| !is_prime(**p)) {
            return Err(DiophantineError::InvalidInstance(format!("{p} is not prime")));
        }
        if self.polynomials.iter().any(|f| f.len() < 2 || f.len() > 5) {
            return Err(DiophantineError::InvalidInstance(
                "polynomials must have degree 1 to 4".into(),
            ));
        }
        if !(self.kappa > 2.0) {
            return Err(DiophantineError::InvalidInstance(format!("kappa = {} <= 2", self.kappa)));
        }
        if self.height < 1 {
            return Err(DiophantineError::InvalidInstance("height < 1".into()));
        }
        Ok(())
    }

    /// `(alpha, beta) = (gamma_p, 1)` so that `u beta - v alpha = u - v gamma_p`.
    pub fn pairs(&self) -> Vec<CongruencePair> {
        self.primes
            .iter()
            .zip(&self.polynomials)
            .zip(&self.seeds)
            .map(|((p, f), s)| CongruencePair {
                p: *p,
                alpha: PadicSource::Root {
                    polynomial: f.clone(),
                    seed: *s,
                },
                beta: PadicSource::Integer { value: 1 },
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RidoutSolution {
    pub u: i64,
    pub v: i64,
    /// `prod_p |u - v gamma_p|_p`
    pub residual: f64,
    /// `max(|u|, |v|)`
    pub height: i64,
    /// `v_p(u - v gamma_p)` per prime
    pub valuations: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RidoutReport {
    pub kappa: f64,
    pub height: i64,
    /// coprime pairs up to sign (`v > 0`, or `(1, 0)`), ordered by height then `(u, v)`
    pub solutions: Vec<RidoutSolution>,
    /// reduced lattice vectors within the height bound that are not solutions
    pub candidates_checked: usize,
    /// `min prod |u - v gamma|_p H^kappa` over those candidates
    pub implied_constant: Option<f64>,
    pub precision: u32,
}

/// Every coprime `(u, v)` with `max(|u|, |v|) <= H` satisfying the inequality.
/// A solution with valuations `e_p` lies in the lattice of
/// `u = v gamma_p mod p^e_p`, inside the box of side `(prod p^e_p)^(1/kappa)`,
/// so the scan runs over valuation vectors and enumerates each lattice.
pub fn ridout_scan(instance: &RidoutInstance) -> Result<RidoutReport, DiophantineError> {
    instance.validate()?;
    let mut k = 64;
    loop {
        match ridout_scan_at(instance, k) {
            Err(DiophantineError::InsufficientPrecision { .. }) if k < MAX_PRECISION => k *= 2,
            r => return r,
        }
    }
}

fn ridout_scan_at(instance: &RidoutInstance, k: u32) -> Result<RidoutReport, DiophantineError> {
    let h = instance.height as i128;
    let kappa = instance.kappa;
    let gammas: Vec<PadicNumber> = instance
        .pairs()
        .iter()
        .map(|pr| pr.alpha.at_precision(pr.p, k))
        .collect::<Result<_, _>>()?;
    // per prime, the exponents whose lattice still has a nonzero point in the H-box
    let mut ranges = Vec::new();
    for g in &gammas {
        let mut emax = 0;
        loop {
            let e = emax + 1;
            if e >= k {
                return Err(DiophantineError::InsufficientPrecision { p: g.p, k });
            }
            let pe = checked_pow(g.p as i128, e)?;
            let gamma = g.residue_mod(e).to_i128().ok_or(DiophantineError::Overflow)?;
            let lat = congruence_lattice(gamma, 1, pe)?;
            if lat.min_norm() > 2.0 * (h as f64).powi(2) {
                break;
            }
            emax = e;
        }
        ranges.push(emax);
    }
    let mut vectors: Vec<Vec<u32>> = vec![Vec::new()];
    for &emax in &ranges {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                (0..=emax).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    let found: Vec<Vec<(i128, i128)>> = vectors
        .par_iter()
        .map(|es| -> Result<Vec<(i128, i128)>, DiophantineError> {
            let (mut a, mut m) = (0i128, 1i128);
            for (g, &e) in gammas.iter().zip(es) {
                if e == 0 {
                    continue;
                }
                let pe = checked_pow(g.p as i128, e)?;
                let r = g.residue_mod(e).to_i128().ok_or(DiophantineError::Overflow)?;
                a = crt_i128(a, m, r, pe);
                m = m.checked_mul(pe).ok_or(DiophantineError::Overflow)?;
            }
            let side = ((m as f64).powf(1.0 / kappa).floor() as i128).min(h);
            let lat = if m == 1 {
                Lattice2 {
                    b1: (1, 0),
                    b2: (0, 1),
                }
            } else {
                congruence_lattice(a, 1, m)?
            };
            // the reduced basis supplies the near misses for the constant
            let mut pts: Vec<(i128, i128)> = [lat.b1, lat.b2]
                .into_iter()
                .filter(|b| b.0.abs().max(b.1.abs()) <= h)
                .collect();
            if side >= 1 {
                pts.extend(lat.points_in_box(side));
            }
            Ok(pts)
        })
        .collect::<Result<_, _>>()?;
    let mut points = BTreeSet::new();
    for (u, v) in found.into_iter().flatten() {
        if gcd_i128(u, v) != 1 {
            continue;
        }
        let (u, v) = if v < 0 || (v == 0 && u < 0) { (-u, -v) } else { (u, v) };
        points.insert((u as i64, v as i64));
    }
    let mut solutions = Vec::new();
    let mut candidates_checked = 0;
    let mut implied: Option<f64> = None;
    for (u, v) in points {
        let mut residual = 1.0;
        let mut valuations = Vec::new();
        for g in &gammas {
            let x = g.scale(v);
            let diff = PadicNumber::from_int(g.p, k, u).sub(&x);
            if diff.is_zero() {
                return Err(DiophantineError::InsufficientPrecision { p: g.p, k });
            }
            valuations.push(diff.valuation);
            residual *= diff.abs_p();
        }
        let height = u.abs().max(v.abs());
        let scaled = residual * (height as f64).powf(kappa);
        if scaled <= 1.0 {
            solutions.push(RidoutSolution {
                u,
                v,
                residual,
                height,
                valuations,
            });
        } else {
            candidates_checked += 1;
            implied = Some(implied.map_or(scaled, |c: f64| c.min(scaled)));
        }
    }
    solutions.sort_by_key(|s| (s.height, s.u, s.v));
    Ok(RidoutReport {
        kappa,
        height: instance.height,
        solutions,
        candidates_checked,
        implied_constant: implied,
        precision: k,
    })
}

fn checked_pow(p: i128, e: u32) -> Result<i128, DiophantineError> {
    p.checked_pow(e).ok_or(DiophantineError::Overflow)
}

/// One row of the Proposition-4 table.
#[derive(Debug, Clone, Serialize)]
pub struct Prop4Row {
    pub p: i64,
    pub k: u32,
    pub q: i128,
    /// `M(q, q^c)`
    pub m_c: usize,
    /// `(d, M(q, q^d), M(q, q^d) < q^s)`
    pub m_d: Vec<(f64, usize, bool)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop4Table {
    pub c: f64,
    pub s: f64,
    pub rows: Vec<Prop4Row>,
    /// smallest `k` from which every later row has `M(q, q^c) = 0`
    pub zero_from: Option<u32>,
}

/// `M(q, q^c)` and `M(q, q^d)` against `q^s` for `q = p^k`, `k` in `ks`,
/// with `p` the first prime of the instance.
pub fn proposition4_experiment(
    instance: &RidoutInstance,
    c: f64,
    d_grid: &[f64],
    s: f64,
    ks: &[u32],
) -> Result<Prop4Table, DiophantineError> {
    instance.validate()?;
    if !(c < 0.5) {
        return Err(DiophantineError::InvalidInstance(format!("c = {c} >= 1/2")));
    }
    let pairs = instance.pairs();
    let p = instance.primes[0];
    let mut rows = Vec::new();
    for &k in ks {
        let q = checked_pow(p as i128, k)?;
        let qf = q as f64;
        let m_c = count_m(q, qf.powf(c), &pairs[..1])?.count;
        let mut m_d = Vec::new();
        for &d in d_grid {
            let n = count_m(q, qf.powf(d), &pairs[..1])?.count;
            m_d.push((d, n, (n as f64) < qf.powf(s)));
        }
        rows.push(Prop4Row { p, k, q, m_c, m_d });
    }
    let zero_from = rows
        .iter()
        .rposition(|r| r.m_c != 0)
        .map_or(rows.first().map(|r| r.k), |i| rows.get(i + 1).map(|r| r.k));
    Ok(Prop4Table {
        c,
        s,
        rows,
        zero_from,
    })
}

/// CSV of Ridout solutions.
pub fn solutions_csv(report: &RidoutReport) -> String {
    let mut out = String::from("u,v,residual,height\n");
    for s in &report.solutions {
        out.push_str(&format!("{},{},{:?},{}\n", s.u, s.v, s.residual, s.height));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hensel_examples() {
        let r = hensel_lift(7, &[-2, 0, 1], 3, 2).unwrap();
        assert_eq!(r.residue, BigInt::from(10));
        let r = hensel_lift(7, &[-2, 0, 1], 4, 1).unwrap();
        assert_eq!(r.residue, BigInt::from(4));
        assert!(simple_roots(5, &[-2, 0, 1], 4).is_empty());
        assert!(matches!(
            hensel_lift(5, &[-2, 0, 1], 2, 3),
            Err(DiophantineError::NoRoot { .. })
        ));
        assert!(matches!(
            hensel_lift(2, &[-1, 0, 1], 1, 3),
            Err(DiophantineError::SingularRoot { .. })
        ));
        let (_, trace) = hensel_lift_traced(7, &[-2, 0, 1], 3, 40).unwrap();
        assert_eq!(trace, vec![1, 2, 4, 8, 16, 32, 40]);
    }

    #[test]
    fn lattice_reduction_keeps_determinant() {
        let l = congruence_lattice(12345, 1, 7i128.pow(10)).unwrap();
        assert_eq!(l.det(), 7i128.pow(10));
    }
}
