//! Conductor exponents `m_p`, `o_p`, `n_p` and the quantity `q(chi)`.

use serde::Serialize;

use super::HeckeCharacter;
use crate::arith::{self, crt, gcd, valuation};
use crate::quadfield::QuadInt;

#[derive(Debug, Clone, Serialize)]
pub struct PrimeExponents {
    pub p: i64,
    /// exponent of `p` in `N f(chi)`
    pub m_p: u32,
    /// `p^{o_p}` is the order of `eps_p` on `1 + p^3 (O (x) Z_p)`
    pub o_p: u32,
    pub n_p: u32,
    /// `|m_p / 2 - n_p| <= 3 + mu + h`
    pub bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MainLemmaReport {
    pub mu: u32,
    pub h: i64,
    pub primes: Vec<PrimeExponents>,
    pub q: i64,
    pub bound_holds: bool,
}

/// Computes the exponents for every prime of `primes` (typically the set
/// `P`); primes not dividing the conductor get zeros.
pub fn main_lemma_quantities(chi: &HeckeCharacter, mu: u32, primes: &[i64]) -> MainLemmaReport {
    let h = chi.field().h;
    let nf = chi.conductor().norm();
    let mut out = Vec::new();
    let mut q = 1i64;
    for &p in primes {
        let m_p = if nf % p == 0 { valuation(nf, p) } else { 0 };
        let o_p = if m_p == 0 { 0 } else { local_order_exponent(chi, p, m_p) };
        let n_p = o_p.saturating_sub(mu + h as u32);
        let bound_holds = (m_p as i64 - 2 * n_p as i64).abs() <= 2 * (3 + mu as i64 + h);
        q *= p.pow(n_p);
        out.push(PrimeExponents {
            p,
            m_p,
            o_p,
            n_p,
            bound_holds,
        });
    }
    MainLemmaReport {
        mu,
        h,
        bound_holds: out.iter().all(|r| r.bound_holds),
        primes: out,
        q,
    }
}

/// `v_p` of the order of `eps_p` restricted to `1 + p^3 O_p`. The local
/// component is read off through the element congruent to `x` at `p` and
/// to `1` away from `p`.
fn local_order_exponent(chi: &HeckeCharacter, p: i64, m_p: u32) -> u32 {
    let nf = chi.conductor().norm();
    let pk = p.pow(m_p);
    let away = nf / pk;
    // e = 1 mod p^m_p, e = 0 mod N(f_away)
    let e = crt(1, pk as i128, 0, away as i128) as i64;
    let p3 = p.pow(3);
    let m = chi.finite_part().order();
    let mut order = 1i64;
    for y in [QuadInt::ONE, QuadInt::new(0, 1)] {
        let t = (p3 as i128 * e as i128).rem_euclid(nf as i128) as i64;
        let x = QuadInt::ONE.add(&y.scale(t));
        let k = chi
            .eps_exponent(&x)
            .expect("1 + p^3 y is a unit modulo the conductor");
        order = arith::lcm(order, m / gcd(k, m));
    }
    if order == 1 {
        0
    } else {
        valuation(order, p)
    }
}
