//! Smoothed central values `L(1, chi)`, `L'(1, chi)` and the completed
//! function `Lambda(s, chi) = Gamma(s) (A f)^s L(s, chi)`.
//!
//! All sums run over the theta coefficients `a_n = sum_{N a = n} chi(a)`
//! up to a truncation `T` with a certified tail, in `f64`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::gcd;
use crate::characters::HeckeCharacter;
use crate::quadfield::FieldContext;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LSeriesError {
    #[error("NonPositiveArgument: kernel evaluated at u = {0}")]
    NonPositiveArgument(f64),
    #[error("DomainError: {0}")]
    DomainError(String),
    #[error("SignMismatch: v = {v} requested but the root number is {w}")]
    SignMismatch { v: u8, w: i32 },
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const FPMIN: f64 = 1e-300;
const EPS: f64 = 1e-16;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Gamma(s)` for real `s > 0` (Lanczos, `g = 7`).
pub fn gamma(s: f64) -> f64 {
    if s < 0.5 {
        // reflection
        return std::f64::consts::PI / ((std::f64::consts::PI * s).sin() * gamma(1.0 - s));
    }
    let x = s - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Exponential integral `E1(u)`: power series below 1, Lentz continued
/// fraction above.
pub fn e1(u: f64) -> Result<f64, LSeriesError> {
    if !(u > 0.0) {
        return Err(LSeriesError::NonPositiveArgument(u));
    }
    if u < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -u / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < EPS * sum.abs() {
                break;
            }
        }
        return Ok(-EULER_GAMMA - u.ln() + sum);
    }
    let mut b = u + 1.0;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    Ok(h * (-u).exp())
}

/// `I_0(u) = e^-u`, `I_1(u) = E1(u)`.
pub fn kernel_i(v: u8, u: f64) -> Result<f64, LSeriesError> {
    if !(u > 0.0) {
        return Err(LSeriesError::NonPositiveArgument(u));
    }
    match v {
        0 => Ok((-u).exp()),
        1 => e1(u),
        _ => Err(LSeriesError::DomainError(format!("kernel order {v}"))),
    }
}

/// Upper incomplete gamma `Gamma(s, u)` for `0 < s < 2`, `u > 0`.
pub fn incomplete_gamma(s: f64, u: f64) -> Result<f64, LSeriesError> {
    if !(s > 0.0 && s < 2.0) || !(u > 0.0) {
        return Err(LSeriesError::DomainError(format!("Gamma({s}, {u})")));
    }
    Ok(upper_gamma(s, u))
}

fn upper_gamma(s: f64, u: f64) -> f64 {
    let prefactor = (-u + s * u.ln()).exp();
    if u < s + 1.0 {
        let mut ap = s;
        let mut del = 1.0 / s;
        let mut sum = del;
        for _ in 0..500 {
            ap += 1.0;
            del *= u / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        return gamma(s) - sum * prefactor;
    }
    let mut b = u + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    prefactor * h
}

/// The constant in `I_1(u) <= e^-u |log u| + C0`, taken as
/// `int_0^inf e^-t |log t| dt + 1 = gamma_E + 2 E1(1) + 1`.
pub fn c0() -> f64 {
    EULER_GAMMA + 2.0 * e1(1.0).unwrap() + 1.0
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, x: Complex64) {
        let re = two_sum(self.sum.re, x.re);
        let im = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(re.0, im.0);
        self.comp += Complex64::new(re.1, im.1);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, err)
}

const SHARD: usize = 2048;

/// `sum_{n=1}^{len-1} term(n)` sharded over fixed ranges, merged in order.
fn sharded_sum<F>(len: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let shards: Vec<Complex64> = (0..len.div_ceil(SHARD))
        .into_par_iter()
        .map(|s| {
            let mut acc = CompensatedSum::default();
            for n in (s * SHARD).max(1)..((s + 1) * SHARD).min(len) {
                acc.add(term(n));
            }
            acc.value()
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for s in shards {
        acc.add(s);
    }
    acc.value()
}

/// `a_n` for `n <= x`, indexed by `n` (entry 0 unused).
pub fn theta_coeffs(chi: &HeckeCharacter, x: f64) -> Vec<Complex64> {
    coefficient_tables(chi, x).0
}

/// All coefficients and the self-conjugate part.
fn coefficient_tables(chi: &HeckeCharacter, x: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = chi.field().d;
    let bound = x.max(1.0).floor() as usize;
    let ideals = chi.field().enumerate_ideals(bound as f64);
    let values: Vec<Complex64> = ideals.par_iter().map(|a| chi.eval_complex(a)).collect();
    let mut all = vec![Complex64::new(0.0, 0.0); bound + 1];
    let mut selfconj = all.clone();
    for (a, v) in ideals.iter().zip(values) {
        let n = a.norm() as usize;
        all[n] += v;
        if a.is_self_conjugate(d) {
            selfconj[n] += v;
        }
    }
    (all, selfconj)
}

/// `T = A f max(40, ln(1/tol) + 2 ln(1 + A f) + ln 8)`.
pub fn truncation(af: f64, tol: f64) -> f64 {
    let t = af * f64::max(40.0, (1.0 / tol).ln() + 2.0 * (1.0 + af).ln() + 8f64.ln());
    t.max(16.0)
}

/// Bound on `2 sum_{n > T} |a_n| n^-1 I_v(n / (A f))` from `|a_n| <= d(n) sqrt(n)`,
/// `d(n) <= 2 sqrt(n)` and `I_v(u) <= e^-u` for `u >= 1`.
pub fn tail_bound(af: f64, t: f64) -> f64 {
    4.0 * (af + 1.0) * (-t.floor() / af).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothedValue {
    pub value: f64,
    /// imaginary part of the accumulated sum
    pub imag: f64,
    pub truncation: f64,
    pub tail_bound: f64,
    pub v: u8,
    /// `N(f(chi))^(1/2)`
    pub f: f64,
    pub af: f64,
}

/// Theta coefficients of one character, cut at a fixed truncation.
#[derive(Debug, Clone)]
pub struct ThetaSeries {
    pub coeffs: Vec<Complex64>,
    /// coefficients restricted to self-conjugate ideals
    pub self_conjugate: Vec<Complex64>,
    pub af: f64,
    pub f: f64,
    pub truncation: f64,
}

impl ThetaSeries {
    /// Coefficients up to `truncation(A f, tol)`.
    pub fn new(chi: &HeckeCharacter, tol: f64) -> Self {
        let f = chi.f_value();
        let af = chi.field().a_const * f;
        Self::with_truncation(chi, truncation(af, tol))
    }

    pub fn with_truncation(chi: &HeckeCharacter, t: f64) -> Self {
        let f = chi.f_value();
        let af = chi.field().a_const * f;
        let (coeffs, self_conjugate) = coefficient_tables(chi, t);
        ThetaSeries {
            coeffs,
            self_conjugate,
            af,
            f,
            truncation: t.floor(),
        }
    }

    /// A series from given coefficients (for instance averaged ones).
    pub fn from_coefficients(coeffs: Vec<Complex64>, f: f64, af: f64) -> Self {
        let truncation = (coeffs.len().saturating_sub(1)) as f64;
        ThetaSeries {
            self_conjugate: vec![Complex64::new(0.0, 0.0); coeffs.len()],
            coeffs,
            af,
            f,
            truncation,
        }
    }

    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.af, self.truncation)
    }

    fn kernel_sum(coeffs: &[Complex64], af: f64, v: u8) -> Complex64 {
        sharded_sum(coeffs.len(), |n| {
            if coeffs[n] == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let u = n as f64 / af;
            coeffs[n] * (2.0 * kernel_i(v, u).unwrap() / n as f64)
        })
    }

    /// `2 sum a_n n^-1 I_v(n / (A f))` with no sign check.
    pub fn smoothed(&self, v: u8) -> SmoothedValue {
        let z = Self::kernel_sum(&self.coeffs, self.af, v);
        SmoothedValue {
            value: z.re,
            imag: z.im,
            truncation: self.truncation,
            tail_bound: self.tail_bound(),
            v,
            f: self.f,
            af: self.af,
        }
    }

    /// `theta(t) = sum a_n e^(-n t / (A f))`, and the sum of absolute values.
    pub fn theta(&self, t: f64, conjugate: bool) -> (Complex64, f64) {
        let af = self.af;
        let coeffs = &self.coeffs;
        let z = sharded_sum(coeffs.len(), |n| {
            let c = if conjugate { coeffs[n].conj() } else { coeffs[n] };
            c * (-(n as f64) * t / af).exp()
        });
        let scale = sharded_sum(coeffs.len(), |n| {
            Complex64::new(coeffs[n].norm() * (-(n as f64) * t / af).exp(), 0.0)
        });
        (z, scale.re)
    }

    /// `Lambda_raw(s) = sum a_n (A f / n)^s Gamma(s, n / (A f))`.
    pub fn lambda_raw(&self, s: f64) -> Result<Complex64, LSeriesError> {
        if !(0.2..=1.8).contains(&s) {
            return Err(LSeriesError::DomainError(format!("s = {s} outside [0.2, 1.8]")));
        }
        let af = self.af;
        let coeffs = &self.coeffs;
        Ok(sharded_sum(coeffs.len(), |n| {
            if coeffs[n] == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let u = n as f64 / af;
            coeffs[n] * ((af / n as f64).powf(s) * upper_gamma(s, u))
        }))
    }

    /// `Lambda(s) = Lambda_raw(s) + W Lambda_raw(2 - s)`.
    pub fn lambda(&self, s: f64, w: f64) -> Result<f64, LSeriesError> {
        Ok((self.lambda_raw(s)? + self.lambda_raw(2.0 - s)? * w).re)
    }

    /// `Lambda(s)` with the Mellin integral split at `t = x` instead of 1:
    /// `sum a_n (A f / n)^s Gamma(s, n x / (A f)) + W sum conj(a_n) (A f / n)^(2-s) Gamma(2-s, n / (x A f))`.
    /// Independent of `x` exactly when the functional equation holds with sign `W`.
    pub fn lambda_split(&self, s: f64, w: f64, x: f64) -> Result<f64, LSeriesError> {
        if !(0.2..=1.8).contains(&s) {
            return Err(LSeriesError::DomainError(format!("s = {s} outside [0.2, 1.8]")));
        }
        if !(x > 0.0) {
            return Err(LSeriesError::NonPositiveArgument(x));
        }
        let af = self.af;
        let coeffs = &self.coeffs;
        Ok(sharded_sum(coeffs.len(), |n| {
            let a = coeffs[n];
            if a == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let r = af / n as f64;
            let u = n as f64 / af;
            a * (r.powf(s) * upper_gamma(s, u * x)) + a.conj() * (w * r.powf(2.0 - s) * upper_gamma(2.0 - s, u / x))
        })
        .re)
    }

    /// Contribution of the self-conjugate ideals.
    pub fn principal_part(&self, v: u8) -> f64 {
        Self::kernel_sum(&self.self_conjugate, self.af, v).re
    }
}

/// `L^(v)(1, chi)` for a known root number `w`; `v` must equal `(1 - w) / 2`.
pub fn central_value_with_sign(
    chi: &HeckeCharacter,
    v: u8,
    tol: f64,
    w: i32,
) -> Result<SmoothedValue, LSeriesError> {
    check_sign(v, w)?;
    Ok(ThetaSeries::new(chi, tol).smoothed(v))
}

fn check_sign(v: u8, w: i32) -> Result<(), LSeriesError> {
    match (v, w) {
        (0, 1) | (1, -1) => Ok(()),
        (0 | 1, _) => Err(LSeriesError::SignMismatch { v, w }),
        _ => Err(LSeriesError::DomainError(format!("derivative order {v}"))),
    }
}

/// `L^(v)(1, chi)`, with the root number computed by the Gauss sum.
pub fn central_value(chi: &HeckeCharacter, v: u8, tol: f64) -> Result<SmoothedValue, LSeriesError> {
    let w = crate::rootnumber::root_number_sign(chi)
        .map_err(|e| LSeriesError::DomainError(e.to_string()))?;
    central_value_with_sign(chi, v, tol, w)
}

/// `Lambda(s, chi)` with the Gauss-sum root number.
pub fn lambda_value(chi: &HeckeCharacter, s: f64, tol: f64) -> Result<f64, LSeriesError> {
    let w = crate::rootnumber::root_number_sign(chi)
        .map_err(|e| LSeriesError::DomainError(e.to_string()))?;
    ThetaSeries::new(chi, tol).lambda(s, w as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitSums {
    /// self-conjugate ideals, i.e. the `(n)` coprime to the conductor
    pub principal_part: f64,
    pub nonselfconj_part: f64,
    pub total: SmoothedValue,
}

pub fn split_sums(chi: &HeckeCharacter, v: u8, tol: f64, w: i32) -> Result<SplitSums, LSeriesError> {
    check_sign(v, w)?;
    let series = ThetaSeries::new(chi, tol);
    let total = series.smoothed(v);
    let principal_part = series.principal_part(v);
    Ok(SplitSums {
        principal_part,
        nonselfconj_part: total.value - principal_part,
        total,
    })
}

/// `2 sum_{n >= 1, (n, m) = 1} kappa(n) n^-1 I_v(n^2 / (A f))` for a free
/// parameter `A f`.
pub fn principal_series(field: &FieldContext, af: f64, v: u8, coprime_to: i64) -> f64 {
    let nmax = (af * 50.0).sqrt().ceil() as usize + 2;
    let z = sharded_sum(nmax + 1, |n| {
        let k = field.kronecker(n as i64);
        if k == 0 || gcd(n as i64, coprime_to) != 1 {
            return Complex64::new(0.0, 0.0);
        }
        let u = (n as f64) * (n as f64) / af;
        Complex64::new(2.0 * k as f64 * kernel_i(v, u).unwrap() / n as f64, 0.0)
    });
    z.re
}

/// `sum_{n >= 1} kappa(n) n^-1 e^(-n^2 / X)`.
pub fn smoothed_kappa_sum(field: &FieldContext, x: f64) -> f64 {
    principal_series(field, x, 0, 1) / 2.0
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletL1 {
    /// `2 pi h / (w_K sqrt|D|)`
    pub class_number_formula: f64,
    /// smoothed series, Richardson-extrapolated in `X`
    pub smoothed: f64,
    pub difference: f64,
}

/// `L(1, kappa)` by the class number formula and by a smoothed series.
pub fn dirichlet_l1(field: &FieldContext) -> DirichletL1 {
    let cnf = 2.0 * std::f64::consts::PI * field.h as f64
        / (field.w_k as f64 * (-field.d as f64).sqrt());
    let x = 1e6 * (-field.d as f64);
    let s1 = smoothed_kappa_sum(field, x);
    let s2 = smoothed_kappa_sum(field, 2.0 * x);
    let smoothed = 2.0 * s2 - s1;
    DirichletL1 {
        class_number_formula: cnf,
        smoothed,
        difference: (cnf - smoothed).abs(),
    }
}
