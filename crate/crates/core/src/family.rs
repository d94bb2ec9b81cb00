//! Anticyclotomic twist families `chi = phi rho`, their twist-orbit averages,
//! the counting function `N(chi, t)` and scan records.
//!
//! The average of `chi` is taken over the orbit `{phi rho^m : m in (Z/n)^x}`
//! where `n` is the order of `rho`; on an ideal coprime to both conductors it
//! equals `phi(a) c_n(k) / phi(n)` with `rho(a) = zeta_n^k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{self, euler_phi, gcd};
use crate::characters::{
    main_lemma_quantities, ring_class_character, CharValue, CharacterError, HeckeCharacter,
    MainLemmaReport, RingClassCharacter,
};
use crate::cyclotomic::ramanujan_trace;
use crate::lseries::{dirichlet_l1, truncation, LSeriesError, ThetaSeries};
use crate::quadfield::{class_group, FieldContext, Ideal, QuadInt};
use crate::rootnumber::{root_number_sign, RootNumberError};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    LSeries(#[from] LSeriesError),
    #[error(transparent)]
    RootNumber(#[from] RootNumberError),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

/// A Galois orbit `{rho^m}` of ring class characters of exact conductor `c`.
#[derive(Debug, Clone)]
pub struct TwistOrbit {
    pub conductor: i64,
    /// exponents of the representative (lexicographically least in the orbit)
    pub exponents: Vec<i64>,
    pub order: i64,
    /// `None` for the trivial twist
    pub rho: Option<RingClassCharacter>,
    /// `phi rho`
    pub chi: HeckeCharacter,
}

impl TwistOrbit {
    /// The exponents `m` in `(Z/n)^x`.
    pub fn members(&self) -> Vec<i64> {
        (1..=self.order).filter(|m| gcd(*m, self.order) == 1).collect()
    }

    pub fn size(&self) -> usize {
        euler_phi(self.order) as usize
    }

    /// `phi rho^m` for every member.
    pub fn member_characters(&self, phi: &HeckeCharacter) -> Result<Vec<HeckeCharacter>, CharacterError> {
        match &self.rho {
            None => Ok(vec![phi.clone()]),
            Some(r) => self.members().iter().map(|m| phi.twist(&r.power(*m))).collect(),
        }
    }
}

/// Integers `c <= c_max` divisible only by primes of `primes`, ascending.
pub fn supported_conductors(primes: &[i64], c_max: i64) -> Vec<i64> {
    let mut out = vec![1i64];
    for &p in primes {
        let mut next = Vec::new();
        for &c in &out {
            let mut x = c;
            while x <= c_max {
                next.push(x);
                x = match x.checked_mul(p) {
                    Some(y) => y,
                    None => break,
                };
            }
        }
        out = next;
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Classes (as discrete logs in `Pic(O_c)`) of the kernel of `Pic(O_c) -> Pic(O_{c/p})`,
/// i.e. of the ideals `(x + (c/p) y omega)` coprime to `c`.
fn kernel_classes(field: &FieldContext, c: i64, p: i64, group: &crate::quadfield::ClassGroup) -> Vec<Vec<i64>> {
    let d = field.d;
    let small = c / p;
    let cp = arith::prime_divisors(c);
    let mut seen = BTreeSet::new();
    for x in 0..c {
        for y in 0..p {
            let w = QuadInt::new(x, small * y);
            let n = w.norm(d);
            if n == 0 || cp.iter().any(|q| n % q == 0) {
                continue;
            }
            let form = field
                .ring_class_form(&Ideal::principal(&w, d), c)
                .expect("coprime to c");
            seen.insert(group.dlog(&form));
        }
    }
    seen.into_iter().collect()
}

fn exponent_vectors(invariants: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &m in invariants {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out
}

/// All orbits of ring class characters whose exact conductor `c > 1` is
/// supported on `primes` with `c <= c_max`, preceded by the trivial twist.
/// Sorted by `(c, exponents)`.
pub fn enumerate_twists(
    field: &FieldContext,
    phi: &HeckeCharacter,
    primes: &[i64],
    c_max: i64,
) -> Result<Vec<TwistOrbit>, CharacterError> {
    let mut out = vec![TwistOrbit {
        conductor: 1,
        exponents: Vec::new(),
        order: 1,
        rho: None,
        chi: phi.clone(),
    }];
    for c in supported_conductors(primes, c_max) {
        if c == 1 {
            continue;
        }
        let group = class_group(c * c * field.d).map_err(CharacterError::Field)?;
        let inv = group.invariants().to_vec();
        let kernels: Vec<Vec<Vec<i64>>> = arith::prime_divisors(c)
            .into_iter()
            .map(|p| kernel_classes(field, c, p, &group))
            .collect();
        let mut seen = BTreeSet::new();
        for e in exponent_vectors(&inv) {
            if seen.contains(&e) {
                continue;
            }
            let rho = ring_class_character(field, c, &e, Some(primes))?;
            let orbit: Vec<Vec<i64>> = (1..=rho.order())
                .filter(|m| gcd(*m, rho.order()) == 1)
                .map(|m| rho.power(m).exponents.clone())
                .collect();
            seen.extend(orbit.iter().cloned());
            let exact = kernels
                .iter()
                .all(|ker| ker.iter().any(|cls| rho.eval_class(cls) != 0));
            if !exact {
                continue;
            }
            let rep = orbit.iter().min().expect("orbit contains rho").clone();
            let rho = ring_class_character(field, c, &rep, Some(primes))?;
            let chi = phi.twist(&rho)?;
            out.push(TwistOrbit {
                conductor: c,
                exponents: rep,
                order: rho.order(),
                rho: Some(rho),
                chi,
            });
        }
    }
    out.sort_by(|a, b| (a.conductor, &a.exponents).cmp(&(b.conductor, &b.exponents)));
    Ok(out)
}

/// `chi_av(a)` on one ideal.
#[derive(Debug, Clone)]
pub enum AverageValue {
    Zero,
    /// `factor * phi(a)` with `factor = c_n(k) / phi(n)`
    Exact { factor: Ratio<i64>, value: Complex64 },
    /// mean over members, for ideals sharing a prime with `c f(phi)` but not with `f(chi)`
    Numeric(Complex64),
}

impl AverageValue {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            AverageValue::Zero => Complex64::new(0.0, 0.0),
            AverageValue::Exact { value, .. } => *value,
            AverageValue::Numeric(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            AverageValue::Zero => true,
            AverageValue::Exact { factor, .. } => *factor.numer() == 0,
            AverageValue::Numeric(z) => z.norm() < 1e-9,
        }
    }
}

/// Twist-orbit averages of one orbit.
pub struct OrbitAverager<'a> {
    phi: &'a HeckeCharacter,
    orbit: &'a TwistOrbit,
    /// `c_n(k)` for `k` in `0..n`
    ramanujan: Vec<i64>,
    members: Vec<HeckeCharacter>,
}

impl<'a> OrbitAverager<'a> {
    pub fn new(phi: &'a HeckeCharacter, orbit: &'a TwistOrbit) -> Result<Self, CharacterError> {
        let n = orbit.order;
        let ramanujan = (0..n).map(|k| ramanujan_trace(n as usize, k)).collect();
        // members are only needed when conductors can drop
        let chi_primes = orbit.chi.conductor_primes();
        let c_ideal = Ideal::from_int(orbit.conductor);
        let phi_f = phi.conductor();
        let field = phi.field();
        let covers = field
            .prime_divisors(&c_ideal.mul(&phi_f, field.d))
            .iter()
            .all(|p| chi_primes.contains(p));
        let members = if covers {
            Vec::new()
        } else {
            orbit.member_characters(phi)?
        };
        Ok(OrbitAverager {
            phi,
            orbit,
            ramanujan,
            members,
        })
    }

    /// `phi(a) c_n(k) / phi(n)`, or the direct mean where that form does not apply.
    pub fn value(&self, a: &Ideal) -> AverageValue {
        let chi = &self.orbit.chi;
        if !chi.is_coprime_to_conductor(a) {
            return AverageValue::Zero;
        }
        let n = self.orbit.order;
        let rho_k = match &self.orbit.rho {
            None => Some(0),
            Some(r) => r
                .eval(self.phi.field(), a)
                .map(|k| k * n / r.level()),
        };
        match (self.phi.evaluate(a), rho_k) {
            (CharValue::Value(v), Some(k)) => {
                let factor = Ratio::new(self.ramanujan[k.rem_euclid(n) as usize], euler_phi(n));
                let value = v.complex * (*factor.numer() as f64 / *factor.denom() as f64);
                AverageValue::Exact { factor, value }
            }
            _ => {
                let mean = self
                    .members
                    .iter()
                    .map(|m| m.eval_complex(a))
                    .sum::<Complex64>()
                    / self.members.len().max(1) as f64;
                AverageValue::Numeric(mean)
            }
        }
    }

    /// `a_n^av` for `n <= x`.
    pub fn coefficients(&self, x: f64) -> Vec<Complex64> {
        let bound = x.max(1.0).floor() as usize;
        let ideals = self.phi.field().enumerate_ideals(bound as f64);
        let values: Vec<Complex64> = ideals.par_iter().map(|a| self.value(a).to_complex()).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); bound + 1];
        for (a, v) in ideals.iter().zip(values) {
            out[a.norm() as usize] += v;
        }
        out
    }

    /// `N(chi, t)`: ideals with `chi_av(a) != 0`, `a != conj a`, `N a <= t`,
    /// and, when given, in the class of `class_of`.
    pub fn count_n(&self, t: f64, class_of: Option<&Ideal>) -> usize {
        if t < 1.0 {
            return 0;
        }
        let field = self.phi.field();
        let d = field.d;
        let target = class_of.map(|a| field.ideal_class_of(a));
        field
            .enumerate_ideals(t)
            .par_iter()
            .filter(|a| {
                !a.is_self_conjugate(d)
                    && target.as_ref().is_none_or(|c| field.ideal_class_of(a) == *c)
                    && !self.value(a).is_zero()
            })
            .count()
    }
}

/// `phi(a) c_n(k) / phi(n)` for one ideal.
pub fn twist_average_value(
    phi: &HeckeCharacter,
    orbit: &TwistOrbit,
    a: &Ideal,
) -> Result<AverageValue, CharacterError> {
    Ok(OrbitAverager::new(phi, orbit)?.value(a))
}

/// Mean of `L^(v)(1, phi rho^m)` over the orbit, from averaged coefficients.
pub fn averaged_l(
    phi: &HeckeCharacter,
    orbit: &TwistOrbit,
    v: u8,
    tol: f64,
) -> Result<f64, CharacterError> {
    let chi = &orbit.chi;
    let af = chi.field().a_const * chi.f_value();
    let coeffs = OrbitAverager::new(phi, orbit)?.coefficients(truncation(af, tol));
    Ok(ThetaSeries::from_coefficients(coeffs, chi.f_value(), af)
        .smoothed(v)
        .value)
}

/// Minimal-norm ideal coprime to `f` in each ideal class, in class order.
pub fn class_anchors(field: &FieldContext, f: &Ideal) -> Vec<Ideal> {
    let h = field.h as usize;
    let primes = field.prime_divisors(f);
    let mut found: BTreeMap<Vec<i64>, Ideal> = BTreeMap::new();
    let mut bound = 16.0;
    while found.len() < h {
        for a in field.enumerate_ideals(bound) {
            if primes.iter().any(|p| p.contains_ideal(&a)) {
                continue;
            }
            found.entry(field.ideal_class_of(&a)).or_insert(a);
        }
        bound *= 4.0;
    }
    found.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonzero,
    Zero,
    Indeterminate,
}

/// `nonzero` if `|L| > 10^3 tail`, `zero` if `|L| < tail`.
pub fn verdict(value: f64, tail_bound: f64) -> Verdict {
    if value.abs() > 1e3 * tail_bound {
        Verdict::Nonzero
    } else if value.abs() < tail_bound {
        Verdict::Zero
    } else {
        Verdict::Indeterminate
    }
}

fn decimal<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:?}"))
}

fn decimal_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    let m: BTreeMap<&String, String> = m.iter().map(|(k, v)| (k, format!("{v:?}"))).collect();
    m.serialize(s)
}

/// One orbit of a family scan.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyRecord {
    pub d: i64,
    pub conductor: i64,
    pub exponents: Vec<i64>,
    pub order: i64,
    pub orbit_size: usize,
    pub conductor_ideal: Ideal,
    /// rational primes dividing `N f(chi)`
    pub ramified: Vec<i64>,
    #[serde(serialize_with = "decimal")]
    pub f: f64,
    #[serde(serialize_with = "decimal")]
    pub af: f64,
    pub w: i32,
    pub v: u8,
    #[serde(serialize_with = "decimal")]
    pub lv: f64,
    #[serde(serialize_with = "decimal")]
    pub tail_bound: f64,
    #[serde(serialize_with = "decimal")]
    pub lv_av: f64,
    /// `L(1, kappa) prod_{p | N f} (1 - kappa(p)/p)`, the normalizer of `ratio`
    #[serde(serialize_with = "decimal")]
    pub l1_kappa: f64,
    #[serde(serialize_with = "decimal")]
    pub ratio: f64,
    /// `N(chi, t)` at `t = f^0.9` and `t = f^1.1`
    pub n_counts: BTreeMap<String, usize>,
    /// `f^0.45`, the comparison value for `N(chi, f^1.1)`
    #[serde(serialize_with = "decimal_map")]
    pub thresholds: BTreeMap<String, f64>,
    pub main_lemma: MainLemmaReport,
    pub verdict: Verdict,
    pub error: Option<String>,
}

/// Exponents `t = f^a` used for the counting columns.
pub const COUNT_EXPONENTS: [f64; 2] = [0.9, 1.1];

/// `L(1, kappa)` with the Euler factors at `primes` removed.
pub fn imprimitive_l1(field: &FieldContext, l1: f64, primes: &[i64]) -> f64 {
    primes
        .iter()
        .map(|&p| 1.0 - field.kronecker(p) as f64 / p as f64)
        .product::<f64>()
        * l1
}

fn record_for(
    field: &FieldContext,
    phi: &HeckeCharacter,
    orbit: &TwistOrbit,
    primes: &[i64],
    tol: f64,
    mu: u32,
    l1_kappa: f64,
) -> Result<FamilyRecord, FamilyError> {
    let chi = &orbit.chi;
    let w = root_number_sign(chi)?;
    let v = if w == 1 { 0 } else { 1 };
    let series = ThetaSeries::new(chi, tol);
    let lv = series.smoothed(v);
    let lv_av = if orbit.order == 1 {
        lv.value
    } else {
        averaged_l(phi, orbit, v, tol)?
    };
    let ramified = arith::prime_divisors(chi.conductor().norm());
    let l1_imprimitive = imprimitive_l1(field, l1_kappa, &ramified);
    let target = if v == 0 {
        2.0 * l1_imprimitive
    } else {
        2.0 * l1_imprimitive * lv.af.ln()
    };
    let averager = OrbitAverager::new(phi, orbit)?;
    let f = lv.f;
    let mut n_counts = BTreeMap::new();
    for a in COUNT_EXPONENTS {
        n_counts.insert(format!("f^{a}"), averager.count_n(f.powf(a), None));
    }
    let mut thresholds = BTreeMap::new();
    thresholds.insert("f^0.45".to_string(), f.powf(0.45));
    Ok(FamilyRecord {
        d: field.d,
        conductor: orbit.conductor,
        exponents: orbit.exponents.clone(),
        order: orbit.order,
        orbit_size: orbit.size(),
        conductor_ideal: chi.conductor(),
        ramified,
        f,
        af: lv.af,
        w,
        v,
        lv: lv.value,
        tail_bound: lv.tail_bound,
        lv_av,
        l1_kappa: l1_imprimitive,
        ratio: lv_av / target,
        n_counts,
        thresholds,
        main_lemma: main_lemma_quantities(chi, mu, primes),
        verdict: verdict(lv.value, lv.tail_bound),
        error: None,
    })
}

/// One record per orbit, computed in parallel and returned in orbit order.
/// A failing orbit yields a record with `error` set and verdict `indeterminate`.
pub fn scan_report(
    field: &FieldContext,
    phi: &HeckeCharacter,
    primes: &[i64],
    c_max: i64,
    tol: f64,
    mu: u32,
) -> Result<Vec<FamilyRecord>, FamilyError> {
    let orbits = enumerate_twists(field, phi, primes, c_max)?;
    let l1 = dirichlet_l1(field).class_number_formula;
    Ok(orbits
        .par_iter()
        .map(|o| {
            record_for(field, phi, o, primes, tol, mu, l1)
                .unwrap_or_else(|e| failed_record(field, o, primes, mu, e))
        })
        .collect())
}

fn failed_record(
    field: &FieldContext,
    orbit: &TwistOrbit,
    primes: &[i64],
    mu: u32,
    err: FamilyError,
) -> FamilyRecord {
    let chi = &orbit.chi;
    FamilyRecord {
        d: field.d,
        conductor: orbit.conductor,
        exponents: orbit.exponents.clone(),
        order: orbit.order,
        orbit_size: orbit.size(),
        conductor_ideal: chi.conductor(),
        ramified: arith::prime_divisors(chi.conductor().norm()),
        f: chi.f_value(),
        af: chi.field().a_const * chi.f_value(),
        w: 0,
        v: 0,
        lv: f64::NAN,
        tail_bound: f64::NAN,
        lv_av: f64::NAN,
        l1_kappa: f64::NAN,
        ratio: f64::NAN,
        n_counts: BTreeMap::new(),
        thresholds: BTreeMap::new(),
        main_lemma: main_lemma_quantities(chi, mu, primes),
        verdict: Verdict::Indeterminate,
        error: Some(err.to_string()),
    }
}

/// Keeps the records whose ramified primes are exactly `r`.
pub fn filter_ramification(records: &[FamilyRecord], r: &[i64]) -> Vec<FamilyRecord> {
    let mut r = r.to_vec();
    r.sort_unstable();
    records.iter().filter(|x| x.ramified == r).cloned().collect()
}

pub const CSV_HEADER: &str = "D,c,n,f,W,v,Lv,Lv_av,ratio,verdict";

pub fn summary_csv(records: &[FamilyRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let verdict = serde_json::to_value(r.verdict).expect("verdict serializes");
        out.push_str(&format!(
            "{},{},{},{:?},{},{},{:?},{:?},{:?},{}\n",
            r.d,
            r.conductor,
            r.order,
            r.f,
            r.w,
            r.v,
            r.lv,
            r.lv_av,
            r.ratio,
            verdict.as_str().unwrap_or_default()
        ));
    }
    out
}

/// Writes `family_records.json`, `family_summary.csv` and appends to `run.log`.
pub fn persist(dir: &Path, records: &[FamilyRecord], label: &str) -> Result<(), FamilyError> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(records)?;
    fs::write(dir.join("family_records.json"), json + "\n")?;
    fs::write(dir.join("family_summary.csv"), summary_csv(records))?;
    let mut log = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("run.log"))?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    writeln!(log, "{label}: {} records, {failed} failed", records.len())?;
    Ok(())
}
