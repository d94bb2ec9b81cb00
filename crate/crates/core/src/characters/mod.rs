//! Hecke characters of infinite type (1,0), their finite parts, ring class
//! twists, the equivariance criterion and conductor exponents.
//!
//! A character is determined by its finite part `eps` and by one value `v_i`
//! per class group generator `g_i` (order `h_i`), with
//! `v_i^{h_i} = eps(w_i) w_i` where `g_i^{h_i} = (w_i)`. Every value then has
//! the exact shape `zeta_L^k * beta * prod u_i^{e_i}`, where `beta` lies in
//! `K`, `u_i` is the principal `h_i`-th root of `w_i` and `0 <= e_i < h_i`.

mod finite;
mod mainlemma;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use finite::{
    canonical_epsilon, ring_class_character, unit_group_mod, ExplicitEps, FiniteComponent,
    FinitePart, RingClassCharacter, UnitGroup,
};
pub use mainlemma::{main_lemma_quantities, MainLemmaReport, PrimeExponents};

use crate::arith::lcm;
use crate::quadfield::{FieldContext, Ideal, KElem, QuadFieldError, QuadInt};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacterError {
    #[error("UnitInconsistent: eps(u) u != 1 for the unit {0:?}")]
    UnitInconsistent(QuadInt),
    #[error("NoConsistentLift: no class value matches generator {0}")]
    NoConsistentLift(usize),
    #[error("UnsupportedDiscriminant: no canonical finite part for D = {0}")]
    UnsupportedDiscriminant(i64),
    #[error("ConductorNotSupported: ring class conductor {0} has a prime outside the allowed set")]
    ConductorNotSupported(i64),
    #[error("InvalidFinitePart: {0}")]
    InvalidFinitePart(String),
    #[error("DescriptorMismatch: {0}")]
    DescriptorMismatch(String),
    #[error(transparent)]
    Field(#[from] QuadFieldError),
}

/// Tolerance for numerical identities between character values.
pub const VALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct ClassGen {
    ideal: Ideal,
    order: i64,
    /// generator of `ideal^order`
    w: QuadInt,
    eps_w: i64,
    /// principal `order`-th root of `w`
    root: Complex64,
    /// `v = zeta_L^shift * root`
    shift: i64,
    lift: i64,
    /// `ideal^k` for `0 <= k < order`
    powers: Vec<Ideal>,
}

/// Exact character value `zeta_level^zeta * beta * prod u_i^{radicals[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactValue {
    pub zeta: i64,
    pub level: i64,
    pub beta: KElem,
    pub radicals: Vec<i64>,
    pub complex: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CharValue {
    Zero,
    Value(ExactValue),
}

impl CharValue {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            CharValue::Zero => Complex64::new(0.0, 0.0),
            CharValue::Value(v) => v.complex,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CharValue::Zero)
    }
}

fn zeta(k: i64, m: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k.rem_euclid(m) as f64) / m as f64)
}

/// How the class values are chosen among the `h_i`-th roots.
enum LiftRule<'a> {
    SmallestArgument,
    Indices(&'a [i64]),
    Match(&'a dyn Fn(&Ideal) -> Complex64),
}

/// A Hecke character of infinite type (1,0).
#[derive(Debug, Clone)]
pub struct HeckeCharacter {
    field: Arc<FieldContext>,
    finite: FinitePart,
    conductor: Ideal,
    conductor_primes: Vec<Ideal>,
    gens: Vec<ClassGen>,
    level: i64,
}

/// Builds the character with finite part `eps`, choosing on each class
/// group generator the root of smallest non-negative argument.
pub fn build_hecke_character(
    field: Arc<FieldContext>,
    eps: FinitePart,
) -> Result<HeckeCharacter, CharacterError> {
    HeckeCharacter::build(field, eps, LiftRule::SmallestArgument)
}

/// Same as [`build_hecke_character`] with explicit lift indices `j_i`,
/// `v_i = zeta_{M h_i}^{j_i M} * v_i^(0)`.
pub fn build_with_lifts(
    field: Arc<FieldContext>,
    eps: FinitePart,
    lifts: &[i64],
) -> Result<HeckeCharacter, CharacterError> {
    HeckeCharacter::build(field, eps, LiftRule::Indices(lifts))
}

impl HeckeCharacter {
    fn build(
        field: Arc<FieldContext>,
        eps: FinitePart,
        rule: LiftRule<'_>,
    ) -> Result<Self, CharacterError> {
        let d = field.d;
        let m = eps.order();
        for u in field.units() {
            let k = eps
                .eval(&field, u)
                .ok_or(CharacterError::UnitInconsistent(*u))?;
            if (zeta(k, m) * u.to_complex(d) - 1.0).norm() > 1e-9 {
                return Err(CharacterError::UnitInconsistent(*u));
            }
        }
        let conductor = primitive_conductor(&field, &eps);
        let conductor_primes = field.prime_divisors(&conductor);
        let cg = field.class_group();
        let orders = cg.invariants().to_vec();
        let level = m * orders.iter().copied().fold(1, lcm);

        let modulus = eps.modulus();
        let mut gens = Vec::with_capacity(orders.len());
        for (i, &h) in orders.iter().enumerate() {
            let mut target = vec![0i64; orders.len()];
            target[i] = 1;
            let ideal = minimal_ideal_in_class(&field, &target, &modulus);
            let powers: Vec<Ideal> = (0..h).map(|k| ideal.pow(k as u32, d)).collect();
            let top = ideal.pow(h as u32, d);
            let w = field
                .principal_generator(&top)
                .expect("g^h is principal");
            let eps_w = eps.eval(&field, &w).expect("generator coprime to modulus");
            let wc = w.to_complex(d);
            let root = Complex64::from_polar(wc.norm().powf(1.0 / h as f64), wc.arg() / h as f64);
            let shift_of = |j: i64| ((eps_w + m * j) * (level / (m * h))).rem_euclid(level);
            let value_of = |j: i64| zeta(shift_of(j), level) * root;
            let lift = match &rule {
                LiftRule::SmallestArgument => (0..h)
                    .min_by(|&a, &b| {
                        let arg = |j| {
                            let t = value_of(j).arg();
                            if t < -1e-12 {
                                t + 2.0 * std::f64::consts::PI
                            } else {
                                t.max(0.0)
                            }
                        };
                        arg(a).partial_cmp(&arg(b)).unwrap()
                    })
                    .unwrap(),
                LiftRule::Indices(js) => js.get(i).copied().unwrap_or(0).rem_euclid(h),
                LiftRule::Match(f) => {
                    let t = f(&ideal);
                    (0..h)
                        .find(|&j| (value_of(j) - t).norm() <= 1e-8 * t.norm().max(1.0))
                        .ok_or(CharacterError::NoConsistentLift(i))?
                }
            };
            gens.push(ClassGen {
                ideal,
                order: h,
                w,
                eps_w,
                root,
                shift: shift_of(lift),
                lift,
                powers,
            });
        }
        Ok(HeckeCharacter {
            field,
            finite: eps,
            conductor,
            conductor_primes,
            gens,
            level,
        })
    }

    pub fn field(&self) -> &FieldContext {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FieldContext> {
        self.field.clone()
    }

    pub fn finite_part(&self) -> &FinitePart {
        &self.finite
    }

    /// The primitive conductor `f(chi)`.
    pub fn conductor(&self) -> Ideal {
        self.conductor
    }

    pub fn conductor_primes(&self) -> &[Ideal] {
        &self.conductor_primes
    }

    /// `f = N(f(chi))^(1/2)`.
    pub fn f_value(&self) -> f64 {
        (self.conductor.norm() as f64).sqrt()
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn lifts(&self) -> Vec<i64> {
        self.gens.iter().map(|g| g.lift).collect()
    }

    /// Representative ideals `g_i` of the class group generators.
    pub fn class_representatives(&self) -> Vec<Ideal> {
        self.gens.iter().map(|g| g.ideal).collect()
    }

    /// The ring class twist carried by the finite part, if any.
    pub fn ring_class_part(&self) -> Option<&RingClassCharacter> {
        self.finite.components.iter().find_map(|c| match c {
            FiniteComponent::RingClass(r) => Some(r),
            _ => None,
        })
    }

    pub fn is_coprime_to_conductor(&self, a: &Ideal) -> bool {
        self.conductor_primes.iter().all(|p| !p.contains_ideal(a))
    }

    pub fn is_unit_mod_conductor(&self, w: &QuadInt) -> bool {
        self.conductor_primes.iter().all(|p| !p.contains(w))
    }

    /// `eps(w)` on `(O/f(chi))^x` as an exponent of `zeta_M`; `None` when `w`
    /// is not coprime to the conductor.
    pub fn eps_exponent(&self, w: &QuadInt) -> Option<i64> {
        if !self.is_unit_mod_conductor(w) {
            return None;
        }
        let lifted = lift_to_unit(&self.finite, &self.conductor, w);
        self.finite.eval(&self.field, &lifted)
    }

    pub fn eps_complex(&self, w: &QuadInt) -> Complex64 {
        match self.eps_exponent(w) {
            Some(k) => zeta(k, self.finite.order()),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn evaluate(&self, a: &Ideal) -> CharValue {
        if !self.is_coprime_to_conductor(a) {
            return CharValue::Zero;
        }
        let d = self.field.d;
        let e = self.field.ideal_class_of(a);
        let mut j = *a;
        let mut beta_den = KElem::one();
        let mut k_eps_w = 0i64;
        for (gen, &ei) in self.gens.iter().zip(&e) {
            if ei > 0 {
                j = j.mul(&gen.powers[(gen.order - ei) as usize], d);
                beta_den = beta_den.mul(&KElem::from_int(&gen.w), d);
                k_eps_w += gen.eps_w;
            }
        }
        let gamma = self
            .field
            .principal_generator(&j)
            .expect("ideal times complementary class powers is principal");
        let m = self.finite.order();
        let eg = self.eps_exponent(&gamma).expect("gamma coprime to conductor");
        let mut k = (self.level / m) * (eg - k_eps_w);
        for (gen, &ei) in self.gens.iter().zip(&e) {
            k += ei * gen.shift;
        }
        let k = k.rem_euclid(self.level);
        let beta = KElem::from_int(&gamma).mul(&beta_den.inv(d), d);
        let mut z = zeta(k, self.level) * beta.to_complex(d);
        for (gen, &ei) in self.gens.iter().zip(&e) {
            z *= gen.root.powi(ei as i32);
        }
        CharValue::Value(ExactValue {
            zeta: k,
            level: self.level,
            beta,
            radicals: e,
            complex: z,
        })
    }

    pub fn eval_complex(&self, a: &Ideal) -> Complex64 {
        self.evaluate(a).to_complex()
    }

    /// Exact product of two values of this character.
    pub fn multiply_values(&self, x: &ExactValue, y: &ExactValue) -> ExactValue {
        let d = self.field.d;
        let mut zeta_k = x.zeta + y.zeta;
        let mut beta = x.beta.mul(&y.beta, d);
        let mut radicals = Vec::with_capacity(self.gens.len());
        for (i, gen) in self.gens.iter().enumerate() {
            let mut e = x.radicals[i] + y.radicals[i];
            if e >= gen.order {
                // u^h = w
                e -= gen.order;
                beta = beta.mul(&KElem::from_int(&gen.w), d);
            }
            radicals.push(e);
        }
        zeta_k = zeta_k.rem_euclid(self.level);
        ExactValue {
            zeta: zeta_k,
            level: self.level,
            beta,
            radicals,
            complex: x.complex * y.complex,
        }
    }

    /// Exact equality of two values: same radical monomial and `beta / beta'`
    /// a root of unity of `K` matching the difference of the `zeta` parts.
    pub fn values_equal(&self, x: &ExactValue, y: &ExactValue) -> bool {
        if x.radicals != y.radicals {
            return false;
        }
        let d = self.field.d;
        let ratio = x.beta.mul(&y.beta.inv(d), d);
        let Some(u) = ratio.as_integer() else {
            return false;
        };
        if u.norm(d) != 1 {
            return false;
        }
        // x = y  <=>  zeta^(kx - ky) * u = 1
        (zeta(x.zeta - y.zeta, self.level) * u.to_complex(d) - 1.0).norm() < 1e-9
    }

    /// `(chi rho)` as a primitive character.
    pub fn twist(&self, rho: &RingClassCharacter) -> Result<HeckeCharacter, CharacterError> {
        if rho.is_trivial() {
            return Ok(self.clone());
        }
        let finite = self
            .finite
            .with_component(&self.field, FiniteComponent::RingClass(rho.clone()));
        let field = self.field.clone();
        let target = |g: &Ideal| {
            let k = rho.eval(&field, g).expect("class representative coprime to c");
            self.eval_complex(g) * zeta(k, rho.level())
        };
        HeckeCharacter::build(self.field.clone(), finite, LiftRule::Match(&target))
    }

    /// All characters with the same finite part, one per choice of class values.
    pub fn galois_lifts(&self) -> Vec<HeckeCharacter> {
        let orders: Vec<i64> = self.gens.iter().map(|g| g.order).collect();
        let total: i64 = orders.iter().product();
        (0..total)
            .map(|mut idx| {
                let lifts: Vec<i64> = orders
                    .iter()
                    .map(|&h| {
                        let j = idx % h;
                        idx /= h;
                        j
                    })
                    .collect();
                HeckeCharacter::build(
                    self.field.clone(),
                    self.finite.clone(),
                    LiftRule::Indices(&lifts),
                )
                .expect("lifts of a valid character are valid")
            })
            .collect()
    }

    pub fn descriptor(&self) -> CharacterDescriptor {
        let components = self
            .finite
            .components
            .iter()
            .map(|c| match c {
                FiniteComponent::Explicit(e) => ComponentDescriptor::Explicit {
                    modulus: e.modulus(),
                    values: e.values.clone(),
                    order: e.order,
                },
                FiniteComponent::RingClass(r) => ComponentDescriptor::RingClass {
                    conductor: r.conductor,
                    exponents: r.exponents.clone(),
                },
            })
            .collect();
        CharacterDescriptor {
            d: self.field.d,
            conductor: self.conductor,
            components,
            lifts: self.lifts(),
        }
    }

    pub fn from_descriptor(
        field: Arc<FieldContext>,
        desc: &CharacterDescriptor,
    ) -> Result<HeckeCharacter, CharacterError> {
        if desc.d != field.d {
            return Err(CharacterError::DescriptorMismatch(format!(
                "descriptor is for D = {}, field has D = {}",
                desc.d, field.d
            )));
        }
        let mut comps = Vec::new();
        for c in &desc.components {
            comps.push(match c {
                ComponentDescriptor::Explicit {
                    modulus,
                    values,
                    order,
                } => {
                    let units = Arc::new(unit_group_mod(&field, modulus));
                    FiniteComponent::Explicit(ExplicitEps::new(units, values.clone(), *order)?)
                }
                ComponentDescriptor::RingClass {
                    conductor,
                    exponents,
                } => FiniteComponent::RingClass(ring_class_character(
                    &field, *conductor, exponents, None,
                )?),
            });
        }
        let finite = FinitePart::new(&field, comps);
        let chi = build_with_lifts(field, finite, &desc.lifts)?;
        if chi.conductor != desc.conductor {
            return Err(CharacterError::DescriptorMismatch(format!(
                "conductor {} recomputed as {}",
                desc.conductor, chi.conductor
            )));
        }
        Ok(chi)
    }
}

/// Serializable description of a character.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterDescriptor {
    pub d: i64,
    pub conductor: Ideal,
    pub components: Vec<ComponentDescriptor>,
    pub lifts: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentDescriptor {
    Explicit {
        modulus: Ideal,
        values: Vec<i64>,
        order: i64,
    },
    RingClass {
        conductor: i64,
        exponents: Vec<i64>,
    },
}

/// Minimal-norm ideal in the given class, coprime to `modulus`; ties are
/// broken by HNF order.
pub fn minimal_ideal_in_class(field: &FieldContext, class: &[i64], modulus: &Ideal) -> Ideal {
    let primes = field.prime_divisors(modulus);
    let mut bound = 16.0;
    loop {
        let found = field.enumerate_ideals(bound).into_iter().find(|a| {
            primes.iter().all(|p| !p.contains_ideal(a)) && field.ideal_class_of(a) == class
        });
        if let Some(a) = found {
            return a;
        }
        bound *= 4.0;
    }
}

/// `w + y` with `y` in `sub` chosen so that the result is a unit modulo the
/// full modulus of `finite`.
fn lift_to_unit(finite: &FinitePart, sub: &Ideal, w: &QuadInt) -> QuadInt {
    if finite.is_unit(w) {
        return *w;
    }
    let [e1, e2] = sub.basis();
    for r in 1i64.. {
        for s in 0..=r {
            for t in [r - s, -(r - s)] {
                for sgn in [1, -1] {
                    let y = e1.scale(sgn * s).add(&e2.scale(t));
                    let cand = w.add(&y);
                    if finite.is_unit(&cand) {
                        return cand;
                    }
                }
            }
        }
    }
    unreachable!()
}

/// Smallest modulus through which the finite part factors, found one prime
/// at a time: `f' / p` is admissible iff `eps` is trivial on
/// `ker((O/f')^x -> (O/(f'/p))^x)`.
fn primitive_conductor(field: &FieldContext, finite: &FinitePart) -> Ideal {
    let d = field.d;
    let mut f = finite.modulus();
    for p in finite.modulus_primes() {
        while p.contains_ideal(&f) {
            let smaller = f.div_exact(p, d).expect("p divides f");
            if kernel_is_trivial(field, finite, &f, &smaller) {
                f = smaller;
            } else {
                break;
            }
        }
    }
    f
}

fn kernel_is_trivial(field: &FieldContext, finite: &FinitePart, f: &Ideal, smaller: &Ideal) -> bool {
    let index = (f.norm() / smaller.norm()) as usize;
    let f_primes = field.prime_divisors(f);
    let [e1, e2] = smaller.basis();
    let mut seen = std::collections::HashSet::new();
    'outer: for s in 0..index as i64 {
        for t in 0..index as i64 {
            let x = f.reduce(&e1.scale(s).add(&e2.scale(t)));
            if !seen.insert(x) {
                continue;
            }
            let w = QuadInt::ONE.add(&x);
            if f_primes.iter().all(|p| !p.contains(&w)) {
                let lifted = lift_to_unit(finite, f, &w);
                if finite.eval(field, &lifted) != Some(0) {
                    return false;
                }
            }
            if seen.len() == index {
                break 'outer;
            }
        }
    }
    true
}

/// Outcome of the equivariance criterion on ideals of bounded norm.
#[derive(Debug, Clone, Serialize)]
pub struct Property1Report {
    pub bound: f64,
    pub ideals_checked: usize,
    /// `chi(conj a) = conj chi(a)` on every checked ideal.
    pub equivariant: bool,
    pub equivariance_witness: Option<Ideal>,
    /// `kappa_1 = kappa` on integers coprime to the conductor norm.
    pub kappa_matches: bool,
    pub kappa_witness: Option<i64>,
    pub kappa1_minus_one: i64,
    /// `kappa_1(p) = 1` for split primes coprime to the conductor.
    pub split_primes_trivial: bool,
    /// Both sides of the criterion agree.
    pub equivalence_holds: bool,
}

/// Checks `chi(conj a) = conj(chi(a))` against `kappa_1 = kappa`.
pub fn property1_check(chi: &HeckeCharacter, bound: f64) -> Property1Report {
    let field = chi.field();
    let d = field.d;
    let ideals = field.enumerate_ideals(bound);
    let mut equivariance_witness = None;
    let mut checked = 0;
    for a in &ideals {
        if !chi.is_coprime_to_conductor(a) {
            continue;
        }
        checked += 1;
        let v = chi.eval_complex(a);
        let vc = chi.eval_complex(&a.conjugate(d));
        if (vc - v.conj()).norm() > VALUE_TOL * (a.norm() as f64).sqrt().max(1.0) {
            equivariance_witness = Some(*a);
            break;
        }
    }
    let nf = chi.conductor().norm();
    let kappa1 = |n: i64| -> i64 {
        let z = chi.eps_complex(&QuadInt::int(n));
        if (z - 1.0).norm() < 1e-9 {
            1
        } else if (z + 1.0).norm() < 1e-9 {
            -1
        } else {
            0
        }
    };
    let mut kappa_witness = None;
    let mut split_ok = true;
    for n in 1..=(bound.floor() as i64) {
        if crate::arith::gcd(n, nf) != 1 {
            continue;
        }
        let k1 = kappa1(n);
        if k1 != field.kronecker(n) as i64 {
            kappa_witness.get_or_insert(n);
        }
        if crate::arith::is_prime(n) && field.kronecker(n) == 1 && k1 != 1 {
            split_ok = false;
        }
    }
    let equivariant = equivariance_witness.is_none();
    let kappa_matches = kappa_witness.is_none();
    Property1Report {
        bound,
        ideals_checked: checked,
        equivariant,
        equivariance_witness,
        kappa_matches,
        kappa_witness,
        kappa1_minus_one: kappa1(-1),
        split_primes_trivial: split_ok,
        equivalence_holds: equivariant == kappa_matches,
    }
}

/// The canonical character of the field, when one is available.
pub fn canonical_character(field: Arc<FieldContext>) -> Result<HeckeCharacter, CharacterError> {
    let eps = canonical_epsilon(&field)?;
    build_hecke_character(field, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    fn field(d: i64) -> Arc<FieldContext> {
        Arc::new(make_field(d).unwrap())
    }

    #[test]
    fn unit_groups() {
        let k = make_field(-4).unwrap();
        let f = Ideal::principal(&QuadInt::new(3, 1), -4).pow(3, -4);
        assert_eq!(unit_group_mod(&k, &f).order(), 4);
        let k = make_field(-23).unwrap();
        let p = k.prime_ideals_above(23)[0].0;
        let g = unit_group_mod(&k, &p);
        assert_eq!(g.invariants(), &[22]);
        assert_eq!(unit_group_mod(&k, &Ideal::UNIT).order(), 1);
    }

    #[test]
    fn canonical_eps_values() {
        let k = field(-23);
        let eps = canonical_epsilon(&k).unwrap();
        assert_eq!(eps.eval(&k, &QuadInt::int(2)), Some(0));
        assert_eq!(eps.eval(&k, &QuadInt::int(-1)), Some(1));
        let k = field(-7);
        let eps = canonical_epsilon(&k).unwrap();
        assert_eq!(eps.eval(&k, &QuadInt::int(3)), Some(1));
        assert!(matches!(
            canonical_epsilon(&field(-47)),
            Ok(_)
        ));
        assert_eq!(
            canonical_epsilon(&field(-8)).unwrap_err(),
            CharacterError::UnsupportedDiscriminant(-8)
        );
    }

    #[test]
    fn gaussian_canonical_character() {
        let chi = canonical_character(field(-4)).unwrap();
        assert_eq!(chi.conductor().norm(), 8);
        // chi((3)) = kappa(3) 3 = -3
        let v = chi.eval_complex(&Ideal::from_int(3));
        assert!((v - Complex64::new(-3.0, 0.0)).norm() < 1e-12);
        let p = Ideal::principal(&QuadInt::new(4, 1), -4);
        assert!((chi.eval_complex(&p).norm_sqr() - 5.0).abs() < 1e-10);
        assert!(chi.evaluate(&chi.conductor()).is_zero());
    }

    #[test]
    fn cube_root_lifts_on_minus_23() {
        let chi = canonical_character(field(-23)).unwrap();
        let lifts = chi.galois_lifts();
        assert_eq!(lifts.len(), 3);
        let ideals = chi.field().enumerate_ideals(60.0);
        for a in &ideals {
            let vals: Vec<Complex64> = lifts.iter().map(|c| c.eval_complex(a)).collect();
            for v in &vals {
                assert!((v.norm() - vals[0].norm()).abs() < 1e-9);
            }
            if chi.is_coprime_to_conductor(a) {
                let r = vals[1] / vals[0];
                assert!((r.powi(3) - 1.0).norm() < 1e-9);
            }
        }
        for c in &lifts {
            assert_eq!(c.conductor(), chi.conductor());
        }
    }

    #[test]
    fn multiplicativity_is_exact() {
        let chi = canonical_character(field(-47)).unwrap();
        let d = -47;
        let ideals = chi.field().enumerate_ideals(40.0);
        for a in &ideals {
            for b in &ideals {
                let (CharValue::Value(x), CharValue::Value(y)) = (chi.evaluate(a), chi.evaluate(b))
                else {
                    continue;
                };
                let CharValue::Value(z) = chi.evaluate(&a.mul(b, d)) else {
                    panic!("product of coprime ideals is coprime");
                };
                let prod = chi.multiply_values(&x, &y);
                assert!(chi.values_equal(&prod, &z), "{a} {b}");
                assert!((prod.complex - z.complex).norm() < 1e-9 * z.complex.norm());
            }
        }
    }

    #[test]
    fn integers_map_to_kappa_n_times_n() {
        for d in [-4i64, -7, -23, -47] {
            let chi = canonical_character(field(d)).unwrap();
            for n in 1..40 {
                let a = Ideal::from_int(n);
                if !chi.is_coprime_to_conductor(&a) {
                    continue;
                }
                let expect = chi.field().kronecker(n) as f64 * n as f64;
                assert!((chi.eval_complex(&a) - expect).norm() < 1e-9, "D={d} n={n}");
            }
        }
    }

    #[test]
    fn ring_class_character_on_gaussian_five() {
        let k = make_field(-4).unwrap();
        let rho = ring_class_character(&k, 5, &[1], Some(&[5])).unwrap();
        assert_eq!(rho.order(), 2);
        // (2+i) divides the conductor; (1+i) lies in the class of (2, 2, 13)
        let p = Ideal::principal(&QuadInt::new(4, 1), -4);
        assert_eq!(rho.eval(&k, &p), None);
        let q = Ideal::principal(&QuadInt::new(3, 1), -4);
        assert_eq!(k.ring_class_form(&q, 5), Some(crate::quadfield::QuadForm::new(2, 2, 13)));
        assert_eq!(rho.eval(&k, &q), Some(1));
        assert!(ring_class_character(&k, 3, &[0], Some(&[5])).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let k = field(-23);
        let chi = canonical_character(k.clone()).unwrap();
        let rho = ring_class_character(&k, 2, &[1], None).unwrap();
        let tw = chi.twist(&rho).unwrap();
        let desc = tw.descriptor();
        let s = serde_json::to_string(&desc).unwrap();
        let back: CharacterDescriptor = serde_json::from_str(&s).unwrap();
        let rebuilt = HeckeCharacter::from_descriptor(k, &back).unwrap();
        assert_eq!(serde_json::to_string(&rebuilt.descriptor()).unwrap(), s);
    }

    #[test]
    fn property1_on_canonical_characters() {
        for d in [-4i64, -7, -23] {
            let chi = canonical_character(field(d)).unwrap();
            let r = property1_check(&chi, 300.0);
            assert!(r.equivariant && r.kappa_matches && r.equivalence_holds, "D={d}");
            assert_eq!(r.kappa1_minus_one, -1);
            assert!(r.split_primes_trivial);
        }
        let chi = canonical_character(field(-4)).unwrap();
        let r = property1_check(&chi, 1.0);
        assert!(r.equivariant && r.equivalence_holds);
    }

    #[test]
    fn non_anticyclotomic_factor_breaks_property1() {
        let k = field(-4);
        let d = -4;
        let eps = canonical_epsilon(&k).unwrap();
        // an order-5 character of (O/(2+i)^2)^x, trivial on the units
        let m = Ideal::principal(&QuadInt::new(4, 1), d).pow(2, d);
        let units = Arc::new(unit_group_mod(&k, &m));
        assert_eq!(units.invariants(), &[20]);
        let psi = ExplicitEps::new(units, vec![1], 5).unwrap();
        let eps = eps.with_component(&k, FiniteComponent::Explicit(psi));
        let chi = build_hecke_character(k, eps).unwrap();
        let r = property1_check(&chi, 200.0);
        assert!(!r.equivariant);
        assert!(r.equivariance_witness.is_some());
        assert!(!r.kappa_matches);
        assert!(r.equivalence_holds);
    }

    #[test]
    fn main_lemma_on_gaussian_twist() {
        let k = field(-4);
        let chi = canonical_character(k.clone()).unwrap();
        let r = main_lemma_quantities(&chi, 2, &[5]);
        assert_eq!((r.primes[0].m_p, r.primes[0].o_p, r.primes[0].n_p, r.q), (0, 0, 0, 1));

        let rho = ring_class_character(&k, 125, &[1], Some(&[5])).unwrap();
        let tw = chi.twist(&rho).unwrap();
        let r = main_lemma_quantities(&tw, 1, &[5]);
        let e = &r.primes[0];
        assert_eq!(e.m_p, crate::arith::valuation(tw.conductor().norm(), 5));
        assert!(e.m_p > 0);
        assert_eq!(e.n_p, e.o_p.saturating_sub(2));
        assert!(r.bound_holds);
        let r = main_lemma_quantities(&tw, 50, &[5]);
        assert_eq!(r.q, 1);
    }
}
