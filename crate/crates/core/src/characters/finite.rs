//! Finite parts `eps : (O/f)^x -> mu_M` and ring class characters.

use std::sync::Arc;

use super::CharacterError;
use crate::abelian::AbelianGroup;
use crate::arith::{self, lcm};
use crate::quadfield::{class_group, ClassGroup, FieldContext, Ideal, QuadInt};

/// `(O/f)^x` realised on canonical residues.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    pub modulus: Ideal,
    primes: Vec<Ideal>,
    group: AbelianGroup<QuadInt>,
}

impl UnitGroup {
    pub fn order(&self) -> i64 {
        self.group.order()
    }

    pub fn invariants(&self) -> &[i64] {
        self.group.invariants()
    }

    pub fn generators(&self) -> &[QuadInt] {
        self.group.generators()
    }

    pub fn elements(&self) -> &[QuadInt] {
        self.group.elements()
    }

    pub fn is_unit(&self, w: &QuadInt) -> bool {
        self.primes.iter().all(|p| !p.contains(w))
    }

    /// Discrete logarithm of `w`, or `None` if `w` is not a unit modulo `f`.
    pub fn dlog(&self, w: &QuadInt) -> Option<&[i64]> {
        self.group.dlog(&self.modulus.reduce(w))
    }
}

/// Generators, orders and discrete logarithms of `(O/f)^x`.
pub fn unit_group_mod(field: &FieldContext, f: &Ideal) -> UnitGroup {
    let d = field.d;
    let primes = field.prime_divisors(f);
    let units: Vec<QuadInt> = f
        .residues()
        .filter(|w| primes.iter().all(|p| !p.contains(w)))
        .collect();
    let m = *f;
    let one = f.reduce(&QuadInt::ONE);
    let group = AbelianGroup::generate(one, units, move |x, y| m.reduce(&x.mul(y, d)));
    UnitGroup {
        modulus: *f,
        primes,
        group,
    }
}

/// A character of `(O/m)^x` given by its values `zeta_order^values[i]` on the
/// generators of the unit group.
#[derive(Debug, Clone)]
pub struct ExplicitEps {
    pub units: Arc<UnitGroup>,
    pub values: Vec<i64>,
    pub order: i64,
}

impl ExplicitEps {
    pub fn new(units: Arc<UnitGroup>, values: Vec<i64>, order: i64) -> Result<Self, CharacterError> {
        if values.len() != units.invariants().len() {
            return Err(CharacterError::InvalidFinitePart(format!(
                "expected {} generator values, got {}",
                units.invariants().len(),
                values.len()
            )));
        }
        for (v, d) in values.iter().zip(units.invariants()) {
            // zeta_order^(v d) must be 1
            if (v * d).rem_euclid(order) != 0 {
                return Err(CharacterError::InvalidFinitePart(format!(
                    "value {v} is not compatible with a generator of order {d}"
                )));
            }
        }
        let values = values.iter().map(|v| v.rem_euclid(order)).collect();
        Ok(ExplicitEps {
            units,
            values,
            order,
        })
    }

    pub fn modulus(&self) -> Ideal {
        self.units.modulus
    }

    pub fn eval(&self, w: &QuadInt) -> Option<i64> {
        let e = self.units.dlog(w)?;
        Some(
            e.iter()
                .zip(&self.values)
                .map(|(a, b)| a * b)
                .sum::<i64>()
                .rem_euclid(self.order),
        )
    }
}

/// A character of the ring class group `Pic(O_c)`.
#[derive(Debug, Clone)]
pub struct RingClassCharacter {
    pub d: i64,
    pub conductor: i64,
    pub exponents: Vec<i64>,
    group: Arc<ClassGroup>,
    /// exponent of `Pic(O_c)`; values are powers of `zeta_level`
    level: i64,
    order: i64,
}

impl RingClassCharacter {
    pub fn group(&self) -> &ClassGroup {
        &self.group
    }

    /// Order `n` of the character.
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// `rho^m`.
    pub fn power(&self, m: i64) -> RingClassCharacter {
        let inv = self.group.invariants();
        let exponents: Vec<i64> = self
            .exponents
            .iter()
            .zip(inv)
            .map(|(e, d)| (e * m).rem_euclid(*d))
            .collect();
        let order = char_order(&exponents, inv);
        RingClassCharacter {
            exponents,
            order,
            ..self.clone()
        }
    }

    /// Exponent `k` with `rho(a) = zeta_level^k`, `None` off `c`-coprime ideals.
    pub fn eval(&self, field: &FieldContext, a: &Ideal) -> Option<i64> {
        let form = field.ring_class_form(a, self.conductor)?;
        Some(self.eval_class(&self.group.dlog(&form)))
    }

    pub fn eval_class(&self, classes: &[i64]) -> i64 {
        let inv = self.group.invariants();
        classes
            .iter()
            .zip(&self.exponents)
            .zip(inv)
            .map(|((y, x), d)| y * x * (self.level / d))
            .sum::<i64>()
            .rem_euclid(self.level)
    }

    /// Value on the principal ideal `(w)`.
    pub fn eval_element(&self, field: &FieldContext, w: &QuadInt) -> Option<i64> {
        self.eval(field, &Ideal::principal(w, field.d))
    }
}

fn char_order(exponents: &[i64], invariants: &[i64]) -> i64 {
    exponents
        .iter()
        .zip(invariants)
        .fold(1, |acc, (e, d)| lcm(acc, d / arith::gcd(*e, *d)))
}

/// Character of `Pic(O_c)` with the given exponents on the generators of
/// the form class group of discriminant `c^2 D`. The conductor must be
/// supported on `allowed_primes` (pass `None` to skip the check).
pub fn ring_class_character(
    field: &FieldContext,
    c: i64,
    exponents: &[i64],
    allowed_primes: Option<&[i64]>,
) -> Result<RingClassCharacter, CharacterError> {
    if c < 1 {
        return Err(CharacterError::ConductorNotSupported(c));
    }
    if let Some(ps) = allowed_primes {
        if arith::prime_divisors(c).iter().any(|p| !ps.contains(p)) {
            return Err(CharacterError::ConductorNotSupported(c));
        }
    }
    let group = class_group(c * c * field.d).map_err(CharacterError::Field)?;
    let inv = group.invariants().to_vec();
    if exponents.len() != inv.len() {
        return Err(CharacterError::InvalidFinitePart(format!(
            "Pic(O_{c}) has {} generators, got {} exponents",
            inv.len(),
            exponents.len()
        )));
    }
    let exponents: Vec<i64> = exponents
        .iter()
        .zip(&inv)
        .map(|(e, d)| e.rem_euclid(*d))
        .collect();
    let level = inv.iter().copied().fold(1, lcm);
    let order = char_order(&exponents, &inv);
    Ok(RingClassCharacter {
        d: field.d,
        conductor: c,
        exponents,
        group: Arc::new(group),
        level,
        order,
    })
}

#[derive(Debug, Clone)]
pub enum FiniteComponent {
    Explicit(ExplicitEps),
    /// `w -> rho((w))` for a ring class character `rho`.
    RingClass(RingClassCharacter),
}

impl FiniteComponent {
    pub fn modulus(&self) -> Ideal {
        match self {
            FiniteComponent::Explicit(e) => e.modulus(),
            FiniteComponent::RingClass(r) => Ideal::from_int(r.conductor),
        }
    }

    pub fn order(&self) -> i64 {
        match self {
            FiniteComponent::Explicit(e) => e.order,
            FiniteComponent::RingClass(r) => r.level,
        }
    }

    fn eval(&self, field: &FieldContext, w: &QuadInt) -> Option<i64> {
        match self {
            FiniteComponent::Explicit(e) => e.eval(w),
            FiniteComponent::RingClass(r) => r.eval_element(field, w),
        }
    }
}

/// A product of finite characters, evaluated in `mu_order`.
#[derive(Debug, Clone)]
pub struct FinitePart {
    pub components: Vec<FiniteComponent>,
    modulus: Ideal,
    primes: Vec<Ideal>,
    order: i64,
}

impl FinitePart {
    pub fn new(field: &FieldContext, components: Vec<FiniteComponent>) -> Self {
        let modulus = components
            .iter()
            .fold(Ideal::UNIT, |acc, c| acc.mul(&c.modulus(), field.d));
        let order = components.iter().fold(1, |acc, c| lcm(acc, c.order()));
        FinitePart {
            primes: field.prime_divisors(&modulus),
            components,
            modulus,
            order,
        }
    }

    /// The modulus on which the product is defined (not necessarily primitive).
    pub fn modulus(&self) -> Ideal {
        self.modulus
    }

    pub fn modulus_primes(&self) -> &[Ideal] {
        &self.primes
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn is_unit(&self, w: &QuadInt) -> bool {
        self.primes.iter().all(|p| !p.contains(w))
    }

    /// `k` with `eps(w) = zeta_order^k`; `None` if `w` is not coprime to the modulus.
    pub fn eval(&self, field: &FieldContext, w: &QuadInt) -> Option<i64> {
        if !self.is_unit(w) {
            return None;
        }
        let mut k = 0;
        for c in &self.components {
            k += c.eval(field, w)? * (self.order / c.order());
        }
        Some(k.rem_euclid(self.order))
    }

    pub fn with_component(&self, field: &FieldContext, c: FiniteComponent) -> FinitePart {
        let mut comps = self.components.clone();
        comps.push(c);
        FinitePart::new(field, comps)
    }
}

/// The quadratic finite part of conductor `(sqrt D)` for `|D|` an odd prime,
/// and the character `u -> u^-1` of `(O/(2+2i))^x` for `D = -4`.
pub fn canonical_epsilon(field: &FieldContext) -> Result<FinitePart, CharacterError> {
    let d = field.d;
    if d == -4 {
        // (1+i)^3 = (2+2i); i = omega + 2
        let one_plus_i = QuadInt::new(3, 1);
        let f = Ideal::principal(&one_plus_i, d).pow(3, d);
        let units = Arc::new(unit_group_mod(field, &f));
        let i = QuadInt::new(2, 1);
        let values = units
            .generators()
            .iter()
            .map(|g| {
                // each residue class contains exactly one unit i^k; eps = i^-k
                let k = (0..4)
                    .find(|&k| f.reduce(&i.pow(k, d)) == *g)
                    .expect("units represent (O/(2+2i))^x");
                (4 - k as i64) % 4
            })
            .collect();
        let eps = ExplicitEps::new(units, values, 4)?;
        return Ok(FinitePart::new(field, vec![FiniteComponent::Explicit(eps)]));
    }
    let p = -d;
    if !(p % 4 == 3 && arith::is_prime(p)) {
        return Err(CharacterError::UnsupportedDiscriminant(d));
    }
    // omega lies in (sqrt D), so O/(sqrt D) = F_p via x + y omega -> x
    let f = field.prime_ideals_above(p)[0].0;
    let units = Arc::new(unit_group_mod(field, &f));
    let values = units
        .generators()
        .iter()
        .map(|g| if arith::kronecker(g.x, p) == 1 { 0 } else { 1 })
        .collect();
    let eps = ExplicitEps::new(units, values, 2)?;
    Ok(FinitePart::new(field, vec![FiniteComponent::Explicit(eps)]))
}
