use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abelian::AbelianGroup;
use crate::arith::{ext_gcd, gcd_i128, isqrt};

/// Positive definite binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The principal form of the given discriminant.
    pub fn identity(disc: i64) -> Self {
        let b = disc.rem_euclid(2);
        QuadForm::new(1, b, (b * b - disc) / 4)
    }

    pub fn is_primitive(&self) -> bool {
        gcd_i128(gcd_i128(self.a as i128, self.b as i128), self.c as i128) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
    }

    pub fn inverse(&self) -> Self {
        QuadForm::new(self.a, -self.b, self.c).reduce()
    }

    /// Gauss reduction of a positive definite form.
    pub fn reduce(&self) -> Self {
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            if b > a || b <= -a {
                // normalize b into (-a, a]
                let two_a = 2 * a;
                let mut r = b.rem_euclid(two_a);
                if r > a {
                    r -= two_a;
                }
                let q = (b - r) / two_a;
                c -= q * (b + r) / 2;
                b = r;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        QuadForm::new(a as i64, b as i64, c as i64)
    }

    /// Composition of two primitive forms of the same discriminant, reduced.
    pub fn compose(&self, o: &QuadForm) -> QuadForm {
        let disc = self.discriminant() as i128;
        let (f1, f2) = if self.a > o.a { (o, self) } else { (self, o) };
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (d, y1) = if a2 % a1 == 0 {
            (a1, 0)
        } else {
            let (d, u, _) = ext_gcd(a2, a1);
            (d, u)
        };
        let (d1, x2, y2) = if s % d == 0 {
            (d, 0, -1)
        } else {
            let (d1, x2, y2) = ext_gcd(s, d);
            (d1, x2, -y2)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (b3 * b3 - disc) / (4 * a3);
        QuadForm::new(a3 as i64, b3 as i64, c3 as i64).reduce()
    }

    pub fn pow(&self, mut e: u64) -> QuadForm {
        let mut base = *self;
        let mut r = QuadForm::identity(self.discriminant());
        while e > 0 {
            if e & 1 == 1 {
                r = r.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        r
    }

    /// Value of the form at `(x, y)`.
    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }
}

/// All reduced primitive forms of a negative discriminant, sorted.
pub fn reduced_forms(disc: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    let amax = isqrt((-disc as i128) / 3) as i64;
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = QuadForm::new(a, b, c);
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    out
}

/// Form class group of a negative discriminant.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    discriminant: i64,
    group: AbelianGroup<QuadForm>,
}

impl ClassGroup {
    pub(crate) fn build(disc: i64) -> Self {
        let forms = reduced_forms(disc);
        let group = AbelianGroup::generate(QuadForm::identity(disc), forms, |x, y| x.compose(y));
        ClassGroup {
            discriminant: disc,
            group,
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn order(&self) -> i64 {
        self.group.order()
    }

    /// Orders of the independent generators.
    pub fn invariants(&self) -> &[i64] {
        self.group.invariants()
    }

    pub fn generators(&self) -> &[QuadForm] {
        self.group.generators()
    }

    pub fn forms(&self) -> &[QuadForm] {
        self.group.elements()
    }

    /// Exponent vector of a form class with respect to `generators()`.
    pub fn dlog(&self, f: &QuadForm) -> Vec<i64> {
        self.group
            .dlog(&f.reduce())
            .expect("form of foreign discriminant")
            .to_vec()
    }

    pub fn form_of(&self, exponents: &[i64]) -> QuadForm {
        *self.group.element(exponents)
    }

    pub fn element_order(&self, exponents: &[i64]) -> i64 {
        self.group.element_order(exponents)
    }
}
