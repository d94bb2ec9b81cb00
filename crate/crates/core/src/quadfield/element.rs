use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::gcd_i128;

/// An algebraic integer `x + y*omega` of an imaginary quadratic field, with
/// `omega = (D + sqrt(D)) / 2`. Arithmetic needs the discriminant, so the
/// methods take it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadInt {
    pub x: i64,
    pub y: i64,
}

/// `N(omega) = (D^2 - D) / 4`.
#[inline]
pub fn omega_norm(d: i64) -> i64 {
    (d * d - d) / 4
}

impl QuadInt {
    pub const ZERO: QuadInt = QuadInt { x: 0, y: 0 };
    pub const ONE: QuadInt = QuadInt { x: 1, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        QuadInt { x, y }
    }

    pub const fn int(n: i64) -> Self {
        QuadInt { x: n, y: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn add(&self, o: &QuadInt) -> QuadInt {
        QuadInt::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(&self, o: &QuadInt) -> QuadInt {
        QuadInt::new(self.x - o.x, self.y - o.y)
    }

    pub fn neg(&self) -> QuadInt {
        QuadInt::new(-self.x, -self.y)
    }

    pub fn scale(&self, k: i64) -> QuadInt {
        QuadInt::new(self.x * k, self.y * k)
    }

    pub fn mul(&self, o: &QuadInt, d: i64) -> QuadInt {
        let (x, y) = mul_coords(
            (self.x as i128, self.y as i128),
            (o.x as i128, o.y as i128),
            d,
        );
        QuadInt::new(to_i64(x), to_i64(y))
    }

    pub fn pow(&self, mut e: u32, d: i64) -> QuadInt {
        let mut base = *self;
        let mut r = QuadInt::ONE;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base, d);
            }
            base = base.mul(&base, d);
            e >>= 1;
        }
        r
    }

    /// Complex conjugate: `omega -> D - omega`.
    pub fn conj(&self, d: i64) -> QuadInt {
        QuadInt::new(self.x + d * self.y, -self.y)
    }

    pub fn norm(&self, d: i64) -> i64 {
        to_i64(norm_coords(self.x as i128, self.y as i128, d))
    }

    pub fn trace(&self, d: i64) -> i64 {
        2 * self.x + d * self.y
    }

    pub fn to_complex(&self, d: i64) -> Complex64 {
        let (re, im) = omega_complex(d);
        Complex64::new(self.x as f64 + self.y as f64 * re, self.y as f64 * im)
    }

    pub fn reduce_mod(&self, m: i64) -> QuadInt {
        QuadInt::new(self.x.rem_euclid(m), self.y.rem_euclid(m))
    }
}

fn to_i64(v: i128) -> i64 {
    i64::try_from(v).expect("quadratic integer coordinate overflow")
}

pub(crate) fn omega_complex(d: i64) -> (f64, f64) {
    (d as f64 / 2.0, (-(d as f64)).sqrt() / 2.0)
}

pub(crate) fn mul_coords(a: (i128, i128), b: (i128, i128), d: i64) -> (i128, i128) {
    let n0 = omega_norm(d) as i128;
    let d = d as i128;
    (
        a.0 * b.0 - a.1 * b.1 * n0,
        a.0 * b.1 + a.1 * b.0 + d * a.1 * b.1,
    )
}

pub(crate) fn norm_coords(x: i128, y: i128, d: i64) -> i128 {
    x * x + (d as i128) * x * y + (omega_norm(d) as i128) * y * y
}

/// An element `(x + y*omega) / den` of the field itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KElem {
    pub x: i128,
    pub y: i128,
    pub den: i128,
}

impl KElem {
    pub fn new(x: i128, y: i128, den: i128) -> Self {
        assert!(den != 0);
        let g = gcd_i128(gcd_i128(x, y), den);
        let s = if den < 0 { -1 } else { 1 };
        KElem {
            x: s * x / g,
            y: s * y / g,
            den: s * den / g,
        }
    }

    pub fn from_int(w: &QuadInt) -> Self {
        KElem::new(w.x as i128, w.y as i128, 1)
    }

    pub fn one() -> Self {
        KElem::new(1, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn mul(&self, o: &KElem, d: i64) -> KElem {
        let (x, y) = mul_coords((self.x, self.y), (o.x, o.y), d);
        KElem::new(x, y, self.den * o.den)
    }

    pub fn conj(&self, d: i64) -> KElem {
        KElem::new(self.x + d as i128 * self.y, -self.y, self.den)
    }

    pub fn norm_fraction(&self, d: i64) -> (i128, i128) {
        let n = norm_coords(self.x, self.y, d);
        let dd = self.den * self.den;
        let g = gcd_i128(n, dd);
        (n / g, dd / g)
    }

    pub fn inv(&self, d: i64) -> KElem {
        // 1/z = conj(z) / N(z)
        let c = KElem::new(self.x + d as i128 * self.y, -self.y, 1);
        let n = norm_coords(self.x, self.y, d);
        assert!(n != 0, "inverse of zero");
        KElem::new(c.x * self.den, c.y * self.den, n)
    }

    pub fn as_integer(&self) -> Option<QuadInt> {
        if self.den == 1 {
            Some(QuadInt::new(
                i64::try_from(self.x).ok()?,
                i64::try_from(self.y).ok()?,
            ))
        } else {
            None
        }
    }

    pub fn to_complex(&self, d: i64) -> Complex64 {
        let (re, im) = omega_complex(d);
        let den = self.den as f64;
        Complex64::new(
            (self.x as f64 + self.y as f64 * re) / den,
            self.y as f64 * im / den,
        )
    }

    /// `Tr_{K/Q}` as a reduced fraction `(num, den)`.
    pub fn trace_fraction(&self, d: i64) -> (i128, i128) {
        let t = 2 * self.x + d as i128 * self.y;
        let g = gcd_i128(t, self.den);
        if g == 0 {
            return (0, 1);
        }
        (t / g, self.den / g)
    }
}
