use std::fmt;

use serde::{Deserialize, Serialize};

use super::element::{mul_coords, QuadInt};
use crate::arith::{ext_gcd, gcd_i128};

/// An integral ideal `a*Z + (b + c*omega)*Z` in Hermite normal form:
/// `c | a`, `c | b` and `0 <= b < a`. The norm is `a*c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ideal {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {} + {}w]", self.a, self.b, self.c)
    }
}

/// HNF of the Z-lattice spanned by the given vectors in the basis `{1, omega}`.
/// Returns `None` if the vectors do not span a full-rank lattice.
pub(crate) fn lattice_hnf(gens: &[(i128, i128)]) -> Option<(i128, i128, i128)> {
    let mut pivot: Option<(i128, i128)> = None;
    let mut a: i128 = 0;
    for &(x, y) in gens {
        if y == 0 {
            a = gcd_i128(a, x);
            continue;
        }
        match pivot {
            None => pivot = Some(if y < 0 { (-x, -y) } else { (x, y) }),
            Some((px, py)) => {
                let (g, s, t) = ext_gcd(py, y);
                let nx = s * px + t * x;
                let zx = (y / g) * px - (py / g) * x;
                a = gcd_i128(a, zx);
                pivot = Some((nx, g));
            }
        }
    }
    let (px, c) = pivot?;
    if a == 0 {
        return None;
    }
    Some((a, px.rem_euclid(a), c))
}

impl Ideal {
    pub const UNIT: Ideal = Ideal { a: 1, b: 0, c: 1 };

    /// Builds the ideal from HNF data, checking the HNF shape and closure
    /// under multiplication by omega.
    pub fn from_hnf(a: i64, b: i64, c: i64, d: i64) -> Option<Ideal> {
        if a <= 0 || c <= 0 || a % c != 0 || b % c != 0 || b < 0 || b >= a {
            return None;
        }
        let id = Ideal { a, b, c };
        if id.is_ideal(d) {
            Some(id)
        } else {
            None
        }
    }

    fn from_lattice(gens: &[(i128, i128)]) -> Ideal {
        let (a, b, c) = lattice_hnf(gens).expect("degenerate ideal lattice");
        Ideal {
            a: a as i64,
            b: b as i64,
            c: c as i64,
        }
    }

    pub fn norm(&self) -> i64 {
        self.a * self.c
    }

    pub fn basis(&self) -> [QuadInt; 2] {
        [QuadInt::int(self.a), QuadInt::new(self.b, self.c)]
    }

    /// The ideal generated by the given elements.
    pub fn generated_by(elts: &[QuadInt], d: i64) -> Ideal {
        let mut gens = Vec::with_capacity(2 * elts.len());
        for e in elts {
            let (x, y) = (e.x as i128, e.y as i128);
            gens.push((x, y));
            gens.push(mul_coords((x, y), (0, 1), d));
        }
        Ideal::from_lattice(&gens)
    }

    pub fn principal(w: &QuadInt, d: i64) -> Ideal {
        Ideal::generated_by(&[*w], d)
    }

    pub fn from_int(n: i64) -> Ideal {
        let n = n.abs();
        Ideal { a: n, b: 0, c: n }
    }

    pub fn mul(&self, o: &Ideal, d: i64) -> Ideal {
        let mut gens = Vec::with_capacity(4);
        for u in self.basis() {
            for v in o.basis() {
                gens.push(mul_coords(
                    (u.x as i128, u.y as i128),
                    (v.x as i128, v.y as i128),
                    d,
                ));
            }
        }
        Ideal::from_lattice(&gens)
    }

    pub fn pow(&self, e: u32, d: i64) -> Ideal {
        let mut r = Ideal::UNIT;
        for _ in 0..e {
            r = r.mul(self, d);
        }
        r
    }

    pub fn conjugate(&self, d: i64) -> Ideal {
        let gens: Vec<(i128, i128)> = self
            .basis()
            .iter()
            .map(|e| {
                let c = e.conj(d);
                (c.x as i128, c.y as i128)
            })
            .collect();
        Ideal::from_lattice(&gens)
    }

    /// `self + o`, i.e. the gcd of the two ideals.
    pub fn sum(&self, o: &Ideal) -> Ideal {
        let gens: Vec<(i128, i128)> = self
            .basis()
            .iter()
            .chain(o.basis().iter())
            .map(|e| (e.x as i128, e.y as i128))
            .collect();
        Ideal::from_lattice(&gens)
    }

    pub fn is_coprime_to(&self, o: &Ideal) -> bool {
        self.sum(o) == Ideal::UNIT
    }

    pub fn contains(&self, w: &QuadInt) -> bool {
        if w.y % self.c != 0 {
            return false;
        }
        let k = w.y / self.c;
        (w.x as i128 - k as i128 * self.b as i128) % self.a as i128 == 0
    }

    pub fn contains_ideal(&self, o: &Ideal) -> bool {
        o.basis().iter().all(|e| self.contains(e))
    }

    fn is_ideal(&self, d: i64) -> bool {
        let w = QuadInt::new(0, 1);
        self.basis().iter().all(|e| self.contains(&e.mul(&w, d)))
    }

    /// Largest rational integer `c` with `self = c * primitive`.
    pub fn content(&self) -> i64 {
        self.c
    }

    /// The primitive ideal `self / content`, as `(A, B)` with
    /// `self / c = A*Z + (B + omega)*Z`.
    pub fn primitive_part(&self) -> Ideal {
        Ideal {
            a: self.a / self.c,
            b: self.b / self.c,
            c: 1,
        }
    }

    pub fn is_self_conjugate(&self, d: i64) -> bool {
        self.conjugate(d) == *self
    }

    /// Residue of `w` modulo the ideal, canonical: `x' + y'*omega` with
    /// `0 <= y' < c` and `0 <= x' < a`.
    pub fn reduce(&self, w: &QuadInt) -> QuadInt {
        let k = w.y.div_euclid(self.c);
        let y = w.y - k * self.c;
        let x = (w.x as i128 - k as i128 * self.b as i128).rem_euclid(self.a as i128) as i64;
        QuadInt::new(x, y)
    }

    /// Index of the canonical residue in `0..norm`.
    pub fn residue_index(&self, w: &QuadInt) -> usize {
        let r = self.reduce(w);
        (r.y as usize) * (self.a as usize) + r.x as usize
    }

    /// All canonical residues modulo the ideal.
    pub fn residues(&self) -> impl Iterator<Item = QuadInt> + '_ {
        (0..self.c).flat_map(move |y| (0..self.a).map(move |x| QuadInt::new(x, y)))
    }

    /// Exact quotient `self / o` when `o` divides `self`.
    pub fn div_exact(&self, o: &Ideal, d: i64) -> Option<Ideal> {
        if !o.contains_ideal(self) {
            return None;
        }
        // self * conj(o) = N(o) * (self / o)
        let n = o.norm();
        let prod = self.mul(&o.conjugate(d), d);
        if prod.a % n != 0 || prod.b % n != 0 || prod.c % n != 0 {
            return None;
        }
        Some(Ideal {
            a: prod.a / n,
            b: prod.b / n,
            c: prod.c / n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_prime_times_conjugate_is_five() {
        let d = -4;
        // i = omega + 2
        let i = QuadInt::new(2, 1);
        let p = Ideal::principal(&QuadInt::int(2).add(&i), d);
        assert_eq!(p.norm(), 5);
        let pc = p.conjugate(d);
        assert_ne!(p, pc);
        assert_eq!(p.mul(&pc, d), Ideal::from_int(5));
    }

    #[test]
    fn ramified_two_in_gaussian_integers() {
        let d = -4;
        let one_plus_i = QuadInt::new(3, 1);
        let p = Ideal::principal(&one_plus_i, d);
        assert_eq!(p.norm(), 2);
        assert_eq!(p.mul(&p, d), Ideal::from_int(2));
        let one_minus_i = QuadInt::new(-1, -1);
        assert_eq!(p.mul(&Ideal::principal(&one_minus_i, d), d).norm(), 4);
    }

    #[test]
    fn unit_ideal_is_identity_and_division_inverts() {
        let d = -23;
        let p2 = Ideal::from_hnf(2, 0, 1, d).unwrap();
        assert_eq!(p2.mul(&Ideal::UNIT, d), p2);
        let sq = p2.mul(&p2, d);
        assert_eq!(sq.div_exact(&p2, d), Some(p2));
        assert!(Ideal::from_hnf(2, 1, 1, d).is_some());
        assert!(Ideal::from_hnf(3, 1, 1, d).is_none() || Ideal::from_hnf(3, 1, 1, d).unwrap().norm() == 3);
    }
}
