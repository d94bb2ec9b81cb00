//! Small-integer number theory used throughout the crate.
//!
//! Everything here works on machine integers; intermediate products are
//! taken in `i128` so that inputs up to `2^62` are safe.

/// Greatest common divisor, always non-negative.
pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

pub fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Non-negative residue of `a` modulo `m > 0`.
#[inline]
pub fn modp(a: i128, m: i128) -> i128 {
    a.rem_euclid(m)
}

pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd(modp(a, m), m);
    if g != 1 {
        None
    } else {
        Some(modp(x, m))
    }
}

pub fn mod_pow(base: i128, mut exp: u64, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let mut b = modp(base, m);
    let mut r = 1i128;
    while exp > 0 {
        if exp & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    r
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorisation of `|n|` as `(prime, exponent)` pairs in increasing order.
pub fn factorize(n: i64) -> Vec<(i64, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: i64) -> Vec<i64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// `p`-adic valuation of a non-zero integer.
pub fn valuation(mut n: i64, p: i64) -> u32 {
    assert!(n != 0 && p > 1);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn divisors(n: i64) -> Vec<i64> {
    let mut out = vec![1];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn moebius(n: i64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: i64) -> i64 {
    factorize(n)
        .into_iter()
        .fold(n.abs(), |acc, (p, _)| acc / p * (p - 1))
}

pub fn is_squarefree(n: i64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Kronecker symbol `(a / n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = modp(a, 8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    // Jacobi symbol (a / n) with n odd positive.
    a = modp(a, n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Square roots of `a` modulo an odd prime `p` (Tonelli–Shanks); empty when
/// `a` is a non-residue.
pub fn sqrt_mod_prime(a: i128, p: i128) -> Vec<i128> {
    let a = modp(a, p);
    if p == 2 {
        return vec![a];
    }
    if a == 0 {
        return vec![0];
    }
    if mod_pow(a, ((p - 1) / 2) as u64, p) != 1 {
        return Vec::new();
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, ((p - 1) / 2) as u64, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q as u64, p);
    let mut t = mod_pow(a, q as u64, p);
    let mut r = mod_pow(a, ((q + 1) / 2) as u64, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % p;
            i += 1;
        }
        let b = mod_pow(c, 1u64 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    let mut out = vec![r, p - r];
    out.sort_unstable();
    out.dedup();
    out
}

/// Integer square root (floor).
pub fn isqrt(n: i128) -> i128 {
    if n < 0 {
        panic!("isqrt of negative");
    }
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Chinese remainder for coprime moduli; returns the residue modulo `m1*m2`.
pub fn crt(r1: i128, m1: i128, r2: i128, m2: i128) -> i128 {
    let inv = mod_inv(m1, m2).expect("moduli must be coprime");
    let t = modp((r2 - r1) % m2 * inv, m2);
    modp(r1 + m1 * t, m1 * m2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_matches_legendre_for_odd_primes() {
        for p in [3i64, 5, 7, 11, 13, 23] {
            for a in 0..p {
                let squares: Vec<i64> = (1..p).map(|x| x * x % p).collect();
                let expected = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(a, p), expected, "({a}/{p})");
            }
        }
    }

    #[test]
    fn kronecker_at_two() {
        assert_eq!(kronecker(-23, 2), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn tonelli_shanks_roots_square_correctly() {
        for p in [3i128, 7, 13, 17, 41, 97, 10007] {
            for a in 1..40 {
                for r in sqrt_mod_prime(a, p) {
                    assert_eq!(r * r % p, a % p);
                }
            }
        }
        assert!(sqrt_mod_prime(2, 5).is_empty());
    }

    #[test]
    fn multiplicative_functions() {
        assert_eq!(moebius(12), 0);
        assert_eq!(moebius(30), -1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(crt(2, 3, 3, 5), 8);
    }
}
