//! Finite abelian groups given by enumeration.
//!
//! Elements are discovered by closing a list of candidate generators under
//! the group law; the resulting polycyclic presentation is brought to Smith
//! normal form so that every element gets a discrete logarithm with respect
//! to an independent generating set `g_1, ..., g_r` with orders
//! `d_1 | d_2 | ... | d_r`.

use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone)]
pub struct AbelianGroup<T> {
    invariants: Vec<i64>,
    generators: Vec<T>,
    elements: Vec<T>,
    dlog: HashMap<T, Vec<i64>>,
    by_exponents: HashMap<Vec<i64>, usize>,
}

impl<T: Clone + Eq + Hash> AbelianGroup<T> {
    /// Closes `candidates` under `op`. The group is the subgroup generated by
    /// the candidates; pass every element to get the whole group.
    pub fn generate<I, F>(identity: T, candidates: I, op: F) -> Self
    where
        I: IntoIterator<Item = T>,
        F: Fn(&T, &T) -> T,
    {
        // raw coordinates w.r.t. the raw generator list, padded lazily
        let mut raw: HashMap<T, Vec<i64>> = HashMap::new();
        let mut order: Vec<T> = vec![identity.clone()];
        raw.insert(identity.clone(), Vec::new());
        let mut relations: Vec<Vec<i64>> = Vec::new();

        for g in candidates {
            if raw.contains_key(&g) {
                continue;
            }
            let r = relations.len();
            // smallest k with g^k in the current subgroup
            let mut k = 1i64;
            let mut pow = g.clone();
            while !raw.contains_key(&pow) {
                pow = op(&pow, &g);
                k += 1;
            }
            let mut rel = raw[&pow].clone();
            rel.resize(r + 1, 0);
            for c in rel.iter_mut() {
                *c = -*c;
            }
            rel[r] = k;
            relations.push(rel);

            let old: Vec<T> = order.clone();
            let mut gj = identity.clone();
            for j in 1..k {
                gj = op(&gj, &g);
                for s in &old {
                    let e = op(s, &gj);
                    let mut v = raw[s].clone();
                    v.resize(r + 1, 0);
                    v[r] = j;
                    raw.insert(e.clone(), v);
                    order.push(e);
                }
            }
        }

        let r = relations.len();
        let mut mat = vec![vec![0i128; r]; r];
        for (i, rel) in relations.iter().enumerate() {
            for (j, &c) in rel.iter().enumerate() {
                mat[i][j] = c as i128;
            }
        }
        let (diag, v) = smith_normal_form(mat);

        let keep: Vec<usize> = (0..r).filter(|&i| diag[i] != 1).collect();
        let invariants: Vec<i64> = keep.iter().map(|&i| diag[i] as i64).collect();

        let mut dlog = HashMap::with_capacity(order.len());
        let mut by_exponents = HashMap::with_capacity(order.len());
        for (idx, e) in order.iter().enumerate() {
            let mut x = raw[e].clone();
            x.resize(r, 0);
            let coords: Vec<i64> = keep
                .iter()
                .map(|&col| {
                    let s: i128 = (0..r).map(|row| x[row] as i128 * v[row][col]).sum();
                    s.rem_euclid(diag[col]) as i64
                })
                .collect();
            by_exponents.insert(coords.clone(), idx);
            dlog.insert(e.clone(), coords);
        }
        let generators = (0..keep.len())
            .map(|i| {
                let mut unit = vec![0i64; keep.len()];
                unit[i] = 1;
                order[by_exponents[&unit]].clone()
            })
            .collect();

        AbelianGroup {
            invariants,
            generators,
            elements: order,
            dlog,
            by_exponents,
        }
    }

    pub fn order(&self) -> i64 {
        self.elements.len() as i64
    }

    /// Orders `d_i` of the independent generators, `d_1 | d_2 | ...`.
    pub fn invariants(&self) -> &[i64] {
        &self.invariants
    }

    pub fn generators(&self) -> &[T] {
        &self.generators
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn dlog(&self, x: &T) -> Option<&[i64]> {
        self.dlog.get(x).map(|v| v.as_slice())
    }

    /// The element `prod g_i^{e_i}` (exponents taken modulo the invariants).
    pub fn element(&self, exponents: &[i64]) -> &T {
        let key: Vec<i64> = exponents
            .iter()
            .zip(&self.invariants)
            .map(|(e, d)| e.rem_euclid(*d))
            .collect();
        &self.elements[self.by_exponents[&key]]
    }

    pub fn contains(&self, x: &T) -> bool {
        self.dlog.contains_key(x)
    }

    /// Order of the element with the given exponent vector.
    pub fn element_order(&self, exponents: &[i64]) -> i64 {
        exponents
            .iter()
            .zip(&self.invariants)
            .fold(1, |acc, (&e, &d)| {
                crate::arith::lcm(acc, d / crate::arith::gcd(e.rem_euclid(d), d))
            })
    }
}

/// Smith normal form of a square integer matrix. Returns the diagonal and the
/// column transform `V` such that `U * A * V = diag` for some unimodular `U`.
/// Diagonal entries are non-negative and each divides the next.
pub fn smith_normal_form(mut a: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>) {
    let n = a.len();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();

    let swap_cols = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };
    // col_j -= q * col_i
    let col_op = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, j: usize, i: usize, q: i128| {
        for row in a.iter_mut() {
            row[j] -= q * row[i];
        }
        for row in v.iter_mut() {
            row[j] -= q * row[i];
        }
    };

    for t in 0..n {
        loop {
            // pivot: smallest non-zero entry in the lower-right block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 {
                        match best {
                            Some((bi, bj)) if a[bi][bj].abs() <= a[i][j].abs() => {}
                            _ => best = Some((i, j)),
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            swap_cols(&mut a, &mut v, t, pj);

            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    let pivot_row = a[t].clone();
                    for (x, p) in a[i].iter_mut().zip(pivot_row) {
                        *x -= q * p;
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    col_op(&mut a, &mut v, j, t, q);
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let mut fixed = true;
            'outer: for i in t + 1..n {
                for j in t + 1..n {
                    if a[i][j] % a[t][t] != 0 {
                        let row = a[i].clone();
                        for (x, r) in a[t].iter_mut().zip(row) {
                            *x += r;
                        }
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if a[t][t] < 0 {
            for row in a.iter_mut() {
                row[t] = -row[t];
            }
            for row in v.iter_mut() {
                row[t] = -row[t];
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zmod_units(n: i64) -> AbelianGroup<i64> {
        let cands: Vec<i64> = (1..n).filter(|&x| crate::arith::gcd(x, n) == 1).collect();
        AbelianGroup::generate(1 % n, cands, move |a, b| a * b % n)
    }

    #[test]
    fn unit_groups_have_expected_invariants() {
        assert_eq!(zmod_units(8).invariants(), &[2, 2]);
        assert_eq!(zmod_units(23).invariants(), &[22]);
        assert_eq!(zmod_units(15).invariants(), &[2, 4]);
        assert_eq!(zmod_units(24).invariants(), &[2, 2, 2]);
        assert_eq!(zmod_units(1).order(), 1);
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        for n in [20i64, 63, 100, 105] {
            let g = zmod_units(n);
            let inv = g.invariants().to_vec();
            for &x in g.elements() {
                for &y in g.elements() {
                    let lhs = g.dlog(&(x * y % n)).unwrap();
                    let rhs: Vec<i64> = g
                        .dlog(&x)
                        .unwrap()
                        .iter()
                        .zip(g.dlog(&y).unwrap())
                        .zip(&inv)
                        .map(|((a, b), d)| (a + b) % d)
                        .collect();
                    assert_eq!(lhs, rhs.as_slice());
                }
            }
            let prod: i64 = inv.iter().product();
            assert_eq!(prod, g.order());
            for (i, gen) in g.generators().iter().enumerate() {
                let mut unit = vec![0; inv.len()];
                unit[i] = 1;
                assert_eq!(g.element(&unit), gen);
            }
        }
    }

    #[test]
    fn smith_divisibility_chain() {
        let (d, _) = smith_normal_form(vec![vec![2, 0], vec![0, 3]]);
        assert_eq!(d, vec![1, 6]);
        let (d, _) = smith_normal_form(vec![vec![4, 0, 0], vec![0, 6, 0], vec![0, 0, 10]]);
        assert_eq!(d, vec![2, 2, 60]);
    }
}
