//! Exact linear systems for basket matching.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::series::{LaurentPoly, Q};

/// Consistency test modulo the prime 2⁶¹ − 1, used as a cheap filter.
pub mod modp {
    use num_bigint::BigInt;
    use num_traits::{ToPrimitive, Zero};

    use crate::series::{LaurentPoly, Q};

    pub const P: u64 = (1 << 61) - 1;

    pub fn mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    pub fn pow(mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    }

    fn reduce(x: &BigInt) -> u64 {
        let m = x % BigInt::from(P);
        let m = if m < BigInt::zero() { m + BigInt::from(P) } else { m };
        m.to_u64().unwrap()
    }

    /// x mod p, or None when the denominator vanishes mod p.
    pub fn residue(x: &Q) -> Option<u64> {
        let d = reduce(x.denom());
        if d == 0 {
            return None;
        }
        Some(mul(reduce(x.numer()), pow(d, P - 2)))
    }

    /// Whether `rhs` lies in the span of `columns` (coefficient rows 0..rows).
    /// Answers true when a denominator vanishes mod p, deferring to the exact path.
    pub fn consistent(columns: &[LaurentPoly], rhs: &LaurentPoly, rows: usize) -> bool {
        let m = columns.len();
        let mut mat = vec![vec![0u64; m + 1]; rows];
        for (j, col) in columns.iter().chain(std::iter::once(rhs)).enumerate() {
            for (e, c) in col.terms() {
                if e < 0 || e as usize >= rows {
                    return true;
                }
                match residue(c) {
                    Some(v) => mat[e as usize][j] = v,
                    None => return true,
                }
            }
        }
        in_span(mat, m)
    }

    /// x mod p for a signed integer.
    pub fn from_i64(x: i64) -> u64 {
        x.rem_euclid(P as i64) as u64
    }

    pub fn add(a: u64, b: u64) -> u64 {
        (a + b) % P
    }

    pub fn sub(a: u64, b: u64) -> u64 {
        (a + P - b) % P
    }

    /// Whether the last column of the augmented matrix (rows of length m + 1)
    /// lies in the span of the first m columns.
    pub fn in_span(mut mat: Vec<Vec<u64>>, m: usize) -> bool {
        let rows = mat.len();
        let mut r = 0;
        for c in 0..m {
            let Some(p) = (r..rows).find(|&i| mat[i][c] != 0) else { continue };
            mat.swap(r, p);
            let inv = pow(mat[r][c], P - 2);
            for x in mat[r].iter_mut() {
                *x = mul(*x, inv);
            }
            let pivot = mat[r].clone();
            for (i, row) in mat.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let f = row[c];
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        *x = (*x + P - mul(f, *y)) % P;
                    }
                }
            }
            r += 1;
        }
        mat[r..].iter().all(|row| row[m] == 0)
    }
}

/// Reduced row echelon form of A·k = b over Q.
#[derive(Clone, Debug)]
pub struct RationalSystem {
    ncols: usize,
    /// (pivot column, coefficients on free columns, right-hand side).
    pivots: Vec<(usize, Vec<Q>, Q)>,
    free: Vec<usize>,
}

impl RationalSystem {
    /// Solves columns·k = rhs on coefficient rows 0..rows; None if inconsistent.
    pub fn solve(columns: &[LaurentPoly], rhs: &LaurentPoly, rows: usize) -> Option<Self> {
        let m = columns.len();
        let mut mat: Vec<Vec<Q>> = (0..rows)
            .map(|i| {
                let mut row: Vec<Q> = columns.iter().map(|c| c.coeff(i as i64)).collect();
                row.push(rhs.coeff(i as i64));
                row
            })
            .filter(|row| row.iter().any(|x| !x.is_zero()))
            .collect();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..m {
            let Some(p) = (r..mat.len()).find(|&i| !mat[i][c].is_zero()) else { continue };
            mat.swap(r, p);
            let inv = mat[r][c].recip();
            for x in mat[r].iter_mut() {
                *x *= &inv;
            }
            let pivot = mat[r].clone();
            for (i, row) in mat.iter_mut().enumerate() {
                if i != r && !row[c].is_zero() {
                    let f = row[c].clone();
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        if !y.is_zero() {
                            *x -= &f * y;
                        }
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
        if mat[r..].iter().any(|row| !row[m].is_zero()) {
            return None;
        }
        let free: Vec<usize> = (0..m).filter(|c| !pivot_cols.contains(c)).collect();
        let pivots = pivot_cols
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, free.iter().map(|&f| mat[i][f].clone()).collect(), mat[i][m].clone()))
            .collect();
        Some(Self { ncols: m, pivots, free })
    }

    pub fn free_columns(&self) -> &[usize] {
        &self.free
    }

    /// Every nonnegative integer solution with kᵢ ≤ bounds[i] and, for each
    /// group label g, Σ_{group[i] = g} kᵢ ≤ caps[g].
    pub fn nonnegative_solutions(&self, bounds: &[u32], group: &[i64], caps: &BTreeMap<i64, u32>) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut assign = vec![0u32; self.free.len()];
        self.search(0, &mut assign, bounds, group, caps, &mut out);
        out
    }

    fn pivot_value(&self, row: &(usize, Vec<Q>, Q), assign: &[u32]) -> Q {
        let mut v = row.2.clone();
        for (c, &k) in row.1.iter().zip(assign) {
            if k > 0 && !c.is_zero() {
                v -= c * Q::from_integer(k.into());
            }
        }
        v
    }

    fn search(
        &self,
        pos: usize,
        assign: &mut Vec<u32>,
        bounds: &[u32],
        group: &[i64],
        caps: &BTreeMap<i64, u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        // group sums over the free columns assigned so far
        let mut sums: BTreeMap<i64, u32> = BTreeMap::new();
        for (i, &f) in self.free[..pos].iter().enumerate() {
            *sums.entry(group[f]).or_insert(0) += assign[i];
        }
        if sums.iter().any(|(g, s)| s > &caps[g]) {
            return;
        }
        // range pruning on every pivot row
        for row in &self.pivots {
            let mut lo = row.2.clone();
            let mut hi = row.2.clone();
            for (i, c) in row.1.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if i < pos {
                    let t = c * Q::from_integer(assign[i].into());
                    lo -= &t;
                    hi -= &t;
                } else {
                    let t = c * Q::from_integer(bounds[self.free[i]].into());
                    if c.is_positive() {
                        lo -= t;
                    } else {
                        hi -= t;
                    }
                }
            }
            if hi.is_negative() || lo > Q::from_integer(bounds[row.0].into()) {
                return;
            }
        }
        if pos == self.free.len() {
            let mut k = vec![0u32; self.ncols];
            for (i, &f) in self.free.iter().enumerate() {
                k[f] = assign[i];
            }
            for row in &self.pivots {
                let v = self.pivot_value(row, assign);
                if !v.is_integer() || v.is_negative() || v > Q::from_integer(bounds[row.0].into()) {
                    return;
                }
                k[row.0] = v.to_integer().try_into().unwrap();
            }
            let mut sums: BTreeMap<i64, u32> = BTreeMap::new();
            for (i, &x) in k.iter().enumerate() {
                *sums.entry(group[i]).or_insert(0) += x;
            }
            if sums.iter().all(|(g, s)| s <= &caps[g]) {
                out.push(k);
            }
            return;
        }
        for v in 0..=bounds[self.free[pos]] {
            assign[pos] = v;
            self.search(pos + 1, assign, bounds, group, caps, out);
        }
        assign[pos] = 0;
    }
}

/// Exact rank of a list of polynomials viewed as coefficient vectors.
pub fn rank(polys: &[LaurentPoly]) -> usize {
    let rows = polys.iter().filter_map(|p| p.max_exp()).max().map_or(0, |m| m as usize + 1);
    let zero = LaurentPoly::zero();
    RationalSystem::solve(polys, &zero, rows).map_or(0, |s| s.ncols - s.free.len())
}
