//! The weighted P¹×P¹×P¹ format: parameter vector, weight cube, Hilbert
//! series and the nine binomial equations.

use std::fmt;

use crate::error::{Error, Result};
use crate::series::{q, CyclotomicProduct, HilbertSeries, LaurentPoly};

/// A vertex X_ijk of the cube, with i, j, k ∈ {1, 2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub i: u8,
    pub j: u8,
    pub k: u8,
}

impl Vertex {
    pub fn new(i: u8, j: u8, k: u8) -> Self {
        assert!((1..=2).contains(&i) && (1..=2).contains(&j) && (1..=2).contains(&k));
        Self { i, j, k }
    }

    /// Position 0..8 in the order X111, X112, X121, …, X222.
    pub fn index(self) -> usize {
        4 * (self.i as usize - 1) + 2 * (self.j as usize - 1) + (self.k as usize - 1)
    }

    pub fn from_index(idx: usize) -> Self {
        Self::new((idx / 4) as u8 + 1, (idx / 2 % 2) as u8 + 1, (idx % 2) as u8 + 1)
    }

    pub fn all() -> impl Iterator<Item = Vertex> {
        (0..8).map(Vertex::from_index)
    }

    pub fn antipode(self) -> Self {
        Self::new(3 - self.i, 3 - self.j, 3 - self.k)
    }

    pub fn label(self) -> String {
        format!("X{}{}{}", self.i, self.j, self.k)
    }

    /// Parses `X111`-style labels.
    pub fn parse(s: &str) -> Option<Self> {
        let b = s.trim().as_bytes();
        if b.len() != 4 || b[0] != b'X' {
            return None;
        }
        let d = |c: u8| match c {
            b'1' => Some(1),
            b'2' => Some(2),
            _ => None,
        };
        Some(Self::new(d(b[1])?, d(b[2])?, d(b[3])?))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}{}{}", self.i, self.j, self.k)
    }
}

/// The format parameter μ = (a₁, a₂, b₁, b₂, c₁, c₂).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MuVector {
    pub a: [i64; 2],
    pub b: [i64; 2],
    pub c: [i64; 2],
}

impl MuVector {
    pub fn new(a1: i64, a2: i64, b1: i64, b2: i64, c1: i64, c2: i64) -> Self {
        Self { a: [a1, a2], b: [b1, b2], c: [c1, c2] }
    }

    pub fn as_array(&self) -> [i64; 6] {
        [self.a[0], self.a[1], self.b[0], self.b[1], self.c[0], self.c[1]]
    }

    /// Socle degree l = Σ entries.
    pub fn socle(&self) -> i64 {
        self.as_array().iter().sum()
    }

    pub fn weight(&self, v: Vertex) -> i64 {
        self.a[v.i as usize - 1] + self.b[v.j as usize - 1] + self.c[v.k as usize - 1]
    }
}

impl fmt::Display for MuVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, b1, b2, c1, c2] = self.as_array();
        write!(f, "({a1},{a2},{b1},{b2},{c1},{c2})")
    }
}

/// Eight labelled vertex weights w_ijk = a_i + b_j + c_k and the socle degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightCube {
    weights: [i64; 8],
    socle: i64,
}

impl WeightCube {
    pub fn weight(&self, v: Vertex) -> i64 {
        self.weights[v.index()]
    }

    /// Weights in vertex-index order.
    pub fn weights(&self) -> [i64; 8] {
        self.weights
    }

    pub fn socle(&self) -> i64 {
        self.socle
    }

    /// A parameter vector with a₁ = b₁ = 0 producing this cube.
    pub fn mu(&self) -> MuVector {
        let w = |i, j, k| self.weight(Vertex::new(i, j, k));
        let c1 = w(1, 1, 1);
        MuVector::new(0, w(2, 1, 1) - c1, 0, w(1, 2, 1) - c1, c1, w(1, 1, 2))
    }

    /// Normal form of μ under the cube symmetries: a₁ = b₁ = 0, c₁ ≥ 1, and
    /// the three axis differences nonnegative and ascending.
    pub fn canonical_mu(&self) -> MuVector {
        let mu = self.mu();
        let mut d = [(mu.a[1] - mu.a[0]).abs(), (mu.b[1] - mu.b[0]).abs(), (mu.c[1] - mu.c[0]).abs()];
        d.sort_unstable();
        let min = *self.weights.iter().min().unwrap();
        MuVector::new(0, d[0], 0, d[1], min, min + d[2])
    }

    /// Weight multiset, sorted.
    pub fn sorted_weights(&self) -> Vec<i64> {
        let mut w = self.weights.to_vec();
        w.sort_unstable();
        w
    }
}

/// Builds the cube of μ.
pub fn cube_weights(mu: &MuVector) -> Result<WeightCube> {
    let mut weights = [0; 8];
    for v in Vertex::all() {
        let w = mu.weight(v);
        if w <= 0 {
            return Err(Error::NonpositiveVertexWeight { vertex: v.label(), weight: w });
        }
        weights[v.index()] = w;
    }
    Ok(WeightCube { weights, socle: mu.socle() })
}

/// Accepts eight weights in vertex-index order when they form an additive cube.
pub fn cube_from_weights(w: [i64; 8]) -> Result<WeightCube> {
    let at = |i: u8, j: u8, k: u8| w[Vertex::new(i, j, k).index()];
    let axes: [(char, fn(u8, u8) -> (Vertex, Vertex)); 3] = [
        ('a', |x, y| (Vertex::new(1, x, y), Vertex::new(2, x, y))),
        ('b', |x, y| (Vertex::new(x, 1, y), Vertex::new(x, 2, y))),
        ('c', |x, y| (Vertex::new(x, y, 1), Vertex::new(x, y, 2))),
    ];
    for (axis, edge) in axes {
        let diffs: Vec<i64> = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .iter()
            .map(|&(x, y)| {
                let (lo, hi) = edge(x, y);
                w[hi.index()] - w[lo.index()]
            })
            .collect();
        if diffs.iter().any(|&d| d != diffs[0]) {
            return Err(Error::NotAdditiveCube { axis });
        }
    }
    let c1 = at(1, 1, 1);
    let mu = MuVector::new(0, at(2, 1, 1) - c1, 0, at(1, 2, 1) - c1, c1, at(1, 1, 2));
    cube_weights(&mu)
}

/// The Gorenstein Hilbert series of the format:
/// (1 − Q₁tˡ + Q₂tˡ − Q₁t²ˡ + t³ˡ) / ∏(1 − t^{w_ijk}).
pub fn hilbert_series_wp(mu: &MuVector) -> Result<HilbertSeries> {
    let cube = cube_weights(mu)?;
    let l = mu.socle();
    let mut q1 = LaurentPoly::monomial(0, q(3));
    for (x, y) in [(mu.a[0], mu.a[1]), (mu.b[0], mu.b[1]), (mu.c[0], mu.c[1])] {
        q1.add_term(x - y, q(1));
        q1.add_term(y - x, q(1));
    }
    let mut q2 = LaurentPoly::zero();
    for v in Vertex::all() {
        q2.add_term(cube.weight(v), q(2));
    }
    let mut num = LaurentPoly::one();
    num.add_term(3 * l, q(1));
    num = &num - &q1.shift(l);
    num = &num + &q2.shift(l);
    num = &num - &q1.shift(2 * l);
    if let Some(lo) = num.min_exp() {
        if lo < 0 {
            return Err(Error::FormulaInconsistency(lo));
        }
    }
    let den = CyclotomicProduct::new(cube.weights.to_vec())?;
    Ok(HilbertSeries::new(num, den))
}

/// A binomial X·Y − Z·W in the vertex variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CubeEquation {
    pub lhs: (Vertex, Vertex),
    pub rhs: (Vertex, Vertex),
    pub degree: i64,
}

impl fmt::Display for CubeEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{} - {}*{}", self.lhs.0, self.lhs.1, self.rhs.0, self.rhs.1)
    }
}

/// Six face minors followed by P₁ − P₂, P₁ − P₃, P₁ − P₄ for the space diagonals
/// P₁ = X111·X222, P₂ = X112·X221, P₃ = X121·X212, P₄ = X211·X122.
pub fn cube_equations(cube: &WeightCube) -> [CubeEquation; 9] {
    let v = Vertex::new;
    let pairs = [
        ((v(1, 1, 1), v(1, 2, 2)), (v(1, 1, 2), v(1, 2, 1))),
        ((v(2, 1, 1), v(2, 2, 2)), (v(2, 1, 2), v(2, 2, 1))),
        ((v(1, 1, 1), v(2, 1, 2)), (v(1, 1, 2), v(2, 1, 1))),
        ((v(1, 2, 1), v(2, 2, 2)), (v(1, 2, 2), v(2, 2, 1))),
        ((v(1, 1, 1), v(2, 2, 1)), (v(1, 2, 1), v(2, 1, 1))),
        ((v(1, 1, 2), v(2, 2, 2)), (v(1, 2, 2), v(2, 1, 2))),
        ((v(1, 1, 1), v(2, 2, 2)), (v(1, 1, 2), v(2, 2, 1))),
        ((v(1, 1, 1), v(2, 2, 2)), (v(1, 2, 1), v(2, 1, 2))),
        ((v(1, 1, 1), v(2, 2, 2)), (v(2, 1, 1), v(1, 2, 2))),
    ];
    pairs.map(|(lhs, rhs)| CubeEquation {
        lhs,
        rhs,
        degree: cube.weight(lhs.0) + cube.weight(lhs.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_roundtrip() {
        for idx in 0..8 {
            let v = Vertex::from_index(idx);
            assert_eq!(v.index(), idx);
            assert_eq!(Vertex::parse(&v.label()), Some(v));
        }
    }

    #[test]
    fn example_cube() {
        let c = cube_weights(&MuVector::new(0, 1, 0, 1, 1, 2)).unwrap();
        assert_eq!(c.sorted_weights(), vec![1, 2, 2, 2, 3, 3, 3, 4]);
        assert_eq!(c.socle(), 5);
    }

    #[test]
    fn zero_mu_rejected() {
        let e = cube_weights(&MuVector::new(0, 0, 0, 0, 0, 0)).unwrap_err();
        assert!(e.to_string().contains("nonpositive vertex weight"));
    }

    #[test]
    fn reconstruct_from_weights() {
        let r = 4;
        let w = [2, r + 1, r + 1, 2 * r, r + 1, 2 * r, 2 * r, 3 * r - 1];
        let c = cube_from_weights(w).unwrap();
        assert_eq!(c.mu(), MuVector::new(0, 3, 0, 3, 2, 5));
        let (s, u, z) = (r + 1, r + 3, 2 * r - 1);
        let bad = [2, s, s, u, s, u, u, z];
        assert!(matches!(cube_from_weights(bad), Err(Error::NotAdditiveCube { .. })));
    }

    #[test]
    fn canonical_mu_flips_axes() {
        let c = cube_weights(&MuVector::new(3, 0, 0, 1, 2, 4)).unwrap();
        let m = c.canonical_mu();
        assert_eq!(m, MuVector::new(0, 1, 0, 2, 2, 5));
        assert_eq!(cube_weights(&m).unwrap().sorted_weights(), c.sorted_weights());
    }
}
