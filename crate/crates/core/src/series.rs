//! Exact sparse Laurent polynomials and rational functions with
//! denominators of the form ∏(1 − tʷ).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational.
pub type Q = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `num/den`.
pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Renders a rational as `p/q`, or `p` when integral.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            Some(Q::new(a, b))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// A finite sum Σ cₑ tᵉ with integer exponents of either sign.
///
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Q>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Q::one())
    }

    pub fn monomial(exp: i64, coeff: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff);
        p
    }

    /// `1 − tʷ`.
    pub fn one_minus(w: i64) -> Self {
        let mut p = Self::one();
        p.add_term(w, -Q::one());
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (i64, Q)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Builds a polynomial from integer coefficients, constant term first.
    pub fn from_coeffs(coeffs: &[Q]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, c)| (i as i64, c.clone())))
    }

    pub fn add_term(&mut self, exp: i64, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Q)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, exp: i64) -> Q {
        self.terms.get(&exp).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }

    /// Multiplies by tᵏ.
    pub fn shift(&self, k: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, x)| (e + k, x.clone())).collect() }
    }

    /// tⁿ·p(1/t).
    pub fn reverse(&self, n: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, x)| (n - e, x.clone())).collect() }
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let p = if *e >= 0 {
                num_traits::pow(x.clone(), *e as usize)
            } else {
                num_traits::pow(x.recip(), (-*e) as usize)
            };
            acc += c * p;
        }
        acc
    }

    pub fn eval_at_one(&self) -> Q {
        self.terms.values().fold(Q::zero(), |acc, c| acc + c)
    }

    /// Exact division; fails unless the remainder vanishes.
    pub fn div_exact(&self, divisor: &LaurentPoly) -> Result<LaurentPoly> {
        let (dmin, dmax) = match (divisor.min_exp(), divisor.max_exp()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InexactDivision),
        };
        let d = divisor.shift(-dmin);
        let dlen = dmax - dmin;
        let d0 = d.coeff(0);
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero();
        // eliminate from the low end; d has nonzero constant term
        while let Some(lo) = rem.min_exp() {
            let hi = rem.max_exp().unwrap();
            if hi - lo < dlen {
                return Err(Error::InexactDivision);
            }
            let c = rem.coeff(lo) / &d0;
            for (e, x) in d.terms() {
                rem.add_term(lo + e, -(x * &c));
            }
            quot.add_term(lo - dmin, c);
        }
        Ok(quot)
    }

    /// Dense coefficients for exponents `0..len`, assuming no negative exponents.
    pub fn dense(&self, len: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); len];
        for (e, c) in &self.terms {
            if *e >= 0 && (*e as usize) < len {
                out[*e as usize] = c.clone();
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = mag.is_one();
            match (*e, unit) {
                (0, _) => write!(f, "{}", fmt_q(&mag))?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{}t", fmt_q(&mag))?,
                (_, true) => write!(f, "t^{}", e)?,
                (_, false) => write!(f, "{}t^{}", fmt_q(&mag), e)?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-Q::one())
    }
}

/// The product ∏(1 − tʷ) over a multiset of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CyclotomicProduct {
    factors: Vec<i64>,
}

impl CyclotomicProduct {
    pub fn new(mut factors: Vec<i64>) -> Result<Self> {
        if let Some(&w) = factors.iter().find(|&&w| w < 1) {
            return Err(Error::BadFactor(w));
        }
        factors.sort_unstable();
        Ok(Self { factors })
    }

    /// Sorted factor list.
    pub fn factors(&self) -> &[i64] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.factors.iter().sum()
    }

    /// The expanded polynomial.
    pub fn expanded(&self) -> LaurentPoly {
        self.factors
            .iter()
            .fold(LaurentPoly::one(), |acc, &w| &acc * &LaurentPoly::one_minus(w))
    }

    fn insert(&mut self, w: i64) {
        let pos = self.factors.partition_point(|&x| x < w);
        self.factors.insert(pos, w);
    }

    fn remove(&mut self, w: i64) -> bool {
        match self.factors.binary_search(&w) {
            Ok(pos) => {
                self.factors.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

/// A rational function `numerator / ∏(1 − tʷ)` read as a power series in t.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSeries {
    pub numerator: LaurentPoly,
    pub denominator: CyclotomicProduct,
}

impl HilbertSeries {
    pub fn new(numerator: LaurentPoly, denominator: CyclotomicProduct) -> Self {
        Self { numerator, denominator }
    }

    /// `1/∏(1 − tʷ)`.
    pub fn weighted_projective(weights: &[i64]) -> Result<Self> {
        Ok(Self::new(LaurentPoly::one(), CyclotomicProduct::new(weights.to_vec())?))
    }

    /// Coefficients c₀..c_order of the power-series expansion.
    pub fn expand(&self, order: usize) -> Result<Vec<Q>> {
        if let Some(lo) = self.numerator.min_exp() {
            if lo < 0 {
                return Err(Error::NotAPowerSeries(lo));
            }
        }
        let mut c = self.numerator.dense(order + 1);
        for &w in self.denominator.factors() {
            let w = w as usize;
            for n in w..=order {
                let prev = c[n - w].clone();
                c[n] += prev;
            }
        }
        Ok(c)
    }

    /// Value of (1 − t)ᵏ·series at t = 1.
    pub fn residue_at_one(&self, k: usize) -> Result<Q> {
        let m = self.denominator.len();
        let err = Error::PoleOrderMismatch { expected: k };
        if m < k {
            return Err(err);
        }
        // (1 − tʷ) = (1 − t)(1 + t + … + t^{w−1}); the second factor is w at t = 1
        let mut num = self.numerator.clone();
        let one_minus_t = LaurentPoly::one_minus(1);
        for _ in 0..(m - k) {
            num = num.div_exact(&one_minus_t).map_err(|_| err.clone())?;
        }
        let v = num.eval_at_one();
        if v.is_zero() {
            return Err(err);
        }
        let prod: i64 = self.denominator.factors().iter().product();
        Ok(v / q(prod))
    }

    /// Multiplies by (1 − t^d), cancelling a denominator factor when present.
    pub fn mul_one_minus(&self, d: i64) -> Self {
        let mut out = self.clone();
        if !out.denominator.remove(d) {
            out.numerator = &out.numerator * &LaurentPoly::one_minus(d);
        }
        out
    }

    /// Divides by (1 − t^d).
    pub fn div_one_minus(&self, d: i64) -> Result<Self> {
        if d < 1 {
            return Err(Error::BadFactor(d));
        }
        let mut out = self.clone();
        out.denominator.insert(d);
        Ok(out)
    }

    /// Numerator rewritten over the denominator `∏(1 − tʷ)` for `target`;
    /// fails unless the result is a polynomial.
    pub fn numerator_over(&self, target: &CyclotomicProduct) -> Result<LaurentPoly> {
        let mut rest = target.clone();
        let mut extra = Vec::new();
        for &w in self.denominator.factors() {
            if !rest.remove(w) {
                extra.push(w);
            }
        }
        let mut num = &self.numerator * &rest.expanded();
        for w in extra {
            num = num.div_exact(&LaurentPoly::one_minus(w))?;
        }
        Ok(num)
    }
}

impl fmt::Display for HilbertSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ", self.numerator)?;
        if self.denominator.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .denominator
            .factors()
            .iter()
            .map(|w| if *w == 1 { "(1 - t)".to_string() } else { format!("(1 - t^{})", w) })
            .collect();
        write!(f, "{}", parts.join(""))
    }
}

/// The d-th cyclotomic polynomial Φ_d.
pub fn cyclotomic(d: i64) -> LaurentPoly {
    // tᵈ − 1 = ∏_{e | d} Φ_e
    let mut p = &LaurentPoly::monomial(d, Q::one()) - &LaurentPoly::one();
    for e in 1..d {
        if d % e == 0 {
            p = p.div_exact(&cyclotomic(e)).expect("cyclotomic factor");
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn expand_weights_112() {
        let s = HilbertSeries::weighted_projective(&[1, 1, 2]).unwrap();
        assert_eq!(s.expand(3).unwrap(), qs(&[1, 2, 4, 6]));
    }

    #[test]
    fn expand_cancelled() {
        let s = HilbertSeries::new(LaurentPoly::one_minus(1), CyclotomicProduct::new(vec![1]).unwrap());
        assert_eq!(s.expand(2).unwrap(), qs(&[1, 0, 0]));
    }

    #[test]
    fn negative_exponent_rejected() {
        let s = HilbertSeries::new(LaurentPoly::monomial(-1, q(1)), CyclotomicProduct::new(vec![1]).unwrap());
        assert_eq!(s.expand(2), Err(Error::NotAPowerSeries(-1)));
    }

    #[test]
    fn residues() {
        let s = HilbertSeries::weighted_projective(&[1, 1, 2]).unwrap();
        assert_eq!(s.residue_at_one(3).unwrap(), qr(1, 2));
        let s = HilbertSeries::weighted_projective(&[1]).unwrap();
        assert_eq!(s.residue_at_one(1).unwrap(), q(1));
        assert!(s.residue_at_one(2).is_err());
        let s = HilbertSeries::new(LaurentPoly::one_minus(1), CyclotomicProduct::new(vec![1, 1]).unwrap());
        assert!(s.residue_at_one(2).is_err());
    }

    #[test]
    fn division() {
        let a = LaurentPoly::one_minus(2);
        let b = LaurentPoly::one_minus(1);
        let quot = a.div_exact(&b).unwrap();
        assert_eq!(quot, LaurentPoly::from_coeffs(&qs(&[1, 1])));
        assert_eq!(LaurentPoly::one_minus(3).div_exact(&a), Err(Error::InexactDivision));
    }

    #[test]
    fn palindrome() {
        let n = LaurentPoly::from_coeffs(&qs(&[1, 0, -9, 16, -9, 0, 1]));
        assert_eq!(n.reverse(6), n);
    }

    #[test]
    fn display() {
        let n = LaurentPoly::from_coeffs(&qs(&[1, 0, -9, 16, -9, 0, 1]));
        assert_eq!(n.to_string(), "1 - 9t^2 + 16t^3 - 9t^4 + t^6");
        assert_eq!(LaurentPoly::monomial(1, qr(-1, 4)).to_string(), "-1/4t");
    }

    #[test]
    fn cyclotomics() {
        assert_eq!(cyclotomic(1), &LaurentPoly::monomial(1, q(1)) - &LaurentPoly::one());
        assert_eq!(cyclotomic(6), LaurentPoly::from_coeffs(&qs(&[1, -1, 1])));
        assert_eq!(cyclotomic(4), LaurentPoly::from_coeffs(&qs(&[1, 0, 1])));
    }

    #[test]
    fn laurent_division() {
        let p = &LaurentPoly::monomial(-2, q(1)) * &LaurentPoly::one_minus(3);
        let quot = p.div_exact(&LaurentPoly::one_minus(1)).unwrap();
        assert_eq!(quot, LaurentPoly::from_terms([(-2, q(1)), (-1, q(1)), (0, q(1))]));
    }
}
