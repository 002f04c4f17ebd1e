//! Cyclic quotient singularities 1/r(a,b) and baskets.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

/// A quotient singularity type in canonical form.
///
/// The pair is the lexicographically smallest sorted pair among all unit
/// rescalings λ·(a, b) mod r; isolated types therefore read 1/r(1, b′).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbifoldPoint {
    pub r: i64,
    pub a: i64,
    pub b: i64,
}

impl fmt::Display for OrbifoldPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}({},{})", self.r, self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub isolated: bool,
    pub rigid: bool,
    pub canonical: OrbifoldPoint,
}

fn sorted(x: i64, y: i64) -> (i64, i64) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Units of Z/r.
pub fn units(r: i64) -> impl Iterator<Item = i64> {
    (1..r.max(2)).filter(move |l| l.gcd(&r) == 1)
}

/// Classifies 1/r(a,b): isolated iff r is coprime to a and b; rigid iff
/// d < m where d = gcd(a+b, r) and m = r/d.
pub fn classify(r: i64, a: i64, b: i64) -> Classification {
    assert!(r >= 2, "order must be at least 2");
    let a = a.rem_euclid(r);
    let b = b.rem_euclid(r);
    let isolated = a.gcd(&r) == 1 && b.gcd(&r) == 1;
    let d = (a + b).gcd(&r);
    let m = r / d;
    let rigid = d < m;
    let (ca, cb) = units(r).map(|l| sorted(l * a % r, l * b % r)).min().unwrap();
    Classification { isolated, rigid, canonical: OrbifoldPoint { r, a: ca, b: cb } }
}

/// A type 1/r(a,b) together with its polarization: (a, b) are the local
/// weights read against O(1), kept as sorted residues mod r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolarizedPoint {
    pub r: i64,
    pub a: i64,
    pub b: i64,
}

impl PolarizedPoint {
    pub fn new(r: i64, a: i64, b: i64) -> Self {
        let (a, b) = sorted(a.rem_euclid(r), b.rem_euclid(r));
        Self { r, a, b }
    }

    pub fn classify(&self) -> Classification {
        classify(self.r, self.a, self.b)
    }

    pub fn canonical(&self) -> OrbifoldPoint {
        self.classify().canonical
    }

    pub fn is_isolated(&self) -> bool {
        self.a.gcd(&self.r) == 1 && self.b.gcd(&self.r) == 1
    }

    /// A unit λ with λ·(a, b) equal to the canonical pair up to order.
    pub fn rescaling(&self) -> i64 {
        let c = self.canonical();
        units(self.r)
            .find(|l| sorted(l * self.a % self.r, l * self.b % self.r) == (c.a, c.b))
            .unwrap()
    }
}

impl fmt::Display for PolarizedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}({},{})", self.r, self.a, self.b)
    }
}

/// A multiset of polarized orbifold points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Basket {
    entries: BTreeMap<PolarizedPoint, u32>,
}

impl Basket {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (PolarizedPoint, u32)>>(it: I) -> Self {
        let mut b = Self::new();
        for (p, k) in it {
            b.add(p, k);
        }
        b
    }

    pub fn add(&mut self, p: PolarizedPoint, k: u32) {
        if k > 0 {
            *self.entries.entry(p).or_insert(0) += k;
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PolarizedPoint, u32)> + '_ {
        self.entries.iter().map(|(p, k)| (p, *k))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.entries.values().sum()
    }

    /// The same basket with every entry in canonical (unpolarized) form.
    pub fn canonical(&self) -> BTreeMap<OrbifoldPoint, u32> {
        let mut out = BTreeMap::new();
        for (p, k) in &self.entries {
            *out.entry(p.canonical()).or_insert(0) += k;
        }
        out
    }

    pub fn all_isolated_rigid(&self) -> bool {
        self.entries.keys().all(|p| {
            let c = p.classify();
            c.isolated && c.rigid
        })
    }

    /// Parses `k x 1/r(a,b), …`; an empty string is the empty basket.
    pub fn parse(s: &str) -> Option<Self> {
        let mut b = Self::new();
        let s = s.trim();
        if s.is_empty() || s == "{}" {
            return Some(b);
        }
        for part in s.split(',').collect::<Vec<_>>().chunks(2) {
            // commas separate entries and the two local weights alike
            let joined = part.join(",");
            let (k, rest) = match joined.split_once(" x ") {
                Some((k, rest)) => (k.trim().parse().ok()?, rest.trim()),
                None => (1, joined.trim()),
            };
            let rest = rest.strip_prefix("1/")?;
            let (r, ab) = rest.split_once('(')?;
            let (a, bb) = ab.strip_suffix(')')?.split_once(',')?;
            let r: i64 = r.trim().parse().ok()?;
            if r < 2 {
                return None;
            }
            b.add(PolarizedPoint::new(r, a.trim().parse().ok()?, bb.trim().parse().ok()?), k);
        }
        Some(b)
    }
}

impl fmt::Display for Basket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.entries.iter().map(|(p, k)| format!("{} x {}", k, p)).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_types() {
        let c = classify(3, 1, 1);
        assert!(c.isolated && c.rigid);
        let c = classify(4, 1, 1);
        assert!(c.isolated && !c.rigid);
        let c = classify(9, 1, 2);
        assert!(c.isolated && !c.rigid);
    }

    #[test]
    fn canonical_prefers_small_second_entry() {
        // 1/7(1,3) and 1/7(1,5) are the same singularity (5 = 3⁻¹ mod 7)
        assert_eq!(classify(7, 1, 5).canonical, OrbifoldPoint { r: 7, a: 1, b: 3 });
        assert_eq!(classify(7, 2, 6).canonical, OrbifoldPoint { r: 7, a: 1, b: 3 });
    }

    #[test]
    fn rescaling_reaches_canonical() {
        let p = PolarizedPoint::new(11, 4, 9);
        let l = p.rescaling();
        let c = p.canonical();
        assert_eq!(PolarizedPoint::new(11, l * 4, l * 9), PolarizedPoint::new(11, c.a, c.b));
    }

    #[test]
    fn basket_roundtrip() {
        let b = Basket::from_entries([(PolarizedPoint::new(3, 1, 1), 4), (PolarizedPoint::new(7, 8, 3), 2)]);
        let s = b.to_string();
        assert_eq!(s, "4 x 1/3(1,1), 2 x 1/7(1,3)");
        assert_eq!(Basket::parse(&s), Some(b));
        assert_eq!(Basket::parse("{}"), Some(Basket::new()));
    }
}
