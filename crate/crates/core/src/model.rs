//! Model configurations: infinite series of families whose weights are
//! integer polynomials in a parameter r = α·n + β.
//!
//! A config is a list of `key = value` lines; `#` starts a comment.
//!
//! ```text
//! name = MI4
//! r = 3n + 8
//! n_min = 1
//! mu = 0, 2, 0, r - 3, 1, r
//! sections = r@X221
//! ambient = 1, 3, r - 2, r, r + 2, 2r - 3, 2r - 1
//! minus_ksq = 2r^3(2r^2 + 4r - 7) / (3(r - 2)(r + 2)(2r - 3)(2r - 1))
//! h0 = 4
//! basket = 1 x 1/(3)(1,1); 1 x 1/(r - 2)(1,1); 1 x 1/(r + 2)(3, r - 3)
//! ```
//!
//! `cube = w111, w112, w121, w122, w211, w212, w221, w222` may replace `mu`.

use std::collections::BTreeMap;
use std::fmt;

use crate::construction::{BuildRecipe, Section};
use crate::cube::{cube_from_weights, cube_weights, MuVector, Vertex};
use crate::error::{Error, Result};
use crate::orbifold::{Basket, PolarizedPoint};
use crate::series::{fmt_q, q, Q};

use num_traits::{One, Signed, ToPrimitive, Zero};

/// A polynomial in r with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RPoly {
    coeffs: BTreeMap<u32, Q>,
}

impl RPoly {
    pub fn constant(c: i64) -> Self {
        let mut p = Self::default();
        p.add(0, q(c));
        p
    }

    pub fn r() -> Self {
        let mut p = Self::default();
        p.add(1, q(1));
        p
    }

    fn add(&mut self, deg: u32, c: Q) {
        let e = self.coeffs.entry(deg).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&deg);
        }
    }

    fn plus(&self, o: &Self, sign: i64) -> Self {
        let mut out = self.clone();
        for (d, c) in &o.coeffs {
            out.add(*d, c * q(sign));
        }
        out
    }

    fn times(&self, o: &Self) -> Self {
        let mut out = Self::default();
        for (d1, c1) in &self.coeffs {
            for (d2, c2) in &o.coeffs {
                out.add(d1 + d2, c1 * c2);
            }
        }
        out
    }

    fn as_constant(&self) -> Option<Q> {
        match self.coeffs.len() {
            0 => Some(Q::zero()),
            1 => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn eval(&self, r: i64) -> Q {
        let r = q(r);
        self.coeffs.iter().map(|(d, c)| c * num_traits::pow(r.clone(), *d as usize)).fold(Q::zero(), |a, b| a + b)
    }

    /// The value at r when it is an integer that fits in i64.
    pub fn eval_int(&self, r: i64) -> Option<i64> {
        let v = self.eval(r);
        if v.is_integer() {
            v.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        Self::from_rational(RRational::parse(s)?)
    }

    fn from_rational(f: RRational) -> std::result::Result<Self, String> {
        match f.den.as_constant() {
            Some(c) if !c.is_zero() => Ok(f.num.times(&Self::monomial(0, c.recip()))),
            _ => Err("expected a polynomial in r".into()),
        }
    }

    fn monomial(deg: u32, c: Q) -> Self {
        let mut p = Self::default();
        p.add(deg, c);
        p
    }
}

impl fmt::Display for RPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (d, c)) in self.coeffs.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            // fractional coefficients are parenthesized so juxtaposition reads back
            let m = if mag.is_integer() { fmt_q(&mag) } else { format!("({})", fmt_q(&mag)) };
            match (*d, mag.is_one()) {
                (0, _) => write!(f, "{}", m)?,
                (1, true) => write!(f, "r")?,
                (1, false) => write!(f, "{}r", m)?,
                (_, true) => write!(f, "r^{}", d)?,
                _ => write!(f, "{}r^{}", m, d)?,
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

type Parsed = std::result::Result<RRational, String>;

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Self { s: s.as_bytes(), pos: 0 }
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn finish(&mut self) -> std::result::Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(format!("unexpected '{}' at column {}", c as char, self.pos + 1)),
        }
    }

    fn number(&mut self) -> std::result::Result<i64, String> {
        self.peek();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| format!("expected a number at column {}", start + 1))
    }

    fn expr(&mut self) -> Parsed {
        let mut acc = if self.eat(b'-') { self.term()?.neg() } else { self.term()? };
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.add(&self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    // factors joined by `*`, `/` or juxtaposition, as in 2r^3(r - 1)
    fn term(&mut self) -> Parsed {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.power()?);
            } else if self.eat(b'/') {
                acc = acc.div(&self.power()?)?;
            } else if matches!(self.peek(), Some(b'(' | b'r' | b'0'..=b'9')) {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Parsed {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.number()?;
            let mut out = RRational::from(RPoly::constant(1));
            for _ in 0..e {
                out = out.mul(&base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Parsed {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(format!("expected ')' at column {}", self.pos + 1));
                }
                Ok(v)
            }
            Some(b'r') => {
                self.pos += 1;
                Ok(RPoly::r().into())
            }
            Some(b'0'..=b'9') => Ok(RPoly::constant(self.number()?).into()),
            Some(c) => Err(format!("unexpected '{}' at column {}", c as char, self.pos + 1)),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// A ratio of polynomials in r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RRational {
    pub num: RPoly,
    pub den: RPoly,
}

impl From<RPoly> for RRational {
    fn from(p: RPoly) -> Self {
        Self { num: p, den: RPoly::constant(1) }
    }
}

impl RRational {
    fn neg(&self) -> Self {
        Self { num: self.num.times(&RPoly::constant(-1)), den: self.den.clone() }
    }

    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self { num: self.num.plus(&o.num, 1), den: self.den.clone() };
        }
        Self { num: self.num.times(&o.den).plus(&o.num.times(&self.den), 1), den: self.den.times(&o.den) }
    }

    fn mul(&self, o: &Self) -> Self {
        Self { num: self.num.times(&o.num), den: self.den.times(&o.den) }
    }

    fn div(&self, o: &Self) -> Parsed {
        if o.num.coeffs.is_empty() {
            return Err("division by zero".into());
        }
        Ok(Self { num: self.num.times(&o.den), den: self.den.times(&o.num) })
    }

    pub fn eval(&self, r: i64) -> Option<Q> {
        let d = self.den.eval(r);
        (!d.is_zero()).then(|| self.num.eval(r) / d)
    }

    pub fn parse(s: &str) -> Parsed {
        let mut p = Parser::new(s);
        let v = p.expr()?;
        p.finish()?;
        Ok(v)
    }
}

impl fmt::Display for RRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// One basket entry `k x 1/(order)(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasketTerm {
    pub mult: u32,
    pub order: RPoly,
    pub a: RPoly,
    pub b: RPoly,
}

impl BasketTerm {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (mult, rest) = match s.split_once(" x ") {
            Some((k, rest)) => (k.trim().parse().map_err(|_| format!("bad multiplicity '{}'", k.trim()))?, rest),
            None => (1, s),
        };
        let rest = rest.trim().strip_prefix("1/").ok_or("expected '1/'")?;
        let mut p = Parser::new(rest);
        let poly = RPoly::from_rational;
        let order = poly(p.atom()?)?;
        if !p.eat(b'(') {
            return Err("expected '(' before local weights".into());
        }
        let a = poly(p.expr()?)?;
        if !p.eat(b',') {
            return Err("expected ',' between local weights".into());
        }
        let b = poly(p.expr()?)?;
        if !p.eat(b')') {
            return Err("expected ')' after local weights".into());
        }
        p.finish()?;
        Ok(Self { mult, order, a, b })
    }
}

impl fmt::Display for BasketTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x 1/({})({}, {})", self.mult, self.order, self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormatSpec {
    Mu([RPoly; 6]),
    /// Vertex weights in index order X111, X112, …, X222.
    Cube([RPoly; 8]),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionSpec {
    pub degree: RPoly,
    /// None for a generic (non-quasilinear) section.
    pub vertex: Option<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub name: String,
    /// r = alpha·n + beta.
    pub alpha: i64,
    pub beta: i64,
    pub n_min: i64,
    pub format: FormatSpec,
    pub cones: Vec<RPoly>,
    pub sections: Vec<SectionSpec>,
    pub ambient: Option<Vec<RPoly>>,
    pub minus_ksq: Option<RRational>,
    pub h0: Option<u64>,
    pub basket: Option<Vec<BasketTerm>>,
}

fn parse_list(v: &str) -> std::result::Result<Vec<RPoly>, String> {
    if v.trim().is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(RPoly::parse).collect()
}

fn join<T: fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn parse_law(v: &str) -> std::result::Result<(i64, i64), String> {
    let compact: String = v.chars().filter(|c| !c.is_whitespace()).collect();
    let (a, b) = compact.split_once("n+").ok_or("expected r = αn + β")?;
    let a = if a.is_empty() { 1 } else { a.parse().map_err(|_| format!("bad coefficient '{}'", a))? };
    let b = b.parse().map_err(|_| format!("bad offset '{}'", b))?;
    if a < 1 || b < 0 {
        return Err("r = αn + β needs α ≥ 1 and β ≥ 0".into());
    }
    Ok((a, b))
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected 'key = value'".into() })?;
            if fields.insert(k.trim(), (i + 1, v.trim())).is_some() {
                return Err(Error::Parse { line: i + 1, msg: format!("duplicate key '{}'", k.trim()) });
            }
        }
        let err = |line: usize, key: &str, msg: String| Error::Parse { line, msg: format!("{}: {}", key, msg) };
        let get = |key: &str| fields.get(key).copied();
        let need = |key: &str| get(key).ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key '{}'", key) });

        let known = ["name", "r", "n_min", "mu", "cube", "cones", "sections", "ambient", "minus_ksq", "h0", "basket"];
        if let Some((k, (line, _))) = fields.iter().find(|(k, _)| !known.contains(k)) {
            return Err(Error::Parse { line: *line, msg: format!("unknown key '{}'", k) });
        }

        let name = need("name")?.1.to_string();
        let (line, law) = need("r")?;
        let (alpha, beta) = parse_law(law).map_err(|m| err(line, "r", m))?;
        let n_min = match get("n_min") {
            Some((line, v)) => v.parse().map_err(|_| err(line, "n_min", format!("bad integer '{}'", v)))?,
            None => 0,
        };
        let format = match (get("mu"), get("cube")) {
            (Some((line, v)), None) => {
                let xs = parse_list(v).map_err(|m| err(line, "mu", m))?;
                FormatSpec::Mu(xs.try_into().map_err(|_| err(line, "mu", "expected 6 entries".into()))?)
            }
            (None, Some((line, v))) => {
                let xs = parse_list(v).map_err(|m| err(line, "cube", m))?;
                FormatSpec::Cube(xs.try_into().map_err(|_| err(line, "cube", "expected 8 entries".into()))?)
            }
            (Some((line, _)), Some(_)) => return Err(err(line, "mu", "give either mu or cube, not both".into())),
            (None, None) => return Err(Error::Parse { line: 0, msg: "missing key 'mu' or 'cube'".into() }),
        };
        let cones = match get("cones") {
            Some((line, v)) => parse_list(v).map_err(|m| err(line, "cones", m))?,
            None => vec![],
        };
        let mut sections = Vec::new();
        if let Some((line, v)) = get("sections") {
            for part in v.split(',').filter(|p| !p.trim().is_empty()) {
                let (d, t) = part.split_once('@').ok_or_else(|| err(line, "sections", "expected degree@vertex".into()))?;
                let degree = RPoly::parse(d).map_err(|m| err(line, "sections", m))?;
                let vertex = match t.trim() {
                    "generic" => None,
                    t => Some(Vertex::parse(t).ok_or_else(|| err(line, "sections", format!("bad vertex '{}'", t)))?),
                };
                sections.push(SectionSpec { degree, vertex });
            }
        }
        let ambient = match get("ambient") {
            Some((line, v)) => Some(parse_list(v).map_err(|m| err(line, "ambient", m))?),
            None => None,
        };
        let minus_ksq = match get("minus_ksq") {
            Some((line, v)) => Some(RRational::parse(v).map_err(|m| err(line, "minus_ksq", m))?),
            None => None,
        };
        let h0 = match get("h0") {
            Some((line, v)) => Some(v.parse().map_err(|_| err(line, "h0", format!("bad integer '{}'", v)))?),
            None => None,
        };
        let basket = match get("basket") {
            Some((line, v)) => Some(
                v.split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(BasketTerm::parse)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|m| err(line, "basket", m))?,
            ),
            None => None,
        };
        Ok(Self { name, alpha, beta, n_min, format, cones, sections, ambient, minus_ksq, h0, basket })
    }

    /// Serializes to the config format; `parse` inverts it.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name = {}\n", self.name));
        out.push_str(&format!("r = {}n + {}\n", self.alpha, self.beta));
        out.push_str(&format!("n_min = {}\n", self.n_min));
        match &self.format {
            FormatSpec::Mu(m) => out.push_str(&format!("mu = {}\n", join(m, ", "))),
            FormatSpec::Cube(c) => out.push_str(&format!("cube = {}\n", join(c, ", "))),
        }
        if !self.cones.is_empty() {
            out.push_str(&format!("cones = {}\n", join(&self.cones, ", ")));
        }
        if !self.sections.is_empty() {
            let parts: Vec<String> = self
                .sections
                .iter()
                .map(|s| match s.vertex {
                    Some(v) => format!("{}@{}", s.degree, v),
                    None => format!("{}@generic", s.degree),
                })
                .collect();
            out.push_str(&format!("sections = {}\n", parts.join(", ")));
        }
        if let Some(a) = &self.ambient {
            out.push_str(&format!("ambient = {}\n", join(a, ", ")));
        }
        if let Some(k) = &self.minus_ksq {
            out.push_str(&format!("minus_ksq = {}\n", k));
        }
        if let Some(h) = self.h0 {
            out.push_str(&format!("h0 = {}\n", h));
        }
        if let Some(b) = &self.basket {
            out.push_str(&format!("basket = {}\n", join(b, "; ")));
        }
        out
    }

    pub fn r_of(&self, n: i64) -> i64 {
        self.alpha * n + self.beta
    }

    fn value(&self, p: &RPoly, n: i64, what: &str) -> Result<i64> {
        p.eval_int(self.r_of(n)).ok_or_else(|| Error::ModelInstantiation {
            n,
            detail: format!("{} = {} is not an integer at r = {}", what, fmt_q(&p.eval(self.r_of(n))), self.r_of(n)),
        })
    }

    /// The build recipe at parameter value n.
    pub fn instantiate(&self, n: i64) -> Result<BuildRecipe> {
        let bad = |detail: String| Error::ModelInstantiation { n, detail };
        let cube = match &self.format {
            FormatSpec::Mu(m) => {
                let v = m.iter().map(|p| self.value(p, n, "mu entry")).collect::<Result<Vec<_>>>()?;
                cube_weights(&MuVector::new(v[0], v[1], v[2], v[3], v[4], v[5])).map_err(|e| bad(e.to_string()))?
            }
            FormatSpec::Cube(c) => {
                let w = c.iter().map(|p| self.value(p, n, "cube weight")).collect::<Result<Vec<_>>>()?;
                cube_from_weights(w.try_into().unwrap()).map_err(|e| bad(e.to_string()))?
            }
        };
        let mut cones = Vec::new();
        for c in &self.cones {
            let w = self.value(c, n, "cone weight")?;
            if w < 1 {
                return Err(bad(format!("cone weight {} is not positive", w)));
            }
            cones.push(w);
        }
        let mut sections = Vec::new();
        for s in &self.sections {
            let d = self.value(&s.degree, n, "section degree")?;
            sections.push(match s.vertex {
                Some(v) => Section::at(d, v),
                None => Section::generic(d),
            });
        }
        Ok(BuildRecipe::new(cube, cones, sections))
    }

    pub fn expected_ambient(&self, n: i64) -> Result<Option<Vec<i64>>> {
        let Some(a) = &self.ambient else { return Ok(None) };
        let mut w = a.iter().map(|p| self.value(p, n, "ambient weight")).collect::<Result<Vec<_>>>()?;
        w.sort();
        Ok(Some(w))
    }

    pub fn expected_minus_ksq(&self, n: i64) -> Option<Q> {
        self.minus_ksq.as_ref().and_then(|k| k.eval(self.r_of(n)))
    }

    /// The declared basket at n, read as polarized residues.
    pub fn expected_basket(&self, n: i64) -> Result<Option<Basket>> {
        let Some(terms) = &self.basket else { return Ok(None) };
        let mut b = Basket::new();
        for t in terms {
            let order = self.value(&t.order, n, "basket order")?;
            if order < 1 {
                return Err(Error::ModelInstantiation { n, detail: format!("basket order {} < 1", order) });
            }
            if order == 1 {
                // a point of order 1 is smooth
                continue;
            }
            let a = self.value(&t.a, n, "local weight")?;
            let c = self.value(&t.b, n, "local weight")?;
            b.add(PolarizedPoint::new(order, a, c), t.mult);
        }
        Ok(Some(b))
    }
}

/// Table rows shipped with the crate, as (file name, config text).
pub const BUNDLED: &[(&str, &str)] = &[
    ("mi1.cfg", include_str!("../models/mi1.cfg")),
    ("mi2.cfg", include_str!("../models/mi2.cfg")),
    ("mi3.cfg", include_str!("../models/mi3.cfg")),
    ("mi4.cfg", include_str!("../models/mi4.cfg")),
    ("mi5.cfg", include_str!("../models/mi5.cfg")),
    ("m12.cfg", include_str!("../models/m12.cfg")),
];

/// Parses a bundled model by name, e.g. `"MI4"`.
pub fn bundled(name: &str) -> Option<ModelSpec> {
    BUNDLED
        .iter()
        .map(|(_, text)| ModelSpec::parse(text).expect("bundled config parses"))
        .find(|m| m.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        let p = RPoly::parse("2r^3(2r^2 + 4r - 7)").unwrap();
        assert_eq!(p.to_string(), "4r^5 + 8r^4 - 14r^3");
        assert_eq!(RPoly::parse("-r + 3").unwrap().eval_int(5), Some(-2));
        let half = RPoly::parse("(r - 1)/2").unwrap();
        assert_eq!(half.to_string(), "(1/2)r - (1/2)");
        assert_eq!(RPoly::parse(&half.to_string()).unwrap(), half);
        assert_eq!(half.eval_int(9), Some(4));
        assert_eq!(half.eval_int(8), None);
        assert_eq!(RPoly::parse("(r-2)*(r+2)").unwrap().to_string(), "r^2 - 4");
        assert_eq!(RPoly::parse("0").unwrap().to_string(), "0");
        assert!(RPoly::parse("r +").is_err());
        assert!(RPoly::parse("s").is_err());
    }

    #[test]
    fn basket_terms() {
        let t = BasketTerm::parse("2 x 1/(r+2)(3, r-3)").unwrap();
        assert_eq!(t.mult, 2);
        assert_eq!(t.to_string(), "2 x 1/(r + 2)(3, r - 3)");
        let t = BasketTerm::parse("1/3(1,1)").unwrap();
        assert_eq!(t.order, RPoly::constant(3));
    }

    #[test]
    fn rational() {
        let k = RRational::parse("6r^3 / (r^4 - 20r^2 + 64)").unwrap();
        assert_eq!(k.eval(5), Some(crate::series::qr(250, 63)));
    }

    #[test]
    fn bundled_round_trip() {
        for (file, text) in BUNDLED {
            let m = ModelSpec::parse(text).unwrap_or_else(|e| panic!("{}: {}", file, e));
            assert_eq!(ModelSpec::parse(&m.to_config()).unwrap(), m, "{}", file);
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = ModelSpec::parse("name = x\nr = 2n + 1\nmu = 1, 2\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, msg: "mu: expected 6 entries".into() });
        let e = ModelSpec::parse("name = x\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }
}
