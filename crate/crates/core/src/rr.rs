//! Orbifold Riemann–Roch bookkeeping: P_X = P_smooth + Σ kᵢ·P_{Qᵢ}.
//!
//! The periodic contributions P_Q are not taken from a closed formula; they
//! are solved from weighted projective planes P(w₁,w₂,w₃) with pairwise
//! coprime weights, whose Hilbert series and baskets are known exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{modp, RationalSystem};
use crate::orbifold::{units, Basket, OrbifoldPoint, PolarizedPoint};
use crate::series::{cyclotomic, fmt_q, parse_q, q, qr, CyclotomicProduct, HilbertSeries, LaurentPoly, Q};

/// Coefficients 1 + n(n+I)·D²/2 as a rational function.
pub fn smooth_series(index: i64, dsq: &Q) -> HilbertSeries {
    // Σ tⁿ = 1/(1−t), Σ n tⁿ = t/(1−t)², Σ n² tⁿ = t(1+t)/(1−t)³
    let half = dsq / q(2);
    let num = LaurentPoly::from_coeffs(&[
        q(1),
        q(-2) + &half * q(1 + index),
        q(1) + &half * q(1 - index),
    ]);
    HilbertSeries::new(num, CyclotomicProduct::new(vec![1, 1, 1]).unwrap())
}

pub fn smooth_coeff(n: i64, index: i64, dsq: &Q) -> Q {
    q(1) + dsq * q(n * (n + index)) / q(2)
}

/// P_Q(t) = numerator/(1 − tʳ) for one polarized point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicContribution {
    pub point: PolarizedPoint,
    /// The correction at n = 0..r, so the numerator is Σ values[n]·tⁿ.
    pub values: Vec<Q>,
}

impl PeriodicContribution {
    pub fn period(&self) -> i64 {
        self.point.r
    }

    pub fn numerator(&self) -> LaurentPoly {
        LaurentPoly::from_coeffs(&self.values)
    }

    pub fn series(&self) -> HilbertSeries {
        HilbertSeries::new(self.numerator(), CyclotomicProduct::new(vec![self.point.r]).unwrap())
    }

    pub fn at(&self, n: i64) -> &Q {
        &self.values[n.rem_euclid(self.point.r) as usize]
    }
}

impl fmt::Display for PeriodicContribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} / (1 - t^{})", self.point, self.numerator(), self.point.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalibrationEntry {
    /// Corrections of the O(1)-polarized representative 1/r(1, b′).
    pub values: Vec<Q>,
    /// Spaces used to solve and to re-check the entry.
    pub provenance: Vec<String>,
}

/// Calibrated contributions keyed by canonical type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CalibrationTable {
    pub entries: BTreeMap<OrbifoldPoint, CalibrationEntry>,
}

fn space_name(w: &[i64]) -> String {
    format!("P({})", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

/// Largest product w₁w₂w₃ tried for the independent re-check.
const RECHECK_BUDGET: i64 = 4000;

impl CalibrationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The contribution of a polarized isolated point, by reindexing the
    /// canonical entry: c_{(a,b)}(n) = c_{(λa,λb)}(λn).
    pub fn contribution(&self, p: &PolarizedPoint) -> Option<PeriodicContribution> {
        let entry = self.entries.get(&p.canonical())?;
        let l = p.rescaling();
        let values = (0..p.r).map(|n| entry.values[(l * n % p.r) as usize].clone()).collect();
        Some(PeriodicContribution { point: *p, values })
    }

    fn known(&self, p: &PolarizedPoint) -> Result<Vec<Q>> {
        if p.r == 1 {
            return Ok(vec![Q::zero()]);
        }
        self.contribution(p)
            .map(|c| c.values)
            .ok_or_else(|| Error::CalibrationIncomplete(format!("{} not yet calibrated", p)))
    }

    /// Corrections of P(w) minus the known points other than `skip`.
    fn residual(&self, w: [i64; 3], skip: usize, len: usize) -> Result<Vec<Q>> {
        let s = HilbertSeries::weighted_projective(&w)?;
        let h = s.expand(len)?;
        let index = w.iter().sum();
        let dsq = qr(1, w.iter().product());
        let mut others = Vec::new();
        for i in 0..3 {
            if i != skip && w[i] > 1 {
                let p = PolarizedPoint::new(w[i], w[(i + 1) % 3], w[(i + 2) % 3]);
                others.push((w[i], self.known(&p)?));
            }
        }
        Ok((0..len)
            .map(|n| {
                let mut v = &h[n] - smooth_coeff(n as i64, index, &dsq);
                for (r, vals) in &others {
                    v -= &vals[n % *r as usize];
                }
                v
            })
            .collect())
    }

    /// Solves the canonical type `t` from P(1, b′, r), then re-checks it on
    /// another space when one is available.
    fn solve(&mut self, t: OrbifoldPoint) -> Result<()> {
        if self.entries.contains_key(&t) {
            return Ok(());
        }
        let r = t.r;
        let w = [t.b, 1, r];
        let other = PolarizedPoint::new(t.b, 1, r);
        if t.b > 1 {
            self.solve(other.canonical())?;
        }
        let res = self.residual(w, 2, 3 * r as usize)?;
        let values: Vec<Q> = res[..r as usize].to_vec();
        let name = space_name(&[1, t.b, r]);
        for n in 0..res.len() {
            if res[n] != values[n % r as usize] {
                return Err(Error::ConventionMismatch { space: name, detail: format!("not periodic at n = {}", n) });
            }
        }
        if !values[0].is_zero() {
            return Err(Error::ConventionMismatch { space: name, detail: "nonzero correction at n = 0".into() });
        }
        let mut provenance = vec![name];
        self.entries.insert(t, CalibrationEntry { values, provenance: provenance.clone() });
        if let Some(check) = self.recheck(t)? {
            provenance.push(check);
            self.entries.get_mut(&t).unwrap().provenance = provenance;
        }
        Ok(())
    }

    /// Re-derives `t` from a space P(a, b, r) with 1 < a < b < r.
    fn recheck(&mut self, t: OrbifoldPoint) -> Result<Option<String>> {
        let r = t.r;
        let mut choice = None;
        'outer: for a in 2..r {
            for b in (a + 1)..r {
                if a * b * r > RECHECK_BUDGET {
                    break;
                }
                if a.gcd(&b) != 1 || a.gcd(&r) != 1 || b.gcd(&r) != 1 {
                    continue;
                }
                if PolarizedPoint::new(r, a, b).canonical() == t {
                    choice = Some((a, b));
                    break 'outer;
                }
            }
        }
        let Some((a, b)) = choice else { return Ok(None) };
        for p in [PolarizedPoint::new(a, b, r), PolarizedPoint::new(b, a, r)] {
            self.solve(p.canonical())?;
        }
        let w = [a, b, r];
        let name = space_name(&w);
        let len = (3 * a * b * r) as usize;
        let res = self.residual(w, 2, len)?;
        let here = self.contribution(&PolarizedPoint::new(r, a, b)).unwrap();
        for (n, v) in res.iter().enumerate() {
            if v != here.at(n as i64) {
                return Err(Error::ConventionMismatch { space: name, detail: format!("re-check fails at n = {}", n) });
            }
        }
        Ok(Some(name))
    }

    /// Calibrates every type of order at most `bound`.
    pub fn calibrate_all(bound: i64) -> Result<Self> {
        let mut table = Self::new();
        for r in 2..=bound {
            for b in units(r) {
                let p = PolarizedPoint::new(r, 1, b);
                table.solve(p.canonical())?;
            }
        }
        Ok(table)
    }

    pub fn ensure(&mut self, types: &[OrbifoldPoint], bound: i64) -> Result<()> {
        for t in types {
            if t.r > bound {
                return Err(Error::CalibrationIncomplete(format!("{} exceeds bound {}", t, bound)));
            }
            if t.a.gcd(&t.r) != 1 || t.b.gcd(&t.r) != 1 {
                return Err(Error::CalibrationIncomplete(format!("{} is not isolated", t)));
            }
            self.solve(*t)?;
        }
        Ok(())
    }
}

/// Header line of the calibration cache.
pub const CACHE_HEADER: &str = "# p1cube calibration v1";

impl CalibrationTable {
    /// Cache text: the header, then one tab-separated record per type: the
    /// rendered series, its period, the values at n = 0..r and the
    /// provenance spaces.
    pub fn to_cache(&self) -> String {
        let mut out = String::from(CACHE_HEADER);
        out.push('\n');
        for (t, e) in &self.entries {
            out.push_str(&format!(
                "{}\tperiod={}\tvalues={}\tfrom={}\n",
                render_entry(t, e),
                t.r,
                render_values(&e.values),
                e.provenance.join(" ")
            ));
        }
        out
    }

    /// Reads a cache written by [`to_cache`](Self::to_cache).
    pub fn from_cache(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CACHE_HEADER => {}
            _ => return Err(bad(1, &format!("expected header '{}'", CACHE_HEADER))),
        }
        let mut table = Self::new();
        for (i, line) in lines {
            let ln = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let ty = fields.next().unwrap_or("").split(':').next().unwrap_or("");
            let b = Basket::parse(ty).ok_or_else(|| bad(ln, "bad singularity type"))?;
            let (p, _) = b.entries().next().ok_or_else(|| bad(ln, "bad singularity type"))?;
            let t = p.canonical();
            if t.to_string() != ty || !p.is_isolated() {
                return Err(bad(ln, "type is not an isolated canonical type"));
            }
            let mut kv = BTreeMap::new();
            for f in fields {
                let (k, v) = f.split_once('=').ok_or_else(|| bad(ln, "expected key=value"))?;
                kv.insert(k, v);
            }
            let period: i64 = kv.get("period").and_then(|v| v.parse().ok()).ok_or_else(|| bad(ln, "bad period"))?;
            let values: Vec<Q> = kv
                .get("values")
                .ok_or_else(|| bad(ln, "missing values"))?
                .split_whitespace()
                .map(|v| parse_q(v).ok_or_else(|| bad(ln, "bad value")))
                .collect::<Result<_>>()?;
            if period != t.r || values.len() != t.r as usize || !values[0].is_zero() {
                return Err(bad(ln, "values do not cover one period vanishing at n = 0"));
            }
            let provenance = kv.get("from").map(|v| v.split_whitespace().map(String::from).collect()).unwrap_or_default();
            if table.entries.insert(t, CalibrationEntry { values, provenance }).is_some() {
                return Err(bad(ln, "duplicate type"));
            }
        }
        Ok(table)
    }
}

/// Calibrates the requested isolated types.
pub fn calibrate(types: &[OrbifoldPoint], bound: i64) -> Result<CalibrationTable> {
    let mut t = CalibrationTable::new();
    t.ensure(types, bound)?;
    Ok(t)
}

/// Orders of possible orbifold points: gcds > 1 of subsets of the weights.
pub fn candidate_orders(weights: &[i64]) -> Vec<i64> {
    let mut orders = BTreeSet::new();
    for &w in weights {
        let snapshot: Vec<i64> = orders.iter().copied().collect();
        for g in snapshot {
            let h = g.gcd(&w);
            if h > 1 {
                orders.insert(h);
            }
        }
        if w > 1 {
            orders.insert(w);
        }
    }
    orders.into_iter().collect()
}

/// Rigid isolated polarized types whose local weights are residues of two
/// ambient weights.
pub fn candidate_points_from_weights(weights: &[i64]) -> Vec<PolarizedPoint> {
    let mut out = BTreeSet::new();
    for r in candidate_orders(weights) {
        let res: Vec<i64> = weights.iter().filter(|w| w.gcd(&r) == 1).map(|w| w % r).collect();
        for i in 0..res.len() {
            for j in (i + 1)..res.len() {
                let p = PolarizedPoint::new(r, res[i], res[j]);
                let c = p.classify();
                if c.isolated && c.rigid {
                    out.insert(p);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// The candidates compatible with K = O(−I): at a point 1/r(a, b) polarized
/// by O(1) the local canonical class forces a + b ≡ I mod r.
pub fn candidate_points(weights: &[i64], index: i64) -> Vec<PolarizedPoint> {
    candidate_points_from_weights(weights).into_iter().filter(|p| (p.a + p.b - index).rem_euclid(p.r) == 0).collect()
}

/// Whether the correction P_X − P_smooth is periodic: its numerator over
/// ∏(1 − tʷ) must cancel every repeated cyclotomic factor, leaving at most
/// simple poles at roots of unity, and the fraction must be proper.
pub fn correction_is_periodic(numer: &LaurentPoly, den: &CyclotomicProduct) -> bool {
    if numer.is_zero() {
        return true;
    }
    if numer.max_exp().unwrap() >= den.degree() {
        return false;
    }
    let maxw = den.factors().iter().copied().max().unwrap_or(1);
    for d in 1..=maxw {
        let m = den.factors().iter().filter(|&&w| w % d == 0).count();
        let need = m.saturating_sub(1);
        if need == 0 {
            continue;
        }
        let phi = cyclotomic(d);
        let mut p = numer.clone();
        for _ in 0..need {
            match p.div_exact(&phi) {
                Ok(x) => p = x,
                Err(_) => return false,
            }
        }
    }
    true
}

/// The polynomial identity behind a basket match: over D = ∏(1 − tʷ),
/// N_X − A·D/(1−t)³ = Σ kᵢ·cᵢ(t)·D/(1 − t^{rᵢ}).
pub struct MatchSystem {
    pub lhs: LaurentPoly,
    pub columns: Vec<LaurentPoly>,
    pub den: CyclotomicProduct,
}

pub fn match_system(
    px: &HilbertSeries,
    index: i64,
    dsq: &Q,
    contributions: &[PeriodicContribution],
) -> Result<MatchSystem> {
    let mut den = px.denominator.clone();
    for c in contributions {
        if !den.factors().iter().any(|w| w % c.point.r == 0) {
            let mut f = den.factors().to_vec();
            f.push(c.point.r);
            den = CyclotomicProduct::new(f)?;
        }
    }
    let nx = px.numerator_over(&den)?;
    let sm = smooth_series(index, dsq);
    let lhs = &nx - &sm.numerator_over(&den)?;
    let dexp = den.expanded();
    let columns = contributions
        .iter()
        .map(|c| {
            // D/(1 − tʳ) is a polynomial since r divides some factor
            let cofactor = dexp.div_exact(&LaurentPoly::one_minus(c.point.r))?;
            Ok(&c.numerator() * &cofactor)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchSystem { lhs, columns, den })
}

/// Limits on multiplicities during solution enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchLimits {
    /// Cap on the number of points of one order when several ambient
    /// weights share it.
    pub per_order: u32,
}

impl Default for MatchLimits {
    fn default() -> Self {
        Self { per_order: 8 }
    }
}

fn order_caps(weights: &[i64], cands: &[PolarizedPoint], limits: &MatchLimits) -> BTreeMap<i64, u32> {
    cands
        .iter()
        .map(|p| {
            let n = weights.iter().filter(|w| *w % p.r == 0).count();
            // a single weight divisible by r leaves only its coordinate point
            (p.r, if n <= 1 { 1 } else { limits.per_order })
        })
        .collect()
}

/// All feasible baskets: nonnegative integer multiplicities with
/// P_X − P_smooth = Σ kᵢ·P_{Qᵢ}, minimal under inclusion.
pub fn match_basket(
    px: &HilbertSeries,
    index: i64,
    dsq: &Q,
    candidates: &[PolarizedPoint],
    table: &CalibrationTable,
    limits: &MatchLimits,
) -> Result<Vec<Basket>> {
    let mut cands: Vec<PolarizedPoint> = candidates.to_vec();
    cands.sort();
    cands.dedup();
    let contributions = cands
        .iter()
        .map(|p| {
            table.contribution(p).ok_or_else(|| Error::CalibrationIncomplete(format!("{} not calibrated", p)))
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = match_system(px, index, dsq, &contributions)?;
    if !correction_is_periodic(&sys.lhs, &sys.den) {
        return Err(Error::InconsistentInvariants);
    }
    let rows = sys.den.degree() as usize + 1;
    if !modp::consistent(&sys.columns, &sys.lhs, rows) {
        return Ok(vec![]);
    }
    let solved = RationalSystem::solve(&sys.columns, &sys.lhs, rows);
    let Some(solved) = solved else { return Ok(vec![]) };
    let weights = px.denominator.factors();
    let caps = order_caps(weights, &cands, limits);
    let bounds: Vec<u32> = cands.iter().map(|p| caps[&p.r]).collect();
    let group: Vec<i64> = cands.iter().map(|p| p.r).collect();
    let sols = solved.nonnegative_solutions(&bounds, &group, &caps);
    let mut baskets: Vec<Vec<u32>> = sols;
    baskets.sort();
    baskets.dedup();
    let minimal: Vec<&Vec<u32>> = baskets
        .iter()
        .filter(|k| !baskets.iter().any(|o| o != *k && o.iter().zip(k.iter()).all(|(a, b)| a <= b)))
        .collect();
    let mut out: Vec<Basket> = minimal
        .into_iter()
        .map(|k| Basket::from_entries(cands.iter().copied().zip(k.iter().copied())))
        .collect();
    out.sort();
    Ok(out)
}

/// Checks P_X = P_smooth + Σ kᵢ P_{Qᵢ} coefficientwise up to `terms`.
pub fn verify_decomposition(
    px: &HilbertSeries,
    index: i64,
    dsq: &Q,
    basket: &Basket,
    table: &CalibrationTable,
    terms: usize,
) -> Result<bool> {
    let h = px.expand(terms)?;
    let mut contribs = Vec::new();
    for (p, k) in basket.entries() {
        let c = table.contribution(p).ok_or_else(|| Error::CalibrationIncomplete(p.to_string()))?;
        contribs.push((c, k));
    }
    for (n, hn) in h.iter().enumerate() {
        let mut v = smooth_coeff(n as i64, index, dsq);
        for (c, k) in &contribs {
            v += c.at(n as i64) * q(*k as i64);
        }
        if &v != hn {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Renders a calibration entry like `1/2(1,1): -1/4 t / (1 - t^2)`.
pub fn render_entry(t: &OrbifoldPoint, e: &CalibrationEntry) -> String {
    let mut num = String::new();
    for (n, c) in e.values.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        let neg = *c < Q::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        if num.is_empty() {
            num.push_str(if neg { "-" } else { "" });
        } else {
            num.push_str(if neg { " - " } else { " + " });
        }
        let var = match n {
            0 => String::new(),
            1 => "t".to_string(),
            _ => format!("t^{}", n),
        };
        match (var.is_empty(), mag == q(1)) {
            (true, _) => num.push_str(&fmt_q(&mag)),
            (false, true) => num.push_str(&var),
            (false, false) => num.push_str(&format!("{} {}", fmt_q(&mag), var)),
        }
    }
    if num.is_empty() {
        num.push('0');
    }
    format!("{}: {} / (1 - t^{})", t, num, t.r)
}

/// Plain values list used by the cache format.
pub fn render_values(values: &[Q]) -> String {
    values.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_point_renders() {
        let t = calibrate(&[OrbifoldPoint { r: 2, a: 1, b: 1 }], 10).unwrap();
        let cache = t.to_cache();
        assert!(cache.starts_with(CACHE_HEADER));
        assert!(cache.contains("1/2(1,1): -1/4 t / (1 - t^2)\tperiod=2\tvalues=0 -1/4\t"));
    }

    #[test]
    fn cache_roundtrip() {
        let t = CalibrationTable::calibrate_all(9).unwrap();
        let back = CalibrationTable::from_cache(&t.to_cache()).unwrap();
        assert_eq!(back, t);
        assert!(CalibrationTable::from_cache("nonsense").is_err());
        let broken = t.to_cache().replace("values=0 ", "values=1 ");
        assert!(matches!(CalibrationTable::from_cache(&broken), Err(Error::Parse { .. })));
    }

    #[test]
    fn index_filter() {
        // P(1,2,2,3,3,3) sections of index 1 carry only 1/3(2,2)
        let c = candidate_points(&[1, 2, 2, 3, 3, 3], 1);
        assert_eq!(c, vec![PolarizedPoint::new(3, 2, 2)]);
        assert!(candidate_points(&[1, 2, 2, 3, 3, 3], 3).is_empty());
    }
}
