//! Candidate search over the format, and verification of model families.
//!
//! Recipes are a canonical μ, a set S of vertices carrying quasilinear
//! sections and |S| − 1 cones. With quasilinear sections the numerator of
//! P_X is the format numerator itself and only the denominator changes, so
//! the Riemann–Roch test runs first over Z/p on integer data; the few
//! survivors are re-solved exactly over Q.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Mutex;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::construction::{build, invariants, BuildRecipe, Section};
use crate::cube::{cube_weights, hilbert_series_wp, MuVector, Vertex, WeightCube};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::linalg::modp;
use crate::model::ModelSpec;
use crate::orbifold::{Basket, PolarizedPoint};
use crate::rr::{candidate_points, match_basket, verify_decomposition, CalibrationTable, MatchLimits};
use crate::series::{cyclotomic, fmt_q, qr, Q};

/// Counts per Fano index 1..=16 of the reference classification.
pub const REFERENCE_CANDIDATES: [usize; 16] = [33, 18, 0, 0, 1, 0, 1, 1, 2, 1, 3, 1, 3, 5, 2, 5];
/// Wellformed quasismooth examples per index from the same search.
pub const REFERENCE_EXAMPLES: [usize; 16] = [25, 9, 0, 0, 1, 0, 1, 1, 2, 1, 3, 1, 3, 5, 2, 5];

/// How the adjunction number is formed from the ambient weights and I.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Adjunction {
    /// Σ wᵢ + I.
    WeightsPlusIndex,
    /// Σ wᵢ − I, which equals 3l for every recipe.
    WeightsMinusIndex,
}

impl Adjunction {
    pub fn value(self, weight_sum: i64, index: i64) -> i64 {
        match self {
            Adjunction::WeightsPlusIndex => weight_sum + index,
            Adjunction::WeightsMinusIndex => weight_sum - index,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plus" | "sum+I" => Some(Adjunction::WeightsPlusIndex),
            "minus" | "sum-I" => Some(Adjunction::WeightsMinusIndex),
            _ => None,
        }
    }
}

impl fmt::Display for Adjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Adjunction::WeightsPlusIndex => write!(f, "plus"),
            Adjunction::WeightsMinusIndex => write!(f, "minus"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub index_min: i64,
    pub index_max: i64,
    /// Bound A on the adjunction number.
    pub adjunction: i64,
    pub convention: Adjunction,
    pub max_cones: usize,
    pub max_cone_weight: Option<i64>,
    /// Skip ambient spaces whose weights are not wellformed.
    pub wellformed_only: bool,
    pub limits: MatchLimits,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            index_min: 1,
            index_max: 16,
            adjunction: 96,
            convention: Adjunction::WeightsMinusIndex,
            max_cones: 1,
            max_cone_weight: None,
            wellformed_only: true,
            limits: MatchLimits::default(),
        }
    }
}

impl SearchConfig {
    fn adjunction_of(&self, l: i64, index: i64) -> i64 {
        // Σ ambient = 3l + I for every recipe
        self.convention.value(3 * l + index, index)
    }

    /// Largest socle degree that can satisfy the bound for some index.
    fn max_socle(&self) -> i64 {
        let mut l = 0;
        while self.adjunction_of(l + 1, self.index_min) <= self.adjunction {
            l += 1;
        }
        l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    /// Riemann–Roch admits a rigid basket; geometry is not conclusive.
    Candidate,
    /// Wellformed, every singular point pinned, and the geometric basket satisfies Riemann–Roch.
    Verified,
    /// Geometry is conclusive and contradicts the candidate.
    Refuted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Candidate => "candidate",
            Status::Verified => "verified",
            Status::Refuted => "refuted",
        };
        write!(f, "{}", s)
    }
}

/// Records with equal keys are the same candidate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DedupKey {
    pub ambient: Vec<i64>,
    pub index: i64,
    /// P_X coefficients up to twice the largest weight.
    pub coefficients: Vec<Q>,
    pub baskets: Vec<Basket>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateRecord {
    pub mu: MuVector,
    pub recipe: BuildRecipe,
    pub ambient: Vec<i64>,
    pub index: i64,
    pub adjunction: i64,
    pub dsq: Q,
    pub minus_ksq: Q,
    pub h0: u64,
    /// Feasible rigid baskets from Riemann–Roch.
    pub baskets: Vec<Basket>,
    pub geometric: Basket,
    pub flags: Vec<String>,
    pub wellformed: bool,
    pub obstructed: bool,
    pub status: Status,
    pub key: DedupKey,
}

fn join<T: fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl CandidateRecord {
    /// One tab-separated `key=value` line with a fixed field order.
    pub fn to_line(&self) -> String {
        let fields = [
            ("index", self.index.to_string()),
            ("ambient", join(&self.ambient, ",")),
            ("adjunction", self.adjunction.to_string()),
            ("mu", join(&self.mu.as_array(), ",")),
            ("cones", join(&self.recipe.cones, ",")),
            ("sections", join(&self.recipe.sections, ",")),
            ("dsq", fmt_q(&self.dsq)),
            ("minus_ksq", fmt_q(&self.minus_ksq)),
            ("h0", self.h0.to_string()),
            ("baskets", join(&self.baskets, " | ")),
            ("geometric", self.geometric.to_string()),
            ("flags", self.flags.join(" | ")),
            ("wellformed", self.wellformed.to_string()),
            ("obstructed", self.obstructed.to_string()),
            ("status", self.status.to_string()),
        ];
        fields.iter().map(|(k, v)| format!("{}={}", k, v)).collect::<Vec<_>>().join("\t")
    }
}

/// Header line of the candidate database.
pub const DB_HEADER: &str = "# p1cube candidates v1";

/// Merges new record lines into an existing database text: the header comes
/// first, lines are unique and sorted.
pub fn merge_db(existing: &str, lines: &[String]) -> Result<String> {
    let mut all = BTreeSet::new();
    for (i, line) in existing.lines().enumerate() {
        if i == 0 {
            if line != DB_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("expected header '{}'", DB_HEADER) });
            }
            continue;
        }
        if !line.trim().is_empty() {
            all.insert(line.to_string());
        }
    }
    all.extend(lines.iter().cloned());
    let mut out = String::from(DB_HEADER);
    out.push('\n');
    for l in all {
        out.push_str(&l);
        out.push('\n');
    }
    Ok(out)
}

/// Counters reported alongside the records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub formats: usize,
    pub recipes: usize,
    pub repeated_ambient: usize,
    pub not_wellformed: usize,
    pub not_periodic: usize,
    pub rejected_modp: usize,
    pub rejected_exact: usize,
    pub duplicates: usize,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub records: Vec<CandidateRecord>,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn counts(&self, config: &SearchConfig) -> BTreeMap<i64, usize> {
        let mut c: BTreeMap<i64, usize> = (config.index_min..=config.index_max).map(|i| (i, 0)).collect();
        for r in &self.records {
            *c.entry(r.index).or_insert(0) += 1;
        }
        c
    }
}

/// Canonical cubes: c₁ ≥ 1 and ascending axis differences.
pub fn canonical_cubes(max_socle: i64) -> Vec<WeightCube> {
    let mut out = Vec::new();
    for c1 in 1.. {
        if 2 * c1 > max_socle {
            break;
        }
        for da in 0..=max_socle {
            for db in da..=max_socle {
                for dc in db..=max_socle {
                    if 2 * c1 + da + db + dc > max_socle {
                        break;
                    }
                    out.push(cube_weights(&MuVector::new(0, da, 0, db, c1, c1 + dc)).unwrap());
                }
            }
        }
    }
    out
}

/// A weighted projective space is wellformed when any n of its n + 1 weights are coprime.
pub fn ambient_wellformed(w: &[i64]) -> bool {
    (0..w.len()).all(|skip| w.iter().enumerate().filter(|(i, _)| *i != skip).fold(0i64, |g, (_, x)| g.gcd(x)) == 1)
}

/// Multisets of `count` positive integers with the given sum, each ≤ cap.
fn cone_sets(count: usize, sum: i64, cap: i64) -> Vec<Vec<i64>> {
    fn rec(count: usize, sum: i64, min: i64, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if count == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut c = min;
        while c <= cap && c * count as i64 <= sum {
            cur.push(c);
            rec(count - 1, sum - c, c, cap, cur, out);
            cur.pop();
            c += 1;
        }
    }
    let mut out = Vec::new();
    rec(count, sum, 1, cap, &mut Vec::new(), &mut out);
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Dense integer polynomial helpers for the prefilter.
mod ipoly {
    /// p/(1 − t), or None when (1 − t) does not divide p.
    pub fn div_one_minus_t(p: &[i64]) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(p.len());
        let mut acc = 0i64;
        for &c in p {
            acc += c;
            out.push(acc);
        }
        (out.pop() == Some(0)).then_some(out)
    }

    pub fn times_one_minus(p: &[i64], w: usize) -> Vec<i64> {
        let mut out = vec![0; p.len() + w];
        for (i, &c) in p.iter().enumerate() {
            out[i] += c;
            out[i + w] -= c;
        }
        out
    }

    /// p/(1 − tʷ) when exact, trailing zeros dropped.
    pub fn div_one_minus(p: &[i64], w: usize) -> Vec<i64> {
        let mut out = vec![0i64; p.len()];
        for i in 0..p.len() {
            out[i] = p[i] + if i >= w { out[i - w] } else { 0 };
        }
        out.truncate(p.len() - w);
        out
    }
}

/// Calibrated contributions reduced mod p, filled on demand.
struct ModpContributions {
    table: CalibrationTable,
    cache: HashMap<PolarizedPoint, Vec<u64>>,
}

impl ModpContributions {
    fn get(&mut self, p: &PolarizedPoint) -> Result<Vec<u64>> {
        if let Some(v) = self.cache.get(p) {
            return Ok(v.clone());
        }
        self.table.ensure(&[p.canonical()], i64::MAX)?;
        let c = self.table.contribution(p).unwrap();
        let v: Vec<u64> = c.values.iter().map(|x| modp::residue(x).expect("denominator vanishes mod p")).collect();
        self.cache.insert(*p, v.clone());
        Ok(v)
    }
}

struct FormatData {
    cube: WeightCube,
    l: i64,
    numerator_p: Vec<u64>,
    /// Value at t = 1 of numerator/(1 − t)⁴.
    n4_at_one: i128,
}

impl FormatData {
    fn new(cube: WeightCube) -> Self {
        let s = hilbert_series_wp(&cube.mu()).unwrap();
        let l = cube.socle();
        let mut numerator = vec![0i64; 3 * l as usize + 1];
        for (e, c) in s.numerator.terms() {
            numerator[e as usize] = c.to_integer().to_i64().unwrap();
        }
        let mut n4 = numerator.clone();
        for _ in 0..4 {
            n4 = ipoly::div_one_minus_t(&n4).expect("format numerator vanishes to order 4 at t = 1");
        }
        let n4_at_one = n4.iter().map(|&c| c as i128).sum();
        let numerator_p = numerator.iter().map(|&c| modp::from_i64(c)).collect();
        Self { cube, l, numerator_p, n4_at_one }
    }
}

/// A recipe that passed the mod-p test.
#[derive(Clone, Debug)]
struct Survivor {
    recipe: BuildRecipe,
    ambient: Vec<i64>,
    index: i64,
}

fn cyclotomic_int(d: i64) -> Vec<i64> {
    let p = cyclotomic(d);
    let deg = p.max_exp().unwrap() as usize;
    (0..=deg).map(|e| p.coeff(e as i64).to_integer().to_i64().unwrap()).collect()
}

/// Divides by a monic integer polynomial mod p; None on a nonzero remainder.
fn div_monic_modp(p: &[u64], d: &[i64]) -> Option<Vec<u64>> {
    let dd = d.len() - 1;
    let mut rem = p.to_vec();
    while rem.last() == Some(&0) {
        rem.pop();
    }
    if rem.len() <= dd {
        return if rem.is_empty() { Some(vec![]) } else { None };
    }
    let mut quot = vec![0u64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        if c == 0 {
            continue;
        }
        quot[i] = c;
        for (j, &x) in d.iter().enumerate() {
            let term = modp::mul(c, modp::from_i64(x));
            rem[i + j] = modp::sub(rem[i + j], term);
        }
    }
    rem.iter().all(|&x| x == 0).then_some(quot)
}

enum Prefilter {
    NotPeriodic,
    Inconsistent,
    Pass,
}

/// The Riemann–Roch test over Z/p for one ambient space.
fn prefilter(
    f: &FormatData,
    ambient: &[i64],
    index: i64,
    cyclo: &HashMap<i64, Vec<i64>>,
    contrib: &Mutex<ModpContributions>,
) -> Result<Prefilter> {
    let mut den = vec![1i64];
    for &w in ambient {
        den = ipoly::times_one_minus(&den, w as usize);
    }
    let mut e = den.clone();
    for _ in 0..3 {
        e = ipoly::div_one_minus_t(&e).unwrap();
    }
    let prod: i128 = ambient.iter().map(|&w| w as i128).product();
    // h = D²/2 = n4(1)/(2·∏w)
    let h = modp::mul(
        modp::from_i64((f.n4_at_one % modp::P as i128) as i64),
        modp::pow(modp::from_i64(((2 * prod) % modp::P as i128) as i64), modp::P - 2),
    );
    let a = [
        1u64,
        modp::add(modp::sub(0, 2), modp::mul(h, modp::from_i64(1 + index))),
        modp::add(1, modp::mul(h, modp::from_i64(1 - index))),
    ];
    let rows = den.len();
    let mut lhs = vec![0u64; rows];
    for (k, &c) in f.numerator_p.iter().enumerate() {
        lhs[k] = c;
    }
    for (k, &c) in e.iter().enumerate() {
        let c = modp::from_i64(c);
        for (j, &aj) in a.iter().enumerate() {
            lhs[k + j] = modp::sub(lhs[k + j], modp::mul(aj, c));
        }
    }
    // at most simple poles at roots of unity
    let maxw = *ambient.iter().max().unwrap();
    for d in 1..=maxw {
        let m = ambient.iter().filter(|&&w| w % d == 0).count();
        if m < 2 {
            continue;
        }
        let phi = &cyclo[&d];
        let mut p = lhs.clone();
        for _ in 0..m - 1 {
            match div_monic_modp(&p, phi) {
                Some(x) => p = x,
                None => return Ok(Prefilter::NotPeriodic),
            }
        }
    }
    let cands = candidate_points(ambient, index);
    let mut cols: Vec<Vec<u64>> = Vec::with_capacity(cands.len());
    for p in &cands {
        let vals = contrib.lock().unwrap().get(p)?;
        let cof = ipoly::div_one_minus(&den, p.r as usize);
        let mut col = vec![0u64; rows];
        for (i, &v) in vals.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for (j, &c) in cof.iter().enumerate() {
                if c != 0 {
                    col[i + j] = modp::add(col[i + j], modp::mul(v, modp::from_i64(c)));
                }
            }
        }
        cols.push(col);
    }
    let m = cols.len();
    let mat: Vec<Vec<u64>> = (0..rows)
        .map(|i| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[i]).collect();
            row.push(lhs[i]);
            row
        })
        .collect();
    Ok(if modp::in_span(mat, m) { Prefilter::Pass } else { Prefilter::Inconsistent })
}

fn search_format(
    f: &FormatData,
    config: &SearchConfig,
    cyclo: &HashMap<i64, Vec<i64>>,
    contrib: &Mutex<ModpContributions>,
) -> Result<(Vec<Survivor>, SearchStats)> {
    let mut stats = SearchStats { formats: 1, ..Default::default() };
    let mut out = Vec::new();
    let w = f.cube.weights();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    for s in 1..=config.max_cones + 1 {
        for set in subsets(8, s) {
            let sd: i64 = set.iter().map(|&i| w[i]).sum();
            let rest: Vec<i64> = (0..8).filter(|i| !set.contains(i)).map(|i| w[i]).collect();
            for index in config.index_min..=config.index_max {
                if config.adjunction_of(f.l, index) > config.adjunction {
                    continue;
                }
                let cone_sum = index - f.l + sd;
                let cap = config.max_cone_weight.unwrap_or(i64::MAX);
                let cone_lists = if s == 1 {
                    if cone_sum == 0 { vec![vec![]] } else { vec![] }
                } else {
                    cone_sets(s - 1, cone_sum, cap)
                };
                for cones in cone_lists {
                    stats.recipes += 1;
                    let mut ambient = rest.clone();
                    ambient.extend(&cones);
                    ambient.sort_unstable();
                    if !seen.insert(ambient.clone()) {
                        stats.repeated_ambient += 1;
                        continue;
                    }
                    if config.wellformed_only && !ambient_wellformed(&ambient) {
                        stats.not_wellformed += 1;
                        continue;
                    }
                    match prefilter(f, &ambient, index, cyclo, contrib)? {
                        Prefilter::NotPeriodic => stats.not_periodic += 1,
                        Prefilter::Inconsistent => stats.rejected_modp += 1,
                        Prefilter::Pass => {
                            let sections =
                                set.iter().map(|&i| Section::at(w[i], Vertex::from_index(i))).collect();
                            let recipe = BuildRecipe::new(f.cube, cones.clone(), sections);
                            out.push(Survivor { recipe, ambient, index });
                        }
                    }
                }
            }
        }
    }
    Ok((out, stats))
}

fn add_stats(a: &mut SearchStats, b: &SearchStats) {
    a.formats += b.formats;
    a.recipes += b.recipes;
    a.repeated_ambient += b.repeated_ambient;
    a.not_wellformed += b.not_wellformed;
    a.not_periodic += b.not_periodic;
    a.rejected_modp += b.rejected_modp;
    a.rejected_exact += b.rejected_exact;
    a.duplicates += b.duplicates;
}

/// Status from the geometric analysis against the Riemann–Roch data.
fn classify_record(
    x: &crate::construction::PolarizedVariety,
    dsq: &Q,
    table: &CalibrationTable,
) -> Result<(Basket, Vec<String>, bool, Status)> {
    let g = Geometry::new(x);
    let b = g.basket();
    let wellformed = g.wellformed();
    if !b.flags.is_empty() {
        return Ok((b.basket, b.flags, wellformed, Status::Candidate));
    }
    if !wellformed || !b.basket.all_isolated_rigid() {
        return Ok((b.basket, b.flags, wellformed, Status::Refuted));
    }
    let terms = 2 * x.ambient_weights().iter().max().copied().unwrap_or(1) as usize + 60;
    let ok = verify_decomposition(&x.series, x.kappa, dsq, &b.basket, table, terms)?;
    let status = if ok { Status::Verified } else { Status::Refuted };
    Ok((b.basket, b.flags, wellformed, status))
}

/// Runs the search; output order is by index, then ambient weights, then recipe.
pub fn enumerate(config: &SearchConfig, table: &mut CalibrationTable) -> Result<SearchOutcome> {
    let cubes = canonical_cubes(config.max_socle());
    let formats: Vec<FormatData> = cubes.into_iter().map(FormatData::new).collect();
    let maxw = 4 * config.max_socle() + config.index_max + 2;
    let cyclo: HashMap<i64, Vec<i64>> = (1..=maxw).map(|d| (d, cyclotomic_int(d))).collect();
    let contrib = Mutex::new(ModpContributions { table: std::mem::take(table), cache: HashMap::new() });
    let results: Vec<Result<(Vec<Survivor>, SearchStats)>> =
        formats.par_iter().map(|f| search_format(f, config, &cyclo, &contrib)).collect();
    *table = contrib.into_inner().unwrap().table;
    let mut stats = SearchStats::default();
    let mut survivors = Vec::new();
    for r in results {
        let (s, st) = r?;
        add_stats(&mut stats, &st);
        survivors.extend(s);
    }
    let mut records = Vec::new();
    for s in survivors {
        let x = build(&s.recipe)?;
        let rep = invariants(&x)?;
        let cands = candidate_points(&s.ambient, s.index);
        let types: Vec<_> = cands.iter().map(|p| p.canonical()).collect();
        table.ensure(&types, i64::MAX)?;
        let baskets = match match_basket(&x.series, s.index, &rep.dsq, &cands, table, &config.limits) {
            Ok(b) => b,
            Err(Error::InconsistentInvariants) => vec![],
            Err(e) => return Err(e),
        };
        if baskets.is_empty() {
            stats.rejected_exact += 1;
            continue;
        }
        let (geometric, flags, wellformed, status) = classify_record(&x, &rep.dsq, table)?;
        let maxw = *s.ambient.iter().max().unwrap() as usize;
        let key = DedupKey {
            ambient: s.ambient.clone(),
            index: s.index,
            coefficients: x.series.expand(2 * maxw)?,
            baskets: baskets.clone(),
        };
        records.push(CandidateRecord {
            mu: s.recipe.cube.mu(),
            adjunction: config.convention.value(s.ambient.iter().sum(), s.index),
            ambient: s.ambient,
            index: s.index,
            dsq: rep.dsq.clone(),
            minus_ksq: rep.minus_ksq.clone(),
            h0: rep.h0,
            obstructed: rep.h0 == 0,
            recipe: s.recipe,
            baskets,
            geometric,
            flags,
            wellformed,
            status,
            key,
        });
    }
    records.sort_by(|a, b| {
        (a.index, &a.ambient, a.mu.as_array(), &a.recipe.cones, a.recipe.sections.clone())
            .cmp(&(b.index, &b.ambient, b.mu.as_array(), &b.recipe.cones, b.recipe.sections.clone()))
    });
    let mut keys = HashSet::new();
    let before = records.len();
    records.retain(|r| keys.insert(r.key.clone()));
    stats.duplicates = before - records.len();
    Ok(SearchOutcome { records, stats })
}

/// Per-index comparison with the reference counts; one line per mismatch,
/// followed by the records found at that index.
pub fn reference_diff(outcome: &SearchOutcome, config: &SearchConfig) -> Vec<String> {
    let counts = outcome.counts(config);
    let mut out = Vec::new();
    for (i, &expected) in REFERENCE_CANDIDATES.iter().enumerate() {
        let index = i as i64 + 1;
        let Some(&found) = counts.get(&index) else { continue };
        if found == expected {
            continue;
        }
        let sign = if found > expected { "extra" } else { "missing" };
        out.push(format!(
            "index {}: expected {}, found {} ({} {})",
            index,
            expected,
            found,
            found.abs_diff(expected),
            sign
        ));
        for r in outcome.records.iter().filter(|r| r.index == index) {
            out.push(format!("  found: {}", r.to_line()));
        }
    }
    out
}

/// Outcome of one field comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCheck {
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceReport {
    pub model: String,
    pub n: i64,
    pub r: i64,
    pub checks: Vec<FieldCheck>,
    /// Set when the instance could not be built.
    pub error: Option<String>,
}

impl InstanceReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, field: &str) -> Option<&FieldCheck> {
        self.checks.iter().find(|c| c.field == field)
    }
}

fn canonical_text(b: &Basket) -> String {
    let parts: Vec<String> = b.canonical().iter().map(|(p, k)| format!("{} x {}", k, p)).collect();
    if parts.is_empty() {
        "{}".into()
    } else {
        parts.join(", ")
    }
}

/// Builds each instance of a model and compares it with the declared data.
///
/// Baskets are compared as singularity types (canonical forms); the
/// Riemann–Roch field passes when some feasible basket has the declared types.
pub fn verify_model(model: &ModelSpec, ns: &[i64], table: &mut CalibrationTable) -> Vec<InstanceReport> {
    ns.iter().map(|&n| verify_instance(model, n, table)).collect()
}

fn verify_instance(model: &ModelSpec, n: i64, table: &mut CalibrationTable) -> InstanceReport {
    let mut rep = InstanceReport { model: model.name.clone(), n, r: model.r_of(n), checks: vec![], error: None };
    if let Err(e) = fill_instance(model, n, table, &mut rep.checks) {
        rep.error = Some(e.to_string());
    }
    rep
}

fn fill_instance(model: &ModelSpec, n: i64, table: &mut CalibrationTable, checks: &mut Vec<FieldCheck>) -> Result<()> {
    let recipe = model.instantiate(n)?;
    let x = build(&recipe)?;
    let inv = invariants(&x)?;
    let ambient = x.ambient_weights();
    let mut push = |field, expected: String, actual: String, pass| checks.push(FieldCheck { field, expected, actual, pass });
    if let Some(a) = model.expected_ambient(n)? {
        push("ambient", join(&a, ","), join(&ambient, ","), a == ambient);
    }
    push("index", String::new(), x.kappa.to_string(), true);
    if let Some(k) = model.expected_minus_ksq(n) {
        push("minus_ksq", fmt_q(&k), fmt_q(&inv.minus_ksq), k == inv.minus_ksq);
    }
    if let Some(h) = model.h0 {
        push("h0", h.to_string(), inv.h0.to_string(), h == inv.h0);
    }
    let g = Geometry::new(&x);
    let geo = g.basket();
    let wellformed = g.wellformed();
    push("wellformed", "true".into(), wellformed.to_string(), wellformed);
    let expected = model.expected_basket(n)?;
    let mut cands = candidate_points(&ambient, x.kappa);
    if let Some(b) = &expected {
        cands.extend(b.entries().map(|(p, _)| *p).filter(|p| {
            let c = p.classify();
            c.isolated && c.rigid
        }));
    }
    cands.extend(geo.basket.entries().map(|(p, _)| *p).filter(|p| p.is_isolated()));
    cands.sort();
    cands.dedup();
    let types: Vec<_> = cands.iter().map(|p| p.canonical()).collect();
    table.ensure(&types, i64::MAX)?;
    let feasible = match match_basket(&x.series, x.kappa, &inv.dsq, &cands, table, &MatchLimits::default()) {
        Ok(b) => b,
        Err(Error::InconsistentInvariants) => vec![],
        Err(e) => return Err(e),
    };
    if let Some(b) = &expected {
        let flagged = if geo.flags.is_empty() { String::new() } else { format!(" [flags: {}]", geo.flags.join("; ")) };
        push(
            "basket_geometric",
            canonical_text(b),
            format!("{}{}", canonical_text(&geo.basket), flagged),
            geo.flags.is_empty() && geo.basket.canonical() == b.canonical(),
        );
        let hit = feasible.iter().any(|f| f.canonical() == b.canonical());
        let shown: Vec<String> = feasible.iter().map(canonical_text).collect();
        push("basket_rr", canonical_text(b), if shown.is_empty() { "none".into() } else { shown.join(" | ") }, hit);
    }
    let geo_rr = geo.flags.is_empty()
        && verify_decomposition(&x.series, x.kappa, &inv.dsq, &geo.basket, table, 2 * ambient[6] as usize + 60)
            .unwrap_or(false);
    push("geometric_rr", "true".into(), geo_rr.to_string(), geo_rr);
    Ok(())
}

/// Exact D² = n4(1)/∏w for a recipe, via the integer route used by the prefilter.
pub fn dsq_integer_route(recipe: &BuildRecipe) -> Q {
    let f = FormatData::new(recipe.cube);
    let x = build(recipe).expect("surface recipe");
    let prod: i64 = x.ambient_weights().iter().product();
    let v = f.n4_at_one;
    qr(v as i64, prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_multisets() {
        assert_eq!(cone_sets(2, 5, 10), vec![vec![1, 4], vec![2, 3]]);
        assert_eq!(cone_sets(1, 3, 2), Vec::<Vec<i64>>::new());
        assert_eq!(subsets(4, 2).len(), 6);
    }

    #[test]
    fn integer_route_matches_residue() {
        let r = 8;
        let recipe = BuildRecipe::from_mu(&MuVector::new(0, 2, 0, r - 3, 1, r), vec![], vec![Section::at(r, Vertex::new(2, 2, 1))])
            .unwrap();
        assert_eq!(dsq_integer_route(&recipe), qr(68, 975));
    }

    #[test]
    fn wellformed_ambient() {
        assert!(ambient_wellformed(&[1, 2, 2, 2, 3, 3, 3]));
        assert!(!ambient_wellformed(&[2, 2, 2, 2, 2, 2, 3]));
    }

    #[test]
    fn canonical_cube_count_small() {
        // l ≤ 3: c₁ = 1 with differences summing to at most 1
        let cubes = canonical_cubes(3);
        assert_eq!(cubes.len(), 2);
    }
}
