//! Combinatorial singularity analysis of a built surface.
//!
//! A point of X is sorted by which coordinates vanish. The vertex
//! coordinates (including the ones eliminated by sections) of a point on the
//! format are nonzero exactly on a face of the cube, or all vanish, and the
//! cone coordinates are nonzero on some subset K. Each pair (face, K) is a
//! torus orbit ("cell"); X meets it in the zero set of the section equations
//! restricted to the orbit. With generic coefficients that intersection is
//! decided by the supports alone: a system with supports A₁..A_k has a
//! solution on the torus iff every subfamily J spans an affine lattice of
//! rank at least |J|, and then its dimension is (orbit dim) − k.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use crate::construction::{PolarizedVariety, SectionTarget, VarKind};
use crate::cube::{cube_equations, Vertex};
use crate::orbifold::{Basket, PolarizedPoint};

/// Outcome of the local analysis at one point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointType {
    Smooth,
    Orbifold(PolarizedPoint),
    Unresolved(String),
}

/// Analysis of a coordinate point P_v.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointAnalysis {
    pub label: String,
    pub weight: i64,
    pub on_x: bool,
    pub tangent: Vec<String>,
    pub local: Vec<String>,
    pub kind: PointType,
}

/// One nonempty cell X ∩ (torus orbit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellReport {
    /// Ambient coordinates that are nonzero on the cell.
    pub support: Vec<String>,
    pub dim: i64,
    /// gcd of the support weights: the order of the stabilizer.
    pub order: i64,
    /// Number of points when the cell is finite and the count is forced.
    pub count: Option<u64>,
    pub kind: PointType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumReport {
    pub g: i64,
    pub variables: Vec<String>,
    /// Dimension of X ∩ Π_g, or −1 when empty.
    pub dim: i64,
    pub cells: Vec<CellReport>,
}

impl StratumReport {
    /// Supports of the zero-dimensional coordinate points in the stratum.
    pub fn coordinate_points(&self) -> Vec<String> {
        self.cells.iter().filter(|c| c.support.len() == 1 && c.dim == 0).map(|c| c.support[0].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseComponent {
    pub support: Vec<String>,
    pub dim: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BasketAnalysis {
    pub basket: Basket,
    pub flags: Vec<String>,
}

type Char = Vec<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Cell {
    face: u8,
    cones: u32,
}

/// Incremental row echelon form over Z, used for lattice ranks.
#[derive(Default)]
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn insert(&mut self, v: &[i64]) -> bool {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (p, row) in &self.rows {
            if v[*p] != 0 {
                let (a, b) = (row[*p], v[*p]);
                let g = a.gcd(&b);
                let (ma, mb) = (b / g, a / g);
                for (x, y) in v.iter_mut().zip(row) {
                    *x = *x * mb - y * ma;
                }
                let c = v.iter().fold(0i128, |acc, x| acc.gcd(x));
                if c > 1 {
                    v.iter_mut().for_each(|x| *x /= c);
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Affine hull data of a finite set of characters.
#[derive(Clone, Debug)]
struct Support {
    chars: BTreeSet<Char>,
}

impl Support {
    fn affine_dirs(&self) -> Vec<Char> {
        let mut it = self.chars.iter();
        let Some(base) = it.next() else { return vec![] };
        it.map(|c| c.iter().zip(base).map(|(x, y)| x - y).collect()).collect()
    }
}

/// Structural data of X for the cell analysis.
pub struct Geometry<'a> {
    x: &'a PolarizedVariety,
    ncones: usize,
    weight: Vec<i64>,
    /// Degree of the section eliminating this vertex, if any.
    eliminated: Vec<Option<i64>>,
    is_ambient: Vec<bool>,
    label: Vec<String>,
    chars: Vec<Char>,
    generic: Vec<i64>,
}

fn faces() -> Vec<u8> {
    let mut out = Vec::new();
    let opts: [&[u8]; 3] = [&[1], &[2], &[1, 2]];
    for a in opts {
        for b in opts {
            for c in opts {
                let mut mask = 0u8;
                for v in Vertex::all() {
                    if a.contains(&v.i) && b.contains(&v.j) && c.contains(&v.k) {
                        mask |= 1 << v.index();
                    }
                }
                out.push(mask);
            }
        }
    }
    out
}

fn in_semigroup(n: i64, gens: &[i64]) -> bool {
    if n < 0 {
        return false;
    }
    let mut ok = vec![false; n as usize + 1];
    ok[0] = true;
    for m in 1..=n as usize {
        ok[m] = gens.iter().any(|&g| g as usize <= m && ok[m - g as usize]);
    }
    ok[n as usize]
}

fn max_matching(rows: &[Vec<usize>], cols: &[usize]) -> usize {
    fn augment(r: usize, rows: &[Vec<usize>], allowed: &[bool], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &c in &rows[r] {
            if !allowed[c] || seen[c] {
                continue;
            }
            seen[c] = true;
            if owner[c].is_none() || augment(owner[c].unwrap(), rows, allowed, owner, seen) {
                owner[c] = Some(r);
                return true;
            }
        }
        false
    }
    let n = rows.iter().flatten().chain(cols).copied().max().map_or(0, |m| m + 1);
    let mut allowed = vec![false; n];
    for &c in cols {
        allowed[c] = true;
    }
    let mut owner = vec![None; n];
    let mut size = 0;
    for r in 0..rows.len() {
        let mut seen = vec![false; n];
        if augment(r, rows, &allowed, &mut owner, &mut seen) {
            size += 1;
        }
    }
    size
}

impl<'a> Geometry<'a> {
    pub fn new(x: &'a PolarizedVariety) -> Self {
        let recipe = &x.recipe;
        let ncones = recipe.cones.len();
        let dimc = 6 + ncones;
        let mut weight = Vec::new();
        let mut eliminated = Vec::new();
        let mut is_ambient = Vec::new();
        let mut label = Vec::new();
        let mut chars = Vec::new();
        for v in Vertex::all() {
            weight.push(recipe.cube.weight(v));
            let e = recipe.targeted(v).map(|s| s.degree);
            eliminated.push(e);
            is_ambient.push(e.is_none());
            label.push(v.label());
            let mut c = vec![0; dimc];
            c[v.i as usize - 1] = 1;
            c[2 + v.j as usize - 1] = 1;
            c[4 + v.k as usize - 1] = 1;
            chars.push(c);
        }
        for (i, &w) in recipe.cones.iter().enumerate() {
            weight.push(w);
            eliminated.push(None);
            is_ambient.push(true);
            label.push(format!("C{}", i + 1));
            let mut c = vec![0; dimc];
            c[6 + i] = 1;
            chars.push(c);
        }
        let generic = recipe
            .sections
            .iter()
            .filter(|s| s.target == SectionTarget::Generic)
            .map(|s| s.degree)
            .collect();
        Self { x, ncones, weight, eliminated, is_ambient, label, chars, generic }
    }

    fn nvars(&self) -> usize {
        8 + self.ncones
    }

    fn members(&self, cell: Cell) -> Vec<usize> {
        let mut out: Vec<usize> = (0..8).filter(|&i| cell.face & (1 << i) != 0).collect();
        out.extend((0..self.ncones).filter(|&i| cell.cones & (1 << i) != 0).map(|i| 8 + i));
        out
    }

    fn ambient_support(&self, cell: Cell) -> Vec<usize> {
        self.members(cell).into_iter().filter(|&i| self.is_ambient[i]).collect()
    }

    fn all_cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        let mut fs = vec![0u8];
        fs.extend(faces());
        for &face in &fs {
            for cones in 0..(1u32 << self.ncones) {
                let c = Cell { face, cones };
                if !self.ambient_support(c).is_empty() {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Characters of the degree-d monomials in the given variables.
    fn monomial_chars(&self, vars: &[usize], d: i64) -> Support {
        if d < 0 {
            return Support { chars: BTreeSet::new() };
        }
        let d = d as usize;
        // levels[k] holds the characters of degree-k monomials seen so far
        let mut levels: Vec<BTreeSet<Char>> = vec![BTreeSet::new(); d + 1];
        levels[0].insert(vec![0; 6 + self.ncones]);
        for &v in vars {
            let w = self.weight[v] as usize;
            for k in w..=d {
                if levels[k - w].is_empty() {
                    continue;
                }
                let add: Vec<Char> = levels[k - w]
                    .iter()
                    .map(|c| c.iter().zip(&self.chars[v]).map(|(a, b)| a + b).collect())
                    .collect();
                levels[k].extend(add);
            }
        }
        Support { chars: std::mem::take(&mut levels[d]) }
    }

    /// Active constraints on a cell, or None when a lone monomial kills it.
    fn constraints(&self, cell: Cell) -> Option<Vec<Support>> {
        let amb = self.ambient_support(cell);
        let mut out = Vec::new();
        for u in 0..8 {
            let Some(d) = self.eliminated[u] else { continue };
            let mut s = self.monomial_chars(&amb, d);
            if cell.face & (1 << u) != 0 {
                s.chars.insert(self.chars[u].clone());
            } else if s.chars.is_empty() {
                continue;
            }
            if s.chars.len() == 1 {
                return None;
            }
            out.push(s);
        }
        for &d in &self.generic {
            let s = self.monomial_chars(&amb, d);
            match s.chars.len() {
                0 => continue,
                1 => return None,
                _ => out.push(s),
            }
        }
        Some(out)
    }

    fn orbit_rank(&self, cell: Cell) -> usize {
        let mut e = Echelon::default();
        for i in self.members(cell) {
            e.insert(&self.chars[i]);
        }
        e.rank()
    }

    /// Dimension of X ∩ cell, or None when empty.
    fn cell_dim(&self, cell: Cell) -> Option<(i64, Vec<Support>)> {
        let cons = self.constraints(cell)?;
        let orbit_dim = self.orbit_rank(cell) as i64 - 1;
        let k = cons.len();
        for mask in 1u32..(1 << k) {
            let mut e = Echelon::default();
            for (j, s) in cons.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    for d in s.affine_dirs() {
                        e.insert(&d);
                    }
                }
            }
            if e.rank() < mask.count_ones() as usize {
                return None;
            }
        }
        let dim = orbit_dim - k as i64;
        if dim < 0 {
            None
        } else {
            Some((dim, cons))
        }
    }

    fn order(&self, cell: Cell) -> i64 {
        self.ambient_support(cell).iter().fold(0, |g, &i| g.gcd(&self.weight[i]))
    }

    /// Number of points of a zero-dimensional cell on a one-dimensional orbit.
    fn count_points(&self, cell: Cell, cons: &[Support]) -> Option<u64> {
        let members = self.members(cell);
        let orbit_dim = self.orbit_rank(cell) as i64 - 1;
        if orbit_dim == 0 {
            return Some(1);
        }
        if orbit_dim != 1 || cons.len() != 1 {
            return None;
        }
        // degree-zero characters of the orbit lattice: images of the integer
        // kernel of the weight vector
        let s = members.len();
        let mut d: Vec<i64> = members.iter().map(|&i| self.weight[i]).collect();
        let mut u: Vec<Vec<i64>> = (0..s).map(|i| (0..s).map(|j| i64::from(i == j)).collect()).collect();
        loop {
            let nz: Vec<usize> = (0..s).filter(|&i| d[i] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| d[i].abs()).unwrap();
            for &j in &nz {
                if j != p {
                    let qt = d[j].div_euclid(d[p]);
                    d[j] -= qt * d[p];
                    for row in u.iter_mut() {
                        row[j] -= qt * row[p];
                    }
                }
            }
        }
        let dimc = self.chars[0].len();
        let images: Vec<Char> = (0..s)
            .filter(|&j| d[j] == 0)
            .map(|j| {
                let mut v = vec![0; dimc];
                for (i, &m) in members.iter().enumerate() {
                    for (x, c) in v.iter_mut().zip(&self.chars[m]) {
                        *x += u[i][j] * c;
                    }
                }
                v
            })
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect();
        let first = images.first()?;
        let g = first.iter().fold(0i64, |a, x| a.gcd(x));
        let prim: Char = first.iter().map(|x| x / g).collect();
        let pos = prim.iter().position(|&x| x != 0)?;
        let coef = |v: &Char| v[pos] / prim[pos];
        let gen = images.iter().fold(0i64, |a, v| a.gcd(&coef(v)));
        let base = cons[0].chars.iter().next()?;
        let ks: Vec<i64> = cons[0]
            .chars
            .iter()
            .map(|c| {
                let diff: Char = c.iter().zip(base).map(|(x, y)| x - y).collect();
                coef(&diff) / gen
            })
            .collect();
        Some((ks.iter().max()? - ks.iter().min()?) as u64)
    }

    /// Local analysis at a zero-dimensional cell: which coordinates are
    /// killed by linear terms of the equations and which two remain.
    fn local_type(&self, cell: Cell) -> (PointType, Vec<usize>, Vec<usize>) {
        let members = self.members(cell);
        let inz = |i: usize| members.contains(&i);
        let outside: Vec<usize> = (0..self.nvars()).filter(|&i| !inz(i)).collect();
        let amb_in: Vec<usize> = members.iter().copied().filter(|&i| self.is_ambient[i]).collect();
        let amb_w: Vec<i64> = amb_in.iter().map(|&i| self.weight[i]).collect();
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for eq in cube_equations(&self.x.recipe.cube) {
            let mut cols = BTreeSet::new();
            for (p, q) in [eq.lhs, eq.rhs] {
                let (p, q) = (p.index(), q.index());
                match (inz(p), inz(q)) {
                    (true, false) => {
                        cols.insert(q);
                    }
                    (false, true) => {
                        cols.insert(p);
                    }
                    _ => {}
                }
            }
            if !cols.is_empty() {
                rows.push(cols.into_iter().collect());
            }
        }
        let amb_support_cell = self.ambient_support(cell);
        let mut section_rows = |degree: i64, own: Option<usize>| {
            let restricted = self.monomial_chars(&amb_support_cell, degree);
            let active = own.is_some_and(inz) || !restricted.chars.is_empty();
            if active {
                return;
            }
            let mut cols: BTreeSet<usize> = own.into_iter().collect();
            for &j in &outside {
                if self.is_ambient[j] && in_semigroup(degree - self.weight[j], &amb_w) {
                    cols.insert(j);
                }
            }
            rows.push(cols.into_iter().collect());
        };
        for u in 0..8 {
            if let Some(d) = self.eliminated[u] {
                section_rows(d, Some(u));
            }
        }
        for &d in &self.generic {
            section_rows(d, None);
        }
        let full = max_matching(&rows, &outside);
        let free = outside.len() - full;
        if free != 2 {
            return (
                PointType::Unresolved(format!("{} local variables", free)),
                vec![],
                vec![],
            );
        }
        let g = self.order(cell);
        let mut types = BTreeSet::new();
        let mut first_pair = None;
        for (ix, &x) in outside.iter().enumerate() {
            for &y in &outside[ix + 1..] {
                let rest: Vec<usize> = outside.iter().copied().filter(|&c| c != x && c != y).collect();
                if max_matching(&rows, &rest) == rest.len() {
                    let t = if g == 1 {
                        None
                    } else {
                        Some(PolarizedPoint::new(g, self.weight[x], self.weight[y]))
                    };
                    types.insert(t);
                    let both_ambient = self.is_ambient[x] && self.is_ambient[y];
                    if first_pair.is_none() || (both_ambient && !first_pair.is_some_and(|(_, _, b)| b)) {
                        first_pair = Some((x, y, both_ambient));
                    }
                }
            }
        }
        let Some((x, y, _)) = first_pair else {
            return (PointType::Unresolved("no transversal pair".into()), vec![], vec![]);
        };
        let local = vec![x, y];
        let tangent: Vec<usize> =
            outside.iter().copied().filter(|&c| c != x && c != y && self.is_ambient[c]).collect();
        let kind = if types.len() > 1 {
            PointType::Unresolved("local weights not determined".into())
        } else {
            match types.into_iter().next().unwrap() {
                None => PointType::Smooth,
                Some(p) => PointType::Orbifold(p),
            }
        };
        (kind, tangent, local)
    }

    fn names(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.label[i].clone()).collect()
    }

    fn ambient_index(&self, kind: VarKind) -> usize {
        match kind {
            VarKind::Vertex(v) => v.index(),
            VarKind::Cone(i) => 8 + i,
        }
    }

    /// Analysis of every coordinate point of the ambient space.
    pub fn coordinate_points(&self) -> Vec<PointAnalysis> {
        let cells = self.all_cells();
        self.x
            .ambient
            .iter()
            .map(|var| {
                let v = self.ambient_index(var.kind);
                let hit = cells
                    .iter()
                    .copied()
                    .filter(|&c| self.ambient_support(c) == vec![v])
                    .find(|&c| self.cell_dim(c).is_some_and(|(d, _)| d == 0));
                match hit {
                    None => PointAnalysis {
                        label: self.label[v].clone(),
                        weight: self.weight[v],
                        on_x: false,
                        tangent: vec![],
                        local: vec![],
                        kind: PointType::Smooth,
                    },
                    Some(c) => {
                        let (kind, tangent, local) = self.local_type(c);
                        PointAnalysis {
                            label: self.label[v].clone(),
                            weight: self.weight[v],
                            on_x: true,
                            tangent: self.names(&tangent),
                            local: self.names(&local),
                            kind,
                        }
                    }
                }
            })
            .collect()
    }

    fn cell_report(&self, c: Cell, dim: i64, cons: &[Support]) -> CellReport {
        let order = self.order(c);
        let (count, kind) = if dim == 0 {
            let (kind, _, _) = self.local_type(c);
            (self.count_points(c, cons), kind)
        } else {
            (None, PointType::Unresolved(format!("{}-dimensional", dim)))
        };
        CellReport { support: self.names(&self.ambient_support(c)), dim, order, count, kind }
    }

    fn nonempty_cells(&self) -> Vec<(Cell, i64, Vec<Support>)> {
        self.all_cells()
            .into_iter()
            .filter_map(|c| self.cell_dim(c).map(|(d, cons)| (c, d, cons)))
            .collect()
    }

    /// X ∩ Π_g for every g > 1 dividing at least two ambient weights, one
    /// report per distinct variable set.
    pub fn strata(&self) -> Vec<StratumReport> {
        let amb: Vec<usize> = (0..self.nvars()).filter(|&i| self.is_ambient[i]).collect();
        let maxw = amb.iter().map(|&i| self.weight[i]).max().unwrap_or(1);
        let mut seen: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for g in 2..=maxw {
            let vars: Vec<usize> = amb.iter().copied().filter(|&i| self.weight[i] % g == 0).collect();
            if vars.len() >= 2 {
                let gg = vars.iter().fold(0, |a, &i| a.gcd(&self.weight[i]));
                seen.insert(vars, gg);
            }
        }
        let cells = self.nonempty_cells();
        let mut out: Vec<StratumReport> = seen
            .into_iter()
            .map(|(vars, g)| {
                let inside: Vec<CellReport> = cells
                    .iter()
                    .filter(|(c, _, _)| self.ambient_support(*c).iter().all(|i| vars.contains(i)))
                    .map(|(c, d, cons)| self.cell_report(*c, *d, cons))
                    .collect();
                let dim = inside.iter().map(|c| c.dim).max().unwrap_or(-1);
                StratumReport { g, variables: self.names(&vars), dim, cells: inside }
            })
            .collect();
        out.sort_by(|a, b| a.g.cmp(&b.g).then(a.variables.cmp(&b.variables)));
        out
    }

    /// Whether no singular stratum meets X in positive dimension.
    pub fn wellformed(&self) -> bool {
        self.nonempty_cells().iter().all(|(c, d, _)| *d == 0 || self.order(*c) == 1)
    }

    /// Components of Bs|O(d)| ∩ X, as maximal coordinate supports.
    pub fn base_locus(&self, d: i64) -> Vec<BaseComponent> {
        let mut found: Vec<(Vec<usize>, i64)> = Vec::new();
        for (c, dim, _) in self.nonempty_cells() {
            let amb = self.ambient_support(c);
            if !self.monomial_chars(&amb, d).chars.is_empty() {
                continue;
            }
            found.push((amb, dim));
        }
        let mut maximal: Vec<(Vec<usize>, i64)> = found
            .iter()
            .filter(|(s, _)| !found.iter().any(|(t, _)| t.len() > s.len() && s.iter().all(|i| t.contains(i))))
            .cloned()
            .collect();
        maximal.sort();
        maximal.dedup_by(|a, b| a.0 == b.0 && {
            b.1 = b.1.max(a.1);
            true
        });
        maximal.into_iter().map(|(s, dim)| BaseComponent { support: self.names(&s), dim }).collect()
    }

    /// The geometric basket, with flags for anything not pinned down.
    pub fn basket(&self) -> BasketAnalysis {
        let mut out = BasketAnalysis::default();
        if !self.generic.is_empty() {
            out.flags.push("unsupported: non-quasilinear section".into());
            return out;
        }
        for (c, dim, cons) in self.nonempty_cells() {
            let order = self.order(c);
            if order == 1 {
                continue;
            }
            let support = self.names(&self.ambient_support(c)).join(",");
            if dim > 0 {
                out.flags.push(format!("{}-dimensional locus of order {} on {{{}}}", dim, order, support));
                continue;
            }
            let count = self.count_points(c, &cons);
            let (kind, _, _) = self.local_type(c);
            match (count, kind) {
                (Some(k), PointType::Orbifold(p)) => out.basket.add(p, k as u32),
                (Some(0), _) => {}
                (None, _) => out.flags.push(format!("unresolved: point count on {{{}}}", support)),
                (_, PointType::Unresolved(why)) => {
                    out.flags.push(format!("unresolved: {{{}}} of order {}: {}", support, order, why))
                }
                (_, PointType::Smooth) => {}
            }
        }
        out
    }
}

pub fn coordinate_points(x: &PolarizedVariety) -> Vec<PointAnalysis> {
    Geometry::new(x).coordinate_points()
}

pub fn strata(x: &PolarizedVariety) -> Vec<StratumReport> {
    Geometry::new(x).strata()
}

pub fn wellformed(x: &PolarizedVariety) -> bool {
    Geometry::new(x).wellformed()
}

pub fn base_locus(x: &PolarizedVariety, d: i64) -> Vec<BaseComponent> {
    Geometry::new(x).base_locus(d)
}

pub fn basket(x: &PolarizedVariety) -> BasketAnalysis {
    Geometry::new(x).basket()
}
