//! Projective cones and quasilinear sections over the format.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::cube::{cube_weights, hilbert_series_wp, MuVector, Vertex, WeightCube};
use crate::error::{Error, Result};
use crate::series::{HilbertSeries, Q};

/// Where a section eliminates a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SectionTarget {
    Vertex(Vertex),
    /// A non-quasilinear section; accepted by `build` but not by the basket analysis.
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Section {
    pub degree: i64,
    pub target: SectionTarget,
}

impl Section {
    pub fn at(degree: i64, v: Vertex) -> Self {
        Self { degree, target: SectionTarget::Vertex(v) }
    }

    pub fn generic(degree: i64) -> Self {
        Self { degree, target: SectionTarget::Generic }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target {
            SectionTarget::Vertex(v) => write!(f, "{}@{}", self.degree, v),
            SectionTarget::Generic => write!(f, "{}@generic", self.degree),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BuildRecipe {
    pub cube: WeightCube,
    pub cones: Vec<i64>,
    pub sections: Vec<Section>,
}

impl BuildRecipe {
    pub fn new(cube: WeightCube, cones: Vec<i64>, sections: Vec<Section>) -> Self {
        Self { cube, cones, sections }
    }

    pub fn from_mu(mu: &MuVector, cones: Vec<i64>, sections: Vec<Section>) -> Result<Self> {
        Ok(Self::new(cube_weights(mu)?, cones, sections))
    }

    /// κ = l + Σ cones − Σ section degrees, so that K = O(−κ).
    pub fn kappa(&self) -> i64 {
        self.cube.socle() + self.cones.iter().sum::<i64>()
            - self.sections.iter().map(|s| s.degree).sum::<i64>()
    }

    pub fn dim(&self) -> i64 {
        3 + self.cones.len() as i64 - self.sections.len() as i64
    }

    pub fn targeted(&self, v: Vertex) -> Option<&Section> {
        self.sections.iter().find(|s| s.target == SectionTarget::Vertex(v))
    }

    fn check(&self) -> Result<()> {
        let mut seen = Vec::new();
        for s in &self.sections {
            if let SectionTarget::Vertex(v) = s.target {
                if seen.contains(&v) {
                    return Err(Error::DuplicateTarget(v.label()));
                }
                seen.push(v);
                if self.cube.weight(v) != s.degree {
                    return Err(Error::NoMatchingVertex { degree: s.degree, vertex: v.label() });
                }
            }
        }
        Ok(())
    }
}

/// Kind of an ambient coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Vertex(Vertex),
    Cone(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmbientVar {
    pub kind: VarKind,
    pub weight: i64,
}

impl AmbientVar {
    pub fn label(&self) -> String {
        match self.kind {
            VarKind::Vertex(v) => v.label(),
            VarKind::Cone(i) => format!("C{}", i + 1),
        }
    }
}

/// A polarized variety X ⊂ P(ambient) with K_X = O(−κ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarizedVariety {
    pub recipe: BuildRecipe,
    pub ambient: Vec<AmbientVar>,
    pub series: HilbertSeries,
    pub dim: i64,
    pub kappa: i64,
}

impl PolarizedVariety {
    /// Fano index; equals κ since κ > 0 for every built variety.
    pub fn index(&self) -> i64 {
        self.kappa
    }

    pub fn ambient_weights(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.ambient.iter().map(|v| v.weight).collect();
        w.sort_unstable();
        w
    }
}

/// Builds a surface; the recipe must have dimension 2.
pub fn build(recipe: &BuildRecipe) -> Result<PolarizedVariety> {
    let dim = recipe.dim();
    if dim != 2 {
        return Err(Error::Dimension(dim));
    }
    build_raw(recipe)
}

/// Builds a variety of any dimension.
pub fn build_raw(recipe: &BuildRecipe) -> Result<PolarizedVariety> {
    recipe.check()?;
    let kappa = recipe.kappa();
    if kappa <= 0 {
        return Err(Error::NotFano(kappa));
    }
    let mut series = hilbert_series_wp(&recipe.cube.mu())?;
    for &c in &recipe.cones {
        series = series.div_one_minus(c)?;
    }
    for s in &recipe.sections {
        series = series.mul_one_minus(s.degree);
    }
    let mut ambient: Vec<AmbientVar> = Vertex::all()
        .filter(|v| recipe.targeted(*v).is_none())
        .map(|v| AmbientVar { kind: VarKind::Vertex(v), weight: recipe.cube.weight(v) })
        .collect();
    for (i, &c) in recipe.cones.iter().enumerate() {
        ambient.push(AmbientVar { kind: VarKind::Cone(i), weight: c });
    }
    Ok(PolarizedVariety { recipe: recipe.clone(), ambient, series, dim: recipe.dim(), kappa })
}

/// Degree and plurigenus data of a polarized surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    /// D² for the polarizing class D with −K = I·D.
    pub dsq: Q,
    /// −K² = I²·D².
    pub minus_ksq: Q,
    /// h⁰(−K), the coefficient of t^I.
    pub h0: u64,
    /// P_X coefficients for n = 0..=max(I, 10).
    pub coefficients: Vec<Q>,
}

pub fn invariants(x: &PolarizedVariety) -> Result<InvariantReport> {
    if x.dim != 2 {
        return Err(Error::Dimension(x.dim));
    }
    let dsq = x.series.residue_at_one(3)?;
    let i = x.kappa;
    let minus_ksq = &dsq * Q::from_integer((i * i).into());
    let order = (i as usize).max(10);
    let coefficients = x.series.expand(order)?;
    let c = &coefficients[i as usize];
    debug_assert!(c.is_integer() && !c.is_negative());
    let h0 = c.to_integer().try_into().unwrap_or(0);
    Ok(InvariantReport { dsq, minus_ksq, h0, coefficients })
}

/// True when h⁰(−K) = 0, which rules out a toric degeneration.
pub fn toric_obstruction(rep: &InvariantReport) -> bool {
    rep.h0 == 0
}

/// Whether every expanded coefficient is a nonnegative integer.
pub fn is_hilbert_function(coeffs: &[Q]) -> bool {
    coeffs.iter().all(|c| c.is_integer() && (c.is_positive() || c.is_zero()))
}
