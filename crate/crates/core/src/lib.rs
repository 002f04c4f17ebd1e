//! Polarized orbifold del Pezzo surfaces in the weighted P¹×P¹×P¹ format.
//!
//! The crate builds surfaces from the format by projective cones and
//! quasilinear sections, computes their Hilbert series and invariants with
//! exact rationals, finds their orbifold baskets both from the equations
//! ([`geometry`]) and from orbifold Riemann–Roch ([`rr`]), and enumerates
//! candidates within a search window ([`search`]).
//!
//! ```
//! use p1cube::cube::{hilbert_series_wp, MuVector};
//!
//! let s = hilbert_series_wp(&MuVector::new(0, 0, 0, 0, 1, 1)).unwrap();
//! assert_eq!(s.numerator.to_string(), "1 - 9t^2 + 16t^3 - 9t^4 + t^6");
//! ```

pub mod construction;
pub mod cube;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod orbifold;
pub mod rr;
pub mod search;
pub mod series;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/format.md")]
    mod format {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/singularities.md")]
    mod singularities {}
    #[doc = include_str!("../../../book/src/riemann_roch.md")]
    mod riemann_roch {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
