//! Computational geometry of flat affine structures on the two-torus.
//!
//! The crate provides:
//!
//! * arithmetic and conjugacy decisions in the universal cover of GL⁺(2,ℝ)
//!   ([`cover`]);
//! * the quadratic cone of translation-invariant flat affine structures —
//!   two-dimensional commutative associative algebra products — with its
//!   six-stratum classification, group action, and one-parameter
//!   degenerations ([`cone`]);
//! * étale representations, developing maps, and holonomy for those
//!   structures, together with the model groups of each stratum and their
//!   normalizers ([`etale`]);
//! * quadrilateral gluing data, their validity diagnostics, and developing
//!   tilings of the plane ([`gluing`]);
//! * constructors and classifiers for the complete list of flat affine
//!   two-tori, including the non-invariant families built from expansions
//!   ([`classify`]);
//! * numeric witnesses for phenomena of the moduli space: non-closed orbits,
//!   branching over distinct lift classes, and a local injectivity probe
//!   ([`charvariety`]);
//! * deterministic SVG rendering of tilings and degeneration sequences
//!   ([`render`]).

// Validation guards are written `if !(x > y)` on purpose: a NaN comparison is
// false, so NaN always falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod charvariety;
pub mod classify;
pub mod cone;
pub mod cover;
pub mod error;
pub mod etale;
pub mod gluing;
pub mod render;

pub use affine::{AffineMap2, EigenClass2, Mat2, Vec2};
pub use cone::{AlgebraProduct, StratumType};
pub use cover::{GLTildeElement, IwasawaFactors};
pub use error::{Error, Result};
