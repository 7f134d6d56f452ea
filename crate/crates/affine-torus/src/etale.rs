//! Étale affine representations of ℝ², their developing maps and holonomy,
//! and the six model groups of affine motions with their normalizers.
//!
//! A cone point `S` integrates to the representation
//! `ρ_S(v) = exp_affine(L_v, v)` where `L_v = S(v, ·)`; commutativity and
//! associativity of `S` make `ρ_S` a homomorphism from the abelian group ℝ².
//! The developing map is the orbit map of the origin, `D_S(v) = ρ_S(v)(0)`,
//! and the holonomy of the induced structure on the torus ℝ²/ℤ² is the pair
//! of images of the standard lattice generators.

use serde::{Deserialize, Serialize};

use crate::affine::{exp_affine, AffineMap2, Mat2, Vec2};
use crate::cone::{AlgebraProduct, StratumType};
use crate::cover::rotation;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Commuting images of the two standard lattice generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolonomyPair {
    pub h1: AffineMap2,
    pub h2: AffineMap2,
}

impl HolonomyPair {
    pub fn new(h1: AffineMap2, h2: AffineMap2) -> Self {
        HolonomyPair { h1, h2 }
    }

    pub fn commutator_residual(&self) -> f64 {
        self.h1.commutator_residual(&self.h2)
    }

    /// Both linear parts orientation-preserving and the pair commutes.
    pub fn validate(&self) -> Result<()> {
        for h in [&self.h1, &self.h2] {
            let det = h.linear.determinant();
            if !(det > 0.0) {
                return Err(Error::NonPositiveDeterminant { det });
            }
        }
        let r = self.commutator_residual();
        if r >= NORM_TOL * self.h1.linear.amax().max(self.h2.linear.amax()).max(1.0) {
            return Err(Error::NonCommuting { residual: r });
        }
        Ok(())
    }
}

/// The étale affine representation attached to a cone point:
/// `ρ_S(v) = exp_affine(L_v, v)`.
pub fn rho_s(s: &AlgebraProduct, v: &Vec2) -> Result<AffineMap2> {
    let r = s.associativity_residual();
    let scale = s.amax();
    if r >= crate::cone::CONE_TOL * (scale * scale).max(1.0) {
        return Err(Error::NotInCone { residual: r });
    }
    Ok(exp_affine(&s.left_mult(v), v))
}

/// The developing map `D_S(v) = ρ_S(v)(0)`; its Jacobian at `v = 0` is the
/// identity.
pub fn develop(s: &AlgebraProduct, v: &Vec2) -> Result<Vec2> {
    Ok(rho_s(s, v)?.translation)
}

/// Holonomy of the translation-invariant structure: the images of the two
/// standard generators of the deck lattice ℤ².
pub fn holonomy_of(s: &AlgebraProduct) -> Result<HolonomyPair> {
    Ok(HolonomyPair::new(rho_s(s, &Vec2::x())?, rho_s(s, &Vec2::y())?))
}

/// Shape of the open orbit a stratum's model group develops onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DevelopmentImage {
    Plane,
    HalfPlane,
    Sector,
    PuncturedPlane,
}

pub fn development_image(stratum: StratumType) -> DevelopmentImage {
    match stratum {
        StratumType::T | StratumType::D => DevelopmentImage::Plane,
        StratumType::C1 | StratumType::C2 => DevelopmentImage::HalfPlane,
        StratumType::B => DevelopmentImage::Sector,
        StratumType::A => DevelopmentImage::PuncturedPlane,
    }
}

/// Base point of the model domain: the orbit of this point under the model
/// group is the whole domain, and `develop(model_product(X), v)` equals
/// `model_orbit(X, v) − base_point(X)`.
pub fn base_point(stratum: StratumType) -> Vec2 {
    match stratum {
        StratumType::T | StratumType::D => Vec2::new(0.0, 0.0),
        StratumType::C1 | StratumType::C2 => Vec2::new(0.0, 1.0),
        StratumType::B => Vec2::new(1.0, 1.0),
        StratumType::A => Vec2::new(1.0, 0.0),
    }
}

/// The orbit chart of the model domain: the developing map translated back
/// to the base point. For the linear-group strata (`C1`, `B`, `A`) this
/// equals `exp(L_v)` applied to the base point; for the stratum `A` it is
/// the polar parametrization `(t, θ) ↦ e^t·(cos θ, sin θ)`.
pub fn model_orbit(stratum: StratumType, v: &Vec2) -> Vec2 {
    let s = crate::cone::model_product(stratum);
    let m = exp_affine(&s.left_mult(v), v);
    m.translation + base_point(stratum)
}

/// A point of one of the six model groups of affine motions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelGroupElement {
    pub stratum: StratumType,
    pub params: [f64; 2],
}

impl ModelGroupElement {
    pub fn to_affine(&self) -> Result<AffineMap2> {
        model_group_element(self.stratum, self.params)
    }
}

/// The exact matrix of the stratum's model group at the given parameters:
///
/// * `T`, params `(u, v)`: the translation by `(u, v)`;
/// * `D`, params `(u, v)`: linear `[[1, v], [0, 1]]`, translation `(u + ½v², v)`;
/// * `C1`, params `(t, z)`: linear `[[eᵗ, z], [0, eᵗ]]`;
/// * `C2`, params `(v, t)`: linear `diag(1, eᵗ)`, translation `(v, 0)`;
/// * `B`, params `(a, b)` with `a, b > 0`: linear `diag(a, b)`;
/// * `A`, params `(t, θ)`: linear `eᵗ·K(θ)`.
pub fn model_group_element(stratum: StratumType, params: [f64; 2]) -> Result<AffineMap2> {
    let [p, q] = params;
    Ok(match stratum {
        StratumType::T => AffineMap2::from_translation(Vec2::new(p, q)),
        StratumType::D => AffineMap2::new(
            Mat2::new(1.0, q, 0.0, 1.0),
            Vec2::new(p + 0.5 * q * q, q),
        ),
        StratumType::C1 => AffineMap2::from_linear(Mat2::new(p.exp(), q, 0.0, p.exp())),
        StratumType::C2 => AffineMap2::new(Mat2::new(1.0, 0.0, 0.0, q.exp()), Vec2::new(p, 0.0)),
        StratumType::B => {
            if !(p > 0.0 && q > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "sector group needs positive diagonal entries, got ({p}, {q})"
                )));
            }
            AffineMap2::from_linear(Mat2::new(p, 0.0, 0.0, q))
        }
        StratumType::A => AffineMap2::from_linear(rotation(q) * p.exp()),
    })
}

/// Membership of an affine map in the normalizer of the stratum's model
/// group inside the affine group of the plane:
///
/// * `T`: every invertible affine map;
/// * `D`: linear part `[[d², c], [0, d]]` with `d ≠ 0`, any translation;
/// * `C1`: invertible upper-triangular linear map, zero translation;
/// * `C2`: invertible diagonal linear part, translation along the first axis;
/// * `B`: invertible monomial (diagonal or antidiagonal) linear map, zero
///   translation — index eight, quotient generated by the two axis
///   reflections and the swap;
/// * `A`: conformal or anticonformal nonzero linear map, zero translation —
///   index two, quotient generated by the swap.
pub fn normalizer_check(stratum: StratumType, g: &AffineMap2) -> bool {
    let l = g.linear;
    let t = g.translation;
    let s = l.amax().max(1.0);
    let tol = NORM_TOL * s;
    let invertible = l.determinant().abs() > NORM_TOL * s * s;
    let translation_zero = t.norm() <= NORM_TOL;
    match stratum {
        StratumType::T => invertible,
        StratumType::D => {
            let d = l[(1, 1)];
            invertible
                && l[(1, 0)].abs() <= tol
                && (l[(0, 0)] - d * d).abs() <= NORM_TOL * s.max(s * s)
        }
        StratumType::C1 => invertible && l[(1, 0)].abs() <= tol && translation_zero,
        StratumType::C2 => {
            invertible && l[(0, 1)].abs() <= tol && l[(1, 0)].abs() <= tol && t.y.abs() <= NORM_TOL
        }
        StratumType::B => {
            let diagonal = l[(0, 1)].abs() <= tol && l[(1, 0)].abs() <= tol;
            let antidiagonal = l[(0, 0)].abs() <= tol && l[(1, 1)].abs() <= tol;
            invertible && (diagonal || antidiagonal) && translation_zero
        }
        StratumType::A => {
            let conformal = (l[(0, 0)] - l[(1, 1)]).abs() <= tol && (l[(0, 1)] + l[(1, 0)]).abs() <= tol;
            let anticonformal =
                (l[(0, 0)] + l[(1, 1)]).abs() <= tol && (l[(0, 1)] - l[(1, 0)]).abs() <= tol;
            invertible && (conformal || anticonformal) && translation_zero
        }
    }
}
