//! The universal covering group of GL⁺(2,ℝ).
//!
//! An element of the cover is stored as its projection `m` (a 2×2 matrix with
//! positive determinant) together with a real branch angle `theta`. The angle
//! is pinned by the Iwasawa decomposition `m = K(θ₀)·diag(a₁,a₂)·[[1,n],[0,1]]`
//! with
//!
//! ```text
//!          ⎡  cos θ   sin θ ⎤
//!   K(θ) = ⎣ −sin θ   cos θ ⎦ ,
//! ```
//!
//! the requirement being `theta ≡ θ₀ (mod 2π)`. Geometrically `theta` is the
//! continuously tracked polar angle of `m·e₁`, up to sign; the central element
//! `τ` covering `−E₂` has `theta = π`, and `τ²` generates the kernel of the
//! covering projection.
//!
//! Products select the branch of `θ₀(m_g·m_h)` lying in the open window
//! `(θ_g + θ_h − π, θ_g + θ_h + π)`; this is the unique choice compatible
//! with path lifting and makes `θ` sub-additive with defect < π.

use serde::{Deserialize, Serialize};

use crate::affine::{eig2, jordan_sign, mat2_from_array, mat2_to_array, rotation_sense, EigenClass2, Mat2, Vec2, DISC_TOL};
use crate::error::{Error, Result};

use std::f64::consts::PI;

/// Tolerance for θ comparisons (conjugacy decisions, level extraction).
pub const THETA_TOL: f64 = 1e-6;

/// Iwasawa factors of a matrix with positive determinant:
/// `m = K(θ₀)·diag(a₁,a₂)·[[1,n₁₂],[0,1]]` with `θ₀ ∈ (−π,π]`, `a₁,a₂ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwasawaFactors {
    pub theta0: f64,
    pub a1: f64,
    pub a2: f64,
    pub n12: f64,
}

impl IwasawaFactors {
    /// Rebuild the matrix from the factors.
    pub fn reconstruct(&self) -> Mat2 {
        rotation(self.theta0)
            * Mat2::new(self.a1, 0.0, 0.0, self.a2)
            * Mat2::new(1.0, self.n12, 0.0, 1.0)
    }
}

/// The rotation `K(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Mat2 {
    Mat2::new(theta.cos(), theta.sin(), -theta.sin(), theta.cos())
}

/// Iwasawa decomposition of a positive-determinant matrix, by Gram–Schmidt on
/// the columns. Unique; `θ₀` is read off the orthogonal factor.
pub fn iwasawa(m: &Mat2) -> Result<IwasawaFactors> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPositiveDeterminant { det });
    }
    let c1 = m.column(0).into_owned();
    let a1 = c1.norm();
    let q1 = c1 / a1;
    let c2 = m.column(1).into_owned();
    let r12 = q1.dot(&c2);
    let w = c2 - q1 * r12;
    let a2 = w.norm();
    // det m > 0 forces det [q1 q2] = +1, so Q = K(θ₀) for a unique θ₀ with
    // cos θ₀ = q1.x and sin θ₀ = −q1.y. Pin the boundary value to +π.
    let mut theta0 = (-q1.y).atan2(q1.x);
    if theta0 <= -PI {
        theta0 = PI;
    }
    debug_assert!(a2 > 0.0);
    Ok(IwasawaFactors { theta0, a1, a2, n12: r12 / a1 })
}

/// An element of the universal cover of GL⁺(2,ℝ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GLTildeElement {
    m: Mat2,
    theta: f64,
}

impl GLTildeElement {
    /// Projection to GL⁺(2,ℝ).
    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    /// Branch angle θ.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn identity() -> Self {
        GLTildeElement { m: Mat2::identity(), theta: 0.0 }
    }

    /// Validates the branch invariant `theta ≡ θ₀(m) (mod 2π)` and builds the
    /// element. Used by deserialization and tests that construct raw data.
    pub fn from_raw(m: Mat2, theta: f64) -> Result<Self> {
        let f = iwasawa(&m)?;
        let k = ((theta - f.theta0) / (2.0 * PI)).round();
        let defect = (theta - f.theta0 - 2.0 * PI * k).abs();
        if defect > 1e-9 * theta.abs().max(1.0) {
            return Err(Error::Degenerate {
                detail: format!("theta {theta} is no branch of θ₀ = {} (defect {defect:.3e})", f.theta0),
            });
        }
        Ok(GLTildeElement { m, theta })
    }
}

/// The lift of `m` with branch index `k`: `theta = θ₀(m) + 2πk`.
pub fn lift(m: &Mat2, k: i64) -> Result<GLTildeElement> {
    let f = iwasawa(m)?;
    Ok(GLTildeElement { m: *m, theta: f.theta0 + 2.0 * PI * (k as f64) })
}

/// The central element τ covering `−E₂`, with `θ(τ) = π`.
pub fn tau() -> GLTildeElement {
    GLTildeElement { m: -Mat2::identity(), theta: PI }
}

/// `τ^n`.
pub fn tau_pow(n: i64) -> GLTildeElement {
    let m = if n.rem_euclid(2) == 0 { Mat2::identity() } else { -Mat2::identity() };
    GLTildeElement { m, theta: PI * n as f64 }
}

/// Lift of the rotation subgroup: `K̃(φ)` with `θ(K̃(φ)) = φ` for every real φ.
pub fn rotation_lift(phi: f64) -> GLTildeElement {
    GLTildeElement { m: rotation(phi), theta: phi }
}

/// Branch-selected product: the matrix part is `m_g·m_h`, and θ is the unique
/// representative of `θ₀(m_g·m_h) (mod 2π)` inside `(θ_g + θ_h − π, θ_g + θ_h + π)`.
pub fn try_mul(g: &GLTildeElement, h: &GLTildeElement) -> Result<GLTildeElement> {
    let m = g.m * h.m;
    let f = iwasawa(&m)?;
    let center = g.theta + h.theta;
    let k = ((center - f.theta0) / (2.0 * PI)).round();
    let theta = f.theta0 + 2.0 * PI * k;
    let margin = PI - (theta - center).abs();
    if margin < 1e-9 {
        return Err(Error::BranchAmbiguity { margin });
    }
    Ok(GLTildeElement { m, theta })
}

/// Product; panics on [`Error::BranchAmbiguity`], which valid lifts cannot
/// produce (strictness of the triangle defect).
pub fn mul(g: &GLTildeElement, h: &GLTildeElement) -> GLTildeElement {
    try_mul(g, h).expect("branch selection is unambiguous for valid lifts")
}

/// Inverse: the branch with `|θ(g) + θ(g⁻¹)| < π`.
pub fn inv(g: &GLTildeElement) -> GLTildeElement {
    let m = g.m.try_inverse().expect("det > 0");
    let f = iwasawa(&m).expect("det > 0");
    let k = ((-g.theta - f.theta0) / (2.0 * PI)).round();
    GLTildeElement { m, theta: f.theta0 + 2.0 * PI * k }
}

/// Integer power by repeated branch-selected products.
pub fn pow(g: &GLTildeElement, n: i64) -> GLTildeElement {
    let (base, n) = if n < 0 { (inv(g), -n) } else { (*g, n) };
    let mut acc = GLTildeElement::identity();
    for _ in 0..n {
        acc = mul(&acc, &base);
    }
    acc
}

impl std::ops::Mul for GLTildeElement {
    type Output = GLTildeElement;
    fn mul(self, rhs: GLTildeElement) -> GLTildeElement {
        mul(&self, &rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct GLTildeWire {
    m: [f64; 4],
    theta: f64,
}

impl Serialize for GLTildeElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GLTildeWire { m: mat2_to_array(&self.m), theta: self.theta }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GLTildeElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = GLTildeWire::deserialize(d)?;
        GLTildeElement::from_raw(mat2_from_array(&w.m), w.theta).map_err(serde::de::Error::custom)
    }
}

// ───────────────────────── level and dynamical classifiers ─────────────────────────

/// A determinant-positive conjugator `c` such that `c·m·c⁻¹` is upper
/// triangular; exists exactly when the eigenvalues are real.
pub fn triangularizer(m: &Mat2) -> Result<Mat2> {
    match eig2(m) {
        EigenClass2::Complex { .. } => Err(Error::NotTriangularizable),
        EigenClass2::RealRepeatedDiagonal(_) => Ok(Mat2::identity()),
        EigenClass2::RealRepeatedJordan(lambda) => {
            // v spans the eigenline; extend to a det > 0 orthogonal basis.
            let v = eigenvector(m, lambda);
            let w = Vec2::new(-v.y, v.x);
            let p = Mat2::from_columns(&[v, w]);
            Ok(p.try_inverse().expect("orthogonal columns"))
        }
        EigenClass2::RealDistinct(l1, l2) => {
            let v1 = eigenvector(m, l1);
            let mut v2 = eigenvector(m, l2);
            if v1.x * v2.y - v1.y * v2.x < 0.0 {
                v2 = -v2;
            }
            let p = Mat2::from_columns(&[v1, v2]);
            p.try_inverse().ok_or(Error::SingularMatrix)
        }
    }
}

/// A unit eigenvector of `m` for the (real) eigenvalue `lambda`.
fn eigenvector(m: &Mat2, lambda: f64) -> Vec2 {
    let a = m - Mat2::identity() * lambda;
    // Rows of a are orthogonal to the eigenvector; use the larger one.
    let r1 = Vec2::new(a[(0, 0)], a[(0, 1)]);
    let r2 = Vec2::new(a[(1, 0)], a[(1, 1)]);
    let r = if r1.norm() >= r2.norm() { r1 } else { r2 };
    if r.norm() <= DISC_TOL * m.amax().max(1.0) {
        // m ≈ λE: every vector is an eigenvector.
        return Vec2::x();
    }
    let v = Vec2::new(-r.y, r.x);
    v / v.norm()
}

/// The level of a lift with triangularizable projection: conjugating the lift
/// by (a lift of) a det > 0 triangularizing conjugator lands in a lift of
/// `AN ∪ τ·AN`, whose θ is a multiple of π. Returns that multiple.
///
/// Conjugation-invariant, and additive under central multiplication by τ.
pub fn level(g: &GLTildeElement) -> Result<i64> {
    let c = triangularizer(&g.m)?;
    let cl = lift(&c, 0)?;
    let conj = mul(&mul(&cl, g), &inv(&cl));
    let k = (conj.theta / PI).round();
    let defect = (conj.theta - k * PI).abs();
    if defect > THETA_TOL {
        return Err(Error::Degenerate {
            detail: format!("conjugated θ = {} is not a multiple of π (defect {defect:.3e})", conj.theta),
        });
    }
    Ok(k as i64)
}

/// The unique level-0 lift of a matrix with positive real eigenvalues.
///
/// Lifts of `m` differ by even central powers of τ, so levels of lifts fill a
/// single residue class mod 2; for positive real eigenvalues that class is
/// even and a level-0 representative exists.
pub fn level_zero_lift(m: &Mat2) -> Result<GLTildeElement> {
    let g0 = lift(m, 0)?;
    let l0 = level(&g0)?;
    if l0 == 0 {
        return Ok(g0);
    }
    if l0.rem_euclid(2) != 0 {
        return Err(Error::Degenerate {
            detail: format!("no level-0 lift exists: base branch has odd level {l0}"),
        });
    }
    lift(m, -l0 / 2)
}

/// Dynamical type of a positive-determinant matrix acting on the punctured
/// plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpandingClass {
    /// Real eigenvalues, all > 1.
    Expansion,
    /// Real eigenvalues, all < −1 (an expansion composed with the rotation by π).
    ExpansionTimesRPi,
    /// Complex eigenvalues of modulus > 1.
    ExpandingSpiral,
    NotExpanding,
}

pub fn expansion_class(m: &Mat2) -> ExpandingClass {
    match eig2(m) {
        EigenClass2::RealDistinct(l1, l2) => {
            if l1 > 1.0 && l2 > 1.0 {
                ExpandingClass::Expansion
            } else if l1 < -1.0 && l2 < -1.0 {
                ExpandingClass::ExpansionTimesRPi
            } else {
                ExpandingClass::NotExpanding
            }
        }
        EigenClass2::RealRepeatedDiagonal(l) | EigenClass2::RealRepeatedJordan(l) => {
            if l > 1.0 {
                ExpandingClass::Expansion
            } else if l < -1.0 {
                ExpandingClass::ExpansionTimesRPi
            } else {
                ExpandingClass::NotExpanding
            }
        }
        EigenClass2::Complex { modulus, .. } => {
            if modulus > 1.0 {
                ExpandingClass::ExpandingSpiral
            } else {
                ExpandingClass::NotExpanding
            }
        }
    }
}

/// Whether the θ coordinates of the iterates of `g` on the cover of the
/// punctured plane are unbounded. False exactly when the projection has
/// positive real eigenvalues and the lift has level 0.
pub fn has_nonzero_rotation(g: &GLTildeElement) -> bool {
    match eig2(&g.m) {
        EigenClass2::Complex { .. } => true,
        EigenClass2::RealDistinct(l1, l2) if l1 > 0.0 && l2 > 0.0 => {
            level(g).map(|k| k != 0).unwrap_or(true)
        }
        EigenClass2::RealRepeatedDiagonal(l) | EigenClass2::RealRepeatedJordan(l) if l > 0.0 => {
            level(g).map(|k| k != 0).unwrap_or(true)
        }
        _ => true, // negative real eigenvalues: projection involves the rotation by π
    }
}

// ───────────────────────── conjugacy ─────────────────────────

/// The groups in which conjugacy of (lifts of) matrices can be decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjugacyGroup {
    GLplus,
    GLtilde,
    PGL,
}

const CLASS_BAND_LO: f64 = 1e-9;
const CLASS_BAND_HI: f64 = 1e-6;

/// Guard: eigen-classification of `m` must not fall inside the ambiguous
/// discriminant band `(1e-9, 1e-6)·max(1, tr²)`.
fn guard_class_boundary(m: &Mat2) -> Result<()> {
    let tr = m.trace();
    let disc = tr * tr - 4.0 * m.determinant();
    let scale = (tr * tr).max(1.0);
    if disc.abs() > CLASS_BAND_LO * scale && disc.abs() < CLASS_BAND_HI * scale {
        return Err(Error::Degenerate {
            detail: format!("discriminant {disc:.3e} lies in the ambiguous band"),
        });
    }
    Ok(())
}

fn spectra_equal(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Conjugacy in GL⁺(2,ℝ), decided by case analysis on the spectral class.
///
/// * distinct real spectra ⇔ equal spectra;
/// * scalar ⇔ equal scalar;
/// * Jordan ⇔ equal eigenvalue and equal sign of the off-diagonal datum
///   (`[[λ,1],[0,λ]]` and `[[λ,−1],[0,λ]]` are *not* GL⁺-conjugate);
/// * complex ⇔ equal (trace, det) and equal rotation sense.
pub fn conjugate_glplus(g: &Mat2, h: &Mat2) -> Result<bool> {
    for m in [g, h] {
        if !(m.determinant() > 0.0) {
            return Err(Error::NonPositiveDeterminant { det: m.determinant() });
        }
        guard_class_boundary(m)?;
    }
    Ok(match (eig2(g), eig2(h)) {
        (EigenClass2::RealDistinct(a1, a2), EigenClass2::RealDistinct(b1, b2)) => {
            spectra_equal(a1, b1, CLASS_BAND_LO) && spectra_equal(a2, b2, CLASS_BAND_LO)
        }
        (EigenClass2::RealRepeatedDiagonal(a), EigenClass2::RealRepeatedDiagonal(b)) => {
            spectra_equal(a, b, CLASS_BAND_LO)
        }
        (EigenClass2::RealRepeatedJordan(a), EigenClass2::RealRepeatedJordan(b)) => {
            spectra_equal(a, b, CLASS_BAND_LO) && jordan_sign(g, a) == jordan_sign(h, b)
        }
        (EigenClass2::Complex { .. }, EigenClass2::Complex { .. }) => {
            spectra_equal(g.trace(), h.trace(), CLASS_BAND_LO)
                && spectra_equal(g.determinant(), h.determinant(), CLASS_BAND_LO)
                && rotation_sense(g) == rotation_sense(h)
        }
        _ => false,
    })
}

/// An explicit det > 0 conjugator `c` with `c·g·c⁻¹ = h`, assuming
/// `conjugate_glplus(g, h)` is true.
pub fn glplus_conjugator(g: &Mat2, h: &Mat2) -> Result<Mat2> {
    let pg = class_frame(g)?;
    let ph = class_frame(h)?;
    let c = ph * pg.try_inverse().ok_or(Error::SingularMatrix)?;
    Ok(c)
}

/// A basis `P` (as a matrix of columns) taking the class normal form to `m`,
/// i.e. `P⁻¹·m·P` is the normal form; built so that two GL⁺-conjugate
/// matrices receive frames differing by the desired conjugator.
fn class_frame(m: &Mat2) -> Result<Mat2> {
    match eig2(m) {
        EigenClass2::RealDistinct(l1, l2) => {
            let v1 = eigenvector(m, l1);
            let mut v2 = eigenvector(m, l2);
            if v1.x * v2.y - v1.y * v2.x < 0.0 {
                v2 = -v2;
            }
            Ok(Mat2::from_columns(&[v1, v2]))
        }
        EigenClass2::RealRepeatedDiagonal(_) => Ok(Mat2::identity()),
        EigenClass2::RealRepeatedJordan(lambda) => {
            // b = [Nu, u] gives b⁻¹·m·b = [[λ,1],[0,λ]] exactly; sign(det b)
            // is the Jordan datum, so same-class frames compose to det > 0.
            let n = m - Mat2::identity() * lambda;
            let u = if (n * Vec2::x()).norm() >= (n * Vec2::y()).norm() { Vec2::x() } else { Vec2::y() };
            Ok(Mat2::from_columns(&[n * u, u]))
        }
        EigenClass2::Complex { .. } => {
            // m = P·[[x,y],[−y,x]]·P⁻¹ with y > 0; P has det > 0 exactly when
            // the rotation sense of m is clockwise (m21 < m12). For matching
            // senses the dets match and the quotient conjugator has det > 0.
            let x = m.trace() / 2.0;
            let y = (4.0 * m.determinant() - m.trace().powi(2)).sqrt() / 2.0;
            // Real/imaginary parts of an eigenvector for x + iy: solve
            // (m − (x+iy)E)(v_re + i·v_im) = 0 via the first row.
            let a = m[(0, 0)] - x;
            let b = m[(0, 1)];
            // Row (a − iy, b): v = (−b, a − iy) works unless b ≈ 0.
            let (v_re, v_im) = if b.abs() > DISC_TOL * m.amax().max(1.0) {
                (Vec2::new(-b, a), Vec2::new(0.0, -y))
            } else {
                // b ≈ 0 forces a ≈ ±y ≠ 0; use the second row (c, d − iy)·v = 0.
                let c = m[(1, 0)];
                let d = m[(1, 1)] - x;
                (Vec2::new(d, -c), Vec2::new(-y, 0.0))
            };
            Ok(Mat2::from_columns(&[v_re, v_im]))
        }
    }
}

/// Conjugacy in the universal cover: the projections must be GL⁺-conjugate
/// and a (single, explicit) conjugator must carry θ(g) to θ(h) within 1e-6.
/// One conjugator suffices: centralizer components differ by `−E₂`, whose
/// lifts are central.
pub fn conjugate_gltilde(g: &GLTildeElement, h: &GLTildeElement) -> Result<bool> {
    if !conjugate_glplus(&g.m, &h.m)? {
        return Ok(false);
    }
    let c = glplus_conjugator(&g.m, &h.m)?;
    let cl = lift(&c, 0)?;
    let conj = mul(&mul(&cl, g), &inv(&cl));
    Ok((conj.theta - h.theta).abs() < THETA_TOL)
}

/// Conjugacy in GL(2,ℝ) (conjugators of either determinant sign): the sign
/// invariants of the GL⁺ case (Jordan datum, rotation sense) disappear.
fn conjugate_gl_full(g: &Mat2, h: &Mat2) -> Result<bool> {
    for m in [g, h] {
        guard_class_boundary(m)?;
    }
    Ok(match (eig2(g), eig2(h)) {
        (EigenClass2::RealDistinct(a1, a2), EigenClass2::RealDistinct(b1, b2)) => {
            spectra_equal(a1, b1, CLASS_BAND_LO) && spectra_equal(a2, b2, CLASS_BAND_LO)
        }
        (EigenClass2::RealRepeatedDiagonal(a), EigenClass2::RealRepeatedDiagonal(b)) => {
            spectra_equal(a, b, CLASS_BAND_LO)
        }
        (EigenClass2::RealRepeatedJordan(a), EigenClass2::RealRepeatedJordan(b)) => {
            spectra_equal(a, b, CLASS_BAND_LO)
        }
        (EigenClass2::Complex { .. }, EigenClass2::Complex { .. }) => {
            spectra_equal(g.trace(), h.trace(), CLASS_BAND_LO)
                && spectra_equal(g.determinant(), h.determinant(), CLASS_BAND_LO)
        }
        _ => false,
    })
}

/// Conjugacy in PGL(2,ℝ): GL(2,ℝ)-conjugacy of `g` to `h` or to `−h`.
pub fn conjugate_pgl(g: &Mat2, h: &Mat2) -> Result<bool> {
    Ok(conjugate_gl_full(g, h)? || conjugate_gl_full(g, &(-h))?)
}

/// Single dispatch over the three groups, for matrix inputs. `GLtilde`
/// interprets the inputs as their level-0 lifts; use [`conjugate_gltilde`]
/// directly to compare other branches.
pub fn conjugate_in(g: &Mat2, h: &Mat2, group: ConjugacyGroup) -> Result<bool> {
    match group {
        ConjugacyGroup::GLplus => conjugate_glplus(g, h),
        ConjugacyGroup::PGL => conjugate_pgl(g, h),
        ConjugacyGroup::GLtilde => conjugate_gltilde(&lift(g, 0)?, &lift(h, 0)?),
    }
}
