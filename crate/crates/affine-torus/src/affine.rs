//! Small-matrix primitives: 2×2 spectral analysis and the closed-form affine
//! exponential.
//!
//! Everything downstream (covering-group arithmetic, étale representations,
//! gluing) is built from two operations defined here:
//!
//! * [`eig2`] — total spectral classification of a real 2×2 matrix into one of
//!   four classes, with deterministic behaviour near the parabolic locus
//!   (repeated eigenvalues);
//! * [`exp_affine`] — the exponential of the 3×3 block matrix
//!   `[[L, v], [0, 0]]`, returned as an affine map with linear part `e^L` and
//!   translation `φ(L)·v`, where `φ(L) = Σ_{k≥0} L^k/(k+1)!`.

use nalgebra::{Matrix2, Matrix3, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

/// Relative tolerance deciding `repeated` vs `distinct`/`complex` eigenvalues:
/// |Δ| < DISC_TOL·max(1, tr²) is treated as a repeated eigenvalue.
pub const DISC_TOL: f64 = 1e-9;

/// An affine self-map of the plane, `x ↦ linear·x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap2 {
    pub linear: Mat2,
    pub translation: Vec2,
}

impl AffineMap2 {
    pub fn new(linear: Mat2, translation: Vec2) -> Self {
        AffineMap2 { linear, translation }
    }

    pub fn identity() -> Self {
        AffineMap2::new(Mat2::identity(), Vec2::zeros())
    }

    pub fn from_translation(t: Vec2) -> Self {
        AffineMap2::new(Mat2::identity(), t)
    }

    pub fn from_linear(l: Mat2) -> Self {
        AffineMap2::new(l, Vec2::zeros())
    }

    pub fn apply(&self, x: Vec2) -> Vec2 {
        self.linear * x + self.translation
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &AffineMap2) -> AffineMap2 {
        AffineMap2::new(
            self.linear * other.linear,
            self.linear * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Result<AffineMap2> {
        let inv = self.linear.try_inverse().ok_or(Error::SingularMatrix)?;
        Ok(AffineMap2::new(inv, -(inv * self.translation)))
    }

    /// Max-norm distance between the coefficients of two maps.
    pub fn distance(&self, other: &AffineMap2) -> f64 {
        let dl = self.linear - other.linear;
        let dt = self.translation - other.translation;
        dl.amax().max(dt.amax())
    }

    /// Residual of the commutator `self∘other − other∘self` in max-norm.
    pub fn commutator_residual(&self, other: &AffineMap2) -> f64 {
        self.compose(other).distance(&other.compose(self))
    }
}

/// Serialization façade: `{"l": [m11,m12,m21,m22], "t": [x,y]}`.
#[derive(Serialize, Deserialize)]
struct AffineMapWire {
    l: [f64; 4],
    t: [f64; 2],
}

impl Serialize for AffineMap2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AffineMapWire {
            l: mat2_to_array(&self.linear),
            t: [self.translation.x, self.translation.y],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffineMap2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = AffineMapWire::deserialize(d)?;
        Ok(AffineMap2::new(mat2_from_array(&w.l), Vec2::new(w.t[0], w.t[1])))
    }
}

/// Row-major `[m11, m12, m21, m22]`.
pub fn mat2_to_array(m: &Mat2) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

pub fn mat2_from_array(a: &[f64; 4]) -> Mat2 {
    Mat2::new(a[0], a[1], a[2], a[3])
}

/// Spectral class of a real 2×2 matrix.
///
/// The `Complex` angle is reported in `(0, π)`; the rotation sense (sign of
/// `m21 − m12`) is an independent invariant and is provided by
/// [`rotation_sense`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenClass2 {
    RealDistinct(f64, f64),
    RealRepeatedDiagonal(f64),
    RealRepeatedJordan(f64),
    Complex { modulus: f64, angle: f64 },
}

/// Total spectral classification.
///
/// Eigenvalues of `RealDistinct` are ordered `λ1 ≤ λ2`. The discriminant
/// tolerance makes the function deterministic near the parabolic locus: a
/// matrix with |tr² − 4·det| < 1e-9·max(1, tr²) is treated as repeated-real.
pub fn eig2(m: &Mat2) -> EigenClass2 {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    let scale = tr * tr;
    if disc.abs() < DISC_TOL * scale.max(1.0) {
        let lambda = tr / 2.0;
        // Distinguish λ·E from a genuine Jordan block by the size of m − λE.
        let n = m - Mat2::identity() * lambda;
        if n.amax() <= DISC_TOL * m.amax().max(1.0) {
            EigenClass2::RealRepeatedDiagonal(lambda)
        } else {
            EigenClass2::RealRepeatedJordan(lambda)
        }
    } else if disc > 0.0 {
        let s = disc.sqrt();
        EigenClass2::RealDistinct((tr - s) / 2.0, (tr + s) / 2.0)
    } else {
        let re = tr / 2.0;
        let im = (-disc).sqrt() / 2.0;
        let modulus = (re * re + im * im).sqrt();
        let angle = im.atan2(re); // in (0, π) since im > 0
        EigenClass2::Complex { modulus, angle }
    }
}

/// Rotation sense of a matrix with complex eigenvalues: `+1` if `m21 > m12`
/// (counter-clockwise), `−1` otherwise. Constant on GL⁺(2,ℝ)-conjugacy
/// classes; only det < 0 conjugators flip it.
pub fn rotation_sense(m: &Mat2) -> i8 {
    if m[(1, 0)] - m[(0, 1)] > 0.0 {
        1
    } else {
        -1
    }
}

/// Sign of the off-diagonal Jordan datum of a non-diagonal matrix with a
/// repeated real eigenvalue: `+1` if GL⁺-conjugate to `[[λ,1],[0,λ]]`, `−1`
/// if conjugate to `[[λ,−1],[0,λ]]`.
///
/// For the nilpotent part `N = m − λE` and any `u` with `Nu ≠ 0`, the sign of
/// `det [Nu | u]` is independent of `u` and invariant under det > 0
/// conjugation.
pub fn jordan_sign(m: &Mat2, lambda: f64) -> i8 {
    let n = m - Mat2::identity() * lambda;
    let u = if (n * Vec2::x()).norm() >= (n * Vec2::y()).norm() {
        Vec2::x()
    } else {
        Vec2::y()
    };
    let nu = n * u;
    let det = nu.x * u.y - nu.y * u.x;
    if det > 0.0 {
        1
    } else {
        -1
    }
}

/// `φ(L) = Σ_{k≥0} L^k/(k+1)!`, so that `exp [[L,v],[0,0]] = [[e^L, φ(L)v],[0,1]]`.
///
/// Closed form `(e^L − E)·L⁻¹` is used only when the smallest singular value
/// of `L` exceeds 1e-6; otherwise the series (which converges everywhere) is
/// summed directly, avoiding catastrophic cancellation near singular `L`.
pub fn phi(l: &Mat2) -> Mat2 {
    let sv = l.svd(false, false).singular_values;
    let sigma_min = sv[1].min(sv[0]);
    if sigma_min > 1e-6 {
        (mat2_exp(l) - Mat2::identity()) * l.try_inverse().expect("σ_min > 1e-6")
    } else {
        // term holds L^k/(k+1)! after the k-th step.
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1u32..=30 {
            term = (term * l) / ((k + 1) as f64);
            sum += term;
        }
        sum
    }
}

/// Matrix exponential of a real 2×2 matrix, in closed form per spectral class.
pub fn mat2_exp(l: &Mat2) -> Mat2 {
    // Split off the trace: L = (tr/2)·E + B with tr B = 0; e^L = e^{tr/2}·e^B,
    // and e^B has the closed form cosh(μ)·E + sinh(μ)/μ·B with μ² = −det B.
    let half_tr = l.trace() / 2.0;
    let b = l - Mat2::identity() * half_tr;
    let det_b = b.determinant(); // = −μ²
    let (c, s) = if det_b < -DISC_TOL {
        let mu = (-det_b).sqrt();
        (mu.cosh(), mu.sinh() / mu)
    } else if det_b > DISC_TOL {
        let omega = det_b.sqrt();
        (omega.cos(), omega.sin() / omega)
    } else {
        // Both branches agree to O(det²) as det B → 0.
        (1.0 - det_b / 2.0, 1.0 - det_b / 6.0)
    };
    (Mat2::identity() * c + b * s) * half_tr.exp()
}

/// Exponential of the affine block matrix `[[L, v], [0, 0]]`.
pub fn exp_affine(l: &Mat2, v: &Vec2) -> AffineMap2 {
    AffineMap2::new(mat2_exp(l), phi(l) * v)
}

/// 30-term power series of the 3×3 block exponential; the independent oracle
/// against which the closed form is tested.
pub fn exp_affine_series(l: &Mat2, v: &Vec2) -> AffineMap2 {
    let mut block = Matrix3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            block[(i, j)] = l[(i, j)];
        }
        block[(i, 2)] = v[i];
    }
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for k in 1u32..=30 {
        term = (term * block) / (k as f64);
        sum += term;
    }
    AffineMap2::new(
        Mat2::new(sum[(0, 0)], sum[(0, 1)], sum[(1, 0)], sum[(1, 1)]),
        Vec2::new(sum[(0, 2)], sum[(1, 2)]),
    )
}
