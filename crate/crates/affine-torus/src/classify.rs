//! Descriptors and the classification decision procedure for flat affine
//! two-tori.
//!
//! Three constructions exhaust all flat affine structures on the two-torus:
//!
//! * translation-invariant structures, one per point of the quadratic cone
//!   ([`StructureDescriptor::TransInvariant`]);
//! * the Hopf family: quotients of the once-punctured plane by a lattice of
//!   dilation–rotation lifts ([`StructureDescriptor::Hopf`]);
//! * the non-homogeneous family `T_{A,B,k}` built from a commuting pair of an
//!   expansion `A` and a positive-real-eigenvalue `B`, glued with `k` half
//!   turns on the universal cover of the punctured plane
//!   ([`StructureDescriptor::TABk`]).
//!
//! [`classify_structure`] reports development image, homogeneity,
//! completeness, level, and holonomy lifts; [`brick_decomposition`] cuts a
//! `T_{A,B,k}` structure into its `k` cylinders.

use serde::{Deserialize, Serialize};

use crate::affine::{eig2, mat2_from_array, mat2_to_array, EigenClass2, Mat2};
use crate::cone::{classify_algebra, AlgebraProduct, StratumType};
use crate::cover::{
    expansion_class, level, level_zero_lift, lift, mul, tau_pow, triangularizer, ExpandingClass,
    GLTildeElement,
};
use crate::error::{Error, Result};
use crate::etale::{development_image, holonomy_of, DevelopmentImage, HolonomyPair};

const CLASSIFY_TOL: f64 = 1e-9;
const LATTICE_TOL: f64 = 1e-12;

/// One of the three constructions of a flat affine two-torus.
#[derive(Debug, Clone, PartialEq)]
pub enum StructureDescriptor {
    /// Translation-invariant structure attached to a cone point.
    TransInvariant(AlgebraProduct),
    /// Hopf torus with holonomy lifts `h(eᵢ) = lift(λᵢ·Id) · τ^{kᵢ}`.
    Hopf { lambda1: f64, lambda2: f64, k1: i64, k2: i64 },
    /// Quotient `T_{A,B,k}` with holonomy lifts `(Ã₀, τ^k·B̃₀)`.
    TABk { a: Mat2, b: Mat2, k: i64 },
}

/// Serialization façade with a `type` tag: `trans`, `hopf`, or `tabk`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum DescriptorWire {
    #[serde(rename = "trans")]
    Trans { product: AlgebraProduct },
    #[serde(rename = "hopf")]
    Hopf { lambda1: f64, lambda2: f64, k1: i64, k2: i64 },
    #[serde(rename = "tabk")]
    Tabk {
        #[serde(rename = "A")]
        a: [f64; 4],
        #[serde(rename = "B")]
        b: [f64; 4],
        k: i64,
    },
}

impl Serialize for StructureDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            StructureDescriptor::TransInvariant(product) => {
                DescriptorWire::Trans { product: *product }
            }
            StructureDescriptor::Hopf { lambda1, lambda2, k1, k2 } => DescriptorWire::Hopf {
                lambda1: *lambda1,
                lambda2: *lambda2,
                k1: *k1,
                k2: *k2,
            },
            StructureDescriptor::TABk { a, b, k } => {
                DescriptorWire::Tabk { a: mat2_to_array(a), b: mat2_to_array(b), k: *k }
            }
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StructureDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match DescriptorWire::deserialize(d)? {
            DescriptorWire::Trans { product } => StructureDescriptor::TransInvariant(product),
            DescriptorWire::Hopf { lambda1, lambda2, k1, k2 } => {
                StructureDescriptor::Hopf { lambda1, lambda2, k1, k2 }
            }
            DescriptorWire::Tabk { a, b, k } => StructureDescriptor::TABk {
                a: mat2_from_array(&a),
                b: mat2_from_array(&b),
                k,
            },
        })
    }
}

fn validate_hopf(lambda1: f64, lambda2: f64, k1: i64, k2: i64) -> Result<()> {
    if !(lambda1 > 0.0 && lambda2 > 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "Hopf multipliers must be positive and finite, got ({lambda1}, {lambda2})"
        )));
    }
    let det = lambda1.ln() * (k2 as f64) - lambda2.ln() * (k1 as f64);
    if det.abs() <= LATTICE_TOL {
        return Err(Error::DegenerateLattice);
    }
    Ok(())
}

fn validate_tabk(a: &Mat2, b: &Mat2, k: i64) -> Result<()> {
    if expansion_class(a) != ExpandingClass::Expansion {
        return Err(Error::NotExpansion);
    }
    let residual = (a * b - b * a).amax();
    if residual >= CLASSIFY_TOL * a.amax().max(b.amax()).max(1.0) {
        return Err(Error::NonCommuting { residual });
    }
    let positive = match eig2(b) {
        EigenClass2::RealDistinct(l1, l2) => l1 > 0.0 && l2 > 0.0,
        EigenClass2::RealRepeatedDiagonal(l) | EigenClass2::RealRepeatedJordan(l) => l > 0.0,
        EigenClass2::Complex { .. } => false,
    };
    if !positive {
        return Err(Error::NonPositiveEigenvalues);
    }
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    Ok(())
}

/// Hopf descriptor with multipliers `λᵢ > 0` and half-turn counts `kᵢ`.
///
/// The lifts `(log λᵢ, kᵢπ)` must span a lattice on the cover of the
/// punctured plane, i.e. `(log λ₁)k₂ − (log λ₂)k₁ ≠ 0`.
pub fn make_hopf(lambda1: f64, lambda2: f64, k1: i64, k2: i64) -> Result<StructureDescriptor> {
    validate_hopf(lambda1, lambda2, k1, k2)?;
    Ok(StructureDescriptor::Hopf { lambda1, lambda2, k1, k2 })
}

/// `T_{A,B,k}` descriptor: `A` an expansion, `B` commuting with `A` and with
/// positive real eigenvalues, `k ≠ 0`.
pub fn make_tabk(a: Mat2, b: Mat2, k: i64) -> Result<StructureDescriptor> {
    validate_tabk(&a, &b, k)?;
    Ok(StructureDescriptor::TABk { a, b, k })
}

/// Holonomy lift of one Hopf generator: `lift(λ·Id) · τ^k`.
fn hopf_lift(lambda: f64, k: i64) -> GLTildeElement {
    let dilation = lift(&(Mat2::identity() * lambda), 0).expect("positive dilation");
    mul(&dilation, &tau_pow(k))
}

/// `true` for positive scalar multiples of the identity.
fn is_dilation(m: &Mat2) -> bool {
    let s = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    s > 0.0 && (m - Mat2::identity() * s).amax() <= CLASSIFY_TOL * m.amax().max(1.0)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Where a structure sits in the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureClass {
    /// Translation-invariant: quotient of an étale structure on the plane.
    Stratum(StratumType),
    /// Homogeneous quotient of the once-punctured plane.
    Hopf,
    /// Quotient of the universal cover of the punctured plane that is not
    /// affinely homogeneous.
    NonHomogeneous,
}

/// Lifted holonomy generators, affine for translation-invariant structures
/// and linear (with branch data) otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HolonomyLifts {
    Affine(HolonomyPair),
    Linear(GLTildeElement, GLTildeElement),
}

/// Classification data of one structure descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub dev_image: DevelopmentImage,
    pub homogeneous: bool,
    pub complete: bool,
    pub class: StructureClass,
    /// Winding of the second holonomy lift in half turns; `None` for
    /// translation-invariant structures (their holonomy is affine).
    pub level: Option<i64>,
    pub holonomy_lifts: HolonomyLifts,
}

/// Decide development image, homogeneity, completeness, and level.
///
/// Translation-invariant structures inherit everything from their stratum and
/// are complete exactly on the two plane-filling strata. Hopf structures are
/// homogeneous, never complete, and their level is the gcd of the half-turn
/// counts. `T_{A,B,k}` structures are never complete, are homogeneous exactly
/// when both generators are dilations (in which case they are Hopf tori), and
/// their level is read off the closing holonomy lift.
pub fn classify_structure(d: &StructureDescriptor) -> Result<ClassificationReport> {
    match d {
        StructureDescriptor::TransInvariant(s) => {
            let stratum = classify_algebra(s)?;
            let pair = holonomy_of(s)?;
            Ok(ClassificationReport {
                dev_image: development_image(stratum),
                homogeneous: true,
                complete: stratum.is_complete_stratum(),
                class: StructureClass::Stratum(stratum),
                level: None,
                holonomy_lifts: HolonomyLifts::Affine(pair),
            })
        }
        StructureDescriptor::Hopf { lambda1, lambda2, k1, k2 } => {
            validate_hopf(*lambda1, *lambda2, *k1, *k2)
                .map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
            Ok(ClassificationReport {
                dev_image: DevelopmentImage::PuncturedPlane,
                homogeneous: true,
                complete: false,
                class: StructureClass::Hopf,
                level: Some(gcd(*k1, *k2)),
                holonomy_lifts: HolonomyLifts::Linear(
                    hopf_lift(*lambda1, *k1),
                    hopf_lift(*lambda2, *k2),
                ),
            })
        }
        StructureDescriptor::TABk { a, b, k } => {
            validate_tabk(a, b, *k).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
            let a0 = level_zero_lift(a)?;
            let hb = mul(&tau_pow(*k), &level_zero_lift(b)?);
            let homogeneous = is_dilation(a) && is_dilation(b);
            Ok(ClassificationReport {
                dev_image: DevelopmentImage::PuncturedPlane,
                homogeneous,
                complete: false,
                class: if homogeneous {
                    StructureClass::Hopf
                } else {
                    StructureClass::NonHomogeneous
                },
                level: Some(level(&hb)?),
                holonomy_lifts: HolonomyLifts::Linear(a0, hb),
            })
        }
    }
}

/// One cylinder of a brick decomposition, with the lift gluing it to the
/// next cylinder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderRecord {
    pub generator_a: GLTildeElement,
    pub glued_by: GLTildeElement,
}

/// Cylinder decomposition of a `T_{A,B,k}` structure, stated in coordinates
/// where `B` (or `A`, when `B` is scalar) is upper triangular.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrickDecomposition {
    /// Row-major normalizing conjugator `c`: normalized = `c`·original·`c⁻¹`.
    pub conjugator: [f64; 4],
    pub cylinders: Vec<CylinderRecord>,
}

impl BrickDecomposition {
    pub fn conjugator_matrix(&self) -> Mat2 {
        mat2_from_array(&self.conjugator)
    }
}

/// Cut a `T_{A,B,k}` torus into `|k|` cylinders over the expansion `A`.
///
/// Consecutive cylinders are glued by the identity; the closing gluing is the
/// lift `τ^k·B̃₀`, whose level is `k`. Other descriptor kinds are rejected
/// with [`Error::WrongTag`].
pub fn brick_decomposition(d: &StructureDescriptor) -> Result<BrickDecomposition> {
    let StructureDescriptor::TABk { a, b, k } = d else {
        return Err(Error::WrongTag { expected: "TABk" });
    };
    validate_tabk(a, b, *k)?;
    // Commuting with the probe matrix forces the other generator to share its
    // triangularizing basis; a scalar B leaves the basis free, so use A then.
    let probe = if is_dilation(b) { a } else { b };
    let c = triangularizer(probe)?;
    let c_inv = c.try_inverse().ok_or(Error::SingularMatrix)?;
    let a0 = level_zero_lift(&(c * a * c_inv))?;
    let closing = mul(&tau_pow(*k), &level_zero_lift(&(c * b * c_inv))?);
    let count = k.unsigned_abs() as usize;
    let cylinders = (0..count)
        .map(|i| CylinderRecord {
            generator_a: a0,
            glued_by: if i + 1 == count { closing } else { GLTildeElement::identity() },
        })
        .collect();
    Ok(BrickDecomposition { conjugator: mat2_to_array(&c), cylinders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::model_product;
    use crate::cover::rotation;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hopf_constructor_validates_the_lattice() {
        assert!(make_hopf(2.0, 2.0, 1, 0).is_ok());
        assert_eq!(make_hopf(2.0, 2.0, 0, 0), Err(Error::DegenerateLattice));
        // log 4 · 1 − log 2 · 2 = 0: collinear lifts despite nonzero entries.
        assert_eq!(make_hopf(4.0, 2.0, 2, 1), Err(Error::DegenerateLattice));
        assert!(matches!(make_hopf(-1.0, 2.0, 1, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn hopf_lift_composes_dilation_and_half_turns() {
        let e = std::f64::consts::E;
        let d = make_hopf(e, e, 0, 1).unwrap();
        let report = classify_structure(&d).unwrap();
        let HolonomyLifts::Linear(h1, h2) = report.holonomy_lifts else {
            panic!("expected linear lifts");
        };
        assert_relative_eq!(h1.theta(), 0.0);
        assert!((h1.matrix() - Mat2::identity() * e).amax() < 1e-12);
        assert_relative_eq!(h2.theta(), PI);
        assert!((h2.matrix() + Mat2::identity() * e).amax() < 1e-12);
    }

    #[test]
    fn hopf_classification_report() {
        let d = make_hopf(2.0, 3.0, 1, 0).unwrap();
        let report = classify_structure(&d).unwrap();
        assert_eq!(report.dev_image, DevelopmentImage::PuncturedPlane);
        assert!(report.homogeneous);
        assert!(!report.complete);
        assert_eq!(report.class, StructureClass::Hopf);
        assert_eq!(report.level, Some(1));

        let d = make_hopf(2.0, 3.0, 2, 4).unwrap();
        assert_eq!(classify_structure(&d).unwrap().level, Some(2));
        let d = make_hopf(2.0, 3.0, 0, 3).unwrap();
        assert_eq!(classify_structure(&d).unwrap().level, Some(3));
    }

    #[test]
    fn tabk_constructor_rejects_bad_input() {
        let a = Mat2::new(2.0, 0.0, 0.0, 3.0);
        let b = Mat2::new(2.0, 0.0, 0.0, 1.0);
        assert!(make_tabk(a, b, 1).is_ok());
        assert_eq!(make_tabk(Mat2::new(2.0, 0.0, 0.0, 0.5), b, 1), Err(Error::NotExpansion));
        assert_eq!(make_tabk(a, b, 0), Err(Error::ZeroLevel));
        assert!(matches!(
            make_tabk(a, Mat2::new(1.0, 1.0, 0.0, 2.0), 1),
            Err(Error::NonCommuting { .. })
        ));
        assert_eq!(
            make_tabk(Mat2::identity() * 2.0, rotation(0.3) * 2.0, 1),
            Err(Error::NonPositiveEigenvalues)
        );
        assert_eq!(
            make_tabk(Mat2::identity() * 2.0, Mat2::new(-1.0, 0.0, 0.0, -2.0), 1),
            Err(Error::NonPositiveEigenvalues)
        );
    }

    #[test]
    fn tabk_classification_report() {
        let d = make_tabk(Mat2::new(2.0, 0.0, 0.0, 3.0), Mat2::new(2.0, 0.0, 0.0, 1.0), 1)
            .unwrap();
        let report = classify_structure(&d).unwrap();
        assert_eq!(report.dev_image, DevelopmentImage::PuncturedPlane);
        assert!(!report.homogeneous);
        assert!(!report.complete);
        assert_eq!(report.class, StructureClass::NonHomogeneous);
        assert_eq!(report.level, Some(1));
        let HolonomyLifts::Linear(a0, hb) = report.holonomy_lifts else {
            panic!("expected linear lifts");
        };
        assert_relative_eq!(a0.theta(), 0.0);
        assert_relative_eq!(hb.theta(), PI);
    }

    #[test]
    fn dilation_pair_classifies_as_hopf() {
        let d = make_tabk(Mat2::identity() * 2.0, Mat2::identity() * 3.0, 2).unwrap();
        let report = classify_structure(&d).unwrap();
        assert!(report.homogeneous);
        assert_eq!(report.class, StructureClass::Hopf);
        assert_eq!(report.level, Some(2));
    }

    #[test]
    fn translation_invariant_reports_follow_the_stratum() {
        let report =
            classify_structure(&StructureDescriptor::TransInvariant(AlgebraProduct::zero()))
                .unwrap();
        assert_eq!(report.dev_image, DevelopmentImage::Plane);
        assert!(report.homogeneous);
        assert!(report.complete);
        assert_eq!(report.class, StructureClass::Stratum(StratumType::T));
        assert_eq!(report.level, None);

        let report =
            classify_structure(&StructureDescriptor::TransInvariant(model_product(
                StratumType::B,
            )))
            .unwrap();
        assert_eq!(report.dev_image, DevelopmentImage::Sector);
        assert!(!report.complete);
        assert_eq!(report.class, StructureClass::Stratum(StratumType::B));
    }

    #[test]
    fn brick_decomposition_counts_cylinders() {
        let d = make_tabk(Mat2::new(2.0, 0.0, 0.0, 3.0), Mat2::new(2.0, 0.0, 0.0, 1.0), 3)
            .unwrap();
        let bricks = brick_decomposition(&d).unwrap();
        assert_eq!(bricks.cylinders.len(), 3);
        let c = bricks.conjugator_matrix();
        let normalized_b = c * Mat2::new(2.0, 0.0, 0.0, 1.0) * c.try_inverse().unwrap();
        assert!(normalized_b[(1, 0)].abs() < 1e-12);
        for c in &bricks.cylinders[..2] {
            assert_eq!(c.glued_by, GLTildeElement::identity());
        }
        let closing = bricks.cylinders[2].glued_by;
        assert_relative_eq!(closing.theta(), 3.0 * PI);
        assert_eq!(level(&closing), Ok(3));

        let single = make_tabk(Mat2::new(2.0, 0.0, 0.0, 3.0), Mat2::new(2.0, 0.0, 0.0, 1.0), 1)
            .unwrap();
        assert_eq!(brick_decomposition(&single).unwrap().cylinders.len(), 1);
    }

    #[test]
    fn brick_decomposition_normalizes_rotated_pairs() {
        // A commuting Jordan pair, conjugated by a rotation so that neither
        // generator is triangular in the original coordinates.
        let r = rotation(0.7);
        let rt = r.transpose();
        let d = make_tabk(
            r * Mat2::new(2.0, 1.0, 0.0, 2.0) * rt,
            r * Mat2::new(1.0, 1.0, 0.0, 1.0) * rt,
            2,
        )
        .unwrap();
        let bricks = brick_decomposition(&d).unwrap();
        let c = bricks.conjugator_matrix();
        let c_inv = c.try_inverse().unwrap();
        let StructureDescriptor::TABk { a, b, .. } = d else { unreachable!() };
        assert!((c * b * c_inv)[(1, 0)].abs() < 1e-9);
        assert!((c * a * c_inv)[(1, 0)].abs() < 1e-9);
        assert_eq!(level(&bricks.cylinders[1].glued_by), Ok(2));
    }

    #[test]
    fn brick_decomposition_with_scalar_b_normalizes_by_a() {
        let d = make_tabk(Mat2::new(3.0, 1.0, 0.0, 2.0), Mat2::identity() * 2.0, 1).unwrap();
        let bricks = brick_decomposition(&d).unwrap();
        assert_eq!(bricks.cylinders.len(), 1);
        let closing = bricks.cylinders[0].glued_by;
        assert_relative_eq!(closing.theta(), PI);
        assert!((closing.matrix() + Mat2::identity() * 2.0).amax() < 1e-12);
    }

    #[test]
    fn closing_gluing_level_matches_half_turn_count() {
        for k in 1..=5 {
            let d = make_tabk(Mat2::new(2.0, 0.0, 0.0, 3.0), Mat2::new(2.0, 0.0, 0.0, 1.0), k)
                .unwrap();
            let bricks = brick_decomposition(&d).unwrap();
            assert_eq!(bricks.cylinders.len(), k as usize);
            let closing = bricks.cylinders.last().unwrap().glued_by;
            assert_eq!(level(&closing), Ok(k));
        }
    }

    #[test]
    fn brick_decomposition_rejects_other_tags() {
        let d = make_hopf(2.0, 2.0, 1, 0).unwrap();
        assert_eq!(brick_decomposition(&d), Err(Error::WrongTag { expected: "TABk" }));
    }

    #[test]
    fn descriptors_round_trip_through_json() {
        let trans = StructureDescriptor::TransInvariant(model_product(StratumType::C1));
        let json = serde_json::to_string(&trans).unwrap();
        assert!(json.starts_with("{\"type\":\"trans\""), "{json}");
        assert_eq!(serde_json::from_str::<StructureDescriptor>(&json).unwrap(), trans);

        let hopf = make_hopf(2.0, 3.0, 1, 0).unwrap();
        let json = serde_json::to_string(&hopf).unwrap();
        assert_eq!(json, "{\"type\":\"hopf\",\"lambda1\":2.0,\"lambda2\":3.0,\"k1\":1,\"k2\":0}");
        assert_eq!(serde_json::from_str::<StructureDescriptor>(&json).unwrap(), hopf);

        let tabk = make_tabk(Mat2::new(2.0, 0.0, 0.0, 3.0), Mat2::new(2.0, 0.0, 0.0, 1.0), 1)
            .unwrap();
        let json = serde_json::to_string(&tabk).unwrap();
        assert_eq!(
            json,
            "{\"type\":\"tabk\",\"A\":[2.0,0.0,0.0,3.0],\"B\":[2.0,0.0,0.0,1.0],\"k\":1}"
        );
        assert_eq!(serde_json::from_str::<StructureDescriptor>(&json).unwrap(), tabk);
    }

    #[test]
    fn reports_serialize_with_all_fields() {
        let report = classify_structure(&make_hopf(2.0, 3.0, 1, 0).unwrap()).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        for field in ["dev_image", "homogeneous", "complete", "class", "level", "holonomy_lifts"] {
            assert!(json.contains(field), "missing {field} in {json}");
        }
        let back: ClassificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
