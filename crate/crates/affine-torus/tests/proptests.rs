//! Property-based invariants: group laws in the cover, equivariance of the
//! classification, scaling of the associativity residual, conjugacy
//! relations, gluing normalization, and wire-format roundtrips.

mod common;

use std::f64::consts::PI;

use affine_torus::affine::{AffineMap2, Mat2, Vec2};
use affine_torus::charvariety::{hom_conjugate_affine, hom_conjugate_in, HomPoint};
use affine_torus::classify::StructureDescriptor;
use affine_torus::cone::{act, classify_algebra, model_product, AlgebraProduct, StratumType};
use affine_torus::cover::{
    conjugate_gltilde, inv, iwasawa, lift, mul, rotation, tau_pow, try_mul, ConjugacyGroup,
    GLTildeElement,
};
use affine_torus::etale::HolonomyPair;
use affine_torus::gluing::{polygon_from_holonomy, tile, GluingDatum};
use proptest::prelude::*;

/// Positive-determinant matrices through their rotation–shear factors, so
/// conditioning stays bounded.
fn glplus() -> impl Strategy<Value = Mat2> {
    (-3.0..3.0f64, 0.25..3.0f64, 0.25..3.0f64, -2.0..2.0f64).prop_map(|(th, a1, a2, n)| {
        rotation(th) * Mat2::new(a1, 0.0, 0.0, a2) * Mat2::new(1.0, n, 0.0, 1.0)
    })
}

fn cover_lift() -> impl Strategy<Value = GLTildeElement> {
    (glplus(), -3i64..=3).prop_map(|(m, k)| lift(&m, k).expect("det > 0"))
}

fn translation() -> impl Strategy<Value = Vec2> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn product_coeffs() -> impl Strategy<Value = AlgebraProduct> {
    proptest::array::uniform6(-3.0..3.0f64).prop_map(|c| AlgebraProduct::from_coeffs(&c))
}

fn stratum() -> impl Strategy<Value = StratumType> {
    (0usize..6).prop_map(|i| StratumType::ALL[i])
}

proptest! {
    #[test]
    fn products_stay_in_the_window_and_associate(
        g in cover_lift(), h in cover_lift(), k in cover_lift()
    ) {
        let Ok(gh) = try_mul(&g, &h) else { return Ok(()) };
        prop_assert!((gh.theta() - g.theta() - h.theta()).abs() < PI);

        let (Ok(gh_k), Ok(hk)) = (try_mul(&gh, &k), try_mul(&h, &k)) else { return Ok(()) };
        let Ok(g_hk) = try_mul(&g, &hk) else { return Ok(()) };
        let scale = gh_k.matrix().amax().max(1.0);
        prop_assert!((gh_k.matrix() - g_hk.matrix()).amax() < 1e-9 * scale);
        prop_assert!((gh_k.theta() - g_hk.theta()).abs() < 1e-9);
    }

    #[test]
    fn inverses_cancel_inside_the_window(g in cover_lift()) {
        let gi = inv(&g);
        prop_assert!((g.theta() + gi.theta()).abs() < PI);
        let p = mul(&g, &gi);
        prop_assert!((p.matrix() - Mat2::identity()).amax() < 1e-8);
        prop_assert!(p.theta().abs() < 1e-8);
    }

    #[test]
    fn iwasawa_factors_reconstruct(m in glplus()) {
        let f = iwasawa(&m).unwrap();
        prop_assert!(f.theta0 > -PI && f.theta0 <= PI);
        prop_assert!((f.reconstruct() - m).amax() < 1e-10 * m.amax().max(1.0));
    }

    #[test]
    fn classification_is_constant_on_orbits(st in stratum(), g in glplus()) {
        let s = model_product(st);
        let moved = act(&g, &s).unwrap();
        // Well-conditioned conjugates of the models never hit decision bands.
        prop_assert_eq!(classify_algebra(&moved).unwrap(), st);
    }

    #[test]
    fn associativity_residual_is_quadratic_under_scaling(
        s in product_coeffs(), t in 0.01..10.0f64
    ) {
        let scaled = AlgebraProduct::from_coeffs(&s.coeffs().map(|c| t * c));
        let expected = t * t * s.associativity_residual();
        prop_assert!(
            (scaled.associativity_residual() - expected).abs() <= 1e-9 * expected.max(1.0)
        );
    }

    #[test]
    fn simultaneous_conjugacy_recognizes_moved_pairs(
        l1 in 0.25..4.0f64, l2 in 0.25..4.0f64, m1 in 0.25..4.0f64, m2 in 0.25..4.0f64,
        c in glplus(), w in glplus()
    ) {
        let ci = c.try_inverse().unwrap();
        let a = c * Mat2::new(l1, 0.0, 0.0, l2) * ci;
        let b = c * Mat2::new(m1, 0.0, 0.0, m2) * ci;
        let Ok(p) = HomPoint::from_matrices(&a, &b) else { return Ok(()) };
        let wi = w.try_inverse().unwrap();
        let Ok(q) = HomPoint::from_matrices(&(w * a * wi), &(w * b * wi)) else { return Ok(()) };
        let Ok(forward) = hom_conjugate_in(&p, &q, ConjugacyGroup::GLplus) else { return Ok(()) };
        prop_assert!(forward);
        // Symmetry of the relation.
        let Ok(backward) = hom_conjugate_in(&q, &p, ConjugacyGroup::GLplus) else { return Ok(()) };
        prop_assert!(backward);
    }

    #[test]
    fn central_shifts_are_never_conjugate(g in cover_lift(), k in 1i64..3) {
        let shifted = mul(&g, &tau_pow(2 * k));
        let Ok(same) = conjugate_gltilde(&g, &shifted) else { return Ok(()) };
        prop_assert!(!same);
    }

    #[test]
    fn affine_conjugates_of_translation_pairs_are_recognized(
        l in glplus(), t in translation()
    ) {
        let c = AffineMap2::new(l, t);
        let ci = c.inverse().unwrap();
        let h = |v: Vec2| c.compose(&AffineMap2::from_translation(v)).compose(&ci);
        let p = HolonomyPair::new(
            AffineMap2::from_translation(Vec2::new(1.0, 0.0)),
            AffineMap2::from_translation(Vec2::new(0.0, 1.0)),
        );
        let q = HolonomyPair::new(h(Vec2::new(1.0, 0.0)), h(Vec2::new(0.0, 1.0)));
        prop_assert_eq!(hom_conjugate_affine(&p, &q), Ok(true));
    }

    #[test]
    fn gluing_normalization_undoes_conjugation(l in glplus(), t in translation()) {
        let c = AffineMap2::new(l, t);
        let ci = c.inverse().unwrap();
        let square = GluingDatum::unit_square();
        let pair = HolonomyPair::new(
            c.compose(&square.a).compose(&ci),
            c.compose(&square.b).compose(&ci),
        );
        let d = polygon_from_holonomy(&pair, c.apply(Vec2::zeros())).unwrap();
        prop_assert!((d.p - Vec2::new(1.0, 1.0)).norm() < 1e-9);
        prop_assert!(d.a.distance(&square.a) < 1e-9);
        prop_assert!(d.b.distance(&square.b) < 1e-9);
    }

    #[test]
    fn tilings_have_the_full_word_count(radius in 0u32..3) {
        let tiling = tile(&GluingDatum::unit_square(), radius).unwrap();
        let n = 2 * radius as usize + 1;
        prop_assert_eq!(tiling.tiles.len(), n * n);
    }

    #[test]
    fn wire_formats_roundtrip(
        l in glplus(), t in translation(), g in cover_lift(), s in product_coeffs()
    ) {
        let map = AffineMap2::new(l, t);
        let json = serde_json::to_string(&map).unwrap();
        prop_assert_eq!(serde_json::from_str::<AffineMap2>(&json).unwrap(), map);

        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<GLTildeElement>(&json).unwrap(), g);

        let json = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(serde_json::from_str::<AlgebraProduct>(&json).unwrap(), s);

        let datum = GluingDatum::new(Vec2::new(1.0, 1.0), map, map);
        let json = serde_json::to_string(&datum).unwrap();
        prop_assert_eq!(serde_json::from_str::<GluingDatum>(&json).unwrap(), datum);
    }

    #[test]
    fn descriptor_wires_roundtrip(k in 1i64..4, lambda in 1.1..4.0f64) {
        let hopf = StructureDescriptor::Hopf { lambda1: lambda, lambda2: lambda * lambda, k1: k, k2: 0 };
        let json = serde_json::to_string(&hopf).unwrap();
        prop_assert_eq!(serde_json::from_str::<StructureDescriptor>(&json).unwrap(), hopf);

        let tabk = StructureDescriptor::TABk {
            a: Mat2::new(2.0, 0.0, 0.0, 3.0),
            b: Mat2::new(2.0, 0.0, 0.0, 1.0),
            k,
        };
        let json = serde_json::to_string(&tabk).unwrap();
        prop_assert_eq!(serde_json::from_str::<StructureDescriptor>(&json).unwrap(), tabk);

        let trans = StructureDescriptor::TransInvariant(model_product(StratumType::B));
        let json = serde_json::to_string(&trans).unwrap();
        prop_assert_eq!(serde_json::from_str::<StructureDescriptor>(&json).unwrap(), trans);
    }
}
