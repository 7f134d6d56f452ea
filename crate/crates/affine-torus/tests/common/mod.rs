//! Shared helpers for the integration suites: seeded sampling, an
//! independent angle tracker that lifts products along explicit paths, and
//! convex polygon intersection by half-plane clipping.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use affine_torus::affine::Mat2;
use affine_torus::cone::{act, model_product, AlgebraProduct, StratumType};
use affine_torus::cover::{iwasawa, lift, rotation, GLTildeElement};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A matrix with entries uniform in `(-bound, bound)`, Frobenius norm at most
/// `norm_cap`, and determinant at least `det_min`.
pub fn random_glplus(r: &mut ChaCha8Rng, bound: f64, norm_cap: f64, det_min: f64) -> Mat2 {
    loop {
        let m = Mat2::new(
            r.random_range(-bound..bound),
            r.random_range(-bound..bound),
            r.random_range(-bound..bound),
            r.random_range(-bound..bound),
        );
        if m.determinant() >= det_min && m.norm() <= norm_cap {
            return m;
        }
    }
}

/// A well-conditioned positive-determinant matrix: condition number at most
/// `cond_max`, determinant at least `det_min`.
pub fn random_conditioned(r: &mut ChaCha8Rng, bound: f64, det_min: f64, cond_max: f64) -> Mat2 {
    loop {
        let m = Mat2::new(
            r.random_range(-bound..bound),
            r.random_range(-bound..bound),
            r.random_range(-bound..bound),
            r.random_range(-bound..bound),
        );
        if m.determinant() < det_min {
            continue;
        }
        let sv = m.svd(false, false).singular_values;
        if sv[0] / sv[1] <= cond_max {
            return m;
        }
    }
}

/// A random cover element: matrix of norm ≤ 10 with a random branch index in
/// `−3..=3`.
pub fn random_lift(r: &mut ChaCha8Rng) -> GLTildeElement {
    let m = random_glplus(r, 7.0, 10.0, 0.05);
    let k = r.random_range(-3..=3);
    lift(&m, k).expect("positive determinant")
}

/// A random cone point: a conditioned conjugate of a random model product,
/// together with the stratum it came from.
pub fn random_cone_point(r: &mut ChaCha8Rng) -> (StratumType, AlgebraProduct) {
    let strata = StratumType::ALL;
    let st = strata[r.random_range(0..strata.len())];
    let g = random_conditioned(r, 2.0, 0.05, 50.0);
    (st, act(&g, &model_product(st)).expect("conditioned conjugator"))
}

// ───────────────────────── path-lifted products ─────────────────────────

/// Track the continuous angle along a positive-determinant matrix path,
/// starting the lift at `start`. Returns `None` when consecutive samples jump
/// too far for unambiguous unwrapping (caller should refine).
pub fn theta_track(path: &dyn Fn(f64) -> Mat2, steps: usize, start: f64) -> Option<f64> {
    let mut prev = iwasawa(&path(0.0)).ok()?.theta0;
    let mut w = start;
    for i in 1..=steps {
        let s = i as f64 / steps as f64;
        let cur = iwasawa(&path(s)).ok()?.theta0;
        let mut d = cur - prev;
        while d > PI {
            d -= TAU;
        }
        while d <= -PI {
            d += TAU;
        }
        if d.abs() > 1.2 {
            return None;
        }
        w += d;
        prev = cur;
    }
    Some(w)
}

/// θ of the product `g·h` computed by the definition of the covering group:
/// lift the continuous path `s ↦ p(g)·h(s)` (where `h(s)` runs from the
/// identity to `p(h)` through the rotation and shear factors) starting at
/// `θ(g)`, then translate by the central gap between the tracked endpoint of
/// `h(s)` and the branch of the input lift `h`. Uses no product branch rule.
pub fn theta_product_oracle(g: &GLTildeElement, h: &GLTildeElement) -> f64 {
    let f = iwasawa(&h.matrix()).expect("positive determinant");
    let an = Mat2::new(f.a1, f.a1 * f.n12, 0.0, f.a2);
    let phi = f.theta0;
    let gm = g.matrix();
    let mut steps = 1024;
    loop {
        let hp = move |s: f64| rotation(s * phi) * (Mat2::identity() * (1.0 - s) + an * s);
        let tracked_h = theta_track(&hp, steps, 0.0);
        let tracked_product = theta_track(&|s| gm * hp(s), steps, g.theta());
        if let (Some(wh), Some(w)) = (tracked_h, tracked_product) {
            return w + (h.theta() - wh);
        }
        steps *= 2;
        assert!(steps <= 1 << 22, "path refinement exhausted");
    }
}

// ───────────────────────── convex polygon intersection ─────────────────────────

pub fn polygon_signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

/// Keep the part of `poly` on the left of the oriented line `a → b`.
fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let sc = side(cur);
        let sn = side(nxt);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0) {
            let t = sc / (sc - sn);
            out.push([cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])]);
        }
    }
    out
}

/// Area of the intersection of two convex quadrilaterals, by clipping one
/// against the half-planes of the other. Orientation-insensitive.
pub fn convex_intersection_area(p: &[[f64; 2]; 4], q: &[[f64; 2]; 4]) -> f64 {
    let mut subject: Vec<[f64; 2]> = p.to_vec();
    if polygon_signed_area(&subject) < 0.0 {
        subject.reverse();
    }
    let mut clipper: Vec<[f64; 2]> = q.to_vec();
    if polygon_signed_area(&clipper) < 0.0 {
        clipper.reverse();
    }
    let mut poly = subject;
    for i in 0..clipper.len() {
        if poly.is_empty() {
            return 0.0;
        }
        poly = clip_halfplane(&poly, clipper[i], clipper[(i + 1) % clipper.len()]);
    }
    polygon_signed_area(&poly).abs()
}
