//! The six winding-coordinate laws on the universal cover, evaluated on
//! random lifts with a fixed seed. Each law reports the worst defect or
//! margin observed so regressions show up as numbers, not just booleans.

use std::f64::consts::PI;

use affine_torus::cover::{inv, lift, mul, rotation_lift, tau_pow, try_mul};
use affine_torus::{GLTildeElement, Mat2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
pub struct LawReport {
    pub law: &'static str,
    pub criterion: &'static str,
    pub trials: u32,
    pub worst: f64,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub laws: Vec<LawReport>,
}

fn random_lift(r: &mut ChaCha8Rng) -> GLTildeElement {
    loop {
        let m = Mat2::new(
            r.random_range(-7.0..7.0),
            r.random_range(-7.0..7.0),
            r.random_range(-7.0..7.0),
            r.random_range(-7.0..7.0),
        );
        if m.determinant() >= 0.05 && m.norm() <= 10.0 {
            let k = r.random_range(-3..=3);
            return lift(&m, k).expect("positive determinant");
        }
    }
}

pub fn run_suite(trials: u32, seed: u64) -> SuiteReport {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut triangular_worst = 0.0f64;
    let mut additivity_worst = 0.0f64;
    let mut product_margin = f64::INFINITY;
    let mut inverse_margin = f64::INFINITY;
    let mut circle_margin = f64::INFINITY;
    let mut triangular_conj_margin = f64::INFINITY;
    for _ in 0..trials {
        let g = random_lift(&mut r);
        let h = random_lift(&mut r);
        let gi = inv(&g);
        let an = lift(
            &Mat2::new(
                r.random_range(0.05..4.0),
                r.random_range(-2.0..2.0),
                0.0,
                r.random_range(0.05..4.0),
            ),
            0,
        )
        .expect("triangular with positive diagonal");
        let k = rotation_lift(r.random_range(-9.0..9.0));

        triangular_worst = triangular_worst.max(an.theta().abs());

        let kg = mul(&k, &g);
        additivity_worst = additivity_worst.max((kg.theta() - k.theta() - g.theta()).abs());
        let m = r.random_range(-3i64..4);
        additivity_worst = additivity_worst.max((tau_pow(m).theta() - m as f64 * PI).abs());

        if let Ok(gh) = try_mul(&g, &h) {
            let defect = (gh.theta() - g.theta() - h.theta()).abs();
            product_margin = product_margin.min(PI - defect);
        }

        inverse_margin = inverse_margin.min(PI - (g.theta() + gi.theta()).abs());

        if let Ok(gk) = try_mul(&g, &k) {
            if let Ok(conj) = try_mul(&gk, &gi) {
                circle_margin = circle_margin.min(PI - (conj.theta() - k.theta()).abs());
            }
        }
        if let Ok(ga) = try_mul(&g, &an) {
            if let Ok(conj) = try_mul(&ga, &gi) {
                triangular_conj_margin = triangular_conj_margin.min(PI - conj.theta().abs());
            }
        }
    }
    let laws = vec![
        LawReport {
            law: "zero winding exactly on the triangular subgroup",
            criterion: "worst |theta| == 0",
            trials,
            worst: triangular_worst,
            pass: triangular_worst == 0.0,
        },
        LawReport {
            law: "circle factors add windings; the center generator winds by pi",
            criterion: "worst defect <= 1e-9",
            trials,
            worst: additivity_worst,
            pass: additivity_worst <= 1e-9,
        },
        LawReport {
            law: "product winding defect stays strictly inside (-pi, pi)",
            criterion: "worst margin > 1e-9",
            trials,
            worst: product_margin,
            pass: product_margin > 1e-9,
        },
        LawReport {
            law: "windings of an element and its inverse cancel strictly inside (-pi, pi)",
            criterion: "worst margin > 1e-9",
            trials,
            worst: inverse_margin,
            pass: inverse_margin > 1e-9,
        },
        LawReport {
            law: "conjugation shifts circle windings by strictly less than pi",
            criterion: "worst margin > 1e-9",
            trials,
            worst: circle_margin,
            pass: circle_margin > 1e-9,
        },
        LawReport {
            law: "conjugates of triangular elements wind strictly less than pi",
            criterion: "worst margin > 1e-9",
            trials,
            worst: triangular_conj_margin,
            pass: triangular_conj_margin > 1e-9,
        },
    ];
    SuiteReport { seed, laws }
}
