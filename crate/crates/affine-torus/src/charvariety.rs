//! Commuting pairs as points of the representation space of ℤ² and their
//! simultaneous conjugacy, plus numeric witnesses for three phenomena of the
//! character variety: non-closed conjugation orbits, branching of the
//! universal-cover character variety over the projective one, and local
//! injectivity of the holonomy map on the cone of translation-invariant
//! structures.

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affine::Mat2;
use crate::affine::{AffineMap2, Vec2};
use crate::cone::{act, classify_algebra, model_product, AlgebraProduct, StratumType};
use crate::cover::{
    conjugate_glplus, conjugate_gltilde, conjugate_pgl, glplus_conjugator, inv, lift, mul,
    ConjugacyGroup, GLTildeElement, THETA_TOL,
};
use crate::error::{Error, Result};
use crate::etale::{holonomy_of, HolonomyPair};

const CHAR_TOL: f64 = 1e-9;
/// Residual threshold for the least-squares conjugator solve; sits well above
/// float noise of conditioned 4×4 systems and well below genuine violations.
const SOLVE_TOL: f64 = 1e-7;

// ───────────────────────── representation points ─────────────────────────

/// Commuting images of the two generators of ℤ², carried as lifts so that one
/// point serves all three groups (GL⁺ and PGL read only the matrices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomPoint {
    pub g1: GLTildeElement,
    pub g2: GLTildeElement,
}

impl HomPoint {
    pub fn new(g1: GLTildeElement, g2: GLTildeElement) -> Self {
        HomPoint { g1, g2 }
    }

    /// Point with the default-branch lifts of two commuting matrices.
    pub fn from_matrices(m1: &Mat2, m2: &Mat2) -> Result<HomPoint> {
        let p = HomPoint { g1: lift(m1, 0)?, g2: lift(m2, 0)? };
        p.validate()?;
        Ok(p)
    }

    /// The generator images must commute.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.g1.matrix(), self.g2.matrix());
        let residual = (a * b - b * a).amax();
        if residual >= CHAR_TOL * a.amax().max(b.amax()).max(1.0) {
            return Err(Error::NonCommuting { residual });
        }
        Ok(())
    }

    /// Largest Frobenius distance between corresponding generator images;
    /// a convergence monitor, never a conjugacy decision.
    pub fn distance(&self, other: &HomPoint) -> f64 {
        let d1 = (self.g1.matrix() - other.g1.matrix()).norm();
        let d2 = (self.g2.matrix() - other.g2.matrix()).norm();
        d1.max(d2)
    }
}

fn is_scalar_mat(m: &Mat2) -> bool {
    let s = 0.5 * m.trace();
    (m - Mat2::identity() * s).amax() <= CHAR_TOL * m.amax().max(1.0)
}

// ───────────────────────── simultaneous conjugacy ─────────────────────────

/// Simultaneous GL⁺ conjugacy of commuting matrix pairs.
///
/// For non-scalar `g1` the centralizer of its normal form is the abelian
/// algebra spanned by `Id` and `g1` itself, which acts trivially on anything
/// commuting with `g1`; one explicit conjugator therefore decides the pair.
fn pair_conjugate_glplus(g1: &Mat2, g2: &Mat2, h1: &Mat2, h2: &Mat2) -> Result<bool> {
    if is_scalar_mat(g1) || is_scalar_mat(h1) {
        // A scalar first generator is centralized by everything: the pair is
        // conjugate iff the scalars agree and the second images are conjugate.
        return Ok(conjugate_glplus(g1, h1)? && conjugate_glplus(g2, h2)?);
    }
    if !conjugate_glplus(g1, h1)? {
        return Ok(false);
    }
    let c = glplus_conjugator(g1, h1)?;
    let ci = c.try_inverse().ok_or(Error::SingularMatrix)?;
    let moved = c * g2 * ci;
    let cond = c.norm() * ci.norm();
    Ok((moved - h2).amax() <= CHAR_TOL * cond * g2.amax().max(h2.amax()).max(1.0))
}

/// Simultaneous conjugacy allowing conjugators of either determinant sign:
/// a det < 0 conjugator is a det > 0 one composed with a fixed reflection.
fn pair_conjugate_gl_full(g1: &Mat2, g2: &Mat2, h1: &Mat2, h2: &Mat2) -> Result<bool> {
    if pair_conjugate_glplus(g1, g2, h1, h2)? {
        return Ok(true);
    }
    let w = Mat2::new(1.0, 0.0, 0.0, -1.0);
    pair_conjugate_glplus(&(w * g1 * w), &(w * g2 * w), h1, h2)
}

fn pair_conjugate_pgl(g1: &Mat2, g2: &Mat2, h1: &Mat2, h2: &Mat2) -> Result<bool> {
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            if pair_conjugate_gl_full(g1, g2, &(h1 * s1), &(h2 * s2))? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn pair_conjugate_lifts(p: &HomPoint, q: &HomPoint) -> Result<bool> {
    if is_scalar_mat(&p.g1.matrix()) || is_scalar_mat(&q.g1.matrix()) {
        // Lifts of scalars are central, hence conjugation-rigid.
        return Ok(conjugate_gltilde(&p.g1, &q.g1)? && conjugate_gltilde(&p.g2, &q.g2)?);
    }
    if !pair_conjugate_glplus(&p.g1.matrix(), &p.g2.matrix(), &q.g1.matrix(), &q.g2.matrix())? {
        return Ok(false);
    }
    // One matrix conjugator decides θ on both generators: the remaining
    // centralizer freedom is homotopic to a central element.
    let c = glplus_conjugator(&p.g1.matrix(), &q.g1.matrix())?;
    let cl = lift(&c, 0)?;
    let cli = inv(&cl);
    let k1 = mul(&mul(&cl, &p.g1), &cli);
    let k2 = mul(&mul(&cl, &p.g2), &cli);
    Ok((k1.theta() - q.g1.theta()).abs() < THETA_TOL
        && (k2.theta() - q.g2.theta()).abs() < THETA_TOL)
}

/// Decide simultaneous conjugacy of two representation points in the chosen
/// group. Matrices decide the GL⁺ and PGL cases; the cover adds branch
/// compatibility on both generators.
pub fn hom_conjugate_in(p: &HomPoint, q: &HomPoint, group: ConjugacyGroup) -> Result<bool> {
    p.validate()?;
    q.validate()?;
    let (g1, g2) = (p.g1.matrix(), p.g2.matrix());
    let (h1, h2) = (q.g1.matrix(), q.g2.matrix());
    match group {
        ConjugacyGroup::GLplus => pair_conjugate_glplus(&g1, &g2, &h1, &h2),
        ConjugacyGroup::PGL => pair_conjugate_pgl(&g1, &g2, &h1, &h2),
        ConjugacyGroup::GLtilde => pair_conjugate_lifts(p, q),
    }
}

/// Simultaneous conjugacy of commuting affine pairs by orientation-preserving
/// affine maps.
///
/// After the linear parts are matched by an explicit conjugator `c₀`, the
/// conjugator's remaining freedom is `z·c₀` with `z = α·Id + β·L` in the
/// centralizer of the first linear part `L`, plus the translation `v`; the
/// translation conditions are linear in `(α, β, v)` and the orientation
/// condition `det z > 0` is a quadratic in `(α, β)` analyzed on the solution
/// set of that linear system.
pub fn hom_conjugate_affine(p: &HolonomyPair, q: &HolonomyPair) -> Result<bool> {
    p.validate()?;
    q.validate()?;
    // Order the generators so a non-scalar linear part comes first (the same
    // swap on both pairs leaves conjugacy unchanged).
    let swap = is_scalar_mat(&p.h1.linear) && !is_scalar_mat(&p.h2.linear);
    let (p1, p2) = if swap { (&p.h2, &p.h1) } else { (&p.h1, &p.h2) };
    let (q1, q2) = if swap { (&q.h2, &q.h1) } else { (&q.h1, &q.h2) };

    if is_scalar_mat(&p1.linear) {
        return affine_pair_scalar(p1, p2, q1, q2);
    }
    if is_scalar_mat(&q1.linear) {
        return Ok(false);
    }
    if !pair_conjugate_glplus(&p1.linear, &p2.linear, &q1.linear, &q2.linear)? {
        return Ok(false);
    }
    let c0 = glplus_conjugator(&p1.linear, &q1.linear)?;
    let l = q1.linear;
    let u1 = c0 * p1.translation;
    let u2 = c0 * p2.translation;
    let b1 = Mat2::identity() - q1.linear;
    let b2 = Mat2::identity() - q2.linear;

    // Unknowns (α, β, v): rows are the two translation conditions
    //   z·(c₀ tᵢ) + (Id − Lᵢ')·v = tᵢ'.
    let mut m = SMatrix::<f64, 4, 4>::zeros();
    let mut rhs = SVector::<f64, 4>::zeros();
    for (row, (u, b, t)) in
        [(u1, b1, q1.translation), (u2, b2, q2.translation)].into_iter().enumerate()
    {
        let lu = l * u;
        for i in 0..2 {
            m[(2 * row + i, 0)] = u[i];
            m[(2 * row + i, 1)] = lu[i];
            m[(2 * row + i, 2)] = b[(i, 0)];
            m[(2 * row + i, 3)] = b[(i, 1)];
            rhs[2 * row + i] = t[i];
        }
    }
    let svd = m.svd(true, true);
    let sigma_max = svd.singular_values.max().max(1e-300);
    let x = svd
        .solve(&rhs, sigma_max * 1e-12)
        .map_err(|e| Error::Degenerate { detail: e.to_string() })?;
    let residual = (m * x - rhs).amax();
    if residual > SOLVE_TOL * (1.0 + rhs.amax() + m.amax()) {
        return Ok(false);
    }

    // Null directions of the system that move z = α·Id + β·L.
    let v_t = svd.v_t.as_ref().expect("requested");
    let mut z_nulls: Vec<(f64, f64)> = Vec::new();
    for i in 0..4 {
        if svd.singular_values[i] <= 1e-9 * sigma_max {
            let dir = v_t.row(i);
            if (dir[0].powi(2) + dir[1].powi(2)).sqrt() > 1e-9 {
                z_nulls.push((dir[0], dir[1]));
            }
        }
    }
    let det_form = |a: f64, b: f64| a * a + a * b * l.trace() + b * b * l.determinant();
    let scale_l = 1.0 + l.trace().abs() + l.determinant().abs();
    match z_nulls.len() {
        0 => {
            let value = det_form(x[0], x[1]);
            Ok(value > CHAR_TOL * scale_l * (x[0] * x[0] + x[1] * x[1]).max(1e-300))
        }
        1 => {
            // det z along the solution line is a quadratic a·s² + b·s + c.
            let (da, db) = z_nulls[0];
            let a = det_form(da, db);
            let b = 2.0 * x[0] * da
                + (x[0] * db + x[1] * da) * l.trace()
                + 2.0 * x[1] * db * l.determinant();
            let c = det_form(x[0], x[1]);
            let eps = CHAR_TOL * scale_l;
            Ok(if a > eps {
                true
            } else if a < -eps {
                b * b - 4.0 * a * c > 0.0
            } else {
                b.abs() > eps || c > eps
            })
        }
        // z is entirely unconstrained: take z = Id.
        _ => Ok(true),
    }
}

/// Affine pair conjugacy when every linear part is scalar: eliminate the
/// conjugator translation and decide the reduced frame conditions directly.
fn affine_pair_scalar(
    p1: &AffineMap2,
    p2: &AffineMap2,
    q1: &AffineMap2,
    q2: &AffineMap2,
) -> Result<bool> {
    for (a, b) in [(p1, q1), (p2, q2)] {
        if !is_scalar_mat(&a.linear) || !is_scalar_mat(&b.linear) {
            return Ok(false);
        }
        let (la, lb) = (0.5 * a.linear.trace(), 0.5 * b.linear.trace());
        if (la - lb).abs() > CHAR_TOL * la.abs().max(lb.abs()).max(1.0) {
            return Ok(false);
        }
    }
    let l1 = 0.5 * p1.linear.trace();
    let l2 = 0.5 * p2.linear.trace();
    let near = |x: f64, y: f64| (x - y).abs() <= CHAR_TOL * x.abs().max(y.abs()).max(1.0);

    if !near(l1, 1.0) || !near(l2, 1.0) {
        // Eliminate v through the generator whose scalar is ≠ 1; the other
        // condition becomes a single frame equation z·u = u'.
        let (s, t, s_, t_) = if near(l1, 1.0) {
            (p2, p1, q2, q1)
        } else {
            (p1, p2, q1, q2)
        };
        let ls = 0.5 * s.linear.trace();
        let lt = 0.5 * t.linear.trace();
        let mu = (1.0 - lt) / (1.0 - ls);
        let u = t.translation - s.translation * mu;
        let u_ = t_.translation - s_.translation * mu;
        let scale = u.norm().max(u_.norm()).max(1.0);
        let (uz, uz_) = (u.norm() <= CHAR_TOL * scale, u_.norm() <= CHAR_TOL * scale);
        return Ok(uz == uz_);
    }

    // Pure translation pairs: z·tᵢ = tᵢ' for z ∈ GL⁺.
    let frame = Mat2::from_columns(&[p1.translation, p2.translation]);
    let frame_ = Mat2::from_columns(&[q1.translation, q2.translation]);
    let scale = frame.amax().max(frame_.amax()).max(1.0);
    let (d, d_) = (frame.determinant(), frame_.determinant());
    if d.abs() > CHAR_TOL * scale * scale {
        return Ok(d_ * d > 0.0);
    }
    if frame.amax() <= CHAR_TOL * scale {
        return Ok(frame_.amax() <= CHAR_TOL * scale);
    }
    if d_.abs() > CHAR_TOL * scale * scale {
        return Ok(false);
    }
    // Both frames have rank one: the translation rays must have matching
    // coefficients t₂ = c·t₁ on both sides, with nonzero images.
    let (t1, t2) = (p1.translation, p2.translation);
    let (t1_, t2_) = (q1.translation, q2.translation);
    let (major, minor, major_, minor_) =
        if t1.norm() >= t2.norm() { (t1, t2, t1_, t2_) } else { (t2, t1, t2_, t1_) };
    if major_.norm() <= CHAR_TOL * scale {
        return Ok(false);
    }
    let c = minor.dot(&major) / major.dot(&major);
    let c_ = minor_.dot(&major_) / major_.dot(&major_);
    Ok((minor - major * c).norm() <= CHAR_TOL * scale
        && (minor_ - major_ * c_).norm() <= CHAR_TOL * scale
        && (c - c_).abs() <= CHAR_TOL * c.abs().max(c_.abs()).max(1.0))
}

// ───────────────────────── non-closed orbit witness ─────────────────────────

/// The conjugated point `(diag(λ,λ), c·[[λ,1],[0,λ]]·c⁻¹)` with
/// `c = diag(1,t)`, and its distance to the dilation pair it approaches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonclosedWitness {
    pub conjugated: HomPoint,
    pub distance: f64,
}

/// The pair `ρ₁ = (λ·Id, [[λ,1],[0,λ]])` and the dilation pair
/// `ρ₀ = (λ·Id, λ·Id)` in whose closure the orbit of `ρ₁` accumulates.
pub fn nonclosed_pair(lambda: f64) -> Result<(HomPoint, HomPoint)> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParams(format!("expected λ > 1, got {lambda}")));
    }
    let d = Mat2::identity() * lambda;
    let j = Mat2::new(lambda, 1.0, 0.0, lambda);
    Ok((HomPoint::from_matrices(&d, &j)?, HomPoint::from_matrices(&d, &d)?))
}

/// Conjugate the Jordan generator of `ρ₁` by `diag(1,t)`: its off-diagonal
/// entry becomes `1/t`, so the orbit point approaches `ρ₀` at distance `1/t`
/// without ever reaching it.
pub fn nonclosed_witness(lambda: f64, t: f64) -> Result<NonclosedWitness> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("expected t > 0, got {t}")));
    }
    let (_, rho0) = nonclosed_pair(lambda)?;
    let c = Mat2::new(1.0, 0.0, 0.0, t);
    let ci = Mat2::new(1.0, 0.0, 0.0, 1.0 / t);
    let j = Mat2::new(lambda, 1.0, 0.0, lambda);
    let conjugated = HomPoint::from_matrices(&(Mat2::identity() * lambda), &(c * j * ci))?;
    let distance = conjugated.distance(&rho0);
    Ok(NonclosedWitness { conjugated, distance })
}

// ───────────────────────── branched covering witness ─────────────────────────

/// Conjugacy verdicts for the pair `g_{a,±ε} = [[±ε, a],[−a, ±ε]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchedWitness {
    pub pgl_equal: bool,
    pub gltilde_equal: bool,
}

/// Witness of the twofold branching over the rotation class: the projections
/// of `g_{a,ε}` and `g_{a,−ε}` are PGL-conjugate for every ε, but their
/// (same-branch) lifts are conjugate in the cover only at ε = 0.
pub fn branched_witness(a: f64, eps: f64) -> Result<BranchedWitness> {
    let gp = Mat2::new(eps, a, -a, eps);
    let gm = Mat2::new(-eps, a, -a, -eps);
    let pgl_equal = conjugate_pgl(&gp, &gm)?;
    let gltilde_equal = conjugate_gltilde(&lift(&gp, 0)?, &lift(&gm, 0)?)?;
    Ok(BranchedWitness { pgl_equal, gltilde_equal })
}

// ───────────────────────── local injectivity probe ─────────────────────────

/// Outcome of [`local_injectivity_probe`]. `worst_case` is the largest
/// coefficient distance between a sampled cone point and its projected
/// perturbation, a measure of how far the probe actually wandered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub samples: u32,
    pub failures: u32,
    pub worst_case: f64,
}

/// Associativity defect as the 16 entries of the four matrix conditions
/// `L_{eᵢeⱼ} = L_{eᵢ}L_{eⱼ}` and `[L_{e₁}, L_{e₂}] = 0`.
fn associator_residuals(s: &AlgebraProduct) -> SVector<f64, 16> {
    let l1 = s.left_mult(&Vec2::x());
    let l2 = s.left_mult(&Vec2::y());
    let blocks = [
        s.left_mult(&s.c11) - l1 * l1,
        s.left_mult(&s.c12) - l1 * l2,
        s.left_mult(&s.c22) - l2 * l2,
        l1 * l2 - l2 * l1,
    ];
    let mut out = SVector::<f64, 16>::zeros();
    for (k, b) in blocks.iter().enumerate() {
        out[4 * k] = b[(0, 0)];
        out[4 * k + 1] = b[(0, 1)];
        out[4 * k + 2] = b[(1, 0)];
        out[4 * k + 3] = b[(1, 1)];
    }
    out
}

/// Gauss–Newton projection of a perturbed coefficient vector back onto the
/// cone; `None` when the iteration does not reach residual 1e-10.
fn project_to_cone(start: &AlgebraProduct) -> Option<AlgebraProduct> {
    let mut c = start.coeffs();
    for _ in 0..60 {
        let s = AlgebraProduct::from_coeffs(&c);
        let r = associator_residuals(&s);
        if r.amax() < 1e-12 {
            return Some(s);
        }
        let mut jac = SMatrix::<f64, 16, 6>::zeros();
        for j in 0..6 {
            let h = 1e-6 * (1.0 + c[j].abs());
            let mut cp = c;
            let mut cm = c;
            cp[j] += h;
            cm[j] -= h;
            let rp = associator_residuals(&AlgebraProduct::from_coeffs(&cp));
            let rm = associator_residuals(&AlgebraProduct::from_coeffs(&cm));
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        let svd = jac.svd(true, true);
        let eps = svd.singular_values.max().max(1e-300) * 1e-12;
        let step = svd.solve(&(-r), eps).ok()?;
        for j in 0..6 {
            c[j] += step[j];
        }
    }
    let s = AlgebraProduct::from_coeffs(&c);
    (associator_residuals(&s).amax() < 1e-10).then_some(s)
}

fn near_scalar(m: &Mat2, tol: f64) -> bool {
    let s = 0.5 * m.trace();
    (m - Mat2::identity() * s).amax() <= tol * m.amax().max(1.0)
}

fn holonomy_clear_of_dilations(pair: &HolonomyPair) -> bool {
    !near_scalar(&pair.h1.linear, 1e-3) && !near_scalar(&pair.h2.linear, 1e-3)
}

/// A generic cone point: a random conjugate of a random non-flat model,
/// resampled until the conjugator is well conditioned and the holonomy stays
/// away from dilations (where conjugacy decisions degenerate and the
/// holonomy map is known not to be injective).
fn sample_cone_point(rng: &mut ChaCha8Rng) -> (AlgebraProduct, HolonomyPair) {
    let strata =
        [StratumType::D, StratumType::C1, StratumType::C2, StratumType::B, StratumType::A];
    loop {
        let stratum = strata[rng.random_range(0..strata.len())];
        let g = Mat2::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        if g.determinant() < 0.05 {
            continue;
        }
        let sv = g.svd(false, false).singular_values;
        if sv[0] / sv[1] > 50.0 {
            continue;
        }
        let Ok(s) = act(&g, &model_product(stratum)) else { continue };
        let Ok(pair) = holonomy_of(&s) else { continue };
        if holonomy_clear_of_dilations(&pair) {
            return (s, pair);
        }
    }
}

/// Sample cone points, perturb each within `radius` in coefficient space,
/// project back onto the cone, and count violations of
/// "affinely conjugate holonomy ⇒ same stratum". With the dilation locus
/// excluded the count is expected to be zero.
pub fn local_injectivity_probe(samples: u32, radius: f64, seed: u64) -> Result<ProbeReport> {
    if samples == 0 || !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need samples > 0 and radius ≥ 0, got ({samples}, {radius})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u32;
    let mut worst_case = 0.0f64;
    let mut done = 0u32;
    let mut budget: u64 = 400 * samples as u64;
    while done < samples {
        budget = budget.checked_sub(1).ok_or_else(|| Error::Degenerate {
            detail: "probe exceeded its resampling budget".to_string(),
        })?;
        let (s, pair) = sample_cone_point(&mut rng);
        let mut perturbed = s.coeffs();
        if radius > 0.0 {
            for c in &mut perturbed {
                *c += rng.random_range(-radius..=radius);
            }
        }
        let Some(s2) = project_to_cone(&AlgebraProduct::from_coeffs(&perturbed)) else {
            continue;
        };
        let Ok(pair2) = holonomy_of(&s2) else { continue };
        if !holonomy_clear_of_dilations(&pair2) {
            continue;
        }
        let Ok(conjugate) = hom_conjugate_affine(&pair, &pair2) else {
            // Ambiguous class boundary: resample rather than guess.
            continue;
        };
        if conjugate {
            let (Ok(st1), Ok(st2)) = (classify_algebra(&s), classify_algebra(&s2)) else {
                continue;
            };
            if st1 != st2 {
                failures += 1;
            }
        }
        worst_case = worst_case.max(s.distance(&s2));
        done += 1;
    }
    Ok(ProbeReport { seed, samples, failures, worst_case })
}
