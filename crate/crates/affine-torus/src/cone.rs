//! The quadratic cone of translation-invariant flat affine structures on the
//! two-torus, realized as commutative associative bilinear products on ℝ².
//!
//! A product is stored by its three structure vectors `c11 = e₁·e₁`,
//! `c12 = e₁·e₂ = e₂·e₁`, `c22 = e₂·e₂` (commutativity is structural). The
//! cone consists of the products whose associator vanishes; its points fall
//! into six invertible-basis-change orbits, classified here by rank of the
//! product image and existence of idempotents, nilpotents, and zero divisors.

use nalgebra::Matrix2x3;
use serde::{Deserialize, Serialize};

use crate::affine::{mat2_exp, Mat2, Vec2};
use crate::error::{Error, Result};

/// Membership tolerance: a product belongs to the cone when its
/// associativity residual is below this bound at unit coefficient scale.
/// The residual is quadratic in the coefficients, so membership tests
/// compare against `CONE_TOL·max(1, amax²)` to stay scale-invariant.
pub const CONE_TOL: f64 = 1e-9;

const BAND_LO: f64 = 1e-9;
const BAND_HI: f64 = 1e-6;

/// Bands for the normalized left-multiplication discriminant at rank two:
/// below `DISC_LO` the eigenvalue gap vanishes (dual numbers), above
/// `DISC_HI` its square has a definite sign (split or complex); in between
/// the input is refused. The statistic is read directly off the stored
/// coefficients, so on a genuine double root it is pure rounding —
/// measured below 10⁻¹⁵ across basis changes of condition up to 10³ —
/// while skewing by condition κ suppresses a genuine gap by at most a
/// fixed power of κ, measured above 10⁻⁶ on the same sweep
/// (`band_margins_on_conditioned_samples`). The bands sit three orders of
/// magnitude from each shore.
const DISC_LO: f64 = 1e-12;
const DISC_HI: f64 = 1e-9;

/// Bands for the rank-one idempotent ratio, placed by the same sweep: pure
/// rounding (< 10⁻¹⁵) without an idempotent, above 4·10⁻⁶ with one, for
/// condition up to 10³.
const IDEM_LO: f64 = 1e-12;
const IDEM_HI: f64 = 1e-9;

/// A commutative bilinear product on ℝ², i.e. a candidate point of the cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraProduct {
    pub c11: Vec2,
    pub c12: Vec2,
    pub c22: Vec2,
}

impl AlgebraProduct {
    pub fn new(c11: Vec2, c12: Vec2, c22: Vec2) -> Self {
        AlgebraProduct { c11, c12, c22 }
    }

    pub fn zero() -> Self {
        AlgebraProduct { c11: Vec2::zeros(), c12: Vec2::zeros(), c22: Vec2::zeros() }
    }

    /// Flat coefficient order `[c11x, c11y, c12x, c12y, c22x, c22y]`, the
    /// JSON wire format.
    pub fn coeffs(&self) -> [f64; 6] {
        [self.c11.x, self.c11.y, self.c12.x, self.c12.y, self.c22.x, self.c22.y]
    }

    pub fn from_coeffs(c: &[f64; 6]) -> Self {
        AlgebraProduct {
            c11: Vec2::new(c[0], c[1]),
            c12: Vec2::new(c[2], c[3]),
            c22: Vec2::new(c[4], c[5]),
        }
    }

    /// The product `u·v`.
    pub fn mul(&self, u: &Vec2, v: &Vec2) -> Vec2 {
        self.c11 * (u.x * v.x) + self.c12 * (u.x * v.y + u.y * v.x) + self.c22 * (u.y * v.y)
    }

    /// Left multiplication `L_u : v ↦ u·v` as a matrix.
    pub fn left_mult(&self, u: &Vec2) -> Mat2 {
        Mat2::from_columns(&[self.c11 * u.x + self.c12 * u.y, self.c12 * u.x + self.c22 * u.y])
    }

    /// Largest coefficient magnitude.
    pub fn amax(&self) -> f64 {
        self.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Largest coefficientwise difference to another product.
    pub fn distance(&self, other: &AlgebraProduct) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs().iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Maximum of `‖(u·v)·w − u·(v·w)‖` over the eight basis triples; zero
    /// exactly on the cone. Scales quadratically: the residual of `s·S` is
    /// `s²` times the residual of `S`.
    pub fn associativity_residual(&self) -> f64 {
        let basis = [Vec2::x(), Vec2::y()];
        let mut worst = 0.0f64;
        for u in &basis {
            for v in &basis {
                for w in &basis {
                    let left = self.mul(&self.mul(u, v), w);
                    let right = self.mul(u, &self.mul(v, w));
                    worst = worst.max((left - right).norm());
                }
            }
        }
        worst
    }

    fn check_cone(&self) -> Result<()> {
        let r = self.associativity_residual();
        let scale = self.amax();
        if r < CONE_TOL * (scale * scale).max(1.0) {
            Ok(())
        } else {
            Err(Error::NotInCone { residual: r })
        }
    }

    /// Geodesic completeness of the associated connection: both basis
    /// left-multiplications are trace-free. Holds exactly on the strata
    /// `T` and `D`.
    pub fn is_complete(&self) -> Result<bool> {
        self.check_cone()?;
        let scale = self.amax().max(1.0);
        let t1 = self.c11.x + self.c12.y;
        let t2 = self.c12.x + self.c22.y;
        Ok(t1.abs() < CONE_TOL * scale && t2.abs() < CONE_TOL * scale)
    }
}

impl Serialize for AlgebraProduct {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraProduct {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = <[f64; 6]>::deserialize(d)?;
        Ok(AlgebraProduct::from_coeffs(&c))
    }
}

/// The six basis-change orbits of the cone.
///
/// * `T` — the zero product;
/// * `D` — rank-one image, no idempotent (`e₂² = e₁`, all else zero);
/// * `C2` — rank-one image with an idempotent (`e₂² = e₂`);
/// * `C1` — rank two with a nonzero nilpotent (dual numbers);
/// * `B` — rank two, no nilpotent, zero divisors (split: ℝ × ℝ);
/// * `A` — rank two, no zero divisors (complex multiplication).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StratumType {
    T,
    D,
    C2,
    C1,
    B,
    A,
}

impl StratumType {
    pub const ALL: [StratumType; 6] = [
        StratumType::T,
        StratumType::D,
        StratumType::C2,
        StratumType::C1,
        StratumType::B,
        StratumType::A,
    ];

    /// The strata whose structures are geodesically complete.
    pub fn is_complete_stratum(&self) -> bool {
        matches!(self, StratumType::T | StratumType::D)
    }
}

impl std::fmt::Display for StratumType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StratumType::T => "T",
            StratumType::D => "D",
            StratumType::C2 => "C2",
            StratumType::C1 => "C1",
            StratumType::B => "B",
            StratumType::A => "A",
        };
        f.write_str(s)
    }
}

/// Model product for each stratum, obtained by differentiating the model
/// group of affine motions at the identity.
pub fn model_product(stratum: StratumType) -> AlgebraProduct {
    let e1 = Vec2::x();
    let e2 = Vec2::y();
    let o = Vec2::zeros();
    match stratum {
        StratumType::T => AlgebraProduct::new(o, o, o),
        StratumType::D => AlgebraProduct::new(o, o, e1),
        StratumType::C2 => AlgebraProduct::new(o, o, e2),
        StratumType::C1 => AlgebraProduct::new(o, e1, e2),
        StratumType::B => AlgebraProduct::new(e1, o, e2),
        StratumType::A => AlgebraProduct::new(e1, e2, Vec2::new(-1.0, 0.0)),
    }
}

/// Rank of the coefficient matrix `[c11 c12 c22]`, with an explicit error
/// when a singular value falls inside the ambiguous band
/// `(1e-9, 1e-6)·‖S‖`.
fn coefficient_rank(s: &AlgebraProduct) -> Result<usize> {
    let m = Matrix2x3::<f64>::from_columns(&[s.c11, s.c12, s.c22]);
    let scale = m.norm();
    let sv = m.svd(false, false).singular_values;
    let mut rank = 0;
    for &sigma in sv.iter() {
        if sigma > BAND_HI * scale {
            rank += 1;
        } else if sigma > BAND_LO * scale {
            return Err(Error::DegenerateRank {
                value: sigma,
                lo: BAND_LO * scale,
                hi: BAND_HI * scale,
            });
        }
    }
    Ok(rank)
}

/// Rank-two invariants from characteristic polynomials of left
/// multiplications. Every element `x` of a two-dimensional commutative
/// unital algebra satisfies the characteristic polynomial of `L_x`, so the
/// discriminant `tr(L_x)² − 4·det(L_x)` is the squared eigenvalue gap of
/// `x`: a quadratic form in `x`, positive semidefinite of rank one on the
/// split orbit, negative semidefinite on the complex orbit, identically
/// zero on dual numbers. Reading it at fixed probes costs a handful of
/// products of the stored coefficients — no solves, no basis adaptation —
/// so the computed value carries plain rounding error at the coefficient
/// scale no matter how skewed a basis the product arrived in.
struct RankTwoSplit {
    /// Largest-magnitude probe discriminant over `{e₁, e₂, e₁+e₂}`,
    /// normalized by the largest squared probe Frobenius norm.
    eta: f64,
    /// Double-eigenvalue eigenvector of the most informative probe: the
    /// square-zero direction when `eta` vanishes.
    nil_dir: Vec2,
}

fn rank_two_split(s: &AlgebraProduct) -> Result<RankTwoSplit> {
    let probes = [Vec2::x(), Vec2::y(), Vec2::new(1.0, 1.0)];
    let mut disc_best = 0.0f64;
    let mut scale = 0.0f64;
    let mut dev_norm = 0.0f64;
    let mut dev = Mat2::zeros();
    for w in &probes {
        let l = s.left_mult(w);
        scale = scale.max(l.norm_squared());
        let tr = l.trace();
        let d = tr * tr - 4.0 * l.determinant();
        if d.abs() > disc_best.abs() {
            disc_best = d;
        }
        // Trace-free part: a multiple of the square-zero multiplication on
        // dual numbers, whose kernel is the square-zero line.
        let m = l - Mat2::identity() * (0.5 * tr);
        if m.norm() > dev_norm {
            dev_norm = m.norm();
            dev = m;
        }
    }
    if !(scale > 0.0) || !(dev_norm > 0.0) {
        return Err(Error::Degenerate {
            detail: "rank-two product has scalar left multiplications".to_string(),
        });
    }
    let r1 = Vec2::new(dev[(0, 0)], dev[(0, 1)]);
    let r2 = Vec2::new(dev[(1, 0)], dev[(1, 1)]);
    let r = if r1.norm() >= r2.norm() { r1 } else { r2 };
    Ok(RankTwoSplit { eta: disc_best / scale, nil_dir: Vec2::new(-r.y, r.x).normalize() })
}

/// The direction of a nonzero square-zero element, if one exists. At rank
/// two the question is settled by the discriminant of the left-multiplication
/// characteristic polynomial; at rank one every square lies on the image
/// line ℝŵ, so squares are `q(x)·ŵ` for a single binary quadratic `q` and
/// the answer is a real root of `q`.
pub fn nilpotent_direction(s: &AlgebraProduct) -> Result<Option<Vec2>> {
    match coefficient_rank(s)? {
        0 => Ok(Some(Vec2::x())),
        1 => {
            let cols = [s.c11, s.c12, s.c22];
            let w = cols.iter().cloned().fold(Vec2::zeros(), |best, c| {
                if c.norm() > best.norm() { c } else { best }
            });
            let wh = w / w.norm();
            let f11 = s.c11.dot(&wh);
            let f12 = s.c12.dot(&wh);
            let f22 = s.c22.dot(&wh);
            let fscale = f11.abs().max(f12.abs()).max(f22.abs());
            if fscale == 0.0 {
                return Ok(Some(Vec2::x()));
            }
            let disc = f12 * f12 - f11 * f22;
            let ratio = disc / (fscale * fscale);
            if ratio <= -BAND_HI {
                return Ok(None);
            }
            if ratio < -BAND_LO {
                return Err(Error::Degenerate {
                    detail: format!("square-form discriminant {ratio:.3e} falls in the ambiguous band"),
                });
            }
            let sq = disc.max(0.0).sqrt();
            let v = if f11.abs() >= f22.abs() {
                if f11 == 0.0 {
                    Vec2::x()
                } else {
                    Vec2::new(-(f12 + f12.signum() * sq) / f11, 1.0)
                }
            } else {
                Vec2::new(1.0, -(f12 + f12.signum() * sq) / f22)
            };
            Ok(Some(v.normalize()))
        }
        _ => {
            let split = rank_two_split(s)?;
            if split.eta.abs() <= DISC_LO {
                Ok(Some(split.nil_dir))
            } else if split.eta.abs() >= DISC_HI {
                Ok(None)
            } else {
                Err(Error::Degenerate {
                    detail: format!(
                        "minimal-polynomial discriminant {:.3e} falls in the ambiguous band",
                        split.eta
                    ),
                })
            }
        }
    }
}

/// Orbit classification by the decision tree: rank 0 → `T`; rank 1 with an
/// idempotent → `C2`, otherwise `D`; rank 2 with a square-zero element →
/// `C1`, otherwise the sign of the minimal-polynomial discriminant decides
/// split (`B`) against complex (`A`).
pub fn classify_algebra(s: &AlgebraProduct) -> Result<StratumType> {
    s.check_cone()?;
    match coefficient_rank(s)? {
        0 => Ok(StratumType::T),
        1 => {
            // The image is a line ℝŵ, and x = tŵ solves x·x = x for some
            // t ≠ 0 iff the square of ŵ has a nonzero component μ along ŵ.
            // At unit arguments |μ|/‖S‖ is scale-free; without an idempotent
            // it is pure rounding noise.
            let cols = [s.c11, s.c12, s.c22];
            let w = cols.iter().cloned().fold(Vec2::zeros(), |best, c| {
                if c.norm() > best.norm() { c } else { best }
            });
            let wh = w / w.norm();
            let mu = s.mul(&wh, &wh).dot(&wh);
            let ratio = mu.abs() / s.amax().max(f64::MIN_POSITIVE);
            if ratio >= IDEM_HI {
                Ok(StratumType::C2)
            } else if ratio <= IDEM_LO {
                Ok(StratumType::D)
            } else {
                Err(Error::Degenerate {
                    detail: format!("idempotent ratio {ratio:.3e} falls in the ambiguous band"),
                })
            }
        }
        _ => {
            let split = rank_two_split(s)?;
            if split.eta.abs() <= DISC_LO {
                Ok(StratumType::C1)
            } else if split.eta >= DISC_HI {
                Ok(StratumType::B)
            } else if split.eta <= -DISC_HI {
                Ok(StratumType::A)
            } else {
                Err(Error::Degenerate {
                    detail: format!(
                        "minimal-polynomial discriminant {:.3e} falls in the ambiguous band",
                        split.eta
                    ),
                })
            }
        }
    }
}

/// Basis-change action: `(g·S)(u, v) = g·S(g⁻¹u, g⁻¹v)`. Homotheties act by
/// inverse scale: `act(tE, S) = t⁻¹·S`.
pub fn act(g: &Mat2, s: &AlgebraProduct) -> Result<AlgebraProduct> {
    let gi = g.try_inverse().ok_or(Error::SingularMatrix)?;
    let a = gi * Vec2::x();
    let b = gi * Vec2::y();
    Ok(AlgebraProduct {
        c11: g * s.mul(&a, &a),
        c12: g * s.mul(&a, &b),
        c22: g * s.mul(&b, &b),
    })
}

/// A one-parameter subgroup `λ(t) = exp(log(t)·X)` of GL(2,ℝ), `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneParamSubgroup {
    pub generator: Mat2,
}

impl OneParamSubgroup {
    pub fn from_generator(generator: Mat2) -> Self {
        OneParamSubgroup { generator }
    }

    /// Generator `diag(a, b)`, giving `λ(t) = diag(t^a, t^b)`.
    pub fn diag(a: f64, b: f64) -> Self {
        OneParamSubgroup { generator: Mat2::new(a, 0.0, 0.0, b) }
    }

    /// The homothety subgroup `λ(t) = t·E`.
    pub fn homothety() -> Self {
        OneParamSubgroup { generator: Mat2::identity() }
    }

    /// Evaluate `λ(t)`.
    pub fn at(&self, t: f64) -> Result<Mat2> {
        if !(t > 0.0) {
            return Err(Error::InvalidParams(format!("subgroup parameter t = {t} must be positive")));
        }
        Ok(mat2_exp(&(self.generator * t.ln())))
    }
}

/// Result of pushing a product along a one-parameter subgroup to `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegenerationOutcome {
    Limit(AlgebraProduct),
    Divergent,
}

/// Evaluates `act(λ(t), S)` on the grid `t ∈ {10, 10², …, 10⁶}` and, when the
/// tail is Cauchy, returns the geometrically extrapolated limit; otherwise
/// reports divergence.
pub fn degenerate(s: &AlgebraProduct, lambda: &OneParamSubgroup) -> DegenerationOutcome {
    let mut evals = Vec::with_capacity(6);
    for p in 1..=6 {
        let t = 10f64.powi(p);
        let g = match lambda.at(t) {
            Ok(g) => g,
            Err(_) => return DegenerationOutcome::Divergent,
        };
        let st = match act(&g, s) {
            Ok(st) => st,
            Err(_) => return DegenerationOutcome::Divergent,
        };
        if !st.coeffs().iter().all(|c| c.is_finite()) {
            return DegenerationOutcome::Divergent;
        }
        evals.push(st);
    }
    let last = evals[5];
    let prev = evals[4];
    let d_last = last.distance(&prev);
    let d_prev = prev.distance(&evals[3]);
    if d_last <= 1e-12 {
        return DegenerationOutcome::Limit(last);
    }
    if d_prev <= 1e-12 {
        return DegenerationOutcome::Divergent; // stalled then moved: not Cauchy
    }
    let rho = d_last / d_prev;
    if rho >= 0.9 {
        return DegenerationOutcome::Divergent;
    }
    // One-step geometric extrapolation of each coefficient, with the common
    // ratio estimated from the norm sequence; the estimated remaining error
    // must meet the convergence tolerance.
    let est_err = d_last * rho * rho / (1.0 - rho);
    if est_err >= 1e-6 {
        return DegenerationOutcome::Divergent;
    }
    let factor = rho / (1.0 - rho);
    let lc = last.coeffs();
    let pc = prev.coeffs();
    let mut ext = [0.0f64; 6];
    for i in 0..6 {
        ext[i] = lc[i] + (lc[i] - pc[i]) * factor;
        if ext[i].abs() < 1e-9 {
            ext[i] = 0.0;
        }
    }
    DegenerationOutcome::Limit(AlgebraProduct::from_coeffs(&ext))
}

/// One verified degeneration move between strata: pushing
/// `act(preconjugation, model_product(from))` along `subgroup` converges to a
/// product of stratum `to`.
#[derive(Debug, Clone, Copy)]
pub struct DegenerationEdge {
    pub from: StratumType,
    pub to: StratumType,
    pub subgroup: OneParamSubgroup,
    pub preconjugation: Mat2,
}

impl DegenerationEdge {
    /// The starting product of the move.
    pub fn start(&self) -> AlgebraProduct {
        act(&self.preconjugation, &model_product(self.from)).expect("preconjugations are invertible")
    }
}

/// The library of stratum adjacencies, one explicit subgroup per edge of the
/// degeneration graph A→C1, C1→D, D→T, B→C2, C2→T, B→C1.
pub fn degeneration_edges() -> Vec<DegenerationEdge> {
    let id = Mat2::identity();
    vec![
        DegenerationEdge {
            from: StratumType::A,
            to: StratumType::C1,
            subgroup: OneParamSubgroup::diag(0.0, 1.0),
            preconjugation: id,
        },
        DegenerationEdge {
            from: StratumType::C1,
            to: StratumType::D,
            subgroup: OneParamSubgroup::from_generator(Mat2::new(2.0, -1.0, 0.0, 1.0)),
            preconjugation: id,
        },
        DegenerationEdge {
            from: StratumType::D,
            to: StratumType::T,
            subgroup: OneParamSubgroup::homothety(),
            preconjugation: id,
        },
        DegenerationEdge {
            from: StratumType::B,
            to: StratumType::C2,
            subgroup: OneParamSubgroup::diag(1.0, 0.0),
            preconjugation: id,
        },
        DegenerationEdge {
            from: StratumType::C2,
            to: StratumType::T,
            subgroup: OneParamSubgroup::diag(0.0, 1.0),
            preconjugation: id,
        },
        DegenerationEdge {
            from: StratumType::B,
            to: StratumType::C1,
            subgroup: OneParamSubgroup::diag(1.0, 0.0),
            // Move the split idempotent basis to (unit, square root of unit)
            // first; the contraction then freezes the dual-number table.
            preconjugation: Mat2::new(0.5, -0.5, 0.5, 0.5),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The decision statistics keep at least two orders of magnitude of
    /// clearance on both sides of their bands under basis changes of
    /// condition up to 10³ (the sweep that placed the band constants).
    #[test]
    fn band_margins_on_conditioned_samples() {
        use rand::{Rng, SeedableRng};
        let mut c1_noise = 0.0f64;
        let mut b_signal = f64::INFINITY;
        let mut a_signal = f64::INFINITY;
        let mut d_noise = 0.0f64;
        let mut c2_signal = f64::INFINITY;
        let mut refused = 0usize;
        for seed in 0..4u64 {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                let c = 10f64.powf(r.random_range(0.0..1.5));
                let refl = if r.random_range(0..2) == 0 { 1.0 } else { -1.0 };
                let g = crate::cover::rotation(r.random_range(0.0..std::f64::consts::PI))
                    * Mat2::new(c, 0.0, 0.0, refl / c)
                    * crate::cover::rotation(r.random_range(0.0..std::f64::consts::PI));
                for st in [StratumType::C1, StratumType::B, StratumType::A] {
                    let moved = act(&g, &model_product(st)).unwrap();
                    match rank_two_split(&moved) {
                        Ok(split) => match st {
                            StratumType::C1 => c1_noise = c1_noise.max(split.eta.abs()),
                            StratumType::B => b_signal = b_signal.min(split.eta),
                            _ => a_signal = a_signal.min(-split.eta),
                        },
                        Err(_) => refused += 1,
                    }
                }
                for st in [StratumType::D, StratumType::C2] {
                    let moved = act(&g, &model_product(st)).unwrap();
                    let cols = [moved.c11, moved.c12, moved.c22];
                    let w = cols.iter().cloned().fold(Vec2::zeros(), |best, col| {
                        if col.norm() > best.norm() { col } else { best }
                    });
                    let wh = w / w.norm();
                    let mu = moved.mul(&wh, &wh).dot(&wh);
                    let ratio = mu.abs() / moved.amax().max(f64::MIN_POSITIVE);
                    if st == StratumType::D {
                        d_noise = d_noise.max(ratio);
                    } else {
                        c2_signal = c2_signal.min(ratio);
                    }
                }
            }
        }
        assert_eq!(refused, 0);
        assert!(c1_noise < DISC_LO * 1e-2, "C1 noise ceiling {c1_noise:.3e}");
        assert!(b_signal > DISC_HI * 1e2, "B signal floor {b_signal:.3e}");
        assert!(a_signal > DISC_HI * 1e2, "A signal floor {a_signal:.3e}");
        assert!(d_noise < IDEM_LO * 1e-2, "D noise ceiling {d_noise:.3e}");
        assert!(c2_signal > IDEM_HI * 1e2, "C2 signal floor {c2_signal:.3e}");
    }

    #[test]
    fn residual_vanishes_on_all_models() {
        for st in StratumType::ALL {
            let s = model_product(st);
            assert!(s.associativity_residual() < 1e-15, "stratum {st}");
        }
    }

    #[test]
    fn residual_of_a_nonassociative_table() {
        // e₁² = e₁ and e₂² = e₁: (e₂e₂)e₁ = e₁ but e₂(e₂e₁) = 0.
        let s = AlgebraProduct::new(Vec2::x(), Vec2::zeros(), Vec2::x());
        assert!((s.associativity_residual() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_scales_quadratically() {
        let s = AlgebraProduct::new(Vec2::new(1.0, 0.5), Vec2::new(-0.3, 0.2), Vec2::new(0.1, 1.0));
        let scaled = AlgebraProduct::from_coeffs(&s.coeffs().map(|c| 3.0 * c));
        assert!(
            (scaled.associativity_residual() - 9.0 * s.associativity_residual()).abs() < 1e-12
        );
    }

    #[test]
    fn completeness_matches_the_strata() {
        for st in StratumType::ALL {
            assert_eq!(
                model_product(st).is_complete().unwrap(),
                st.is_complete_stratum(),
                "stratum {st}"
            );
        }
    }

    #[test]
    fn completeness_requires_cone_membership() {
        let s = AlgebraProduct::new(Vec2::x(), Vec2::zeros(), Vec2::x());
        assert!(matches!(s.is_complete(), Err(Error::NotInCone { .. })));
    }

    #[test]
    fn models_classify_to_their_strata() {
        for st in StratumType::ALL {
            assert_eq!(classify_algebra(&model_product(st)).unwrap(), st);
        }
    }

    #[test]
    fn action_examples() {
        let s = model_product(StratumType::A);
        let id_act = act(&Mat2::identity(), &s).unwrap();
        assert!(s.distance(&id_act) < 1e-15);

        let t = 4.0;
        let scaled = act(&(Mat2::identity() * t), &s).unwrap();
        let expected = AlgebraProduct::from_coeffs(&s.coeffs().map(|c| c / t));
        assert!(scaled.distance(&expected) < 1e-14);
    }

    #[test]
    fn classification_is_basis_change_invariant() {
        let gs = [
            Mat2::new(1.0, 2.0, 3.0, 1.0),
            Mat2::new(0.5, 0.0, 1.0, -2.0),
            Mat2::new(-1.0, 0.3, 0.7, 1.1),
        ];
        for st in StratumType::ALL {
            let s = model_product(st);
            for g in &gs {
                let moved = act(g, &s).unwrap();
                assert!(moved.associativity_residual() < 1e-12);
                assert_eq!(classify_algebra(&moved).unwrap(), st, "stratum {st}, g {g:?}");
            }
        }
    }

    #[test]
    fn subgroup_evaluation() {
        let lam = OneParamSubgroup::diag(1.0, 0.0);
        assert!((lam.at(1.0).unwrap() - Mat2::identity()).amax() < 1e-15);
        let g = lam.at(100.0).unwrap();
        assert!((g - Mat2::new(100.0, 0.0, 0.0, 1.0)).amax() < 1e-9);
        // One-parameter law λ(st) = λ(s)λ(t).
        let x = OneParamSubgroup::from_generator(Mat2::new(2.0, -1.0, 0.0, 1.0));
        let lhs = x.at(6.0).unwrap();
        let rhs = x.at(2.0).unwrap() * x.at(3.0).unwrap();
        assert!((lhs - rhs).amax() < 1e-9 * lhs.amax());
        assert!(x.at(-1.0).is_err());
    }

    #[test]
    fn generator_subgroup_closed_form() {
        // exp(log t · [[2,−1],[0,1]]) = [[t², t − t²],[0, t]].
        let x = OneParamSubgroup::from_generator(Mat2::new(2.0, -1.0, 0.0, 1.0));
        for t in [2.0, 10.0, 1000.0] {
            let g = x.at(t).unwrap();
            let want = Mat2::new(t * t, t - t * t, 0.0, t);
            assert!((g - want).amax() < 1e-9 * want.amax(), "t = {t}");
        }
    }

    #[test]
    fn degeneration_edges_land_in_their_strata() {
        for edge in degeneration_edges() {
            let start = edge.start();
            assert_eq!(classify_algebra(&start).unwrap(), edge.from);
            match degenerate(&start, &edge.subgroup) {
                DegenerationOutcome::Limit(l) => {
                    assert_eq!(
                        classify_algebra(&l).unwrap(),
                        edge.to,
                        "edge {} → {}",
                        edge.from,
                        edge.to
                    );
                }
                DegenerationOutcome::Divergent => {
                    panic!("edge {} → {} diverged", edge.from, edge.to)
                }
            }
        }
    }

    #[test]
    fn homothety_degenerates_everything_to_zero() {
        for st in StratumType::ALL {
            match degenerate(&model_product(st), &OneParamSubgroup::homothety()) {
                DegenerationOutcome::Limit(l) => {
                    assert_eq!(classify_algebra(&l).unwrap(), StratumType::T, "stratum {st}");
                    assert!(l.amax() < 1e-9);
                }
                DegenerationOutcome::Divergent => panic!("homothety diverged on {st}"),
            }
        }
    }

    #[test]
    fn contracting_direction_diverges() {
        let s = model_product(StratumType::B);
        let lam = OneParamSubgroup::diag(-1.0, 0.0);
        assert_eq!(degenerate(&s, &lam), DegenerationOutcome::Divergent);
    }

    #[test]
    fn nilpotent_directions() {
        let c1 = model_product(StratumType::C1);
        let v = nilpotent_direction(&c1).unwrap().expect("dual numbers have nilpotents");
        assert!(c1.mul(&v, &v).norm() < 1e-12);
        assert!(nilpotent_direction(&model_product(StratumType::A)).unwrap().is_none());
        assert!(nilpotent_direction(&model_product(StratumType::B)).unwrap().is_none());
    }

    #[test]
    fn product_json_is_a_flat_array() {
        let s = model_product(StratumType::A);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[1.0,0.0,0.0,1.0,-1.0,0.0]");
        let back: AlgebraProduct = serde_json::from_str(&json).unwrap();
        assert!(s.distance(&back) < 1e-15);
    }
}
