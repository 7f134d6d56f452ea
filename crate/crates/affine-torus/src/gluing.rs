//! Quadrilateral gluing data and the tilings they generate.
//!
//! A [`GluingDatum`] is a convex quadrilateral with vertices
//! `(0,0), (1,0), p, (0,1)` together with two affine side pairings: `A` maps
//! the left edge onto the right edge and `B` maps the bottom edge onto the
//! top edge. When the pairing conditions hold (see [`verify_gluing`]) the
//! abelian group generated by `A` and `B` acts properly discontinuously on an
//! open planar domain with the quadrilateral as fundamental domain, and
//! [`tile`] enumerates the translates `A^m B^n · P`.

use serde::{Deserialize, Serialize};

use crate::affine::{AffineMap2, Mat2, Vec2};
use crate::error::{Error, Result};
use crate::etale::HolonomyPair;

/// Residual tolerance for the pairing conditions and the convexity margin.
const GLUE_TOL: f64 = 1e-9;

/// Convex quadrilateral `(0,0), (1,0), p, (0,1)` with side pairings `A`
/// (left edge to right edge) and `B` (bottom edge to top edge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluingDatum {
    pub p: Vec2,
    pub a: AffineMap2,
    pub b: AffineMap2,
}

/// Serialization façade: `{"p": [x,y], "A": {...}, "B": {...}}`.
#[derive(Serialize, Deserialize)]
struct GluingDatumWire {
    p: [f64; 2],
    #[serde(rename = "A")]
    a: AffineMap2,
    #[serde(rename = "B")]
    b: AffineMap2,
}

impl Serialize for GluingDatum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GluingDatumWire { p: [self.p.x, self.p.y], a: self.a, b: self.b }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GluingDatum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = GluingDatumWire::deserialize(d)?;
        Ok(GluingDatum { p: Vec2::new(w.p[0], w.p[1]), a: w.a, b: w.b })
    }
}

impl GluingDatum {
    pub fn new(p: Vec2, a: AffineMap2, b: AffineMap2) -> Self {
        GluingDatum { p, a, b }
    }

    /// The unit square glued by the two unit translations.
    pub fn unit_square() -> Self {
        GluingDatum {
            p: Vec2::new(1.0, 1.0),
            a: AffineMap2::from_translation(Vec2::new(1.0, 0.0)),
            b: AffineMap2::from_translation(Vec2::new(0.0, 1.0)),
        }
    }

    /// Quadrilateral vertices in counterclockwise order.
    pub fn vertices(&self) -> [Vec2; 4] {
        quad_vertices(&self.p)
    }
}

fn quad_vertices(p: &Vec2) -> [Vec2; 4] {
    [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), *p, Vec2::new(0.0, 1.0)]
}

/// Smallest cross product of consecutive edge pairs. Positive for a convex
/// quadrilateral with counterclockwise vertices; a vanishing or negative
/// value signals a degenerate or reflex vertex.
pub fn convexity_margin(vertices: &[Vec2; 4]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..4 {
        let e = vertices[(i + 1) % 4] - vertices[i];
        let f = vertices[(i + 2) % 4] - vertices[(i + 1) % 4];
        min = min.min(e.x * f.y - e.y * f.x);
    }
    min
}

/// One violated pairing condition together with how badly it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingViolation {
    pub condition: String,
    pub residual: f64,
}

/// Outcome of [`verify_gluing`]: `valid` iff `diagnostics` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    pub valid: bool,
    pub diagnostics: Vec<GluingViolation>,
}

/// Check all pairing conditions: the four vertex equations, orientation of
/// both linear parts, commutation of the pairings, and convexity of the
/// quadrilateral. Only violated conditions are reported; equation residuals
/// are Euclidean distances, orientation residuals the determinant shortfall,
/// and the convexity residual the shortfall of the margin below tolerance.
pub fn verify_gluing(d: &GluingDatum) -> GluingReport {
    let zero = Vec2::new(0.0, 0.0);
    let e1 = Vec2::new(1.0, 0.0);
    let e2 = Vec2::new(0.0, 1.0);
    let mut diagnostics = Vec::new();

    let equations = [
        ("A maps (0,0) to (1,0)", (d.a.apply(zero) - e1).norm()),
        ("A maps (0,1) to p", (d.a.apply(e2) - d.p).norm()),
        ("B maps (0,0) to (0,1)", (d.b.apply(zero) - e2).norm()),
        ("B maps (1,0) to p", (d.b.apply(e1) - d.p).norm()),
        ("A and B commute", d.a.commutator_residual(&d.b)),
    ];
    for (condition, residual) in equations {
        if !(residual <= GLUE_TOL) {
            diagnostics.push(GluingViolation { condition: condition.to_string(), residual });
        }
    }

    let orientations =
        [("det l(A) > 0", d.a.linear.determinant()), ("det l(B) > 0", d.b.linear.determinant())];
    for (condition, det) in orientations {
        if !(det > 0.0) {
            diagnostics
                .push(GluingViolation { condition: condition.to_string(), residual: -det });
        }
    }

    let margin = convexity_margin(&quad_vertices(&d.p));
    if !(margin > GLUE_TOL) {
        diagnostics.push(GluingViolation {
            condition: "quadrilateral is convex".to_string(),
            residual: GLUE_TOL - margin,
        });
    }

    GluingReport { valid: diagnostics.is_empty(), diagnostics }
}

/// Normalize a commuting pair into a gluing datum based at `q`.
///
/// The unique affine map sending `(q, h1·q, h2·q)` to `((0,0), (1,0), (0,1))`
/// conjugates the pair into side pairings; the fourth vertex `p` is the image
/// of `h1 h2 · q`. Fails with [`Error::NotEmbeddable`] when the three base
/// points are (nearly) collinear or when the resulting quadrilateral is not
/// strictly convex.
pub fn polygon_from_holonomy(h: &HolonomyPair, q: Vec2) -> Result<GluingDatum> {
    h.validate()?;
    let f1 = h.h1.apply(q) - q;
    let f2 = h.h2.apply(q) - q;
    let frame = Mat2::from_columns(&[f1, f2]);
    let det = frame.determinant();
    if det.abs() <= GLUE_TOL * (f1.norm() * f2.norm()).max(1.0) {
        return Err(Error::NotEmbeddable {
            detail: format!("orbit frame at the base point is degenerate (det {det:.3e})"),
        });
    }
    let n_inv = AffineMap2::new(frame, q);
    let n = n_inv.inverse()?;
    let a = n.compose(&h.h1).compose(&n_inv);
    let b = n.compose(&h.h2).compose(&n_inv);
    let p = n.apply(h.h1.apply(h.h2.apply(q)));
    let margin = convexity_margin(&quad_vertices(&p));
    if !(margin > GLUE_TOL) {
        return Err(Error::NotEmbeddable {
            detail: format!(
                "vertex p = ({:.6}, {:.6}) leaves convexity margin {margin:.3e}",
                p.x, p.y
            ),
        });
    }
    Ok(GluingDatum { p, a, b })
}

/// One translate `A^m B^n · P` of the fundamental quadrilateral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    /// Exponents `(m, n)` of the group element producing this tile.
    pub word: [i64; 2],
    /// Image vertices, same order as the fundamental quadrilateral.
    pub polygon: [[f64; 2]; 4],
}

impl Tile {
    pub fn vertices(&self) -> [Vec2; 4] {
        self.polygon.map(|v| Vec2::new(v[0], v[1]))
    }
}

/// All tiles produced by [`tile`], in row-major word order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tiling {
    pub tiles: Vec<Tile>,
}

impl Tiling {
    /// Keep tiles whose axis-aligned bounding box meets the closed viewport
    /// `[min.x, max.x] × [min.y, max.y]`.
    pub fn clip(&self, min: [f64; 2], max: [f64; 2]) -> Tiling {
        let tiles = self
            .tiles
            .iter()
            .filter(|t| {
                let xs = t.polygon.map(|v| v[0]);
                let ys = t.polygon.map(|v| v[1]);
                let fold = |vals: [f64; 4], f: fn(f64, f64) -> f64| vals.into_iter().fold(vals[0], f);
                fold(xs, f64::max) >= min[0]
                    && fold(xs, f64::min) <= max[0]
                    && fold(ys, f64::max) >= min[1]
                    && fold(ys, f64::min) <= max[1]
            })
            .cloned()
            .collect();
        Tiling { tiles }
    }
}

/// Signed shoelace area; positive for counterclockwise vertices.
pub fn polygon_area(polygon: &[[f64; 2]; 4]) -> f64 {
    let mut twice = 0.0;
    for i in 0..4 {
        let [x0, y0] = polygon[i];
        let [x1, y1] = polygon[(i + 1) % 4];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice
}

/// Enumerate the translates `A^m B^n · P` for `|m|, |n| ≤ radius`.
///
/// Powers by the commuting side pairings exhaust the group, so no other
/// words need to be considered. Fails with [`Error::InvalidGluing`] when the
/// datum does not satisfy the pairing conditions.
pub fn tile(d: &GluingDatum, radius: u32) -> Result<Tiling> {
    let report = verify_gluing(d);
    if !report.valid {
        let names: Vec<&str> = report.diagnostics.iter().map(|v| v.condition.as_str()).collect();
        return Err(Error::InvalidGluing(format!("violated conditions: {}", names.join(", "))));
    }
    let a_pows = signed_powers(&d.a, radius)?;
    let b_pows = signed_powers(&d.b, radius)?;
    let verts = quad_vertices(&d.p);
    let r = radius as i64;
    let mut tiles = Vec::with_capacity(a_pows.len() * b_pows.len());
    for (m, am) in (-r..=r).zip(&a_pows) {
        for (n, bn) in (-r..=r).zip(&b_pows) {
            let g = am.compose(bn);
            let polygon = verts.map(|v| {
                let w = g.apply(v);
                [w.x, w.y]
            });
            tiles.push(Tile { word: [m, n], polygon });
        }
    }
    Ok(Tiling { tiles })
}

/// Powers `g^-r, …, g^0, …, g^r` built by successive composition.
fn signed_powers(g: &AffineMap2, radius: u32) -> Result<Vec<AffineMap2>> {
    let g_inv = g.inverse()?;
    let mut pos = vec![AffineMap2::identity()];
    let mut neg: Vec<AffineMap2> = Vec::new();
    for k in 0..radius as usize {
        pos.push(pos[k].compose(g));
        neg.push(if k == 0 { g_inv } else { neg[k - 1].compose(&g_inv) });
    }
    neg.reverse();
    neg.extend(pos);
    Ok(neg)
}
