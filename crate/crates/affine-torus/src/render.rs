//! SVG rendering of quadrilateral tilings and of frame sequences that show a
//! structure deforming along a one-parameter subgroup.
//!
//! Output is plain SVG text, byte-deterministic for identical inputs: tiles
//! are drawn in lexicographic order of their deck words, and all numbers are
//! formatted with a fixed rule. Infinite domains are truncated at the
//! viewport; curved domain boundaries are never drawn, only polygon images.

use serde::{Deserialize, Serialize};

use crate::affine::Vec2;
use crate::cone::{act, AlgebraProduct, OneParamSubgroup, CONE_TOL};
use crate::error::{Error, Result};
use crate::etale::holonomy_of;
use crate::gluing::{polygon_from_holonomy, tile, Tiling};

/// Axis-aligned drawing window in tiling coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Viewport {
    /// The square window `[-half, half]²`.
    pub fn square(half: f64) -> Self {
        Viewport { min: [-half, -half], max: [half, half] }
    }
}

/// Style and framing choices for the SVG emitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub viewport: Viewport,
    pub stroke_width: f64,
    /// Fill colors, indexed by the parity of `m + n` for a tile of word
    /// `(m, n)`, giving the checkerboard shading of the tilings.
    pub palette: [String; 2],
    /// How many frames a CLI-driven degeneration sequence samples.
    pub frame_count: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            viewport: Viewport::square(5.0),
            stroke_width: 0.02,
            palette: ["#c9ddf2".to_string(), "#f2dcc2".to_string()],
            frame_count: 5,
        }
    }
}

impl RenderOptions {
    /// The viewport must be non-degenerate and the stroke positive.
    pub fn validate(&self) -> Result<()> {
        let [x0, y0] = self.viewport.min;
        let [x1, y1] = self.viewport.max;
        let finite = [x0, y0, x1, y1, self.stroke_width].iter().all(|v| v.is_finite());
        if !finite || !(x1 > x0) || !(y1 > y0) {
            return Err(Error::InvalidParams(format!(
                "degenerate viewport [{x0}, {x1}] × [{y0}, {y1}]"
            )));
        }
        if !(self.stroke_width > 0.0) {
            return Err(Error::InvalidParams(format!(
                "stroke width must be positive, got {}",
                self.stroke_width
            )));
        }
        Ok(())
    }
}

/// Fixed-rule number formatting: six decimals, trailing zeros trimmed, no
/// negative zero. Keeps output byte-stable across runs.
fn fmt_num(x: f64) -> String {
    let mut s = format!("{x:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Render a tiling as an SVG document: one `<polygon>` per tile that meets
/// the viewport, drawn in lexicographic deck-word order with parity fills.
/// Rejects tilings that are empty or entirely outside the viewport.
pub fn render_tiling(t: &Tiling, opts: &RenderOptions) -> Result<String> {
    opts.validate()?;
    if t.tiles.is_empty() {
        return Err(Error::EmptyTiling);
    }
    let clipped = t.clip(opts.viewport.min, opts.viewport.max);
    if clipped.tiles.is_empty() {
        return Err(Error::EmptyTiling);
    }
    let mut tiles = clipped.tiles;
    tiles.sort_by_key(|tl| tl.word);

    let [x0, y0] = opts.viewport.min;
    let [x1, y1] = opts.viewport.max;
    // SVG y grows downward: emit (x, −y) and anchor the view box at −y_max.
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        fmt_num(x0),
        fmt_num(-y1),
        fmt_num(x1 - x0),
        fmt_num(y1 - y0)
    ));
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        fmt_num(x0),
        fmt_num(-y1),
        fmt_num(x1 - x0),
        fmt_num(y1 - y0)
    ));
    out.push_str(&format!(
        "<g stroke=\"#303030\" stroke-width=\"{}\" stroke-linejoin=\"round\">\n",
        fmt_num(opts.stroke_width)
    ));
    for tl in &tiles {
        let parity = (tl.word[0] + tl.word[1]).rem_euclid(2) as usize;
        let points: Vec<String> = tl
            .polygon
            .iter()
            .map(|[x, y]| format!("{},{}", fmt_num(*x), fmt_num(-y)))
            .collect();
        out.push_str(&format!(
            "<polygon points=\"{}\" fill=\"{}\"/>\n",
            points.join(" "),
            opts.palette[parity]
        ));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// One rendered stop of a degeneration sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderedFrame {
    pub t: f64,
    pub svg: String,
}

/// A frame that could not be rendered, with the failure it hit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameWarning {
    pub t: f64,
    pub reason: String,
}

/// The outcome of [`degeneration_frames`]: the frames that rendered, plus a
/// warning record for each skipped parameter value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSequence {
    pub frames: Vec<RenderedFrame>,
    pub warnings: Vec<FrameWarning>,
}

fn frame_at(
    s: &AlgebraProduct,
    lambda: &OneParamSubgroup,
    t: f64,
    radius: u32,
    opts: &RenderOptions,
) -> Result<String> {
    let g = lambda.at(t)?;
    let moved = act(&g, s)?;
    let pair = holonomy_of(&moved)?;
    let datum = polygon_from_holonomy(&pair, Vec2::zeros())?;
    render_tiling(&tile(&datum, radius)?, opts)
}

/// Render the tiling of `act(λ(tᵢ), S)` for each `tᵢ`, seeding the
/// fundamental polygon at the developing-map origin. Parameters whose frame
/// cannot be embedded or rendered are skipped and reported as warnings
/// rather than aborting the sequence.
pub fn degeneration_frames(
    s: &AlgebraProduct,
    lambda: &OneParamSubgroup,
    ts: &[f64],
    radius: u32,
    opts: &RenderOptions,
) -> Result<FrameSequence> {
    opts.validate()?;
    let residual = s.associativity_residual();
    let scale = s.amax();
    if residual >= CONE_TOL * (scale * scale).max(1.0) {
        return Err(Error::NotInCone { residual });
    }
    if ts.is_empty() {
        return Err(Error::InvalidParams("empty frame parameter list".to_string()));
    }
    let mut frames = Vec::new();
    let mut warnings = Vec::new();
    for &t in ts {
        match frame_at(s, lambda, t, radius, opts) {
            Ok(svg) => frames.push(RenderedFrame { t, svg }),
            Err(e) => warnings.push(FrameWarning { t, reason: e.to_string() }),
        }
    }
    Ok(FrameSequence { frames, warnings })
}
