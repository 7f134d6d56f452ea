//! Command-line interface to the flat-affine-torus toolkit: classification
//! reports, gluing verification with SVG tilings, degeneration frame
//! sequences, conjugacy decisions, and numeric probes. Inputs and outputs
//! are JSON; SVG output is byte-deterministic for identical inputs.
//!
//! Exit codes: 0 on success, 2 on validation errors (malformed or invalid
//! input), 3 on numeric degeneracy (the input sits too close to a decision
//! boundary for a trustworthy answer).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use affine_torus::charvariety::local_injectivity_probe;
use affine_torus::classify::{classify_structure, StructureDescriptor};
use affine_torus::cone::{classify_algebra, degenerate, DegenerationOutcome};
use affine_torus::cover::{conjugate_gltilde, conjugate_in, ConjugacyGroup};
use affine_torus::gluing::{tile, verify_gluing, GluingDatum};
use affine_torus::render::{degeneration_frames, render_tiling, RenderOptions, Viewport};
use affine_torus::{AlgebraProduct, Error, GLTildeElement, Mat2};

mod subgroup;
mod theta;

#[derive(Parser)]
#[command(
    name = "affine-torus",
    version,
    about = "Flat affine structures on the two-torus: classify, glue, degenerate, probe"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a structure descriptor and print the report as JSON.
    Classify {
        /// Descriptor file: {"type":"trans","product":[..6]},
        /// {"type":"hopf","lambda1":..,"lambda2":..,"k1":..,"k2":..}, or
        /// {"type":"tabk","A":[..4],"B":[..4],"k":..}.
        #[arg(long)]
        descriptor: PathBuf,
    },
    /// Verify a gluing datum, tile the plane with it, and optionally render
    /// the tiling to an SVG file.
    Glue {
        /// Datum file: {"p":[x,y],"A":{"l":[..4],"t":[x,y]},"B":{..}}.
        #[arg(long)]
        datum: PathBuf,
        /// Deck-word radius of the tiling: words (m,n) with |m|,|n| ≤ radius.
        #[arg(long, default_value_t = 3)]
        radius: u32,
        /// Write the rendered tiling to this path (atomically).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Half-width of the square drawing viewport.
        #[arg(long, default_value_t = 5.0)]
        viewport: f64,
    },
    /// Render SVG frames of a cone point degenerating along a one-parameter
    /// subgroup, and report the extrapolated limit.
    Degenerate {
        /// Product file: six coefficients [c11x,c11y,c12x,c12y,c22x,c22y].
        #[arg(long)]
        algebra: PathBuf,
        /// Subgroup: "diag(t,1)", "diag(1,t)", "diag(t,t)", exponent forms
        /// like "diag(t^2,t^-1)", or "gen:[[a,b],[c,d]]" for a raw generator.
        #[arg(long)]
        subgroup: String,
        /// Number of frames, sampled at t = 1, 10, 100, …
        #[arg(long, default_value_t = 5)]
        frames: u32,
        /// Output directory for frame-NNN.svg files (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Deck-word radius of each frame's tiling.
        #[arg(long, default_value_t = 2)]
        radius: u32,
        /// Half-width of the square drawing viewport.
        #[arg(long, default_value_t = 5.0)]
        viewport: f64,
    },
    /// Decide whether a pair of elements is conjugate in the chosen group.
    Conjugacy {
        #[arg(long, value_enum)]
        group: GroupArg,
        /// Pair file: {"g":<el>,"h":<el>} where <el> is a row-major matrix
        /// [m11,m12,m21,m22] or, for gltilde, a lift {"m":[..4],"theta":θ}.
        #[arg(long)]
        pair: PathBuf,
    },
    /// Search for local-injectivity failures of the holonomy assignment on
    /// random cone points.
    Probe {
        #[arg(long, default_value_t = 500)]
        samples: u32,
        /// Deformation radius around each sampled point.
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
        #[arg(long, env = "AFFINE_TORUS_SEED", default_value_t = 2026)]
        seed: u64,
    },
    /// Run the winding-coordinate law suite on random lifts and report the
    /// worst margins observed.
    ThetaSuite {
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        #[arg(long, env = "AFFINE_TORUS_SEED", default_value_t = 11)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroupArg {
    Gltilde,
    Glplus,
    Pgl,
}

impl From<GroupArg> for ConjugacyGroup {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Gltilde => ConjugacyGroup::GLtilde,
            GroupArg::Glplus => ConjugacyGroup::GLplus,
            GroupArg::Pgl => ConjugacyGroup::PGL,
        }
    }
}

/// CLI failure, tagged with the exit code family it maps to.
#[derive(Debug)]
enum CliError {
    Validation(String),
    Degeneracy(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Degeneracy(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Degeneracy(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_degeneracy() {
            CliError::Degeneracy(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("malformed JSON input: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Classify { descriptor } => cmd_classify(&descriptor),
        Command::Glue { datum, radius, svg, viewport } => {
            cmd_glue(&datum, radius, svg.as_deref(), viewport)
        }
        Command::Degenerate { algebra, subgroup, frames, out, radius, viewport } => {
            cmd_degenerate(&algebra, &subgroup, frames, &out, radius, viewport)
        }
        Command::Conjugacy { group, pair } => cmd_conjugacy(group, &pair),
        Command::Probe { samples, radius, seed } => cmd_probe(samples, radius, seed),
        Command::ThetaSuite { trials, seed } => cmd_theta_suite(trials, seed),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("report serialization");
    // Tolerate a closed pipe (e.g. piping into `head`) instead of panicking.
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(())
}

/// Write through a sibling temp file and rename, so readers never observe a
/// half-written document.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn cmd_classify(path: &Path) -> Result<(), CliError> {
    let descriptor: StructureDescriptor = read_json(path)?;
    let report = classify_structure(&descriptor)?;
    print_json(&report)
}

#[derive(Serialize)]
struct GlueOutput {
    valid: bool,
    tiles: usize,
    svg: Option<String>,
}

fn cmd_glue(path: &Path, radius: u32, svg: Option<&Path>, viewport: f64) -> Result<(), CliError> {
    let datum: GluingDatum = read_json(path)?;
    let report = verify_gluing(&datum);
    if !report.valid {
        print_json(&report)?;
        return Err(CliError::Validation("gluing datum violates its conditions".to_string()));
    }
    let tiling = tile(&datum, radius)?;
    let mut written = None;
    if let Some(out) = svg {
        let opts = RenderOptions { viewport: Viewport::square(viewport), ..Default::default() };
        let doc = render_tiling(&tiling, &opts)?;
        write_atomic(out, &doc)?;
        written = Some(out.display().to_string());
    }
    print_json(&GlueOutput { valid: true, tiles: tiling.tiles.len(), svg: written })
}

#[derive(Serialize)]
struct FrameRecord {
    t: f64,
    file: String,
}

#[derive(Serialize)]
struct SkippedFrame {
    t: f64,
    reason: String,
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
enum LimitRecord {
    Limit { product: AlgebraProduct, stratum: String },
    Divergent,
}

#[derive(Serialize)]
struct DegenerateOutput {
    frames: Vec<FrameRecord>,
    skipped: Vec<SkippedFrame>,
    limit: LimitRecord,
}

fn cmd_degenerate(
    algebra: &Path,
    subgroup: &str,
    frames: u32,
    out: &Path,
    radius: u32,
    viewport: f64,
) -> Result<(), CliError> {
    if frames == 0 {
        return Err(CliError::Validation("frame count must be positive".to_string()));
    }
    let s: AlgebraProduct = read_json(algebra)?;
    let lambda = subgroup::parse(subgroup).map_err(CliError::Validation)?;
    let ts: Vec<f64> = (0..frames).map(|i| 10f64.powi(i as i32)).collect();
    let opts = RenderOptions { viewport: Viewport::square(viewport), ..Default::default() };
    let sequence = degeneration_frames(&s, &lambda, &ts, radius, &opts)?;
    fs::create_dir_all(out)?;
    let mut records = Vec::new();
    for (i, frame) in sequence.frames.iter().enumerate() {
        let file = out.join(format!("frame-{i:03}.svg"));
        write_atomic(&file, &frame.svg)?;
        records.push(FrameRecord { t: frame.t, file: file.display().to_string() });
    }
    let limit = match degenerate(&s, &lambda) {
        DegenerationOutcome::Limit(l) => LimitRecord::Limit {
            product: l,
            stratum: classify_algebra(&l)?.to_string(),
        },
        DegenerationOutcome::Divergent => LimitRecord::Divergent,
    };
    print_json(&DegenerateOutput {
        frames: records,
        skipped: sequence
            .warnings
            .iter()
            .map(|w| SkippedFrame { t: w.t, reason: w.reason.clone() })
            .collect(),
        limit,
    })
}

/// One element of a conjugacy pair: a plain matrix, or a lift with branch
/// data for the universal-cover group.
#[derive(Deserialize)]
#[serde(untagged)]
enum ElementWire {
    Lift(GLTildeElement),
    Matrix([f64; 4]),
}

#[derive(Deserialize)]
struct PairWire {
    g: ElementWire,
    h: ElementWire,
}

#[derive(Serialize)]
struct ElementDiagnostics {
    trace: f64,
    det: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

#[derive(Serialize)]
struct ConjugacyOutput {
    group: String,
    conjugate: bool,
    g: ElementDiagnostics,
    h: ElementDiagnostics,
}

fn diagnostics(m: &Mat2, theta: Option<f64>) -> ElementDiagnostics {
    ElementDiagnostics { trace: m.trace(), det: m.determinant(), theta }
}

fn cmd_conjugacy(group: GroupArg, path: &Path) -> Result<(), CliError> {
    let pair: PairWire = read_json(path)?;
    let output = match (group, pair.g, pair.h) {
        (GroupArg::Gltilde, ElementWire::Lift(g), ElementWire::Lift(h)) => ConjugacyOutput {
            group: "gltilde".to_string(),
            conjugate: conjugate_gltilde(&g, &h)?,
            g: diagnostics(&g.matrix(), Some(g.theta())),
            h: diagnostics(&h.matrix(), Some(h.theta())),
        },
        (_, ElementWire::Lift(_), _) | (_, _, ElementWire::Lift(_)) => {
            return Err(CliError::Validation(
                "lift elements {m, theta} require --group gltilde, and both elements must be lifts"
                    .to_string(),
            ));
        }
        (_, ElementWire::Matrix(ga), ElementWire::Matrix(ha)) => {
            let g = Mat2::new(ga[0], ga[1], ga[2], ga[3]);
            let h = Mat2::new(ha[0], ha[1], ha[2], ha[3]);
            let cg = ConjugacyGroup::from(group);
            ConjugacyOutput {
                group: serde_json::to_value(cg)
                    .expect("group serialization")
                    .as_str()
                    .expect("group tag")
                    .to_string(),
                conjugate: conjugate_in(&g, &h, cg)?,
                g: diagnostics(&g, None),
                h: diagnostics(&h, None),
            }
        }
    };
    print_json(&output)
}

fn cmd_probe(samples: u32, radius: f64, seed: u64) -> Result<(), CliError> {
    let report = local_injectivity_probe(samples, radius, seed)?;
    print_json(&report)
}

fn cmd_theta_suite(trials: u32, seed: u64) -> Result<(), CliError> {
    let report = theta::run_suite(trials, seed);
    let all_pass = report.laws.iter().all(|l| l.pass);
    print_json(&report)?;
    if !all_pass {
        return Err(CliError::Degeneracy("winding-law suite found violations".to_string()));
    }
    Ok(())
}
