//! The `pt-spectra` command line: run the solvers, emit CSV/JSON results
//! and SVG wedge diagrams.
//!
//! Subcommands: `wedges` (geometry, optional SVG), `shoot` (spectrum by
//! contour shooting), `truncate` (oscillator-basis sections and their
//! eigenvalues, optional stabilization trace), `compare` (shooting vs
//! truncation report), `wkbfit` (growth-exponent fit from a spectrum CSV).
//! Every numeric value is printed with 12 significant digits and rows are
//! deterministically ordered, so identical invocations produce
//! byte-identical files. Exit codes: 0 success, 1 domain error, 2 usage.

use crate::analysis::{
    compare_methods, wkb_growth_fit, AnalysisError, ComparisonReport, LevelVerdict,
    DEFAULT_SETTLE_TOL,
};
use crate::eig::{eigenvalues, EigError, SpectrumSource};
use crate::hobasis::{build, BasisError};
use crate::ode::StepControl;
use crate::shooting::{spectrum, ProblemSpec, ShootError, SpectrumOutcome};
use crate::wedges::{plan_contour, wedge_geometry, Contour, WedgeError, WedgePair};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

/// Environment variable capping the rayon thread pool (0 or unset = auto).
pub const THREADS_ENV: &str = "PT_SPECTRA_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Wedge(#[from] WedgeError),
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("could not parse {path} line {line}: {reason}")]
    BadInput {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "pt-spectra",
    version,
    about = "Spectra of p^2 + x^2 (ix)^eps: complex-contour shooting and truncation diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print Stokes-wedge geometry; optionally render an SVG diagram.
    Wedges(WedgesArgs),
    /// Locate eigenvalues by two-sided shooting on a complex contour.
    Shoot(ShootArgs),
    /// Build oscillator-basis sections and diagonalize them.
    Truncate(TruncateArgs),
    /// Compare shooting against the truncation method.
    Compare(CompareArgs),
    /// Fit the growth exponent of E_n from a spectrum CSV.
    Wkbfit(WkbfitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct WedgesArgs {
    /// Deformation parameter of the potential x^2 (ix)^eps.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    /// Wedge-pair rotation index (0 = continuation of the real-axis pair).
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    branch: i32,
    /// WKB suppression exponent at the contour endpoints.
    #[arg(long, default_value_t = 30.0)]
    decay_target: f64,
    /// Energy hint used when planning the displayed contour.
    #[arg(long, default_value_t = 1.0)]
    energy_hint: f64,
    /// Also write an SVG diagram of the wedges and contour.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ShootArgs {
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    branch: i32,
    /// Lower edge of the energy search window.
    #[arg(long, allow_negative_numbers = true)]
    emin: f64,
    /// Upper edge of the energy search window.
    #[arg(long, allow_negative_numbers = true)]
    emax: f64,
    /// Number of scan grid points.
    #[arg(long, default_value_t = 161)]
    grid: usize,
    #[arg(long, default_value_t = 30.0)]
    decay_target: f64,
    /// Integration scheme.
    #[arg(long, value_enum, default_value = "adaptive")]
    step_mode: StepMode,
    /// Step size for --step-mode fixed.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Relative tolerance for --step-mode adaptive.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute tolerance for --step-mode adaptive.
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StepMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Args)]
struct TruncateArgs {
    /// Integer deformation, one of 0, 1, 2, 4, 6.
    #[arg(long)]
    epsilon: u32,
    /// Section size N.
    #[arg(long)]
    n: usize,
    /// Keep only the k lowest-Re eigenvalues per section.
    #[arg(long)]
    levels: Option<usize>,
    /// Comma-separated ladder of additional section sizes to trace.
    #[arg(long, value_delimiter = ',')]
    trace: Vec<usize>,
    /// Also write the N x N matrix entries as CSV (row, col, re, im).
    #[arg(long)]
    matrix_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Integer deformation, one of 0, 1, 2, 4, 6.
    #[arg(long)]
    epsilon: u32,
    /// Number of levels to compare.
    #[arg(long, default_value_t = 6)]
    levels: usize,
    /// Largest truncation size.
    #[arg(long, default_value_t = 100)]
    nmax: usize,
    /// Relative tolerance for the settled classification.
    #[arg(long, default_value_t = DEFAULT_SETTLE_TOL)]
    settle_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct WkbfitArgs {
    /// Spectrum CSV produced by `shoot` (or `truncate`).
    #[arg(long)]
    input: PathBuf,
    /// First quantum number of the fit window.
    #[arg(long)]
    from: usize,
    /// Last quantum number of the fit window.
    #[arg(long)]
    to: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    init_thread_cap();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn init_thread_cap() {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Wedges(args) => cmd_wedges(args),
        Command::Shoot(args) => cmd_shoot(args),
        Command::Truncate(args) => cmd_truncate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Wkbfit(args) => cmd_wkbfit(args),
    }
}

// ---------------------------------------------------------------- output

/// One row of the spectrum schema shared by `shoot` and `truncate`:
/// `method,epsilon,branch,index,re_E,im_E,residual,N`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub method: &'static str,
    pub epsilon: f64,
    pub branch: Option<i32>,
    pub index: usize,
    #[serde(rename = "re_E")]
    pub re_e: f64,
    #[serde(rename = "im_E")]
    pub im_e: f64,
    pub residual: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
}

/// Format with 12 significant digits, stable across runs.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

/// Round to the 12-significant-digit value that `fmt_sig` prints.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

fn opt_fmt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Write spectrum rows as RFC-4180-style CSV (UTF-8, LF, fixed header).
pub fn emit_spectrum_csv<W: Write + ?Sized>(rows: &[SpectrumRow], sink: &mut W) -> io::Result<()> {
    sink.write_all(b"method,epsilon,branch,index,re_E,im_E,residual,N\n")?;
    for r in rows {
        let branch = r.branch.map(|b| b.to_string()).unwrap_or_default();
        let n = r.n.map(|n| n.to_string()).unwrap_or_default();
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{}",
            r.method,
            fmt_sig(r.epsilon),
            branch,
            r.index,
            fmt_sig(r.re_e),
            fmt_sig(r.im_e),
            opt_fmt(r.residual),
            n
        )?;
    }
    Ok(())
}

fn rounded_rows(rows: &[SpectrumRow]) -> Vec<SpectrumRow> {
    rows.iter()
        .map(|r| SpectrumRow {
            epsilon: round_sig(r.epsilon),
            re_e: round_sig(r.re_e),
            im_e: round_sig(r.im_e),
            residual: r.residual.map(round_sig),
            ..r.clone()
        })
        .collect()
}

fn emit_spectrum_json<W: Write + ?Sized>(
    meta: serde_json::Value,
    rows: &[SpectrumRow],
    extra: Option<(&str, serde_json::Value)>,
    sink: &mut W,
) -> io::Result<()> {
    let mut doc = json!({ "meta": meta, "rows": rounded_rows(rows) });
    if let Some((key, value)) = extra {
        doc[key] = value;
    }
    serde_json::to_writer_pretty(&mut *sink, &doc)?;
    sink.write_all(b"\n")
}

/// SVG diagram: unit-circle frame, shaded wedge sectors, contour polyline,
/// angle labels in degrees to 0.1°.
pub fn emit_wedge_svg<W: Write + ?Sized>(
    pair: &WedgePair,
    contour: &Contour,
    sink: &mut W,
) -> io::Result<()> {
    let r_max = contour.arm_radii[0].max(contour.arm_radii[1]).max(1e-300);
    writeln!(
        sink,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.45 -1.45 2.9 2.9" width="480" height="480">"#
    )?;
    writeln!(sink, r#"  <rect x="-1.45" y="-1.45" width="2.9" height="2.9" fill="white"/>"#)?;
    // wedge sectors as filled fans (y axis flipped for screen coordinates)
    for (wedge, color) in [(&pair.left, "#c6dbef"), (&pair.right, "#fdd0a2")] {
        let (lo, hi) = wedge.boundaries();
        let mut d = String::from("M 0 0");
        let segments = 32;
        for s in 0..=segments {
            let th = lo + (hi - lo) * s as f64 / segments as f64;
            d.push_str(&format!(" L {:.6} {:.6}", th.cos(), -th.sin()));
        }
        d.push_str(" Z");
        writeln!(
            sink,
            r##"  <path d="{d}" fill="{color}" stroke="#555555" stroke-width="0.008"/>"##
        )?;
    }
    writeln!(
        sink,
        r##"  <circle cx="0" cy="0" r="1" fill="none" stroke="#888888" stroke-width="0.01"/>"##
    )?;
    writeln!(
        sink,
        r##"  <line x1="-1.25" y1="0" x2="1.25" y2="0" stroke="#bbbbbb" stroke-width="0.006"/>"##
    )?;
    writeln!(
        sink,
        r##"  <line x1="0" y1="-1.25" x2="0" y2="1.25" stroke="#bbbbbb" stroke-width="0.006"/>"##
    )?;
    // contour polyline scaled into the unit frame
    let pts: Vec<String> = contour
        .vertices
        .iter()
        .map(|v| format!("{:.6},{:.6}", v.re / r_max, -v.im / r_max))
        .collect();
    writeln!(
        sink,
        r##"  <polyline points="{}" fill="none" stroke="#d62728" stroke-width="0.015"/>"##,
        pts.join(" ")
    )?;
    for v in &contour.vertices {
        writeln!(
            sink,
            r##"  <circle cx="{:.6}" cy="{:.6}" r="0.02" fill="#d62728"/>"##,
            v.re / r_max,
            -v.im / r_max
        )?;
    }
    // angle labels at the wedge bisectors plus the opening angle
    for wedge in [&pair.left, &pair.right] {
        let deg = wedge.center.to_degrees();
        let (lx, ly) = (1.18 * wedge.center.cos(), -1.18 * wedge.center.sin());
        writeln!(
            sink,
            r#"  <text x="{lx:.6}" y="{ly:.6}" font-size="0.09" text-anchor="middle" dominant-baseline="middle">{deg:.1}&#176;</text>"#
        )?;
    }
    writeln!(
        sink,
        r#"  <text x="0" y="-1.32" font-size="0.09" text-anchor="middle">epsilon = {}, branch = {}, opening = {:.1}&#176;, R = {:.3}</text>"#,
        pair.epsilon,
        pair.branch,
        (2.0 * pair.right.half_opening).to_degrees(),
        r_max
    )?;
    writeln!(sink, "</svg>")
}

fn open_sink(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn write_out<F>(out: &Option<PathBuf>, emit: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut sink = open_sink(path)?;
            emit(&mut sink).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            sink.flush().map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn warn_branch_cut(epsilon: f64) {
    if epsilon > 4.0 {
        eprintln!(
            "warning: epsilon = {epsilon} > 4: the branch-0 contour arms approach the principal \
             branch cut of (ix)^epsilon; results past that point are not covered by the solver's \
             continuation conventions"
        );
    }
}

// ---------------------------------------------------------------- wedges

fn cmd_wedges(args: WedgesArgs) -> Result<(), CliError> {
    warn_branch_cut(args.epsilon);
    let pair = wedge_geometry(args.epsilon, args.branch)?;
    let contour = plan_contour(&pair, args.energy_hint, args.decay_target);

    if let Some(svg_path) = &args.svg {
        let mut sink = open_sink(svg_path)?;
        emit_wedge_svg(&pair, &contour, &mut sink).map_err(|source| CliError::Io {
            path: svg_path.clone(),
            source,
        })?;
    }

    match args.output.format {
        Format::Csv => write_out(&args.output.out, |w| {
            writeln!(
                w,
                "side,center_rad,center_deg,half_opening_rad,opening_deg,boundary_lo_deg,boundary_hi_deg,contour_radius"
            )?;
            for (side, wedge) in [("left", &pair.left), ("right", &pair.right)] {
                let (lo, hi) = wedge.boundaries();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    side,
                    fmt_sig(wedge.center),
                    fmt_sig(wedge.center.to_degrees()),
                    fmt_sig(wedge.half_opening),
                    fmt_sig(2.0 * wedge.half_opening.to_degrees()),
                    fmt_sig(lo.to_degrees()),
                    fmt_sig(hi.to_degrees()),
                    fmt_sig(contour.arm_radii[0])
                )?;
            }
            Ok(())
        }),
        Format::Json => write_out(&args.output.out, |w| {
            let wedge_json = |wedge: &crate::wedges::StokesWedge| {
                let (lo, hi) = wedge.boundaries();
                json!({
                    "center_rad": round_sig(wedge.center),
                    "center_deg": round_sig(wedge.center.to_degrees()),
                    "half_opening_rad": round_sig(wedge.half_opening),
                    "opening_deg": round_sig(2.0 * wedge.half_opening.to_degrees()),
                    "boundary_lo_deg": round_sig(lo.to_degrees()),
                    "boundary_hi_deg": round_sig(hi.to_degrees()),
                })
            };
            let doc = json!({
                "meta": {
                    "epsilon": round_sig(pair.epsilon),
                    "branch": pair.branch,
                    "decay_target": round_sig(args.decay_target),
                    "energy_hint": round_sig(args.energy_hint),
                    "contour_radius": round_sig(contour.arm_radii[0]),
                },
                "left": wedge_json(&pair.left),
                "right": wedge_json(&pair.right),
                "contour": {
                    "match_index": contour.match_index,
                    "vertices": contour.vertices.iter()
                        .map(|v| json!([round_sig(v.re), round_sig(v.im)]))
                        .collect::<Vec<_>>(),
                },
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            w.write_all(b"\n")
        }),
    }
}

// ----------------------------------------------------------------- shoot

fn shoot_problem(args: &ShootArgs) -> ProblemSpec {
    let control = match args.step_mode {
        StepMode::Adaptive => StepControl::adaptive(args.rel_tol, args.abs_tol),
        StepMode::Fixed => StepControl::fixed(args.step),
    };
    ProblemSpec::new(args.epsilon)
        .with_branch(args.branch)
        .with_window(args.emin, args.emax)
        .with_grid(args.grid)
        .with_decay_target(args.decay_target)
        .with_control(control)
}

fn spectrum_rows(outcome: &SpectrumOutcome, epsilon: f64, branch: i32) -> Vec<SpectrumRow> {
    outcome
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(index, r)| SpectrumRow {
            method: "shooting",
            epsilon,
            branch: Some(branch),
            index,
            re_e: r.e.re,
            im_e: r.e.im,
            residual: Some(r.residual.norm()),
            n: None,
        })
        .collect()
}

fn cmd_shoot(args: ShootArgs) -> Result<(), CliError> {
    warn_branch_cut(args.epsilon);
    let spec = shoot_problem(&args);
    let outcome = spectrum(&spec)?;
    if !outcome.spurious.is_empty() {
        for s in &outcome.spurious {
            eprintln!(
                "note: bracket [{}, {}] did not refine to an eigenvalue (|W| = {:.3e} after {} iterations)",
                s.e_lo,
                s.e_hi,
                s.last_w.norm(),
                s.iterations
            );
        }
    }
    let rows = spectrum_rows(&outcome, args.epsilon, args.branch);
    match args.output.format {
        Format::Csv => write_out(&args.output.out, |w| emit_spectrum_csv(&rows, w)),
        Format::Json => {
            let pair = wedge_geometry(args.epsilon, args.branch)?;
            let scan_radius = plan_contour(
                &pair,
                args.emin.abs().max(args.emax.abs()),
                args.decay_target,
            )
            .arm_radii[0];
            let (step_mode, step_detail) = match args.step_mode {
                StepMode::Adaptive => (
                    "adaptive",
                    json!({ "rel_tol": args.rel_tol, "abs_tol": args.abs_tol }),
                ),
                StepMode::Fixed => ("fixed", json!({ "step": args.step })),
            };
            let meta = json!({
                "method": "shooting",
                "epsilon": round_sig(args.epsilon),
                "branch": args.branch,
                "e_min": round_sig(args.emin),
                "e_max": round_sig(args.emax),
                "grid": args.grid,
                "decay_target": round_sig(args.decay_target),
                "scan_contour_radius": round_sig(scan_radius),
                "step_mode": step_mode,
                "step_control": step_detail,
                "residual_accept": crate::shooting::RESIDUAL_ACCEPT,
                "reality_tol": crate::shooting::REALITY_TOL,
            });
            let spurious = json!(outcome
                .spurious
                .iter()
                .map(|s| json!({
                    "e_lo": round_sig(s.e_lo),
                    "e_hi": round_sig(s.e_hi),
                    "last_w_abs": round_sig(s.last_w.norm()),
                    "iterations": s.iterations,
                }))
                .collect::<Vec<_>>());
            write_out(&args.output.out, |w| {
                emit_spectrum_json(meta.clone(), &rows, Some(("spurious", spurious.clone())), w)
            })
        }
    }
}

// -------------------------------------------------------------- truncate

fn cmd_truncate(args: TruncateArgs) -> Result<(), CliError> {
    let mut sizes = vec![args.n];
    sizes.extend(&args.trace);
    sizes.sort_unstable();
    sizes.dedup();
    if let Some(levels) = args.levels {
        if levels == 0 || levels > sizes[0] {
            return Err(CliError::Invalid(format!(
                "--levels {} must be between 1 and the smallest section size {}",
                levels, sizes[0]
            )));
        }
    }

    if let Some(matrix_path) = &args.matrix_out {
        let h = build(args.epsilon, args.n)?;
        let mut sink = open_sink(matrix_path)?;
        let emit = |w: &mut dyn Write| -> io::Result<()> {
            w.write_all(b"row,col,re,im\n")?;
            for i in 0..h.n {
                for j in 0..h.n {
                    let z = h.entries[(i, j)];
                    writeln!(w, "{},{},{},{}", i, j, fmt_sig(z.re), fmt_sig(z.im))?;
                }
            }
            Ok(())
        };
        emit(&mut sink).map_err(|source| CliError::Io {
            path: matrix_path.clone(),
            source,
        })?;
    }

    let mut rows: Vec<SpectrumRow> = Vec::new();
    for &n in &sizes {
        let h = build(args.epsilon, n)?;
        let s = eigenvalues(&h.entries, SpectrumSource::truncation(args.epsilon, n))?;
        let keep = args.levels.unwrap_or(n);
        for (index, v) in s.values.iter().take(keep).enumerate() {
            rows.push(SpectrumRow {
                method: "truncation",
                epsilon: f64::from(args.epsilon),
                branch: None,
                index,
                re_e: v.re,
                im_e: v.im,
                residual: None,
                n: Some(n),
            });
        }
    }

    match args.output.format {
        Format::Csv => write_out(&args.output.out, |w| emit_spectrum_csv(&rows, w)),
        Format::Json => {
            let meta = json!({
                "method": "truncation",
                "epsilon": args.epsilon,
                "sizes": sizes,
                "levels": args.levels,
            });
            write_out(&args.output.out, |w| {
                emit_spectrum_json(meta.clone(), &rows, None, w)
            })
        }
    }
}

// --------------------------------------------------------------- compare

fn verdict_str(v: LevelVerdict) -> &'static str {
    match v {
        LevelVerdict::Converged => "converged",
        LevelVerdict::Artifact => "artifact",
    }
}

fn rounded_report(report: &ComparisonReport) -> ComparisonReport {
    let round_c = |v: &num_complex::Complex64| {
        num_complex::Complex64::new(round_sig(v.re), round_sig(v.im))
    };
    ComparisonReport {
        shooting: report.shooting.iter().map(round_c).collect(),
        truncation: report.truncation.iter().map(round_c).collect(),
        abs_dev: report.abs_dev.iter().copied().map(round_sig).collect(),
        rel_dev: report.rel_dev.iter().copied().map(round_sig).collect(),
        ..report.clone()
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let report = compare_methods(args.epsilon, args.levels, args.nmax, args.settle_tol)?;
    match args.output.format {
        Format::Csv => write_out(&args.output.out, |w| {
            writeln!(
                w,
                "epsilon,level,shoot_re,shoot_im,trunc_re,trunc_im,abs_dev,rel_dev,verdict,settled_count,basis_valid"
            )?;
            for i in 0..report.truncation.len() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    report.epsilon,
                    i,
                    fmt_sig(report.shooting[i].re),
                    fmt_sig(report.shooting[i].im),
                    fmt_sig(report.truncation[i].re),
                    fmt_sig(report.truncation[i].im),
                    fmt_sig(report.abs_dev[i]),
                    fmt_sig(report.rel_dev[i]),
                    verdict_str(report.verdicts[i]),
                    report.settled_count,
                    report.basis_valid
                )?;
            }
            Ok(())
        }),
        Format::Json => write_out(&args.output.out, |w| {
            serde_json::to_writer_pretty(&mut *w, &rounded_report(&report))?;
            w.write_all(b"\n")
        }),
    }
}

// ---------------------------------------------------------------- wkbfit

fn read_shooting_levels(path: &Path) -> Result<Vec<(usize, f64)>, CliError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| CliError::BadInput {
        path: path.to_path_buf(),
        line: 1,
        reason: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> Result<usize, CliError> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::BadInput {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("missing column {name}"),
            })
    };
    let (c_method, c_index, c_re) = (col("method")?, col("index")?, col("re_E")?);
    let mut levels = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |reason: String| CliError::BadInput {
            path: path.to_path_buf(),
            line: lineno + 1,
            reason,
        };
        if fields.len() != cols.len() {
            return Err(bad(format!("expected {} fields", cols.len())));
        }
        if fields[c_method] != "shooting" {
            continue;
        }
        let index: usize = fields[c_index]
            .parse()
            .map_err(|e| bad(format!("index: {e}")))?;
        let re: f64 = fields[c_re]
            .parse()
            .map_err(|e| bad(format!("re_E: {e}")))?;
        levels.push((index, re));
    }
    Ok(levels)
}

fn cmd_wkbfit(args: WkbfitArgs) -> Result<(), CliError> {
    let levels = read_shooting_levels(&args.input)?;
    if levels.is_empty() {
        return Err(CliError::Invalid(format!(
            "no shooting rows found in {}",
            args.input.display()
        )));
    }
    let fit = wkb_growth_fit(&levels, args.from, args.to)?;
    match args.output.format {
        Format::Csv => write_out(&args.output.out, |w| {
            writeln!(w, "n_from,n_to,points,slope,stderr")?;
            writeln!(
                w,
                "{},{},{},{},{}",
                args.from,
                args.to,
                fit.points,
                fmt_sig(fit.slope),
                fmt_sig(fit.stderr)
            )
        }),
        Format::Json => write_out(&args.output.out, |w| {
            let doc = json!({
                "meta": { "input": args.input.display().to_string(),
                          "n_from": args.from, "n_to": args.to },
                "points": fit.points,
                "slope": round_sig(fit.slope),
                "stderr": round_sig(fit.stderr),
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            w.write_all(b"\n")
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting_is_stable() {
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
        assert_eq!(fmt_sig(-0.0), "0.00000000000e0");
        assert_eq!(fmt_sig(3.0), "3.00000000000e0");
        assert_eq!(fmt_sig(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(round_sig(1.0 / 3.0), 3.33333333333e-1);
    }

    #[test]
    fn csv_emission_formats_rows() {
        let rows = vec![
            SpectrumRow {
                method: "shooting",
                epsilon: 0.0,
                branch: Some(0),
                index: 0,
                re_e: 1.0,
                im_e: 0.0,
                residual: Some(1e-12),
                n: None,
            },
            SpectrumRow {
                method: "shooting",
                epsilon: 0.0,
                branch: Some(0),
                index: 1,
                re_e: 3.0,
                im_e: 0.0,
                residual: Some(2e-12),
                n: None,
            },
        ];
        let mut buf = Vec::new();
        emit_spectrum_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "method,epsilon,branch,index,re_E,im_E,residual,N");
        assert!(lines[1].starts_with("shooting,0.00000000000e0,0,0,1.00000000000e0"));
        assert!(lines[1].ends_with(",")); // N column empty for shooting rows

        let mut empty = Vec::new();
        emit_spectrum_csv(&[], &mut empty).unwrap();
        assert_eq!(
            String::from_utf8(empty).unwrap(),
            "method,epsilon,branch,index,re_E,im_E,residual,N\n"
        );
    }

    #[test]
    fn svg_contains_sectors_and_labels() {
        let pair = wedge_geometry(2.0, 0).unwrap();
        let contour = plan_contour(&pair, 1.0, 30.0);
        let mut buf = Vec::new();
        emit_wedge_svg(&pair, &contour, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        assert!(svg.contains("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("-30.0&#176;"));
        assert!(svg.contains("-150.0&#176;"));
        assert!(svg.contains("opening = 60.0&#176;"));
    }
}
