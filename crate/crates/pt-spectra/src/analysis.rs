//! Diagnostics for the truncation method: how the low-lying levels settle
//! as N grows, how many can be trusted, and how both routes compare.
//!
//! Sectioning an infinite matrix is variational in character: as N grows
//! the low-lying eigenvalues stabilize one-by-one from the bottom of the
//! spectrum, while the high-lying ones — including the complex conjugate
//! pairs the truncation manufactures — keep wandering. The functions here
//! quantify that picture and fit the growth exponent of the genuine
//! spectrum, which the truncation tail fails to reproduce.

use crate::eig::{conjugate_pair_audit, eigenvalues, EigError, SpectrumSource};
use crate::hobasis::{build, BasisError};
use crate::shooting::{classify_real, spectrum, ProblemSpec, ShootError, ShootingResult};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Default relative tolerance for calling a level settled.
pub const DEFAULT_SETTLE_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error("matrix sizes must be strictly ascending and nonempty")]
    BadSizeLadder,
    #[error("tracked level count k = {k} must be between 1 and the smallest matrix size {n_min}")]
    BadLevelCount { k: usize, n_min: usize },
    #[error("settling needs at least 3 trace rows, got {0}")]
    InsufficientHistory(usize),
    #[error("growth fit window [{n_from}, {n_to}] needs n_to - n_from >= 5 inside the data")]
    BadFitWindow { n_from: usize, n_to: usize },
    #[error("growth fit needs strictly positive eigenvalues, got E_{index} = {value}")]
    NonPositiveLevel { index: usize, value: f64 },
    #[error("could not collect {want} eigenvalues below E = {cap} by shooting")]
    WindowExhausted { want: usize, cap: f64 },
}

/// Per-N table of the k lowest-Re truncation eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationTrace {
    pub epsilon: u32,
    pub n_values: Vec<usize>,
    /// rows[i] holds the k lowest-Re eigenvalues at n_values[i],
    /// sorted by (Re, Im); conjugate artifacts appear among them.
    pub rows: Vec<Vec<Complex64>>,
    pub k: usize,
}

impl StabilizationTrace {
    /// Real-classified eigenvalues of one row, ascending.
    pub fn real_ladder(&self, row: usize) -> Vec<f64> {
        self.rows[row]
            .iter()
            .filter(|v| classify_real(**v))
            .map(|v| v.re)
            .collect()
    }
}

/// Diagonalize the truncation at each size and record the k lowest-Re levels.
pub fn stabilization_trace(
    epsilon: u32,
    n_values: &[usize],
    k: usize,
) -> Result<StabilizationTrace, AnalysisError> {
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::BadSizeLadder);
    }
    let n_min = n_values[0];
    if k == 0 || k > n_min {
        return Err(AnalysisError::BadLevelCount { k, n_min });
    }
    let rows: Vec<Vec<Complex64>> = n_values
        .par_iter()
        .map(|&n| -> Result<Vec<Complex64>, AnalysisError> {
            let h = build(epsilon, n)?;
            let s = eigenvalues(&h.entries, SpectrumSource::truncation(epsilon, n))?;
            Ok(s.values.into_iter().take(k).collect())
        })
        .collect::<Result<_, _>>()?;
    Ok(StabilizationTrace {
        epsilon,
        n_values: n_values.to_vec(),
        rows,
        k,
    })
}

/// Number of levels settled from the bottom of the spectrum.
///
/// Settling is judged along the ladder of real-classified eigenvalues:
/// complex artifact pairs interleave with the genuine levels in plain
/// lowest-Re order and would otherwise cap the count at the first
/// artifact. A level counts as settled when its value changed by less
/// than `tol` (relative) over each of the last two size increments and is
/// real-classified at the largest N; the count is the length of the
/// unbroken settled run starting at the ground level.
pub fn settled_count(trace: &StabilizationTrace, tol: f64) -> Result<usize, AnalysisError> {
    let rows = trace.n_values.len();
    if rows < 3 {
        return Err(AnalysisError::InsufficientHistory(rows));
    }
    let prev2 = trace.real_ladder(rows - 3);
    let prev = trace.real_ladder(rows - 2);
    let last = trace.real_ladder(rows - 1);
    let depth = prev2.len().min(prev.len()).min(last.len());
    let mut m = 0;
    while m < depth {
        let d1 = (last[m] - prev[m]).abs() <= tol * (1.0 + last[m].abs());
        let d2 = (prev[m] - prev2[m]).abs() <= tol * (1.0 + prev[m].abs());
        if d1 && d2 {
            m += 1;
        } else {
            break;
        }
    }
    Ok(m)
}

/// Least-squares slope of ln E_n against ln(n + 1/2) over the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

pub fn wkb_growth_fit(
    levels: &[(usize, f64)],
    n_from: usize,
    n_to: usize,
) -> Result<GrowthFit, AnalysisError> {
    if n_to < n_from + 5 {
        return Err(AnalysisError::BadFitWindow { n_from, n_to });
    }
    let window: Vec<(usize, f64)> = levels
        .iter()
        .copied()
        .filter(|(n, _)| (n_from..=n_to).contains(n))
        .collect();
    if window.len() < 6 {
        return Err(AnalysisError::BadFitWindow { n_from, n_to });
    }
    for &(n, e) in &window {
        if e <= 0.0 {
            return Err(AnalysisError::NonPositiveLevel { index: n, value: e });
        }
    }
    let pts: Vec<(f64, f64)> = window
        .iter()
        .map(|&(n, e)| ((n as f64 + 0.5).ln(), e.ln()))
        .collect();
    let len = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = (pts.len() - 2).max(1) as f64;
    let stderr = (sse / dof / sxx).sqrt();
    Ok(GrowthFit {
        slope,
        stderr,
        points: pts.len(),
    })
}

/// Verdict for one truncation level in a method comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelVerdict {
    Converged,
    Artifact,
}

/// Shooting-vs-truncation comparison at one deformation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub epsilon: u32,
    pub n_max: usize,
    pub settle_tol: f64,
    /// Lowest shooting eigenvalues (the reference spectrum).
    pub shooting: Vec<Complex64>,
    /// Lowest-Re truncation eigenvalues at n_max, conjugate artifacts included.
    pub truncation: Vec<Complex64>,
    /// Distance from each truncation level to the nearest shooting level.
    pub abs_dev: Vec<f64>,
    /// The same deviations relative to 1 + |E_shooting|.
    pub rel_dev: Vec<f64>,
    pub verdicts: Vec<LevelVerdict>,
    pub settled_count: usize,
    /// False when the oscillator basis does not span the problem the wedge
    /// boundary conditions define (ε ≥ 2, wedges off the real axis).
    pub basis_valid: bool,
    pub note: String,
}

/// Collect the `count` lowest shooting eigenvalues by widening the window.
pub fn shooting_ladder(
    epsilon: f64,
    count: usize,
    branch: i32,
) -> Result<Vec<ShootingResult>, AnalysisError> {
    let mut e_hi = 20.0f64;
    loop {
        let grid = (((e_hi + 0.5) / 0.25).ceil() as usize).max(161);
        let spec = ProblemSpec::new(epsilon)
            .with_branch(branch)
            .with_window(-0.5, e_hi)
            .with_grid(grid);
        let out = spectrum(&spec)?;
        if out.eigenvalues.len() >= count {
            return Ok(out.eigenvalues.into_iter().take(count).collect());
        }
        e_hi *= 1.6;
        if e_hi > 1000.0 {
            return Err(AnalysisError::WindowExhausted {
                want: count,
                cap: e_hi,
            });
        }
    }
}

/// Run both methods and issue per-level verdicts.
///
/// A truncation level is converged when it sits within 10·settle_tol
/// (relative) of some shooting eigenvalue, else it is an artifact. The
/// settled count is taken from a size ladder in steps of 10 ending at
/// n_max. For ε ≥ 2 the report also flags that the truncation targets the
/// real-line problem rather than the wedge-continued one, since the
/// oscillator basis is complete only on the real axis.
pub fn compare_methods(
    epsilon: u32,
    levels: usize,
    n_max: usize,
    settle_tol: f64,
) -> Result<ComparisonReport, AnalysisError> {
    let k = levels.max(12).min(n_max);
    let start = 20.max(k);
    if n_max < start + 20 {
        return Err(AnalysisError::InsufficientHistory(
            (n_max.saturating_sub(start)) / 10 + 1,
        ));
    }
    let n_values: Vec<usize> = (start..=n_max).step_by(10).collect();
    let trace = stabilization_trace(epsilon, &n_values, k)?;
    let settled = settled_count(&trace, settle_tol)?;

    let shooting = shooting_ladder(f64::from(epsilon), levels, 0)?;
    let shoot_es: Vec<Complex64> = shooting.iter().map(|r| r.e).collect();
    let truncation: Vec<Complex64> = trace.rows.last().expect("nonempty trace")[..levels].to_vec();

    let mut abs_dev = Vec::with_capacity(levels);
    let mut rel_dev = Vec::with_capacity(levels);
    let mut verdicts = Vec::with_capacity(levels);
    for &t in &truncation {
        let (dist, near) = shoot_es
            .iter()
            .map(|&s| ((t - s).norm(), s))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one shooting level");
        let rel = dist / (1.0 + near.norm());
        abs_dev.push(dist);
        rel_dev.push(rel);
        verdicts.push(if rel <= 10.0 * settle_tol {
            LevelVerdict::Converged
        } else {
            LevelVerdict::Artifact
        });
    }

    let basis_valid = epsilon <= 1;
    let note = if basis_valid {
        String::from("oscillator basis spans the problem; low-lying levels stabilize to the shooting values")
    } else {
        format!(
            "epsilon = {epsilon} wedges exclude the real axis: the oscillator basis is complete \
             only on the real line, so the truncation targets a different problem than the \
             wedge-continued spectrum"
        )
    };

    Ok(ComparisonReport {
        epsilon,
        n_max,
        settle_tol,
        shooting: shoot_es,
        truncation,
        abs_dev,
        rel_dev,
        verdicts,
        settled_count: settled,
        basis_valid,
        note,
    })
}

/// Conjugate-artifact census of one truncation spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactCensus {
    pub n: usize,
    pub real_count: usize,
    pub pair_count: usize,
    pub unpaired: usize,
    pub max_imag: f64,
}

/// Diagonalize one truncation and audit its conjugate-pair population.
pub fn artifact_census(epsilon: u32, n: usize) -> Result<ArtifactCensus, AnalysisError> {
    let h = build(epsilon, n)?;
    let s = eigenvalues(&h.entries, SpectrumSource::truncation(epsilon, n))?;
    let audit = conjugate_pair_audit(&s);
    let max_imag = s.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(ArtifactCensus {
        n,
        real_count: audit.real_count,
        pair_count: audit.pair_count,
        unpaired: audit.unpaired.len(),
        max_imag,
    })
}
