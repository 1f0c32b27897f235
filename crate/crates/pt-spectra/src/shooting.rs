//! Eigenvalue location by two-sided shooting and Wronskian matching.
//!
//! For a trial energy E, the decaying solution is seeded deep inside each
//! wedge and integrated inward to the matching vertex (the origin for
//! planned contours). The normalized Wronskian of the two arms vanishes
//! exactly at eigenvalues; a grid scan brackets its zeros and a complex
//! secant iteration refines them. The finder never assumes reality of the
//! spectrum — it classifies each converged eigenvalue after the fact.

use crate::ode::{integrate, wkb_seed, OdeError, StepControl, WaveState};
use crate::wedges::{plan_matching_contour, wedge_geometry, Contour, WedgeError, DEFAULT_DECAY_TARGET};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Largest normalized residual accepted for a reported eigenvalue.
pub const RESIDUAL_ACCEPT: f64 = 1e-9;
/// Reality classification: |Im E| ≤ REALITY_TOL·(1 + |Re E|).
pub const REALITY_TOL: f64 = 1e-8;
/// Results closer than DEDUPE_TOL·(1 + |E|) are merged.
pub const DEDUPE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ShootError {
    #[error(transparent)]
    Wedge(#[from] WedgeError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("invalid search window [{e_min}, {e_max}] with grid {grid} (need e_min < e_max, grid >= 2)")]
    InvalidWindow { e_min: f64, e_max: f64, grid: usize },
}

/// One eigenvalue search problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub epsilon: f64,
    pub branch: i32,
    pub control: StepControl,
    pub decay_target: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub grid: usize,
}

impl ProblemSpec {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            branch: 0,
            control: StepControl::default(),
            decay_target: DEFAULT_DECAY_TARGET,
            e_min: 0.0,
            e_max: 12.0,
            grid: 161,
        }
    }

    pub fn with_branch(mut self, branch: i32) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_window(mut self, e_min: f64, e_max: f64) -> Self {
        self.e_min = e_min;
        self.e_max = e_max;
        self
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_control(mut self, control: StepControl) -> Self {
        self.control = control;
        self
    }

    pub fn with_decay_target(mut self, decay_target: f64) -> Self {
        self.decay_target = decay_target;
        self
    }

    fn validate(&self) -> Result<(), ShootError> {
        // NaN-safe: a non-finite window must fail the ordering test
        let ordered = self.e_min < self.e_max;
        if !ordered || self.grid < 2 {
            return Err(ShootError::InvalidWindow {
                e_min: self.e_min,
                e_max: self.e_max,
                grid: self.grid,
            });
        }
        Ok(())
    }
}

/// A candidate eigenvalue interval produced by [`scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub e_lo: f64,
    pub e_hi: f64,
    pub w_lo: Complex64,
    pub w_hi: Complex64,
}

/// A converged eigenvalue with its matching residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingResult {
    pub e: Complex64,
    /// Normalized Wronskian at the matching point.
    pub residual: Complex64,
    pub iterations: u32,
    pub classified_real: bool,
}

/// A bracket whose refinement did not converge to an eigenvalue.
/// Reported alongside the spectrum rather than silently dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpuriousBracket {
    pub e_lo: f64,
    pub e_hi: f64,
    pub last_e: Complex64,
    pub last_w: Complex64,
    pub iterations: u32,
}

/// Spectrum search outcome: converged eigenvalues plus the audit trail of
/// brackets that failed to refine.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumOutcome {
    pub eigenvalues: Vec<ShootingResult>,
    pub spurious: Vec<SpuriousBracket>,
}

pub fn classify_real(e: Complex64) -> bool {
    e.im.abs() <= REALITY_TOL * (1.0 + e.re.abs())
}

/// Normalized matching Wronskian W(E); zero iff E is an eigenvalue.
///
/// Plans a contour with the trial energy as hint, seeds both arms, and
/// integrates them inward to the matching vertex. The returned Wronskian
/// is normalized by max(|ψ_L|,|ψ_L′|)·max(|ψ_R|,|ψ_R′|); the accumulated
/// log-scale factors of the two arms cancel in this ratio.
pub fn matching_residual(spec: &ProblemSpec, e: Complex64) -> Result<Complex64, ShootError> {
    let pair = wedge_geometry(spec.epsilon, spec.branch)?;
    let contour = plan_matching_contour(&pair, e.norm(), spec.decay_target);
    residual_on_contour(spec, &contour, e)
}

pub(crate) fn residual_on_contour(
    spec: &ProblemSpec,
    contour: &Contour,
    e: Complex64,
) -> Result<Complex64, ShootError> {
    let left = arm_state(spec, &contour.left_arm_inward(), e)?;
    let right = arm_state(spec, &contour.right_arm_inward(), e)?;
    let w = left.psi * right.dpsi - left.dpsi * right.psi;
    let norm = left.psi.norm().max(left.dpsi.norm()) * right.psi.norm().max(right.dpsi.norm());
    Ok(w / norm)
}

fn arm_state(
    spec: &ProblemSpec,
    path: &[Complex64],
    e: Complex64,
) -> Result<WaveState, ShootError> {
    let x0 = path[0];
    let first_leg = path[1] - x0;
    let inward = first_leg / first_leg.norm();
    let seed = wkb_seed(x0, e, spec.epsilon, inward)?;
    Ok(integrate(&seed, path, e, spec.epsilon, &spec.control)?)
}

/// Scan the real-E window for candidate brackets.
///
/// The Wronskian is evaluated on the uniform grid with a single contour
/// planned for the whole window (so W is continuous across the grid).
/// Brackets are emitted where the phase of W flips through zero mod π,
/// plus local minima of |W| below 0.1 not already covered. The result may
/// be a superset of the true eigenvalue brackets.
pub fn scan(spec: &ProblemSpec) -> Result<Vec<Bracket>, ShootError> {
    spec.validate()?;
    let pair = wedge_geometry(spec.epsilon, spec.branch)?;
    let hint = spec.e_min.abs().max(spec.e_max.abs());
    let contour = plan_matching_contour(&pair, hint, spec.decay_target);
    let n = spec.grid;
    let es: Vec<f64> = (0..n)
        .map(|i| spec.e_min + (spec.e_max - spec.e_min) * i as f64 / (n - 1) as f64)
        .collect();
    let ws: Vec<Complex64> = es
        .par_iter()
        .map(|&e| residual_on_contour(spec, &contour, Complex64::new(e, 0.0)))
        .collect::<Result<_, _>>()?;

    let mut brackets = Vec::new();
    for i in 0..n - 1 {
        // phase rotation through 0 mod π: consecutive values point into
        // opposite half-planes
        if (ws[i] * ws[i + 1].conj()).re < 0.0 {
            brackets.push(Bracket {
                e_lo: es[i],
                e_hi: es[i + 1],
                w_lo: ws[i],
                w_hi: ws[i + 1],
            });
        }
    }
    for i in 1..n - 1 {
        let m = ws[i].norm();
        if m < 0.1 && m < ws[i - 1].norm() && m < ws[i + 1].norm() {
            let covered = brackets
                .iter()
                .any(|b| b.e_hi >= es[i - 1] && b.e_lo <= es[i + 1]);
            if !covered {
                brackets.push(Bracket {
                    e_lo: es[i - 1],
                    e_hi: es[i + 1],
                    w_lo: ws[i - 1],
                    w_hi: ws[i + 1],
                });
            }
        }
    }
    brackets.sort_by(|a, b| a.e_lo.total_cmp(&b.e_lo));
    Ok(brackets)
}

/// Refinement failure: either a spurious bracket or a hard error.
#[derive(Debug, Error)]
pub enum SpuriousOrError {
    #[error("bracket [{}, {}] did not refine to an eigenvalue (|W| = {:.3e} after {} iterations)",
        .0.e_lo, .0.e_hi, .0.last_w.norm(), .0.iterations)]
    Spurious(SpuriousBracket),
    #[error(transparent)]
    Error(#[from] ShootError),
}

/// Refine a bracket by complex secant iteration on W(E).
///
/// The contour is re-planned once with the bracket midpoint as energy
/// hint and reused for every iterate. Convergence requires
/// |ΔE| ≤ 1e-12·(1+|E|) or |W| ≤ 1e-12 within 60 iterations; brackets
/// that stop elsewhere (or converge to a nonzero minimum of |W|) are
/// reported as spurious via the error channel.
pub fn refine(spec: &ProblemSpec, bracket: &Bracket) -> Result<ShootingResult, SpuriousOrError> {
    let pair = wedge_geometry(spec.epsilon, spec.branch).map_err(ShootError::from)?;
    let hint = 0.5 * (bracket.e_lo + bracket.e_hi);
    let contour = plan_matching_contour(&pair, hint.abs(), spec.decay_target);
    let spurious = |e: Complex64, w: Complex64, it: u32| {
        SpuriousOrError::Spurious(SpuriousBracket {
            e_lo: bracket.e_lo,
            e_hi: bracket.e_hi,
            last_e: e,
            last_w: w,
            iterations: it,
        })
    };

    let mut e0 = Complex64::new(bracket.e_lo, 0.0);
    let mut e1 = Complex64::new(bracket.e_hi, 0.0);
    let mut w0 = residual_on_contour(spec, &contour, e0)?;
    let mut w1 = residual_on_contour(spec, &contour, e1)?;
    for it in 1..=60u32 {
        let dw = w1 - w0;
        if dw.norm() == 0.0 {
            return Err(spurious(e1, w1, it));
        }
        let de = -w1 * (e1 - e0) / dw;
        if !de.re.is_finite() || !de.im.is_finite() {
            return Err(spurious(e1, w1, it));
        }
        e0 = e1;
        w0 = w1;
        e1 += de;
        w1 = residual_on_contour(spec, &contour, e1)?;
        if de.norm() <= 1e-12 * (1.0 + e1.norm()) || w1.norm() <= 1e-12 {
            if w1.norm() <= RESIDUAL_ACCEPT {
                return Ok(ShootingResult {
                    e: e1,
                    residual: w1,
                    iterations: it,
                    classified_real: classify_real(e1),
                });
            }
            return Err(spurious(e1, w1, it));
        }
    }
    Err(spurious(e1, w1, 60))
}

/// Full spectrum search over the window: scan, refine every bracket in
/// parallel, merge duplicates, and sort by Re E ascending.
pub fn spectrum(spec: &ProblemSpec) -> Result<SpectrumOutcome, ShootError> {
    let brackets = scan(spec)?;
    let refined: Vec<Result<ShootingResult, SpuriousOrError>> =
        brackets.par_iter().map(|b| refine(spec, b)).collect();

    let mut eigenvalues: Vec<ShootingResult> = Vec::new();
    let mut spurious = Vec::new();
    for r in refined {
        match r {
            Ok(res) => eigenvalues.push(res),
            Err(SpuriousOrError::Spurious(s)) => spurious.push(s),
            Err(SpuriousOrError::Error(e)) => return Err(e),
        }
    }
    eigenvalues.sort_by(|a, b| {
        (a.e.re, a.e.im)
            .partial_cmp(&(b.e.re, b.e.im))
            .expect("finite eigenvalues")
    });
    let mut merged: Vec<ShootingResult> = Vec::new();
    for r in eigenvalues {
        match merged.last_mut() {
            Some(last) if (last.e - r.e).norm() <= DEDUPE_TOL * (1.0 + r.e.norm()) => {
                if r.residual.norm() < last.residual.norm() {
                    *last = r;
                }
            }
            _ => merged.push(r),
        }
    }
    Ok(SpectrumOutcome {
        eigenvalues: merged,
        spurious,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(e: f64) -> Complex64 {
        Complex64::new(e, 0.0)
    }

    #[test]
    fn residual_vanishes_at_oscillator_eigenvalues() {
        let spec = ProblemSpec::new(0.0);
        assert!(matching_residual(&spec, re(1.0)).unwrap().norm() < 1e-9);
        assert!(matching_residual(&spec, re(2.0)).unwrap().norm() > 0.01);
        let spec = ProblemSpec::new(0.0).with_branch(1);
        assert!(matching_residual(&spec, re(-1.0)).unwrap().norm() < 1e-9);
    }

    #[test]
    fn scan_brackets_oscillator_window() {
        let spec = ProblemSpec::new(0.0).with_window(0.0, 8.0).with_grid(161);
        let brackets = scan(&spec).unwrap();
        assert_eq!(brackets.len(), 4);
        for (b, target) in brackets.iter().zip([1.0, 3.0, 5.0, 7.0]) {
            assert!(b.e_lo <= target && target <= b.e_hi, "{b:?} vs {target}");
        }
        // no eigenvalue between 1.5 and 2.5
        let spec = ProblemSpec::new(0.0).with_window(1.5, 2.5).with_grid(41);
        assert!(scan(&spec).unwrap().is_empty());
        // degenerate window
        let spec = ProblemSpec::new(0.0)
            .with_window(2.0 - 1e-9, 2.0)
            .with_grid(5);
        assert!(scan(&spec).unwrap().is_empty());
    }

    #[test]
    fn scan_rejects_invalid_window() {
        let spec = ProblemSpec::new(0.0).with_window(3.0, 1.0);
        assert!(matches!(scan(&spec), Err(ShootError::InvalidWindow { .. })));
        let spec = ProblemSpec::new(0.0).with_grid(1);
        assert!(matches!(scan(&spec), Err(ShootError::InvalidWindow { .. })));
    }

    #[test]
    fn refine_reaches_oscillator_eigenvalue() {
        let spec = ProblemSpec::new(0.0).with_window(0.0, 8.0);
        let brackets = scan(&spec).unwrap();
        let r = refine(&spec, &brackets[1]).unwrap();
        assert!((r.e - re(3.0)).norm() < 1e-9, "E = {}", r.e);
        assert!(r.classified_real);
        assert!(r.residual.norm() <= RESIDUAL_ACCEPT);
    }

    #[test]
    fn refine_negative_branch_eigenvalue() {
        let spec = ProblemSpec::new(0.0).with_branch(1).with_window(-8.0, 0.0);
        let brackets = scan(&spec).unwrap();
        let near3 = brackets
            .iter()
            .find(|b| b.e_lo <= -3.0 && -3.0 <= b.e_hi)
            .unwrap();
        let r = refine(&spec, near3).unwrap();
        assert!((r.e - re(-3.0)).norm() < 1e-9, "E = {}", r.e);
    }

    #[test]
    fn refine_cubic_ground_state() {
        // frozen reference: lowest eigenvalue of p² + ix³, cross-checked
        // against the N = 128 oscillator-basis truncation
        let spec = ProblemSpec::new(1.0).with_window(0.5, 2.0).with_grid(31);
        let brackets = scan(&spec).unwrap();
        assert_eq!(brackets.len(), 1);
        let r = refine(&spec, &brackets[0]).unwrap();
        assert!((r.e.re - 1.15627).abs() < 5e-6, "E0 = {}", r.e);
        assert!(r.classified_real);
    }

    #[test]
    fn spectrum_oscillator_both_branches() {
        let spec = ProblemSpec::new(0.0).with_window(0.0, 12.0);
        let out = spectrum(&spec).unwrap();
        let expect = [1.0, 3.0, 5.0, 7.0, 9.0, 11.0];
        assert_eq!(out.eigenvalues.len(), expect.len());
        for (r, want) in out.eigenvalues.iter().zip(expect) {
            assert!((r.e - re(want)).norm() < 1e-8, "{} vs {want}", r.e);
            assert!(r.classified_real);
        }
        // wedge choice flips the spectrum sign
        let flipped = ProblemSpec::new(0.0).with_branch(1).with_window(-12.0, 0.0);
        let neg = spectrum(&flipped).unwrap();
        assert_eq!(neg.eigenvalues.len(), expect.len());
        for (r, want) in neg.eigenvalues.iter().rev().zip(expect) {
            assert!((r.e + re(want)).norm() < 1e-8, "{} vs -{want}", r.e);
        }
    }

    #[test]
    fn spectrum_cubic_window_has_four_real_levels() {
        let spec = ProblemSpec::new(1.0).with_window(0.0, 12.0);
        let out = spectrum(&spec).unwrap();
        assert_eq!(out.eigenvalues.len(), 4);
        assert!(out.eigenvalues.iter().all(|r| r.classified_real));
        let expect = [
            1.156267071989,
            4.109228752813,
            7.562273854993,
            11.314421820211,
        ];
        for (r, want) in out.eigenvalues.iter().zip(expect) {
            assert!((r.e.re - want).abs() < 1e-7, "{} vs {want}", r.e);
        }
    }

    #[test]
    fn spectrum_quartic_real_and_positive() {
        let spec = ProblemSpec::new(2.0).with_window(0.0, 12.0);
        let out = spectrum(&spec).unwrap();
        assert!(!out.eigenvalues.is_empty());
        for r in &out.eigenvalues {
            assert!(r.classified_real);
            assert!(r.e.re > 0.0);
        }
        // two-step-size self-consistency for the frozen reference values
        let fixed = ProblemSpec::new(2.0)
            .with_window(0.0, 12.0)
            .with_control(StepControl::fixed(2e-3));
        let out2 = spectrum(&fixed).unwrap();
        assert_eq!(out.eigenvalues.len(), out2.eigenvalues.len());
        for (a, b) in out.eigenvalues.iter().zip(&out2.eigenvalues) {
            assert!((a.e - b.e).norm() <= 1e-7 * (1.0 + a.e.norm()));
        }
        assert!((out.eigenvalues[0].e.re - 1.4771497536).abs() < 1e-6);
        assert!((out.eigenvalues[1].e.re - 6.0033860833).abs() < 1e-6);
    }

    #[test]
    fn eigenvalues_are_contour_independent() {
        for target in [30.0, 40.0] {
            let spec = ProblemSpec::new(1.0)
                .with_window(0.5, 2.0)
                .with_grid(31)
                .with_decay_target(target);
            let out = spectrum(&spec).unwrap();
            assert_eq!(out.eigenvalues.len(), 1);
            assert!(
                (out.eigenvalues[0].e.re - 1.156267071989).abs() < 1e-8 * (1.0 + 1.156267071989)
            );
        }
    }

    #[test]
    fn fixed_step_richardson_independence() {
        let base = ProblemSpec::new(1.0).with_window(0.5, 2.0).with_grid(31);
        let e_at = |h: f64| {
            let spec = base.clone().with_control(StepControl::fixed(h));
            spectrum(&spec).unwrap().eigenvalues[0].e
        };
        let a = e_at(2e-3);
        let b = e_at(1e-3);
        assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()), "{a} vs {b}");
    }
}
