//! Runge–Kutta integration of −ψ″ + x²(ix)^ε ψ = Eψ along complex contours.
//!
//! Paths are polylines in the complex-x plane; each straight segment is
//! parameterized by arclength, so the integrator works on a real abscissa
//! with complex state (ψ, ψ′). Two schemes are provided: classical RK4
//! with a fixed step (reproducibility baseline) and an embedded
//! Dormand–Prince 5(4) pair with mixed-norm step control. The WKB-seeded
//! solutions grow by many orders of magnitude while integrating inward, so
//! the state carries a logarithmic scale factor that is split off whenever
//! the raw components threaten the floating-point range.

use num_complex::Complex64;
use thiserror::Error;

/// Raw component magnitude at which the state is rescaled.
const RENORM_THRESHOLD: f64 = 1e100;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error(
        "endpoint inside turning region: |V({x})| = {v_abs:.3e} <= |E| = {e_abs:.3e}"
    )]
    TurningRegion {
        x: Complex64,
        v_abs: f64,
        e_abs: f64,
    },
    #[error("path starts at {path_start} but the seed is at {seed_x}")]
    PathMismatch {
        path_start: Complex64,
        seed_x: Complex64,
    },
    #[error("integration exceeded {max_steps} steps near x = {x}")]
    MaxSteps {
        max_steps: usize,
        x: Complex64,
        partial: WaveState,
    },
    #[error("step size underflow near x = {x}; state not finite or tolerance unreachable")]
    StepUnderflow { x: Complex64 },
}

/// Solution state at one point of the contour.
///
/// The represented solution is ψ = `psi`·exp(`log_scale`) and
/// ψ′ = `dpsi`·exp(`log_scale`); the raw components are kept at most
/// around 10¹⁰⁰ so that ratios and Wronskians of two states can be formed
/// without overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveState {
    pub x: Complex64,
    pub psi: Complex64,
    pub dpsi: Complex64,
    pub log_scale: f64,
}

impl WaveState {
    pub fn new(x: Complex64, psi: Complex64, dpsi: Complex64) -> Self {
        Self {
            x,
            psi,
            dpsi,
            log_scale: 0.0,
        }
    }
}

/// Step-size policy for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed { step: f64, max_steps: usize },
    Adaptive {
        rel_tol: f64,
        abs_tol: f64,
        max_steps: usize,
    },
}

impl StepControl {
    pub fn fixed(step: f64) -> Self {
        Self::Fixed {
            step,
            max_steps: 1_000_000,
        }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self::Adaptive {
            rel_tol,
            abs_tol,
            max_steps: 1_000_000,
        }
    }

    pub fn max_steps(&self) -> usize {
        match *self {
            Self::Fixed { max_steps, .. } | Self::Adaptive { max_steps, .. } => max_steps,
        }
    }
}

impl Default for StepControl {
    fn default() -> Self {
        Self::Adaptive {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

/// The potential x²(ix)^ε with the principal branch of the power.
///
/// For integer ε this is evaluated as i^ε·x^(ε+2) through exact integer
/// powers, which agrees with the principal branch everywhere.
pub fn potential(x: Complex64, epsilon: f64) -> Complex64 {
    if x.re == 0.0 && x.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if epsilon == 0.0 {
        return x * x;
    }
    if epsilon.fract() == 0.0 && epsilon <= 64.0 {
        let k = epsilon as u32;
        let i_pow = match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        return i_pow * x.powu(k + 2);
    }
    x * x * (Complex64::i() * x).powf(epsilon)
}

/// First-order form of the eigenvalue equation: ψ′ echoed, ψ″ = (V − E)ψ.
pub fn rhs(state: &WaveState, e: Complex64, epsilon: f64) -> (Complex64, Complex64) {
    (
        state.dpsi,
        (potential(state.x, epsilon) - e) * state.psi,
    )
}

/// Seed the solution that decays outward (grows inward) at a contour endpoint.
///
/// Returns ψ = 1 with ψ′ = ∓√(V(x₀) − E), the sign fixed so that the
/// logarithmic derivative has positive real part along `inward`, the unit
/// direction of the upcoming integration toward the matching point.
pub fn wkb_seed(
    x0: Complex64,
    e: Complex64,
    epsilon: f64,
    inward: Complex64,
) -> Result<WaveState, OdeError> {
    let v = potential(x0, epsilon);
    if v.norm() <= e.norm() {
        return Err(OdeError::TurningRegion {
            x: x0,
            v_abs: v.norm(),
            e_abs: e.norm(),
        });
    }
    let root = (v - e).sqrt();
    let dpsi = if (-root * inward).re > 0.0 { -root } else { root };
    Ok(WaveState::new(x0, Complex64::new(1.0, 0.0), dpsi))
}

fn renormalize(psi: &mut Complex64, dpsi: &mut Complex64, log_scale: &mut f64) {
    let m = psi.norm().max(dpsi.norm());
    if m > RENORM_THRESHOLD {
        *psi /= m;
        *dpsi /= m;
        *log_scale += m.ln();
    }
}

/// Integrate the seeded state along a polyline path to its final vertex.
///
/// Each segment is traversed by arclength; `ctl` selects fixed-step RK4 or
/// the embedded Dormand–Prince 5(4) pair with acceptance by the mixed
/// error norm over (ψ, ψ′). A path with fewer than two vertices returns
/// the seed unchanged.
pub fn integrate(
    seed: &WaveState,
    path: &[Complex64],
    e: Complex64,
    epsilon: f64,
    ctl: &StepControl,
) -> Result<WaveState, OdeError> {
    if path.is_empty() {
        return Ok(*seed);
    }
    let start = path[0];
    if (start - seed.x).norm() > 1e-9 * (1.0 + seed.x.norm()) {
        return Err(OdeError::PathMismatch {
            path_start: start,
            seed_x: seed.x,
        });
    }
    let mut state = *seed;
    let mut budget = ctl.max_steps();
    let patch_limit = |err| match err {
        OdeError::MaxSteps { x, partial, .. } => OdeError::MaxSteps {
            max_steps: ctl.max_steps(),
            x,
            partial,
        },
        other => other,
    };
    for w in path.windows(2) {
        let seg = w[1] - w[0];
        let len = seg.norm();
        // zero and round-off-dust segments contribute nothing
        if len <= 1e-12 * (1.0 + w[0].norm()) {
            continue;
        }
        let dir = seg / len;
        match *ctl {
            StepControl::Fixed { step, .. } => {
                segment_fixed(&mut state, w[0], dir, len, step, e, epsilon, &mut budget)
                    .map_err(patch_limit)?
            }
            StepControl::Adaptive {
                rel_tol, abs_tol, ..
            } => segment_adaptive(
                &mut state,
                w[0],
                dir,
                len,
                rel_tol,
                abs_tol,
                e,
                epsilon,
                &mut budget,
            )
            .map_err(patch_limit)?,
        }
        state.x = w[1];
    }
    Ok(state)
}

#[inline]
fn deriv(
    origin: Complex64,
    dir: Complex64,
    t: f64,
    psi: Complex64,
    dpsi: Complex64,
    e: Complex64,
    epsilon: f64,
) -> (Complex64, Complex64) {
    let x = origin + dir * t;
    (dir * dpsi, dir * (potential(x, epsilon) - e) * psi)
}

#[allow(clippy::too_many_arguments)]
fn segment_fixed(
    state: &mut WaveState,
    origin: Complex64,
    dir: Complex64,
    len: f64,
    step: f64,
    e: Complex64,
    epsilon: f64,
    budget: &mut usize,
) -> Result<(), OdeError> {
    let n = (len / step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let mut psi = state.psi;
    let mut dpsi = state.dpsi;
    for i in 0..n {
        if *budget == 0 {
            state.psi = psi;
            state.dpsi = dpsi;
            state.x = origin + dir * (i as f64 * h);
            return Err(OdeError::MaxSteps {
                max_steps: 0,
                x: state.x,
                partial: *state,
            });
        }
        *budget -= 1;
        let t = i as f64 * h;
        let (k1p, k1d) = deriv(origin, dir, t, psi, dpsi, e, epsilon);
        let (k2p, k2d) = deriv(
            origin,
            dir,
            t + 0.5 * h,
            psi + 0.5 * h * k1p,
            dpsi + 0.5 * h * k1d,
            e,
            epsilon,
        );
        let (k3p, k3d) = deriv(
            origin,
            dir,
            t + 0.5 * h,
            psi + 0.5 * h * k2p,
            dpsi + 0.5 * h * k2d,
            e,
            epsilon,
        );
        let (k4p, k4d) = deriv(
            origin,
            dir,
            t + h,
            psi + h * k3p,
            dpsi + h * k3d,
            e,
            epsilon,
        );
        psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        renormalize(&mut psi, &mut dpsi, &mut state.log_scale);
        if !psi.is_finite() || !dpsi.is_finite() {
            return Err(OdeError::StepUnderflow {
                x: origin + dir * t,
            });
        }
    }
    state.psi = psi;
    state.dpsi = dpsi;
    Ok(())
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b(5th) − b(4th): weights of the embedded error estimate
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[allow(clippy::too_many_arguments)]
fn segment_adaptive(
    state: &mut WaveState,
    origin: Complex64,
    dir: Complex64,
    len: f64,
    rel_tol: f64,
    abs_tol: f64,
    e: Complex64,
    epsilon: f64,
    budget: &mut usize,
) -> Result<(), OdeError> {
    let mut t = 0.0;
    let mut psi = state.psi;
    let mut dpsi = state.dpsi;

    // initial step from the local oscillation/growth scale √|V−E|
    let k0 = (potential(origin, epsilon) - e).norm().sqrt();
    let mut h = (0.1 / (1.0 + k0)).min(len);

    let mut fsal = deriv(origin, dir, 0.0, psi, dpsi, e, epsilon);

    while t < len {
        if *budget == 0 {
            state.psi = psi;
            state.dpsi = dpsi;
            state.x = origin + dir * t;
            return Err(OdeError::MaxSteps {
                max_steps: 0,
                x: state.x,
                partial: *state,
            });
        }
        *budget -= 1;
        h = h.min(len - t);
        if h < 1e-14 * len.max(1.0) {
            return Err(OdeError::StepUnderflow {
                x: origin + dir * t,
            });
        }

        let (k1p, k1d) = fsal;
        let (k2p, k2d) = deriv(
            origin,
            dir,
            t + A21 * h,
            psi + h * (A21 * k1p),
            dpsi + h * (A21 * k1d),
            e,
            epsilon,
        );
        let (k3p, k3d) = deriv(
            origin,
            dir,
            t + 0.3 * h,
            psi + h * (A31 * k1p + A32 * k2p),
            dpsi + h * (A31 * k1d + A32 * k2d),
            e,
            epsilon,
        );
        let (k4p, k4d) = deriv(
            origin,
            dir,
            t + 0.8 * h,
            psi + h * (A41 * k1p + A42 * k2p + A43 * k3p),
            dpsi + h * (A41 * k1d + A42 * k2d + A43 * k3d),
            e,
            epsilon,
        );
        let (k5p, k5d) = deriv(
            origin,
            dir,
            t + 8.0 / 9.0 * h,
            psi + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p),
            dpsi + h * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d),
            e,
            epsilon,
        );
        let (k6p, k6d) = deriv(
            origin,
            dir,
            t + h,
            psi + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p),
            dpsi + h * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d),
            e,
            epsilon,
        );
        let psi5 = psi + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p);
        let dpsi5 = dpsi + h * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d);
        let (k7p, k7d) = deriv(origin, dir, t + h, psi5, dpsi5, e, epsilon);

        let err_psi = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p);
        let err_dpsi = h * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d);
        let sc_psi = abs_tol + rel_tol * psi.norm().max(psi5.norm());
        let sc_dpsi = abs_tol + rel_tol * dpsi.norm().max(dpsi5.norm());
        let err = ((err_psi.norm() / sc_psi).powi(2) + (err_dpsi.norm() / sc_dpsi).powi(2))
            .sqrt()
            / std::f64::consts::SQRT_2;

        if err.is_finite() && err <= 1.0 {
            t += h;
            psi = psi5;
            dpsi = dpsi5;
            fsal = (k7p, k7d);
            let before = psi.norm().max(dpsi.norm());
            renormalize(&mut psi, &mut dpsi, &mut state.log_scale);
            let after = psi.norm().max(dpsi.norm());
            if after != before {
                let f = after / before;
                fsal = (fsal.0 * f, fsal.1 * f);
            }
        }
        let factor = if err.is_finite() && err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else if err == 0.0 {
            5.0
        } else {
            0.2
        };
        h *= factor;
    }
    state.psi = psi;
    state.dpsi = dpsi;
    Ok(())
}
