//! Stokes-wedge geometry for the potential x²(ix)^ε and contour planning.
//!
//! Asymptotic solutions of the eigenvalue equation decay inside angular
//! sectors of opening 2π/(ε+4); eigenfunctions are required to vanish in a
//! chosen pair of these sectors. At ε = 0 the pair straddles the real axes
//! with 90° openings; as ε grows the wedges narrow and rotate into the
//! lower-half plane, and from ε = 2 on they exclude the real axes entirely.
//! Integration contours must terminate deep inside the chosen pair.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Default endpoint suppression exponent: |ψ| ~ e⁻³⁰ at the contour ends,
/// below double-precision round-off relative to unit-scale solutions.
pub const DEFAULT_DECAY_TARGET: f64 = 30.0;

#[derive(Debug, Error)]
pub enum WedgeError {
    #[error("epsilon must be a finite nonnegative real, got {0}")]
    InvalidEpsilon(f64),
}

/// An open angular sector of the complex plane in which solutions decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesWedge {
    /// Bisector angle in radians, kept in (−2π, π].
    pub center: f64,
    /// Half the opening angle, in (0, π/2].
    pub half_opening: f64,
}

// Membership margin: directions within this many radians of the boundary
// count as outside, so exact-boundary cases (the real axes at ε = 2) resolve
// to "excluded" regardless of rounding in the angle arithmetic.
const BOUNDARY_MARGIN: f64 = 1e-13;

impl StokesWedge {
    /// True iff `theta` lies strictly inside the open wedge, modulo 2π.
    pub fn contains(&self, theta: f64) -> bool {
        angle_distance(theta, self.center) < self.half_opening - BOUNDARY_MARGIN
    }

    /// Boundary angles (lower, upper) of the open sector.
    pub fn boundaries(&self) -> (f64, f64) {
        (
            self.center - self.half_opening,
            self.center + self.half_opening,
        )
    }
}

/// Smallest unsigned angular separation between two angles.
fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Wrap an angle into (−2π, π].
fn wrap_principal(mut c: f64) -> f64 {
    while c > PI {
        c -= 2.0 * PI;
    }
    while c <= -2.0 * PI {
        c += 2.0 * PI;
    }
    c
}

/// The pair of Stokes wedges carrying the boundary conditions.
///
/// `branch = 0` is the pair analytically continued from the ε = 0
/// real-axis wedges; each unit of `branch` rotates both wedges by one
/// sector spacing 2π/(ε+4). At branch 0 the pair is PT-mirror symmetric
/// about the imaginary axis: `left.center = −π − right.center (mod 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgePair {
    pub left: StokesWedge,
    pub right: StokesWedge,
    pub epsilon: f64,
    pub branch: i32,
}

/// Wedge centers and opening for the potential x²(ix)^ε.
///
/// The right wedge is centered at −επ/(2ε+8) + branch·2π/(ε+4), the left
/// at −π + επ/(2ε+8) + branch·2π/(ε+4); both have half-opening π/(ε+4).
/// These reproduce the 90° real-axis pair at ε = 0, the 60° pair excluding
/// the real axes at ε = 2, and the imaginary-axis pair at (ε, branch) = (0, 1).
pub fn wedge_geometry(epsilon: f64, branch: i32) -> Result<WedgePair, WedgeError> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(WedgeError::InvalidEpsilon(epsilon));
    }
    let half = PI / (epsilon + 4.0);
    let rot = f64::from(branch) * 2.0 * PI / (epsilon + 4.0);
    let right0 = -epsilon * PI / (2.0 * epsilon + 8.0);
    let right = wrap_principal(right0 + rot);
    let left = wrap_principal(-PI - right0 + rot);
    Ok(WedgePair {
        left: StokesWedge {
            center: left,
            half_opening: half,
        },
        right: StokesWedge {
            center: right,
            half_opening: half,
        },
        epsilon,
        branch,
    })
}

/// A piecewise-linear integration path terminating inside each wedge.
///
/// Vertices run from the left-wedge endpoint to the right-wedge endpoint;
/// `match_index` is the vertex where the two one-sided solutions meet
/// (the origin for planned contours).
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub vertices: Vec<Complex64>,
    pub match_index: usize,
    /// Endpoint radii of the (left, right) arms.
    pub arm_radii: [f64; 2],
}

impl Contour {
    /// Left arm ordered inward, from the endpoint to the matching vertex.
    pub fn left_arm_inward(&self) -> Vec<Complex64> {
        self.vertices[..=self.match_index].to_vec()
    }

    /// Right arm ordered inward, from the endpoint to the matching vertex.
    pub fn right_arm_inward(&self) -> Vec<Complex64> {
        let mut arm: Vec<Complex64> = self.vertices[self.match_index..].to_vec();
        arm.reverse();
        arm
    }
}

/// Plan a two-arm ray contour for the given wedge pair.
///
/// Each arm runs from R·exp(i·center) straight to the origin, where the
/// arms match. R is the smallest radius with WKB endpoint exponent
/// (2/(ε+4))·R^((ε+4)/2) ≥ `decay_target` and R² ≥ 4·|energy_hint|, so the
/// endpoints sit beyond the turning points with the target suppression.
pub fn plan_contour(pair: &WedgePair, energy_hint: f64, decay_target: f64) -> Contour {
    let eps = pair.epsilon;
    let r_decay = (decay_target * (eps + 4.0) / 2.0).powf(2.0 / (eps + 4.0));
    let r_turn = 2.0 * energy_hint.abs().sqrt();
    let r = r_decay.max(r_turn);
    let left_end = Complex64::from_polar(r, pair.left.center);
    let right_end = Complex64::from_polar(r, pair.right.center);
    Contour {
        vertices: vec![left_end, Complex64::new(0.0, 0.0), right_end],
        match_index: 1,
        arm_radii: [r, r],
    }
}

/// Plan the contour actually integrated when matching the two arms.
///
/// Same endpoint radii as [`plan_contour`], but each arm runs along its
/// classical turning ray (the direction where x²(ix)^ε is real positive,
/// still strictly inside the wedge), passes through the turning point at
/// |x| = E^(1/(ε+2)), and then follows a straight approximation of the
/// anti-Stokes line into the PT-symmetric matching point on the negative
/// imaginary axis. Everywhere off that route one of the two local
/// solution branches outruns the other exponentially — by factors that
/// exceed 1/ε_machine once E is large — and the Wronskian signal becomes
/// unrepresentable; crossing at the turning point, where the branches
/// coalesce, keeps both alive at every energy. At ε = 0 the route
/// degenerates to the real axis matched at the origin. Rotated wedge
/// pairs (branch ≠ 0) and nonpositive energy hints keep the plain
/// straight-ray contour.
pub fn plan_matching_contour(pair: &WedgePair, energy_hint: f64, decay_target: f64) -> Contour {
    let straight = plan_contour(pair, energy_hint, decay_target);
    if pair.branch != 0 || energy_hint <= 0.0 {
        return straight;
    }
    let eps = pair.epsilon;
    let r = straight.arm_radii[0];
    let r_t = energy_hint.powf(1.0 / (eps + 2.0));
    if r_t >= 0.9 * r {
        return straight;
    }
    // right turning ray; the left one is its PT mirror
    let phi = -eps * PI / (2.0 * eps + 4.0);
    let a = phi.abs();
    let dip = r_t * (a.sin() - a.cos() * (a / 3.0).tan());
    let x_m = Complex64::new(0.0, -dip);
    let right_dir = phi;
    let left_dir = wrap_principal(PI - phi);
    Contour {
        vertices: vec![
            Complex64::from_polar(r, left_dir),
            Complex64::from_polar(r_t, left_dir),
            x_m,
            Complex64::from_polar(r_t, right_dir),
            Complex64::from_polar(r, right_dir),
        ],
        match_index: 2,
        arm_radii: [r, r],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn deg(d: f64) -> f64 {
        d * PI / 180.0
    }

    /// Same direction modulo 2π.
    fn assert_angle_eq(a: f64, b: f64, tol: f64) {
        assert!(angle_distance(a, b) < tol, "angles {a} vs {b}");
    }

    // Test oracle: Re of the WKB exponent integral along the ray at `theta`,
    // by Simpson quadrature of sqrt(V) with the pointwise principal root
    // (arg V is constant along a ray, so the root is continuous in t).
    fn wkb_exponent_re(theta: f64, epsilon: f64) -> f64 {
        let n = 2000;
        let h = 1.0 / n as f64;
        let f = |t: f64| -> f64 {
            let x = Complex64::from_polar(t.max(1e-300), theta);
            let v = x * x * (Complex64::i() * x).powf(epsilon);
            (v.sqrt() * Complex64::from_polar(1.0, theta)).re
        };
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    // Bisection on the ray angle for a sign change of the decay exponent.
    fn decay_boundary(epsilon: f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = wkb_exponent_re(lo, epsilon);
        let fhi = wkb_exponent_re(hi, epsilon);
        assert!(flo * fhi < 0.0, "oracle bracket invalid: {flo} {fhi}");
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let fm = wkb_exponent_re(mid, epsilon);
            if flo * fm <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn geometry_harmonic_case_straddles_real_axes() {
        let pair = wedge_geometry(0.0, 0).unwrap();
        assert_angle_eq(pair.right.center, 0.0, 1e-12);
        assert_angle_eq(pair.left.center, PI, 1e-12);
        assert_relative_eq!(pair.right.half_opening, PI / 4.0, max_relative = 1e-15);
        assert!(pair.right.contains(0.0));
        assert!(pair.left.contains(PI));
    }

    #[test]
    fn geometry_eps2_excludes_real_axes() {
        let pair = wedge_geometry(2.0, 0).unwrap();
        // 60° total opening, right wedge spanning (−60°, 0°)
        assert_relative_eq!(2.0 * pair.right.half_opening, PI / 3.0, max_relative = 1e-15);
        let (lo, hi) = pair.right.boundaries();
        assert_relative_eq!(lo, deg(-60.0), epsilon = 1e-12);
        assert_relative_eq!(hi, 0.0, epsilon = 1e-12);
        assert!(!pair.right.contains(0.0));
        assert!(!pair.left.contains(PI));
    }

    #[test]
    fn geometry_eps1_matches_decay_sector_oracle() {
        let pair = wedge_geometry(1.0, 0).unwrap();
        assert_relative_eq!(pair.right.center, deg(-18.0), epsilon = 1e-12);
        assert_relative_eq!(2.0 * pair.right.half_opening, deg(72.0), epsilon = 1e-12);
        // boundaries located independently by the WKB ray oracle
        let lo = decay_boundary(1.0, deg(-56.0), deg(-52.0));
        let hi = decay_boundary(1.0, deg(16.0), deg(20.0));
        assert_relative_eq!(lo, deg(-54.0), epsilon = 1e-6);
        assert_relative_eq!(hi, deg(18.0), epsilon = 1e-6);
        assert_relative_eq!(0.5 * (lo + hi), pair.right.center, epsilon = 1e-6);
    }

    #[test]
    fn geometry_branch_one_reaches_imaginary_axes() {
        let pair = wedge_geometry(0.0, 1).unwrap();
        assert_angle_eq(pair.right.center, PI / 2.0, 1e-12);
        assert_angle_eq(pair.left.center, -PI / 2.0, 1e-12);
    }

    #[test]
    fn geometry_rejects_negative_epsilon() {
        assert!(wedge_geometry(-0.5, 0).is_err());
        assert!(wedge_geometry(f64::NAN, 0).is_err());
    }

    #[test]
    fn contains_examples() {
        let w = StokesWedge {
            center: 0.0,
            half_opening: deg(45.0),
        };
        assert!(w.contains(0.0));
        assert!(!w.contains(deg(45.0))); // open boundary
        let w = StokesWedge {
            center: deg(-30.0),
            half_opening: deg(30.0),
        };
        assert!(w.contains(deg(-59.0)));
    }

    #[test]
    fn pair_is_pt_mirror_symmetric_at_branch_zero() {
        for i in 0..=40 {
            let eps = 0.1 * i as f64;
            let pair = wedge_geometry(eps, 0).unwrap();
            let mirror = wrap_principal(-PI - pair.right.center);
            assert!(
                angle_distance(pair.left.center, mirror) < 1e-12,
                "eps = {eps}"
            );
            assert_eq!(pair.left.half_opening, pair.right.half_opening);
        }
    }

    #[test]
    fn opening_decreases_and_real_axis_membership_flips_at_two() {
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let eps = 0.1 * i as f64;
            let pair = wedge_geometry(eps, 0).unwrap();
            let opening = 2.0 * pair.right.half_opening;
            assert!(opening < prev);
            prev = opening;
            assert_eq!(pair.right.contains(0.0), eps < 2.0, "eps = {eps}");
        }
        assert_relative_eq!(
            2.0 * wedge_geometry(0.0, 0).unwrap().right.half_opening,
            PI / 2.0
        );
        assert_relative_eq!(
            2.0 * wedge_geometry(2.0, 0).unwrap().right.half_opening,
            PI / 3.0
        );
    }

    #[test]
    fn contour_radius_examples() {
        let pair = wedge_geometry(0.0, 0).unwrap();
        let c = plan_contour(&pair, 1.0, 30.0);
        assert_relative_eq!(c.arm_radii[0], 60.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(c.vertices[2].im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(c.vertices[0].re, -60.0_f64.sqrt(), epsilon = 1e-12);

        let pair = wedge_geometry(1.0, 0).unwrap();
        let c = plan_contour(&pair, 1.0, 30.0);
        assert_relative_eq!(c.arm_radii[0], 75.0_f64.powf(0.4), max_relative = 1e-15);
        assert_relative_eq!(c.vertices[2].arg(), deg(-18.0), epsilon = 1e-12);

        // turning-point clause dominates for huge energy hints
        let c = plan_contour(&pair, 1e6, 30.0);
        assert!(c.arm_radii[0] >= 2000.0);
    }

    #[test]
    fn contour_endpoints_lie_inside_their_wedges_with_target_suppression() {
        for i in 0..=8 {
            let eps = 0.5 * i as f64;
            let pair = wedge_geometry(eps, 0).unwrap();
            for target in [30.0, 45.0] {
                let c = plan_contour(&pair, 3.0, target);
                assert!(pair.left.contains(c.vertices[0].arg()));
                assert!(pair.right.contains(c.vertices[2].arg()));
                let r = c.arm_radii[0];
                let exponent = 2.0 / (eps + 4.0) * r.powf((eps + 4.0) / 2.0);
                assert!(exponent >= target - 1e-9, "eps = {eps}");
            }
        }
        // spot-check the exponent against the quadrature oracle at the center ray
        let pair = wedge_geometry(1.0, 0).unwrap();
        let c = plan_contour(&pair, 0.0, 30.0);
        let r = c.arm_radii[0];
        let unit_exponent = wkb_exponent_re(pair.right.center, 1.0);
        assert_relative_eq!(
            unit_exponent * r.powf(2.5),
            30.0,
            max_relative = 1e-5
        );
    }

    #[test]
    fn arm_accessors_run_inward() {
        let pair = wedge_geometry(1.0, 0).unwrap();
        let c = plan_contour(&pair, 1.0, 30.0);
        let left = c.left_arm_inward();
        let right = c.right_arm_inward();
        assert_eq!(left.last().unwrap().norm(), 0.0);
        assert_eq!(right.last().unwrap().norm(), 0.0);
        assert_relative_eq!(left[0].norm(), c.arm_radii[0]);
        assert_relative_eq!(right[0].norm(), c.arm_radii[1]);
    }

    proptest! {
        #[test]
        fn membership_is_modular(center in -6.0..3.0f64, half in 0.01..1.5f64,
                                 theta in -10.0..10.0f64, k in -3i32..=3) {
            let w = StokesWedge { center, half_opening: half };
            let shifted = theta + 2.0 * PI * f64::from(k);
            prop_assert_eq!(w.contains(theta), w.contains(shifted));
        }

        #[test]
        fn planned_radius_covers_both_clauses(eps in 0.0..6.0f64,
                                              hint in 0.0..1e4f64,
                                              target in 5.0..80.0f64) {
            let pair = wedge_geometry(eps, 0).unwrap();
            let c = plan_contour(&pair, hint, target);
            let r = c.arm_radii[0];
            prop_assert!(r * r >= 4.0 * hint - 1e-9);
            prop_assert!(2.0 / (eps + 4.0) * r.powf((eps + 4.0) / 2.0) >= target - 1e-9);
        }
    }
}
