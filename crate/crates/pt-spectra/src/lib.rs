//! Spectra of the non-Hermitian Hamiltonian family H = p² + x²(ix)^ε.
//!
//! For ε ≥ 0 the eigenvalues of this family are real, positive, and
//! discrete, provided the boundary conditions are imposed in the correct
//! pair of Stokes wedges of the complex-x plane. This crate computes those
//! spectra by two-sided Runge–Kutta shooting along complex contours and
//! root-finding on the matching Wronskian. It also reproduces the
//! harmonic-oscillator-basis truncation method for integer ε — a method
//! whose finite sections acquire complex eigenvalue pairs that are pure
//! truncation artifacts — and ships the diagnostics that separate the
//! variationally settled low-lying levels from that artifact population.
//!
//! Module map:
//!
//! * [`wedges`] — Stokes-wedge geometry and contour planning
//! * [`ode`] — complex-contour Runge–Kutta integration of the eigenvalue ODE
//! * [`shooting`] — Wronskian matching, bracket scan, secant refinement
//! * [`hobasis`] — exact N×N oscillator-basis sections of H
//! * [`eig`] — dense complex eigensolver and conjugate-pair audit
//! * [`analysis`] — stabilization traces, settled counts, growth-rate fits
//! * [`cli`] — the `pt-spectra` command-line surface

pub mod analysis;
pub mod cli;
pub mod eig;
pub mod hobasis;
pub mod ode;
pub mod shooting;
pub mod wedges;

pub use num_complex::Complex64;
