//! Exact N×N oscillator-basis sections of H = p² + x²(ix)^ε for integer ε.
//!
//! Matrix elements are taken in the number basis of a = (x + ip)/√2, the
//! convention in which p² + x² is diag(1, 3, 5, …) with no frequency
//! rescaling. Powers of x are built by banded multiplication at working
//! size N+k and then truncated, so every entry of the N×N block equals the
//! corresponding entry of the infinite matrix; the only approximation in
//! the method is the final truncation handed to the eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Largest supported power of x.
pub const MAX_POWER: u32 = 12;
/// Integer deformations with tractable closed-form matrix elements.
pub const SUPPORTED_EPSILON: [u32; 5] = [0, 1, 2, 4, 6];

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("unsupported position power x^{0}: closed-form blocks are kept to k <= {MAX_POWER}")]
    UnsupportedPower(u32),
    #[error(
        "epsilon = {0} is not in {{0, 1, 2, 4, 6}}: the oscillator-basis route needs integer \
         epsilon and is built only for those deformations"
    )]
    UnsupportedEpsilon(u32),
    #[error("matrix dimension must be at least 1")]
    EmptyDimension,
}

/// A truncated Hamiltonian section P² + i^ε·X^(ε+2) of size N×N.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHamiltonian {
    pub n: usize,
    pub epsilon: u32,
    pub entries: DMatrix<Complex64>,
}

/// The N×N block of ⟨m|x^k|n⟩, exact to round-off.
///
/// The one-quantum matrix X with X[n, n+1] = X[n+1, n] = √(n+1)/√2 is
/// powered at working size N+k before truncation, which keeps every
/// retained entry equal to its infinite-matrix value.
pub fn position_power_matrix(k: u32, n: usize) -> Result<DMatrix<f64>, BasisError> {
    if k > MAX_POWER {
        return Err(BasisError::UnsupportedPower(k));
    }
    if n == 0 {
        return Err(BasisError::EmptyDimension);
    }
    let work = n + k as usize;
    let mut x = DMatrix::<f64>::zeros(work, work);
    for i in 0..work - 1 {
        let v = ((i + 1) as f64 / 2.0).sqrt();
        x[(i, i + 1)] = v;
        x[(i + 1, i)] = v;
    }
    let mut acc = DMatrix::<f64>::identity(work, work);
    for _ in 0..k {
        acc = &acc * &x;
    }
    let mut block = acc.view((0, 0), (n, n)).into_owned();
    // the infinite matrix is exactly symmetric; mirror the upper triangle to
    // scrub last-ulp summation-order asymmetry from the matrix products
    for i in 0..n {
        for j in 0..i {
            block[(i, j)] = block[(j, i)];
        }
    }
    Ok(block)
}

/// The exact N×N block of ⟨m|p²|n⟩: diagonal n + 1/2, second off-diagonals
/// −√((n+1)(n+2))/2.
pub fn momentum_squared_matrix(n: usize) -> DMatrix<f64> {
    let mut p2 = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        p2[(i, i)] = i as f64 + 0.5;
    }
    for i in 0..n.saturating_sub(2) {
        let v = -(((i + 1) * (i + 2)) as f64).sqrt() / 2.0;
        p2[(i, i + 2)] = v;
        p2[(i + 2, i)] = v;
    }
    p2
}

/// Assemble the truncated section P² + i^ε·X^(ε+2) for ε ∈ {0, 1, 2, 4, 6}.
pub fn build(epsilon: u32, n: usize) -> Result<TruncatedHamiltonian, BasisError> {
    if !SUPPORTED_EPSILON.contains(&epsilon) {
        return Err(BasisError::UnsupportedEpsilon(epsilon));
    }
    let xk = position_power_matrix(epsilon + 2, n)?;
    let p2 = momentum_squared_matrix(n);
    let phase = match epsilon % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let entries = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(p2[(i, j)], 0.0) + phase * xk[(i, j)]
    });
    Ok(TruncatedHamiltonian {
        n,
        epsilon,
        entries,
    })
}

/// Signed-conjugation symmetry check: S·conj(H)·S = H with S = diag((−1)^n).
///
/// Sections built here satisfy this identity exactly; it forces the
/// truncation spectrum to be closed under complex conjugation, so complex
/// eigenvalues can only appear in conjugate pairs.
pub fn pt_signature_check(h: &TruncatedHamiltonian) -> bool {
    let m = &h.entries;
    for i in 0..h.n {
        for j in 0..h.n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            if (sign * m[(i, j)].conj() - m[(i, j)]).norm() > 1e-14 {
                return false;
            }
        }
    }
    true
}
