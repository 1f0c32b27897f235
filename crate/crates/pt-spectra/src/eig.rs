//! Dense eigenvalues of complex non-Hermitian matrices.
//!
//! The solver is the classical dense chain: Parlett–Reinsch balancing,
//! Householder reduction to upper Hessenberg form, then implicit
//! single-shift QR iteration with Wilkinson shifts and deflation of
//! negligible subdiagonals. Only eigenvalues are accumulated (no Schur
//! vectors), which is all the truncation diagnostics need. Accuracy is
//! pinned by trace, determinant, and similarity contracts in the tests
//! rather than by comparison to another library.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Reality/pairing classification tolerance, relative to 1 + |E|.
pub const PAIRING_TOL: f64 = 1e-8;

/// Provenance of a spectrum, carried through sorting and audits.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSource {
    pub method: String,
    pub epsilon: Option<f64>,
    pub n: usize,
}

impl SpectrumSource {
    pub fn new(method: impl Into<String>, epsilon: Option<f64>, n: usize) -> Self {
        Self {
            method: method.into(),
            epsilon,
            n,
        }
    }

    pub fn truncation(epsilon: u32, n: usize) -> Self {
        Self::new("truncation", Some(f64::from(epsilon)), n)
    }
}

impl std::fmt::Display for SpectrumSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.epsilon {
            Some(eps) => write!(f, "{} (epsilon = {}, N = {})", self.method, eps, self.n),
            None => write!(f, "{} (N = {})", self.method, self.n),
        }
    }
}

/// All eigenvalues of one matrix, sorted by (Re, Im).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    pub values: Vec<Complex64>,
    pub source: SpectrumSource,
}

#[derive(Debug, Error)]
pub enum EigError {
    #[error("matrix for {descriptor} is not square ({rows}x{cols})")]
    NotSquare {
        descriptor: SpectrumSource,
        rows: usize,
        cols: usize,
    },
    #[error("matrix for {descriptor} contains non-finite entries")]
    NonFinite { descriptor: SpectrumSource },
    #[error("QR iteration for {descriptor} did not converge within {sweeps} sweeps")]
    NoConvergence {
        descriptor: SpectrumSource,
        sweeps: usize,
    },
}

/// Compute all eigenvalues of a dense complex matrix.
///
/// Fails after 30·N QR sweeps without full deflation, naming the matrix
/// descriptor in the error.
pub fn eigenvalues(
    matrix: &DMatrix<Complex64>,
    source: SpectrumSource,
) -> Result<SpectrumSet, EigError> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(EigError::NotSquare {
            descriptor: source,
            rows,
            cols,
        });
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigError::NonFinite { descriptor: source });
    }
    let n = rows;
    if n == 0 {
        return Ok(SpectrumSet {
            values: Vec::new(),
            source,
        });
    }
    let mut h = matrix.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let max_sweeps = 30 * n;
    let mut values = match qr_eigenvalues(h, max_sweeps) {
        Some(v) => v,
        None => {
            return Err(EigError::NoConvergence {
                descriptor: source,
                sweeps: max_sweeps,
            })
        }
    };
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectrumSet { values, source })
}

/// Outcome of pairing a spectrum against its own conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAudit {
    pub real_count: usize,
    pub pair_count: usize,
    pub unpaired: Vec<Complex64>,
}

/// Greedy conjugate matching within PAIRING_TOL·(1 + |E|).
///
/// Eigenvalues with |Im| inside the reality tolerance count as real; the
/// rest must appear in conjugate pairs when the source matrix has the
/// signed-conjugation symmetry, so a nonempty `unpaired` list flags either
/// broken symmetry or eigensolver trouble.
pub fn conjugate_pair_audit(s: &SpectrumSet) -> PairAudit {
    let mut real_count = 0;
    let mut complexes: Vec<Complex64> = Vec::new();
    for &v in &s.values {
        if v.im.abs() <= PAIRING_TOL * (1.0 + v.re.abs()) {
            real_count += 1;
        } else {
            complexes.push(v);
        }
    }
    let mut used = vec![false; complexes.len()];
    let mut pair_count = 0;
    let mut unpaired = Vec::new();
    for i in 0..complexes.len() {
        if used[i] {
            continue;
        }
        let target = complexes[i].conj();
        let tol = PAIRING_TOL * (1.0 + complexes[i].norm());
        let mut best: Option<(usize, f64)> = None;
        for (j, &c) in complexes.iter().enumerate().skip(i + 1) {
            if used[j] {
                continue;
            }
            let d = (c - target).norm();
            if d <= tol && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                used[i] = true;
                used[j] = true;
                pair_count += 1;
            }
            None => unpaired.push(complexes[i]),
        }
    }
    PairAudit {
        real_count,
        pair_count,
        unpaired,
    }
}

// Parlett–Reinsch balancing (radix 2, no permutations): diagonal
// similarity scaling that roughly equalizes row and column norms.
fn balance(h: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| h[(j, i)].norm())
                .sum();
            let mut r: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| h[(i, j)].norm())
                .sum();
            if c == 0.0 || r == 0.0 || !c.is_finite() || !r.is_finite() {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if c + r < 0.95 * s {
                converged = false;
                for j in 0..n {
                    h[(i, j)] /= f;
                }
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
        if converged {
            return;
        }
    }
}

// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let col_norm = ((k + 1)..n)
            .map(|i| h[(i, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if col_norm == 0.0 {
            continue;
        }
        let a0 = h[(k + 1, k)];
        let phase = if a0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            a0 / a0.norm()
        };
        let alpha = -phase * col_norm;
        let m = n - k - 1;
        let mut v: Vec<Complex64> = (0..m).map(|i| h[(k + 1 + i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // left: rows k+1.., columns k..n
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..m {
                s += v[i].conj() * h[(k + 1 + i, j)];
            }
            s *= beta;
            for i in 0..m {
                let val = s * v[i];
                h[(k + 1 + i, j)] -= val;
            }
        }
        // right: columns k+1.., all rows
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                s += h[(i, k + 1 + j)] * v[j];
            }
            s *= beta;
            for j in 0..m {
                let val = s * v[j].conj();
                h[(i, k + 1 + j)] -= val;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

// Unitary G = [[c, s], [-conj(s), c]] with real c >= 0 and G·[a; b] = [r; 0].
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

// Eigenvalues of the trailing 2x2 block; returns the one closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn two_by_two_eigenvalues(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> (Complex64, Complex64) {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    (half_tr + disc, half_tr - disc)
}

// Explicit single-shift QR step on the active Hessenberg block [lo..=hi]:
// factor H - sigma·I = QR by Givens rotations, then form RQ + sigma·I.
fn qr_sweep(h: &mut DMatrix<Complex64>, lo: usize, hi: usize, sigma: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= sigma;
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        for j in i..=hi {
            let t1 = h[(i, j)];
            let t2 = h[(i + 1, j)];
            h[(i, j)] = c * t1 + s * t2;
            h[(i + 1, j)] = -s.conj() * t1 + c * t2;
        }
        h[(i + 1, i)] = Complex64::new(0.0, 0.0);
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        let top = (i + 1).min(hi);
        for row in lo..=top {
            let t1 = h[(row, i)];
            let t2 = h[(row, i + 1)];
            h[(row, i)] = c * t1 + s.conj() * t2;
            h[(row, i + 1)] = -s * t1 + c * t2;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += sigma;
    }
}

// QR iteration with deflation; returns None if the sweep budget runs out.
fn qr_eigenvalues(mut h: DMatrix<Complex64>, max_sweeps: usize) -> Option<Vec<Complex64>> {
    let n = h.nrows();
    let mut values = Vec::with_capacity(n);
    if n == 1 {
        values.push(h[(0, 0)]);
        return Some(values);
    }
    let global_scale = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let negligible = |h: &DMatrix<Complex64>, i: usize| -> bool {
        let scale = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
        let scale = if scale > 0.0 { scale } else { global_scale };
        h[(i, i - 1)].norm() <= f64::EPSILON * scale
    };

    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut stall = 0usize;
    loop {
        if hi == 0 {
            values.push(h[(0, 0)]);
            return Some(values);
        }
        // top of the active block
        let mut lo = hi;
        while lo > 0 && !negligible(&h, lo) {
            lo -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
        }
        if lo == hi {
            values.push(h[(hi, hi)]);
            hi -= 1;
            stall = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) =
                two_by_two_eigenvalues(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            values.push(l1);
            values.push(l2);
            if lo == 0 {
                return Some(values);
            }
            hi = lo - 1;
            stall = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return None;
        }
        stall += 1;
        let sigma = if stall.is_multiple_of(12) {
            // exceptional shift to break symmetric limit cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, sigma);
    }
}
