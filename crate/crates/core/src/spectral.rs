//! Dense eigenvalues with a trace-power certificate, eigenvector residuals,
//! and spectrum matching.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{vec_norm, Matrix, DIMENSION_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// `max_{k≤4} |Σλᵏ − tr Tᵏ| / (1 + |tr Tᵏ|)`.
    pub certificate: f64,
}

fn to_dmatrix(t: &Matrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |i, j| *t.get(i, j))
}

/// `tr Tᵏ` for `k = 1..4` using a single matrix product.
fn trace_powers(t: &DMatrix<Complex64>) -> [Complex64; 4] {
    let t2 = t * t;
    let pair = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| {
        let n = a.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += a[(i, j)] * b[(j, i)];
            }
        }
        acc
    };
    [t.trace(), t2.trace(), pair(&t2, t), pair(&t2, &t2)]
}

pub fn trace_certificate(t: &Matrix<Complex64>, eigenvalues: &[Complex64]) -> f64 {
    let traces = trace_powers(&to_dmatrix(t));
    (1..=4)
        .map(|k| {
            let sum: Complex64 = eigenvalues.iter().map(|l| l.powi(k as i32)).sum();
            let tr = traces[k - 1];
            (sum - tr).norm() / (1.0 + tr.norm())
        })
        .fold(0.0, f64::max)
}

/// All eigenvalues of a general complex matrix via Hessenberg reduction and
/// shifted QR (Schur form), certified by trace powers.
pub fn eigenvalues(t: &Matrix<Complex64>, tol: f64) -> Result<SpectrumResult> {
    let n = t.dim();
    if n > DIMENSION_CAP {
        return Err(Error::DimensionCap(n, DIMENSION_CAP));
    }
    if n == 0 {
        return Ok(SpectrumResult { eigenvalues: vec![], certificate: 0.0 });
    }
    let m = to_dmatrix(t);
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 1000 * n)
        .ok_or_else(|| Error::NoConvergence(format!("Schur iteration budget exhausted (n = {n})")))?;
    let mut ev: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::NoConvergence("Schur form is not triangular".into()))?
        .iter()
        .copied()
        .collect();
    sort_complex(&mut ev);
    let certificate = trace_certificate(t, &ev);
    if !(certificate <= tol) {
        return Err(Error::NoConvergence(format!(
            "trace-power certificate {certificate:e} exceeds {tol:e}"
        )));
    }
    Ok(SpectrumResult { eigenvalues: ev, certificate })
}

pub fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// `‖T v − λ v‖₂ / ‖v‖₂`.
pub fn eigvec_residual(t: &Matrix<Complex64>, v: &[Complex64], lam: Complex64) -> Result<f64> {
    let norm = vec_norm(v);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let tv = t.apply(v);
    let r: f64 = tv.iter().zip(v).map(|(a, b)| (a - lam * b).norm_sqr()).sum::<f64>().sqrt();
    Ok(r / norm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub bethe: usize,
    pub ed: usize,
    /// `|λ_b − λ_e| / (1 + |λ_e|)`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub matched: Vec<MatchedPair>,
    /// Bethe values with no ED partner: failures.
    pub unmatched_bethe: Vec<usize>,
    /// ED values not produced by any Bethe value: informational.
    pub uncovered_ed: Vec<usize>,
}

impl MatchReport {
    pub fn all_matched(&self) -> bool {
        self.unmatched_bethe.is_empty()
    }

    pub fn distance_for(&self, bethe: usize) -> Option<f64> {
        self.matched.iter().find(|m| m.bethe == bethe).map(|m| m.distance)
    }
}

pub fn relative_distance(a: Complex64, reference: Complex64) -> f64 {
    (a - reference).norm() / (1.0 + reference.norm())
}

/// Greedy minimum-distance pairing; each ED value is consumed at most once.
pub fn spectrum_match(bethe: &[Complex64], ed: &[Complex64], tol: f64) -> MatchReport {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, b) in bethe.iter().enumerate() {
        for (j, e) in ed.iter().enumerate() {
            let d = relative_distance(*b, *e);
            if d <= tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_b = vec![false; bethe.len()];
    let mut used_e = vec![false; ed.len()];
    let mut matched = Vec::new();
    for (d, i, j) in candidates {
        if !used_b[i] && !used_e[j] {
            used_b[i] = true;
            used_e[j] = true;
            matched.push(MatchedPair { bethe: i, ed: j, distance: d });
        }
    }
    matched.sort_by_key(|m| m.bethe);
    MatchReport {
        matched,
        unmatched_bethe: (0..bethe.len()).filter(|&i| !used_b[i]).collect(),
        uncovered_ed: (0..ed.len()).filter(|&j| !used_e[j]).collect(),
    }
}

/// Distance from `value` to the nearest entry of `spectrum`.
pub fn nearest(value: Complex64, spectrum: &[Complex64]) -> Option<(usize, f64)> {
    spectrum
        .iter()
        .enumerate()
        .map(|(j, e)| (j, relative_distance(value, *e)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}
