//! Bethe equations in the three regimes: residuals, analytic Jacobians,
//! multistart damped Newton, and validation against exact diagonalization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{
    a_fn, a_prime, c_fn, c_prime, delta, delta_prime, inhomogeneous_term, int, lambda_bulk,
    lambda_hat, nu, nu_prime, omega, omega_dx, omega_dy, site_polynomial_logderiv, BoundaryParams,
    ChainConfig,
};
use crate::operators::{BetheVariant, Chain, Regime};
use crate::scalar::Scalar;
use crate::spectral::{self, eigvec_residual, nearest, relative_distance, spectrum_match};

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub seed: u64,
    pub starts: usize,
    /// Convergence threshold on the Euclidean residual norm.
    pub newton_tol: f64,
    pub max_iterations: usize,
    /// Root sets closer than this (after optimal pairing) are merged.
    pub dedup_tol: f64,
    /// Minimum distance of any root from the singular set during Newton.
    pub pole_guard: f64,
    /// Radii of the annulus for initial roots.
    pub annulus: (f64, f64),
    /// Converged roots with `|z| > R` or `|z| < 1/R` are discarded: the
    /// equations have asymptotic solutions at `0` and `∞` on which the
    /// Bethe vector degenerates.
    pub escape_radius: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 200,
            newton_tol: 1e-11,
            max_iterations: 100,
            dedup_tol: 1e-7,
            pole_guard: 1e-6,
            annulus: (0.2, 5.0),
            escape_radius: 1e4,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.newton_tol) && pos(self.dedup_tol) && pos(self.pole_guard)) {
            return Err(Error::InvalidParams("solver tolerances must be positive".into()));
        }
        let (lo, hi) = self.annulus;
        if !(pos(lo) && hi.is_finite() && hi >= lo) {
            return Err(Error::InvalidParams(format!("annulus ({lo}, {hi}) needs 0 < r_min <= r_max")));
        }
        if !(self.escape_radius > 1.0) {
            return Err(Error::InvalidParams("escape_radius must exceed 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

// ----------------------------------------------------------------------
// residual, jacobian, eigenvalue

/// Right side of the even-regime equation for root `index`; zero otherwise.
fn rhs<S: Scalar>(regime: Regime, index: usize, z: &[S], p: &BoundaryParams<S>, c: &ChainConfig<S>) -> Result<S> {
    match regime {
        Regime::EvenModified => inhomogeneous_term(index, z, p, c),
        _ => Ok(S::zero()),
    }
}

/// `a(z_p) + ν(z_p) + Σ_{q≠p} ω(z_p, z_q) − (right side)`, `p = 1..M`.
pub fn residual<S: Scalar>(z: &[S], regime: Regime, p: &BoundaryParams<S>, c: &ChainConfig<S>) -> Result<Vec<S>> {
    guard_roots(z, p, c, 0.0)?;
    z.iter()
        .enumerate()
        .map(|(i, zp)| {
            let mut acc = a_fn(zp, c)? + nu(zp, p)?;
            for (j, zq) in z.iter().enumerate() {
                if j != i {
                    acc = acc + omega(zp, zq)?;
                }
            }
            Ok(acc - rhs(regime, i, z, p, c)?)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(into_guard)
}

/// Analytic `∂ residual_p / ∂ z_q`, row-major `M × M`.
pub fn jacobian<S: Scalar>(
    z: &[S],
    regime: Regime,
    p: &BoundaryParams<S>,
    c: &ChainConfig<S>,
) -> Result<Vec<Vec<S>>> {
    guard_roots(z, p, c, 0.0)?;
    let m = z.len();
    let mut jac = vec![vec![S::zero(); m]; m];
    let mut inner = || -> Result<()> {
        for i in 0..m {
            let zp = &z[i];
            let mut diag = a_prime(zp, c)? + nu_prime(zp, p)?;
            for j in 0..m {
                if j != i {
                    diag = diag + omega_dx(zp, &z[j])?;
                    jac[i][j] = omega_dy(zp, &z[j])?;
                }
            }
            jac[i][i] = diag;
            if regime != Regime::EvenModified {
                continue;
            }
            let r = rhs(regime, i, z, p, c)?;
            if r.is_zero() {
                continue;
            }
            // log-derivative of (L̄+1)c(z)/(4z) · α(L̄+1)P(z)/(δ(z)(z−1/z)) · Π 1/((z−z_q)(z−1/z_q))
            let zinv = zp.recip();
            let mut logd = c_prime(zp, p)? / c_fn(zp, p)? - zinv.clone() + site_polynomial_logderiv(zp, c)?
                - delta_prime(zp, p)? / delta(zp, p)?
                - (S::one() + zinv.square()) / (zp.clone() - zinv.clone());
            for j in 0..m {
                if j != i {
                    let d1 = zp.clone() - z[j].clone();
                    let d2 = zp.clone() - z[j].recip();
                    logd = logd - d1.recip() - d2.recip();
                    let dq = d1.recip() - (z[j].square() * d2).recip();
                    jac[i][j] = jac[i][j].clone() - r.clone() * dq;
                }
            }
            jac[i][i] = jac[i][i].clone() - r * logd;
        }
        Ok(())
    };
    inner().map_err(into_guard)?;
    Ok(jac)
}

/// Transfer-matrix eigenvalue carried by the roots:
/// `λ(x) + Σ_p ω(x,z_p)(a(x) + ν(x) + Σ_{q≠p}(x−1/x)ω(z_p,z_q)/(z_p−1/z_p))`,
/// minus `(L̄+1)/2 · c(x) λ̂(x)` in the even regime.
pub fn eigenvalue<S: Scalar>(
    x: &S,
    z: &[S],
    regime: Regime,
    p: &BoundaryParams<S>,
    c: &ChainConfig<S>,
) -> Result<S> {
    let ax = a_fn(x, c)? + nu(x, p)?;
    let xinv = x.clone() - x.recip();
    let mut acc = lambda_bulk(x, p, c)?;
    for (i, zp) in z.iter().enumerate() {
        let mut inner = ax.clone();
        for (j, zq) in z.iter().enumerate() {
            if j != i {
                inner = inner + xinv.clone() * omega(zp, zq)? / (zp.clone() - zp.recip());
            }
        }
        acc = acc + omega(x, zp)? * inner;
    }
    if regime == Regime::EvenModified {
        let lb1 = int::<S>(c.lbar() as i64 + 1);
        acc = acc - lb1 * S::ratio(1, 2) * c_fn(x, p)? * lambda_hat(x, z, p, c)?;
    }
    Ok(acc)
}

fn into_guard(e: Error) -> Error {
    match e {
        Error::PoleCollision(m) | Error::ZeroDelta(m) => Error::PoleGuardViolation(m),
        other => other,
    }
}

/// Points that no root may approach: `0, ±1, v_j, 1/v_j`, zeros of `δ(z)`
/// and `δ(1/z)`.
fn fixed_singularities<S: Scalar>(p: &BoundaryParams<S>, c: &ChainConfig<S>) -> Vec<C> {
    let mut pts = vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(-1.0, 0.0)];
    for v in c.inhomogeneities() {
        let v = v.to_complex();
        pts.push(v);
        pts.push(v.inv());
    }
    let (b, g, r) = (p.beta.to_complex(), p.gamma.to_complex(), p.rho.to_complex());
    pts.extend(quadratic_roots(b - r, 2.0 * g, r + b));
    pts.extend(quadratic_roots(r + b, 2.0 * g, b - r));
    pts
}

pub(crate) fn quadratic_roots(a: C, b: C, c: C) -> Vec<C> {
    if a.norm() == 0.0 {
        return if b.norm() == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    vec![(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
}

/// Rejects roots within `radius` of a singularity or of each other (or of
/// each other's inverse). `radius = 0` only rejects exact hits.
pub fn guard_roots<S: Scalar>(z: &[S], p: &BoundaryParams<S>, c: &ChainConfig<S>, radius: f64) -> Result<()> {
    let hits = |d: C| if S::EXACT { d.norm() == 0.0 && radius == 0.0 } else { d.norm() <= radius.max(crate::scalar::FLOAT_POLE_EPS) };
    let exact_zero = |s: S| S::EXACT && s.is_zero();
    let fixed = fixed_singularities(p, c);
    for (i, zp) in z.iter().enumerate() {
        let zc = zp.to_complex();
        if !zc.is_finite() {
            return Err(Error::PoleGuardViolation(format!("root {i} is not finite")));
        }
        if !S::EXACT {
            if let Some(w) = fixed.iter().find(|w| hits(zc - **w)) {
                return Err(Error::PoleGuardViolation(format!("root {zc} within {radius:e} of singular point {w}")));
            }
        }
        for zq in &z[i + 1..] {
            let d1 = zp.clone() - zq.clone();
            let d2 = zp.clone() * zq.clone() - S::one();
            if exact_zero(d1.clone()) || exact_zero(d2.clone()) || hits(d1.to_complex()) || hits(d2.to_complex() / zq.to_complex()) {
                return Err(Error::PoleGuardViolation(format!("roots {zp} and {zq} collide")));
            }
        }
    }
    Ok(())
}

// ----------------------------------------------------------------------
// Newton

fn norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

const DIVERGENCE: f64 = 1e8;
const MAX_HALVINGS: usize = 20;

/// Outcome of one Newton run.
#[derive(Debug, Clone, PartialEq)]
pub enum NewtonOutcome {
    Converged { roots: Vec<C>, residual: f64, iterations: usize },
    Failed(String),
}

/// Damped Newton from `z0`: each step is halved up to 20 times until the
/// residual norm decreases.
pub fn newton(
    z0: Vec<C>,
    regime: Regime,
    p: &BoundaryParams<C>,
    c: &ChainConfig<C>,
    cfg: &SolveConfig,
) -> NewtonOutcome {
    let eval = |z: &[C]| -> Result<Vec<C>> {
        guard_roots(z, p, c, cfg.pole_guard)?;
        residual(z, regime, p, c)
    };
    let mut z = z0;
    let mut r = match eval(&z) {
        Ok(r) => r,
        Err(e) => return NewtonOutcome::Failed(e.to_string()),
    };
    let mut rn = norm(&r);
    let m = z.len();
    for it in 0..=cfg.max_iterations {
        if rn <= cfg.newton_tol {
            // one polishing step, kept only if it helps
            if let Some((z2, r2)) = newton_step(&z, &r, regime, p, c).ok().and_then(|z2| eval(&z2).ok().map(|r2| (z2, r2))) {
                if norm(&r2) < rn {
                    rn = norm(&r2);
                    z = z2;
                }
            }
            if let Some(w) = z.iter().find(|w| !(w.norm() <= cfg.escape_radius && w.norm() * cfg.escape_radius >= 1.0)) {
                return NewtonOutcome::Failed(format!("root escaped to {}", if w.norm() > 1.0 { "infinity" } else { "zero" }));
            }
            return NewtonOutcome::Converged { roots: z, residual: rn, iterations: it };
        }
        if it == cfg.max_iterations {
            break;
        }
        if !rn.is_finite() || rn > DIVERGENCE {
            return NewtonOutcome::Failed(format!("diverged (residual {rn:e})"));
        }
        let step = match newton_direction(&z, &r, regime, p, c) {
            Ok(s) => s,
            Err(e) => return NewtonOutcome::Failed(e.to_string()),
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<C> = (0..m).map(|k| z[k] - step[k] * t).collect();
            if let Ok(rt) = eval(&trial) {
                let nt = norm(&rt);
                if nt < rn {
                    z = trial;
                    r = rt;
                    rn = nt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return NewtonOutcome::Failed(format!("line search stalled at residual {rn:e}"));
        }
    }
    NewtonOutcome::Failed(format!("no convergence after {} iterations (residual {rn:e})", cfg.max_iterations))
}

fn newton_direction(z: &[C], r: &[C], regime: Regime, p: &BoundaryParams<C>, c: &ChainConfig<C>) -> Result<Vec<C>> {
    let m = z.len();
    let jac = jacobian(z, regime, p, c)?;
    let jm = DMatrix::from_fn(m, m, |i, j| jac[i][j]);
    let rv = DVector::from_column_slice(r);
    let sol = jm
        .lu()
        .solve(&rv)
        .ok_or_else(|| Error::NoConvergence("singular Jacobian".into()))?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence("singular Jacobian".into()));
    }
    Ok(sol.iter().copied().collect())
}

fn newton_step(z: &[C], r: &[C], regime: Regime, p: &BoundaryParams<C>, c: &ChainConfig<C>) -> Result<Vec<C>> {
    let d = newton_direction(z, r, regime, p, c)?;
    Ok(z.iter().zip(d).map(|(a, b)| a - b).collect())
}

/// Initial roots: modulus log-uniform in the annulus, uniform phase.
pub fn initial_roots(rng: &mut ChaCha8Rng, m: usize, annulus: (f64, f64)) -> Vec<C> {
    let (lo, hi) = (annulus.0.ln(), annulus.1.ln());
    (0..m)
        .map(|_| {
            let r = if hi > lo { rng.gen_range(lo..hi).exp() } else { annulus.0 };
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            C::from_polar(r, phi)
        })
        .collect()
}

// ----------------------------------------------------------------------
// solutions

#[derive(Debug, Clone, PartialEq)]
pub struct BetheSolution {
    pub regime: Regime,
    /// Sorted by (real, imaginary).
    pub roots: Vec<C>,
    pub residual: f64,
    /// Lowest start index that reached this solution.
    pub start: usize,
    /// Number of starts that converged to it.
    pub hits: usize,
    /// Root sets related by `z_p → 1/z_p` merged into this one.
    pub inversion_merged: usize,
}

impl BetheSolution {
    pub fn eigenvalue(&self, x: &C, p: &BoundaryParams<C>, c: &ChainConfig<C>) -> Result<C> {
        eigenvalue(x, &self.roots, self.regime, p, c)
    }

    /// Right sides of the even-regime equations (zero elsewhere).
    pub fn inhomogeneous_terms(&self, p: &BoundaryParams<C>, c: &ChainConfig<C>) -> Result<Vec<C>> {
        (0..self.roots.len()).map(|i| rhs(self.regime, i, &self.roots, p, c)).collect()
    }
}

pub fn canonicalize(z: &mut [C]) {
    spectral::sort_complex(z);
}

/// Multiset equality within `tol` under greedy nearest pairing.
pub fn same_root_set(a: &[C], b: &[C], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|u, v| u.1.total_cmp(&v.1));
        match best {
            Some((j, d)) if d <= tol * (1.0 + x.norm()) => used[j] = true,
            _ => return false,
        }
    }
    true
}

/// `b` is `a` with some roots inverted (at least one).
fn related_by_inversion(a: &[C], b: &[C], tol: f64) -> bool {
    if a.len() != b.len() || same_root_set(a, b, tol) {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let found = b.iter().enumerate().find(|(j, y)| {
            !used[*j] && ((x - *y).norm() <= tol * (1.0 + x.norm()) || (x.inv() - *y).norm() <= tol * (1.0 + y.norm()))
        });
        match found {
            Some((j, _)) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Multistart solve. Starts run in parallel; deduplication walks the
/// results in start order so the output is independent of scheduling.
/// `test_points` decide when inversion-related root sets are merged.
pub fn solve(
    regime: Regime,
    m: usize,
    p: &BoundaryParams<C>,
    c: &ChainConfig<C>,
    cfg: &SolveConfig,
    test_points: &[C],
) -> Result<Vec<BetheSolution>> {
    cfg.validate()?;
    if let Some(forced) = regime.admissible(p, c)? {
        if forced as usize != m {
            return Err(Error::RegimeMismatch(format!("{} regime needs M = {forced}, got {m}", regime.name())));
        }
    } else if m > c.lbar() as usize {
        return Err(Error::RegimeMismatch(format!("M = {m} exceeds Lbar = {}", c.lbar())));
    }
    if m == 0 {
        let r = residual(&[], regime, p, c)?;
        return Ok(vec![BetheSolution {
            regime,
            roots: vec![],
            residual: norm(&r),
            start: 0,
            hits: 1,
            inversion_merged: 0,
        }]);
    }
    let outcomes: Vec<NewtonOutcome> = (0..cfg.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            newton(initial_roots(&mut rng, m, cfg.annulus), regime, p, c, cfg)
        })
        .collect();
    let mut sols: Vec<BetheSolution> = Vec::new();
    for (k, out) in outcomes.into_iter().enumerate() {
        let NewtonOutcome::Converged { mut roots, residual, .. } = out else { continue };
        canonicalize(&mut roots);
        if let Some(s) = sols.iter_mut().find(|s| same_root_set(&s.roots, &roots, cfg.dedup_tol)) {
            s.hits += 1;
            continue;
        }
        sols.push(BetheSolution { regime, roots, residual, start: k, hits: 1, inversion_merged: 0 });
    }
    // merge inversion partners whose eigenvalues agree at every test point
    let mut merged: Vec<BetheSolution> = Vec::new();
    for s in sols {
        let partner = merged.iter_mut().find(|t| {
            related_by_inversion(&t.roots, &s.roots, cfg.dedup_tol)
                && !test_points.is_empty()
                && test_points.iter().all(|x| match (t.eigenvalue(x, p, c), s.eigenvalue(x, p, c)) {
                    (Ok(a), Ok(b)) => relative_distance(a, b) <= cfg.dedup_tol,
                    _ => false,
                })
        });
        match partner {
            Some(t) => {
                t.inversion_merged += 1;
                t.hits += s.hits;
            }
            None => merged.push(s),
        }
    }
    merged.sort_by(|a, b| {
        for (x, y) in a.roots.iter().zip(&b.roots) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(merged)
}

// ----------------------------------------------------------------------
// validation

/// Data at one test point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub x: C,
    pub eigenvalue: C,
    /// `‖t v − Λ v‖ / ‖v‖` for the plain Bethe vector; `None` when it vanishes.
    pub residual: Option<f64>,
    /// Same for the conjugate vector (odd regime only).
    pub conjugate_residual: Option<f64>,
    /// Nearest ED eigenvalue and its relative distance.
    pub ed_index: usize,
    pub ed_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub points: Vec<PointCheck>,
    pub eigvec_tol: f64,
    pub match_tol: f64,
}

impl ValidationReport {
    /// Eigenvalue matches ED at every point.
    pub fn eigenvalue_matched(&self) -> bool {
        self.points.iter().all(|p| p.ed_distance <= self.match_tol)
    }

    /// The plain Bethe vector is a nonzero eigenvector at every point.
    pub fn vector_validated(&self) -> bool {
        self.points.iter().all(|p| p.residual.is_some_and(|r| r <= self.eigvec_tol))
    }

    pub fn conjugate_validated(&self) -> bool {
        self.points.iter().all(|p| p.conjugate_residual.is_some_and(|r| r <= self.eigvec_tol))
    }

    pub fn passed(&self) -> bool {
        self.eigenvalue_matched() && self.vector_validated()
    }

    pub fn worst_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual.unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    pub fn worst_distance(&self) -> f64 {
        self.points.iter().map(|p| p.ed_distance).fold(0.0, f64::max)
    }
}

/// ED spectra of `t(x)` at each test point.
pub fn ed_spectra(chain: &Chain<C>, xs: &[C], cert_tol: f64) -> Result<Vec<Vec<C>>> {
    xs.iter()
        .map(|x| Ok(spectral::eigenvalues(&chain.transfer(x, 0)?, cert_tol)?.eigenvalues))
        .collect()
}

/// Builds the Bethe vector (and the conjugate one in the odd regime) and
/// checks it against `t(x)` and the ED spectrum at each test point.
pub fn validate_solution(
    sol: &BetheSolution,
    chain: &Chain<C>,
    xs: &[C],
    spectra: &[Vec<C>],
    eigvec_tol: f64,
    match_tol: f64,
) -> Result<ValidationReport> {
    let (p, c) = (chain.params(), chain.config());
    let v = chain.bethe_vector(&sol.roots, &BetheVariant::Plain)?;
    let vbar = match sol.regime {
        Regime::OddSector => Some(chain.bethe_vector(&sol.roots, &BetheVariant::Conjugate)?),
        _ => None,
    };
    let mut points = Vec::new();
    for (x, ed) in xs.iter().zip(spectra) {
        let lam = sol.eigenvalue(x, p, c)?;
        let t = chain.transfer(x, 0)?;
        let res = |w: &[C]| match eigvec_residual(&t, w, lam) {
            Ok(r) => Ok(Some(r / (1.0 + lam.norm()))),
            Err(Error::ZeroVector) => Ok(None),
            Err(e) => Err(e),
        };
        let residual = if vanishes(&v) { None } else { res(&v)? };
        let conjugate_residual = match &vbar {
            Some(w) if !vanishes(w) => res(w)?,
            _ => None,
        };
        let (ed_index, ed_distance) = nearest(lam, ed).unwrap_or((0, f64::INFINITY));
        points.push(PointCheck { x: *x, eigenvalue: lam, residual, conjugate_residual, ed_index, ed_distance });
    }
    Ok(ValidationReport { points, eigvec_tol, match_tol })
}

/// A Bethe vector counts as vanishing when all entries are below `1e-12`
/// relative to the largest root-independent scale (the vacuum entry 1).
fn vanishes(v: &[C]) -> bool {
    v.iter().all(|x| x.norm() < 1e-12)
}

/// How much of the ED spectrum at one test point the given eigenvalues
/// reproduce. `matched` consumes one ED eigenvalue per Bethe eigenvalue;
/// the `distinct` counts ignore multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub matched: usize,
    pub total: usize,
    pub distinct_matched: usize,
    pub distinct_total: usize,
}

impl Coverage {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 { 1.0 } else { self.matched as f64 / self.total as f64 }
    }
}

pub fn coverage(eigenvalues: &[C], ed: &[C], tol: f64) -> Coverage {
    let rep = spectrum_match(eigenvalues, ed, tol);
    let mut distinct: Vec<C> = Vec::new();
    for e in ed {
        if !distinct.iter().any(|d| relative_distance(*e, *d) <= tol) {
            distinct.push(*e);
        }
    }
    let hit = distinct
        .iter()
        .filter(|d| eigenvalues.iter().any(|b| relative_distance(*b, **d) <= tol))
        .count();
    Coverage { matched: rep.matched.len(), total: ed.len(), distinct_matched: hit, distinct_total: distinct.len() }
}
