//! Verification of the algebraic identities of the model at random rational
//! points.
//!
//! Every check reduces to comparing two lists of scalars. In the rational
//! backend a check passes only if every difference is literally zero; in the
//! float backend the relative deviation must stay below [`FLOAT_TOL`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{
    self, a_fn, b_c_fns, c_fn, delta, f_fn, int, lambda_bulk, lambda_hat, lambda_hat_residue, nu,
    omega, site_polynomial, BoundaryParams, ChainConfig,
};
use crate::matrix::{embed_two, vec_scale, vec_sub, Matrix, StateVector};
use crate::operators::{
    flip, k_matrix, r_bar, r_matrix, r_tilde_conjugated, r_tilde_explicit,
    BetheRoots, BetheVariant, Chain, Regime,
};
use crate::sampling::Sampler;
use crate::scalar::{fmt_f64, Rational, Scalar};

/// Relative tolerance for identity checks in the float backend.
pub const FLOAT_TOL: f64 = 1e-8;

/// Tolerance of the numerically extracted residue of `t(x)`.
pub const RESIDUE_TOL: f64 = 1e-6;

pub const YANG_BAXTER_TRIALS: usize = 20;
pub const COMMUTATION_TRIALS: usize = 10;
pub const OFFSHELL_TRIALS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub trials: usize,
    /// Largest deviation seen (absolute for exact, relative for float).
    pub worst: f64,
    /// Sample point of the first failing trial.
    pub witness: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub seed: u64,
    pub backend: &'static str,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    fn new<S: Scalar>(seed: u64, checks: Vec<CheckResult>) -> Self {
        Self { seed, backend: backend_name::<S>(), checks }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.checks.extend(other.checks);
        self
    }

    /// One `key=value` line per check, preceded by a summary line.
    pub fn to_text(&self) -> String {
        let failed = self.failures().len();
        let mut out = format!(
            "seed={} backend={} checks={} failed={}\n",
            self.seed,
            self.backend,
            self.checks.len(),
            failed
        );
        for c in &self.checks {
            out.push_str(&format!(
                "check={} status={} trials={} deviation={} witness={}",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.trials,
                fmt_f64(c.worst),
                c.witness.as_deref().unwrap_or("-"),
            ));
            if let Some(n) = &c.note {
                out.push_str(&format!(" note={n}"));
            }
            out.push('\n');
        }
        out
    }
}

fn backend_name<S: Scalar>() -> &'static str {
    if S::EXACT { "exact" } else { "float" }
}

/// Left and right sides of an identity, flattened.
#[derive(Debug, Clone)]
pub struct Comparison<S> {
    lhs: Vec<S>,
    rhs: Vec<S>,
    witness: String,
}

impl<S: Scalar> Comparison<S> {
    pub fn new(witness: impl Into<String>) -> Self {
        Self { lhs: Vec::new(), rhs: Vec::new(), witness: witness.into() }
    }

    pub fn matrix(mut self, lhs: &Matrix<S>, rhs: &Matrix<S>) -> Self {
        self.lhs.extend_from_slice(lhs.entries());
        self.rhs.extend_from_slice(rhs.entries());
        self
    }

    pub fn vector(mut self, lhs: &[S], rhs: &[S]) -> Self {
        self.lhs.extend_from_slice(lhs);
        self.rhs.extend_from_slice(rhs);
        self
    }

    pub fn scalar(mut self, lhs: S, rhs: S) -> Self {
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self
    }

    pub fn zeros(mut self, entries: impl IntoIterator<Item = S>) -> Self {
        for e in entries {
            self.lhs.push(e);
            self.rhs.push(S::zero());
        }
        self
    }

    fn bump(&mut self) {
        if let Some(first) = self.lhs.first_mut() {
            *first = first.clone() + S::one();
        } else {
            self.lhs.push(S::one());
            self.rhs.push(S::zero());
        }
    }

    /// `(holds, deviation)`.
    pub fn deviation(&self) -> (bool, f64) {
        let mut worst = 0.0f64;
        let mut exact = true;
        let mut scale = 1.0f64;
        for (l, r) in self.lhs.iter().zip(&self.rhs) {
            let d = l.clone() - r.clone();
            if !d.is_zero() {
                exact = false;
            }
            worst = worst.max(d.magnitude());
            scale = scale.max(l.magnitude()).max(r.magnitude());
        }
        if S::EXACT {
            (exact, worst)
        } else {
            let rel = worst / scale;
            (rel <= FLOAT_TOL, rel)
        }
    }
}

fn q<S: Scalar>(r: &Rational) -> S {
    S::from_rational(r)
}

fn fmt_params(p: &BoundaryParams<Rational>) -> String {
    format!("(alpha={},beta={},gamma={},rho={})", p.alpha, p.beta, p.gamma, p.rho)
}

fn fmt_list(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(";"))
}

/// Runs the checks with a fixed seed. Each check draws from its own stream
/// `seed + index`, so results do not depend on execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verifier {
    pub seed: u64,
    /// Adds one to the first left-hand entry of every comparison; every
    /// check must then fail.
    pub perturb: bool,
}

impl Verifier {
    pub fn new(seed: u64) -> Self {
        Self { seed, perturb: false }
    }

    pub fn perturbed(self) -> Self {
        Self { perturb: true, ..self }
    }

    fn run<S: Scalar>(
        &self,
        name: &str,
        stream: u64,
        trials: usize,
        mut trial: impl FnMut(&mut Sampler) -> Result<Comparison<S>>,
    ) -> CheckResult {
        let mut smp = Sampler::new(self.seed, stream);
        let mut result = CheckResult {
            name: name.to_string(),
            pass: true,
            trials: 0,
            worst: 0.0,
            witness: None,
            note: None,
        };
        for _ in 0..trials {
            result.trials += 1;
            match smp.redraw(&mut trial) {
                Ok(mut cmp) => {
                    if self.perturb {
                        cmp.bump();
                    }
                    let (ok, dev) = cmp.deviation();
                    result.worst = result.worst.max(dev);
                    if !ok {
                        result.pass = false;
                        result.witness.get_or_insert(cmp.witness);
                    }
                }
                Err(e) => {
                    result.pass = false;
                    result.worst = f64::INFINITY;
                    result.witness.get_or_insert(format!("error: {e}"));
                }
            }
        }
        result
    }

    /// A negative control: passes only if the identity is violated in
    /// every trial.
    fn run_control<S: Scalar>(
        &self,
        name: &str,
        stream: u64,
        trials: usize,
        trial: impl FnMut(&mut Sampler) -> Result<Comparison<S>>,
    ) -> CheckResult {
        let mut trial = trial;
        let mut smp = Sampler::new(self.seed, stream);
        let mut result = CheckResult {
            name: name.to_string(),
            pass: true,
            trials: 0,
            worst: f64::INFINITY,
            witness: None,
            note: None,
        };
        for _ in 0..trials {
            result.trials += 1;
            match smp.redraw(&mut trial) {
                Ok(cmp) => {
                    let (holds, dev) = cmp.deviation();
                    // smallest violation seen: how clearly the control fires
                    result.worst = result.worst.min(dev);
                    if holds {
                        result.pass = false;
                        result.witness.get_or_insert(cmp.witness);
                    }
                }
                Err(e) => {
                    result.pass = false;
                    result.witness.get_or_insert(format!("error: {e}"));
                }
            }
        }
        if self.perturb {
            result.pass = false;
        }
        result.note = Some(if result.pass {
            "perturbation detected in every trial".into()
        } else {
            "perturbation NOT detected".into()
        });
        result
    }

    // ------------------------------------------------------------------
    // r-matrices and the reflection equation

    /// CYBE for `r`, `r̄`, `r̃`; skew-symmetry of `r`; reflection equation for
    /// `k`; agreement of the two constructions of `r̃` and its block shape.
    /// With `p = None` every trial draws fresh generic boundary parameters.
    pub fn yang_baxter_family<S: Scalar>(
        &self,
        p: Option<&BoundaryParams<Rational>>,
        trials: usize,
    ) -> VerificationReport {
        let draw = |s: &mut Sampler| match p {
            Some(p) => p.clone(),
            None => s.generic_params(),
        };
        let gauge_ok = p.map_or(true, |p| !p.alpha.is_zero_rational());
        let mut checks = vec![self.run::<S>("cybe.r", 0, trials, |s| {
            let x = s.rationals(3);
            let (l, r) = cybe(|a: &S, b: &S| r_matrix(&(a.clone() / b.clone())), &x)?;
            Ok(Comparison::new(format!("x={}", fmt_list(&x))).matrix(&l, &r))
        })];
        checks.push(self.run::<S>("skew.r", 1, trials, |s| {
            let (x, y) = (s.rational(), s.rational());
            let (xs, ys) = (q::<S>(&x), q::<S>(&y));
            let r = r_matrix(&(xs.clone() / ys.clone()))?;
            let rinv = r_matrix(&(ys / xs))?;
            Ok(Comparison::new(format!("x={x} y={y}"))
                .matrix(&r, &flip(&rinv).scale(&-S::one()))
                .matrix(&r, &rinv.transpose().scale(&-S::one())))
        }));
        if gauge_ok {
            checks.push(self.run::<S>("reflection.k", 2, trials, |s| {
                let p = draw(s);
                let (x, y) = (s.rational(), s.rational());
                let (l, r) = reflection(&q::<S>(&x), &q::<S>(&y), &p.map(q::<S>), |z, p| k_matrix(z, p))?;
                Ok(Comparison::new(format!("x={x} y={y} p={}", fmt_params(&p))).matrix(&l, &r))
            }));
            checks.push(self.run::<S>("cybe.r_bar", 3, trials, |s| {
                let p = draw(s);
                let x = s.rationals(3);
                let ps = p.map(q::<S>);
                let (l, r) = cybe(|a: &S, b: &S| r_bar(a, b, &ps), &x)?;
                Ok(Comparison::new(format!("x={} p={}", fmt_list(&x), fmt_params(&p))).matrix(&l, &r))
            }));
        }
        checks.push(self.run::<S>("cybe.r_tilde", 4, trials, |s| {
            let p = draw(s);
            let x = s.rationals(3);
            let ps = p.map(q::<S>);
            let (l, r) = cybe(|a: &S, b: &S| r_tilde_explicit(a, b, &ps), &x)?;
            Ok(Comparison::new(format!("x={} p={}", fmt_list(&x), fmt_params(&p))).matrix(&l, &r))
        }));
        if gauge_ok {
            checks.push(self.run::<S>("r_tilde.dual_construction", 5, trials, |s| {
                let p = draw(s);
                let (x, y) = (s.rational(), s.rational());
                let ps = p.map(q::<S>);
                let (xs, ys) = (q::<S>(&x), q::<S>(&y));
                let explicit = r_tilde_explicit(&xs, &ys, &ps)?;
                let conj = r_tilde_conjugated(&xs, &ys, &ps)?;
                Ok(Comparison::new(format!("x={x} y={y} p={}", fmt_params(&p))).matrix(&explicit, &conj))
            }));
            checks.push(self.run::<S>("r_tilde.block_shape", 6, trials, |s| {
                let p = draw(s);
                let (x, y) = (s.rational(), s.rational());
                let ps = p.map(q::<S>);
                let (xs, ys) = (q::<S>(&x), q::<S>(&y));
                let conj = r_tilde_conjugated(&xs, &ys, &ps)?;
                let half_w = S::ratio(1, 2) * omega(&xs, &ys)?;
                let zeros = R_TILDE_ZEROS.iter().map(|&(i, j)| conj.get(i, j).clone());
                Ok(Comparison::new(format!("x={x} y={y} p={}", fmt_params(&p)))
                    .zeros(zeros)
                    .vector(
                        &[0, 1, 2, 3].map(|i| conj.get(i, i).clone()),
                        &[-half_w.clone(), half_w.clone(), half_w.clone(), -half_w],
                    ))
            }));
        } else {
            checks.push(skipped("reflection.k", "alpha = 0: k-matrix undefined"));
            checks.push(skipped("r_tilde.dual_construction", "alpha = 0: gauge matrix undefined"));
        }
        VerificationReport::new::<S>(self.seed, checks)
    }

    // ------------------------------------------------------------------
    // scalar functional relations

    pub fn functional_relations<S: Scalar>(
        &self,
        p: Option<&BoundaryParams<Rational>>,
        trials: usize,
    ) -> VerificationReport {
        let base = 100;
        let draw = |s: &mut Sampler| match p {
            Some(p) => p.clone(),
            None => s.generic_params(),
        };
        let mut checks = Vec::new();
        checks.push(self.run::<S>("omega.inversion", base, trials, |s| {
            let (x, y) = (s.rational(), s.rational());
            let (xs, ys) = (q::<S>(&x), q::<S>(&y));
            Ok(Comparison::new(format!("x={x} y={y}"))
                .scalar(omega(&xs.recip(), &ys.recip())?, -omega(&xs, &ys)?))
        }));
        checks.push(self.run::<S>("scalar.omega_f_square", base + 1, trials, |s| {
            let p = draw(s);
            let (x, z) = (s.rational(), s.rational());
            let ps = p.map(q::<S>);
            let (xs, zs) = (q::<S>(&x), q::<S>(&z));
            let w = omega(&xs, &zs)?;
            let lhs = w.square() + f_fn(&zs, &xs, &ps)? * f_fn(&zs.recip(), &xs.recip(), &ps)?;
            let (b, c) = b_c_fns(&xs, &ps)?;
            let rhs = int::<S>(2) * nu(&xs, &ps)? * w + int::<S>(4) * b * c;
            Ok(Comparison::new(format!("x={x} z={z} p={}", fmt_params(&p))).scalar(lhs, rhs))
        }));
        checks.push(self.run::<S>("scalar.omega_f_cross", base + 2, trials, |s| {
            let p = draw(s);
            let (x, z) = (s.rational(), s.rational());
            let ps = p.map(q::<S>);
            let (xs, zs) = (q::<S>(&x), q::<S>(&z));
            let f_inv = f_fn(&zs.recip(), &xs.recip(), &ps)?;
            let lhs = omega(&zs, &xs)? * f_inv.clone() + omega(&xs, &zs)? * f_fn(&xs, &zs, &ps)?;
            let rhs = int::<S>(2) * nu(&zs, &ps)? * f_inv
                - int::<S>(4) * c_fn(&xs, &ps)? * kernel::b_fn(&zs, &ps)?;
            Ok(Comparison::new(format!("x={x} z={z} p={}", fmt_params(&p))).scalar(lhs, rhs))
        }));
        checks.push(self.run::<S>("scalar.unwanted_pair", base + 3, trials, |s| {
            let p = draw(s);
            let (x, zp, zq) = (s.rational(), s.rational(), s.rational());
            let ps = p.map(q::<S>);
            let (xs, a, b) = (q::<S>(&x), q::<S>(&zp), q::<S>(&zq));
            let lhs = omega(&xs, &a)? * f_fn(&xs, &b, &ps)?
                - f_fn(&a.recip(), &xs.recip(), &ps)? * f_fn(&a, &b, &ps)?;
            let rhs = omega(&b, &a)? * f_fn(&b.recip(), &xs.recip(), &ps)?
                - int::<S>(4) * c_fn(&xs, &ps)? * kernel::b_fn(&b, &ps)?;
            Ok(Comparison::new(format!("x={x} zp={zp} zq={zq} p={}", fmt_params(&p))).scalar(lhs, rhs))
        }));
        checks.push(self.run::<S>("scalar.omega_triple_sum", base + 4, trials, |s| {
            let x = s.rational();
            let z = s.rationals(3);
            let xs = q::<S>(&x);
            let zs: Vec<S> = z.iter().map(q::<S>).collect();
            let mut lhs = S::zero();
            let mut rhs = S::zero();
            for (i, a) in zs.iter().enumerate() {
                for (j, b) in zs.iter().enumerate() {
                    if j > i {
                        lhs = lhs + omega(&xs, a)? * omega(&xs, b)?;
                    }
                    if j != i {
                        rhs = rhs + (xs.clone() - xs.recip()) / (a.clone() - a.recip())
                            * omega(a, b)?
                            * omega(&xs, a)?;
                    }
                }
            }
            Ok(Comparison::new(format!("x={x} z={}", fmt_list(&z))).scalar(lhs, rhs))
        }));
        checks.push(self.run::<S>("prebethe.relation", base + 5, trials, |s| {
            let p = draw(s);
            let (x, z) = (s.rational(), s.rational());
            let lbar = s.int_range(1, 6);
            let ps = p.map(q::<S>);
            let (xs, zs) = (q::<S>(&x), q::<S>(&z));
            let l1 = int::<S>(lbar + 1);
            let den = int::<S>(2)
                * f_fn(&zs.recip(), &xs.recip(), &ps)?
                * (zs.clone() - xs.clone())
                * (zs.clone() - xs.recip());
            guard_nonzero(&den, "f(1/z,1/x)(z-x)(z-1/x)")?;
            let lhs = -(l1.clone() * (zs.clone() - zs.recip()) * c_fn(&xs, &ps)?) / den;
            let rhs = l1 * c_fn(&zs, &ps)? / (int::<S>(4) * zs);
            Ok(Comparison::new(format!("x={x} z={z} lbar={lbar} p={}", fmt_params(&p))).scalar(lhs, rhs))
        }));
        checks.push(self.run::<S>("nu.triangular_reduction", base + 6, trials, |s| {
            let p = s.triangular_params();
            let z = s.rational();
            let ps = p.map(q::<S>);
            let zs = q::<S>(&z);
            let (b, g) = (ps.beta.clone(), ps.gamma.clone());
            let d1 = g.clone() * zs.clone() + b.clone();
            let d2 = b.clone() * zs.clone() + g.clone();
            guard_nonzero(&d1, "gamma z + beta")?;
            guard_nonzero(&d2, "beta z + gamma")?;
            let rhs = S::ratio(1, 2)
                * ((g * zs.clone() - b.clone()) / d1 + (b * zs.clone() - ps.gamma.clone()) / d2);
            Ok(Comparison::new(format!("z={z} p={}", fmt_params(&p))).scalar(nu(&zs, &ps)?, rhs))
        }));
        VerificationReport::new::<S>(self.seed, checks)
    }

    // ------------------------------------------------------------------
    // commutation relations on a chain

    pub fn commutation_relations<S: Scalar>(
        &self,
        p: &BoundaryParams<Rational>,
        c: &ChainConfig<Rational>,
        trials: usize,
    ) -> VerificationReport {
        let base = 200;
        let chain = match Chain::new(p.map(q::<S>), c.map(q::<S>)) {
            Ok(ch) => ch,
            Err(e) => return VerificationReport::new::<S>(self.seed, vec![errored("commutation", &e)]),
        };
        let ch = &chain;
        let ps = ch.params();
        let dim = ch.dim();
        let two_points = |s: &mut Sampler| {
            let (x, y) = (s.rational(), s.rational());
            (q::<S>(&x), q::<S>(&y), format!("x={x} y={y}"))
        };
        let mut checks = Vec::new();
        checks.push(self.run::<S>("comm.AA", base, trials, |s| {
            let (x, y, w) = two_points(s);
            Ok(Comparison::new(w).matrix(&ch.a_op(&x)?.commutator(&ch.a_op(&y)?), &Matrix::zeros(dim)))
        }));
        checks.push(self.run::<S>("comm.BB", base + 1, trials, |s| {
            let (x, y, w) = two_points(s);
            let n = s.int_range(-3, 3);
            let lhs = &ch.b_op(&x, n)? * &ch.b_op(&y, n + 1)?;
            let rhs = &ch.b_op(&y, n)? * &ch.b_op(&x, n + 1)?;
            Ok(Comparison::new(format!("{w} n={n}")).matrix(&lhs, &rhs))
        }));
        checks.push(self.run::<S>("comm.CC", base + 2, trials, |s| {
            let (x, y, w) = two_points(s);
            let n = s.int_range(-3, 3);
            let lhs = &ch.c_op(&x, n)? * &ch.c_op(&y, n - 1)?;
            let rhs = &ch.c_op(&y, n)? * &ch.c_op(&x, n - 1)?;
            Ok(Comparison::new(format!("{w} n={n}")).matrix(&lhs, &rhs))
        }));
        checks.push(self.run::<S>("comm.AB", base + 3, trials, |s| {
            let (x, y, w) = two_points(s);
            let m = s.int_range(-3, 3);
            let a = ch.a_op(&x)?;
            let by = ch.b_op(&y, m)?;
            let lhs = &a * &by;
            let rhs = &(&(&by * &a) + &by.scale(&omega(&x, &y)?))
                - &ch.b_op(&x, m)?.scale(&f_fn(&x, &y, ps)?);
            Ok(Comparison::new(format!("{w} m={m}")).matrix(&lhs, &rhs))
        }));
        checks.push(self.run::<S>("comm.AC", base + 4, trials, |s| {
            let (x, y, w) = two_points(s);
            let m = s.int_range(-3, 3);
            let a = ch.a_op(&x)?;
            let cy = ch.c_op(&y, m)?;
            let lhs = &a * &cy;
            let rhs = &(&(&cy * &a) - &cy.scale(&omega(&x, &y)?))
                - &ch.c_op(&x, m)?.scale(&f_fn(&x.recip(), &y.recip(), ps)?);
            Ok(Comparison::new(format!("{w} m={m}")).matrix(&lhs, &rhs))
        }));
        let cb = |x: &S, y: &S, n: i64| -> Result<(Matrix<S>, Matrix<S>)> {
            let lhs = &ch.c_op(x, n)? * &ch.b_op(y, n)?;
            let two = int::<S>(2);
            let rhs = &(&(&ch.b_op(y, n + 1)? * &ch.c_op(x, n + 1)?)
                + &ch.a_op(x)?.scale(&(two.clone() * f_fn(x, y, ps)?)))
                - &ch.a_op(y)?.scale(&(two * f_fn(&y.recip(), &x.recip(), ps)?));
            let shift = int::<S>(8 * n) * kernel::b_fn(y, ps)? * c_fn(x, ps)?;
            Ok((lhs, rhs.add_scalar(&-shift)))
        };
        checks.push(self.run::<S>("comm.CB", base + 5, trials, |s| {
            let (x, y, w) = two_points(s);
            let n = s.int_range(-3, 3);
            let (l, r) = cb(&x, &y, n)?;
            Ok(Comparison::new(format!("{w} n={n}")).matrix(&l, &r))
        }));
        checks.push(self.run::<S>("comm.CB.n0", base + 6, trials, |s| {
            let (x, y, w) = two_points(s);
            let (l, r) = cb(&x, &y, 0)?;
            let lhs = &ch.c_tilde(&x)?.add_scalar(&c_fn(&x, ps)?) * &ch.b_tilde(&y)?.add_scalar(&kernel::b_fn(&y, ps)?);
            Ok(Comparison::new(w).matrix(&l, &r).matrix(&lhs, &r))
        }));
        checks.push(self.run::<S>("exchange.transfer_b", base + 7, trials, |s| {
            let (x, z, w) = two_points(s);
            let k = s.int_range(-3, 3);
            let (l, r) = transfer_b_exchange(ch, &x, &z, k)?;
            Ok(Comparison::new(format!("x={} z={} p={k}", w, "")).matrix(&l, &r))
        }));
        checks.push(self.run::<S>("transfer.dual_construction", base + 8, trials, |s| {
            let x = s.rational();
            let xs = q::<S>(&x);
            let blocks = ch.k_tilde(&xs)?;
            let summed = ch.k_tilde_from_sum(&xs)?;
            Ok(Comparison::new(format!("x={x}"))
                .matrix(&ch.transfer(&xs, 0)?, &ch.transfer_trace(&xs)?)
                .matrix(&blocks.a, &summed.a)
                .matrix(&blocks.b, &summed.b)
                .matrix(&blocks.c, &summed.c))
        }));
        checks.push(self.run::<S>("transfer.commute", base + 9, trials, |s| {
            let (x, y, w) = two_points(s);
            let comm = ch.transfer(&x, 0)?.commutator(&ch.transfer(&y, 0)?);
            Ok(Comparison::new(w).matrix(&comm, &Matrix::zeros(dim)))
        }));
        checks.push(self.run::<S>("vacuum.actions", base + 10, trials, |s| {
            let x = s.rational();
            let xs = q::<S>(&x);
            let n = s.int_range(-3, 3);
            let omega_v = ch.pseudo_vacuum();
            let a = a_fn(&xs, ch.config())?;
            let cn = int::<S>(ch.lbar() as i64 + 1 - 2 * n) * c_fn(&xs, ps)?;
            Ok(Comparison::new(format!("x={x} n={n}"))
                .vector(&ch.a_op(&xs)?.apply(&omega_v), &vec_scale(&omega_v, &a))
                .vector(&ch.c_op(&xs, n)?.apply(&omega_v), &vec_scale(&omega_v, &cn)))
        }));
        VerificationReport::new::<S>(self.seed, checks)
    }

    // ------------------------------------------------------------------
    // off-shell action of the transfer matrix

    /// Operator form of the transfer-matrix action on `𝔹(z)` (on the full
    /// space for `L ≤ 2`, on `Ω` otherwise) and the scalar off-shell
    /// equation on `Ω`, both with `m` roots.
    pub fn offshell_action<S: Scalar>(
        &self,
        p: &BoundaryParams<Rational>,
        c: &ChainConfig<Rational>,
        m: usize,
        trials: usize,
    ) -> VerificationReport {
        let base = 300 + 10 * m as u64;
        let chain = match Chain::new(p.map(q::<S>), c.map(q::<S>)) {
            Ok(ch) => ch,
            Err(e) => return VerificationReport::new::<S>(self.seed, vec![errored("offshell", &e)]),
        };
        let ch = &chain;
        let full = c.len() <= 2;
        let op_name = if full { format!("offshell.operator.M{m}") } else { format!("offshell.vacuum.M{m}") };
        let mut checks = vec![self.run::<S>(&op_name, base, trials, |s| {
            let x = s.rational();
            let z = s.rationals(m);
            let xs = q::<S>(&x);
            let zs: Vec<S> = z.iter().map(q::<S>).collect();
            let (l, r) = offshell_operator(ch, &xs, &zs)?;
            let w = format!("x={x} z={}", fmt_list(&z));
            if full {
                Ok(Comparison::new(w).matrix(&l, &r))
            } else {
                let o = ch.pseudo_vacuum();
                Ok(Comparison::new(w).vector(&l.apply(&o), &r.apply(&o)))
            }
        })];
        checks.push(self.run::<S>(&format!("offshell.scalar.M{m}"), base + 1, trials, |s| {
            let x = s.rational();
            let z = s.rationals(m);
            let xs = q::<S>(&x);
            let zs: Vec<S> = z.iter().map(q::<S>).collect();
            let (l, r) = offshell_scalar(ch, &xs, &zs, true)?;
            Ok(Comparison::new(format!("x={x} z={}", fmt_list(&z))).vector(&l, &r))
        }));
        VerificationReport::new::<S>(self.seed, checks)
    }

    // ------------------------------------------------------------------
    // the modified term for even chains

    pub fn modified_term<S: Scalar>(
        &self,
        p: &BoundaryParams<Rational>,
        c: &ChainConfig<Rational>,
        trials: usize,
    ) -> VerificationReport {
        let base = 400;
        if c.lbar() % 2 != 0 {
            return VerificationReport::new::<S>(
                self.seed,
                vec![skipped("modified_term", "requires even Lbar")],
            );
        }
        if p.alpha.is_zero_rational() {
            return VerificationReport::new::<S>(
                self.seed,
                vec![skipped("modified_term", "alpha = 0: B-hat is singular")],
            );
        }
        let chain = match Chain::new(p.map(q::<S>), c.map(q::<S>)) {
            Ok(ch) => ch,
            Err(e) => return VerificationReport::new::<S>(self.seed, vec![errored("modified_term", &e)]),
        };
        let ch = &chain;
        let lb = c.lbar() as usize;
        let mut checks = Vec::new();
        checks.push(self.run::<S>("bhat.lower_triangular", base, trials, |s| {
            let z = s.rational();
            let bh = ch.b_hat(&q::<S>(&z))?;
            let set = ch.b_hat_diagonal_set();
            let n = bh.dim();
            let upper = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| bh.get(i, j).clone());
            let diag = (0..n).map(|i| set.iter().fold(S::one(), |acc, d| acc * (bh.get(i, i).clone() - d.clone())));
            Ok(Comparison::new(format!("z={z}")).zeros(upper).zeros(diag.collect::<Vec<_>>()))
        }));
        checks.push(self.run::<S>("script_m.simple_poles", base + 1, trials, |s| {
            let setup = ModifiedSetup::draw(s, ch, p, c)?;
            let cert = setup.certificate(s)?;
            Ok(Comparison::new(setup.witness()).vector(&cert.predicted, &cert.actual))
        }));
        checks.push(self.run::<S>("script_m.inversion", base + 2, trials, |s| {
            let setup = ModifiedSetup::draw(s, ch, p, c)?;
            let z = s.rational();
            let zs = q::<S>(&z);
            let lhs = ch.script_m(&zs, &setup.x, &setup.roots)?;
            let rhs = ch.script_m(&zs.recip(), &setup.x, &setup.roots)?.scale(&-zs.square().recip());
            Ok(Comparison::new(format!("{} z={z}", setup.witness())).matrix(&lhs, &rhs))
        }));
        checks.push(self.run::<S>("script_m.residues", base + 3, trials, |s| {
            let setup = ModifiedSetup::draw(s, ch, p, c)?;
            let cert = setup.certificate(s)?;
            setup.residue_comparison(&cert)
        }));
        checks.push(self.run::<S>("modified.expansion", base + 4, trials, |s| {
            let setup = ModifiedSetup::draw(s, ch, p, c)?;
            let (l, r) = modified_expansion(ch, &setup.x, &setup.roots, None)?;
            Ok(Comparison::new(setup.witness()).vector(&l, &r))
        }));
        checks.push(self.run::<S>("modified.alpha_scaling", base + 5, 1.min(trials), |s| {
            let setup = ModifiedSetup::draw(s, ch, p, c)?;
            let mut p2 = ch.params().clone();
            p2.alpha = p2.alpha.clone() * int::<S>(2);
            let ch2 = ch.with_params(p2.clone());
            let (l1, r1) = modified_expansion(ch, &setup.x, &setup.roots, None)?;
            let (l2, r2) = modified_expansion(&ch2, &setup.x, &setup.roots, None)?;
            let lh1 = lambda_hat(&setup.x, &setup.roots, ch.params(), ch.config())?;
            let lh2 = lambda_hat(&setup.x, &setup.roots, &p2, ch.config())?;
            Ok(Comparison::new(setup.witness())
                .vector(&l1, &r1)
                .vector(&l2, &r2)
                .scalar(lh2, int::<S>(2) * lh1))
        }));
        let _ = lb;
        VerificationReport::new::<S>(self.seed, checks)
    }

    // ------------------------------------------------------------------
    // invariant subspaces of the transfer matrix

    pub fn sector_stability<S: Scalar>(
        &self,
        p: &BoundaryParams<Rational>,
        c: &ChainConfig<Rational>,
        trials: usize,
    ) -> VerificationReport {
        let base = 500;
        let chain = match Chain::new(p.map(q::<S>), c.map(q::<S>)) {
            Ok(ch) => ch,
            Err(e) => return VerificationReport::new::<S>(self.seed, vec![errored("sector", &e)]),
        };
        let ch = &chain;
        let spin2 = ch.total_spin_twice();
        let lb = ch.lbar() as i64;
        let mut checks = Vec::new();
        if lb % 2 == 1 {
            checks.push(self.run::<S>("sector.odd_split", base, trials, |s| {
                let x = s.rational();
                let t = ch.transfer(&q::<S>(&x), 0)?;
                let pos = |i: usize| spin2[i] > 0;
                let off = off_block(&t, |i, j| pos(i) != pos(j));
                Ok(Comparison::new(format!("x={x}")).zeros(off))
            }));
        } else {
            // informational: reported, never failed
            let mut res = self.run::<S>("sector.even_no_split", base, trials, |s| {
                let x = s.rational();
                ch.transfer(&q::<S>(&x), 0)?;
                Ok(Comparison::new(format!("x={x}")))
            });
            let mut smp = Sampler::new(self.seed, base + 10);
            let found = smp
                .redraw(|s| {
                    let x = s.rational();
                    let t = ch.transfer(&q::<S>(&x), 0)?;
                    Ok(stable_thresholds(&t, &spin2))
                })
                .unwrap_or_default();
            res.note = Some(if found.is_empty() {
                "no stable split".to_string()
            } else {
                let list: Vec<String> = found.iter().map(|t| t.to_string()).collect();
                format!("stable spin filtrations at 2J>={}", list.join(","))
            });
            checks.push(res);
        }
        if p.is_triangular() {
            checks.push(self.run::<S>("sector.triangular_nesting", base + 1, trials, |s| {
                let x = s.rational();
                let t = ch.transfer(&q::<S>(&x), 0)?;
                let mut cmp = Comparison::new(format!("x={x}"));
                for m in 0..=lb {
                    let inside = |i: usize| spin2[i] >= lb - 2 * m;
                    cmp = cmp.zeros(off_block(&t, |i, j| !inside(i) && inside(j)));
                }
                Ok(cmp)
            }));
        }
        if p.is_diagonal() {
            checks.push(self.run::<S>("sector.diagonal_conservation", base + 2, trials, |s| {
                let x = s.rational();
                let t = ch.transfer(&q::<S>(&x), 0)?;
                Ok(Comparison::new(format!("x={x}")).zeros(off_block(&t, |i, j| spin2[i] != spin2[j])))
            }));
        }
        VerificationReport::new::<S>(self.seed, checks)
    }

    // ------------------------------------------------------------------
    // Hamiltonians

    /// Trial 0 uses the configured chain, later trials redraw the
    /// inhomogeneities with the same spins.
    pub fn hamiltonians<S: Scalar>(
        &self,
        p: &BoundaryParams<Rational>,
        c: &ChainConfig<Rational>,
        trials: usize,
    ) -> VerificationReport {
        let base = 600;
        if !c.is_spin_half() || c.len() < 2 {
            return VerificationReport::new::<S>(
                self.seed,
                vec![skipped("hamiltonian", "requires a spin-1/2 chain with L >= 2")],
            );
        }
        let ps = p.map(q::<S>);
        let chain_for = |s: &mut Sampler, first: &mut bool| -> Result<(Chain<S>, Vec<Rational>)> {
            let cfg = if std::mem::take(first) { c.clone() } else { s.chain(c.spins()) };
            let v = cfg.inhomogeneities().to_vec();
            Ok((Chain::new(ps.clone(), cfg.map(q::<S>))?, v))
        };
        let mut first = true;
        let mut checks = vec![self.run::<S>("hamiltonian.commute", base, trials, |s| {
            let (ch, v) = chain_for(s, &mut first)?;
            let hs = (0..v.len()).map(|j| ch.hamiltonian_tilde(j)).collect::<Result<Vec<_>>>()?;
            let mut cmp = Comparison::new(format!("v={}", fmt_list(&v)));
            for j in 0..hs.len() {
                for k in j + 1..hs.len() {
                    cmp = cmp.matrix(&hs[j].commutator(&hs[k]), &Matrix::zeros(ch.dim()));
                }
            }
            Ok(cmp)
        })];
        if p.alpha.is_zero_rational() {
            checks.push(skipped("hamiltonian.conjugation", "alpha = 0: gauge matrix undefined"));
        } else {
            let mut first = true;
            checks.push(self.run::<S>("hamiltonian.conjugation", base + 1, trials, |s| {
                let (ch, v) = chain_for(s, &mut first)?;
                let mut cmp = Comparison::new(format!("v={}", fmt_list(&v)));
                for j in 0..v.len() {
                    cmp = cmp.matrix(&ch.hamiltonian(j)?, &ch.hamiltonian_direct(j)?);
                }
                Ok(cmp)
            }));
        }
        checks.push(self.residue_check(p, c));
        VerificationReport::new::<S>(self.seed, checks)
    }

    /// `Res_{x=v_j} t(x) = H̃_j`, extracted in floating point by a symmetric
    /// difference plus one Richardson step.
    pub fn residue_check(&self, p: &BoundaryParams<Rational>, c: &ChainConfig<Rational>) -> CheckResult {
        let name = "hamiltonian.residue";
        let res = (|| -> Result<(f64, String)> {
            let pf = p.map(q::<Complex64>);
            let ch = Chain::new(pf.clone(), c.map(q::<Complex64>))?;
            let v = c.inhomogeneities();
            let mut worst = 0.0f64;
            let mut witness = String::new();
            for (j, vj) in v.iter().enumerate() {
                let vf = q::<Complex64>(vj);
                let eps = 1e-3 * singular_distance(vf, j, c, &pf);
                let sym = |e: f64| -> Result<Matrix<Complex64>> {
                    let e = Complex64::new(e, 0.0);
                    let d = &ch.transfer(&(vf + e), 0)? - &ch.transfer(&(vf - e), 0)?;
                    Ok(d.scale(&(e / 2.0)))
                };
                let r1 = sym(eps)?;
                let r2 = sym(2.0 * eps)?;
                let res = &r1.scale(&Complex64::new(4.0 / 3.0, 0.0)) - &r2.scale(&Complex64::new(1.0 / 3.0, 0.0));
                let h = ch.hamiltonian_tilde(j)?;
                let dev = (&res - &h).max_abs() / h.max_abs().max(1.0);
                if dev > worst {
                    worst = dev;
                    witness = format!("j={j} v={vj} eps={}", fmt_f64(eps));
                }
            }
            Ok((worst, witness))
        })();
        match res {
            Ok((mut worst, witness)) => {
                if self.perturb {
                    worst += 1.0;
                }
                let pass = worst <= RESIDUE_TOL;
                CheckResult {
                    name: name.into(),
                    pass,
                    trials: c.len(),
                    worst,
                    witness: (!pass).then_some(witness),
                    note: Some("float, tolerance 1e-6".into()),
                }
            }
            Err(e) => errored(name, &e),
        }
    }

    // ------------------------------------------------------------------
    // negative controls

    /// Deliberately broken identities; each control passes only if the
    /// breakage is detected in every trial.
    pub fn negative_controls<S: Scalar>(&self, trials: usize) -> VerificationReport {
        let base = 700;
        let mut checks = vec![self.run_control::<S>("control.reflection_perturbed_k", base, trials, |s| {
            let p = s.generic_params();
            let (x, y) = (s.rational(), s.rational());
            let (l, r) = reflection(&q::<S>(&x), &q::<S>(&y), &p.map(q::<S>), |z, p| {
                let mut k = k_matrix(z, p)?;
                let e = k.get(0, 0).clone() + z.recip();
                k.set(0, 0, e);
                Ok(k)
            })?;
            Ok(Comparison::new(format!("x={x} y={y} p={}", fmt_params(&p))).matrix(&l, &r))
        })];
        checks.push(self.run_control::<S>("control.cybe_r_tilde_shifted_b", base + 1, trials, |s| {
            let p = s.generic_params();
            let x = s.rationals(3);
            let ps = p.map(q::<S>);
            let (l, r) = cybe(
                |a: &S, b: &S| {
                    let mut m = r_tilde_explicit(a, b, &ps)?;
                    let e = m.get(0, 2).clone() + S::one();
                    m.set(0, 2, e);
                    Ok(m)
                },
                &x,
            )?;
            Ok(Comparison::new(format!("x={}", fmt_list(&x))).matrix(&l, &r))
        }));
        checks.push(self.run_control::<S>("control.offshell_without_unwanted", base + 2, trials, |s| {
            let p = s.generic_params();
            let c = s.chain(&[crate::kernel::Spin::HALF; 2]);
            let ch = Chain::new(p.map(q::<S>), c.map(q::<S>))?;
            let x = s.rational();
            let z = s.rationals(1);
            let zs: Vec<S> = z.iter().map(q::<S>).collect();
            let (l, r) = offshell_scalar(&ch, &q::<S>(&x), &zs, false)?;
            Ok(Comparison::new(format!("x={x} z={}", fmt_list(&z))).vector(&l, &r))
        }));
        checks.push(self.run_control::<S>("control.modified_dropped_residue", base + 3, trials, |s| {
            let p = s.generic_params();
            let c = s.chain(&[crate::kernel::Spin::HALF; 2]);
            let ch = Chain::new(p.map(q::<S>), c.map(q::<S>))?;
            let setup = ModifiedSetup::draw(s, &ch, &p, &c)?;
            let (l, r) = modified_expansion(&ch, &setup.x, &setup.roots, Some(0))?;
            Ok(Comparison::new(setup.witness()).vector(&l, &r))
        }));
        VerificationReport::new::<S>(self.seed, checks)
    }
}

/// Trial counts used by [`run_suite`]; `None` picks the per-family
/// defaults (20 / 10 / 5).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: Option<usize>,
    pub perturb: bool,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, trials: None, perturb: false }
    }
}

/// Every check applicable to the model, run concurrently. Families that do
/// not apply (odd `L̄` for the modified term, higher spin for Hamiltonians)
/// are reported as skipped.
pub fn run_suite<S: Scalar>(
    p: &BoundaryParams<Rational>,
    c: &ChainConfig<Rational>,
    opts: &SuiteOptions,
) -> VerificationReport {
    let v = Verifier { seed: opts.seed, perturb: opts.perturb };
    let yb = opts.trials.unwrap_or(YANG_BAXTER_TRIALS);
    let cm = opts.trials.unwrap_or(COMMUTATION_TRIALS);
    let os = opts.trials.unwrap_or(OFFSHELL_TRIALS);
    let max_m = c.lbar() as usize;
    type Job<'a> = Box<dyn Fn() -> VerificationReport + Send + Sync + 'a>;
    let mut jobs: Vec<Job> = vec![
        Box::new(move || v.yang_baxter_family::<S>(Some(p), yb)),
        Box::new(move || v.functional_relations::<S>(Some(p), yb)),
        Box::new(move || v.commutation_relations::<S>(p, c, cm)),
    ];
    for m in 0..=max_m {
        jobs.push(Box::new(move || v.offshell_action::<S>(p, c, m, os)));
    }
    jobs.push(Box::new(move || v.modified_term::<S>(p, c, os)));
    jobs.push(Box::new(move || v.sector_stability::<S>(p, c, os)));
    jobs.push(Box::new(move || v.hamiltonians::<S>(p, c, cm)));
    jobs.push(Box::new(move || v.negative_controls::<S>(os)));
    let reports: Vec<VerificationReport> = jobs.par_iter().map(|job| job()).collect();
    reports
        .into_iter()
        .fold(VerificationReport::new::<S>(opts.seed, Vec::new()), VerificationReport::merge)
}

pub fn check_yang_baxter_family<S: Scalar>(
    p: Option<&BoundaryParams<Rational>>,
    trials: usize,
    seed: u64,
) -> VerificationReport {
    Verifier::new(seed).yang_baxter_family::<S>(p, trials)
}

pub fn check_commutation_relations<S: Scalar>(
    p: &BoundaryParams<Rational>,
    c: &ChainConfig<Rational>,
    trials: usize,
    seed: u64,
) -> VerificationReport {
    Verifier::new(seed).commutation_relations::<S>(p, c, trials)
}

pub fn check_offshell_action<S: Scalar>(
    p: &BoundaryParams<Rational>,
    c: &ChainConfig<Rational>,
    m: usize,
    trials: usize,
    seed: u64,
) -> VerificationReport {
    Verifier::new(seed).offshell_action::<S>(p, c, m, trials)
}

pub fn check_modified_term<S: Scalar>(
    p: &BoundaryParams<Rational>,
    c: &ChainConfig<Rational>,
    trials: usize,
    seed: u64,
) -> VerificationReport {
    Verifier::new(seed).modified_term::<S>(p, c, trials)
}

pub fn check_sector_stability<S: Scalar>(
    p: &BoundaryParams<Rational>,
    c: &ChainConfig<Rational>,
    seed: u64,
) -> VerificationReport {
    Verifier::new(seed).sector_stability::<S>(p, c, 3)
}

// ----------------------------------------------------------------------
// helpers

trait RationalExt {
    fn is_zero_rational(&self) -> bool;
}

impl RationalExt for Rational {
    fn is_zero_rational(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

fn skipped(name: &str, why: &str) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass: true,
        trials: 0,
        worst: 0.0,
        witness: None,
        note: Some(format!("skipped: {why}")),
    }
}

fn errored(name: &str, e: &Error) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass: false,
        trials: 0,
        worst: f64::INFINITY,
        witness: Some(format!("error: {e}")),
        note: None,
    }
}

fn guard_nonzero<S: Scalar>(d: &S, what: &str) -> Result<()> {
    if d.is_negligible() {
        Err(Error::PoleCollision(format!("{what} vanishes")))
    } else {
        Ok(())
    }
}

const R_TILDE_ZEROS: [(usize, usize); 6] = [(0, 1), (1, 0), (2, 3), (3, 2), (0, 3), (3, 0)];

/// `[r₁₃(x₁,x₃), r₂₃(x₂,x₃)]` and
/// `[r₂₁(x₂,x₁), r₁₃(x₁,x₃)] + [r₂₃(x₂,x₃), r₁₂(x₁,x₂)]`.
fn cybe<S: Scalar>(
    r: impl Fn(&S, &S) -> Result<Matrix<S>>,
    x: &[Rational],
) -> Result<(Matrix<S>, Matrix<S>)> {
    let [x1, x2, x3] = [q::<S>(&x[0]), q::<S>(&x[1]), q::<S>(&x[2])];
    let d = [2, 2, 2];
    let r13 = embed_two(&r(&x1, &x3)?, 0, 2, &d);
    let r23 = embed_two(&r(&x2, &x3)?, 1, 2, &d);
    let r21 = embed_two(&r(&x2, &x1)?, 1, 0, &d);
    let r12 = embed_two(&r(&x1, &x2)?, 0, 1, &d);
    let lhs = r13.commutator(&r23);
    let rhs = &r21.commutator(&r13) + &r23.commutator(&r12);
    Ok((lhs, rhs))
}

/// Both sides of
/// `r₁₂(x/y)k₁(x)k₂(y) − k₁(x)k₂(y)r₂₁(x/y) = k₂(y)r₁₂(xy)k₁(x) − k₁(x)r₂₁(xy)k₂(y)`.
fn reflection<S: Scalar>(
    x: &S,
    y: &S,
    p: &BoundaryParams<S>,
    k: impl Fn(&S, &BoundaryParams<S>) -> Result<Matrix<S>>,
) -> Result<(Matrix<S>, Matrix<S>)> {
    let id = Matrix::identity(2);
    let k1 = k(x, p)?.kron(&id);
    let k2 = id.kron(&k(y, p)?);
    let r = r_matrix(&(x.clone() / y.clone()))?;
    let rp = r_matrix(&(x.clone() * y.clone()))?;
    let k12 = &k1 * &k2;
    let lhs = &(&r * &k12) - &(&k12 * &flip(&r));
    let rhs = &(&(&k2 * &rp) * &k1) - &(&(&k1 * &flip(&rp)) * &k2);
    Ok((lhs, rhs))
}

/// Both sides of the exchange of `t(x,k−1)` with `B(z,k)`.
fn transfer_b_exchange<S: Scalar>(ch: &Chain<S>, x: &S, z: &S, k: i64) -> Result<(Matrix<S>, Matrix<S>)> {
    let p = ch.params();
    let bz = ch.b_op(z, k)?;
    let lhs = &(&ch.transfer(x, k - 1)? * &bz) - &(&bz * &ch.transfer(x, k)?);
    let (b, c) = b_c_fns(x, p)?;
    let first = ch
        .a_op(x)?
        .add_scalar(&nu(x, p)?)
        .scale(&omega(x, z)?)
        .add_scalar(&(int::<S>(2) * b * c.clone()));
    let second = ch
        .a_op(z)?
        .add_scalar(&nu(z, p)?)
        .scale(&f_fn(&z.recip(), &x.recip(), p)?)
        .add_scalar(&(int::<S>(4 * (k - 1)) * c * kernel::b_fn(z, p)?));
    let rhs = &(&bz * &first) - &(&ch.b_op(x, k)? * &second);
    Ok((lhs, rhs))
}

/// `½A² + xA′ + νA − (x²+1)/(x²−1)A − ½bc`.
fn lambda_operator<S: Scalar>(ch: &Chain<S>, x: &S) -> Result<Matrix<S>> {
    let p = ch.params();
    let a = ch.a_op(x)?;
    let xx = x.square();
    let (b, c) = b_c_fns(x, p)?;
    let coeff = nu(x, p)? - (xx.clone() + S::one()) / (xx - S::one());
    let half = S::ratio(1, 2);
    Ok((&(&(&a * &a).scale(&half) + &ch.a_prime_op(x)?.scale(x)) + &a.scale(&coeff))
        .add_scalar(&-(half * b * c)))
}

fn pair_sum<S: Scalar>(zs: &[S], p: usize, mut term: impl FnMut(&S, &S) -> Result<S>) -> Result<S> {
    let mut acc = S::zero();
    for (q, zq) in zs.iter().enumerate() {
        if q != p {
            acc = acc + term(&zs[p], zq)?;
        }
    }
    Ok(acc)
}

/// `x` and the roots must be pairwise distinct and not mutually inverse.
fn check_points<S: Scalar>(x: &S, zs: &[S]) -> Result<()> {
    for (i, a) in zs.iter().enumerate() {
        for b in zs[i + 1..].iter().chain(std::iter::once(x)) {
            if (a.clone() - b.clone()).is_negligible() || (a.clone() * b.clone() - S::one()).is_negligible() {
                return Err(Error::PoleCollision(format!("{a} and {b} collide")));
            }
        }
    }
    Ok(())
}

/// Both sides of the operator identity for `t(x)𝔹(z)`.
fn offshell_operator<S: Scalar>(ch: &Chain<S>, x: &S, zs: &[S]) -> Result<(Matrix<S>, Matrix<S>)> {
    check_points(x, zs)?;
    let p = ch.params();
    let m = zs.len() as i64;
    let bb = ch.b_product(zs, None)?;
    let lhs = &ch.transfer(x, 0)? * &bb;
    let a = ch.a_op(x)?;
    let mut wanted = lambda_operator(ch, x)?;
    let xinv = x.clone() - x.recip();
    for (pi, zp) in zs.iter().enumerate() {
        let inner = pair_sum(zs, pi, |a, b| Ok(xinv.clone() * omega(a, b)? / (a.clone() - a.recip())))?;
        wanted = &wanted + &a.add_scalar(&(nu(x, p)? + inner)).scale(&omega(x, zp)?);
    }
    let head = &(&(&bb * &ch.b_op(x, m + 1)?) * &ch.c_op(x, m + 1)?).scale(&S::ratio(1, 2));
    let mut rhs = head + &(&bb * &wanted);
    for (pi, zp) in zs.iter().enumerate() {
        let inner = pair_sum(zs, pi, |a, b| omega(a, b))?;
        let op = ch
            .a_op(zp)?
            .add_scalar(&(nu(zp, p)? + inner))
            .scale(&f_fn(&zp.recip(), &x.recip(), p)?);
        rhs = &rhs - &(&ch.b_product(zs, Some((pi, x)))? * &op);
    }
    Ok((lhs, rhs))
}

/// Both sides of the off-shell equation on `Ω`; `unwanted = false` drops
/// the unwanted terms (negative control).
fn offshell_scalar<S: Scalar>(
    ch: &Chain<S>,
    x: &S,
    zs: &[S],
    unwanted: bool,
) -> Result<(StateVector<S>, StateVector<S>)> {
    check_points(x, zs)?;
    let p = ch.params();
    let cfg = ch.config();
    let m = zs.len() as i64;
    let v = ch.bethe_vector(zs, &BetheVariant::Plain)?;
    let lhs = ch.transfer(x, 0)?.apply(&v);
    let lead = S::ratio(ch.lbar() as i64 - 2 * m - 1, 2) * c_fn(x, p)?;
    let head = ch.b_product(zs, None)?.apply(&ch.b_op(x, m + 1)?.apply(&ch.pseudo_vacuum()));
    let ax = a_fn(x, cfg)?;
    let xinv = x.clone() - x.recip();
    let mut eig = lambda_bulk(x, p, cfg)?;
    for (pi, zp) in zs.iter().enumerate() {
        let inner = pair_sum(zs, pi, |a, b| Ok(xinv.clone() * omega(a, b)? / (a.clone() - a.recip())))?;
        eig = eig + omega(x, zp)? * (ax.clone() + nu(x, p)? + inner);
    }
    let mut rhs = crate::matrix::vec_add(&vec_scale(&head, &lead), &vec_scale(&v, &eig));
    if unwanted {
        for (pi, zp) in zs.iter().enumerate() {
            let coeff = f_fn(&zp.recip(), &x.recip(), p)?
                * (a_fn(zp, cfg)? + nu(zp, p)? + pair_sum(zs, pi, |a, b| omega(a, b))?);
            let vp = ch.bethe_vector(zs, &BetheVariant::Substituted { slot: pi, x: x.clone() })?;
            rhs = vec_sub(&rhs, &vec_scale(&vp, &coeff));
        }
    }
    Ok((lhs, rhs))
}

/// Both sides of the expansion of `𝔹(z)B(x,L̄+1)Ω`; `drop` omits one
/// residue term (negative control).
fn modified_expansion<S: Scalar>(
    ch: &Chain<S>,
    x: &S,
    zs: &[S],
    drop: Option<usize>,
) -> Result<(StateVector<S>, StateVector<S>)> {
    check_points(x, zs)?;
    let p = ch.params();
    let cfg = ch.config();
    let lb = ch.lbar() as i64;
    let o = ch.pseudo_vacuum();
    let lhs = ch.b_product(zs, None)?.apply(&ch.b_op(x, lb + 1)?.apply(&o));
    let mut rhs = vec_scale(&ch.bethe_vector(zs, &BetheVariant::Plain)?, &lambda_hat(x, zs, p, cfg)?);
    for (pi, zp) in zs.iter().enumerate() {
        if drop == Some(pi) {
            continue;
        }
        let coeff = (zp.clone() - zp.recip()) * lambda_hat_residue(pi, zs, p, cfg)?
            / ((zp.clone() - x.clone()) * (zp.clone() - x.recip()));
        let vp = ch.bethe_vector(zs, &BetheVariant::Substituted { slot: pi, x: x.clone() })?;
        rhs = crate::matrix::vec_add(&rhs, &vec_scale(&vp, &coeff));
    }
    Ok((lhs, rhs))
}

fn off_block<S: Scalar>(t: &Matrix<S>, select: impl Fn(usize, usize) -> bool) -> Vec<S> {
    let n = t.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if select(i, j) {
                out.push(t.get(i, j).clone());
            }
        }
    }
    out
}

/// Thresholds `h` for which `⊕_{2J ≥ h}` or `⊕_{2J ≤ h}` is a proper
/// invariant subspace of `t`.
fn stable_thresholds<S: Scalar>(t: &Matrix<S>, spin2: &[i64]) -> Vec<i64> {
    let mut levels: Vec<i64> = spin2.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let mut found = Vec::new();
    let scale = t.max_abs().max(1.0);
    let vanishes = |entries: Vec<S>| {
        entries.iter().all(|e| if S::EXACT { e.is_zero() } else { e.magnitude() <= FLOAT_TOL * scale })
    };
    for &h in &levels[1..] {
        let upper = vanishes(off_block(t, |i, j| spin2[i] < h && spin2[j] >= h));
        let lower = vanishes(off_block(t, |i, j| spin2[i] >= h && spin2[j] < h));
        if upper || lower {
            found.push(h);
        }
    }
    found
}

/// Distance from `v_j` to the nearest other singularity of `t(x)`.
fn singular_distance(vj: Complex64, j: usize, c: &ChainConfig<Rational>, p: &BoundaryParams<Complex64>) -> f64 {
    let mut points = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), vj.inv()];
    for (k, v) in c.inhomogeneities().iter().enumerate() {
        if k != j {
            let vf = q::<Complex64>(v);
            points.push(vf);
            points.push(vf.inv());
        }
    }
    let (b, g, r) = (p.beta, p.gamma, p.rho);
    points.extend(quadratic_roots(b - r, 2.0 * g, r + b));
    points.extend(quadratic_roots(r + b, 2.0 * g, b - r));
    points.iter().map(|w| (w - vj).norm()).fold(f64::INFINITY, f64::min)
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if a.norm() < 1e-300 {
        if b.norm() < 1e-300 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    vec![(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
}

/// Data of one modified-term trial: test point, `L̄` roots.
struct ModifiedSetup<'a, S> {
    ch: &'a Chain<S>,
    x_raw: Rational,
    roots_raw: Vec<Rational>,
    x: S,
    roots: Vec<S>,
}

/// Lagrange interpolant of `D(z)ℳ(z)` through `nodes` and its comparison
/// with direct evaluation at further points.
struct Certificate<S> {
    nodes: Vec<S>,
    values: Vec<Matrix<S>>,
    predicted: Vec<S>,
    actual: Vec<S>,
}

impl<'a, S: Scalar> ModifiedSetup<'a, S> {
    fn draw(
        s: &mut Sampler,
        ch: &'a Chain<S>,
        p: &BoundaryParams<Rational>,
        c: &ChainConfig<Rational>,
    ) -> Result<Self> {
        let lb = c.lbar() as usize;
        let x_raw = s.rational();
        let roots_raw = s.rationals(lb);
        BetheRoots::new(roots_raw.clone(), Regime::EvenModified, p, c)?;
        let x = q::<S>(&x_raw);
        let roots: Vec<S> = roots_raw.iter().map(q::<S>).collect();
        check_points(&x, &roots)?;
        // x must also avoid the inhomogeneities and zeros of delta
        ch.b_op(&x, lb as i64 + 1)?;
        Ok(Self { ch, x_raw, roots_raw, x, roots })
    }

    fn witness(&self) -> String {
        format!("x={} z={}", self.x_raw, fmt_list(&self.roots_raw))
    }

    /// Claimed poles of `ℳ`: `0`, `z_p`, `1/z_p`, `x`, `1/x`.
    fn poles(&self) -> Vec<S> {
        let mut out = vec![S::zero()];
        for z in &self.roots {
            out.push(z.clone());
            out.push(z.recip());
        }
        out.push(self.x.clone());
        out.push(self.x.recip());
        out
    }

    fn d_poly(&self, z: &S) -> S {
        self.poles().iter().fold(S::one(), |acc, w| acc * (z.clone() - w.clone()))
    }

    /// `D(z)ℳ(z)` is a polynomial of degree at most `2L̄+4` when the claimed
    /// poles are the only ones and all are simple.
    fn certificate(&self, s: &mut Sampler) -> Result<Certificate<S>> {
        let degree = 2 * self.roots.len() + 4;
        let extra = 3;
        let mut nodes: Vec<S> = Vec::new();
        let mut values = Vec::new();
        let mut evals = Vec::new();
        while nodes.len() < degree + 1 + extra {
            let z = s.redraw(|s| {
                let z = q::<S>(&s.rational());
                if nodes.iter().any(|n| (n.clone() - z.clone()).is_negligible()) {
                    return Err(Error::PoleCollision("repeated node".into()));
                }
                let m = self.ch.script_m(&z, &self.x, &self.roots)?;
                Ok((z, m))
            })?;
            let scaled = z.1.scale(&self.d_poly(&z.0));
            if nodes.len() < degree + 1 {
                values.push(scaled);
            } else {
                evals.push(scaled);
            }
            nodes.push(z.0);
        }
        let interp_nodes = nodes[..degree + 1].to_vec();
        let mut predicted = Vec::new();
        let mut actual = Vec::new();
        for (t, val) in nodes[degree + 1..].iter().zip(&evals) {
            predicted.extend_from_slice(lagrange(&interp_nodes, &values, t).entries());
            actual.extend_from_slice(val.entries());
        }
        Ok(Certificate { nodes: interp_nodes, values, predicted, actual })
    }

    /// `Res_{z=w} ℳ(z) = N(w) / Π_{u≠w}(w−u)` with `N` the interpolant.
    fn residue(&self, cert: &Certificate<S>, index: usize) -> Matrix<S> {
        let poles = self.poles();
        let w = &poles[index];
        let den = poles
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != index)
            .fold(S::one(), |acc, (_, u)| acc * (w.clone() - u.clone()));
        lagrange(&cert.nodes, &cert.values, w).scale(&den.recip())
    }

    fn residue_comparison(&self, cert: &Certificate<S>) -> Result<Comparison<S>> {
        let ch = self.ch;
        let p = ch.params();
        let cfg = ch.config();
        let lb = ch.lbar() as i64;
        let o = ch.pseudo_vacuum();
        let alpha_l = p.alpha.clone() * int::<S>(lb + 1);
        let bb = ch.b_product(&self.roots, None)?;
        let mut cmp = Comparison::new(self.witness());

        let res0 = self.residue(cert, 0).apply(&o);
        let want0 = vec_scale(&bb.apply(&ch.b_op(&self.x, lb + 1)?.apply(&o)), &(-alpha_l.recip()));
        cmp = cmp.vector(&res0, &want0);

        let nx = 2 * self.roots.len() + 1;
        let resx = self.residue(cert, nx).apply(&o);
        let wantx = vec_scale(&bb.apply(&o), &(lambda_hat(&self.x, &self.roots, p, cfg)? / alpha_l));
        let resx_inv = self.residue(cert, nx + 1).apply(&o);
        cmp = cmp.vector(&resx, &wantx).vector(&resx_inv, &wantx);

        for (pi, zp) in self.roots.iter().enumerate() {
            let mut coeff = site_polynomial(zp, cfg)
                / (delta(zp, p)? * (zp.clone() - self.x.clone()) * (zp.clone() - self.x.recip()));
            for (qi, zq) in self.roots.iter().enumerate() {
                if qi != pi {
                    coeff = coeff / ((zp.clone() - zq.clone()) * (zp.clone() - zq.recip()));
                }
            }
            let vp = ch.bethe_vector(&self.roots, &BetheVariant::Substituted { slot: pi, x: self.x.clone() })?;
            let want = vec_scale(&vp, &coeff);
            let r = self.residue(cert, 1 + 2 * pi).apply(&o);
            let r_inv = self.residue(cert, 2 + 2 * pi).apply(&o);
            cmp = cmp.vector(&r, &want).vector(&r_inv, &want);
        }
        Ok(cmp)
    }
}

fn lagrange<S: Scalar>(nodes: &[S], values: &[Matrix<S>], t: &S) -> Matrix<S> {
    let mut acc = Matrix::zeros(values[0].dim());
    for (i, (zi, vi)) in nodes.iter().zip(values).enumerate() {
        let mut w = S::one();
        for (j, zj) in nodes.iter().enumerate() {
            if j != i {
                w = w * (t.clone() - zj.clone()) / (zi.clone() - zj.clone());
            }
        }
        acc = &acc + &vi.scale(&w);
    }
    acc
}
