//! Scalar functions of the boundary Gaudin model.
//!
//! Every function takes the boundary and chain records explicitly and
//! guards its denominators: exact zero in the rational backend, `|.| < 1e-12`
//! in the float backend.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn int<S: Scalar>(n: i64) -> S {
    S::from_i64(n)
}

fn guard<S: Scalar>(den: &S, what: impl FnOnce() -> String) -> Result<()> {
    if den.is_negligible() {
        Err(Error::PoleCollision(what()))
    } else {
        Ok(())
    }
}

/// Rejects the universal exclusions `x ∉ {0, 1, -1}`.
pub fn check_spectral_point<S: Scalar>(x: &S) -> Result<()> {
    guard(x, || format!("x = {x} is 0"))?;
    guard(&(x.clone() - S::one()), || format!("x = {x} is 1"))?;
    guard(&(x.clone() + S::one()), || format!("x = {x} is -1"))
}

/// The four scalars of the boundary k-matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryParams<S> {
    pub alpha: S,
    pub beta: S,
    pub gamma: S,
    pub rho: S,
}

impl<S: Scalar> BoundaryParams<S> {
    pub fn new(alpha: S, beta: S, gamma: S, rho: S) -> Result<Self> {
        let p = Self { alpha, beta, gamma, rho };
        if p.rho.is_negligible() {
            return Err(Error::InvalidParams("rho must be nonzero".into()));
        }
        if p.alpha.is_negligible() && !p.is_triangular() {
            return Err(Error::InvalidParams(
                "alpha must be nonzero unless rho^2 = beta^2".into(),
            ));
        }
        Ok(p)
    }

    /// `rho^2 - beta^2`, the numerator of `c(x)`.
    pub fn c_numerator(&self) -> S {
        self.rho.square() - self.beta.square()
    }

    /// `rho^2 = beta^2`: `c` vanishes identically.
    pub fn is_triangular(&self) -> bool {
        self.c_numerator().is_negligible()
    }

    /// Triangular with `alpha = 0`.
    pub fn is_diagonal(&self) -> bool {
        self.is_triangular() && self.alpha.is_negligible()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BoundaryParams<T> {
        BoundaryParams {
            alpha: f(&self.alpha),
            beta: f(&self.beta),
            gamma: f(&self.gamma),
            rho: f(&self.rho),
        }
    }
}

/// Twice a site spin, so spin 1/2 is `Spin(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(pub u32);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    pub fn twice(self) -> u32 {
        self.0
    }

    /// Local dimension `2s + 1`.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Sites of the chain with their inhomogeneities and spins.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig<S> {
    inhomogeneities: Vec<S>,
    spins: Vec<Spin>,
}

impl<S: Scalar> ChainConfig<S> {
    pub fn new(inhomogeneities: Vec<S>, spins: Vec<Spin>) -> Result<Self> {
        if inhomogeneities.is_empty() {
            return Err(Error::InvalidChain("chain needs at least one site".into()));
        }
        if inhomogeneities.len() != spins.len() {
            return Err(Error::InvalidChain(format!(
                "{} inhomogeneities but {} spins",
                inhomogeneities.len(),
                spins.len()
            )));
        }
        for (j, s) in spins.iter().enumerate() {
            if s.0 == 0 {
                return Err(Error::InvalidChain(format!("spin of site {j} must be positive")));
            }
        }
        for (j, v) in inhomogeneities.iter().enumerate() {
            check_spectral_point(v).map_err(|_| {
                Error::InvalidChain(format!("v[{j}] = {v} must avoid 0, 1 and -1"))
            })?;
        }
        for i in 0..inhomogeneities.len() {
            for j in i + 1..inhomogeneities.len() {
                let (vi, vj) = (&inhomogeneities[i], &inhomogeneities[j]);
                if (vi.clone() - vj.clone()).is_negligible() {
                    return Err(Error::InvalidChain(format!("v[{i}] = v[{j}] = {vi}")));
                }
                if (vi.clone() * vj.clone() - S::one()).is_negligible() {
                    return Err(Error::InvalidChain(format!("v[{i}] * v[{j}] = 1")));
                }
            }
        }
        Ok(Self { inhomogeneities, spins })
    }

    /// All sites spin 1/2.
    pub fn spin_half(inhomogeneities: Vec<S>) -> Result<Self> {
        let n = inhomogeneities.len();
        Self::new(inhomogeneities, vec![Spin::HALF; n])
    }

    pub fn len(&self) -> usize {
        self.inhomogeneities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inhomogeneities.is_empty()
    }

    pub fn inhomogeneities(&self) -> &[S] {
        &self.inhomogeneities
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    /// `L̄ = 2 Σ s_j`.
    pub fn lbar(&self) -> u32 {
        self.spins.iter().map(|s| s.0).sum()
    }

    /// `(L̄ - 1) / 2` for odd `L̄`.
    pub fn ell(&self) -> Option<u32> {
        let lb = self.lbar();
        (lb % 2 == 1).then_some((lb - 1) / 2)
    }

    pub fn dim(&self) -> usize {
        self.spins.iter().map(|s| s.multiplicity()).product()
    }

    pub fn is_spin_half(&self) -> bool {
        self.spins.iter().all(|&s| s == Spin::HALF)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ChainConfig<T> {
        ChainConfig {
            inhomogeneities: self.inhomogeneities.iter().map(f).collect(),
            spins: self.spins.clone(),
        }
    }
}

/// `ω(x,y) = (x+y)/(x−y) + (xy+1)/(xy−1)`.
pub fn omega<S: Scalar>(x: &S, y: &S) -> Result<S> {
    let d1 = x.clone() - y.clone();
    let xy = x.clone() * y.clone();
    let d2 = xy.clone() - S::one();
    guard(&d1, || format!("omega({x}, {y}): x = y"))?;
    guard(&d2, || format!("omega({x}, {y}): xy = 1"))?;
    Ok((x.clone() + y.clone()) / d1 + (xy + S::one()) / d2)
}

/// `∂ω/∂x = −2y/(x−y)² − 2y/(xy−1)²`.
pub fn omega_dx<S: Scalar>(x: &S, y: &S) -> Result<S> {
    let d1 = x.clone() - y.clone();
    let d2 = x.clone() * y.clone() - S::one();
    guard(&d1, || format!("omega_dx({x}, {y}): x = y"))?;
    guard(&d2, || format!("omega_dx({x}, {y}): xy = 1"))?;
    let two_y = int::<S>(2) * y.clone();
    Ok(-(two_y.clone() / d1.square()) - two_y / d2.square())
}

/// `∂ω/∂y = 2x/(x−y)² − 2x/(xy−1)²`.
pub fn omega_dy<S: Scalar>(x: &S, y: &S) -> Result<S> {
    let d1 = x.clone() - y.clone();
    let d2 = x.clone() * y.clone() - S::one();
    guard(&d1, || format!("omega_dy({x}, {y}): x = y"))?;
    guard(&d2, || format!("omega_dy({x}, {y}): xy = 1"))?;
    let two_x = int::<S>(2) * x.clone();
    Ok(two_x.clone() / d1.square() - two_x / d2.square())
}

fn delta_numerator<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> S {
    (p.beta.clone() - p.rho.clone()) * x.square()
        + int::<S>(2) * p.gamma.clone() * x.clone()
        + p.rho.clone()
        + p.beta.clone()
}

/// `δ(x) = ((β−ρ)x² + 2γx + ρ + β) / (2ρ(x − 1/x))`.
pub fn delta<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<S> {
    check_spectral_point(x)?;
    let den = int::<S>(2) * p.rho.clone() * (x.clone() - x.recip());
    Ok(delta_numerator(x, p) / den)
}

/// Analytic derivative of [`delta`].
pub fn delta_prime<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<S> {
    check_spectral_point(x)?;
    let two = int::<S>(2);
    let num = delta_numerator(x, p);
    let num_d = two.clone() * (p.beta.clone() - p.rho.clone()) * x.clone() + two.clone() * p.gamma.clone();
    let g = x.clone() - x.recip();
    let g_d = S::one() + x.square().recip();
    Ok((num_d * g.clone() - num * g_d) / (two * p.rho.clone() * g.square()))
}

fn nonzero_delta<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<S> {
    let d = delta(x, p)?;
    if d.is_negligible() {
        return Err(Error::ZeroDelta(format!("{x}")));
    }
    Ok(d)
}

/// `b(x) = −α/δ(x)`.
pub fn b_fn<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<S> {
    Ok(-(p.alpha.clone() / nonzero_delta(x, p)?))
}

/// `c(x) = (ρ²−β²)/(4αρ²δ(1/x))`, identically zero when `ρ² = β²`.
pub fn c_fn<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<S> {
    check_spectral_point(x)?;
    if p.is_triangular() {
        return Ok(S::zero());
    }
    if p.alpha.is_negligible() {
        return Err(Error::InvalidParams("alpha = 0 with rho^2 != beta^2".into()));
    }
    let d = nonzero_delta(&x.recip(), p)?;
    Ok(p.c_numerator() / (int::<S>(4) * p.alpha.clone() * p.rho.square() * d))
}

pub fn b_c_fns<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<(S, S)> {
    Ok((b_fn(x, p)?, c_fn(x, p)?))
}

/// Analytic derivative of [`c_fn`].
pub fn c_prime<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<S> {
    let c = c_fn(x, p)?;
    if c.is_zero() {
        return Ok(S::zero());
    }
    let inv = x.recip();
    let d = nonzero_delta(&inv, p)?;
    let dd = delta_prime(&inv, p)?;
    // d/dx [K / δ(1/x)] = K δ'(1/x) / (x² δ(1/x)²) = c · δ'(1/x) / (x² δ(1/x))
    Ok(c * dd / (x.square() * d))
}

/// `f(x,y) = ω(x,y) δ(x)/δ(y)`.
pub fn f_fn<S: Scalar>(x: &S, y: &S, p: &BoundaryParams<S>) -> Result<S> {
    let w = omega(x, y)?;
    Ok(w * delta(x, p)? / nonzero_delta(y, p)?)
}

fn nu_parts<S: Scalar>(z: &S, p: &BoundaryParams<S>) -> Result<(S, S)> {
    check_spectral_point(z)?;
    let two = int::<S>(2);
    let num = p.c_numerator() * (z.square() + S::one())
        - two.clone() * p.beta.clone() * p.gamma.clone() * z.clone();
    let den = two
        * p.rho.square()
        * (z.square() - S::one())
        * nonzero_delta(z, p)?
        * nonzero_delta(&z.recip(), p)?;
    Ok((num, den))
}

/// `ν(z) = (z²(ρ²−β²) − 2βγz + ρ²−β²) / (2ρ²(z²−1)δ(z)δ(1/z))`.
pub fn nu<S: Scalar>(z: &S, p: &BoundaryParams<S>) -> Result<S> {
    let (num, den) = nu_parts(z, p)?;
    Ok(num / den)
}

/// Analytic derivative of [`nu`].
pub fn nu_prime<S: Scalar>(z: &S, p: &BoundaryParams<S>) -> Result<S> {
    let (num, den) = nu_parts(z, p)?;
    let two = int::<S>(2);
    let num_d = two.clone() * p.c_numerator() * z.clone() - two.clone() * p.beta.clone() * p.gamma.clone();
    let inv = z.recip();
    let (dz, dinv) = (delta(z, p)?, delta(&inv, p)?);
    let (dz_d, dinv_d) = (delta_prime(z, p)?, delta_prime(&inv, p)?);
    let zz1 = z.square() - S::one();
    let den_d = two.clone()
        * p.rho.square()
        * (two * z.clone() * dz.clone() * dinv.clone()
            + zz1 * (dz_d * dinv - dz * dinv_d / z.square()));
    Ok((num_d * den.clone() - num * den_d) / den.square())
}

/// `a(x) = −Σ_j s_j ω(x, v_j)`.
pub fn a_fn<S: Scalar>(x: &S, c: &ChainConfig<S>) -> Result<S> {
    let mut acc = S::zero();
    for (v, s) in c.inhomogeneities().iter().zip(c.spins()) {
        acc = acc - S::ratio(s.0 as i64, 2) * omega(x, v)?;
    }
    Ok(acc)
}

/// Closed-form derivative of [`a_fn`].
pub fn a_prime<S: Scalar>(x: &S, c: &ChainConfig<S>) -> Result<S> {
    let mut acc = S::zero();
    for (v, s) in c.inhomogeneities().iter().zip(c.spins()) {
        acc = acc - S::ratio(s.0 as i64, 2) * omega_dx(x, v)?;
    }
    Ok(acc)
}

pub fn a_and_aprime<S: Scalar>(x: &S, c: &ChainConfig<S>) -> Result<(S, S)> {
    Ok((a_fn(x, c)?, a_prime(x, c)?))
}

/// `λ(x) = ½a² + x a′ + ν a − (x²+1)/(x²−1) a − ½ b c`.
pub fn lambda_bulk<S: Scalar>(x: &S, p: &BoundaryParams<S>, c: &ChainConfig<S>) -> Result<S> {
    check_spectral_point(x)?;
    let (a, ap) = a_and_aprime(x, c)?;
    let n = nu(x, p)?;
    let (b, cc) = b_c_fns(x, p)?;
    let half = S::ratio(1, 2);
    let xx = x.square();
    Ok(half.clone() * a.square() + x.clone() * ap + n * a.clone()
        - (xx.clone() + S::one()) / (xx - S::one()) * a
        - half * b * cc)
}

/// `Π_q (x − v_q)^{2s_q} (x − 1/v_q)^{2s_q}`.
pub fn site_polynomial<S: Scalar>(x: &S, c: &ChainConfig<S>) -> S {
    c.inhomogeneities()
        .iter()
        .zip(c.spins())
        .fold(S::one(), |acc, (v, s)| {
            acc * ((x.clone() - v.clone()) * (x.clone() - v.recip())).powi(s.0)
        })
}

/// Logarithmic derivative of [`site_polynomial`].
pub fn site_polynomial_logderiv<S: Scalar>(x: &S, c: &ChainConfig<S>) -> Result<S> {
    let mut acc = S::zero();
    for (v, s) in c.inhomogeneities().iter().zip(c.spins()) {
        let d1 = x.clone() - v.clone();
        let d2 = x.clone() - v.recip();
        guard(&d1, || format!("x = v = {v}"))?;
        guard(&d2, || format!("x = 1/v, v = {v}"))?;
        acc = acc + int::<S>(s.0 as i64) * (d1.recip() + d2.recip());
    }
    Ok(acc)
}

fn root_pair<S: Scalar>(x: &S, z: &S) -> Result<S> {
    let d = (x.clone() - z.clone()) * (x.clone() - z.recip());
    guard(&d, || format!("x = {x} meets root {z} or its inverse"))?;
    Ok(d)
}

/// `λ̂(x) = α(L̄+1)/δ(x) · Π_q (x−v_q)^{2s_q}(x−1/v_q)^{2s_q} · Π_p 1/((x−z_p)(x−1/z_p))`.
pub fn lambda_hat<S: Scalar>(
    x: &S,
    roots: &[S],
    p: &BoundaryParams<S>,
    c: &ChainConfig<S>,
) -> Result<S> {
    let lb1 = int::<S>(c.lbar() as i64 + 1);
    let mut acc = p.alpha.clone() * lb1 / nonzero_delta(x, p)? * site_polynomial(x, c);
    for z in roots {
        acc = acc / root_pair(x, z)?;
    }
    Ok(acc)
}

/// Residue of [`lambda_hat`] at `x = roots[index]`, in closed form.
pub fn lambda_hat_residue<S: Scalar>(
    index: usize,
    roots: &[S],
    p: &BoundaryParams<S>,
    c: &ChainConfig<S>,
) -> Result<S> {
    let z = &roots[index];
    check_spectral_point(z)?;
    let lb1 = int::<S>(c.lbar() as i64 + 1);
    let mut acc = p.alpha.clone() * lb1 / nonzero_delta(z, p)? * site_polynomial(z, c)
        / (z.clone() - z.recip());
    for (q, zq) in roots.iter().enumerate() {
        if q != index {
            acc = acc / root_pair(z, zq)?;
        }
    }
    Ok(acc)
}

/// Right side of the inhomogeneous Bethe equation for root `index`:
/// `(L̄+1) c(z_p) / (4 z_p) · Res_{x=z_p} λ̂(x)`.
pub fn inhomogeneous_term<S: Scalar>(
    index: usize,
    roots: &[S],
    p: &BoundaryParams<S>,
    c: &ChainConfig<S>,
) -> Result<S> {
    let z = &roots[index];
    let cz = c_fn(z, p)?;
    if cz.is_zero() {
        return Ok(S::zero());
    }
    let lb1 = int::<S>(c.lbar() as i64 + 1);
    Ok(lb1 * cz / (int::<S>(4) * z.clone()) * lambda_hat_residue(index, roots, p, c)?)
}
