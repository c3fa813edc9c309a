//! Concrete matrices of the model: the r- and k-matrices, the gauge
//! transformation, the dressed r-matrix, and every chain operator built from
//! them.
//!
//! Basis convention: lexicographic tensor order with the highest-weight
//! vector first at every site. Lowering operators are then strictly lower
//! triangular, which makes `B̂(z)` lower triangular.

use crate::error::{Error, Result};
use crate::kernel::{
    self, b_c_fns, check_spectral_point, int, nu, omega, omega_dx, BoundaryParams, ChainConfig,
    Spin,
};
use crate::matrix::{embed_one, embed_two, swap4, Matrix, StateVector, DIMENSION_CAP};
use crate::scalar::Scalar;

pub fn sigma_z<S: Scalar>() -> Matrix<S> {
    Matrix::from_rows(vec![vec![S::one(), S::zero()], vec![S::zero(), -S::one()]])
}

pub fn sigma_plus<S: Scalar>() -> Matrix<S> {
    Matrix::from_rows(vec![vec![S::zero(), S::one()], vec![S::zero(), S::zero()]])
}

pub fn sigma_minus<S: Scalar>() -> Matrix<S> {
    Matrix::from_rows(vec![vec![S::zero(), S::zero()], vec![S::one(), S::zero()]])
}

/// The skew-symmetric trigonometric r-matrix, prefactor `1/(x−1)`.
pub fn r_matrix<S: Scalar>(x: &S) -> Result<Matrix<S>> {
    let den = x.clone() - S::one();
    if den.is_negligible() {
        return Err(Error::PoleCollision("r(x) at x = 1".into()));
    }
    let pre = den.recip();
    let h = S::ratio(1, 2) * (x.clone() + S::one());
    let z = S::zero();
    let two = int::<S>(2);
    let m = Matrix::from_rows(vec![
        vec![-h.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), h.clone(), -two.clone(), z.clone()],
        vec![z.clone(), -(two * x.clone()), h.clone(), z.clone()],
        vec![z.clone(), z.clone(), z, -h],
    ]);
    Ok(m.scale(&pre))
}

/// `r₂₁(x) = P r₁₂(x) P`.
pub fn flip<S: Scalar>(m: &Matrix<S>) -> Matrix<S> {
    let p = swap4::<S>();
    &(&p * m) * &p
}

/// The general boundary k-matrix.
pub fn k_matrix<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<Matrix<S>> {
    if x.is_negligible() {
        return Err(Error::PoleCollision("k(x) at x = 0".into()));
    }
    if p.alpha.is_negligible() {
        return Err(Error::InvalidParams("k-matrix needs alpha != 0".into()));
    }
    let two = int::<S>(2);
    let g = x.clone() - x.recip();
    Ok(Matrix::from_rows(vec![
        vec![
            p.beta.clone() + p.gamma.clone() / x.clone(),
            -(p.alpha.clone() * (p.beta.clone() + p.rho.clone()) / two.clone() * g.clone()),
        ],
        vec![
            (p.beta.clone() - p.rho.clone()) / (two * p.alpha.clone()) * g,
            p.beta.clone() + p.gamma.clone() * x.clone(),
        ],
    ]))
}

/// Gauge matrix `M(x)` together with its inverse (`det M = 1`).
pub fn gauge_matrix<S: Scalar>(x: &S, p: &BoundaryParams<S>) -> Result<(Matrix<S>, Matrix<S>)> {
    if x.is_negligible() {
        return Err(Error::PoleCollision("M(x) at x = 0".into()));
    }
    if p.alpha.is_negligible() || p.rho.is_negligible() {
        return Err(Error::InvalidParams("gauge matrix needs alpha != 0 and rho != 0".into()));
    }
    let two = int::<S>(2);
    let m = Matrix::from_rows(vec![
        vec![
            (p.beta.clone() + p.rho.clone()) / (two.clone() * p.rho.clone()),
            p.alpha.clone() / x.clone(),
        ],
        vec![
            (p.beta.clone() - p.rho.clone()) * x.clone() / (two * p.alpha.clone() * p.rho.clone()),
            S::one(),
        ],
    ]);
    let inv = m
        .inverse_2x2()
        .ok_or_else(|| Error::InvalidParams("gauge matrix is singular".into()))?;
    Ok((m, inv))
}

/// `r̄₁₂(x,y) = r₁₂(x/y) − k₁(x) r₁₂(1/(xy)) k₁(x)⁻¹`.
pub fn r_bar<S: Scalar>(x: &S, y: &S, p: &BoundaryParams<S>) -> Result<Matrix<S>> {
    check_spectral_point(x)?;
    check_spectral_point(y)?;
    let k = k_matrix(x, p)?;
    let kinv = k
        .inverse_2x2()
        .ok_or_else(|| Error::PoleCollision(format!("k({x}) is singular")))?;
    let id = Matrix::identity(2);
    let k1 = k.kron(&id);
    let k1inv = kinv.kron(&id);
    let direct = r_matrix(&(x.clone() / y.clone()))?;
    let reflected = r_matrix(&(x.clone() * y.clone()).recip())?;
    Ok(&direct - &(&(&k1 * &reflected) * &k1inv))
}

/// Dressed r-matrix by gauge conjugation of [`r_bar`].
pub fn r_tilde_conjugated<S: Scalar>(x: &S, y: &S, p: &BoundaryParams<S>) -> Result<Matrix<S>> {
    let (mx, mx_inv) = gauge_matrix(x, p)?;
    let (my, my_inv) = gauge_matrix(y, p)?;
    let rb = r_bar(x, y, p)?;
    Ok(&(&mx_inv.kron(&my_inv) * &rb) * &mx.kron(&my))
}

/// Dressed r-matrix in its explicit block form (valid also at `alpha = 0`).
pub fn r_tilde_explicit<S: Scalar>(x: &S, y: &S, p: &BoundaryParams<S>) -> Result<Matrix<S>> {
    lax_matrix(x, y, Spin::HALF, p)
}

/// Dressed r-matrix. Returns the explicit form; when the gauge exists
/// (`alpha != 0`) the conjugated form is also computed and must agree.
pub fn r_tilde<S: Scalar>(x: &S, y: &S, p: &BoundaryParams<S>) -> Result<Matrix<S>> {
    let explicit = r_tilde_explicit(x, y, p)?;
    if !p.alpha.is_negligible() {
        let conj = r_tilde_conjugated(x, y, p)?;
        let diff = &explicit - &conj;
        let scale = explicit.max_abs().max(1.0);
        let dev = diff.max_abs();
        let agree = if S::EXACT { diff.is_negligible() } else { dev <= 1e-9 * scale };
        if !agree {
            return Err(Error::ConstructionMismatch(dev));
        }
    }
    Ok(explicit)
}

/// Spin-`s` generators in a rational basis: `S⁻ w_m = w_{m−1}` and
/// `S⁺ w_{m−1} = (s+m)(s−m+1) w_m`. This is a diagonal similarity transform
/// of the unitary convention, so all `sl(2)` relations hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps<S> {
    pub sz: Matrix<S>,
    pub sp: Matrix<S>,
    pub sm: Matrix<S>,
}

impl<S: Scalar> SpinOps<S> {
    pub fn new(spin: Spin) -> Self {
        let n = spin.multiplicity();
        let two_s = spin.twice() as i64;
        let mut sz = Matrix::zeros(n);
        let mut sp = Matrix::zeros(n);
        let mut sm = Matrix::zeros(n);
        for i in 0..n {
            // weight of basis vector i is s - i; work with 2m
            let two_m = two_s - 2 * i as i64;
            sz.set(i, i, S::ratio(two_m, 2));
            if i + 1 < n {
                sm.set(i + 1, i, S::one());
                // (s+m)(s-m+1) with m the weight of vector i
                let coeff = S::ratio(two_s + two_m, 2) * S::ratio(two_s - two_m + 2, 2);
                sp.set(i, i + 1, coeff);
            }
        }
        Self { sz, sp, sm }
    }
}

/// `ℒ^{(s)}(x,y)` as a `(2(2s+1))`-dimensional matrix, auxiliary space as the
/// outer tensor factor. For `s = 1/2` this is the explicit `r̃(x,y)`.
pub fn lax_matrix<S: Scalar>(x: &S, y: &S, spin: Spin, p: &BoundaryParams<S>) -> Result<Matrix<S>> {
    let ops = SpinOps::<S>::new(spin);
    let w = omega(x, y)?;
    let (b, c) = b_c_fns(x, p)?;
    let f_yx = kernel::f_fn(y, x, p)?;
    let f_inv = kernel::f_fn(&y.recip(), &x.recip(), p)?;
    let two = int::<S>(2);
    let blocks = [
        [ops.sz.scale(&-w.clone()), &ops.sz.scale(&(two.clone() * b)) + &ops.sm.scale(&f_yx)],
        [&ops.sz.scale(&(two * c)) - &ops.sp.scale(&f_inv), ops.sz.scale(&w)],
    ];
    Ok(assemble_blocks(&blocks))
}

fn assemble_blocks<S: Scalar>(blocks: &[[Matrix<S>; 2]; 2]) -> Matrix<S> {
    let d = blocks[0][0].dim();
    Matrix::from_fn(2 * d, |i, j| blocks[i / d][j / d].get(i % d, j % d).clone())
}

fn read_block<S: Scalar>(m: &Matrix<S>, a: usize, b: usize) -> Matrix<S> {
    let d = m.dim() / 2;
    Matrix::from_fn(d, |i, j| m.get(a * d + i, b * d + j).clone())
}

/// Chain operators `A(x)`, `B̃(x)`, `C̃(x)`: the blocks of
/// `𝒦̃₀(x) = ((A, B̃), (C̃, −A))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KBlocks<S> {
    pub a: Matrix<S>,
    pub b: Matrix<S>,
    pub c: Matrix<S>,
}

/// Regimes in which the Bethe ansatz closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `ρ² = β²`, any `0 ≤ M ≤ L̄`.
    Triangular,
    /// Odd `L̄`, `M = ℓ`.
    OddSector,
    /// Even `L̄`, `M = L̄`, inhomogeneous Bethe equations.
    EvenModified,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Triangular => "triangular",
            Regime::OddSector => "odd-sector",
            Regime::EvenModified => "even-modified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "triangular" => Some(Regime::Triangular),
            "odd-sector" | "odd" => Some(Regime::OddSector),
            "even-modified" | "even" => Some(Regime::EvenModified),
            _ => None,
        }
    }

    /// Checks the regime against parity and triangularity; returns the
    /// forced excitation number when there is one.
    pub fn admissible<S: Scalar>(self, p: &BoundaryParams<S>, c: &ChainConfig<S>) -> Result<Option<u32>> {
        let lb = c.lbar();
        match self {
            Regime::Triangular if p.is_triangular() => Ok(None),
            Regime::Triangular => Err(Error::RegimeMismatch(
                "triangular regime requires rho^2 = beta^2".into(),
            )),
            Regime::OddSector => c.ell().map(Some).ok_or_else(|| {
                Error::RegimeMismatch(format!("odd-sector regime requires odd Lbar, got {lb}"))
            }),
            Regime::EvenModified if lb % 2 == 0 => Ok(Some(lb)),
            Regime::EvenModified => Err(Error::RegimeMismatch(format!(
                "even-modified regime requires even Lbar, got {lb}"
            ))),
        }
    }
}

/// Bethe roots with their regime tag.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots<S> {
    roots: Vec<S>,
    regime: Regime,
}

impl<S: Scalar> BetheRoots<S> {
    pub fn new(roots: Vec<S>, regime: Regime, p: &BoundaryParams<S>, c: &ChainConfig<S>) -> Result<Self> {
        if let Some(m) = regime.admissible(p, c)? {
            if roots.len() != m as usize {
                return Err(Error::RegimeMismatch(format!(
                    "{} regime needs M = {m}, got {}",
                    regime.name(),
                    roots.len()
                )));
            }
        }
        validate_roots(&roots, c)?;
        Ok(Self { roots, regime })
    }

    pub fn roots(&self) -> &[S] {
        &self.roots
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

fn validate_roots<S: Scalar>(roots: &[S], c: &ChainConfig<S>) -> Result<()> {
    for (i, z) in roots.iter().enumerate() {
        check_spectral_point(z)?;
        for v in c.inhomogeneities() {
            if (z.clone() - v.clone()).is_negligible() || (z.clone() * v.clone() - S::one()).is_negligible() {
                return Err(Error::PoleCollision(format!("root {z} meets inhomogeneity {v}")));
            }
        }
        for zq in &roots[i + 1..] {
            if (z.clone() - zq.clone()).is_negligible() || (z.clone() * zq.clone() - S::one()).is_negligible() {
                return Err(Error::PoleCollision(format!("roots {z} and {zq} collide")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum BetheVariant<S> {
    Plain,
    /// Root in slot `slot` (0-based) replaced by `x`.
    Substituted { slot: usize, x: S },
    /// `C(z₁,0)C(z₂,−1)⋯` on the lowest-weight state; odd `L̄` only.
    Conjugate,
}

/// A chain in a fixed representation: boundary, sites, and embedded spin
/// generators.
#[derive(Debug, Clone)]
pub struct Chain<S> {
    params: BoundaryParams<S>,
    config: ChainConfig<S>,
    dims: Vec<usize>,
    sites: Vec<SpinOps<S>>,
}

impl<S: Scalar> Chain<S> {
    pub fn new(params: BoundaryParams<S>, config: ChainConfig<S>) -> Result<Self> {
        let dim = config.dim();
        if dim > DIMENSION_CAP {
            return Err(Error::DimensionCap(dim, DIMENSION_CAP));
        }
        let dims: Vec<usize> = config.spins().iter().map(|s| s.multiplicity()).collect();
        let sites = config
            .spins()
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                let local = SpinOps::<S>::new(s);
                SpinOps {
                    sz: embed_one(&local.sz, j, &dims),
                    sp: embed_one(&local.sp, j, &dims),
                    sm: embed_one(&local.sm, j, &dims),
                }
            })
            .collect();
        Ok(Self { params, config, dims, sites })
    }

    pub fn params(&self) -> &BoundaryParams<S> {
        &self.params
    }

    pub fn config(&self) -> &ChainConfig<S> {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn lbar(&self) -> u32 {
        self.config.lbar()
    }

    pub fn site_ops(&self, j: usize) -> &SpinOps<S> {
        &self.sites[j]
    }

    /// Chain with the same sites and a different boundary.
    pub fn with_params(&self, params: BoundaryParams<S>) -> Self {
        Self { params, ..self.clone() }
    }

    fn check_x(&self, x: &S) -> Result<()> {
        check_spectral_point(x)?;
        for v in self.config.inhomogeneities() {
            if (x.clone() - v.clone()).is_negligible() || (x.clone() * v.clone() - S::one()).is_negligible() {
                return Err(Error::PoleCollision(format!("x = {x} meets v = {v} or 1/v")));
            }
        }
        Ok(())
    }

    fn site_sum(&self, mut term: impl FnMut(&S, &SpinOps<S>) -> Result<Matrix<S>>) -> Result<Matrix<S>> {
        let mut acc = Matrix::zeros(self.dim());
        for (v, ops) in self.config.inhomogeneities().iter().zip(&self.sites) {
            acc = &acc + &term(v, ops)?;
        }
        Ok(acc)
    }

    /// `A(x) = −Σ ω(x,v_j) S^z_j`.
    pub fn a_op(&self, x: &S) -> Result<Matrix<S>> {
        self.check_x(x)?;
        self.site_sum(|v, ops| Ok(ops.sz.scale(&-omega(x, v)?)))
    }

    /// `A′(x)`.
    pub fn a_prime_op(&self, x: &S) -> Result<Matrix<S>> {
        self.check_x(x)?;
        self.site_sum(|v, ops| Ok(ops.sz.scale(&-omega_dx(x, v)?)))
    }

    /// `B̃(x) = Σ (2b(x) S^z_j + f(v_j,x) S^−_j)`.
    pub fn b_tilde(&self, x: &S) -> Result<Matrix<S>> {
        self.check_x(x)?;
        let two_b = int::<S>(2) * kernel::b_fn(x, &self.params)?;
        self.site_sum(|v, ops| {
            Ok(&ops.sz.scale(&two_b) + &ops.sm.scale(&kernel::f_fn(v, x, &self.params)?))
        })
    }

    /// `C̃(x) = Σ (2c(x) S^z_j − f(1/v_j,1/x) S^+_j)`.
    pub fn c_tilde(&self, x: &S) -> Result<Matrix<S>> {
        self.check_x(x)?;
        let two_c = int::<S>(2) * kernel::c_fn(x, &self.params)?;
        let xi = x.recip();
        self.site_sum(|v, ops| {
            Ok(&ops.sz.scale(&two_c) - &ops.sp.scale(&kernel::f_fn(&v.recip(), &xi, &self.params)?))
        })
    }

    /// `B(x,n) = B̃(x) − (2n−1) b(x)`.
    pub fn b_op(&self, x: &S, n: i64) -> Result<Matrix<S>> {
        let shift = int::<S>(2 * n - 1) * kernel::b_fn(x, &self.params)?;
        Ok(self.b_tilde(x)?.add_scalar(&-shift))
    }

    /// `C(x,n) = C̃(x) − (2n−1) c(x)`.
    pub fn c_op(&self, x: &S, n: i64) -> Result<Matrix<S>> {
        let shift = int::<S>(2 * n - 1) * kernel::c_fn(x, &self.params)?;
        Ok(self.c_tilde(x)?.add_scalar(&-shift))
    }

    pub fn shifted_bc(&self, x: &S, n: i64) -> Result<(Matrix<S>, Matrix<S>)> {
        Ok((self.b_op(x, n)?, self.c_op(x, n)?))
    }

    pub fn k_tilde(&self, x: &S) -> Result<KBlocks<S>> {
        Ok(KBlocks { a: self.a_op(x)?, b: self.b_tilde(x)?, c: self.c_tilde(x)? })
    }

    /// `𝒦̃₀(x) = Σ_j ℒ₀ⱼ(x,v_j)` on auxiliary ⊗ chain, built by embedding the
    /// local two-space matrices. Spin-1/2 sites go through [`r_tilde`].
    pub fn k_tilde_full(&self, x: &S) -> Result<Matrix<S>> {
        self.check_x(x)?;
        let mut dims = vec![2];
        dims.extend(&self.dims);
        let mut acc = Matrix::zeros(2 * self.dim());
        for (j, (v, &s)) in self.config.inhomogeneities().iter().zip(self.config.spins()).enumerate() {
            let local = if s == Spin::HALF {
                r_tilde(x, v, &self.params)?
            } else {
                lax_matrix(x, v, s, &self.params)?
            };
            acc = &acc + &embed_two(&local, 0, j + 1, &dims);
        }
        Ok(acc)
    }

    /// Blocks of [`Self::k_tilde_full`].
    pub fn k_tilde_from_sum(&self, x: &S) -> Result<KBlocks<S>> {
        let full = self.k_tilde_full(x)?;
        Ok(KBlocks { a: read_block(&full, 0, 0), b: read_block(&full, 0, 1), c: read_block(&full, 1, 0) })
    }

    /// Shifted transfer matrix
    /// `t(x,j) = ½A² + ¼B(x,j+1)C(x,j+1) + ¼C(x,j)B(x,j) − ½b(x)c(x)`.
    pub fn transfer(&self, x: &S, j: i64) -> Result<Matrix<S>> {
        let a = self.a_op(x)?;
        let (b, c) = b_c_fns(x, &self.params)?;
        let bt = self.b_tilde(x)?;
        let ct = self.c_tilde(x)?;
        let shift = |m: &Matrix<S>, s: &S, n: i64| m.add_scalar(&-(int::<S>(2 * n - 1) * s.clone()));
        let quarter = S::ratio(1, 4);
        let half = S::ratio(1, 2);
        let t = &(&a * &a).scale(&half)
            + &(&(&shift(&bt, &b, j + 1) * &shift(&ct, &c, j + 1))
                + &(&shift(&ct, &c, j) * &shift(&bt, &b, j)))
                .scale(&quarter);
        Ok(t.add_scalar(&-(half * b * c)))
    }

    /// `t(x) = ¼ tr₀ 𝒦̃₀(x)²` by squaring the full auxiliary ⊗ chain matrix.
    pub fn transfer_trace(&self, x: &S) -> Result<Matrix<S>> {
        let full = self.k_tilde_full(x)?;
        let sq = &full * &full;
        let tr = &read_block(&sq, 0, 0) + &read_block(&sq, 1, 1);
        Ok(tr.scale(&S::ratio(1, 4)))
    }

    fn scalar_shift(&self, v: &S) -> Result<S> {
        let vv = v.square();
        Ok(v.clone() * (int::<S>(3) * vv.clone() / (vv - S::one()) - nu(v, &self.params)?))
    }

    fn require_spin_half(&self) -> Result<()> {
        if self.config.is_spin_half() {
            Ok(())
        } else {
            Err(Error::InvalidChain("Hamiltonians are defined for spin-1/2 chains".into()))
        }
    }

    /// `H̃_j = −v_j Σ_{p≠j} r̃_jp(v_j,v_p) + v_j(3v_j²/(v_j²−1) − ν(v_j))`,
    /// the residue of `t(x)` at `x = v_j`.
    pub fn hamiltonian_tilde(&self, j: usize) -> Result<Matrix<S>> {
        self.require_spin_half()?;
        let v = self.config.inhomogeneities();
        let vj = &v[j];
        let mut acc = Matrix::zeros(self.dim());
        for (q, vq) in v.iter().enumerate() {
            if q != j {
                let r = r_tilde_explicit(vj, vq, &self.params)?;
                acc = &acc + &embed_two(&r, j, q, &self.dims);
            }
        }
        Ok(acc.scale(&-vj.clone()).add_scalar(&self.scalar_shift(vj)?))
    }

    /// Product of the site gauge matrices `M₁(v₁)⋯M_L(v_L)` and its inverse.
    pub fn gauge_product(&self) -> Result<(Matrix<S>, Matrix<S>)> {
        self.require_spin_half()?;
        let mut g = Matrix::identity(1);
        let mut gi = Matrix::identity(1);
        for v in self.config.inhomogeneities() {
            let (m, mi) = gauge_matrix(v, &self.params)?;
            g = g.kron(&m);
            gi = gi.kron(&mi);
        }
        Ok((g, gi))
    }

    /// `H_j` obtained by conjugating [`Self::hamiltonian_tilde`] with the
    /// gauge product.
    pub fn hamiltonian(&self, j: usize) -> Result<Matrix<S>> {
        let (g, gi) = self.gauge_product()?;
        Ok(&(&g * &self.hamiltonian_tilde(j)?) * &gi)
    }

    /// `(H̃_j, H_j)`.
    pub fn hamiltonians(&self, j: usize) -> Result<(Matrix<S>, Matrix<S>)> {
        Ok((self.hamiltonian_tilde(j)?, self.hamiltonian(j)?))
    }

    /// `H_j` directly from `r` and `k`:
    /// `−v_j Σ_{p≠j} (r_jp(v_j/v_p) − k_j r_jp(1/(v_j v_p)) k_j⁻¹) + scalar`.
    pub fn hamiltonian_direct(&self, j: usize) -> Result<Matrix<S>> {
        self.require_spin_half()?;
        let v = self.config.inhomogeneities();
        let vj = &v[j];
        let mut acc = Matrix::zeros(self.dim());
        for (q, vq) in v.iter().enumerate() {
            if q != j {
                acc = &acc + &embed_two(&r_bar(vj, vq, &self.params)?, j, q, &self.dims);
            }
        }
        Ok(acc.scale(&-vj.clone()).add_scalar(&self.scalar_shift(vj)?))
    }

    /// `Ω`: highest weight at every site (basis vector 0).
    pub fn pseudo_vacuum(&self) -> StateVector<S> {
        crate::matrix::basis_vector(self.dim(), 0)
    }

    /// Lowest weight at every site (last basis vector).
    pub fn lowest_weight(&self) -> StateVector<S> {
        crate::matrix::basis_vector(self.dim(), self.dim() - 1)
    }

    /// Twice the total `S^z` of each basis vector.
    pub fn total_spin_twice(&self) -> Vec<i64> {
        let spins = self.config.spins();
        (0..self.dim())
            .map(|mut idx| {
                let mut total = 0i64;
                for (k, s) in spins.iter().enumerate().rev() {
                    let d = self.dims[k];
                    let local = idx % d;
                    idx /= d;
                    total += s.twice() as i64 - 2 * local as i64;
                }
                total
            })
            .collect()
    }

    /// `𝔹(z) = B(z₁,1)⋯B(z_M,M)`, optionally with slot `k` replaced by `x`.
    pub fn b_product(&self, roots: &[S], substitute: Option<(usize, &S)>) -> Result<Matrix<S>> {
        let mut acc = Matrix::identity(self.dim());
        for (i, z) in roots.iter().enumerate() {
            let arg = match substitute {
                Some((k, x)) if k == i => x,
                _ => z,
            };
            acc = &acc * &self.b_op(arg, i as i64 + 1)?;
        }
        Ok(acc)
    }

    fn b_product_apply(&self, roots: &[S], substitute: Option<(usize, &S)>, v: StateVector<S>) -> Result<StateVector<S>> {
        let mut out = v;
        for (i, z) in roots.iter().enumerate().rev() {
            let arg = match substitute {
                Some((k, x)) if k == i => x,
                _ => z,
            };
            out = self.b_op(arg, i as i64 + 1)?.apply(&out);
        }
        Ok(out)
    }

    /// Bethe vector `𝕍(z)` and its variants.
    pub fn bethe_vector(&self, roots: &[S], variant: &BetheVariant<S>) -> Result<StateVector<S>> {
        match variant {
            BetheVariant::Plain => self.b_product_apply(roots, None, self.pseudo_vacuum()),
            BetheVariant::Substituted { slot, x } => {
                if *slot >= roots.len() {
                    return Err(Error::RegimeMismatch(format!("slot {slot} out of range")));
                }
                self.b_product_apply(roots, Some((*slot, x)), self.pseudo_vacuum())
            }
            BetheVariant::Conjugate => {
                let ell = self.config.ell().ok_or_else(|| {
                    Error::RegimeMismatch("conjugate Bethe vector needs odd Lbar".into())
                })?;
                if roots.len() != ell as usize {
                    return Err(Error::RegimeMismatch(format!(
                        "conjugate Bethe vector needs M = {ell}, got {}",
                        roots.len()
                    )));
                }
                let mut out = self.lowest_weight();
                for (i, z) in roots.iter().enumerate().rev() {
                    out = self.c_op(z, -(i as i64))?.apply(&out);
                }
                Ok(out)
            }
        }
    }

    /// Bethe vector for tagged roots, choosing the plain construction.
    pub fn bethe_vector_for(&self, roots: &BetheRoots<S>, variant: &BetheVariant<S>) -> Result<StateVector<S>> {
        self.bethe_vector(roots.roots(), variant)
    }

    /// `B̂(z) = δ(z) B(z, L̄+1)`.
    pub fn b_hat(&self, z: &S) -> Result<Matrix<S>> {
        let d = kernel::delta(z, &self.params)?;
        Ok(self.b_op(z, self.lbar() as i64 + 1)?.scale(&d))
    }

    /// `{α(L̄+1), α(L̄+3), …, α(3L̄+1)}`.
    pub fn b_hat_diagonal_set(&self) -> Vec<S> {
        let lb = self.lbar() as i64;
        (0..=lb)
            .map(|k| self.params.alpha.clone() * int::<S>(lb + 1 + 2 * k))
            .collect()
    }

    /// The matrix `ℳ(z)` whose residues produce the modified Bethe
    /// expansion; `roots` must hold `L̄` roots.
    pub fn script_m(&self, z: &S, x: &S, roots: &[S]) -> Result<Matrix<S>> {
        let lb = self.lbar() as usize;
        if roots.len() != lb {
            return Err(Error::RegimeMismatch(format!("script M needs {lb} roots, got {}", roots.len())));
        }
        self.check_x(z)?;
        let bhat = self.b_hat(z)?;
        if !bhat.is_lower_triangular() {
            return Err(Error::SingularBhat);
        }
        let bhat_inv = bhat.lower_triangular_inverse().ok_or(Error::SingularBhat)?;
        let mut pre = kernel::site_polynomial(z, &self.config);
        for zq in roots {
            let d = (z.clone() - zq.clone()) * (z.clone() - zq.recip());
            if d.is_negligible() {
                return Err(Error::PoleCollision(format!("z = {z} meets root {zq}")));
            }
            pre = pre / d;
        }
        let dx = (z.clone() - x.clone()) * (z.clone() - x.recip());
        if dx.is_negligible() {
            return Err(Error::PoleCollision(format!("z = {z} meets x = {x}")));
        }
        pre = pre * (z.clone() - z.recip()) / dx;
        let prod = &self.b_product(roots, None)? * &self.b_op(x, lb as i64 + 1)?;
        Ok((&prod * &bhat_inv).scale(&pre))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn generic() -> BoundaryParams<Rational> {
        BoundaryParams::new(q(3, 2), q(1, 3), q(-2, 5), q(7, 4)).unwrap()
    }

    #[test]
    fn r_at_minus_one() {
        let r = r_matrix(&q(-1, 1)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = match (i, j) {
                    (1, 2) => q(1, 1),
                    (2, 1) => q(-1, 1),
                    _ => q(0, 1),
                };
                assert_eq!(r.get(i, j), &expect, "entry ({i},{j})");
            }
        }
        assert!(matches!(r_matrix(&q(1, 1)), Err(Error::PoleCollision(_))));
    }

    #[test]
    fn r_skew_symmetry_at_two() {
        let x = q(2, 1);
        let lhs = r_matrix(&x).unwrap();
        let rhs = flip(&r_matrix(&x.recip()).unwrap()).scale(&q(-1, 1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn k_at_one_is_scalar() {
        let p = generic();
        let k = k_matrix(&q(1, 1), &p).unwrap();
        assert_eq!(k, Matrix::scalar(2, p.beta.clone() + p.gamma.clone()));
        // lower-left entry vanishes iff beta = rho
        let tri = BoundaryParams::new(q(3, 2), q(5, 3), q(-2, 5), q(5, 3)).unwrap();
        assert!(k_matrix(&q(7, 2), &tri).unwrap().get(1, 0).is_zero());
        assert!(!k_matrix(&q(7, 2), &p).unwrap().get(1, 0).is_zero());
    }

    #[test]
    fn gauge_has_unit_determinant() {
        let p = generic();
        for x in [q(2, 1), q(-5, 7), q(11, 3)] {
            let (m, mi) = gauge_matrix(&x, &p).unwrap();
            let det = m.get(0, 0).clone() * m.get(1, 1).clone() - m.get(0, 1).clone() * m.get(1, 0).clone();
            assert_eq!(det, q(1, 1));
            assert_eq!(&mi * &m, Matrix::identity(2));
        }
        let zero_alpha = BoundaryParams::new(q(0, 1), q(1, 1), q(0, 1), q(1, 1)).unwrap();
        assert!(matches!(gauge_matrix(&q(2, 1), &zero_alpha), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn r_tilde_forms_agree_and_have_six_zeros() {
        let p = generic();
        let (x, y) = (q(5, 3), q(-7, 2));
        let a = r_tilde_conjugated(&x, &y, &p).unwrap();
        let b = r_tilde_explicit(&x, &y, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.entries().iter().filter(|e| e.is_zero()).count(), 6);
        // diagonal blocks are ∓½ω σ^z
        let w = omega(&x, &y).unwrap();
        assert_eq!(b.get(0, 0), &(-w.clone() / q(2, 1)));
        assert_eq!(b.get(1, 1), &(w.clone() / q(2, 1)));
        assert_eq!(b.get(2, 2), &(w.clone() / q(2, 1)));
        assert_eq!(b.get(3, 3), &(-w / q(2, 1)));
    }

    #[test]
    fn spin_ops_relations() {
        let half = SpinOps::<Rational>::new(Spin::HALF);
        assert_eq!(half.sz, sigma_z::<Rational>().scale(&q(1, 2)));
        assert_eq!(half.sp, sigma_plus());
        assert_eq!(half.sm, sigma_minus());
        for s in [Spin(1), Spin(2), Spin(3)] {
            let ops = SpinOps::<Rational>::new(s);
            let n = s.multiplicity();
            let mut pow = Matrix::identity(n);
            for _ in 0..n {
                pow = &pow * &ops.sm;
            }
            assert!(pow.is_negligible(), "(S^-)^(2s+1) = 0 for 2s = {}", s.0);
            assert_eq!(ops.sp.commutator(&ops.sm), ops.sz.scale(&q(2, 1)));
            assert_eq!(ops.sz.commutator(&ops.sp), ops.sp);
            assert_eq!(ops.sz.commutator(&ops.sm), ops.sm.scale(&q(-1, 1)));
            // highest weight: S^z w = s w, S^+ w = 0
            assert_eq!(ops.sz.get(0, 0), &q(s.0 as i64, 2));
            assert!((0..n).all(|i| ops.sp.get(i, 0).is_zero()));
        }
    }

    #[test]
    fn single_site_k_tilde_is_r_tilde() {
        let p = generic();
        let v = q(3, 1);
        let chain = Chain::new(p.clone(), ChainConfig::spin_half(vec![v.clone()]).unwrap()).unwrap();
        let x = q(-5, 4);
        assert_eq!(chain.k_tilde_full(&x).unwrap(), r_tilde(&x, &v, &p).unwrap());
    }

    #[test]
    fn vacuum_eigen_relations() {
        let p = generic();
        let cfg = ChainConfig::new(vec![q(3, 1), q(-2, 7)], vec![Spin::HALF, Spin::ONE]).unwrap();
        let chain = Chain::new(p.clone(), cfg.clone()).unwrap();
        let x = q(9, 5);
        let om = chain.pseudo_vacuum();
        let a = kernel::a_fn(&x, &cfg).unwrap();
        assert_eq!(chain.a_op(&x).unwrap().apply(&om), crate::matrix::vec_scale(&om, &a));
        for n in -2..4 {
            let c = kernel::c_fn(&x, &p).unwrap() * q(cfg.lbar() as i64 + 1 - 2 * n, 1);
            assert_eq!(chain.c_op(&x, n).unwrap().apply(&om), crate::matrix::vec_scale(&om, &c));
        }
        let (b1, _) = chain.shifted_bc(&x, 1).unwrap();
        let (b2, _) = chain.shifted_bc(&x, 2).unwrap();
        let b = kernel::b_fn(&x, &p).unwrap();
        assert_eq!(&b1 - &b2, Matrix::scalar(chain.dim(), q(2, 1) * b));
    }

    #[test]
    fn triangular_c_is_unshifted() {
        let p = BoundaryParams::new(q(3, 2), q(5, 3), q(-2, 5), q(5, 3)).unwrap();
        let chain = Chain::new(p, ChainConfig::spin_half(vec![q(3, 1), q(-2, 7)]).unwrap()).unwrap();
        let x = q(9, 5);
        assert_eq!(chain.c_op(&x, 3).unwrap(), chain.c_tilde(&x).unwrap());
    }

    #[test]
    fn transfer_dual_construction() {
        let chain = Chain::new(
            generic(),
            ChainConfig::new(vec![q(3, 1), q(-2, 7)], vec![Spin::HALF, Spin::ONE]).unwrap(),
        )
        .unwrap();
        let x = q(9, 5);
        assert_eq!(chain.transfer(&x, 0).unwrap(), chain.transfer_trace(&x).unwrap());
    }

    #[test]
    fn bethe_vector_basics() {
        let chain = Chain::new(generic(), ChainConfig::spin_half(vec![q(3, 1), q(-2, 7), q(5, 2)]).unwrap()).unwrap();
        assert_eq!(chain.bethe_vector(&[], &BetheVariant::Plain).unwrap(), chain.pseudo_vacuum());
        let (z1, z2) = (q(4, 3), q(-6, 5));
        let a = chain.bethe_vector(&[z1.clone(), z2.clone()], &BetheVariant::Plain).unwrap();
        let b = chain.bethe_vector(&[z2, z1.clone()], &BetheVariant::Plain).unwrap();
        assert_eq!(a, b);
        // conjugate vector lives in the negative total-spin sector
        let v = chain.bethe_vector(&[z1], &BetheVariant::Conjugate).unwrap();
        let spins = chain.total_spin_twice();
        assert!(v.iter().zip(&spins).all(|(c, &s)| s < 0 || c.is_zero()));
        assert!(v.iter().any(|c| !c.is_zero()));
        let even = Chain::new(generic(), ChainConfig::spin_half(vec![q(3, 1), q(-2, 7)]).unwrap()).unwrap();
        assert!(matches!(
            even.bethe_vector(&[q(4, 3)], &BetheVariant::Conjugate),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn b_hat_is_lower_triangular_with_expected_diagonal() {
        let chain = Chain::new(generic(), ChainConfig::spin_half(vec![q(3, 1), q(-2, 7)]).unwrap()).unwrap();
        let bh = chain.b_hat(&q(13, 6)).unwrap();
        assert!(bh.is_lower_triangular());
        let set = chain.b_hat_diagonal_set();
        for i in 0..bh.dim() {
            assert!(set.contains(bh.get(i, i)));
        }
        assert_eq!(set.first(), Some(&(q(3, 2) * q(3, 1))));
        assert_eq!(set.last(), Some(&(q(3, 2) * q(7, 1))));
    }

    #[test]
    fn regime_admissibility() {
        let p = generic();
        let odd = ChainConfig::spin_half(vec![q(3, 1), q(-2, 7), q(5, 2)]).unwrap();
        let even = ChainConfig::spin_half(vec![q(3, 1), q(-2, 7)]).unwrap();
        assert_eq!(Regime::OddSector.admissible(&p, &odd).unwrap(), Some(1));
        assert_eq!(Regime::EvenModified.admissible(&p, &even).unwrap(), Some(2));
        assert!(Regime::OddSector.admissible(&p, &even).is_err());
        assert!(Regime::EvenModified.admissible(&p, &odd).is_err());
        assert!(Regime::Triangular.admissible(&p, &odd).is_err());
        assert!(BetheRoots::new(vec![q(4, 3)], Regime::EvenModified, &p, &even).is_err());
        assert!(BetheRoots::new(vec![q(4, 3), q(3, 4)], Regime::EvenModified, &p, &even).is_err());
        assert!(BetheRoots::new(vec![q(4, 3), q(5, 4)], Regime::EvenModified, &p, &even).is_ok());
    }
}
