//! Seeded random rationals for identity testing.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{BoundaryParams, ChainConfig, Spin};
use crate::scalar::Rational;

/// Numerators and denominators are drawn from `1..=BOUND`.
pub const BOUND: i64 = 1000;

const MAX_REDRAWS: usize = 1000;

/// Random stream for one check: seeded with `seed + stream` so that checks
/// run in any order reproduce the same points.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(stream)) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// `±n/d` with `n, d` uniform in `1..=1000`.
    pub fn rational(&mut self) -> Rational {
        let n = self.rng.gen_range(1..=BOUND);
        let d = self.rng.gen_range(1..=BOUND);
        let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
        Rational::new(BigInt::from(sign * n), BigInt::from(d))
    }

    pub fn rationals(&mut self, n: usize) -> Vec<Rational> {
        (0..n).map(|_| self.rational()).collect()
    }

    pub fn int_range(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// Generic boundary: `ρ² ≠ β²`.
    pub fn generic_params(&mut self) -> BoundaryParams<Rational> {
        loop {
            let [a, b, g, r] = [self.rational(), self.rational(), self.rational(), self.rational()];
            if r.clone() * r.clone() == b.clone() * b.clone() {
                continue;
            }
            if let Ok(p) = BoundaryParams::new(a, b, g, r) {
                return p;
            }
        }
    }

    /// Triangular boundary `ρ = β` with `α ≠ 0`.
    pub fn triangular_params(&mut self) -> BoundaryParams<Rational> {
        let [a, b, g] = [self.rational(), self.rational(), self.rational()];
        BoundaryParams::new(a, b.clone(), g, b).expect("nonzero draws")
    }

    /// Diagonal boundary `α = 0`, `ρ = β`.
    pub fn diagonal_params(&mut self) -> BoundaryParams<Rational> {
        let [b, g] = [self.rational(), self.rational()];
        BoundaryParams::new(Rational::from_integer(0.into()), b.clone(), g, b).expect("nonzero draws")
    }

    /// Valid inhomogeneities for the given spins.
    pub fn chain(&mut self, spins: &[Spin]) -> ChainConfig<Rational> {
        loop {
            let v = self.rationals(spins.len());
            if let Ok(c) = ChainConfig::new(v, spins.to_vec()) {
                return c;
            }
        }
    }

    /// Runs `draw` until it avoids every pole; only collision errors trigger
    /// a redraw.
    pub fn redraw<T>(&mut self, mut draw: impl FnMut(&mut Self) -> Result<T>) -> Result<T> {
        let mut last = None;
        for _ in 0..MAX_REDRAWS {
            match draw(self) {
                Ok(v) => return Ok(v),
                Err(e) if is_collision(&e) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one draw"))
    }
}

pub fn is_collision(e: &Error) -> bool {
    matches!(e, Error::PoleCollision(_) | Error::ZeroDelta(_) | Error::PoleGuardViolation(_))
}
