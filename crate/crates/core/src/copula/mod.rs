//! Unit-lag autocopulas: the empirical piecewise-bilinear construction,
//! closed-form reference families, conditional sampling and tail diagnostics.

mod empirical;
pub mod families;
mod partition;
mod piecewise;
mod tail;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use empirical::{EmpiricalAutocopula, COPULA_FORMAT_VERSION};
pub use partition::{build_partition, default_target, Rect, RectPartition, TIE_JITTER};
pub use piecewise::PiecewiseLinear;
pub use tail::{
    default_tail_grid, lag_pairs, tail_curves_from_copula, tail_curves_from_pairs, TailCurves,
};

use crate::error::{Error, Result};
use crate::nig::Nig;
use crate::scalar::Real;

/// PIT values are clamped to `[PIT_CLAMP, 1 − PIT_CLAMP]`.
pub const PIT_CLAMP: f64 = 1e-9;

/// How the next value is drawn given the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditioning {
    /// `u ↦ C(u₁, u)/u₁`, i.e. `P[U₂ ≤ u | U₁ ≤ u₁]`.
    #[default]
    Cumulative,
    /// `u ↦ ∂C/∂u₁(u₁, u)`, i.e. `P[U₂ ≤ u | U₁ = u₁]`.
    Partial,
}

/// A bivariate copula driving a Markov chain of PIT values.
pub trait Autocopula<T: Real>: Send + Sync {
    fn cdf(&self, u1: T, u2: T) -> T;

    /// Maps a PIT value into copula scale before conditioning (`Φ₁` for the
    /// empirical copula).
    fn to_copula_scale(&self, v: T) -> T {
        v
    }

    /// Maps a copula-scale draw back to a PIT value (`Φ₂⁻¹`).
    #[allow(clippy::wrong_self_convention)]
    fn from_copula_scale(&self, u: T) -> T {
        u
    }

    /// The conditional distribution function at `u` given `u1`.
    fn conditional(&self, u1: T, u: T, mode: Conditioning) -> Result<T>;

    /// Inverse of [`conditional`](Self::conditional) at probability `w`.
    fn sample_conditional(&self, u1: T, w: T, mode: Conditioning) -> Result<T>;
}

/// PIT values aligned with their keys.
#[derive(Debug, Clone, PartialEq)]
pub struct PitSeries<K, T> {
    pub keys: Vec<K>,
    pub values: Vec<T>,
}

impl<K, T: Copy> PitSeries<K, T> {
    pub fn lag_pairs(&self) -> Vec<(T, T)> {
        lag_pairs(&self.values)
    }
}

/// `v_t = F_t(x_t)` with `F_t` supplied per key, clamped to
/// `[PIT_CLAMP, 1 − PIT_CLAMP]`.
pub fn pit_transform<'m, K, T, F>(data: &[(K, T)], mut marginal: F) -> Result<PitSeries<K, T>>
where
    K: Clone + std::fmt::Debug,
    T: Real,
    F: FnMut(&K) -> Option<&'m Nig<T>>,
{
    let lo = T::lit(PIT_CLAMP);
    let hi = T::one() - lo;
    let mut keys = Vec::with_capacity(data.len());
    let mut values = Vec::with_capacity(data.len());
    for (k, x) in data {
        let f = marginal(k).ok_or_else(|| Error::Domain(format!("no marginal for {k:?}")))?;
        keys.push(k.clone());
        values.push(f.cdf(*x).max(lo).min(hi));
    }
    Ok(PitSeries { keys, values })
}

/// Draws `n` copula-scale pairs: `u₁` uniform, `u₂` from the partial
/// conditional, which reproduces `C` exactly.
pub fn sample_pairs<T: Real, C: Autocopula<T> + ?Sized, R: Rng>(
    c: &C,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(T, T)>> {
    (0..n)
        .map(|_| {
            let u1 = T::lit(rng.random::<f64>());
            let w = T::lit(rng.random::<f64>());
            Ok((u1, c.sample_conditional(u1, w, Conditioning::Partial)?))
        })
        .collect()
}
