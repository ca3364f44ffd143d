//! Monthly NIG scale calibration and a seasonal mean-reverting model for it.
//!
//! With `(μ, α, β)` shared, the joint likelihood separates by calendar month,
//! so each month's `δ` is a one-dimensional maximization. The square root
//! `ν = √δ` then follows
//!
//! ```text
//! ν_{t+1} = a ν_t + b(t) + σ(t) z_{t+1},   z ~ N(0, 1)
//! ```
//!
//! where `b` and `σ²` are truncated Fourier series in the month index with
//! periods 12, 6, 4 and 3 months.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::calendar::{MonthKey, MonthlyQuantiles};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::nig::{log_likelihood, NigParams};
use crate::optimize::golden_section;
use crate::scalar::Real;
use crate::stats;

/// Maximum number of harmonics of the 12-month cycle (periods 12, 6, 4, 3).
pub const MAX_HARMONICS: usize = 4;
/// Regressors in the full seasonal basis.
pub const BASIS_LEN: usize = 1 + 2 * MAX_HARMONICS;
/// Minimum observations per calendar month for `fit_monthly_delta`.
pub const MIN_OBS_PER_MONTH: usize = 5;
/// Minimum series length for `fit_nu_ar`.
pub const MIN_AR_MONTHS: usize = 36;
/// Lower bound applied to simulated `ν` so that `δ = ν²` stays positive.
pub const NU_FLOOR: f64 = 1e-4;

const LN_DELTA_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 81;
const SCAN_HALF_WIDTH: f64 = 9.0; // in ln δ, about a factor 8000 each way

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MonthlyDelta<T> {
    pub year: i32,
    pub month: u32,
    pub delta: T,
}

impl<T: Real> MonthlyDelta<T> {
    pub fn key(&self) -> MonthKey {
        MonthKey {
            year: self.year,
            month: self.month,
        }
    }
}

/// Consecutive months with a positive `δ` each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "DeltaSeriesRepr<T>",
    into = "DeltaSeriesRepr<T>",
    bound = "T: Real"
)]
pub struct MonthlyDeltaSeries<T> {
    entries: Vec<MonthlyDelta<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct DeltaSeriesRepr<T> {
    entries: Vec<MonthlyDelta<T>>,
}

impl<T: Real> TryFrom<DeltaSeriesRepr<T>> for MonthlyDeltaSeries<T> {
    type Error = Error;
    fn try_from(r: DeltaSeriesRepr<T>) -> Result<Self> {
        Self::new(r.entries)
    }
}

impl<T: Real> From<MonthlyDeltaSeries<T>> for DeltaSeriesRepr<T> {
    fn from(s: MonthlyDeltaSeries<T>) -> Self {
        DeltaSeriesRepr { entries: s.entries }
    }
}

impl<T: Real> MonthlyDeltaSeries<T> {
    pub fn new(entries: Vec<MonthlyDelta<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InsufficientData("empty delta series".into()));
        }
        for e in &entries {
            MonthKey::new(e.year, e.month)?;
            if !(e.delta > T::zero() && e.delta.is_finite()) {
                return Err(Error::Domain(format!(
                    "delta for {} must be positive, got {}",
                    e.key(),
                    e.delta
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].key().index() != w[0].key().index() + 1 {
                return Err(Error::Domain(format!(
                    "months not consecutive: {} then {}",
                    w[0].key(),
                    w[1].key()
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[MonthlyDelta<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_month(&self) -> MonthKey {
        self.entries[0].key()
    }

    pub fn last_month(&self) -> MonthKey {
        self.entries[self.entries.len() - 1].key()
    }

    pub fn get(&self, key: MonthKey) -> Option<T> {
        let off = key.index() - self.first_month().index();
        if off < 0 {
            return None;
        }
        self.entries.get(off as usize).map(|e| e.delta)
    }

    pub fn deltas(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.delta).collect()
    }
}

/// Per-month maximum likelihood `δ` with `(μ, α, β)` taken from `shared`.
///
/// `data` holds `(month, value)` pairs in any order. Months between the first
/// and last observed month must each have at least [`MIN_OBS_PER_MONTH`]
/// observations; otherwise the error lists every offending month.
pub fn fit_monthly_delta<T: Real>(
    data: &[(MonthKey, T)],
    shared: &NigParams<T>,
) -> Result<MonthlyDeltaSeries<T>> {
    if data.is_empty() {
        return Err(Error::InsufficientData("no observations".into()));
    }
    let mut by_month: BTreeMap<i64, Vec<T>> = BTreeMap::new();
    for &(k, x) in data {
        MonthKey::new(k.year, k.month)?;
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite observation in {k}")));
        }
        by_month.entry(k.index()).or_default().push(x);
    }
    let first = *by_month.keys().next().unwrap();
    let last = *by_month.keys().next_back().unwrap();

    let short: Vec<String> = (first..=last)
        .filter_map(|i| {
            let n = by_month.get(&i).map_or(0, Vec::len);
            (n < MIN_OBS_PER_MONTH).then(|| format!("{} ({n} obs)", MonthKey::from_index(i)))
        })
        .collect();
    if !short.is_empty() {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_OBS_PER_MONTH} observations per month; short months: {}",
            short.join(", ")
        )));
    }

    let entries = (first..=last)
        .map(|i| {
            let key = MonthKey::from_index(i);
            let delta = fit_delta_1d(&by_month[&i], shared)?;
            Ok(MonthlyDelta {
                year: key.year,
                month: key.month,
                delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MonthlyDeltaSeries::new(entries)
}

/// Maximizes the likelihood over `δ` alone: a coarse scan in `ln δ` around a
/// variance-matched start, then golden-section refinement in the best bracket.
pub fn fit_delta_1d<T: Real>(xs: &[T], shared: &NigParams<T>) -> Result<T> {
    let (alpha, gamma) = (shared.alpha(), shared.gamma());
    // var = δα²/γ³ at fixed (α, β)
    let var = stats::variance(xs);
    let start = if var > T::zero() && var.is_finite() {
        var * gamma.powi(3) / (alpha * alpha)
    } else {
        shared.delta()
    };
    let nll = |ln_d: T| -> T {
        match shared.with_delta(ln_d.exp()) {
            Ok(p) => log_likelihood(&p, xs).map_or(T::infinity(), |ll| -ll),
            Err(_) => T::infinity(),
        }
    };

    let half = T::lit(SCAN_HALF_WIDTH);
    let step = T::lit(2.0) * half / T::from_usize_lossy(SCAN_POINTS - 1);
    let grid: Vec<T> = (0..SCAN_POINTS)
        .map(|i| start.ln() - half + step * T::from_usize_lossy(i))
        .collect();
    let vals: Vec<T> = grid.iter().map(|&g| nll(g)).collect();
    let (best, _) = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or_else(|| Error::Domain("likelihood is not finite for any delta".into()))?;
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::Domain(format!(
            "delta maximizer outside the scanned range around {start}"
        )));
    }
    let (ln_d, _) = golden_section(nll, grid[best - 1], grid[best + 1], T::lit(LN_DELTA_TOL));
    Ok(ln_d.exp())
}

/// `c₀ + Σ_k c_k^cos cos(2πkt/12) + c_k^sin sin(2πkt/12)` for coefficients laid
/// out as `[c₀, c₁^cos, c₁^sin, c₂^cos, …]`.
pub fn seasonal_value<T: Real>(coeffs: &[T], t: T) -> T {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return T::zero();
    };
    let w = T::TAU() / T::lit(12.0);
    rest.chunks(2).enumerate().fold(c0, |acc, (k, c)| {
        let arg = w * T::from_usize_lossy(k + 1) * t;
        let s = c.get(1).map_or(T::zero(), |&s| s * arg.sin());
        acc + c[0] * arg.cos() + s
    })
}

/// Row of the seasonal design at month index `t` with `harmonics` pairs.
pub fn seasonal_basis<T: Real>(t: T, harmonics: usize) -> Vec<T> {
    let w = T::TAU() / T::lit(12.0);
    let mut row = Vec::with_capacity(1 + 2 * harmonics);
    row.push(T::one());
    for k in 1..=harmonics {
        let arg = w * T::from_usize_lossy(k) * t;
        row.push(arg.cos());
        row.push(arg.sin());
    }
    row
}

/// Seasonal AR(1) for `ν = √δ`.
///
/// `sigma_coeffs` describe the innovation *variance*; the volatility is
/// `σ(t) = √max(σ²(t), floor²)`. Coefficient vectors share the layout of
/// [`seasonal_value`] and must have odd length at most [`BASIS_LEN`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NuArRepr<T>", into = "NuArRepr<T>", bound = "T: Real")]
pub struct NuArModel<T> {
    a: T,
    b_coeffs: Vec<T>,
    sigma_coeffs: Vec<T>,
    sigma_floor: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct NuArRepr<T> {
    a: T,
    b_coeffs: Vec<T>,
    sigma_coeffs: Vec<T>,
    sigma_floor: T,
}

impl<T: Real> TryFrom<NuArRepr<T>> for NuArModel<T> {
    type Error = Error;
    fn try_from(r: NuArRepr<T>) -> Result<Self> {
        Self::new(r.a, r.b_coeffs, r.sigma_coeffs, r.sigma_floor)
    }
}

impl<T: Real> From<NuArModel<T>> for NuArRepr<T> {
    fn from(m: NuArModel<T>) -> Self {
        NuArRepr {
            a: m.a,
            b_coeffs: m.b_coeffs,
            sigma_coeffs: m.sigma_coeffs,
            sigma_floor: m.sigma_floor,
        }
    }
}

impl<T: Real> NuArModel<T> {
    /// A zero `sigma_floor` is accepted so that noiseless models can be built
    /// by hand; fitted models always carry a positive floor.
    pub fn new(a: T, b_coeffs: Vec<T>, sigma_coeffs: Vec<T>, sigma_floor: T) -> Result<Self> {
        if !(a.abs() < T::one()) {
            return Err(Error::InvalidParams(format!(
                "AR coefficient must satisfy |a| < 1, got {a}"
            )));
        }
        for (name, c) in [("b_coeffs", &b_coeffs), ("sigma_coeffs", &sigma_coeffs)] {
            if c.len() % 2 == 0 || c.len() > BASIS_LEN {
                return Err(Error::InvalidParams(format!(
                    "{name} must have odd length ≤ {BASIS_LEN}, got {}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if !(sigma_floor >= T::zero() && sigma_floor.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma_floor must be non-negative, got {sigma_floor}"
            )));
        }
        Ok(Self {
            a,
            b_coeffs,
            sigma_coeffs,
            sigma_floor,
        })
    }

    pub fn a(&self) -> T {
        self.a
    }
    pub fn b_coeffs(&self) -> &[T] {
        &self.b_coeffs
    }
    pub fn sigma_coeffs(&self) -> &[T] {
        &self.sigma_coeffs
    }
    pub fn sigma_floor(&self) -> T {
        self.sigma_floor
    }

    pub fn b(&self, t: T) -> T {
        seasonal_value(&self.b_coeffs, t)
    }

    pub fn sigma(&self, t: T) -> T {
        let f2 = self.sigma_floor * self.sigma_floor;
        seasonal_value(&self.sigma_coeffs, t).max(f2).sqrt()
    }

    /// Conditional mean of `ν_{t+1}` given `ν_t`.
    pub fn predict(&self, nu: T, t: T) -> T {
        self.a * nu + self.b(t)
    }

    /// Periodic mean of the stationary process, by iterating the mean
    /// recursion over whole cycles until it settles.
    pub fn seasonal_mean(&self) -> [T; 12] {
        let mut m = self.b(T::zero()) / (T::one() - self.a);
        let mut out = [T::zero(); 12];
        for _ in 0..200 {
            for (k, o) in out.iter_mut().enumerate() {
                *o = m;
                m = self.predict(m, T::from_usize_lossy(k));
            }
        }
        out
    }
}

/// Fits [`NuArModel`] with the full four-harmonic basis.
pub fn fit_nu_ar<T: Real>(deltas: &MonthlyDeltaSeries<T>) -> Result<NuArModel<T>> {
    fit_nu_ar_with(deltas, MAX_HARMONICS)
}

/// Two-stage least squares: `ν_{t+1}` on (seasonal basis at `t`, `ν_t`), then
/// the squared residuals on the same basis.
///
/// The lagged `ν` column comes last, so a series whose `ν` is itself
/// seasonal (e.g. constant) loses that column and gets `a = 0`.
pub fn fit_nu_ar_with<T: Real>(
    deltas: &MonthlyDeltaSeries<T>,
    harmonics: usize,
) -> Result<NuArModel<T>> {
    if !(1..=MAX_HARMONICS).contains(&harmonics) {
        return Err(Error::InvalidParams(format!(
            "harmonics must be in 1..={MAX_HARMONICS}"
        )));
    }
    let n = deltas.len();
    if n < MIN_AR_MONTHS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_AR_MONTHS} monthly values, got {n}"
        )));
    }
    let nu: Vec<T> = deltas.entries().iter().map(|e| e.delta.sqrt()).collect();
    let t0 = deltas.first_month().index();
    let p = 1 + 2 * harmonics;
    let cols = p + 1;
    let rows = n - 1;
    let bases: Vec<Vec<T>> = (0..rows)
        .map(|i| seasonal_basis(T::from_i64(t0 + i as i64).unwrap(), harmonics))
        .collect();

    let mut design = Vec::with_capacity(rows * cols);
    for (i, b) in bases.iter().enumerate() {
        design.extend_from_slice(b);
        design.push(nu[i]);
    }
    let tol = T::lit(1e-10);
    let mean_fit = least_squares(&design, rows, cols, &nu[1..], tol);
    if mean_fit.dropped.iter().any(|&j| j < p) {
        return Err(Error::Degenerate(
            "seasonal basis is rank deficient on this sample".into(),
        ));
    }
    let a = mean_fit.coeffs[p];
    if !(a.abs() < T::one()) {
        return Err(Error::Degenerate(format!(
            "fitted AR coefficient |a| = {} is not stationary; try fewer harmonics",
            a.abs()
        )));
    }
    let b_coeffs = mean_fit.coeffs[..p].to_vec();

    let resid: Vec<T> = (0..rows)
        .map(|i| {
            nu[i + 1]
                - a * nu[i]
                - bases[i]
                    .iter()
                    .zip(&b_coeffs)
                    .map(|(&x, &c)| x * c)
                    .sum::<T>()
        })
        .collect();
    let sq: Vec<T> = resid.iter().map(|&r| r * r).collect();
    let basis_flat: Vec<T> = bases.concat();
    let var_fit = least_squares(&basis_flat, rows, p, &sq, tol);

    let scale = stats::mean(&nu).abs().max(T::one());
    let floor = (T::lit(0.05) * stats::variance(&resid).sqrt()).max(T::epsilon() * scale);
    NuArModel::new(a, b_coeffs, var_fit.coeffs, floor)
}

/// Quantiles of simulated `δ` per month.
pub type DeltaFan<T> = MonthlyQuantiles<T>;

#[derive(Debug, Clone)]
pub struct DeltaSimulation<T> {
    pub fan: DeltaFan<T>,
    /// `paths[p][m]` is `δ` of path `p` in `fan.months[m]`.
    pub paths: Vec<Vec<T>>,
}

pub const DEFAULT_FAN_LEVELS: [f64; 9] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

/// Iterates the model from `ν = nu0` in month `start` for `horizon` months.
///
/// Path `p` draws from ChaCha8 stream `p` of `seed`, so results are identical
/// regardless of thread count. Simulated `ν` is floored at [`NU_FLOOR`].
pub fn simulate_delta_paths<T: Real>(
    model: &NuArModel<T>,
    nu0: T,
    start: MonthKey,
    horizon: usize,
    path_count: usize,
    seed: u64,
    levels: &[T],
) -> Result<DeltaSimulation<T>> {
    if path_count == 0 {
        return Err(Error::InvalidParams("path_count must be at least 1".into()));
    }
    if !nu0.is_finite() {
        return Err(Error::InvalidParams("nu0 must be finite".into()));
    }
    if levels.iter().any(|&l| !(l >= T::zero() && l <= T::one())) {
        return Err(Error::InvalidParams(
            "quantile levels must lie in [0, 1]".into(),
        ));
    }
    let floor = T::lit(NU_FLOOR);
    let t0 = start.index();
    let drift: Vec<(T, T)> = (0..horizon)
        .map(|i| {
            let t = T::from_i64(t0 + i as i64).unwrap();
            (model.b(t), model.sigma(t))
        })
        .collect();

    let paths: Vec<Vec<T>> = (0..path_count)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut nu = nu0;
            drift
                .iter()
                .map(|&(b, s)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    nu = (model.a * nu + b + s * T::lit(z)).max(floor);
                    nu * nu
                })
                .collect()
        })
        .collect();

    let months: Vec<MonthKey> = (1..=horizon as i64)
        .map(|i| MonthKey::from_index(t0 + i))
        .collect();
    let columns = (0..horizon).map(|m| paths.iter().map(|p| p[m]).collect::<Vec<T>>());
    let fan = MonthlyQuantiles::from_groups(months.into_iter().zip(columns), levels, path_count);
    Ok(DeltaSimulation { fan, paths })
}
