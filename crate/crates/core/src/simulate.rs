//! Markov simulation of series driven by an autocopula and time-varying
//! marginals, ensembles with monthly percentiles, and tail-dependence bands.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::{MonthKey, MonthlyQuantiles};
use crate::copula::families::Gaussian;
use crate::copula::{
    lag_pairs, tail_curves_from_pairs, Autocopula, Conditioning, TailCurves, PIT_CLAMP,
};
use crate::error::{Error, Result};
use crate::nig::Nig;
use crate::scalar::Real;
use crate::seasonal::{simulate_delta_paths, MonthlyDeltaSeries, NuArModel, NU_FLOOR};
use crate::special::{norm_cdf, norm_inv_cdf};
use crate::stats;

/// Default ensemble percentile levels.
pub const DEFAULT_LEVELS: [f64; 5] = [0.01, 0.05, 0.5, 0.95, 0.99];

/// Minimum ensemble size for tail-dependence bands.
pub const MIN_BAND_PATHS: usize = 20;

/// Mixed into the seed so δ-path draws never share a stream with value paths.
const DELTA_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// A one-dimensional distribution with a quantile function.
pub trait Marginal<T: Real>: Send + Sync {
    fn cdf(&self, x: T) -> T;
    fn inv_cdf(&self, q: T) -> Result<T>;
    fn median(&self) -> Result<T> {
        self.inv_cdf(T::lit(0.5))
    }
}

impl<T: Real> Marginal<T> for Nig<T> {
    fn cdf(&self, x: T) -> T {
        Nig::cdf(self, x)
    }
    fn inv_cdf(&self, q: T) -> Result<T> {
        Nig::inv_cdf(self, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMarginal<T> {
    mean: T,
    sd: T,
}

impl<T: Real> NormalMarginal<T> {
    pub fn new(mean: T, sd: T) -> Result<Self> {
        if !(sd > T::zero() && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "normal marginal needs finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(Self { mean, sd })
    }
}

impl<T: Real> Marginal<T> for NormalMarginal<T> {
    fn cdf(&self, x: T) -> T {
        norm_cdf((x - self.mean) / self.sd)
    }
    fn inv_cdf(&self, q: T) -> Result<T> {
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::Domain(format!(
                "quantile level must lie in (0, 1), got {q}"
            )));
        }
        Ok(self.mean + self.sd * norm_inv_cdf(q))
    }
}

/// Point mass; every quantile is the constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantMarginal<T>(pub T);

impl<T: Real> Marginal<T> for ConstantMarginal<T> {
    fn cdf(&self, x: T) -> T {
        if x < self.0 {
            T::zero()
        } else {
            T::one()
        }
    }
    fn inv_cdf(&self, _q: T) -> Result<T> {
        Ok(self.0)
    }
}

/// Marginal per simulation step, shared by all steps of a calendar month.
#[derive(Debug, Clone)]
pub struct Schedule<M> {
    step_months: Vec<MonthKey>,
    months: Vec<MonthKey>,
    marginals: Vec<M>,
    slot: Vec<usize>,
}

impl<M> Schedule<M> {
    /// Builds one marginal per distinct month with `make`; `step_months`
    /// must be nondecreasing.
    pub fn new<F>(step_months: Vec<MonthKey>, mut make: F) -> Result<Self>
    where
        F: FnMut(MonthKey) -> Result<M>,
    {
        if step_months.is_empty() {
            return Err(Error::InvalidParams(
                "schedule needs at least one step".into(),
            ));
        }
        if step_months.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParams(
                "schedule months must be nondecreasing".into(),
            ));
        }
        let mut months = Vec::new();
        let mut marginals = Vec::new();
        let mut slot = Vec::with_capacity(step_months.len());
        for &m in &step_months {
            if months.last() != Some(&m) {
                marginals.push(make(m)?);
                months.push(m);
            }
            slot.push(months.len() - 1);
        }
        Ok(Self {
            step_months,
            months,
            marginals,
            slot,
        })
    }

    /// The same marginal at every step.
    pub fn uniform(marginal: M, step_months: Vec<MonthKey>) -> Result<Self>
    where
        M: Clone,
    {
        Self::new(step_months, |_| Ok(marginal.clone()))
    }

    pub fn len(&self) -> usize {
        self.step_months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step_months.is_empty()
    }

    pub fn at(&self, step: usize) -> &M {
        &self.marginals[self.slot[step]]
    }

    pub fn step_months(&self) -> &[MonthKey] {
        &self.step_months
    }

    /// Distinct months in order.
    pub fn months(&self) -> &[MonthKey] {
        &self.months
    }
}

/// Whether each path uses the fitted δ or draws its own δ path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    #[default]
    Frozen,
    Simulated,
}

/// δ for each month of `months`: the fitted value where one exists; before
/// the fitted range the seasonal mean of ν, after it the conditional-mean
/// forecast of ν from the last fitted month (both squared).
pub fn frozen_deltas<T: Real>(
    fitted: &MonthlyDeltaSeries<T>,
    model: &NuArModel<T>,
    months: &[MonthKey],
) -> Vec<T> {
    let seasonal = model.seasonal_mean();
    let last = fitted.last_month();
    let mut forecast = vec![fitted.get(last).unwrap().sqrt()];
    months
        .iter()
        .map(|&m| {
            if let Some(d) = fitted.get(m) {
                return d;
            }
            if m < fitted.first_month() {
                let nu = seasonal[(m.month - 1) as usize].max(T::lit(NU_FLOOR));
                return nu * nu;
            }
            let ahead = (m.index() - last.index()) as usize;
            while forecast.len() <= ahead {
                let t = T::from_i64(last.index() + forecast.len() as i64 - 1).unwrap();
                let nu = model
                    .predict(*forecast.last().unwrap(), t)
                    .max(T::lit(NU_FLOOR));
                forecast.push(nu);
            }
            forecast[ahead] * forecast[ahead]
        })
        .collect()
}

/// One δ path per simulation path over the consecutive months `months`,
/// started from the frozen ν of the month before.
pub fn simulated_deltas<T: Real>(
    fitted: &MonthlyDeltaSeries<T>,
    model: &NuArModel<T>,
    months: &[MonthKey],
    path_count: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    let first = *months
        .first()
        .ok_or_else(|| Error::InvalidParams("no months to simulate".into()))?;
    if months.windows(2).any(|w| w[1] != w[0].next()) {
        return Err(Error::InvalidParams(
            "δ simulation needs consecutive months".into(),
        ));
    }
    let anchor = MonthKey::from_index(first.index() - 1);
    let nu0 = frozen_deltas(fitted, model, &[anchor])[0].sqrt();
    let sim = simulate_delta_paths(
        model,
        nu0,
        anchor,
        months.len(),
        path_count,
        seed ^ DELTA_SEED_SALT,
        &[],
    )?;
    Ok(sim.paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SimulationConfig<T> {
    /// Steps per path, including the initial value.
    pub horizon: usize,
    pub path_count: usize,
    pub seed: u64,
    #[serde(default)]
    pub conditioning: Conditioning,
    /// Initial value; the median of the first marginal when absent.
    #[serde(default)]
    pub x0: Option<T>,
    /// Percentile levels in `[0, 1]`.
    pub levels: Vec<T>,
}

impl<T: Real> SimulationConfig<T> {
    pub fn new(horizon: usize, path_count: usize, seed: u64) -> Self {
        Self {
            horizon,
            path_count,
            seed,
            conditioning: Conditioning::default(),
            x0: None,
            levels: DEFAULT_LEVELS.iter().map(|&l| T::lit(l)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParams("horizon must be at least 1".into()));
        }
        if self.path_count == 0 {
            return Err(Error::InvalidParams("path_count must be at least 1".into()));
        }
        if self
            .levels
            .iter()
            .any(|&l| !(l >= T::zero() && l <= T::one()))
        {
            return Err(Error::InvalidParams(
                "percentile levels must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Random stream for path `path`.
pub fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn clamp_pit<T: Real>(v: T) -> T {
    let lo = T::lit(PIT_CLAMP);
    v.max(lo).min(T::one() - lo)
}

/// Uniform draw strictly inside `(0, 1)`.
fn open_uniform<T: Real, R: Rng>(rng: &mut R) -> T {
    loop {
        let w: f64 = rng.random();
        if w > 0.0 {
            return T::lit(w);
        }
    }
}

/// Chain of PIT values `v₀, v₁, …` of length `n`: each step maps `v` to
/// copula scale, draws from the conditional and maps back.
pub fn simulate_pit_chain<T, C, R>(
    copula: &C,
    v0: T,
    n: usize,
    mode: Conditioning,
    rng: &mut R,
) -> Result<Vec<T>>
where
    T: Real,
    C: Autocopula<T> + ?Sized,
    R: Rng,
{
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let mut v = clamp_pit(v0);
    out.push(v);
    for _ in 1..n {
        let u1 = copula.to_copula_scale(v);
        let u2 = copula.sample_conditional(u1, open_uniform(rng), mode)?;
        v = clamp_pit(copula.from_copula_scale(u2));
        out.push(v);
    }
    Ok(out)
}

/// One path `x₀, …, x_{H−1}` with `x_t = F_t⁻¹(v_t)` and `v₀ = F₀(x₀)`.
pub fn simulate_path<T, C, M, R>(
    cfg: &SimulationConfig<T>,
    copula: &C,
    marginals: &Schedule<M>,
    rng: &mut R,
) -> Result<Vec<T>>
where
    T: Real,
    C: Autocopula<T> + ?Sized,
    M: Marginal<T>,
    R: Rng,
{
    if marginals.len() < cfg.horizon {
        return Err(Error::InvalidParams(format!(
            "schedule covers {} steps, horizon is {}",
            marginals.len(),
            cfg.horizon
        )));
    }
    let first = marginals.at(0);
    let x0 = match cfg.x0 {
        Some(x) => x,
        None => first.median()?,
    };
    let v = simulate_pit_chain(copula, first.cdf(x0), cfg.horizon, cfg.conditioning, rng)?;
    let mut xs = Vec::with_capacity(cfg.horizon);
    xs.push(x0);
    for (t, &vt) in v.iter().enumerate().skip(1) {
        xs.push(marginals.at(t).inv_cdf(vt)?);
    }
    Ok(xs)
}

/// Simulated paths plus per-month percentiles pooled over all paths and all
/// steps in each month.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationEnsemble<T> {
    pub step_months: Vec<MonthKey>,
    /// `paths[p][t]`.
    pub paths: Vec<Vec<T>>,
    pub percentiles: MonthlyQuantiles<T>,
}

impl<T: Real> SimulationEnsemble<T> {
    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn horizon(&self) -> usize {
        self.step_months.len()
    }

    /// PIT values of every path through `marginals`.
    pub fn pit<M: Marginal<T>>(&self, marginals: &Schedule<M>) -> Vec<Vec<T>> {
        self.paths
            .par_iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(t, &x)| clamp_pit(marginals.at(t).cdf(x)))
                    .collect()
            })
            .collect()
    }

    /// Framed little-endian layout: the 8-byte magic `ACENS001`, path count
    /// and horizon as `u64`, then `path_count × horizon` `f64` values, one
    /// path after another.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.path_count() as u64).to_le_bytes())?;
        w.write_all(&(self.horizon() as u64).to_le_bytes())?;
        for p in &self.paths {
            for &x in p {
                w.write_all(&x.as_f64().to_le_bytes())?;
            }
        }
        Ok(())
    }
}

pub const BINARY_MAGIC: &[u8; 8] = b"ACENS001";

/// Reads the layout written by [`SimulationEnsemble::write_binary`] into
/// `paths[p][t]`.
pub fn read_binary_paths<R: Read>(mut r: R) -> io::Result<Vec<Vec<f64>>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "not an ensemble file",
        ));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let paths = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let horizon = u64::from_le_bytes(word) as usize;
    (0..paths)
        .map(|_| {
            (0..horizon)
                .map(|_| {
                    r.read_exact(&mut word)?;
                    Ok(f64::from_le_bytes(word))
                })
                .collect()
        })
        .collect()
}

/// Ensemble with one marginal schedule shared by all paths.
pub fn simulate_ensemble<T, C, M>(
    cfg: &SimulationConfig<T>,
    copula: &C,
    marginals: &Schedule<M>,
) -> Result<SimulationEnsemble<T>>
where
    T: Real,
    C: Autocopula<T> + ?Sized,
    M: Marginal<T>,
{
    run_ensemble(cfg, marginals.step_months(), |p| {
        simulate_path(cfg, copula, marginals, &mut path_rng(cfg.seed, p))
    })
}

/// Ensemble where path `p` uses the schedule returned by `marginals_for(p)`;
/// every schedule must cover `step_months`.
pub fn simulate_ensemble_with<T, C, M, F>(
    cfg: &SimulationConfig<T>,
    copula: &C,
    step_months: &[MonthKey],
    marginals_for: F,
) -> Result<SimulationEnsemble<T>>
where
    T: Real,
    C: Autocopula<T> + ?Sized,
    M: Marginal<T>,
    F: Fn(usize) -> Result<Schedule<M>> + Sync + Send,
{
    run_ensemble(cfg, step_months, |p| {
        let s = marginals_for(p)?;
        let h = cfg.horizon;
        if s.len() < h || s.step_months()[..h] != step_months[..h] {
            return Err(Error::InvalidParams(format!(
                "schedule for path {p} does not match the calendar"
            )));
        }
        simulate_path(cfg, copula, &s, &mut path_rng(cfg.seed, p))
    })
}

fn run_ensemble<T, F>(
    cfg: &SimulationConfig<T>,
    step_months: &[MonthKey],
    path: F,
) -> Result<SimulationEnsemble<T>>
where
    T: Real,
    F: Fn(usize) -> Result<Vec<T>> + Sync + Send,
{
    cfg.validate()?;
    if step_months.len() < cfg.horizon {
        return Err(Error::InvalidParams(format!(
            "calendar covers {} steps, horizon is {}",
            step_months.len(),
            cfg.horizon
        )));
    }
    let step_months = step_months[..cfg.horizon].to_vec();
    let paths = (0..cfg.path_count)
        .into_par_iter()
        .map(path)
        .collect::<Result<Vec<_>>>()?;
    let percentiles = monthly_percentiles(&paths, &step_months, &cfg.levels);
    Ok(SimulationEnsemble {
        step_months,
        paths,
        percentiles,
    })
}

/// Per-month quantiles of all values of all paths falling in each month.
pub fn monthly_percentiles<T: Real>(
    paths: &[Vec<T>],
    step_months: &[MonthKey],
    levels: &[T],
) -> MonthlyQuantiles<T> {
    let mut groups: Vec<(MonthKey, Vec<T>)> = Vec::new();
    let mut start = 0;
    while start < step_months.len() {
        let m = step_months[start];
        let mut end = start;
        while end < step_months.len() && step_months[end] == m {
            end += 1;
        }
        let pooled = paths
            .iter()
            .flat_map(|p| p[start..end].iter().copied())
            .collect();
        groups.push((m, pooled));
        start = end;
    }
    MonthlyQuantiles::from_groups(groups, levels, paths.len())
}

/// Stationary AR(1) `y_t = α y_{t−1} + β + σ ε_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Spec<T> {
    pub alpha_ar: T,
    pub beta_ar: T,
    pub sigma_ar: T,
}

impl<T: Real> Ar1Spec<T> {
    pub fn new(alpha_ar: T, beta_ar: T, sigma_ar: T) -> Result<Self> {
        if !(alpha_ar.abs() < T::one()
            && sigma_ar > T::zero()
            && beta_ar.is_finite()
            && sigma_ar.is_finite())
        {
            return Err(Error::InvalidParams(format!(
                "AR(1) needs |alpha| < 1 and sigma > 0, got alpha={alpha_ar}, sigma={sigma_ar}"
            )));
        }
        Ok(Self {
            alpha_ar,
            beta_ar,
            sigma_ar,
        })
    }

    pub fn stationary_mean(&self) -> T {
        self.beta_ar / (T::one() - self.alpha_ar)
    }

    pub fn stationary_variance(&self) -> T {
        self.sigma_ar * self.sigma_ar / (T::one() - self.alpha_ar * self.alpha_ar)
    }
}

/// The same AR(1) two ways: by direct recursion (stream 0 of `seed`) and as
/// a Markov chain with the stationary normal marginal and the Gaussian
/// copula of correlation `α` under partial conditioning (stream 1). Both
/// start from a stationary draw.
pub fn ar1_gaussian_copula_oracle<T: Real>(
    spec: &Ar1Spec<T>,
    n: usize,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    let mean = spec.stationary_mean();
    let sd = spec.stationary_variance().sqrt();

    let mut rng = path_rng(seed, 0);
    let mut y = mean + sd * T::lit(StandardNormal.sample(&mut rng));
    let direct = (0..n)
        .map(|i| {
            if i > 0 {
                let e: f64 = StandardNormal.sample(&mut rng);
                y = spec.alpha_ar * y + spec.beta_ar + spec.sigma_ar * T::lit(e);
            }
            y
        })
        .collect();

    let marginal = NormalMarginal::new(mean, sd)?;
    let copula = Gaussian::new(spec.alpha_ar)?;
    let mut rng = path_rng(seed, 1);
    let v0 = open_uniform(&mut rng);
    let v = simulate_pit_chain(&copula, v0, n, Conditioning::Partial, &mut rng)?;
    let framework = v
        .into_iter()
        .map(|v| marginal.inv_cdf(v))
        .collect::<Result<Vec<_>>>()?;
    Ok((direct, framework))
}

/// Per-u 5th and 95th percentiles of the rank-based tail curves of each path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TailBands<T> {
    pub u: Vec<T>,
    pub lower_p05: Vec<T>,
    pub lower_p95: Vec<T>,
    pub upper_p05: Vec<T>,
    pub upper_p95: Vec<T>,
}

impl<T: Real> TailBands<T> {
    /// Number of grid points (over both curves) where `curves` lies inside
    /// the band, and the total number of points.
    pub fn coverage(&self, curves: &TailCurves<T>) -> (usize, usize) {
        let mut inside = 0;
        for k in 0..self.u.len() {
            if curves.lower[k] >= self.lower_p05[k] && curves.lower[k] <= self.lower_p95[k] {
                inside += 1;
            }
            if curves.upper[k] >= self.upper_p05[k] && curves.upper[k] <= self.upper_p95[k] {
                inside += 1;
            }
        }
        (inside, 2 * self.u.len())
    }

    /// CSV with columns `u,lower_p05,lower_p95,upper_p05,upper_p95`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "u,lower_p05,lower_p95,upper_p05,upper_p95")?;
        for k in 0..self.u.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.u[k],
                self.lower_p05[k],
                self.lower_p95[k],
                self.upper_p05[k],
                self.upper_p95[k]
            )?;
        }
        Ok(())
    }
}

/// Bands from PIT-transformed paths (at least [`MIN_BAND_PATHS`]).
pub fn tail_dependence_bands<T: Real>(pit_paths: &[Vec<T>], grid: &[T]) -> Result<TailBands<T>> {
    if pit_paths.len() < MIN_BAND_PATHS {
        return Err(Error::InsufficientData(format!(
            "tail bands need at least {MIN_BAND_PATHS} paths, got {}",
            pit_paths.len()
        )));
    }
    let curves: Vec<TailCurves<T>> = pit_paths
        .par_iter()
        .map(|p| tail_curves_from_pairs(&lag_pairs(p), grid))
        .collect();
    let levels = [T::lit(0.05), T::lit(0.95)];
    let mut bands = TailBands {
        u: grid.to_vec(),
        lower_p05: Vec::with_capacity(grid.len()),
        lower_p95: Vec::with_capacity(grid.len()),
        upper_p05: Vec::with_capacity(grid.len()),
        upper_p95: Vec::with_capacity(grid.len()),
    };
    for k in 0..grid.len() {
        let lo = stats::quantiles(
            &curves.iter().map(|c| c.lower[k]).collect::<Vec<_>>(),
            &levels,
        );
        let hi = stats::quantiles(
            &curves.iter().map(|c| c.upper[k]).collect::<Vec<_>>(),
            &levels,
        );
        bands.lower_p05.push(lo[0]);
        bands.lower_p95.push(lo[1]);
        bands.upper_p05.push(hi[0]);
        bands.upper_p95.push(hi[1]);
    }
    Ok(bands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::families::{Comonotone, Independence};

    fn months(n: usize) -> Vec<MonthKey> {
        (0..n)
            .map(|i| MonthKey::from_index(24_000 + (i / 30) as i64))
            .collect()
    }

    #[test]
    fn schedule_slots_by_month() {
        let mut built = Vec::new();
        let s = Schedule::new(months(65), |m| {
            built.push(m);
            Ok(m.month)
        })
        .unwrap();
        assert_eq!(built.len(), 3);
        assert_eq!(s.months(), &built[..]);
        assert_eq!(*s.at(29), built[0].month);
        assert_eq!(*s.at(30), built[1].month);
        assert_eq!(*s.at(64), built[2].month);
        let mut back = months(5);
        back.swap(0, 4);
        back[0] = MonthKey::from_index(30_000);
        assert!(Schedule::new(back, |_| Ok(())).is_err());
    }

    #[test]
    fn constant_marginal_gives_constant_percentiles() {
        let cfg = SimulationConfig::new(90, 7, 3);
        let s = Schedule::uniform(ConstantMarginal(2.5), months(90)).unwrap();
        let e = simulate_ensemble(&cfg, &Independence, &s).unwrap();
        assert!(e.paths.iter().flatten().all(|&x| x == 2.5));
        assert!(e.percentiles.values.iter().flatten().all(|&x| x == 2.5));
        assert_eq!(e.percentiles.months.len(), 3);
    }

    #[test]
    fn single_path_percentiles_are_order_statistics() {
        let mut cfg = SimulationConfig::new(60, 1, 9);
        cfg.levels = vec![0.0, 1.0];
        let s = Schedule::uniform(NormalMarginal::new(0.0, 1.0).unwrap(), months(60)).unwrap();
        let e = simulate_ensemble(&cfg, &Independence, &s).unwrap();
        let first = &e.paths[0][..30];
        let min = first.iter().copied().fold(f64::INFINITY, f64::min);
        let max = first.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(e.percentiles.values[0], vec![min, max]);
    }

    #[test]
    fn comonotone_cumulative_scales_uniform() {
        let mut rng = path_rng(1, 0);
        let v =
            simulate_pit_chain(&Comonotone, 0.6, 2, Conditioning::Cumulative, &mut rng).unwrap();
        let mut rng = path_rng(1, 0);
        let w: f64 = open_uniform(&mut rng);
        assert!((v[1] - w * 0.6).abs() < 1e-15);
    }

    #[test]
    fn x0_defaults_to_median() {
        let cfg = SimulationConfig::new(3, 1, 0);
        let s = Schedule::uniform(NormalMarginal::new(4.0f64, 2.0).unwrap(), months(3)).unwrap();
        let p = simulate_path(&cfg, &Independence, &s, &mut path_rng(0, 0)).unwrap();
        assert!((p[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn binary_roundtrip() {
        let cfg = SimulationConfig::new(31, 3, 5);
        let s = Schedule::uniform(NormalMarginal::new(0.0, 1.0).unwrap(), months(31)).unwrap();
        let e = simulate_ensemble(&cfg, &Independence, &s).unwrap();
        let mut buf = Vec::new();
        e.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 8 * 31 * 3);
        assert_eq!(read_binary_paths(&buf[..]).unwrap(), e.paths);
        assert!(read_binary_paths(&b"nonsense________________"[..]).is_err());
    }

    #[test]
    fn identical_paths_give_zero_width_bands() {
        let path: Vec<f64> = (0..500)
            .map(|i| ((i * 37) % 101) as f64 / 101.0 + 0.001)
            .collect();
        let b = tail_dependence_bands(&vec![path; 25], &[0.1, 0.5, 0.9]).unwrap();
        assert_eq!(b.lower_p05, b.lower_p95);
        assert_eq!(b.upper_p05, b.upper_p95);
        assert!(tail_dependence_bands(&vec![vec![0.5; 10]; 19], &[0.5]).is_err());
    }

    #[test]
    fn ar1_spec_validation() {
        assert!(Ar1Spec::new(1.0, 0.0, 1.0).is_err());
        assert!(Ar1Spec::new(0.5, 0.0, 0.0).is_err());
        let s = Ar1Spec::new(0.5f64, 1.0, 1.0).unwrap();
        assert_eq!(s.stationary_mean(), 2.0);
        assert!((s.stationary_variance() - 4.0 / 3.0).abs() < 1e-15);
    }
}
