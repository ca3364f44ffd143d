//! Normal inverse Gaussian (NIG) distribution.
//!
//! A variable `X ~ NIG(α, β, μ, δ)` is a normal variance–mean mixture
//! `X | Y = y ~ N(μ + βy, y)` with `Y` inverse Gaussian, `γ = √(α² − β²)`,
//! `0 ≤ |β| < α` and `δ > 0`. The density involves the modified Bessel
//! function `K₁` and is evaluated in log space; the distribution function has
//! no closed form and is obtained by composite Gauss–Legendre quadrature over
//! a table of panels that is built once per parameter set (see [`Nig`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::quadrature::GaussLegendre;
use crate::roots::brent;
use crate::scalar::Real;
use crate::special::{bessel_k1_scaled, ln_bessel_k1};
use crate::stats;

/// Probabilities below this (or above its complement) are clamped before inversion.
pub const QUANTILE_CLAMP: f64 = 1e-12;

const PANEL_ORDER: usize = 20;
/// Rule for Newton corrections spanning at most 1/16 of a panel.
const SHORT_ORDER: usize = 6;
const TAIL_MASS_CUTOFF: f64 = 1e-18;
const MAX_PANELS_PER_SIDE: usize = 20_000;

/// Parameters of a NIG distribution. `gamma` is derived and never serialized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "NigParamsRepr<T>",
    into = "NigParamsRepr<T>",
    bound = "T: Real"
)]
pub struct NigParams<T> {
    mu: T,
    alpha: T,
    beta: T,
    delta: T,
    gamma: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct NigParamsRepr<T> {
    mu: T,
    alpha: T,
    beta: T,
    delta: T,
}

impl<T: Real> TryFrom<NigParamsRepr<T>> for NigParams<T> {
    type Error = Error;
    fn try_from(r: NigParamsRepr<T>) -> Result<Self> {
        NigParams::new(r.mu, r.alpha, r.beta, r.delta)
    }
}

impl<T: Real> From<NigParams<T>> for NigParamsRepr<T> {
    fn from(p: NigParams<T>) -> Self {
        NigParamsRepr {
            mu: p.mu,
            alpha: p.alpha,
            beta: p.beta,
            delta: p.delta,
        }
    }
}

impl<T: Real> NigParams<T> {
    pub fn new(mu: T, alpha: T, beta: T, delta: T) -> Result<Self> {
        let finite = [mu, alpha, beta, delta].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(delta > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if !(beta.abs() < alpha) {
            return Err(Error::InvalidParams(format!(
                "require |beta| < alpha, got alpha={alpha}, beta={beta}"
            )));
        }
        let gamma = ((alpha - beta) * (alpha + beta)).sqrt();
        if !(gamma > T::zero()) {
            return Err(Error::InvalidParams("gamma underflows to zero".into()));
        }
        Ok(Self {
            mu,
            alpha,
            beta,
            delta,
            gamma,
        })
    }

    pub fn mu(&self) -> T {
        self.mu
    }
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn delta(&self) -> T {
        self.delta
    }
    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Same `(μ, α, β)` with a different scale `δ`.
    pub fn with_delta(&self, delta: T) -> Result<Self> {
        Self::new(self.mu, self.alpha, self.beta, delta)
    }

    /// Parameters of the inverse Gaussian mixing law, `IG(δγ, γ²)`.
    pub fn mixing(&self) -> IgParams<T> {
        IgParams {
            alpha_ig: self.delta * self.gamma,
            beta_ig: self.gamma * self.gamma,
        }
    }
}

/// Inverse Gaussian law with density `α/√(2πβ) y^{-3/2} exp(-(α-βy)²/(2βy))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IgParams<T> {
    pub alpha_ig: T,
    pub beta_ig: T,
}

impl<T: Real> IgParams<T> {
    pub fn new(alpha_ig: T, beta_ig: T) -> Result<Self> {
        if !(alpha_ig > T::zero() && beta_ig > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "inverse Gaussian parameters must be positive, got ({alpha_ig}, {beta_ig})"
            )));
        }
        Ok(Self { alpha_ig, beta_ig })
    }
}

pub fn ig_pdf<T: Real>(p: &IgParams<T>, y: T) -> Result<T> {
    if !(y > T::zero()) {
        return Err(Error::Domain(format!(
            "inverse Gaussian density needs y > 0, got {y}"
        )));
    }
    let (a, b) = (p.alpha_ig, p.beta_ig);
    let two = T::lit(2.0);
    let dev = a - b * y;
    let ln =
        a.ln() - (two * T::PI() * b).ln() / two - T::lit(1.5) * y.ln() - dev * dev / (two * b * y);
    Ok(ln.exp())
}

/// Mean, variance, skewness and excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentSet<T> {
    pub mean: T,
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

impl<T: Real> MomentSet<T> {
    /// Checks the conditions under which a NIG law with these moments exists.
    pub fn check_admissible(&self) -> Result<()> {
        if !(self.variance > T::zero()) {
            return Err(Error::InadmissibleMoments(format!(
                "variance must be positive, got {}",
                self.variance
            )));
        }
        let lhs = T::lit(3.0) * self.excess_kurtosis;
        let rhs = T::lit(5.0) * self.skewness * self.skewness;
        if !(lhs > rhs) {
            return Err(Error::InadmissibleMoments(format!(
                "need 3*excess_kurtosis > 5*skewness^2, got {lhs} <= {rhs}"
            )));
        }
        Ok(())
    }
}

pub fn nig_ln_pdf<T: Real>(p: &NigParams<T>, x: T) -> T {
    let dx = x - p.mu;
    let r = p.delta.hypot(dx);
    let z = p.alpha * r;
    (p.delta * p.alpha / T::PI()).ln() + p.delta * p.gamma + p.beta * dx + ln_bessel_k1(z) - r.ln()
}

pub fn nig_pdf<T: Real>(p: &NigParams<T>, x: T) -> T {
    let dx = x - p.mu;
    let r = p.delta.hypot(dx);
    let z = p.alpha * r;
    let e = p.delta * p.gamma + p.beta * dx - z;
    // e ≤ 0 by Cauchy–Schwarz, so this never overflows
    p.delta * p.alpha / T::PI() * e.exp() * bessel_k1_scaled(z) / r
}

/// Distribution function at `x`. Builds a panel table on each call; use
/// [`Nig`] for repeated evaluation.
pub fn nig_cdf<T: Real>(p: &NigParams<T>, x: T) -> T {
    Nig::new(*p).cdf(x)
}

/// Quantile function. Probabilities within [`QUANTILE_CLAMP`] of 0 or 1 are
/// clamped; values outside `[0, 1]` are a domain error.
pub fn nig_inv_cdf<T: Real>(p: &NigParams<T>, q: T) -> Result<T> {
    Nig::new(*p).inv_cdf(q)
}

pub fn moments_from_params<T: Real>(p: &NigParams<T>) -> MomentSet<T> {
    let (a, b, d, g) = (p.alpha, p.beta, p.delta, p.gamma);
    let three = T::lit(3.0);
    let dg = d * g;
    MomentSet {
        mean: p.mu + d * b / g,
        variance: d * a * a / (g * g * g),
        skewness: three * b / (a * dg.sqrt()),
        excess_kurtosis: three * (T::one() + T::lit(4.0) * b * b / (a * a)) / dg,
    }
}

pub fn params_from_moments<T: Real>(m: &MomentSet<T>) -> Result<NigParams<T>> {
    m.check_admissible()?;
    let s2 = m.skewness * m.skewness;
    let denom = T::lit(3.0) * m.excess_kurtosis - T::lit(4.0) * s2;
    // δγ and ρ = β/α follow from skewness and kurtosis alone.
    let dg = T::lit(9.0) / denom;
    let rho2 = s2 / denom;
    let rho = rho2.sqrt() * m.skewness.signum();
    let one_minus = T::one() - rho2;
    let gamma = (dg / (m.variance * one_minus)).sqrt();
    let alpha = gamma / one_minus.sqrt();
    let beta = rho * alpha;
    let delta = dg / gamma;
    let mu = m.mean - delta * beta / gamma;
    NigParams::new(mu, alpha, beta, delta)
}

/// Sample moments with divisor `n`: skewness `m₃/m₂^{3/2}`, excess kurtosis `m₄/m₂² − 3`.
pub fn sample_moments<T: Real>(data: &[T]) -> Result<MomentSet<T>> {
    if data.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two observations".into(),
        ));
    }
    let mean = stats::mean(data);
    let m2 = stats::central_moment(data, mean, 2);
    let m3 = stats::central_moment(data, mean, 3);
    let m4 = stats::central_moment(data, mean, 4);
    Ok(MomentSet {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(T::lit(1.5)),
        excess_kurtosis: m4 / (m2 * m2) - T::lit(3.0),
    })
}

/// `Σ log f(xᵢ)`. Summed over fixed-size chunks in index order, so the result
/// does not depend on the thread count.
pub fn log_likelihood<T: Real>(p: &NigParams<T>, data: &[T]) -> Result<T> {
    if data.is_empty() {
        return Err(Error::InsufficientData(
            "log-likelihood of empty data".into(),
        ));
    }
    Ok(log_likelihood_unchecked(p, data))
}

fn log_likelihood_unchecked<T: Real>(p: &NigParams<T>, data: &[T]) -> T {
    let partial: Vec<T> = data
        .par_chunks(4096)
        .map(|c| c.iter().map(|&x| nig_ln_pdf(p, x)).sum::<T>())
        .collect();
    partial.into_iter().sum()
}

pub fn fit_moment_matching<T: Real>(data: &[T]) -> Result<NigParams<T>> {
    let m = sample_moments(data)?;
    params_from_moments(&m)
}

#[derive(Debug, Clone)]
pub struct MleFit<T> {
    pub params: NigParams<T>,
    pub log_likelihood: T,
    pub iterations: usize,
}

/// Maximum likelihood by Nelder–Mead over the unconstrained coordinates
/// `((μ − μ₀)/s, ln α, atanh(β/α), ln δ)`, which cover the valid region
/// exactly. The objective is the mean negative log-likelihood, so `opts.ftol`
/// is a per-observation tolerance.
pub fn fit_mle<T: Real>(
    data: &[T],
    init: &NigParams<T>,
    opts: &NelderMeadOptions<T>,
) -> Result<MleFit<T>> {
    if data.is_empty() {
        return Err(Error::InsufficientData("MLE on empty data".into()));
    }
    let n = T::from_usize_lossy(data.len());
    let scale = {
        let v = stats::variance(data).sqrt();
        if v > T::zero() && v.is_finite() {
            v
        } else {
            T::one()
        }
    };
    let mu0 = init.mu;
    let decode = |th: &[T]| -> Option<NigParams<T>> {
        let alpha = th[1].exp();
        let beta = alpha * th[2].tanh();
        NigParams::new(mu0 + scale * th[0], alpha, beta, th[3].exp()).ok()
    };
    let objective = |th: &[T]| -> T {
        match decode(th) {
            Some(p) => -log_likelihood_unchecked(&p, data) / n,
            None => T::infinity(),
        }
    };
    let start = [
        T::zero(),
        init.alpha.ln(),
        (init.beta / init.alpha).atanh(),
        init.delta.ln(),
    ];
    let step = [T::lit(0.1); 4];
    let m = nelder_mead(objective, &start, &step, opts);
    let params =
        decode(&m.x).ok_or_else(|| Error::InvalidParams("optimizer left valid region".into()))?;
    let ll = -m.value * n;
    if !m.converged {
        return Err(Error::NonConvergence {
            iterations: m.iterations,
            best: vec![
                params.mu.as_f64(),
                params.alpha.as_f64(),
                params.beta.as_f64(),
                params.delta.as_f64(),
            ],
            objective: ll.as_f64(),
        });
    }
    Ok(MleFit {
        params,
        log_likelihood: ll,
        iterations: m.iterations,
    })
}

/// A NIG distribution with a precomputed quadrature table.
///
/// Panel edges grow geometrically away from `μ` (capped by the exponential
/// tail scale on each side) until the remaining tail mass is negligible. The
/// cumulative mass at each edge is stored, so a distribution function
/// evaluation costs one Gauss–Legendre panel and a quantile a short Brent
/// search inside one panel.
#[derive(Debug, Clone)]
pub struct Nig<T> {
    params: NigParams<T>,
    rule: GaussLegendre<T>,
    short_rule: GaussLegendre<T>,
    edges: Vec<T>,
    cum: Vec<T>,
    total: T,
}

impl<T: Real> Nig<T> {
    pub fn new(params: NigParams<T>) -> Self {
        let rule = GaussLegendre::new(PANEL_ORDER);
        let p = params;
        let quarter = T::lit(0.25);
        let h0 = quarter * p.delta.min(T::one() / p.alpha);
        let tail_ok = |x: T, rate: T| -> bool {
            let d = (x - p.mu).abs();
            d > p.delta + T::one() / p.alpha
                && nig_ln_pdf(&p, x) + (T::lit(2.0) / rate).ln() < T::lit(TAIL_MASS_CUTOFF).ln()
        };
        let grow = |dist: T, rate: T| -> T { (quarter * dist).max(h0).min(T::lit(4.0) / rate) };

        let rate_right = p.alpha - p.beta;
        let rate_left = p.alpha + p.beta;
        let mut right = vec![p.mu];
        let mut x = p.mu;
        for _ in 0..MAX_PANELS_PER_SIDE {
            x = x + grow(x - p.mu, rate_right);
            right.push(x);
            if tail_ok(x, rate_right) {
                break;
            }
        }
        let mut left = Vec::new();
        let mut x = p.mu;
        for _ in 0..MAX_PANELS_PER_SIDE {
            x = x - grow(p.mu - x, rate_left);
            left.push(x);
            if tail_ok(x, rate_left) {
                break;
            }
        }
        left.reverse();
        left.extend(right);
        let edges = left;

        let mut cum = Vec::with_capacity(edges.len());
        let mut acc = T::zero();
        cum.push(acc);
        for w in edges.windows(2) {
            acc = acc + rule.integrate(|t| nig_pdf(&p, t), w[0], w[1]);
            cum.push(acc);
        }
        let total = acc;
        for c in cum.iter_mut() {
            *c = *c / total;
        }
        let last = cum.len() - 1;
        cum[last] = T::one();
        Self {
            params,
            rule,
            short_rule: GaussLegendre::new(SHORT_ORDER),
            edges,
            cum,
            total,
        }
    }

    pub fn params(&self) -> &NigParams<T> {
        &self.params
    }

    /// Mass captured by the panel table before normalization; equals one up to
    /// quadrature error and the neglected tails.
    pub fn table_mass(&self) -> T {
        self.total
    }

    /// Range covered by the panel table.
    pub fn support(&self) -> (T, T) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }

    pub fn pdf(&self, x: T) -> T {
        nig_pdf(&self.params, x)
    }

    pub fn ln_pdf(&self, x: T) -> T {
        nig_ln_pdf(&self.params, x)
    }

    fn panel_of(&self, x: T) -> usize {
        // edges[k] <= x < edges[k+1]
        let k = self.edges.partition_point(|e| *e <= x);
        k.saturating_sub(1).min(self.edges.len() - 2)
    }

    pub fn cdf(&self, x: T) -> T {
        if x.is_nan() {
            return T::nan();
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return T::zero();
        }
        if x >= hi {
            return T::one();
        }
        let k = self.panel_of(x);
        self.cdf_in_panel(k, x)
    }

    fn cdf_in_panel(&self, k: usize, x: T) -> T {
        let p = &self.params;
        let part = self.rule.integrate(|t| nig_pdf(p, t), self.edges[k], x) / self.total;
        (self.cum[k] + part).min(self.cum[k + 1]).max(self.cum[k])
    }

    pub fn inv_cdf(&self, q: T) -> Result<T> {
        if q.is_nan() || q < T::zero() || q > T::one() {
            return Err(Error::Domain(format!(
                "quantile level must lie in [0, 1], got {q}"
            )));
        }
        let clamp = T::lit(QUANTILE_CLAMP);
        let q = q.max(clamp).min(T::one() - clamp);
        // cum[k] <= q <= cum[k+1]
        let k = self
            .cum
            .partition_point(|c| *c < q)
            .saturating_sub(1)
            .min(self.edges.len() - 2);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        if self.cum[k] == q {
            return Ok(a);
        }
        if self.cum[k + 1] == q {
            return Ok(b);
        }
        let xtol = T::lit(1e-14) * (a.abs().max(b.abs()) + (b - a));
        self.newton_in_panel(k, q, xtol).map_or_else(
            || brent(|x| self.cdf_in_panel(k, x) - q, a, b, xtol, 200),
            Ok,
        )
    }

    /// Bracketed Newton on panel `k`. The CDF is carried forward by
    /// integrating over each (shrinking) step instead of from the panel edge.
    fn newton_in_panel(&self, k: usize, q: T, xtol: T) -> Option<T> {
        let p = &self.params;
        let (mut lo, mut hi) = (self.edges[k], self.edges[k + 1]);
        let width = hi - lo;
        let frac = (q - self.cum[k]) / (self.cum[k + 1] - self.cum[k]);
        let mut x = lo + (hi - lo) * frac;
        let mut fx = self.cdf_in_panel(k, x);
        for _ in 0..60 {
            let g = fx - q;
            if g.abs() <= T::lit(4.0) * T::epsilon() {
                return Some(x);
            }
            if g < T::zero() {
                lo = x;
            } else {
                hi = x;
            }
            let d = nig_pdf(p, x) / self.total;
            let mut nx = x - g / d;
            if !(nx > lo && nx < hi) {
                nx = lo + (hi - lo) / T::lit(2.0);
            }
            if (nx - x).abs() <= xtol || hi - lo <= xtol {
                return Some(nx);
            }
            let rule = if (nx - x).abs() * T::lit(16.0) <= width {
                &self.short_rule
            } else {
                &self.rule
            };
            fx = fx + rule.integrate(|t| nig_pdf(p, t), x, nx) / self.total;
            x = nx;
        }
        None
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn std_sym() -> NigParams<f64> {
        NigParams::<f64>::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn wide_scale_mle() -> NigParams<f64> {
        NigParams::<f64>::new(0.0980, 0.0131, 0.0122, 2.3799).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(NigParams::<f64>::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(NigParams::<f64>::new(0.0, 1.0, -1.5, 1.0).is_err());
        assert!(NigParams::<f64>::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(NigParams::<f64>::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_is_derived() {
        let p = NigParams::<f64>::new(0.3, 2.0, -1.2, 0.7).unwrap();
        assert!((p.gamma() - (4.0f64 - 1.44).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ig_density_edges() {
        let p = IgParams::new(1.0, 1.0).unwrap();
        assert_eq!(ig_pdf(&p, 1e-8).unwrap(), 0.0);
        assert!(ig_pdf(&p, 0.0).is_err());
        assert!(ig_pdf(&p, -1.0).is_err());
    }

    #[test]
    fn symmetric_density_at_center() {
        // e K1(1) / pi, reference from an arbitrary-precision library.
        let want = 0.5208038299916700464;
        assert!((nig_pdf(&std_sym(), 0.0) - want).abs() < 1e-14);
        let p = NigParams::<f64>::new(1.5, 2.0, 0.0, 0.4).unwrap();
        for s in [0.1, 1.0, 7.0, 30.0] {
            assert!(
                (nig_pdf(&p, 1.5 + s) - nig_pdf(&p, 1.5 - s)).abs() <= 1e-15 * nig_pdf(&p, 1.5 + s)
            );
        }
    }

    #[test]
    fn density_never_nan() {
        let p = wide_scale_mle();
        for x in [-1e300, -1e8, 0.0, 1e8, 1e300] {
            let f = nig_pdf(&p, x);
            assert!(!f.is_nan() && f >= 0.0, "x={x}");
        }
    }

    #[test]
    fn symmetric_cdf_at_center() {
        let d = Nig::new(NigParams::<f64>::new(0.7, 3.0, 0.0, 0.2).unwrap());
        assert!((d.cdf(0.7) - 0.5).abs() < 1e-12);
        assert!((d.inv_cdf(0.5).unwrap() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn table_mass_is_one() {
        for p in [
            std_sym(),
            wide_scale_mle(),
            NigParams::<f64>::new(0.0, 50.0, 49.0, 0.01).unwrap(),
        ] {
            let d = Nig::new(p);
            assert!(
                (d.table_mass() - 1.0).abs() < 1e-10,
                "{p:?}: {}",
                d.table_mass()
            );
        }
    }

    #[test]
    fn quantile_domain() {
        let d = Nig::new(std_sym());
        assert!(d.inv_cdf(-0.1).is_err());
        assert!(d.inv_cdf(1.1).is_err());
        assert!(d.inv_cdf(f64::NAN).is_err());
        let lo = d.inv_cdf(0.0).unwrap();
        let hi = d.inv_cdf(1.0).unwrap();
        assert!((d.cdf(lo) - QUANTILE_CLAMP).abs() < 1e-14);
        assert!((d.cdf(hi) - (1.0 - QUANTILE_CLAMP)).abs() < 1e-14);
    }

    #[test]
    fn moments_symmetric_cases() {
        let m = moments_from_params(&std_sym());
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.skewness, 0.0);
        assert!((m.variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inadmissible_moments_named() {
        let m = MomentSet {
            mean: 0.0,
            variance: 1.0,
            skewness: 1.0,
            excess_kurtosis: 0.1,
        };
        match params_from_moments(&m) {
            Err(Error::InadmissibleMoments(msg)) => assert!(msg.contains("excess_kurtosis")),
            other => panic!("unexpected {other:?}"),
        }
        let m = MomentSet {
            mean: 0.0,
            variance: 0.0,
            skewness: 0.0,
            excess_kurtosis: 1.0,
        };
        assert!(params_from_moments(&m).is_err());
    }

    #[test]
    fn moment_roundtrip_wide_scale_moment_matching_fit() {
        let p = NigParams::<f64>::new(0.3244, 0.0231, 0.0210, 2.7129).unwrap();
        let m = moments_from_params(&p);
        let q = params_from_moments(&m).unwrap();
        let m2 = moments_from_params(&q);
        for (a, b) in [
            (m.mean, m2.mean),
            (m.variance, m2.variance),
            (m.skewness, m2.skewness),
            (m.excess_kurtosis, m2.excess_kurtosis),
        ] {
            assert!(((a - b) / a).abs() < 1e-9);
        }
        assert!(((q.alpha() - 0.0231) / 0.0231).abs() < 1e-9);
        assert!(((q.delta() - 2.7129) / 2.7129).abs() < 1e-9);
    }

    #[test]
    fn log_likelihood_single_point() {
        let ll = log_likelihood(&std_sym(), &[0.0]).unwrap();
        assert!((ll - (-0.6523818340601525051)).abs() < 1e-14);
        assert!(log_likelihood(&std_sym(), &[]).is_err());
    }

    #[test]
    fn symmetric_sample_gives_zero_beta() {
        let data: Vec<f64> = [-5.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 5.0].to_vec();
        let p = fit_moment_matching(&data).unwrap();
        assert!(p.beta().abs() < 1e-12 * p.alpha());
        // A two-point set has excess kurtosis -2 and admits no NIG fit.
        assert!(matches!(
            fit_moment_matching(&[-1.0, 1.0, -1.0, 1.0]),
            Err(Error::InadmissibleMoments(_))
        ));
    }

    #[test]
    fn serde_roundtrip_recomputes_gamma() {
        let p = NigParams::<f64>::new(0.1, 2.0, 0.5, 1.3).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(!s.contains("gamma"));
        let q: NigParams<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"mu":0.0,"alpha":1.0,"beta":2.0,"delta":1.0}"#;
        assert!(serde_json::from_str::<NigParams<f64>>(bad).is_err());
    }

    #[test]
    fn f32_density_tracks_f64() {
        let p32 = NigParams::<f32>::new(0.0, 1.0, 0.3, 1.0).unwrap();
        let p64 = NigParams::<f64>::new(0.0, 1.0, 0.3, 1.0).unwrap();
        for x in [-3.0, 0.0, 2.0] {
            let a = nig_pdf(&p32, x as f32) as f64;
            let b = nig_pdf(&p64, x);
            assert!(((a - b) / b).abs() < 1e-5);
        }
        let d = Nig::new(p32);
        assert!((d.cdf(d.inv_cdf(0.3).unwrap()) - 0.3).abs() < 1e-5);
    }
}
