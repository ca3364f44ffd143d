//! Sample statistics used by calibration, ensemble summaries and diagnostics.

use crate::scalar::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_usize_lossy(xs.len())
}

/// Central moment `(1/n) Σ (x - x̄)^k`.
pub fn central_moment<T: Real>(xs: &[T], center: T, k: i32) -> T {
    xs.iter().map(|&x| (x - center).powi(k)).sum::<T>() / T::from_usize_lossy(xs.len())
}

/// Population variance (divisor `n`).
pub fn variance<T: Real>(xs: &[T]) -> T {
    central_moment(xs, mean(xs), 2)
}

/// Linear-interpolation quantile of already sorted data (type 7).
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let p = p.max(T::zero()).min(T::one());
    let h = p * T::from_usize_lossy(n - 1);
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = h - T::from_usize_lossy(lo);
    if hi == lo || frac == T::zero() {
        return sorted[lo];
    }
    // Keeps results monotone in p and exact when neighbours are equal.
    let q = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    q.max(sorted[lo]).min(sorted[hi])
}

pub fn sort_total<T: Real>(xs: &mut [T]) {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
}

/// Quantiles at each level of `levels` (probabilities in `[0, 1]`).
pub fn quantiles<T: Real>(xs: &[T], levels: &[T]) -> Vec<T> {
    let mut sorted = xs.to_vec();
    sort_total(&mut sorted);
    levels
        .iter()
        .map(|&p| quantile_sorted(&sorted, p))
        .collect()
}

/// Lag-one sample autocorrelation.
pub fn lag1_autocorrelation<T: Real>(xs: &[T]) -> T {
    let m = mean(xs);
    let denom: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    let num: T = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / denom
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against the uniform law on `[0, 1]`.
pub fn ks_uniform<T: Real>(xs: &[T]) -> KsResult {
    let mut s: Vec<f64> = xs.iter().map(|x| x.as_f64()).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    let en = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    }
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample<T: Real>(a: &[T], b: &[T]) -> KsResult {
    let mut x: Vec<f64> = a.iter().map(|v| v.as_f64()).collect();
    let mut y: Vec<f64> = b.iter().map(|v| v.as_f64()).collect();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d),
    }
}
