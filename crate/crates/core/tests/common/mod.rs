//! Independent oracles shared by the integration tests. Nothing here calls
//! into the quadrature or sampling code paths it is used to check.
#![allow(dead_code, clippy::excessive_precision)]

use autocopula_core::nig::{nig_pdf, NigParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use statrs::distribution::ContinuousCDF;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval. A panel is accepted
/// when the Gauss/Kronrod discrepancy, which overstates the Kronrod error by
/// orders of magnitude on smooth integrands, is below `tol`.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth > 50 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol, depth + 1) + rec(f, m, b, tol, depth + 1)
    }
    rec(&f, a, b, tol, 0)
}

/// `∫_c^∞ f` via `x = c + s t/(1-t)`.
pub fn integrate_right<F: Fn(f64) -> f64>(f: F, c: f64, s: f64, tol: f64) -> f64 {
    adaptive_integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = c + s * t / (1.0 - t);
            let v = f(x) * s / ((1.0 - t) * (1.0 - t));
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_{-∞}^∞ f`, split at `c`.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, c: f64, s: f64, tol: f64) -> f64 {
    integrate_right(&f, c, s, tol) + integrate_right(|x| f(2.0 * c - x), c, s, tol)
}

pub fn nig_scale(p: &NigParams<f64>) -> f64 {
    p.delta() + 1.0 / p.alpha()
}

/// `∫ x^k f(x) dx` about `center`.
pub fn nig_raw_moment(p: &NigParams<f64>, k: i32, center: f64) -> f64 {
    let sd = autocopula_core::nig::moments_from_params(p).variance.sqrt();
    let tol = 1e-13 * sd.powi(k).max(center.abs().powi(k));
    integrate_line(
        |x| (x - center).powi(k) * nig_pdf(p, x),
        p.mu(),
        nig_scale(p),
        tol,
    )
}

/// Draws from the normal variance–mean mixture representation.
pub fn nig_mixture_sample(p: &NigParams<f64>, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mean = p.delta() / p.gamma();
    let shape = p.delta() * p.delta();
    let ig = InverseGaussian::new(mean, shape).unwrap();
    (0..n)
        .map(|_| {
            let y: f64 = ig.sample(rng);
            let z: f64 = StandardNormal.sample(rng);
            p.mu() + p.beta() * y + y.sqrt() * z
        })
        .collect()
}

/// Random valid parameters with moderate tails.
pub fn random_params(rng: &mut ChaCha8Rng) -> NigParams<f64> {
    let alpha = 0.2 * 25f64.powf(rng.random::<f64>());
    let beta = alpha * (rng.random::<f64>() * 1.8 - 0.9);
    let delta = 0.2 * 25f64.powf(rng.random::<f64>());
    let mu = rng.random::<f64>() * 6.0 - 3.0;
    NigParams::new(mu, alpha, beta, delta).unwrap()
}

/// I.i.d. pairs from a Gaussian copula with correlation `rho`.
pub fn gaussian_copula_pairs(rho: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let norm = statrs::distribution::Normal::standard();
    (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(rng);
            let e: f64 = StandardNormal.sample(rng);
            let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * e;
            (norm.cdf(z1), norm.cdf(z2))
        })
        .collect()
}

/// I.i.d. pairs from a Student-t copula (shared chi-square mixing), which
/// has symmetric tail dependence.
pub fn t_copula_pairs(rho: f64, dof: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let t = statrs::distribution::StudentsT::new(0.0, 1.0, dof).unwrap();
    let chi = rand_distr::ChiSquared::new(dof).unwrap();
    (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(rng);
            let e: f64 = StandardNormal.sample(rng);
            let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * e;
            let s = (chi.sample(rng) / dof).sqrt();
            (t.cdf(z1 / s), t.cdf(z2 / s))
        })
        .collect()
}
