//! Special functions: the modified Bessel function of the second kind of order
//! one, and the standard normal distribution function and its inverse.

use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponentially scaled modified Bessel function `e^x K_1(x)` for `x > 0`.
///
/// Uses the ascending series for `x <= 2` and Steed's continued fraction
/// (Temme's CF2) above. Returns `+inf` at zero and `NaN` for negative input.
pub fn bessel_k1_scaled<T: Real>(x: T) -> T {
    if x.is_nan() || x < T::zero() {
        return T::nan();
    }
    if x == T::zero() {
        return T::infinity();
    }
    if x.is_infinite() {
        return T::zero();
    }
    if x <= T::lit(2.0) {
        k1_series(x) * x.exp()
    } else {
        k1_scaled_cf2(x)
    }
}

/// `ln K_1(x)`, finite for every finite positive `x`.
pub fn ln_bessel_k1<T: Real>(x: T) -> T {
    bessel_k1_scaled(x).ln() - x
}

fn k1_series<T: Real>(x: T) -> T {
    let half = x / T::lit(2.0);
    let q = half * half;
    let eps = T::epsilon();

    // I_1(x) = (x/2) sum q^k / (k! (k+1)!)
    // sum_psi = sum (psi(k+1) + psi(k+2)) q^k / (k! (k+1)!)
    let gamma = T::lit(EULER_GAMMA);
    let mut term = T::one();
    let mut harmonic = T::zero();
    let mut i_sum = T::zero();
    let mut psi_sum = T::zero();
    let mut k = 0usize;
    loop {
        let kf = T::from_usize_lossy(k);
        let harmonic_next = harmonic + T::one() / (kf + T::one());
        let psi_pair = (harmonic - gamma) + (harmonic_next - gamma);
        i_sum = i_sum + term;
        psi_sum = psi_sum + psi_pair * term;
        if term.abs() <= eps * i_sum.abs() && k > 2 {
            break;
        }
        k += 1;
        let kf = T::from_usize_lossy(k);
        term = term * q / (kf * (kf + T::one()));
        harmonic = harmonic_next;
        if k > 500 {
            break;
        }
    }
    let i1 = half * i_sum;
    T::one() / x + half.ln() * i1 - x / T::lit(4.0) * psi_sum
}

fn k1_scaled_cf2<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let mut b = two * (T::one() + x);
    let mut d = T::one() / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1 = T::lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 1..10_000usize {
        let fi = T::from_usize_lossy(i);
        a = a - two * fi;
        c = -a * c / (fi + T::one());
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < eps {
            break;
        }
    }
    h = a1 * h;
    let k0 = (T::PI() / (two * x)).sqrt() / s;
    k0 * (x + T::lit(0.5) - h) / x
}

/// Standard normal distribution function.
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::lit(0.5 * statrs::function::erf::erfc(-x.as_f64() / std::f64::consts::SQRT_2))
}

/// Standard normal quantile function for `p` in `(0, 1)`.
pub fn norm_inv_cdf<T: Real>(p: T) -> T {
    T::lit(-std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p.as_f64()))
}
