//! Closed-form copulas used as reference models.

use super::{Autocopula, Conditioning};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::roots::brent;
use crate::scalar::Real;
use crate::special::{norm_cdf, norm_inv_cdf};

/// `Π(u₁, u₂) = u₁u₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Independence;

impl<T: Real> Autocopula<T> for Independence {
    fn cdf(&self, u1: T, u2: T) -> T {
        u1 * u2
    }
    fn conditional(&self, _u1: T, u: T, _mode: Conditioning) -> Result<T> {
        Ok(u)
    }
    fn sample_conditional(&self, _u1: T, w: T, _mode: Conditioning) -> Result<T> {
        Ok(w)
    }
}

/// `M(u₁, u₂) = min(u₁, u₂)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Comonotone;

impl<T: Real> Autocopula<T> for Comonotone {
    fn cdf(&self, u1: T, u2: T) -> T {
        u1.min(u2)
    }
    fn conditional(&self, u1: T, u: T, mode: Conditioning) -> Result<T> {
        match mode {
            Conditioning::Cumulative => {
                positive(u1)?;
                Ok(u.min(u1) / u1)
            }
            Conditioning::Partial => Ok(if u1 < u { T::one() } else { T::zero() }),
        }
    }
    fn sample_conditional(&self, u1: T, w: T, mode: Conditioning) -> Result<T> {
        match mode {
            Conditioning::Cumulative => {
                positive(u1)?;
                Ok(w * u1)
            }
            Conditioning::Partial => Ok(u1),
        }
    }
}

/// Bivariate Gaussian copula with correlation `rho`.
#[derive(Debug, Clone)]
pub struct Gaussian<T> {
    rho: T,
    gl: GaussLegendre<T>,
}

impl<T: Real> Gaussian<T> {
    pub fn new(rho: T) -> Result<Self> {
        if !(rho.abs() < T::one()) {
            return Err(Error::InvalidParams(format!(
                "correlation must satisfy |rho| < 1, got {rho}"
            )));
        }
        Ok(Self {
            rho,
            gl: GaussLegendre::new(20),
        })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// `Φ₂(h, k; ρ) = Φ(h)Φ(k) + ∫₀^ρ φ₂(h, k; r) dr`, integrated over eight
    /// Gauss–Legendre panels.
    fn bvn(&self, h: T, k: T) -> T {
        let base = norm_cdf(h) * norm_cdf(k);
        if self.rho == T::zero() || !h.is_finite() || !k.is_finite() {
            return base;
        }
        let dens = |r: T| {
            let s = T::one() - r * r;
            (-(h * h - T::lit(2.0) * r * h * k + k * k) / (T::lit(2.0) * s)).exp()
                / (T::TAU() * s.sqrt())
        };
        let panels = 8;
        let w = self.rho / T::from_usize_lossy(panels);
        let extra: T = (0..panels)
            .map(|p| {
                let a = w * T::from_usize_lossy(p);
                self.gl.integrate(dens, a, a + w)
            })
            .sum();
        (base + extra).max(T::zero()).min(T::one())
    }

    /// `∂C/∂u₁ = Φ((Φ⁻¹(u) − ρΦ⁻¹(u₁))/√(1−ρ²))`.
    fn partial(&self, u1: T, u: T) -> T {
        let s = (T::one() - self.rho * self.rho).sqrt();
        norm_cdf((norm_inv_cdf(u) - self.rho * norm_inv_cdf(u1)) / s)
    }
}

impl<T: Real> Autocopula<T> for Gaussian<T> {
    fn cdf(&self, u1: T, u2: T) -> T {
        if u1 <= T::zero() || u2 <= T::zero() {
            return T::zero();
        }
        if u1 >= T::one() {
            return u2.min(T::one());
        }
        if u2 >= T::one() {
            return u1;
        }
        self.bvn(norm_inv_cdf(u1), norm_inv_cdf(u2))
    }

    fn conditional(&self, u1: T, u: T, mode: Conditioning) -> Result<T> {
        match mode {
            Conditioning::Cumulative => {
                positive(u1)?;
                Ok((self.cdf(u1, u) / u1).min(T::one()))
            }
            Conditioning::Partial => Ok(self.partial(u1, u)),
        }
    }

    fn sample_conditional(&self, u1: T, w: T, mode: Conditioning) -> Result<T> {
        match mode {
            Conditioning::Partial => {
                let s = (T::one() - self.rho * self.rho).sqrt();
                Ok(norm_cdf(self.rho * norm_inv_cdf(u1) + s * norm_inv_cdf(w)))
            }
            Conditioning::Cumulative => {
                positive(u1)?;
                let f = |u: T| self.cdf(u1, u) / u1 - w;
                brent(f, T::zero(), T::one(), T::lit(1e-12), 200)
            }
        }
    }
}

fn positive<T: Real>(u1: T) -> Result<()> {
    if u1 > T::zero() && u1 <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "conditioning value must be in (0, 1], got {u1}"
        )))
    }
}
