//! Synthetic daily series from a known model, for end-to-end runs.
//!
//! Ground truth:
//! * marginal on day `t` is NIG(μ, α, β, δ_m) with δ_m fixed within the
//!   calendar month `m`;
//! * `ν_m = √δ_m` follows `ν_m = a ν_{m−1} + (1 − a)(ν̄ + A cos(2π(k_m − 1)/12)) + s ε_m`
//!   with `k_m` the month of year and `ε_m` standard normal, floored at 0.2;
//! * the PIT values `v_t` form a Markov chain whose consecutive pairs have a
//!   Student-t copula with correlation ρ and ν degrees of freedom, which has
//!   symmetric tail dependence. The next value is drawn from the exact
//!   conditional: with `z = t_ν⁻¹(v_t)`,
//!   `z' = ρ z + √((ν + z²)(1 − ρ²)/(ν + 1)) · T_{ν+1}`, `v_{t+1} = t_ν(z')`.

use std::io::Write;
use std::path::Path;

use autocopula_core::Nig;
use autocopula_core::{MonthKey, NigParams};
use chrono::{Datelike, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub start: NaiveDate,
    pub years: u32,
    pub seed: u64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Mean level, seasonal amplitude, AR coefficient and shock size of ν.
    pub nu_mean: f64,
    pub nu_amplitude: f64,
    pub nu_ar: f64,
    pub nu_shock: f64,
    pub rho: f64,
    pub dof: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            years: 10,
            seed: 20_100_101,
            mu: 0.0,
            alpha: 1.5,
            beta: 0.3,
            nu_mean: 1.0,
            nu_amplitude: 0.3,
            nu_ar: 0.5,
            nu_shock: 0.08,
            rho: 0.5,
            dof: 2.5,
        }
    }
}

/// The generated series and the δ used in each month.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    pub monthly_delta: Vec<(MonthKey, f64)>,
}

const NU_MIN: f64 = 0.2;

pub fn generate(spec: &FixtureSpec) -> CliResult<Fixture> {
    let bad = |m: String| CliError::Config(format!("fixture: {m}"));
    if !(spec.rho.abs() < 1.0) || !(spec.dof > 0.0) || spec.years == 0 {
        return Err(bad("need |rho| < 1, dof > 0 and at least one year".into()));
    }
    let end = spec
        .start
        .checked_add_months(chrono::Months::new(12 * spec.years))
        .ok_or_else(|| bad("end date out of range".into()))?;
    let dates: Vec<NaiveDate> = spec.start.iter_days().take_while(|&d| d < end).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // δ per calendar month.
    let mut monthly_delta: Vec<(MonthKey, f64)> = Vec::new();
    let mut nu = spec.nu_mean;
    let mut marginals: Vec<Nig> = Vec::new();
    for d in &dates {
        let key = MonthKey {
            year: d.year(),
            month: d.month(),
        };
        if monthly_delta.last().is_some_and(|(k, _)| *k == key) {
            continue;
        }
        let phase = 2.0 * std::f64::consts::PI * (key.month as f64 - 1.0) / 12.0;
        let level = spec.nu_mean + spec.nu_amplitude * phase.cos();
        let eps: f64 = StandardNormal.sample(&mut rng);
        nu = (spec.nu_ar * nu + (1.0 - spec.nu_ar) * level + spec.nu_shock * eps).max(NU_MIN);
        let delta = nu * nu;
        let params = NigParams::new(spec.mu, spec.alpha, spec.beta, delta)
            .map_err(|e| bad(e.to_string()))?;
        marginals.push(Nig::new(params));
        monthly_delta.push((key, delta));
    }

    let t = StudentsT::new(0.0, 1.0, spec.dof).map_err(|e| bad(e.to_string()))?;
    let innov = StudentT::new(spec.dof + 1.0).map_err(|e| bad(e.to_string()))?;
    let cond_scale =
        |z: f64| ((spec.dof + z * z) * (1.0 - spec.rho * spec.rho) / (spec.dof + 1.0)).sqrt();

    let mut z: f64 = t.inverse_cdf(0.5);
    let mut month = 0;
    let mut values = Vec::with_capacity(dates.len());
    for (i, d) in dates.iter().enumerate() {
        if i > 0 {
            z = spec.rho * z + cond_scale(z) * innov.sample(&mut rng);
        }
        let key = MonthKey {
            year: d.year(),
            month: d.month(),
        };
        if monthly_delta[month].0 != key {
            month += 1;
        }
        let v = t.cdf(z).clamp(1e-12, 1.0 - 1e-12);
        values.push(
            marginals[month]
                .inv_cdf(v)
                .map_err(|e| CliError::Numeric(format!("fixture: {e}")))?,
        );
    }
    Ok(Fixture {
        dates,
        values,
        monthly_delta,
    })
}

impl Fixture {
    /// CSV with header `date,value`, preceded by a comment line recording
    /// the generating spec.
    pub fn write_csv(&self, spec: &FixtureSpec, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        let spec_json = serde_json::to_string(spec).expect("spec serializes");
        let io = |e| CliError::io(path, e);
        writeln!(w, "# autocopula fixture {spec_json}").map_err(io)?;
        writeln!(w, "date,value").map_err(io)?;
        for (d, x) in self.dates.iter().zip(&self.values) {
            writeln!(w, "{d},{x}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}
