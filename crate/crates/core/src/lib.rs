//! Semi-parametric time series simulation: NIG marginals with seasonal scale,
//! an empirical autocopula for the day-to-day dependence, and Markov
//! simulation of sample paths.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases below
//! fix the scalar to `f64`.

// `!(a < b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calendar;
pub mod copula;
pub mod error;
pub mod linalg;
pub mod nig;
pub mod optimize;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod seasonal;
pub mod simulate;
pub mod special;
pub mod stats;

pub use calendar::MonthKey;
pub use copula::Conditioning;
pub use error::{Error, Result};
pub use simulate::DeltaMode;

pub type NigParams = nig::NigParams<f64>;
pub type Nig = nig::Nig<f64>;
pub type MonthlyDeltaSeries = seasonal::MonthlyDeltaSeries<f64>;
pub type NuArModel = seasonal::NuArModel<f64>;
pub type EmpiricalAutocopula = copula::EmpiricalAutocopula<f64>;
pub type RectPartition = copula::RectPartition<f64>;
pub type TailCurves = copula::TailCurves<f64>;
pub type SimulationConfig = simulate::SimulationConfig<f64>;
pub type SimulationEnsemble = simulate::SimulationEnsemble<f64>;
pub type TailBands = simulate::TailBands<f64>;
pub type MonthlyQuantiles = calendar::MonthlyQuantiles<f64>;
