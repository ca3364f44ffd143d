//! Figure-ready CSVs. Each figure reads what it needs from the data file and
//! the output directory of a previous run; plotting itself is left to the
//! user's tool of choice.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use autocopula_core::copula::Autocopula;
use autocopula_core::{MonthKey, MonthlyQuantiles};
use clap::ValueEnum;

use crate::bundle::{CsvOut, ModelBundle, Provenance};
use crate::config::Config;
use crate::error::CliResult;
use crate::ingest::ObservationSeries;
use crate::pipeline::{self, data_pit, data_tail_curves, delta_fan, diagnose_tails, read_ensemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Observed series.
    Fig1,
    /// Tail-dependence curves of the data.
    Fig2,
    /// Fitted monthly δ with the seasonal mean.
    Fig3,
    /// δ quantile fan.
    Fig4,
    /// Copula scatter with rectangles.
    Fig5a,
    /// Copula surface.
    Fig5b,
    /// Density grid.
    Fig5c,
    /// Simulated against observed monthly percentiles.
    Fig6,
    /// Tail curves inside simulated bands.
    Fig7,
    All,
}

impl Figure {
    fn expand(self) -> Vec<Figure> {
        use Figure::*;
        match self {
            All => vec![Fig1, Fig2, Fig3, Fig4, Fig5a, Fig5b, Fig5c, Fig6, Fig7],
            f => vec![f],
        }
    }
}

/// Points per axis of the surface and density grids.
pub const SURFACE_POINTS: usize = 51;
pub const DENSITY_CELLS: usize = 100;

struct Inputs<'a> {
    cfg: &'a Config,
    series: ObservationSeries,
    prov: Provenance,
    bundle: Option<ModelBundle>,
}

impl Inputs<'_> {
    fn bundle(&self) -> &ModelBundle {
        self.bundle
            .as_ref()
            .expect("loaded for every figure but the series")
    }
}

/// Writes the CSVs for `figure` into `dir` and returns their paths.
pub fn emit_plot_data(cfg: &Config, figure: Figure, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let series = pipeline::load_series(cfg)?;
    let prov = pipeline::provenance(cfg, &series);
    let bundle = if figure == Figure::Fig1 {
        None
    } else {
        Some(pipeline::load_bundle(&cfg.output.dir)?)
    };
    let inp = Inputs {
        cfg,
        series,
        prov,
        bundle,
    };
    let mut written = Vec::new();
    for f in figure.expand() {
        written.extend(emit_one(&inp, f, dir)?);
    }
    Ok(written)
}

fn emit_one(inp: &Inputs, figure: Figure, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let prov = inp.prov.clone();
    match figure {
        Figure::Fig1 => {
            let mut out = CsvOut::create(dir, "fig1_series.csv", &prov)?;
            out.line("date,value")?;
            let s = &inp.series;
            out.with(|w| {
                for (d, x) in s.dates.iter().zip(&s.values) {
                    writeln!(w, "{d},{x}")?;
                }
                Ok(())
            })?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig2 => {
            let pit = {
                let b = inp.bundle();
                data_pit(&inp.series, &b.marginal, &b.monthly_delta, &b.nu_ar)?
            };
            let mut out = CsvOut::create(dir, "fig2_tail_curves.csv", &prov)?;
            out.with(|w| data_tail_curves(&pit).write_csv(w))?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig3 => {
            let b = inp.bundle();
            let mean = b.nu_ar.seasonal_mean();
            let mut out = CsvOut::create(dir, "fig3_monthly_delta.csv", &prov)?;
            out.line("year,month,delta,nu,seasonal_mean_delta")?;
            out.with(|w| {
                for e in b.monthly_delta.entries() {
                    let k = e.key();
                    let m = mean[(k.month - 1) as usize];
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        k.year,
                        k.month,
                        e.delta,
                        e.delta.sqrt(),
                        m * m
                    )?;
                }
                Ok(())
            })?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig4 => {
            let b = inp.bundle();
            let fan = delta_fan(&b.monthly_delta, &b.nu_ar, inp.cfg)?;
            let mut out = CsvOut::create(dir, "fig4_delta_fan.csv", &prov)?;
            out.with(|w| fan.fan.write_csv(w))?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig5a => {
            let b = inp.bundle();
            let pit = data_pit(&inp.series, &b.marginal, &b.monthly_delta, &b.nu_ar)?;
            let mut out = CsvOut::create(dir, "fig5a_scatter.csv", &prov)?;
            out.line("v_prev,v_next")?;
            out.with(|w| {
                for p in pit.windows(2) {
                    writeln!(w, "{},{}", p[0], p[1])?;
                }
                Ok(())
            })?;
            let scatter = out.finish()?;
            let part = b.copula.partition();
            let total = part.total_count() as f64;
            let mut out = CsvOut::create(dir, "fig5a_rectangles.csv", &prov)?;
            out.line("u1_lo,u1_hi,u2_lo,u2_hi,count,density")?;
            out.with(|w| {
                for r in part.rects() {
                    let dens = r.count as f64 / (total * r.area());
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        r.u1_lo, r.u1_hi, r.u2_lo, r.u2_hi, r.count, dens
                    )?;
                }
                Ok(())
            })?;
            Ok(vec![scatter, out.finish()?])
        }
        Figure::Fig5b => {
            let b = inp.bundle();
            let mut out = CsvOut::create(dir, "fig5b_surface.csv", &prov)?;
            out.line("u1,u2,copula,phi")?;
            let n = SURFACE_POINTS - 1;
            out.with(|w| {
                for i in 0..=n {
                    for j in 0..=n {
                        let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                        writeln!(w, "{x},{y},{},{}", b.copula.cdf(x, y), b.copula.phi(x, y))?;
                    }
                }
                Ok(())
            })?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig5c => {
            let b = inp.bundle();
            let mut out = CsvOut::create(dir, "fig5c_density.csv", &prov)?;
            out.line("v_prev,v_next,density")?;
            let n = DENSITY_CELLS as f64;
            out.with(|w| {
                for i in 0..DENSITY_CELLS {
                    for j in 0..DENSITY_CELLS {
                        let (x, y) = ((i as f64 + 0.5) / n, (j as f64 + 0.5) / n);
                        writeln!(w, "{x},{y},{}", b.copula.density(x, y))?;
                    }
                }
                Ok(())
            })?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig6 => {
            let cfg = inp.cfg;
            let b = inp.bundle();
            let run = read_ensemble(b, &cfg.output.dir, &cfg.simulate.levels)?;
            let sim = &run.ensemble.percentiles;
            let observed = observed_percentiles(&inp.series, &sim.levels);
            let obs: BTreeMap<MonthKey, &Vec<f64>> = observed
                .months
                .iter()
                .copied()
                .zip(&observed.values)
                .collect();
            let mut out = CsvOut::create(dir, "fig6_percentiles.csv", &prov)?;
            out.line("year,month,level,simulated,observed")?;
            out.with(|w| {
                for (m, row) in sim.months.iter().zip(&sim.values) {
                    for (k, (l, v)) in sim.levels.iter().zip(row).enumerate() {
                        let o = obs.get(m).map_or(String::new(), |r| r[k].to_string());
                        writeln!(w, "{},{},{l},{v},{o}", m.year, m.month)?;
                    }
                }
                Ok(())
            })?;
            Ok(vec![out.finish()?])
        }
        Figure::Fig7 => {
            let cfg = inp.cfg;
            let b = inp.bundle();
            let pit = data_pit(&inp.series, &b.marginal, &b.monthly_delta, &b.nu_ar)?;
            let run = read_ensemble(b, &cfg.output.dir, &cfg.simulate.levels)?;
            let report = diagnose_tails(&pit, &run)?;
            let mut out = CsvOut::create(dir, "fig7_tail_bands.csv", &prov)?;
            out.line("u,lower,lower_p05,lower_p95,upper,upper_p05,upper_p95")?;
            let (d, bd) = (&report.data, &report.bands);
            out.with(|w| {
                for k in 0..d.u.len() {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        d.u[k],
                        d.lower[k],
                        bd.lower_p05[k],
                        bd.lower_p95[k],
                        d.upper[k],
                        bd.upper_p05[k],
                        bd.upper_p95[k]
                    )?;
                }
                Ok(())
            })?;
            Ok(vec![out.finish()?])
        }
        Figure::All => unreachable!("expanded above"),
    }
}

/// Percentiles of the observations pooled by calendar month.
pub fn observed_percentiles(series: &ObservationSeries, levels: &[f64]) -> MonthlyQuantiles {
    let mut groups: BTreeMap<MonthKey, Vec<f64>> = BTreeMap::new();
    for (m, x) in series.by_month() {
        groups.entry(m).or_default().push(x);
    }
    MonthlyQuantiles::from_groups(groups, levels, 1)
}
