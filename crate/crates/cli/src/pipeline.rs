//! Stages of the fit → build → simulate → diagnose chain, and the pipeline
//! that runs them in order and writes the bundle and reports.

use std::path::Path;

use autocopula_core::copula::{
    build_partition, default_tail_grid, default_target, lag_pairs, pit_transform,
    tail_curves_from_pairs,
};
use autocopula_core::nig::{self, fit_mle, fit_moment_matching};
use autocopula_core::optimize::NelderMeadOptions;
use autocopula_core::seasonal::{
    fit_monthly_delta, fit_nu_ar_with, simulate_delta_paths, DeltaSimulation,
};
use autocopula_core::simulate::{
    frozen_deltas, monthly_percentiles, read_binary_paths, simulate_ensemble,
    simulate_ensemble_with, simulated_deltas, tail_dependence_bands, Schedule,
};
use autocopula_core::{
    simulate, Conditioning, DeltaMode, EmpiricalAutocopula, MonthKey, MonthlyDeltaSeries, Nig,
    NuArModel, SimulationConfig, SimulationEnsemble, TailBands, TailCurves,
};
use chrono::{Days, NaiveDate};
use log::info;
use serde::{Deserialize, Serialize};

use crate::bundle::{
    self, read_json, write_json, write_provenance, CsvOut, MarginalFit, ModelBundle, Provenance,
};
use crate::config::{Config, EnsembleFormat};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, month_of, ObservationSeries};

pub const ENSEMBLE_META_FILE: &str = "ensemble_meta.json";
pub const ENSEMBLE_CSV_FILE: &str = "ensemble.csv";
pub const ENSEMBLE_BIN_FILE: &str = "ensemble.bin";
pub const PERCENTILES_FILE: &str = "percentiles.csv";
pub const DATA_TAIL_FILE: &str = "tail_curves_data.csv";
pub const TAIL_BANDS_FILE: &str = "tail_bands.csv";
pub const DELTA_FAN_FILE: &str = "delta_fan.csv";
pub const REPORT_FILE: &str = "report.json";

pub fn load_series(cfg: &Config) -> CliResult<ObservationSeries> {
    ingest_csv(
        &cfg.data.path,
        &cfg.data.date_column,
        &cfg.data.value_column,
    )
}

pub fn provenance(cfg: &Config, series: &ObservationSeries) -> Provenance {
    Provenance::new(&series.digest, &cfg.digest(), cfg.simulate.seed)
}

pub fn fit_marginal(series: &ObservationSeries, cfg: &Config) -> CliResult<MarginalFit> {
    let init = fit_moment_matching(&series.values)
        .map_err(|e| CliError::stage("fit_moment_matching", e))?;
    let opts = NelderMeadOptions {
        ftol: cfg.marginal.ftol,
        max_iter: cfg.marginal.max_iter,
        ..Default::default()
    };
    let mle = fit_mle(&series.values, &init, &opts).map_err(|e| CliError::stage("fit_mle", e))?;
    info!(
        "fit_mle: mu={} alpha={} beta={} delta={} (log-likelihood {}, {} iterations)",
        mle.params.mu(),
        mle.params.alpha(),
        mle.params.beta(),
        mle.params.delta(),
        mle.log_likelihood,
        mle.iterations
    );
    Ok(MarginalFit {
        params: mle.params,
        moment_matching: init,
        log_likelihood: mle.log_likelihood,
        iterations: mle.iterations,
        observations: series.len(),
    })
}

pub fn fit_seasonal(
    series: &ObservationSeries,
    marginal: &MarginalFit,
    cfg: &Config,
) -> CliResult<(MonthlyDeltaSeries, NuArModel)> {
    let deltas = fit_monthly_delta(&series.by_month(), &marginal.params)
        .map_err(|e| CliError::stage("fit_monthly_delta", e))?;
    let model = fit_nu_ar_with(&deltas, cfg.seasonal.harmonics)
        .map_err(|e| CliError::stage("fit_nu_ar", e))?;
    info!("fit_nu_ar: {} months, a={}", deltas.len(), model.a());
    Ok((deltas, model))
}

/// δ fan over the months after the last fitted one.
pub fn delta_fan(
    deltas: &MonthlyDeltaSeries,
    model: &NuArModel,
    cfg: &Config,
) -> CliResult<DeltaSimulation<f64>> {
    let last = deltas.last_month();
    let nu0 = deltas.get(last).unwrap().sqrt();
    let s = &cfg.seasonal;
    simulate_delta_paths(
        model,
        nu0,
        last,
        s.fan_months,
        s.fan_paths,
        cfg.simulate.seed,
        &s.fan_levels,
    )
    .map_err(|e| CliError::stage("simulate_delta_paths", e))
}

/// Marginals with the fitted (frozen) δ for each step month.
pub fn frozen_schedule(
    marginal: &MarginalFit,
    deltas: &MonthlyDeltaSeries,
    model: &NuArModel,
    step_months: Vec<MonthKey>,
) -> CliResult<Schedule<Nig>> {
    let months = distinct(&step_months);
    let ds = frozen_deltas(deltas, model, &months);
    let mut next = months.iter().zip(ds);
    Schedule::new(step_months, |m| {
        let (_, d) = next
            .find(|(k, _)| **k == m)
            .expect("schedule months are in order");
        Ok(Nig::new(marginal.params.with_delta(d)?))
    })
    .map_err(|e| CliError::stage("marginal_schedule", e))
}

fn distinct(months: &[MonthKey]) -> Vec<MonthKey> {
    let mut out: Vec<MonthKey> = Vec::new();
    for &m in months {
        if out.last() != Some(&m) {
            out.push(m);
        }
    }
    out
}

/// PIT of the observations through their monthly marginals.
pub fn data_pit(
    series: &ObservationSeries,
    marginal: &MarginalFit,
    deltas: &MonthlyDeltaSeries,
    model: &NuArModel,
) -> CliResult<Vec<f64>> {
    let schedule = frozen_schedule(marginal, deltas, model, series.months())?;
    let keyed: Vec<(usize, f64)> = series.values.iter().copied().enumerate().collect();
    let pit = pit_transform(&keyed, |&i| Some(schedule.at(i)))
        .map_err(|e| CliError::stage("pit_transform", e))?;
    Ok(pit.values)
}

pub fn build_copula(pit: &[f64], cfg: &Config) -> CliResult<EmpiricalAutocopula> {
    let pairs = lag_pairs(pit);
    let target = cfg
        .copula
        .target_per_rect
        .unwrap_or_else(|| default_target(pairs.len()));
    let partition =
        build_partition(&pairs, target).map_err(|e| CliError::stage("build_partition", e))?;
    info!(
        "build_partition: {} pairs into {} rectangles (target {target})",
        pairs.len(),
        partition.len()
    );
    EmpiricalAutocopula::from_partition(partition)
        .map_err(|e| CliError::stage("build_joint_cdf", e))
}

/// Everything fitted from data, in pipeline order.
pub fn fit_bundle(series: &ObservationSeries, cfg: &Config) -> CliResult<ModelBundle> {
    let marginal = fit_marginal(series, cfg)?;
    let (monthly_delta, nu_ar) = fit_seasonal(series, &marginal, cfg)?;
    let pit = data_pit(series, &marginal, &monthly_delta, &nu_ar)?;
    let copula = build_copula(&pit, cfg)?;
    Ok(ModelBundle {
        marginal,
        monthly_delta,
        nu_ar,
        copula,
        provenance: provenance(cfg, series),
    })
}

/// Simulated paths with their dates and the frozen-δ marginals used to PIT
/// them.
pub struct SimulationRun {
    pub dates: Vec<NaiveDate>,
    pub ensemble: SimulationEnsemble,
    pub schedule: Schedule<Nig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub format: EnsembleFormat,
    pub start: NaiveDate,
    pub horizon: usize,
    pub path_count: usize,
    pub seed: u64,
    pub conditioning: Conditioning,
    pub delta_mode: DeltaMode,
}

pub fn step_dates(start: NaiveDate, horizon: usize) -> Vec<NaiveDate> {
    (0..horizon)
        .map(|i| {
            start
                .checked_add_days(Days::new(i as u64))
                .expect("date in range")
        })
        .collect()
}

/// Simulation window: configured start and horizon, else the data's span.
pub fn simulation_window(series: &ObservationSeries, cfg: &Config) -> (NaiveDate, usize) {
    let start = cfg.simulate.start.unwrap_or(series.first_date());
    let horizon = cfg
        .simulate
        .horizon_days
        .unwrap_or_else(|| (series.last_date() - series.first_date()).num_days() as usize + 1);
    (start, horizon)
}

pub fn simulate_run(
    bundle: &ModelBundle,
    start: NaiveDate,
    horizon: usize,
    cfg: &Config,
) -> CliResult<SimulationRun> {
    let s = &cfg.simulate;
    if s.paths == 0 {
        return Err(CliError::Config(
            "simulate.paths must be at least 1 to simulate".into(),
        ));
    }
    let dates = step_dates(start, horizon);
    let step_months: Vec<MonthKey> = dates.iter().map(|&d| month_of(d)).collect();
    let schedule = frozen_schedule(
        &bundle.marginal,
        &bundle.monthly_delta,
        &bundle.nu_ar,
        step_months.clone(),
    )?;
    let sim_cfg = SimulationConfig {
        horizon,
        path_count: s.paths,
        seed: s.seed,
        conditioning: s.conditioning,
        x0: s.x0,
        levels: s.levels.clone(),
    };
    let stage = |e| CliError::stage("simulate_ensemble", e);
    let ensemble = match s.delta_mode {
        DeltaMode::Frozen => {
            simulate_ensemble(&sim_cfg, &bundle.copula, &schedule).map_err(stage)?
        }
        DeltaMode::Simulated => {
            let months = schedule.months().to_vec();
            let paths = simulated_deltas(
                &bundle.monthly_delta,
                &bundle.nu_ar,
                &months,
                s.paths,
                s.seed,
            )
            .map_err(stage)?;
            let first = months[0].index();
            let shared = bundle.marginal.params;
            simulate_ensemble_with(&sim_cfg, &bundle.copula, &step_months, |p| {
                Schedule::new(step_months.clone(), |m| {
                    Ok(Nig::new(
                        shared.with_delta(paths[p][(m.index() - first) as usize])?,
                    ))
                })
            })
            .map_err(stage)?
        }
    };
    info!("simulate_ensemble: {} paths × {horizon} days", s.paths);
    Ok(SimulationRun {
        dates,
        ensemble,
        schedule,
    })
}

pub fn write_ensemble(
    run: &SimulationRun,
    cfg: &Config,
    dir: &Path,
    p: &Provenance,
) -> CliResult<()> {
    let meta = EnsembleMeta {
        format: cfg.simulate.format,
        start: run.dates[0],
        horizon: run.dates.len(),
        path_count: run.ensemble.path_count(),
        seed: cfg.simulate.seed,
        conditioning: cfg.simulate.conditioning,
        delta_mode: cfg.simulate.delta_mode,
    };
    write_json(dir, ENSEMBLE_META_FILE, &meta, p)?;
    match meta.format {
        EnsembleFormat::Csv => {
            let mut out = CsvOut::create(dir, ENSEMBLE_CSV_FILE, p)?;
            out.line("path,date,value")?;
            out.with(|w| {
                use std::io::Write;
                for (k, path) in run.ensemble.paths.iter().enumerate() {
                    for (d, x) in run.dates.iter().zip(path) {
                        writeln!(w, "{k},{d},{x}")?;
                    }
                }
                Ok(())
            })?;
            out.finish()?;
        }
        EnsembleFormat::Binary => {
            let path = dir.join(ENSEMBLE_BIN_FILE);
            let f = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let mut w = std::io::BufWriter::new(f);
            run.ensemble
                .write_binary(&mut w)
                .map_err(|e| CliError::io(&path, e))?;
            use std::io::Write;
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
    }
    let mut out = CsvOut::create(dir, PERCENTILES_FILE, p)?;
    out.with(|w| run.ensemble.percentiles.write_csv(w))?;
    out.finish()?;
    Ok(())
}

/// Reads an ensemble written by [`write_ensemble`].
pub fn read_ensemble(bundle: &ModelBundle, dir: &Path, levels: &[f64]) -> CliResult<SimulationRun> {
    let (meta, _): (EnsembleMeta, _) = read_json(dir, ENSEMBLE_META_FILE)?;
    let paths = match meta.format {
        EnsembleFormat::Binary => {
            let path = dir.join(ENSEMBLE_BIN_FILE);
            let f = std::fs::File::open(&path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            read_binary_paths(std::io::BufReader::new(f))
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
        EnsembleFormat::Csv => {
            read_ensemble_csv(&dir.join(ENSEMBLE_CSV_FILE), meta.path_count, meta.horizon)?
        }
    };
    if paths.len() != meta.path_count || paths.iter().any(|p| p.len() != meta.horizon) {
        return Err(CliError::Data(
            "ensemble does not match its metadata".into(),
        ));
    }
    let dates = step_dates(meta.start, meta.horizon);
    let step_months: Vec<MonthKey> = dates.iter().map(|&d| month_of(d)).collect();
    let schedule = frozen_schedule(
        &bundle.marginal,
        &bundle.monthly_delta,
        &bundle.nu_ar,
        step_months.clone(),
    )?;
    let percentiles = monthly_percentiles(&paths, &step_months, levels);
    let ensemble = SimulationEnsemble {
        step_months,
        paths,
        percentiles,
    };
    Ok(SimulationRun {
        dates,
        ensemble,
        schedule,
    })
}

fn read_ensemble_csv(path: &Path, path_count: usize, horizon: usize) -> CliResult<Vec<Vec<f64>>> {
    let data_err = |m: String| CliError::Data(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| data_err(e.to_string()))?;
    let mut paths = vec![Vec::with_capacity(horizon); path_count];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| data_err(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let k: usize = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| data_err(format!("line {line}: bad path index")))?;
        let x: f64 = rec
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| data_err(format!("line {line}: bad value")))?;
        paths
            .get_mut(k)
            .ok_or_else(|| data_err(format!("line {line}: path {k} out of range")))?
            .push(x);
    }
    Ok(paths)
}

/// Data tail curves against the simulated bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub data: TailCurves,
    pub bands: TailBands,
    pub inside: usize,
    pub total: usize,
}

impl TailReport {
    pub fn coverage(&self) -> f64 {
        self.inside as f64 / self.total as f64
    }
}

pub fn data_tail_curves(pit: &[f64]) -> TailCurves {
    tail_curves_from_pairs(&lag_pairs(pit), &default_tail_grid())
}

pub fn diagnose_tails(pit: &[f64], run: &SimulationRun) -> CliResult<TailReport> {
    let grid = default_tail_grid();
    let data = tail_curves_from_pairs(&lag_pairs(pit), &grid);
    let sim_pit = run.ensemble.pit(&run.schedule);
    let bands = tail_dependence_bands(&sim_pit, &grid)
        .map_err(|e| CliError::stage("tail_dependence_bands", e))?;
    let (inside, total) = bands.coverage(&data);
    info!("tail bands: data inside at {inside} of {total} points");
    Ok(TailReport {
        data,
        bands,
        inside,
        total,
    })
}

pub fn write_tail_curves(curves: &TailCurves, dir: &Path, p: &Provenance) -> CliResult<()> {
    let mut out = CsvOut::create(dir, DATA_TAIL_FILE, p)?;
    out.with(|w| curves.write_csv(w))?;
    out.finish()?;
    Ok(())
}

pub fn write_tail_report(report: &TailReport, dir: &Path, p: &Provenance) -> CliResult<()> {
    write_tail_curves(&report.data, dir, p)?;
    let mut out = CsvOut::create(dir, TAIL_BANDS_FILE, p)?;
    out.with(|w| report.bands.write_csv(w))?;
    out.finish()?;
    Ok(())
}

pub fn write_delta_fan(fan: &DeltaSimulation<f64>, dir: &Path, p: &Provenance) -> CliResult<()> {
    let mut out = CsvOut::create(dir, DELTA_FAN_FILE, p)?;
    out.with(|w| fan.fan.write_csv(w))?;
    out.finish()?;
    Ok(())
}

/// Summary written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub observations: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub marginal: nig::NigParams<f64>,
    pub log_likelihood: f64,
    pub months_fitted: usize,
    pub ar_coefficient: f64,
    pub rectangles: usize,
    pub simulated_paths: usize,
    pub tail_points_inside: Option<usize>,
    pub tail_points_total: Option<usize>,
}

pub struct PipelineOutput {
    pub bundle: ModelBundle,
    pub simulation: Option<SimulationRun>,
    pub tails: Option<TailReport>,
    pub report: PipelineReport,
}

/// Runs every stage and writes the bundle and reports into
/// `cfg.output.dir`. With `simulate.paths = 0` only the fit stages run.
pub fn run_pipeline(cfg: &Config) -> CliResult<PipelineOutput> {
    let dir = cfg.output.dir.clone();
    let series = load_series(cfg)?;
    info!(
        "ingest: {} observations {} .. {}",
        series.len(),
        series.first_date(),
        series.last_date()
    );
    let bundle = fit_bundle(&series, cfg)?;
    let p = bundle.provenance.clone();
    bundle.write(&dir)?;

    let pit = data_pit(
        &series,
        &bundle.marginal,
        &bundle.monthly_delta,
        &bundle.nu_ar,
    )?;
    write_tail_curves(&data_tail_curves(&pit), &dir, &p)?;
    if cfg.seasonal.fan_paths > 0 && cfg.seasonal.fan_months > 0 {
        write_delta_fan(
            &delta_fan(&bundle.monthly_delta, &bundle.nu_ar, cfg)?,
            &dir,
            &p,
        )?;
    }

    let (simulation, tails) = if cfg.simulate.paths > 0 {
        let (start, horizon) = simulation_window(&series, cfg);
        let run = simulate_run(&bundle, start, horizon, cfg)?;
        write_ensemble(&run, cfg, &dir, &p)?;
        let tails = if run.ensemble.path_count() >= simulate::MIN_BAND_PATHS {
            let t = diagnose_tails(&pit, &run)?;
            write_tail_report(&t, &dir, &p)?;
            Some(t)
        } else {
            None
        };
        (Some(run), tails)
    } else {
        (None, None)
    };

    let report = PipelineReport {
        observations: series.len(),
        first_date: series.first_date(),
        last_date: series.last_date(),
        marginal: bundle.marginal.params,
        log_likelihood: bundle.marginal.log_likelihood,
        months_fitted: bundle.monthly_delta.len(),
        ar_coefficient: bundle.nu_ar.a(),
        rectangles: bundle.copula.partition().len(),
        simulated_paths: simulation.as_ref().map_or(0, |r| r.ensemble.path_count()),
        tail_points_inside: tails.as_ref().map(|t| t.inside),
        tail_points_total: tails.as_ref().map(|t| t.total),
    };
    write_json(&dir, REPORT_FILE, &report, &p)?;
    write_provenance(&dir, &p)?;
    Ok(PipelineOutput {
        bundle,
        simulation,
        tails,
        report,
    })
}

/// Reads the bundle in `dir`.
pub fn load_bundle(dir: &Path) -> CliResult<ModelBundle> {
    ModelBundle::read(dir)
}

pub use bundle::MARGINAL_FILE;
