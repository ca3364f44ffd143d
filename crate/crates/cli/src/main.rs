use std::path::PathBuf;
use std::process::ExitCode;

use autocopula_cli::bundle::{
    read_json, write_json, write_provenance, MarginalFit, ModelBundle, MARGINAL_FILE,
    MONTHLY_DELTA_FILE, NU_AR_FILE,
};
use autocopula_cli::config::{Config, EnsembleFormat};
use autocopula_cli::error::{CliError, CliResult};
use autocopula_cli::fixture::{self, FixtureSpec};
use autocopula_cli::pipeline::{self as pl, REPORT_FILE};
use autocopula_cli::plots::{emit_plot_data, Figure};
use autocopula_core::{Conditioning, DeltaMode, MonthlyDeltaSeries, NuArModel};
use clap::{Args, Parser, Subcommand};
use log::info;

/// Seasonal NIG marginals with an empirical autocopula: fit, simulate and
/// diagnose daily series.
#[derive(Parser)]
#[command(name = "autocopula", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration; defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Input CSV, overriding `data.path`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated paths; 0 makes `pipeline` fit only.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, value_enum)]
    conditioning: Option<ConditioningArg>,
    #[arg(long, value_enum)]
    delta_mode: Option<DeltaModeArg>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ConditioningArg {
    Cumulative,
    Partial,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DeltaModeArg {
    Frozen,
    Simulated,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the global NIG marginal (moment matching, then maximum likelihood).
    FitMarginal(Common),
    /// Fit monthly δ and the seasonal AR model for √δ; writes the δ fan.
    FitSeasonal(Common),
    /// Build the empirical autocopula from the PIT of the data.
    BuildCopula(Common),
    /// Simulate an ensemble from a fitted bundle.
    Simulate(Common),
    /// Compare the data's tail-dependence curves with simulated bands.
    DiagnoseTails(Common),
    /// Run every stage in order.
    Pipeline(Common),
    /// Write figure-ready CSVs.
    EmitPlots {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        figure: Figure,
        /// Destination; `<output.dir>/plots` by default.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Write a synthetic series from the built-in ground-truth model.
    GenerateFixture {
        #[arg(short, long, default_value = "fixture.csv")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        years: Option<u32>,
    },
}

impl Common {
    fn config(&self) -> CliResult<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(d) = &self.data {
            cfg.data.path = d.clone();
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.simulate.seed = s;
        }
        if let Some(p) = self.paths {
            cfg.simulate.paths = p;
        }
        if let Some(c) = self.conditioning {
            cfg.simulate.conditioning = match c {
                ConditioningArg::Cumulative => Conditioning::Cumulative,
                ConditioningArg::Partial => Conditioning::Partial,
            };
        }
        if let Some(m) = self.delta_mode {
            cfg.simulate.delta_mode = match m {
                DeltaModeArg::Frozen => DeltaMode::Frozen,
                DeltaModeArg::Simulated => DeltaMode::Simulated,
            };
        }
        if let Some(f) = self.format {
            cfg.simulate.format = match f {
                FormatArg::Csv => EnsembleFormat::Csv,
                FormatArg::Binary => EnsembleFormat::Binary,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create_dir(cfg: &Config) -> CliResult<()> {
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| CliError::io(&cfg.output.dir, e))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::FitMarginal(c) => {
            let cfg = c.config()?;
            create_dir(&cfg)?;
            let series = pl::load_series(&cfg)?;
            let p = pl::provenance(&cfg, &series);
            let fit = pl::fit_marginal(&series, &cfg)?;
            write_json(&cfg.output.dir, MARGINAL_FILE, &fit, &p)?;
            write_provenance(&cfg.output.dir, &p)
        }
        Command::FitSeasonal(c) => {
            let cfg = c.config()?;
            let series = pl::load_series(&cfg)?;
            let p = pl::provenance(&cfg, &series);
            let (marginal, _): (MarginalFit, _) = read_json(&cfg.output.dir, MARGINAL_FILE)?;
            let (deltas, model) = pl::fit_seasonal(&series, &marginal, &cfg)?;
            write_json(&cfg.output.dir, MONTHLY_DELTA_FILE, &deltas, &p)?;
            write_json(&cfg.output.dir, NU_AR_FILE, &model, &p)?;
            if cfg.seasonal.fan_paths > 0 && cfg.seasonal.fan_months > 0 {
                pl::write_delta_fan(&pl::delta_fan(&deltas, &model, &cfg)?, &cfg.output.dir, &p)?;
            }
            Ok(())
        }
        Command::BuildCopula(c) => {
            let cfg = c.config()?;
            let series = pl::load_series(&cfg)?;
            let dir = &cfg.output.dir;
            let (marginal, _): (MarginalFit, _) = read_json(dir, MARGINAL_FILE)?;
            let (monthly_delta, _): (MonthlyDeltaSeries, _) = read_json(dir, MONTHLY_DELTA_FILE)?;
            let (nu_ar, _): (NuArModel, _) = read_json(dir, NU_AR_FILE)?;
            let pit = pl::data_pit(&series, &marginal, &monthly_delta, &nu_ar)?;
            let copula = pl::build_copula(&pit, &cfg)?;
            let bundle = ModelBundle {
                marginal,
                monthly_delta,
                nu_ar,
                copula,
                provenance: pl::provenance(&cfg, &series),
            };
            bundle.write(dir)?;
            pl::write_tail_curves(&pl::data_tail_curves(&pit), dir, &bundle.provenance)
        }
        Command::Simulate(c) => {
            let cfg = c.config()?;
            let series = pl::load_series(&cfg)?;
            let bundle = pl::load_bundle(&cfg.output.dir)?;
            let (start, horizon) = pl::simulation_window(&series, &cfg);
            let run = pl::simulate_run(&bundle, start, horizon, &cfg)?;
            pl::write_ensemble(&run, &cfg, &cfg.output.dir, &pl::provenance(&cfg, &series))
        }
        Command::DiagnoseTails(c) => {
            let cfg = c.config()?;
            let series = pl::load_series(&cfg)?;
            let p = pl::provenance(&cfg, &series);
            let bundle = pl::load_bundle(&cfg.output.dir)?;
            let pit = pl::data_pit(
                &series,
                &bundle.marginal,
                &bundle.monthly_delta,
                &bundle.nu_ar,
            )?;
            let run = pl::read_ensemble(&bundle, &cfg.output.dir, &cfg.simulate.levels)?;
            let report = pl::diagnose_tails(&pit, &run)?;
            pl::write_tail_report(&report, &cfg.output.dir, &p)?;
            println!(
                "tail curves inside the 5-95% bands at {} of {} points ({:.1}%)",
                report.inside,
                report.total,
                100.0 * report.coverage()
            );
            Ok(())
        }
        Command::Pipeline(c) => {
            let cfg = c.config()?;
            create_dir(&cfg)?;
            let out = pl::run_pipeline(&cfg)?;
            info!(
                "report written to {}",
                cfg.output.dir.join(REPORT_FILE).display()
            );
            if let Some(t) = &out.tails {
                println!(
                    "tail curves inside the 5-95% bands at {} of {} points ({:.1}%)",
                    t.inside,
                    t.total,
                    100.0 * t.coverage()
                );
            }
            Ok(())
        }
        Command::EmitPlots {
            common,
            figure,
            plot_dir,
        } => {
            let cfg = common.config()?;
            let dir = plot_dir.unwrap_or_else(|| cfg.output.dir.join("plots"));
            for path in emit_plot_data(&cfg, figure, &dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::GenerateFixture { out, seed, years } => {
            let mut spec = FixtureSpec::default();
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(y) = years {
                spec.years = y;
            }
            let fx = fixture::generate(&spec)?;
            fx.write_csv(&spec, &out)?;
            info!(
                "{} observations written to {}",
                fx.values.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
