//! Model bundle: a directory of JSON artifacts, each stamped with the
//! provenance of the run that produced it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use autocopula_core::{EmpiricalAutocopula, MonthlyDeltaSeries, NigParams, NuArModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const ARTIFACT_VERSION: &str = concat!("autocopula ", env!("CARGO_PKG_VERSION"));

pub const MARGINAL_FILE: &str = "marginal.json";
pub const MONTHLY_DELTA_FILE: &str = "monthly_delta.json";
pub const NU_AR_FILE: &str = "nu_ar.json";
pub const COPULA_FILE: &str = "copula.json";
pub const PROVENANCE_FILE: &str = "provenance.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact_version: String,
    pub input_sha256: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(input_sha256: &str, config_sha256: &str, seed: u64) -> Self {
        Self {
            artifact_version: ARTIFACT_VERSION.into(),
            input_sha256: input_sha256.into(),
            config_sha256: config_sha256.into(),
            seed,
        }
    }

    /// First line of every CSV output.
    pub fn header_line(&self) -> String {
        format!(
            "# {} input_sha256={} config_sha256={} seed={}",
            self.artifact_version, self.input_sha256, self.config_sha256, self.seed
        )
    }
}

/// A JSON artifact with a `provenance` field next to its own fields.
#[derive(Serialize, Deserialize)]
struct Stamped<T> {
    provenance: Provenance,
    #[serde(flatten)]
    body: T,
}

/// Global NIG fit and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalFit {
    pub params: NigParams,
    pub moment_matching: NigParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub observations: usize,
}

#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub marginal: MarginalFit,
    pub monthly_delta: MonthlyDeltaSeries,
    pub nu_ar: NuArModel,
    pub copula: EmpiricalAutocopula,
    pub provenance: Provenance,
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    body: &T,
    provenance: &Provenance,
) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let stamped = Stamped {
        provenance: provenance.clone(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&stamped)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> CliResult<(T, Provenance)> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Data(format!(
            "{}: {e} (run the stage that produces it first)",
            path.display()
        ))
    })?;
    let s: Stamped<T> = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((s.body, s.provenance))
}

impl ModelBundle {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let p = &self.provenance;
        write_json(dir, MARGINAL_FILE, &self.marginal, p)?;
        write_json(dir, MONTHLY_DELTA_FILE, &self.monthly_delta, p)?;
        write_json(dir, NU_AR_FILE, &self.nu_ar, p)?;
        write_json(dir, COPULA_FILE, &self.copula, p)?;
        write_provenance(dir, p)
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let (marginal, provenance) = read_json(dir, MARGINAL_FILE)?;
        let (monthly_delta, _) = read_json(dir, MONTHLY_DELTA_FILE)?;
        let (nu_ar, _) = read_json(dir, NU_AR_FILE)?;
        let (copula, _) = read_json(dir, COPULA_FILE)?;
        Ok(Self {
            marginal,
            monthly_delta,
            nu_ar,
            copula,
            provenance,
        })
    }
}

pub fn write_provenance(dir: &Path, p: &Provenance) -> CliResult<()> {
    let path = dir.join(PROVENANCE_FILE);
    let mut text = serde_json::to_string_pretty(p).expect("provenance serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

/// Buffered CSV output whose first line is the provenance header.
pub struct CsvOut {
    path: PathBuf,
    w: BufWriter<File>,
}

impl CsvOut {
    pub fn create(dir: &Path, name: &str, provenance: &Provenance) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = Self {
            path,
            w: BufWriter::new(f),
        };
        out.line(&provenance.header_line())?;
        Ok(out)
    }

    pub fn line(&mut self, s: &str) -> CliResult<()> {
        writeln!(self.w, "{s}").map_err(|e| CliError::io(&self.path, e))
    }

    /// Writes through `f`, which receives the underlying writer.
    pub fn with<F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>>(
        &mut self,
        f: F,
    ) -> CliResult<()> {
        f(&mut self.w).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.w.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}
