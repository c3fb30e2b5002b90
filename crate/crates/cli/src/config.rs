use std::path::{Path, PathBuf};

use qrm_sideband::analytic::SidebandKind;
use qrm_sideband::evolve::SimOptions;
use qrm_sideband::model::SystemParams;
use qrm_sideband::sweep::{DriveFamily, ScanSpec, ScanVariable, SweepOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run needs. Missing sections fall back to the blue sideband at
/// f_q = 6.5, f_c = 4.0, g = 0.2 GHz with a 0.1 GHz monochromatic drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kind: SidebandKind,
    pub system: SystemParams,
    pub drive: DriveFamily,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    pub simulation: SimOptions,
    pub sweep: SweepOptions,
    pub evolve: EvolveConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kind: SidebandKind::Blue,
            system: SystemParams {
                f_q: 6.5,
                f_c: 4.0,
                g: 0.2,
            },
            drive: DriveFamily::Mono { eps: 0.1 },
            scan: None,
            simulation: SimOptions::default(),
            sweep: SweepOptions::default(),
            evolve: EvolveConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub variable: ScanVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    /// Swept drive frequency in GHz; the Full analytic matching when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_d: Option<f64>,
    /// Longest flat-top length in ns; three expected periods when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_len: Option<f64>,
    pub points: usize,
    /// Also write the time-resolved trajectory of the longest pulse.
    pub dense: bool,
    pub sample_every: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            f_d: None,
            max_len: None,
            points: 31,
            dense: false,
            sample_every: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks every input before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let check = |r: qrm_sideband::Result<()>| r.map_err(|e| CliError::Config(e.to_string()));
        check(self.system.validate())?;
        check(self.drive.template(&self.system).with_swept_frequency(1.0).validate())?;
        check(self.simulation.validate())?;
        check(self.sweep.validate())?;
        if let Some(spec) = self.scan_spec() {
            check(spec.validate())?;
        }
        let ev = &self.evolve;
        if ev.f_d.is_some_and(|f| !(f.is_finite() && f > 0.0)) {
            return Err(CliError::Config("evolve.f_d: must be finite and positive".into()));
        }
        if ev.max_len.is_some_and(|l| !(l.is_finite() && l > 0.0)) {
            return Err(CliError::Config("evolve.max_len: must be finite and positive".into()));
        }
        if ev.points < 5 {
            return Err(CliError::Config("evolve.points: at least 5 are needed for a fit".into()));
        }
        if ev.sample_every == 0 {
            return Err(CliError::Config("evolve.sample_every: must be at least 1".into()));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Config("output.formats: choose csv, json or both".into()));
        }
        Ok(())
    }

    pub fn scan_spec(&self) -> Option<ScanSpec> {
        self.scan.as_ref().map(|s| ScanSpec {
            params: self.system,
            family: self.drive,
            kind: self.kind,
            variable: s.variable,
            values: s.values.clone(),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    /// The configuration as embedded in result files: everything that
    /// determines the numbers, without the output location.
    pub fn embedded(&self) -> Self {
        let mut c = self.clone();
        c.output.directory = None;
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig {
            drive: DriveFamily::Bi {
                eta: 1.5,
                f_dc_offset: -0.5,
            },
            scan: Some(ScanConfig {
                variable: ScanVariable::Eta,
                values: vec![0.5, 1.0],
            }),
            ..RunConfig::default()
        };
        c.simulation.dt = Some(5e-4);
        c.evolve.f_d = Some(7.1);
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("[system]\nf_q = 6.5\nf_c = 4.0\ng = 0.2\ncoupling = 1\n").unwrap_err();
        assert!(err.to_string().contains("coupling"));
        assert!(RunConfig::parse("colour = 1").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = RunConfig::default();
        c.system.g = -0.1;
        assert!(c.validate().unwrap_err().to_string().contains("g"));
        let mut c = RunConfig::default();
        c.simulation.n_fock = 1;
        assert!(c.validate().is_err());
    }
}
