use std::path::{Path, PathBuf};

use bcm_core::validate::InteriorRegion;
use bcm_core::{InversionConfig, Mode};
use controls::BasisSpec;
use medium_geometry::{ScenarioKind, ScenarioSpec};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};
use wavefield::TraceStencil;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Grid spacing of the forward solver.
    pub h: f64,
    /// Extra depth and width beyond the domain of influence.
    pub margin: f64,
    pub courant: f64,
    pub trace: TraceStencil,
    /// Record interior products for pseudo-reconstruction and oracle checks.
    pub oracle: bool,
    pub skip_regularity_check: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            h: 1.0 / 64.0,
            margin: 0.1,
            courant: 0.7,
            trace: TraceStencil::Flux,
            oracle: true,
            skip_regularity_check: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSection {
    pub region: InteriorRegion,
    /// Relative speed error counted as a success.
    pub threshold: f64,
    /// Required fraction of scored nodes within the threshold.
    pub min_fraction: f64,
}

impl Default for ValidationSection {
    fn default() -> Self {
        ValidationSection { region: InteriorRegion::default(), threshold: 0.1, min_fraction: 0.8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Pgm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub dataset: String,
    pub formats: Vec<ExportFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), dataset: "dataset.bcm".into(), formats: vec![ExportFormat::Csv, ExportFormat::Pgm] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Recorded for provenance; no stage draws random numbers.
    pub seed: u64,
    pub scenario: ScenarioSpec,
    pub solver: SolverSection,
    pub basis: BasisSpec,
    pub inversion: InversionConfig,
    pub validation: ValidationSection,
    pub output: OutputSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::for_scenario(ScenarioKind::Test1)
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn ser_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl PipelineConfig {
    /// Defaults for a published scenario: its horizon, basis size, regularization and smoothing.
    pub fn for_scenario(kind: ScenarioKind) -> Self {
        let scenario = ScenarioSpec::preset(kind);
        let basis = BasisSpec { n_gamma: scenario.n_gamma, n_t: scenario.n_t, ..BasisSpec::default() };
        let mut inversion = InversionConfig::default();
        let sm = &mut inversion.smoothing;
        match kind {
            ScenarioKind::Test1 | ScenarioKind::Custom => {
                inversion.alpha = 1e-5;
                sm.sigma_gamma = 0.1875;
            }
            ScenarioKind::Test2 | ScenarioKind::Test3 => {
                inversion.alpha = 1e-4;
                sm.sigma_gamma = 0.1875;
                sm.sigma_xi = 0.046875;
                sm.sigma_gamma_end = Some(if kind == ScenarioKind::Test2 { 0.5 } else { 0.625 });
            }
            ScenarioKind::Test4 | ScenarioKind::Test5 => {
                inversion.alpha = 1e-4;
                sm.sigma_gamma = 0.125;
                sm.sigma_xi = 0.03125;
                sm.sigma_gamma_end = Some(if kind == ScenarioKind::Test4 { 0.25 } else { 0.325 });
            }
        }
        PipelineConfig {
            mode: Mode::InverseData,
            seed: 0,
            scenario,
            solver: SolverSection::default(),
            basis,
            inversion,
            validation: ValidationSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Parses a config, filling every omitted field from the defaults of its scenario kind.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let user: Table = text.parse().map_err(ser_err)?;
        let kind = match user.get("scenario").and_then(|s| s.get("kind")) {
            Some(v) => ScenarioKind::deserialize(v.clone()).map_err(ser_err)?,
            None => ScenarioKind::Test1,
        };
        let given = |sec: &str, key: &str| user.get(sec).and_then(|s| s.get(key)).cloned();
        for key in ["n_gamma", "n_t"] {
            if let (Some(a), Some(b)) = (given("scenario", key), given("basis", key)) {
                if a != b {
                    return Err(CliError::Config(format!("scenario.{key} = {a} but basis.{key} = {b}")));
                }
            }
        }
        let base = Self::for_scenario(kind);
        let mut table = Table::try_from(&base).map_err(ser_err)?;
        merge(&mut table, user.clone());
        // one basis size for both sections
        for key in ["n_gamma", "n_t"] {
            let v = given("basis", key).or_else(|| given("scenario", key));
            if let Some(v) = v {
                for sec in ["scenario", "basis"] {
                    if let Some(Value::Table(t)) = table.get_mut(sec) {
                        t.insert(key.into(), v.clone());
                    }
                }
            }
        }
        let cfg: PipelineConfig = table.try_into().map_err(ser_err)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(ser_err)
    }

    pub fn check(&self) -> Result<(), CliError> {
        self.scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let s = &self.solver;
        if !(s.h > 0.0) || !(s.margin >= 0.0) || !(s.courant > 0.0 && s.courant <= 1.0) {
            return Err(CliError::Config(format!("solver needs h > 0, margin >= 0 and 0 < courant <= 1, got {s:?}")));
        }
        if self.basis.n_gamma != self.scenario.n_gamma || self.basis.n_t != self.scenario.n_t {
            return Err(CliError::Config("basis and scenario disagree on the basis size".into()));
        }
        let v = &self.validation;
        if !(v.threshold > 0.0) || !(0.0..=1.0).contains(&v.min_fraction) {
            return Err(CliError::Config("validation needs threshold > 0 and min_fraction in [0, 1]".into()));
        }
        if !(self.inversion.alpha >= 0.0) {
            return Err(CliError::Config("inversion.alpha must be non-negative".into()));
        }
        Ok(())
    }
}
