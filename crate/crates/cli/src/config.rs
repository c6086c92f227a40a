//! Run configuration: a sectioned TOML file, overridable from the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use otto_core::io::OutputFormat;
use otto_core::spectra::{ModelSpec, SpinEnsemble};
use otto_core::sweep::{carnot_beta_c, CouplingSpec, SweepBase};
use otto_core::work_stats::CycleParams;
use otto_core::HalfInt;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the directory relative output paths land in.
pub const OUTPUT_DIR_ENV: &str = "OTTO_OUTPUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub cycle: CycleSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `linear`, `power` or `lmg`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_lmg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<HalfInt>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    /// `symmetric`, `uniform_product`, `weights` or `independent`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// `j → P_j`, used with `kind = "weights"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<HalfInt, f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Significant digits in written tables; full precision when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("file", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Overlay every field set in `other`. Setting one of `beta_c` / `delta`
    /// clears the other unless `other` sets both.
    pub fn merge(&mut self, other: &RunConfig) {
        fn set<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                dst.clone_from(src);
            }
        }
        set(&mut self.model.kind, &other.model.kind);
        set(&mut self.model.x, &other.model.x);
        set(&mut self.model.gamma_lmg, &other.model.gamma_lmg);
        set(&mut self.ensemble.n, &other.ensemble.n);
        set(&mut self.ensemble.s, &other.ensemble.s);
        set(&mut self.cycle.omega_c, &other.cycle.omega_c);
        set(&mut self.cycle.omega_h, &other.cycle.omega_h);
        set(&mut self.cycle.beta_h, &other.cycle.beta_h);
        match (other.cycle.beta_c, other.cycle.delta) {
            (Some(_), None) => self.cycle.delta = None,
            (None, Some(_)) => self.cycle.beta_c = None,
            _ => {}
        }
        set(&mut self.cycle.beta_c, &other.cycle.beta_c);
        set(&mut self.cycle.delta, &other.cycle.delta);
        set(&mut self.coupling.kind, &other.coupling.kind);
        set(&mut self.coupling.weights, &other.coupling.weights);
        set(&mut self.output.format, &other.output.format);
        set(&mut self.output.path, &other.output.path);
        set(&mut self.output.precision, &other.output.precision);
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let model = match self.model.kind.as_deref().unwrap_or("linear") {
            "linear" => ModelSpec::Linear,
            "power" => ModelSpec::PowerX {
                x: self.model.x.ok_or_else(|| CliError::config("model.x", "required for kind = \"power\""))?,
            },
            "lmg" => ModelSpec::Lmg {
                gamma: self
                    .model
                    .gamma_lmg
                    .ok_or_else(|| CliError::config("model.gamma_lmg", "required for kind = \"lmg\""))?,
            },
            other => {
                return Err(CliError::config(
                    "model.kind",
                    format!("expected linear, power or lmg, got {other:?}"),
                ))
            }
        };
        model.validate().map_err(|e| CliError::config("model", e.to_string()))?;

        let n = self.ensemble.n.ok_or_else(|| CliError::config("ensemble.n", "required"))?;
        let s = self.ensemble.s.unwrap_or(HalfInt::HALF);
        let ensemble = SpinEnsemble::new(n, s).map_err(|e| CliError::config("ensemble", e.to_string()))?;

        let need = |v: Option<f64>, field: &'static str| v.ok_or_else(|| CliError::config(field, "required"));
        let omega_c = need(self.cycle.omega_c, "cycle.omega_c")?;
        let omega_h = need(self.cycle.omega_h, "cycle.omega_h")?;
        let beta_h = need(self.cycle.beta_h, "cycle.beta_h")?;
        let (beta_c, delta) = match (self.cycle.beta_c, self.cycle.delta) {
            (Some(b), None) => (b, None),
            (None, Some(d)) => (
                carnot_beta_c(omega_c, omega_h, beta_h, d).map_err(|e| CliError::config("cycle.delta", e.to_string()))?,
                Some(d),
            ),
            _ => return Err(CliError::config("cycle.beta_c", "exactly one of beta_c or delta must be set")),
        };

        let coupling = match self.coupling.kind.as_deref().unwrap_or("symmetric") {
            "symmetric" => CouplingSpec::Symmetric,
            "uniform_product" => CouplingSpec::UniformProduct,
            "independent" => CouplingSpec::Independent,
            "weights" => CouplingSpec::Weights(
                self.coupling
                    .weights
                    .clone()
                    .ok_or_else(|| CliError::config("coupling.weights", "required for kind = \"weights\""))?,
            ),
            other => {
                return Err(CliError::config(
                    "coupling.kind",
                    format!("expected symmetric, uniform_product, weights or independent, got {other:?}"),
                ))
            }
        };
        if self.coupling.weights.is_some() && !matches!(coupling, CouplingSpec::Weights(_)) {
            return Err(CliError::config("coupling.weights", "only allowed with kind = \"weights\""));
        }
        if self.output.precision == Some(0) {
            return Err(CliError::config("output.precision", "must be at least 1"));
        }

        let base = SweepBase { model, ensemble, omega_c, omega_h, beta_c, beta_h, coupling };
        let cycle = base.cycle().map_err(|e| CliError::config(core_field(&e), e.to_string()))?;
        Ok(Resolved {
            base,
            cycle,
            delta,
            format: self.output.format.unwrap_or_default(),
            path: self.output.path.clone(),
            precision: self.output.precision,
        })
    }
}

/// Map a core parameter error to the config field it came from.
fn core_field(e: &otto_core::Error) -> String {
    match e {
        otto_core::Error::InvalidParameter { name, .. } => match *name {
            "omega_c" | "omega_h" | "beta_c" | "beta_h" | "delta" => format!("cycle.{name}"),
            "n" | "s" => format!("ensemble.{name}"),
            "weights" => "coupling.weights".into(),
            other => other.into(),
        },
        otto_core::Error::DisallowedBlock { .. } => "coupling.weights".into(),
        _ => "config".into(),
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub base: SweepBase,
    pub cycle: CycleParams,
    /// `Δ` when the cold bath was set through it.
    pub delta: Option<f64>,
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
    pub precision: Option<usize>,
}

impl Resolved {
    /// Output path with relative paths placed under `$OTTO_OUTPUT_DIR`.
    pub fn output_path(&self) -> Option<PathBuf> {
        let p = self.path.as_ref()?;
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if p.is_relative() => Some(Path::new(&dir).join(p)),
            _ => Some(p.clone()),
        }
    }
}
