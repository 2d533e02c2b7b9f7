//! The experiment config: one JSON document, unknown keys rejected.

use std::path::Path;

use matmart::mart_sim::{Dependence, EntryLaw, MartingaleModel};
use matmart::moment_bounds::MomentProfile;
use matmart::normed_space::{default_eps_grid, NormFamily, NormSpec, DEFAULT_CLOUD_SIZE};
use matmart::verify::{default_t_grid, DEFAULT_MOMENT_ORDERS, DEFAULT_PATHS, HEAVY_ORDER_CAP};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_OUT: &str = "matmart-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaMode {
    /// `value` defaults to 0 for finite extreme sets and `2(d − 1)` for spheres.
    Analytic {
        #[serde(default)]
        value: Option<f64>,
    },
    /// Fitted from covering numbers; `value` is filled in with the estimate.
    Estimated {
        #[serde(default)]
        value: Option<f64>,
    },
}

impl Default for KappaMode {
    fn default() -> Self {
        KappaMode::Analytic { value: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySettings {
    #[serde(default)]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default = "default_cloud")]
    pub cloud_size: usize,
}

impl Default for EntropySettings {
    fn default() -> Self {
        EntropySettings { eps_grid: None, cloud_size: DEFAULT_CLOUD_SIZE }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_model")]
    pub model: MartingaleModel,
    /// Norm family on `R^d`; the dimension is the model's `d`.
    #[serde(default = "default_norm")]
    pub norm: NormFamily,
    #[serde(default)]
    pub kappa_mode: KappaMode,
    /// Entry-level moment profile; defaults to the model's closed form.
    #[serde(default)]
    pub moment_profile: Option<MomentProfile>,
    /// Orders for the bound table; defaults to the grid on `J0`.
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    /// Orders for moment rows; defaults to 4, 6, 8 below `p+`.
    #[serde(default)]
    pub moment_orders: Option<Vec<f64>>,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Multiplier on `β`; below 1 only for negative controls.
    #[serde(default = "one")]
    pub beta_scale: f64,
    #[serde(default)]
    pub entropy: EntropySettings,
    /// Number of raw paths written as CSV by `simulate`.
    #[serde(default)]
    pub dump_paths: usize,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_model() -> MartingaleModel {
    MartingaleModel { d: 2, n: 100, entry_law: EntryLaw::Rademacher, dependence: Dependence::Independent }
}

fn default_norm() -> NormFamily {
    NormFamily::L2
}

fn default_cloud() -> usize {
    DEFAULT_CLOUD_SIZE
}

fn default_paths() -> usize {
    DEFAULT_PATHS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn one() -> f64 {
    1.0
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

/// `origin:line:column: message`, without serde_json's trailing position.
pub(crate) fn json_error(origin: &str, e: &serde_json::Error) -> CliError {
    let msg = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
    CliError::Usage(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
}

impl ExperimentConfig {
    /// Parses a config; errors carry `path:line:column`.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| json_error(origin, &e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn spec(&self) -> Result<NormSpec, CliError> {
        Ok(NormSpec::new(self.model.d, self.norm)?)
    }

    /// Checks ranges that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        self.spec()?;
        if let Some(p) = &self.moment_profile {
            p.validate()?;
        }
        if self.paths == 0 {
            return Err(CliError::Usage("paths must be at least 1".into()));
        }
        if !(self.beta_scale > 0.0) || !self.beta_scale.is_finite() {
            return Err(CliError::Usage(format!("beta_scale must be positive, got {}", self.beta_scale)));
        }
        if let KappaMode::Analytic { value: Some(k) } = self.kappa_mode {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(CliError::Usage(format!("κ must be finite and nonnegative, got {k}")));
            }
        }
        check_grid("p_grid", self.p_grid.as_deref(), |p| p >= 1.0)?;
        check_grid("moment_orders", self.moment_orders.as_deref(), |p| p >= 1.0)?;
        check_grid("t_grid", self.t_grid.as_deref(), |t| t > 0.0)?;
        check_grid("entropy.eps_grid", self.entropy.eps_grid.as_deref(), |e| e > 0.0 && e < (-1f64).exp())?;
        Ok(())
    }

    /// Fills every default that does not depend on the bound itself.
    pub fn materialize_static(&mut self) -> Result<(), CliError> {
        let spec = self.spec()?;
        if let KappaMode::Analytic { value: v @ None } = &mut self.kappa_mode {
            *v = Some(matmart::verify::analytic_kappa(&spec));
        }
        if self.moment_profile.is_none() {
            self.moment_profile = Some(self.model.moment_profile()?);
        }
        self.t_grid.get_or_insert_with(default_t_grid);
        self.entropy.eps_grid.get_or_insert_with(default_eps_grid);
        self.output.path.get_or_insert_with(|| DEFAULT_OUT.to_string());
        Ok(())
    }

    /// Fills the order grids once `J0 = (p−, p+)` is known.
    pub fn materialize_orders(&mut self, p_grid: &[f64], p_plus: f64) {
        self.p_grid.get_or_insert_with(|| p_grid.to_vec());
        self.moment_orders.get_or_insert_with(|| {
            DEFAULT_MOMENT_ORDERS.iter().cloned().filter(|&p| p < p_plus && p <= HEAVY_ORDER_CAP).collect()
        });
    }
}

fn check_grid(name: &str, grid: Option<&[f64]>, ok: impl Fn(f64) -> bool) -> Result<(), CliError> {
    let Some(g) = grid else { return Ok(()) };
    if g.is_empty() {
        return Err(CliError::Usage(format!("{name} must not be empty")));
    }
    if let Some(bad) = g.iter().find(|&&v| !v.is_finite() || !ok(v)) {
        return Err(CliError::Usage(format!("{name} contains the out-of-range value {bad}")));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_document() {
        let c = ExperimentConfig::default();
        assert_eq!(c.model.d, 2);
        assert_eq!(c.paths, DEFAULT_PATHS);
        assert_eq!(c.seed, DEFAULT_SEED);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = ExperimentConfig::parse("{\n  \"paths\": 10,\n  \"pathz\": 3\n}", "cfg.json").unwrap_err();
        let CliError::Usage(msg) = err else { panic!() };
        assert!(msg.starts_with("cfg.json:3:"), "{msg}");
        assert!(msg.contains("pathz"));
        assert!(ExperimentConfig::parse(r#"{"model": {"d": 2, "n": 3, "entry_law": {"law": "rademacher"}, "extra": 1}}"#, "x").is_err());
        assert!(ExperimentConfig::parse(r#"{"norm": {"kind": "lp", "p": 3, "q": 2}}"#, "x").is_err());
    }

    #[test]
    fn materialized_config_round_trips() {
        let mut c = ExperimentConfig::parse(
            r#"{"model": {"d": 3, "n": 10, "entry_law": {"law": "pareto_sym", "b": 6, "gamma": 0}}, "norm": {"kind": "linf"}}"#,
            "x",
        )
        .unwrap();
        c.validate().unwrap();
        c.materialize_static().unwrap();
        assert_eq!(c.kappa_mode, KappaMode::Analytic { value: Some(0.0) });
        c.materialize_orders(&[5.0, 5.5], 6.0);
        assert_eq!(c.moment_orders.as_deref(), Some(&[4.0][..]));
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(ExperimentConfig::parse(&text, "echo").unwrap(), c);
    }

    #[test]
    fn range_checks() {
        let mut c = ExperimentConfig { paths: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c.paths = 5;
        c.t_grid = Some(vec![2.0, 1.0]);
        assert!(c.validate().is_err());
        c.t_grid = None;
        c.entropy.eps_grid = Some(vec![0.5]);
        assert!(c.validate().is_err());
    }
}
