//! Spec files, flag overrides and the resolved run configuration.

use std::path::Path;

use gmeasure_core::kernels::DEFAULT_DEPTH_BUDGET;
use gmeasure_core::simulate::Init;
use gmeasure_core::stationary::{DEFAULT_STATE_BUDGET, DEFAULT_TAIL_TERMS};
use gmeasure_core::KernelSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimateChoice {
    /// Order-k truncation of the transfer operator.
    Markov,
    /// Exact renewal law; comb kernels only.
    Renewal,
    /// Skip every estimate-dependent check.
    None,
}

/// Optional settings read from a spec file's `config` object or from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub depth: Option<usize>,
    pub n_max: Option<usize>,
    pub h1_max: Option<usize>,
    pub order: Option<usize>,
    pub estimate: Option<EstimateChoice>,
    pub seed: Option<u64>,
    pub length: Option<usize>,
    pub burn_in: Option<usize>,
    pub init: Option<Init>,
    pub truncation_depth: Option<usize>,
    pub midpoint_fallback: Option<bool>,
    pub empirical_max_len: Option<usize>,
    pub budget_states: Option<usize>,
    pub budget_depth: Option<usize>,
    pub tail_terms: Option<usize>,
}

impl ConfigOverrides {
    /// Fields set in `self` win over `base`.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            depth: self.depth.or(base.depth),
            n_max: self.n_max.or(base.n_max),
            h1_max: self.h1_max.or(base.h1_max),
            order: self.order.or(base.order),
            estimate: self.estimate.or(base.estimate),
            seed: self.seed.or(base.seed),
            length: self.length.or(base.length),
            burn_in: self.burn_in.or(base.burn_in),
            init: self.init.or(base.init),
            truncation_depth: self.truncation_depth.or(base.truncation_depth),
            midpoint_fallback: self.midpoint_fallback.or(base.midpoint_fallback),
            empirical_max_len: self.empirical_max_len.or(base.empirical_max_len),
            budget_states: self.budget_states.or(base.budget_states),
            budget_depth: self.budget_depth.or(base.budget_depth),
            tail_terms: self.tail_terms.or(base.tail_terms),
        }
    }
}

/// Every setting a run uses, echoed in each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Tree depth for `tree`, and the summability depth for the H4 check.
    pub depth: usize,
    /// Largest `n` on the pressure curve.
    pub n_max: usize,
    /// Largest `N` tried for the weak non-nullness check.
    pub h1_max: usize,
    pub order: usize,
    pub estimate: EstimateChoice,
    pub seed: u64,
    pub length: usize,
    pub burn_in: usize,
    pub init: Init,
    pub truncation_depth: usize,
    pub midpoint_fallback: bool,
    pub empirical_max_len: usize,
    pub budget_states: usize,
    pub budget_depth: usize,
    pub tail_terms: usize,
}

pub const DEFAULT_DEPTH: usize = 12;
pub const DEFAULT_ORDER: usize = 10;

impl RunConfig {
    pub fn resolve(o: ConfigOverrides, padding: char) -> Result<Self, CliError> {
        let depth = o.depth.unwrap_or(DEFAULT_DEPTH);
        let cfg = RunConfig {
            depth,
            n_max: o.n_max.unwrap_or(depth),
            h1_max: o.h1_max.unwrap_or(depth.saturating_sub(1)),
            order: o.order.unwrap_or(DEFAULT_ORDER),
            estimate: o.estimate.unwrap_or(EstimateChoice::Markov),
            seed: o.seed.unwrap_or(0),
            length: o.length.unwrap_or(100_000),
            burn_in: o.burn_in.unwrap_or(1_000),
            init: o.init.unwrap_or(Init::Word { word: String::new(), padding }),
            truncation_depth: o.truncation_depth.unwrap_or(64),
            midpoint_fallback: o.midpoint_fallback.unwrap_or(true),
            empirical_max_len: o.empirical_max_len.unwrap_or(6),
            budget_states: o.budget_states.unwrap_or(DEFAULT_STATE_BUDGET),
            budget_depth: o.budget_depth.unwrap_or(DEFAULT_DEPTH_BUDGET),
            tail_terms: o.tail_terms.unwrap_or(DEFAULT_TAIL_TERMS),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("depth", self.depth),
            ("n_max", self.n_max),
            ("order", self.order),
            ("length", self.length),
            ("truncation_depth", self.truncation_depth),
            ("empirical_max_len", self.empirical_max_len),
            ("tail_terms", self.tail_terms),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CliError::Spec(format!("config.{name} must be >= 1")));
            }
        }
        if self.depth < 2 {
            return Err(CliError::Spec("config.depth must be >= 2".into()));
        }
        Ok(())
    }

    /// Depth the discontinuity tree needs for every tree-level check.
    pub fn tree_depth(&self) -> usize {
        self.depth.max(self.n_max).max(self.h1_max + 1)
    }
}

/// A spec file: `{"kernel": ..., "params": ..., "config": {...}?}`.
///
/// A report written by this tool is accepted too; its embedded `spec` is used.
#[derive(Debug, Clone)]
pub struct SpecFile {
    pub kernel: KernelSpec,
    pub document: Value,
    pub config: ConfigOverrides,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kernel: Value,
    params: Value,
    #[serde(default)]
    config: Option<Value>,
}

fn parse_at<T: serde::de::DeserializeOwned>(value: Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        CliError::Spec(format!("at `{at}`: {}", e.inner()))
    })
}

impl SpecFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Spec(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Spec(m) => CliError::Spec(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut value: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Spec(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if value.get("tool").is_some() {
            value = value.get("spec").cloned().ok_or_else(|| CliError::Spec("report has no embedded spec".into()))?;
        }
        let raw: RawSpec = parse_at(value, "spec")?;
        let document = serde_json::json!({ "kernel": raw.kernel, "params": raw.params });
        let kernel: KernelSpec = parse_at(document.clone(), "spec")?;
        let config = match raw.config {
            Some(c) => parse_at(c, "config")?,
            None => ConfigOverrides::default(),
        };
        Ok(Self { kernel, document, config })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = ConfigOverrides { depth: Some(8), order: Some(6), ..Default::default() };
        let flags = ConfigOverrides { order: Some(9), ..Default::default() };
        let cfg = RunConfig::resolve(flags.over(file), '1').unwrap();
        assert_eq!((cfg.depth, cfg.order, cfg.n_max, cfg.h1_max), (8, 9, 8, 7));
        assert_eq!(cfg.init, Init::Word { word: String::new(), padding: '1' });
    }

    #[test]
    fn field_errors_carry_a_path() {
        let text = r#"{"kernel": "comb", "params": {"q": {"type": "list", "values": [0.5, "x"], "tail": {"type": "periodic"}}, "q_inf": 0.5}}"#;
        let CliError::Spec(msg) = SpecFile::parse(text).unwrap_err() else { panic!() };
        // tagged enums are buffered, so the path stops at the enum itself
        assert!(msg.contains("spec.params.q`") && msg.contains("expected f64"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let CliError::Spec(msg) = SpecFile::parse("{\n  \"kernel\": ,\n}").unwrap_err() else { panic!() };
        assert!(msg.starts_with("line 2"), "{msg}");
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let text = r#"{"kernel": "markov", "params": {"alphabet": "01", "order": 0, "transitions": {"": [0.5, 0.5]}}, "config": {"dept": 3}}"#;
        let CliError::Spec(msg) = SpecFile::parse(text).unwrap_err() else { panic!() };
        assert!(msg.contains("config"), "{msg}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::resolve(ConfigOverrides::default(), '0').unwrap();
        let back: ConfigOverrides = serde_json::from_value(serde_json::to_value(&cfg).unwrap()).unwrap();
        assert_eq!(RunConfig::resolve(back, '1').unwrap(), cfg);
    }
}
