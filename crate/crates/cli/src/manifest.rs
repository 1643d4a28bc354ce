//! The TOML manifest: scenarios, roster, run counts and the cross-play
//! final.
//!
//! ```toml
//! seed = 42
//! runs = 10
//!
//! [[roster]]
//! id = "cc"
//! strategy = "conditional_cooperator"
//!
//! [[roster]]
//! id = "my-model"
//! kind = "llm"
//! model = "small-chat"
//!
//! [[scenarios]]
//! scenario_id = "pd-visitor"
//! substrate_id = "reality_show"
//! mode = "visitor"
//! background_strategy_id = "grim_trigger"
//! phase = "dev"
//! ```

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use arena_core::domain::{validate_scenario, AgentId, Phase, ScenarioSpec};
use arena_core::populations::BackgroundStrategyId;
use arena_core::tournament::{check_veil, duplicate_scenario_ids, CrossplayConfig, Manifest, RosterEntry, ScriptedFactory};
use arena_llm::{http_connector, EndpointConfig, LlmFactory, ScaffoldConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_runs() -> u32 {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: u32,
    #[serde(default)]
    pub roster: Vec<AgentSpec>,
    #[serde(default)]
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossplay: Option<CrossplaySection>,
    /// Endpoint defaults shared by every model-backed agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm: Option<LlmSection>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    #[default]
    Scripted,
    Llm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    #[serde(default)]
    pub kind: AgentKind,
    /// Scripted strategy name; scripted agents only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaffold: Option<ScaffoldConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossplaySection {
    pub finalists: Vec<String>,
    /// Scenario ids to play; empty means every evaluation scenario.
    #[serde(default)]
    pub scenarios: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<u32>,
}

/// Command-line values that beat both the manifest and the environment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EndpointOverrides {
    pub base_url: Option<String>,
    pub model: Option<String>,
}

impl ManifestFile {
    pub fn parse(text: &str) -> Result<ManifestFile, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<ManifestFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Every rule the manifest breaks, one line each. The veil overlap is
    /// reported separately by [`ManifestFile::veil_violation`].
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for dup in duplicate_scenario_ids(&self.scenarios) {
            out.push(format!("duplicate scenario id '{dup}'"));
        }
        for spec in &self.scenarios {
            for v in validate_scenario(spec) {
                out.push(format!("scenario '{}': {}: {}", spec.scenario_id, v.code, v.message));
            }
        }
        let mut ids = BTreeSet::new();
        for agent in &self.roster {
            if AgentId::new(agent.id.clone()).is_err() {
                out.push("roster entry with an empty id".to_string());
            } else if !ids.insert(agent.id.as_str()) {
                out.push(format!("duplicate agent id '{}'", agent.id));
            }
            if let Err(e) = agent.check() {
                out.push(e);
            }
        }
        if let Some(cp) = &self.crossplay {
            for f in &cp.finalists {
                if !ids.contains(f.as_str()) {
                    out.push(format!("cross-play finalist '{f}' is not on the roster"));
                }
            }
            for s in &cp.scenarios {
                if !self.scenarios.iter().any(|x| &x.scenario_id == s) {
                    out.push(format!("cross-play scenario '{s}' is not defined"));
                }
            }
        }
        out
    }

    pub fn veil_violation(&self) -> Option<String> {
        check_veil(&self.scenarios).err().map(|e| e.to_string())
    }

    /// Build the runnable manifest. Model-backed agents take their
    /// endpoint from the command line, then the agent entry, then the
    /// `[llm]` table, then the environment.
    pub fn resolve(&self, overrides: &EndpointOverrides) -> Result<Manifest, CliError> {
        let roster = self
            .roster
            .iter()
            .map(|a| a.entry(overrides, self.llm.as_ref()))
            .collect::<Result<_, _>>()?;
        Ok(Manifest {
            master_seed: self.seed,
            runs_per_scenario: self.runs,
            roster,
            scenarios: self.scenarios.clone(),
            crossplay: self.crossplay_config()?,
        })
    }

    fn crossplay_config(&self) -> Result<Option<CrossplayConfig>, CliError> {
        let Some(cp) = &self.crossplay else {
            return Ok(None);
        };
        let finalists = cp
            .finalists
            .iter()
            .map(|f| AgentId::new(f.clone()).map_err(|e| CliError::Validation(e.to_string())))
            .collect::<Result<_, _>>()?;
        let scenarios = if cp.scenarios.is_empty() {
            self.scenarios
                .iter()
                .filter(|s| s.phase == Phase::Evaluation)
                .cloned()
                .collect()
        } else {
            cp.scenarios
                .iter()
                .map(|id| {
                    self.scenarios
                        .iter()
                        .find(|s| &s.scenario_id == id)
                        .cloned()
                        .ok_or_else(|| CliError::Validation(format!("cross-play scenario '{id}' is not defined")))
                })
                .collect::<Result<_, _>>()?
        };
        Ok(Some(CrossplayConfig {
            finalists,
            scenarios,
            runs: cp.runs.unwrap_or(self.runs),
        }))
    }
}

impl AgentSpec {
    pub fn scripted(id: impl Into<String>, strategy: BackgroundStrategyId) -> AgentSpec {
        AgentSpec {
            id: id.into(),
            kind: AgentKind::Scripted,
            strategy: Some(strategy.name().to_string()),
            model: None,
            base_url: None,
            scaffold: None,
        }
    }

    fn check(&self) -> Result<(), String> {
        match self.kind {
            AgentKind::Scripted => {
                let Some(s) = &self.strategy else {
                    return Err(format!("agent '{}' needs a strategy", self.id));
                };
                s.parse::<BackgroundStrategyId>()
                    .map_err(|e| format!("agent '{}': {e}", self.id))?;
                if self.model.is_some() || self.base_url.is_some() || self.scaffold.is_some() {
                    return Err(format!("agent '{}': model settings on a scripted agent", self.id));
                }
            }
            AgentKind::Llm => {
                if self.strategy.is_some() {
                    return Err(format!("agent '{}': strategy on a model-backed agent", self.id));
                }
                if let Some(cfg) = &self.scaffold {
                    cfg.validate().map_err(|e| format!("agent '{}': {e}", self.id))?;
                }
            }
        }
        Ok(())
    }

    fn entry(&self, overrides: &EndpointOverrides, shared: Option<&LlmSection>) -> Result<RosterEntry, CliError> {
        self.check().map_err(CliError::Validation)?;
        let id = AgentId::new(self.id.clone()).map_err(|e| CliError::Validation(e.to_string()))?;
        match self.kind {
            AgentKind::Scripted => {
                let strategy = self
                    .strategy
                    .as_deref()
                    .unwrap_or_default()
                    .parse::<BackgroundStrategyId>()
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                Ok(RosterEntry::new(id, Arc::new(ScriptedFactory(strategy))))
            }
            AgentKind::Llm => {
                let shared = shared.cloned().unwrap_or_default();
                let base_url = overrides
                    .base_url
                    .clone()
                    .or_else(|| self.base_url.clone())
                    .or(shared.base_url);
                let model = overrides.model.clone().or_else(|| self.model.clone()).or(shared.model);
                let mut endpoint = EndpointConfig::from_env(base_url, None, model).ok_or_else(|| {
                    CliError::Usage(format!(
                        "agent '{}' has no endpoint: set base_url, --llm-base-url or {}",
                        self.id,
                        arena_llm::ENV_BASE_URL
                    ))
                })?;
                if let Some(t) = shared.timeout_secs {
                    endpoint.timeout = Duration::from_secs_f64(t.clamp(0.001, 86_400.0));
                }
                let factory = LlmFactory::new(
                    self.scaffold.clone().unwrap_or_default(),
                    endpoint.model.clone(),
                    Arc::new(http_connector(endpoint)),
                );
                Ok(RosterEntry::new(id, Arc::new(factory)))
            }
        }
    }
}
