use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("max_llm_calls_per_step must be at least 1")]
    NoCalls,
    #[error("memory_window must be at least 1")]
    NoMemory,
    #[error("char_budget must be positive")]
    NoBudget,
    #[error("temperature must be finite and non-negative, got {0}")]
    Temperature(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaffoldConfig {
    pub persona_preamble: String,
    /// Number of past events kept in memory.
    pub memory_window: usize,
    pub max_llm_calls_per_step: u32,
    /// Extra attempts after an unparseable reply.
    pub retry_limit: u32,
    /// Prompt length cap in characters; the oldest memories go first.
    pub char_budget: usize,
    pub temperature: f64,
}

impl Default for ScaffoldConfig {
    fn default() -> Self {
        ScaffoldConfig {
            persona_preamble: "You are a player in a repeated multi-player game. Other players may \
                               be people or programs. Your goal is to earn a high score."
                .to_string(),
            memory_window: 40,
            max_llm_calls_per_step: 3,
            retry_limit: 2,
            char_budget: 6000,
            temperature: 0.0,
        }
    }
}

impl ScaffoldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_llm_calls_per_step == 0 {
            return Err(ConfigError::NoCalls);
        }
        if self.memory_window == 0 {
            return Err(ConfigError::NoMemory);
        }
        if self.char_budget == 0 {
            return Err(ConfigError::NoBudget);
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(ConfigError::Temperature(self.temperature));
        }
        Ok(())
    }

    /// Calls one step may spend: the first try plus retries, capped by the
    /// per-step limit.
    pub fn call_budget(&self) -> u32 {
        self.retry_limit.saturating_add(1).min(self.max_llm_calls_per_step)
    }
}
