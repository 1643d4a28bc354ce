use std::sync::Arc;

use arena_core::domain::{ActionAttempt, EventKind, Observation, SeededStream};
use arena_core::populations::{Policy, PolicyError};
use arena_core::substrates::SubstrateId;
use arena_core::tournament::PolicyFactory;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::{parse_action, scaffold, ChatClient, ChatMessage, ChatRequest, MemoryStore, ScaffoldConfig};

const CORRECTION: &str = "That reply did not contain a legal action. Reply again with the action only.";

/// What one decision cost.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallStats {
    pub calls: u32,
    /// Calls whose reply was unusable, whether from transport or parsing.
    pub failures: u32,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// True when no call produced a legal action and the default was used.
    pub fell_back: bool,
    /// Transport failures, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transport_errors: Vec<String>,
}

impl CallStats {
    /// Log entries for this decision: any transport failures, then usage.
    pub fn notes(&self) -> Vec<EventKind> {
        let mut notes: Vec<EventKind> = self
            .transport_errors
            .iter()
            .map(|reason| EventKind::TransportError { reason: reason.clone() })
            .collect();
        notes.push(self.usage());
        notes
    }

    pub fn usage(&self) -> EventKind {
        EventKind::Usage {
            calls: self.calls,
            prompt_tokens: self.prompt_tokens,
            completion_tokens: self.completion_tokens,
            failures: self.failures,
        }
    }
}

/// Prompt the model for one action. Unparseable replies and transport
/// errors are retried with a correction until the call budget runs out,
/// then the grammar's default action is returned.
pub fn llm_act(
    obs: &Observation,
    memory: &MemoryStore,
    config: &ScaffoldConfig,
    model: &str,
    client: &mut dyn ChatClient,
) -> Result<(ActionAttempt, CallStats), PolicyError> {
    let grammar = obs
        .grammar
        .as_ref()
        .ok_or_else(|| PolicyError::Failed("asked to act without a legal-action grammar".into()))?;
    let mut messages = vec![ChatMessage::user(scaffold(obs, memory, config))];
    let mut stats = CallStats::default();
    while stats.calls < config.call_budget() {
        stats.calls += 1;
        let request = ChatRequest {
            model: model.to_string(),
            messages: messages.clone(),
            temperature: config.temperature,
        };
        match client.chat(&request) {
            Ok(resp) => {
                stats.prompt_tokens += resp.usage.prompt_tokens;
                stats.completion_tokens += resp.usage.completion_tokens;
                match parse_action(&resp.content, grammar) {
                    Ok(action) => return Ok((action, stats)),
                    Err(e) => {
                        stats.failures += 1;
                        warn!("seat {}: {e}", obs.seat);
                        messages.push(ChatMessage::assistant(resp.content));
                        messages.push(ChatMessage::user(format!(
                            "{CORRECTION} Legal actions: {}",
                            grammar.describe()
                        )));
                    }
                }
            }
            Err(e) => {
                stats.failures += 1;
                warn!("seat {}: {e}", obs.seat);
                stats.transport_errors.push(e.to_string());
            }
        }
    }
    stats.fell_back = true;
    Ok((grammar.default.clone(), stats))
}

pub type Connector = Arc<dyn Fn() -> Box<dyn ChatClient> + Send + Sync>;

pub struct LlmPolicy {
    config: ScaffoldConfig,
    model: String,
    substrate: SubstrateId,
    client: Box<dyn ChatClient>,
    memory: MemoryStore,
    notes: Vec<EventKind>,
    totals: CallStats,
}

impl LlmPolicy {
    pub fn new(config: ScaffoldConfig, model: impl Into<String>, substrate: SubstrateId, client: Box<dyn ChatClient>) -> LlmPolicy {
        let memory = MemoryStore::new(config.memory_window);
        LlmPolicy {
            config,
            model: model.into(),
            substrate,
            client,
            memory,
            notes: Vec::new(),
            totals: CallStats::default(),
        }
    }

    pub fn memory(&self) -> &MemoryStore {
        &self.memory
    }

    /// Calls and tokens summed over the episode so far.
    pub fn totals(&self) -> &CallStats {
        &self.totals
    }

    fn check(&self, obs: &Observation) -> Result<(), PolicyError> {
        if obs.substrate != self.substrate {
            return Err(PolicyError::WrongSubstrate {
                expected: self.substrate,
                got: obs.substrate,
            });
        }
        Ok(())
    }
}

impl Policy for LlmPolicy {
    fn reset(&mut self, _seed: u64) {
        self.memory.clear();
        self.notes.clear();
        self.totals = CallStats::default();
    }

    fn act(&mut self, obs: &Observation, _rng: &mut SeededStream) -> Result<ActionAttempt, PolicyError> {
        self.check(obs)?;
        self.memory.record(obs);
        let (action, stats) = llm_act(obs, &self.memory, &self.config, &self.model, self.client.as_mut())?;
        self.totals.calls += stats.calls;
        self.totals.failures += stats.failures;
        self.totals.prompt_tokens += stats.prompt_tokens;
        self.totals.completion_tokens += stats.completion_tokens;
        self.notes.extend(stats.notes());
        Ok(action)
    }

    fn observe(&mut self, obs: &Observation) {
        if obs.substrate == self.substrate {
            self.memory.record(obs);
        }
    }

    fn drain_notes(&mut self) -> Vec<EventKind> {
        std::mem::take(&mut self.notes)
    }
}

/// Builds one [`LlmPolicy`] per seat, each with its own connection.
#[derive(Clone)]
pub struct LlmFactory {
    pub config: ScaffoldConfig,
    pub model: String,
    pub connect: Connector,
}

impl LlmFactory {
    pub fn new(config: ScaffoldConfig, model: impl Into<String>, connect: Connector) -> LlmFactory {
        LlmFactory {
            config,
            model: model.into(),
            connect,
        }
    }
}

impl std::fmt::Debug for LlmFactory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmFactory")
            .field("config", &self.config)
            .field("model", &self.model)
            .finish_non_exhaustive()
    }
}

impl PolicyFactory for LlmFactory {
    fn build(&self, substrate: SubstrateId, seed: u64) -> Result<Box<dyn Policy>, PolicyError> {
        self.config.validate().map_err(|e| PolicyError::Failed(e.to_string()))?;
        let mut policy = LlmPolicy::new(self.config.clone(), self.model.clone(), substrate, (self.connect)());
        policy.reset(seed);
        Ok(Box::new(policy))
    }
}
