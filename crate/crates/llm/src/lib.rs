//! A policy backed by a chat-completion endpoint: the observation is
//! scaffolded into a prompt, sent to the model, and the reply parsed back
//! into a legal action.

pub mod client;
pub mod config;
pub mod memory;
pub mod mock;
pub mod parse;
pub mod policy;
pub mod scaffold;

pub use client::{
    http_connector, ChatClient, ChatMessage, ChatRequest, ChatResponse, EndpointConfig, HttpChatClient, TransportError,
    Unavailable, Usage, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL,
};
pub use config::{ConfigError, ScaffoldConfig};
pub use memory::{MemoryEntry, MemoryStore};
pub use parse::{parse_action, ParseFailure};
pub use mock::{MockReply, MockServer};
pub use policy::{llm_act, CallStats, Connector, LlmFactory, LlmPolicy};
pub use scaffold::scaffold;
