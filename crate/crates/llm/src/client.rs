use std::time::Duration;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

/// Chat-completions request body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChatResponse {
    pub content: String,
    pub usage: Usage,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("endpoint returned status {status}")]
    Status { status: u16, body: String },
    #[error("request timed out")]
    Timeout,
    #[error("could not reach endpoint: {0}")]
    Connect(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

pub trait ChatClient: Send {
    fn chat(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError>;
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn chat(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        (**self).chat(request)
    }
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
}

impl std::fmt::Debug for EndpointConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EndpointConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("model", &self.model)
            .field("timeout", &self.timeout)
            .finish()
    }
}

pub const ENV_BASE_URL: &str = "ARENA_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "ARENA_LLM_API_KEY";
pub const ENV_MODEL: &str = "ARENA_LLM_MODEL";

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> EndpointConfig {
        EndpointConfig {
            base_url: base_url.into(),
            api_key: None,
            model: model.into(),
            timeout: Duration::from_secs(60),
        }
    }

    /// Read the environment, letting explicit values win. `None` if no
    /// base URL is known.
    pub fn from_env(base_url: Option<String>, api_key: Option<String>, model: Option<String>) -> Option<EndpointConfig> {
        let base_url = base_url.or_else(|| std::env::var(ENV_BASE_URL).ok())?;
        let model = model
            .or_else(|| std::env::var(ENV_MODEL).ok())
            .unwrap_or_else(|| "default".to_string());
        let mut cfg = EndpointConfig::new(base_url, model);
        cfg.api_key = api_key.or_else(|| std::env::var(ENV_API_KEY).ok());
        Some(cfg)
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// Blocking HTTP client for the chat-completions wire format.
pub struct HttpChatClient {
    config: EndpointConfig,
    http: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Usage,
}

impl HttpChatClient {
    pub fn new(config: EndpointConfig) -> Result<HttpChatClient, TransportError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| TransportError::Connect(e.to_string()))?;
        Ok(HttpChatClient { config, http })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }
}

fn classify(e: reqwest::Error) -> TransportError {
    if e.is_timeout() {
        TransportError::Timeout
    } else if e.is_decode() {
        TransportError::Malformed(e.to_string())
    } else {
        TransportError::Connect(e.to_string())
    }
}

impl ChatClient for HttpChatClient {
    fn chat(&mut self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let body = serde_json::to_string(request).map_err(|e| TransportError::Malformed(e.to_string()))?;
        debug!("POST {} {}", self.config.url(), body);
        let mut req = self
            .http
            .post(self.config.url())
            .header("content-type", "application/json")
            .body(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(classify)?;
        let status = resp.status();
        let text = resp.text().map_err(classify)?;
        debug!("<- {} {}", status.as_u16(), text);
        if !status.is_success() {
            return Err(TransportError::Status {
                status: status.as_u16(),
                body: text.chars().take(500).collect(),
            });
        }
        let wire: WireResponse = serde_json::from_str(&text).map_err(|e| TransportError::Malformed(e.to_string()))?;
        let content = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError::Malformed("no choices in response".into()))?;
        Ok(ChatResponse {
            content,
            usage: wire.usage,
        })
    }
}

/// Stands in for a client that could not be constructed; every call fails
/// with the construction error.
pub struct Unavailable(pub TransportError);

impl ChatClient for Unavailable {
    fn chat(&mut self, _request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        Err(self.0.clone())
    }
}

/// A fresh HTTP client per call, for use as a policy connector.
pub fn http_connector(config: EndpointConfig) -> impl Fn() -> Box<dyn ChatClient> + Send + Sync {
    move || match HttpChatClient::new(config.clone()) {
        Ok(c) => Box::new(c) as Box<dyn ChatClient>,
        Err(e) => Box::new(Unavailable(e)),
    }
}
