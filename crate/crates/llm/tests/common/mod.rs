#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use arena_core::domain::{Mode, Observation, Phase, ScenarioSpec};
use arena_core::populations::BackgroundStrategyId as S;
use arena_core::substrates::{self, SubstrateId};
use arena_llm::{ChatClient, ChatRequest, ChatResponse, TransportError, Usage};

pub fn spec(sub: SubstrateId) -> ScenarioSpec {
    ScenarioSpec::new(format!("{}-llm", sub.name()), sub, Mode::Resident, S::GrimTrigger, Phase::Development)
}

pub fn first_observation(sub: SubstrateId) -> Observation {
    let state = substrates::initial_state(&spec(sub), 11).unwrap();
    substrates::observe(&state, 0)
}

/// Replays canned replies and counts calls; `None` is a transport error.
pub struct Scripted {
    pub replies: VecDeque<Option<String>>,
    pub last: Option<String>,
    pub calls: Arc<AtomicU32>,
}

impl Scripted {
    pub fn new(replies: &[Option<&str>]) -> Scripted {
        Scripted {
            replies: replies.iter().map(|r| r.map(str::to_string)).collect(),
            last: replies.last().and_then(|r| r.map(str::to_string)),
            calls: Arc::new(AtomicU32::new(0)),
        }
    }

    pub fn failing() -> Scripted {
        Scripted::new(&[None])
    }
}

impl ChatClient for Scripted {
    fn chat(&mut self, _request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let reply = match self.replies.pop_front() {
            Some(r) => r,
            None => self.last.clone(),
        };
        reply
            .map(|content| ChatResponse {
                content,
                usage: Usage {
                    prompt_tokens: 5,
                    completion_tokens: 1,
                },
            })
            .ok_or(TransportError::Connect("scripted failure".into()))
    }
}
