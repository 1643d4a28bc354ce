use std::collections::VecDeque;

use arena_core::domain::Observation;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub round: u32,
    pub text: String,
}

/// Recent events as seen by one seat, oldest first. Holds at most
/// `window` entries and evicts the oldest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryStore {
    window: usize,
    entries: VecDeque<MemoryEntry>,
}

impl MemoryStore {
    pub fn new(window: usize) -> MemoryStore {
        MemoryStore {
            window: window.max(1),
            entries: VecDeque::new(),
        }
    }

    pub fn push(&mut self, round: u32, text: impl Into<String>) {
        self.entries.push_back(MemoryEntry {
            round,
            text: text.into(),
        });
        while self.entries.len() > self.window {
            self.entries.pop_front();
        }
    }

    /// Remember every event in the observation.
    pub fn record(&mut self, obs: &Observation) {
        for e in &obs.public_events {
            self.push(e.round, e.describe());
        }
    }

    pub fn entries(&self) -> impl DoubleEndedIterator<Item = &MemoryEntry> + ExactSizeIterator {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}
