use arena_core::domain::Observation;

use crate::{MemoryStore, ScaffoldConfig};

const ANSWER_FORMAT: &str = "Answer with the action only, exactly as written in the legal actions above.";

/// Build the prompt for one decision: persona, memory, current state, legal
/// actions and the answer format. When the text exceeds the character
/// budget, memories are dropped oldest first.
pub fn scaffold(obs: &Observation, memory: &MemoryStore, config: &ScaffoldConfig) -> String {
    let mut head = format!("{}\n\n", config.persona_preamble.trim());
    let mut tail = format!(
        "Current state:\n- game: {}\n- you are seat {}\n- round {} of {}\n- phase: {:?}\n- private: {}\n",
        obs.substrate.name(),
        obs.seat,
        obs.round + 1,
        obs.horizon,
        obs.phase_label,
        serde_json::to_string(&obs.private_state).unwrap_or_default(),
    );
    if !obs.public_events.is_empty() {
        tail.push_str("Just happened:\n");
        for e in &obs.public_events {
            tail.push_str(&format!("- {}\n", e.describe()));
        }
    }
    match &obs.grammar {
        Some(g) => tail.push_str(&format!("\nLegal actions: {}\n{ANSWER_FORMAT}\n", g.describe())),
        None => tail.push_str("\nNo action is required right now.\n"),
    }

    let lines: Vec<String> = memory.entries().map(|e| format!("- [round {}] {}\n", e.round + 1, e.text)).collect();
    let fixed = head.len() + tail.len() + "Memory:\n\n".len();
    let mut used = 0;
    let mut keep = 0;
    for line in lines.iter().rev() {
        if fixed + used + line.len() > config.char_budget {
            break;
        }
        used += line.len();
        keep += 1;
    }
    if keep > 0 {
        head.push_str("Memory:\n");
        for line in &lines[lines.len() - keep..] {
            head.push_str(line);
        }
        head.push('\n');
    }
    head + &tail
}
