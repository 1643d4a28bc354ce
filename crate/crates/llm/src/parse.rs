use arena_core::domain::{ActionAttempt, Payload};
use arena_core::substrates::{ActionGrammar, GrammarForm};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no legal action found in reply: {excerpt:?}")]
pub struct ParseFailure {
    pub excerpt: String,
}

fn failure(text: &str) -> ParseFailure {
    ParseFailure {
        excerpt: text.chars().take(120).collect(),
    }
}

/// Lower-cased words, keeping the characters that appear in tokens and
/// numbers, with sentence punctuation trimmed.
fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || matches!(c, '.' | ':' | '-' | '_')))
        .map(|w| w.trim_matches(|c: char| matches!(c, '.' | ':' | '-' | '_')))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Common spellings of the matrix-game moves.
fn synonym(word: &str) -> Option<&'static str> {
    match word {
        "cooperate" | "cooperates" | "cooperation" | "cooperative" | "cooperating" => Some("C"),
        "defect" | "defects" | "defection" | "defecting" => Some("D"),
        _ => None,
    }
}

fn match_option(word: &str, options: &[String]) -> Option<String> {
    if let Some(o) = options.iter().find(|o| o.to_lowercase() == word) {
        return Some(o.clone());
    }
    let s = synonym(word)?;
    options.iter().find(|o| o.as_str() == s).cloned()
}

fn attempt(grammar: &ActionGrammar, payload: Payload) -> ActionAttempt {
    ActionAttempt {
        kind: grammar.kind,
        payload,
    }
}

/// The first thing in `text` that the grammar accepts.
pub fn parse_action(text: &str, grammar: &ActionGrammar) -> Result<ActionAttempt, ParseFailure> {
    let ws = words(text);
    let found = match &grammar.form {
        GrammarForm::Tokens { options } => ws
            .iter()
            .find_map(|w| match_option(w, options))
            .map(|t| attempt(grammar, Payload::Token(t))),
        GrammarForm::PerOpponent { options, opponents } => {
            let moves: Vec<String> = ws.iter().filter_map(|w| match_option(w, options)).collect();
            if moves.len() >= opponents.len() && opponents.len() > 1 {
                Some(attempt(grammar, Payload::Tokens(moves[..opponents.len()].to_vec())))
            } else {
                moves.first().map(|m| attempt(grammar, Payload::Token(m.clone())))
            }
        }
        GrammarForm::PubMessage { venues, pubs } => {
            let venue = ws.iter().position(|w| match_option(w, venues).is_some());
            venue.map(|at| {
                let declared = match_option(&ws[at], venues).expect("matched above");
                let mut reports: Vec<String> = Vec::new();
                for w in &ws[at + 1..] {
                    if let Some(p) = w.strip_prefix("closed:").and_then(|p| match_option(p, pubs)) {
                        let token = format!("closed:{p}");
                        if !reports.contains(&token) {
                            reports.push(token);
                        }
                    }
                }
                if reports.is_empty() {
                    attempt(grammar, Payload::Token(declared))
                } else {
                    let mut tokens = vec![declared];
                    tokens.extend(reports);
                    attempt(grammar, Payload::Tokens(tokens))
                }
            })
        }
        GrammarForm::NumberOrToken { tokens, .. } => ws.iter().find_map(|w| {
            if let Some(t) = match_option(w, tokens) {
                return Some(attempt(grammar, Payload::Token(t)));
            }
            let x: f64 = w.parse().ok()?;
            let a = attempt(grammar, Payload::Number(x));
            grammar.admits(&a).is_ok().then_some(a)
        }),
    };
    match found {
        Some(a) if grammar.admits(&a).is_ok() => Ok(a),
        _ => Err(failure(text)),
    }
}
