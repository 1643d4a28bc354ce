//! Tournament harness for mixed-motive multi-agent games: substrates,
//! scripted populations, seeded tournament phases, ranking rules and
//! descriptive reports.

pub mod domain;
pub mod populations;
pub mod ranking;
pub mod reporting;
pub mod substrates;
pub mod tournament;
