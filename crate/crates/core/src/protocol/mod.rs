//! Execution of the interactive scheme: initial coded round, consistent
//! subsets, matches, commit rounds and the elimination tournament.

mod engine;
mod transcript;

pub use engine::{
    consistent_subsets, decode, run_scheme, ConsistentSubset, DrawPolicy, Engine, GroupOutcome,
    MatchOutcome, Oracle, OracleError, ProtocolConfig, ProtocolError, RunOutput,
};
pub use transcript::{
    Direction, EliminationEvent, EliminationReason, MatchRecord, MatchResolution, MessageRecord,
    Metrics, OracleRecord, Transcript,
};
