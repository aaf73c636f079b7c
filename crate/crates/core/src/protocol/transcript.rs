//! Message log, oracle log and cost accounting of one protocol run.

use std::io::{self, Write};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::message::{Message, MessageKind};
use crate::{Rational, Residue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    WorkerToMain,
}

/// One worker response. `symbols` and `bits` are the slot the query asked
/// for, which is what gets charged even when the worker sent garbage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub t: usize,
    pub group: usize,
    pub worker: usize,
    pub direction: Direction,
    pub kind: MessageKind,
    pub symbols: u64,
    pub bits: u64,
    #[serde(skip)]
    pub payload: Option<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub t: usize,
    pub index: usize,
    pub coord: usize,
    #[serde(skip)]
    pub group: usize,
    #[serde(skip)]
    pub value: Residue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EliminationReason {
    /// Sent a response of the wrong shape.
    Malformed,
    /// Left in a consistent subset of fewer than `u` workers.
    Unsupported,
    /// Lost to a subset of more than `s` workers.
    Outvoted,
    /// Committed in a set smaller than `u`.
    CommitShortfall,
    /// Committed to a leaf value the oracle refuted.
    LocalComputation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationEvent {
    pub t: usize,
    pub group: usize,
    pub worker: usize,
    pub reason: EliminationReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchResolution {
    LocalComputation,
    CommitShortfall,
    Malformed,
    /// The oracle budget ran out before the leaf could be settled.
    Unsettled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub group: usize,
    /// Round of the first label query.
    pub start: usize,
    pub rounds: usize,
    pub reps: (usize, usize),
    pub coord: usize,
    /// Global gradient index of the leaf, if one was reached.
    pub leaf: Option<usize>,
    pub values: Option<(Residue, Residue)>,
    pub resolution: MatchResolution,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub messages: Vec<MessageRecord>,
    pub oracle: Vec<OracleRecord>,
    pub eliminations: Vec<EliminationEvent>,
    pub matches: Vec<MatchRecord>,
    pub rounds: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Line<'a> {
    Message(&'a MessageRecord),
    Oracle(&'a OracleRecord),
}

impl Transcript {
    /// Symbols sent in rounds `t >= 1`.
    pub fn overhead_symbols(&self) -> u64 {
        self.messages
            .iter()
            .filter(|m| m.t >= 1)
            .map(|m| m.symbols)
            .sum()
    }

    pub fn overhead_bits(&self) -> u64 {
        self.messages
            .iter()
            .filter(|m| m.t >= 1)
            .map(|m| m.bits)
            .sum()
    }

    pub fn initial_symbols(&self) -> u64 {
        self.messages
            .iter()
            .filter(|m| m.t == 0)
            .map(|m| m.symbols)
            .sum()
    }

    /// κ recomputed from the message log.
    pub fn kappa<F: Float>(&self, q: u64) -> F {
        kappa_of(self.overhead_symbols(), self.overhead_bits(), q)
    }

    /// The set `𝕀` of locally computed gradient indices, in call order.
    pub fn computed_indices(&self) -> Vec<usize> {
        self.oracle.iter().map(|o| o.index).collect()
    }

    pub fn eliminated(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.eliminations.iter().map(|e| e.worker).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Writes one JSON object per message and per oracle call, ordered by
    /// round, then group, then emission order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut lines: Vec<(usize, usize, usize, Line<'_>)> = Vec::new();
        for (i, m) in self.messages.iter().enumerate() {
            lines.push((m.t, m.group, i, Line::Message(m)));
        }
        let offset = self.messages.len();
        for (i, o) in self.oracle.iter().enumerate() {
            lines.push((o.t, o.group, offset + i, Line::Oracle(o)));
        }
        lines.sort_by_key(|&(t, group, seq, _)| (t, group, seq));
        for (_, _, _, line) in lines {
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// Everything the decoder sees: every response with its payload, and the
    /// oracle's answers. Two runs the decoder cannot tell apart produce equal bytes.
    pub fn decoder_view(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct View<'a> {
            messages: Vec<(usize, usize, usize, MessageKind, &'a Option<Message>)>,
            oracle: Vec<(usize, usize, usize, Residue)>,
        }
        let view = View {
            messages: self
                .messages
                .iter()
                .map(|m| (m.t, m.group, m.worker, m.kind, &m.payload))
                .collect(),
            oracle: self
                .oracle
                .iter()
                .map(|o| (o.t, o.index, o.coord, o.value))
                .collect(),
        };
        serde_json::to_vec(&view).expect("view serializes")
    }
}

pub(crate) fn kappa_of<F: Float>(symbols: u64, bits: u64, q: u64) -> F {
    let cast = |x: u64| F::from(x).expect("fits a float");
    cast(symbols) + cast(bits) / cast(q).log2()
}

/// The cost tuple of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// `T`: match rounds of the slowest group.
    pub rounds: usize,
    /// `c`: distinct gradients computed locally.
    pub local_computations: usize,
    pub replication: Rational,
    pub overhead_symbols: u64,
    pub overhead_bits: u64,
    /// The `t = 0` responses, `n d` symbols.
    pub initial_symbols: u64,
    pub q: u64,
}

impl Metrics {
    pub fn from_transcript(transcript: &Transcript, replication: Rational, q: u64) -> Self {
        let mut indices = transcript.computed_indices();
        indices.sort_unstable();
        indices.dedup();
        Self {
            rounds: transcript.rounds,
            local_computations: indices.len(),
            replication,
            overhead_symbols: transcript.overhead_symbols(),
            overhead_bits: transcript.overhead_bits(),
            initial_symbols: transcript.initial_symbols(),
            q,
        }
    }

    /// `κ` in alphabet symbols; a commit bit counts `1 / log2 q`.
    pub fn kappa<F: Float>(&self) -> F {
        kappa_of(self.overhead_symbols, self.overhead_bits, self.q)
    }

    pub fn total_comm<F: Float>(&self) -> F {
        F::from(self.initial_symbols).expect("fits a float") + self.kappa::<F>()
    }
}
