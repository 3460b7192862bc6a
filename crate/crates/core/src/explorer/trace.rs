//! Execution traces and their JSONL form.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use super::digest::state_digest;
use crate::netmodel::{AgentId, ItemId};
use crate::protocol::{initial_state_traced, step_traced, BidMessage, GeneratedBid, NetState, ProtocolError};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceCause {
    /// A state repeated: the protocol can oscillate forever.
    Cycle,
    /// The message budget ran out before agreement.
    BoundExceeded,
    /// Every message was processed but the views still disagree (or the
    /// agreed view conflicts with a bundle).
    NoConsensus,
}

/// One line of a trace: the state after `step` processed messages. Line 0 is
/// the initial state and has no sender or receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: u64,
    pub sender: Option<AgentId>,
    pub receiver: Option<AgentId>,
    pub digest: String,
    /// item -> agent -> (believed winner, bid)
    pub bids: BTreeMap<ItemId, BTreeMap<AgentId, (Option<AgentId>, u64)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub cause: Option<TraceCause>,
    /// Index into `events` of the state the final state repeats.
    pub cycle_start: Option<usize>,
    #[serde(skip)]
    pub choices: Vec<BidMessage>,
    /// Every bid generated along the run, in order.
    #[serde(skip)]
    pub bid_log: Vec<GeneratedBid>,
}

fn snapshot(state: &NetState) -> BTreeMap<ItemId, BTreeMap<AgentId, (Option<AgentId>, u64)>> {
    let mut out: BTreeMap<ItemId, BTreeMap<AgentId, (Option<AgentId>, u64)>> = BTreeMap::new();
    for (&agent, view) in &state.views {
        for (&item, e) in &view.entries {
            out.entry(item).or_default().insert(agent, (e.winner, e.bid));
        }
    }
    out
}

fn event(state: &NetState, msg: Option<&BidMessage>) -> TraceEvent {
    TraceEvent {
        step: state.step,
        sender: msg.map(|m| m.sender),
        receiver: msg.map(|m| m.receiver),
        digest: state_digest(state).to_string(),
        bids: snapshot(state),
    }
}

/// Incrementally records a run.
pub(crate) struct Recorder {
    pub trace: Trace,
    pub state: NetState,
}

impl Recorder {
    pub fn start(scenario: &Scenario) -> Recorder {
        let (state, bid_log) = initial_state_traced(scenario);
        let trace = Trace {
            events: vec![event(&state, None)],
            cause: None,
            cycle_start: None,
            choices: Vec::new(),
            bid_log,
        };
        Recorder { trace, state }
    }

    pub fn advance(&mut self, msg: &BidMessage, scenario: &Scenario) -> Result<(), ProtocolError> {
        let (next, bids) = step_traced(&self.state, msg, scenario)?;
        self.trace.events.push(event(&next, Some(msg)));
        self.trace.choices.push(msg.clone());
        self.trace.bid_log.extend(bids);
        self.state = next;
        Ok(())
    }
}

impl Trace {
    /// Re-executes the recorded choices from the initial state, returning
    /// the rebuilt trace and final state.
    pub fn replay(&self, scenario: &Scenario) -> Result<(Trace, NetState), ProtocolError> {
        let mut rec = Recorder::start(scenario);
        for msg in &self.choices {
            rec.advance(msg, scenario)?;
        }
        rec.trace.cause = self.cause;
        rec.trace.cycle_start = self.cycle_start;
        Ok((rec.trace, rec.state))
    }

    /// Number of processed messages.
    pub fn len(&self) -> usize {
        self.events.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}
