//! Bounded verification of the protocol.
//!
//! [`enumerate`] explores every order in which buffered messages can be
//! processed, starting from the initial state, and certifies that all of
//! them end in agreement on a conflict-free allocation within a message
//! budget. Otherwise it returns the first failing execution in a fixed
//! branch order. [`simulate`] follows one seeded random order instead, for
//! instances too large to enumerate.
//!
//! The search is a depth-first walk over canonical state encodings. A state
//! met again on the current path is an oscillation. A state whose subtree
//! was already fully explored is not explored twice: its longest remaining
//! path and its number of complete paths are memoised, which is enough to
//! check the budget and to count interleavings exactly.

mod digest;
mod trace;

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use digest::{payload_digest, state_digest, state_key, StateDigest};
use trace::Recorder;
pub use trace::{Trace, TraceCause, TraceEvent};

use crate::netmodel::{diameter, AgentId, Diameter};
use crate::protocol::{
    conflict_free, consensus_reached, initial_state, step, BidMessage, NetState, ProtocolError,
};
use crate::scenario::Scenario;

/// Explored-state ceiling used when none is configured.
pub const DEFAULT_STATE_CEILING: u64 = 2_000_000;

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("physical network is disconnected; the message bound is undefined")]
    Disconnected,
    #[error("state ceiling of {0} explored states reached")]
    StateCeiling(u64),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Message budget from information propagation: the network diameter times
/// the number of items.
pub fn default_bound(scenario: &Scenario) -> Result<u64, ExploreError> {
    match diameter(&scenario.physical) {
        Diameter::Finite(d) => Ok(d * scenario.items().len() as u64),
        Diameter::Disconnected => Err(ExploreError::Disconnected),
    }
}

/// Extra budget on top of [`default_bound`]. Every processed message is one
/// copy of a broadcast, and an agent broadcasts after its first bids and
/// then once per change of its view, so the slack makes
/// `bound + slack = directed_links * (1 + agents * items)`.
pub fn default_slack(scenario: &Scenario) -> Result<u64, ExploreError> {
    let bound = default_bound(scenario)?;
    let links = scenario.physical.directed_links();
    let changes = (scenario.agents().len() * scenario.items().len()) as u64;
    Ok((links * (1 + changes)).saturating_sub(bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    AllConverge,
    Counterexample,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Complete interleavings covered (saturating).
    pub paths_explored: u64,
    pub states_explored: u64,
    /// Longest execution seen, in processed messages.
    pub max_depth_seen: u64,
    pub bound: u64,
    pub slack: u64,
    pub witness: Option<Trace>,
}

impl Verdict {
    pub fn converged(&self) -> bool {
        self.kind == VerdictKind::AllConverge
    }
}

/// Limits for one exhaustive run.
#[derive(Debug, Clone, Copy)]
pub struct ExploreConfig {
    pub bound: u64,
    pub slack: u64,
    pub state_ceiling: u64,
    /// Postpone idle deliveries (see [`successors`]). The verdict and the
    /// longest execution are unchanged; `paths_explored` then counts the
    /// reduced interleavings only.
    pub skip_idle: bool,
}

impl ExploreConfig {
    /// Budget from the scenario's overrides, falling back to the defaults.
    pub fn for_scenario(scenario: &Scenario) -> Result<ExploreConfig, ExploreError> {
        let bound = match scenario.bound_override {
            Some(b) => b,
            None => default_bound(scenario)?,
        };
        let slack = match scenario.slack {
            Some(s) => s,
            None => default_slack(scenario)?,
        };
        Ok(ExploreConfig { bound, slack, state_ceiling: DEFAULT_STATE_CEILING, skip_idle: false })
    }

    pub fn budget(&self) -> u64 {
        self.bound + self.slack
    }
}

/// Buffered messages in branch order, duplicates collapsed: they lead to
/// the same successor.
pub fn branch_order(state: &NetState) -> Vec<&BidMessage> {
    branch_indices(state).into_iter().map(|i| &state.buffer[i]).collect()
}

/// Buffer positions of [`branch_order`].
fn branch_indices(state: &NetState) -> Vec<usize> {
    let buffer = &state.buffer;
    let mut idx: Vec<usize> = (0..buffer.len()).collect();
    let link = |i: usize| (buffer[i].sender, buffer[i].receiver);
    idx.sort_by_key(|&i| link(i));
    let mut out = Vec::with_capacity(idx.len());
    for group in idx.chunk_by(|&a, &b| link(a) == link(b)) {
        if let [only] = group {
            out.push(*only);
            continue;
        }
        let mut keyed: Vec<_> = group.iter().map(|&i| (payload_digest(&buffer[i]), i)).collect();
        keyed.sort_unstable();
        keyed.dedup_by(|a, b| a.0 == b.0);
        out.extend(keyed.into_iter().map(|(_, i)| i));
    }
    out
}

/// Terminal states: nothing left to deliver.
pub fn accepting(state: &NetState) -> bool {
    state.buffer.is_empty() && consensus_reached(state) && conflict_free(state) == Ok(true)
}

#[derive(Clone, Copy)]
struct Done {
    longest: u64,
    paths: u64,
}

/// Successor states in branch order, each with the message delivered.
///
/// With `skip_idle`, deliveries that change nothing (the receiver's view
/// stays as it is and nothing is sent) are postponed for every receiver that
/// has no other kind of message waiting. Such a receiver cannot change until
/// a busy agent sends it something, and deliveries to different receivers
/// commute, so every terminal state and every execution length stays
/// reachable, and so does every cycle. When all deliveries are idle, any
/// order ends in the same state and one is enough.
pub fn successors(
    state: &NetState,
    scenario: &Scenario,
    skip_idle: bool,
) -> Result<Vec<(BidMessage, NetState)>, ExploreError> {
    let mut out = Vec::new();
    for i in branch_indices(state) {
        let msg = &state.buffer[i];
        out.push((msg.clone(), step(state, msg, scenario)?));
    }
    if skip_idle {
        let idle = |(msg, next): &(BidMessage, NetState)| {
            next.buffer.len() + 1 == state.buffer.len()
                && next.views[&msg.receiver] == state.views[&msg.receiver]
        };
        let busy: BTreeSet<AgentId> = out.iter().filter(|c| !idle(c)).map(|(m, _)| m.receiver).collect();
        if busy.is_empty() {
            out.truncate(1);
        } else {
            out.retain(|(m, _)| busy.contains(&m.receiver));
        }
    }
    Ok(out)
}

struct Frame {
    key: Vec<u8>,
    children: std::vec::IntoIter<(BidMessage, NetState)>,
    taken: Option<BidMessage>,
    longest: u64,
    paths: u64,
}

impl Frame {
    fn new(
        state: &NetState,
        key: Vec<u8>,
        taken: Option<BidMessage>,
        scenario: &Scenario,
        cfg: &ExploreConfig,
    ) -> Result<Frame, ExploreError> {
        let children = successors(state, scenario, cfg.skip_idle)?.into_iter();
        Ok(Frame { key, children, taken, longest: 0, paths: 0 })
    }
}

fn witness(
    scenario: &Scenario,
    choices: Vec<BidMessage>,
    cause: TraceCause,
    cycle_start: Option<usize>,
) -> Result<Trace, ExploreError> {
    let mut rec = Recorder::start(scenario);
    for msg in &choices {
        rec.advance(msg, scenario)?;
    }
    rec.trace.cause = Some(cause);
    rec.trace.cycle_start = cycle_start;
    Ok(rec.trace)
}

/// Exhaustive check with the default state ceiling.
pub fn enumerate(scenario: &Scenario, bound: u64, slack: u64) -> Result<Verdict, ExploreError> {
    enumerate_with(
        scenario,
        &ExploreConfig { bound, slack, state_ceiling: DEFAULT_STATE_CEILING, skip_idle: false },
    )
}

/// Explores every interleaving of message deliveries from the initial state.
///
/// A path accepts when its buffer empties in an agreed, conflict-free state.
/// It is a counterexample when a state repeats along it, when it grows past
/// `bound + slack` messages, or when the buffer empties without agreement.
pub fn enumerate_with(scenario: &Scenario, cfg: &ExploreConfig) -> Result<Verdict, ExploreError> {
    let budget = cfg.budget();
    let root = initial_state(scenario);
    let mut verdict = Verdict {
        kind: VerdictKind::AllConverge,
        paths_explored: 0,
        states_explored: 1,
        max_depth_seen: 0,
        bound: cfg.bound,
        slack: cfg.slack,
        witness: None,
    };
    if root.buffer.is_empty() {
        verdict.paths_explored = 1;
        if !accepting(&root) {
            verdict.kind = VerdictKind::Counterexample;
            verdict.witness = Some(witness(scenario, vec![], TraceCause::NoConsensus, None)?);
        }
        return Ok(verdict);
    }

    let root_key = state_key(&root);
    let mut memo: HashMap<Vec<u8>, Done> = HashMap::new();
    let mut on_path: HashMap<Vec<u8>, usize> = HashMap::from([(root_key.clone(), 0)]);
    let mut stack = vec![Frame::new(&root, root_key, None, scenario, cfg)?];

    let fail = |stack: &[Frame], last: BidMessage, extra: Vec<BidMessage>, cause, start, v: &mut Verdict| {
        let mut path: Vec<BidMessage> = stack.iter().filter_map(|f| f.taken.clone()).collect();
        path.push(last);
        path.extend(extra);
        v.kind = VerdictKind::Counterexample;
        v.max_depth_seen = v.max_depth_seen.max(path.len() as u64);
        v.witness = Some(witness(scenario, path, cause, start)?);
        Ok::<(), ExploreError>(())
    };

    while let Some(top) = stack.last_mut() {
        let Some((msg, child)) = top.children.next() else {
            let done = stack.pop().expect("non-empty");
            on_path.remove(&done.key);
            memo.insert(done.key, Done { longest: done.longest, paths: done.paths });
            if let Some(parent) = stack.last_mut() {
                parent.longest = parent.longest.max(done.longest + 1);
                parent.paths = parent.paths.saturating_add(done.paths);
            } else {
                verdict.paths_explored = done.paths;
                verdict.max_depth_seen = done.longest;
            }
            continue;
        };
        let depth = stack.len() as u64;
        verdict.max_depth_seen = verdict.max_depth_seen.max(depth);
        let cd = state_key(&child);

        if let Some(&start) = on_path.get(&cd) {
            fail(&stack, msg, vec![], TraceCause::Cycle, Some(start), &mut verdict)?;
            return Ok(verdict);
        }
        if let Some(done) = memo.get(&cd).copied() {
            if depth + done.longest > budget {
                let tail = longest_continuation(scenario, &child, &memo)?;
                fail(&stack, msg, tail, TraceCause::BoundExceeded, None, &mut verdict)?;
                return Ok(verdict);
            }
            let top = stack.last_mut().expect("non-empty");
            top.longest = top.longest.max(done.longest + 1);
            top.paths = top.paths.saturating_add(done.paths);
            continue;
        }
        if depth > budget {
            fail(&stack, msg, vec![], TraceCause::BoundExceeded, None, &mut verdict)?;
            return Ok(verdict);
        }
        if child.buffer.is_empty() {
            if !accepting(&child) {
                fail(&stack, msg, vec![], TraceCause::NoConsensus, None, &mut verdict)?;
                return Ok(verdict);
            }
            memo.insert(cd, Done { longest: 0, paths: 1 });
            let top = stack.last_mut().expect("non-empty");
            top.longest = top.longest.max(1);
            top.paths = top.paths.saturating_add(1);
            continue;
        }
        verdict.states_explored += 1;
        if verdict.states_explored > cfg.state_ceiling {
            return Err(ExploreError::StateCeiling(cfg.state_ceiling));
        }
        on_path.insert(cd.clone(), stack.len());
        stack.push(Frame::new(&child, cd, Some(msg), scenario, cfg)?);
    }
    Ok(verdict)
}

/// Follows the longest memoised path from a fully explored state.
fn longest_continuation(
    scenario: &Scenario,
    from: &NetState,
    memo: &HashMap<Vec<u8>, Done>,
) -> Result<Vec<BidMessage>, ExploreError> {
    let mut out = Vec::new();
    let mut state = from.clone();
    while !state.buffer.is_empty() {
        let want = memo[&state_key(&state)].longest;
        let mut advanced = false;
        for msg in branch_order(&state) {
            let next = step(&state, msg, scenario)?;
            if memo.get(&state_key(&next)).map(|d| d.longest + 1) == Some(want) {
                out.push(msg.clone());
                state = next;
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    Ok(out)
}

/// One execution that always delivers the first message in branch order.
/// On a converging scenario it ends in an agreed state.
pub fn representative_run(scenario: &Scenario, max_steps: u64) -> Result<(Trace, NetState), ExploreError> {
    let mut rec = Recorder::start(scenario);
    while let Some(msg) = branch_order(&rec.state).first().map(|&m| m.clone()) {
        if rec.trace.len() as u64 >= max_steps {
            break;
        }
        rec.advance(&msg, scenario)?;
    }
    Ok((rec.trace, rec.state))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    /// Agreement after `tau` processed messages.
    Converged {
        tau: u64,
    },
    Cycle {
        start: usize,
    },
    BoundExceeded,
    NoConsensus,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: Trace,
    pub outcome: Outcome,
    pub final_state: NetState,
}

/// One pseudo-random interleaving: at each step a buffered message is picked
/// uniformly with a generator seeded by `seed`, so runs are reproducible.
pub fn simulate(scenario: &Scenario, seed: u64, max_steps: u64) -> Result<Simulation, ExploreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::start(scenario);
    let mut seen: HashMap<StateDigest, usize> = HashMap::from([(state_digest(&rec.state), 0)]);
    let outcome = loop {
        if rec.state.buffer.is_empty() {
            break if accepting(&rec.state) {
                Outcome::Converged { tau: rec.trace.len() as u64 }
            } else {
                Outcome::NoConsensus
            };
        }
        if rec.trace.len() as u64 >= max_steps {
            break Outcome::BoundExceeded;
        }
        let pick = rng.gen_range(0..rec.state.buffer.len());
        let msg = rec.state.buffer[pick].clone();
        rec.advance(&msg, scenario)?;
        let d = state_digest(&rec.state);
        if let Some(&start) = seen.get(&d) {
            break Outcome::Cycle { start };
        }
        seen.insert(d, rec.trace.len());
    };
    rec.trace.cause = match outcome {
        Outcome::Converged { .. } => None,
        Outcome::Cycle { start } => {
            rec.trace.cycle_start = Some(start);
            Some(TraceCause::Cycle)
        }
        Outcome::BoundExceeded => Some(TraceCause::BoundExceeded),
        Outcome::NoConsensus => Some(TraceCause::NoConsensus),
    };
    Ok(Simulation { trace: rec.trace, outcome, final_state: rec.state })
}
