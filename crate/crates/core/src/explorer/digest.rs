//! Canonical state digests.
//!
//! Two states get the same digest when they behave identically from here on.
//! The step counter and view clocks are left out, and each agent's stamps
//! (including the send clocks of its messages) are replaced by their rank
//! among that agent's values still present in the state. The protocol only
//! compares values of the same agent and only mints stamps larger than all
//! earlier ones, so the relabelling preserves every decision. Without it
//! clocks grow forever and no oscillation could ever be seen as a repeated
//! state.

use std::fmt;

use sha2::{Digest as _, Sha256};

use crate::netmodel::AgentId;
use crate::protocol::{BidMessage, ItemEntry, NetState};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateDigest(pub [u8; 32]);

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateDigest({})", &hex::encode(self.0)[..12])
    }
}

/// Stamp values per agent, sorted, for rank lookups.
struct StampRanks {
    seen: Vec<(AgentId, u64)>,
    /// Index in `seen` of each agent's smallest stamp.
    starts: Vec<(AgentId, usize)>,
}

impl StampRanks {
    fn of(state: &NetState) -> StampRanks {
        let entries = state.views.len() * state.views.values().next().map_or(0, |v| v.entries.len());
        let mut seen = Vec::with_capacity(entries + 3 * state.buffer.len());
        let mut note = |e: &ItemEntry| {
            if let Some(w) = e.winner {
                seen.push((w, e.stamp));
            }
        };
        for view in state.views.values() {
            view.entries.values().for_each(&mut note);
        }
        for msg in &state.buffer {
            msg.payload.values().for_each(&mut note);
        }
        seen.extend(state.buffer.iter().map(|m| (m.sender, m.clock)));
        seen.sort_unstable();
        seen.dedup();
        let mut starts: Vec<(AgentId, usize)> = Vec::new();
        for (i, &(agent, _)) in seen.iter().enumerate() {
            if starts.last().is_none_or(|&(a, _)| a != agent) {
                starts.push((agent, i));
            }
        }
        StampRanks { seen, starts }
    }

    /// 1-based position of `stamp` among `agent`'s stamps.
    fn rank(&self, agent: AgentId, stamp: u64) -> u64 {
        let first = self.starts.iter().find(|&&(a, _)| a == agent).expect("agent has stamps").1;
        let at = self.seen[first..].iter().position(|&s| s == (agent, stamp)).expect("stamp was collected");
        at as u64 + 1
    }

    fn write_entry(&self, out: &mut Vec<u8>, e: &ItemEntry) {
        match e.winner {
            Some(w) => {
                out.push(1);
                put_id(out, w.0);
                put(out, e.bid);
                put(out, self.rank(w, e.stamp));
            }
            None => {
                out.push(0);
                put(out, e.bid);
            }
        }
    }
}

/// LEB128: small values take one byte and the encoding is self-delimiting.
fn put(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push(v as u8 | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn put_id(out: &mut Vec<u8>, id: i64) {
    put(out, ((id << 1) ^ (id >> 63)) as u64);
}

fn write_message(out: &mut Vec<u8>, ranks: &StampRanks, msg: &BidMessage) {
    put_id(out, msg.sender.0);
    put_id(out, msg.receiver.0);
    put(out, ranks.rank(msg.sender, msg.clock));
    put(out, msg.payload.len() as u64);
    for (item, e) in &msg.payload {
        put_id(out, item.0);
        ranks.write_entry(out, e);
    }
}

/// Canonical encoding of the behaviour-relevant part of a state: views by
/// agent, entries by item, bundles, lost items, and the buffer as a sorted
/// multiset. Equal encodings mean equivalent states.
pub fn state_key(state: &NetState) -> Vec<u8> {
    let ranks = StampRanks::of(state);
    let mut out = Vec::with_capacity(64 + 16 * state.buffer.len());
    for view in state.views.values() {
        put_id(&mut out, view.agent.0);
        put(&mut out, view.entries.len() as u64);
        for (item, e) in &view.entries {
            put_id(&mut out, item.0);
            ranks.write_entry(&mut out, e);
        }
        put(&mut out, view.bundle.len() as u64);
        for item in &view.bundle {
            put_id(&mut out, item.0);
        }
        put(&mut out, view.lost.len() as u64);
        for (item, &bid) in &view.lost {
            put_id(&mut out, item.0);
            put(&mut out, bid);
        }
    }
    let mut scratch = Vec::with_capacity(16 * state.buffer.len());
    let mut spans = Vec::with_capacity(state.buffer.len());
    for msg in &state.buffer {
        let from = scratch.len();
        write_message(&mut scratch, &ranks, msg);
        spans.push(from..scratch.len());
    }
    spans.sort_unstable_by(|a, b| scratch[a.clone()].cmp(&scratch[b.clone()]));
    put(&mut out, spans.len() as u64);
    for span in spans {
        out.extend_from_slice(&scratch[span]);
    }
    out
}

/// SHA-256 of [`state_key`].
pub fn state_digest(state: &NetState) -> StateDigest {
    StateDigest(Sha256::digest(state_key(state)).into())
}

/// Digest of a message payload, used to order branches deterministically.
pub fn payload_digest(msg: &BidMessage) -> [u8; 32] {
    let mut out = Vec::with_capacity(8 + 32 * msg.payload.len());
    out.extend(msg.clock.to_le_bytes());
    for (item, e) in &msg.payload {
        out.extend(item.0.to_le_bytes());
        out.extend(e.winner.map_or(-1, |w| w.0).to_le_bytes());
        out.extend(e.bid.to_le_bytes());
        out.extend(e.stamp.to_le_bytes());
    }
    Sha256::digest(&out).into()
}
