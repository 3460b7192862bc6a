//! The max-consensus auction state machine.
//!
//! Every agent keeps a view of the auction: for each item the believed
//! winner, the winning bid and the stamp of that bid (the `a`, `b` and `t`
//! vectors), plus its own ordered bundle `m`. Agents bid greedily, then
//! exchange full views with their neighbours; each received view is folded
//! item by item through [`resolve_entry`]. A global state holds all views and
//! an unordered buffer of in-flight messages, and [`step`] processes exactly
//! one buffered message.
//!
//! Stamps come from a per-agent logical clock, so two stamps are only ever
//! compared when they belong to the same winner.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{AgentId, ItemId};
use crate::policies::{AgentPolicy, UtilitySpec};
use crate::scenario::Scenario;

/// One item's slot in a view or message.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemEntry {
    pub winner: Option<AgentId>,
    pub bid: u64,
    pub stamp: u64,
}

impl ItemEntry {
    pub const NULL: ItemEntry = ItemEntry { winner: None, bid: 0, stamp: 0 };
}

/// What an agent believes about the auction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentView {
    pub agent: AgentId,
    pub entries: BTreeMap<ItemId, ItemEntry>,
    /// Items currently won, in the order they were bid on.
    pub bundle: Vec<ItemId>,
    /// Items this agent was outbid on, with the bid that beat it. An item
    /// leaves the set when the claim that beat it is withdrawn, i.e. the
    /// known bid drops below the recorded one.
    pub lost: BTreeMap<ItemId, u64>,
    pub clock: u64,
}

impl AgentView {
    pub fn empty(agent: AgentId, items: &[ItemId]) -> AgentView {
        AgentView {
            agent,
            entries: items.iter().map(|&i| (i, ItemEntry::NULL)).collect(),
            bundle: Vec::new(),
            lost: BTreeMap::new(),
            clock: 0,
        }
    }

    pub fn entry(&self, item: ItemId) -> ItemEntry {
        self.entries.get(&item).copied().unwrap_or_default()
    }

    /// Sum of this agent's own winning bids.
    pub fn committed(&self) -> u64 {
        self.bundle.iter().map(|&i| self.entry(i).bid).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BidMessage {
    pub sender: AgentId,
    pub receiver: AgentId,
    /// Sender's clock when the message was sent.
    pub clock: u64,
    pub payload: BTreeMap<ItemId, ItemEntry>,
}

/// Global protocol state. `buffer` is a multiset kept in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetState {
    pub views: BTreeMap<AgentId, AgentView>,
    pub buffer: Vec<BidMessage>,
    pub step: u64,
}

/// A bid freshly generated by an agent during bidding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeneratedBid {
    pub agent: AgentId,
    pub item: ItemId,
    pub bid: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Keep,
    Accept,
    /// Accept, and the accepted entry takes the item away from the receiver.
    AcceptAndOutbidSelf,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("item {0} is not in the bundle")]
    NotInBundle(ItemId),
    #[error("message {sender}->{receiver} is not in the buffer")]
    NotBuffered { sender: AgentId, receiver: AgentId },
    #[error("conflict-freedom is only defined on states that reached consensus")]
    NoConsensus,
}

/// Tie rule shared by bidding and agreement: a real winner beats NULL, and
/// between two winners the smaller id wins.
fn wins_tie(challenger: Option<AgentId>, holder: Option<AgentId>) -> bool {
    match (challenger, holder) {
        (Some(_), None) => true,
        (Some(c), Some(h)) => c < h,
        (None, _) => false,
    }
}

/// Per-item agreement rule.
///
/// Same believed winner on both sides: the fresher stamp wins (equal stamps
/// keep). Different winners: the strictly larger bid wins, equal bids go to
/// the smaller winner id. An agent is the authority on its own bids, so an
/// incoming entry naming the receiver as winner is never taken over a local
/// entry that does not.
pub fn resolve_entry(local: ItemEntry, incoming: ItemEntry, me: AgentId) -> Resolution {
    if incoming.winner == Some(me) && local.winner != Some(me) {
        return Resolution::Keep;
    }
    let accept = if local.winner == incoming.winner {
        incoming.stamp > local.stamp
    } else {
        incoming.bid > local.bid || (incoming.bid == local.bid && wins_tie(incoming.winner, local.winner))
    };
    match (accept, local.winner == Some(me)) {
        (false, _) => Resolution::Keep,
        (true, true) => Resolution::AcceptAndOutbidSelf,
        (true, false) => Resolution::Accept,
    }
}

/// Drops `item` from the bundle after it was lost and records the bid that
/// beat it. Under `release_outbid` every item after it is released as well:
/// removed from the bundle and reset to NULL so it can be re-priced.
/// Returns the released items.
pub fn handle_outbid(
    view: &mut AgentView,
    item: ItemId,
    policy: &AgentPolicy,
) -> Result<Vec<ItemId>, ProtocolError> {
    let pos = view.bundle.iter().position(|&i| i == item).ok_or(ProtocolError::NotInBundle(item))?;
    let released = if policy.release_outbid { view.bundle.split_off(pos + 1) } else { Vec::new() };
    view.bundle.remove(pos);
    let beaten_by = view.entry(item).bid;
    view.lost.insert(item, beaten_by);
    for &r in &released {
        view.entries.insert(r, ItemEntry::NULL);
    }
    Ok(released)
}

/// Greedy bidding: repeatedly claims the item with the highest marginal
/// utility (lowest id on ties) that outbids the locally known winner, until
/// the bundle is full or nothing can be won. Lost items are skipped unless
/// the policy rebids on them, in which case the known bid is ignored. A
/// claim that would push the sum of own bids past `capacity` is skipped.
/// Returns the generated bids; empty means the view did not change.
pub fn generate_bids(
    view: &mut AgentView,
    policy: &AgentPolicy,
    capacity: u64,
    items: &[ItemId],
    utility: &UtilitySpec,
) -> Vec<GeneratedBid> {
    let me = view.agent;
    let mut generated = Vec::new();
    while view.bundle.len() < policy.target_items as usize {
        let spent = view.committed();
        let mut best: Option<(u64, ItemId)> = None;
        for &item in items {
            if view.bundle.contains(&item) {
                continue;
            }
            let attacking = view.lost.contains_key(&item);
            if attacking && !policy.rebid_on_lost {
                continue;
            }
            let u = utility.marginal_at(me, item, view.bundle.len());
            if u == 0 || spent + u > capacity {
                continue;
            }
            let known = view.entry(item);
            let outbids = attacking || u > known.bid || (u == known.bid && wins_tie(Some(me), known.winner));
            if outbids && best.is_none_or(|(bu, _)| u > bu) {
                best = Some((u, item));
            }
        }
        let Some((bid, item)) = best else { break };
        view.bundle.push(item);
        view.clock += 1;
        view.entries.insert(item, ItemEntry { winner: Some(me), bid, stamp: view.clock });
        view.lost.remove(&item);
        generated.push(GeneratedBid { agent: me, item, bid });
    }
    generated
}

/// The sender is the authority on its own claims. If the receiver believes
/// the sender holds `item`, and a message sent no earlier than that claim
/// says otherwise, the claim was withdrawn: the receiver takes the sender's
/// entry instead, or NULL if that entry names the receiver itself.
fn withdrawal(view: &AgentView, msg: &BidMessage, item: ItemId, incoming: ItemEntry) -> Option<ItemEntry> {
    let local = view.entry(item);
    let withdrawn =
        local.winner == Some(msg.sender) && incoming.winner != Some(msg.sender) && msg.clock >= local.stamp;
    match (withdrawn, incoming.winner == Some(view.agent)) {
        (false, _) => None,
        (true, true) => Some(ItemEntry::NULL),
        (true, false) => Some(incoming),
    }
}

fn broadcast(state: &mut NetState, scenario: &Scenario, sender: AgentId) {
    let view = &state.views[&sender];
    let (payload, clock) = (view.entries.clone(), view.clock);
    for receiver in scenario.neighbors(sender) {
        state.buffer.push(BidMessage { sender, receiver, clock, payload: payload.clone() });
    }
}

/// Initial state together with the bids generated while building it.
pub fn initial_state_traced(scenario: &Scenario) -> (NetState, Vec<GeneratedBid>) {
    let items = scenario.items();
    let mut state = NetState { views: BTreeMap::new(), buffer: Vec::new(), step: 0 };
    let mut log = Vec::new();
    for agent in scenario.agents() {
        let mut view = AgentView::empty(agent, &items);
        let bids = generate_bids(
            &mut view,
            &scenario.policy(agent),
            scenario.capacity(agent),
            &items,
            &scenario.utility,
        );
        state.views.insert(agent, view);
        if !bids.is_empty() {
            broadcast(&mut state, scenario, agent);
        }
        log.extend(bids);
    }
    state.buffer.sort();
    (state, log)
}

/// Every agent bids once on an empty view and broadcasts if it bid.
pub fn initial_state(scenario: &Scenario) -> NetState {
    initial_state_traced(scenario).0
}

/// [`step`] that also reports the bids generated by the receiver.
pub fn step_traced(
    state: &NetState,
    choice: &BidMessage,
    scenario: &Scenario,
) -> Result<(NetState, Vec<GeneratedBid>), ProtocolError> {
    let idx = state
        .buffer
        .iter()
        .position(|m| m == choice)
        .ok_or(ProtocolError::NotBuffered { sender: choice.sender, receiver: choice.receiver })?;
    let mut next = state.clone();
    next.buffer.remove(idx);
    let me = choice.receiver;
    let policy = scenario.policy(me);
    let items = scenario.items();
    let view = next.views.get_mut(&me).expect("receiver has a view");

    let mut changed = false;
    let mut outbid = Vec::new();
    for (&item, &incoming) in &choice.payload {
        if let Some(replacement) = withdrawal(view, choice, item, incoming) {
            view.entries.insert(item, replacement);
            changed = true;
            continue;
        }
        match resolve_entry(view.entry(item), incoming, me) {
            Resolution::Keep => {}
            Resolution::Accept => {
                view.entries.insert(item, incoming);
                changed = true;
            }
            Resolution::AcceptAndOutbidSelf => {
                view.entries.insert(item, incoming);
                changed = true;
                outbid.push(item);
            }
        }
    }

    // Earliest bundle position first: its release may cover later losses.
    outbid.sort_by_key(|i| view.bundle.iter().position(|b| b == i));
    let mut released = Vec::new();
    for &item in &outbid {
        if view.bundle.contains(&item) {
            released.extend(handle_outbid(view, item, &policy)?);
        }
    }
    for &item in &released {
        changed = true;
        if let Some(&incoming) = choice.payload.get(&item) {
            if resolve_entry(ItemEntry::NULL, incoming, me) != Resolution::Keep {
                view.entries.insert(item, incoming);
            }
        }
        if outbid.contains(&item) {
            let beaten_by = view.entry(item).bid;
            view.lost.insert(item, beaten_by);
        }
    }
    let entries = &view.entries;
    view.lost.retain(|item, beaten_by| entries.get(item).map_or(0, |e| e.bid) >= *beaten_by);

    let generated = generate_bids(view, &policy, scenario.capacity(me), &items, &scenario.utility);
    changed |= !generated.is_empty();
    if changed {
        broadcast(&mut next, scenario, me);
        next.buffer.sort();
    }
    next.step += 1;
    Ok((next, generated))
}

/// Processes one buffered message: the receiver folds the payload, handles
/// any lost items, rebids, and rebroadcasts its view if anything changed.
pub fn step(state: &NetState, choice: &BidMessage, scenario: &Scenario) -> Result<NetState, ProtocolError> {
    step_traced(state, choice, scenario).map(|(s, _)| s)
}

/// All views agree item by item on winner and bid.
pub fn consensus_reached(state: &NetState) -> bool {
    let mut views = state.views.values();
    let Some(first) = views.next() else { return true };
    views.all(|v| {
        v.entries.len() == first.entries.len()
            && v.entries.iter().all(|(item, e)| {
                let f = first.entry(*item);
                f.winner == e.winner && f.bid == e.bid
            })
    })
}

/// The agreed view assigns each item to at most one agent and every
/// agent's bundle is exactly the set of items it wins there.
pub fn conflict_free(state: &NetState) -> Result<bool, ProtocolError> {
    if !consensus_reached(state) {
        return Err(ProtocolError::NoConsensus);
    }
    let Some(agreed) = state.views.values().next() else { return Ok(true) };
    for view in state.views.values() {
        let mut won: Vec<ItemId> =
            agreed.entries.iter().filter(|(_, e)| e.winner == Some(view.agent)).map(|(&i, _)| i).collect();
        let mut held = view.bundle.clone();
        won.sort();
        held.sort();
        if won != held {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Winner of each item in the agreed view (or in the first view, if the
/// views disagree).
pub fn agreed_winners(state: &NetState) -> BTreeMap<ItemId, AgentId> {
    state
        .views
        .values()
        .next()
        .map(|v| v.entries.iter().filter_map(|(&i, e)| e.winner.map(|w| (i, w))).collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::tests::{pnode, vnode};
    use crate::netmodel::{PhysicalNetwork, VirtualNetwork};
    use crate::policies::UtilityKind;

    const A: ItemId = ItemId(1);
    const B: ItemId = ItemId(2);
    const C: ItemId = ItemId(3);

    fn entry(winner: i64, bid: u64, stamp: u64) -> ItemEntry {
        ItemEntry { winner: Some(AgentId(winner)), bid, stamp }
    }

    fn two_agents(kind: UtilityKind, slope: u64, base: [[u64; 3]; 2], policy: AgentPolicy) -> Scenario {
        let mut rows = BTreeMap::new();
        for (a, row) in base.iter().enumerate() {
            rows.insert(
                AgentId(a as i64 + 1),
                row.iter().enumerate().map(|(i, &v)| (ItemId(i as i64 + 1), v)).collect(),
            );
        }
        Scenario {
            physical: PhysicalNetwork { nodes: vec![pnode(1, 100, &[2]), pnode(2, 100, &[1])] },
            virtual_net: VirtualNetwork { nodes: vec![vnode(1, 1, &[]), vnode(2, 1, &[]), vnode(3, 1, &[])] },
            utility: UtilitySpec { kind, slope, base: rows },
            policies: BTreeMap::from([(AgentId(1), policy), (AgentId(2), policy)]),
            bound_override: None,
            slack: None,
            adversarial: policy.rebid_on_lost,
        }
    }

    fn example1() -> Scenario {
        let policy = AgentPolicy { target_items: 2, ..Default::default() };
        two_agents(UtilityKind::SubmodularResidual, 0, [[10, 0, 30], [20, 15, 0]], policy)
    }

    #[test]
    fn resolve_higher_bid_outbids_self() {
        let r = resolve_entry(entry(1, 10, 1), entry(2, 20, 1), AgentId(1));
        assert_eq!(r, Resolution::AcceptAndOutbidSelf);
    }

    #[test]
    fn resolve_equal_bids_keep_smaller_winner() {
        let r = resolve_entry(entry(1, 15, 2), entry(2, 15, 9), AgentId(3));
        assert_eq!(r, Resolution::Keep);
    }

    #[test]
    fn resolve_same_winner_fresher_stamp() {
        let r = resolve_entry(entry(2, 20, 1), entry(2, 18, 3), AgentId(1));
        assert_eq!(r, Resolution::Accept);
    }

    #[test]
    fn resolve_null_loses() {
        assert_eq!(resolve_entry(ItemEntry::NULL, entry(2, 1, 1), AgentId(1)), Resolution::Accept);
        assert_eq!(resolve_entry(entry(2, 1, 1), ItemEntry::NULL, AgentId(1)), Resolution::Keep);
    }

    #[test]
    fn resolve_stale_claim_about_self_is_ignored() {
        assert_eq!(resolve_entry(ItemEntry::NULL, entry(1, 9, 4), AgentId(1)), Resolution::Keep);
    }

    #[test]
    fn example1_initial_bids() {
        let state = initial_state(&example1());
        let v1 = &state.views[&AgentId(1)];
        assert_eq!(v1.bundle, vec![C, A]);
        assert_eq!(v1.entry(A), entry(1, 10, 2));
        assert_eq!(v1.entry(C), entry(1, 30, 1));
        assert_eq!(v1.entry(B), ItemEntry::NULL);
        assert_eq!(state.buffer.len(), 2);
        assert_eq!(state.step, 0);
    }

    #[test]
    fn zero_target_bids_nothing() {
        let policy = AgentPolicy { target_items: 0, ..Default::default() };
        let s = two_agents(UtilityKind::SubmodularResidual, 0, [[5, 5, 5], [5, 5, 5]], policy);
        let state = initial_state(&s);
        assert!(state.buffer.is_empty());
        assert!(state.views.values().all(|v| v.bundle.is_empty()));
    }

    #[test]
    fn lone_agent_has_nobody_to_tell() {
        let mut s = example1();
        s.physical = PhysicalNetwork { nodes: vec![pnode(1, 100, &[])] };
        s.utility.base.remove(&AgentId(2));
        s.policies.remove(&AgentId(2));
        let state = initial_state(&s);
        assert_eq!(state.views[&AgentId(1)].bundle, vec![C, A]);
        assert!(state.buffer.is_empty());
    }

    #[test]
    fn no_bid_under_a_higher_known_offer() {
        let items = [A, B, C];
        let mut view = AgentView::empty(AgentId(1), &items);
        for i in items {
            view.entries.insert(i, entry(2, 50, 1));
        }
        let spec = example1().utility;
        let policy = AgentPolicy { target_items: 3, ..Default::default() };
        assert!(generate_bids(&mut view, &policy, 1000, &items, &spec).is_empty());
    }

    #[test]
    fn lost_items_are_not_rebid() {
        let items = [A, B, C];
        let mut view = AgentView::empty(AgentId(1), &items);
        view.lost.insert(C, 31);
        let spec = example1().utility;
        let policy = AgentPolicy { target_items: 2, ..Default::default() };
        let bids = generate_bids(&mut view, &policy, 1000, &items, &spec);
        assert_eq!(bids, vec![GeneratedBid { agent: AgentId(1), item: A, bid: 10 }]);
        let attacker = AgentPolicy { rebid_on_lost: true, ..policy };
        let mut view = AgentView::empty(AgentId(1), &items);
        view.lost.insert(C, 31);
        view.entries.insert(C, entry(2, 31, 1));
        let bids = generate_bids(&mut view, &attacker, 1000, &items, &spec);
        assert_eq!(bids[0], GeneratedBid { agent: AgentId(1), item: C, bid: 30 });
    }

    #[test]
    fn capacity_skips_items() {
        let items = [A, B, C];
        let mut view = AgentView::empty(AgentId(1), &items);
        let spec = example1().utility;
        let policy = AgentPolicy { target_items: 2, ..Default::default() };
        let bids = generate_bids(&mut view, &policy, 35, &items, &spec);
        // 30 fits, 30 + 10 does not
        assert_eq!(bids.len(), 1);
        assert_eq!(view.committed(), 30);
    }

    fn held(bundle: &[ItemId]) -> AgentView {
        let mut view = AgentView::empty(AgentId(1), &[A, B, C]);
        for (k, &i) in bundle.iter().enumerate() {
            view.entries.insert(i, entry(1, 10, k as u64 + 1));
            view.bundle.push(i);
        }
        view
    }

    #[test]
    fn outbid_with_release_drops_later_items() {
        let policy = AgentPolicy { target_items: 2, release_outbid: true, ..Default::default() };
        let mut view = held(&[C, A]);
        view.entries.insert(C, entry(2, 40, 1));
        let released = handle_outbid(&mut view, C, &policy).unwrap();
        assert_eq!(released, vec![A]);
        assert!(view.bundle.is_empty());
        assert_eq!(view.entry(A), ItemEntry::NULL);
        assert_eq!(view.lost.get(&C), Some(&40));
        assert!(!view.lost.contains_key(&A));
    }

    #[test]
    fn outbid_on_last_item_releases_nothing() {
        let policy = AgentPolicy { target_items: 2, release_outbid: true, ..Default::default() };
        let mut view = held(&[C, A]);
        assert!(handle_outbid(&mut view, A, &policy).unwrap().is_empty());
        assert_eq!(view.bundle, vec![C]);
    }

    #[test]
    fn outbid_without_release_keeps_the_rest() {
        let policy = AgentPolicy { target_items: 2, ..Default::default() };
        let mut view = held(&[C, A]);
        handle_outbid(&mut view, C, &policy).unwrap();
        assert_eq!(view.bundle, vec![A]);
        assert_eq!(view.entry(A), entry(1, 10, 2));
        assert_eq!(handle_outbid(&mut view, B, &policy), Err(ProtocolError::NotInBundle(B)));
    }

    #[test]
    fn example1_agent1_learns_higher_bid_on_a() {
        let s = example1();
        let state = initial_state(&s);
        let from2 = state.buffer.iter().find(|m| m.sender == AgentId(2)).unwrap().clone();
        let next = step(&state, &from2, &s).unwrap();
        let v1 = &next.views[&AgentId(1)];
        assert_eq!(v1.entry(A).winner, Some(AgentId(2)));
        assert_eq!(v1.entry(C).winner, Some(AgentId(1)));
        assert_eq!(next.step, 1);
    }

    #[test]
    fn redundant_message_changes_nothing() {
        let s = example1();
        let state = initial_state(&s);
        let mut state = state.clone();
        let echo = BidMessage {
            sender: AgentId(2),
            receiver: AgentId(1),
            clock: 0,
            payload: state.views[&AgentId(1)].entries.clone(),
        };
        state.buffer.push(echo.clone());
        state.buffer.sort();
        let next = step(&state, &echo, &s).unwrap();
        assert_eq!(next.views, state.views);
        assert_eq!(next.buffer.len(), state.buffer.len() - 1);
    }

    #[test]
    fn missing_message_is_an_error() {
        let s = example1();
        let state = initial_state(&s);
        let ghost =
            BidMessage { sender: AgentId(1), receiver: AgentId(1), clock: 0, payload: BTreeMap::new() };
        assert!(matches!(step(&state, &ghost, &s), Err(ProtocolError::NotBuffered { .. })));
    }

    #[test]
    fn dominant_entry_is_order_independent() {
        let s = example1();
        let mut state = initial_state(&s);
        state.buffer.clear();
        let strong = BTreeMap::from([(A, entry(2, 25, 7))]);
        let m1 = BidMessage { sender: AgentId(2), receiver: AgentId(1), clock: 0, payload: strong.clone() };
        let mut weaker = strong.clone();
        weaker.insert(B, ItemEntry::NULL);
        let m2 = BidMessage { sender: AgentId(2), receiver: AgentId(1), clock: 0, payload: weaker };
        state.buffer = vec![m1.clone(), m2.clone()];
        state.buffer.sort();
        let one = step(&step(&state, &m1, &s).unwrap(), &m2, &s).unwrap();
        let two = step(&step(&state, &m2, &s).unwrap(), &m1, &s).unwrap();
        assert_eq!(one.views[&AgentId(1)], two.views[&AgentId(1)]);
    }

    #[test]
    fn consensus_and_conflict_freedom() {
        let s = example1();
        let mut state = initial_state(&s);
        while let Some(m) = state.buffer.first().cloned() {
            state = step(&state, &m, &s).unwrap();
        }
        assert!(consensus_reached(&state));
        assert_eq!(conflict_free(&state), Ok(true));
        let winners = agreed_winners(&state);
        assert_eq!(winners[&A], AgentId(2));
        assert_eq!(winners[&C], AgentId(1));

        let mut broken = state.clone();
        broken.views.get_mut(&AgentId(2)).unwrap().bundle.push(C);
        assert_eq!(conflict_free(&broken), Ok(false));

        let mut split = state.clone();
        split.views.get_mut(&AgentId(2)).unwrap().entries.insert(A, entry(1, 99, 9));
        assert!(!consensus_reached(&split));
        assert_eq!(conflict_free(&split), Err(ProtocolError::NoConsensus));
    }

    #[test]
    fn empty_item_set_is_conflict_free() {
        let mut s = example1();
        s.virtual_net = VirtualNetwork::default();
        s.utility.base.clear();
        let state = initial_state(&s);
        assert_eq!(conflict_free(&state), Ok(true));
    }
}
