//! Brute-force optimal allocation for small instances.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{AgentId, ItemId};
use crate::policies::bundle_value;
use crate::protocol::{conflict_free, NetState};
use crate::scenario::Scenario;

/// Largest `agents * items` the exhaustive search accepts by default.
pub const DEFAULT_GUARD: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub bundles: BTreeMap<AgentId, Vec<ItemId>>,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(
        "instance too large for exhaustive search: {agents} agents x {items} items exceeds {guard} pairs"
    )]
    TooLarge { agents: usize, items: usize, guard: usize },
    #[error("the state has not reached a conflict-free agreement")]
    NotAgreed,
}

pub fn within_guard(scenario: &Scenario) -> bool {
    scenario.agents().len() * scenario.items().len() <= DEFAULT_GUARD
}

/// Marginal bids of a bundle taken in order; their sum is the bundle value.
fn marginals(scenario: &Scenario, agent: AgentId, bundle: &[ItemId]) -> Vec<u64> {
    (0..bundle.len()).map(|k| scenario.utility.marginal_at(agent, bundle[k], k)).collect()
}

fn permutations(items: &[ItemId]) -> Vec<Vec<ItemId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Best feasible order of `set` for one agent, or `None` if no order fits
/// the target and capacity limits. The set itself is in ascending order, so
/// the first best order found is the lexicographically smallest.
fn best_order(scenario: &Scenario, agent: AgentId, set: &[ItemId]) -> Option<(u64, Vec<ItemId>)> {
    if set.len() > scenario.policy(agent).target_items as usize {
        return None;
    }
    let capacity = scenario.capacity(agent);
    let orders = if scenario.utility.slope == 0 { vec![set.to_vec()] } else { permutations(set) };
    let mut best: Option<(u64, Vec<ItemId>)> = None;
    for order in orders {
        let m = marginals(scenario, agent, &order);
        let total: u64 = m.iter().sum();
        if total > capacity {
            continue;
        }
        if best.as_ref().is_none_or(|(v, _)| total > *v) {
            best = Some((total, order));
        }
    }
    best
}

/// Exhaustive search over every assignment of items to agents (or to no
/// one) and every bundle order. Ties go to the lexicographically smallest
/// assignment vector, item by item, with "unassigned" ordered first.
pub fn optimal_allocation(scenario: &Scenario) -> Result<Allocation, OracleError> {
    let agents = scenario.agents();
    let items = scenario.items();
    if agents.len() * items.len() > DEFAULT_GUARD {
        return Err(OracleError::TooLarge { agents: agents.len(), items: items.len(), guard: DEFAULT_GUARD });
    }
    let choices = agents.len() + 1;
    let total = (choices as u64).pow(items.len() as u32);
    let mut best: Option<Allocation> = None;
    let mut assign = vec![0usize; items.len()];
    for code in 0..total {
        // most significant digit is the first item: codes ascend lexicographically
        let mut c = code;
        for k in (0..items.len()).rev() {
            assign[k] = (c % choices as u64) as usize;
            c /= choices as u64;
        }
        let mut bundles = BTreeMap::new();
        let mut value = 0;
        let mut feasible = true;
        for (a, &agent) in agents.iter().enumerate() {
            let set: Vec<ItemId> =
                items.iter().zip(&assign).filter(|(_, &x)| x == a + 1).map(|(&i, _)| i).collect();
            if set.is_empty() {
                continue;
            }
            match best_order(scenario, agent, &set) {
                Some((v, order)) => {
                    value += v;
                    bundles.insert(agent, order);
                }
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible && best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Allocation { bundles, value });
        }
    }
    Ok(best.unwrap_or(Allocation { bundles: BTreeMap::new(), value: 0 }))
}

/// Total value of the allocation an agreed state encodes: each agent's
/// bundle valued in its bidding order.
pub fn agreed_value(state: &NetState, scenario: &Scenario) -> Result<u64, OracleError> {
    if conflict_free(state) != Ok(true) {
        return Err(OracleError::NotAgreed);
    }
    Ok(state
        .views
        .values()
        .map(|v| bundle_value(&scenario.utility, v.agent, &v.bundle).expect("bundles have no duplicates"))
        .sum())
}

/// Agreed value over the optimum, 1 when the optimum is 0.
pub fn approximation_ratio(state: &NetState, scenario: &Scenario) -> Result<Ratio<u64>, OracleError> {
    let got = agreed_value(state, scenario)?;
    let best = optimal_allocation(scenario)?.value;
    if best == 0 {
        return Ok(Ratio::from_integer(1));
    }
    Ok(Ratio::new(got, best))
}

/// Partial quotient `i` of the continued fraction of e, `[2; 1, 2, 1, 1, 4, 1, 1, 6, ...]`.
fn e_quotient(i: u64) -> u64 {
    match i {
        0 => 2,
        _ if i % 3 == 2 => 2 * (i + 1) / 3,
        _ => 1,
    }
}

/// Whether `num / den > e`, by comparing continued fractions term by term.
fn above_e(mut num: u128, mut den: u128) -> bool {
    let mut i = 0;
    loop {
        let (q, rem) = (num / den, num % den);
        let eq = u128::from(e_quotient(i));
        if q != eq {
            return (q > eq) == (i % 2 == 0);
        }
        if rem == 0 {
            // e's complete quotient here is larger than q
            return i % 2 == 1;
        }
        (num, den) = (den, rem);
        i += 1;
    }
}

/// Exact test of `ratio >= 1 - 1/e`. For `ratio = p/q < 1` this is
/// `q / (q - p) >= e`, and a rational never equals e.
pub fn meets_one_minus_inv_e(ratio: Ratio<u64>) -> bool {
    let (p, q) = (u128::from(*ratio.numer()), u128::from(*ratio.denom()));
    p >= q || above_e(q, q - p)
}
