//! Bidding policies and utility functions.
//!
//! Utilities are integer valued and depend on the bundle only through its
//! size: the residual form loses `slope` per item already held, the additive
//! form gains it. The residual form is sub-modular, the additive one is not
//! once `slope > 0`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{AgentId, ItemId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityKind {
    /// `max(0, base - slope * |bundle|)`
    SubmodularResidual,
    /// `base + slope * |bundle|`
    NonsubmodularAdditive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    #[serde(default)]
    pub slope: u64,
    /// Stand-alone value of each item for each agent. Missing entries are 0.
    #[serde(default)]
    pub base: BTreeMap<AgentId, BTreeMap<ItemId, u64>>,
}

impl UtilitySpec {
    pub fn base(&self, agent: AgentId, item: ItemId) -> u64 {
        self.base.get(&agent).and_then(|row| row.get(&item)).copied().unwrap_or(0)
    }

    /// Marginal value for an item added to a bundle of `held` items.
    pub fn marginal_at(&self, agent: AgentId, item: ItemId, held: usize) -> u64 {
        let base = self.base(agent, item);
        let shift = self.slope.saturating_mul(held as u64);
        match self.kind {
            UtilityKind::SubmodularResidual => base.saturating_sub(shift),
            UtilityKind::NonsubmodularAdditive => base.saturating_add(shift),
        }
    }
}

/// Per-agent policy knobs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPolicy {
    /// Maximum bundle size.
    pub target_items: u32,
    /// Release and re-price every bundle item after an outbid one.
    #[serde(default)]
    pub release_outbid: bool,
    /// Misbehaviour: keep bidding on items the agent was outbid on.
    #[serde(default)]
    pub rebid_on_lost: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("item {0} is already in the bundle")]
    ItemInBundle(ItemId),
    #[error("item {0} appears twice in the bundle")]
    DuplicateItem(ItemId),
}

/// Value of adding `item` to `bundle` for `agent`.
pub fn marginal_utility(
    spec: &UtilitySpec,
    agent: AgentId,
    item: ItemId,
    bundle: &[ItemId],
) -> Result<u64, PolicyError> {
    if bundle.contains(&item) {
        return Err(PolicyError::ItemInBundle(item));
    }
    Ok(spec.marginal_at(agent, item, bundle.len()))
}

/// Sum of marginals accrued in the bundle's stored order.
pub fn bundle_value(spec: &UtilitySpec, agent: AgentId, bundle: &[ItemId]) -> Result<u64, PolicyError> {
    let mut seen = BTreeSet::new();
    let mut total = 0u64;
    for (k, &item) in bundle.iter().enumerate() {
        if !seen.insert(item) {
            return Err(PolicyError::DuplicateItem(item));
        }
        total += spec.marginal_at(agent, item, k);
    }
    Ok(total)
}

/// Concrete breach of the sub-modularity inequality: adding `item` to the
/// smaller bundle is worth strictly less than adding it to the larger one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubmodularityWitness {
    pub agent: AgentId,
    pub item: ItemId,
    pub smaller: Vec<ItemId>,
    pub larger: Vec<ItemId>,
    pub smaller_value: u64,
    pub larger_value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubmodularityCheck {
    pub holds: bool,
    pub witness: Option<SubmodularityWitness>,
}

fn subsets(pool: &[ItemId], max_len: usize) -> Vec<Vec<ItemId>> {
    let mut out = vec![Vec::new()];
    for &item in pool {
        let grown: Vec<Vec<ItemId>> = out
            .iter()
            .filter(|s| s.len() < max_len)
            .map(|s| {
                let mut s = s.clone();
                s.push(item);
                s
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Brute-force check of `u(j, m') >= u(j, m)` for every agent, every item
/// `j`, and every pair of bundles `m' ⊂ m` not containing `j` with
/// `|m| <= max_bundle`. Stops at the first violation.
pub fn check_submodular(
    spec: &UtilitySpec,
    agents: &[AgentId],
    items: &[ItemId],
    max_bundle: usize,
) -> SubmodularityCheck {
    for &agent in agents {
        for &item in items {
            let pool: Vec<ItemId> = items.iter().copied().filter(|&i| i != item).collect();
            let bundles = subsets(&pool, max_bundle);
            for larger in &bundles {
                let larger_value = spec.marginal_at(agent, item, larger.len());
                for smaller in
                    bundles.iter().filter(|s| s.len() < larger.len() && s.iter().all(|i| larger.contains(i)))
                {
                    let smaller_value = spec.marginal_at(agent, item, smaller.len());
                    if smaller_value < larger_value {
                        return SubmodularityCheck {
                            holds: false,
                            witness: Some(SubmodularityWitness {
                                agent,
                                item,
                                smaller: smaller.clone(),
                                larger: larger.clone(),
                                smaller_value,
                                larger_value,
                            }),
                        };
                    }
                }
            }
        }
    }
    SubmodularityCheck { holds: true, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: ItemId = ItemId(1);
    const B: ItemId = ItemId(2);
    const C: ItemId = ItemId(3);
    const D: ItemId = ItemId(4);
    const E: ItemId = ItemId(5);

    fn spec(kind: UtilityKind, slope: u64, base: &[(i64, i64, u64)]) -> UtilitySpec {
        let mut rows: BTreeMap<AgentId, BTreeMap<ItemId, u64>> = BTreeMap::new();
        for &(a, i, v) in base {
            rows.entry(AgentId(a)).or_default().insert(ItemId(i), v);
        }
        UtilitySpec { kind, slope, base: rows }
    }

    #[test]
    fn residual_marginals() {
        let s = spec(UtilityKind::SubmodularResidual, 3, &[(1, 1, 10)]);
        assert_eq!(marginal_utility(&s, AgentId(1), A, &[]), Ok(10));
        // max(0, 10 - 12)
        assert_eq!(marginal_utility(&s, AgentId(1), A, &[B, C, D, E]), Ok(0));
    }

    #[test]
    fn additive_marginals() {
        let s = spec(UtilityKind::NonsubmodularAdditive, 5, &[(1, 1, 10)]);
        assert_eq!(marginal_utility(&s, AgentId(1), A, &[B]), Ok(15));
    }

    #[test]
    fn marginal_rejects_held_item() {
        let s = spec(UtilityKind::SubmodularResidual, 0, &[]);
        assert_eq!(marginal_utility(&s, AgentId(1), A, &[A]), Err(PolicyError::ItemInBundle(A)));
    }

    #[test]
    fn bundle_values() {
        let s = spec(UtilityKind::SubmodularResidual, 0, &[(1, 1, 10), (1, 3, 30)]);
        assert_eq!(bundle_value(&s, AgentId(1), &[]), Ok(0));
        assert_eq!(bundle_value(&s, AgentId(1), &[A, C]), Ok(40));
        let add = spec(UtilityKind::NonsubmodularAdditive, 5, &[(1, 1, 10), (1, 2, 10)]);
        assert_eq!(bundle_value(&add, AgentId(1), &[A, B]), Ok(25));
        assert_eq!(bundle_value(&add, AgentId(1), &[A, A]), Err(PolicyError::DuplicateItem(A)));
    }

    #[test]
    fn additive_with_slope_is_not_submodular() {
        let s = spec(UtilityKind::NonsubmodularAdditive, 1, &[(1, 1, 4), (1, 2, 4)]);
        let check = check_submodular(&s, &[AgentId(1)], &[A, B], 2);
        assert!(!check.holds);
        let w = check.witness.unwrap();
        assert_eq!(w.smaller, Vec::<ItemId>::new());
        assert_eq!(w.larger, vec![B]);
        assert_eq!((w.smaller_value, w.larger_value), (4, 5));
    }

    #[test]
    fn flat_additive_is_submodular() {
        let s = spec(UtilityKind::NonsubmodularAdditive, 0, &[(1, 1, 4), (1, 2, 7)]);
        assert!(check_submodular(&s, &[AgentId(1)], &[A, B], 2).holds);
    }

    fn residual_spec() -> impl Strategy<Value = (UtilitySpec, usize)> {
        (1usize..=4, 0u64..6, proptest::collection::vec(0u64..20, 12)).prop_map(|(n, slope, vals)| {
            let mut base = BTreeMap::new();
            for a in 0..3 {
                let row = (0..n).map(|i| (ItemId(i as i64 + 1), vals[a * 4 + i])).collect();
                base.insert(AgentId(a as i64), row);
            }
            (UtilitySpec { kind: UtilityKind::SubmodularResidual, slope, base }, n)
        })
    }

    proptest! {
        #[test]
        fn residual_never_increases((s, n) in residual_spec()) {
            let items: Vec<ItemId> = (1..=n as i64).map(ItemId).collect();
            for agent in [AgentId(0), AgentId(1), AgentId(2)] {
                for &item in &items {
                    for held in 0..n {
                        prop_assert!(s.marginal_at(agent, item, held) >= s.marginal_at(agent, item, held + 1));
                    }
                    prop_assert_eq!(
                        bundle_value(&s, agent, &[item]).unwrap(),
                        marginal_utility(&s, agent, item, &[]).unwrap()
                    );
                }
            }
            let agents = [AgentId(0), AgentId(1), AgentId(2)];
            prop_assert!(check_submodular(&s, &agents, &items, n).holds);
        }
    }
}
