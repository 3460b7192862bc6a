//! Scenario builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use mca::netmodel::{AgentId, ItemId, PhysicalNetwork, PhysicalNode, VirtualNetwork, VirtualNode};
use mca::policies::{AgentPolicy, UtilityKind, UtilitySpec};
use mca::scenario::{load_scenario, Scenario};
use rand::Rng;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

pub fn golden(name: &str) -> Scenario {
    load_scenario(scenario_path(name)).expect("bundled scenario loads")
}

/// Every connected labelled topology on `n <= 3` agents.
pub fn topologies(n: usize) -> Vec<Vec<(i64, i64)>> {
    match n {
        1 => vec![vec![]],
        2 => vec![vec![(1, 2)]],
        3 => vec![
            vec![(1, 2), (2, 3)],
            vec![(1, 2), (1, 3)],
            vec![(1, 3), (2, 3)],
            vec![(1, 2), (2, 3), (1, 3)],
        ],
        _ => panic!("only up to 3 agents"),
    }
}

/// Builder for small scenarios: agents `1..=n`, items `1..=m`, unit
/// demands, no virtual links.
#[derive(Debug, Clone)]
pub struct Spec {
    pub n: usize,
    pub edges: Vec<(i64, i64)>,
    pub m: usize,
    /// Row-major `n x m` base values.
    pub base: Vec<u64>,
    pub release: Vec<bool>,
    pub rebid: Vec<bool>,
    pub target: Vec<u32>,
    pub slope: u64,
    pub kind: UtilityKind,
    pub capacity: i64,
}

impl Spec {
    pub fn new(n: usize, edges: &[(i64, i64)], m: usize, base: &[u64]) -> Spec {
        assert_eq!(base.len(), n * m);
        Spec {
            n,
            edges: edges.to_vec(),
            m,
            base: base.to_vec(),
            release: vec![false; n],
            rebid: vec![false; n],
            target: vec![m as u32; n],
            slope: 0,
            kind: UtilityKind::SubmodularResidual,
            capacity: 1000,
        }
    }

    pub fn build(&self) -> Scenario {
        let nodes = (1..=self.n as i64)
            .map(|i| PhysicalNode {
                id: AgentId(i),
                capacity: self.capacity,
                neighbors: self
                    .edges
                    .iter()
                    .filter_map(|&(a, b)| match () {
                        _ if a == i => Some(AgentId(b)),
                        _ if b == i => Some(AgentId(a)),
                        _ => None,
                    })
                    .collect(),
            })
            .collect();
        let vnodes = (1..=self.m as i64)
            .map(|j| VirtualNode { id: ItemId(j), demand: 1, neighbors: BTreeSet::new() })
            .collect();
        let base = (0..self.n)
            .map(|i| {
                let row = (0..self.m).map(|j| (ItemId(j as i64 + 1), self.base[i * self.m + j])).collect();
                (AgentId(i as i64 + 1), row)
            })
            .collect();
        let policies = (0..self.n)
            .map(|i| {
                let p = AgentPolicy {
                    target_items: self.target[i],
                    release_outbid: self.release[i],
                    rebid_on_lost: self.rebid[i],
                };
                (AgentId(i as i64 + 1), p)
            })
            .collect();
        Scenario {
            physical: PhysicalNetwork { nodes },
            virtual_net: VirtualNetwork { nodes: vnodes },
            utility: UtilitySpec { kind: self.kind, slope: self.slope, base },
            policies,
            bound_override: None,
            slack: None,
            adversarial: self.rebid.iter().any(|&r| r),
        }
    }
}

/// Random honest scenario with up to `max_agents` agents and `max_items`
/// items on a random connected topology.
pub fn random_spec<R: Rng>(rng: &mut R, max_agents: usize, max_items: usize, kind: UtilityKind) -> Spec {
    let n = rng.gen_range(1..=max_agents);
    let m = rng.gen_range(1..=max_items);
    let tops = topologies(n);
    let edges = tops[rng.gen_range(0..tops.len())].clone();
    let base: Vec<u64> = (0..n * m).map(|_| rng.gen_range(0..=9)).collect();
    let mut spec = Spec::new(n, &edges, m, &base);
    spec.kind = kind;
    spec.slope = rng.gen_range(0..=3);
    spec.target = (0..n).map(|_| rng.gen_range(1..=m as u32)).collect();
    spec.release = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    spec
}

/// Items each agent holds in an agreed state.
pub fn bundles(state: &mca::protocol::NetState) -> BTreeMap<AgentId, Vec<ItemId>> {
    state.views.iter().map(|(&a, v)| (a, v.bundle.clone())).collect()
}
