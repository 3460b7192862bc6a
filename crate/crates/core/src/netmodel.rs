//! Physical and virtual network model.
//!
//! The physical network is the set of bidding agents and the links between
//! them; the virtual network is the set of items on auction. Both carry the
//! static well-formedness facts as validators that return violations as data
//! rather than failing, so a scenario can report every problem at once.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a physical node, i.e. a bidding agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub i64);

/// Identifier of a virtual node, i.e. an auctioned item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub i64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalNode {
    pub id: AgentId,
    /// CPU units available for hosting.
    pub capacity: i64,
    #[serde(default)]
    pub neighbors: BTreeSet<AgentId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhysicalNetwork {
    pub nodes: Vec<PhysicalNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualNode {
    pub id: ItemId,
    /// CPU units the item needs from its host.
    pub demand: i64,
    #[serde(default)]
    pub neighbors: BTreeSet<ItemId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VirtualNetwork {
    pub nodes: Vec<VirtualNode>,
}

/// Placement of virtual nodes onto physical nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mapping {
    pub assignments: BTreeMap<ItemId, AgentId>,
}

/// A violated static fact. Each variant names the fact and the offending
/// node (or node pair).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "fact", rename_all = "kebab-case")]
pub enum Violation {
    /// `a` lists `b` as a neighbor but not the other way round.
    Asymmetry {
        a: i64,
        b: i64,
    },
    NegativeId {
        id: i64,
    },
    NonPositiveId {
        id: i64,
    },
    DuplicateId {
        id: i64,
    },
    SelfLoop {
        id: i64,
    },
    NegativeCapacity {
        id: i64,
    },
    NegativeDemand {
        id: i64,
    },
    UnknownNeighbor {
        id: i64,
        neighbor: i64,
    },
}

impl Violation {
    /// Name of the static fact this violation breaks.
    pub fn fact(&self) -> &'static str {
        match self {
            Violation::Asymmetry { .. } | Violation::UnknownNeighbor { .. } => "pconnectivity",
            Violation::NegativeId { .. } | Violation::DuplicateId { .. } => "uniqueId",
            Violation::NonPositiveId { .. } => "vnodeFact",
            Violation::SelfLoop { .. } => "selfLoop",
            Violation::NegativeCapacity { .. } => "positiveCap",
            Violation::NegativeDemand { .. } => "positiveDemand",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Asymmetry { a, b } => {
                write!(f, "{}: {a} lists {b} as neighbor but {b} does not list {a}", self.fact())
            }
            Violation::NegativeId { id } => write!(f, "{}: negative id {id}", self.fact()),
            Violation::NonPositiveId { id } => write!(f, "{}: non-positive id {id}", self.fact()),
            Violation::DuplicateId { id } => write!(f, "{}: duplicate id {id}", self.fact()),
            Violation::SelfLoop { id } => write!(f, "{}: node {id} lists itself", self.fact()),
            Violation::NegativeCapacity { id } => {
                write!(f, "{}: node {id} has negative capacity", self.fact())
            }
            Violation::NegativeDemand { id } => {
                write!(f, "{}: node {id} has negative demand", self.fact())
            }
            Violation::UnknownNeighbor { id, neighbor } => {
                write!(f, "{}: node {id} lists unknown neighbor {neighbor}", self.fact())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown physical node {0}")]
    UnknownNode(AgentId),
}

/// Largest shortest-path hop count between any two physical nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diameter {
    Finite(u64),
    /// Some pair of nodes is not connected.
    Disconnected,
}

impl Diameter {
    pub fn finite(self) -> Option<u64> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Disconnected => None,
        }
    }
}

/// Shared scan for both network kinds: ids, self-loops and link symmetry.
fn check_links<'a>(nodes: impl Iterator<Item = (i64, &'a BTreeSet<i64>)> + Clone, out: &mut Vec<Violation>) {
    let adjacency: BTreeMap<i64, &BTreeSet<i64>> = nodes.clone().collect();
    let mut seen = BTreeSet::new();
    for (id, neighbors) in nodes {
        if !seen.insert(id) {
            out.push(Violation::DuplicateId { id });
        }
        for &n in neighbors {
            if n == id {
                out.push(Violation::SelfLoop { id });
                continue;
            }
            match adjacency.get(&n) {
                None => out.push(Violation::UnknownNeighbor { id, neighbor: n }),
                Some(back) if !back.contains(&id) => out.push(Violation::Asymmetry { a: id, b: n }),
                Some(_) => {}
            }
        }
    }
}

/// Checks the physical static facts: unique non-negative ids, no
/// self-loops, symmetric links, non-negative capacities.
pub fn validate_physical(net: &PhysicalNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    for node in &net.nodes {
        if node.id.0 < 0 {
            out.push(Violation::NegativeId { id: node.id.0 });
        }
        if node.capacity < 0 {
            out.push(Violation::NegativeCapacity { id: node.id.0 });
        }
    }
    let raw: Vec<(i64, BTreeSet<i64>)> =
        net.nodes.iter().map(|n| (n.id.0, n.neighbors.iter().map(|a| a.0).collect())).collect();
    check_links(raw.iter().map(|(id, ns)| (*id, ns)), &mut out);
    out
}

/// Checks the virtual static facts: positive distinct ids, symmetric
/// connections, no self-loops, non-negative demands.
pub fn validate_virtual(net: &VirtualNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    for node in &net.nodes {
        if node.id.0 <= 0 {
            out.push(Violation::NonPositiveId { id: node.id.0 });
        }
        if node.demand < 0 {
            out.push(Violation::NegativeDemand { id: node.id.0 });
        }
    }
    let raw: Vec<(i64, BTreeSet<i64>)> =
        net.nodes.iter().map(|n| (n.id.0, n.neighbors.iter().map(|a| a.0).collect())).collect();
    check_links(raw.iter().map(|(id, ns)| (*id, ns)), &mut out);
    out
}

impl PhysicalNetwork {
    pub fn node(&self, id: AgentId) -> Option<&PhysicalNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn ids(&self) -> Vec<AgentId> {
        let mut ids: Vec<_> = self.nodes.iter().map(|n| n.id).collect();
        ids.sort();
        ids
    }

    /// Number of directed links (each undirected link counts twice).
    pub fn directed_links(&self) -> u64 {
        self.nodes.iter().map(|n| n.neighbors.len() as u64).sum()
    }

    /// Hop distances from `src` to every reachable node.
    fn hops_from(&self, src: AgentId) -> BTreeMap<AgentId, u64> {
        let mut dist = BTreeMap::from([(src, 0)]);
        let mut queue = VecDeque::from([src]);
        while let Some(cur) = queue.pop_front() {
            let d = dist[&cur];
            if let Some(node) = self.node(cur) {
                for &n in &node.neighbors {
                    if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(n) {
                        e.insert(d + 1);
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }
}

impl VirtualNetwork {
    pub fn ids(&self) -> Vec<ItemId> {
        let mut ids: Vec<_> = self.nodes.iter().map(|n| n.id).collect();
        ids.sort();
        ids
    }

    pub fn node(&self, id: ItemId) -> Option<&VirtualNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Sub-network induced by `keep`; links to dropped nodes are removed.
    pub fn restrict_to(&self, keep: &BTreeSet<ItemId>) -> VirtualNetwork {
        VirtualNetwork {
            nodes: self
                .nodes
                .iter()
                .filter(|n| keep.contains(&n.id))
                .map(|n| VirtualNode {
                    id: n.id,
                    demand: n.demand,
                    neighbors: n.neighbors.intersection(keep).copied().collect(),
                })
                .collect(),
        }
    }
}

/// Network diameter in hops. A single node has diameter 0, an empty network
/// too.
pub fn diameter(net: &PhysicalNetwork) -> Diameter {
    let mut best = 0;
    for node in &net.nodes {
        let dist = net.hops_from(node.id);
        if dist.len() < net.nodes.len() {
            return Diameter::Disconnected;
        }
        best = best.max(dist.values().copied().max().unwrap_or(0));
    }
    Diameter::Finite(best)
}

/// Whether some physical path joins `src` and `dst`. A node always reaches
/// itself through the empty path.
pub fn path_exists(net: &PhysicalNetwork, src: AgentId, dst: AgentId) -> Result<bool, NetError> {
    for id in [src, dst] {
        if net.node(id).is_none() {
            return Err(NetError::UnknownNode(id));
        }
    }
    Ok(net.hops_from(src).contains_key(&dst))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MappingViolation {
    /// Virtual node without a host.
    Unmapped {
        vnode: ItemId,
    },
    /// Mapping mentions a virtual node that does not exist.
    UnknownVirtual {
        vnode: ItemId,
    },
    /// Host is not a physical node.
    UnknownPhysical {
        vnode: ItemId,
        pnode: AgentId,
    },
    Capacity {
        pnode: AgentId,
        load: i64,
        capacity: i64,
    },
    /// Virtual link whose hosts are not connected.
    NoPath {
        from: ItemId,
        to: ItemId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingCheck {
    pub valid: bool,
    pub violations: Vec<MappingViolation>,
}

/// Checks that `mapping` places every virtual node on exactly one existing
/// physical node, respects every host capacity, and leaves a physical path
/// under every virtual link.
pub fn validate_mapping(mapping: &Mapping, virt: &VirtualNetwork, phys: &PhysicalNetwork) -> MappingCheck {
    let mut violations = Vec::new();
    for &v in mapping.assignments.keys() {
        if virt.node(v).is_none() {
            violations.push(MappingViolation::UnknownVirtual { vnode: v });
        }
    }
    let mut load: BTreeMap<AgentId, i64> = BTreeMap::new();
    for vnode in &virt.nodes {
        match mapping.assignments.get(&vnode.id) {
            None => violations.push(MappingViolation::Unmapped { vnode: vnode.id }),
            Some(&p) if phys.node(p).is_none() => {
                violations.push(MappingViolation::UnknownPhysical { vnode: vnode.id, pnode: p })
            }
            Some(&p) => *load.entry(p).or_default() += vnode.demand,
        }
    }
    for (&p, &l) in &load {
        let capacity = phys.node(p).map_or(0, |n| n.capacity);
        if l > capacity {
            violations.push(MappingViolation::Capacity { pnode: p, load: l, capacity });
        }
    }
    for vnode in &virt.nodes {
        for &other in &vnode.neighbors {
            // each undirected link once
            if other <= vnode.id {
                continue;
            }
            let (Some(&a), Some(&b)) = (mapping.assignments.get(&vnode.id), mapping.assignments.get(&other))
            else {
                continue;
            };
            if !matches!(path_exists(phys, a, b), Ok(true)) {
                violations.push(MappingViolation::NoPath { from: vnode.id, to: other });
            }
        }
    }
    MappingCheck { valid: violations.is_empty(), violations }
}
