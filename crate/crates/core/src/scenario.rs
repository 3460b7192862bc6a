//! Scenario files: the static model (networks, utilities, policies) plus
//! exploration bounds, read from JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{
    validate_physical, validate_virtual, AgentId, ItemId, PhysicalNetwork, Violation, VirtualNetwork,
};
use crate::policies::{AgentPolicy, UtilitySpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub physical: PhysicalNetwork,
    #[serde(rename = "virtual")]
    pub virtual_net: VirtualNetwork,
    pub utility: UtilitySpec,
    /// Agents without an entry never bid but still relay messages.
    #[serde(default)]
    pub policies: BTreeMap<AgentId, AgentPolicy>,
    #[serde(default, rename = "bound", skip_serializing_if = "Option::is_none")]
    pub bound_override: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<u64>,
    /// Opt-in required before any agent may rebid on lost items.
    #[serde(default)]
    pub adversarial: bool,
}

/// Scenario-level problem that is neither a network fact nor a JSON error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioIssue {
    Network(Violation),
    UnknownPolicyAgent {
        agent: AgentId,
    },
    UnknownBaseAgent {
        agent: AgentId,
    },
    UnknownBaseItem {
        agent: AgentId,
        item: ItemId,
    },
    /// `rebid_on_lost` set without `"adversarial": true`.
    PolicyGate {
        agent: AgentId,
    },
}

impl std::fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioIssue::Network(v) => write!(f, "{v}"),
            ScenarioIssue::UnknownPolicyAgent { agent } => {
                write!(f, "policies.{agent}: no physical node with this id")
            }
            ScenarioIssue::UnknownBaseAgent { agent } => {
                write!(f, "utility.base.{agent}: no physical node with this id")
            }
            ScenarioIssue::UnknownBaseItem { agent, item } => {
                write!(f, "utility.base.{agent}.{item}: no virtual node with this id")
            }
            ScenarioIssue::PolicyGate { agent } => {
                write!(f, "policies.{agent}.rebid_on_lost: requires \"adversarial\": true")
            }
        }
    }
}

fn join(issues: &[ScenarioIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("invalid scenario: {}", join(.0))]
    Invalid(Vec<ScenarioIssue>),
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        match e.classify() {
            serde_json::error::Category::Data => ScenarioError::Schema { line, column, message },
            _ => ScenarioError::Parse { line, column, message },
        }
    }
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Every problem with the scenario, empty when it is usable.
    pub fn issues(&self) -> Vec<ScenarioIssue> {
        let mut out: Vec<ScenarioIssue> = validate_physical(&self.physical)
            .into_iter()
            .chain(validate_virtual(&self.virtual_net))
            .map(ScenarioIssue::Network)
            .collect();
        let agents: BTreeSet<AgentId> = self.physical.ids().into_iter().collect();
        let items: BTreeSet<ItemId> = self.virtual_net.ids().into_iter().collect();
        for (&agent, policy) in &self.policies {
            if !agents.contains(&agent) {
                out.push(ScenarioIssue::UnknownPolicyAgent { agent });
            }
            if policy.rebid_on_lost && !self.adversarial {
                out.push(ScenarioIssue::PolicyGate { agent });
            }
        }
        for (&agent, row) in &self.utility.base {
            if !agents.contains(&agent) {
                out.push(ScenarioIssue::UnknownBaseAgent { agent });
            }
            for &item in row.keys() {
                if !items.contains(&item) {
                    out.push(ScenarioIssue::UnknownBaseItem { agent, item });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(issues))
        }
    }

    /// Agent ids in ascending order.
    pub fn agents(&self) -> Vec<AgentId> {
        self.physical.ids()
    }

    /// Item ids in ascending order.
    pub fn items(&self) -> Vec<ItemId> {
        self.virtual_net.ids()
    }

    pub fn policy(&self, agent: AgentId) -> AgentPolicy {
        self.policies.get(&agent).copied().unwrap_or_default()
    }

    pub fn capacity(&self, agent: AgentId) -> u64 {
        self.physical.node(agent).map_or(0, |n| n.capacity.max(0) as u64)
    }

    pub fn neighbors(&self, agent: AgentId) -> Vec<AgentId> {
        self.physical.node(agent).map(|n| n.neighbors.iter().copied().collect()).unwrap_or_default()
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    Scenario::from_json(&text)
}
