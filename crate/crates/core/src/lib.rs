//! Max-consensus auctions with pluggable bidding policies, a bounded
//! exhaustive convergence checker, and a brute-force allocation oracle.
//!
//! Agents ([`netmodel::AgentId`]) bid on items ([`netmodel::ItemId`]) and
//! exchange their views until every view agrees on the highest bid per item.
//! [`protocol`] holds the state machine, [`explorer`] checks every message
//! interleaving of a [`scenario::Scenario`], and [`oracle`] computes the
//! optimum the protocol is measured against.
//!
//! ```
//! use mca::explorer::{default_bound, default_slack, enumerate};
//! use mca::scenario::Scenario;
//!
//! let s = Scenario::from_json(r#"{
//!     "physical": [{"id": 1, "capacity": 10, "neighbors": [2]},
//!                  {"id": 2, "capacity": 10, "neighbors": [1]}],
//!     "virtual": [{"id": 1, "demand": 1, "neighbors": []}],
//!     "utility": {"kind": "submodular-residual", "slope": 0,
//!                 "base": {"1": {"1": 3}, "2": {"1": 5}}},
//!     "policies": {"1": {"target_items": 1}, "2": {"target_items": 1}}
//! }"#).unwrap();
//! let v = enumerate(&s, default_bound(&s).unwrap(), default_slack(&s).unwrap()).unwrap();
//! assert!(v.converged());
//! ```

pub mod cli;
pub mod explorer;
pub mod netmodel;
pub mod oracle;
pub mod policies;
pub mod protocol;
pub mod scenario;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scenarios.md")]
mod book_scenarios {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/utilities.md")]
mod book_utilities {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/protocol.md")]
mod book_protocol {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/exploration.md")]
mod book_exploration {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/traces.md")]
mod book_traces {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/oracle.md")]
mod book_oracle {}
