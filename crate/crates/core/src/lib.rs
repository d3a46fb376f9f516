//! Deterministic multi-chain simulator for cross-chain fungible-token
//! standards.
//!
//! Five token-bridging standards run as executable state machines over a
//! shared set of simulated chains, a pluggable message-verification layer,
//! and one append-only event log. Everything is integer arithmetic over
//! ordered maps driven by a global tick counter, so a run is a pure
//! function of its configuration and seed, and the event log alone is
//! enough to replay and audit all supply movements.

pub mod campaign;
pub mod cct;
pub mod config;
pub mod chain;
pub mod error;
pub mod event;
pub mod ledger;
pub mod matrix;
pub mod message;
pub mod ntt;
pub mod oft;
pub mod oracle;
pub mod payload;
pub mod ratelimit;
pub mod report;
pub mod run;
pub mod sim;
pub mod superchain;
pub mod verify;
pub mod xerc20;

pub use campaign::{CampaignConfig, CampaignSummary, InvariantReport};
pub use config::{parse_config, ConfigErrors, ScenarioConfig};
pub use chain::{AccountId, Address, Amount, ChainId, SimClock, Tick};
pub use error::{SimError, SimResult};
pub use event::{Event, EventKind, EventLog, Standard, SupplyOrigin};
pub use ledger::TokenId;
pub use matrix::{capability_matrix, emit_capability_matrix, run_probes, CapabilityMatrix, ProbeRun};
pub use message::{CrossChainMessage, MsgId, MsgStatus};
pub use oracle::{Oracle, Outcome, SupplySnapshot, Verdict};
pub use ratelimit::RateLimitState;
pub use report::{RunReport, TransferRecord, TransferStatus};
pub use run::{replay_report, run_scenario, ScenarioOutcome};
pub use sim::{AdversaryAction, DeliveryOutcome, PendingReason, SimCore, Simulation};
pub use verify::{VerificationModel, VerifierId};
