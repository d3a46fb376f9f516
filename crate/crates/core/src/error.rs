//! Error taxonomy for simulation operations.
//!
//! Every fallible operation returns [`SimError`]. Variants are deliberately
//! fine-grained so tests and capability probes can distinguish, say, a
//! rate-limit rejection from an authorization failure. Note that none of the
//! Superchain entry points can produce [`SimError::RateLimited`]; the probe
//! matrix relies on that.

use thiserror::Error;

/// Unified error type for all simulator modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("duplicate chain label '{0}'")]
    DuplicateChainLabel(String),
    #[error("unknown chain {0}")]
    UnknownChain(String),
    #[error("token '{token}' already deployed on chain {chain}")]
    DuplicateToken { token: String, chain: String },
    #[error("unknown token '{token}' on chain {chain}")]
    UnknownToken { token: String, chain: String },
    #[error("address {address} does not belong to chain {chain}")]
    ForeignAddress { address: String, chain: String },
    #[error("insufficient balance: have {have}, need {need}")]
    InsufficientBalance { have: u128, need: u128 },
    #[error("unauthorized: {0}")]
    Unauthorized(String),
    #[error("rate limited: capacity {capacity}, requested {requested}")]
    RateLimited { capacity: u128, requested: u128 },
    #[error("amount arithmetic overflow")]
    Overflow,
    #[error("invalid amount: {0}")]
    InvalidAmount(String),
    #[error("unknown peer for chain {0}")]
    UnknownPeer(String),
    #[error("peer mismatch: emitter is not the registered peer")]
    PeerMismatch,
    #[error("slippage: cleaned amount {clean} below floor {floor}")]
    Slippage { clean: u128, floor: u128 },
    #[error("contract is paused")]
    Paused,
    #[error("transfer still queued until tick {until}")]
    StillQueued { until: u64 },
    #[error("unknown queued transfer {0}")]
    UnknownQueueEntry(String),
    #[error("threshold {threshold} exceeds verifier count {count}")]
    ThresholdTooHigh { threshold: usize, count: usize },
    #[error("duplicate attestation from {0}")]
    DuplicateAttestation(String),
    #[error("attestation threshold not met: {have} of {need}")]
    BelowThreshold { have: usize, need: usize },
    #[error("message already relayed")]
    AlreadyRelayed,
    #[error("no token deployed at the expected address on the destination chain")]
    NoTokenAtAddress,
    #[error("chain {0} is not a Superchain member")]
    NotSuperchainMember(String),
    #[error("issuer has no configurability power over the lane committee")]
    LaneImmutable,
    #[error("latency for this route is fixed by the messaging layer")]
    LatencyFixed,
    #[error("invalid latency: must be at least 1 tick")]
    LatencyTooSmall,
    #[error("message {0} not found")]
    UnknownMessage(u64),
    #[error("message {msg} in state {state} cannot {action}")]
    BadMessageState {
        msg: u64,
        state: String,
        action: String,
    },
    #[error("unknown verifier '{0}'")]
    UnknownVerifier(String),
    #[error("verifier '{0}' is not compromised")]
    VerifierNotCompromised(String),
    #[error("payload decode error: {0}")]
    PayloadDecode(String),
    #[error("message inspector rejected the payload")]
    InspectorRejected,
    #[error("shared decimals {shared} exceed local decimals {local}")]
    SharedDecimalsTooLarge { shared: u8, local: u8 },
    #[error("sender not on allowlist")]
    NotAllowlisted,
    #[error("no lane configured from {src} to {dst}")]
    NoLane { src: String, dst: String },
    #[error("chain {0} is not supported by this pool")]
    UnsupportedRemoteChain(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("malformed event log: {0}")]
    MalformedLog(String),
}

/// Shorthand result alias used across the crate.
pub type SimResult<T> = Result<T, SimError>;
