//! Append-only event log.
//!
//! Every state change in a run is recorded as one `Event`, ordered by
//! `(tick, seq)`. The log is the ground truth for the conservation oracle
//! and for report building: both read events only and never module state,
//! which is what makes replay-from-log byte-identical to the live run.
//!
//! Serialization is JSON Lines with externally tagged event kinds. Amounts
//! are 128-bit integers; they serialize as JSON numbers through the
//! streaming serializer, so no event may be routed through a buffered
//! `Value` (flattened or internally tagged representations are off-limits
//! here).

use serde::{Deserialize, Serialize};

use crate::chain::{AccountId, Amount, ChainId, Tick};
use crate::error::{SimError, SimResult};
use crate::ledger::TokenId;
use crate::message::MsgId;
use crate::payload::PayloadDigest;
use crate::verify::VerifierId;

/// The five token standards under simulation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Standard {
    Xerc20,
    Oft,
    Ntt,
    Cct,
    Superchain,
}

impl Standard {
    pub const ALL: [Standard; 5] = [
        Standard::Xerc20,
        Standard::Oft,
        Standard::Ntt,
        Standard::Cct,
        Standard::Superchain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Standard::Xerc20 => "xerc20",
            Standard::Oft => "oft",
            Standard::Ntt => "ntt",
            Standard::Cct => "cct",
            Standard::Superchain => "superchain",
        }
    }
}

impl std::fmt::Display for Standard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a supply or custody change came from; the conservation oracle keys
/// its bookkeeping off this tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupplyOrigin {
    /// Initial distribution at deployment.
    Genesis,
    /// Source-side action of a cross-chain send that consumed rate-limit
    /// capacity (when the standard has one) and emitted `msg`.
    Send { msg: MsgId },
    /// Source-side action of a queued transfer completed after its window;
    /// emitted `msg` without consuming capacity.
    QueuedSend { msg: MsgId },
    /// Destination-side action of delivering `msg`.
    Delivery { msg: MsgId },
    /// Destination-side action of completing an inbound-queued delivery of
    /// `msg` after its window.
    QueueRelease { msg: MsgId },
    /// Funds moved into or out of queue custody.
    Queue,
    /// Queue custody returned on cancellation.
    QueueCancel,
    /// Lockbox deposit or withdrawal leg.
    Lockbox,
    /// A whitelisted bridge minting or burning directly on one chain,
    /// consuming its rate limit (adversarial but bounded).
    BridgeLocal { bridge: AccountId },
    /// Injected fault with no legitimate explanation; the oracle must flag
    /// any run containing one.
    Fault,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferPurpose {
    User,
    Fee,
}

/// Fee components, reported per transfer.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FeeComponent {
    /// Payload-size-based messaging cost (OFT).
    Messaging,
    /// Protocol-level cut behind the OFT fee switch.
    Protocol,
    /// Fixed per-transfer fee in USD units (CCT non-LockUnlock modes).
    Fixed,
    /// Percentage of the moved amount (CCT LockUnlock modes).
    Percentage,
    /// Fast-liquidity fee charged by a bridge fronting funds.
    FastLiquidity,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeeCurrency {
    /// Units of the transferred token, moved on the ledger.
    Token(TokenId),
    /// Abstract USD-denominated units, recorded but not ledgered.
    UsdUnits,
    /// Abstract native-gas units, recorded but not ledgered.
    NativeUnits,
}

/// Which limiter a configuration event refers to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitScope {
    MintBy { bridge: AccountId },
    BurnBy { bridge: AccountId },
    Outbound,
    OutboundTo { remote: ChainId },
    InboundFrom { remote: ChainId },
}

/// Standard-specific details recorded when a deployment is bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingDetail {
    Xerc20,
    Xerc20Lockbox { legacy_token: TokenId },
    Oft { local_decimals: u8, shared_decimals: u8, adapter: bool },
    Ntt { hub_spoke: bool, hub: Option<ChainId> },
    Cct { mode: String, native: bool },
    Superchain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    // ── Run and topology setup ──
    RunStarted {
        seed: u64,
        config_digest: String,
        scenario: String,
    },
    ChainCreated {
        chain: ChainId,
        label: String,
        block_interval: u64,
        superchain_member: bool,
        is_ethereum: bool,
    },
    TokenDeployed {
        token: TokenId,
        chain: ChainId,
        decimals: u8,
        initial_supply: Amount,
    },
    StandardBound {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        contract: AccountId,
        detail: BindingDetail,
    },
    RateLimitConfigured {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        scope: LimitScope,
        limit: Amount,
        window: Tick,
    },
    RouteLatencySet {
        src: ChainId,
        dst: ChainId,
        latency: Tick,
    },
    VerifierCompromised {
        verifier: VerifierId,
        withholds_honest: bool,
    },
    PauseSet {
        standard: Standard,
        token: Option<TokenId>,
        chain: ChainId,
        paused: bool,
    },

    // ── Message lifecycle ──
    MessageEmitted {
        msg: MsgId,
        src: ChainId,
        dst: ChainId,
        emitter: AccountId,
        receiver: AccountId,
        nonce: u64,
        latency: Tick,
        forged: bool,
        payload: String,
    },
    AttestationRecorded {
        msg: MsgId,
        verifier: VerifierId,
        honest: bool,
    },
    QuorumReached {
        msg: MsgId,
    },
    MessageDelivered {
        msg: MsgId,
    },
    MessageRejected {
        msg: MsgId,
        reason: String,
    },
    MessageHeldPaused {
        msg: MsgId,
    },

    // ── Ledger changes ──
    Minted {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        to: AccountId,
        amount: Amount,
        origin: SupplyOrigin,
    },
    Burned {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        from: AccountId,
        amount: Amount,
        origin: SupplyOrigin,
    },
    /// Supply-neutral move of `amount` from `from` into `custodian`.
    Locked {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        custodian: AccountId,
        from: AccountId,
        amount: Amount,
        origin: SupplyOrigin,
    },
    /// Supply-neutral move of `amount` out of `custodian` to `to`.
    Released {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        custodian: AccountId,
        to: AccountId,
        amount: Amount,
        origin: SupplyOrigin,
    },
    Transferred {
        token: TokenId,
        chain: ChainId,
        from: AccountId,
        to: AccountId,
        amount: Amount,
        purpose: TransferPurpose,
    },

    // ── Queue lifecycle ──
    OutboundQueued {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        seq: u64,
        sender: AccountId,
        dst: ChainId,
        recipient: AccountId,
        amount: Amount,
    },
    OutboundQueueCompleted {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        seq: u64,
        msg: MsgId,
    },
    OutboundQueueCancelled {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        seq: u64,
        amount: Amount,
    },
    InboundQueued {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        digest: PayloadDigest,
        msg: MsgId,
        recipient: AccountId,
        amount: Amount,
    },
    InboundQueueCompleted {
        standard: Standard,
        token: TokenId,
        chain: ChainId,
        digest: PayloadDigest,
        msg: MsgId,
    },

    // ── Transfer lifecycle (report building) ──
    TransferInitiated {
        transfer: u64,
        standard: Standard,
        token: TokenId,
        src: ChainId,
        dst: ChainId,
        sender: AccountId,
        recipient: AccountId,
        amount_sent: Amount,
        amount_dst_expected: Amount,
        msg: Option<MsgId>,
        queued_seq: Option<u64>,
    },
    TransferSettled {
        transfer: u64,
        msg: MsgId,
        amount_received: Amount,
    },
    TransferStranded {
        transfer: u64,
        reason: String,
    },
    TransferCancelled {
        transfer: u64,
    },
    FeeCharged {
        transfer: u64,
        standard: Standard,
        component: FeeComponent,
        currency: FeeCurrency,
        amount: Amount,
    },
}

impl EventKind {
    /// Which module produced this record. Derived, but serialized so logs
    /// can be filtered with line tools.
    pub fn module(&self) -> &'static str {
        use EventKind::*;
        match self {
            RunStarted { .. } => "scenario",
            ChainCreated { .. } | TokenDeployed { .. } | Transferred { .. } => "chain",
            MessageEmitted { .. }
            | AttestationRecorded { .. }
            | QuorumReached { .. }
            | MessageDelivered { .. }
            | MessageRejected { .. }
            | MessageHeldPaused { .. }
            | RouteLatencySet { .. }
            | VerifierCompromised { .. } => "message",
            StandardBound { standard, .. }
            | RateLimitConfigured { standard, .. }
            | PauseSet { standard, .. }
            | Minted { standard, .. }
            | Burned { standard, .. }
            | Locked { standard, .. }
            | Released { standard, .. }
            | OutboundQueued { standard, .. }
            | OutboundQueueCompleted { standard, .. }
            | OutboundQueueCancelled { standard, .. }
            | InboundQueued { standard, .. }
            | InboundQueueCompleted { standard, .. }
            | TransferInitiated { standard, .. }
            | FeeCharged { standard, .. } => standard.name(),
            TransferSettled { .. } | TransferStranded { .. } | TransferCancelled { .. } => {
                "scenario"
            }
        }
    }
}

/// One log record. `seq` is globally unique and increasing; ties on `tick`
/// are ordered by `seq`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub tick: Tick,
    pub seq: u64,
    pub module: String,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Default)]
pub struct EventLog {
    events: Vec<Event>,
    next_seq: u64,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, tick: Tick, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let module = kind.module().to_string();
        self.events.push(Event {
            tick,
            seq,
            module,
            kind,
        });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Serialize to JSON Lines. Stable: field order is declaration order and
    /// every map in the schema is ordered.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 128);
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("event serialization"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> SimResult<Vec<Event>> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ev: Event = serde_json::from_str(line)
                .map_err(|e| SimError::MalformedLog(format!("line {}: {e}", i + 1)))?;
            events.push(ev);
        }
        Ok(events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_roundtrip_preserves_u128_amounts() {
        let mut log = EventLog::new();
        let big = u128::MAX - 7;
        log.append(
            0,
            EventKind::Minted {
                standard: Standard::Xerc20,
                token: TokenId::new("TKN"),
                chain: ChainId(1),
                to: AccountId::derive("user", "alice"),
                amount: big,
                origin: SupplyOrigin::BridgeLocal {
                    bridge: AccountId::derive("contract", "bridge"),
                },
            },
        );
        let text = log.to_jsonl();
        let parsed = EventLog::parse_jsonl(&text).unwrap();
        assert_eq!(parsed, log.events);
        match &parsed[0].kind {
            EventKind::Minted { amount, .. } => assert_eq!(*amount, big),
            other => panic!("unexpected kind {other:?}"),
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let mut log = EventLog::new();
        for i in 0..10u64 {
            log.append(
                i,
                EventKind::QuorumReached { msg: MsgId(i) },
            );
        }
        assert_eq!(log.to_jsonl(), log.to_jsonl());
    }

    #[test]
    fn malformed_line_reports_location() {
        let err = EventLog::parse_jsonl("{\"tick\":0}\n").unwrap_err();
        match err {
            SimError::MalformedLog(msg) => assert!(msg.contains("line 1")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sequence_numbers_are_dense() {
        let mut log = EventLog::new();
        log.append(3, EventKind::QuorumReached { msg: MsgId(0) });
        log.append(3, EventKind::QuorumReached { msg: MsgId(1) });
        log.append(4, EventKind::QuorumReached { msg: MsgId(2) });
        let seqs: Vec<_> = log.events().iter().map(|e| e.seq).collect();
        assert_eq!(seqs, vec![0, 1, 2]);
    }
}
