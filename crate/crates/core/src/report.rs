//! Run reports: a structured summary computed from the event log alone.
//!
//! [`RunReport::from_events`] reads nothing but the log, so replaying a
//! stored log reproduces the report byte for byte. Module state never
//! enters here; anything worth reporting must have been evented.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{AccountId, Amount, ChainId, Tick};
use crate::event::{Event, EventKind, FeeComponent, FeeCurrency, Standard};
use crate::ledger::TokenId;
use crate::message::MsgId;
use crate::oracle::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferStatus {
    Settled,
    Stranded,
    Cancelled,
    /// Parked in an outbound queue, never completed nor cancelled.
    Queued,
    /// Message emitted but no terminal event by end of log.
    InFlight,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeePaid {
    pub component: FeeComponent,
    pub currency: FeeCurrency,
    pub amount: Amount,
}

/// One user-visible cross-chain transfer, assembled from its lifecycle
/// events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub transfer: u64,
    pub standard: Standard,
    pub token: TokenId,
    pub src: ChainId,
    pub dst: ChainId,
    pub sender: AccountId,
    pub recipient: AccountId,
    pub amount_sent: Amount,
    pub amount_dst_expected: Amount,
    pub amount_received: Option<Amount>,
    pub fees: Vec<FeePaid>,
    pub initiated_tick: Tick,
    pub settled_tick: Option<Tick>,
    /// Destination delivery tick minus message emission tick. Absent
    /// until the message is delivered.
    pub message_latency: Option<Tick>,
    pub status: TransferStatus,
    /// Failure detail for stranded transfers.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: u64,
    pub min: Tick,
    pub max: Tick,
    pub total: u64,
}

impl LatencyStats {
    fn record(&mut self, latency: Tick) {
        if self.count == 0 {
            self.min = latency;
            self.max = latency;
        } else {
            self.min = self.min.min(latency);
            self.max = self.max.max(latency);
        }
        self.count += 1;
        self.total += latency;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeTotal {
    pub standard: Standard,
    pub component: FeeComponent,
    pub currency: FeeCurrency,
    pub total: Amount,
}

/// Full result of one scenario run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub config_digest: String,
    pub ticks: Tick,
    pub events: u64,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    pub transfers: Vec<TransferRecord>,
    /// Message latency distribution per standard, over delivered messages
    /// belonging to transfers.
    pub latency: BTreeMap<String, LatencyStats>,
    pub fees: Vec<FeeTotal>,
    /// Value rejected at destination and not recoverable, per token.
    pub stranded: BTreeMap<TokenId, Amount>,
    /// Messages with no terminal event by end of log.
    pub stalled_messages: Vec<MsgId>,
}

impl RunReport {
    /// Assemble the report for `events`, attaching `verdicts` (themselves
    /// log-derived). Panics on a log that reuses a transfer id, which no
    /// well-formed run produces.
    pub fn from_events(events: &[Event], verdicts: Vec<Verdict>) -> Self {
        let mut scenario = String::new();
        let mut seed = 0u64;
        let mut config_digest = String::new();
        let mut transfers: Vec<TransferRecord> = Vec::new();
        let mut index: BTreeMap<u64, usize> = BTreeMap::new();
        // (token, src chain, queue seq) -> transfer, for linking queue
        // completions back to their initiation.
        let mut queued: BTreeMap<(TokenId, ChainId, u64), u64> = BTreeMap::new();
        let mut msg_owner: BTreeMap<MsgId, u64> = BTreeMap::new();
        let mut msg_emit: BTreeMap<MsgId, Tick> = BTreeMap::new();
        let mut msg_open: BTreeMap<MsgId, bool> = BTreeMap::new();
        let mut latency: BTreeMap<String, LatencyStats> = BTreeMap::new();
        let mut fee_totals: BTreeMap<(Standard, FeeComponent, FeeCurrency), Amount> =
            BTreeMap::new();
        let mut stranded: BTreeMap<TokenId, Amount> = BTreeMap::new();
        let mut ticks = 0;

        for ev in events {
            ticks = ticks.max(ev.tick);
            match &ev.kind {
                EventKind::RunStarted {
                    seed: s,
                    config_digest: digest,
                    scenario: name,
                } => {
                    seed = *s;
                    config_digest = digest.clone();
                    scenario = name.clone();
                }
                EventKind::MessageEmitted { msg, .. } => {
                    msg_emit.insert(*msg, ev.tick);
                    msg_open.insert(*msg, true);
                }
                EventKind::MessageDelivered { msg } => {
                    msg_open.insert(*msg, false);
                    if let Some(owner) = msg_owner.get(msg) {
                        let rec = &mut transfers[index[owner]];
                        if let Some(emit) = msg_emit.get(msg) {
                            let delta = ev.tick - emit;
                            rec.message_latency = Some(delta);
                            latency
                                .entry(rec.standard.name().to_string())
                                .or_default()
                                .record(delta);
                        }
                    }
                }
                EventKind::MessageRejected { msg, .. } => {
                    msg_open.insert(*msg, false);
                }
                EventKind::TransferInitiated {
                    transfer,
                    standard,
                    token,
                    src,
                    dst,
                    sender,
                    recipient,
                    amount_sent,
                    amount_dst_expected,
                    msg,
                    queued_seq,
                } => {
                    assert!(
                        !index.contains_key(transfer),
                        "transfer id {transfer} reused in log"
                    );
                    let status = if msg.is_some() {
                        TransferStatus::InFlight
                    } else {
                        TransferStatus::Queued
                    };
                    if let Some(m) = msg {
                        msg_owner.insert(*m, *transfer);
                    }
                    if let Some(seq) = queued_seq {
                        queued.insert((token.clone(), *src, *seq), *transfer);
                    }
                    index.insert(*transfer, transfers.len());
                    transfers.push(TransferRecord {
                        transfer: *transfer,
                        standard: *standard,
                        token: token.clone(),
                        src: *src,
                        dst: *dst,
                        sender: *sender,
                        recipient: *recipient,
                        amount_sent: *amount_sent,
                        amount_dst_expected: *amount_dst_expected,
                        amount_received: None,
                        fees: Vec::new(),
                        initiated_tick: ev.tick,
                        settled_tick: None,
                        message_latency: None,
                        status,
                        reason: None,
                    });
                }
                EventKind::OutboundQueueCompleted {
                    token, chain, seq, msg, ..
                } => {
                    if let Some(owner) = queued.get(&(token.clone(), *chain, *seq)) {
                        msg_owner.insert(*msg, *owner);
                        let rec = &mut transfers[index[owner]];
                        if rec.status == TransferStatus::Queued {
                            rec.status = TransferStatus::InFlight;
                        }
                    }
                }
                EventKind::TransferSettled {
                    transfer,
                    amount_received,
                    ..
                } => {
                    if let Some(&i) = index.get(transfer) {
                        let rec = &mut transfers[i];
                        rec.status = TransferStatus::Settled;
                        rec.amount_received = Some(*amount_received);
                        rec.settled_tick = Some(ev.tick);
                    }
                }
                EventKind::TransferStranded { transfer, reason } => {
                    if let Some(&i) = index.get(transfer) {
                        let rec = &mut transfers[i];
                        rec.status = TransferStatus::Stranded;
                        rec.reason = Some(reason.clone());
                    }
                }
                EventKind::TransferCancelled { transfer } => {
                    if let Some(&i) = index.get(transfer) {
                        transfers[i].status = TransferStatus::Cancelled;
                    }
                }
                EventKind::FeeCharged {
                    transfer,
                    standard,
                    component,
                    currency,
                    amount,
                } => {
                    if let Some(&i) = index.get(transfer) {
                        transfers[i].fees.push(FeePaid {
                            component: *component,
                            currency: currency.clone(),
                            amount: *amount,
                        });
                    }
                    *fee_totals
                        .entry((*standard, *component, currency.clone()))
                        .or_default() += amount;
                }
                _ => {}
            }
        }

        // Rejected deliveries strand their transfer's expected destination
        // amount; totals are in destination-local units.
        for rec in &transfers {
            if rec.status == TransferStatus::Stranded {
                *stranded.entry(rec.token.clone()).or_default() += rec.amount_dst_expected;
            }
        }

        let stalled_messages: Vec<MsgId> = msg_open
            .iter()
            .filter(|(_, open)| **open)
            .map(|(msg, _)| *msg)
            .collect();

        let fees = fee_totals
            .into_iter()
            .map(|((standard, component, currency), total)| FeeTotal {
                standard,
                component,
                currency,
                total,
            })
            .collect();

        let passed = verdicts.iter().all(Verdict::passed);
        RunReport {
            scenario,
            seed,
            config_digest,
            ticks,
            events: events.len() as u64,
            passed,
            verdicts,
            transfers,
            latency,
            fees,
            stranded,
            stalled_messages,
        }
    }

    /// Fees charged to one transfer, summed per component and currency.
    pub fn transfer_fees(&self, transfer: u64) -> BTreeMap<(FeeComponent, FeeCurrency), Amount> {
        let mut out = BTreeMap::new();
        if let Some(rec) = self.transfers.iter().find(|r| r.transfer == transfer) {
            for fee in &rec.fees {
                *out.entry((fee.component, fee.currency.clone())).or_default() += fee.amount;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Address;
    use crate::event::EventLog;
    use crate::sim::Simulation;

    fn two_chain_run() -> Simulation {
        let mut sim = Simulation::new();
        let a = sim.add_chain("alpha", 1, false, false).unwrap();
        let b = sim.add_chain("beta", 1, false, false).unwrap();
        let token = TokenId::new("TKN");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        sim.deploy_token(&token, a, 18, &[(alice, 10_000)]).unwrap();
        sim.deploy_token(&token, b, 18, &[]).unwrap();
        let bridge_value = AccountId::derive("contract", "bridge:relay");
        for chain in [a, b] {
            let issuer = Address::user(chain, "issuer");
            let Simulation { core, xerc20, .. } = &mut sim;
            xerc20.deploy(core, &token, chain, issuer).unwrap();
            xerc20
                .set_limits(
                    core,
                    &token,
                    chain,
                    issuer,
                    Address::new(chain, bridge_value),
                    50_000,
                    50_000,
                    100,
                )
                .unwrap();
        }
        {
            let Simulation { core, xerc20, .. } = &mut sim;
            core.record(EventKind::RunStarted {
                seed: 11,
                config_digest: "digest".into(),
                scenario: "report-test".into(),
            });
            xerc20
                .send(
                    core,
                    &token,
                    a,
                    Address::new(a, bridge_value),
                    alice,
                    b,
                    bob,
                    1_500,
                )
                .unwrap();
        }
        sim.run_ticks(10).unwrap();
        sim
    }

    #[test]
    fn settled_transfer_carries_latency_and_amounts() {
        let sim = two_chain_run();
        let report = RunReport::from_events(sim.core.log.events(), Vec::new());
        assert_eq!(report.scenario, "report-test");
        assert_eq!(report.seed, 11);
        assert_eq!(report.transfers.len(), 1);
        let rec = &report.transfers[0];
        assert_eq!(rec.status, TransferStatus::Settled);
        assert_eq!(rec.amount_sent, 1_500);
        assert_eq!(rec.amount_received, Some(1_500));
        assert_eq!(rec.message_latency, Some(3));
        let stats = &report.latency["xerc20"];
        assert_eq!((stats.count, stats.min, stats.max), (1, 3, 3));
        assert!(report.stalled_messages.is_empty());
    }

    #[test]
    fn report_roundtrips_through_json() {
        let sim = two_chain_run();
        let oracle = crate::oracle::Oracle::replay(sim.core.log.events());
        let report = RunReport::from_events(sim.core.log.events(), oracle.check());
        let parsed = RunReport::from_json(&report.to_json()).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(parsed.to_json(), report.to_json());
    }

    #[test]
    fn report_is_a_pure_function_of_the_log() {
        let sim = two_chain_run();
        let text = sim.core.log.to_jsonl();
        let events = EventLog::parse_jsonl(&text).unwrap();
        let live = RunReport::from_events(
            sim.core.log.events(),
            crate::oracle::Oracle::replay(sim.core.log.events()).check(),
        );
        let replayed =
            RunReport::from_events(&events, crate::oracle::Oracle::replay(&events).check());
        assert_eq!(live.to_json(), replayed.to_json());
    }

    #[test]
    fn unsettled_message_is_reported_stalled() {
        let mut sim = two_chain_run();
        let a = ChainId(0);
        let b = ChainId(1);
        let token = TokenId::new("TKN");
        let alice = Address::user(a, "alice");
        let bridge_value = AccountId::derive("contract", "bridge:relay");
        {
            let Simulation { core, xerc20, .. } = &mut sim;
            xerc20
                .send(
                    core,
                    &token,
                    a,
                    Address::new(a, bridge_value),
                    alice,
                    b,
                    Address::user(b, "bob"),
                    700,
                )
                .unwrap();
        }
        // No tick advance: the message stays in flight.
        let report = RunReport::from_events(sim.core.log.events(), Vec::new());
        assert_eq!(report.stalled_messages.len(), 1);
        let rec = report.transfers.iter().find(|r| r.amount_sent == 700).unwrap();
        assert_eq!(rec.status, TransferStatus::InFlight);
    }
}
