//! Cross-chain message transport state.
//!
//! A message moves along `Emitted → Attested → {Delivered, HeldPaused →
//! Delivered, Rejected}` and nothing else; `MessageBook` owns every message
//! in a run and enforces the transitions. Quorum evaluation and delivery
//! scheduling live in the simulation loop; this module is pure state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::{Address, ChainId, Tick};
use crate::error::{SimError, SimResult};
use crate::verify::{VerificationModel, VerifierId};

/// Unique message identifier, assigned in emission order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct MsgId(pub u64);

impl fmt::Display for MsgId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "msg#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsgStatus {
    Emitted,
    Attested,
    Delivered,
    Rejected,
    HeldPaused,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossChainMessage {
    pub id: MsgId,
    pub src: ChainId,
    pub dst: ChainId,
    pub emitter: Address,
    pub intended_receiver: Address,
    pub payload: Vec<u8>,
    /// Per-emitter sequence number, strictly increasing.
    pub nonce: u64,
    pub emitted_tick: Tick,
    /// Ticks from emission until the message becomes deliverable.
    pub latency: Tick,
    pub status: MsgStatus,
    /// Verification model snapshotted at emission; later reconfiguration of
    /// the token does not affect in-flight messages.
    pub model: VerificationModel,
    /// True for adversarially injected messages with no real source action.
    pub forged: bool,
    pub attested: BTreeSet<VerifierId>,
    pub delivered_tick: Option<Tick>,
    pub reject_reason: Option<String>,
}

impl CrossChainMessage {
    pub fn quorum_met(&self) -> bool {
        self.model.quorum_met(&self.attested)
    }

    pub fn deliverable_at(&self) -> Tick {
        self.emitted_tick.saturating_add(self.latency)
    }

    fn transition_allowed(from: MsgStatus, to: MsgStatus) -> bool {
        use MsgStatus::*;
        matches!(
            (from, to),
            (Emitted, Attested)
                | (Attested, Delivered)
                | (Attested, HeldPaused)
                | (Attested, Rejected)
                | (HeldPaused, Delivered)
        )
    }

    pub fn set_status(&mut self, to: MsgStatus) -> SimResult<()> {
        if !Self::transition_allowed(self.status, to) {
            return Err(SimError::BadMessageState {
                msg: self.id.0,
                state: format!("{:?}", self.status),
                action: format!("transition to {to:?}"),
            });
        }
        self.status = to;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct MessageBook {
    messages: BTreeMap<MsgId, CrossChainMessage>,
    next_id: u64,
    nonces: BTreeMap<Address, u64>,
}

impl MessageBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a new message in Emitted status with a fresh per-emitter
    /// nonce. Forged messages claim an emitter and consume its nonce like a
    /// real emission would.
    #[allow(clippy::too_many_arguments)]
    pub fn emit(
        &mut self,
        src: ChainId,
        emitter: Address,
        dst: ChainId,
        intended_receiver: Address,
        payload: Vec<u8>,
        model: VerificationModel,
        latency: Tick,
        now: Tick,
        forged: bool,
    ) -> SimResult<MsgId> {
        if src == dst {
            return Err(SimError::Config(
                "message source and destination chains must differ".into(),
            ));
        }
        if emitter.chain != src {
            return Err(SimError::ForeignAddress {
                address: emitter.to_string(),
                chain: src.to_string(),
            });
        }
        if intended_receiver.chain != dst {
            return Err(SimError::ForeignAddress {
                address: intended_receiver.to_string(),
                chain: dst.to_string(),
            });
        }
        model.validate()?;
        let id = MsgId(self.next_id);
        self.next_id += 1;
        let nonce_slot = self.nonces.entry(emitter).or_insert(0);
        let nonce = *nonce_slot;
        *nonce_slot += 1;
        self.messages.insert(
            id,
            CrossChainMessage {
                id,
                src,
                dst,
                emitter,
                intended_receiver,
                payload,
                nonce,
                emitted_tick: now,
                latency,
                status: MsgStatus::Emitted,
                model,
                forged,
                attested: BTreeSet::new(),
                delivered_tick: None,
                reject_reason: None,
            },
        );
        Ok(id)
    }

    /// Nonce the next emission from `emitter` will carry; lets senders
    /// embed it in a payload before calling `emit`.
    pub fn peek_nonce(&self, emitter: Address) -> u64 {
        self.nonces.get(&emitter).copied().unwrap_or(0)
    }

    pub fn get(&self, id: MsgId) -> SimResult<&CrossChainMessage> {
        self.messages.get(&id).ok_or(SimError::UnknownMessage(id.0))
    }

    pub fn get_mut(&mut self, id: MsgId) -> SimResult<&mut CrossChainMessage> {
        self.messages
            .get_mut(&id)
            .ok_or(SimError::UnknownMessage(id.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CrossChainMessage> {
        self.messages.values()
    }

    /// Ids of messages in one of the given statuses, in id order.
    pub fn ids_with_status(&self, statuses: &[MsgStatus]) -> Vec<MsgId> {
        self.messages
            .values()
            .filter(|m| statuses.contains(&m.status))
            .map(|m| m.id)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Route latency table: per (src, dst) override over a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteTable {
    pub default_latency: Tick,
    overrides: BTreeMap<(ChainId, ChainId), Tick>,
}

impl Default for RouteTable {
    fn default() -> Self {
        // Non-Superchain routes default to 3 ticks of attestation latency.
        Self {
            default_latency: 3,
            overrides: BTreeMap::new(),
        }
    }
}

impl RouteTable {
    pub fn latency(&self, src: ChainId, dst: ChainId) -> Tick {
        self.overrides
            .get(&(src, dst))
            .copied()
            .unwrap_or(self.default_latency)
    }

    pub fn set_latency(&mut self, src: ChainId, dst: ChainId, ticks: Tick) -> SimResult<()> {
        if ticks == 0 {
            return Err(SimError::LatencyTooSmall);
        }
        self.overrides.insert((src, dst), ticks);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Address;

    fn book_and_msg() -> (MessageBook, MsgId) {
        let mut book = MessageBook::new();
        let id = book
            .emit(
                ChainId(0),
                Address::contract(ChainId(0), "emitter"),
                ChainId(1),
                Address::contract(ChainId(1), "receiver"),
                vec![1, 2, 3],
                VerificationModel::SuperchainMessenger,
                1,
                0,
                false,
            )
            .unwrap();
        (book, id)
    }

    #[test]
    fn nonces_increase_per_emitter() {
        let (mut book, first) = book_and_msg();
        let emitter = Address::contract(ChainId(0), "emitter");
        let other = Address::contract(ChainId(0), "other");
        let second = book
            .emit(
                ChainId(0),
                emitter,
                ChainId(1),
                Address::contract(ChainId(1), "receiver"),
                vec![],
                VerificationModel::SuperchainMessenger,
                1,
                0,
                false,
            )
            .unwrap();
        let third = book
            .emit(
                ChainId(0),
                other,
                ChainId(1),
                Address::contract(ChainId(1), "receiver"),
                vec![],
                VerificationModel::SuperchainMessenger,
                1,
                0,
                false,
            )
            .unwrap();
        assert_eq!(book.get(first).unwrap().nonce, 0);
        assert_eq!(book.get(second).unwrap().nonce, 1);
        assert_eq!(book.get(third).unwrap().nonce, 0);
    }

    #[test]
    fn same_chain_emission_rejected() {
        let mut book = MessageBook::new();
        let err = book
            .emit(
                ChainId(0),
                Address::contract(ChainId(0), "emitter"),
                ChainId(0),
                Address::contract(ChainId(0), "receiver"),
                vec![],
                VerificationModel::SuperchainMessenger,
                1,
                0,
                false,
            )
            .unwrap_err();
        assert!(matches!(err, SimError::Config(_)));
    }

    #[test]
    fn status_transitions_guarded() {
        let (mut book, id) = book_and_msg();
        let msg = book.get_mut(id).unwrap();
        // Delivery straight from Emitted must fail.
        assert!(msg.set_status(MsgStatus::Delivered).is_err());
        msg.set_status(MsgStatus::Attested).unwrap();
        msg.set_status(MsgStatus::HeldPaused).unwrap();
        // A held message can only complete, never reject.
        assert!(msg.set_status(MsgStatus::Rejected).is_err());
        msg.set_status(MsgStatus::Delivered).unwrap();
        assert!(msg.set_status(MsgStatus::Rejected).is_err());
    }

    #[test]
    fn route_table_overrides_default() {
        let mut routes = RouteTable::default();
        assert_eq!(routes.latency(ChainId(0), ChainId(1)), 3);
        routes.set_latency(ChainId(0), ChainId(1), 7).unwrap();
        assert_eq!(routes.latency(ChainId(0), ChainId(1)), 7);
        assert_eq!(routes.latency(ChainId(1), ChainId(0)), 3);
        assert_eq!(
            routes.set_latency(ChainId(0), ChainId(1), 0),
            Err(SimError::LatencyTooSmall)
        );
    }
}
