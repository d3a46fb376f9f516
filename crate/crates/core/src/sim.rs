//! The simulation core and the top-level driver.
//!
//! `SimCore` owns everything the standards share: the clock, chain and
//! ledger registries, the message fabric, verifier states, route latencies,
//! and the append-only event log. Registries take `&mut SimCore` per call
//! instead of holding references, which keeps the whole simulation a single
//! owned value that can be stepped, cloned, and replayed.
//!
//! `Simulation` adds the five standard registries on top and runs the tick
//! loop: scheduled adversary actions first, then an attestation pass over
//! emitted messages, then a delivery pass over everything attested and due.
//! All iteration is in id order over ordered maps, so a run is a pure
//! function of its inputs.

use std::collections::BTreeMap;

use crate::cct::{offramp_address, CctRegistry};
use crate::chain::{
    AccountId, Address, Amount, ChainId, ChainRegistry, SimClock, Tick,
};
use crate::error::{SimError, SimResult};
use crate::event::{
    EventKind, EventLog, Standard, SupplyOrigin, TransferPurpose,
};
use crate::ledger::{LedgerBook, TokenId};
use crate::message::{MessageBook, MsgId, MsgStatus, RouteTable};
use crate::ntt::NttRegistry;
use crate::oft::OftRegistry;
use crate::superchain::SuperchainRegistry;
use crate::verify::{VerificationModel, VerifierId, VerifierRegistry};
use crate::xerc20::XErc20Registry;

/// Result of attempting to deliver one message to its receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeliveryOutcome {
    /// Applied; the message is terminal.
    Delivered,
    /// Refused for a reason that will never clear on its own; the message
    /// is terminal and any burned source funds are stranded.
    Rejected(String),
    /// Receiver is paused; the message is parked and retried after unpause.
    HeldPaused,
    /// Not deliverable yet for a reason that can clear; retried every tick.
    Pending(PendingReason),
}

/// Why a delivery is parked rather than refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PendingReason {
    /// Receiver-side attestation threshold not yet met.
    BelowThreshold { have: usize, need: usize },
    /// Inbound rate limit cannot absorb the amount yet.
    InboundCapacity { capacity: Amount, requested: Amount },
}

/// Shared state every standard operates over.
#[derive(Debug, Clone)]
pub struct SimCore {
    pub clock: SimClock,
    pub chains: ChainRegistry,
    pub ledgers: LedgerBook,
    pub messages: MessageBook,
    pub verifiers: VerifierRegistry,
    pub routes: RouteTable,
    pub log: EventLog,
    next_transfer: u64,
    /// Transfer record that settles when the keyed message delivers.
    transfers_by_msg: BTreeMap<MsgId, u64>,
}

impl Default for SimCore {
    fn default() -> Self {
        Self::new()
    }
}

impl SimCore {
    pub fn new() -> Self {
        Self {
            clock: SimClock::new(),
            chains: ChainRegistry::new(),
            ledgers: LedgerBook::new(),
            messages: MessageBook::new(),
            verifiers: VerifierRegistry::new(),
            routes: RouteTable::default(),
            log: EventLog::new(),
            next_transfer: 0,
            transfers_by_msg: BTreeMap::new(),
        }
    }

    pub fn now(&self) -> Tick {
        self.clock.now()
    }

    /// Append one event at the current tick.
    pub fn record(&mut self, kind: EventKind) {
        let tick = self.clock.now();
        self.log.append(tick, kind);
    }

    // ── Supply mutations. Every path that changes a balance goes through
    // these four, so the event log alone reconstructs all ledgers. ──

    pub fn mint(
        &mut self,
        standard: Standard,
        token: &TokenId,
        to: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        self.ledgers.get_mut(token, to.chain)?.mint_unchecked(to, amount)?;
        self.record(EventKind::Minted {
            standard,
            token: token.clone(),
            chain: to.chain,
            to: to.value,
            amount,
            origin,
        });
        Ok(())
    }

    pub fn burn(
        &mut self,
        standard: Standard,
        token: &TokenId,
        from: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        self.ledgers.get_mut(token, from.chain)?.burn_unchecked(from, amount)?;
        self.record(EventKind::Burned {
            standard,
            token: token.clone(),
            chain: from.chain,
            from: from.value,
            amount,
            origin,
        });
        Ok(())
    }

    /// Supply-neutral move into custody.
    pub fn lock(
        &mut self,
        standard: Standard,
        token: &TokenId,
        custodian: Address,
        from: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        self.ledgers
            .get_mut(token, custodian.chain)?
            .transfer(from, custodian, amount)?;
        self.record(EventKind::Locked {
            standard,
            token: token.clone(),
            chain: custodian.chain,
            custodian: custodian.value,
            from: from.value,
            amount,
            origin,
        });
        Ok(())
    }

    /// Supply-neutral move out of custody.
    pub fn release(
        &mut self,
        standard: Standard,
        token: &TokenId,
        custodian: Address,
        to: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        self.ledgers
            .get_mut(token, custodian.chain)?
            .transfer(custodian, to, amount)?;
        self.record(EventKind::Released {
            standard,
            token: token.clone(),
            chain: custodian.chain,
            custodian: custodian.value,
            to: to.value,
            amount,
            origin,
        });
        Ok(())
    }

    /// Plain same-chain transfer between accounts, logged as user traffic.
    pub fn user_transfer(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        from: Address,
        to: Address,
        amount: Amount,
    ) -> SimResult<()> {
        self.transfer_logged(token, chain, from, to, amount, TransferPurpose::User)
    }

    /// Same-chain transfer that pays a fee to a collector.
    pub fn fee_transfer(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        from: Address,
        to: Address,
        amount: Amount,
    ) -> SimResult<()> {
        self.transfer_logged(token, chain, from, to, amount, TransferPurpose::Fee)
    }

    fn transfer_logged(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        from: Address,
        to: Address,
        amount: Amount,
        purpose: TransferPurpose,
    ) -> SimResult<()> {
        self.ledgers.get_mut(token, chain)?.transfer(from, to, amount)?;
        self.record(EventKind::Transferred {
            token: token.clone(),
            chain,
            from: from.value,
            to: to.value,
            amount,
            purpose,
        });
        Ok(())
    }

    // ── Message fabric ──

    /// Emit a legitimate message and run its first attestation pass
    /// immediately, so single-tick latencies still collect a quorum in
    /// time. Superchain traffic gets exactly one destination block of
    /// latency; everything else takes the route table.
    pub fn emit_message(
        &mut self,
        src: ChainId,
        emitter: Address,
        dst: ChainId,
        receiver: Address,
        payload: Vec<u8>,
        model: VerificationModel,
    ) -> SimResult<MsgId> {
        self.chains.get(src)?;
        let latency = match &model {
            VerificationModel::SuperchainMessenger => self.chains.get(dst)?.block_interval,
            _ => {
                self.chains.get(dst)?;
                self.routes.latency(src, dst)
            }
        };
        let now = self.clock.now();
        let id = self.messages.emit(
            src,
            emitter,
            dst,
            receiver,
            payload.clone(),
            model,
            latency,
            now,
            false,
        )?;
        let nonce = self.messages.get(id)?.nonce;
        self.record(EventKind::MessageEmitted {
            msg: id,
            src,
            dst,
            emitter: emitter.value,
            receiver: receiver.value,
            nonce,
            latency,
            forged: false,
            payload: hex::encode(&payload),
        });
        self.attest_message(id)?;
        Ok(id)
    }

    /// Inject a message with no source action behind it. Every listed
    /// forger must already be compromised; their attestations are recorded
    /// as dishonest and honest verifiers never co-sign, so the forgery
    /// reaches quorum only if the forgers alone satisfy the model.
    pub fn inject_forged(
        &mut self,
        src: ChainId,
        claimed_emitter: Address,
        dst: ChainId,
        receiver: Address,
        payload: Vec<u8>,
        model: VerificationModel,
        forgers: &[VerifierId],
    ) -> SimResult<MsgId> {
        for f in forgers {
            if !self.verifiers.state(f)?.compromised {
                return Err(SimError::VerifierNotCompromised(f.0.clone()));
            }
        }
        let latency = match &model {
            VerificationModel::SuperchainMessenger => self.chains.get(dst)?.block_interval,
            _ => self.routes.latency(src, dst),
        };
        let now = self.clock.now();
        let id = self.messages.emit(
            src,
            claimed_emitter,
            dst,
            receiver,
            payload.clone(),
            model,
            latency,
            now,
            true,
        )?;
        let nonce = self.messages.get(id)?.nonce;
        self.record(EventKind::MessageEmitted {
            msg: id,
            src,
            dst,
            emitter: claimed_emitter.value,
            receiver: receiver.value,
            nonce,
            latency,
            forged: true,
            payload: hex::encode(&payload),
        });
        for f in forgers {
            if self.messages.get_mut(id)?.attested.insert(f.clone()) {
                self.record(EventKind::AttestationRecorded {
                    msg: id,
                    verifier: f.clone(),
                    honest: false,
                });
            }
        }
        if self.messages.get(id)?.quorum_met() {
            self.messages.get_mut(id)?.set_status(MsgStatus::Attested)?;
            self.record(EventKind::QuorumReached { msg: id });
        }
        Ok(id)
    }

    /// Collect attestations from honest participants of one emitted
    /// message. Forged messages never gather honest signatures: without a
    /// source action there is nothing for an honest verifier to observe.
    pub fn attest_message(&mut self, id: MsgId) -> SimResult<()> {
        let (model, forged, status) = {
            let m = self.messages.get(id)?;
            (m.model.clone(), m.forged, m.status)
        };
        if forged || status != MsgStatus::Emitted {
            return Ok(());
        }
        for v in model.participants() {
            if !self.verifiers.attests_honest(&v) {
                continue;
            }
            if self.messages.get_mut(id)?.attested.insert(v.clone()) {
                self.record(EventKind::AttestationRecorded {
                    msg: id,
                    verifier: v,
                    honest: true,
                });
            }
        }
        if self.messages.get(id)?.quorum_met() {
            self.messages.get_mut(id)?.set_status(MsgStatus::Attested)?;
            self.record(EventKind::QuorumReached { msg: id });
        }
        Ok(())
    }

    // ── Transfer lifecycle bookkeeping ──

    /// Record the start of a user-visible transfer and return its id.
    #[allow(clippy::too_many_arguments)]
    pub fn log_transfer_initiated(
        &mut self,
        standard: Standard,
        token: &TokenId,
        src: ChainId,
        dst: ChainId,
        sender: AccountId,
        recipient: AccountId,
        amount_sent: Amount,
        amount_dst_expected: Amount,
        msg: Option<MsgId>,
        queued_seq: Option<u64>,
    ) -> u64 {
        let transfer = self.next_transfer;
        self.next_transfer += 1;
        if let Some(m) = msg {
            self.transfers_by_msg.insert(m, transfer);
        }
        self.record(EventKind::TransferInitiated {
            transfer,
            standard,
            token: token.clone(),
            src,
            dst,
            sender,
            recipient,
            amount_sent,
            amount_dst_expected,
            msg,
            queued_seq,
        });
        transfer
    }

    /// Tie a message to an already-initiated transfer (queued sends learn
    /// their message only at completion).
    pub fn note_transfer_msg(&mut self, msg: MsgId, transfer: u64) {
        self.transfers_by_msg.insert(msg, transfer);
    }

    pub fn transfer_of(&self, msg: MsgId) -> Option<u64> {
        self.transfers_by_msg.get(&msg).copied()
    }

    /// Settle the transfer behind `msg`, if one is mapped. Forged messages
    /// have none, so this is a no-op for them.
    pub fn log_transfer_settled(&mut self, msg: MsgId, amount_received: Amount) {
        if let Some(transfer) = self.transfer_of(msg) {
            self.record(EventKind::TransferSettled {
                transfer,
                msg,
                amount_received,
            });
        }
    }

    pub fn log_transfer_cancelled(&mut self, transfer: u64) {
        self.record(EventKind::TransferCancelled { transfer });
    }
}

/// Which module's receiver occupies a destination address.
#[derive(Debug, Clone, PartialEq, Eq)]
enum ReceiverBinding {
    Xerc20(TokenId),
    Oft(TokenId),
    Ntt(TokenId),
    CctOffRamp,
    SuperchainBridge,
}

/// One adversary or operator action executed at a scheduled tick, before
/// that tick's attestation and delivery passes.
#[derive(Debug, Clone)]
pub enum AdversaryAction {
    CompromiseVerifier {
        verifier: VerifierId,
        withhold_honest: bool,
    },
    InjectForged {
        src: ChainId,
        claimed_emitter: Address,
        dst: ChainId,
        receiver: Address,
        payload: Vec<u8>,
        forgers: Vec<VerifierId>,
    },
    SetPaused {
        standard: Standard,
        token: Option<TokenId>,
        chain: ChainId,
        paused: bool,
    },
    SetRouteLatency {
        src: ChainId,
        dst: ChainId,
        latency: Tick,
    },
}

/// The full simulator: shared core plus one registry per standard.
#[derive(Debug, Clone, Default)]
pub struct Simulation {
    pub core: SimCore,
    pub xerc20: XErc20Registry,
    pub oft: OftRegistry,
    pub ntt: NttRegistry,
    pub cct: CctRegistry,
    pub superchain: SuperchainRegistry,
    scheduled: BTreeMap<Tick, Vec<AdversaryAction>>,
}

impl Simulation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Create a chain; Superchain members get their canonical bridge
    /// installed immediately.
    pub fn add_chain(
        &mut self,
        label: &str,
        block_interval: u64,
        superchain_member: bool,
        is_ethereum: bool,
    ) -> SimResult<ChainId> {
        let chain = self.core.chains.create(
            label,
            block_interval,
            superchain_member,
            is_ethereum,
        )?;
        self.core.record(EventKind::ChainCreated {
            chain,
            label: label.to_string(),
            block_interval,
            superchain_member,
            is_ethereum,
        });
        if superchain_member {
            self.superchain.register_bridge(&mut self.core, chain)?;
        }
        Ok(chain)
    }

    /// Deploy a plain token ledger with its genesis distribution. Genesis
    /// balances are baseline supply, not mints: the conservation oracle
    /// starts from the deployment event, so they carry no supply origin.
    pub fn deploy_token(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        decimals: u8,
        genesis: &[(Address, Amount)],
    ) -> SimResult<()> {
        self.core.chains.get(chain)?;
        self.core.ledgers.deploy(token.clone(), chain, decimals)?;
        let mut initial: Amount = 0;
        for (addr, amount) in genesis {
            self.core
                .ledgers
                .get_mut(token, chain)?
                .mint_unchecked(*addr, *amount)?;
            initial = initial.checked_add(*amount).ok_or(SimError::Overflow)?;
        }
        self.core.record(EventKind::TokenDeployed {
            token: token.clone(),
            chain,
            decimals,
            initial_supply: initial,
        });
        Ok(())
    }

    pub fn deploy_xerc20(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        issuer: Address,
    ) -> SimResult<Address> {
        self.xerc20.deploy(&mut self.core, token, chain, issuer)
    }

    pub fn register_verifiers(&mut self, names: &[&str]) {
        self.core
            .verifiers
            .register_all(names.iter().map(|n| VerifierId::new(n)));
    }

    pub fn compromise_verifier(
        &mut self,
        verifier: &VerifierId,
        withhold_honest: bool,
    ) -> SimResult<()> {
        self.core.verifiers.compromise(verifier, withhold_honest)?;
        self.core.record(EventKind::VerifierCompromised {
            verifier: verifier.clone(),
            withholds_honest: withhold_honest,
        });
        Ok(())
    }

    pub fn set_route_latency(
        &mut self,
        src: ChainId,
        dst: ChainId,
        latency: Tick,
    ) -> SimResult<()> {
        self.core.routes.set_latency(src, dst, latency)?;
        self.core.record(EventKind::RouteLatencySet { src, dst, latency });
        Ok(())
    }

    /// Queue an action for the start of `tick`. Scheduling in the past
    /// executes on the next tick.
    pub fn schedule(&mut self, tick: Tick, action: AdversaryAction) {
        self.scheduled.entry(tick).or_default().push(action);
    }

    /// Inject a forged message aimed at `receiver`, using whatever
    /// verification model the genuine deployment at that address runs. The
    /// forgery therefore faces exactly the quorum a real message would.
    pub fn inject_forged_message(
        &mut self,
        src: ChainId,
        claimed_emitter: Address,
        receiver: Address,
        payload: Vec<u8>,
        forgers: &[VerifierId],
    ) -> SimResult<MsgId> {
        let dst = receiver.chain;
        let model = self
            .delivery_model(src, dst, &receiver.value)
            .ok_or_else(|| {
                SimError::Config(format!("no receiver deployed at {receiver}"))
            })?;
        self.core
            .inject_forged(src, claimed_emitter, dst, receiver, payload, model, forgers)
    }

    /// Verification model governing deliveries to `value` on `dst`.
    fn delivery_model(
        &self,
        src: ChainId,
        dst: ChainId,
        value: &AccountId,
    ) -> Option<VerificationModel> {
        if let Some(token) = self.xerc20.receiver_token(dst, value) {
            return Some(self.xerc20.verification_model(&token, dst));
        }
        if let Some(token) = self.oft.receiver_token(dst, value) {
            return self.oft.verification_model(&token, dst);
        }
        if self.ntt.receiver_token(dst, value).is_some() {
            return Some(self.ntt.guardian_model.clone());
        }
        if offramp_address(dst).value == *value {
            return self.cct.lane_model(src, dst);
        }
        if self.superchain.is_bridge(dst, value) {
            return Some(VerificationModel::SuperchainMessenger);
        }
        None
    }

    fn resolve_receiver(&self, dst: ChainId, value: &AccountId) -> Option<ReceiverBinding> {
        if let Some(token) = self.xerc20.receiver_token(dst, value) {
            return Some(ReceiverBinding::Xerc20(token));
        }
        if let Some(token) = self.oft.receiver_token(dst, value) {
            return Some(ReceiverBinding::Oft(token));
        }
        if let Some(token) = self.ntt.receiver_token(dst, value) {
            return Some(ReceiverBinding::Ntt(token));
        }
        if offramp_address(dst).value == *value {
            return Some(ReceiverBinding::CctOffRamp);
        }
        if self.superchain.is_bridge(dst, value) {
            return Some(ReceiverBinding::SuperchainBridge);
        }
        None
    }

    /// Advance one tick: actions scheduled for (or before) the new tick,
    /// then attestation, then deliveries that are due.
    pub fn advance_tick(&mut self) -> SimResult<()> {
        self.core.clock.step();
        let now = self.core.now();

        let due: Vec<Tick> = self
            .scheduled
            .range(..=now)
            .map(|(t, _)| *t)
            .collect();
        for tick in due {
            let actions = self.scheduled.remove(&tick).unwrap_or_default();
            for action in actions {
                self.apply_action(action)?;
            }
        }

        for id in self.core.messages.ids_with_status(&[MsgStatus::Emitted]) {
            self.core.attest_message(id)?;
        }

        for id in self
            .core
            .messages
            .ids_with_status(&[MsgStatus::Attested, MsgStatus::HeldPaused])
        {
            let msg = self.core.messages.get(id)?;
            if msg.deliverable_at() > now {
                continue;
            }
            // Manual-relay mode: superchain messages wait for relay_erc20.
            if !self.superchain.auto_relay
                && self
                    .resolve_receiver(msg.dst, &msg.intended_receiver.value)
                    == Some(ReceiverBinding::SuperchainBridge)
            {
                continue;
            }
            self.deliver(id)?;
        }
        Ok(())
    }

    pub fn run_ticks(&mut self, n: u64) -> SimResult<()> {
        for _ in 0..n {
            self.advance_tick()?;
        }
        Ok(())
    }

    /// Deliver `id` to its receiver and apply the outcome to message
    /// status and transfer records. `Err` from a handler is an invariant
    /// breach inside the simulator itself and halts the run.
    fn deliver(&mut self, id: MsgId) -> SimResult<DeliveryOutcome> {
        let msg = self.core.messages.get(id)?.clone();
        let outcome = match self.resolve_receiver(msg.dst, &msg.intended_receiver.value) {
            None => DeliveryOutcome::Rejected("no receiver at the destination address".into()),
            Some(ReceiverBinding::Xerc20(token)) => {
                self.xerc20.handle_delivery(&mut self.core, &token, msg.dst, &msg)?
            }
            Some(ReceiverBinding::Oft(token)) => {
                self.oft.handle_delivery(&mut self.core, &token, msg.dst, &msg)?
            }
            Some(ReceiverBinding::Ntt(token)) => {
                self.ntt.handle_delivery(&mut self.core, &token, msg.dst, &msg)?
            }
            Some(ReceiverBinding::CctOffRamp) => {
                self.cct.handle_delivery(&mut self.core, msg.dst, &msg)?
            }
            Some(ReceiverBinding::SuperchainBridge) => {
                self.superchain.handle_delivery(&mut self.core, msg.dst, &msg)?
            }
        };

        let now = self.core.now();
        match &outcome {
            DeliveryOutcome::Delivered => {
                let m = self.core.messages.get_mut(id)?;
                m.set_status(MsgStatus::Delivered)?;
                m.delivered_tick = Some(now);
                self.core.record(EventKind::MessageDelivered { msg: id });
            }
            DeliveryOutcome::Rejected(reason) => {
                // A held message can only move to Delivered; a rejection
                // while paused leaves it parked.
                if msg.status != MsgStatus::HeldPaused {
                    let reason = reason.clone();
                    let m = self.core.messages.get_mut(id)?;
                    m.set_status(MsgStatus::Rejected)?;
                    m.reject_reason = Some(reason.clone());
                    self.core.record(EventKind::MessageRejected {
                        msg: id,
                        reason: reason.clone(),
                    });
                    if let Some(transfer) = self.core.transfer_of(id) {
                        self.core
                            .record(EventKind::TransferStranded { transfer, reason });
                    }
                }
            }
            DeliveryOutcome::HeldPaused => {
                if msg.status != MsgStatus::HeldPaused {
                    self.core.messages.get_mut(id)?.set_status(MsgStatus::HeldPaused)?;
                    self.core.record(EventKind::MessageHeldPaused { msg: id });
                }
            }
            DeliveryOutcome::Pending(_) => {}
        }
        Ok(outcome)
    }

    /// Execute one attested, due message by hand instead of waiting for the
    /// tick loop; pending reasons surface as errors.
    pub fn execute_message(&mut self, id: MsgId) -> SimResult<()> {
        let msg = self.core.messages.get(id)?;
        if !matches!(msg.status, MsgStatus::Attested | MsgStatus::HeldPaused) {
            return Err(SimError::BadMessageState {
                msg: id.0,
                state: format!("{:?}", msg.status),
                action: "be executed".into(),
            });
        }
        let at = msg.deliverable_at();
        if self.core.now() < at {
            return Err(SimError::StillQueued { until: at });
        }
        match self.deliver(id)? {
            DeliveryOutcome::Pending(PendingReason::BelowThreshold { have, need }) => {
                Err(SimError::BelowThreshold { have, need })
            }
            DeliveryOutcome::Pending(PendingReason::InboundCapacity {
                capacity,
                requested,
            }) => Err(SimError::RateLimited {
                capacity,
                requested,
            }),
            _ => Ok(()),
        }
    }

    /// Manual superchain relay, for runs with auto-relay off.
    pub fn relay_erc20(&mut self, id: MsgId) -> SimResult<()> {
        let msg = self.core.messages.get(id)?;
        let dst = msg.dst;
        if self.resolve_receiver(dst, &msg.intended_receiver.value)
            != Some(ReceiverBinding::SuperchainBridge)
        {
            return Err(SimError::Config(
                "message is not addressed to a superchain bridge".into(),
            ));
        }
        if self.superchain.already_relayed(dst, id) {
            return Err(SimError::AlreadyRelayed);
        }
        self.execute_message(id)
    }

    fn apply_action(&mut self, action: AdversaryAction) -> SimResult<()> {
        match action {
            AdversaryAction::CompromiseVerifier {
                verifier,
                withhold_honest,
            } => self.compromise_verifier(&verifier, withhold_honest),
            AdversaryAction::InjectForged {
                src,
                claimed_emitter,
                dst: _,
                receiver,
                payload,
                forgers,
            } => self
                .inject_forged_message(src, claimed_emitter, receiver, payload, &forgers)
                .map(|_| ()),
            AdversaryAction::SetPaused {
                standard,
                token,
                chain,
                paused,
            } => self.force_set_paused(standard, token.as_ref(), chain, paused),
            AdversaryAction::SetRouteLatency { src, dst, latency } => {
                self.set_route_latency(src, dst, latency)
            }
        }
    }

    /// Operator pause without a caller gate; scenario scripts use this.
    pub fn force_set_paused(
        &mut self,
        standard: Standard,
        token: Option<&TokenId>,
        chain: ChainId,
        paused: bool,
    ) -> SimResult<()> {
        let need_token = || {
            token.cloned().ok_or_else(|| {
                SimError::Config(format!("{} pause needs a token", standard.name()))
            })
        };
        match standard {
            Standard::Xerc20 => {
                self.xerc20
                    .force_set_paused(&mut self.core, &need_token()?, chain, paused)
            }
            Standard::Oft => {
                self.oft
                    .force_set_paused(&mut self.core, &need_token()?, chain, paused)
            }
            Standard::Ntt => {
                self.ntt
                    .force_set_paused(&mut self.core, &need_token()?, chain, paused)
            }
            Standard::Cct => {
                self.cct
                    .force_set_paused(&mut self.core, &need_token()?, chain, paused)
            }
            Standard::Superchain => self.superchain.set_paused(&mut self.core, chain, paused),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payload::XErc20Payload;

    fn tok(name: &str) -> TokenId {
        TokenId(name.to_string())
    }

    #[test]
    fn ticks_are_monotonic_and_start_at_zero() {
        let mut sim = Simulation::new();
        assert_eq!(sim.core.now(), 0);
        sim.run_ticks(5).unwrap();
        assert_eq!(sim.core.now(), 5);
    }

    #[test]
    fn identical_runs_produce_identical_logs() {
        let build = || {
            let mut sim = Simulation::new();
            let a = sim.add_chain("a", 1, false, false).unwrap();
            let b = sim.add_chain("b", 1, false, false).unwrap();
            let token = tok("usd");
            let issuer = Address::user(a, "issuer");
            let alice = Address::user(a, "alice");
            let bridge = Address::contract(a, "bridge");
            let bridge_b = Address::contract(b, "bridge");
            sim.deploy_token(&token, a, 18, &[(alice, 1_000)]).unwrap();
            sim.deploy_token(&token, b, 18, &[]).unwrap();
            sim.deploy_xerc20(&token, a, issuer).unwrap();
            sim.deploy_xerc20(&token, b, Address::user(b, "issuer")).unwrap();
            let Simulation { core, xerc20, .. } = &mut sim;
            xerc20
                .set_limits(core, &token, a, issuer, bridge, 500, 500, 100)
                .unwrap();
            xerc20
                .set_limits(core, &token, b, Address::user(b, "issuer"), bridge_b, 500, 500, 100)
                .unwrap();
            xerc20
                .send(core, &token, a, bridge, alice, b, Address::user(b, "bob"), 400)
                .unwrap();
            sim.run_ticks(10).unwrap();
            sim
        };
        let one = build();
        let two = build();
        let left = serde_json::to_string(one.core.log.events()).unwrap();
        let right = serde_json::to_string(two.core.log.events()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn forged_injection_requires_compromised_forgers() {
        let mut sim = Simulation::new();
        let a = sim.add_chain("a", 1, false, false).unwrap();
        let b = sim.add_chain("b", 1, false, false).unwrap();
        let token = tok("usd");
        sim.deploy_token(&token, b, 18, &[]).unwrap();
        sim.deploy_xerc20(&token, b, Address::user(b, "issuer")).unwrap();
        sim.register_verifiers(&["v0"]);

        let receiver = crate::xerc20::contract_address(&token, b);
        let payload = XErc20Payload {
            token: token.clone(),
            amount: 50,
            recipient: AccountId::derive("user", "thief"),
            src_nonce: 0,
        };
        let err = sim
            .inject_forged_message(
                a,
                Address::contract(a, "bridge"),
                receiver,
                payload.encode(),
                &[VerifierId::new("v0")],
            )
            .unwrap_err();
        assert!(matches!(err, SimError::VerifierNotCompromised(_)));

        sim.compromise_verifier(&VerifierId::new("v0"), false).unwrap();
        sim.inject_forged_message(
            a,
            Address::contract(a, "bridge"),
            receiver,
            payload.encode(),
            &[VerifierId::new("v0")],
        )
        .unwrap();
    }

    #[test]
    fn message_to_unbound_address_rejects_as_unroutable() {
        let mut sim = Simulation::new();
        let a = sim.add_chain("a", 1, false, false).unwrap();
        let b = sim.add_chain("b", 1, false, false).unwrap();
        let msg = sim
            .core
            .emit_message(
                a,
                Address::contract(a, "whoever"),
                b,
                Address::contract(b, "nothing-here"),
                vec![1, 2, 3],
                VerificationModel::BridgeWhitelist {
                    trusted_bridges: std::collections::BTreeSet::new(),
                },
            )
            .unwrap();
        sim.run_ticks(5).unwrap();
        let m = sim.core.messages.get(msg).unwrap();
        assert_eq!(m.status, MsgStatus::Rejected);
        assert_eq!(
            m.reject_reason.as_deref(),
            Some("no receiver at the destination address")
        );
    }

    #[test]
    fn scheduled_actions_fire_at_their_tick() {
        let mut sim = Simulation::new();
        sim.add_chain("a", 1, false, false).unwrap();
        sim.register_verifiers(&["v0"]);
        sim.schedule(
            3,
            AdversaryAction::CompromiseVerifier {
                verifier: VerifierId::new("v0"),
                withhold_honest: true,
            },
        );
        sim.run_ticks(2).unwrap();
        assert!(!sim.core.verifiers.is_compromised(&VerifierId::new("v0")));
        sim.run_ticks(1).unwrap();
        assert!(sim.core.verifiers.is_compromised(&VerifierId::new("v0")));
    }
}
