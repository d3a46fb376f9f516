//! Native token transfers through per-chain managers with a double
//! attestation gate and capacity queues.
//!
//! Each chain runs a manager for the token. A transfer must clear two
//! independent gates before execution: the message layer's guardian quorum
//! and the receiving manager's own transceiver threshold. Outbound and
//! inbound limiters never reject a transfer outright; what exceeds capacity
//! is queued and becomes executable one full window later, trading delay
//! for throughput instead of failing.

use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{AccountId, Address, Amount, ChainId, Tick};
use crate::error::{SimError, SimResult};
use crate::event::{BindingDetail, EventKind, LimitScope, Standard, SupplyOrigin};
use crate::ledger::TokenId;
use crate::message::MsgId;
use crate::payload::{NttPayload, PayloadDigest};
use crate::ratelimit::RateLimitState;
use crate::sim::{DeliveryOutcome, PendingReason, SimCore};
use crate::verify::{VerificationModel, VerifierId};

/// Supply mode shared by every manager of a token. Hub-and-spoke keeps the
/// original supply locked on the hub; spokes mint and burn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NttMode {
    BurnMint,
    HubSpokeLock { hub: ChainId },
}

#[derive(Debug, Clone)]
pub struct QueuedOutbound {
    pub seq: u64,
    pub sender: AccountId,
    pub dst: ChainId,
    pub recipient: AccountId,
    pub amount: Amount,
    pub queued_tick: Tick,
    pub window: Tick,
    pub transfer: u64,
}

#[derive(Debug, Clone)]
pub struct QueuedInbound {
    pub digest: PayloadDigest,
    pub msg: MsgId,
    pub src: ChainId,
    pub recipient: AccountId,
    pub amount: Amount,
    pub queued_tick: Tick,
    pub window: Tick,
}

#[derive(Debug, Clone)]
pub struct NttManager {
    pub token: TokenId,
    pub chain: ChainId,
    pub contract: Address,
    pub owner: Address,
    pub mode: NttMode,
    pub peers: BTreeMap<ChainId, AccountId>,
    pub transceivers: BTreeSet<AccountId>,
    /// Attestations required from this manager's own transceivers before a
    /// delivered message may execute.
    pub threshold: usize,
    sequence: u64,
    pub outbound_limit: Option<RateLimitState>,
    pub inbound_limits: BTreeMap<ChainId, RateLimitState>,
    pub outbound_queue: BTreeMap<u64, QueuedOutbound>,
    pub inbound_queue: BTreeMap<PayloadDigest, QueuedInbound>,
    attestations: BTreeMap<PayloadDigest, BTreeSet<AccountId>>,
    /// Supply escrowed on the hub (hub manager only).
    pub hub_locked: Amount,
    pub paused: bool,
}

impl NttManager {
    fn require_owner(&self, caller: Address) -> SimResult<()> {
        if caller != self.owner {
            return Err(SimError::Unauthorized(format!(
                "{caller} does not own the {} manager on {}",
                self.token, self.chain
            )));
        }
        Ok(())
    }

    fn is_hub(&self) -> bool {
        matches!(self.mode, NttMode::HubSpokeLock { hub } if hub == self.chain)
    }

    pub fn attestation_count(&self, digest: &PayloadDigest) -> usize {
        self.attestations
            .get(digest)
            .map(|s| s.iter().filter(|t| self.transceivers.contains(*t)).count())
            .unwrap_or(0)
    }
}

pub fn contract_address(token: &TokenId, chain: ChainId) -> Address {
    Address::contract(chain, &format!("ntt-manager:{token}"))
}

/// The default message-layer gate: 13 of 19 guardians.
pub fn default_guardian_model() -> VerificationModel {
    VerificationModel::GuardianQuorum {
        guardians: VerifierId::series("guardian", 19),
        threshold: 13,
    }
}

#[derive(Debug, Clone)]
pub struct NttRegistry {
    managers: BTreeMap<(TokenId, ChainId), NttManager>,
    /// Message-layer verification shared by every manager.
    pub guardian_model: VerificationModel,
    /// When set, every registered transceiver of the receiving manager
    /// attests as soon as a message arrives.
    pub auto_attest: bool,
}

impl Default for NttRegistry {
    fn default() -> Self {
        Self {
            managers: BTreeMap::new(),
            guardian_model: default_guardian_model(),
            auto_attest: true,
        }
    }
}

impl NttRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, token: &TokenId, chain: ChainId) -> SimResult<&NttManager> {
        self.managers
            .get(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    fn get_mut(&mut self, token: &TokenId, chain: ChainId) -> SimResult<&mut NttManager> {
        self.managers
            .get_mut(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    pub fn contains(&self, token: &TokenId, chain: ChainId) -> bool {
        self.managers.contains_key(&(token.clone(), chain))
    }

    /// Bind a manager over an existing ledger. All managers of a token must
    /// agree on the supply mode.
    pub fn deploy(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        owner: Address,
        mode: NttMode,
    ) -> SimResult<Address> {
        core.ledgers.get(token, chain)?;
        let key = (token.clone(), chain);
        if self.managers.contains_key(&key) {
            return Err(SimError::DuplicateToken {
                token: token.0.clone(),
                chain: chain.to_string(),
            });
        }
        if let Some(existing) = self
            .managers
            .iter()
            .find(|((t, _), _)| t == token)
            .map(|(_, m)| m.mode)
        {
            if existing != mode {
                return Err(SimError::Config(format!(
                    "managers of {token} disagree on supply mode"
                )));
            }
        }
        if let NttMode::HubSpokeLock { hub } = mode {
            core.chains.get(hub)?;
        }
        let contract = contract_address(token, chain);
        self.managers.insert(
            key,
            NttManager {
                token: token.clone(),
                chain,
                contract,
                owner,
                mode,
                peers: BTreeMap::new(),
                transceivers: BTreeSet::new(),
                threshold: 1,
                sequence: 0,
                outbound_limit: None,
                inbound_limits: BTreeMap::new(),
                outbound_queue: BTreeMap::new(),
                inbound_queue: BTreeMap::new(),
                attestations: BTreeMap::new(),
                hub_locked: 0,
                paused: false,
            },
        );
        core.verifiers.register_all(self.guardian_model.participants());
        let (hub_spoke, hub) = match mode {
            NttMode::BurnMint => (false, None),
            NttMode::HubSpokeLock { hub } => (true, Some(hub)),
        };
        core.record(EventKind::StandardBound {
            standard: Standard::Ntt,
            token: token.clone(),
            chain,
            contract: contract.value,
            detail: BindingDetail::Ntt { hub_spoke, hub },
        });
        Ok(contract)
    }

    pub fn set_peer(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        dst: ChainId,
        peer: AccountId,
    ) -> SimResult<()> {
        if dst == chain {
            return Err(SimError::Config("peer on the same chain".into()));
        }
        let mgr = self.get_mut(token, chain)?;
        mgr.require_owner(caller)?;
        mgr.peers.insert(dst, peer);
        Ok(())
    }

    pub fn add_transceiver(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        transceiver: AccountId,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        mgr.require_owner(caller)?;
        if !mgr.transceivers.insert(transceiver) {
            return Err(SimError::Config("transceiver already registered".into()));
        }
        Ok(())
    }

    /// Removal may not drop the set below the active threshold.
    pub fn remove_transceiver(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        transceiver: AccountId,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        mgr.require_owner(caller)?;
        if !mgr.transceivers.contains(&transceiver) {
            return Err(SimError::Config("transceiver not registered".into()));
        }
        if mgr.transceivers.len() - 1 < mgr.threshold {
            return Err(SimError::ThresholdTooHigh {
                threshold: mgr.threshold,
                count: mgr.transceivers.len() - 1,
            });
        }
        mgr.transceivers.remove(&transceiver);
        Ok(())
    }

    pub fn set_threshold(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        threshold: usize,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        mgr.require_owner(caller)?;
        if threshold == 0 || threshold > mgr.transceivers.len() {
            return Err(SimError::ThresholdTooHigh {
                threshold,
                count: mgr.transceivers.len(),
            });
        }
        mgr.threshold = threshold;
        Ok(())
    }

    pub fn set_outbound_limit(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        limit: Amount,
        window: Tick,
    ) -> SimResult<()> {
        let now = core.now();
        let mgr = self.get_mut(token, chain)?;
        mgr.require_owner(caller)?;
        match mgr.outbound_limit.as_mut() {
            Some(state) => state.reconfigure(limit, window, now)?,
            None => mgr.outbound_limit = Some(RateLimitState::new(limit, window, now)?),
        }
        core.record(EventKind::RateLimitConfigured {
            standard: Standard::Ntt,
            token: token.clone(),
            chain,
            scope: LimitScope::Outbound,
            limit,
            window,
        });
        Ok(())
    }

    pub fn set_inbound_limit(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        from: ChainId,
        limit: Amount,
        window: Tick,
    ) -> SimResult<()> {
        let now = core.now();
        let mgr = self.get_mut(token, chain)?;
        mgr.require_owner(caller)?;
        match mgr.inbound_limits.get_mut(&from) {
            Some(state) => state.reconfigure(limit, window, now)?,
            None => {
                mgr.inbound_limits
                    .insert(from, RateLimitState::new(limit, window, now)?);
            }
        }
        core.record(EventKind::RateLimitConfigured {
            standard: Standard::Ntt,
            token: token.clone(),
            chain,
            scope: LimitScope::InboundFrom { remote: from },
            limit,
            window,
        });
        Ok(())
    }

    pub fn set_paused(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        paused: bool,
    ) -> SimResult<()> {
        self.get_mut(token, chain)?.require_owner(caller)?;
        self.force_set_paused(core, token, chain, paused)
    }

    /// Pause without the owner gate; scenario scripts act as the operator.
    pub fn force_set_paused(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        paused: bool,
    ) -> SimResult<()> {
        self.get_mut(token, chain)?.paused = paused;
        core.record(EventKind::PauseSet {
            standard: Standard::Ntt,
            token: Some(token.clone()),
            chain,
            paused,
        });
        Ok(())
    }

    /// Token whose manager contract occupies `value` on `chain`.
    pub fn receiver_token(&self, chain: ChainId, value: &AccountId) -> Option<TokenId> {
        self.managers
            .keys()
            .find(|(t, c)| *c == chain && contract_address(t, chain).value == *value)
            .map(|(t, _)| t.clone())
    }

    /// Debit the source. Within outbound capacity the transfer goes out
    /// immediately; beyond it the funds move into manager custody and wait
    /// in the outbound queue for one full window.
    #[allow(clippy::too_many_arguments)]
    pub fn transfer(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        src: ChainId,
        sender: Address,
        dst: ChainId,
        recipient: Address,
        amount: Amount,
    ) -> SimResult<TransferReceipt> {
        if recipient.chain != dst {
            return Err(SimError::ForeignAddress {
                address: recipient.to_string(),
                chain: dst.to_string(),
            });
        }
        if amount == 0 {
            return Err(SimError::InvalidAmount("transfer amount must be nonzero".into()));
        }
        core.chains.get(dst)?;
        let now = core.now();
        let mgr = self.get(token, src)?;
        if mgr.paused {
            return Err(SimError::Paused);
        }
        if !mgr.peers.contains_key(&dst) {
            return Err(SimError::UnknownPeer(dst.to_string()));
        }
        let have = core.ledgers.get(token, src)?.balance_of(sender.value);
        if have < amount {
            return Err(SimError::InsufficientBalance {
                have,
                need: amount,
            });
        }
        let capacity = mgr
            .outbound_limit
            .as_ref()
            .map(|l| l.current(now))
            .unwrap_or(Amount::MAX);
        if capacity >= amount {
            let msg = self.emit_transfer(core, token, src, dst, recipient.value, amount)?;
            let mgr = self.get_mut(token, src)?;
            if let Some(limit) = mgr.outbound_limit.as_mut() {
                limit.try_consume(now, amount).expect("checked above");
            }
            self.debit(core, token, src, sender, amount, SupplyOrigin::Send { msg })?;
            let transfer = core.log_transfer_initiated(
                Standard::Ntt,
                token,
                src,
                dst,
                sender.value,
                recipient.value,
                amount,
                amount,
                Some(msg),
                None,
            );
            Ok(TransferReceipt::Sent { transfer, msg })
        } else {
            let mgr = self.get_mut(token, src)?;
            let window = mgr
                .outbound_limit
                .as_ref()
                .map(|l| l.window())
                .expect("capacity below MAX implies a limiter");
            let seq = mgr.sequence;
            mgr.sequence += 1;
            let contract = mgr.contract;
            core.lock(
                Standard::Ntt,
                token,
                contract,
                sender,
                amount,
                SupplyOrigin::Queue,
            )?;
            let transfer = core.log_transfer_initiated(
                Standard::Ntt,
                token,
                src,
                dst,
                sender.value,
                recipient.value,
                amount,
                amount,
                None,
                Some(seq),
            );
            core.record(EventKind::OutboundQueued {
                standard: Standard::Ntt,
                token: token.clone(),
                chain: src,
                seq,
                sender: sender.value,
                dst,
                recipient: recipient.value,
                amount,
            });
            let mgr = self.get_mut(token, src)?;
            mgr.outbound_queue.insert(
                seq,
                QueuedOutbound {
                    seq,
                    sender: sender.value,
                    dst,
                    recipient: recipient.value,
                    amount,
                    queued_tick: now,
                    window,
                    transfer,
                },
            );
            Ok(TransferReceipt::Queued { transfer, seq })
        }
    }

    /// Emit the cross-chain message for a transfer, consuming a sequence.
    fn emit_transfer(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        src: ChainId,
        dst: ChainId,
        recipient: AccountId,
        amount: Amount,
    ) -> SimResult<MsgId> {
        let model = self.guardian_model.clone();
        let mgr = self.get_mut(token, src)?;
        let seq = mgr.sequence;
        mgr.sequence += 1;
        let contract = mgr.contract;
        let payload = NttPayload {
            token: token.clone(),
            amount,
            recipient,
            sequence: seq,
        }
        .encode();
        let receiver = contract_address(token, dst);
        core.emit_message(src, contract, dst, receiver, payload, model)
    }

    fn debit(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        from: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        if mgr.is_hub() {
            let contract = mgr.contract;
            mgr.hub_locked = mgr
                .hub_locked
                .checked_add(amount)
                .ok_or(SimError::Overflow)?;
            core.lock(Standard::Ntt, token, contract, from, amount, origin)
        } else {
            core.burn(Standard::Ntt, token, from, amount, origin)
        }
    }

    /// Release a queued outbound transfer once its delay has fully elapsed.
    /// Completion does not consume outbound capacity; the wait replaces it.
    pub fn complete_outbound(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        seq: u64,
    ) -> SimResult<MsgId> {
        let now = core.now();
        let mgr = self.get_mut(token, chain)?;
        if mgr.paused {
            return Err(SimError::Paused);
        }
        let entry = mgr
            .outbound_queue
            .get(&seq)
            .ok_or_else(|| SimError::UnknownQueueEntry(format!("outbound #{seq}")))?
            .clone();
        let ready_at = entry.queued_tick + entry.window;
        if now < ready_at {
            return Err(SimError::StillQueued { until: ready_at });
        }
        let contract = mgr.contract;
        let model = self.guardian_model.clone();
        let sender = Address::new(chain, entry.sender);
        let payload = NttPayload {
            token: token.clone(),
            amount: entry.amount,
            recipient: entry.recipient,
            sequence: seq,
        }
        .encode();
        let receiver = contract_address(token, entry.dst);
        let msg = core.emit_message(chain, contract, entry.dst, receiver, payload, model)?;
        core.release(
            Standard::Ntt,
            token,
            contract,
            sender,
            entry.amount,
            SupplyOrigin::Queue,
        )?;
        self.debit(
            core,
            token,
            chain,
            sender,
            entry.amount,
            SupplyOrigin::QueuedSend { msg },
        )?;
        core.note_transfer_msg(msg, entry.transfer);
        core.record(EventKind::OutboundQueueCompleted {
            standard: Standard::Ntt,
            token: token.clone(),
            chain,
            seq,
            msg,
        });
        self.get_mut(token, chain)?.outbound_queue.remove(&seq);
        Ok(msg)
    }

    /// Return a queued outbound transfer to its sender. Only the sender may
    /// cancel, and only before completion.
    pub fn cancel_outbound(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        seq: u64,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        if mgr.paused {
            return Err(SimError::Paused);
        }
        let entry = mgr
            .outbound_queue
            .get(&seq)
            .ok_or_else(|| SimError::UnknownQueueEntry(format!("outbound #{seq}")))?
            .clone();
        if caller.value != entry.sender {
            return Err(SimError::Unauthorized(
                "only the sender may cancel a queued transfer".into(),
            ));
        }
        let contract = mgr.contract;
        core.release(
            Standard::Ntt,
            token,
            contract,
            Address::new(chain, entry.sender),
            entry.amount,
            SupplyOrigin::QueueCancel,
        )?;
        core.record(EventKind::OutboundQueueCancelled {
            standard: Standard::Ntt,
            token: token.clone(),
            chain,
            seq,
            amount: entry.amount,
        });
        core.log_transfer_cancelled(entry.transfer);
        self.get_mut(token, chain)?.outbound_queue.remove(&seq);
        Ok(())
    }

    /// Record a transceiver attestation for a delivered payload digest.
    pub fn attestation_received(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        transceiver: AccountId,
        digest: PayloadDigest,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        if !mgr.transceivers.contains(&transceiver) {
            return Err(SimError::Unauthorized(
                "transceiver is not registered with this manager".into(),
            ));
        }
        let set = mgr.attestations.entry(digest).or_default();
        if !set.insert(transceiver) {
            return Err(SimError::DuplicateAttestation(transceiver.to_string()));
        }
        Ok(())
    }

    /// Destination-side handler. Guardian quorum is already enforced by the
    /// message layer; this gate checks the manager's own transceiver
    /// threshold, then executes within inbound capacity or queues.
    pub fn handle_delivery(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        msg: &crate::message::CrossChainMessage,
    ) -> SimResult<DeliveryOutcome> {
        let now = core.now();
        let auto = self.auto_attest;
        let mgr = match self.get_mut(token, chain) {
            Ok(m) => m,
            Err(_) => return Ok(DeliveryOutcome::Rejected("no manager for token".into())),
        };
        if mgr.paused {
            return Ok(DeliveryOutcome::Rejected("receiver paused".into()));
        }
        match mgr.peers.get(&msg.src) {
            Some(peer) if *peer == msg.emitter.value => {}
            _ => return Ok(DeliveryOutcome::Rejected("emitter is not the peer".into())),
        }
        let payload = match NttPayload::decode(&msg.payload) {
            Ok(p) => p,
            Err(_) => return Ok(DeliveryOutcome::Rejected("malformed payload".into())),
        };
        if payload.token != *token {
            return Ok(DeliveryOutcome::Rejected("token mismatch".into()));
        }
        let digest = payload.digest();
        if auto {
            let transceivers: Vec<AccountId> = mgr.transceivers.iter().copied().collect();
            let set = mgr.attestations.entry(digest).or_default();
            for t in transceivers {
                set.insert(t);
            }
        }
        let have = mgr.attestation_count(&digest);
        if have < mgr.threshold {
            return Ok(DeliveryOutcome::Pending(PendingReason::BelowThreshold {
                have,
                need: mgr.threshold,
            }));
        }
        let recipient = Address::new(chain, payload.recipient);
        let capacity = match mgr.inbound_limits.get(&msg.src) {
            Some(limit) => limit.current(now),
            None => Amount::MAX,
        };
        if capacity < payload.amount {
            let window = mgr
                .inbound_limits
                .get(&msg.src)
                .map(|l| l.window())
                .expect("capacity below MAX implies a limiter");
            mgr.inbound_queue.insert(
                digest,
                QueuedInbound {
                    digest,
                    msg: msg.id,
                    src: msg.src,
                    recipient: recipient.value,
                    amount: payload.amount,
                    queued_tick: now,
                    window,
                },
            );
            core.record(EventKind::InboundQueued {
                standard: Standard::Ntt,
                token: token.clone(),
                chain,
                digest,
                msg: msg.id,
                recipient: recipient.value,
                amount: payload.amount,
            });
            return Ok(DeliveryOutcome::Delivered);
        }
        if let Some(limit) = self
            .get_mut(token, chain)?
            .inbound_limits
            .get_mut(&msg.src)
        {
            limit.try_consume(now, payload.amount).expect("checked above");
        }
        self.credit(
            core,
            token,
            chain,
            recipient,
            payload.amount,
            SupplyOrigin::Delivery { msg: msg.id },
        )?;
        core.log_transfer_settled(msg.id, payload.amount);
        Ok(DeliveryOutcome::Delivered)
    }

    fn credit(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        to: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        let mgr = self.get_mut(token, chain)?;
        if mgr.is_hub() {
            if mgr.hub_locked < amount {
                return Err(SimError::InvariantViolation(format!(
                    "hub escrow for {token} holds {} but must release {amount}",
                    mgr.hub_locked
                )));
            }
            mgr.hub_locked -= amount;
            let contract = mgr.contract;
            core.release(Standard::Ntt, token, contract, to, amount, origin)
        } else {
            core.mint(Standard::Ntt, token, to, amount, origin)
        }
    }

    /// Credit a queued inbound transfer once its delay has fully elapsed.
    pub fn complete_inbound(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        digest: PayloadDigest,
    ) -> SimResult<()> {
        let now = core.now();
        let mgr = self.get_mut(token, chain)?;
        if mgr.paused {
            return Err(SimError::Paused);
        }
        let entry = mgr
            .inbound_queue
            .get(&digest)
            .ok_or_else(|| SimError::UnknownQueueEntry(digest.short_hex()))?
            .clone();
        let ready_at = entry.queued_tick + entry.window;
        if now < ready_at {
            return Err(SimError::StillQueued { until: ready_at });
        }
        self.credit(
            core,
            token,
            chain,
            Address::new(chain, entry.recipient),
            entry.amount,
            SupplyOrigin::QueueRelease { msg: entry.msg },
        )?;
        core.record(EventKind::InboundQueueCompleted {
            standard: Standard::Ntt,
            token: token.clone(),
            chain,
            digest,
            msg: entry.msg,
        });
        core.log_transfer_settled(entry.msg, entry.amount);
        self.get_mut(token, chain)?.inbound_queue.remove(&digest);
        Ok(())
    }
}

/// Outcome of an outbound transfer: emitted immediately or queued.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferReceipt {
    Sent { transfer: u64, msg: MsgId },
    Queued { transfer: u64, seq: u64 },
}

impl TransferReceipt {
    pub fn msg(&self) -> Option<MsgId> {
        match self {
            TransferReceipt::Sent { msg, .. } => Some(*msg),
            TransferReceipt::Queued { .. } => None,
        }
    }

    pub fn transfer(&self) -> u64 {
        match self {
            TransferReceipt::Sent { transfer, .. } | TransferReceipt::Queued { transfer, .. } => {
                *transfer
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Simulation;

    fn two_chain_ntt(mode_hub: bool) -> (Simulation, TokenId, ChainId, ChainId) {
        let mut sim = Simulation::new();
        let a = sim.add_chain("alpha", 1, false, false).unwrap();
        let b = sim.add_chain("beta", 1, false, false).unwrap();
        let token = TokenId::new("NTK");
        sim.deploy_token(&token, a, 8, &[(Address::user(a, "alice"), 1_000_000)])
            .unwrap();
        sim.deploy_token(&token, b, 8, &[]).unwrap();
        let mode = if mode_hub {
            NttMode::HubSpokeLock { hub: a }
        } else {
            NttMode::BurnMint
        };
        let ca = contract_address(&token, a);
        let cb = contract_address(&token, b);
        for (chain, peer_chain, peer) in [(a, b, cb), (b, a, ca)] {
            let owner = Address::user(chain, "owner");
            let Simulation { core, ntt, .. } = &mut sim;
            ntt.deploy(core, &token, chain, owner, mode).unwrap();
            ntt.set_peer(&token, chain, owner, peer_chain, peer.value)
                .unwrap();
            let t = AccountId::derive("transceiver", &format!("wormhole:{chain}"));
            ntt.add_transceiver(&token, chain, owner, t).unwrap();
        }
        (sim, token, a, b)
    }

    #[test]
    fn burn_mint_transfer_round_trip() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        let receipt = ntt.transfer(core, &token, a, alice, b, bob, 700).unwrap();
        assert!(matches!(receipt, TransferReceipt::Sent { .. }));
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 999_300);
        sim.run_ticks(3).unwrap();
        assert_eq!(
            sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value),
            700
        );
    }

    #[test]
    fn hub_spoke_locks_on_hub_and_mints_on_spoke() {
        let (mut sim, token, a, b) = two_chain_ntt(true);
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.transfer(core, &token, a, alice, b, bob, 700).unwrap();
        // Hub supply unchanged, funds escrowed with the manager.
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 1_000_000);
        assert_eq!(ntt.get(&token, a).unwrap().hub_locked, 700);
        sim.run_ticks(3).unwrap();
        assert_eq!(
            sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value),
            700
        );
        // Return leg: spoke burns, hub releases escrow.
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.transfer(core, &token, b, bob, a, Address::user(a, "carol"), 200)
            .unwrap();
        sim.run_ticks(3).unwrap();
        let Simulation { core, ntt, .. } = &mut sim;
        assert_eq!(ntt.get(&token, a).unwrap().hub_locked, 500);
        assert_eq!(
            core.ledgers
                .get(&token, a)
                .unwrap()
                .balance_of(Address::user(a, "carol").value),
            200
        );
        assert_eq!(core.ledgers.get(&token, b).unwrap().total_supply(), 500);
    }

    #[test]
    fn outbound_over_capacity_queues_and_completes_after_window() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        let owner = Address::user(a, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.set_outbound_limit(core, &token, a, owner, 500, 100).unwrap();
        let receipt = ntt.transfer(core, &token, a, alice, b, bob, 800).unwrap();
        let TransferReceipt::Queued { seq, .. } = receipt else {
            panic!("expected queued transfer");
        };
        // Funds moved into custody, supply unchanged, sender debited.
        assert_eq!(core.ledgers.get(&token, a).unwrap().balance_of(alice.value), 999_200);
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 1_000_000);
        // Not executable one tick early.
        sim.run_ticks(99).unwrap();
        let Simulation { core, ntt, .. } = &mut sim;
        assert!(matches!(
            ntt.complete_outbound(core, &token, a, seq),
            Err(SimError::StillQueued { until: 100 })
        ));
        sim.run_ticks(1).unwrap();
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.complete_outbound(core, &token, a, seq).unwrap();
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 999_200);
        sim.run_ticks(3).unwrap();
        assert_eq!(
            sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value),
            800
        );
    }

    #[test]
    fn queued_completion_does_not_consume_capacity() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        let owner = Address::user(a, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.set_outbound_limit(core, &token, a, owner, 500, 100).unwrap();
        let TransferReceipt::Queued { seq, .. } =
            ntt.transfer(core, &token, a, alice, b, bob, 800).unwrap()
        else {
            panic!("expected queued transfer");
        };
        sim.run_ticks(100).unwrap();
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.complete_outbound(core, &token, a, seq).unwrap();
        // Full capacity remains for immediate sends.
        let capacity = ntt
            .get(&token, a)
            .unwrap()
            .outbound_limit
            .as_ref()
            .unwrap()
            .current(core.now());
        assert_eq!(capacity, 500);
    }

    #[test]
    fn cancel_returns_funds_and_is_sender_only() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        let owner = Address::user(a, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.set_outbound_limit(core, &token, a, owner, 500, 100).unwrap();
        let TransferReceipt::Queued { seq, .. } =
            ntt.transfer(core, &token, a, alice, b, bob, 800).unwrap()
        else {
            panic!("expected queued transfer");
        };
        let mallory = Address::user(a, "mallory");
        assert!(matches!(
            ntt.cancel_outbound(core, &token, a, mallory, seq),
            Err(SimError::Unauthorized(_))
        ));
        ntt.cancel_outbound(core, &token, a, alice, seq).unwrap();
        assert_eq!(
            core.ledgers.get(&token, a).unwrap().balance_of(alice.value),
            1_000_000
        );
        assert!(matches!(
            ntt.cancel_outbound(core, &token, a, alice, seq),
            Err(SimError::UnknownQueueEntry(_))
        ));
    }

    #[test]
    fn inbound_over_capacity_queues_on_destination() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        let owner_b = Address::user(b, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.set_inbound_limit(core, &token, b, owner_b, a, 300, 50).unwrap();
        ntt.transfer(core, &token, a, alice, b, bob, 800).unwrap();
        sim.run_ticks(3).unwrap();
        // Message delivered, but credit waits in the inbound queue.
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
        let digest = {
            let Simulation { ntt, .. } = &mut sim;
            let mgr = ntt.get(&token, b).unwrap();
            assert_eq!(mgr.inbound_queue.len(), 1);
            *mgr.inbound_queue.keys().next().unwrap()
        };
        let Simulation { core, ntt, .. } = &mut sim;
        assert!(matches!(
            ntt.complete_inbound(core, &token, b, digest),
            Err(SimError::StillQueued { .. })
        ));
        sim.run_ticks(50).unwrap();
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.complete_inbound(core, &token, b, digest).unwrap();
        assert_eq!(core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 800);
    }

    #[test]
    fn execution_waits_for_transceiver_threshold() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        sim.ntt.auto_attest = false;
        let owner_b = Address::user(b, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let second = AccountId::derive("transceiver", "axelar:b");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.add_transceiver(&token, b, owner_b, second).unwrap();
        ntt.set_threshold(&token, b, owner_b, 2).unwrap();
        let receipt = ntt.transfer(core, &token, a, alice, b, bob, 100).unwrap();
        let msg = receipt.msg().unwrap();
        sim.run_ticks(10).unwrap();
        // Guardian quorum met, transceiver gate not: nothing credited yet.
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
        let digest = NttPayload::decode(&sim.core.messages.get(msg).unwrap().payload)
            .unwrap()
            .digest();
        let first = AccountId::derive("transceiver", &format!("wormhole:{b}"));
        let Simulation { ntt, .. } = &mut sim;
        ntt.attestation_received(&token, b, first, digest).unwrap();
        assert!(matches!(
            ntt.attestation_received(&token, b, first, digest),
            Err(SimError::DuplicateAttestation(_))
        ));
        sim.run_ticks(1).unwrap();
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
        let Simulation { ntt, .. } = &mut sim;
        ntt.attestation_received(&token, b, second, digest).unwrap();
        sim.run_ticks(1).unwrap();
        assert_eq!(
            sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value),
            100
        );
    }

    #[test]
    fn guardian_quorum_below_threshold_stalls_message() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        // Seven withholding guardians leave only 12 of 19 attesting.
        for i in 0..7 {
            sim.compromise_verifier(&VerifierId::new(&format!("guardian-{i}")), true)
                .unwrap();
        }
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.transfer(core, &token, a, alice, b, bob, 100).unwrap();
        sim.run_ticks(20).unwrap();
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
        let attested = sim
            .core
            .messages
            .ids_with_status(&[crate::message::MsgStatus::Attested]);
        assert!(attested.is_empty());
    }

    #[test]
    fn pause_freezes_queues_and_transfers() {
        let (mut sim, token, a, b) = two_chain_ntt(false);
        let owner = Address::user(a, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, ntt, .. } = &mut sim;
        ntt.set_outbound_limit(core, &token, a, owner, 500, 100).unwrap();
        let TransferReceipt::Queued { seq, .. } =
            ntt.transfer(core, &token, a, alice, b, bob, 800).unwrap()
        else {
            panic!("expected queued transfer");
        };
        ntt.set_paused(core, &token, a, owner, true).unwrap();
        assert_eq!(
            ntt.transfer(core, &token, a, alice, b, bob, 1).unwrap_err(),
            SimError::Paused
        );
        sim.run_ticks(100).unwrap();
        let Simulation { core, ntt, .. } = &mut sim;
        assert_eq!(
            ntt.complete_outbound(core, &token, a, seq).unwrap_err(),
            SimError::Paused
        );
        assert_eq!(
            ntt.cancel_outbound(core, &token, a, alice, seq).unwrap_err(),
            SimError::Paused
        );
        ntt.set_paused(core, &token, a, owner, false).unwrap();
        ntt.complete_outbound(core, &token, a, seq).unwrap();
    }

    #[test]
    fn threshold_cannot_exceed_transceiver_count() {
        let (mut sim, token, a, _) = two_chain_ntt(false);
        let owner = Address::user(a, "owner");
        let Simulation { ntt, .. } = &mut sim;
        assert!(matches!(
            ntt.set_threshold(&token, a, owner, 2),
            Err(SimError::ThresholdTooHigh { threshold: 2, count: 1 })
        ));
        let only = AccountId::derive("transceiver", &format!("wormhole:{a}"));
        assert!(matches!(
            ntt.remove_transceiver(&token, a, owner, only),
            Err(SimError::ThresholdTooHigh { .. })
        ));
    }
}
