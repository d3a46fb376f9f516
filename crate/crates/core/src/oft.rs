//! Omnichain token standard: debit on the source, credit on the
//! destination, verified by a configurable DVN set.
//!
//! Amounts travel in shared decimals. The source truncates to the shared
//! precision and the sub-precision remainder (dust) never leaves the
//! sender's balance, so every wire amount is an exact multiple of
//! `10^(local - shared)` on both legs. A deployment either burns and mints
//! the token itself or, as an adapter, escrows a pre-existing token on its
//! native chain and releases from escrow on the way back.

use std::collections::BTreeMap;

use crate::chain::{Address, Amount, ChainId, AccountId, Tick};
use crate::error::{SimError, SimResult};
use crate::event::{
    BindingDetail, EventKind, FeeComponent, FeeCurrency, LimitScope, Standard, SupplyOrigin,
};
use crate::ledger::TokenId;
use crate::message::MsgId;
use crate::payload::OftPayload;
use crate::ratelimit::RateLimitState;
use crate::sim::{DeliveryOutcome, SimCore};
use crate::verify::VerificationModel;

/// `10^(local - shared)`, the conversion rate between local and shared
/// precision. Decimal gaps above 38 would not fit in a u128 amount.
pub fn decimal_conversion_rate(local: u8, shared: u8) -> SimResult<Amount> {
    if shared > local {
        return Err(SimError::SharedDecimalsTooLarge { shared, local });
    }
    let diff = (local - shared) as u32;
    if diff > 38 {
        return Err(SimError::Overflow);
    }
    Ok(10u128.pow(diff))
}

/// Truncate to shared precision: returns `(shared_amount, clean_local, dust)`
/// where `clean_local = shared_amount * rate` and dust stays with the sender.
pub fn remove_dust(
    amount_local: Amount,
    local: u8,
    shared: u8,
) -> SimResult<(Amount, Amount, Amount)> {
    let rate = decimal_conversion_rate(local, shared)?;
    let shared_amount = amount_local / rate;
    let clean = shared_amount * rate;
    Ok((shared_amount, clean, amount_local - clean))
}

/// Messaging fee schedule for a token's mesh. Fees are quoted in native
/// units of the source chain and never touch the token ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OftFeeModel {
    pub base: Amount,
    pub per_byte: Amount,
    pub dst_gas_prepay: Amount,
    /// Protocol fee switch; off by default, in which case the protocol
    /// component is exactly zero.
    pub fee_switch: bool,
    pub protocol_fee: Amount,
}

impl Default for OftFeeModel {
    fn default() -> Self {
        Self {
            base: 0,
            per_byte: 0,
            dst_gas_prepay: 0,
            fee_switch: false,
            protocol_fee: 0,
        }
    }
}

impl OftFeeModel {
    /// `(messaging, protocol)` fee for a payload of `payload_len` bytes.
    pub fn quote(&self, payload_len: usize) -> SimResult<(Amount, Amount)> {
        let size_cost = self
            .per_byte
            .checked_mul(payload_len as u128)
            .ok_or(SimError::Overflow)?;
        let messaging = self
            .base
            .checked_add(size_cost)
            .and_then(|v| v.checked_add(self.dst_gas_prepay))
            .ok_or(SimError::Overflow)?;
        let protocol = if self.fee_switch { self.protocol_fee } else { 0 };
        Ok((messaging, protocol))
    }
}

#[derive(Debug, Clone)]
pub struct OftDeployment {
    pub token: TokenId,
    pub chain: ChainId,
    pub contract: Address,
    pub owner: Address,
    /// Adapter deployments escrow an existing token instead of burning it.
    pub adapter: bool,
    pub local_decimals: u8,
    pub shared_decimals: u8,
    /// Trusted emitter per destination chain; sends to unlisted chains fail
    /// and deliveries from unlisted emitters are rejected.
    pub peers: BTreeMap<ChainId, AccountId>,
    pub model: VerificationModel,
    pub outbound_limit: Option<RateLimitState>,
    /// Message inspector: cap on the shared-unit amount per message.
    pub max_message_shared: Option<u64>,
    /// Escrowed balance (adapter only), in local units.
    pub locked: Amount,
    pub paused: bool,
}

impl OftDeployment {
    fn require_owner(&self, caller: Address) -> SimResult<()> {
        if caller != self.owner {
            return Err(SimError::Unauthorized(format!(
                "{caller} is not the owner of {} on {}",
                self.token, self.chain
            )));
        }
        Ok(())
    }
}

pub fn contract_address(token: &TokenId, chain: ChainId) -> Address {
    Address::contract(chain, &format!("oft:{token}"))
}

#[derive(Debug, Clone, Default)]
pub struct OftRegistry {
    deployments: BTreeMap<(TokenId, ChainId), OftDeployment>,
    fee_models: BTreeMap<TokenId, OftFeeModel>,
}

/// What `send` charged and moved; amounts the caller can assert against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SendReceipt {
    pub transfer: u64,
    pub msg: MsgId,
    pub amount_sent_local: Amount,
    pub amount_shared: u64,
    pub dust: Amount,
    pub messaging_fee: Amount,
    pub protocol_fee: Amount,
}

impl OftRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, token: &TokenId, chain: ChainId) -> SimResult<&OftDeployment> {
        self.deployments
            .get(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    fn get_mut(&mut self, token: &TokenId, chain: ChainId) -> SimResult<&mut OftDeployment> {
        self.deployments
            .get_mut(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    pub fn contains(&self, token: &TokenId, chain: ChainId) -> bool {
        self.deployments.contains_key(&(token.clone(), chain))
    }

    pub fn fee_model(&self, token: &TokenId) -> OftFeeModel {
        self.fee_models.get(token).cloned().unwrap_or_default()
    }

    pub fn set_fee_model(&mut self, token: &TokenId, model: OftFeeModel) {
        self.fee_models.insert(token.clone(), model);
    }

    /// Bind a deployment over an existing ledger. At most one adapter may
    /// exist per token; it escrows the original supply on its home chain.
    #[allow(clippy::too_many_arguments)]
    pub fn deploy(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        owner: Address,
        shared_decimals: u8,
        adapter: bool,
        model: VerificationModel,
    ) -> SimResult<Address> {
        let ledger = core.ledgers.get(token, chain)?;
        let local_decimals = ledger.decimals;
        decimal_conversion_rate(local_decimals, shared_decimals)?;
        model.validate()?;
        if !matches!(model, VerificationModel::DvnSet { .. }) {
            return Err(SimError::Config(
                "OFT deployments verify through a DVN set".into(),
            ));
        }
        let key = (token.clone(), chain);
        if self.deployments.contains_key(&key) {
            return Err(SimError::DuplicateToken {
                token: token.0.clone(),
                chain: chain.to_string(),
            });
        }
        if adapter
            && self
                .deployments
                .iter()
                .any(|((t, _), d)| t == token && d.adapter)
        {
            return Err(SimError::Config(format!(
                "{token} already has an adapter deployment"
            )));
        }
        let contract = contract_address(token, chain);
        core.verifiers.register_all(model.participants());
        self.deployments.insert(
            key,
            OftDeployment {
                token: token.clone(),
                chain,
                contract,
                owner,
                adapter,
                local_decimals,
                shared_decimals,
                peers: BTreeMap::new(),
                model: model.clone(),
                outbound_limit: None,
                max_message_shared: None,
                locked: 0,
                paused: false,
            },
        );
        core.record(EventKind::StandardBound {
            standard: Standard::Oft,
            token: token.clone(),
            chain,
            contract: contract.value,
            detail: BindingDetail::Oft {
                local_decimals,
                shared_decimals,
                adapter,
            },
        });
        Ok(contract)
    }

    /// Owner-only: trust `peer` as the emitter on `dst`. When the peer is a
    /// deployment this registry knows, its shared decimals must agree.
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
        let shared_here = {
            let dep = self.get(token, chain)?;
            dep.require_owner(caller)?;
            dep.shared_decimals
        };
        if let Ok(remote) = self.get(token, dst) {
            if remote.contract.value == peer && remote.shared_decimals != shared_here {
                return Err(SimError::Config(format!(
                    "shared decimals disagree: {} here, {} on {dst}",
                    shared_here, remote.shared_decimals
                )));
            }
        }
        self.get_mut(token, chain)?.peers.insert(dst, peer);
        Ok(())
    }

    pub fn set_verification_model(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        model: VerificationModel,
    ) -> SimResult<()> {
        model.validate()?;
        if !matches!(model, VerificationModel::DvnSet { .. }) {
            return Err(SimError::Config(
                "OFT deployments verify through a DVN set".into(),
            ));
        }
        let dep = self.get_mut(token, chain)?;
        dep.require_owner(caller)?;
        core.verifiers.register_all(model.participants());
        dep.model = model;
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
        let dep = self.get_mut(token, chain)?;
        dep.require_owner(caller)?;
        match dep.outbound_limit.as_mut() {
            Some(state) => state.reconfigure(limit, window, now)?,
            None => dep.outbound_limit = Some(RateLimitState::new(limit, window, now)?),
        }
        core.record(EventKind::RateLimitConfigured {
            standard: Standard::Oft,
            token: token.clone(),
            chain,
            scope: LimitScope::Outbound,
            limit,
            window,
        });
        Ok(())
    }

    pub fn set_inspector(
        &mut self,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        max_message_shared: Option<u64>,
    ) -> SimResult<()> {
        let dep = self.get_mut(token, chain)?;
        dep.require_owner(caller)?;
        dep.max_message_shared = max_message_shared;
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
            standard: Standard::Oft,
            token: Some(token.clone()),
            chain,
            paused,
        });
        Ok(())
    }

    /// Token whose deployment contract occupies `value` on `chain`.
    pub fn receiver_token(&self, chain: ChainId, value: &AccountId) -> Option<TokenId> {
        self.deployments
            .keys()
            .find(|(t, c)| *c == chain && contract_address(t, chain).value == *value)
            .map(|(t, _)| t.clone())
    }

    /// Verification model deliveries to this deployment run under.
    pub fn verification_model(
        &self,
        token: &TokenId,
        chain: ChainId,
    ) -> Option<VerificationModel> {
        self.deployments
            .get(&(token.clone(), chain))
            .map(|d| d.model.clone())
    }

    /// Quote the fee for a send without executing it.
    pub fn quote_send(&self, token: &TokenId) -> SimResult<(Amount, Amount)> {
        self.fee_model(token).quote(OftPayload::ENCODED_LEN)
    }

    /// Debit the source side and emit a message carrying the shared-unit
    /// amount. `min_amount_local` guards against truncation below what the
    /// sender will accept.
    #[allow(clippy::too_many_arguments)]
    pub fn send(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        src: ChainId,
        sender: Address,
        dst: ChainId,
        recipient: Address,
        amount_local: Amount,
        min_amount_local: Amount,
    ) -> SimResult<SendReceipt> {
        if recipient.chain != dst {
            return Err(SimError::ForeignAddress {
                address: recipient.to_string(),
                chain: dst.to_string(),
            });
        }
        core.chains.get(dst)?;
        let now = core.now();
        let dep = self.get(token, src)?;
        if dep.paused {
            return Err(SimError::Paused);
        }
        let peer = *dep
            .peers
            .get(&dst)
            .ok_or_else(|| SimError::UnknownPeer(dst.to_string()))?;
        let (shared_amount, clean, dust) =
            remove_dust(amount_local, dep.local_decimals, dep.shared_decimals)?;
        if clean < min_amount_local {
            return Err(SimError::Slippage {
                clean,
                floor: min_amount_local,
            });
        }
        if clean == 0 {
            return Err(SimError::InvalidAmount(
                "amount rounds to zero in shared decimals".into(),
            ));
        }
        let shared_u64 =
            u64::try_from(shared_amount).map_err(|_| SimError::Overflow)?;
        if let Some(cap) = dep.max_message_shared {
            if shared_u64 > cap {
                return Err(SimError::InspectorRejected);
            }
        }
        let have = core.ledgers.get(token, src)?.balance_of(sender.value);
        if have < amount_local {
            return Err(SimError::InsufficientBalance {
                have,
                need: amount_local,
            });
        }
        if let Some(limit) = dep.outbound_limit.as_ref() {
            let available = limit.current(now);
            if available < clean {
                return Err(SimError::RateLimited {
                    capacity: available,
                    requested: clean,
                });
            }
        }
        let (messaging_fee, protocol_fee) = self.fee_model(token).quote(OftPayload::ENCODED_LEN)?;
        let model = dep.model.clone();
        let contract = dep.contract;
        let adapter = dep.adapter;
        let payload = OftPayload {
            recipient: recipient.value,
            amount_shared: shared_u64,
            nonce: core.messages.peek_nonce(contract),
        }
        .encode();
        let receiver = Address::new(dst, peer);
        let msg = core.emit_message(src, contract, dst, receiver, payload, model)?;
        let dep = self.get_mut(token, src)?;
        if let Some(limit) = dep.outbound_limit.as_mut() {
            limit.try_consume(now, clean).expect("checked above");
        }
        if adapter {
            dep.locked = dep.locked.checked_add(clean).ok_or(SimError::Overflow)?;
            core.lock(
                Standard::Oft,
                token,
                contract,
                sender,
                clean,
                SupplyOrigin::Send { msg },
            )?;
        } else {
            core.burn(Standard::Oft, token, sender, clean, SupplyOrigin::Send { msg })?;
        }
        // Destination credit in its local units; display-only if the remote
        // deployment is not known to this registry.
        let expected = match self.get(token, dst) {
            Ok(remote) => {
                let rate =
                    decimal_conversion_rate(remote.local_decimals, remote.shared_decimals)?;
                shared_amount.checked_mul(rate).ok_or(SimError::Overflow)?
            }
            Err(_) => shared_amount,
        };
        let transfer = core.log_transfer_initiated(
            Standard::Oft,
            token,
            src,
            dst,
            sender.value,
            recipient.value,
            clean,
            expected,
            Some(msg),
            None,
        );
        core.record(EventKind::FeeCharged {
            transfer,
            standard: Standard::Oft,
            component: FeeComponent::Messaging,
            currency: FeeCurrency::NativeUnits,
            amount: messaging_fee,
        });
        if protocol_fee > 0 {
            core.record(EventKind::FeeCharged {
                transfer,
                standard: Standard::Oft,
                component: FeeComponent::Protocol,
                currency: FeeCurrency::NativeUnits,
                amount: protocol_fee,
            });
        }
        Ok(SendReceipt {
            transfer,
            msg,
            amount_sent_local: clean,
            amount_shared: shared_u64,
            dust,
            messaging_fee,
            protocol_fee,
        })
    }

    /// Destination-side handler: scale the shared amount into local units
    /// and mint, or release escrow on an adapter. Escrow release beyond the
    /// locked balance is a conservation break and halts the run.
    pub fn handle_delivery(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        msg: &crate::message::CrossChainMessage,
    ) -> SimResult<DeliveryOutcome> {
        let dep = match self.get_mut(token, chain) {
            Ok(d) => d,
            Err(_) => return Ok(DeliveryOutcome::Rejected("token not deployed".into())),
        };
        if dep.paused {
            return Ok(DeliveryOutcome::Rejected("receiver paused".into()));
        }
        match dep.peers.get(&msg.src) {
            Some(peer) if *peer == msg.emitter.value => {}
            _ => return Ok(DeliveryOutcome::Rejected("emitter is not the peer".into())),
        }
        let payload = match OftPayload::decode(&msg.payload) {
            Ok(p) => p,
            Err(_) => return Ok(DeliveryOutcome::Rejected("malformed payload".into())),
        };
        let rate = decimal_conversion_rate(dep.local_decimals, dep.shared_decimals)?;
        let amount_local = (payload.amount_shared as u128)
            .checked_mul(rate)
            .ok_or(SimError::Overflow)?;
        let recipient = Address::new(chain, payload.recipient);
        let adapter = dep.adapter;
        let contract = dep.contract;
        if adapter {
            if dep.locked < amount_local {
                return Err(SimError::InvariantViolation(format!(
                    "adapter escrow for {token} on {chain} holds {} but must release {}",
                    dep.locked, amount_local
                )));
            }
            dep.locked -= amount_local;
            core.release(
                Standard::Oft,
                token,
                contract,
                recipient,
                amount_local,
                SupplyOrigin::Delivery { msg: msg.id },
            )?;
        } else {
            core.mint(
                Standard::Oft,
                token,
                recipient,
                amount_local,
                SupplyOrigin::Delivery { msg: msg.id },
            )?;
        }
        core.log_transfer_settled(msg.id, amount_local);
        Ok(DeliveryOutcome::Delivered)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Simulation;
    use crate::verify::VerifierId;

    fn dvn_model(required: &[&str], optional: &[&str], threshold: usize) -> VerificationModel {
        VerificationModel::DvnSet {
            required: required.iter().map(|s| VerifierId::new(*s)).collect(),
            optional: optional.iter().map(|s| VerifierId::new(*s)).collect(),
            optional_threshold: threshold,
        }
    }

    fn mesh() -> (Simulation, TokenId, ChainId, ChainId) {
        let mut sim = Simulation::new();
        let a = sim.add_chain("alpha", 1, false, false).unwrap();
        let b = sim.add_chain("beta", 1, false, false).unwrap();
        let token = TokenId::new("OFT");
        let model = dvn_model(&["dvn-a", "dvn-b"], &[], 0);
        sim.register_verifiers(&["dvn-a", "dvn-b"]);
        sim.deploy_token(&token, a, 18, &[(Address::user(a, "alice"), 10u128.pow(21))])
            .unwrap();
        sim.deploy_token(&token, b, 6, &[]).unwrap();
        let owner_a = Address::user(a, "owner");
        let owner_b = Address::user(b, "owner");
        let Simulation { core, oft, .. } = &mut sim;
        let ca = oft
            .deploy(core, &token, a, owner_a, 6, false, model.clone())
            .unwrap();
        let cb = oft.deploy(core, &token, b, owner_b, 6, false, model).unwrap();
        oft.set_peer(&token, a, owner_a, b, cb.value).unwrap();
        oft.set_peer(&token, b, owner_b, a, ca.value).unwrap();
        (sim, token, a, b)
    }

    #[test]
    fn dust_removal_matches_worked_example() {
        let (shared, clean, dust) = remove_dust(1_234_567_891_234_567_890, 18, 6).unwrap();
        assert_eq!(shared, 1_234_567);
        assert_eq!(clean, 1_234_567_000_000_000_000);
        assert_eq!(dust, 891_234_567_890);
    }

    #[test]
    fn shared_decimals_above_local_rejected() {
        assert!(matches!(
            remove_dust(1, 6, 18),
            Err(SimError::SharedDecimalsTooLarge { shared: 18, local: 6 })
        ));
    }

    #[test]
    fn send_keeps_dust_with_sender_and_credits_scaled() {
        let (mut sim, token, a, b) = mesh();
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let amount = 1_234_567_891_234_567_890u128;
        let Simulation { core, oft, .. } = &mut sim;
        let receipt = oft.send(core, &token, a, alice, b, bob, amount, 0).unwrap();
        assert_eq!(receipt.amount_sent_local, 1_234_567_000_000_000_000);
        assert_eq!(receipt.dust, 891_234_567_890);
        let src_balance = core.ledgers.get(&token, a).unwrap().balance_of(alice.value);
        assert_eq!(src_balance, 10u128.pow(21) - 1_234_567_000_000_000_000);
        sim.run_ticks(3).unwrap();
        // 6 local decimals on the destination: 1_234_567 shared units.
        assert_eq!(
            sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value),
            1_234_567
        );
    }

    #[test]
    fn slippage_floor_rejects_truncated_amount() {
        let (mut sim, token, a, b) = mesh();
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let amount = 1_000_000_000_000_500_000u128;
        let Simulation { core, oft, .. } = &mut sim;
        let err = oft
            .send(core, &token, a, alice, b, bob, amount, amount)
            .unwrap_err();
        assert!(matches!(err, SimError::Slippage { .. }));
    }

    #[test]
    fn send_to_peerless_chain_fails() {
        let (mut sim, token, a, _) = mesh();
        let c = sim.add_chain("gamma", 1, false, false).unwrap();
        let alice = Address::user(a, "alice");
        let Simulation { core, oft, .. } = &mut sim;
        assert!(matches!(
            oft.send(core, &token, a, alice, c, Address::user(c, "x"), 10u128.pow(12), 0)
                .unwrap_err(),
            SimError::UnknownPeer(_)
        ));
    }

    #[test]
    fn delivery_from_non_peer_emitter_rejected() {
        let (mut sim, token, a, b) = mesh();
        // Re-point b's peer away from a's contract, then send from a.
        let owner_b = Address::user(b, "owner");
        let alice = Address::user(a, "alice");
        let Simulation { core, oft, .. } = &mut sim;
        oft.set_peer(&token, b, owner_b, a, AccountId::derive("contract", "someone-else"))
            .unwrap();
        oft.send(core, &token, a, alice, b, Address::user(b, "bob"), 10u128.pow(13), 0)
            .unwrap();
        sim.run_ticks(3).unwrap();
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
        let rejected = sim
            .core
            .messages
            .ids_with_status(&[crate::message::MsgStatus::Rejected]);
        assert_eq!(rejected.len(), 1);
    }

    #[test]
    fn fee_defaults_are_zero_and_quote_is_linear_in_size() {
        let (m0, p0) = OftFeeModel::default().quote(OftPayload::ENCODED_LEN).unwrap();
        assert_eq!((m0, p0), (0, 0));
        let model = OftFeeModel {
            base: 100,
            per_byte: 1,
            dst_gas_prepay: 50,
            fee_switch: false,
            protocol_fee: 25,
        };
        let (m1, p1) = model.quote(OftPayload::ENCODED_LEN).unwrap();
        assert_eq!(m1, 100 + OftPayload::ENCODED_LEN as u128 + 50);
        // Fee switch off keeps the protocol component at exactly zero.
        assert_eq!(p1, 0);
        let switched = OftFeeModel { fee_switch: true, ..model };
        let (m2, p2) = switched.quote(OftPayload::ENCODED_LEN).unwrap();
        assert_eq!(m2, m1);
        assert_eq!(p2, 25);
        // 32 extra payload bytes cost exactly 32 units at per_byte = 1.
        let (m3, _) = model.quote(OftPayload::ENCODED_LEN + 32).unwrap();
        assert_eq!(m3, m1 + 32);
    }

    #[test]
    fn outbound_limit_bounds_clean_amount() {
        let (mut sim, token, a, b) = mesh();
        let alice = Address::user(a, "alice");
        let owner_a = Address::user(a, "owner");
        let Simulation { core, oft, .. } = &mut sim;
        oft.set_outbound_limit(core, &token, a, owner_a, 2 * 10u128.pow(12), 100)
            .unwrap();
        oft.send(core, &token, a, alice, b, Address::user(b, "bob"), 10u128.pow(12), 0)
            .unwrap();
        let err = oft
            .send(core, &token, a, alice, b, Address::user(b, "bob"), 2 * 10u128.pow(12), 0)
            .unwrap_err();
        assert!(matches!(err, SimError::RateLimited { .. }));
    }

    #[test]
    fn inspector_caps_shared_amount() {
        let (mut sim, token, a, b) = mesh();
        let alice = Address::user(a, "alice");
        let owner_a = Address::user(a, "owner");
        let Simulation { core, oft, .. } = &mut sim;
        oft.set_inspector(&token, a, owner_a, Some(10)).unwrap();
        assert_eq!(
            oft.send(core, &token, a, alice, b, Address::user(b, "bob"), 11 * 10u128.pow(12), 0)
                .unwrap_err(),
            SimError::InspectorRejected
        );
        oft.send(core, &token, a, alice, b, Address::user(b, "bob"), 10 * 10u128.pow(12), 0)
            .unwrap();
    }

    #[test]
    fn adapter_round_trip_escrows_and_releases() {
        let mut sim = Simulation::new();
        let a = sim.add_chain("native", 1, false, false).unwrap();
        let b = sim.add_chain("remote", 1, false, false).unwrap();
        let token = TokenId::new("ADA");
        sim.register_verifiers(&["dvn-a"]);
        let model = dvn_model(&["dvn-a"], &[], 0);
        sim.deploy_token(&token, a, 6, &[(Address::user(a, "alice"), 1_000_000)])
            .unwrap();
        sim.deploy_token(&token, b, 6, &[]).unwrap();
        let owner_a = Address::user(a, "owner");
        let owner_b = Address::user(b, "owner");
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let Simulation { core, oft, .. } = &mut sim;
        let ca = oft
            .deploy(core, &token, a, owner_a, 6, true, model.clone())
            .unwrap();
        let cb = oft.deploy(core, &token, b, owner_b, 6, false, model).unwrap();
        oft.set_peer(&token, a, owner_a, b, cb.value).unwrap();
        oft.set_peer(&token, b, owner_b, a, ca.value).unwrap();
        oft.send(core, &token, a, alice, b, bob, 400, 0).unwrap();
        assert_eq!(oft.get(&token, a).unwrap().locked, 400);
        assert_eq!(
            core.ledgers.get(&token, a).unwrap().balance_of(ca.value),
            400
        );
        sim.run_ticks(3).unwrap();
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 400);
        // Send back: the adapter releases from escrow instead of minting.
        let Simulation { core, oft, .. } = &mut sim;
        oft.send(core, &token, b, bob, a, alice, 150, 0).unwrap();
        sim.run_ticks(3).unwrap();
        let Simulation { core, oft, .. } = &mut sim;
        assert_eq!(oft.get(&token, a).unwrap().locked, 250);
        assert_eq!(core.ledgers.get(&token, a).unwrap().balance_of(alice.value), 999_750);
        // Total native supply never changed: escrow moves, supply does not.
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 1_000_000);
    }

    #[test]
    fn second_adapter_for_same_token_rejected() {
        let mut sim = Simulation::new();
        let a = sim.add_chain("native", 1, false, false).unwrap();
        let b = sim.add_chain("other", 1, false, false).unwrap();
        let token = TokenId::new("ADA");
        sim.register_verifiers(&["dvn-a"]);
        let model = dvn_model(&["dvn-a"], &[], 0);
        sim.deploy_token(&token, a, 6, &[]).unwrap();
        sim.deploy_token(&token, b, 6, &[]).unwrap();
        let Simulation { core, oft, .. } = &mut sim;
        oft.deploy(core, &token, a, Address::user(a, "o"), 6, true, model.clone())
            .unwrap();
        assert!(matches!(
            oft.deploy(core, &token, b, Address::user(b, "o"), 6, true, model),
            Err(SimError::Config(_))
        ));
    }
}
