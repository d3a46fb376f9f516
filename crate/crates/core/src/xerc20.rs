//! Whitelisted-bridge token standard with per-bridge replenishing limits.
//!
//! A deployment whitelists bridge contracts and assigns each an independent
//! minting and burning limiter. Any message layer may drive a whitelisted
//! bridge; the trust boundary is the limit schedule itself: a fully
//! compromised bridge can never mint faster than its limiter replenishes.
//! An optional lockbox locks a legacy token 1:1 against fresh supply on the
//! native chain, which re-introduces lock-and-mint on top of burn-and-mint.

use std::collections::BTreeMap;

use crate::chain::{amt_mul, AccountId, Address, Amount, ChainId, Tick};
use crate::error::{SimError, SimResult};
use crate::event::{
    EventKind, FeeComponent, FeeCurrency, LimitScope, Standard, SupplyOrigin,
};
use crate::ledger::TokenId;
use crate::message::MsgId;
use crate::payload::XErc20Payload;
use crate::ratelimit::RateLimitState;
use crate::sim::{DeliveryOutcome, SimCore};
use crate::verify::VerificationModel;

/// Per-bridge limiters. Mint and burn replenish independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeLimits {
    pub mint: RateLimitState,
    pub burn: RateLimitState,
}

#[derive(Debug, Clone)]
pub struct Lockbox {
    pub legacy_token: TokenId,
    pub account: Address,
    pub locked: Amount,
}

#[derive(Debug, Clone)]
pub struct XErc20Token {
    pub token: TokenId,
    pub chain: ChainId,
    pub contract: Address,
    pub issuer: Address,
    pub bridge_limits: BTreeMap<AccountId, BridgeLimits>,
    pub lockbox: Option<Lockbox>,
    pub paused: bool,
}

impl XErc20Token {
    fn require_issuer(&self, caller: Address) -> SimResult<()> {
        if caller != self.issuer {
            return Err(SimError::Unauthorized(format!(
                "{caller} is not the issuer of {} on {}",
                self.token, self.chain
            )));
        }
        Ok(())
    }
}

/// Deterministic contract address of a deployment; senders derive the
/// destination-side receiver from the same rule.
pub fn contract_address(token: &TokenId, chain: ChainId) -> Address {
    Address::contract(chain, &format!("xerc20:{token}"))
}

fn lockbox_address(token: &TokenId, chain: ChainId) -> Address {
    Address::contract(chain, &format!("xerc20-lockbox:{token}"))
}

#[derive(Debug, Clone, Default)]
pub struct XErc20Registry {
    tokens: BTreeMap<(TokenId, ChainId), XErc20Token>,
    /// Fast-liquidity fee taken by a bridge, in basis points of the moved
    /// amount, minted to the bridge's own account on the destination chain.
    bridge_fee_bps: BTreeMap<AccountId, u32>,
}

impl XErc20Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, token: &TokenId, chain: ChainId) -> SimResult<&XErc20Token> {
        self.tokens
            .get(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    fn get_mut(&mut self, token: &TokenId, chain: ChainId) -> SimResult<&mut XErc20Token> {
        self.tokens
            .get_mut(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    pub fn contains(&self, token: &TokenId, chain: ChainId) -> bool {
        self.tokens.contains_key(&(token.clone(), chain))
    }

    /// Bind a deployment over an existing ledger. Returns the contract
    /// address under which deliveries are dispatched.
    pub fn deploy(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        issuer: Address,
    ) -> SimResult<Address> {
        core.ledgers.get(token, chain)?;
        let key = (token.clone(), chain);
        if self.tokens.contains_key(&key) {
            return Err(SimError::DuplicateToken {
                token: token.0.clone(),
                chain: chain.to_string(),
            });
        }
        let contract = contract_address(token, chain);
        self.tokens.insert(
            key,
            XErc20Token {
                token: token.clone(),
                chain,
                contract,
                issuer,
                bridge_limits: BTreeMap::new(),
                lockbox: None,
                paused: false,
            },
        );
        core.record(EventKind::StandardBound {
            standard: Standard::Xerc20,
            token: token.clone(),
            chain,
            contract: contract.value,
            detail: crate::event::BindingDetail::Xerc20,
        });
        Ok(contract)
    }

    /// Issuer-only: replace a bridge's limits. Carried capacity is clamped
    /// to the new maximum; raising a limit grants no instant capacity.
    #[allow(clippy::too_many_arguments)]
    pub fn set_limits(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        bridge: Address,
        mint_limit: Amount,
        burn_limit: Amount,
        window: Tick,
    ) -> SimResult<()> {
        if bridge.chain != chain {
            return Err(SimError::ForeignAddress {
                address: bridge.to_string(),
                chain: chain.to_string(),
            });
        }
        let now = core.now();
        let dep = self.get_mut(token, chain)?;
        dep.require_issuer(caller)?;
        match dep.bridge_limits.get_mut(&bridge.value) {
            Some(entry) => {
                entry.mint.reconfigure(mint_limit, window, now)?;
                entry.burn.reconfigure(burn_limit, window, now)?;
            }
            None => {
                dep.bridge_limits.insert(
                    bridge.value,
                    BridgeLimits {
                        mint: RateLimitState::new(mint_limit, window, now)?,
                        burn: RateLimitState::new(burn_limit, window, now)?,
                    },
                );
            }
        }
        for (scope, limit) in [
            (LimitScope::MintBy { bridge: bridge.value }, mint_limit),
            (LimitScope::BurnBy { bridge: bridge.value }, burn_limit),
        ] {
            core.record(EventKind::RateLimitConfigured {
                standard: Standard::Xerc20,
                token: token.clone(),
                chain,
                scope,
                limit,
                window,
            });
        }
        Ok(())
    }

    /// Configure a bridge's fast-liquidity fee rate.
    pub fn set_bridge_fee_bps(&mut self, bridge: AccountId, bps: u32) -> SimResult<()> {
        if bps > 10_000 {
            return Err(SimError::Config(format!(
                "bridge fee {bps} bps exceeds 100%"
            )));
        }
        self.bridge_fee_bps.insert(bridge, bps);
        Ok(())
    }

    pub fn bridge_fee_bps(&self, bridge: &AccountId) -> u32 {
        self.bridge_fee_bps.get(bridge).copied().unwrap_or(0)
    }

    /// `(mint_max, mint_current, burn_max, burn_current)` as of `now`;
    /// all-zero for a bridge without a limits entry.
    pub fn query_limits(
        &self,
        now: Tick,
        token: &TokenId,
        chain: ChainId,
        bridge: AccountId,
    ) -> (Amount, Amount, Amount, Amount) {
        match self
            .tokens
            .get(&(token.clone(), chain))
            .and_then(|d| d.bridge_limits.get(&bridge))
        {
            Some(entry) => (
                entry.mint.limit(),
                entry.mint.current(now),
                entry.burn.limit(),
                entry.burn.current(now),
            ),
            None => (0, 0, 0, 0),
        }
    }

    /// Privileged mint by a whitelisted bridge, consuming its mint limiter.
    pub fn bridge_mint(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        bridge: Address,
        to: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        let now = core.now();
        let dep = self.get_mut(token, chain)?;
        if dep.paused {
            return Err(SimError::Paused);
        }
        let entry = dep
            .bridge_limits
            .get_mut(&bridge.value)
            .ok_or_else(|| SimError::Unauthorized(format!("{bridge} is not whitelisted")))?;
        entry.mint.try_consume(now, amount)?;
        core.mint(Standard::Xerc20, token, to, amount, origin)
    }

    /// Privileged burn by a whitelisted bridge, consuming its burn limiter.
    /// Balance is checked before any capacity is consumed.
    pub fn bridge_burn(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        bridge: Address,
        from: Address,
        amount: Amount,
        origin: SupplyOrigin,
    ) -> SimResult<()> {
        let now = core.now();
        let have = core.ledgers.get(token, chain)?.balance_of(from.value);
        let dep = self.get_mut(token, chain)?;
        if dep.paused {
            return Err(SimError::Paused);
        }
        let entry = dep
            .bridge_limits
            .get_mut(&bridge.value)
            .ok_or_else(|| SimError::Unauthorized(format!("{bridge} is not whitelisted")))?;
        if have < amount {
            return Err(SimError::InsufficientBalance {
                have,
                need: amount,
            });
        }
        entry.burn.try_consume(now, amount)?;
        core.burn(Standard::Xerc20, token, from, amount, origin)
    }

    /// Issuer-only: attach a lockbox for a legacy token on the same chain.
    pub fn set_lockbox(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        caller: Address,
        legacy_token: &TokenId,
    ) -> SimResult<()> {
        core.ledgers.get(legacy_token, chain)?;
        let account = lockbox_address(token, chain);
        let dep = self.get_mut(token, chain)?;
        dep.require_issuer(caller)?;
        if dep.lockbox.is_some() {
            return Err(SimError::Config(format!(
                "{token} on {chain} already has a lockbox"
            )));
        }
        dep.lockbox = Some(Lockbox {
            legacy_token: legacy_token.clone(),
            account,
            locked: 0,
        });
        core.record(EventKind::StandardBound {
            standard: Standard::Xerc20,
            token: token.clone(),
            chain,
            contract: account.value,
            detail: crate::event::BindingDetail::Xerc20Lockbox {
                legacy_token: legacy_token.clone(),
            },
        });
        Ok(())
    }

    /// Lock legacy tokens 1:1 against freshly minted supply.
    pub fn lockbox_deposit(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        user: Address,
        amount: Amount,
    ) -> SimResult<()> {
        let dep = self.get_mut(token, chain)?;
        if dep.paused {
            return Err(SimError::Paused);
        }
        let lockbox = dep
            .lockbox
            .as_mut()
            .ok_or_else(|| SimError::Config(format!("{token} on {chain} has no lockbox")))?;
        let legacy = lockbox.legacy_token.clone();
        let account = lockbox.account;
        core.lock(
            Standard::Xerc20,
            &legacy,
            account,
            user,
            amount,
            SupplyOrigin::Lockbox,
        )?;
        core.mint(Standard::Xerc20, token, user, amount, SupplyOrigin::Lockbox)?;
        // Re-borrow: the ledger ops above needed the core mutably.
        let dep = self.get_mut(token, chain)?;
        let lockbox = dep.lockbox.as_mut().expect("lockbox checked above");
        lockbox.locked = lockbox
            .locked
            .checked_add(amount)
            .ok_or(SimError::Overflow)?;
        Ok(())
    }

    /// Burn supply and release the matching legacy tokens.
    pub fn lockbox_withdraw(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        user: Address,
        amount: Amount,
    ) -> SimResult<()> {
        let dep = self.get_mut(token, chain)?;
        if dep.paused {
            return Err(SimError::Paused);
        }
        let lockbox = dep
            .lockbox
            .as_ref()
            .ok_or_else(|| SimError::Config(format!("{token} on {chain} has no lockbox")))?;
        if lockbox.locked < amount {
            return Err(SimError::InsufficientBalance {
                have: lockbox.locked,
                need: amount,
            });
        }
        let legacy = lockbox.legacy_token.clone();
        let account = lockbox.account;
        core.burn(Standard::Xerc20, token, user, amount, SupplyOrigin::Lockbox)?;
        core.release(
            Standard::Xerc20,
            &legacy,
            account,
            user,
            amount,
            SupplyOrigin::Lockbox,
        )?;
        let dep = self.get_mut(token, chain)?;
        let lockbox = dep.lockbox.as_mut().expect("lockbox checked above");
        lockbox.locked -= amount;
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
        self.get_mut(token, chain)?.require_issuer(caller)?;
        self.force_set_paused(core, token, chain, paused)
    }

    /// Pause without the issuer gate; scenario scripts act as the operator.
    pub fn force_set_paused(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        paused: bool,
    ) -> SimResult<()> {
        self.get_mut(token, chain)?.paused = paused;
        core.record(EventKind::PauseSet {
            standard: Standard::Xerc20,
            token: Some(token.clone()),
            chain,
            paused,
        });
        Ok(())
    }

    /// Token whose deployment contract occupies `value` on `chain`.
    pub fn receiver_token(&self, chain: ChainId, value: &AccountId) -> Option<TokenId> {
        self.tokens
            .keys()
            .find(|(t, c)| *c == chain && contract_address(t, chain).value == *value)
            .map(|(t, _)| t.clone())
    }

    /// Message-layer model for deliveries to this deployment: a whitelist
    /// snapshot of its currently configured bridges.
    pub fn verification_model(&self, token: &TokenId, chain: ChainId) -> VerificationModel {
        let trusted_bridges = self
            .tokens
            .get(&(token.clone(), chain))
            .map(|t| t.bridge_limits.keys().cloned().collect())
            .unwrap_or_default();
        VerificationModel::BridgeWhitelist { trusted_bridges }
    }

    /// Cross-chain send through a whitelisted bridge: burn on the source
    /// under the bridge's burn limiter, emit a message the destination-side
    /// deployment will mint from under the same bridge's mint limiter.
    #[allow(clippy::too_many_arguments)]
    pub fn send(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        src: ChainId,
        bridge: Address,
        sender: Address,
        dst: ChainId,
        recipient: Address,
        amount: Amount,
    ) -> SimResult<(u64, MsgId)> {
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
        let entry = dep
            .bridge_limits
            .get(&bridge.value)
            .ok_or_else(|| SimError::Unauthorized(format!("{bridge} is not whitelisted")))?;
        let available = entry.burn.current(now);
        if available < amount {
            return Err(SimError::RateLimited {
                capacity: available,
                requested: amount,
            });
        }
        let have = core.ledgers.get(token, src)?.balance_of(sender.value);
        if have < amount {
            return Err(SimError::InsufficientBalance {
                have,
                need: amount,
            });
        }
        let fee = fast_liquidity_fee(amount, self.bridge_fee_bps(&bridge.value))?;
        let model = VerificationModel::BridgeWhitelist {
            trusted_bridges: dep.bridge_limits.keys().copied().collect(),
        };
        let payload = XErc20Payload {
            token: token.clone(),
            recipient: recipient.value,
            amount,
            src_nonce: core.messages.peek_nonce(bridge),
        }
        .encode();
        let receiver = contract_address(token, dst);
        let msg = core.emit_message(src, bridge, dst, receiver, payload, model)?;
        self.bridge_burn(
            core,
            token,
            src,
            bridge,
            sender,
            amount,
            SupplyOrigin::Send { msg },
        )?;
        let transfer = core.log_transfer_initiated(
            Standard::Xerc20,
            token,
            src,
            dst,
            sender.value,
            recipient.value,
            amount,
            amount - fee,
            Some(msg),
            None,
        );
        Ok((transfer, msg))
    }

    /// Destination-side handler. The emitter is treated as the bridge and
    /// must hold a limits entry on this deployment; its mint limiter bounds
    /// the credit, forged or not.
    pub fn handle_delivery(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        msg: &crate::message::CrossChainMessage,
    ) -> SimResult<DeliveryOutcome> {
        let now = core.now();
        let dep = match self.get_mut(token, chain) {
            Ok(d) => d,
            Err(_) => return Ok(DeliveryOutcome::Rejected("token not deployed".into())),
        };
        if dep.paused {
            return Ok(DeliveryOutcome::Rejected("receiver paused".into()));
        }
        let payload = match XErc20Payload::decode(&msg.payload) {
            Ok(p) => p,
            Err(_) => return Ok(DeliveryOutcome::Rejected("malformed payload".into())),
        };
        if payload.token != *token {
            return Ok(DeliveryOutcome::Rejected("token mismatch".into()));
        }
        let Some(entry) = dep.bridge_limits.get_mut(&msg.emitter.value) else {
            return Ok(DeliveryOutcome::Rejected("unauthorized bridge".into()));
        };
        if entry.mint.try_consume(now, payload.amount).is_err() {
            return Ok(DeliveryOutcome::Rejected("rate limited".into()));
        }
        let fee = fast_liquidity_fee(payload.amount, self.bridge_fee_bps(&msg.emitter.value))?;
        let recipient = Address::new(chain, payload.recipient);
        core.mint(
            Standard::Xerc20,
            token,
            recipient,
            payload.amount - fee,
            SupplyOrigin::Delivery { msg: msg.id },
        )?;
        if fee > 0 {
            let collector = Address::new(chain, msg.emitter.value);
            core.mint(
                Standard::Xerc20,
                token,
                collector,
                fee,
                SupplyOrigin::Delivery { msg: msg.id },
            )?;
            if let Some(transfer) = core.transfer_of(msg.id) {
                core.record(EventKind::FeeCharged {
                    transfer,
                    standard: Standard::Xerc20,
                    component: FeeComponent::FastLiquidity,
                    currency: FeeCurrency::Token(token.clone()),
                    amount: fee,
                });
            }
        }
        core.log_transfer_settled(msg.id, payload.amount - fee);
        Ok(DeliveryOutcome::Delivered)
    }
}

/// Fee for a bridge that fronts destination liquidity, in token units.
pub fn fast_liquidity_fee(amount: Amount, bps: u32) -> SimResult<Amount> {
    Ok(amt_mul(amount, bps as u128)? / 10_000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Simulation;

    fn two_chain_sim() -> (Simulation, TokenId, ChainId, ChainId, Address) {
        let mut sim = Simulation::new();
        let a = sim.add_chain("alpha", 1, false, false).unwrap();
        let b = sim.add_chain("beta", 1, false, false).unwrap();
        let token = TokenId::new("XTK");
        let issuer = Address::user(a, "issuer");
        for chain in [a, b] {
            sim.deploy_token(&token, chain, 18, &[(Address::user(chain, "alice"), 1_000_000)])
                .unwrap();
            let issuer_here = Address::user(chain, "issuer");
            sim.deploy_xerc20(&token, chain, issuer_here).unwrap();
        }
        (sim, token, a, b, issuer)
    }

    fn bridge_on(chain: ChainId) -> Address {
        Address::new(chain, AccountId::derive("contract", "bridge:relay"))
    }

    #[test]
    fn limit_exhaustion_and_linear_replenishment() {
        let (mut sim, token, a, _, issuer) = two_chain_sim();
        let bridge = bridge_on(a);
        let alice = Address::user(a, "alice");
        let Simulation { core, xerc20, .. } = &mut sim;
        xerc20
            .set_limits(core, &token, a, issuer, bridge, 100, 100, 100)
            .unwrap();
        xerc20
            .bridge_mint(core, &token, a, bridge, alice, 60, SupplyOrigin::BridgeLocal { bridge: bridge.value })
            .unwrap();
        xerc20
            .bridge_mint(core, &token, a, bridge, alice, 40, SupplyOrigin::BridgeLocal { bridge: bridge.value })
            .unwrap();
        assert!(matches!(
            xerc20.bridge_mint(core, &token, a, bridge, alice, 1, SupplyOrigin::BridgeLocal { bridge: bridge.value }),
            Err(SimError::RateLimited { capacity: 0, requested: 1 })
        ));
        // Half a window replenishes exactly half the limit.
        sim.run_ticks(50).unwrap();
        let Simulation { core, xerc20, .. } = &mut sim;
        let (_, current, _, _) = xerc20.query_limits(core.now(), &token, a, bridge.value);
        assert_eq!(current, 50);
        xerc20
            .bridge_mint(core, &token, a, bridge, alice, 50, SupplyOrigin::BridgeLocal { bridge: bridge.value })
            .unwrap();
    }

    #[test]
    fn unlisted_bridge_is_unauthorized() {
        let (mut sim, token, a, _, _) = two_chain_sim();
        let mallory = Address::contract(a, "bridge:mallory");
        let alice = Address::user(a, "alice");
        let Simulation { core, xerc20, .. } = &mut sim;
        assert!(matches!(
            xerc20.bridge_mint(core, &token, a, mallory, alice, 1, SupplyOrigin::Fault),
            Err(SimError::Unauthorized(_))
        ));
    }

    #[test]
    fn query_limits_unknown_bridge_is_zero() {
        let (sim, token, a, _, _) = two_chain_sim();
        let unknown = AccountId::derive("contract", "bridge:none");
        assert_eq!(
            sim.xerc20.query_limits(0, &token, a, unknown),
            (0, 0, 0, 0)
        );
    }

    #[test]
    fn lowering_limit_clamps_current() {
        let (mut sim, token, a, _, issuer) = two_chain_sim();
        let bridge = bridge_on(a);
        let Simulation { core, xerc20, .. } = &mut sim;
        xerc20
            .set_limits(core, &token, a, issuer, bridge, 100, 100, 100)
            .unwrap();
        xerc20
            .bridge_mint(core, &token, a, bridge, Address::user(a, "alice"), 20, SupplyOrigin::BridgeLocal { bridge: bridge.value })
            .unwrap();
        // current is 80; lowering the max to 50 clamps it.
        xerc20
            .set_limits(core, &token, a, issuer, bridge, 50, 100, 100)
            .unwrap();
        let (max, current, _, _) = xerc20.query_limits(core.now(), &token, a, bridge.value);
        assert_eq!((max, current), (50, 50));
    }

    #[test]
    fn non_issuer_cannot_set_limits() {
        let (mut sim, token, a, _, _) = two_chain_sim();
        let bridge = bridge_on(a);
        let stranger = Address::user(a, "stranger");
        let Simulation { core, xerc20, .. } = &mut sim;
        assert!(matches!(
            xerc20.set_limits(core, &token, a, stranger, bridge, 1, 1, 1),
            Err(SimError::Unauthorized(_))
        ));
    }

    #[test]
    fn lockbox_round_trip_restores_state() {
        let (mut sim, token, a, _, issuer) = two_chain_sim();
        let legacy = TokenId::new("LEG");
        let alice = Address::user(a, "alice");
        sim.deploy_token(&legacy, a, 18, &[(alice, 1_000)]).unwrap();
        let Simulation { core, xerc20, .. } = &mut sim;
        xerc20
            .set_lockbox(core, &token, a, issuer, &legacy)
            .unwrap();
        xerc20.lockbox_deposit(core, &token, a, alice, 500).unwrap();
        assert_eq!(core.ledgers.get(&token, a).unwrap().balance_of(alice.value), 1_000_500);
        assert_eq!(core.ledgers.get(&legacy, a).unwrap().balance_of(alice.value), 500);
        assert_eq!(xerc20.get(&token, a).unwrap().lockbox.as_ref().unwrap().locked, 500);
        xerc20.lockbox_withdraw(core, &token, a, alice, 500).unwrap();
        assert_eq!(core.ledgers.get(&token, a).unwrap().balance_of(alice.value), 1_000_000);
        assert_eq!(core.ledgers.get(&legacy, a).unwrap().balance_of(alice.value), 1_000);
        assert_eq!(xerc20.get(&token, a).unwrap().lockbox.as_ref().unwrap().locked, 0);
    }

    #[test]
    fn lockbox_withdraw_without_deposit_fails() {
        let (mut sim, token, a, _, issuer) = two_chain_sim();
        let legacy = TokenId::new("LEG");
        let alice = Address::user(a, "alice");
        sim.deploy_token(&legacy, a, 18, &[]).unwrap();
        let Simulation { core, xerc20, .. } = &mut sim;
        xerc20
            .set_lockbox(core, &token, a, issuer, &legacy)
            .unwrap();
        assert!(xerc20.lockbox_withdraw(core, &token, a, alice, 1).is_err());
    }

    #[test]
    fn cross_chain_send_burns_then_mints_after_latency() {
        let (mut sim, token, a, b, _) = two_chain_sim();
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        for chain in [a, b] {
            let issuer = Address::user(chain, "issuer");
            let bridge = bridge_on(chain);
            let Simulation { core, xerc20, .. } = &mut sim;
            xerc20
                .set_limits(core, &token, chain, issuer, bridge, 10_000, 10_000, 100)
                .unwrap();
        }
        let Simulation { core, xerc20, .. } = &mut sim;
        xerc20
            .send(core, &token, a, bridge_on(a), alice, b, bob, 400)
            .unwrap();
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 999_600);
        assert_eq!(core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 0);
        sim.run_ticks(3).unwrap();
        assert_eq!(
            sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value),
            400
        );
    }

    #[test]
    fn paused_deployment_rejects_mint_and_send() {
        let (mut sim, token, a, b, issuer) = two_chain_sim();
        let bridge = bridge_on(a);
        let alice = Address::user(a, "alice");
        let Simulation { core, xerc20, .. } = &mut sim;
        xerc20
            .set_limits(core, &token, a, issuer, bridge, 100, 100, 100)
            .unwrap();
        xerc20.set_paused(core, &token, a, issuer, true).unwrap();
        assert_eq!(
            xerc20.bridge_mint(core, &token, a, bridge, alice, 1, SupplyOrigin::Fault),
            Err(SimError::Paused)
        );
        assert_eq!(
            xerc20
                .send(core, &token, a, bridge, alice, b, Address::user(b, "bob"), 1)
                .unwrap_err(),
            SimError::Paused
        );
    }

    #[test]
    fn fast_liquidity_fee_is_exact() {
        assert_eq!(fast_liquidity_fee(1_000_000, 5).unwrap(), 500);
        assert_eq!(fast_liquidity_fee(0, 5).unwrap(), 0);
        assert_eq!(fast_liquidity_fee(1_000_000, 0).unwrap(), 0);
    }
}
