//! Interop token standard for a homogeneous cluster of member chains.
//!
//! Every member chain runs one canonical bridge; a token participates by
//! exposing mint and burn entrypoints that only that bridge may call. There
//! is no rate limiting anywhere in this standard: the safety argument is
//! that the shared messenger is part of the cluster's own security domain,
//! so a message is either valid or the whole cluster is lost. Tokens are
//! deployed to the same deterministic address on every member chain, and
//! delivery re-derives the token from the address value alone; a mismatched
//! deployment strands the transfer rather than minting a different asset.

use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{AccountId, Address, Amount, ChainId};
use crate::error::{SimError, SimResult};
use crate::event::{BindingDetail, EventKind, Standard, SupplyOrigin};
use crate::ledger::TokenId;
use crate::message::{CrossChainMessage, MsgId};
use crate::payload::SuperchainPayload;
use crate::sim::{DeliveryOutcome, SimCore};
use crate::verify::VerificationModel;

/// Canonical bridge instance on one member chain.
#[derive(Debug, Clone)]
pub struct SuperBridge {
    pub chain: ChainId,
    pub contract: Address,
    pub paused: bool,
    /// Message ids already relayed on this chain; relaying twice is refused.
    relayed: BTreeSet<MsgId>,
}

/// One interop token across the cluster: the same address value on every
/// chain it is deployed to, unless a deployment used a different salt.
#[derive(Debug, Clone)]
pub struct SuperToken {
    pub token: TokenId,
    addresses: BTreeMap<ChainId, AccountId>,
}

pub fn bridge_address(chain: ChainId) -> Address {
    Address::contract(chain, "superchain:bridge")
}

/// Address value a token deploys to. Chain-independent by construction, so
/// equal salts give equal values on every chain.
pub fn token_address_value(token: &TokenId, salt: Option<&str>) -> AccountId {
    match salt {
        None => AccountId::derive("superchain-token", &token.0),
        Some(s) => AccountId::derive("superchain-token", &format!("{}:{s}", token.0)),
    }
}

#[derive(Debug, Clone)]
pub struct SuperchainRegistry {
    tokens: BTreeMap<TokenId, SuperToken>,
    bridges: BTreeMap<ChainId, SuperBridge>,
    /// When set, attested messages relay as soon as their block boundary
    /// passes; when cleared, each relay needs an explicit `relay_erc20`.
    pub auto_relay: bool,
}

impl Default for SuperchainRegistry {
    fn default() -> Self {
        Self {
            tokens: BTreeMap::new(),
            bridges: BTreeMap::new(),
            auto_relay: true,
        }
    }
}

impl SuperchainRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Install the canonical bridge on a member chain. Non-members cannot
    /// host one; the simulation calls this for every member automatically.
    pub fn register_bridge(&mut self, core: &mut SimCore, chain: ChainId) -> SimResult<()> {
        if !core.chains.get(chain)?.superchain_member {
            return Err(SimError::NotSuperchainMember(chain.to_string()));
        }
        self.bridges.entry(chain).or_insert_with(|| SuperBridge {
            chain,
            contract: bridge_address(chain),
            paused: false,
            relayed: BTreeSet::new(),
        });
        Ok(())
    }

    fn bridge(&self, chain: ChainId) -> SimResult<&SuperBridge> {
        self.bridges
            .get(&chain)
            .ok_or_else(|| SimError::NotSuperchainMember(chain.to_string()))
    }

    /// Whether `value` is the canonical bridge contract on `chain`.
    pub fn is_bridge(&self, chain: ChainId, value: &AccountId) -> bool {
        self.bridges
            .get(&chain)
            .is_some_and(|b| b.contract.value == *value)
    }

    /// Deploy the interop entrypoints for `token` on one member chain. The
    /// underlying ledger must already exist there. A custom salt shifts the
    /// address value away from the canonical one, which models the
    /// misconfiguration where the "same" token sits at different addresses.
    pub fn deploy_token(
        &mut self,
        core: &mut SimCore,
        token: &TokenId,
        chain: ChainId,
        salt: Option<&str>,
    ) -> SimResult<AccountId> {
        self.bridge(chain)?;
        if !core.ledgers.contains(token, chain) {
            return Err(SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            });
        }
        let entry = self.tokens.entry(token.clone()).or_insert_with(|| SuperToken {
            token: token.clone(),
            addresses: BTreeMap::new(),
        });
        if entry.addresses.contains_key(&chain) {
            return Err(SimError::DuplicateToken {
                token: token.to_string(),
                chain: chain.to_string(),
            });
        }
        let value = token_address_value(token, salt);
        entry.addresses.insert(chain, value);
        core.record(EventKind::StandardBound {
            standard: Standard::Superchain,
            token: token.clone(),
            chain,
            contract: value,
            detail: BindingDetail::Superchain,
        });
        Ok(value)
    }

    /// Address of `token`'s interop deployment on `chain`.
    pub fn token_address(&self, token: &TokenId, chain: ChainId) -> SimResult<Address> {
        let value = self
            .tokens
            .get(token)
            .and_then(|t| t.addresses.get(&chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })?;
        Ok(Address::new(chain, *value))
    }

    fn token_at(&self, chain: ChainId, value: &AccountId) -> Option<TokenId> {
        self.tokens
            .values()
            .find(|t| t.addresses.get(&chain) == Some(value))
            .map(|t| t.token.clone())
    }

    /// Mint on behalf of the bridge. Any other caller is refused; this is
    /// the entire authorization model of the standard.
    pub fn crosschain_mint(
        &mut self,
        core: &mut SimCore,
        caller: Address,
        token: &TokenId,
        to: Address,
        amount: Amount,
    ) -> SimResult<()> {
        let bridge = self.bridge(to.chain)?;
        if caller != bridge.contract {
            return Err(SimError::Unauthorized(format!(
                "{caller} is not the token bridge on {}",
                to.chain
            )));
        }
        self.token_address(token, to.chain)?;
        let origin = SupplyOrigin::BridgeLocal {
            bridge: bridge.contract.value,
        };
        core.mint(Standard::Superchain, token, to, amount, origin)
    }

    /// Burn on behalf of the bridge; same gate as `crosschain_mint`.
    pub fn crosschain_burn(
        &mut self,
        core: &mut SimCore,
        caller: Address,
        token: &TokenId,
        from: Address,
        amount: Amount,
    ) -> SimResult<()> {
        let bridge = self.bridge(from.chain)?;
        if caller != bridge.contract {
            return Err(SimError::Unauthorized(format!(
                "{caller} is not the token bridge on {}",
                from.chain
            )));
        }
        self.token_address(token, from.chain)?;
        let have = core.ledgers.get(token, from.chain)?.balance_of(from.value);
        if have < amount {
            return Err(SimError::InsufficientBalance {
                have,
                need: amount,
            });
        }
        let origin = SupplyOrigin::BridgeLocal {
            bridge: bridge.contract.value,
        };
        core.burn(Standard::Superchain, token, from, amount, origin)
    }

    pub fn set_paused(
        &mut self,
        core: &mut SimCore,
        chain: ChainId,
        paused: bool,
    ) -> SimResult<()> {
        let bridge = self
            .bridges
            .get_mut(&chain)
            .ok_or_else(|| SimError::NotSuperchainMember(chain.to_string()))?;
        bridge.paused = paused;
        core.record(EventKind::PauseSet {
            standard: Standard::Superchain,
            token: None,
            chain,
            paused,
        });
        Ok(())
    }

    /// Burn on the source chain and emit a transfer to the same token
    /// address on `dst`. Both ends must be members. An amount of zero is a
    /// legal no-op transfer: the message still travels.
    pub fn send_erc20(
        &mut self,
        core: &mut SimCore,
        sender: Address,
        token_addr: Address,
        dst: ChainId,
        recipient: AccountId,
        amount: Amount,
    ) -> SimResult<(u64, MsgId)> {
        let src = sender.chain;
        if token_addr.chain != src {
            return Err(SimError::ForeignAddress {
                address: token_addr.to_string(),
                chain: src.to_string(),
            });
        }
        let src_bridge = self.bridge(src)?.clone();
        let dst_bridge = self.bridge(dst)?.clone();
        if src_bridge.paused {
            return Err(SimError::Paused);
        }
        let token = self
            .token_at(src, &token_addr.value)
            .ok_or(SimError::NoTokenAtAddress)?;
        let have = core.ledgers.get(&token, src)?.balance_of(sender.value);
        if have < amount {
            return Err(SimError::InsufficientBalance {
                have,
                need: amount,
            });
        }

        let payload = SuperchainPayload {
            token_address_value: token_addr.value,
            recipient,
            amount,
            nonce: core.messages.peek_nonce(src_bridge.contract),
        };
        let msg = core.emit_message(
            src,
            src_bridge.contract,
            dst,
            dst_bridge.contract,
            payload.encode(),
            VerificationModel::SuperchainMessenger,
        )?;
        core.burn(
            Standard::Superchain,
            &token,
            sender,
            amount,
            SupplyOrigin::Send { msg },
        )?;
        let transfer = core.log_transfer_initiated(
            Standard::Superchain,
            &token,
            src,
            dst,
            sender.value,
            recipient,
            amount,
            amount,
            Some(msg),
            None,
        );
        Ok((transfer, msg))
    }

    /// Relay one delivered-by-messenger transfer on its destination chain.
    /// Minting goes through the same bridge-only entrypoint a user-visible
    /// `crosschainMint` would use; the address value alone selects which
    /// ledger is credited.
    pub fn handle_delivery(
        &mut self,
        core: &mut SimCore,
        chain: ChainId,
        msg: &CrossChainMessage,
    ) -> SimResult<DeliveryOutcome> {
        let Some(bridge) = self.bridges.get(&chain) else {
            return Ok(DeliveryOutcome::Rejected(
                "destination is not a superchain member".into(),
            ));
        };
        if bridge.paused {
            return Ok(DeliveryOutcome::HeldPaused);
        }
        if bridge.relayed.contains(&msg.id) {
            return Ok(DeliveryOutcome::Rejected("already relayed".into()));
        }
        let payload = match SuperchainPayload::decode(&msg.payload) {
            Ok(p) => p,
            Err(e) => return Ok(DeliveryOutcome::Rejected(format!("malformed payload: {e}"))),
        };
        let Some(token) = self
            .token_at(chain, &payload.token_address_value)
            .filter(|t| core.ledgers.contains(t, chain))
        else {
            return Ok(DeliveryOutcome::Rejected(
                "no token at the expected address".into(),
            ));
        };
        core.mint(
            Standard::Superchain,
            &token,
            Address::new(chain, payload.recipient),
            payload.amount,
            SupplyOrigin::Delivery { msg: msg.id },
        )?;
        self.bridges
            .get_mut(&chain)
            .expect("bridge checked above")
            .relayed
            .insert(msg.id);
        core.log_transfer_settled(msg.id, payload.amount);
        Ok(DeliveryOutcome::Delivered)
    }

    /// Whether `msg` has already been relayed on its destination chain.
    pub fn already_relayed(&self, chain: ChainId, msg: MsgId) -> bool {
        self.bridges
            .get(&chain)
            .is_some_and(|b| b.relayed.contains(&msg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::MsgStatus;
    use crate::sim::Simulation;

    fn tok(name: &str) -> TokenId {
        TokenId(name.to_string())
    }

    /// Two member chains, one non-member, token live on the members.
    fn setup() -> (Simulation, ChainId, ChainId, ChainId, TokenId) {
        let mut sim = Simulation::new();
        let a = sim.add_chain("op", 2, true, false).unwrap();
        let b = sim.add_chain("base", 2, true, false).unwrap();
        let c = sim.add_chain("mainnet", 1, false, true).unwrap();
        let token = tok("opusd");
        let holder = Address::user(a, "alice");
        sim.deploy_token(&token, a, 18, &[(holder, 1_000_000)]).unwrap();
        sim.deploy_token(&token, b, 18, &[]).unwrap();
        let Simulation { core, superchain, .. } = &mut sim;
        superchain.deploy_token(core, &token, a, None).unwrap();
        superchain.deploy_token(core, &token, b, None).unwrap();
        (sim, a, b, c, token)
    }

    #[test]
    fn token_addresses_match_across_members() {
        let (sim, a, b, _, token) = setup();
        let on_a = sim.superchain.token_address(&token, a).unwrap();
        let on_b = sim.superchain.token_address(&token, b).unwrap();
        assert_eq!(on_a.value, on_b.value);
        assert_ne!(on_a.chain, on_b.chain);
    }

    #[test]
    fn send_relays_after_exactly_one_destination_block() {
        let (mut sim, a, b, _, token) = setup();
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        let Simulation { core, superchain, .. } = &mut sim;
        let (_, msg) = superchain
            .send_erc20(core, alice, token_addr, b, bob.value, 250_000)
            .unwrap();

        // Burn is immediate; the mint waits for the destination block.
        assert_eq!(sim.core.ledgers.get(&token, a).unwrap().total_supply(), 750_000);
        sim.run_ticks(1).unwrap();
        assert_eq!(sim.core.messages.get(msg).unwrap().status, MsgStatus::Attested);
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 0);
        sim.run_ticks(1).unwrap();
        let delivered = sim.core.messages.get(msg).unwrap();
        assert_eq!(delivered.status, MsgStatus::Delivered);
        assert_eq!(delivered.delivered_tick, Some(2));
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 250_000);
        // Global supply is conserved across the pair of ledgers.
        let total = sim.core.ledgers.get(&token, a).unwrap().total_supply()
            + sim.core.ledgers.get(&token, b).unwrap().total_supply();
        assert_eq!(total, 1_000_000);
    }

    #[test]
    fn zero_amount_transfer_is_a_legal_noop() {
        let (mut sim, a, b, _, token) = setup();
        let alice = Address::user(a, "alice");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        let Simulation { core, superchain, .. } = &mut sim;
        let (_, msg) = superchain
            .send_erc20(core, alice, token_addr, b, AccountId::derive("user", "bob"), 0)
            .unwrap();
        sim.run_ticks(2).unwrap();
        assert_eq!(sim.core.messages.get(msg).unwrap().status, MsgStatus::Delivered);
        assert_eq!(sim.core.ledgers.get(&token, a).unwrap().total_supply(), 1_000_000);
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
    }

    #[test]
    fn non_member_endpoints_are_refused() {
        let (mut sim, a, _, c, token) = setup();
        let alice = Address::user(a, "alice");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        let Simulation { core, superchain, .. } = &mut sim;
        let err = superchain
            .send_erc20(core, alice, token_addr, c, AccountId::derive("user", "x"), 1)
            .unwrap_err();
        assert!(matches!(err, SimError::NotSuperchainMember(_)));

        let outsider = Address::user(c, "carol");
        let err = superchain
            .send_erc20(core, outsider, Address::new(c, token_addr.value), a,
                        AccountId::derive("user", "x"), 1)
            .unwrap_err();
        assert!(matches!(err, SimError::NotSuperchainMember(_)));
    }

    #[test]
    fn mint_and_burn_are_bridge_only() {
        let (mut sim, a, _, _, token) = setup();
        let alice = Address::user(a, "alice");
        let Simulation { core, superchain, .. } = &mut sim;
        let err = superchain
            .crosschain_mint(core, alice, &token, alice, 10)
            .unwrap_err();
        assert!(matches!(err, SimError::Unauthorized(_)));
        let err = superchain
            .crosschain_burn(core, alice, &token, alice, 10)
            .unwrap_err();
        assert!(matches!(err, SimError::Unauthorized(_)));

        // The bridge itself passes the gate.
        let bridge = bridge_address(a);
        superchain.crosschain_mint(core, bridge, &token, alice, 10).unwrap();
        superchain.crosschain_burn(core, bridge, &token, alice, 10).unwrap();
        assert_eq!(core.ledgers.get(&token, a).unwrap().total_supply(), 1_000_000);
    }

    #[test]
    fn mismatched_deployment_strands_the_transfer() {
        let mut sim = Simulation::new();
        let a = sim.add_chain("op", 1, true, false).unwrap();
        let b = sim.add_chain("base", 1, true, false).unwrap();
        let token = tok("opusd");
        let alice = Address::user(a, "alice");
        sim.deploy_token(&token, a, 18, &[(alice, 1_000)]).unwrap();
        sim.deploy_token(&token, b, 18, &[]).unwrap();
        let Simulation { core, superchain, .. } = &mut sim;
        superchain.deploy_token(core, &token, a, None).unwrap();
        // Deployed under a different salt: same token id, different address.
        superchain.deploy_token(core, &token, b, Some("v2")).unwrap();
        let token_addr = superchain.token_address(&token, a).unwrap();
        let (_, msg) = superchain
            .send_erc20(core, alice, token_addr, b, AccountId::derive("user", "bob"), 400)
            .unwrap();
        sim.run_ticks(2).unwrap();

        let m = sim.core.messages.get(msg).unwrap();
        assert_eq!(m.status, MsgStatus::Rejected);
        assert_eq!(m.reject_reason.as_deref(), Some("no token at the expected address"));
        // Burned at the source, never minted anywhere: the value is stranded.
        assert_eq!(sim.core.ledgers.get(&token, a).unwrap().total_supply(), 600);
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().total_supply(), 0);
    }

    #[test]
    fn paused_bridge_holds_delivery_until_unpause() {
        let (mut sim, a, b, _, token) = setup();
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        {
            let Simulation { core, superchain, .. } = &mut sim;
            superchain.set_paused(core, b, true).unwrap();
            superchain
                .send_erc20(core, alice, token_addr, b, bob.value, 5_000)
                .unwrap();
        }
        sim.run_ticks(4).unwrap();
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 0);
        {
            let Simulation { core, superchain, .. } = &mut sim;
            superchain.set_paused(core, b, false).unwrap();
        }
        sim.run_ticks(1).unwrap();
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 5_000);
    }

    #[test]
    fn paused_source_refuses_sends() {
        let (mut sim, a, b, _, token) = setup();
        let alice = Address::user(a, "alice");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        let Simulation { core, superchain, .. } = &mut sim;
        superchain.set_paused(core, a, true).unwrap();
        let err = superchain
            .send_erc20(core, alice, token_addr, b, AccountId::derive("user", "bob"), 1)
            .unwrap_err();
        assert!(matches!(err, SimError::Paused));
    }

    #[test]
    fn manual_relay_mode_and_replay_protection() {
        let (mut sim, a, b, _, token) = setup();
        sim.superchain.auto_relay = false;
        let alice = Address::user(a, "alice");
        let bob = Address::user(b, "bob");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        let msg = {
            let Simulation { core, superchain, .. } = &mut sim;
            let (_, msg) = superchain
                .send_erc20(core, alice, token_addr, b, bob.value, 9_000)
                .unwrap();
            msg
        };

        // Well past the block boundary, but nothing relays on its own.
        sim.run_ticks(10).unwrap();
        assert_eq!(sim.core.messages.get(msg).unwrap().status, MsgStatus::Attested);

        sim.relay_erc20(msg).unwrap();
        assert_eq!(sim.core.messages.get(msg).unwrap().status, MsgStatus::Delivered);
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 9_000);

        let err = sim.relay_erc20(msg).unwrap_err();
        assert!(matches!(err, SimError::AlreadyRelayed));
        assert_eq!(sim.core.ledgers.get(&token, b).unwrap().balance_of(bob.value), 9_000);
    }

    #[test]
    fn early_manual_relay_waits_for_the_block_boundary() {
        let (mut sim, a, b, _, token) = setup();
        sim.superchain.auto_relay = false;
        let alice = Address::user(a, "alice");
        let token_addr = sim.superchain.token_address(&token, a).unwrap();
        let msg = {
            let Simulation { core, superchain, .. } = &mut sim;
            superchain
                .send_erc20(core, alice, token_addr, b,
                            AccountId::derive("user", "bob"), 1_000)
                .unwrap()
                .1
        };
        sim.run_ticks(1).unwrap();
        let err = sim.relay_erc20(msg).unwrap_err();
        assert!(matches!(err, SimError::StillQueued { until: 2 }));
    }
}
