//! Per-chain fungible token ledgers.
//!
//! One `TokenLedger` models one ERC-20 deployment on one chain: balances,
//! total supply, and the set of accounts allowed to mint and burn. The book
//! keeps the invariant `sum(balances) == total_supply` at every step; the
//! conservation oracle re-derives the same quantity independently from the
//! event log.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::{amt_add, amt_sub, AccountId, Address, Amount, ChainId};
use crate::error::{SimError, SimResult};

/// Logical token symbol, shared by that token's deployments on every chain.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TokenId(pub String);

impl TokenId {
    pub fn new(s: &str) -> Self {
        Self(s.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One token deployment on one chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenLedger {
    pub token: TokenId,
    pub chain: ChainId,
    pub decimals: u8,
    balances: BTreeMap<AccountId, Amount>,
    total_supply: Amount,
    /// Accounts allowed to call the privileged mint/burn entry points.
    adjusters: BTreeSet<AccountId>,
}

impl TokenLedger {
    fn new(token: TokenId, chain: ChainId, decimals: u8) -> Self {
        Self {
            token,
            chain,
            decimals,
            balances: BTreeMap::new(),
            total_supply: 0,
            adjusters: BTreeSet::new(),
        }
    }

    pub fn balance_of(&self, account: AccountId) -> Amount {
        self.balances.get(&account).copied().unwrap_or(0)
    }

    pub fn total_supply(&self) -> Amount {
        self.total_supply
    }

    pub fn is_adjuster(&self, account: AccountId) -> bool {
        self.adjusters.contains(&account)
    }

    pub fn authorize_adjuster(&mut self, account: AccountId) {
        self.adjusters.insert(account);
    }

    pub fn revoke_adjuster(&mut self, account: AccountId) {
        self.adjusters.remove(&account);
    }

    fn check_local(&self, addr: Address) -> SimResult<()> {
        if addr.chain != self.chain {
            return Err(SimError::ForeignAddress {
                address: addr.to_string(),
                chain: self.chain.to_string(),
            });
        }
        Ok(())
    }

    /// Same-chain transfer between two accounts.
    pub fn transfer(&mut self, from: Address, to: Address, amount: Amount) -> SimResult<()> {
        self.check_local(from)?;
        self.check_local(to)?;
        let have = self.balance_of(from.value);
        let debited = amt_sub(have, amount)?;
        if from.value == to.value {
            return Ok(());
        }
        let credited = amt_add(self.balance_of(to.value), amount)?;
        self.set_balance(from.value, debited);
        self.set_balance(to.value, credited);
        Ok(())
    }

    /// Privileged mint. `caller` must hold adjuster rights on this ledger.
    pub fn mint(&mut self, caller: AccountId, to: Address, amount: Amount) -> SimResult<()> {
        if !self.is_adjuster(caller) {
            return Err(SimError::Unauthorized(format!(
                "{caller:?} cannot mint {} on {}",
                self.token, self.chain
            )));
        }
        self.mint_unchecked(to, amount)
    }

    /// Privileged burn from `from`'s balance.
    pub fn burn(&mut self, caller: AccountId, from: Address, amount: Amount) -> SimResult<()> {
        if !self.is_adjuster(caller) {
            return Err(SimError::Unauthorized(format!(
                "{caller:?} cannot burn {} on {}",
                self.token, self.chain
            )));
        }
        self.burn_unchecked(from, amount)
    }

    /// Mint without an authorization check. Standard modules use this after
    /// enforcing their own caller gates; adversarial faults use it to model a
    /// compromised minter.
    pub fn mint_unchecked(&mut self, to: Address, amount: Amount) -> SimResult<()> {
        self.check_local(to)?;
        let supply = amt_add(self.total_supply, amount)?;
        let credited = amt_add(self.balance_of(to.value), amount)?;
        self.total_supply = supply;
        self.set_balance(to.value, credited);
        Ok(())
    }

    /// Burn without an authorization check; fails on insufficient balance
    /// before any state is written.
    pub fn burn_unchecked(&mut self, from: Address, amount: Amount) -> SimResult<()> {
        self.check_local(from)?;
        let debited = amt_sub(self.balance_of(from.value), amount)?;
        self.total_supply = amt_sub(self.total_supply, amount)?;
        self.set_balance(from.value, debited);
        Ok(())
    }

    fn set_balance(&mut self, account: AccountId, amount: Amount) {
        if amount == 0 {
            self.balances.remove(&account);
        } else {
            self.balances.insert(account, amount);
        }
    }

    /// Recompute `sum(balances)` and compare against the tracked supply.
    pub fn audit(&self) -> SimResult<()> {
        let mut sum: Amount = 0;
        for v in self.balances.values() {
            sum = amt_add(sum, *v)?;
        }
        if sum != self.total_supply {
            return Err(SimError::InvariantViolation(format!(
                "ledger {} on {}: balances sum to {sum} but supply is {}",
                self.token, self.chain, self.total_supply
            )));
        }
        Ok(())
    }
}

/// All token ledgers in a simulation, keyed by `(token, chain)`.
#[derive(Debug, Clone, Default)]
pub struct LedgerBook {
    ledgers: BTreeMap<(TokenId, ChainId), TokenLedger>,
}

impl LedgerBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Deploy a token on a chain. One deployment per `(token, chain)` pair.
    pub fn deploy(&mut self, token: TokenId, chain: ChainId, decimals: u8) -> SimResult<()> {
        let key = (token.clone(), chain);
        if self.ledgers.contains_key(&key) {
            return Err(SimError::DuplicateToken {
                token: token.0,
                chain: chain.to_string(),
            });
        }
        self.ledgers
            .insert(key, TokenLedger::new(token, chain, decimals));
        Ok(())
    }

    pub fn get(&self, token: &TokenId, chain: ChainId) -> SimResult<&TokenLedger> {
        self.ledgers
            .get(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    pub fn get_mut(&mut self, token: &TokenId, chain: ChainId) -> SimResult<&mut TokenLedger> {
        self.ledgers
            .get_mut(&(token.clone(), chain))
            .ok_or_else(|| SimError::UnknownToken {
                token: token.to_string(),
                chain: chain.to_string(),
            })
    }

    pub fn contains(&self, token: &TokenId, chain: ChainId) -> bool {
        self.ledgers.contains_key(&(token.clone(), chain))
    }

    pub fn iter(&self) -> impl Iterator<Item = &TokenLedger> {
        self.ledgers.values()
    }

    /// Chains on which `token` is deployed, in chain-id order.
    pub fn chains_of(&self, token: &TokenId) -> Vec<ChainId> {
        self.ledgers
            .keys()
            .filter(|(t, _)| t == token)
            .map(|(_, c)| *c)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book_with_token() -> (LedgerBook, TokenId, ChainId) {
        let mut book = LedgerBook::new();
        let token = TokenId::new("TKN");
        let chain = ChainId(0);
        book.deploy(token.clone(), chain, 18).unwrap();
        (book, token, chain)
    }

    #[test]
    fn duplicate_deploy_rejected() {
        let (mut book, token, chain) = book_with_token();
        assert!(matches!(
            book.deploy(token, chain, 18),
            Err(SimError::DuplicateToken { .. })
        ));
    }

    #[test]
    fn transfer_conserves_supply() {
        let (mut book, token, chain) = book_with_token();
        let alice = Address::user(chain, "alice");
        let bob = Address::user(chain, "bob");
        let ledger = book.get_mut(&token, chain).unwrap();
        ledger.mint_unchecked(alice, 100).unwrap();
        ledger.transfer(alice, bob, 40).unwrap();
        assert_eq!(ledger.balance_of(alice.value), 60);
        assert_eq!(ledger.balance_of(bob.value), 40);
        assert_eq!(ledger.total_supply(), 100);
        ledger.audit().unwrap();
    }

    #[test]
    fn transfer_insufficient_balance_leaves_state_untouched() {
        let (mut book, token, chain) = book_with_token();
        let alice = Address::user(chain, "alice");
        let bob = Address::user(chain, "bob");
        let ledger = book.get_mut(&token, chain).unwrap();
        ledger.mint_unchecked(alice, 10).unwrap();
        let err = ledger.transfer(alice, bob, 11).unwrap_err();
        assert_eq!(err, SimError::InsufficientBalance { have: 10, need: 11 });
        assert_eq!(ledger.balance_of(alice.value), 10);
        assert_eq!(ledger.total_supply(), 10);
    }

    #[test]
    fn self_transfer_is_identity() {
        let (mut book, token, chain) = book_with_token();
        let alice = Address::user(chain, "alice");
        let ledger = book.get_mut(&token, chain).unwrap();
        ledger.mint_unchecked(alice, 10).unwrap();
        ledger.transfer(alice, alice, 7).unwrap();
        assert_eq!(ledger.balance_of(alice.value), 10);
    }

    #[test]
    fn privileged_mint_requires_adjuster() {
        let (mut book, token, chain) = book_with_token();
        let alice = Address::user(chain, "alice");
        let bridge = AccountId::derive("contract", "bridge");
        let ledger = book.get_mut(&token, chain).unwrap();
        assert!(matches!(
            ledger.mint(bridge, alice, 5),
            Err(SimError::Unauthorized(_))
        ));
        ledger.authorize_adjuster(bridge);
        ledger.mint(bridge, alice, 5).unwrap();
        assert_eq!(ledger.total_supply(), 5);
        ledger.revoke_adjuster(bridge);
        assert!(matches!(
            ledger.burn(bridge, alice, 5),
            Err(SimError::Unauthorized(_))
        ));
    }

    #[test]
    fn foreign_address_rejected() {
        let (mut book, token, chain) = book_with_token();
        let alien = Address::user(ChainId(9), "alice");
        let ledger = book.get_mut(&token, chain).unwrap();
        assert!(matches!(
            ledger.mint_unchecked(alien, 5),
            Err(SimError::ForeignAddress { .. })
        ));
    }
}
