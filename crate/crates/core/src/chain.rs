//! Simulated chains, addresses, and the global deterministic clock.
//!
//! A simulation runs a set of chains against one global tick counter. A
//! "block" on chain `c` occurs every `block_interval` ticks; all latency
//! arithmetic is expressed in ticks. Event ordering derives solely from
//! `(tick, insertion sequence)`, which is what makes replays byte-identical.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{SimError, SimResult};

/// Token amounts in a token's smallest unit. All arithmetic is checked;
/// overflow is a simulation error, never a silent wrap.
pub type Amount = u128;

/// Global tick counter value.
pub type Tick = u64;

/// Checked addition that surfaces overflow as a simulation error.
pub fn amt_add(a: Amount, b: Amount) -> SimResult<Amount> {
    a.checked_add(b).ok_or(SimError::Overflow)
}

/// Checked subtraction; underflow reports the exact shortfall.
pub fn amt_sub(a: Amount, b: Amount) -> SimResult<Amount> {
    a.checked_sub(b)
        .ok_or(SimError::InsufficientBalance { have: a, need: b })
}

/// Checked multiplication.
pub fn amt_mul(a: Amount, b: Amount) -> SimResult<Amount> {
    a.checked_mul(b).ok_or(SimError::Overflow)
}

/// Identifier of a simulated chain.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ChainId(pub u32);

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chain#{}", self.0)
    }
}

/// Static description of one simulated chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub id: ChainId,
    pub label: String,
    /// Ticks per block; at least 1.
    pub block_interval: u64,
    /// Whether this chain participates in the Superchain messenger set.
    pub superchain_member: bool,
    /// Marks the chain as Ethereum for lane fee classification.
    pub is_ethereum: bool,
}

/// Registry of all chains in a simulation. Ids are dense and assigned in
/// creation order.
#[derive(Debug, Clone, Default)]
pub struct ChainRegistry {
    chains: Vec<Chain>,
    by_label: BTreeMap<String, ChainId>,
}

impl ChainRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(
        &mut self,
        label: &str,
        block_interval: u64,
        superchain_member: bool,
        is_ethereum: bool,
    ) -> SimResult<ChainId> {
        if block_interval == 0 {
            return Err(SimError::Config(format!(
                "chain '{label}': block_interval must be at least 1"
            )));
        }
        if self.by_label.contains_key(label) {
            return Err(SimError::DuplicateChainLabel(label.to_string()));
        }
        let id = ChainId(self.chains.len() as u32);
        self.chains.push(Chain {
            id,
            label: label.to_string(),
            block_interval,
            superchain_member,
            is_ethereum,
        });
        self.by_label.insert(label.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, id: ChainId) -> SimResult<&Chain> {
        self.chains
            .get(id.0 as usize)
            .ok_or_else(|| SimError::UnknownChain(id.to_string()))
    }

    pub fn by_label(&self, label: &str) -> SimResult<ChainId> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| SimError::UnknownChain(label.to_string()))
    }

    pub fn contains(&self, id: ChainId) -> bool {
        (id.0 as usize) < self.chains.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Chain> {
        self.chains.iter()
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// The chain-independent part of an address: an opaque 32-byte identifier.
///
/// SuperchainERC20 relies on a token having the *same* account value on every
/// member chain, so the value is kept separate from the chain id and equality
/// is byte-wise.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId(pub [u8; 32]);

impl AccountId {
    /// Deterministically derive an account value from a namespace and name.
    /// The same inputs always produce the same 32 bytes, which is how the
    /// simulator models CREATE2-style deterministic deployment.
    pub fn derive(namespace: &str, name: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(namespace.as_bytes());
        hasher.update(b":");
        hasher.update(name.as_bytes());
        AccountId(hasher.finalize().into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Short hex form used in logs and reports.
    pub fn short_hex(&self) -> String {
        hex::encode(&self.0[..6])
    }
}

impl fmt::Debug for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.short_hex())
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl Serialize for AccountId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for AccountId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("account id must be 32 bytes"))?;
        Ok(AccountId(arr))
    }
}

/// A chain-qualified account or contract address.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Address {
    pub chain: ChainId,
    pub value: AccountId,
}

impl Address {
    pub fn new(chain: ChainId, value: AccountId) -> Self {
        Self { chain, value }
    }

    /// A user-controlled account derived from a human-readable name.
    pub fn user(chain: ChainId, name: &str) -> Self {
        Self::new(chain, AccountId::derive("user", name))
    }

    /// A contract account derived from a role string (e.g. `"oft:TKN"`).
    pub fn contract(chain: ChainId, role: &str) -> Self {
        Self::new(chain, AccountId::derive("contract", role))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@0x{}", self.chain, self.value.short_hex())
    }
}

/// Monotonic global clock. All event ordering derives from
/// `(tick, insertion sequence)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimClock {
    tick: Tick,
}

impl SimClock {
    pub fn new() -> Self {
        Self { tick: 0 }
    }

    pub fn now(&self) -> Tick {
        self.tick
    }

    /// Advance by exactly one tick.
    pub fn step(&mut self) {
        self.tick += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_ids_are_dense_and_unique() {
        let mut reg = ChainRegistry::new();
        let a = reg.create("ethereum", 1, false, true).unwrap();
        let b = reg.create("optimism", 1, true, false).unwrap();
        let c = reg.create("base", 1, true, false).unwrap();
        assert_eq!(a, ChainId(0));
        assert_ne!(b, c);
        assert_eq!(reg.by_label("base").unwrap(), c);
    }

    #[test]
    fn duplicate_label_rejected() {
        let mut reg = ChainRegistry::new();
        reg.create("ethereum", 1, false, true).unwrap();
        assert_eq!(
            reg.create("ethereum", 2, false, false),
            Err(SimError::DuplicateChainLabel("ethereum".into()))
        );
    }

    #[test]
    fn zero_block_interval_rejected() {
        let mut reg = ChainRegistry::new();
        assert!(matches!(
            reg.create("ethereum", 0, false, true),
            Err(SimError::Config(_))
        ));
    }

    #[test]
    fn derived_addresses_are_stable_and_chain_scoped() {
        let a1 = AccountId::derive("user", "alice");
        let a2 = AccountId::derive("user", "alice");
        let b = AccountId::derive("user", "bob");
        assert_eq!(a1, a2);
        assert_ne!(a1, b);

        // Same value on two chains compares equal byte-wise but the full
        // addresses differ.
        let fst = Address::new(ChainId(0), a1);
        let snd = Address::new(ChainId(1), a1);
        assert_eq!(fst.value, snd.value);
        assert_ne!(fst, snd);
    }

    #[test]
    fn checked_arithmetic() {
        assert_eq!(amt_add(1, 2).unwrap(), 3);
        assert_eq!(amt_add(u128::MAX, 1), Err(SimError::Overflow));
        assert_eq!(
            amt_sub(1, 2),
            Err(SimError::InsufficientBalance { have: 1, need: 2 })
        );
    }
}
