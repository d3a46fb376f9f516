//! Binary payload layouts for cross-chain messages.
//!
//! Each standard fixes its own field layout; the message layer treats the
//! bytes as opaque. Layouts are fixed-field and byte-exact so that forged
//! messages can be crafted in tests and so replays serialize identically.
//!
//! Field encodings: token ids are a 2-byte big-endian length followed by
//! UTF-8 bytes; account values are raw 32 bytes; amounts are big-endian
//! unsigned integers of the stated width; nonces and sequences are 8-byte
//! big-endian.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::{AccountId, Amount};
use crate::error::{SimError, SimResult};
use crate::ledger::TokenId;

/// xERC20 bridge message: (token_id, recipient, amount, src_nonce).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XErc20Payload {
    pub token: TokenId,
    pub recipient: AccountId,
    pub amount: Amount,
    pub src_nonce: u64,
}

/// OFT message: (recipient, amount in shared decimals as u64, nonce).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OftPayload {
    pub recipient: AccountId,
    pub amount_shared: u64,
    pub nonce: u64,
}

/// NTT message: (token_id, amount, recipient, sequence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NttPayload {
    pub token: TokenId,
    pub amount: Amount,
    pub recipient: AccountId,
    pub sequence: u64,
}

/// CCT message: (token_id, amount, recipient, src_pool, mode_tag).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CctPayload {
    pub token: TokenId,
    pub amount: Amount,
    pub recipient: AccountId,
    pub src_pool: AccountId,
    pub mode_tag: u8,
}

/// Superchain message: (token_address_value, recipient, amount, nonce).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperchainPayload {
    pub token_address_value: AccountId,
    pub recipient: AccountId,
    pub amount: Amount,
    pub nonce: u64,
}

/// Deterministic digest of payload bytes; keys inbound queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayloadDigest(#[serde(with = "hex_bytes")] pub [u8; 32]);

impl PayloadDigest {
    pub fn of(bytes: &[u8]) -> Self {
        PayloadDigest(Sha256::digest(bytes).into())
    }

    pub fn short_hex(&self) -> String {
        hex::encode(&self.0[..8])
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let text = String::deserialize(d)?;
        let v = hex::decode(&text).map_err(serde::de::Error::custom)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("digest must be 32 bytes"))
    }
}

// ── Encoding primitives ──

struct Writer(Vec<u8>);

impl Writer {
    fn new() -> Self {
        Writer(Vec::with_capacity(64))
    }

    fn token(&mut self, t: &TokenId) {
        let bytes = t.0.as_bytes();
        self.0.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
        self.0.extend_from_slice(bytes);
    }

    fn account(&mut self, a: &AccountId) {
        self.0.extend_from_slice(&a.0);
    }

    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }

    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> SimResult<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| SimError::PayloadDecode("truncated payload".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn token(&mut self) -> SimResult<TokenId> {
        let len = u16::from_be_bytes(self.take(2)?.try_into().unwrap()) as usize;
        let text =
            std::str::from_utf8(self.take(len)?).map_err(|_| SimError::PayloadDecode("token id is not utf-8".into()))?;
        Ok(TokenId::new(text))
    }

    fn account(&mut self) -> SimResult<AccountId> {
        Ok(AccountId(self.take(32)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> SimResult<u128> {
        Ok(u128::from_be_bytes(self.take(16)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> SimResult<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> SimResult<u8> {
        Ok(self.take(1)?[0])
    }

    fn finish(&self) -> SimResult<()> {
        if self.pos != self.bytes.len() {
            return Err(SimError::PayloadDecode("trailing bytes".into()));
        }
        Ok(())
    }
}

// ── Per-standard layouts ──

impl XErc20Payload {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.token(&self.token);
        w.account(&self.recipient);
        w.u128(self.amount);
        w.u64(self.src_nonce);
        w.0
    }

    pub fn decode(bytes: &[u8]) -> SimResult<Self> {
        let mut r = Reader::new(bytes);
        let out = XErc20Payload {
            token: r.token()?,
            recipient: r.account()?,
            amount: r.u128()?,
            src_nonce: r.u64()?,
        };
        r.finish()?;
        Ok(out)
    }
}

impl OftPayload {
    /// Fixed wire size: 32-byte recipient + two u64 fields.
    pub const ENCODED_LEN: usize = 48;

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.account(&self.recipient);
        w.u64(self.amount_shared);
        w.u64(self.nonce);
        w.0
    }

    pub fn decode(bytes: &[u8]) -> SimResult<Self> {
        let mut r = Reader::new(bytes);
        let out = OftPayload {
            recipient: r.account()?,
            amount_shared: r.u64()?,
            nonce: r.u64()?,
        };
        r.finish()?;
        Ok(out)
    }
}

impl NttPayload {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.token(&self.token);
        w.u128(self.amount);
        w.account(&self.recipient);
        w.u64(self.sequence);
        w.0
    }

    pub fn decode(bytes: &[u8]) -> SimResult<Self> {
        let mut r = Reader::new(bytes);
        let out = NttPayload {
            token: r.token()?,
            amount: r.u128()?,
            recipient: r.account()?,
            sequence: r.u64()?,
        };
        r.finish()?;
        Ok(out)
    }

    pub fn digest(&self) -> PayloadDigest {
        PayloadDigest::of(&self.encode())
    }
}

impl CctPayload {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.token(&self.token);
        w.u128(self.amount);
        w.account(&self.recipient);
        w.account(&self.src_pool);
        w.u8(self.mode_tag);
        w.0
    }

    pub fn decode(bytes: &[u8]) -> SimResult<Self> {
        let mut r = Reader::new(bytes);
        let out = CctPayload {
            token: r.token()?,
            amount: r.u128()?,
            recipient: r.account()?,
            src_pool: r.account()?,
            mode_tag: r.u8()?,
        };
        r.finish()?;
        Ok(out)
    }
}

impl SuperchainPayload {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.account(&self.token_address_value);
        w.account(&self.recipient);
        w.u128(self.amount);
        w.u64(self.nonce);
        w.0
    }

    pub fn decode(bytes: &[u8]) -> SimResult<Self> {
        let mut r = Reader::new(bytes);
        let out = SuperchainPayload {
            token_address_value: r.account()?,
            recipient: r.account()?,
            amount: r.u128()?,
            nonce: r.u64()?,
        };
        r.finish()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn truncated_and_oversized_payloads_rejected() {
        let p = NttPayload {
            token: TokenId::new("TKN"),
            amount: 5,
            recipient: AccountId::derive("user", "bob"),
            sequence: 7,
        };
        let bytes = p.encode();
        assert_eq!(NttPayload::decode(&bytes).unwrap(), p);
        assert!(matches!(
            NttPayload::decode(&bytes[..bytes.len() - 1]),
            Err(SimError::PayloadDecode(_))
        ));
        let mut padded = bytes.clone();
        padded.push(0);
        assert!(matches!(
            NttPayload::decode(&padded),
            Err(SimError::PayloadDecode(_))
        ));
    }

    #[test]
    fn digest_is_stable_and_payload_sensitive() {
        let mk = |amount| NttPayload {
            token: TokenId::new("TKN"),
            amount,
            recipient: AccountId::derive("user", "bob"),
            sequence: 0,
        };
        assert_eq!(mk(5).digest(), mk(5).digest());
        assert_ne!(mk(5).digest(), mk(6).digest());
    }

    proptest! {
        #[test]
        fn xerc20_roundtrip(name in "[a-zA-Z0-9]{1,12}", amount: u128, nonce: u64) {
            let p = XErc20Payload {
                token: TokenId::new(&name),
                recipient: AccountId::derive("user", &name),
                amount,
                src_nonce: nonce,
            };
            prop_assert_eq!(XErc20Payload::decode(&p.encode()).unwrap(), p);
        }

        #[test]
        fn oft_roundtrip(shared: u64, nonce: u64) {
            let p = OftPayload {
                recipient: AccountId::derive("user", "carol"),
                amount_shared: shared,
                nonce,
            };
            prop_assert_eq!(OftPayload::decode(&p.encode()).unwrap(), p);
        }

        #[test]
        fn cct_roundtrip(name in "[A-Z]{1,8}", amount: u128, tag: u8) {
            let p = CctPayload {
                token: TokenId::new(&name),
                amount,
                recipient: AccountId::derive("user", "dave"),
                src_pool: AccountId::derive("contract", "pool"),
                mode_tag: tag,
            };
            prop_assert_eq!(CctPayload::decode(&p.encode()).unwrap(), p);
        }

        #[test]
        fn superchain_roundtrip(amount: u128, nonce: u64) {
            let p = SuperchainPayload {
                token_address_value: AccountId::derive("contract", "token"),
                recipient: AccountId::derive("user", "erin"),
                amount,
                nonce,
            };
            prop_assert_eq!(SuperchainPayload::decode(&p.encode()).unwrap(), p);
        }
    }
}
