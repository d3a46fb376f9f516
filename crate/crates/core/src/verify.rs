//! Verification models and quorum evaluation.
//!
//! Every cross-chain message carries one `VerificationModel` describing who
//! must attest before the message may be delivered. The quorum rule is a pure
//! function of the attesting set, which lets tests enumerate attestation
//! subsets exhaustively against the same code the simulator runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::AccountId;
use crate::error::{SimError, SimResult};

/// Identifier of an attesting party (DVN, guardian, DON node).
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct VerifierId(pub String);

impl VerifierId {
    pub fn new(s: &str) -> Self {
        Self(s.to_string())
    }

    /// `prefix-0 .. prefix-(n-1)`, the naming scheme used by scenario
    /// builders for generated verifier sets.
    pub fn series(prefix: &str, n: usize) -> BTreeSet<VerifierId> {
        (0..n).map(|i| VerifierId(format!("{prefix}-{i}"))).collect()
    }
}

impl fmt::Display for VerifierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Who must attest a message before delivery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerificationModel {
    /// Verification is delegated to the token's own bridge whitelist; the
    /// message layer accepts anything and the receiving token enforces the
    /// gate at delivery.
    BridgeWhitelist { trusted_bridges: BTreeSet<AccountId> },
    /// Every required verifier must attest, and at least
    /// `optional_threshold` of the optional set.
    DvnSet {
        required: BTreeSet<VerifierId>,
        optional: BTreeSet<VerifierId>,
        optional_threshold: usize,
    },
    /// At least `threshold` of the guardian set.
    GuardianQuorum {
        guardians: BTreeSet<VerifierId>,
        threshold: usize,
    },
    /// At least `threshold` of a committee fixed at lane creation; the token
    /// issuer has no say in its composition.
    DonLane {
        committee: BTreeSet<VerifierId>,
        threshold: usize,
    },
    /// Trusted native messenger; no attestation step.
    SuperchainMessenger,
}

impl VerificationModel {
    /// Validate threshold/set-size relationships.
    pub fn validate(&self) -> SimResult<()> {
        match self {
            VerificationModel::DvnSet {
                optional,
                optional_threshold,
                ..
            } => {
                if *optional_threshold > optional.len() {
                    return Err(SimError::ThresholdTooHigh {
                        threshold: *optional_threshold,
                        count: optional.len(),
                    });
                }
            }
            VerificationModel::GuardianQuorum {
                guardians,
                threshold,
            } => {
                if *threshold > guardians.len() {
                    return Err(SimError::ThresholdTooHigh {
                        threshold: *threshold,
                        count: guardians.len(),
                    });
                }
            }
            VerificationModel::DonLane {
                committee,
                threshold,
            } => {
                if *threshold > committee.len() {
                    return Err(SimError::ThresholdTooHigh {
                        threshold: *threshold,
                        count: committee.len(),
                    });
                }
            }
            VerificationModel::BridgeWhitelist { .. }
            | VerificationModel::SuperchainMessenger => {}
        }
        Ok(())
    }

    /// Verifiers that take part in attestation for this model.
    pub fn participants(&self) -> BTreeSet<VerifierId> {
        match self {
            VerificationModel::DvnSet {
                required, optional, ..
            } => required.union(optional).cloned().collect(),
            VerificationModel::GuardianQuorum { guardians, .. } => guardians.clone(),
            VerificationModel::DonLane { committee, .. } => committee.clone(),
            VerificationModel::BridgeWhitelist { .. }
            | VerificationModel::SuperchainMessenger => BTreeSet::new(),
        }
    }

    /// Whether `attested` satisfies this model's quorum rule.
    pub fn quorum_met(&self, attested: &BTreeSet<VerifierId>) -> bool {
        match self {
            VerificationModel::BridgeWhitelist { .. } => true,
            VerificationModel::SuperchainMessenger => true,
            VerificationModel::DvnSet {
                required,
                optional,
                optional_threshold,
            } => {
                required.iter().all(|v| attested.contains(v))
                    && optional.iter().filter(|v| attested.contains(*v)).count()
                        >= *optional_threshold
            }
            VerificationModel::GuardianQuorum {
                guardians,
                threshold,
            } => guardians.iter().filter(|v| attested.contains(*v)).count() >= *threshold,
            VerificationModel::DonLane {
                committee,
                threshold,
            } => committee.iter().filter(|v| attested.contains(*v)).count() >= *threshold,
        }
    }
}

/// Mutable per-verifier adversary state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierState {
    pub compromised: bool,
    /// A compromised verifier keeps attesting honest traffic unless the
    /// adversary plan also tells it to withhold.
    pub withholds_honest: bool,
}

/// All verifiers known to a simulation.
#[derive(Debug, Clone, Default)]
pub struct VerifierRegistry {
    verifiers: BTreeMap<VerifierId, VerifierState>,
}

impl VerifierRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, id: VerifierId) {
        self.verifiers.entry(id).or_default();
    }

    pub fn register_all<I: IntoIterator<Item = VerifierId>>(&mut self, ids: I) {
        for id in ids {
            self.register(id);
        }
    }

    pub fn contains(&self, id: &VerifierId) -> bool {
        self.verifiers.contains_key(id)
    }

    pub fn state(&self, id: &VerifierId) -> SimResult<VerifierState> {
        self.verifiers
            .get(id)
            .copied()
            .ok_or_else(|| SimError::UnknownVerifier(id.to_string()))
    }

    pub fn compromise(&mut self, id: &VerifierId, withhold_honest: bool) -> SimResult<()> {
        let st = self
            .verifiers
            .get_mut(id)
            .ok_or_else(|| SimError::UnknownVerifier(id.to_string()))?;
        st.compromised = true;
        st.withholds_honest = withhold_honest;
        Ok(())
    }

    pub fn is_compromised(&self, id: &VerifierId) -> bool {
        self.verifiers.get(id).map(|s| s.compromised).unwrap_or(false)
    }

    /// Whether this verifier attests an honest message right now.
    pub fn attests_honest(&self, id: &VerifierId) -> bool {
        match self.verifiers.get(id) {
            Some(st) => !(st.compromised && st.withholds_honest),
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> BTreeSet<VerifierId> {
        names.iter().map(|n| VerifierId::new(n)).collect()
    }

    #[test]
    fn dvn_requires_all_required_and_optional_threshold() {
        let model = VerificationModel::DvnSet {
            required: ids(&["A", "B"]),
            optional: ids(&["C", "D", "E"]),
            optional_threshold: 1,
        };
        assert!(model.quorum_met(&ids(&["A", "B", "C"])));
        assert!(!model.quorum_met(&ids(&["A", "C", "D"])));
        assert!(!model.quorum_met(&ids(&["A", "B"])));
    }

    #[test]
    fn dvn_single_optional_insufficient_at_threshold_two() {
        let model = VerificationModel::DvnSet {
            required: BTreeSet::new(),
            optional: ids(&["C", "D", "E"]),
            optional_threshold: 2,
        };
        for v in ["C", "D", "E"] {
            assert!(!model.quorum_met(&ids(&[v])));
        }
        assert!(model.quorum_met(&ids(&["C", "E"])));
    }

    #[test]
    fn guardian_threshold_boundary() {
        let model = VerificationModel::GuardianQuorum {
            guardians: VerifierId::series("guardian", 19),
            threshold: 13,
        };
        let twelve: BTreeSet<_> = VerifierId::series("guardian", 12);
        let thirteen: BTreeSet<_> = VerifierId::series("guardian", 13);
        assert!(!model.quorum_met(&twelve));
        assert!(model.quorum_met(&thirteen));
    }

    #[test]
    fn outsiders_do_not_count_toward_quorum() {
        let model = VerificationModel::GuardianQuorum {
            guardians: ids(&["g-0", "g-1", "g-2"]),
            threshold: 2,
        };
        assert!(!model.quorum_met(&ids(&["g-0", "x", "y", "z"])));
        assert!(model.quorum_met(&ids(&["g-0", "g-2", "x"])));
    }

    #[test]
    fn validation_rejects_oversized_thresholds() {
        let model = VerificationModel::GuardianQuorum {
            guardians: VerifierId::series("g", 13),
            threshold: 14,
        };
        assert_eq!(
            model.validate(),
            Err(SimError::ThresholdTooHigh {
                threshold: 14,
                count: 13
            })
        );
    }

    #[test]
    fn compromised_verifier_attests_honest_unless_withholding() {
        let mut reg = VerifierRegistry::new();
        let v = VerifierId::new("dvn-0");
        reg.register(v.clone());
        assert!(reg.attests_honest(&v));
        reg.compromise(&v, false).unwrap();
        assert!(reg.attests_honest(&v));
        reg.compromise(&v, true).unwrap();
        assert!(!reg.attests_honest(&v));
    }
}
