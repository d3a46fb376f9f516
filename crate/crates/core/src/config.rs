//! Scenario configuration: TOML schema and validation.
//!
//! Parsing is two-phase. `toml` handles syntax; [`parse_config`] then
//! validates the semantic rules (known standard names, resolvable
//! cross-references, quorum thresholds within participant counts,
//! Superchain membership) and reports every violation it finds with a
//! config-path location, instead of stopping at the first.
//!
//! Token amounts accept either an integer or a decimal string, since TOML
//! integers cap at i64 and supplies frequently exceed that.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer};

use crate::chain::{Amount, Tick};

fn de_amount<'de, D>(d: D) -> Result<Amount, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(v) => Ok(v as Amount),
        Raw::Text(s) => s
            .trim()
            .replace('_', "")
            .parse::<u128>()
            .map_err(|e| serde::de::Error::custom(format!("bad amount {s:?}: {e}"))),
    }
}

fn de_amount_map<'de, D>(d: D) -> Result<BTreeMap<String, Amount>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "de_amount")] Amount);
    let raw = BTreeMap::<String, Wrap>::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, Wrap(v))| (k, v)).collect())
}

fn de_opt_amount<'de, D>(d: D) -> Result<Option<Amount>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "de_amount")] Amount);
    Ok(Option::<Wrap>::deserialize(d)?.map(|Wrap(v)| v))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_users")]
    pub users_per_chain: usize,
    pub chains: Vec<ChainSpec>,
    #[serde(default)]
    pub tokens: Vec<TokenSpec>,
    #[serde(default)]
    pub routes: Vec<RouteSpec>,
    #[serde(default)]
    pub workload: Workload,
    #[serde(default)]
    pub adversary: Vec<AdversaryStep>,
}

fn default_users() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub label: String,
    #[serde(default = "default_interval")]
    pub block_interval: u64,
    #[serde(default)]
    pub superchain_member: bool,
    #[serde(default)]
    pub is_ethereum: bool,
}

fn default_interval() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenSpec {
    pub id: String,
    pub standard: String,
    /// Supply mode: NTT `burn_mint`/`hub_spoke_lock`; CCT `burn_mint`/
    /// `lock_mint`/`lock_unlock`/`burn_unlock`.
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default = "default_decimals")]
    pub decimals: u8,
    /// Per-chain local decimals overriding `decimals` (OFT).
    #[serde(default)]
    pub decimals_by_chain: BTreeMap<String, u8>,
    #[serde(default)]
    pub shared_decimals: Option<u8>,
    /// Adapter chain (OFT), hub (NTT hub_spoke_lock), or native pool
    /// chain (CCT lock_mint).
    #[serde(default)]
    pub native_chain: Option<String>,
    /// Deployment chains; empty means every chain (for superchain, every
    /// member chain).
    #[serde(default)]
    pub chains: Vec<String>,
    /// Genesis balance granted to each user on the listed chains.
    #[serde(default, deserialize_with = "de_amount_map")]
    pub initial: BTreeMap<String, Amount>,
    /// Pool liquidity escrowed at genesis (CCT unlock modes).
    #[serde(default, deserialize_with = "de_amount_map")]
    pub pool_funding: BTreeMap<String, Amount>,
    /// Whitelisted bridge operators (xERC20 only).
    #[serde(default)]
    pub bridges: Vec<BridgeSpec>,
    /// Legacy-token escrow for 1:1 wrapping (xERC20 only).
    #[serde(default)]
    pub lockbox: Option<LockboxSpec>,
    #[serde(default)]
    pub outbound_limit: Option<LimitSpec>,
    #[serde(default)]
    pub inbound_limit: Option<LimitSpec>,
    #[serde(default)]
    pub verifiers: Option<VerifierSpec>,
    /// Address-derivation salt (superchain only).
    #[serde(default)]
    pub salt: Option<String>,
}

fn default_decimals() -> u8 {
    18
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeSpec {
    pub name: String,
    #[serde(deserialize_with = "de_amount")]
    pub mint_limit: Amount,
    #[serde(deserialize_with = "de_amount")]
    pub burn_limit: Amount,
    pub window: Tick,
    #[serde(default)]
    pub fee_bps: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockboxSpec {
    pub chain: String,
    /// Ledger id of the wrapped legacy token; defaults to `<id>-LEGACY`.
    #[serde(default)]
    pub legacy_id: Option<String>,
    /// Genesis legacy balance per user on the lockbox chain.
    #[serde(default, deserialize_with = "de_amount")]
    pub initial: Amount,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    #[serde(deserialize_with = "de_amount")]
    pub limit: Amount,
    pub window: Tick,
}

/// Verification layout. Absent fields fall back to the standard's default
/// (19-guardian quorum at 13 for NTT, a 1 + 3 DVN set for OFT, a 16-node
/// DON at 11 per CCT lane).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierSpec {
    pub threshold: Option<usize>,
    pub guardians: Option<usize>,
    pub committee: Option<usize>,
    pub required: Option<usize>,
    pub optional: Option<usize>,
    pub optional_threshold: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub src: String,
    pub dst: String,
    pub latency: Tick,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    /// Randomized operations appended after the scripted steps.
    #[serde(default)]
    pub random_ops: u64,
    #[serde(default)]
    pub steps: Vec<Step>,
}

/// One scripted workload step. `op` selects the action; the remaining
/// fields apply where meaningful.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub op: String,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default)]
    pub chain: Option<String>,
    #[serde(default)]
    pub src: Option<String>,
    #[serde(default)]
    pub dst: Option<String>,
    /// User names resolve within their chain ("u0", "u1", ...).
    #[serde(default)]
    pub sender: Option<String>,
    #[serde(default)]
    pub recipient: Option<String>,
    #[serde(default, deserialize_with = "de_opt_amount")]
    pub amount: Option<Amount>,
    #[serde(default)]
    pub bridge: Option<String>,
    #[serde(default)]
    pub pay_in_link: Option<bool>,
    #[serde(default)]
    pub ticks: Option<u64>,
    #[serde(default)]
    pub seq: Option<u64>,
    #[serde(default)]
    pub limit: Option<LimitSpec>,
}

const STEP_OPS: &[&str] = &[
    "advance",
    "transfer",
    "pause",
    "unpause",
    "set_limit",
    "complete_outbound",
    "cancel_outbound",
    "complete_inbound",
    "lockbox_deposit",
    "lockbox_withdraw",
    "fund_pool",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryStep {
    pub at_tick: Tick,
    pub action: String,
    #[serde(default)]
    pub verifier: Option<String>,
    #[serde(default)]
    pub withhold_honest: bool,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default)]
    pub src: Option<String>,
    #[serde(default)]
    pub dst: Option<String>,
    #[serde(default)]
    pub recipient: Option<String>,
    #[serde(default, deserialize_with = "de_opt_amount")]
    pub amount: Option<Amount>,
    /// Claimed emitter for forgeries: a bridge name (xERC20) or omitted
    /// to impersonate the source-side contract.
    #[serde(default)]
    pub claimed_emitter: Option<String>,
    #[serde(default)]
    pub forgers: Vec<String>,
}

pub const STANDARD_NAMES: &[&str] = &["xerc20", "oft", "ntt", "cct", "superchain"];

/// One validation finding, anchored to a config path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub location: String,
    pub problem: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.problem)
    }
}

/// All validation findings from one parse attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration problem(s):", self.issues.len())?;
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Parse and validate scenario text. Syntax errors surface alone;
/// semantic validation reports every finding at once.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigErrors {
        issues: vec![ConfigIssue {
            location: "syntax".into(),
            problem: e.to_string(),
        }],
    })?;
    let issues = validate(&config);
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors { issues })
    }
}

fn validate(config: &ScenarioConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let mut push = |location: String, problem: String| {
        issues.push(ConfigIssue { location, problem });
    };

    if config.chains.is_empty() {
        push("chains".into(), "at least one chain is required".into());
    }
    if config.users_per_chain == 0 {
        push("users_per_chain".into(), "must be at least 1".into());
    }
    let mut labels = BTreeSet::new();
    let mut members = BTreeSet::new();
    for (i, chain) in config.chains.iter().enumerate() {
        if !labels.insert(chain.label.clone()) {
            push(
                format!("chains[{i}].label"),
                format!("duplicate chain label {:?}", chain.label),
            );
        }
        if chain.block_interval == 0 {
            push(
                format!("chains[{i}].block_interval"),
                "must be at least 1".into(),
            );
        }
        if chain.superchain_member {
            members.insert(chain.label.clone());
        }
    }
    let known = |label: &str| labels.contains(label);

    let mut token_ids = BTreeSet::new();
    let mut token_standard: BTreeMap<String, String> = BTreeMap::new();
    let mut token_chains: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut token_bridges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, token) in config.tokens.iter().enumerate() {
        let at = |field: &str| format!("tokens[{i}].{field}");
        if !token_ids.insert(token.id.clone()) {
            push(at("id"), format!("duplicate token id {:?}", token.id));
        }
        if !STANDARD_NAMES.contains(&token.standard.as_str()) {
            push(
                at("standard"),
                format!(
                    "unknown standard {:?} (expected one of {})",
                    token.standard,
                    STANDARD_NAMES.join(", ")
                ),
            );
        }
        token_standard.insert(token.id.clone(), token.standard.clone());
        let deploy_chains: Vec<String> = if token.chains.is_empty() {
            if token.standard == "superchain" {
                members.iter().cloned().collect()
            } else {
                config.chains.iter().map(|c| c.label.clone()).collect()
            }
        } else {
            token.chains.clone()
        };
        for label in &deploy_chains {
            if !known(label) {
                push(at("chains"), format!("unknown chain {label:?}"));
            }
        }
        if token.standard == "superchain" {
            for label in &deploy_chains {
                if known(label) && !members.contains(label) {
                    push(
                        at("chains"),
                        format!("{label:?} is not a superchain member"),
                    );
                }
            }
            if deploy_chains.len() < 2 {
                push(
                    at("chains"),
                    "superchain tokens need at least two member chains".into(),
                );
            }
        }
        token_chains.insert(token.id.clone(), deploy_chains.clone());

        match token.standard.as_str() {
            "ntt" => {
                if let Some(mode) = token.mode.as_deref() {
                    if !["burn_mint", "hub_spoke_lock"].contains(&mode) {
                        push(at("mode"), format!("unknown ntt mode {mode:?}"));
                    }
                }
                if token.mode.as_deref() == Some("hub_spoke_lock")
                    && token.native_chain.is_none()
                {
                    push(at("native_chain"), "hub_spoke_lock needs a hub chain".into());
                }
            }
            "cct" => {
                let mode = token.mode.as_deref().unwrap_or("burn_mint");
                if !["burn_mint", "lock_mint", "lock_unlock", "burn_unlock"].contains(&mode) {
                    push(at("mode"), format!("unknown cct mode {mode:?}"));
                }
                if mode == "lock_mint" && token.native_chain.is_none() {
                    push(
                        at("native_chain"),
                        "lock_mint designates a native pool chain".into(),
                    );
                }
            }
            _ => {
                if token.mode.is_some() {
                    push(at("mode"), format!("{} takes no mode", token.standard));
                }
            }
        }
        if let Some(native) = token.native_chain.as_deref() {
            if !known(native) {
                push(at("native_chain"), format!("unknown chain {native:?}"));
            } else if !deploy_chains.iter().any(|c| c == native) {
                push(
                    at("native_chain"),
                    format!("{native:?} is not among the token's chains"),
                );
            }
        }
        if token.standard == "oft" {
            let shared = token.shared_decimals.unwrap_or(6);
            for (label, &local) in &token.decimals_by_chain {
                if !known(label) {
                    push(at("decimals_by_chain"), format!("unknown chain {label:?}"));
                } else if local < shared {
                    push(
                        at("decimals_by_chain"),
                        format!("{label}: local decimals {local} below shared {shared}"),
                    );
                }
            }
            if token.decimals < shared && token.decimals_by_chain.is_empty() {
                push(
                    at("decimals"),
                    format!("local decimals {} below shared {shared}", token.decimals),
                );
            }
        } else {
            if token.shared_decimals.is_some() {
                push(
                    at("shared_decimals"),
                    format!("{} takes no shared decimals", token.standard),
                );
            }
            if !token.decimals_by_chain.is_empty() {
                push(
                    at("decimals_by_chain"),
                    format!("{} takes uniform decimals", token.standard),
                );
            }
        }
        if token.standard != "xerc20" && !token.bridges.is_empty() {
            push(
                at("bridges"),
                format!("{} takes no bridge whitelist", token.standard),
            );
        }
        if token.standard == "xerc20" {
            let mut names = BTreeSet::new();
            for (j, bridge) in token.bridges.iter().enumerate() {
                if !names.insert(bridge.name.clone()) {
                    push(
                        format!("tokens[{i}].bridges[{j}].name"),
                        format!("duplicate bridge {:?}", bridge.name),
                    );
                }
                if bridge.window == 0 {
                    push(
                        format!("tokens[{i}].bridges[{j}].window"),
                        "must be at least 1".into(),
                    );
                }
            }
            token_bridges.insert(token.id.clone(), names);
        }
        if token.standard != "superchain" && token.salt.is_some() {
            push(at("salt"), format!("{} takes no salt", token.standard));
        }
        if let Some(lockbox) = token.lockbox.as_ref() {
            if token.standard != "xerc20" {
                push(
                    at("lockbox"),
                    format!("{} takes no lockbox", token.standard),
                );
            } else if !known(&lockbox.chain) {
                push(at("lockbox.chain"), format!("unknown chain {:?}", lockbox.chain));
            } else if !deploy_chains.iter().any(|c| c == &lockbox.chain) {
                push(
                    at("lockbox.chain"),
                    format!("{:?} is not among the token's chains", lockbox.chain),
                );
            }
        }
        if !token.pool_funding.is_empty() {
            let mode = token.mode.as_deref().unwrap_or("burn_mint");
            if token.standard != "cct" || !mode.contains("unlock") {
                push(
                    at("pool_funding"),
                    "only cct unlock-mode pools take funding".into(),
                );
            }
        }
        for label in token.initial.keys().chain(token.pool_funding.keys()) {
            if !known(label) {
                push(at("initial"), format!("unknown chain {label:?}"));
            }
        }

        if let Some(v) = token.verifiers.as_ref() {
            let vat = |field: &str| format!("tokens[{i}].verifiers.{field}");
            match token.standard.as_str() {
                "ntt" => {
                    let guardians = v.guardians.unwrap_or(19);
                    let threshold = v.threshold.unwrap_or(13);
                    if threshold == 0 || threshold > guardians {
                        push(
                            vat("threshold"),
                            format!("threshold {threshold} outside guardian count {guardians}"),
                        );
                    }
                }
                "cct" => {
                    let committee = v.committee.unwrap_or(16);
                    let threshold = v.threshold.unwrap_or(11);
                    if threshold == 0 || threshold > committee {
                        push(
                            vat("threshold"),
                            format!("threshold {threshold} outside committee size {committee}"),
                        );
                    }
                }
                "oft" => {
                    let optional = v.optional.unwrap_or(3);
                    let required = v.required.unwrap_or(1);
                    let ot = v.optional_threshold.unwrap_or(optional.min(2));
                    if ot > optional {
                        push(
                            vat("optional_threshold"),
                            format!("threshold {ot} outside optional DVN count {optional}"),
                        );
                    }
                    if required == 0 && (optional == 0 || ot == 0) {
                        push(vat("required"), "verifier set is empty".into());
                    }
                }
                _ => {
                    push(
                        vat("threshold"),
                        format!("{} takes no verifier spec", token.standard),
                    );
                }
            }
        }
    }

    for (i, route) in config.routes.iter().enumerate() {
        let at = |field: &str| format!("routes[{i}].{field}");
        if !known(&route.src) {
            push(at("src"), format!("unknown chain {:?}", route.src));
        }
        if !known(&route.dst) {
            push(at("dst"), format!("unknown chain {:?}", route.dst));
        }
        if route.src == route.dst {
            push(at("dst"), "route endpoints must differ".into());
        }
        if route.latency == 0 {
            push(at("latency"), "must be at least 1".into());
        }
    }

    let user_ok = |name: &str| {
        name.strip_prefix('u')
            .and_then(|n| n.parse::<usize>().ok())
            .map(|n| n < config.users_per_chain)
            .unwrap_or(false)
    };
    for (i, step) in config.workload.steps.iter().enumerate() {
        let at = |field: &str| format!("workload.steps[{i}].{field}");
        if !STEP_OPS.contains(&step.op.as_str()) {
            push(at("op"), format!("unknown op {:?}", step.op));
            continue;
        }
        let standard = step
            .token
            .as_ref()
            .and_then(|t| token_standard.get(t))
            .cloned();
        if let Some(token) = step.token.as_ref() {
            if !token_ids.contains(token) {
                push(at("token"), format!("unknown token {token:?}"));
                continue;
            }
        }
        for (field, value) in [
            ("chain", &step.chain),
            ("src", &step.src),
            ("dst", &step.dst),
        ] {
            if let Some(label) = value.as_ref() {
                if !known(label) {
                    push(at(field), format!("unknown chain {label:?}"));
                }
            }
        }
        for (field, value) in [("sender", &step.sender), ("recipient", &step.recipient)] {
            if let Some(name) = value.as_ref() {
                if !user_ok(name) {
                    push(
                        at(field),
                        format!(
                            "unknown user {name:?} (u0..u{})",
                            config.users_per_chain.saturating_sub(1)
                        ),
                    );
                }
            }
        }
        match step.op.as_str() {
            "advance" => {
                if step.ticks.is_none() {
                    push(at("ticks"), "advance needs a tick count".into());
                }
            }
            "transfer" => {
                for field in ["token", "src", "dst", "sender", "recipient"] {
                    let missing = match field {
                        "token" => step.token.is_none(),
                        "src" => step.src.is_none(),
                        "dst" => step.dst.is_none(),
                        "sender" => step.sender.is_none(),
                        _ => step.recipient.is_none(),
                    };
                    if missing {
                        push(at(field), "transfer requires this field".into());
                    }
                }
                if step.amount.is_none() {
                    push(at("amount"), "transfer requires an amount".into());
                }
                if let (Some(token), Some(dst)) = (step.token.as_ref(), step.dst.as_ref()) {
                    if token_standard.get(token).map(String::as_str) == Some("superchain")
                        && known(dst)
                        && !members.contains(dst)
                    {
                        push(
                            at("dst"),
                            format!("{dst:?} is not a superchain member"),
                        );
                    }
                    if let Some(chains) = token_chains.get(token) {
                        for (field, value) in [("src", &step.src), ("dst", &step.dst)] {
                            if let Some(label) = value.as_ref() {
                                if known(label) && !chains.contains(label) {
                                    push(
                                        at(field),
                                        format!("{token:?} is not deployed on {label:?}"),
                                    );
                                }
                            }
                        }
                    }
                }
                if standard.as_deref() == Some("xerc20") {
                    match step.bridge.as_ref() {
                        None => push(at("bridge"), "xerc20 transfers name a bridge".into()),
                        Some(bridge) => {
                            let listed = step
                                .token
                                .as_ref()
                                .and_then(|t| token_bridges.get(t))
                                .map(|b| b.contains(bridge))
                                .unwrap_or(false);
                            if !listed {
                                push(at("bridge"), format!("unknown bridge {bridge:?}"));
                            }
                        }
                    }
                }
            }
            "pause" | "unpause" => {
                if step.chain.is_none() {
                    push(at("chain"), "pause needs a chain".into());
                }
                if step.token.is_none() {
                    push(at("token"), "pause names the token".into());
                }
            }
            "set_limit" => {
                if step.limit.is_none() {
                    push(at("limit"), "set_limit needs {limit, window}".into());
                }
                if step.token.is_none() || step.chain.is_none() {
                    push(at("token"), "set_limit needs token and chain".into());
                }
            }
            "complete_outbound" | "cancel_outbound" => {
                if step.token.is_none() || step.chain.is_none() || step.seq.is_none() {
                    push(at("seq"), "queue ops need token, chain, and seq".into());
                }
            }
            "complete_inbound" => {
                if step.token.is_none() || step.chain.is_none() {
                    push(at("chain"), "complete_inbound needs token and chain".into());
                }
            }
            "lockbox_deposit" | "lockbox_withdraw" | "fund_pool" => {
                if step.token.is_none() || step.chain.is_none() || step.amount.is_none() {
                    push(at("amount"), "needs token, chain, and amount".into());
                }
            }
            _ => {}
        }
    }

    for (i, adv) in config.adversary.iter().enumerate() {
        let at = |field: &str| format!("adversary[{i}].{field}");
        match adv.action.as_str() {
            "compromise" => {
                if adv.verifier.is_none() {
                    push(at("verifier"), "compromise names a verifier".into());
                }
            }
            "forge" => {
                match adv.token.as_ref() {
                    None => push(at("token"), "forge names a token".into()),
                    Some(token) if !token_ids.contains(token) => {
                        push(at("token"), format!("unknown token {token:?}"));
                    }
                    _ => {}
                }
                for (field, value) in [("src", &adv.src), ("dst", &adv.dst)] {
                    match value.as_ref() {
                        None => push(at(field), "forge needs src and dst".into()),
                        Some(label) if !known(label) => {
                            push(at(field), format!("unknown chain {label:?}"));
                        }
                        _ => {}
                    }
                }
                if adv.amount.is_none() {
                    push(at("amount"), "forge needs an amount".into());
                }
            }
            other => push(at("action"), format!("unknown action {other:?}")),
        }
    }

    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "minimal-oft"
[[chains]]
label = "one"
[[chains]]
label = "two"

[[tokens]]
id = "TKN"
standard = "oft"
decimals = 9
shared_decimals = 6
native_chain = "one"
[tokens.initial]
one = 1_000_000_000
"#;

    #[test]
    fn minimal_two_chain_oft_parses() {
        let config = parse_config(MINIMAL).unwrap();
        assert_eq!(config.name, "minimal-oft");
        assert_eq!(config.tokens[0].initial["one"], 1_000_000_000);
    }

    #[test]
    fn amounts_beyond_i64_parse_from_strings() {
        let text = r#"
name = "big"
[[chains]]
label = "one"
[[tokens]]
id = "T"
standard = "xerc20"
[tokens.initial]
one = "340_282_366_920_938_463_463_374_607_431_768_211_455"
"#;
        let config = parse_config(text).unwrap();
        assert_eq!(config.tokens[0].initial["one"], u128::MAX);
    }

    #[test]
    fn bad_threshold_unknown_standard_and_dangling_ref_all_reported() {
        let text = r#"
name = "broken"
[[chains]]
label = "one"
[[chains]]
label = "two"

[[tokens]]
id = "A"
standard = "erc999"

[[tokens]]
id = "B"
standard = "ntt"
mode = "hub_spoke_lock"
native_chain = "one"
[tokens.verifiers]
threshold = 14
guardians = 13

[[routes]]
src = "one"
dst = "nowhere"
latency = 2
"#;
        let err = parse_config(text).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("tokens[0].standard"), "{text}");
        assert!(text.contains("tokens[1].verifiers.threshold"), "{text}");
        assert!(text.contains("routes[0].dst"), "{text}");
        assert_eq!(err.issues.len(), 3, "{text}");
    }

    #[test]
    fn superchain_token_on_non_member_is_rejected() {
        let text = r#"
name = "bad-members"
[[chains]]
label = "one"
superchain_member = true
[[chains]]
label = "two"

[[tokens]]
id = "S"
standard = "superchain"
chains = ["one", "two"]
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("not a superchain member"));
    }

    #[test]
    fn superchain_workload_to_non_member_is_rejected() {
        let text = r#"
name = "bad-dst"
[[chains]]
label = "one"
superchain_member = true
[[chains]]
label = "two"
superchain_member = true
[[chains]]
label = "outsider"

[[tokens]]
id = "S"
standard = "superchain"
chains = ["one", "two"]

[[workload.steps]]
op = "transfer"
token = "S"
src = "one"
dst = "outsider"
sender = "u0"
recipient = "u1"
amount = 5
"#;
        let err = parse_config(text).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("workload.steps[0]"), "{text}");
        assert!(text.contains("not a superchain member"), "{text}");
    }

    #[test]
    fn syntax_error_is_reported_at_syntax_location() {
        let err = parse_config("name = ").unwrap_err();
        assert_eq!(err.issues[0].location, "syntax");
    }
}
