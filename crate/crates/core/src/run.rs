//! Scenario execution: build a simulation from a parsed config, drive the
//! scripted and randomized workload, fire adversary actions on schedule,
//! and hand back the event log with its report.
//!
//! The report is computed from the log alone. Agreement checks (module
//! state versus replayed state) run on the live simulation too, but their
//! passing verdicts are omitted from the report so that replaying a stored
//! log reproduces the report exactly; only agreement failures are appended,
//! since a defective run must never report clean.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::campaign::{self, World, WorldToken};
use crate::cct::{self, ChainUpdate, CctMode, FeeConfig};
use crate::chain::{AccountId, Address, Amount, ChainId};
use crate::config::{AdversaryStep, ScenarioConfig, Step};
use crate::error::{SimError, SimResult};
use crate::event::{EventKind, Standard};
use crate::ledger::TokenId;
use crate::ntt::{self, NttMode};
use crate::oft;
use crate::oracle::Oracle;
use crate::payload::{NttPayload, OftPayload, XErc20Payload};
use crate::report::RunReport;
use crate::sim::Simulation;
use crate::verify::{VerificationModel, VerifierId};
use crate::xerc20;

pub fn config_digest(raw: &str) -> String {
    hex::encode(Sha256::digest(raw.as_bytes()))
}

/// Name-to-identity maps resolved while building a scenario world.
pub struct BuiltScenario {
    pub world: World,
    chain_by_label: BTreeMap<String, ChainId>,
    tokens: BTreeMap<String, TokenHandles>,
}

struct TokenHandles {
    token: TokenId,
    standard: Standard,
    bridges: BTreeMap<String, AccountId>,
}

impl BuiltScenario {
    fn chain(&self, label: &str) -> Result<ChainId, String> {
        self.chain_by_label
            .get(label)
            .copied()
            .ok_or_else(|| format!("unknown chain {label:?}"))
    }

    fn token(&self, id: &str) -> Result<&TokenHandles, String> {
        self.tokens.get(id).ok_or_else(|| format!("unknown token {id:?}"))
    }
}

/// The outcome of one scripted or adversary step, for the human-facing
/// summary. Step outcomes deliberately stay out of [`RunReport`]: the
/// report holds only log-derived facts.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub label: String,
    pub outcome: String,
}

pub struct ScenarioOutcome {
    pub report: RunReport,
    pub log_jsonl: String,
    pub steps: Vec<StepResult>,
}

/// Build chains, routes, users, and token deployments per the config.
pub fn build_scenario(
    sim: &mut Simulation,
    config: &ScenarioConfig,
) -> SimResult<BuiltScenario> {
    let mut chain_by_label = BTreeMap::new();
    let mut chains = Vec::new();
    for spec in &config.chains {
        let chain = sim.add_chain(
            &spec.label,
            spec.block_interval,
            spec.superchain_member,
            spec.is_ethereum,
        )?;
        chain_by_label.insert(spec.label.clone(), chain);
        chains.push(chain);
    }
    for route in &config.routes {
        sim.set_route_latency(
            chain_by_label[&route.src],
            chain_by_label[&route.dst],
            route.latency,
        )?;
    }

    let mut users: BTreeMap<ChainId, Vec<Address>> = BTreeMap::new();
    for &chain in &chains {
        users.insert(
            chain,
            (0..config.users_per_chain)
                .map(|i| Address::user(chain, &format!("u{i}")))
                .collect(),
        );
    }

    let members: Vec<ChainId> = config
        .chains
        .iter()
        .filter(|c| c.superchain_member)
        .map(|c| chain_by_label[&c.label])
        .collect();

    let mut world_tokens = Vec::new();
    let mut tokens = BTreeMap::new();
    // Lanes are global per chain pair; the first CCT token to need one
    // creates it and later tokens reuse it, verifier spec and all.
    let mut lanes_created: BTreeSet<(ChainId, ChainId)> = BTreeSet::new();

    for spec in &config.tokens {
        let token = TokenId::new(&spec.id);
        let deploy_chains: Vec<ChainId> = if spec.chains.is_empty() {
            if spec.standard == "superchain" {
                members.clone()
            } else {
                chains.clone()
            }
        } else {
            spec.chains.iter().map(|l| chain_by_label[l]).collect()
        };
        let native = spec
            .native_chain
            .as_ref()
            .map(|l| chain_by_label[l]);

        for &chain in &deploy_chains {
            let label = config
                .chains
                .iter()
                .find(|c| chain_by_label[&c.label] == chain)
                .map(|c| c.label.clone())
                .unwrap_or_default();
            let decimals = spec
                .decimals_by_chain
                .get(&label)
                .copied()
                .unwrap_or(spec.decimals);
            let mut dist: Vec<(Address, Amount)> = Vec::new();
            if let Some(&each) = spec.initial.get(&label) {
                dist.extend(users[&chain].iter().map(|&u| (u, each)));
            }
            if let Some(&funding) = spec.pool_funding.get(&label) {
                dist.push((Address::user(chain, "pool-reserve"), funding));
            }
            sim.deploy_token(&token, chain, decimals, &dist)?;
        }

        let mut handles = TokenHandles {
            token: token.clone(),
            standard: Standard::Xerc20,
            bridges: BTreeMap::new(),
        };
        let mut world_token = WorldToken {
            token: token.clone(),
            standard: Standard::Xerc20,
            chains: deploy_chains.clone(),
            bridges: Vec::new(),
            hub: None,
            legacy: None,
        };

        match spec.standard.as_str() {
            "xerc20" => {
                for &chain in &deploy_chains {
                    let issuer = Address::user(chain, "issuer");
                    let Simulation { core, xerc20, .. } = &mut *sim;
                    xerc20.deploy(core, &token, chain, issuer)?;
                }
                for bridge in &spec.bridges {
                    let value = AccountId::derive("contract", &format!("bridge:{}", bridge.name));
                    for &chain in &deploy_chains {
                        let issuer = Address::user(chain, "issuer");
                        let Simulation { core, xerc20, .. } = &mut *sim;
                        xerc20.set_limits(
                            core,
                            &token,
                            chain,
                            issuer,
                            Address::new(chain, value),
                            bridge.mint_limit,
                            bridge.burn_limit,
                            bridge.window,
                        )?;
                    }
                    if bridge.fee_bps > 0 {
                        sim.xerc20.set_bridge_fee_bps(value, bridge.fee_bps)?;
                    }
                    handles.bridges.insert(bridge.name.clone(), value);
                    world_token.bridges.push(value);
                }
                if let Some(lockbox) = spec.lockbox.as_ref() {
                    let chain = chain_by_label[&lockbox.chain];
                    let legacy_id = lockbox
                        .legacy_id
                        .clone()
                        .unwrap_or_else(|| format!("{}-LEGACY", spec.id));
                    let legacy = TokenId::new(&legacy_id);
                    let dist: Vec<(Address, Amount)> = if lockbox.initial > 0 {
                        users[&chain].iter().map(|&u| (u, lockbox.initial)).collect()
                    } else {
                        Vec::new()
                    };
                    sim.deploy_token(&legacy, chain, spec.decimals, &dist)?;
                    let issuer = Address::user(chain, "issuer");
                    let Simulation { core, xerc20, .. } = &mut *sim;
                    xerc20.set_lockbox(core, &token, chain, issuer, &legacy)?;
                    world_token.legacy = Some((legacy, chain));
                }
            }
            "oft" => {
                world_token.standard = Standard::Oft;
                let shared = spec.shared_decimals.unwrap_or(6);
                let verifiers = spec.verifiers.clone().unwrap_or_default();
                let model = VerificationModel::DvnSet {
                    required: VerifierId::series("dvn-req", verifiers.required.unwrap_or(1)),
                    optional: VerifierId::series("dvn-opt", verifiers.optional.unwrap_or(3)),
                    optional_threshold: verifiers
                        .optional_threshold
                        .unwrap_or_else(|| verifiers.optional.unwrap_or(3).min(2)),
                };
                for &chain in &deploy_chains {
                    let owner = Address::user(chain, "owner");
                    let adapter = native == Some(chain);
                    let Simulation { core, oft, .. } = &mut *sim;
                    oft.deploy(core, &token, chain, owner, shared, adapter, model.clone())?;
                }
                for &chain in &deploy_chains {
                    let owner = Address::user(chain, "owner");
                    for &other in &deploy_chains {
                        if other != chain {
                            let peer = oft::contract_address(&token, other).value;
                            sim.oft.set_peer(&token, chain, owner, other, peer)?;
                        }
                    }
                    if let Some(limit) = spec.outbound_limit.as_ref() {
                        let Simulation { core, oft, .. } = &mut *sim;
                        oft.set_outbound_limit(
                            core,
                            &token,
                            chain,
                            owner,
                            limit.limit,
                            limit.window,
                        )?;
                    }
                }
                world_token.hub = native;
            }
            "ntt" => {
                world_token.standard = Standard::Ntt;
                if let Some(verifiers) = spec.verifiers.as_ref() {
                    sim.ntt.guardian_model = VerificationModel::GuardianQuorum {
                        guardians: VerifierId::series(
                            "guardian",
                            verifiers.guardians.unwrap_or(19),
                        ),
                        threshold: verifiers.threshold.unwrap_or(13),
                    };
                }
                let mode = match spec.mode.as_deref() {
                    Some("hub_spoke_lock") => NttMode::HubSpokeLock {
                        hub: native.expect("validated hub"),
                    },
                    _ => NttMode::BurnMint,
                };
                for &chain in &deploy_chains {
                    let owner = Address::user(chain, "owner");
                    let Simulation { core, ntt, .. } = &mut *sim;
                    ntt.deploy(core, &token, chain, owner, mode)?;
                    let transceiver = AccountId::derive("transceiver", &format!("ntt:{chain}"));
                    ntt.add_transceiver(&token, chain, owner, transceiver)?;
                }
                for &chain in &deploy_chains {
                    let owner = Address::user(chain, "owner");
                    for &other in &deploy_chains {
                        if other != chain {
                            let peer = ntt::contract_address(&token, other).value;
                            sim.ntt.set_peer(&token, chain, owner, other, peer)?;
                        }
                    }
                    let Simulation { core, ntt, .. } = &mut *sim;
                    if let Some(limit) = spec.outbound_limit.as_ref() {
                        ntt.set_outbound_limit(core, &token, chain, owner, limit.limit, limit.window)?;
                    }
                    if let Some(limit) = spec.inbound_limit.as_ref() {
                        for &other in &deploy_chains {
                            if other != chain {
                                ntt.set_inbound_limit(
                                    core,
                                    &token,
                                    chain,
                                    owner,
                                    other,
                                    limit.limit,
                                    limit.window,
                                )?;
                            }
                        }
                    }
                }
                world_token.hub = match mode {
                    NttMode::HubSpokeLock { hub } => Some(hub),
                    NttMode::BurnMint => None,
                };
            }
            "cct" => {
                world_token.standard = Standard::Cct;
                let verifiers = spec.verifiers.clone();
                for &src in &deploy_chains {
                    for &dst in &deploy_chains {
                        if src != dst && lanes_created.insert((src, dst)) {
                            let don = match verifiers.as_ref() {
                                Some(v) => VerificationModel::DonLane {
                                    committee: VerifierId::series(
                                        &format!("don-{src}-{dst}"),
                                        v.committee.unwrap_or(16),
                                    ),
                                    threshold: v.threshold.unwrap_or(11),
                                },
                                None => cct::default_don_model(src, dst),
                            };
                            sim.cct.create_lane(
                                &mut sim.core,
                                src,
                                dst,
                                don,
                                FeeConfig::default(),
                            )?;
                        }
                    }
                }
                let mode = match spec.mode.as_deref() {
                    Some("lock_mint") => CctMode::LockMint,
                    Some("lock_unlock") => CctMode::LockUnlock,
                    Some("burn_unlock") => CctMode::BurnUnlock,
                    _ => CctMode::BurnMint,
                };
                for &chain in &deploy_chains {
                    let owner = Address::user(chain, "owner");
                    let admin = Address::user(chain, "admin");
                    sim.cct
                        .set_token_admins(chain, &token, [admin.value].into_iter().collect());
                    let Simulation { core, cct, .. } = &mut *sim;
                    let pool =
                        cct.deploy_pool(core, &token, chain, owner, mode, native == Some(chain))?;
                    cct.register_token(chain, &token, admin, pool.value, admin.value)?;
                }
                for &chain in &deploy_chains {
                    let label = config
                        .chains
                        .iter()
                        .find(|c| chain_by_label[&c.label] == chain)
                        .map(|c| c.label.clone())
                        .unwrap_or_default();
                    if let Some(&funding) = spec.pool_funding.get(&label) {
                        let reserve = Address::user(chain, "pool-reserve");
                        let Simulation { core, cct, .. } = &mut *sim;
                        cct.fund_pool(core, &token, chain, reserve, funding)?;
                    }
                    let owner = Address::user(chain, "owner");
                    let updates: Vec<ChainUpdate> = deploy_chains
                        .iter()
                        .filter(|&&other| other != chain)
                        .map(|&other| ChainUpdate {
                            chain: other,
                            pool: cct::pool_address(&token, other).value,
                            remote_token: token.clone(),
                            outbound: spec.outbound_limit.as_ref().map(|l| (l.limit, l.window)),
                            inbound: spec.inbound_limit.as_ref().map(|l| (l.limit, l.window)),
                        })
                        .collect();
                    let Simulation { core, cct, .. } = &mut *sim;
                    cct.apply_chain_updates(core, &token, chain, owner, updates, Vec::new())?;
                }
                world_token.hub = native;
            }
            "superchain" => {
                world_token.standard = Standard::Superchain;
                for &chain in &deploy_chains {
                    let Simulation { core, superchain, .. } = &mut *sim;
                    superchain.deploy_token(core, &token, chain, spec.salt.as_deref())?;
                }
            }
            other => {
                return Err(SimError::Config(format!("unknown standard {other:?}")));
            }
        }

        handles.standard = world_token.standard;
        tokens.insert(spec.id.clone(), handles);
        world_tokens.push(world_token);
    }

    Ok(BuiltScenario {
        world: World {
            chains,
            users,
            tokens: world_tokens,
        },
        chain_by_label,
        tokens,
    })
}

/// Scheduled adversary actions, fired once each when the clock reaches
/// their tick.
struct AdversaryPlan<'c> {
    steps: Vec<(&'c AdversaryStep, bool)>,
}

impl<'c> AdversaryPlan<'c> {
    fn new(steps: &'c [AdversaryStep]) -> Self {
        Self {
            steps: steps.iter().map(|s| (s, false)).collect(),
        }
    }

    fn fire_due(
        &mut self,
        sim: &mut Simulation,
        built: &BuiltScenario,
        now: u64,
        results: &mut Vec<StepResult>,
    ) {
        for (i, (step, fired)) in self.steps.iter_mut().enumerate() {
            if *fired || step.at_tick > now {
                continue;
            }
            *fired = true;
            let outcome = match apply_adversary(sim, built, step, i) {
                Ok(note) => note,
                Err(e) => format!("error: {e}"),
            };
            results.push(StepResult {
                label: format!("adversary[{i}] {} @tick {}", step.action, step.at_tick),
                outcome,
            });
        }
    }

    fn report_unreached(&self, now: u64, results: &mut Vec<StepResult>) {
        for (i, (step, fired)) in self.steps.iter().enumerate() {
            if !fired {
                results.push(StepResult {
                    label: format!("adversary[{i}] {} @tick {}", step.action, step.at_tick),
                    outcome: format!("never reached (run ended at tick {now})"),
                });
            }
        }
    }
}

fn apply_adversary(
    sim: &mut Simulation,
    built: &BuiltScenario,
    step: &AdversaryStep,
    index: usize,
) -> Result<String, String> {
    match step.action.as_str() {
        "compromise" => {
            let name = step.verifier.as_ref().ok_or("missing verifier")?;
            let id = VerifierId::new(name);
            sim.compromise_verifier(&id, step.withhold_honest)
                .map_err(|e| e.to_string())?;
            Ok(format!("compromised {name}"))
        }
        "forge" => {
            let token_id = step.token.as_ref().ok_or("missing token")?;
            let info = built.token(token_id)?;
            let src = built.chain(step.src.as_ref().ok_or("missing src")?)?;
            let dst = built.chain(step.dst.as_ref().ok_or("missing dst")?)?;
            let amount = step.amount.ok_or("missing amount")?;
            let recipient = Address::user(
                dst,
                step.recipient.as_deref().unwrap_or("u0"),
            );
            // Convenience: forgers named here are compromised on the spot
            // if the scenario did not do it explicitly.
            let forgers: Vec<VerifierId> =
                step.forgers.iter().map(|f| VerifierId::new(f)).collect();
            for f in &forgers {
                if !sim.core.verifiers.is_compromised(f) {
                    sim.compromise_verifier(f, false).map_err(|e| e.to_string())?;
                }
            }
            let nonce = u64::MAX - index as u64;
            let (emitter, receiver, payload) = match info.standard {
                Standard::Xerc20 => {
                    let emitter = match step.claimed_emitter.as_ref() {
                        Some(name) => {
                            let value = info
                                .bridges
                                .get(name)
                                .copied()
                                .ok_or_else(|| format!("unknown bridge {name:?}"))?;
                            Address::new(src, value)
                        }
                        None => Address::contract(src, "bridge:rogue"),
                    };
                    let payload = XErc20Payload {
                        token: info.token.clone(),
                        recipient: recipient.value,
                        amount,
                        src_nonce: nonce,
                    }
                    .encode();
                    (emitter, xerc20::contract_address(&info.token, dst), payload)
                }
                Standard::Ntt => {
                    let payload = NttPayload {
                        token: info.token.clone(),
                        amount,
                        recipient: recipient.value,
                        sequence: nonce,
                    }
                    .encode();
                    (
                        ntt::contract_address(&info.token, src),
                        ntt::contract_address(&info.token, dst),
                        payload,
                    )
                }
                Standard::Oft => {
                    let payload = OftPayload {
                        recipient: recipient.value,
                        amount_shared: u64::try_from(amount)
                            .map_err(|_| "oft forge amount exceeds u64".to_string())?,
                        nonce,
                    }
                    .encode();
                    (
                        oft::contract_address(&info.token, src),
                        oft::contract_address(&info.token, dst),
                        payload,
                    )
                }
                Standard::Cct | Standard::Superchain => {
                    return Err(format!(
                        "forge not supported for {}",
                        info.standard.name()
                    ));
                }
            };
            let msg = sim
                .inject_forged_message(src, emitter, receiver, payload, &forgers)
                .map_err(|e| e.to_string())?;
            Ok(format!(
                "forged message {} with {} forger(s)",
                msg.0,
                forgers.len()
            ))
        }
        other => Err(format!("unknown action {other:?}")),
    }
}

fn apply_step(
    sim: &mut Simulation,
    built: &BuiltScenario,
    step: &Step,
    plan: &mut AdversaryPlan<'_>,
    results: &mut Vec<StepResult>,
) -> Result<String, String> {
    let chain_of = |label: &Option<String>, what: &str| -> Result<ChainId, String> {
        built.chain(label.as_ref().ok_or_else(|| format!("missing {what}"))?)
    };
    let token_of = |id: &Option<String>| -> Result<&TokenHandles, String> {
        built.token(id.as_ref().ok_or("missing token")?)
    };
    match step.op.as_str() {
        "advance" => {
            let ticks = step.ticks.ok_or("missing ticks")?;
            for _ in 0..ticks {
                plan.fire_due(sim, built, sim.core.now(), results);
                sim.run_ticks(1).map_err(|e| e.to_string())?;
            }
            Ok(format!("advanced {ticks} tick(s) to {}", sim.core.now()))
        }
        "transfer" => {
            let info = token_of(&step.token)?;
            let src = chain_of(&step.src, "src")?;
            let dst = chain_of(&step.dst, "dst")?;
            let sender = Address::user(src, step.sender.as_deref().ok_or("missing sender")?);
            let recipient =
                Address::user(dst, step.recipient.as_deref().ok_or("missing recipient")?);
            let amount = step.amount.ok_or("missing amount")?;
            let token = info.token.clone();
            match info.standard {
                Standard::Xerc20 => {
                    let name = step.bridge.as_ref().ok_or("missing bridge")?;
                    let value = info
                        .bridges
                        .get(name)
                        .copied()
                        .ok_or_else(|| format!("unknown bridge {name:?}"))?;
                    let Simulation { core, xerc20, .. } = &mut *sim;
                    let (transfer, msg) = xerc20
                        .send(
                            core,
                            &token,
                            src,
                            Address::new(src, value),
                            sender,
                            dst,
                            recipient,
                            amount,
                        )
                        .map_err(|e| e.to_string())?;
                    Ok(format!("transfer {transfer} message {}", msg.0))
                }
                Standard::Oft => {
                    let Simulation { core, oft, .. } = &mut *sim;
                    let receipt = oft
                        .send(core, &token, src, sender, dst, recipient, amount, 0)
                        .map_err(|e| e.to_string())?;
                    Ok(format!(
                        "transfer {} message {} sent {} (dust {})",
                        receipt.transfer, receipt.msg.0, receipt.amount_sent_local, receipt.dust
                    ))
                }
                Standard::Ntt => {
                    let Simulation { core, ntt, .. } = &mut *sim;
                    let receipt = ntt
                        .transfer(core, &token, src, sender, dst, recipient, amount)
                        .map_err(|e| e.to_string())?;
                    Ok(format!("{receipt:?}"))
                }
                Standard::Cct => {
                    let pay_in_link = step.pay_in_link.unwrap_or(false);
                    let Simulation { core, cct, .. } = &mut *sim;
                    let (transfer, msg, quote) = cct
                        .ccip_send(core, &token, src, sender, dst, recipient, amount, pay_in_link)
                        .map_err(|e| e.to_string())?;
                    Ok(format!(
                        "transfer {transfer} message {} fee {} ({:?})",
                        msg.0, quote.amount, quote.currency
                    ))
                }
                Standard::Superchain => {
                    let token_addr = sim
                        .superchain
                        .token_address(&token, src)
                        .map_err(|e| e.to_string())?;
                    let Simulation { core, superchain, .. } = &mut *sim;
                    let (transfer, msg) = superchain
                        .send_erc20(core, sender, token_addr, dst, recipient.value, amount)
                        .map_err(|e| e.to_string())?;
                    Ok(format!("transfer {transfer} message {}", msg.0))
                }
            }
        }
        "pause" | "unpause" => {
            let info = token_of(&step.token)?;
            let chain = chain_of(&step.chain, "chain")?;
            let paused = step.op == "pause";
            let token = info.token.clone();
            let Simulation {
                core,
                xerc20,
                oft,
                ntt,
                cct,
                superchain,
                ..
            } = &mut *sim;
            match info.standard {
                Standard::Xerc20 => xerc20.force_set_paused(core, &token, chain, paused),
                Standard::Oft => oft.force_set_paused(core, &token, chain, paused),
                Standard::Ntt => ntt.force_set_paused(core, &token, chain, paused),
                Standard::Cct => cct.force_set_paused(core, &token, chain, paused),
                Standard::Superchain => superchain.set_paused(core, chain, paused),
            }
            .map_err(|e| e.to_string())?;
            Ok(format!("paused={paused}"))
        }
        "set_limit" => {
            let info = token_of(&step.token)?;
            let chain = chain_of(&step.chain, "chain")?;
            let limit = step.limit.as_ref().ok_or("missing limit")?;
            let token = info.token.clone();
            match info.standard {
                Standard::Xerc20 => {
                    let name = step.bridge.as_ref().ok_or("missing bridge")?;
                    let value = info
                        .bridges
                        .get(name)
                        .copied()
                        .ok_or_else(|| format!("unknown bridge {name:?}"))?;
                    let issuer = Address::user(chain, "issuer");
                    let Simulation { core, xerc20, .. } = &mut *sim;
                    xerc20
                        .set_limits(
                            core,
                            &token,
                            chain,
                            issuer,
                            Address::new(chain, value),
                            limit.limit,
                            limit.limit,
                            limit.window,
                        )
                        .map_err(|e| e.to_string())?;
                }
                Standard::Oft => {
                    let owner = Address::user(chain, "owner");
                    let Simulation { core, oft, .. } = &mut *sim;
                    oft.set_outbound_limit(core, &token, chain, owner, limit.limit, limit.window)
                        .map_err(|e| e.to_string())?;
                }
                Standard::Ntt => {
                    let owner = Address::user(chain, "owner");
                    let Simulation { core, ntt, .. } = &mut *sim;
                    ntt.set_outbound_limit(core, &token, chain, owner, limit.limit, limit.window)
                        .map_err(|e| e.to_string())?;
                }
                Standard::Cct => {
                    let remote = chain_of(&step.dst, "dst (remote chain)")?;
                    let owner = Address::user(chain, "owner");
                    let Simulation { core, cct, .. } = &mut *sim;
                    cct.set_chain_rate_limiter_config(
                        core,
                        &token,
                        chain,
                        owner,
                        remote,
                        (limit.limit, limit.window),
                        (limit.limit, limit.window),
                    )
                    .map_err(|e| e.to_string())?;
                }
                Standard::Superchain => {
                    return Err("superchain exposes no rate-limit surface".into());
                }
            }
            Ok(format!("limit {} window {}", limit.limit, limit.window))
        }
        "complete_outbound" | "cancel_outbound" => {
            let info = token_of(&step.token)?;
            if info.standard != Standard::Ntt {
                return Err("queue ops apply to ntt tokens".into());
            }
            let chain = chain_of(&step.chain, "chain")?;
            let seq = step.seq.ok_or("missing seq")?;
            let token = info.token.clone();
            if step.op == "complete_outbound" {
                let Simulation { core, ntt, .. } = &mut *sim;
                let msg = ntt
                    .complete_outbound(core, &token, chain, seq)
                    .map_err(|e| e.to_string())?;
                Ok(format!("released seq {seq} as message {}", msg.0))
            } else {
                let sender = match step.sender.as_deref() {
                    Some(name) => Address::user(chain, name),
                    None => {
                        let value = sim
                            .ntt
                            .get(&token, chain)
                            .ok()
                            .and_then(|m| m.outbound_queue.get(&seq).map(|e| e.sender))
                            .ok_or("no such queued seq")?;
                        Address::new(chain, value)
                    }
                };
                let Simulation { core, ntt, .. } = &mut *sim;
                ntt.cancel_outbound(core, &token, chain, sender, seq)
                    .map_err(|e| e.to_string())?;
                Ok(format!("cancelled seq {seq}"))
            }
        }
        "complete_inbound" => {
            let info = token_of(&step.token)?;
            if info.standard != Standard::Ntt {
                return Err("queue ops apply to ntt tokens".into());
            }
            let chain = chain_of(&step.chain, "chain")?;
            let token = info.token.clone();
            let digest = sim
                .ntt
                .get(&token, chain)
                .ok()
                .and_then(|m| {
                    m.inbound_queue
                        .iter()
                        .min_by_key(|(digest, e)| (e.queued_tick, **digest))
                        .map(|(digest, _)| *digest)
                })
                .ok_or("inbound queue is empty")?;
            let Simulation { core, ntt, .. } = &mut *sim;
            ntt.complete_inbound(core, &token, chain, digest)
                .map_err(|e| e.to_string())?;
            Ok(format!("released inbound {}", digest.short_hex()))
        }
        "lockbox_deposit" | "lockbox_withdraw" => {
            let info = token_of(&step.token)?;
            let chain = chain_of(&step.chain, "chain")?;
            let amount = step.amount.ok_or("missing amount")?;
            let user = Address::user(chain, step.sender.as_deref().unwrap_or("u0"));
            let token = info.token.clone();
            let Simulation { core, xerc20, .. } = &mut *sim;
            if step.op == "lockbox_deposit" {
                xerc20
                    .lockbox_deposit(core, &token, chain, user, amount)
                    .map_err(|e| e.to_string())?;
            } else {
                xerc20
                    .lockbox_withdraw(core, &token, chain, user, amount)
                    .map_err(|e| e.to_string())?;
            }
            Ok(format!("moved {amount}"))
        }
        "fund_pool" => {
            let info = token_of(&step.token)?;
            let chain = chain_of(&step.chain, "chain")?;
            let amount = step.amount.ok_or("missing amount")?;
            let funder = Address::user(chain, step.sender.as_deref().unwrap_or("u0"));
            let token = info.token.clone();
            let Simulation { core, cct, .. } = &mut *sim;
            cct.fund_pool(core, &token, chain, funder, amount)
                .map_err(|e| e.to_string())?;
            Ok(format!("escrowed {amount}"))
        }
        other => Err(format!("unknown op {other:?}")),
    }
}

/// Execute one scenario end to end and evaluate every invariant.
pub fn run_scenario(
    config: &ScenarioConfig,
    raw_text: &str,
    seed_override: Option<u64>,
) -> SimResult<ScenarioOutcome> {
    let seed = seed_override.or(config.seed).unwrap_or(0);
    let mut sim = Simulation::new();
    sim.core.record(EventKind::RunStarted {
        seed,
        config_digest: config_digest(raw_text),
        scenario: config.name.clone(),
    });
    let built = build_scenario(&mut sim, config)?;
    let mut plan = AdversaryPlan::new(&config.adversary);
    let mut steps = Vec::new();
    plan.fire_due(&mut sim, &built, 0, &mut steps);

    for (i, step) in config.workload.steps.iter().enumerate() {
        let outcome = match apply_step(&mut sim, &built, step, &mut plan, &mut steps) {
            Ok(note) => note,
            Err(e) => format!("error: {e}"),
        };
        steps.push(StepResult {
            label: format!("step[{i}] {}", step.op),
            outcome,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..config.workload.random_ops {
        campaign::random_op(&mut sim, &built.world, &mut rng);
        if rng.gen_range(0..100u32) < 40 {
            let now = sim.core.now();
            plan.fire_due(&mut sim, &built, now, &mut steps);
            sim.run_ticks(1)?;
        }
    }

    // Drain: lift pauses, release elapsed queue entries, and give traffic
    // time to settle; forged stubs facing honest quorums stay parked.
    campaign::unpause_everything(&mut sim, &built.world);
    let mut quiet = 0u32;
    for _ in 0..600 {
        let now = sim.core.now();
        plan.fire_due(&mut sim, &built, now, &mut steps);
        campaign::drain_queues(&mut sim, &built.world);
        let before = sim.core.log.len();
        sim.run_ticks(1)?;
        if sim.core.log.len() == before {
            quiet += 1;
            if quiet >= 8 && campaign::outstanding(&sim).is_empty() {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    plan.report_unreached(sim.core.now(), &mut steps);

    let events = sim.core.log.events();
    let oracle = Oracle::replay(events);
    let mut verdicts = oracle.check();
    verdicts.extend(oracle.agreement(&sim).into_iter().filter(|v| !v.passed()));
    let report = RunReport::from_events(events, verdicts);
    Ok(ScenarioOutcome {
        report,
        log_jsonl: sim.core.log.to_jsonl(),
        steps,
    })
}

/// Rebuild the report for a stored log. Identical to the live report for
/// any run whose agreement checks passed, which is every passing run.
pub fn replay_report(log_jsonl: &str) -> SimResult<RunReport> {
    let events = crate::event::EventLog::parse_jsonl(log_jsonl)?;
    let oracle = Oracle::replay(&events);
    Ok(RunReport::from_events(&events, oracle.check()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const TWO_CHAIN: &str = r#"
name = "scripted-xerc20"
seed = 5
[[chains]]
label = "left"
[[chains]]
label = "right"

[[tokens]]
id = "TKN"
standard = "xerc20"
[tokens.initial]
left = 50_000
right = 50_000
[[tokens.bridges]]
name = "relay"
mint_limit = 20_000
burn_limit = 20_000
window = 30

[[workload.steps]]
op = "transfer"
token = "TKN"
src = "left"
dst = "right"
sender = "u0"
recipient = "u1"
amount = 4_000
bridge = "relay"

[[workload.steps]]
op = "advance"
ticks = 6
"#;

    #[test]
    fn scripted_transfer_settles_and_report_passes() {
        let config = parse_config(TWO_CHAIN).unwrap();
        let outcome = run_scenario(&config, TWO_CHAIN, None).unwrap();
        assert!(outcome.report.passed, "verdicts: {:?}", outcome.report.verdicts);
        assert_eq!(outcome.report.seed, 5);
        assert_eq!(outcome.report.transfers.len(), 1);
        assert_eq!(
            outcome.report.transfers[0].status,
            crate::report::TransferStatus::Settled
        );
        assert!(outcome.steps.iter().all(|s| !s.outcome.starts_with("error")));
    }

    #[test]
    fn identical_config_and_seed_reproduce_logs_and_reports() {
        let text = TWO_CHAIN.replace("random_ops = 0", "");
        let config = parse_config(&text).unwrap();
        let a = run_scenario(&config, &text, Some(42)).unwrap();
        let b = run_scenario(&config, &text, Some(42)).unwrap();
        assert_eq!(a.log_jsonl, b.log_jsonl);
        assert_eq!(a.report.to_json(), b.report.to_json());
        let c = run_scenario(&config, &text, Some(43)).unwrap();
        assert_ne!(a.log_jsonl, c.log_jsonl);
    }

    #[test]
    fn replayed_log_reproduces_the_report() {
        let config = parse_config(TWO_CHAIN).unwrap();
        let outcome = run_scenario(&config, TWO_CHAIN, None).unwrap();
        let replayed = replay_report(&outcome.log_jsonl).unwrap();
        assert_eq!(replayed.to_json(), outcome.report.to_json());
    }

    #[test]
    fn forged_delivery_with_full_quorum_fails_the_run() {
        let text = r#"
name = "guardian-breach"
[[chains]]
label = "left"
[[chains]]
label = "right"

[[tokens]]
id = "NTX"
standard = "ntt"
decimals = 8
[tokens.initial]
left = 100_000
right = 100_000

[[adversary]]
at_tick = 0
action = "forge"
token = "NTX"
src = "left"
dst = "right"
recipient = "u0"
amount = 7_777
forgers = [
  "guardian-0", "guardian-1", "guardian-2", "guardian-3", "guardian-4",
  "guardian-5", "guardian-6", "guardian-7", "guardian-8", "guardian-9",
  "guardian-10", "guardian-11", "guardian-12",
]

[[workload.steps]]
op = "advance"
ticks = 8
"#;
        let config = parse_config(text).unwrap();
        let outcome = run_scenario(&config, text, None).unwrap();
        assert!(!outcome.report.passed);
        let conservation = outcome
            .report
            .verdicts
            .iter()
            .find(|v| v.name == "conservation" && !v.passed())
            .expect("conservation verdict fails");
        match &conservation.outcome {
            crate::oracle::Outcome::Fail { detail, .. } => {
                assert!(detail.contains("illegitimate"), "{detail}");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn forged_ntt_without_quorum_stalls_and_run_passes() {
        let text = r#"
name = "guardian-stall"
[[chains]]
label = "left"
[[chains]]
label = "right"

[[tokens]]
id = "NTX"
standard = "ntt"
decimals = 8
[tokens.initial]
left = 100_000

[[adversary]]
at_tick = 0
action = "forge"
token = "NTX"
src = "left"
dst = "right"
recipient = "u0"
amount = 7_777
forgers = [
  "guardian-0", "guardian-1", "guardian-2", "guardian-3", "guardian-4",
  "guardian-5", "guardian-6", "guardian-7", "guardian-8", "guardian-9",
  "guardian-10", "guardian-11",
]

[[workload.steps]]
op = "advance"
ticks = 8
"#;
        let config = parse_config(text).unwrap();
        let outcome = run_scenario(&config, text, None).unwrap();
        assert!(outcome.report.passed, "verdicts: {:?}", outcome.report.verdicts);
        assert_eq!(outcome.report.stalled_messages.len(), 1);
    }

    #[test]
    fn random_workload_over_config_world_passes() {
        let text = r#"
name = "mixed-random"
seed = 9
users_per_chain = 2
[[chains]]
label = "one"
[[chains]]
label = "two"
superchain_member = true
[[chains]]
label = "three"
superchain_member = true

[[tokens]]
id = "XT"
standard = "xerc20"
[tokens.initial]
one = 200_000
two = 200_000
three = 200_000
[[tokens.bridges]]
name = "relay"
mint_limit = 30_000
burn_limit = 30_000
window = 25

[[tokens]]
id = "ST"
standard = "superchain"
[tokens.initial]
two = 90_000
three = 90_000

[workload]
random_ops = 250
"#;
        let config = parse_config(text).unwrap();
        let outcome = run_scenario(&config, text, None).unwrap();
        assert!(outcome.report.passed, "verdicts: {:?}", outcome.report.verdicts);
        let replayed = replay_report(&outcome.log_jsonl).unwrap();
        assert_eq!(replayed.to_json(), outcome.report.to_json());
    }
}
