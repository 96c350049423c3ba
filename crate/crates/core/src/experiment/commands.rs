use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{ExperimentConfig, ExperimentReport};
use crate::attacks::{
    angle_accuracy, breidbart_attack, breidbart_channel_information, corollary1_pipeline, exact_intercept_failure,
    hoeffding_failure_bound, hoeffding_row, intercept_success_experiment, intercept_table, lcg_recover,
    random_basis_intercept, random_prime_lcg, Confidence, PipelineInput, RecoveryStage,
};
use crate::bits::BitBlock;
use crate::bitsource::{bias, block_distribution, BlockDistribution, GeneratorFamily, GeneratorSpec};
use crate::bounds::{
    asymptotic_gap_sweep, block_length_comparison, dirichlet_block_distribution, holevo_floor,
    max_block_length, max_block_length_simple, proposition2_check, sample_in_bias_band,
    single_key_quantum_joint, tag_equivocation_identity, theorem2_check, verify_holevo_against_povm,
    wegman_carter_equivalence, wegman_carter_joint, xor_scheme_joint, BiasSchedule, BlockSchedule, BoundReport,
    Units, FANNES_LIMIT, IDENTITY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::hashing::{hash_eval, verify_condition1, verify_condition2, HashFamilyShape};
use crate::protocol::{honest_completeness, run_session, EveStrategy, SchemeConfig, SchemeVariant};
use crate::quantum::{
    binary_entropy, breidbart_measurement, density_for_block, density_for_message, encode_qubit, random_povm,
    von_neumann_entropy, PureState, BREIDBART_ANGLE,
};
use crate::seed::{component_rng, trial_rng};

fn to_value<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Invariant(format!("serialization failed: {e}")))
}

fn random_block<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitBlock {
    BitBlock::from_bools((0..len).map(|_| rng.random::<bool>()))
}

fn shape_of(config: &ExperimentConfig) -> Result<HashFamilyShape> {
    let (m, k) = (config.require_m()?, config.require_k()?);
    HashFamilyShape::new(m, k).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::config("k", msg),
        other => other,
    })
}

/// Scheme, Eve and key budget from the config; a fixed-hash variant
/// without a key gets one drawn from the master seed.
fn scheme_of(config: &ExperimentConfig) -> Result<(SchemeConfig, EveStrategy, Option<u64>)> {
    let section = config
        .scheme
        .as_ref()
        .ok_or_else(|| Error::config("scheme", "this command needs a scheme section"))?;
    let generator = config
        .generator
        .ok_or_else(|| Error::config("generator", "this command needs a key generator"))?;
    let shape = shape_of(config)?;
    let fixed_hash_key = match (&section.fixed_hash_key, section.variant.uses_fixed_hash()) {
        (None, true) => {
            let mut rng = component_rng(config.master_seed()?, "experiment/hash-key");
            Some(random_block(shape.key_bits(), &mut rng))
        }
        (key, _) => key.clone(),
    };
    let scheme = SchemeConfig {
        variant: section.variant,
        shape,
        generator,
        fixed_hash_key,
    };
    scheme.validate().map_err(|e| match e {
        Error::Config { field, message } => Error::config(format!("scheme.{field}"), message),
        other => other,
    })?;
    Ok((scheme, section.eve, section.key_budget))
}

/// Acceptance rate Bob should see against `eve`, when it does not depend on the hash.
fn expected_accept_rate(eve: EveStrategy, k: usize) -> Option<f64> {
    match eve {
        EveStrategy::None => Some(1.0),
        EveStrategy::Substitute => Some(0.5f64.powi(k as i32)),
        EveStrategy::InterceptResend => Some(0.75f64.powi(k as i32)),
        EveStrategy::Tamper => None,
    }
}

pub fn cmd_protocol(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.param("exhaustive", false)? {
        return exhaustive_completeness(config);
    }
    let seed = config.master_seed()?;
    let (scheme, eve, budget) = scheme_of(config)?;
    let rounds = config.trials.unwrap_or(100) as usize;
    let mut rng = component_rng(seed, "experiment/messages");
    let messages: Vec<BitBlock> = (0..rounds).map(|_| random_block(scheme.shape.m, &mut rng)).collect();
    let t = run_session(&scheme, &messages, eve, seed, budget)?;

    let eve_observations: usize = t.rounds.iter().map(|r| r.eve_records.len()).sum();
    let eve_conclusive = match scheme.fixed_hash()? {
        Some(h) if eve == EveStrategy::InterceptResend => {
            let mut n = 0usize;
            for r in &t.rounds {
                let tag = hash_eval(&h, &r.message)?;
                n += r.eve_records.iter().filter(|o| tag.get(o.qubit) != Some(o.outcome)).count();
            }
            Some(n)
        }
        _ => None,
    };
    let rate = t.accept_rate();
    let expected = expected_accept_rate(eve, scheme.shape.k);
    let mut bounds = Vec::new();
    match expected {
        Some(e) if eve == EveStrategy::None => {
            bounds.push(BoundReport::lower("honest_accept_rate", rate, e, Units::Probability));
        }
        Some(e) if rounds > 0 => {
            let sigma = (e * (1.0 - e) / rounds as f64).sqrt();
            bounds.push(BoundReport::equality(
                "accept_rate_within_5_sigma",
                rate,
                e,
                Units::Probability,
                5.0 * sigma,
            ));
        }
        _ => {}
    }
    let results = json!({
        "variant": scheme.variant,
        "eve": eve,
        "m": scheme.shape.m,
        "k": scheme.shape.k,
        "fixed_hash_key": scheme.fixed_hash_key,
        "rounds": t.rounds.len(),
        "accepted": t.accepted,
        "accept_rate": rate,
        "expected_accept_rate": expected,
        "key_bits_consumed": t.key_bits_consumed,
        "key_bits_per_round": t.key_bits_consumed as f64 / t.rounds.len().max(1) as f64,
        "eve_observations": eve_observations,
        "eve_conclusive": eve_conclusive,
    });
    Ok(ExperimentReport::new(config, results, bounds))
}

/// Every variant, every shape `k' ≤ m' ≤ m` with `k' ≤ k`, every hash key.
fn exhaustive_completeness(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let seed = config.master_seed()?;
    let (m, k) = (config.require_m()?, config.require_k()?);
    let mut cases = Vec::new();
    for mm in 1..=m {
        for kk in 1..=k.min(mm) {
            let shape = HashFamilyShape::new(mm, kk)?;
            for v in SchemeVariant::ALL {
                cases.push((v, shape));
            }
        }
    }
    let reports = cases
        .par_iter()
        .map(|&(v, shape)| honest_completeness(v, shape, seed))
        .collect::<Result<Vec<_>>>()?;
    let rounds: u64 = reports.iter().map(|r| r.rounds).sum();
    let accepted: u64 = reports.iter().map(|r| r.accepted).sum();
    let rate = accepted as f64 / rounds.max(1) as f64;
    let results = json!({
        "cases": reports,
        "rounds": rounds,
        "accepted": accepted,
        "accept_rate": rate,
    });
    let bounds = vec![BoundReport::lower("exhaustive_honest_accept_rate", rate, 1.0, Units::Probability)];
    Ok(ExperimentReport::new(config, results, bounds))
}

/// Fields shared by every attack report.
#[derive(Debug, Clone, Serialize)]
struct AttackSummary {
    strategy: String,
    qubits_seen: u64,
    conclusive_count: u64,
    recovered_bits: u64,
    seed_result: Value,
    empirical_rates: BTreeMap<String, f64>,
    details: Value,
}

impl AttackSummary {
    fn new(strategy: &str) -> Self {
        AttackSummary {
            strategy: strategy.to_string(),
            qubits_seen: 0,
            conclusive_count: 0,
            recovered_bits: 0,
            seed_result: Value::Null,
            empirical_rates: BTreeMap::new(),
            details: Value::Null,
        }
    }
}

pub fn cmd_attack(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let strategy: Option<String> = config.param("attack", None)?;
    let strategy = strategy.ok_or_else(|| {
        Error::config(
            "params.attack",
            "choose one of lcg-recover, intercept, hoeffding, intercept-recover, breidbart",
        )
    })?;
    let (summary, bounds) = match strategy.as_str() {
        "lcg-recover" => attack_lcg(config)?,
        "intercept" => attack_intercept(config)?,
        "hoeffding" => attack_hoeffding(config)?,
        "intercept-recover" => attack_intercept_recover(config)?,
        "breidbart" => attack_breidbart(config)?,
        other => return Err(Error::config("params.attack", format!("unknown attack `{other}`"))),
    };
    Ok(ExperimentReport::new(config, to_value(&summary)?, bounds))
}

fn attack_lcg(config: &ExperimentConfig) -> Result<(AttackSummary, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let count: usize = config.param("outputs", 8)?;
    let mut summary = AttackSummary::new("lcg-recover");
    let mut bounds = Vec::new();
    let single = match config.generator {
        Some(GeneratorSpec::Lcg(p)) => Some(p),
        Some(GeneratorSpec::Fair { .. }) => {
            return Err(Error::config("generator", "lcg-recover needs an LCG generator"));
        }
        None => None,
    };
    if single.is_none() && config.trials.is_none() {
        return Err(Error::config(
            "generator",
            "give an LCG generator, a trial count for random instances, or both",
        ));
    }
    if let Some(p) = single {
        let r = lcg_recover(&p.outputs(count))?;
        let exact_match = r.params() == Some(p);
        summary.seed_result = json!({ "truth": p, "recovered": r, "exact_match": exact_match });
    }
    if let Some(n) = config.trials {
        let (low, high): (u64, u64) = (config.param("min_modulus", 100)?, config.param("max_modulus", 4096)?);
        let outcomes = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, "experiment/lcg-instances", i);
                let p = random_prime_lcg(low, high, &mut rng)?;
                let observed = p.outputs(count);
                let r = lcg_recover(&observed)?;
                let regenerates = r.params().map(|q| q.outputs(count) == observed);
                Ok((r.params() == Some(p), r.confidence, regenerates))
            })
            .collect::<Result<Vec<_>>>()?;
        let exact = outcomes.iter().filter(|o| o.0).count();
        let exact_confidence = outcomes.iter().filter(|o| o.1 == Confidence::Exact).count();
        let mismatched = outcomes.iter().filter(|o| o.2 == Some(false)).count();
        let min_rate: f64 = config.param("min_exact_rate", 0.99)?;
        summary.empirical_rates.insert("exact_recovery_rate".into(), exact as f64 / n.max(1) as f64);
        summary.details = json!({
            "instances": n,
            "outputs_per_instance": count,
            "exact_recoveries": exact,
            "exact_confidence": exact_confidence,
            "modulus_range": [low, high],
        });
        bounds.push(BoundReport::lower(
            "lcg_exact_recoveries",
            exact as f64,
            (min_rate * n as f64).ceil(),
            Units::Count,
        ));
        bounds.push(BoundReport::upper(
            "exact_confidence_stream_mismatches",
            mismatched as f64,
            0.0,
            Units::Count,
        ));
    }
    Ok((summary, bounds))
}

fn attack_intercept(config: &ExperimentConfig) -> Result<(AttackSummary, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let n = config.trials.unwrap_or(100_000) as usize;
    let mut rng = component_rng(seed, "experiment/intercept");
    let x: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    let t = random_block(n, &mut rng);
    let qubits: Vec<PureState> = x.iter().zip(t.iter()).map(|(&x, t)| encode_qubit(x, t)).collect();
    let records = random_basis_intercept(&qubits, &t, &mut rng)?;
    let conclusive = records.iter().filter(|r| r.conclusive).count();
    let errors = records
        .iter()
        .filter(|r| r.inferred_x.is_some_and(|v| v != x[r.position]))
        .count();
    let table = intercept_table();
    let table_errors = table
        .iter()
        .filter(|c| c.probability > 1e-12 && c.record.inferred_x.is_some_and(|v| v != c.x))
        .count();
    let table_conclusive: f64 = table.iter().filter(|c| c.record.conclusive).map(|c| c.probability).sum::<f64>() / 8.0;

    let rate = conclusive as f64 / n.max(1) as f64;
    let sigma = (0.1875 / n.max(1) as f64).sqrt();
    let mut summary = AttackSummary::new("intercept");
    summary.qubits_seen = n as u64;
    summary.conclusive_count = conclusive as u64;
    summary.recovered_bits = conclusive as u64;
    summary.empirical_rates.insert("conclusive_rate".into(), rate);
    summary.empirical_rates.insert("inference_error_rate".into(), errors as f64 / conclusive.max(1) as f64);
    summary.details = json!({
        "table": table,
        "table_conclusive_probability": table_conclusive,
        "sigma": sigma,
    });
    let bounds = vec![
        BoundReport::equality("conclusive_rate_within_3_sigma", rate, 0.25, Units::Probability, 3.0 * sigma),
        BoundReport::upper("inference_errors", errors as f64, 0.0, Units::Count),
        BoundReport::upper("table_inference_errors", table_errors as f64, 0.0, Units::Count),
        BoundReport::equality(
            "table_conclusive_probability",
            table_conclusive,
            0.25,
            Units::Probability,
            1e-12,
        ),
    ];
    Ok((summary, bounds))
}

fn attack_hoeffding(config: &ExperimentConfig) -> Result<(AttackSummary, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let ps: Vec<u32> = config.param("p", vec![1, 2, 4, 8, 16])?;
    if ps.contains(&0) {
        return Err(Error::config("params.p", "p must be at least 1"));
    }
    let rows: Vec<_> = ps.iter().map(|&p| hoeffding_row(p)).collect();
    let mut summary = AttackSummary::new("hoeffding");
    let mut monte_carlo = Vec::new();
    if let Some(trials) = config.trials {
        for &p in &ps {
            let e = intercept_success_experiment(p, trials, seed)?;
            summary.qubits_seen += trials * 8 * p as u64;
            summary.empirical_rates.insert(format!("failure_rate_p{p}"), e.failure_rate);
            monte_carlo.push(e);
        }
    }
    summary.details = json!({ "rows": rows, "monte_carlo": monte_carlo });
    let bounds = rows
        .iter()
        .map(|r| BoundReport::upper(format!("exact_failure_vs_exp_minus_p_over_4_p{}", r.p), r.exact, r.standard_bound, Units::Probability))
        .collect();
    Ok((summary, bounds))
}

fn attack_intercept_recover(config: &ExperimentConfig) -> Result<(AttackSummary, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let (scheme, _, _) = scheme_of(config)?;
    let p: u32 = config.param("p", 16)?;
    let side_channel: bool = config.param("side_channel", false)?;
    let seed_space: Option<GeneratorFamily> = config.param("seed_space", None)?;
    let output_width: Option<usize> = config.param("output_width", None)?;
    let min_success: f64 = config.param("min_success_rate", 0.999)?;
    if p == 0 {
        return Err(Error::config("params.p", "p must be at least 1"));
    }
    let k = scheme.shape.k;
    let rounds = (8 * p as usize).div_ceil(k);
    let sessions = config.trials.unwrap_or(1000);
    let hash = scheme.fixed_hash()?;

    let outcomes = (0..sessions)
        .into_par_iter()
        .map(|i| {
            let mut msg_rng = trial_rng(seed, "experiment/intercept-recover/messages", i);
            let messages: Vec<BitBlock> = (0..rounds).map(|_| random_block(scheme.shape.m, &mut msg_rng)).collect();
            let session_seed = trial_rng(seed, "experiment/intercept-recover/session", i).next_u64();
            let t = run_session(&scheme, &messages, EveStrategy::None, session_seed, None)?;
            let mut eve_rng = trial_rng(seed, "experiment/intercept-recover/eve", i);
            let input = PipelineInput {
                config: &scheme,
                transcript: &t,
                public_hash: hash.as_ref(),
                output_width,
                seed_space,
                side_channel,
            };
            let report = corollary1_pipeline(input, &mut eve_rng)?;
            let truth = scheme.generator.stream(t.key_bits_consumed as usize)?;
            let mismatches = report
                .recovered_bits
                .iter()
                .filter(|&&(pos, bit)| truth.get(pos as usize) != Some(bit))
                .count();
            Ok((report, mismatches))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = AttackSummary::new("intercept-recover");
    let mut stages: BTreeMap<String, u64> = BTreeMap::new();
    let mut successes = 0u64;
    let mut mismatches = 0usize;
    for (r, bad) in &outcomes {
        summary.qubits_seen += r.qubits_seen as u64;
        summary.conclusive_count += r.conclusive_count as u64;
        summary.recovered_bits += r.recovered_bits.len() as u64;
        successes += u64::from(r.recovered_bits.len() >= p as usize);
        mismatches += bad;
        let stage = match &r.recovery {
            RecoveryStage::Lcg { .. } => "lcg",
            RecoveryStage::Degraded(_) => "degraded",
            RecoveryStage::Insufficient { .. } => "insufficient",
            RecoveryStage::NotApplicable { .. } => "not-applicable",
        };
        *stages.entry(stage.into()).or_default() += 1;
    }
    let rate = successes as f64 / sessions.max(1) as f64;
    if let Some((first, _)) = outcomes.first() {
        summary.seed_result = to_value(&first.recovery)?;
    }
    summary.empirical_rates.insert("success_rate".into(), rate);
    summary.empirical_rates.insert(
        "conclusive_rate".into(),
        summary.conclusive_count as f64 / summary.qubits_seen.max(1) as f64,
    );
    summary.details = json!({
        "p": p,
        "rounds_per_session": rounds,
        "qubits_per_session": rounds * k,
        "sessions": sessions,
        "successes": successes,
        "recovery_stages": stages,
        "exact_failure_probability": exact_intercept_failure(p),
        "displayed_failure_bound": hoeffding_failure_bound(p),
    });
    let bounds = vec![
        BoundReport::lower("intercept_recover_success_rate", rate, min_success, Units::Probability),
        BoundReport::upper("recovered_bit_mismatches", mismatches as f64, 0.0, Units::Count),
    ];
    Ok((summary, bounds))
}

fn attack_breidbart(config: &ExperimentConfig) -> Result<(AttackSummary, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let n = config.trials.unwrap_or(100_000) as usize;
    let theta: f64 = config.param("theta", BREIDBART_ANGLE)?;
    let tolerance: f64 = config.param("tolerance", 0.004)?;
    let mut rng = component_rng(seed, "experiment/breidbart");
    let x = random_block(n, &mut rng);
    let t = random_block(n, &mut rng);
    let qubits: Vec<PureState> = x.iter().zip(t.iter()).map(|(x, t)| encode_qubit(x, t)).collect();
    let guess = breidbart_attack(&qubits, &t, theta, &mut rng)?;
    let accuracy = guess.accuracy_against(&x)?;
    let mut summary = AttackSummary::new("breidbart");
    summary.qubits_seen = n as u64;
    summary.empirical_rates.insert("accuracy".into(), accuracy);
    summary.details = json!({
        "theta": theta,
        "expected_accuracy": guess.expected_accuracy,
        "empirical_channel_information": 1.0 - binary_entropy(accuracy),
        "optimal_channel_information": breidbart_channel_information(),
    });
    let bounds = vec![BoundReport::equality(
        "breidbart_accuracy",
        accuracy,
        angle_accuracy(theta),
        Units::Probability,
        tolerance,
    )];
    Ok((summary, bounds))
}

pub fn cmd_bounds(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let quantity: String = config.param("quantity", "equivocation".to_string())?;
    let (results, bounds) = match quantity.as_str() {
        "equivocation" => bounds_equivocation(config)?,
        "holevo" => bounds_holevo(config)?,
        "continuity" => bounds_continuity(config)?,
        "block-length" => bounds_block_length(config)?,
        "tag-secrecy" => bounds_tag_secrecy(config)?,
        other => {
            return Err(Error::config(
                "params.quantity",
                format!("unknown quantity `{other}`; use equivocation, holevo, continuity, block-length or tag-secrecy"),
            ))
        }
    };
    Ok(ExperimentReport::new(config, results, bounds))
}

/// Key-block law from `params.family`, else the configured LCG with its
/// state enumerated, else fair.
fn key_distribution(config: &ExperimentConfig, k: usize) -> Result<(GeneratorFamily, BlockDistribution)> {
    let family: Option<GeneratorFamily> = config.param("family", None)?;
    let family = match (family, config.generator) {
        (Some(f), _) => f,
        (None, Some(GeneratorSpec::Lcg(p))) => GeneratorFamily::lcg_state_only(p.modulus, p.multiplier, p.increment),
        (None, _) => GeneratorFamily::Fair,
    };
    let start: u64 = config.param("start", 0)?;
    Ok((family, block_distribution(&family, k, start)?))
}

/// `−2cos²(π/8)·log2 cos(π/8) − 2sin²(π/8)·log2 sin(π/8)`.
fn s_star_closed_form() -> f64 {
    let (c, s) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    -2.0 * c * c * c.log2() - 2.0 * s * s * s.log2()
}

fn bounds_equivocation(config: &ExperimentConfig) -> Result<(Value, Vec<BoundReport>)> {
    let k = config.require_k()?;
    let (family, p) = key_distribution(config, k)?;
    let y: BitBlock = config.param("y", BitBlock::zeros(k))?;
    if y.len() != k {
        return Err(Error::config("params.y", format!("expected {k} bits, got {}", y.len())));
    }
    let fair_one = BlockDistribution::uniform(1);
    let s_star = von_neumann_entropy(&density_for_message(0, &fair_one)?)?;
    let block_entropy = von_neumann_entropy(&density_for_block(&y, &p)?)?;
    let floor = holevo_floor(&p, &y)?;
    let fair_floor = k as f64 * (1.0 - s_star);
    let breidbart = verify_holevo_against_povm(&fair_one, &BitBlock::zeros(1), &breidbart_measurement(BREIDBART_ANGLE))?;

    let mut bounds = vec![
        BoundReport::equality("s_star_closed_form", s_star, s_star_closed_form(), Units::Bits, 1e-9),
        floor.clone(),
        proposition2_check(&p, &y)?,
        breidbart.clone(),
    ];
    if family == GeneratorFamily::Fair {
        bounds.push(BoundReport::equality("holevo_floor_fair", floor.value, fair_floor, Units::Bits, 1e-8));
        bounds.push(BoundReport::equality(
            "block_entropy_additivity",
            block_entropy,
            k as f64 * s_star,
            Units::Bits,
            1e-8,
        ));
    }
    let results = json!({
        "k": k,
        "family": family,
        "y": y,
        "bias": bias(&p),
        "key_entropy": p.entropy_bits(),
        "s_star": s_star,
        "one_minus_s_star": 1.0 - s_star,
        "block_entropy": block_entropy,
        "holevo_floor": floor.value,
        "fair_holevo_floor": fair_floor,
        "breidbart_information": breidbart.value,
        "breidbart_gap_to_s_star": s_star - breidbart.value,
    });
    Ok((results, bounds))
}

fn bounds_holevo(config: &ExperimentConfig) -> Result<(Value, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let trials = config.trials.unwrap_or(200);
    let ks: Vec<usize> = config.param("ks", vec![1, 2])?;
    let max_outcomes: usize = config.param("max_outcomes", 4)?;
    if ks.is_empty() || ks.contains(&0) || max_outcomes < 2 {
        return Err(Error::config("params", "ks must be non-empty and positive; max_outcomes ≥ 2"));
    }
    let reports = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "experiment/holevo", i);
            let k = ks[i as usize % ks.len()];
            let p = dirichlet_block_distribution(k, &mut rng)?;
            let y = random_block(k, &mut rng);
            let outcomes = rng.random_range(2..=max_outcomes);
            let povm = random_povm(k, outcomes, &mut rng)?;
            verify_holevo_against_povm(&p, &y, &povm)
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = reports.iter().filter(|r| !r.satisfied).count();
    let worst = reports.iter().map(|r| r.value - r.bound).fold(f64::NEG_INFINITY, f64::max);
    let fair_one = BlockDistribution::uniform(1);
    let breidbart = verify_holevo_against_povm(&fair_one, &BitBlock::zeros(1), &breidbart_measurement(BREIDBART_ANGLE))?;
    let results = json!({
        "trials": trials,
        "ks": ks,
        "violations": violations,
        "worst_excess": worst,
        "breidbart_information": breidbart.value,
        "s_star": breidbart.bound,
        "breidbart_gap_to_s_star": breidbart.bound - breidbart.value,
    });
    let bounds = vec![
        BoundReport::upper("holevo_random_worst_excess", worst.max(-1.0), 0.0, Units::Bits),
        breidbart,
    ];
    Ok((results, bounds))
}

#[derive(Debug, Clone, Serialize)]
struct ContinuityRow {
    k: usize,
    samples: u64,
    trace_distance_violations: usize,
    entropy_gap_violations: usize,
    worst_trace_distance_excess: f64,
    worst_entropy_gap_excess: f64,
    max_bias: f64,
}

fn bounds_continuity(config: &ExperimentConfig) -> Result<(Value, Vec<BoundReport>)> {
    let seed = config.master_seed()?;
    let samples = config.trials.unwrap_or(1000);
    let ks: Vec<usize> = config.param("ks", vec![2, 3, 4, 5])?;
    let max_bias: f64 = config.param("max_bias", FANNES_LIMIT)?;
    let mut rows = Vec::new();
    for &k in &ks {
        let checks = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, &format!("experiment/continuity/k{k}"), i);
                let p = sample_in_bias_band(k, 0.0, max_bias, &mut rng)?;
                let y = random_block(k, &mut rng);
                let eps = bias(&p);
                let prop2 = proposition2_check(&p, &y)?;
                let thm2 = theorem2_check(&p, &y, eps)?;
                Ok((prop2, thm2, eps))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ContinuityRow {
            k,
            samples,
            trace_distance_violations: checks.iter().filter(|c| !c.0.satisfied).count(),
            entropy_gap_violations: checks.iter().filter(|c| !c.1.satisfied).count(),
            worst_trace_distance_excess: checks.iter().map(|c| c.0.value - c.0.bound).fold(f64::NEG_INFINITY, f64::max),
            worst_entropy_gap_excess: checks.iter().map(|c| c.1.value - c.1.bound).fold(f64::NEG_INFINITY, f64::max),
            max_bias: checks.iter().map(|c| c.2).fold(0.0, f64::max),
        });
    }
    let worst = |f: fn(&ContinuityRow) -> f64| rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max).max(-1.0);
    let bounds = vec![
        BoundReport::upper(
            "trace_distance_vs_bias_worst_excess",
            worst(|r| r.worst_trace_distance_excess),
            0.0,
            Units::Bits,
        ),
        BoundReport::upper("entropy_gap_worst_excess", worst(|r| r.worst_entropy_gap_excess), 0.0, Units::Nats),
    ];
    Ok((json!({ "max_bias": max_bias, "rows": rows }), bounds))
}

fn bounds_block_length(config: &ExperimentConfig) -> Result<(Value, Vec<BoundReport>)> {
    let eps: f64 = config.param("eps", 0.001)?;
    let delta: f64 = config.param("delta", 0.1)?;
    let simple_eps: f64 = config.param("simple_eps", 0.01)?;
    let results = json!({
        "eps": eps,
        "delta": delta,
        "max_block_length": max_block_length(eps, delta)?,
        "simple_eps": simple_eps,
        "max_block_length_simple": max_block_length_simple(simple_eps)?,
        "delta_equals_eps": block_length_comparison(simple_eps)?,
    });
    Ok((results, Vec::new()))
}

fn bounds_tag_secrecy(config: &ExperimentConfig) -> Result<(Value, Vec<BoundReport>)> {
    let shape = shape_of(config)?;
    let k = shape.k;
    let (family, key) = key_distribution(config, k)?;
    let xor = xor_scheme_joint(&key)?;
    let xor_equivocation = xor.conditional_entropy(&["X"], &["Y", "Z"])?;
    let chain = wegman_carter_equivalence(shape, &key)?;
    let classical = tag_equivocation_identity(&wegman_carter_joint(shape, &key)?, &["H", "X"])?;
    let quantum_shape: HashFamilyShape = config.param("quantum_shape", HashFamilyShape { m: 2, k: 1 })?;
    let quantum_shape = HashFamilyShape::new(quantum_shape.m, quantum_shape.k)?;
    let povm = (1..quantum_shape.k).fold(breidbart_measurement(BREIDBART_ANGLE), |acc, _| {
        acc.tensor(&breidbart_measurement(BREIDBART_ANGLE))
    });
    let quantum = tag_equivocation_identity(&single_key_quantum_joint(quantum_shape, &povm)?, &["X"])?;
    let mut bounds = vec![
        BoundReport::equality("xor_key_equivocation", xor_equivocation, 0.0, Units::Bits, IDENTITY_TOLERANCE),
        chain.report.clone(),
        BoundReport::equality(
            "tag_and_key_equivocation",
            chain.tag_and_key_given_view,
            k as f64,
            Units::Bits,
            IDENTITY_TOLERANCE,
        ),
        named(classical.report.clone(), "tag_equivocation_identity_classical"),
        named(quantum.report.clone(), "tag_equivocation_identity_quantum"),
    ];
    bounds.retain(|b| family == GeneratorFamily::Fair || b.name.starts_with("tag_equivocation_identity"));
    let results = json!({
        "m": shape.m,
        "k": k,
        "family": family,
        "xor_key_equivocation": xor_equivocation,
        "one_time_pad_chain": chain,
        "classical_identity": classical,
        "quantum_shape": quantum_shape,
        "quantum_identity": quantum,
    });
    Ok((results, bounds))
}

fn named(mut report: BoundReport, name: &str) -> BoundReport {
    report.name = name.to_string();
    report
}

pub fn cmd_hash_verify(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let shape = shape_of(config)?;
    let c1 = verify_condition1(shape)?;
    let c2 = verify_condition2(shape)?;
    let target = 0.5f64.powi(shape.k as i32);
    let bounds = vec![
        BoundReport::equality(
            "condition1_min_count",
            c1.min_count as f64,
            c1.expected_count as f64,
            Units::Count,
            0.0,
        ),
        BoundReport::equality(
            "condition1_max_count",
            c1.max_count as f64,
            c1.expected_count as f64,
            Units::Count,
            0.0,
        ),
        BoundReport::upper("condition2_epsilon", c2.epsilon, target, Units::Probability),
    ];
    let results = json!({
        "m": shape.m,
        "k": shape.k,
        "key_bits": shape.key_bits(),
        "condition1": c1,
        "condition2": c2,
        "epsilon": c2.epsilon,
        "tag_space_inverse": target,
    });
    Ok(ExperimentReport::new(config, results, bounds))
}

pub fn cmd_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let f: BiasSchedule = config.param("bias", BiasSchedule::InversePower { exponent: 1.0 })?;
    let g: BlockSchedule = config.param("blocks", BlockSchedule::Log2Capped { cap: 6 })?;
    let n: Vec<u64> = config.param("n", (1..=10).map(|e| 1u64 << e).collect())?;
    let rows = asymptotic_gap_sweep(f, g, &n)?;
    let bounds = rows
        .iter()
        .filter_map(|r| {
            r.theorem2_bound
                .map(|b| BoundReport::upper(format!("entropy_gap_n{}", r.n), r.gap_nats, b, Units::Nats))
        })
        .collect();
    let results = json!({ "bias": f, "blocks": g, "rows": rows });
    Ok(ExperimentReport::new(config, results, bounds))
}
