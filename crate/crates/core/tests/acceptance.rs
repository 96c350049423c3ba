//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs under `cargo test` as a harness-less test target.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qauth_core::attacks::{hoeffding_row, intercept_table};
use qauth_core::bounds::{
    holevo_floor, single_key_quantum_joint, tag_equivocation_identity, wegman_carter_equivalence,
    wegman_carter_joint, xor_scheme_joint,
};
use qauth_core::experiment::{self, Command, ExperimentConfig, ExperimentReport, SchemeSection};
use qauth_core::quantum::{
    binary_entropy, breidbart_measurement, density_for_block, density_for_message, random_povm,
    von_neumann_entropy, BREIDBART_ANGLE,
};
use qauth_core::{
    BitBlock, BlockDistribution, EveStrategy, GeneratorSpec, HashFamilyShape, LcgParams, Povm, SchemeVariant,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SEED: u64 = 20_240_601;

const S_STAR_CLOSED_FORM_TOL: f64 = 1e-9;
const S_STAR_FOUR_DIGIT: f64 = 0.6009;
const S_STAR_FOUR_DIGIT_TOL: f64 = 1e-3;
const S_STAR_RUNTIME: Duration = Duration::from_millis(1);
const FLOOR_TOL: f64 = 1e-8;
const FLOOR_RUNTIME: Duration = Duration::from_secs(10);
const BREIDBART_INFO: f64 = 0.3991;
const BREIDBART_INFO_TOL: f64 = 1e-3;
const IDENTITY_TOL: f64 = 1e-10;
const ENUMERATION_RUNTIME: Duration = Duration::from_secs(1);
const CONTINUITY_RUNTIME: Duration = Duration::from_secs(60);
const BLOCK_LENGTH_FULL: f64 = 63.17;
const BLOCK_LENGTH_SIMPLE: f64 = 73.13;
const BLOCK_LENGTH_TOL: f64 = 1e-2;
const LCG_MIN_EXACT: f64 = 99.0;
const LCG_RUNTIME: Duration = Duration::from_secs(5);
const PIPELINE_MIN_SUCCESS: f64 = 0.999;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(config: &ExperimentConfig) -> ExperimentReport {
    experiment::run(config).unwrap_or_else(|e| panic!("{:?} failed: {e}", config.command))
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn s_star_reproduction() -> Outcome {
    let start = Instant::now();
    let s = von_neumann_entropy(&density_for_message(0, &BlockDistribution::uniform(1)).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let (c, si) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    let closed = -2.0 * c * c * c.log2() - 2.0 * si * si * si.log2();
    let h2 = binary_entropy((1.0 + 1.0 / 2f64.sqrt()) / 2.0);
    check(
        (s - closed).abs() <= S_STAR_CLOSED_FORM_TOL
            && (s - h2).abs() <= S_STAR_CLOSED_FORM_TOL
            && (s - S_STAR_FOUR_DIGIT).abs() <= S_STAR_FOUR_DIGIT_TOL
            && elapsed < S_STAR_RUNTIME,
        format!("S = {s:.16}, closed form {closed:.16}, H2 {h2:.16}, {elapsed:?}"),
    )
}

fn equivocation_floor() -> Outcome {
    let start = Instant::now();
    let s_star = von_neumann_entropy(&density_for_message(0, &BlockDistribution::uniform(1)).unwrap()).unwrap();
    let mut worst_floor = 0.0f64;
    let mut worst_add = 0.0f64;
    for k in 1..=6 {
        let p = BlockDistribution::uniform(k);
        for y in [BitBlock::zeros(k), BitBlock::from_u64(0b101010 >> (6 - k), k)] {
            let floor = holevo_floor(&p, &y).unwrap().value;
            let s = von_neumann_entropy(&density_for_block(&y, &p).unwrap()).unwrap();
            worst_floor = worst_floor.max((floor - k as f64 * (1.0 - s_star)).abs());
            worst_add = worst_add.max((s - k as f64 * s_star).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst_floor <= FLOOR_TOL && worst_add <= FLOOR_TOL && elapsed < FLOOR_RUNTIME,
        format!("k=1..6: max floor error {worst_floor:.2e}, max additivity error {worst_add:.2e}, {elapsed:?}"),
    )
}

fn holevo_inequality() -> Outcome {
    let mut c = ExperimentConfig::new(Command::Bounds, SEED);
    c.trials = Some(200);
    c.params.insert("quantity".into(), json!("holevo"));
    c.params.insert("ks".into(), json!([1, 2]));
    let r = run(&c);
    let violations = r.results["violations"].as_u64().unwrap_or(u64::MAX);
    let info = num(&r.results["breidbart_information"]);
    let gap = num(&r.results["breidbart_gap_to_s_star"]);
    check(
        violations == 0 && (info - BREIDBART_INFO).abs() <= BREIDBART_INFO_TOL,
        format!(
            "200 random (p, POVM) pairs: {violations} violations, worst excess {:.3e}; angle-optimal I = {info:.4}, gap to S* = {gap:.4} (achievability not asserted)",
            num(&r.results["worst_excess"])
        ),
    )
}

fn classical_baseline() -> Outcome {
    let start = Instant::now();
    let xor = xor_scheme_joint(&BlockDistribution::uniform(2)).unwrap();
    let h = xor.conditional_entropy(&["X"], &["Y", "Z"]).unwrap();
    let shape = HashFamilyShape::new(3, 2).unwrap();
    let chain = wegman_carter_equivalence(shape, &BlockDistribution::uniform(2)).unwrap();
    let elapsed = start.elapsed();
    check(
        h.abs() <= IDENTITY_TOL
            && (chain.tag_and_key_given_view - 2.0).abs() <= IDENTITY_TOL
            && chain.equivalent
            && elapsed < ENUMERATION_RUNTIME,
        format!(
            "XOR H(X|Y,Z) = {h:.1e}; m=3,k=2 H(T,X|Y,Z) = {:.12}, H(T|Y,Z) = {:.12}, {elapsed:?}",
            chain.tag_and_key_given_view, chain.tag_given_view
        ),
    )
}

fn tag_secrecy_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut joints = Vec::new();
    for (m, k) in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 2)] {
        let shape = HashFamilyShape::new(m, k).unwrap();
        let fair = wegman_carter_joint(shape, &BlockDistribution::uniform(k)).unwrap();
        joints.push((format!("wc m={m} k={k} fair"), fair, &["H", "X"][..]));
        let skewed = BlockDistribution::from_weights(k, (1..=1 << k).map(|w| w as f64).collect()).unwrap();
        joints.push((format!("wc m={m} k={k} skewed"), wegman_carter_joint(shape, &skewed).unwrap(), &["H", "X"][..]));
    }
    let q1 = HashFamilyShape::new(2, 1).unwrap();
    let q2 = HashFamilyShape::new(2, 2).unwrap();
    let povms: Vec<(String, HashFamilyShape, Povm)> = vec![
        ("quantum m=2 k=1 angle-optimal".into(), q1, breidbart_measurement(BREIDBART_ANGLE)),
        ("quantum m=2 k=1 computational".into(), q1, Povm::computational(1)),
        ("quantum m=2 k=2 random".into(), q2, random_povm(2, 3, &mut rng).unwrap()),
    ];
    for (name, shape, povm) in povms {
        joints.push((name, single_key_quantum_joint(shape, &povm).unwrap(), &["X"][..]));
    }
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, joint, key) in &joints {
        match tag_equivocation_identity(joint, key) {
            Ok(t) => {
                worst = worst.max((t.report.value - t.report.bound).abs());
                if !t.report.satisfied {
                    failures.push(name.clone());
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    check(
        failures.is_empty() && worst <= IDENTITY_TOL,
        format!("{} joints (3 quantum), max |H(T|Y,Z) − I(T;X|Y,Z)| = {worst:.2e} {failures:?}", joints.len()),
    )
}

fn continuity_bounds() -> Outcome {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(Command::Bounds, SEED);
    c.trials = Some(1000);
    c.params.insert("quantity".into(), json!("continuity"));
    c.params.insert("ks".into(), json!([2, 3, 4, 5]));
    let r = run(&c);
    let elapsed = start.elapsed();
    let rows = r.results["rows"].as_array().cloned().unwrap_or_default();
    let violations: u64 = rows
        .iter()
        .map(|row| row["trace_distance_violations"].as_u64().unwrap() + row["entropy_gap_violations"].as_u64().unwrap())
        .sum();
    let samples: u64 = rows.iter().map(|row| row["samples"].as_u64().unwrap()).sum();
    check(
        rows.len() == 4 && samples == 4000 && violations == 0 && elapsed < CONTINUITY_RUNTIME,
        format!("{samples} sampled laws over k=2..5, {violations} violations, {elapsed:?}"),
    )
}

fn block_length_formulas() -> Outcome {
    let mut c = ExperimentConfig::new(Command::Bounds, SEED);
    c.params.insert("quantity".into(), json!("block-length"));
    let r = run(&c);
    let full = num(&r.results["max_block_length"]);
    let simple = num(&r.results["max_block_length_simple"]);
    let cmp = &r.results["delta_equals_eps"];
    check(
        (full - BLOCK_LENGTH_FULL).abs() <= BLOCK_LENGTH_TOL && (simple - BLOCK_LENGTH_SIMPLE).abs() <= BLOCK_LENGTH_TOL,
        format!(
            "k_max(0.001, 0.1) = {full:.4}, simple k_max(0.01) = {simple:.4}; at δ=ε=0.01: full {:.4} vs simple {:.4}",
            num(&cmp["full_with_delta_eq_eps"]),
            num(&cmp["simple"])
        ),
    )
}

fn intercept_attack() -> Outcome {
    let mut c = ExperimentConfig::new(Command::Attack, SEED);
    c.trials = Some(100_000);
    c.params.insert("attack".into(), json!("intercept"));
    let r = run(&c);
    let rate = num(&r.results["empirical_rates"]["conclusive_rate"]);
    let sigma = (0.1875f64 / 100_000.0).sqrt();
    let errors = r.bounds.iter().find(|b| b.name == "inference_errors").map(|b| b.value).unwrap_or(f64::NAN);
    let table_errors = intercept_table()
        .iter()
        .filter(|row| row.probability > 1e-12 && row.record.inferred_x.is_some_and(|x| x != row.x))
        .count();
    let rows: Vec<_> = [1, 2, 4, 8, 16].into_iter().map(hoeffding_row).collect();
    let summary: Vec<String> = rows
        .iter()
        .map(|h| {
            format!(
                "p={} exact {:.3e} vs exp(−2p) {:.3e}{} vs exp(−p/4) {:.3e}",
                h.p,
                h.exact,
                h.displayed_bound,
                if h.displayed_bound_holds { "" } else { " (exceeded)" },
                h.standard_bound
            )
        })
        .collect();
    check(
        (rate - 0.25).abs() <= 3.0 * sigma
            && errors == 0.0
            && table_errors == 0
            && rows.iter().all(|h| h.standard_bound_holds),
        format!("conclusive rate {rate:.5} (3σ = {:.5}), {errors} inference errors, {table_errors} table errors; {}", 3.0 * sigma, summary.join("; ")),
    )
}

fn lcg_recovery() -> Outcome {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(Command::Attack, SEED);
    c.trials = Some(100);
    c.params.insert("attack".into(), json!("lcg-recover"));
    let r = run(&c);
    let elapsed = start.elapsed();
    let exact = num(&r.results["details"]["exact_recoveries"]);
    check(
        exact >= LCG_MIN_EXACT && r.violations.is_empty() && elapsed < LCG_RUNTIME,
        format!("{exact} of 100 random prime-modulus instances recovered exactly from 8 outputs, {elapsed:?}"),
    )
}

fn intercept_then_recover() -> Outcome {
    let mut c = ExperimentConfig::new(Command::Attack, SEED);
    c.trials = Some(1000);
    c.m = Some(4);
    c.k = Some(4);
    c.generator = Some(GeneratorSpec::Lcg(LcgParams::new(251, 33, 17, 5).unwrap()));
    c.scheme = Some(SchemeSection {
        variant: SchemeVariant::QuantumFixedHash,
        fixed_hash_key: None,
        eve: EveStrategy::None,
        key_budget: None,
    });
    c.params.insert("attack".into(), json!("intercept-recover"));
    c.params.insert("p".into(), json!(16));
    let r = run(&c);
    let rate = num(&r.results["empirical_rates"]["success_rate"]);
    let mismatches = r.bounds.iter().find(|b| b.name == "recovered_bit_mismatches").map(|b| b.value).unwrap_or(f64::NAN);
    check(
        rate >= PIPELINE_MIN_SUCCESS && mismatches == 0.0,
        format!(
            "p=16, N·k=128 qubits: {:.1}% of 1000 sessions recovered ≥ p bits, {mismatches} mismatches, {} bits total",
            rate * 100.0,
            r.results["recovered_bits"]
        ),
    )
}

fn protocol_completeness() -> Outcome {
    let mut c = ExperimentConfig::new(Command::Protocol, SEED);
    c.m = Some(4);
    c.k = Some(3);
    c.params.insert("exhaustive".into(), json!(true));
    let r = run(&c);
    let rounds = r.results["rounds"].as_u64().unwrap_or(0);
    let accepted = r.results["accepted"].as_u64().unwrap_or(1);
    let cases = r.results["cases"].as_array().map_or(0, Vec::len);
    check(
        rounds > 0 && rounds == accepted,
        format!("{cases} (variant, shape) cases, {accepted}/{rounds} honest rounds accepted"),
    )
}

fn determinism() -> Outcome {
    let lcg = GeneratorSpec::Lcg(LcgParams::new(251, 33, 17, 5).unwrap());
    let scheme = |variant, eve| SchemeSection {
        variant,
        fixed_hash_key: None,
        eve,
        key_budget: None,
    };
    let mut configs = Vec::new();
    let mut c = ExperimentConfig::new(Command::Protocol, SEED);
    (c.m, c.k, c.trials, c.generator) = (Some(4), Some(3), Some(500), Some(GeneratorSpec::Fair { seed: 3 }));
    c.scheme = Some(scheme(SchemeVariant::QuantumSingleKey, EveStrategy::InterceptResend));
    configs.push(c);
    for attack in ["intercept", "hoeffding", "breidbart", "lcg-recover", "intercept-recover"] {
        let mut c = ExperimentConfig::new(Command::Attack, SEED);
        (c.m, c.k, c.trials, c.generator) = (Some(4), Some(4), Some(200), Some(lcg));
        c.scheme = Some(scheme(SchemeVariant::QuantumFixedHash, EveStrategy::None));
        c.params.insert("attack".into(), json!(attack));
        configs.push(c);
    }
    for quantity in ["equivocation", "holevo", "continuity", "block-length", "tag-secrecy"] {
        let mut c = ExperimentConfig::new(Command::Bounds, SEED);
        (c.m, c.k, c.trials) = (Some(3), Some(2), Some(50));
        c.params.insert("quantity".into(), json!(quantity));
        configs.push(c);
    }
    let mut c = ExperimentConfig::new(Command::HashVerify, SEED);
    (c.m, c.k) = (Some(3), Some(2));
    configs.push(c);
    configs.push(ExperimentConfig::new(Command::Sweep, SEED));

    let mut differing = Vec::new();
    for c in &configs {
        let a = run(c).without_timing().unwrap().to_string();
        let b = run(c).without_timing().unwrap().to_string();
        if a != b {
            differing.push(format!("{:?}", c.command));
        }
    }
    check(
        differing.is_empty(),
        format!("{} configs across all commands run twice; differing: {differing:?}", configs.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("s-star-reproduction", s_star_reproduction),
        ("equivocation-floor", equivocation_floor),
        ("holevo-inequality", holevo_inequality),
        ("classical-baseline", classical_baseline),
        ("tag-secrecy-identity", tag_secrecy_identity),
        ("trace-distance-and-continuity", continuity_bounds),
        ("block-length-formulas", block_length_formulas),
        ("intercept-attack", intercept_attack),
        ("lcg-recovery", lcg_recovery),
        ("intercept-then-recover-pipeline", intercept_then_recover),
        ("protocol-completeness", protocol_completeness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = f();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!("[{status}] {name}: {}", outcome.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
