use proptest::prelude::*;
use qauth_core::bounds::{
    dirichlet_block_distribution, holevo_floor, key_outcome_joint, proposition2_check, sample_in_bias_band,
    theorem2_check, verify_holevo_against_povm, FANNES_LIMIT,
};
use qauth_core::quantum::{
    density_for_block, encode_block, measure_in_bases, random_density, random_povm, spectrum, trace_distance,
    von_neumann_entropy,
};
use qauth_core::{BitBlock, BlockDistribution, JointTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn block(k: usize, bits: u64) -> BitBlock {
    BitBlock::from_u64(bits & ((1 << k) - 1), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fair_entropy_is_additive_over_blocks(k1 in 1usize..4, k2 in 1usize..4, y1: u64, y2: u64) {
        let (a, b) = (block(k1, y1), block(k2, y2));
        let s = |y: &BitBlock| von_neumann_entropy(&density_for_block(y, &BlockDistribution::uniform(y.len())).unwrap()).unwrap();
        prop_assert!((s(&a.concat(&b)) - s(&a) - s(&b)).abs() < TOL);
    }

    #[test]
    fn fair_entropy_ignores_the_tag_bits(k in 1usize..5, y1: u64, y2: u64) {
        let s = |y: u64| von_neumann_entropy(&density_for_block(&block(k, y), &BlockDistribution::uniform(k)).unwrap()).unwrap();
        prop_assert!((s(y1) - s(y2)).abs() < TOL);
    }

    #[test]
    fn spectrum_is_a_probability_vector(q in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ev = spectrum(&random_density(q, &mut rng).unwrap()).unwrap().eigenvalues;
        prop_assert!(ev.iter().all(|&l| l >= -1e-10));
        prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_is_a_metric(q in 1usize..4, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (
            random_density(q, &mut rng).unwrap(),
            random_density(q, &mut rng).unwrap(),
            random_density(q, &mut rng).unwrap(),
        );
        let d = |x, y| trace_distance(x, y).unwrap();
        prop_assert!(d(&a, &a).abs() < TOL);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < TOL);
        prop_assert!(d(&a, &b) >= -TOL && d(&a, &b) <= 1.0 + TOL);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + TOL);
    }

    #[test]
    fn pure_state_distance_matches_overlap(k in 1usize..4, x1: u64, t1: u64, x2: u64, t2: u64) {
        let a = encode_block(&block(k, x1), &block(k, t1)).unwrap();
        let b = encode_block(&block(k, x2), &block(k, t2)).unwrap();
        let expected = (1.0 - a.overlap(&b)).max(0.0).sqrt();
        prop_assert!((trace_distance(&a.density(), &b.density()).unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn chain_rule_on_key_outcome_joints(k in 1usize..3, outcomes in 2usize..5, y: u64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = dirichlet_block_distribution(k, &mut rng).unwrap();
        let povm = random_povm(k, outcomes, &mut rng).unwrap();
        let j: JointTable = key_outcome_joint(&p, &block(k, y), &povm).unwrap();
        let h_xz = j.entropy(&["X", "Z"]).unwrap();
        let h_z = j.entropy(&["Z"]).unwrap();
        prop_assert!((j.conditional_entropy(&["X"], &["Z"]).unwrap() - (h_xz - h_z)).abs() < TOL);
        let i = j.mutual_information(&["X"], &["Z"], &[]).unwrap();
        prop_assert!((i - (j.entropy(&["X"]).unwrap() - (h_xz - h_z))).abs() < TOL);
        prop_assert!(i >= -TOL);
    }

    #[test]
    fn holevo_bounds_every_povm(k in 1usize..3, outcomes in 2usize..5, y: u64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = dirichlet_block_distribution(k, &mut rng).unwrap();
        let povm = random_povm(k, outcomes, &mut rng).unwrap();
        let r = verify_holevo_against_povm(&p, &block(k, y), &povm).unwrap();
        prop_assert!(r.satisfied, "{r:?}");
        prop_assert!(holevo_floor(&p, &block(k, y)).unwrap().satisfied);
    }

    #[test]
    fn trace_distance_below_bias(k in 1usize..4, y: u64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = dirichlet_block_distribution(k, &mut rng).unwrap();
        let r = proposition2_check(&p, &block(k, y)).unwrap();
        prop_assert!(r.satisfied, "{r:?}");
    }

    #[test]
    fn entropy_gap_within_continuity_bound(k in 2usize..5, y: u64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sample_in_bias_band(k, 0.0, FANNES_LIMIT, &mut rng).unwrap();
        let eps = qauth_core::bitsource::bias(&p);
        let r = theorem2_check(&p, &block(k, y), eps).unwrap();
        prop_assert!(r.satisfied, "{r:?}");
    }
}

#[test]
fn matched_bases_always_decode_the_tag() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..10_000u64 {
        let (x, t) = (block(3, i.wrapping_mul(0x9e37)), block(3, i >> 3));
        let m = measure_in_bases(&encode_block(&x, &t).unwrap(), &x, &mut rng).unwrap();
        assert_eq!(m.outcomes, t);
        assert!(m.certain.iter().all(|&c| c));
    }
}
