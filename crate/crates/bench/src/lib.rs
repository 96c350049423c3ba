//! Fixtures shared by the criterion benches.

use qauth_core::quantum::density_for_block;
use qauth_core::{BitBlock, BlockDistribution, DensityMatrix, LcgParams};

/// Fair-key encoding mixture for an alternating `k`-bit tag block.
pub fn fair_density(k: usize) -> DensityMatrix {
    let y = BitBlock::from_bools((0..k).map(|i| i % 2 == 1));
    density_for_block(&y, &BlockDistribution::uniform(k)).expect("k within qubit limit")
}

/// A skewed key law whose weights grow linearly with the outcome index.
pub fn skewed_distribution(k: usize) -> BlockDistribution {
    BlockDistribution::from_weights(k, (1..=1usize << k).map(|w| w as f64).collect()).expect("positive weights")
}

pub fn sample_lcg() -> LcgParams {
    LcgParams::new(2_147_483_647, 48_271, 11, 20_240_601).expect("valid parameters")
}
