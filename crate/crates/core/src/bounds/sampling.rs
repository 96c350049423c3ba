//! Block distributions for randomized checks and sweeps.

use rand::Rng;
use rand_distr::Exp1;

use crate::bitsource::{bias, BlockDistribution};
use crate::error::{Error, Result};

const MAX_REJECTIONS: usize = 10_000;

/// Symmetric Dirichlet(1) over the `2^k` block outcomes.
pub fn dirichlet_block_distribution<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<BlockDistribution> {
    let weights: Vec<f64> = (0..1usize << k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    BlockDistribution::from_weights(k, weights)
}

/// Draws a target bias uniformly from `[low, high]`, then a Dirichlet(1)
/// distribution whose bias is at least the target, and pulls it toward the
/// uniform law until its bias equals the target exactly.
pub fn sample_in_bias_band<R: Rng + ?Sized>(
    k: usize,
    low: f64,
    high: f64,
    rng: &mut R,
) -> Result<BlockDistribution> {
    let max = 1.0 - 0.5f64.powi(k as i32);
    if !(0.0 <= low && low <= high && high <= max) {
        return Err(Error::Range(format!("bias band [{low}, {high}] outside [0, {max}]")));
    }
    let target = if low == high { low } else { rng.random_range(low..=high) };
    let u = 0.5f64.powi(k as i32);
    for _ in 0..MAX_REJECTIONS {
        let d = dirichlet_block_distribution(k, rng)?;
        let b = bias(&d);
        if b < target || b == 0.0 {
            if target == 0.0 {
                return Ok(BlockDistribution::uniform(k));
            }
            continue;
        }
        let scale = target / b;
        let p = d.probabilities().iter().map(|&x| (u + scale * (x - u)).max(0.0)).collect();
        return BlockDistribution::from_weights(k, p);
    }
    Err(Error::Invariant(format!(
        "no Dirichlet draw reached bias {target} in {MAX_REJECTIONS} attempts"
    )))
}

/// Uniform law with `b` moved onto the first outcome, drained from the last
/// outcomes backwards. Its bias is exactly `b`.
pub fn worst_case_bias_distribution(k: usize, b: f64) -> Result<BlockDistribution> {
    let n = 1usize << k;
    let u = 1.0 / n as f64;
    let max = 1.0 - u;
    if !(0.0..=max).contains(&b) {
        return Err(Error::Range(format!("bias {b} not achievable at k={k}; max is {max}")));
    }
    let mut p = vec![u; n];
    p[0] += b;
    let mut left = b;
    for slot in p.iter_mut().skip(1).rev() {
        let take = left.min(*slot);
        *slot -= take;
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    BlockDistribution::from_weights(k, p)
}
