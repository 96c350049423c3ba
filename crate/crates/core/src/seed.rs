//! Master-seed derivation.
//!
//! Every random draw in an experiment comes from a ChaCha8 stream keyed by
//! the master seed. The component name is hashed (SHA-256, first 8 bytes,
//! big-endian) into the ChaCha stream index, so components never share
//! randomness and adding a component does not perturb the others. Parallel
//! trials take a second level: the component stream yields a trial key and
//! the trial index becomes that key's stream index.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type ExperimentRng = ChaCha8Rng;

pub fn stream_id(component: &str) -> u64 {
    let digest = Sha256::digest(component.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes)
}

pub fn component_rng(master_seed: u64, component: &str) -> ExperimentRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id(component));
    rng
}

pub fn derive_seed(master_seed: u64, component: &str) -> u64 {
    component_rng(master_seed, component).next_u64()
}

pub fn trial_rng(master_seed: u64, component: &str, trial: u64) -> ExperimentRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, component));
    rng.set_stream(trial);
    rng
}
