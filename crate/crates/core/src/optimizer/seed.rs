//! Per-task seeds that depend only on the task's key, never on scheduling.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds the key words through SplitMix64 so that nearby keys give
/// unrelated seeds and the word order matters.
pub fn derive_seed(words: &[u64]) -> u64 {
    let mut state = splitmix64(GOLDEN ^ words.len() as u64);
    for &w in words {
        state = splitmix64(state.wrapping_add(GOLDEN) ^ splitmix64(w.wrapping_add(GOLDEN)));
    }
    state
}

/// Seed for restart `restart` of grid point `(n_sites, depth, field)`.
pub fn task_seed(base_seed: u64, n_sites: u32, depth: usize, field: f64, restart: usize) -> u64 {
    derive_seed(&[base_seed, n_sites as u64, depth as u64, field.to_bits(), restart as u64])
}
