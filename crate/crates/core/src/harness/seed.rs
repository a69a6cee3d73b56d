const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer applied to `state + gamma`: the first output of
/// a splitmix64 generator seeded with `state`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under `master`: output `trial + 1` of a splitmix64
/// stream started at `master`, computed without walking the stream.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master.wrapping_add(trial.wrapping_mul(GOLDEN_GAMMA)))
}
