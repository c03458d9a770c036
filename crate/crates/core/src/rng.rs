//! Seed derivation for independent random streams.

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the named stream belonging to `seed`. Distinct names give
/// unrelated streams.
pub fn stream_seed(seed: u64, name: &str) -> u64 {
    name.bytes()
        .fold(mix(seed), |h, b| mix(h ^ u64::from(b)))
}

/// Seed for the `index`-th sub-run of `seed` (e.g. the j-th probing rate).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix(mix(seed) ^ mix(index.wrapping_add(0xA5A5_A5A5)))
}
