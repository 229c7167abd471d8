use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator number `stream` under a master seed.
///
/// Work items that draw randomness take their own stream, so results never
/// depend on how the items are scheduled across threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed, for handing a whole sub-computation its own seed space.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finaliser over the pair
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
