use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Counter-based generator for one (seed, stream) pair.
///
/// ChaCha is a counter-mode cipher, so distinct streams of the same seed are
/// independent and any (seed, stream) pair can be opened in any order — this
/// is what makes parallel Monte Carlo reproducible regardless of scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Reserved stream indices so independent consumers of one seed never collide.
pub mod streams {
    pub const BROWNIAN_POS: u64 = 0;
    pub const BROWNIAN_NEG: u64 = 1;
    pub const FBM: u64 = 2;
    /// Dense-factorization fallback inside fBm synthesis.
    pub const FBM_FALLBACK: u64 = 3;
}
