//! Labeled random substreams derived from a single run seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8], mut hash: u64) -> u64 {
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Independent stream for `(seed, label, indices)`. Distinct labels or
/// indices select distinct ChaCha streams under the same key.
pub fn substream(seed: u64, label: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut stream = fnv1a(label.as_bytes(), FNV_OFFSET);
    for idx in indices {
        stream = fnv1a(&idx.to_le_bytes(), stream);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
