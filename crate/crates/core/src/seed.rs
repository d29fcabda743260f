//! Deterministic seed derivation.
//!
//! Every random draw in this crate is keyed by a `u64` seed derived from a
//! master seed through the functions below. The mixing is specified
//! bit-exactly so that datasets and episodes are portable across
//! implementations:
//!
//! - [`splitmix64_stream`]`(seed, k)` is the k-th output of the splitmix64
//!   generator seeded with `seed`: with `GOLDEN = 0x9E37_79B9_7F4A_7C15`,
//!   the k-th state is `seed + k * GOLDEN` (wrapping) and the output is the
//!   splitmix64 finalizer applied to that state.
//! - [`fnv1a64`] is the standard 64-bit FNV-1a hash (offset basis
//!   `0xCBF2_9CE4_8422_2325`, prime `0x0000_0100_0000_01B3`), used to fold
//!   names into seeds.
//! - [`derive`]`(seed, tag)` = `splitmix64_stream(seed ^ splitmix64_stream(tag, 1), 1)`
//!   namespaces a seed by an integer tag so that independent consumers of
//!   the same parent seed get decorrelated streams.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Splitmix64 finalizer (Steele, Lea & Flood 2014).
fn finalize(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The k-th output (k >= 1) of the splitmix64 stream seeded with `seed`.
pub fn splitmix64_stream(seed: u64, k: u64) -> u64 {
    finalize(seed.wrapping_add(k.wrapping_mul(GOLDEN)))
}

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Namespace `seed` by an integer `tag`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64_stream(seed ^ splitmix64_stream(tag, 1), 1)
}

/// Namespace `seed` by a string label (FNV-1a of the UTF-8 bytes).
pub fn derive_named(seed: u64, name: &str) -> u64 {
    derive(seed, fnv1a64(name.as_bytes()))
}
