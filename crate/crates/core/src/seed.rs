//! Deterministic sub-seed derivation.
//!
//! `std::hash` output is not stable across releases, so scenario
//! reproducibility uses a fixed FNV-1a / SplitMix64 combination instead.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derives an independent stream seed from a master seed, a domain label and
/// a numeric id. Stable across platforms and releases.
pub fn subseed(master: u64, domain: &str, id: u64) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a(domain.as_bytes()) ^ splitmix64(id)))
}
