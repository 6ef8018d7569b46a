//! Time bucketing for (timestamp, value) sequences.

use std::collections::BTreeMap;

use crate::float::Float;

/// Start of the left-closed bucket `[k w, (k+1) w)` containing `t`.
pub fn bucket_start(t: u64, width_s: u64) -> u64 {
    t - t % width_s
}

/// Arithmetic mean per bucket, labeled by bucket start; empty buckets are
/// omitted. Values accumulate in input order within each bucket.
pub fn bucket_means<F: Float>(points: &[(u64, F)], width_s: u64) -> Vec<(u64, F)> {
    assert!(width_s > 0, "bucket width must be positive");
    let mut acc: BTreeMap<u64, (F, u64)> = BTreeMap::new();
    for &(t, v) in points {
        let slot = acc.entry(bucket_start(t, width_s)).or_insert((F::zero(), 0));
        slot.0 = slot.0 + v;
        slot.1 += 1;
    }
    acc.into_iter()
        .map(|(t, (sum, n))| (t, sum / F::val(n)))
        .collect()
}
