//! Kendall rank correlation, tau-b (tie corrected).
//!
//! Uses the sort-and-merge counting scheme: sort by `x`, count discordant
//! pairs as merge-sort inversions on `y`, and correct the denominator for
//! ties on either side. `O(n log n)` overall.

use thiserror::Error;

use crate::float::Float;

#[derive(Debug, Error, PartialEq)]
pub enum TauError {
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two observations, got {0}")]
    InsufficientLength(usize),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("correlation undefined: all values tied on {0}")]
    AllTied(&'static str),
}

fn tie_pairs(run: u64) -> u64 {
    run * (run - 1) / 2
}

/// Tau-b of two equal-length samples:
/// `(C - D) / sqrt((n0 - t_x) * (n0 - t_y))` with `n0 = n(n-1)/2` and
/// `t_x`, `t_y` the pair counts tied on each side.
pub fn tau_b<F: Float>(x: &[F], y: &[F]) -> Result<F, TauError> {
    if x.len() != y.len() {
        return Err(TauError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(TauError::InsufficientLength(n));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(TauError::NonFinite);
    }

    let mut pairs: Vec<(F, F)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite")
            .then(a.1.partial_cmp(&b.1).expect("finite"))
    });

    // Tie runs on x, and on (x, y) jointly, are consecutive after the sort.
    let mut tied_x: u64 = 0;
    let mut tied_xy: u64 = 0;
    let mut run_x: u64 = 1;
    let mut run_xy: u64 = 1;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += tie_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += tie_pairs(run_x);
            run_x = 1;
            tied_xy += tie_pairs(run_xy);
            run_xy = 1;
        }
    }
    tied_x += tie_pairs(run_x);
    tied_xy += tie_pairs(run_xy);

    // Discordant pairs = inversions of the y sequence, counted while
    // merge-sorting it. Equal elements prefer the left run, so ties are not
    // counted as inversions.
    let mut ys: Vec<F> = pairs.iter().map(|p| p.1).collect();
    let mut buf = ys.clone();
    let mut discordant: u64 = 0;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || ys[i] <= ys[j]) {
                    buf[k] = ys[i];
                    i += 1;
                } else {
                    discordant += (mid - i) as u64;
                    buf[k] = ys[j];
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        std::mem::swap(&mut ys, &mut buf);
        width *= 2;
    }

    let mut tied_y: u64 = 0;
    let mut run_y: u64 = 1;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            tied_y += tie_pairs(run_y);
            run_y = 1;
        }
    }
    tied_y += tie_pairs(run_y);

    let total = (n as u64) * (n as u64 - 1) / 2;
    if tied_x == total {
        return Err(TauError::AllTied("x"));
    }
    if tied_y == total {
        return Err(TauError::AllTied("y"));
    }

    // C - D = n0 - t_x - t_y + t_xy - 2 D.
    let numerator = total as i128 - tied_x as i128 - tied_y as i128 + tied_xy as i128
        - 2 * discordant as i128;
    let num = F::val(numerator);
    let denom = (F::val(total - tied_x) * F::val(total - tied_y)).sqrt();
    Ok((num / denom).max(-F::one()).min(F::one()))
}
