//! Literal kernel definitions and the brute-force U-statistic.
//!
//! These enumerate every permutation of every `m`-subset and are only meant
//! as a reference for the fast algorithms in [`crate::stats`]. Unlike the
//! fast path they accept tied data.

use crate::error::{Error, Result};
use crate::stats::KernelKind;

fn ind(b: bool) -> i64 {
    b as i64
}

fn le_diff_product(a: &[f64; 6], pivot: usize) -> i64 {
    let z = a[pivot];
    (ind(a[0] <= z) - ind(a[1] <= z)) * (ind(a[2] <= z) - ind(a[3] <= z))
}

// 1(y1, y2 < y3, y4)
fn both_below(y1: f64, y2: f64, y3: f64, y4: f64) -> i64 {
    ind(y1 < y3 && y1 < y4 && y2 < y3 && y2 < y4)
}

fn tau_sign(a: &[f64; 6]) -> i64 {
    both_below(a[0], a[2], a[1], a[3]) + both_below(a[1], a[3], a[0], a[2])
        - both_below(a[0], a[3], a[1], a[2])
        - both_below(a[1], a[2], a[0], a[3])
}

/// Advances `perm` to the next lexicographic permutation.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&v| v > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Evaluates the symmetric kernel of `kind` on exactly `m` points by summing
/// over all `m!` orderings.
pub fn kernel_eval(kind: KernelKind, points: &[(f64, f64)]) -> Result<f64> {
    let m = kind.order();
    if points.len() != m {
        return Err(Error::WrongArity {
            expected: m,
            got: points.len(),
        });
    }
    let mut perm: Vec<usize> = (0..m).collect();
    let mut xs = [0.0; 6];
    let mut ys = [0.0; 6];
    let mut total = 0i64;
    loop {
        for (slot, &i) in perm.iter().enumerate() {
            xs[slot] = points[i].0;
            ys[slot] = points[i].1;
        }
        total += match kind {
            KernelKind::HoeffdingD => le_diff_product(&xs, 4) * le_diff_product(&ys, 4),
            KernelKind::BkrR => le_diff_product(&xs, 4) * le_diff_product(&ys, 5),
            KernelKind::TauStar => tau_sign(&xs) * tau_sign(&ys),
        };
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let scale = match kind {
        KernelKind::BkrR => 32.0,
        _ => 16.0,
    };
    Ok(total as f64 / scale)
}

/// The U-statistic of order `m`: the kernel averaged over all `m`-subsets.
pub fn u_statistic_brute(kind: KernelKind, x: &[f64], y: &[f64]) -> Result<f64> {
    let m = kind.order();
    let n = x.len();
    if y.len() != n {
        return Err(Error::Shape(format!(
            "samples have lengths {n} and {}",
            y.len()
        )));
    }
    if n < m {
        return Err(Error::SampleTooSmall { n, min: m });
    }
    let mut idx: Vec<usize> = (0..m).collect();
    let mut points = vec![(0.0, 0.0); m];
    let mut sum = 0.0;
    let mut count = 0u64;
    loop {
        for (slot, &i) in idx.iter().enumerate() {
            points[slot] = (x[i], y[i]);
        }
        sum += kernel_eval(kind, &points)?;
        count += 1;
        // next combination
        let Some(pos) = (0..m).rposition(|k| idx[k] < n - m + k) else {
            break;
        };
        idx[pos] += 1;
        for k in pos + 1..m {
            idx[k] = idx[k - 1] + 1;
        }
    }
    Ok(sum / count as f64)
}
