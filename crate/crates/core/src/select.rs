//! Worst-case linear-time order statistics (median of medians, groups of 5).
//!
//! The internal entry points thread a comparison counter through so the
//! projection's linear-time behaviour can be measured rather than assumed.

use crate::error::{Error, Result};

/// Returns the `k`-th smallest element of `values` (1-based).
///
/// Works on a private copy; `values` is never reordered.
pub fn select_kth(values: &[f64], k: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::OutOfRange { k, len: 0 });
    }
    if k == 0 || k > values.len() {
        return Err(Error::OutOfRange {
            k,
            len: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|x| x.is_nan()) {
        return Err(Error::NonFinite { index });
    }
    let mut scratch = values.to_vec();
    let mut comparisons = 0;
    Ok(select_in_place(&mut scratch, k - 1, &mut comparisons))
}

/// Lower median: the `ceil(len / 2)`-th smallest element.
pub(crate) fn lower_median(scratch: &mut [f64], comparisons: &mut u64) -> f64 {
    debug_assert!(!scratch.is_empty());
    let k = (scratch.len() - 1) / 2;
    select_in_place(scratch, k, comparisons)
}

/// Median-of-medians selection of the 0-based rank `k`. Permutes `v`.
pub(crate) fn select_in_place(v: &mut [f64], k: usize, comparisons: &mut u64) -> f64 {
    let mut v = v;
    let mut k = k;
    loop {
        let n = v.len();
        debug_assert!(k < n);
        if n <= 5 {
            insertion_sort(v, comparisons);
            return v[k];
        }

        // Sort each group of five and gather the group medians at the front.
        let groups = n.div_ceil(5);
        for g in 0..groups {
            let lo = 5 * g;
            let hi = (lo + 5).min(n);
            insertion_sort(&mut v[lo..hi], comparisons);
            v.swap(g, lo + (hi - lo - 1) / 2);
        }
        let pivot = select_in_place(&mut v[..groups], (groups - 1) / 2, comparisons);

        let (lt, gt) = partition3(v, pivot, comparisons);
        let rest = v;
        if k < lt {
            v = &mut rest[..lt];
        } else if k < gt {
            return pivot;
        } else {
            k -= gt;
            v = &mut rest[gt..];
        }
    }
}

/// Three-way partition: `v[..lt] < pivot`, `v[lt..gt] == pivot`, `v[gt..] > pivot`.
fn partition3(v: &mut [f64], pivot: f64, comparisons: &mut u64) -> (usize, usize) {
    let mut lt = 0;
    let mut i = 0;
    let mut gt = v.len();
    while i < gt {
        *comparisons += 1;
        if v[i] < pivot {
            v.swap(lt, i);
            lt += 1;
            i += 1;
            continue;
        }
        *comparisons += 1;
        if v[i] > pivot {
            gt -= 1;
            v.swap(i, gt);
        } else {
            i += 1;
        }
    }
    (lt, gt)
}

fn insertion_sort(v: &mut [f64], comparisons: &mut u64) {
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 {
            *comparisons += 1;
            if v[j - 1] > v[j] {
                v.swap(j - 1, j);
                j -= 1;
            } else {
                break;
            }
        }
    }
}
