//! One-dimensional minimization: inclusive grid scan plus golden-section
//! refinement around the best cell.
//!
//! The objectives in this crate are piecewise-smooth with isolated minima, so
//! a two-stage search is reliable: the grid locates the basin, golden section
//! polishes it. Scans run in parallel with an order-independent reduction so
//! results are identical for any worker count.

use rayon::prelude::*;
use std::cmp::Ordering;

/// Location and value of a one-dimensional minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Tie-break preferring the smaller parameter value.
pub fn cmp_by_value_then_x(a: &Minimum, b: &Minimum) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.x.total_cmp(&b.x))
}

/// Tie-break preferring the smaller parameter magnitude, then the smaller value.
pub fn cmp_by_value_then_abs_x(a: &Minimum, b: &Minimum) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.x.abs().total_cmp(&b.x.abs()))
        .then(a.x.total_cmp(&b.x))
}

/// Scan `n` points of `[lo, hi]` inclusive. Non-finite objective values are
/// skipped; returns `None` when every point is skipped. The comparator makes
/// the parallel reduction deterministic.
pub fn grid_min<F>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    cmp: fn(&Minimum, &Minimum) -> Ordering,
) -> Option<Minimum>
where
    F: Fn(f64) -> f64 + Sync,
{
    assert!(n >= 2, "grid needs at least two points");
    assert!(lo <= hi, "empty interval");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let x = if i + 1 == n { hi } else { lo + i as f64 * step };
            let value = f(x);
            value.is_finite().then_some(Minimum { x, value })
        })
        .reduce_with(|a, b| if cmp(&a, &b) == Ordering::Greater { b } else { a })
}

/// Golden-section search on `[lo, hi]`, run to width `rel_tol * (1 + |x|)`.
pub fn golden_section<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Minimum
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * (1.0 + mid.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    Minimum { x, value: f(x) }
}

/// Grid scan followed by golden-section refinement in the best grid cell.
/// The refined point is kept only if it actually improves on the grid value.
pub fn grid_then_golden<F>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    rel_tol: f64,
    cmp: fn(&Minimum, &Minimum) -> Ordering,
) -> Option<Minimum>
where
    F: Fn(f64) -> f64 + Sync,
{
    let coarse = grid_min(&f, lo, hi, n, cmp)?;
    let cell = (hi - lo) / (n - 1) as f64;
    let refined = golden_section(
        &f,
        (coarse.x - cell).max(lo),
        (coarse.x + cell).min(hi),
        rel_tol,
    );
    if refined.value.is_finite() && cmp(&refined, &coarse) == Ordering::Less {
        Some(refined)
    } else {
        Some(coarse)
    }
}
