//! Exhaustive reference transforms.
//!
//! Every rectangle is enumerated and its average is taken by direct summation
//! of its cells, without prefix sums. Cost grows like `∏ L_i³`, so these are
//! meant for small grids and cross-checks.

use crate::error::Result;
use crate::grid::{for_each_rect_bounds, Grid, Rect};

fn naive_average(f: &Grid, r: &Rect) -> f64 {
    let mut s = 0.0;
    r.for_each_cell(f.shape(), |i| s += f.values()[i]);
    s / r.cells() as f64
}

/// Strong maximal function by enumeration of all in-domain rectangles.
pub fn brute_strong_maximal(f: &Grid) -> Result<Grid> {
    let mut out = vec![0.0f64; f.len()];
    for_each_rect_bounds(f.shape(), |lo, hi| {
        let r = Rect::from_usize(lo, hi).expect("enumerated rects are nonempty");
        let avg = naive_average(f, &r);
        r.for_each_cell(f.shape(), |i| out[i] = out[i].max(avg));
    });
    f.with_values(out)
}

/// Cube maximal function by enumeration of all in-domain cubes.
pub fn brute_cube_maximal(f: &Grid) -> Result<Grid> {
    let mut out = vec![0.0f64; f.len()];
    for_each_rect_bounds(f.shape(), |lo, hi| {
        let side = hi[0] - lo[0];
        if lo.iter().zip(hi).all(|(l, h)| h - l == side) {
            let r = Rect::from_usize(lo, hi).expect("enumerated rects are nonempty");
            let avg = naive_average(f, &r);
            r.for_each_cell(f.shape(), |i| out[i] = out[i].max(avg));
        }
    });
    f.with_values(out)
}
