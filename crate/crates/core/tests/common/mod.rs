//! Reference computations shared by the integration tests. Nothing here goes
//! through prefix sums or the band sweep.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strongmax::{Grid, Rect};

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7e57)
}

pub fn random_grid(shape: &[usize], seed: u64, max: f64) -> Grid {
    let mut r = test_rng(seed);
    let len: usize = shape.iter().product();
    Grid::new(shape.to_vec(), (0..len).map(|_| r.random_range(0.0..max)).collect(), 1.0).unwrap()
}

pub fn random_positive_grid(shape: &[usize], seed: u64) -> Grid {
    let mut r = test_rng(seed);
    let len: usize = shape.iter().product();
    Grid::new(shape.to_vec(), (0..len).map(|_| r.random_range(0.1..10.0)).collect(), 1.0).unwrap()
}

pub fn random_rect(r: &mut impl Rng, shape: &[usize]) -> Rect {
    let (mut lo, mut hi) = (vec![], vec![]);
    for &l in shape {
        let a = r.random_range(0..l as i64);
        let b = r.random_range(a + 1..=l as i64);
        lo.push(a);
        hi.push(b);
    }
    Rect::new(lo, hi).unwrap()
}

/// Multi-index of every cell in row-major order.
pub fn cells(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &l in shape {
        out = out.into_iter().flat_map(|p| (0..l).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

pub fn flat(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |a, (&i, &l)| a * l + i)
}

/// Every in-domain rectangle, as explicit `[lo, hi)` bounds.
pub fn all_rects(shape: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = vec![(vec![], vec![])];
    for &l in shape {
        let mut next = vec![];
        for (lo, hi) in &out {
            for a in 0..l {
                for b in a + 1..=l {
                    next.push(([lo.clone(), vec![a]].concat(), [hi.clone(), vec![b]].concat()));
                }
            }
        }
        out = next;
    }
    out
}

pub fn in_rect(idx: &[usize], lo: &[usize], hi: &[usize]) -> bool {
    idx.iter().zip(lo.iter().zip(hi)).all(|(i, (l, h))| l <= i && i < h)
}

/// Direct `Σ_{cells in R} g` (raw, without the cell volume).
pub fn naive_sum(g: &Grid, lo: &[usize], hi: &[usize]) -> f64 {
    cells(g.shape()).iter().filter(|c| in_rect(c, lo, hi)).map(|c| g.get(c)).sum()
}

/// Weighted averages `Σ f w / Σ w` over every rectangle, maximized per cell.
pub fn brute_maximal(f: &Grid, w: Option<&Grid>, cubes_only: bool) -> Vec<f64> {
    let shape = f.shape();
    let cs = cells(shape);
    let mut out = vec![0.0f64; f.len()];
    for (lo, hi) in all_rects(shape) {
        if cubes_only && !lo.iter().zip(&hi).all(|(l, h)| h - l == hi[0] - lo[0]) {
            continue;
        }
        let inside: Vec<&Vec<usize>> = cs.iter().filter(|c| in_rect(c, &lo, &hi)).collect();
        let (num, den) = inside.iter().fold((0.0, 0.0), |(a, b), c| {
            let wv = w.map_or(1.0, |w| w.get(c));
            (a + f.get(c) * wv, b + wv)
        });
        let avg = num / den;
        for c in inside {
            let i = flat(shape, c);
            out[i] = out[i].max(avg);
        }
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}
