//! Exact maximal transforms over axis-parallel rectangles and cubes.
//!
//! The strong maximal function is computed by a dimension-lowering band sweep.
//! For every interval `[a, b)` of the last axis the grid is summed across the
//! band, the `(n−1)`-dimensional problem is solved on the band sums, and the
//! answer is pushed back to every height `t ∈ [a, b)`. The one-dimensional base
//! case enumerates all intervals through prefix sums. Every in-domain rectangle
//! is visited, so the result is the exact maximum.
//!
//! Weighted and unweighted transforms share one kernel: it maximizes
//! `num(R) / den(R)` with `num = f·w, den = w` (or `num = f, den = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cell_count, strides, Grid, Mask, PrefixSum, Rect};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Strong,
    Cube,
    Directional(usize),
    Composition(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct MaximalResult {
    pub grid: Grid,
    pub family: Family,
    /// Whether averages were taken against a weight.
    pub weighted: bool,
}

/// Per-cell maxima and, optionally, the first maximizing rectangle of each cell
/// stored as `[lo_1, hi_1, .., lo_k, hi_k]`.
struct Sweep {
    values: Vec<f64>,
    arg: Option<Vec<u32>>,
}

impl Sweep {
    fn blank(cells: usize, dims: usize, track: bool) -> Self {
        Self { values: vec![f64::NEG_INFINITY; cells], arg: track.then(|| vec![0; cells * 2 * dims]) }
    }

    /// Cellwise max; ties keep `self`.
    fn merge(mut self, other: Sweep, dims: usize) -> Sweep {
        for i in 0..self.values.len() {
            if other.values[i] > self.values[i] {
                self.values[i] = other.values[i];
                if let (Some(a), Some(b)) = (self.arg.as_mut(), other.arg.as_ref()) {
                    a[i * 2 * dims..(i + 1) * 2 * dims].copy_from_slice(&b[i * 2 * dims..(i + 1) * 2 * dims]);
                }
            }
        }
        self
    }
}

/// Exact 1-D ratio maximal. For each start `i`, sweeping ends downward keeps a
/// running max over all intervals `[i, j')` with `j' ≥ j`, which is exactly the
/// set of intervals from `i` covering cell `j − 1`.
fn line_sweep(num: &[f64], den: &[f64], track: bool) -> Sweep {
    let len = num.len();
    let mut pn = vec![0.0; len + 1];
    let mut pd = vec![0.0; len + 1];
    for k in 0..len {
        pn[k + 1] = pn[k] + num[k];
        pd[k + 1] = pd[k] + den[k];
    }
    let mut out = Sweep::blank(len, 1, track);
    for i in 0..len {
        let mut run = f64::NEG_INFINITY;
        let mut run_end = 0;
        for j in (i + 1..=len).rev() {
            let v = (pn[j] - pn[i]) / (pd[j] - pd[i]);
            if v > run {
                run = v;
                run_end = j;
            }
            let t = j - 1;
            if run > out.values[t] {
                out.values[t] = run;
                if let Some(a) = out.arg.as_mut() {
                    a[2 * t] = i as u32;
                    a[2 * t + 1] = run_end as u32;
                }
            }
        }
    }
    out
}

fn band_sweep(shape: &[usize], num: &[f64], den: &[f64], track: bool) -> Sweep {
    let n = shape.len();
    if n == 1 {
        return line_sweep(num, den, track);
    }
    let last = shape[n - 1];
    let inner = &shape[..n - 1];
    let m = cell_count(inner);
    let total = m * last;
    let (di, dn) = (2 * (n - 1), 2 * n);

    par::map_reduce(
        0..last,
        || Sweep::blank(total, n, track),
        |a| {
            let mut numb = vec![0.0; m];
            let mut denb = vec![0.0; m];
            let mut subs = Vec::with_capacity(last - a);
            for b in a + 1..=last {
                for x in 0..m {
                    numb[x] += num[x * last + b - 1];
                    denb[x] += den[x * last + b - 1];
                }
                subs.push(band_sweep(inner, &numb, &denb, track));
            }
            let mut out = Sweep::blank(total, n, track);
            let mut run = vec![f64::NEG_INFINITY; m];
            let mut run_arg = track.then(|| vec![0u32; m * dn]);
            for b in (a + 1..=last).rev() {
                let sub = &subs[b - a - 1];
                let t = b - 1;
                for x in 0..m {
                    if sub.values[x] > run[x] {
                        run[x] = sub.values[x];
                        if let (Some(ra), Some(sa)) = (run_arg.as_mut(), sub.arg.as_ref()) {
                            ra[x * dn..x * dn + di].copy_from_slice(&sa[x * di..(x + 1) * di]);
                            ra[x * dn + di] = a as u32;
                            ra[x * dn + di + 1] = b as u32;
                        }
                    }
                    let cell = x * last + t;
                    out.values[cell] = run[x];
                    if let (Some(oa), Some(ra)) = (out.arg.as_mut(), run_arg.as_ref()) {
                        oa[cell * dn..(cell + 1) * dn].copy_from_slice(&ra[x * dn..(x + 1) * dn]);
                    }
                }
            }
            out
        },
        |l, r| l.merge(r, n),
    )
}

fn kernel_inputs(f: &Grid, w: Option<&Grid>) -> Result<(Vec<f64>, Vec<f64>)> {
    match w {
        None => Ok((f.values().to_vec(), vec![1.0; f.len()])),
        Some(w) => {
            f.same_shape(w)?;
            w.require_positive("weight")?;
            let num = f.values().iter().zip(w.values()).map(|(a, b)| a * b).collect();
            Ok((num, w.values().to_vec()))
        }
    }
}

/// `M_n f(x) = max_{R ∋ x} |R|⁻¹ ∫_R f`, or with `w` the weighted variant
/// `max_{R ∋ x} w(R)⁻¹ ∫_R f w`. Rectangles range over the grid domain.
pub fn strong_maximal(f: &Grid, w: Option<&Grid>) -> Result<MaximalResult> {
    let (num, den) = kernel_inputs(f, w)?;
    let sweep = band_sweep(f.shape(), &num, &den, false);
    Ok(MaximalResult { grid: f.with_values(sweep.values)?, family: Family::Strong, weighted: w.is_some() })
}

/// The unweighted strong maximal function together with the first maximizing
/// rectangle found for each cell in band-sweep order.
pub fn strong_maximal_with_argmax(f: &Grid) -> Result<(Grid, Vec<Rect>)> {
    let (num, den) = kernel_inputs(f, None)?;
    let n = f.n();
    let sweep = band_sweep(f.shape(), &num, &den, true);
    let arg = sweep.arg.expect("tracking requested");
    let rects = arg
        .chunks_exact(2 * n)
        .map(|c| Rect::new(c.iter().step_by(2).map(|&v| v as i64).collect(), c.iter().skip(1).step_by(2).map(|&v| v as i64).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok((f.with_values(sweep.values)?, rects))
}

/// Uncentered Hardy–Littlewood maximal function of a one-dimensional grid.
pub fn hl_maximal_1d(f: &Grid) -> Result<Grid> {
    if f.n() != 1 {
        return Err(Error::Domain(format!("expected a 1-D grid, got n = {}", f.n())));
    }
    directional_maximal(f, 0)
}

/// Applies the 1-D maximal function along `axis` (0-based) to every line.
pub fn directional_maximal(f: &Grid, axis: usize) -> Result<Grid> {
    if axis >= f.n() {
        return Err(Error::Domain(format!("axis {axis} outside 0..{}", f.n())));
    }
    let shape = f.shape();
    let len = shape[axis];
    let stride = strides(shape)[axis];
    let bases: Vec<usize> = (0..f.len()).filter(|i| (i / stride).is_multiple_of(len)).collect();
    let ones = vec![1.0; len];
    let vals = f.values();
    let lines = par::map_collect(0..bases.len(), |k| {
        let line: Vec<f64> = (0..len).map(|t| vals[bases[k] + t * stride]).collect();
        line_sweep(&line, &ones, false).values
    });
    let mut out = vec![0.0; f.len()];
    for (base, line) in bases.iter().zip(lines) {
        for (t, v) in line.into_iter().enumerate() {
            out[base + t * stride] = v;
        }
    }
    f.with_values(out)
}

/// Successive directional maximal functions, first `order[0]`, then `order[1]`, …
pub fn composition_maximal(f: &Grid, order: &[usize]) -> Result<Grid> {
    let mut seen = vec![false; f.n()];
    for &a in order {
        if a >= f.n() || std::mem::replace(&mut seen[a], true) {
            return Err(Error::Domain(format!("{order:?} is not a permutation of the axes 0..{}", f.n())));
        }
    }
    if order.len() != f.n() {
        return Err(Error::Domain(format!("{order:?} is not a permutation of the axes 0..{}", f.n())));
    }
    order.iter().try_fold(f.clone(), |g, &a| directional_maximal(&g, a))
}

/// Sliding max along one axis: position `p` covers cells `p..p+side`.
/// `data` has `pos_shape`, the output has `pos_shape` with `axis` widened to `len`.
fn spread_axis(data: &[f64], pos_shape: &[usize], axis: usize, len: usize, side: usize) -> (Vec<f64>, Vec<usize>) {
    let mut out_shape = pos_shape.to_vec();
    out_shape[axis] = len;
    let outer: usize = pos_shape[..axis].iter().product();
    let inner: usize = pos_shape[axis + 1..].iter().product();
    let plen = pos_shape[axis];
    let mut out = vec![f64::NEG_INFINITY; outer * len * inner];
    for o in 0..outer {
        for x in 0..len {
            let p_lo = (x + 1).saturating_sub(side);
            let p_hi = x.min(plen - 1);
            for i in 0..inner {
                let mut best = f64::NEG_INFINITY;
                for p in p_lo..=p_hi {
                    best = best.max(data[(o * plen + p) * inner + i]);
                }
                out[(o * len + x) * inner + i] = best;
            }
        }
    }
    (out, out_shape)
}

/// `M_Q f(x)`: the maximum over in-domain cubes (equal sides in cells) containing `x`.
pub fn cube_maximal(f: &Grid) -> Result<MaximalResult> {
    let shape = f.shape().to_vec();
    let n = shape.len();
    let max_side = *shape.iter().min().expect("n >= 1");
    let prefix = PrefixSum::build(f);
    let total = f.len();
    let values = par::map_reduce(
        1..max_side + 1,
        || vec![f64::NEG_INFINITY; total],
        |side| {
            let pos_shape: Vec<usize> = shape.iter().map(|l| l - side + 1).collect();
            let vol = (side as f64).powi(n as i32);
            let mut averages = Vec::with_capacity(cell_count(&pos_shape));
            let mut hi = vec![0; n];
            for p in 0..cell_count(&pos_shape) {
                let lo = crate::grid::unravel(&pos_shape, p);
                for k in 0..n {
                    hi[k] = lo[k] + side;
                }
                averages.push(prefix.raw_sum(&lo, &hi) / vol);
            }
            let (mut data, mut cur) = (averages, pos_shape);
            for (k, &len) in shape.iter().enumerate() {
                (data, cur) = spread_axis(&data, &cur, k, len, side);
            }
            data
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x = x.max(y));
            a
        },
    );
    Ok(MaximalResult { grid: f.with_values(values)?, family: Family::Cube, weighted: false })
}

/// `w({g > λ})`, or `|{g > λ}|` when `w` is absent.
pub fn level_measure(g: &Grid, lambda: f64, w: Option<&Grid>) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("level {lambda} must be positive")));
    }
    let mask = Mask::superlevel(g, lambda);
    match w {
        Some(w) => {
            g.same_shape(w)?;
            Ok(crate::grid::mask_measure(&mask, Some(w)))
        }
        None => Ok(mask.count() as f64 * g.cell_volume()),
    }
}
