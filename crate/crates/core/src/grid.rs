//! Grids, rectangles, masks and summed-area tables on a uniform lattice.
//!
//! Cells are addressed by per-axis indices `(i_1, .., i_n)` stored row-major:
//! the last axis varies fastest. Integrals over a set of cells are cell sums
//! multiplied by the grid's `cell_volume`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn cell_count(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

pub fn unravel(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

pub fn ravel(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &l)| acc * l + i)
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::InvalidGrid("dimension must be at least 1".into()));
    }
    if let Some(k) = shape.iter().position(|&l| l == 0) {
        return Err(Error::InvalidGrid(format!("axis {k} has zero length")));
    }
    Ok(())
}

/// Nonnegative finite values on an n-dimensional lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    n: usize,
    shape: Vec<usize>,
    cell_volume: f64,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, values: Vec<f64>, cell_volume: f64) -> Result<Self> {
        check_shape(&shape)?;
        if values.len() != cell_count(&shape) {
            return Err(Error::InvalidGrid(format!(
                "{} values for shape {:?} ({} cells)",
                values.len(),
                shape,
                cell_count(&shape)
            )));
        }
        if !(cell_volume.is_finite() && cell_volume > 0.0) {
            return Err(Error::InvalidGrid(format!("cell_volume {cell_volume} must be positive")));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "value {} at cell {:?} is not a nonnegative finite real",
                values[i],
                unravel(&shape, i)
            )));
        }
        Ok(Self { n: shape.len(), shape, cell_volume, values })
    }

    /// Like [`Grid::new`] but replaces every value by its absolute value first.
    pub fn from_signed(shape: Vec<usize>, mut values: Vec<f64>, cell_volume: f64) -> Result<Self> {
        values.iter_mut().for_each(|v| *v = v.abs());
        Self::new(shape, values, cell_volume)
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        check_shape(&shape)?;
        let len = cell_count(&shape);
        Self::new(shape, vec![value; len], 1.0)
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_shape(&shape)?;
        let values = (0..cell_count(&shape)).map(|i| f(&unravel(&shape, i))).collect();
        Self::new(shape, values, 1.0)
    }

    pub fn with_cell_volume(mut self, cell_volume: f64) -> Result<Self> {
        if !(cell_volume.is_finite() && cell_volume > 0.0) {
            return Err(Error::InvalidGrid(format!("cell_volume {cell_volume} must be positive")));
        }
        self.cell_volume = cell_volume;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[ravel(&self.shape, idx)]
    }

    /// Builds a grid with the same geometry and new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.shape.clone(), values, self.cell_volume)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Σ values · cell_volume.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_shape(&self, other: &Grid) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { left: self.shape.clone(), right: other.shape.clone() });
        }
        Ok(())
    }

    /// Fails unless every value is strictly positive.
    pub fn require_positive(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|&v| v <= 0.0) {
            Some(i) => Err(Error::DegenerateWeight(format!(
                "{what} vanishes at cell {:?}",
                unravel(&self.shape, i)
            ))),
            None => Ok(()),
        }
    }

    /// The (n−1)-dimensional grid `x' ↦ g(x', t)`.
    pub fn slice_last(&self, t: usize) -> Result<Grid> {
        if self.n < 2 {
            return Err(Error::UnsupportedDimension { required: 2, got: self.n });
        }
        let last = self.shape[self.n - 1];
        if t >= last {
            return Err(Error::Domain(format!("slice index {t} outside [0, {last})")));
        }
        let values = self.values.iter().skip(t).step_by(last).copied().collect();
        Grid::new(self.shape[..self.n - 1].to_vec(), values, self.cell_volume)
    }
}

/// Axis-parallel rectangle of whole cells: `[lo_i, hi_i)` on every axis.
///
/// Coordinates are signed because dilations may leave the grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RectRepr")]
pub struct Rect {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

#[derive(Deserialize)]
struct RectRepr {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl TryFrom<RectRepr> for Rect {
    type Error = Error;

    fn try_from(r: RectRepr) -> Result<Self> {
        Rect::new(r.lo, r.hi)
    }
}

impl Rect {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Domain(format!("rect bounds of lengths {} and {}", lo.len(), hi.len())));
        }
        if let Some(k) = (0..lo.len()).find(|&k| lo[k] >= hi[k]) {
            return Err(Error::Domain(format!("empty rect: axis {k} has [{}, {})", lo[k], hi[k])));
        }
        Ok(Self { lo, hi })
    }

    /// Builds from `(lo, hi)` pairs, one per axis.
    pub fn from_bounds(bounds: &[(i64, i64)]) -> Result<Self> {
        Self::new(bounds.iter().map(|b| b.0).collect(), bounds.iter().map(|b| b.1).collect())
    }

    pub fn from_usize(lo: &[usize], hi: &[usize]) -> Result<Self> {
        Self::new(lo.iter().map(|&v| v as i64).collect(), hi.iter().map(|&v| v as i64).collect())
    }

    /// The whole domain of `shape`.
    pub fn domain(shape: &[usize]) -> Self {
        Self { lo: vec![0; shape.len()], hi: shape.iter().map(|&l| l as i64).collect() }
    }

    /// The single cell at `idx`.
    pub fn cell(idx: &[usize]) -> Self {
        Self { lo: idx.iter().map(|&i| i as i64).collect(), hi: idx.iter().map(|&i| i as i64 + 1).collect() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> u64 {
        (self.hi[axis] - self.lo[axis]) as u64
    }

    /// Number of cells.
    pub fn cells(&self) -> u64 {
        (0..self.dim()).map(|k| self.side(k)).product()
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.len() == self.dim() && idx.iter().enumerate().all(|(k, &i)| self.lo[k] <= i as i64 && (i as i64) < self.hi[k])
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.dim() == self.dim() && (0..self.dim()).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    pub fn within(&self, shape: &[usize]) -> bool {
        shape.len() == self.dim() && (0..self.dim()).all(|k| self.lo[k] >= 0 && self.hi[k] <= shape[k] as i64)
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        if other.dim() != self.dim() {
            return None;
        }
        let lo: Vec<i64> = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect();
        let hi: Vec<i64> = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect();
        lo.iter().zip(&hi).all(|(l, h)| l < h).then_some(Rect { lo, hi })
    }

    pub fn clip(&self, shape: &[usize]) -> Option<Rect> {
        self.intersect(&Rect::domain(shape))
    }

    /// The `(n−1)`-dimensional slice at height `t` of the last axis, `None`
    /// when `t` falls outside the last side.
    pub fn slice(&self, t: i64) -> Result<Option<Rect>> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::UnsupportedDimension { required: 2, got: n });
        }
        if t < self.lo[n - 1] || t >= self.hi[n - 1] {
            return Ok(None);
        }
        Ok(Some(Rect { lo: self.lo[..n - 1].to_vec(), hi: self.hi[..n - 1].to_vec() }))
    }

    /// Projection onto the first `n−1` axes.
    pub fn project_parallel(&self) -> Result<Rect> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::UnsupportedDimension { required: 2, got: n });
        }
        Ok(Rect { lo: self.lo[..n - 1].to_vec(), hi: self.hi[..n - 1].to_vec() })
    }

    /// Projection onto the last axis, as a 1-D rectangle.
    pub fn project_perp(&self) -> Rect {
        let n = self.dim();
        Rect { lo: vec![self.lo[n - 1]], hi: vec![self.hi[n - 1]] }
    }

    /// Length of the last side, `|P^⊥(R)|`.
    pub fn perp_len(&self) -> u64 {
        self.side(self.dim() - 1)
    }

    /// `parallel × perp`.
    pub fn product(parallel: &Rect, perp: &Rect) -> Result<Rect> {
        if perp.dim() != 1 {
            return Err(Error::Domain("perpendicular factor must be one-dimensional".into()));
        }
        let mut lo = parallel.lo.clone();
        let mut hi = parallel.hi.clone();
        lo.push(perp.lo[0]);
        hi.push(perp.hi[0]);
        Rect::new(lo, hi)
    }

    /// Triples the last side about its center; the other sides are kept.
    /// The result lives on the unbounded lattice.
    pub fn dilate_perp(&self) -> Rect {
        let n = self.dim();
        let len = self.hi[n - 1] - self.lo[n - 1];
        let mut out = self.clone();
        out.lo[n - 1] -= len;
        out.hi[n - 1] += len;
        out
    }

    /// Calls `f` with the flat index of every in-domain cell of `self`.
    pub fn for_each_cell(&self, shape: &[usize], mut f: impl FnMut(usize)) {
        let Some(r) = self.clip(shape) else { return };
        let n = r.dim();
        let st = strides(shape);
        let mut idx: Vec<i64> = r.lo.clone();
        let last = n - 1;
        loop {
            let base: usize = (0..last).map(|k| idx[k] as usize * st[k]).sum();
            for t in r.lo[last]..r.hi[last] {
                f(base + t as usize);
            }
            // odometer over the first n−1 axes
            let mut k = last;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < r.hi[k] {
                    break;
                }
                idx[k] = r.lo[k];
            }
        }
    }
}

/// One boolean per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    shape: Vec<usize>,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(shape: &[usize]) -> Self {
        Self { shape: shape.to_vec(), bits: vec![false; cell_count(shape)] }
    }

    pub fn from_bits(shape: &[usize], bits: Vec<bool>) -> Result<Self> {
        check_shape(shape)?;
        if bits.len() != cell_count(shape) {
            return Err(Error::InvalidGrid(format!("{} bits for shape {shape:?}", bits.len())));
        }
        Ok(Self { shape: shape.to_vec(), bits })
    }

    /// Cells where `g > level`.
    pub fn superlevel(g: &Grid, level: f64) -> Self {
        Self { shape: g.shape().to_vec(), bits: g.values().iter().map(|&v| v > level).collect() }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, flat: usize) -> bool {
        self.bits[flat]
    }

    pub fn set(&mut self, flat: usize, on: bool) {
        self.bits[flat] = on;
    }

    /// Marks the in-domain part of `r`.
    pub fn fill_rect(&mut self, r: &Rect) {
        let shape = self.shape.clone();
        r.for_each_cell(&shape, |i| self.bits[i] = true);
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of marked cells inside `r`.
    pub fn count_in(&self, r: &Rect) -> usize {
        let mut c = 0;
        r.for_each_cell(&self.shape, |i| c += self.bits[i] as usize);
        c
    }

    pub fn union_with(&mut self, other: &Mask) {
        self.bits.iter_mut().zip(&other.bits).for_each(|(a, b)| *a |= *b);
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

/// Cell count of the union of `rects` after clipping to `shape`.
pub fn union_measure(rects: &[Rect], shape: &[usize]) -> usize {
    let mut m = Mask::empty(shape);
    rects.iter().for_each(|r| m.fill_rect(r));
    m.count()
}

/// `w(m) = Σ_{cells in m} w · cell_volume`; the plain cell count when `w` is absent.
pub fn mask_measure(m: &Mask, w: Option<&Grid>) -> f64 {
    match w {
        None => m.count() as f64,
        Some(w) => {
            let s: f64 = m.bits.iter().zip(w.values()).filter(|(b, _)| **b).map(|(_, v)| *v).sum();
            s * w.cell_volume()
        }
    }
}

/// Summed-area table with a zero halo along every axis.
#[derive(Debug, Clone)]
pub struct PrefixSum {
    shape: Vec<usize>,
    strides: Vec<usize>,
    cell_volume: f64,
    sums: Vec<f64>,
}

impl PrefixSum {
    pub fn build(g: &Grid) -> Self {
        let shape: Vec<usize> = g.shape().iter().map(|l| l + 1).collect();
        let st = strides(&shape);
        let mut sums = vec![0.0; cell_count(&shape)];
        for (i, &v) in g.values().iter().enumerate() {
            let idx = unravel(g.shape(), i);
            let j: usize = idx.iter().zip(&st).map(|(a, s)| (a + 1) * s).sum();
            sums[j] = v;
        }
        // cumulative sums axis by axis
        for (k, &s) in st.iter().enumerate() {
            for j in 0..sums.len() {
                if (j / s) % shape[k] != 0 {
                    sums[j] += sums[j - s];
                }
            }
        }
        Self { shape, strides: st, cell_volume: g.cell_volume(), sums }
    }

    /// Per-axis counts plus one.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Σ of the raw cell values over `[lo, hi)` via 2ⁿ-corner inclusion–exclusion.
    /// Bounds are not checked.
    pub fn raw_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let n = lo.len();
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut j = 0;
            let mut lows = 0;
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    j += hi[k] * self.strides[k];
                } else {
                    j += lo[k] * self.strides[k];
                    lows += 1;
                }
            }
            if lows % 2 == 0 {
                acc += self.sums[j];
            } else {
                acc -= self.sums[j];
            }
        }
        acc
    }

    fn bounds(&self, r: &Rect) -> Result<(Vec<usize>, Vec<usize>)> {
        let grid_shape: Vec<usize> = self.shape.iter().map(|l| l - 1).collect();
        if !r.within(&grid_shape) {
            return Err(Error::Domain(format!("rect {r:?} outside grid of shape {grid_shape:?}")));
        }
        Ok((r.lo().iter().map(|&v| v as usize).collect(), r.hi().iter().map(|&v| v as usize).collect()))
    }

    /// `∫_R g = Σ_{cells in R} g · cell_volume`.
    pub fn rect_sum(&self, r: &Rect) -> Result<f64> {
        let (lo, hi) = self.bounds(r)?;
        Ok(self.raw_sum(&lo, &hi) * self.cell_volume)
    }

    /// `|R|⁻¹ ∫_R g`.
    pub fn rect_average(&self, r: &Rect) -> Result<f64> {
        let (lo, hi) = self.bounds(r)?;
        Ok(self.raw_sum(&lo, &hi) / r.cells() as f64)
    }
}

/// Every half-open interval `[a, b)` with `0 ≤ a < b ≤ len`.
pub fn intervals(len: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..len).flat_map(move |a| (a + 1..=len).map(move |b| (a, b)))
}

/// Calls `f(lo, hi)` for every in-domain rectangle whose first `shape.len()`
/// axes range over all intervals. Order: odometer with the first axis slowest.
pub fn for_each_rect_bounds(shape: &[usize], mut f: impl FnMut(&[usize], &[usize])) {
    let n = shape.len();
    if n == 0 {
        f(&[], &[]);
        return;
    }
    let mut lo = vec![0usize; n];
    let mut hi = vec![1usize; n];
    loop {
        f(&lo, &hi);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            hi[k] += 1;
            if hi[k] <= shape[k] {
                break;
            }
            lo[k] += 1;
            if lo[k] < shape[k] {
                hi[k] = lo[k] + 1;
                break;
            }
            lo[k] = 0;
            hi[k] = 1;
        }
    }
}

/// Maximum of `f(lo, hi)` over every in-domain rectangle of `shape`, with the
/// last-axis intervals spread over the worker pool.
pub fn max_over_rects<F>(shape: &[usize], f: F) -> f64
where
    F: Fn(&[usize], &[usize]) -> f64 + Sync + Send,
{
    let n = shape.len();
    let last: Vec<(usize, usize)> = intervals(shape[n - 1]).collect();
    crate::par::map_reduce(
        0..last.len(),
        || f64::NEG_INFINITY,
        |k| {
            let (a, b) = last[k];
            let mut lo = vec![0; n];
            let mut hi = vec![0; n];
            lo[n - 1] = a;
            hi[n - 1] = b;
            let mut best = f64::NEG_INFINITY;
            for_each_rect_bounds(&shape[..n - 1], |l, h| {
                lo[..n - 1].copy_from_slice(l);
                hi[..n - 1].copy_from_slice(h);
                best = best.max(f(&lo, &hi));
            });
            best
        },
        f64::max,
    )
}
