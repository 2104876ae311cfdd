//! Strong Muckenhoupt diagnostics for positive weights on a grid.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{rng, SeededRng};
use crate::grid::{max_over_rects, Grid, PrefixSum};
use crate::operators::strong_maximal;

pub use crate::generators::{generate_weight, Generator};

/// Ceiling above which [`p0_search`] treats an `A_p*` constant as infinite.
pub const DEFAULT_AP_CEILING: f64 = 1e6;

/// Default safety factor applied in [`epsilon_for_weight`].
pub const DEFAULT_SAFETY: f64 = 0.5;

fn check_weight(w: &Grid) -> Result<()> {
    w.require_positive("weight")
}

/// `[w]_{A_p*} = max_R (avg_R w) · (avg_R w^{1−p'})^{p−1}` over all in-domain rectangles.
pub fn ap_star_constant(w: &Grid, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("A_p* needs 1 < p < ∞, got {p}")));
    }
    check_weight(w)?;
    let dual = w.map(|v| v.powf(-1.0 / (p - 1.0)))?;
    let pw = PrefixSum::build(w);
    let pd = PrefixSum::build(&dual);
    Ok(max_over_rects(w.shape(), |lo, hi| {
        let cells: f64 = lo.iter().zip(hi).map(|(l, h)| (h - l) as f64).product();
        let a = pw.raw_sum(lo, hi) / cells;
        let b = pd.raw_sum(lo, hi) / cells;
        a * b.powf(p - 1.0)
    }))
}

/// `[w]_{A_1*} = max_x M_n w(x) / w(x)`.
pub fn a1_star_constant(w: &Grid) -> Result<f64> {
    check_weight(w)?;
    let m = strong_maximal(w, None)?.grid;
    Ok(m.values().iter().zip(w.values()).map(|(a, b)| a / b).fold(f64::NEG_INFINITY, f64::max))
}

/// One sampled pair `S ⊂ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingSample {
    /// `|S| / |R|`
    pub size_ratio: f64,
    /// `w(S) / w(R)`
    pub weight_ratio: f64,
}

/// Empirical upper envelope `w(S)/w(R) ≤ c (|S|/|R|)^δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingFit {
    pub c: f64,
    pub delta: f64,
    #[serde(skip)]
    pub samples: Vec<DoublingSample>,
}

impl DoublingFit {
    pub fn bound(&self, size_ratio: f64) -> f64 {
        self.c * size_ratio.powf(self.delta)
    }

    pub fn covers(&self, s: &DoublingSample) -> bool {
        s.weight_ratio <= self.bound(s.size_ratio)
    }
}

const MIN_DELTA: f64 = 1e-3;

fn random_interval(r: &mut SeededRng, lo: usize, hi: usize) -> (usize, usize) {
    let a = r.random_range(lo..hi);
    let b = r.random_range(a + 1..=hi);
    (a, b)
}

fn sample_pair(w: &Grid, r: &mut SeededRng) -> DoublingSample {
    let shape = w.shape();
    let bounds: Vec<(usize, usize)> = shape.iter().map(|&l| random_interval(r, 0, l)).collect();
    let rect_cells: Vec<usize> = {
        let mut cells = Vec::new();
        let rect = crate::grid::Rect::from_usize(
            &bounds.iter().map(|b| b.0).collect::<Vec<_>>(),
            &bounds.iter().map(|b| b.1).collect::<Vec<_>>(),
        )
        .expect("nonempty");
        rect.for_each_cell(shape, |i| cells.push(i));
        cells
    };
    let vals = w.values();
    let w_r: f64 = rect_cells.iter().map(|&i| vals[i]).sum();
    let (count, w_s) = if r.random_bool(0.5) {
        let sub: Vec<(usize, usize)> = bounds.iter().map(|&(a, b)| random_interval(r, a, b)).collect();
        let lo: Vec<usize> = sub.iter().map(|s| s.0).collect();
        let hi: Vec<usize> = sub.iter().map(|s| s.1).collect();
        let s = crate::grid::Rect::from_usize(&lo, &hi).expect("nonempty");
        let mut ws = 0.0;
        s.for_each_cell(shape, |i| ws += vals[i]);
        (s.cells() as usize, ws)
    } else {
        let q: f64 = r.random_range(0.0..1.0);
        let mut picked: Vec<usize> = rect_cells.iter().copied().filter(|_| r.random_bool(q)).collect();
        if picked.is_empty() {
            picked.push(rect_cells[r.random_range(0..rect_cells.len())]);
        }
        (picked.len(), picked.iter().map(|&i| vals[i]).sum())
    };
    DoublingSample { size_ratio: count as f64 / rect_cells.len() as f64, weight_ratio: w_s / w_r }
}

/// Fits `(c, δ)` from `samples` random pairs `S ⊂ R`.
///
/// `δ` is the least-squares slope of `log(w(S)/w(R))` against `log(|S|/|R|)`,
/// clamped to `[10⁻³, 1]`; `c` is then raised until no sample lies above the
/// envelope, and is at least 1 so the trivial pair `S = R` is also covered.
pub fn doubling_fit(w: &Grid, samples: usize, seed: u64) -> Result<DoublingFit> {
    if samples < 100 {
        return Err(Error::Domain(format!("doubling fit needs at least 100 samples, got {samples}")));
    }
    check_weight(w)?;
    let mut r = rng(seed);
    for _attempt in 0..4 {
        let pts: Vec<DoublingSample> = (0..samples).map(|_| sample_pair(w, &mut r)).collect();
        let xs: Vec<f64> = pts.iter().map(|s| s.size_ratio.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|s| s.weight_ratio.ln()).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx <= 0.0 {
            continue;
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let delta = (sxy / sxx).clamp(MIN_DELTA, 1.0);
        let mut c = xs.iter().zip(&ys).map(|(x, y)| y - delta * x).fold(0.0f64, f64::max).exp();
        let mut fit = DoublingFit { c, delta, samples: pts };
        // absorb rounding between log space and ratio space
        while !fit.samples.iter().all(|s| fit.covers(s)) {
            c *= 1.0 + 1e-12;
            fit.c = c;
        }
        return Ok(fit);
    }
    Err(Error::Sampling(format!("every sampled pair had |S| = |R| after 3 retries ({samples} samples each)")))
}

/// `safety · (1/(2c))^{1/δ}`, clamped to `(0, 1/2]`, so that `c ε^δ ≤ 1/2`.
///
/// Fails when the budget needs an ε below the smallest positive `f64`;
/// clamping up would silently break `c ε^δ ≤ 1/2`.
pub fn epsilon_for_weight(c: f64, delta: f64, safety: f64) -> Result<f64> {
    if !(c > 0.0 && delta > 0.0 && safety > 0.0 && safety <= 1.0) {
        return Err(Error::Domain(format!("need c > 0, δ > 0, 0 < safety ≤ 1; got ({c}, {delta}, {safety})")));
    }
    let eps = (safety * (0.5 / c).powf(1.0 / delta)).min(0.5);
    // with safety = 1 the budget is met with equality, up to rounding
    if !(eps > 0.0 && c * eps.powf(delta) <= 0.5 * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "no positive f64 ε satisfies c ε^δ ≤ 1/2 for c = {c}, δ = {delta}, safety = {safety}"
        )));
    }
    Ok(eps)
}

/// Largest `A_p*` constant among the slices `w(·, t)`.
pub fn slice_uniformity(w: &Grid, p: f64) -> Result<f64> {
    if w.n() < 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: w.n() });
    }
    let last = w.shape()[w.n() - 1];
    (0..last).try_fold(f64::NEG_INFINITY, |acc, t| Ok(acc.max(ap_star_constant(&w.slice_last(t)?, p)?)))
}

/// Smallest `p` in `budget` whose `A_p*` constant is below `ceiling`;
/// `+∞` when none is.
pub fn p0_search(w: &Grid, budget: &[f64], ceiling: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for &p in budget {
        if ap_star_constant(w, p)? < ceiling {
            best = best.min(p);
        }
    }
    Ok(best)
}

/// A full diagnostic record for one weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightProfile {
    pub shape: Vec<usize>,
    /// `p` (formatted) → `[w]_{A_p*}`.
    pub ap_constants: BTreeMap<String, f64>,
    /// `None` stands for an infinite constant.
    pub a1_constant: Option<f64>,
    pub doubling_fit: DoublingFit,
    pub epsilon: f64,
    pub p0: Option<f64>,
    pub slice_uniformity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ProfileOptions {
    pub ps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub safety: f64,
    pub ceiling: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { ps: vec![4.0, 2.0, 1.5, 1.25, 1.1], samples: 2000, seed: 0, safety: DEFAULT_SAFETY, ceiling: DEFAULT_AP_CEILING }
    }
}

impl WeightProfile {
    pub fn compute(w: &Grid, opts: &ProfileOptions) -> Result<Self> {
        let mut ap_constants = BTreeMap::new();
        for &p in &opts.ps {
            ap_constants.insert(format!("{p}"), ap_star_constant(w, p)?);
        }
        let a1 = a1_star_constant(w)?;
        let fit = doubling_fit(w, opts.samples, opts.seed)?;
        let epsilon = epsilon_for_weight(fit.c, fit.delta, opts.safety)?;
        let mut budget = opts.ps.clone();
        budget.sort_by(|a, b| b.total_cmp(a));
        let p0 = p0_search(w, &budget, opts.ceiling)?;
        let su = if w.n() >= 2 { Some(slice_uniformity(w, 2.0)?) } else { None };
        Ok(Self {
            shape: w.shape().to_vec(),
            ap_constants,
            a1_constant: a1.is_finite().then_some(a1),
            doubling_fit: fit,
            epsilon,
            p0: p0.is_finite().then_some(p0),
            slice_uniformity: su,
        })
    }
}
