//! Sparse rectangle selection and the quantities built on it.
//!
//! A family `R_1, …, R_N` is *sparse* with parameter `ε` when it is ordered by
//! decreasing last side and every member meets the union of the last-axis
//! dilations of its predecessors in at most an `ε` fraction of its cells.
//! [`greedy_select`] extracts such a family from an arbitrary input list.
//! Slicing a sparse family at any height `t` of the last axis gives an
//! `(n−1)`-dimensional family in which every member meets the union of its
//! predecessors in at most an `ε` fraction; [`check_p1_slices`] verifies that
//! exhaustively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{mask_measure, Grid, Mask, Rect};
use crate::operators::strong_maximal;
use crate::par;

const OUTSIDE: u32 = u32::MAX;

/// `count ≤ ε · cells`, evaluated the same way everywhere.
fn within_fraction(count: u64, cells: u64, eps: f64) -> bool {
    count as f64 <= eps * cells as f64
}

/// Ordered selection `R_1^s, …, R_N^s` with its disjointified pieces
/// `E_k = R_k^s \ ∪_{j<k} R_j^s` and the unions `Ω` and `Ω_input`.
#[derive(Debug, Clone)]
pub struct Selection {
    shape: Vec<usize>,
    epsilon: f64,
    input: Vec<Rect>,
    chosen: Vec<Rect>,
    /// `k` for cells of `E_k`, `OUTSIDE` off `Ω`.
    owner: Vec<u32>,
    omega_input: Mask,
}

#[derive(Serialize, Deserialize)]
struct SelectionJson {
    shape: Vec<usize>,
    epsilon: f64,
    chosen: Vec<Rect>,
    input: Vec<Rect>,
}

fn check_family(rects: &[Rect], shape: &[usize]) -> Result<()> {
    match rects.iter().find(|r| !r.within(shape)) {
        Some(r) => Err(Error::Domain(format!("rect {r:?} leaves the domain {shape:?}"))),
        None => Ok(()),
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, 1)")));
    }
    Ok(())
}

impl Selection {
    /// Assembles a selection from an explicit `chosen` list, in the given order.
    /// No sparseness is enforced here; see [`check_p2`].
    pub fn from_parts(shape: &[usize], input: Vec<Rect>, chosen: Vec<Rect>, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_family(&input, shape)?;
        check_family(&chosen, shape)?;
        let mut owner = vec![OUTSIDE; crate::grid::cell_count(shape)];
        for (k, r) in chosen.iter().enumerate() {
            r.for_each_cell(shape, |i| {
                if owner[i] == OUTSIDE {
                    owner[i] = k as u32;
                }
            });
        }
        let mut omega_input = Mask::empty(shape);
        input.iter().for_each(|r| omega_input.fill_rect(r));
        Ok(Self { shape: shape.to_vec(), epsilon, input, chosen, owner, omega_input })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn input(&self) -> &[Rect] {
        &self.input
    }

    pub fn chosen(&self) -> &[Rect] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    /// `E_k` as a mask.
    pub fn piece(&self, k: usize) -> Mask {
        let bits = self.owner.iter().map(|&o| o == k as u32).collect();
        Mask::from_bits(&self.shape, bits).expect("shape checked at construction")
    }

    /// Index of the piece `E_k` holding the cell, if it lies in `Ω`.
    pub fn owner_of(&self, flat: usize) -> Option<usize> {
        (self.owner[flat] != OUTSIDE).then_some(self.owner[flat] as usize)
    }

    pub fn omega(&self) -> Mask {
        let bits = self.owner.iter().map(|&o| o != OUTSIDE).collect();
        Mask::from_bits(&self.shape, bits).expect("shape checked at construction")
    }

    pub fn omega_input(&self) -> &Mask {
        &self.omega_input
    }

    /// `Σ_k 1_{R_k^s}` per cell.
    pub fn multiplicity(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.owner.len()];
        for r in &self.chosen {
            r.for_each_cell(&self.shape, |i| m[i] += 1);
        }
        m
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SelectionJson {
            shape: self.shape.clone(),
            epsilon: self.epsilon,
            chosen: self.chosen.clone(),
            input: self.input.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SelectionJson = serde_json::from_str(s)?;
        Self::from_parts(&j.shape, j.input, j.chosen, j.epsilon)
    }
}

/// Greedy sparse selection.
///
/// The input is stably sorted by decreasing last side; a candidate `S` is kept
/// iff `|S ∩ ∪_{selected} R*| ≤ ε |S|`, where `R*` triples the last side.
pub fn greedy_select(rects: &[Rect], epsilon: f64, shape: &[usize]) -> Result<Selection> {
    check_epsilon(epsilon)?;
    if rects.is_empty() {
        return Err(Error::Domain("cannot select from an empty family".into()));
    }
    check_family(rects, shape)?;
    let mut order: Vec<&Rect> = rects.iter().collect();
    order.sort_by_key(|r| std::cmp::Reverse(r.perp_len()));
    let mut dilated = Mask::empty(shape);
    let mut chosen = Vec::new();
    for s in order {
        let hit = dilated.count_in(s) as u64;
        if within_fraction(hit, s.cells(), epsilon) {
            dilated.fill_rect(&s.dilate_perp());
            chosen.push(s.clone());
        }
    }
    Selection::from_parts(shape, rects.to_vec(), chosen, epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsenessReport {
    pub passed: bool,
    /// Whether the last sides are nonincreasing along the family.
    pub ordered: bool,
    pub epsilon: f64,
    /// Largest `|R_k ∩ U_k| / |R_k|` seen.
    pub worst_ratio: f64,
    pub worst_index: Option<usize>,
    /// Slice height of the worst ratio (slice checks only).
    pub worst_slice: Option<i64>,
    pub violations: usize,
    pub checked: usize,
}

impl SparsenessReport {
    fn empty(epsilon: f64, ordered: bool) -> Self {
        Self { passed: ordered, ordered, epsilon, worst_ratio: 0.0, worst_index: None, worst_slice: None, violations: 0, checked: 0 }
    }

    fn record(&mut self, k: usize, t: Option<i64>, hit: u64, cells: u64) {
        self.checked += 1;
        let ratio = hit as f64 / cells as f64;
        if !within_fraction(hit, cells, self.epsilon) {
            self.violations += 1;
            self.passed = false;
        }
        if self.worst_index.is_none() || ratio > self.worst_ratio {
            self.worst_ratio = ratio;
            self.worst_index = Some(k);
            self.worst_slice = t;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.checked += other.checked;
        self.violations += other.violations;
        self.passed &= other.passed;
        if other.worst_index.is_some() && (self.worst_index.is_none() || other.worst_ratio > self.worst_ratio) {
            self.worst_ratio = other.worst_ratio;
            self.worst_index = other.worst_index;
            self.worst_slice = other.worst_slice;
        }
        self
    }
}

/// Checks both lines of the sparseness property on `sel.chosen()` by rasterization.
pub fn check_p2(sel: &Selection) -> SparsenessReport {
    let chosen = sel.chosen();
    let ordered = chosen.windows(2).all(|w| w[0].perp_len() >= w[1].perp_len());
    let mut report = SparsenessReport::empty(sel.epsilon(), ordered);
    let mut dilated = Mask::empty(sel.shape());
    for (k, r) in chosen.iter().enumerate() {
        report.record(k, None, dilated.count_in(r) as u64, r.cells());
        dilated.fill_rect(&r.dilate_perp());
    }
    report
}

/// Checks, at every height `t` of the last axis, that each slice `P_t(R_k)`
/// meets the union of the earlier slices in at most an `ε` fraction.
pub fn check_p1_slices(sel: &Selection) -> Result<SparsenessReport> {
    let shape = sel.shape();
    let n = shape.len();
    if n < 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: n });
    }
    let inner = &shape[..n - 1];
    let eps = sel.epsilon();
    let report = par::map_reduce(
        0..shape[n - 1],
        || SparsenessReport::empty(eps, true),
        |t| {
            let t = t as i64;
            let mut rep = SparsenessReport::empty(eps, true);
            let mut union = Mask::empty(inner);
            for (k, r) in sel.chosen().iter().enumerate() {
                if let Some(s) = r.slice(t).expect("n >= 2") {
                    rep.record(k, Some(t), union.count_in(&s) as u64, s.cells());
                    union.fill_rect(&s);
                }
            }
            rep
        },
        SparsenessReport::merge,
    );
    Ok(report)
}

/// `T f = Σ_k (avg_{R_k^s} f) 1_{E_k}`.
pub fn apply_t(f: &Grid, sel: &Selection) -> Result<Grid> {
    check_domain(f, sel)?;
    let vals = f.values();
    let avgs: Vec<f64> = sel
        .chosen()
        .iter()
        .map(|r| {
            let mut s = 0.0;
            r.for_each_cell(sel.shape(), |i| s += vals[i]);
            s / r.cells() as f64
        })
        .collect();
    let out = (0..f.len()).map(|i| sel.owner_of(i).map_or(0.0, |k| avgs[k])).collect();
    f.with_values(out)
}

/// `T* f = Σ_k (|R_k^s|⁻¹ ∫_{E_k} f) 1_{R_k^s}`.
pub fn apply_t_star(f: &Grid, sel: &Selection) -> Result<Grid> {
    check_domain(f, sel)?;
    let mut piece_sums = vec![0.0; sel.len()];
    for (i, v) in f.values().iter().enumerate() {
        if let Some(k) = sel.owner_of(i) {
            piece_sums[k] += v;
        }
    }
    let mut out = vec![0.0; f.len()];
    for (k, r) in sel.chosen().iter().enumerate() {
        let c = piece_sums[k] / r.cells() as f64;
        r.for_each_cell(sel.shape(), |i| out[i] += c);
    }
    f.with_values(out)
}

fn check_domain(g: &Grid, sel: &Selection) -> Result<()> {
    if g.shape() != sel.shape() {
        return Err(Error::ShapeMismatch { left: g.shape().to_vec(), right: sel.shape().to_vec() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecmassReport {
    pub passed: bool,
    /// `min_k w(E_k) / w(R_k^s)`
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub worst_index: Option<usize>,
}

/// Checks `w(R_k^s) ≥ w(E_k) ≥ ½ w(R_k^s)` for every selected rectangle.
pub fn recmass_check(sel: &Selection, w: &Grid) -> Result<RecmassReport> {
    check_domain(w, sel)?;
    let vals = w.values();
    let mut piece = vec![0.0; sel.len()];
    for (i, v) in vals.iter().enumerate() {
        if let Some(k) = sel.owner_of(i) {
            piece[k] += v;
        }
    }
    let mut rep = RecmassReport { passed: true, min_ratio: f64::INFINITY, max_ratio: f64::NEG_INFINITY, worst_index: None };
    for (k, r) in sel.chosen().iter().enumerate() {
        let mut whole = 0.0;
        r.for_each_cell(sel.shape(), |i| whole += vals[i]);
        let ratio = piece[k] / whole;
        if ratio < rep.min_ratio {
            rep.min_ratio = ratio;
            rep.worst_index = Some(k);
        }
        rep.max_ratio = rep.max_ratio.max(ratio);
    }
    rep.passed = sel.is_empty() || (rep.min_ratio >= 0.5 && rep.max_ratio <= 1.0);
    Ok(rep)
}

/// `(∫_Ω (Σ_k 1_{R_k^s})^p w)^{1/p} / w(Ω)^{1/p}`.
pub fn overlap_norm_ratio(sel: &Selection, w: &Grid, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("overlap norm needs p > 1, got {p}")));
    }
    check_domain(w, sel)?;
    let mult = sel.multiplicity();
    let mut num = 0.0;
    let mut den = 0.0;
    for (m, v) in mult.iter().zip(w.values()) {
        if *m > 0 {
            num += (*m as f64).powf(p) * v;
            den += v;
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).powf(1.0 / p))
}

/// `w(∪ input) / w(Ω)`.
pub fn cover_ratio(sel: &Selection, w: &Grid) -> Result<f64> {
    check_domain(w, sel)?;
    let top = mask_measure(sel.omega_input(), Some(w));
    let bottom = mask_measure(&sel.omega(), Some(w));
    if bottom == 0.0 {
        return Err(Error::Inconsistency("empty selection has no covering ratio".into()));
    }
    Ok(top / bottom)
}

/// Precomputed `T* w` and `M_n w` for evaluating the exponential functional
/// at many `(θ, δ)`.
#[derive(Debug, Clone)]
pub struct ExpFunctional {
    n: usize,
    cell_volume: f64,
    t_star_w: Vec<f64>,
    max_w: Vec<f64>,
    in_omega: Vec<bool>,
    w_omega: f64,
}

impl ExpFunctional {
    pub fn new(sel: &Selection, w: &Grid) -> Result<Self> {
        if w.n() < 2 {
            return Err(Error::UnsupportedDimension { required: 2, got: w.n() });
        }
        check_domain(w, sel)?;
        w.require_positive("weight")?;
        let omega = sel.omega();
        Ok(Self {
            n: w.n(),
            cell_volume: w.cell_volume(),
            t_star_w: apply_t_star(w, sel)?.into_values(),
            max_w: strong_maximal(w, None)?.grid.into_values(),
            in_omega: omega.bits().to_vec(),
            w_omega: mask_measure(&omega, Some(w)),
        })
    }

    pub fn t_star_w(&self) -> &[f64] {
        &self.t_star_w
    }

    pub fn max_w(&self) -> &[f64] {
        &self.max_w
    }

    /// `w(Ω)⁻¹ ∫_{Ω ∩ {T*w > δ Mw}} (exp[θ (T*w / Mw)^{1/(n−1)}] − 1) Mw`.
    pub fn eval(&self, theta: f64, delta: f64) -> Result<f64> {
        if !(theta > 0.0 && delta > 0.0) {
            return Err(Error::Domain(format!("need θ > 0 and δ > 0, got ({theta}, {delta})")));
        }
        if self.w_omega == 0.0 {
            return Ok(0.0);
        }
        let power = 1.0 / (self.n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..self.max_w.len() {
            let (t, m) = (self.t_star_w[i], self.max_w[i]);
            if self.in_omega[i] && t > delta * m {
                acc += (theta * (t / m).powf(power)).exp_m1() * m;
            }
        }
        Ok(acc * self.cell_volume / self.w_omega)
    }
}

/// The normalized exponential functional of the selection; see [`ExpFunctional::eval`].
pub fn exp_functional_q(sel: &Selection, w: &Grid, theta: f64, delta: f64) -> Result<f64> {
    ExpFunctional::new(sel, w)?.eval(theta, delta)
}
