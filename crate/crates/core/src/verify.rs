//! Inequality harnesses. Each harness evaluates both sides of a distributional
//! or norm inequality on a grid and reports `LHS / RHS`; sweeps report the
//! supremum over their parameter.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::covering::Selection;
use crate::error::{Error, Result};
use crate::generators::{rng, Generator};
use crate::grid::{mask_measure, Grid, Mask, Rect};
use crate::operators::{cube_maximal, level_measure, strong_maximal, strong_maximal_with_argmax};
use crate::par;

/// `Φ_n(t) = t (1 + (log⁺ t)^{n−1})`, with `Φ_1(t) = t`.
pub fn phi_n(t: f64, n: usize) -> f64 {
    if n <= 1 {
        return t;
    }
    let l = if t > 1.0 { t.ln() } else { 0.0 };
    t * (1.0 + l.powi(n as i32 - 1))
}

/// Both sides of one inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub lhs: f64,
    pub rhs: f64,
}

impl Terms {
    /// `lhs / rhs`, with `0/0 = 0`; a positive left side over a zero right side
    /// cannot happen for valid inputs and is reported as an inconsistency.
    pub fn ratio(&self) -> Result<f64> {
        if self.lhs == 0.0 {
            return Ok(0.0);
        }
        if self.rhs == 0.0 {
            return Err(Error::Inconsistency(format!("LHS = {} over RHS = 0", self.lhs)));
        }
        Ok(self.lhs / self.rhs)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    Ok(())
}

/// `Σ Φ(f/λ) · factor · cell_volume`; `factor ≡ 1` when absent.
fn orlicz_side(f: &Grid, lambda: f64, factor: Option<&[f64]>, phi: impl Fn(f64) -> f64) -> f64 {
    let s: f64 = match factor {
        Some(m) => f.values().iter().zip(m).map(|(v, m)| phi(v / lambda) * m).sum(),
        None => f.values().iter().map(|v| phi(v / lambda)).sum(),
    };
    s * f.cell_volume()
}

/// `f`, `M_n f`, `w`, `M_n w` evaluated once for a whole λ sweep.
#[derive(Debug, Clone)]
pub struct EndpointHarness {
    f: Grid,
    max_f: Grid,
    w: Option<Grid>,
    max_w: Option<Grid>,
}

impl EndpointHarness {
    /// `w = None` gives the unweighted (Jessen–Marcinkiewicz–Zygmund) setting.
    pub fn new(f: &Grid, w: Option<&Grid>) -> Result<Self> {
        if let Some(w) = w {
            f.same_shape(w)?;
            w.require_positive("weight")?;
        }
        Ok(Self {
            f: f.clone(),
            max_f: strong_maximal(f, None)?.grid,
            w: w.cloned(),
            max_w: w.map(|w| strong_maximal(w, None).map(|m| m.grid)).transpose()?,
        })
    }

    pub fn max_f(&self) -> &Grid {
        &self.max_f
    }

    /// `w({M_n f > λ})` against `Σ Φ_n(f/λ) M_n w`.
    pub fn terms(&self, lambda: f64) -> Result<Terms> {
        check_lambda(lambda)?;
        let n = self.f.n();
        let lhs = level_measure(&self.max_f, lambda, self.w.as_ref())?;
        let rhs = orlicz_side(&self.f, lambda, self.max_w.as_ref().map(|m| m.values()), |t| phi_n(t, n));
        Ok(Terms { lhs, rhs })
    }

    /// The same left side against `Σ (f/λ) M_n w`, without the logarithmic factor.
    pub fn linear_terms(&self, lambda: f64) -> Result<Terms> {
        check_lambda(lambda)?;
        let lhs = level_measure(&self.max_f, lambda, self.w.as_ref())?;
        let rhs = orlicz_side(&self.f, lambda, self.max_w.as_ref().map(|m| m.values()), |t| t);
        Ok(Terms { lhs, rhs })
    }
}

/// `w({M_n f > λ}) / Σ Φ_n(f/λ) M_n w`.
pub fn fs_endpoint_ratio(f: &Grid, w: &Grid, lambda: f64) -> Result<f64> {
    EndpointHarness::new(f, Some(w))?.terms(lambda)?.ratio()
}

/// `|{M_n f > λ}| / Σ Φ_n(f/λ)`.
pub fn jmz_ratio(f: &Grid, lambda: f64) -> Result<f64> {
    EndpointHarness::new(f, None)?.terms(lambda)?.ratio()
}

pub fn weighted_endpoint_terms(f: &Grid, w: &Grid, lambda: f64) -> Result<Terms> {
    check_lambda(lambda)?;
    let mw = strong_maximal(f, Some(w))?.grid;
    let lhs = level_measure(&mw, lambda, Some(w))?;
    let n = f.n();
    let rhs = orlicz_side(f, lambda, Some(w.values()), |t| phi_n(t, n));
    Ok(Terms { lhs, rhs })
}

/// `w({M_n^w f > λ}) / Σ Φ_n(f/λ) w`.
pub fn weighted_endpoint_ratio(f: &Grid, w: &Grid, lambda: f64) -> Result<f64> {
    weighted_endpoint_terms(f, w, lambda)?.ratio()
}

pub fn fs_lp_terms(f: &Grid, w: &Grid, p: f64) -> Result<Terms> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p = {p} must exceed 1")));
    }
    f.same_shape(w)?;
    w.require_positive("weight")?;
    let mf = strong_maximal(f, None)?.grid;
    let mw = strong_maximal(w, None)?.grid;
    let lhs: f64 = mf.values().iter().zip(w.values()).map(|(m, w)| m.powf(p) * w).sum();
    let rhs: f64 = f.values().iter().zip(mw.values()).map(|(v, m)| v.powf(p) * m).sum();
    Ok(Terms { lhs: lhs * f.cell_volume(), rhs: rhs * f.cell_volume() })
}

/// `Σ (M_n f)^p w / Σ f^p M_n w`.
pub fn fs_lp_ratio(f: &Grid, w: &Grid, p: f64) -> Result<f64> {
    fs_lp_terms(f, w, p)?.ratio()
}

pub fn hl_fs_endpoint_terms(f: &Grid, w: &Grid, lambda: f64) -> Result<Terms> {
    check_lambda(lambda)?;
    f.same_shape(w)?;
    w.require_positive("weight")?;
    let mq = cube_maximal(f)?.grid;
    let mqw = cube_maximal(w)?.grid;
    let lhs = level_measure(&mq, lambda, Some(w))?;
    let rhs = orlicz_side(f, lambda, Some(mqw.values()), |t| t);
    Ok(Terms { lhs, rhs })
}

/// `w({M_Q f > λ}) / λ⁻¹ Σ f M_Q w`.
pub fn hl_fs_endpoint_ratio(f: &Grid, w: &Grid, lambda: f64) -> Result<f64> {
    hl_fs_endpoint_terms(f, w, lambda)?.ratio()
}

/// Trial functions for [`opnorm_probe`]: the constant 1 first, then cycling
/// through unit spikes, indicators of random rectangles and lognormal fields.
pub fn opnorm_trials(shape: &[usize], trials: usize, seed: u64) -> Result<Vec<Grid>> {
    let mut r = rng(seed);
    let mut out = vec![Grid::filled(shape.to_vec(), 1.0)?];
    for k in 1..trials.max(1) {
        let g = match k % 3 {
            1 => {
                let cell: Vec<usize> = shape.iter().map(|&l| r.random_range(0..l)).collect();
                Generator::Spike { height: 1.0, cell: Some(cell), base: 0.0 }.generate(shape)?
            }
            2 => {
                let rect = random_rect(&mut r, shape);
                let mut m = Mask::empty(shape);
                m.fill_rect(&rect);
                Grid::new(shape.to_vec(), m.bits().iter().map(|&b| b as u8 as f64).collect(), 1.0)?
            }
            _ => Generator::Lognormal { sigma: 1.0, seed: r.random() }.generate(shape)?,
        };
        out.push(g);
    }
    Ok(out)
}

/// `‖g‖_{L^p(w)} / ‖f‖_{L^p(w)}`.
pub fn lp_ratio(g: &Grid, f: &Grid, w: &Grid, p: f64) -> f64 {
    let num: f64 = g.values().iter().zip(w.values()).map(|(v, w)| v.powf(p) * w).sum();
    let den: f64 = f.values().iter().zip(w.values()).map(|(v, w)| v.powf(p) * w).sum();
    (num / den).powf(1.0 / p)
}

/// Largest `‖M_n^w f‖_{L^p(w)} / ‖f‖_{L^p(w)}` over the trial set, an
/// empirical lower bound for the operator norm.
pub fn opnorm_probe(w: &Grid, p: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p = {p} must exceed 1")));
    }
    w.require_positive("weight")?;
    let fs = opnorm_trials(w.shape(), trials, seed)?;
    fs.iter().try_fold(f64::NEG_INFINITY, |acc, f| {
        let m = strong_maximal(f, Some(w))?.grid;
        Ok(acc.max(lp_ratio(&m, f, w, p)))
    })
}

fn random_rect(r: &mut impl Rng, shape: &[usize]) -> Rect {
    let mut lo = Vec::with_capacity(shape.len());
    let mut hi = Vec::with_capacity(shape.len());
    for &l in shape {
        let a = r.random_range(0..l);
        lo.push(a);
        hi.push(r.random_range(a + 1..=l));
    }
    Rect::from_usize(&lo, &hi).expect("nonempty by construction")
}

/// Random in-domain rectangles from a seeded generator.
pub fn random_rects(shape: &[usize], count: usize, seed: u64) -> Vec<Rect> {
    let mut r = rng(seed);
    (0..count).map(|_| random_rect(&mut r, shape)).collect()
}

/// Outcome of [`young_constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungConstant {
    pub theta: f64,
    pub n: usize,
    pub c: f64,
    /// Points of the dense verification grid.
    pub checked: u64,
    pub violations: u64,
    /// 10% increases applied before the dense grid verified.
    pub bumps: u32,
}

pub const YOUNG_RANGE: f64 = 1e6;
const YOUNG_FLOOR: f64 = 1e-6;

/// `{0}` followed by `count − 1` log-spaced points spanning `[10⁻⁶, 10⁶]`.
fn young_axis(count: usize) -> Vec<f64> {
    let (a, b) = (YOUNG_FLOOR.ln(), YOUNG_RANGE.ln());
    let k = count - 1;
    std::iter::once(0.0).chain((0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())).collect()
}

struct YoungTerms {
    theta: f64,
    n: usize,
}

impl YoungTerms {
    fn s_side(&self, s: f64) -> f64 {
        phi_n(s, self.n.max(2))
    }

    fn t_side(&self, t: f64) -> f64 {
        (self.theta * t.powf(1.0 / (self.n - 1) as f64)).exp_m1()
    }

    /// Smallest `c` making the inequality hold at `(s, t)`.
    fn need(&self, s: f64, t: f64) -> f64 {
        let a = self.s_side(s);
        if a == 0.0 {
            return 0.0;
        }
        (s * t - self.t_side(t)) / a
    }
}

/// Smallest `c` (up to grid resolution) with
/// `s t ≤ c s (1 + (log⁺ s)^{n−1}) + exp(θ t^{1/(n−1)}) − 1` on `[0, 10⁶]²`.
///
/// A 10³ × 10³ log grid locates the worst point, a local 201 × 201 grid between
/// its neighbours refines it, and the result is verified on a 10⁴ × 10⁴ grid.
/// A failing verification raises `c` by 10%, at most five times.
pub fn young_constant(theta: f64, n: usize) -> Result<YoungConstant> {
    if !(theta > 0.0) || n < 2 {
        return Err(Error::Domain(format!("need θ > 0 and n ≥ 2, got ({theta}, {n})")));
    }
    let y = YoungTerms { theta, n };
    let coarse = young_axis(1000);
    let tb: Vec<f64> = coarse.iter().map(|&t| y.t_side(t)).collect();
    let (mut c, mut arg) = (0.0f64, (0usize, 0usize));
    for (i, &s) in coarse.iter().enumerate() {
        let a = y.s_side(s);
        if a == 0.0 {
            continue;
        }
        for (j, &t) in coarse.iter().enumerate() {
            let need = (s * t - tb[j]) / a;
            if need > c {
                c = need;
                arg = (i, j);
            }
        }
    }
    let around = |k: usize| (coarse[k.saturating_sub(1)], coarse[(k + 1).min(coarse.len() - 1)]);
    let ((s0, s1), (t0, t1)) = (around(arg.0), around(arg.1));
    for i in 0..=200 {
        let s = s0 + (s1 - s0) * i as f64 / 200.0;
        for j in 0..=200 {
            let t = t0 + (t1 - t0) * j as f64 / 200.0;
            c = c.max(y.need(s, t));
        }
    }

    let dense = young_axis(10_000);
    let db: Vec<f64> = dense.iter().map(|&t| y.t_side(t)).collect();
    let da: Vec<f64> = dense.iter().map(|&s| y.s_side(s)).collect();
    let checked = (dense.len() * dense.len()) as u64;
    for bumps in 0..=5u32 {
        let violations = par::map_reduce(
            0..dense.len(),
            || 0u64,
            |i| {
                let s = dense[i];
                dense.iter().zip(&db).filter(|(t, b)| s * **t > c * da[i] + **b).count() as u64
            },
            |a, b| a + b,
        );
        if violations == 0 {
            return Ok(YoungConstant { theta, n, c, checked, violations, bumps });
        }
        if bumps == 5 {
            return Err(Error::Inconsistency(format!(
                "young constant {c} still violated at {violations} dense points after 5 increases"
            )));
        }
        c *= 1.1;
    }
    unreachable!("loop returns on its last round")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    FsEndpoint,
    Jmz,
    WeightedEndpoint,
    FsLp,
    HlFsEndpoint,
    Opnorm,
    Young,
    Sharpness,
    Overlap,
    Covering,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::FsEndpoint => "fs_endpoint",
            Inequality::Jmz => "jmz",
            Inequality::WeightedEndpoint => "weighted_endpoint",
            Inequality::FsLp => "fs_lp",
            Inequality::HlFsEndpoint => "hl_fs_endpoint",
            Inequality::Opnorm => "opnorm",
            Inequality::Young => "young",
            Inequality::Sharpness => "sharpness",
            Inequality::Overlap => "overlap",
            Inequality::Covering => "covering",
        }
    }
}

/// One sweep point; `series` separates several ratios reported per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub series: String,
    pub param: String,
    pub value: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub inequality: Inequality,
    pub inputs: BTreeMap<String, String>,
    pub sweep: BTreeMap<String, Vec<f64>>,
    pub ratios: Vec<SweepPoint>,
    pub sup_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub runtime_ms: u64,
}

impl Report {
    pub fn new(inequality: Inequality) -> Self {
        Self {
            inequality,
            inputs: BTreeMap::new(),
            sweep: BTreeMap::new(),
            ratios: Vec::new(),
            sup_ratio: 0.0,
            passed: None,
            runtime_ms: 0,
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, series: &str, param: &str, value: f64, terms: Terms) -> Result<()> {
        let ratio = terms.ratio()?;
        if !ratio.is_finite() || ratio < 0.0 {
            return Err(Error::Inconsistency(format!("{series} ratio {ratio} at {param} = {value}")));
        }
        self.ratios.push(SweepPoint { series: series.into(), param: param.into(), value, lhs: terms.lhs, rhs: terms.rhs, ratio });
        self.sup_ratio = self.sup_ratio.max(ratio);
        Ok(())
    }

    /// Ratios of one series, in sweep order.
    pub fn series(&self, name: &str) -> Vec<f64> {
        self.ratios.iter().filter(|p| p.series == name).map(|p| p.ratio).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per sweep point: `inequality,series,param,value,lhs,rhs,ratio`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["inequality", "series", "param", "value", "lhs", "rhs", "ratio"])?;
        for p in &self.ratios {
            out.write_record([
                self.inequality.name(),
                &p.series,
                &p.param,
                &p.value.to_string(),
                &p.lhs.to_string(),
                &p.rhs.to_string(),
                &p.ratio.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// 17 log-spaced levels spanning `[min positive f / 4, 4 max f]`; empty for `f ≡ 0`.
pub fn default_lambdas(f: &Grid) -> Vec<f64> {
    let lo = f.values().iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return Vec::new();
    }
    let (a, b) = ((lo / 4.0).ln(), (4.0 * f.max_value()).ln());
    (0..17).map(|i| (a + (b - a) * i as f64 / 16.0).exp()).collect()
}

/// `sup_λ` of the endpoint ratio (weighted when `w` is given, unweighted otherwise).
pub fn endpoint_report(f: &Grid, w: Option<&Grid>, lambdas: &[f64]) -> Result<Report> {
    let start = Instant::now();
    let harness = EndpointHarness::new(f, w)?;
    let kind = if w.is_some() { Inequality::FsEndpoint } else { Inequality::Jmz };
    let mut rep = Report::new(kind).input("shape", format!("{:?}", f.shape()));
    rep.sweep.insert("lambda".into(), lambdas.to_vec());
    for &l in lambdas {
        rep.push(kind.name(), "lambda", l, harness.terms(l)?)?;
    }
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

pub fn weighted_endpoint_report(f: &Grid, w: &Grid, lambdas: &[f64]) -> Result<Report> {
    let start = Instant::now();
    let mut rep = Report::new(Inequality::WeightedEndpoint).input("shape", format!("{:?}", f.shape()));
    rep.sweep.insert("lambda".into(), lambdas.to_vec());
    let mw = strong_maximal(f, Some(w))?.grid;
    let n = f.n();
    for &l in lambdas {
        check_lambda(l)?;
        let lhs = level_measure(&mw, l, Some(w))?;
        let rhs = orlicz_side(f, l, Some(w.values()), |t| phi_n(t, n));
        rep.push("weighted_endpoint", "lambda", l, Terms { lhs, rhs })?;
    }
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

pub fn hl_fs_endpoint_report(f: &Grid, w: &Grid, lambdas: &[f64]) -> Result<Report> {
    let start = Instant::now();
    f.same_shape(w)?;
    w.require_positive("weight")?;
    let mq = cube_maximal(f)?.grid;
    let mqw = cube_maximal(w)?.grid;
    let mut rep = Report::new(Inequality::HlFsEndpoint).input("shape", format!("{:?}", f.shape()));
    rep.sweep.insert("lambda".into(), lambdas.to_vec());
    for &l in lambdas {
        check_lambda(l)?;
        let lhs = level_measure(&mq, l, Some(w))?;
        let rhs = orlicz_side(f, l, Some(mqw.values()), |t| t);
        rep.push("hl_fs_endpoint", "lambda", l, Terms { lhs, rhs })?;
    }
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

pub fn fs_lp_report(f: &Grid, w: &Grid, ps: &[f64]) -> Result<Report> {
    let start = Instant::now();
    let mut rep = Report::new(Inequality::FsLp).input("shape", format!("{:?}", f.shape()));
    rep.sweep.insert("p".into(), ps.to_vec());
    for &p in ps {
        rep.push("fs_lp", "p", p, fs_lp_terms(f, w, p)?)?;
    }
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Operator-norm probes over `ps`, each listed next to `(p − 1)^{−n}` (series `reference`).
pub fn opnorm_report(w: &Grid, ps: &[f64], trials: usize, seed: u64) -> Result<Report> {
    let start = Instant::now();
    let mut rep = Report::new(Inequality::Opnorm)
        .input("shape", format!("{:?}", w.shape()))
        .input("trials", trials)
        .input("seed", seed);
    rep.sweep.insert("p".into(), ps.to_vec());
    let n = w.n() as i32;
    for &p in ps {
        let probe = opnorm_probe(w, p, trials, seed)?;
        rep.push("opnorm", "p", p, Terms { lhs: probe, rhs: 1.0 })?;
        let reference = (p - 1.0).powi(-n);
        rep.ratios.push(SweepPoint { series: "reference".into(), param: "p".into(), value: p, lhs: reference, rhs: 1.0, ratio: reference });
    }
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

pub fn young_report(thetas: &[f64], ns: &[usize]) -> Result<Report> {
    let start = Instant::now();
    let mut rep = Report::new(Inequality::Young);
    rep.sweep.insert("theta".into(), thetas.to_vec());
    rep.sweep.insert("n".into(), ns.iter().map(|&n| n as f64).collect());
    let mut ok = true;
    for &n in ns {
        for &theta in thetas {
            let y = young_constant(theta, n)?;
            ok &= y.violations == 0;
            rep.push(&format!("c_theta_n{n}"), "theta", theta, Terms { lhs: y.c, rhs: 1.0 })?;
        }
    }
    rep.passed = Some(ok);
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Spike cell and level used by [`sharpness_probe`] unless overridden.
pub const SHARPNESS_LAMBDA: f64 = 42.0;

/// Endpoint ratios for `f = N·1_{cell}` (corner cell) and `w ≡ 1` against the
/// logarithmic scale (`r_log`) and the linear scale (`r_lin`). Passes when
/// `r_lin` grows at least twofold from the smallest to the largest `N` while
/// `max r_log / min r_log < 1.5`.
pub fn sharpness_probe(n_values: &[f64], shape: &[usize], lambda: f64) -> Result<Report> {
    check_lambda(lambda)?;
    let start = Instant::now();
    let mut rep = Report::new(Inequality::Sharpness)
        .input("shape", format!("{shape:?}"))
        .input("lambda", lambda)
        .input("f", "spike at the corner cell")
        .input("w", "constant:1");
    rep.sweep.insert("N".into(), n_values.to_vec());
    let corner = vec![0; shape.len()];
    for &nv in n_values {
        let f = Generator::Spike { height: nv, cell: Some(corner.clone()), base: 0.0 }.generate(shape)?;
        let h = EndpointHarness::new(&f, None)?;
        rep.push("r_log", "N", nv, h.terms(lambda)?)?;
        rep.push("r_lin", "N", nv, h.linear_terms(lambda)?)?;
    }
    let lin = rep.series("r_lin");
    let log = rep.series("r_log");
    let growth = match (lin.first(), lin.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    };
    let (lo, hi) = log.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    rep.inputs.insert("r_lin_growth".into(), growth.to_string());
    rep.inputs.insert("r_log_spread".into(), (hi / lo).to_string());
    rep.passed = Some(growth >= 2.0 && lo > 0.0 && hi / lo < 1.5);
    rep.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// One maximizing rectangle per cell of `{M_n f > λ}`, deduplicated in cell order.
pub fn extract_witnesses(f: &Grid, lambda: f64) -> Result<Vec<Rect>> {
    check_lambda(lambda)?;
    let (m, rects) = strong_maximal_with_argmax(f)?;
    let mut seen = std::collections::HashSet::new();
    Ok(m.values()
        .iter()
        .zip(rects)
        .filter(|(v, _)| **v > lambda)
        .filter_map(|(_, r)| seen.insert(r.clone()).then_some(r))
        .collect())
}

/// The selection pipeline from a function: witnesses of `{M_n f > λ}`, then
/// greedy sparse selection. Returns the selection with `w(F)` and `w(Ω)`.
#[derive(Debug, Clone)]
pub struct CoverageRun {
    pub selection: Selection,
    pub level_set: Mask,
    pub w_level_set: f64,
    pub w_selected: f64,
}

impl CoverageRun {
    pub fn constant(&self) -> f64 {
        if self.w_selected == 0.0 {
            0.0
        } else {
            self.w_level_set / self.w_selected
        }
    }
}

pub fn selection_coverage(f: &Grid, w: &Grid, lambda: f64, epsilon: f64) -> Result<Option<CoverageRun>> {
    f.same_shape(w)?;
    let witnesses = extract_witnesses(f, lambda)?;
    if witnesses.is_empty() {
        return Ok(None);
    }
    let selection = crate::covering::greedy_select(&witnesses, epsilon, f.shape())?;
    let mf = strong_maximal(f, None)?.grid;
    let level_set = Mask::superlevel(&mf, lambda);
    let w_level_set = mask_measure(&level_set, Some(w));
    let w_selected = mask_measure(&selection.omega(), Some(w));
    Ok(Some(CoverageRun { selection, level_set, w_level_set, w_selected }))
}
