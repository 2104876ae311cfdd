//! `strongmax` command-line runs.
//!
//! Exit codes: 0 on success, 1 when a check or verification fails or an input
//! is rejected, 2 on a usage error.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use strongmax::covering::{
    check_p1_slices, check_p2, cover_ratio, greedy_select, overlap_norm_ratio, recmass_check, ExpFunctional, Selection,
};
use strongmax::generators::{generate_weight, Generator};
use strongmax::io::{load_grid, save_grid};
use strongmax::operators::{
    composition_maximal, cube_maximal, directional_maximal, hl_maximal_1d, strong_maximal,
};
use strongmax::verify::{self, Inequality, Report, Terms};
use strongmax::weights::{
    a1_star_constant, ap_star_constant, doubling_fit, epsilon_for_weight, ProfileOptions, WeightProfile,
    DEFAULT_AP_CEILING, DEFAULT_SAFETY,
};
use strongmax::Grid;

#[derive(Parser)]
#[command(name = "strongmax", version, about = "Strong maximal functions, strong A_p weights and sparse coverings on grids")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record wall-clock runtimes in reports (otherwise 0, keeping output byte-stable)
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated function or weight grid
    Gen(GenArgs),
    /// Compute a maximal transform and write it as a grid
    Maximal(MaximalArgs),
    /// Strong A_p constants of a weight
    Apconst(ApconstArgs),
    /// Full weight profile as JSON
    Profile(ProfileArgs),
    /// Witness rectangles of a level set, then greedy sparse selection
    Select(SelectArgs),
    /// Sparseness, mass, overlap and functional checks on a selection
    Check(CheckArgs),
    /// Run an inequality harness
    Verify(VerifyArgs),
    /// Exhaustive reference transforms
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, PartialEq)]
struct Shape(Vec<usize>);

fn parse_shape(s: &str) -> Result<Shape, String> {
    let dims = s
        .split(['x', 'X', ','])
        .map(|d| d.trim().parse::<usize>().map_err(|_| format!("bad extent {d:?} in shape {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(format!("shape {s:?} needs positive extents like 16x16"));
    }
    Ok(Shape(dims))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("bad list entry {v:?}")))
        .collect()
}

fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s)
}

/// A function `f` from a file or a generator.
#[derive(Args, Clone)]
struct FnSource {
    /// Grid file holding f (GRD1, or JSON by extension)
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
    /// Generator for f, e.g. spike:100, power:-0.3, lognormal:1,7
    #[arg(long)]
    f: Option<String>,
    /// Grid shape for generators, e.g. 16x16
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Shape>,
}

/// A weight `w` from a file or a generator.
#[derive(Args, Clone)]
struct WeightSource {
    /// Grid file holding w
    #[arg(long = "w-in", value_name = "PATH")]
    w_in: Option<PathBuf>,
    /// Generator for w, e.g. constant:1, checkerboard:1,2, lognormal:0.5,3
    #[arg(long)]
    w: Option<String>,
}

#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn load(path: &Path) -> anyhow::Result<Grid> {
    load_grid(path).with_context(|| format!("reading {}", path.display()))
}

fn generated(spec: &str, shape: Option<&Shape>, weight: bool) -> anyhow::Result<Grid> {
    let shape = shape.ok_or_else(|| usage(format!("generator {spec:?} needs --shape")))?;
    let gen = Generator::parse(spec, if weight { 1.0 } else { 0.0 })?;
    Ok(if weight { generate_weight(&gen, &shape.0)? } else { gen.generate(&shape.0)? })
}

impl FnSource {
    fn grid(&self) -> anyhow::Result<Grid> {
        match (&self.input, &self.f) {
            (Some(p), None) => load(p),
            (None, Some(spec)) => generated(spec, self.shape.as_ref(), false),
            (Some(_), Some(_)) => Err(usage("give f either by --in or by --f, not both")),
            (None, None) => Err(usage("missing f: pass --in PATH or --f GENERATOR --shape LxM")),
        }
    }

    /// The shape implied by `--in` or `--shape`, for weights generated alongside.
    fn shape_of(&self, f: &Grid) -> Shape {
        self.shape.clone().unwrap_or_else(|| Shape(f.shape().to_vec()))
    }
}

impl WeightSource {
    fn grid(&self, shape: Option<&Shape>) -> anyhow::Result<Option<Grid>> {
        match (&self.w_in, &self.w) {
            (Some(p), None) => Ok(Some(load(p)?)),
            (None, Some(spec)) => Ok(Some(generated(spec, shape, true)?)),
            (Some(_), Some(_)) => Err(usage("give w either by --w-in or by --w, not both")),
            (None, None) => Ok(None),
        }
    }

    fn required(&self, shape: Option<&Shape>) -> anyhow::Result<Grid> {
        self.grid(shape)?.ok_or_else(|| usage("missing w: pass --w-in PATH or --w GENERATOR"))
    }
}

#[derive(Args)]
struct GenArgs {
    /// Function generator (background 0)
    #[arg(long, conflicts_with = "w")]
    f: Option<String>,
    /// Weight generator (background 1, must stay positive)
    #[arg(long)]
    w: Option<String>,
    #[arg(long, value_parser = parse_shape, default_value = "16x16")]
    shape: Shape,
    #[arg(long, default_value_t = 1.0)]
    cell_volume: f64,
    /// Output file; `.json` selects the JSON form, anything else GRD1
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Strong,
    Cube,
    Directional,
    Composition,
    Hl,
}

#[derive(Args)]
struct MaximalArgs {
    #[command(flatten)]
    f: FnSource,
    #[command(flatten)]
    w: WeightSource,
    #[arg(long, value_enum, default_value = "strong")]
    family: FamilyArg,
    /// Axis for the directional transform, counted from 1
    #[arg(long)]
    axis: Option<usize>,
    /// Axis order for the composition, counted from 1 (default 1,2,..,n)
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ApconstArgs {
    /// Weight file
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
    /// Weight generator
    #[arg(long)]
    w: Option<String>,
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Shape>,
    /// Exponents, comma separated
    #[arg(long, value_delimiter = ',', default_value = "2")]
    p: Vec<f64>,
    /// Also report the A_1* constant
    #[arg(long)]
    a1: bool,
}

impl ApconstArgs {
    fn weight(&self) -> anyhow::Result<Grid> {
        weight_input(&self.input, &self.w, self.shape.as_ref())
    }
}

fn weight_input(input: &Option<PathBuf>, w: &Option<String>, shape: Option<&Shape>) -> anyhow::Result<Grid> {
    match (input, w) {
        (Some(p), None) => {
            let g = load(p)?;
            g.require_positive("weight")?;
            Ok(g)
        }
        (None, Some(spec)) => generated(spec, shape, true),
        (Some(_), Some(_)) => Err(usage("give the weight either by --in or by --w, not both")),
        (None, None) => Err(usage("missing weight: pass --in PATH or --w GENERATOR --shape LxM")),
    }
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Shape>,
    #[arg(long, value_delimiter = ',', default_value = "4,2,1.5,1.25,1.1")]
    ps: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAFETY)]
    safety: f64,
    #[arg(long, default_value_t = DEFAULT_AP_CEILING)]
    ceiling: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `--epsilon 0.1` or `--epsilon calibrated` (calibrated from the weight's doubling fit).
#[derive(Debug, Clone, Copy, PartialEq)]
enum EpsilonMode {
    Explicit(f64),
    Calibrated,
}

fn parse_epsilon(s: &str) -> Result<EpsilonMode, String> {
    if s == "calibrated" || s == "auto" {
        return Ok(EpsilonMode::Calibrated);
    }
    s.parse::<f64>().map(EpsilonMode::Explicit).map_err(|_| format!("ε must be a number or 'calibrated', got {s:?}"))
}

#[derive(Args, Clone)]
struct EpsilonArgs {
    #[arg(long, value_parser = parse_epsilon, default_value = "calibrated")]
    epsilon: EpsilonMode,
    /// Pairs sampled for the doubling fit behind a calibrated ε
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SAFETY)]
    safety: f64,
}

impl EpsilonArgs {
    fn resolve(&self, w: Option<&Grid>, seed: u64) -> anyhow::Result<f64> {
        match self.epsilon {
            EpsilonMode::Explicit(e) => Ok(e),
            EpsilonMode::Calibrated => {
                let w = w.ok_or_else(|| usage("a calibrated ε needs a weight (--w or --w-in), or pass --epsilon VALUE"))?;
                let fit = doubling_fit(w, self.samples, seed)?;
                Ok(epsilon_for_weight(fit.c, fit.delta, self.safety)?)
            }
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    f: FnSource,
    #[command(flatten)]
    w: WeightSource,
    #[command(flatten)]
    eps: EpsilonArgs,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Selection JSON written by `select`
    #[arg(long)]
    selection: PathBuf,
    #[command(flatten)]
    w: WeightSource,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    ps: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum InequalityArg {
    #[value(name = "fs_endpoint", alias = "fs-endpoint")]
    FsEndpoint,
    Jmz,
    #[value(name = "weighted_endpoint", alias = "weighted-endpoint")]
    WeightedEndpoint,
    #[value(name = "fs_lp", alias = "fs-lp")]
    FsLp,
    #[value(name = "hl_fs_endpoint", alias = "hl-fs-endpoint")]
    HlFsEndpoint,
    Opnorm,
    Young,
    Sharpness,
    Overlap,
    Covering,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    inequality: InequalityArg,
    #[command(flatten)]
    f: FnSource,
    #[command(flatten)]
    w: WeightSource,
    #[command(flatten)]
    eps: EpsilonArgs,
    /// `auto` (17 log-spaced levels around the range of f) or a comma list
    #[arg(long, default_value = "auto")]
    lambda_sweep: String,
    #[arg(long, value_delimiter = ',', default_value = "1.25,1.5,2,4")]
    ps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
    thetas: Vec<f64>,
    /// Dimensions for the Young constant
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    ns: Vec<usize>,
    /// Spike heights for the sharpness probe
    #[arg(long = "n-values", value_delimiter = ',', default_value = "100,1000,10000")]
    n_values: Vec<f64>,
    /// Level for the sharpness probe
    #[arg(long, default_value_t = verify::SHARPNESS_LAMBDA)]
    level: f64,
    #[arg(long, default_value_t = 16)]
    trials: usize,
    /// Random rectangles fed to the overlap selection
    #[arg(long, default_value_t = 100)]
    rects: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat CSV, one row per sweep point
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleFamily {
    Strong,
    Cube,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    f: FnSource,
    #[arg(long, value_enum, default_value = "strong")]
    family: OracleFamily,
    /// Output grid; a JSON summary goes to stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn one_based(axis: usize, n: usize) -> anyhow::Result<usize> {
    if axis == 0 || axis > n {
        return Err(usage(format!("axis {axis} outside 1..={n}")));
    }
    Ok(axis - 1)
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<bool> {
    let g = match (&a.f, &a.w) {
        (Some(spec), None) => Generator::parse(spec, 0.0)?.generate(&a.shape.0)?,
        (None, Some(spec)) => generate_weight(&Generator::parse(spec, 1.0)?, &a.shape.0)?,
        _ => return Err(usage("gen needs exactly one of --f or --w")),
    };
    save_grid(&g.with_cell_volume(a.cell_volume)?, &a.out)?;
    Ok(true)
}

fn cmd_maximal(a: MaximalArgs) -> anyhow::Result<bool> {
    let f = a.f.grid()?;
    let w = a.w.grid(Some(&a.f.shape_of(&f)))?;
    if w.is_some() && !matches!(a.family, FamilyArg::Strong) {
        return Err(usage("weighted averages are only available for --family strong"));
    }
    let g = match a.family {
        FamilyArg::Strong => strong_maximal(&f, w.as_ref())?.grid,
        FamilyArg::Cube => cube_maximal(&f)?.grid,
        FamilyArg::Hl => hl_maximal_1d(&f)?,
        FamilyArg::Directional => {
            let axis = a.axis.ok_or_else(|| usage("--family directional needs --axis"))?;
            directional_maximal(&f, one_based(axis, f.n())?)?
        }
        FamilyArg::Composition => {
            let order = match &a.order {
                Some(o) => o.iter().map(|&k| one_based(k, f.n())).collect::<anyhow::Result<Vec<_>>>()?,
                None => (0..f.n()).collect(),
            };
            composition_maximal(&f, &order)?
        }
    };
    save_grid(&g, &a.out)?;
    Ok(true)
}

fn cmd_apconst(a: ApconstArgs) -> anyhow::Result<bool> {
    let w = a.weight()?;
    let mut consts = BTreeMap::new();
    for &p in &a.p {
        consts.insert(format!("{p}"), ap_star_constant(&w, p)?);
    }
    let mut out = json!({ "shape": w.shape(), "ap_constants": consts });
    if a.a1 {
        out["a1_constant"] = json!(a1_star_constant(&w)?);
    }
    emit(&serde_json::to_string_pretty(&out)?, None)?;
    Ok(true)
}

fn cmd_profile(a: ProfileArgs) -> anyhow::Result<bool> {
    let w = weight_input(&a.input, &a.w, a.shape.as_ref())?;
    let opts = ProfileOptions { ps: a.ps, samples: a.samples, seed: a.seed, safety: a.safety, ceiling: a.ceiling };
    let prof = WeightProfile::compute(&w, &opts)?;
    emit(&serde_json::to_string_pretty(&prof)?, a.out.as_deref())?;
    Ok(true)
}

fn cmd_select(a: SelectArgs) -> anyhow::Result<bool> {
    let f = a.f.grid()?;
    let w = a.w.grid(Some(&a.f.shape_of(&f)))?;
    let eps = a.eps.resolve(w.as_ref(), a.seed)?;
    let witnesses = verify::extract_witnesses(&f, a.lambda)?;
    if witnesses.is_empty() {
        bail!("no cell has M_n f > {}; nothing to select", a.lambda);
    }
    let sel = greedy_select(&witnesses, eps, f.shape())?;
    emit(&sel.to_json()?, a.out.as_deref())?;
    Ok(true)
}

fn cmd_check(a: CheckArgs) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&a.selection).with_context(|| format!("reading {}", a.selection.display()))?;
    let sel = Selection::from_json(&text)?;
    let shape = Shape(sel.shape().to_vec());
    let w = a.w.grid(Some(&shape))?;
    let p2 = check_p2(&sel);
    let mut ok = p2.passed;
    let mut out = json!({ "selected": sel.len(), "epsilon": sel.epsilon(), "p2": p2 });
    if sel.shape().len() >= 2 {
        let p1 = check_p1_slices(&sel)?;
        ok &= p1.passed;
        out["p1_slices"] = json!(p1);
    }
    if let Some(w) = &w {
        let rec = recmass_check(&sel, w)?;
        ok &= rec.passed;
        out["recmass"] = json!(rec);
        let mut overlap = BTreeMap::new();
        for &p in &a.ps {
            overlap.insert(format!("{p}"), overlap_norm_ratio(&sel, w, p)?);
        }
        out["overlap_norm_ratio"] = json!(overlap);
        out["cover_ratio"] = json!(cover_ratio(&sel, w)?);
        if w.n() >= 2 {
            out["exp_functional"] = json!({
                "theta": a.theta,
                "delta": a.delta,
                "value": ExpFunctional::new(&sel, w)?.eval(a.theta, a.delta)?,
            });
        }
    }
    out["passed"] = json!(ok);
    emit(&serde_json::to_string_pretty(&out)?, None)?;
    Ok(ok)
}

fn lambdas(spec: &str, f: &Grid) -> anyhow::Result<Vec<f64>> {
    let l = if spec == "auto" { verify::default_lambdas(f) } else { parse_reals(spec).map_err(usage)? };
    if l.is_empty() {
        bail!("empty λ sweep (f vanishes identically)");
    }
    Ok(l)
}

fn cmd_verify(a: &VerifyArgs) -> anyhow::Result<Report> {
    let need_f = || a.f.grid();
    let weight_for = |f: &Grid| a.w.required(Some(&a.f.shape_of(f)));
    let report = match a.inequality {
        InequalityArg::FsEndpoint => {
            let f = need_f()?;
            let w = weight_for(&f)?;
            verify::endpoint_report(&f, Some(&w), &lambdas(&a.lambda_sweep, &f)?)?
        }
        InequalityArg::Jmz => {
            let f = need_f()?;
            verify::endpoint_report(&f, None, &lambdas(&a.lambda_sweep, &f)?)?
        }
        InequalityArg::WeightedEndpoint => {
            let f = need_f()?;
            let w = weight_for(&f)?;
            verify::weighted_endpoint_report(&f, &w, &lambdas(&a.lambda_sweep, &f)?)?
        }
        InequalityArg::HlFsEndpoint => {
            let f = need_f()?;
            let w = weight_for(&f)?;
            verify::hl_fs_endpoint_report(&f, &w, &lambdas(&a.lambda_sweep, &f)?)?
        }
        InequalityArg::FsLp => {
            let f = need_f()?;
            let w = weight_for(&f)?;
            verify::fs_lp_report(&f, &w, &a.ps)?
        }
        InequalityArg::Opnorm => {
            let shape = a.f.shape.clone();
            let w = a.w.required(shape.as_ref())?;
            verify::opnorm_report(&w, &a.ps, a.trials, a.seed)?
        }
        InequalityArg::Young => verify::young_report(&a.thetas, &a.ns)?,
        InequalityArg::Sharpness => {
            let shape = a.f.shape.clone().unwrap_or(Shape(vec![64, 64]));
            verify::sharpness_probe(&a.n_values, &shape.0, a.level)?
        }
        InequalityArg::Overlap => {
            let shape = a.f.shape.clone().ok_or_else(|| usage("verify overlap needs --shape"))?;
            let w = a.w.required(Some(&shape))?;
            overlap_report(a, &w)?
        }
        InequalityArg::Covering => {
            let f = need_f()?;
            let w = weight_for(&f)?;
            covering_report(a, &f, &w)?
        }
    };
    Ok(report)
}

/// `overlap_norm_ratio(p) / p^{n−1}` for a greedy selection from random rectangles.
fn overlap_report(a: &VerifyArgs, w: &Grid) -> anyhow::Result<Report> {
    let eps = a.eps.resolve(Some(w), a.seed)?;
    let sel = greedy_select(&verify::random_rects(w.shape(), a.rects, a.seed), eps, w.shape())?;
    let mut rep = Report::new(Inequality::Overlap)
        .input("shape", format!("{:?}", w.shape()))
        .input("rects", a.rects)
        .input("seed", a.seed)
        .input("epsilon", eps)
        .input("selected", sel.len());
    rep.sweep.insert("p".into(), a.ps.clone());
    for &p in &a.ps {
        let scale = p.powi(w.n() as i32 - 1);
        rep.push("overlap", "p", p, Terms { lhs: overlap_norm_ratio(&sel, w, p)?, rhs: scale })?;
    }
    Ok(rep)
}

/// `w({M_n f > λ}) / w(∪ R_k^s)` for the witness selection at each level.
fn covering_report(a: &VerifyArgs, f: &Grid, w: &Grid) -> anyhow::Result<Report> {
    let eps = a.eps.resolve(Some(w), a.seed)?;
    let ls = lambdas(&a.lambda_sweep, f)?;
    let mut rep = Report::new(Inequality::Covering).input("shape", format!("{:?}", f.shape())).input("epsilon", eps);
    rep.sweep.insert("lambda".into(), ls.clone());
    for l in ls {
        if let Some(run) = verify::selection_coverage(f, w, l, eps)? {
            rep.push("covering", "lambda", l, Terms { lhs: run.w_level_set, rhs: run.w_selected })?;
        }
    }
    Ok(rep)
}

fn cmd_oracle(a: OracleArgs) -> anyhow::Result<bool> {
    let f = a.f.grid()?;
    let g = match a.family {
        OracleFamily::Strong => strongmax::oracle::brute_strong_maximal(&f)?,
        OracleFamily::Cube => strongmax::oracle::brute_cube_maximal(&f)?,
    };
    match &a.out {
        Some(p) => save_grid(&g, p)?,
        None => emit(&strongmax::io::grid_to_json(&g)?, None)?,
    }
    Ok(true)
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(k) = threads else { return Ok(()) };
    if k == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    #[cfg(not(feature = "parallel"))]
    eprintln!("note: sequential build, --threads {k} has no effect");
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Maximal(a) => cmd_maximal(a),
        Command::Apconst(a) => cmd_apconst(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Select(a) => cmd_select(a),
        Command::Check(a) => cmd_check(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => {
            let mut rep = cmd_verify(&a)?;
            if !cli.timing {
                rep.runtime_ms = 0;
            }
            if let Some(p) = &a.csv {
                let file = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                rep.write_csv(file)?;
            }
            emit(&rep.to_json()?, a.out.as_deref())?;
            Ok(rep.passed != Some(false))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
