//! Test-corpus generators for functions and weights.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` so a seed fixes the
//! output on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cell_count, unravel, Grid};

/// The single named generator behind every seeded computation.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant {
        value: f64,
    },
    /// `∏_k (i_k + 0.5)^{α_k}`; a single exponent applies to every axis.
    Power {
        alpha: Vec<f64>,
    },
    /// `a` where the index sum is even, `b` where it is odd.
    Checkerboard {
        a: f64,
        b: f64,
    },
    /// `∏_k factors[k][i_k]`.
    Product {
        factors: Vec<Vec<f64>>,
    },
    /// Independent `exp(σ Z)` per cell.
    Lognormal {
        sigma: f64,
        seed: u64,
    },
    /// `base + height` at `cell` (the grid center when absent), `base` elsewhere.
    Spike {
        height: f64,
        #[serde(default)]
        cell: Option<Vec<usize>>,
        #[serde(default)]
        base: f64,
    },
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Domain(format!("cannot parse {what} from {s:?}")))
}

impl Generator {
    /// Parses the compact CLI form `kind:args`, e.g. `constant:1`, `power:0.3`,
    /// `checkerboard:1,2`, `lognormal:0.5,7`, `spike:100` or `spike:100@3,4`.
    /// A `{`-prefixed string is read as JSON instead. `spike_base` is the
    /// background level for spikes (0 for functions, 1 for weights).
    pub fn parse(s: &str, spike_base: f64) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let list = || -> Result<Vec<f64>> { args.split(',').filter(|a| !a.is_empty()).map(|a| num(a, kind)).collect() };
        match kind {
            "constant" => Ok(Generator::Constant { value: num(args, "constant value")? }),
            "power" => Ok(Generator::Power { alpha: list()? }),
            "checkerboard" => match list()?[..] {
                [a, b] => Ok(Generator::Checkerboard { a, b }),
                _ => Err(Error::Domain("checkerboard takes two values a,b".into())),
            },
            "lognormal" => {
                let v = list()?;
                let sigma = *v.first().ok_or_else(|| Error::Domain("lognormal needs sigma".into()))?;
                let seed = v.get(1).copied().unwrap_or(0.0) as u64;
                Ok(Generator::Lognormal { sigma, seed })
            }
            "spike" => {
                let (h, at) = args.split_once('@').map_or((args, None), |(h, c)| (h, Some(c)));
                let cell = at
                    .map(|c| c.split(',').map(|v| v.trim().parse::<usize>().map_err(|_| Error::Domain(format!("bad spike cell {c:?}")))).collect())
                    .transpose()?;
                Ok(Generator::Spike { height: num(h, "spike height")?, cell, base: spike_base })
            }
            other => Err(Error::Domain(format!("unknown generator kind {other:?}"))),
        }
    }

    /// Builds the grid (unit cell volume). Values may vanish; see [`generate_weight`].
    pub fn generate(&self, shape: &[usize]) -> Result<Grid> {
        let n = shape.len();
        match self {
            Generator::Constant { value } => Grid::filled(shape.to_vec(), *value),
            Generator::Power { alpha } => {
                let alpha = match alpha.len() {
                    1 => vec![alpha[0]; n],
                    k if k == n => alpha.clone(),
                    k => return Err(Error::Domain(format!("{k} exponents for {n} axes"))),
                };
                Grid::from_fn(shape.to_vec(), |i| i.iter().zip(&alpha).map(|(&x, &a)| (x as f64 + 0.5).powf(a)).product())
            }
            Generator::Checkerboard { a, b } => {
                Grid::from_fn(shape.to_vec(), |i| if i.iter().sum::<usize>() % 2 == 0 { *a } else { *b })
            }
            Generator::Product { factors } => {
                if factors.len() != n || factors.iter().zip(shape).any(|(f, &l)| f.len() != l) {
                    return Err(Error::Domain(format!("product factors do not match shape {shape:?}")));
                }
                Grid::from_fn(shape.to_vec(), |i| i.iter().enumerate().map(|(k, &x)| factors[k][x]).product())
            }
            Generator::Lognormal { sigma, seed } => {
                let mut r = rng(*seed);
                let values = (0..cell_count(shape))
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut r);
                        (sigma * z).exp()
                    })
                    .collect();
                Grid::new(shape.to_vec(), values, 1.0)
            }
            Generator::Spike { height, cell, base } => {
                let at = cell.clone().unwrap_or_else(|| shape.iter().map(|l| l / 2).collect());
                if at.len() != n || at.iter().zip(shape).any(|(i, l)| i >= l) {
                    return Err(Error::Domain(format!("spike cell {at:?} outside shape {shape:?}")));
                }
                let mut g = vec![*base; cell_count(shape)];
                g[crate::grid::ravel(shape, &at)] += height;
                Grid::new(shape.to_vec(), g, 1.0)
            }
        }
    }
}

/// A strictly positive weight; generators producing a zero cell are rejected.
pub fn generate_weight(gen: &Generator, shape: &[usize]) -> Result<Grid> {
    let w = gen.generate(shape)?;
    if let Some(i) = w.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::Domain(format!(
            "{gen:?} produces a zero weight at cell {:?}",
            unravel(shape, i)
        )));
    }
    Ok(w)
}
