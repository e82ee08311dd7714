//! Monte Carlo check of family-wise error control and power for the
//! single-step, step-down and ERL adjustments.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjust::analyze;
use crate::curves::{Direction, Grid, TwoGroupDataset};
use crate::error::{Error, Result};
use crate::permute::permutation_curves;
use crate::pvalue::PValue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseModel {
    /// Independent standard normal noise at every grid point.
    Iid,
    /// Gaussian process with correlation `exp(-(s - t)^2 / (2 rho^2))`.
    Smooth { length_scale: f64 },
}

impl Default for NoiseModel {
    fn default() -> Self {
        // grid spans [0, 1]
        NoiseModel::Smooth { length_scale: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n0: usize,
    pub n1: usize,
    pub grid_size: usize,
    pub n_curves: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub direction: Direction,
    pub noise: NoiseModel,
    /// Effect added to group 1 at each grid point; `None` is the global null.
    pub signal: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n0: 15,
            n1: 15,
            grid_size: 40,
            n_curves: 200,
            replicates: 1000,
            alpha: 0.05,
            direction: Direction::TwoSided,
            noise: NoiseModel::default(),
            signal: None,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n0 < 2 || self.n1 < 2 {
            return bad(format!("group sizes must be >= 2, got {} and {}", self.n0, self.n1));
        }
        if self.grid_size == 0 || self.replicates == 0 {
            return bad("grid_size and replicates must be positive".into());
        }
        if self.n_curves < 2 {
            return bad(format!("n_curves must be >= 2, got {}", self.n_curves));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let NoiseModel::Smooth { length_scale } = self.noise {
            if !(length_scale > 0.0 && length_scale.is_finite()) {
                return bad(format!("length_scale must be positive, got {length_scale}"));
            }
        }
        if let Some(signal) = &self.signal {
            if signal.len() != self.grid_size {
                return bad(format!(
                    "signal has {} entries, grid has {}",
                    signal.len(),
                    self.grid_size
                ));
            }
            if signal.iter().any(|v| !v.is_finite()) {
                return bad("signal must be finite".into());
            }
        }
        Ok(())
    }

    fn is_null_point(&self, s: usize) -> bool {
        self.signal.as_ref().is_none_or(|sig| sig[s] == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentSummary {
    pub name: String,
    /// Fraction of replicates rejecting at any truly null grid point.
    pub fwer: f64,
    pub fwer_se: f64,
    /// Mean number of rejections among grid points carrying signal.
    pub mean_signal_rejections: f64,
    pub mean_signal_rejections_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub single_step: AdjustmentSummary,
    pub step_down: AdjustmentSummary,
    pub erl: AdjustmentSummary,
    /// Replicates where the single-step rejections were not contained in the
    /// step-down or ERL rejections.
    pub dominance_violations: usize,
}

impl SimResult {
    pub fn summaries(&self) -> [&AdjustmentSummary; 3] {
        [&self.single_step, &self.step_down, &self.erl]
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    family_error: [bool; 3],
    signal_rejections: [usize; 3],
    dominance_ok: bool,
}

/// Runs `config.replicates` independent replicates in parallel. Replicate `r`
/// uses ChaCha stream `r` of the configured seed.
pub fn fwer_experiment(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let grid = Grid::linspace(0.0, 1.0, config.grid_size)?;
    let noise_factor = match config.noise {
        NoiseModel::Iid => None,
        NoiseModel::Smooth { length_scale } => Some(se_cholesky(grid.points(), length_scale)?),
    };

    let outcomes: Vec<Outcome> = (0..config.replicates)
        .into_par_iter()
        .map(|r| replicate(config, &grid, noise_factor.as_ref(), r))
        .collect::<Result<_>>()?;

    let names = ["single_step", "step_down", "erl"];
    let mut summaries = names.iter().enumerate().map(|(k, name)| {
        let n = outcomes.len() as f64;
        let errors = outcomes.iter().filter(|o| o.family_error[k]).count() as f64;
        let fwer = errors / n;
        let counts: Vec<f64> = outcomes.iter().map(|o| o.signal_rejections[k] as f64).collect();
        let mean = counts.iter().sum::<f64>() / n;
        let var = if outcomes.len() > 1 {
            counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        AdjustmentSummary {
            name: name.to_string(),
            fwer,
            fwer_se: (fwer * (1.0 - fwer) / n).sqrt(),
            mean_signal_rejections: mean,
            mean_signal_rejections_se: (var / n).sqrt(),
        }
    });
    let (single_step, step_down, erl) = (
        summaries.next().unwrap(),
        summaries.next().unwrap(),
        summaries.next().unwrap(),
    );
    Ok(SimResult {
        config: config.clone(),
        single_step,
        step_down,
        erl,
        dominance_violations: outcomes.iter().filter(|o| !o.dominance_ok).count(),
    })
}

fn replicate(
    config: &SimConfig,
    grid: &Grid,
    noise_factor: Option<&DMatrix<f64>>,
    r: usize,
) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(r as u64);
    let g = grid.len();
    let n = config.n0 + config.n1;
    let labels: Vec<bool> = (0..n).map(|i| i >= config.n0).collect();
    let responses: Vec<Vec<f64>> = labels
        .iter()
        .map(|&in_group1| {
            let z = DVector::from_fn(g, |_, _| StandardNormal.sample(&mut rng));
            let noise = match noise_factor {
                Some(l) => l * z,
                None => z,
            };
            let mut row: Vec<f64> = noise.iter().copied().collect();
            if in_group1 {
                if let Some(signal) = &config.signal {
                    row.iter_mut().zip(signal).for_each(|(v, e)| *v += e);
                }
            }
            row
        })
        .collect();
    let data = TwoGroupDataset::new(grid.clone(), responses, labels)?;
    let curves = permutation_curves(&data, config.n_curves, rng.next_u64())?;
    let report = analyze(&curves, config.direction);

    let families: [&[PValue]; 3] = [&report.single_step, &report.step_down, &report.erl];
    let rejected: Vec<Vec<bool>> = families
        .iter()
        .map(|ps| ps.iter().map(|p| p.at_most(config.alpha)).collect())
        .collect();
    let mut family_error = [false; 3];
    let mut signal_rejections = [0usize; 3];
    for k in 0..3 {
        for s in 0..g {
            if rejected[k][s] {
                if config.is_null_point(s) {
                    family_error[k] = true;
                } else {
                    signal_rejections[k] += 1;
                }
            }
        }
    }
    let dominance_ok =
        (0..g).all(|s| !rejected[0][s] || (rejected[1][s] && rejected[2][s]));
    Ok(Outcome {
        family_error,
        signal_rejections,
        dominance_ok,
    })
}

/// Lower Cholesky factor of the squared-exponential correlation matrix,
/// with the smallest diagonal jitter that makes it positive definite.
fn se_cholesky(points: &[f64], length_scale: f64) -> Result<DMatrix<f64>> {
    let g = points.len();
    let corr = DMatrix::from_fn(g, g, |i, j| {
        let d = points[i] - points[j];
        (-d * d / (2.0 * length_scale * length_scale)).exp()
    });
    let mut jitter = 1e-10;
    while jitter < 1e-2 {
        let m = &corr + DMatrix::identity(g, g) * jitter;
        if let Some(chol) = m.cholesky() {
            return Ok(chol.l());
        }
        jitter *= 10.0;
    }
    Err(Error::InvalidConfig(
        "squared-exponential correlation matrix is not positive definite".into(),
    ))
}

/// Plain-text table of a simulation summary.
pub fn render_table(result: &SimResult) -> String {
    let c = &result.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "replicates={} n0={} n1={} G={} M={} alpha={} direction={}",
        c.replicates, c.n0, c.n1, c.grid_size, c.n_curves, c.alpha, c.direction
    );
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>8} {:>14} {:>8}",
        "adjustment", "fwer", "se", "signal_rej", "se"
    );
    for s in result.summaries() {
        let _ = writeln!(
            out,
            "{:<12} {:>8.4} {:>8.4} {:>14.3} {:>8.3}",
            s.name, s.fwer, s.fwer_se, s.mean_signal_rejections, s.mean_signal_rejections_se
        );
    }
    let _ = writeln!(out, "dominance_violations={}", result.dominance_violations);
    out
}
