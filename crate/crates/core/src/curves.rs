//! Curve ensembles and two-group functional datasets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite, strictly increasing evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("grid point {i} is not finite")));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "grid not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Grid { points })
    }

    /// `len` points evenly spaced on `[start, end]`.
    pub fn linspace(start: f64, end: f64, len: usize) -> Result<Self> {
        let points = match len {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..len)
                .map(|i| start + (end - start) * i as f64 / (len - 1) as f64)
                .collect(),
        };
        Grid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How pointwise ties among the `M` curve values are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// Reject any pointwise tie.
    #[default]
    Strict,
    /// Allow ties; ranks count curves at least as extreme (ties share the larger rank).
    Conservative,
}

impl FromStr for TiePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(TiePolicy::Strict),
            "conservative" => Ok(TiePolicy::Conservative),
            other => Err(format!("unknown tie policy {other:?}")),
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::Strict => "strict",
            TiePolicy::Conservative => "conservative",
        })
    }
}

/// Which tail of the pointwise distribution counts as extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "high")]
    HighIsExtreme,
    #[serde(rename = "low")]
    LowIsExtreme,
    #[default]
    #[serde(rename = "two-sided")]
    TwoSided,
}

impl Direction {
    pub const ALL: [Direction; 3] = [
        Direction::HighIsExtreme,
        Direction::LowIsExtreme,
        Direction::TwoSided,
    ];
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "high" => Ok(Direction::HighIsExtreme),
            "low" => Ok(Direction::LowIsExtreme),
            "two-sided" => Ok(Direction::TwoSided),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::HighIsExtreme => "high",
            Direction::LowIsExtreme => "low",
            Direction::TwoSided => "two-sided",
        })
    }
}

/// `M` statistic curves on a common grid. Row 0 is the observed curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    grid: Grid,
    values: Vec<f64>,
    n_curves: usize,
    tie_policy: TiePolicy,
}

impl CurveSet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of curves `M`, observed included.
    pub fn n_curves(&self) -> usize {
        self.n_curves
    }

    /// Number of grid points `G`.
    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let g = self.n_points();
        &self.values[m * g..(m + 1) * g]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks(self.n_points())
    }

    pub fn observed(&self) -> &[f64] {
        self.row(0)
    }

    #[inline]
    pub fn value(&self, m: usize, s: usize) -> f64 {
        self.values[m * self.n_points() + s]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Re-check this ensemble under another tie policy.
    pub fn with_tie_policy(self, tie_policy: TiePolicy) -> Result<Self> {
        if tie_policy == TiePolicy::Strict {
            check_no_ties(&self)?;
        }
        Ok(CurveSet { tie_policy, ..self })
    }

    pub(crate) fn from_parts_unchecked(
        grid: Grid,
        values: Vec<f64>,
        n_curves: usize,
        tie_policy: TiePolicy,
    ) -> Self {
        debug_assert_eq!(values.len(), n_curves * grid.len());
        CurveSet {
            grid,
            values,
            n_curves,
            tie_policy,
        }
    }
}

/// Validates an `M x G` matrix of statistic curves against `grid`.
pub fn validate_curveset(raw: &[Vec<f64>], grid: Grid, tie_policy: TiePolicy) -> Result<CurveSet> {
    let g = grid.len();
    if raw.len() < 2 {
        return Err(Error::InvalidEnsemble(format!(
            "need at least 2 curves, got {}",
            raw.len()
        )));
    }
    let mut values = Vec::with_capacity(raw.len() * g);
    for (m, row) in raw.iter().enumerate() {
        if row.len() != g {
            return Err(Error::DimensionMismatch(format!(
                "curve {m} has {} values, grid has {g} points",
                row.len()
            )));
        }
        if let Some(s) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: m, column: s });
        }
        values.extend_from_slice(row);
    }
    let curves = CurveSet {
        grid,
        values,
        n_curves: raw.len(),
        tie_policy,
    };
    if tie_policy == TiePolicy::Strict {
        check_no_ties(&curves)?;
    }
    Ok(curves)
}

fn check_no_ties(curves: &CurveSet) -> Result<()> {
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(curves.n_curves());
    for s in 0..curves.n_points() {
        column.clear();
        column.extend((0..curves.n_curves()).map(|m| (curves.value(m, s), m)));
        column.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some(w) = column.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::PointwiseTie {
                column: s,
                first: w[0].1.min(w[1].1),
                second: w[0].1.max(w[1].1),
            });
        }
    }
    Ok(())
}

/// Raw responses for two groups of subjects observed on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoGroupDataset {
    grid: Grid,
    responses: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

impl TwoGroupDataset {
    /// `labels[i]` is true when subject `i` belongs to group 1.
    pub fn new(grid: Grid, responses: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if responses.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} response rows but {} labels",
                responses.len(),
                labels.len()
            )));
        }
        for (i, row) in responses.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(Error::DimensionMismatch(format!(
                    "subject {i} has {} values, grid has {} points",
                    row.len(),
                    grid.len()
                )));
            }
            if let Some(s) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { row: i, column: s });
            }
        }
        let n1 = labels.iter().filter(|&&l| l).count();
        let n0 = labels.len() - n1;
        if n0 < 2 || n1 < 2 {
            return Err(Error::InvalidDataset(format!(
                "each group needs at least 2 subjects, got {n0} in group 0 and {n1} in group 1"
            )));
        }
        Ok(TwoGroupDataset {
            grid,
            responses,
            labels,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn responses(&self) -> &[Vec<f64>] {
        &self.responses
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn n_subjects(&self) -> usize {
        self.labels.len()
    }

    /// Same responses under a different labelling; group sizes must stay valid.
    pub fn relabel(&self, labels: Vec<bool>) -> Result<Self> {
        TwoGroupDataset::new(self.grid.clone(), self.responses.clone(), labels)
    }
}

/// Pooled-variance two-sample t statistic at every grid point,
/// `(mean_1 - mean_0) / sqrt(sp^2 (1/n0 + 1/n1))`.
pub fn pointwise_t(data: &TwoGroupDataset) -> Result<Vec<f64>> {
    t_curve(&data.responses, &data.labels, data.grid.len())
}

pub(crate) fn t_curve(responses: &[Vec<f64>], labels: &[bool], g: usize) -> Result<Vec<f64>> {
    let mut n = [0usize; 2];
    let mut sum = [vec![0.0; g], vec![0.0; g]];
    for (row, &label) in responses.iter().zip(labels) {
        let k = label as usize;
        n[k] += 1;
        for (acc, v) in sum[k].iter_mut().zip(row) {
            *acc += v;
        }
    }
    let mean: [Vec<f64>; 2] =
        [0, 1].map(|k| sum[k].iter().map(|s| s / n[k] as f64).collect());
    let mut ss = vec![0.0; g];
    for (row, &label) in responses.iter().zip(labels) {
        let mu = &mean[label as usize];
        for s in 0..g {
            let d = row[s] - mu[s];
            ss[s] += d * d;
        }
    }
    let df = (n[0] + n[1] - 2) as f64;
    let scale = 1.0 / n[0] as f64 + 1.0 / n[1] as f64;
    (0..g)
        .map(|s| {
            let pooled = ss[s] / df;
            if pooled <= 0.0 {
                return Err(Error::ZeroVariance { column: s });
            }
            Ok((mean[1][s] - mean[0][s]) / (pooled * scale).sqrt())
        })
        .collect()
}
