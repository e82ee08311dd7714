//! Kappa tables, envelopes over retained curves, exits, and the global p-value.

use crate::curves::{CurveSet, Direction};
use crate::pvalue::PValue;
use crate::ranks::{DepthKind, DepthVector};

/// `kappa_j = #{m : depth_m <= j}` for `j = 1..=M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaTable {
    kappa: Vec<u32>,
    kind: DepthKind,
}

impl KappaTable {
    pub fn new(depths: &DepthVector) -> Self {
        let m = depths.len();
        let mut kappa = vec![0u32; m + 1];
        for &d in depths.as_slice() {
            kappa[d as usize] += 1;
        }
        for j in 1..=m {
            kappa[j] += kappa[j - 1];
        }
        KappaTable {
            kappa,
            kind: depths.kind(),
        }
    }

    /// `kappa_j`, for `0 <= j <= M` (`kappa_0 = 0`).
    pub fn get(&self, j: usize) -> u32 {
        self.kappa[j]
    }

    pub fn n_curves(&self) -> usize {
        self.kappa.len() - 1
    }

    pub fn kind(&self) -> DepthKind {
        self.kind
    }

    /// `kappa_j / M`; `j` must be at least the smallest depth so the count is positive.
    pub fn pvalue(&self, j: usize) -> PValue {
        PValue::new(self.get(j) as usize, self.n_curves())
    }
}

/// Pointwise range of the curves whose depth exceeds `j`.
///
/// An empty envelope stores `+inf` lower and `-inf` upper bounds, so every
/// value lies outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub j: usize,
    pub kappa_j: u32,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub retained_count: usize,
}

impl Envelope {
    pub fn is_empty(&self) -> bool {
        self.retained_count == 0
    }

    /// Whether `value` at grid index `s` falls outside the envelope in the
    /// extreme direction.
    pub fn excludes(&self, s: usize, value: f64, direction: Direction) -> bool {
        if self.is_empty() {
            return true;
        }
        match direction {
            Direction::HighIsExtreme => value > self.upper[s],
            Direction::LowIsExtreme => value < self.lower[s],
            Direction::TwoSided => value > self.upper[s] || value < self.lower[s],
        }
    }
}

pub fn build_envelope(curves: &CurveSet, depths: &DepthVector, j: usize) -> Envelope {
    let m_total = curves.n_curves();
    assert!(
        (1..=m_total).contains(&j),
        "envelope level {j} outside [1, {m_total}]"
    );
    let g = curves.n_points();
    let mut lower = vec![f64::INFINITY; g];
    let mut upper = vec![f64::NEG_INFINITY; g];
    let mut retained_count = 0;
    for m in (0..m_total).filter(|&m| depths.get(m) as usize > j) {
        retained_count += 1;
        for (s, &v) in curves.row(m).iter().enumerate() {
            lower[s] = lower[s].min(v);
            upper[s] = upper[s].max(v);
        }
    }
    let kappa_j = (m_total - retained_count) as u32;
    Envelope {
        j,
        kappa_j,
        lower,
        upper,
        retained_count,
    }
}

/// Does the observed curve leave `envelope` at grid index `s`?
pub fn exits_at(envelope: &Envelope, curves: &CurveSet, s: usize, direction: Direction) -> bool {
    envelope.excludes(s, curves.value(0, s), direction)
}

/// `p_+ = (#{m >= 1 : depth_m <= depth_0} + 1) / M`.
pub fn global_p(depths: &DepthVector) -> PValue {
    let d0 = depths.observed();
    let count = depths.as_slice()[1..].iter().filter(|&&d| d <= d0).count() + 1;
    PValue::new(count, depths.len())
}

/// Per grid point, `kappa_j / M` for the first `j` whose envelope the observed
/// curve exits at that point. Built literally from [`build_envelope`], one
/// envelope per level, so it costs `O(M^2 G)`.
pub fn envelope_sweep(curves: &CurveSet, depths: &DepthVector, direction: Direction) -> Vec<PValue> {
    let m_total = curves.n_curves();
    let g = curves.n_points();
    let mut out: Vec<Option<PValue>> = vec![None; g];
    let mut remaining = g;
    for j in 1..=m_total {
        if remaining == 0 {
            break;
        }
        let env = build_envelope(curves, depths, j);
        for (s, slot) in out.iter_mut().enumerate() {
            if slot.is_none() && exits_at(&env, curves, s, direction) {
                *slot = Some(PValue::new(env.kappa_j as usize, m_total));
                remaining -= 1;
            }
        }
    }
    out.into_iter()
        .map(|p| p.expect("the level-M envelope is empty and always exited"))
        .collect()
}

/// Closed form of [`envelope_sweep`].
///
/// The observed curve is outside the envelope at `s` exactly when every
/// retained curve is strictly less extreme than it there, so the first exit
/// level is the largest depth among curves at least as extreme as `T_0(s)`
/// (the observed curve included). Two-sided exits take the nearer side.
pub fn first_exit_levels(curves: &CurveSet, depths: &DepthVector, direction: Direction) -> Vec<usize> {
    let m_total = curves.n_curves();
    (0..curves.n_points())
        .map(|s| {
            let t0 = curves.value(0, s);
            let mut above = 0u32;
            let mut below = 0u32;
            for m in 0..m_total {
                let v = curves.value(m, s);
                let d = depths.get(m);
                if v >= t0 {
                    above = above.max(d);
                }
                if v <= t0 {
                    below = below.max(d);
                }
            }
            let level = match direction {
                Direction::HighIsExtreme => above,
                Direction::LowIsExtreme => below,
                Direction::TwoSided => above.min(below),
            };
            level as usize
        })
        .collect()
}
