//! Pointwise ranks and the min-rank and extreme-rank-length depths.

use serde::Serialize;

use crate::curves::{CurveSet, Direction};

/// Pointwise ranks `R*_m(s)`; rank 1 is the most extreme value at `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    ranks: Vec<u32>,
    n_curves: usize,
    n_points: usize,
    direction: Direction,
}

impl RankMatrix {
    /// Builds a rank matrix from explicit rows, checking every entry lies in `[1, M]`.
    pub fn from_rows(rows: &[Vec<u32>], direction: Direction) -> Option<Self> {
        let n_curves = rows.len();
        let n_points = rows.first()?.len();
        if n_curves < 2 || n_points == 0 {
            return None;
        }
        let mut ranks = Vec::with_capacity(n_curves * n_points);
        for row in rows {
            if row.len() != n_points || row.iter().any(|&r| r == 0 || r as usize > n_curves) {
                return None;
            }
            ranks.extend_from_slice(row);
        }
        Some(RankMatrix {
            ranks,
            n_curves,
            n_points,
            direction,
        })
    }

    pub fn n_curves(&self) -> usize {
        self.n_curves
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn row(&self, m: usize) -> &[u32] {
        &self.ranks[m * self.n_points..(m + 1) * self.n_points]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.ranks.chunks(self.n_points)
    }

    #[inline]
    pub fn rank(&self, m: usize, s: usize) -> u32 {
        self.ranks[m * self.n_points + s]
    }

    /// Ranks of the observed curve, `R*_0(s)`.
    pub fn observed(&self) -> &[u32] {
        self.row(0)
    }
}

/// Ranks every curve at every grid point.
///
/// High: `#{k : T_k(s) >= T_m(s)}`. Low: `#{k : T_k(s) <= T_m(s)}`.
/// Two-sided: the smaller of the two. Without ties these are ordinary ranks;
/// with ties, tied curves share the larger (less extreme) rank.
pub fn pointwise_ranks(curves: &CurveSet, direction: Direction) -> RankMatrix {
    let m_total = curves.n_curves();
    let g = curves.n_points();
    let mut ranks = vec![0u32; m_total * g];
    let mut column = Vec::with_capacity(m_total);
    for s in 0..g {
        column.clear();
        column.extend((0..m_total).map(|m| curves.value(m, s)));
        column.sort_by(f64::total_cmp);
        for m in 0..m_total {
            let v = curves.value(m, s);
            let below = column.partition_point(|&x| x < v);
            let at_or_below = column.partition_point(|&x| x <= v);
            let high = m_total - below;
            let low = at_or_below;
            let r = match direction {
                Direction::HighIsExtreme => high,
                Direction::LowIsExtreme => low,
                Direction::TwoSided => high.min(low),
            };
            ranks[m * g + s] = r as u32;
        }
    }
    RankMatrix {
        ranks,
        n_curves: m_total,
        n_points: g,
        direction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthKind {
    MinRank,
    Erl,
}

/// One depth per curve; smaller is more extreme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthVector {
    depths: Vec<u32>,
    kind: DepthKind,
}

impl DepthVector {
    pub fn new(depths: Vec<u32>, kind: DepthKind) -> Self {
        let m = depths.len();
        assert!(
            depths.iter().all(|&d| d >= 1 && d as usize <= m),
            "depths must lie in [1, M]"
        );
        DepthVector { depths, kind }
    }

    pub fn kind(&self) -> DepthKind {
        self.kind
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.depths
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    pub fn get(&self, m: usize) -> u32 {
        self.depths[m]
    }

    pub fn observed(&self) -> u32 {
        self.depths[0]
    }
}

/// `R_m = min_s R*_m(s)`.
pub fn minrank_depths(ranks: &RankMatrix) -> DepthVector {
    let depths = ranks
        .rows()
        .map(|row| *row.iter().min().expect("grid is nonempty"))
        .collect();
    DepthVector::new(depths, DepthKind::MinRank)
}

/// Extreme rank length depth.
///
/// Each curve's ranks are sorted ascending and the sorted vectors compared
/// lexicographically (smaller is more extreme). The depth of `m` is the number
/// of curves whose sorted vector is `<=` that of `m`, so identical profiles
/// share the largest position of their group.
pub fn erl_depths(ranks: &RankMatrix) -> DepthVector {
    let sorted: Vec<Vec<u32>> = ranks
        .rows()
        .map(|row| {
            let mut r = row.to_vec();
            r.sort_unstable();
            r
        })
        .collect();
    let mut order: Vec<usize> = (0..sorted.len()).collect();
    order.sort_by(|&a, &b| sorted[a].cmp(&sorted[b]));

    let mut depths = vec![0u32; sorted.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && sorted[order[end]] == sorted[order[start]] {
            end += 1;
        }
        for &m in &order[start..end] {
            depths[m] = end as u32;
        }
        start = end;
    }
    DepthVector::new(depths, DepthKind::Erl)
}
