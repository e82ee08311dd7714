//! Synthetic inputs shared by the benchmarks.

use envadj::{validate_curveset, CurveSet, Grid, TiePolicy};

/// `m` tie-free curves on `g` grid points from a fixed linear congruential stream.
pub fn synthetic_curves(m: usize, g: usize) -> CurveSet {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let raw: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..g)
                .map(|_| {
                    state = state
                        .wrapping_mul(6_364_136_223_846_793_005)
                        .wrapping_add(1_442_695_040_888_963_407);
                    (state >> 11) as f64 / (1u64 << 53) as f64
                })
                .collect()
        })
        .collect();
    validate_curveset(&raw, Grid::linspace(0.0, 1.0, g).unwrap(), TiePolicy::Conservative)
        .expect("synthetic curves are finite")
}
