//! Permutation ensembles for two-group functional data.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curves::{t_curve, CurveSet, TiePolicy, TwoGroupDataset};
use crate::error::{Error, Result};

/// Resampling attempts per row before a zero-variance permutation is fatal.
pub const RETRY_CAP: usize = 100;

/// A permutation ensemble together with the labelling behind every row.
#[derive(Debug, Clone)]
pub struct PermutationEnsemble {
    pub curves: CurveSet,
    /// `labels[m]` produced row `m`; `labels[0]` is the observed labelling.
    pub labels: Vec<Vec<bool>>,
}

/// Row 0 is the t curve of the real labels, rows `1..M` use uniformly random
/// label permutations. Row `m` draws from its own ChaCha stream, so the output
/// does not depend on thread scheduling.
///
/// The returned set carries [`TiePolicy::Conservative`]: two permutations
/// that split the subjects identically give identical rows.
pub fn permutation_ensemble(
    data: &TwoGroupDataset,
    n_curves: usize,
    seed: u64,
) -> Result<PermutationEnsemble> {
    ensemble_with_cap(data, n_curves, seed, RETRY_CAP)
}

fn ensemble_with_cap(
    data: &TwoGroupDataset,
    n_curves: usize,
    seed: u64,
    retry_cap: usize,
) -> Result<PermutationEnsemble> {
    if n_curves < 2 {
        return Err(Error::InvalidEnsemble(format!(
            "need at least 2 curves, got {n_curves}"
        )));
    }
    let g = data.grid().len();
    let observed = t_curve(data.responses(), data.labels(), g)?;

    let rows: Vec<(Vec<f64>, Vec<bool>)> = (1..n_curves)
        .into_par_iter()
        .map(|m| permuted_row(data, seed, m, retry_cap))
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(n_curves * g);
    let mut labels = Vec::with_capacity(n_curves);
    values.extend_from_slice(&observed);
    labels.push(data.labels().to_vec());
    for (row, perm) in rows {
        values.extend_from_slice(&row);
        labels.push(perm);
    }
    let curves = CurveSet::from_parts_unchecked(
        data.grid().clone(),
        values,
        n_curves,
        TiePolicy::Conservative,
    );
    Ok(PermutationEnsemble { curves, labels })
}

/// [`permutation_ensemble`] without the recorded labellings.
pub fn permutation_curves(data: &TwoGroupDataset, n_curves: usize, seed: u64) -> Result<CurveSet> {
    permutation_ensemble(data, n_curves, seed).map(|e| e.curves)
}

fn permuted_row(
    data: &TwoGroupDataset,
    seed: u64,
    row: usize,
    retry_cap: usize,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    let mut labels = data.labels().to_vec();
    for _ in 0..retry_cap {
        labels.shuffle(&mut rng);
        match t_curve(data.responses(), &labels, data.grid().len()) {
            Ok(t) => return Ok((t, labels)),
            Err(Error::ZeroVariance { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryCapExhausted {
        row,
        attempts: retry_cap,
    })
}
