//! Distribution-free global envelope tests and pointwise adjusted p-values
//! for functional data.
//!
//! Given `M` statistic curves on a common grid (curve 0 observed, the rest
//! from permuted data), this crate computes pointwise ranks, the min-rank and
//! extreme-rank-length (ERL) depths, the global envelope test p-value, and
//! four pointwise p-value families: raw, single-step, step-down and
//! ERL-adjusted. All p-values are exact fractions `k/M`.
//!
//! ```
//! use envadj::{analyze, validate_curveset, Direction, Grid, PValue, TiePolicy};
//!
//! let raw = vec![
//!     vec![5.0, 1.0, 4.0],
//!     vec![3.0, 2.0, 3.0],
//!     vec![1.0, 3.0, 2.0],
//!     vec![2.0, 4.0, 1.0],
//! ];
//! let grid = Grid::new(vec![1.0, 2.0, 3.0]).unwrap();
//! let curves = validate_curveset(&raw, grid, TiePolicy::Strict).unwrap();
//! let report = analyze(&curves, Direction::HighIsExtreme);
//! assert_eq!(report.global_minrank, PValue::new(2, 4));
//! assert_eq!(report.global_erl, PValue::new(1, 4));
//! ```

pub mod adjust;
pub mod curves;
pub mod envelope;
pub mod error;
pub mod io;
pub mod permute;
pub mod plot;
pub mod pvalue;
pub mod ranks;
pub mod sim;

pub use adjust::{
    analyze, erl_adjusted, raw_pvalues, single_step, single_step_graphical, step_down,
    step_down_pvalues, PvalueReport, StepdownLevel, StepdownTrace,
};
pub use curves::{pointwise_t, validate_curveset, CurveSet, Direction, Grid, TiePolicy, TwoGroupDataset};
pub use envelope::{build_envelope, exits_at, global_p, Envelope, KappaTable};
pub use error::{Error, Result};
pub use permute::{permutation_curves, permutation_ensemble, PermutationEnsemble};
pub use pvalue::PValue;
pub use ranks::{erl_depths, minrank_depths, pointwise_ranks, DepthKind, DepthVector, RankMatrix};
pub use sim::{fwer_experiment, NoiseModel, SimConfig, SimResult};
