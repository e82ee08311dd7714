//! Raw, single-step, step-down and ERL-adjusted pointwise p-values.

use crate::curves::{CurveSet, Direction, Grid};
use crate::envelope::{envelope_sweep, first_exit_levels, global_p, KappaTable};
use crate::pvalue::PValue;
use crate::ranks::{erl_depths, minrank_depths, pointwise_ranks, DepthVector, RankMatrix};

/// Global and pointwise p-values for one curve ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct PvalueReport {
    pub grid: Grid,
    pub raw: Vec<PValue>,
    pub single_step: Vec<PValue>,
    pub step_down: Vec<PValue>,
    pub erl: Vec<PValue>,
    pub global_minrank: PValue,
    pub global_erl: PValue,
    pub n_curves: usize,
    pub direction: Direction,
}

/// Runs the full pipeline: ranks, both depths, global and pointwise p-values.
pub fn analyze(curves: &CurveSet, direction: Direction) -> PvalueReport {
    let ranks = pointwise_ranks(curves, direction);
    let minrank = minrank_depths(&ranks);
    let erl = erl_depths(&ranks);
    PvalueReport {
        grid: curves.grid().clone(),
        raw: raw_pvalues(&ranks),
        single_step: single_step(&ranks, &minrank),
        step_down: step_down_pvalues(&ranks),
        erl: erl_adjusted(curves, &erl, direction),
        global_minrank: global_p(&minrank),
        global_erl: global_p(&erl),
        n_curves: curves.n_curves(),
        direction,
    }
}

/// `p(s) = R*_0(s) / M`.
pub fn raw_pvalues(ranks: &RankMatrix) -> Vec<PValue> {
    let m = ranks.n_curves();
    ranks
        .observed()
        .iter()
        .map(|&r| PValue::new(r as usize, m))
        .collect()
}

/// `(#{m >= 1 : R_m <= R*_0(s)} + 1) / M`.
pub fn single_step(ranks: &RankMatrix, minrank: &DepthVector) -> Vec<PValue> {
    let m_total = ranks.n_curves();
    assert_eq!(minrank.len(), m_total, "depths and ranks disagree on M");
    // at_most[r] = #{m >= 1 : R_m <= r}
    let mut at_most = vec![0usize; m_total + 1];
    for &d in &minrank.as_slice()[1..] {
        at_most[d as usize] += 1;
    }
    for r in 1..=m_total {
        at_most[r] += at_most[r - 1];
    }
    ranks
        .observed()
        .iter()
        .map(|&r| PValue::new(at_most[r as usize] + 1, m_total))
        .collect()
}

/// Single-step adjustment read off the min-rank envelopes: the smallest
/// `kappa_j / M` whose envelope the observed curve exits at `s`.
pub fn single_step_graphical(
    curves: &CurveSet,
    minrank: &DepthVector,
    direction: Direction,
) -> Vec<PValue> {
    envelope_sweep(curves, minrank, direction)
}

/// Smallest `kappa_j / M` (kappa from ERL depths) whose ERL envelope the
/// observed curve exits at `s`.
pub fn erl_adjusted(curves: &CurveSet, erl: &DepthVector, direction: Direction) -> Vec<PValue> {
    let kappa = KappaTable::new(erl);
    first_exit_levels(curves, erl, direction)
        .into_iter()
        .map(|j| kappa.pvalue(j))
        .collect()
}

/// One level `i` of the step-down procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepdownLevel {
    pub level: u32,
    /// `S_i = {s : R*_0(s) >= i}`, ascending grid indices.
    pub active: Vec<usize>,
    /// `R_{m;S_i}` for every curve `m`, observed included.
    pub restricted_depths: Vec<u32>,
    /// `(#{m >= 1 : R_{m;S_i} <= i} + 1) / M`.
    pub pvalue: PValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepdownTrace {
    pub levels: Vec<StepdownLevel>,
}

/// Step-down adjusted p-values with an audit trace of every level.
pub fn step_down(ranks: &RankMatrix) -> (Vec<PValue>, StepdownTrace) {
    let mut trace = StepdownTrace::default();
    let p = step_down_impl(ranks, Some(&mut trace));
    (p, trace)
}

/// Step-down adjusted p-values without the trace.
pub fn step_down_pvalues(ranks: &RankMatrix) -> Vec<PValue> {
    step_down_impl(ranks, None)
}

// S_i shrinks as i grows, so levels are visited from the top down while
// columns are added to the active set and the restricted row minima updated.
fn step_down_impl(ranks: &RankMatrix, mut trace: Option<&mut StepdownTrace>) -> Vec<PValue> {
    let m_total = ranks.n_curves();
    let observed = ranks.observed();
    let top = *observed.iter().max().expect("grid is nonempty") as usize;

    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (s, &r) in observed.iter().enumerate() {
        by_level[r as usize].push(s);
    }

    let mut restricted = vec![u32::MAX; m_total];
    let mut active: Vec<usize> = Vec::new();
    let mut level_count = vec![0usize; top + 1];
    for i in (1..=top).rev() {
        for &s in &by_level[i] {
            for (m, slot) in restricted.iter_mut().enumerate() {
                *slot = (*slot).min(ranks.rank(m, s));
            }
        }
        if trace.is_some() {
            active.extend_from_slice(&by_level[i]);
            active.sort_unstable();
        }
        assert!(
            restricted[0] != u32::MAX,
            "active set S_{i} is empty"
        );
        let count = restricted[1..].iter().filter(|&&d| d as usize <= i).count() + 1;
        level_count[i] = count;
        if let Some(t) = trace.as_deref_mut() {
            t.levels.push(StepdownLevel {
                level: i as u32,
                active: active.clone(),
                restricted_depths: restricted.clone(),
                pvalue: PValue::new(count, m_total),
            });
        }
    }
    if let Some(t) = trace {
        t.levels.reverse();
    }

    // running maximum over i = 1..=R*_0(s)
    let mut best = vec![0usize; top + 1];
    for i in 1..=top {
        best[i] = best[i - 1].max(level_count[i]);
    }
    observed
        .iter()
        .map(|&r| PValue::new(best[r as usize], m_total))
        .collect()
}

/// Min-rank and ERL depth vectors for `ranks`.
pub fn depths(ranks: &RankMatrix) -> (DepthVector, DepthVector) {
    (minrank_depths(ranks), erl_depths(ranks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{validate_curveset, TiePolicy};
    use proptest::prelude::*;

    fn pv(v: &[usize], m: usize) -> Vec<PValue> {
        v.iter().map(|&k| PValue::new(k, m)).collect()
    }

    fn fixture_a() -> CurveSet {
        let raw = vec![
            vec![5.0, 1.0, 4.0],
            vec![3.0, 2.0, 3.0],
            vec![1.0, 3.0, 2.0],
            vec![2.0, 4.0, 1.0],
        ];
        validate_curveset(&raw, Grid::new(vec![1.0, 2.0, 3.0]).unwrap(), TiePolicy::Strict).unwrap()
    }

    #[test]
    fn fixture_a_every_family() {
        let curves = fixture_a();
        let ranks = pointwise_ranks(&curves, Direction::HighIsExtreme);
        let (minrank, erl) = depths(&ranks);
        assert_eq!(raw_pvalues(&ranks), pv(&[1, 4, 1], 4));
        assert_eq!(single_step(&ranks, &minrank), pv(&[2, 4, 2], 4));
        assert_eq!(
            single_step_graphical(&curves, &minrank, Direction::HighIsExtreme),
            pv(&[2, 4, 2], 4)
        );
        assert_eq!(step_down_pvalues(&ranks), pv(&[2, 4, 2], 4));
        assert_eq!(
            erl_adjusted(&curves, &erl, Direction::HighIsExtreme),
            pv(&[1, 4, 1], 4)
        );
    }

    #[test]
    fn fixture_a_stepdown_trace() {
        let ranks = pointwise_ranks(&fixture_a(), Direction::HighIsExtreme);
        let (p, trace) = step_down(&ranks);
        assert_eq!(p, pv(&[2, 4, 2], 4));
        let levels: Vec<_> = trace.levels.iter().map(|l| l.level).collect();
        assert_eq!(levels, vec![1, 2, 3, 4]);
        assert_eq!(trace.levels[0].active, vec![0, 1, 2]);
        assert_eq!(trace.levels[0].restricted_depths, vec![1, 2, 2, 1]);
        assert_eq!(trace.levels[0].pvalue, PValue::new(2, 4));
        assert_eq!(trace.levels[1].active, vec![1]);
        assert_eq!(&trace.levels[1].restricted_depths[1..], &[3, 2, 1]);
        assert_eq!(trace.levels[1].pvalue, PValue::new(3, 4));
        assert_eq!(trace.levels[2].pvalue, PValue::new(4, 4));
        assert_eq!(trace.levels[3].pvalue, PValue::new(4, 4));
    }

    #[test]
    fn observed_most_extreme_everywhere() {
        let raw = vec![vec![9.0, 9.0], vec![1.0, 2.0], vec![2.0, 1.0]];
        let curves =
            validate_curveset(&raw, Grid::new(vec![0.0, 1.0]).unwrap(), TiePolicy::Strict).unwrap();
        let ranks = pointwise_ranks(&curves, Direction::HighIsExtreme);
        assert_eq!(raw_pvalues(&ranks), pv(&[1, 1], 3));
    }

    #[test]
    fn graphical_can_undercut_the_rank_formula() {
        // T1 is extreme at s=0, T2 is second at s=1 behind T0; both are
        // excluded from the level-1 envelope even though only T1 beats T0 at s=0
        let raw = vec![
            vec![3.0, 4.0],
            vec![4.0, 2.0],
            vec![2.0, 3.0],
            vec![1.0, 1.0],
        ];
        let curves =
            validate_curveset(&raw, Grid::new(vec![0.0, 1.0]).unwrap(), TiePolicy::Strict).unwrap();
        let ranks = pointwise_ranks(&curves, Direction::HighIsExtreme);
        let minrank = minrank_depths(&ranks);
        assert_eq!(minrank.as_slice(), &[1, 1, 2, 4]);
        assert_eq!(single_step(&ranks, &minrank), pv(&[3, 2], 4));
        assert_eq!(
            single_step_graphical(&curves, &minrank, Direction::HighIsExtreme),
            pv(&[2, 2], 4)
        );
    }

    fn random_curves(m: usize, g: usize, seed: u64) -> CurveSet {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..g).map(|_| rng.gen::<f64>()).collect())
            .collect();
        validate_curveset(&raw, Grid::linspace(0.0, 1.0, g).unwrap(), TiePolicy::Strict).unwrap()
    }

    /// Step-down p-values straight from the definition, one restricted
    /// minimum per (s, i, m).
    fn stepdown_oracle(ranks: &RankMatrix) -> Vec<PValue> {
        let m_total = ranks.n_curves();
        let r0 = ranks.observed();
        (0..ranks.n_points())
            .map(|s| {
                let mut best = 0;
                for i in 1..=r0[s] {
                    let active: Vec<usize> =
                        (0..ranks.n_points()).filter(|&u| r0[u] >= i).collect();
                    let count = (1..m_total)
                        .filter(|&m| active.iter().map(|&u| ranks.rank(m, u)).min().unwrap() <= i)
                        .count()
                        + 1;
                    best = best.max(count);
                }
                PValue::new(best, m_total)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn stepdown_matches_definition(m in 2usize..=12, g in 1usize..=8, seed: u64, dir in 0usize..3) {
            let ranks = pointwise_ranks(&random_curves(m, g, seed), Direction::ALL[dir]);
            prop_assert_eq!(step_down_pvalues(&ranks), stepdown_oracle(&ranks));
            let (p, trace) = step_down(&ranks);
            prop_assert_eq!(&p, &stepdown_oracle(&ranks));
            for w in trace.levels.windows(2) {
                prop_assert!(w[1].active.iter().all(|s| w[0].active.contains(s)));
                for k in 0..m {
                    prop_assert!(w[0].restricted_depths[k] <= w[1].restricted_depths[k]);
                }
            }
        }

        #[test]
        fn dominance_and_order(m in 2usize..=12, g in 1usize..=8, seed: u64, dir in 0usize..3) {
            let dir = Direction::ALL[dir];
            let curves = random_curves(m, g, seed);
            let report = analyze(&curves, dir);
            let ranks = pointwise_ranks(&curves, dir);
            let minrank = minrank_depths(&ranks);
            let graphical = single_step_graphical(&curves, &minrank, dir);
            for s in 0..g {
                prop_assert!(report.step_down[s] <= report.single_step[s]);
                prop_assert!(report.erl[s] <= report.single_step[s]);
                prop_assert!(report.raw[s] <= report.single_step[s]);
                prop_assert!(graphical[s] <= report.single_step[s]);
                if report.raw[s] == PValue::new(1, m) {
                    prop_assert_eq!(report.step_down[s], report.single_step[s]);
                }
                for t in 0..g {
                    if report.raw[s] <= report.raw[t] {
                        prop_assert!(report.single_step[s] <= report.single_step[t]);
                        prop_assert!(report.step_down[s] <= report.step_down[t]);
                    }
                }
            }
            prop_assert_eq!(*report.single_step.iter().min().unwrap(), report.global_minrank);
        }

        #[test]
        fn invariant_to_relabelling_permuted_curves(m in 3usize..=10, g in 1usize..=6, seed: u64, dir in 0usize..3) {
            let dir = Direction::ALL[dir];
            let curves = random_curves(m, g, seed);
            let mut rows = curves.to_rows();
            rows[1..].rotate_left(1);
            let shuffled = validate_curveset(&rows, curves.grid().clone(), TiePolicy::Strict).unwrap();
            prop_assert_eq!(analyze(&curves, dir), analyze(&shuffled, dir));
        }
    }

    #[test]
    fn erl_sweep_agrees_with_closed_form() {
        for seed in 0..200 {
            let curves = random_curves(7, 5, seed);
            for dir in Direction::ALL {
                let ranks = pointwise_ranks(&curves, dir);
                let erl = erl_depths(&ranks);
                assert_eq!(
                    erl_adjusted(&curves, &erl, dir),
                    envelope_sweep(&curves, &erl, dir)
                );
            }
        }
    }
}
