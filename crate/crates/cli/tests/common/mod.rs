#![allow(dead_code)]

//! Shared helpers for the integration and acceptance tests: a brute-force
//! oracle written straight from the definitions, data generators, and a
//! runner for the `envadj` binary.

use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn envadj(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_envadj"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run envadj")
}

pub fn fixture_a() -> Vec<Vec<f64>> {
    vec![
        vec![5.0, 1.0, 4.0],
        vec![3.0, 2.0, 3.0],
        vec![1.0, 3.0, 2.0],
        vec![2.0, 4.0, 1.0],
    ]
}

pub const FIXTURE_A_CSV: &str = "1,2,3\n5,1,4\n3,2,3\n1,3,2\n2,4,1\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    High,
    Low,
    Two,
}

pub const SIDES: [Side; 3] = [Side::High, Side::Low, Side::Two];

/// Brute-force evaluation of every quantity, counted pair by pair.
/// Fractions are returned as numerators over M.
pub struct Oracle {
    pub m: usize,
    pub g: usize,
    pub ranks: Vec<Vec<usize>>,
    pub minrank: Vec<usize>,
    pub erl: Vec<usize>,
}

impl Oracle {
    pub fn new(t: &[Vec<f64>], side: Side) -> Self {
        let m = t.len();
        let g = t[0].len();
        let ranks: Vec<Vec<usize>> = (0..m)
            .map(|a| {
                (0..g)
                    .map(|s| {
                        let hi = (0..m).filter(|&k| t[k][s] >= t[a][s]).count();
                        let lo = (0..m).filter(|&k| t[k][s] <= t[a][s]).count();
                        match side {
                            Side::High => hi,
                            Side::Low => lo,
                            Side::Two => hi.min(lo),
                        }
                    })
                    .collect()
            })
            .collect();
        let minrank = ranks.iter().map(|r| *r.iter().min().unwrap()).collect();
        let sorted: Vec<Vec<usize>> = ranks
            .iter()
            .map(|r| {
                let mut v = r.clone();
                v.sort();
                v
            })
            .collect();
        let erl = (0..m)
            .map(|a| (0..m).filter(|&b| sorted[b] <= sorted[a]).count())
            .collect();
        Oracle {
            m,
            g,
            ranks,
            minrank,
            erl,
        }
    }

    pub fn kappa(depths: &[usize], j: usize) -> usize {
        depths.iter().filter(|&&d| d <= j).count()
    }

    pub fn global(depths: &[usize]) -> usize {
        (1..depths.len()).filter(|&m| depths[m] <= depths[0]).count() + 1
    }

    pub fn raw(&self) -> Vec<usize> {
        (0..self.g).map(|s| self.ranks[0][s]).collect()
    }

    pub fn single_step(&self) -> Vec<usize> {
        (0..self.g)
            .map(|s| (1..self.m).filter(|&k| self.minrank[k] <= self.ranks[0][s]).count() + 1)
            .collect()
    }

    pub fn step_down(&self) -> Vec<usize> {
        (0..self.g)
            .map(|s| {
                (1..=self.ranks[0][s])
                    .map(|i| {
                        let active: Vec<usize> =
                            (0..self.g).filter(|&u| self.ranks[0][u] >= i).collect();
                        (1..self.m)
                            .filter(|&k| active.iter().map(|&u| self.ranks[k][u]).min().unwrap() <= i)
                            .count()
                            + 1
                    })
                    .max()
                    .unwrap()
            })
            .collect()
    }

    /// Smallest kappa_j whose envelope `{m : depth_m > j}` the observed curve
    /// leaves at each grid point.
    pub fn graphical(&self, t: &[Vec<f64>], depths: &[usize], side: Side) -> Vec<usize> {
        (0..self.g)
            .map(|s| {
                for j in 1..=self.m {
                    let kept: Vec<f64> =
                        (0..self.m).filter(|&k| depths[k] > j).map(|k| t[k][s]).collect();
                    let exits = kept.is_empty() || {
                        let lo = kept.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = kept.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        match side {
                            Side::High => t[0][s] > hi,
                            Side::Low => t[0][s] < lo,
                            Side::Two => t[0][s] > hi || t[0][s] < lo,
                        }
                    };
                    if exits {
                        return Self::kappa(depths, j);
                    }
                }
                unreachable!("level M envelope is empty")
            })
            .collect()
    }
}

/// `m` random curves on `g` points; values drawn from a continuous law, so
/// pointwise ties have probability zero.
pub fn random_ensemble(rng: &mut ChaCha8Rng, m: usize, g: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..g).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// `m` curves whose columns are independent random permutations of `1..=m`.
pub fn random_rank_ensemble(rng: &mut ChaCha8Rng, m: usize, g: usize) -> Vec<Vec<f64>> {
    use rand::seq::SliceRandom;
    let mut t = vec![vec![0.0; g]; m];
    for s in 0..g {
        let mut col: Vec<usize> = (1..=m).collect();
        col.shuffle(rng);
        for k in 0..m {
            t[k][s] = col[k] as f64;
        }
    }
    t
}

/// Wide two-group CSV: `n` subjects per group on `g` points, group 1 shifted
/// by `shift[s]`.
pub fn two_group_csv(n: usize, shift: &[f64], seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = shift.len();
    let mut out = String::from("label");
    for s in 0..g {
        out.push_str(&format!(",{}", s as f64 / (g - 1).max(1) as f64));
    }
    out.push('\n');
    for label in [0, 1] {
        for _ in 0..n {
            out.push_str(&label.to_string());
            for &d in shift {
                let z: f64 = rng.sample(StandardNormal);
                let v = z + if label == 1 { d } else { 0.0 };
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
    }
    out
}

pub fn side_of(d: envadj::Direction) -> Side {
    match d {
        envadj::Direction::HighIsExtreme => Side::High,
        envadj::Direction::LowIsExtreme => Side::Low,
        envadj::Direction::TwoSided => Side::Two,
    }
}
