use envadj::{permutation_ensemble, pointwise_t, Grid, TwoGroupDataset};

/// Textbook pooled-variance t from group means and sample variances.
fn textbook_t(values: &[f64], labels: &[bool]) -> f64 {
    let pick = |g: bool| -> Vec<f64> {
        values
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == g)
            .map(|(v, _)| *v)
            .collect()
    };
    let (a, b) = (pick(false), pick(true));
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let sp2 = ((na - 1.0) * var(&a) + (nb - 1.0) * var(&b)) / (na + nb - 2.0);
    (mean(&b) - mean(&a)) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt()
}

fn dataset() -> TwoGroupDataset {
    let grid = Grid::new(vec![0.0, 0.25, 0.5, 0.75]).unwrap();
    let responses = vec![
        vec![0.3, 1.2, -0.4, 0.8],
        vec![1.1, 0.2, 0.5, -0.3],
        vec![-0.6, 0.9, 0.1, 0.4],
        vec![1.9, 2.2, 0.7, 1.0],
        vec![2.4, 1.1, 1.6, 0.2],
        vec![1.3, 1.8, 0.9, 1.5],
    ];
    TwoGroupDataset::new(grid, responses, vec![false, false, false, true, true, true]).unwrap()
}

#[test]
fn permuted_rows_replay_through_independent_statistic() {
    let data = dataset();
    let ens = permutation_ensemble(&data, 50, 2024).unwrap();
    assert_eq!(ens.curves.n_curves(), 50);
    assert_eq!(ens.labels.len(), 50);
    assert_eq!(ens.labels[0], data.labels());
    for (m, labels) in ens.labels.iter().enumerate() {
        assert_eq!(labels.iter().filter(|&&l| l).count(), 3, "row {m} keeps group sizes");
        for s in 0..4 {
            let column: Vec<f64> = data.responses().iter().map(|r| r[s]).collect();
            let expect = textbook_t(&column, labels);
            assert!(
                (ens.curves.value(m, s) - expect).abs() < 1e-12,
                "row {m}, s {s}: {} vs {expect}",
                ens.curves.value(m, s)
            );
        }
    }
}

#[test]
fn observed_row_is_pointwise_t() {
    let data = dataset();
    let ens = permutation_ensemble(&data, 10, 1).unwrap();
    assert_eq!(ens.curves.observed(), pointwise_t(&data).unwrap().as_slice());
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let data = dataset();
    let reference = permutation_ensemble(&data, 200, 77).unwrap().curves;
    for threads in [1, 3] {
        let pool = rayon_pool(threads);
        let curves = pool.install(|| permutation_ensemble(&data, 200, 77).unwrap().curves);
        assert_eq!(curves, reference);
    }
}

fn rayon_pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}
