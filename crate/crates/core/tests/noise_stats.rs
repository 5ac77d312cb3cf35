use stochvolterra_core::fracquad::TimeGrid;
use stochvolterra_core::noise::{NoiseModel, Psi, WienerIncrements};

const PATHS: u64 = 10_000;

#[test]
fn per_mode_variance_within_band() {
    let model = NoiseModel::new(vec![1.0], Psi::Constant(vec![1.0]), 2024).unwrap();
    let grid = TimeGrid::new(0.04, 4).unwrap();
    let samples: Vec<f64> = (0..PATHS)
        .map(|p| WienerIncrements::generate(&model, &grid, p).unwrap().get(0, 0))
        .collect();
    let mean = samples.iter().sum::<f64>() / PATHS as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (PATHS - 1) as f64;
    assert!((0.0094..=0.0106).contains(&var), "variance {var}");
}

#[test]
fn variance_scales_with_covariance_and_step() {
    let q = [2.0, 0.5, 0.1];
    let model = NoiseModel::new(q.to_vec(), Psi::Constant(vec![1.0; 3]), 11).unwrap();
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let m = 2_000u64;
    let mut sums = [0.0f64; 3];
    for p in 0..m {
        let w = WienerIncrements::generate(&model, &grid, p).unwrap();
        for i in 0..grid.n_steps() {
            for (k, s) in sums.iter_mut().enumerate() {
                *s += w.get(i, k).powi(2);
            }
        }
    }
    let count = (m as usize * grid.n_steps()) as f64;
    for (k, s) in sums.iter().enumerate() {
        let target = q[k] * grid.dt();
        let se = target * (2.0 / count).sqrt();
        assert!((s / count - target).abs() <= 4.0 * se, "mode {k}");
    }
}

#[test]
fn cross_mode_and_cross_step_correlations_vanish() {
    let model = NoiseModel::new(vec![1.0, 1.0], Psi::Constant(vec![1.0, 1.0]), 77).unwrap();
    let grid = TimeGrid::new(1.0, 2).unwrap();
    let draws: Vec<[f64; 3]> = (0..PATHS)
        .map(|p| {
            let w = WienerIncrements::generate(&model, &grid, p).unwrap();
            [w.get(0, 0), w.get(0, 1), w.get(1, 0)]
        })
        .collect();
    let corr = |a: usize, b: usize| {
        let n = draws.len() as f64;
        let ma = draws.iter().map(|d| d[a]).sum::<f64>() / n;
        let mb = draws.iter().map(|d| d[b]).sum::<f64>() / n;
        let cov = draws.iter().map(|d| (d[a] - ma) * (d[b] - mb)).sum::<f64>();
        let va = draws.iter().map(|d| (d[a] - ma).powi(2)).sum::<f64>();
        let vb = draws.iter().map(|d| (d[b] - mb).powi(2)).sum::<f64>();
        cov / (va * vb).sqrt()
    };
    let band = 4.0 / (PATHS as f64).sqrt();
    assert!(corr(0, 1).abs() < band, "cross-mode {}", corr(0, 1));
    assert!(corr(0, 2).abs() < band, "cross-step {}", corr(0, 2));
}
