use stochvolterra_core::operators::SpectralOperator;
use stochvolterra_core::resolvent::{Method, ResolventSpec};

#[test]
fn subordinated_family_matches_diagonal() {
    let op = SpectralOperator::new(vec![-0.5, -1.0, -4.0], "probe").unwrap();
    for &(alpha, beta) in &[(0.5, 1.0), (0.5, 2.0), (1.0, 2.0)] {
        let diag = ResolventSpec::diagonal(alpha, op.clone()).unwrap();
        let sub = ResolventSpec::new(alpha, Method::Subordinated { beta }, op.clone()).unwrap();
        for i in 0..=29 {
            let t = 0.1 + 0.1 * i as f64;
            let d = diag.factors(t).unwrap();
            let s = sub.factors(t).unwrap();
            for (k, (a, b)) in d.iter().zip(&s).enumerate() {
                assert!(
                    (a - b).abs() < 1e-6,
                    "alpha {alpha} beta {beta} t {t} mode {k}: {a} vs {b}"
                );
            }
        }
    }
}
