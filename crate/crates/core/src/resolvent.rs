//! α-times resolvent families `S_α(t)` of a [`SpectralOperator`].
//!
//! On the eigenbasis every construction reduces to a scalar factor per mode:
//!
//! * diagonal: `E_α(λ_k t^α)`;
//! * Yosida: `E_α(μ_k t^α)` with `μ_k` the Yosida eigenvalues for parameter `n`;
//! * subordinated: `∫₀^∞ Φ_γ(τ) E_β(λ_k τ^β t^α) dτ`, `γ = α/β`, i.e. the
//!   order-`β` family averaged against the Wright density after the
//!   substitution `s = τ t^γ`.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::fracquad::{ProductWeights, TimeGrid};
use crate::operators::{HilbertVec, SpectralOperator};
use crate::quad;
use crate::specfun::{mittag_leffler, mittag_leffler_unchecked, wright_phi_unchecked};

/// Mass of the Wright density allowed beyond the subordination cut-off.
const SUBORDINATION_TAIL_MASS: f64 = 1e-10;
const SUBORDINATION_FIRST_PANEL: f64 = 4.0;
const SUBORDINATION_MAX_DOUBLINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Diagonal,
    /// Subordination from the order-`beta` family, `alpha < beta ≤ 2`.
    Subordinated { beta: f64 },
    /// Resolvent family of the Yosida approximant `A_n`.
    Yosida { n: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSpec {
    alpha: f64,
    method: Method,
    operator: SpectralOperator,
    // eigenvalues the scalar factors are built from (μ_k for Yosida)
    symbols: Vec<f64>,
}

impl ResolventSpec {
    pub fn new(alpha: f64, method: Method, operator: SpectralOperator) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!(
                "alpha = {alpha} must lie in (0, 2]; larger orders force a bounded generator"
            )));
        }
        let symbols = match method {
            Method::Diagonal => operator.eigenvalues().to_vec(),
            Method::Subordinated { beta } => {
                if !(alpha < beta && beta <= 2.0) {
                    return Err(Error::domain(format!(
                        "subordination needs alpha < beta <= 2, got alpha = {alpha}, beta = {beta}"
                    )));
                }
                operator.eigenvalues().to_vec()
            }
            Method::Yosida { n } => operator.yosida(n)?.eigenvalues().to_vec(),
        };
        Ok(Self {
            alpha,
            method,
            operator,
            symbols,
        })
    }

    pub fn diagonal(alpha: f64, operator: SpectralOperator) -> Result<Self> {
        Self::new(alpha, Method::Diagonal, operator)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn operator(&self) -> &SpectralOperator {
        &self.operator
    }

    /// Eigenvalues of the generator this family belongs to (`A` or `A_n`).
    pub fn generator_eigenvalues(&self) -> &[f64] {
        &self.symbols
    }

    pub fn modes(&self) -> usize {
        self.symbols.len()
    }

    /// Scalar factor of `S_α(t)` on mode `k`.
    pub fn mode_factor(&self, k: usize, t: f64) -> Result<f64> {
        let lambda = *self.symbols.get(k).ok_or(Error::Index {
            index: k,
            len: self.symbols.len(),
        })?;
        if !(t >= 0.0) {
            return Err(Error::domain(format!("time t = {t} must be >= 0")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        match self.method {
            Method::Diagonal | Method::Yosida { .. } => {
                mittag_leffler(self.alpha, lambda * t.powf(self.alpha))
            }
            Method::Subordinated { beta } => subordinated_factor(self.alpha, beta, lambda, t),
        }
    }

    /// Diagonal of `S_α(t)`.
    pub fn factors(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.modes()).map(|k| self.mode_factor(k, t)).collect()
    }

    /// `S_α(t) x`.
    pub fn apply(&self, t: f64, x: &HilbertVec) -> Result<HilbertVec> {
        if x.dim() != self.modes() {
            return Err(Error::Dimension {
                expected: self.modes(),
                found: x.dim(),
            });
        }
        let f = self.factors(t)?;
        Ok(f.iter().zip(x.iter()).map(|(a, b)| a * b).collect::<Vec<_>>().into())
    }

    /// Factors at every grid node, computed once.
    pub fn tabulate(&self, grid: &TimeGrid) -> Result<ResolventTable> {
        let factors = grid
            .nodes()
            .map(|t| self.factors(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolventTable {
            grid: *grid,
            modes: self.modes(),
            factors,
        })
    }
}

/// `∫₀^∞ Φ_γ(τ) E_β(λ τ^β t^α) dτ` on doubling panels until the Wright
/// mass of the newest panel drops below [`SUBORDINATION_TAIL_MASS`].
fn subordinated_factor(alpha: f64, beta: f64, lambda: f64, t: f64) -> Result<f64> {
    let gamma = alpha / beta;
    let scale = lambda * t.powf(alpha);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let density = |tau: f64| match wright_phi_unchecked(gamma, tau) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let integrand = |tau: f64| density(tau) * mittag_leffler_unchecked(beta, scale * tau.powf(beta));

    let mut total = 0.0;
    let (mut lo, mut hi) = (0.0, SUBORDINATION_FIRST_PANEL);
    for _ in 0..SUBORDINATION_MAX_DOUBLINGS {
        let piece = quad::integrate(integrand, lo, hi, 1e-13, 0.0);
        let mass = quad::integrate(density, lo, hi, 1e-14, 0.0);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        total += piece?;
        if lo > 0.0 && mass? < SUBORDINATION_TAIL_MASS {
            return Ok(total);
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::Quadrature(format!(
        "subordination integral for alpha = {alpha}, beta = {beta}, t = {t} did not reach its tail"
    )))
}

/// `S_α(t_i)` diagonals tabulated on a grid.
#[derive(Debug, Clone)]
pub struct ResolventTable {
    grid: TimeGrid,
    modes: usize,
    factors: Vec<Vec<f64>>,
}

impl ResolventTable {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Factor of mode `k` at node `i`.
    pub fn factor(&self, i: usize, k: usize) -> f64 {
        self.factors[i][k]
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.factors[i]
    }
}

/// `r(t_i) = |S_α(t_i)x - x - A (g_α ⋆ S_α(·)x)(t_i)|` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualProfile {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ResidualProfile {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn resolvent_equation_residual(
    spec: &ResolventSpec,
    grid: &TimeGrid,
    x: &HilbertVec,
) -> Result<ResidualProfile> {
    if x.dim() != spec.modes() {
        return Err(Error::Dimension {
            expected: spec.modes(),
            found: x.dim(),
        });
    }
    let table = spec.tabulate(grid)?;
    let weights = ProductWeights::new(spec.alpha(), *grid)?;
    let n = grid.n_steps();
    let mut sq = vec![0.0; n + 1];
    for (k, &lambda) in spec.generator_eigenvalues().iter().enumerate() {
        let path: Vec<f64> = (0..=n).map(|i| table.factor(i, k) * x[k]).collect();
        let conv = weights.convolve_all(&path)?;
        for i in 0..=n {
            let r = path[i] - x[k] - lambda * conv[i];
            sq[i] += r * r;
        }
    }
    Ok(ResidualProfile {
        times: grid.nodes().collect(),
        residuals: sq.into_iter().map(f64::sqrt).collect(),
    })
}

/// Sup-norm distance between the Yosida-approximated and exact families.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub n_ladder: Vec<f64>,
    pub sup_errors: Vec<f64>,
    pub uniform_grid: TimeGrid,
    /// `sup |E_α(μ_k t^α)|` over the grid, modes and ladder.
    pub max_yosida_factor: f64,
}

impl ConvergenceReport {
    /// Errors weakly decrease along the ladder, up to `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.sup_errors.windows(2).all(|w| w[1] <= slack * w[0])
    }

    /// The contraction bound `||S_{α,n}(t)|| ≤ 1` holds on the grid.
    pub fn is_bounded(&self) -> bool {
        self.max_yosida_factor <= 1.0 + 1e-12
    }

    /// Ratios `e_i / e_{i+1}` between consecutive ladder entries.
    pub fn decay_factors(&self) -> Vec<f64> {
        self.sup_errors.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

pub fn convergence_report(
    alpha: f64,
    operator: &SpectralOperator,
    n_ladder: &[f64],
    grid: &TimeGrid,
    test_vectors: &[HilbertVec],
) -> Result<ConvergenceReport> {
    let exact = ResolventSpec::diagonal(alpha, operator.clone())?.tabulate(grid)?;
    let mut sup_errors = Vec::with_capacity(n_ladder.len());
    let mut max_factor: f64 = 0.0;
    for &n in n_ladder {
        let approx = ResolventSpec::new(alpha, Method::Yosida { n }, operator.clone())?.tabulate(grid)?;
        let mut sup: f64 = 0.0;
        for i in 0..=grid.n_steps() {
            max_factor = approx.node(i).iter().fold(max_factor, |m, f| m.max(f.abs()));
            for x in test_vectors {
                if x.dim() != operator.modes() {
                    return Err(Error::Dimension {
                        expected: operator.modes(),
                        found: x.dim(),
                    });
                }
                let err = x
                    .iter()
                    .enumerate()
                    .map(|(k, v)| ((approx.factor(i, k) - exact.factor(i, k)) * v).powi(2))
                    .sum::<f64>()
                    .sqrt();
                sup = sup.max(err);
            }
        }
        sup_errors.push(sup);
    }
    Ok(ConvergenceReport {
        alpha,
        n_ladder: n_ladder.to_vec(),
        sup_errors,
        uniform_grid: *grid,
        max_yosida_factor: max_factor,
    })
}

/// Empirical exponential bound `||S_α(t)|| ≤ M e^{ωt}` at `ω = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub m_emp: f64,
    pub omega_emp: f64,
    /// `max_t |s_k(t)|` for each mode.
    pub per_mode_max: Vec<f64>,
}

pub fn growth_bound_fit(spec: &ResolventSpec, grid: &TimeGrid) -> Result<GrowthFit> {
    let table = spec.tabulate(grid)?;
    let mut per_mode_max = vec![0.0f64; spec.modes()];
    for i in 0..=grid.n_steps() {
        for (k, m) in per_mode_max.iter_mut().enumerate() {
            *m = m.max(table.factor(i, k).abs());
        }
    }
    Ok(GrowthFit {
        m_emp: per_mode_max.iter().copied().fold(0.0, f64::max),
        omega_emp: 0.0,
        per_mode_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(lambda: f64) -> SpectralOperator {
        SpectralOperator::new(vec![lambda], "scalar").unwrap()
    }

    fn one() -> HilbertVec {
        vec![1.0].into()
    }

    #[test]
    fn apply_examples() {
        let s = ResolventSpec::diagonal(1.0, scalar(-1.0)).unwrap();
        assert!((s.apply(1.0, &one()).unwrap()[0] - 0.36787944117144233).abs() < 1e-16);
        let s = ResolventSpec::diagonal(2.0, scalar(-4.0)).unwrap();
        assert!((s.apply(0.5, &one()).unwrap()[0] - 0.5403023058681398).abs() < 1e-12);
        let s = ResolventSpec::diagonal(0.5, scalar(-1.0)).unwrap();
        assert!((s.apply(1.0, &one()).unwrap()[0] - 0.4275835761558070).abs() < 1e-12);
        let s = ResolventSpec::new(0.5, Method::Subordinated { beta: 1.0 }, scalar(-1.0)).unwrap();
        assert!((s.apply(1.0, &one()).unwrap()[0] - 0.4275835761558070).abs() < 1e-6);
    }

    #[test]
    fn identity_at_zero_for_every_method() {
        let op = SpectralOperator::dirichlet_laplacian(3, 1.0).unwrap();
        let x: HilbertVec = vec![0.3, -1.0, 2.0].into();
        for method in [Method::Diagonal, Method::Subordinated { beta: 2.0 }, Method::Yosida { n: 50.0 }] {
            let s = ResolventSpec::new(0.7, method, op.clone()).unwrap();
            assert_eq!(s.apply(0.0, &x).unwrap(), x);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ResolventSpec::diagonal(2.5, scalar(-1.0)).is_err());
        assert!(ResolventSpec::new(1.0, Method::Subordinated { beta: 1.0 }, scalar(-1.0)).is_err());
        assert!(ResolventSpec::new(1.0, Method::Subordinated { beta: 2.5 }, scalar(-1.0)).is_err());
        assert!(ResolventSpec::new(1.0, Method::Yosida { n: -1.0 }, scalar(-1.0)).is_err());
        let s = ResolventSpec::diagonal(1.0, scalar(-1.0)).unwrap();
        assert!(matches!(s.apply(1.0, &vec![1.0, 2.0].into()), Err(Error::Dimension { .. })));
        assert!(s.apply(-1.0, &one()).is_err());
    }

    #[test]
    fn commutes_with_operator() {
        let op = SpectralOperator::dirichlet_laplacian(4, 1.0).unwrap();
        let x: HilbertVec = vec![1.0, -0.5, 0.25, 2.0].into();
        for &alpha in &[0.5, 1.0, 1.5, 2.0] {
            let s = ResolventSpec::diagonal(alpha, op.clone()).unwrap();
            for &t in &[0.1, 0.7, 1.3] {
                let lhs = op.apply(&s.apply(t, &x).unwrap()).unwrap();
                let rhs = s.apply(t, &op.apply(&x).unwrap()).unwrap();
                assert!((&lhs - &rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn strong_continuity_at_origin() {
        let op = SpectralOperator::dirichlet_laplacian(2, 1.0).unwrap();
        let x: HilbertVec = vec![1.0, 1.0].into();
        let ax = op.apply(&x).unwrap().norm();
        for &alpha in &[0.5, 1.0, 1.5, 2.0] {
            let s = ResolventSpec::diagonal(alpha, op.clone()).unwrap();
            let mut prev = f64::INFINITY;
            for k in 4..16 {
                let dt = 2f64.powi(-k);
                let d = (&s.apply(dt, &x).unwrap() - &x).norm();
                // |E_α(-z) - 1| ≤ z / Γ(α+1) for z ≥ 0 small
                assert!(d <= 1.2 * dt.powf(alpha) * ax, "alpha {alpha} dt {dt}: {d}");
                assert!(d < prev);
                prev = d;
            }
        }
    }

    #[test]
    fn resolvent_residual_examples() {
        let s = ResolventSpec::diagonal(1.0, scalar(-1.0)).unwrap();
        let r256 = resolvent_equation_residual(&s, &TimeGrid::new(2.0, 256).unwrap(), &one()).unwrap();
        let r512 = resolvent_equation_residual(&s, &TimeGrid::new(2.0, 512).unwrap(), &one()).unwrap();
        assert_eq!(r256.residuals[0], 0.0);
        assert!(r256.max() <= 5e-4);
        assert!(r256.max() / r512.max() >= 1.9);

        let s = ResolventSpec::diagonal(0.5, scalar(-1.0)).unwrap();
        let coarse = resolvent_equation_residual(&s, &TimeGrid::new(1.0, 256).unwrap(), &one()).unwrap();
        let fine = resolvent_equation_residual(&s, &TimeGrid::new(1.0, 512).unwrap(), &one()).unwrap();
        assert!(coarse.max() / fine.max() >= 1.5);
    }

    #[test]
    fn convergence_examples() {
        let grid = TimeGrid::new(2.0, 200).unwrap();
        let r = convergence_report(1.0, &scalar(-1.0), &[10.0], &grid, &[one()]).unwrap();
        assert!(r.sup_errors[0] <= 0.1);
        assert!(r.is_bounded());

        let zero = convergence_report(0.5, &scalar(-1.0), &[10.0, 100.0], &grid, &[vec![0.0].into()]).unwrap();
        assert!(zero.sup_errors.iter().all(|&e| e == 0.0));

        let r = convergence_report(0.5, &scalar(-1.0), &[10.0, 100.0, 1000.0], &grid, &[one()]).unwrap();
        assert!(r.is_monotone(1.05));
        for f in r.decay_factors() {
            assert!((7.0..=12.0).contains(&f), "{f}");
        }
    }

    #[test]
    fn growth_fit_examples() {
        let grid = TimeGrid::new(10.0, 400).unwrap();
        let op = SpectralOperator::dirichlet_laplacian(3, 1.0).unwrap();
        let fit = growth_bound_fit(&ResolventSpec::diagonal(1.0, op.clone()).unwrap(), &grid).unwrap();
        assert!(fit.m_emp <= 1.0);
        let fit = growth_bound_fit(&ResolventSpec::diagonal(0.5, op).unwrap(), &grid).unwrap();
        assert!(fit.m_emp <= 1.0);
        let fit = growth_bound_fit(&ResolventSpec::diagonal(2.0, scalar(-4.0)).unwrap(), &grid).unwrap();
        assert_eq!(fit.m_emp, 1.0);
        assert_eq!(fit.omega_emp, 0.0);
    }

    #[test]
    fn interpolates_semigroup_and_cosine() {
        let x = one();
        let values: Vec<f64> = [1.0, 1.5, 2.0]
            .iter()
            .map(|&a| ResolventSpec::diagonal(a, scalar(-1.0)).unwrap().apply(1.0, &x).unwrap()[0])
            .collect();
        assert!((values[0] - (-1f64).exp()).abs() < 1e-15);
        assert!((values[2] - 1f64.cos()).abs() < 1e-12);
        assert!(values.iter().all(|v| v.is_finite()));
    }
}
