//! Stochastic convolution `W_α^Ψ(t) = ∫₀ᵗ S_α(t-τ) Ψ(τ) dW(τ)`, the mild
//! solution, and the numerical certificates built on them.
//!
//! Everything runs mode by mode with left-endpoint Itô sums
//! `W(t_m) = Σ_{i<m} S_α(t_m - t_i) Ψ(t_i) ΔW_i` over tabulated resolvent
//! factors. Ensembles are spread over rayon workers by path index and
//! reduced in path order, so the numbers do not depend on the pool size.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fracquad::{ProductWeights, TimeGrid};
use crate::noise::{NoiseModel, WienerIncrements};
use crate::operators::{HilbertVec, SpectralOperator};
use crate::quad;
use crate::resolvent::{Method, ResolventSpec, ResolventTable};
use crate::stats::{mean_and_std_error, CompensatedSum};

/// Values `v(t_i)` on every mode, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePath {
    grid: TimeGrid,
    modes: usize,
    data: Vec<f64>,
}

impl ModePath {
    fn zeros(grid: TimeGrid, modes: usize) -> Self {
        Self {
            grid,
            modes,
            data: vec![0.0; (grid.n_steps() + 1) * modes],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.modes + k]
    }

    fn set(&mut self, i: usize, k: usize, v: f64) {
        self.data[i * self.modes + k] = v;
    }

    /// Coefficients at node `i`.
    pub fn node(&self, i: usize) -> &[f64] {
        &self.data[i * self.modes..(i + 1) * self.modes]
    }

    pub fn state(&self, i: usize) -> HilbertVec {
        self.node(i).to_vec().into()
    }

    /// Time series of mode `k`.
    pub fn mode(&self, k: usize) -> Vec<f64> {
        (0..=self.grid.n_steps()).map(|i| self.get(i, k)).collect()
    }

    /// `|v(t_i)|_H` at every node.
    pub fn norms(&self) -> Vec<f64> {
        (0..=self.grid.n_steps())
            .map(|i| self.node(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }
}

/// A resolvent family and a noise model bound to one grid, with the
/// resolvent factors and `ψ` samples tabulated once.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: ResolventSpec,
    model: NoiseModel,
    grid: TimeGrid,
    table: ResolventTable,
    psi: Vec<Vec<f64>>,
}

impl Simulator {
    pub fn new(spec: &ResolventSpec, model: &NoiseModel, grid: &TimeGrid) -> Result<Self> {
        if spec.modes() != model.modes() {
            return Err(Error::Dimension {
                expected: spec.modes(),
                found: model.modes(),
            });
        }
        Ok(Self {
            spec: spec.clone(),
            model: model.clone(),
            grid: *grid,
            table: spec.tabulate(grid)?,
            psi: model.psi_on_grid(grid)?,
        })
    }

    pub fn spec(&self) -> &ResolventSpec {
        &self.spec
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.spec.modes()
    }

    pub fn increments(&self, path_index: u64) -> Result<WienerIncrements> {
        WienerIncrements::generate(&self.model, &self.grid, path_index)
    }

    fn check_increments(&self, dw: &WienerIncrements) -> Result<()> {
        if dw.n_steps() != self.grid.n_steps() || dw.modes() != self.modes() {
            return Err(Error::Dimension {
                expected: self.grid.n_steps() * self.modes(),
                found: dw.n_steps() * dw.modes(),
            });
        }
        Ok(())
    }

    /// `W(t_m)` for one `m`, in `O(m K)`.
    pub fn convolution_at(&self, dw: &WienerIncrements, m: usize) -> Result<Vec<f64>> {
        self.check_increments(dw)?;
        if m > self.grid.n_steps() {
            return Err(Error::Index {
                index: m,
                len: self.grid.n_steps() + 1,
            });
        }
        let mut out = vec![0.0; self.modes()];
        for i in 0..m {
            let s = self.table.node(m - i);
            for (k, o) in out.iter_mut().enumerate() {
                *o += s[k] * self.psi[i][k] * dw.get(i, k);
            }
        }
        Ok(out)
    }

    /// `W_α^Ψ` at every node.
    pub fn convolution(&self, dw: &WienerIncrements) -> Result<ModePath> {
        self.check_increments(dw)?;
        let (n, modes) = (self.grid.n_steps(), self.modes());
        let mut path = ModePath::zeros(self.grid, modes);
        // forcing term ψ_k(t_i) ΔW_{i,k}
        let kicks: Vec<f64> = (0..n)
            .flat_map(|i| (0..modes).map(move |k| (i, k)))
            .map(|(i, k)| self.psi[i][k] * dw.get(i, k))
            .collect();
        for m in 1..=n {
            for k in 0..modes {
                let mut acc = 0.0;
                for i in 0..m {
                    acc += self.table.factor(m - i, k) * kicks[i * modes + k];
                }
                path.set(m, k, acc);
            }
        }
        Ok(path)
    }

    /// `X(t_m) = S_α(t_m) x0 + W_α^Ψ(t_m)`.
    pub fn mild_solution(&self, dw: &WienerIncrements, x0: &HilbertVec) -> Result<ModePath> {
        if x0.dim() != self.modes() {
            return Err(Error::Dimension {
                expected: self.modes(),
                found: x0.dim(),
            });
        }
        let mut path = self.convolution(dw)?;
        for i in 0..=self.grid.n_steps() {
            let s = self.table.node(i);
            for k in 0..self.modes() {
                let v = s[k] * x0[k] + path.get(i, k);
                path.set(i, k, v);
            }
        }
        Ok(path)
    }

    /// Signed per-mode residual of `W(t) - A(g_α ⋆ W)(t) - ∫₀ᵗ Ψ dW`.
    pub fn strong_residual_components(&self, dw: &WienerIncrements, w: &ModePath) -> Result<ModePath> {
        let weights = ProductWeights::new(self.spec.alpha(), self.grid)?;
        let mut out = ModePath::zeros(self.grid, self.modes());
        for k in 0..self.modes() {
            let r = self.mode_residual(&weights, dw, &w.mode(k), k)?;
            for (i, v) in r.into_iter().enumerate() {
                out.set(i, k, v);
            }
        }
        Ok(out)
    }

    fn mode_residual(
        &self,
        weights: &ProductWeights,
        dw: &WienerIncrements,
        w: &[f64],
        k: usize,
    ) -> Result<Vec<f64>> {
        let lambda = self.spec.generator_eigenvalues()[k];
        let conv = weights.convolve_all(w)?;
        let mut ito = 0.0;
        let mut out = Vec::with_capacity(w.len());
        for (m, (&wm, &cm)) in w.iter().zip(&conv).enumerate() {
            if m > 0 {
                ito += self.psi[m - 1][k] * dw.get(m - 1, k);
            }
            out.push(wm - lambda * cm - ito);
        }
        Ok(out)
    }

    /// `|R(t_m)|_H` from [`Self::strong_residual_components`].
    pub fn strong_residual(&self, dw: &WienerIncrements) -> Result<Vec<f64>> {
        let w = self.convolution(dw)?;
        Ok(self.strong_residual_components(dw, &w)?.norms())
    }

    /// Scalar residual of the weak identity tested against `ξ = e_xi`.
    pub fn weak_residual(&self, dw: &WienerIncrements, xi: usize) -> Result<Vec<f64>> {
        if xi >= self.modes() {
            return Err(Error::Index {
                index: xi,
                len: self.modes(),
            });
        }
        self.check_increments(dw)?;
        // ⟨W(t_m), ξ⟩ only needs the ξ mode of the convolution
        let n = self.grid.n_steps();
        let w: Vec<f64> = (0..=n)
            .map(|m| {
                (0..m)
                    .map(|i| self.table.factor(m - i, xi) * (self.psi[i][xi] * dw.get(i, xi)))
                    .sum()
            })
            .collect();
        let weights = ProductWeights::new(self.spec.alpha(), self.grid)?;
        self.mode_residual(&weights, dw, &w, xi)
    }
}

/// `W_α^Ψ` on one sample path.
pub fn stoch_convolution(
    spec: &ResolventSpec,
    model: &NoiseModel,
    grid: &TimeGrid,
    path_index: u64,
) -> Result<ModePath> {
    let sim = Simulator::new(spec, model, grid)?;
    sim.convolution(&sim.increments(path_index)?)
}

pub fn mild_solution(
    spec: &ResolventSpec,
    model: &NoiseModel,
    grid: &TimeGrid,
    x0: &HilbertVec,
    path_index: u64,
) -> Result<ModePath> {
    let sim = Simulator::new(spec, model, grid)?;
    sim.mild_solution(&sim.increments(path_index)?, x0)
}

pub fn strong_residual(
    spec: &ResolventSpec,
    model: &NoiseModel,
    grid: &TimeGrid,
    path_index: u64,
) -> Result<Vec<f64>> {
    let sim = Simulator::new(spec, model, grid)?;
    sim.strong_residual(&sim.increments(path_index)?)
}

pub fn weak_residual(
    spec: &ResolventSpec,
    model: &NoiseModel,
    grid: &TimeGrid,
    xi_index: usize,
    path_index: u64,
) -> Result<Vec<f64>> {
    let sim = Simulator::new(spec, model, grid)?;
    sim.weak_residual(&sim.increments(path_index)?, xi_index)
}

/// Explicit Euler-Maruyama for `dX = AX dt + Ψ dW` on the given increments.
pub fn euler_maruyama(
    operator: &SpectralOperator,
    model: &NoiseModel,
    grid: &TimeGrid,
    dw: &WienerIncrements,
    x0: &HilbertVec,
) -> Result<ModePath> {
    let modes = operator.modes();
    if model.modes() != modes || x0.dim() != modes || dw.modes() != modes {
        return Err(Error::Dimension {
            expected: modes,
            found: model.modes().max(x0.dim()).max(dw.modes()),
        });
    }
    let psi = model.psi_on_grid(grid)?;
    let h = grid.dt();
    let mut path = ModePath::zeros(*grid, modes);
    let mut x = x0.as_slice().to_vec();
    for (k, v) in x.iter().enumerate() {
        path.set(0, k, *v);
    }
    for (i, psi_i) in psi.iter().take(grid.n_steps()).enumerate() {
        for (k, xk) in x.iter_mut().enumerate() {
            *xk += h * operator.eigenvalues()[k] * *xk + psi_i[k] * dw.get(i, k);
            path.set(i + 1, k, *xk);
        }
    }
    Ok(path)
}

fn check_paths(paths: u64) -> Result<()> {
    if paths == 0 {
        return Err(Error::domain("ensemble needs at least one path"));
    }
    Ok(())
}

/// Runs `f` for every path index on the current rayon pool, in path order.
fn per_path<T: Send>(paths: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..paths).into_par_iter().map(f).collect()
}

/// Node-wise compensated mean of per-path rows.
fn mean_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    let len = rows.first().map_or(0, Vec::len);
    (0..len)
        .map(|i| rows.iter().map(|r| r[i]).collect::<CompensatedSum>().value() / rows.len() as f64)
        .collect()
}

/// Simulated convolution (and optionally mild solution) paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    pub convolution: Vec<ModePath>,
    pub solution: Option<(HilbertVec, Vec<ModePath>)>,
    /// Content hash of the inputs, filled in by callers that have one.
    pub fingerprint: Option<String>,
}

impl PathEnsemble {
    pub fn simulate(
        spec: &ResolventSpec,
        model: &NoiseModel,
        grid: &TimeGrid,
        x0: Option<&HilbertVec>,
        paths: u64,
    ) -> Result<Self> {
        check_paths(paths)?;
        let sim = Simulator::new(spec, model, grid)?;
        let runs = per_path(paths, |p| {
            let dw = sim.increments(p)?;
            let w = sim.convolution(&dw)?;
            let x = x0.map(|x0| sim.mild_solution(&dw, x0)).transpose()?;
            Ok((w, x))
        })?;
        let (convolution, solutions): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
        let solution = x0.map(|x0| (x0.clone(), solutions.into_iter().flatten().collect()));
        Ok(Self {
            grid: *grid,
            convolution,
            solution,
            fingerprint: None,
        })
    }

    pub fn paths(&self) -> usize {
        self.convolution.len()
    }

    /// `E|W(t_i)|²_H` estimated at every node.
    pub fn convolution_mean_square(&self) -> Vec<f64> {
        let rows: Vec<Vec<f64>> = self
            .convolution
            .iter()
            .map(|p| p.norms().iter().map(|v| v * v).collect())
            .collect();
        mean_rows(&rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Strong,
    Weak { xi: usize },
}

/// Mean-square residuals along a refinement ladder with shared noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub kind: ResidualKind,
    pub n_steps: Vec<usize>,
    /// `E R(t_i)²` at every node of each ladder grid.
    pub mean_square: Vec<Vec<f64>>,
    /// `√(E R(T)²)` at the final time of each ladder grid.
    pub rms_final: Vec<f64>,
}

impl ResidualReport {
    /// `rms_final[i] / rms_final[i+1]`.
    pub fn ratios(&self) -> Vec<f64> {
        self.rms_final.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// Residuals on the grids `TimeGrid::new(t_end, n)` for `n` in `ladder`.
///
/// Increments are drawn on the finest grid and summed onto the coarser ones.
pub fn residual_ladder(
    kind: ResidualKind,
    spec: &ResolventSpec,
    model: &NoiseModel,
    t_end: f64,
    ladder: &[usize],
    paths: u64,
) -> Result<ResidualReport> {
    check_paths(paths)?;
    let finest = *ladder.iter().max().ok_or_else(|| Error::domain("empty refinement ladder"))?;
    let fine_grid = TimeGrid::new(t_end, finest)?;
    let sims = ladder
        .iter()
        .map(|&n| {
            if n == 0 || finest % n != 0 {
                return Err(Error::domain(format!("ladder entry {n} must divide {finest}")));
            }
            Simulator::new(spec, model, &TimeGrid::new(t_end, n)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = per_path(paths, |p| {
        let fine = WienerIncrements::generate(model, &fine_grid, p)?;
        sims.iter()
            .map(|sim| {
                let dw = fine.coarsen(finest / sim.grid().n_steps())?;
                let r = match kind {
                    ResidualKind::Strong => sim.strong_residual(&dw)?,
                    ResidualKind::Weak { xi } => sim.weak_residual(&dw, xi)?,
                };
                Ok(r.into_iter().map(|v| v * v).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mean_square: Vec<Vec<f64>> = (0..sims.len())
        .map(|level| mean_rows(&rows.iter().map(|r| r[level].clone()).collect::<Vec<_>>()))
        .collect();
    let rms_final = mean_square.iter().map(|ms| ms.last().copied().unwrap_or(0.0).sqrt()).collect();
    Ok(ResidualReport {
        kind,
        n_steps: ladder.to_vec(),
        mean_square,
        rms_final,
    })
}

/// Monte Carlo and quadrature values of `E|W(t)|²_H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryCheck {
    pub t: f64,
    pub mc_estimate: f64,
    pub quadrature_value: f64,
    pub std_error: f64,
    pub paths: u64,
}

impl IsometryCheck {
    /// `|mc - quadrature| ≤ z · std_error`.
    pub fn within(&self, z: f64) -> bool {
        (self.mc_estimate - self.quadrature_value).abs() <= z * self.std_error
    }
}

/// `Σ_k q_k ∫₀ᵗ s_k(t-τ)² ψ_k(τ)² dτ` by adaptive quadrature.
pub fn isometry_integral(spec: &ResolventSpec, model: &NoiseModel, t: f64) -> Result<f64> {
    if spec.modes() != model.modes() {
        return Err(Error::Dimension {
            expected: spec.modes(),
            found: model.modes(),
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    model.psi().at(0.0)?;
    model.psi().at(t)?;
    let breaks = model.psi().breaks_within(0.0, t);
    let mut total = CompensatedSum::default();
    for (k, &q) in model.q().iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let integrand = |tau: f64| {
            let run = || -> Result<f64> {
                let s = spec.mode_factor(k, (t - tau).max(0.0))?;
                let p = model.psi().at(tau.clamp(0.0, t))?[k];
                Ok(s * s * p * p)
            };
            run().unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        };
        let v = quad::integrate_with_breaks(integrand, 0.0, t, &breaks, 1e-14, 1e-12);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        total.add(q * v?);
    }
    Ok(total.value())
}

pub fn ito_isometry_check(
    spec: &ResolventSpec,
    model: &NoiseModel,
    grid: &TimeGrid,
    t_index: usize,
    paths: u64,
) -> Result<IsometryCheck> {
    check_paths(paths)?;
    let sim = Simulator::new(spec, model, grid)?;
    let samples = per_path(paths, |p| {
        let w = sim.convolution_at(&sim.increments(p)?, t_index)?;
        Ok(w.iter().map(|v| v * v).sum::<f64>())
    })?;
    let (mc_estimate, std_error) = mean_and_std_error(&samples);
    let t = grid.node(t_index);
    Ok(IsometryCheck {
        t,
        mc_estimate,
        quadrature_value: isometry_integral(spec, model, t)?,
        std_error,
        paths,
    })
}

/// `sup_t E|W_{α,n}(t) - W_α(t)|²_H` along a Yosida ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct YosidaStochReport {
    pub alpha: f64,
    pub n_ladder: Vec<f64>,
    pub sup_errors: Vec<f64>,
    pub paths: u64,
}

impl YosidaStochReport {
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.sup_errors.windows(2).all(|w| w[1] <= slack * w[0])
    }
}

pub fn yosida_convolution_convergence(
    alpha: f64,
    operator: &SpectralOperator,
    model: &NoiseModel,
    grid: &TimeGrid,
    n_ladder: &[f64],
    paths: u64,
) -> Result<YosidaStochReport> {
    check_paths(paths)?;
    let exact = Simulator::new(&ResolventSpec::diagonal(alpha, operator.clone())?, model, grid)?;
    let approx = n_ladder
        .iter()
        .map(|&n| {
            let spec = ResolventSpec::new(alpha, Method::Yosida { n }, operator.clone())?;
            Simulator::new(&spec, model, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = per_path(paths, |p| {
        let dw = exact.increments(p)?;
        let w = exact.convolution(&dw)?;
        approx
            .iter()
            .map(|sim| {
                let wn = sim.convolution(&dw)?;
                Ok((0..=grid.n_steps())
                    .map(|i| wn.node(i).iter().zip(w.node(i)).map(|(a, b)| (a - b).powi(2)).sum())
                    .collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let sup_errors = (0..approx.len())
        .map(|level| {
            mean_rows(&rows.iter().map(|r| r[level].clone()).collect::<Vec<_>>())
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(YosidaStochReport {
        alpha,
        n_ladder: n_ladder.to_vec(),
        sup_errors,
        paths,
    })
}

/// Mean-square gap `sup_t E|X_mild(t) - X_EM(t)|²` for `α = 1` along a
/// refinement ladder, both schemes driven by the same increments.
pub fn euler_maruyama_gap(
    operator: &SpectralOperator,
    model: &NoiseModel,
    x0: &HilbertVec,
    t_end: f64,
    ladder: &[usize],
    paths: u64,
) -> Result<Vec<f64>> {
    check_paths(paths)?;
    let spec = ResolventSpec::diagonal(1.0, operator.clone())?;
    let finest = *ladder.iter().max().ok_or_else(|| Error::domain("empty refinement ladder"))?;
    let fine_grid = TimeGrid::new(t_end, finest)?;
    let sims = ladder
        .iter()
        .map(|&n| {
            if n == 0 || finest % n != 0 {
                return Err(Error::domain(format!("ladder entry {n} must divide {finest}")));
            }
            Simulator::new(&spec, model, &TimeGrid::new(t_end, n)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = per_path(paths, |p| {
        let fine = WienerIncrements::generate(model, &fine_grid, p)?;
        sims.iter()
            .map(|sim| {
                let dw = fine.coarsen(finest / sim.grid().n_steps())?;
                let mild = sim.mild_solution(&dw, x0)?;
                let em = euler_maruyama(operator, model, sim.grid(), &dw, x0)?;
                Ok((0..=sim.grid().n_steps())
                    .map(|i| mild.node(i).iter().zip(em.node(i)).map(|(a, b)| (a - b).powi(2)).sum())
                    .collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((0..sims.len())
        .map(|level| {
            mean_rows(&rows.iter().map(|r| r[level].clone()).collect::<Vec<_>>())
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Psi;

    fn scalar_spec(alpha: f64, lambda: f64) -> ResolventSpec {
        ResolventSpec::diagonal(alpha, SpectralOperator::new(vec![lambda], "scalar").unwrap()).unwrap()
    }

    fn unit_noise(psi: f64) -> NoiseModel {
        NoiseModel::new(vec![1.0], Psi::Constant(vec![psi]), 42).unwrap()
    }

    #[test]
    fn zero_noise_gives_zero_paths() {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let spec = scalar_spec(0.7, -2.0);
        let w = stoch_convolution(&spec, &unit_noise(0.0), &grid, 3).unwrap();
        assert!(w.data.iter().all(|&v| v == 0.0));
        let r = strong_residual(&spec, &unit_noise(0.0), &grid, 3).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
        let r = weak_residual(&spec, &unit_noise(0.0), &grid, 0, 3).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_eigenvalue_reproduces_brownian_path() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let model = unit_noise(1.0);
        for &alpha in &[0.4, 1.0, 1.8] {
            let sim = Simulator::new(&scalar_spec(alpha, 0.0), &model, &grid).unwrap();
            let dw = sim.increments(5).unwrap();
            let w = sim.convolution(&dw).unwrap();
            let b = dw.brownian_path();
            for (i, bi) in b.iter().enumerate() {
                assert!((w.get(i, 0) - bi[0]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mild_solution_examples() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let x0: HilbertVec = vec![1.0].into();
        let x = mild_solution(&scalar_spec(1.0, -1.0), &unit_noise(0.0), &grid, &x0, 0).unwrap();
        for (i, t) in grid.nodes().enumerate() {
            assert!((x.get(i, 0) - (-t).exp()).abs() < 1e-15);
        }
        let x = mild_solution(&scalar_spec(0.5, -1.0), &unit_noise(0.0), &grid, &x0, 0).unwrap();
        assert!((x.get(16, 0) - 0.4275835761558070).abs() < 1e-12);

        let spec = scalar_spec(0.5, -1.0);
        let w = stoch_convolution(&spec, &unit_noise(1.0), &grid, 9).unwrap();
        let x = mild_solution(&spec, &unit_noise(1.0), &grid, &vec![0.0].into(), 9).unwrap();
        assert_eq!(w, x);
        assert_eq!(x.state(0), vec![0.0].into());
    }

    #[test]
    fn convolution_is_linear_in_psi() {
        let grid = TimeGrid::new(1.0, 40).unwrap();
        let spec = ResolventSpec::diagonal(0.6, SpectralOperator::dirichlet_laplacian(3, 1.0).unwrap()).unwrap();
        let model = NoiseModel::new(vec![1.0, 0.5, 0.25], Psi::Constant(vec![1.0, -0.3, 2.0]), 8).unwrap();
        let w = stoch_convolution(&spec, &model, &grid, 1).unwrap();
        let w2 = stoch_convolution(&spec, &model.with_scaled_psi(2.0), &grid, 1).unwrap();
        for (a, b) in w.data.iter().zip(&w2.data) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn operator_commutes_with_discrete_convolution() {
        let grid = TimeGrid::new(1.0, 30).unwrap();
        let op = SpectralOperator::dirichlet_laplacian(3, 1.0).unwrap();
        let spec = ResolventSpec::diagonal(1.3, op.clone()).unwrap();
        let psi = vec![1.0, 0.5, -2.0];
        let model = NoiseModel::new(vec![1.0; 3], Psi::Constant(psi.clone()), 4).unwrap();
        let a_psi: Vec<f64> = psi.iter().zip(op.eigenvalues()).map(|(p, l)| p * l).collect();
        let a_model = NoiseModel::new(vec![1.0; 3], Psi::Constant(a_psi), 4).unwrap();
        let w = stoch_convolution(&spec, &model, &grid, 2).unwrap();
        let aw = stoch_convolution(&spec, &a_model, &grid, 2).unwrap();
        for i in 0..=30 {
            let lhs = op.apply(&w.state(i)).unwrap();
            for k in 0..3 {
                assert!((lhs[k] - aw.get(i, k)).abs() <= 1e-12 * lhs[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn weak_residual_is_strong_component() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let op = SpectralOperator::dirichlet_laplacian(4, 1.0).unwrap();
        let spec = ResolventSpec::diagonal(0.5, op).unwrap();
        let model = NoiseModel::new(vec![1.0, 0.5, 0.2, 0.1], Psi::Constant(vec![1.0; 4]), 3).unwrap();
        let sim = Simulator::new(&spec, &model, &grid).unwrap();
        let dw = sim.increments(0).unwrap();
        let strong = sim.strong_residual_components(&dw, &sim.convolution(&dw).unwrap()).unwrap();
        for xi in 0..4 {
            let weak = sim.weak_residual(&dw, xi).unwrap();
            for (i, r) in weak.iter().enumerate() {
                assert!((r.abs() - strong.get(i, xi).abs()).abs() <= 1e-12);
            }
            assert_eq!(weak[0], 0.0);
        }
        assert!(matches!(sim.weak_residual(&dw, 4), Err(Error::Index { .. })));
    }

    #[test]
    fn isometry_closed_form_and_zero_noise() {
        let v = isometry_integral(&scalar_spec(1.0, -1.0), &unit_noise(1.0), 1.0).unwrap();
        assert!((v - 0.43233235838169365).abs() < 1e-12);
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let c = ito_isometry_check(&scalar_spec(0.5, -1.0), &unit_noise(0.0), &grid, 16, 50).unwrap();
        assert_eq!((c.mc_estimate, c.quadrature_value, c.std_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn yosida_ladder_trivial_cases() {
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let op = SpectralOperator::new(vec![0.0], "zero").unwrap();
        let r = yosida_convolution_convergence(0.5, &op, &unit_noise(1.0), &grid, &[10.0, 100.0], 10).unwrap();
        assert!(r.sup_errors.iter().all(|&e| e == 0.0));
        let op = SpectralOperator::new(vec![-1.0], "scalar").unwrap();
        let r = yosida_convolution_convergence(0.5, &op, &unit_noise(0.0), &grid, &[10.0, 100.0], 10).unwrap();
        assert!(r.sup_errors.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn ensemble_mild_solution_starts_at_x0() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let x0: HilbertVec = vec![0.5].into();
        let e = PathEnsemble::simulate(&scalar_spec(0.8, -1.0), &unit_noise(1.0), &grid, Some(&x0), 4).unwrap();
        let (_, xs) = e.solution.as_ref().unwrap();
        assert!(xs.iter().all(|x| x.state(0) == x0));
        assert_eq!(e.convolution_mean_square()[0], 0.0);
        assert!(PathEnsemble::simulate(&scalar_spec(0.8, -1.0), &unit_noise(1.0), &grid, None, 0).is_err());
    }
}
