//! Covariance `Q`, diagonal noise multipliers `Ψ` and truncated Q-Wiener
//! increments.
//!
//! `Q`, `Ψ` and `A` share one eigenbasis `u_k`. With `f_j = √q_j u_j` the
//! orthonormal basis of `U_0 = Q^{1/2}U`, a diagonal `Ψ(t)` acts as
//! `Ψ(t) f_j = ψ_j(t) √q_j u_j`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fracquad::TimeGrid;
use crate::operators::SpectralOperator;
use crate::quad;

/// Bits of the stream id reserved for the mode index.
const MODE_BITS: u32 = 20;

/// Time profile of the multipliers `ψ_1..ψ_K`.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    Constant(Vec<f64>),
    /// Samples `values[i][k] = ψ_k(times[i])`, linearly interpolated.
    Table { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl Psi {
    pub fn modes(&self) -> usize {
        match self {
            Psi::Constant(v) => v.len(),
            Psi::Table { values, .. } => values.first().map_or(0, Vec::len),
        }
    }

    /// Tabulate `f(k, t)` on the nodes of `grid`.
    pub fn sampled(grid: &TimeGrid, modes: usize, f: impl Fn(usize, f64) -> f64) -> Self {
        let times: Vec<f64> = grid.nodes().collect();
        let values = times.iter().map(|&t| (0..modes).map(|k| f(k, t)).collect()).collect();
        Psi::Table { times, values }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Psi::Constant(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::domain("psi multipliers must be finite"));
                }
            }
            Psi::Table { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::domain(format!(
                        "psi table needs at least two rows with one time each, got {} times and {} rows",
                        times.len(),
                        values.len()
                    )));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::domain("psi table times must be strictly increasing"));
                }
                let k = values[0].len();
                for row in values {
                    if row.len() != k {
                        return Err(Error::Dimension {
                            expected: k,
                            found: row.len(),
                        });
                    }
                    if row.iter().any(|x| !x.is_finite()) {
                        return Err(Error::domain("psi table entries must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `(ψ_1(t), ..., ψ_K(t))`.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        match self {
            Psi::Constant(v) => Ok(v.clone()),
            Psi::Table { times, values } => {
                let (first, last) = (times[0], times[times.len() - 1]);
                let slack = 1e-12 * (last - first).abs().max(1.0);
                if !(t >= first - slack && t <= last + slack) {
                    return Err(Error::domain(format!(
                        "t = {t} lies outside the psi table range [{first}, {last}]"
                    )));
                }
                let j = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[j - 1], times[j]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                Ok(values[j - 1]
                    .iter()
                    .zip(&values[j])
                    .map(|(a, b)| if w == 0.0 { *a } else { a + w * (b - a) })
                    .collect())
            }
        }
    }

    /// Interior kinks of the interpolant inside `(a, b)`.
    pub(crate) fn breaks_within(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            Psi::Constant(_) => Vec::new(),
            Psi::Table { times, .. } => times.iter().copied().filter(|&t| t > a && t < b).collect(),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match self {
            Psi::Constant(v) => Psi::Constant(v.iter().map(|x| c * x).collect()),
            Psi::Table { times, values } => Psi::Table {
                times: times.clone(),
                values: values.iter().map(|r| r.iter().map(|x| c * x).collect()).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    q: Vec<f64>,
    psi: Psi,
    seed: u64,
}

impl NoiseModel {
    pub fn new(q: Vec<f64>, psi: Psi, seed: u64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::domain("noise needs at least one mode"));
        }
        if let Some(bad) = q.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::domain(format!("covariance eigenvalue {bad} must be finite and >= 0")));
        }
        if q.len() >= 1 << MODE_BITS {
            return Err(Error::domain(format!("at most {} noise modes", (1u64 << MODE_BITS) - 1)));
        }
        psi.validate()?;
        if psi.modes() != q.len() {
            return Err(Error::Dimension {
                expected: q.len(),
                found: psi.modes(),
            });
        }
        Ok(Self { q, psi, seed })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn psi(&self) -> &Psi {
        &self.psi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn modes(&self) -> usize {
        self.q.len()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Same covariance and seed with every `ψ_j` multiplied by `c`.
    pub fn with_scaled_psi(&self, c: f64) -> Self {
        Self {
            psi: self.psi.scaled(c),
            ..self.clone()
        }
    }

    /// `ψ_k(t_i)` at every grid node, row `i` holding all modes.
    pub fn psi_on_grid(&self, grid: &TimeGrid) -> Result<Vec<Vec<f64>>> {
        grid.nodes().map(|t| self.psi.at(t)).collect()
    }

    /// `|Ψ(t)|_{L_2^0} = √(Σ_j ψ_j(t)² q_j)`.
    pub fn l20_norm(&self, t: f64) -> Result<f64> {
        Ok(self.l20_norm_sq(&self.psi.at(t)?, None).sqrt())
    }

    fn l20_norm_sq(&self, psi: &[f64], lambda: Option<&[f64]>) -> f64 {
        psi.iter()
            .zip(&self.q)
            .enumerate()
            .map(|(k, (p, q))| {
                let m = lambda.map_or(*p, |l| l[k] * p);
                m * m * q
            })
            .sum()
    }

    /// `||Ψ||_T = (∫₀^T |Ψ(τ)|²_{L_2^0} dτ)^{1/2}`; `Ψ` is deterministic.
    pub fn psi_process_norm(&self, grid: &TimeGrid) -> Result<f64> {
        self.process_norm(grid, None)
    }

    fn process_norm(&self, grid: &TimeGrid, lambda: Option<&[f64]>) -> Result<f64> {
        let t_end = grid.t_end();
        // validate the range once so the integrand cannot fail
        self.psi.at(0.0)?;
        self.psi.at(t_end)?;
        let breaks = self.psi.breaks_within(0.0, t_end);
        let integrand = |t: f64| {
            let psi = self.psi.at(t.clamp(0.0, t_end)).unwrap_or_default();
            self.l20_norm_sq(&psi, lambda)
        };
        Ok(quad::integrate_with_breaks(integrand, 0.0, t_end, &breaks, 1e-14, 1e-13)?.sqrt())
    }

    /// Diagnostics for the hypotheses `Ψ(U_0) ⊂ D(A)` and `Ψ, AΨ ∈ N²(0,T; L_2^0)`.
    pub fn check_noise_hypotheses(&self, operator: &SpectralOperator, grid: &TimeGrid) -> Result<HypothesisReport> {
        if operator.modes() != self.modes() {
            return Err(Error::Dimension {
                expected: operator.modes(),
                found: self.modes(),
            });
        }
        let lambda = operator.eigenvalues();
        let mut domain_norm: f64 = 0.0;
        for t in grid.nodes() {
            domain_norm = domain_norm.max(self.l20_norm_sq(&self.psi.at(t)?, Some(lambda)).sqrt());
        }
        let psi_norm = self.process_norm(grid, None)?;
        let a_psi_norm = self.process_norm(grid, Some(lambda))?;
        Ok(HypothesisReport {
            domain_norm,
            psi_norm,
            a_psi_norm,
            pass: domain_norm.is_finite() && psi_norm.is_finite() && a_psi_norm.is_finite(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    /// `sup_t (Σ λ_k² ψ_k(t)² q_k)^{1/2}` over the grid nodes.
    pub domain_norm: f64,
    pub psi_norm: f64,
    pub a_psi_norm: f64,
    pub pass: bool,
}

/// Increments `ΔW_{i,k} ~ N(0, q_k Δt)` of one sample path.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerIncrements {
    n_steps: usize,
    modes: usize,
    dt: f64,
    // step-major: data[i * modes + k]
    data: Vec<f64>,
}

impl WienerIncrements {
    /// Path `path_index` of the ensemble keyed by the model's seed.
    ///
    /// Mode `k` of path `p` reads ChaCha8 stream `(p << 20) | k` under the
    /// seed's key, so each entry depends only on `(seed, p, i, k)`.
    pub fn generate(model: &NoiseModel, grid: &TimeGrid, path_index: u64) -> Result<Self> {
        if path_index >= 1 << (64 - MODE_BITS) {
            return Err(Error::domain(format!("path index {path_index} exceeds the stream space")));
        }
        let (n, modes, dt) = (grid.n_steps(), model.modes(), grid.dt());
        let mut data = vec![0.0; n * modes];
        for (k, &q) in model.q.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            rng.set_stream((path_index << MODE_BITS) | k as u64);
            let sd = (q * dt).sqrt();
            for i in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                data[i * modes + k] = sd * z;
            }
        }
        Ok(Self { n_steps: n, modes, dt, data })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `ΔW` over `[t_i, t_{i+1})` on mode `k`.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.modes + k]
    }

    pub fn step(&self, i: usize) -> &[f64] {
        &self.data[i * self.modes..(i + 1) * self.modes]
    }

    /// Increments on the grid with `factor`-times larger steps, summed from these.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_steps.is_multiple_of(factor) {
            return Err(Error::domain(format!(
                "coarsening factor {factor} must divide n_steps = {}",
                self.n_steps
            )));
        }
        let n = self.n_steps / factor;
        let mut data = vec![0.0; n * self.modes];
        for i in 0..n {
            for j in 0..factor {
                for (acc, v) in data[i * self.modes..(i + 1) * self.modes]
                    .iter_mut()
                    .zip(self.step(i * factor + j))
                {
                    *acc += v;
                }
            }
        }
        Ok(Self {
            n_steps: n,
            modes: self.modes,
            dt: self.dt * factor as f64,
            data,
        })
    }

    /// `W(t_m)` on every mode, `m = 0..=n_steps`.
    pub fn brownian_path(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_steps + 1);
        let mut w = vec![0.0; self.modes];
        out.push(w.clone());
        for i in 0..self.n_steps {
            for (a, v) in w.iter_mut().zip(self.step(i)) {
                *a += v;
            }
            out.push(w.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    #[test]
    fn l20_examples() {
        let m = NoiseModel::new(vec![1.0, 0.25], Psi::Constant(vec![1.0, 1.0]), 1).unwrap();
        assert!((m.l20_norm(0.3).unwrap() - 1.118033988749895).abs() < 1e-15);
        let m = NoiseModel::new(vec![0.0, 0.0], Psi::Constant(vec![3.0, -7.0]), 1).unwrap();
        assert_eq!(m.l20_norm(0.0).unwrap(), 0.0);
        let m = NoiseModel::new(vec![1.0], Psi::Constant(vec![2.0]), 1).unwrap();
        assert_eq!(m.l20_norm(1.0).unwrap(), 2.0);
    }

    #[test]
    fn l20_matches_basis_expansion() {
        let q = [0.5, 2.0, 0.0, 1e-3];
        let psi = [1.5, -0.25, 4.0, 10.0];
        let m = NoiseModel::new(q.to_vec(), Psi::Constant(psi.to_vec()), 0).unwrap();
        // |Ψ f_j|² with f_j = √q_j u_j
        let via_basis: f64 = q.iter().zip(&psi).map(|(q, p)| (p * q.sqrt()).powi(2)).sum();
        assert!((m.l20_norm(0.0).unwrap().powi(2) - via_basis).abs() <= 1e-12);
    }

    #[test]
    fn process_norm_examples() {
        let g = grid(1.0, 10);
        let one = NoiseModel::new(vec![1.0], Psi::Constant(vec![1.0]), 0).unwrap();
        assert!((one.psi_process_norm(&g).unwrap() - 1.0).abs() < 1e-14);
        let ramp = NoiseModel::new(vec![1.0], Psi::sampled(&g, 1, |_, t| t), 0).unwrap();
        assert!((ramp.psi_process_norm(&g).unwrap() - 0.5773502691896258).abs() < 1e-14);
        let zero = NoiseModel::new(vec![1.0], Psi::Constant(vec![0.0]), 0).unwrap();
        assert_eq!(zero.psi_process_norm(&g).unwrap(), 0.0);
    }

    #[test]
    fn hypothesis_report_examples() {
        use std::f64::consts::PI;
        let g = grid(1.0, 8);
        let op = SpectralOperator::dirichlet_laplacian(2, 1.0).unwrap();
        let zero = NoiseModel::new(vec![1.0, 1.0], Psi::Constant(vec![0.0, 0.0]), 0).unwrap();
        let r = zero.check_noise_hypotheses(&op, &g).unwrap();
        assert!(r.pass && r.psi_norm == 0.0 && r.a_psi_norm == 0.0);
        let unit = NoiseModel::new(vec![1.0, 1.0], Psi::Constant(vec![1.0, 1.0]), 0).unwrap();
        let r = unit.check_noise_hypotheses(&op, &g).unwrap();
        assert!((r.a_psi_norm - PI * PI * 17f64.sqrt()).abs() < 1e-11);
        assert!(r.pass);

        let mut prev = 0.0;
        for k in [4usize, 16, 64, 256] {
            let op = SpectralOperator::dirichlet_laplacian(k, 1.0).unwrap();
            let psi = op.eigenvalues().iter().map(|l| 1.0 / l.abs()).collect();
            let q = (1..=k).map(|j| 1.0 / (j * j) as f64).collect();
            let r = NoiseModel::new(q, Psi::Constant(psi), 0).unwrap().check_noise_hypotheses(&op, &g).unwrap();
            assert!(r.a_psi_norm > prev && r.a_psi_norm < PI / 6f64.sqrt());
            prev = r.a_psi_norm;
        }
    }

    #[test]
    fn model_validation() {
        assert!(NoiseModel::new(vec![-1.0], Psi::Constant(vec![1.0]), 0).is_err());
        assert!(NoiseModel::new(vec![1.0, 1.0], Psi::Constant(vec![1.0]), 0).is_err());
        assert!(NoiseModel::new(vec![1.0], Psi::Constant(vec![f64::NAN]), 0).is_err());
        let table = Psi::Table {
            times: vec![0.0, 0.0],
            values: vec![vec![1.0], vec![1.0]],
        };
        assert!(NoiseModel::new(vec![1.0], table, 0).is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let psi = Psi::Table {
            times: vec![0.0, 1.0, 3.0],
            values: vec![vec![0.0], vec![2.0], vec![-2.0]],
        };
        assert_eq!(psi.at(0.5).unwrap(), vec![1.0]);
        assert_eq!(psi.at(1.0).unwrap(), vec![2.0]);
        assert_eq!(psi.at(2.0).unwrap(), vec![0.0]);
        assert_eq!(psi.at(3.0).unwrap(), vec![-2.0]);
        assert!(psi.at(3.5).is_err());
    }

    #[test]
    fn zero_covariance_gives_zero_increments() {
        let m = NoiseModel::new(vec![0.0, 0.0], Psi::Constant(vec![1.0, 1.0]), 9).unwrap();
        let w = WienerIncrements::generate(&m, &grid(1.0, 16), 3).unwrap();
        assert!(w.data.iter().all(|&x| x == 0.0 && x.is_sign_positive()));
    }

    #[test]
    fn increments_are_reproducible_and_keyed() {
        let m = NoiseModel::new(vec![1.0, 0.5], Psi::Constant(vec![1.0, 1.0]), 42).unwrap();
        let g = grid(1.0, 32);
        let a = WienerIncrements::generate(&m, &g, 7).unwrap();
        assert_eq!(a, WienerIncrements::generate(&m, &g, 7).unwrap());
        assert_ne!(a, WienerIncrements::generate(&m, &g, 8).unwrap());
        assert_ne!(a, WienerIncrements::generate(&m.with_seed(43), &g, 7).unwrap());
        // modes are separate streams: changing one q leaves the other mode alone
        let m2 = NoiseModel::new(vec![4.0, 0.5], Psi::Constant(vec![1.0, 1.0]), 42).unwrap();
        let b = WienerIncrements::generate(&m2, &g, 7).unwrap();
        for i in 0..32 {
            assert_eq!(a.get(i, 1), b.get(i, 1));
            assert!((b.get(i, 0) - 2.0 * a.get(i, 0)).abs() <= 1e-15 * b.get(i, 0).abs());
        }
    }

    #[test]
    fn coarsening_sums_blocks() {
        let m = NoiseModel::new(vec![1.0], Psi::Constant(vec![1.0]), 5).unwrap();
        let fine = WienerIncrements::generate(&m, &grid(1.0, 8), 0).unwrap();
        let coarse = fine.coarsen(4).unwrap();
        assert_eq!(coarse.n_steps(), 2);
        assert_eq!(coarse.dt(), 0.5);
        assert_eq!(coarse.get(1, 0), fine.get(4, 0) + fine.get(5, 0) + fine.get(6, 0) + fine.get(7, 0));
        let w_fine = fine.brownian_path();
        let w_coarse = coarse.brownian_path();
        assert!((w_fine[8][0] - w_coarse[2][0]).abs() < 1e-14);
        assert!(fine.coarsen(3).is_err());
    }
}
