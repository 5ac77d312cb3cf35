//! Self-adjoint, negative semidefinite operators held in their eigenbasis.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Eigen-coefficients of a state in the truncated Hilbert space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HilbertVec(Vec<f64>);

impl HilbertVec {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// The `k`-th eigenvector (0-based).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl From<Vec<f64>> for HilbertVec {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Index<usize> for HilbertVec {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Sub for &HilbertVec {
    type Output = HilbertVec;
    fn sub(self, rhs: &HilbertVec) -> HilbertVec {
        HilbertVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &HilbertVec {
    type Output = HilbertVec;
    fn add(self, rhs: &HilbertVec) -> HilbertVec {
        HilbertVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Mul<&HilbertVec> for f64 {
    type Output = HilbertVec;
    fn mul(self, rhs: &HilbertVec) -> HilbertVec {
        HilbertVec(rhs.0.iter().map(|x| self * x).collect())
    }
}

/// Diagonal operator `A e_k = λ_k e_k` with every `λ_k ≤ 0`.
///
/// Being diagonal in an orthonormal basis it is self-adjoint, so `A* = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
    label: String,
}

impl SpectralOperator {
    pub fn new(eigenvalues: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::domain("operator needs at least one mode"));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(**l <= 0.0) || !l.is_finite()) {
            return Err(Error::domain(format!(
                "eigenvalue {bad} is not a finite nonpositive number"
            )));
        }
        Ok(Self {
            eigenvalues,
            label: label.into(),
        })
    }

    /// Dirichlet Laplacian on `(0, length)` truncated to `modes` modes:
    /// `λ_k = -(kπ/L)²`.
    pub fn dirichlet_laplacian(modes: usize, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::domain(format!("interval length {length} must be positive")));
        }
        let eig = (1..=modes)
            .map(|k| -(k as f64 * PI / length).powi(2))
            .collect();
        Self::new(eig, format!("dirichlet_laplacian(K={modes}, L={length})"))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    fn check_dim(&self, x: &HilbertVec) -> Result<()> {
        if x.dim() != self.modes() {
            return Err(Error::Dimension {
                expected: self.modes(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &HilbertVec) -> Result<HilbertVec> {
        self.check_dim(x)?;
        Ok(HilbertVec(
            self.eigenvalues.iter().zip(x.iter()).map(|(l, v)| l * v).collect(),
        ))
    }

    /// `R(λ, A) x = (λI - A)^{-1} x`.
    pub fn resolvent_apply(&self, lambda: f64, x: &HilbertVec) -> Result<HilbertVec> {
        self.check_dim(x)?;
        if !(lambda > 0.0) {
            return Err(Error::domain(format!(
                "resolvent parameter {lambda} must be positive"
            )));
        }
        let mut out = Vec::with_capacity(x.dim());
        for (l, v) in self.eigenvalues.iter().zip(x.iter()) {
            let d = lambda - l;
            if d == 0.0 {
                return Err(Error::domain(format!("{lambda} lies in the spectrum")));
            }
            out.push(v / d);
        }
        Ok(HilbertVec(out))
    }

    /// Yosida approximation `A_n = n A R(n, A)`.
    pub fn yosida(&self, n: f64) -> Result<YosidaOperator> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(format!("Yosida parameter n = {n} must be positive")));
        }
        let eigenvalues = self.eigenvalues.iter().map(|&l| n * l / (n - l)).collect();
        Ok(YosidaOperator {
            n,
            base: self.clone(),
            eigenvalues,
        })
    }
}

/// `A_n = n² R(n, A) - nI` for a [`SpectralOperator`] `A`; bounded by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct YosidaOperator {
    n: f64,
    base: SpectralOperator,
    eigenvalues: Vec<f64>,
}

impl YosidaOperator {
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn base(&self) -> &SpectralOperator {
        &self.base
    }

    /// `μ_k = n λ_k / (n - λ_k)`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Diagonal of `J_n = n R(n, A)`.
    pub fn j_diagonal(&self) -> Vec<f64> {
        self.base
            .eigenvalues
            .iter()
            .map(|&l| self.n / (self.n - l))
            .collect()
    }

    /// `A_n` as a spectral operator in its own right.
    pub fn as_operator(&self) -> SpectralOperator {
        SpectralOperator {
            eigenvalues: self.eigenvalues.clone(),
            label: format!("yosida(n={}) of {}", self.n, self.base.label),
        }
    }

    pub fn apply(&self, x: &HilbertVec) -> Result<HilbertVec> {
        self.base.check_dim(x)?;
        Ok(HilbertVec(
            self.eigenvalues.iter().zip(x.iter()).map(|(m, v)| m * v).collect(),
        ))
    }
}
