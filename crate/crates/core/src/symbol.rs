//! Constant-coefficient elliptic operators `L u = Σ a_ij ∂_i ∂_j u` and their
//! Fourier multipliers.
//!
//! The quadratic form `L(ξ) = Σ a_ij ξ_i ξ_j` is required to be real,
//! symmetric and positive definite, so `M1 |ξ|² <= L(ξ) <= M2 |ξ|²` with
//! `M1`, `M2` the extreme eigenvalues of `a`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const ELLIPTICITY_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSymbol {
    dim: usize,
    /// Row-major `dim × dim` coefficients.
    coeffs: Vec<f64>,
    m1: f64,
    m2: f64,
}

impl EllipticSymbol {
    /// Validates a coefficient matrix given as rows.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::MalformedMatrix);
        }
        let coeffs: Vec<f64> = rows.iter().flatten().copied().collect();
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedMatrix);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let gap = (coeffs[i * dim + j] - coeffs[j * dim + i]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric { i, j, gap });
                }
            }
        }
        // Store exactly symmetric coefficients.
        let mut coeffs = coeffs;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mean = 0.5 * (coeffs[i * dim + j] + coeffs[j * dim + i]);
                coeffs[i * dim + j] = mean;
                coeffs[j * dim + i] = mean;
            }
        }
        let (m1, m2) = extreme_eigenvalues(&coeffs, dim);
        if m1 <= ELLIPTICITY_TOL {
            return Err(Error::NotElliptic { min_eigenvalue: m1 });
        }
        Ok(Self { dim, coeffs, m1, m2 })
    }

    /// The identity symbol `L(ξ) = |ξ|²` (the Laplacian).
    pub fn identity(dim: usize) -> Self {
        let coeffs = (0..dim * dim)
            .map(|k| if k / dim == k % dim { 1.0 } else { 0.0 })
            .collect();
        Self { dim, coeffs, m1: 1.0, m2: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.coeffs.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Smallest eigenvalue of the coefficient matrix.
    pub fn m1(&self) -> f64 {
        self.m1
    }

    /// Largest eigenvalue of the coefficient matrix.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// `L(ξ) = Σ a_ij ξ_i ξ_j`.
    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: xi.len() });
        }
        Ok(self.eval_unchecked(xi))
    }

    pub(crate) fn eval_unchecked(&self, xi: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, &xi_i) in xi.iter().enumerate() {
            let row = &self.coeffs[i * self.dim..(i + 1) * self.dim];
            acc += xi_i * row.iter().zip(xi).map(|(a, x)| a * x).sum::<f64>();
        }
        acc
    }

    /// Per-mode propagator `exp(-i t L(ξ))`, the exact solution factor of
    /// `i ∂_t u + L u = 0` for a single Fourier mode.
    pub fn multiplier(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        Ok(propagator_phase(t, self.eval(xi)?))
    }
}

#[inline]
pub(crate) fn propagator_phase(t: f64, symbol_value: f64) -> Complex64 {
    Complex64::from_polar(1.0, -t * symbol_value)
}

fn extreme_eigenvalues(a: &[f64], dim: usize) -> (f64, f64) {
    match dim {
        1 => (a[0], a[0]),
        2 => {
            let (p, q, r) = (a[0], a[1], a[3]);
            let mean = 0.5 * (p + r);
            let radius = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            (mean - radius, mean + radius)
        }
        _ => {
            let eig = jacobi_eigenvalues(a, dim);
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (min, max)
        }
    }
}

/// Cyclic Jacobi rotations on a symmetric matrix; returns the diagonal.
fn jacobi_eigenvalues(a: &[f64], dim: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let scale = m.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * dim + j] * m[i * dim + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * dim + p];
                let aqq = m[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = m[k * dim + p];
                    let akq = m[k * dim + q];
                    m[k * dim + p] = c * akp - s * akq;
                    m[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = m[p * dim + k];
                    let aqk = m[q * dim + k];
                    m[p * dim + k] = c * apk - s * aqk;
                    m[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..dim).map(|i| m[i * dim + i]).collect()
}
