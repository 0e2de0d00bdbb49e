//! Truncated-torus discretization of `R^n`.
//!
//! The box `[-R, R)^n` is sampled at `N` points per axis, `x_j = -R + j·2R/N`.
//! The frequency lattice is `ξ_k = (π/R)·k` for `k ∈ [-N/2, N/2)`, stored in
//! the usual FFT order (non-negative indices first).
//!
//! Transforms approximate the unitary continuous Fourier transform,
//!
//! ```text
//! û(ξ_k) = (2π)^{-n/2} · h · Σ_x u(x) e^{-i ξ_k·x}
//! u(x_j) = (2π)^{-n/2} · w · Σ_ξ û(ξ) e^{+i ξ·x_j}
//! ```
//!
//! with cell volume `h = (2R/N)^n` and spectral weight `w = (π/R)^n`, so that
//! `h Σ |u|² = w Σ |û|²` holds exactly.

pub(crate) mod field;
mod io;
mod profile;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symbol::EllipticSymbol;

pub use field::{Field, Spectrum, Trajectory};
pub use io::{read_field, read_field_from, write_field, write_field_to, FIELD_MAGIC, FIELD_VERSION};
pub use profile::{random_smooth_field, sample_profile, Profile};

#[derive(Clone)]
pub struct SpectralGrid {
    dim: usize,
    points: usize,
    half_width: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `(-1)^{Σ_d k_d}`, the phase from the box starting at `-R`.
    parity: Arc<Vec<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.half_width == other.half_width
    }
}

impl SpectralGrid {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::OddN(points));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::NonpositiveR(half_width));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let len = points.pow(dim as u32);
        let parity = (0..len)
            .map(|flat| {
                let digit_sum: usize = multi_index(flat, dim, points).iter().sum();
                if digit_sum % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Ok(Self { dim, points, half_width, forward, inverse, parity: Arc::new(parity) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Physical quadrature weight `h = (2R/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice spacing `π/R`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_width
    }

    /// Spectral quadrature weight `w = (π/R)^n`.
    pub fn spectral_weight(&self) -> f64 {
        self.frequency_step().powi(self.dim as i32)
    }

    pub fn axis_coordinates(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points).map(|j| -self.half_width + j as f64 * dx).collect()
    }

    /// Lattice index `k ∈ [-N/2, N/2)` of storage slot `j`.
    pub fn signed_index(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage slot of lattice index `k`, wrapped modulo `N`.
    pub fn storage_index(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// Axis frequencies in storage order.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        let step = self.frequency_step();
        (0..self.points).map(|j| step * self.signed_index(j) as f64).collect()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        multi_index(flat, self.dim, self.points)
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index[..self.dim].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Physical position of sample `flat`; unused axes are zero.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let dx = self.spacing();
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = -self.half_width + idx[d] as f64 * dx;
        }
        x
    }

    /// Lattice frequency of spectral slot `flat`; unused axes are zero.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let step = self.frequency_step();
        let mut xi = [0.0; 3];
        for d in 0..self.dim {
            xi[d] = step * self.signed_index(idx[d]) as f64;
        }
        xi
    }

    /// `|ξ|²` over the lattice.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|flat| self.frequency(flat)[..self.dim].iter().map(|x| x * x).sum())
            .collect()
    }

    /// `L(ξ)` over the lattice, in storage order.
    pub fn symbol_values(&self, symbol: &EllipticSymbol) -> Result<Vec<f64>> {
        if symbol.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: symbol.dim() });
        }
        Ok((0..self.len())
            .map(|flat| symbol.eval_unchecked(&self.frequency(flat)[..self.dim]))
            .collect())
    }

    pub fn forward_transform(&self, field: &Field) -> Result<Spectrum> {
        if field.grid() != self {
            return Err(Error::GridMismatch);
        }
        if field.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let mut data = field.values().to_vec();
        self.forward_raw(&mut data);
        Ok(Spectrum::from_raw(self.clone(), data))
    }

    pub fn inverse_transform(&self, spectrum: &Spectrum) -> Result<Field> {
        if spectrum.grid() != self {
            return Err(Error::GridMismatch);
        }
        if spectrum.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let mut data = spectrum.values().to_vec();
        self.inverse_raw(&mut data);
        Ok(Field::from_raw(self.clone(), data))
    }

    /// In-place physical → spectral transform of a raw sample buffer.
    pub(crate) fn forward_raw(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        self.transform_axes(data, self.forward.as_ref());
        let scale = (2.0 * PI).powf(-(self.dim as f64) / 2.0) * self.cell_volume();
        for (z, s) in data.iter_mut().zip(self.parity.iter()) {
            *z *= scale * s;
        }
    }

    /// In-place spectral → physical transform of a raw coefficient buffer.
    pub(crate) fn inverse_raw(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        let scale = (2.0 * PI).powf(-(self.dim as f64) / 2.0) * self.spectral_weight();
        for (z, s) in data.iter_mut().zip(self.parity.iter()) {
            *z *= scale * s;
        }
        self.transform_axes(data, self.inverse.as_ref());
    }

    fn transform_axes(&self, data: &mut [Complex64], fft: &dyn Fft<f64>) {
        let n = self.points;
        let total = data.len();
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    fft.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            let block = stride * n;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
    }
}

fn multi_index(flat: usize, dim: usize, points: usize) -> [usize; 3] {
    let mut idx = [0; 3];
    let mut rest = flat;
    for d in (0..dim).rev() {
        idx[d] = rest % points;
        rest /= points;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &SpectralGrid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(grid.clone(), values).unwrap()
    }

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    #[test]
    fn build_grid_examples() {
        let g = SpectralGrid::new(1, 8, PI).unwrap();
        let mut freqs = g.axis_frequencies();
        freqs.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (-4..4).map(f64::from).collect();
        for (f, e) in freqs.iter().zip(&expected) {
            assert!((f - e).abs() < 1e-15);
        }
        assert!((g.cell_volume() - 2.0 * PI / 8.0).abs() < 1e-15);

        let g = SpectralGrid::new(2, 4, 1.0).unwrap();
        assert_eq!(g.cell_volume(), 0.25);
        assert_eq!(g.cell_volume() * g.len() as f64, 4.0);

        assert!(matches!(SpectralGrid::new(1, 7, 1.0), Err(Error::OddN(7))));
        assert!(matches!(SpectralGrid::new(1, 2, 1.0), Err(Error::OddN(2))));
        assert!(matches!(SpectralGrid::new(4, 8, 1.0), Err(Error::BadDimension(4))));
        assert!(matches!(SpectralGrid::new(1, 8, 0.0), Err(Error::NonpositiveR(_))));
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = SpectralGrid::new(2, 8, 3.0).unwrap();
        let spec = g.forward_transform(&Field::zeros(&g)).unwrap();
        assert!(spec.values().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let back = g.inverse_transform(&Spectrum::zeros(&g)).unwrap();
        assert!(back.values().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    // Oracle: direct O(N²) evaluation of the defining sum.
    fn direct_forward_1d(grid: &SpectralGrid, u: &[Complex64]) -> Vec<Complex64> {
        let xs = grid.axis_coordinates();
        let h = grid.cell_volume();
        grid.axis_frequencies()
            .iter()
            .map(|&xi| {
                let s: Complex64 = xs
                    .iter()
                    .zip(u)
                    .map(|(&x, &v)| v * Complex64::from_polar(1.0, -xi * x))
                    .sum();
                s * h / (2.0 * PI).sqrt()
            })
            .collect()
    }

    #[test]
    fn forward_matches_direct_sum() {
        let g = SpectralGrid::new(1, 16, 2.5).unwrap();
        let u = random_field(&g, 3);
        let fast = g.forward_transform(&u).unwrap();
        let slow = direct_forward_1d(&g, u.values());
        assert!(rel_diff(fast.values(), &slow) < 1e-13);
    }

    #[test]
    fn lattice_plane_wave_has_single_coefficient() {
        let g = SpectralGrid::new(2, 8, PI).unwrap();
        let k = [2_i64, -3];
        let field = sample_profile(
            &g,
            &Profile::PlaneWave { amplitude: 1.0, modes: k.iter().map(|&m| m as f64).collect() },
        )
        .unwrap();
        let spec = g.forward_transform(&field).unwrap();
        let target = g.flat_index(&[g.storage_index(k[0]), g.storage_index(k[1])]);
        // Discrete orthogonality: Σ_x e^{i(k-k')x} = N^n δ, so the single
        // coefficient is (2π)^{-n/2} h N^n = (2R)^n / (2π)^{n/2}.
        let expected = (2.0 * PI).powi(2) / (2.0 * PI);
        for (flat, z) in spec.values().iter().enumerate() {
            if flat == target {
                assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12, "leak at {flat}: {z}");
            }
        }
        // And the inverse of that delta is the unit plane wave.
        let mut delta = Spectrum::zeros(&g);
        delta.values_mut()[target] = Complex64::new(expected, 0.0);
        let wave = g.inverse_transform(&delta).unwrap();
        assert!(rel_diff(wave.values(), field.values()) < 1e-13);
    }

    #[test]
    fn roundtrip_and_plancherel() {
        for (dim, n) in [(1, 32), (2, 16), (3, 8)] {
            let g = SpectralGrid::new(dim, n, 1.7).unwrap();
            let u = random_field(&g, dim as u64);
            let spec = g.forward_transform(&u).unwrap();
            let back = g.inverse_transform(&spec).unwrap();
            assert!(rel_diff(back.values(), u.values()) < 1e-12);

            let phys: f64 = g.cell_volume() * u.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            let freq: f64 =
                g.spectral_weight() * spec.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!((phys - freq).abs() / phys < 1e-12);
        }
    }

    #[test]
    fn cyclic_shift_multiplies_by_unit_phase() {
        let g = SpectralGrid::new(2, 8, 2.0).unwrap();
        let u = random_field(&g, 11);
        // Shift by one cell along axis 1.
        let mut shifted = vec![Complex64::new(0.0, 0.0); g.len()];
        for flat in 0..g.len() {
            let [i, j, _] = g.multi_index(flat);
            shifted[g.flat_index(&[i, (j + 1) % g.points()])] = u.values()[flat];
        }
        let shifted = Field::new(g.clone(), shifted).unwrap();
        let a = g.forward_transform(&u).unwrap();
        let b = g.forward_transform(&shifted).unwrap();
        let dx = g.spacing();
        for flat in 0..g.len() {
            let xi = g.frequency(flat);
            let phase = Complex64::from_polar(1.0, -xi[1] * dx);
            assert!((b.values()[flat] - phase * a.values()[flat]).norm() < 1e-12);
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let g = SpectralGrid::new(1, 8, 1.0).unwrap();
        let mut s = Spectrum::zeros(&g);
        s.values_mut()[2] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(g.inverse_transform(&s), Err(Error::NonFiniteInput)));
    }
}
