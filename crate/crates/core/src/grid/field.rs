use num_complex::Complex64;

use super::SpectralGrid;
use crate::error::{Error, Result};

fn all_finite(values: &[Complex64]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Complex samples on the physical grid, row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if !all_finite(&values) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: SpectralGrid, values: Vec<Complex64>) -> Self {
        Self { grid, values }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|flat| f(&grid.position(flat)[..grid.dim()])).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.values)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|z| z * c).collect() }
    }

    /// `self - other`, both on the same grid.
    pub fn difference(&self, other: &Field) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }
}

/// Fourier coefficients on the frequency lattice, in FFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: SpectralGrid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if !all_finite(&values) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: SpectralGrid, values: Vec<Complex64>) -> Self {
        Self { grid, values }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
}

/// Fields at the uniform times `t_m = t0 + m (T - t0) / Nt`, `m = 0..=Nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: SpectralGrid,
    t0: f64,
    t_end: f64,
    frames: Vec<Field>,
}

impl Trajectory {
    pub fn new(t0: f64, t_end: f64, frames: Vec<Field>) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(Error::InvalidMultipoint(format!("time interval [{t0}, {t_end}] is empty")));
        }
        let Some(first) = frames.first() else {
            return Err(Error::InvalidMultipoint("trajectory needs at least two frames".into()));
        };
        if frames.len() < 2 {
            return Err(Error::InvalidMultipoint("trajectory needs at least two frames".into()));
        }
        let grid = first.grid().clone();
        if frames.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, t0, t_end, frames })
    }

    /// Zero trajectory with `nt` intervals.
    pub fn zeros(grid: &SpectralGrid, t0: f64, t_end: f64, nt: usize) -> Result<Self> {
        Self::new(t0, t_end, vec![Field::zeros(grid); nt + 1])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of time intervals `Nt`.
    pub fn intervals(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.intervals() as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        time_at(self.t0, self.t_end, self.intervals(), m)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.frames.len()).map(|m| self.time(m)).collect()
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn frame(&self, m: usize) -> &Field {
        &self.frames[m]
    }

    /// Index of the frame at time `t`, if `t` lies on the grid within `1e-12`.
    pub fn frame_index(&self, t: f64) -> Option<usize> {
        grid_index(self.t0, self.t_end, self.intervals(), t)
    }

    /// True when both trajectories share grid and time axis.
    pub fn same_axes(&self, other: &Trajectory) -> bool {
        self.grid == other.grid
            && self.t0 == other.t0
            && self.t_end == other.t_end
            && self.frames.len() == other.frames.len()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            t0: self.t0,
            t_end: self.t_end,
            frames: self.frames.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    pub fn difference(&self, other: &Trajectory) -> Result<Self> {
        if !self.same_axes(other) {
            return Err(Error::GridMismatch);
        }
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.difference(b))
            .collect::<Result<_>>()?;
        Ok(Self { grid: self.grid.clone(), t0: self.t0, t_end: self.t_end, frames })
    }

    pub fn is_finite(&self) -> bool {
        self.frames.iter().all(Field::is_finite)
    }

    /// Applies `f` to every frame.
    pub fn map_frames(&self, f: impl Fn(&Field) -> Result<Field>) -> Result<Self> {
        let frames = self.frames.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.t0, self.t_end, frames)
    }
}

pub(crate) fn time_at(t0: f64, t_end: f64, nt: usize, m: usize) -> f64 {
    if m == nt {
        t_end
    } else {
        t0 + m as f64 * (t_end - t0) / nt as f64
    }
}

pub(crate) fn grid_index(t0: f64, t_end: f64, nt: usize, t: f64) -> Option<usize> {
    let dt = (t_end - t0) / nt as f64;
    let m = ((t - t0) / dt).round();
    if !(0.0..=nt as f64).contains(&m) {
        return None;
    }
    let m = m as usize;
    ((time_at(t0, t_end, nt, m) - t).abs() <= 1e-12).then_some(m)
}
