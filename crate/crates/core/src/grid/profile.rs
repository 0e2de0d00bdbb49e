use std::path::PathBuf;

use num_complex::Complex64;
use rand::Rng;

use super::{read_field, Field, SpectralGrid};
use crate::error::{Error, Result};

/// Initial-data profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `A exp(-|x - c|² / (2 w²))`.
    Gaussian { amplitude: f64, width: f64, center: Vec<f64> },
    /// `A exp(i (π/R) j·x)` with integer lattice modes `j`.
    PlaneWave { amplitude: f64, modes: Vec<f64> },
    /// Binary field file; its grid must equal the target grid.
    FromFile { path: PathBuf },
}

pub fn sample_profile(grid: &SpectralGrid, profile: &Profile) -> Result<Field> {
    let dim = grid.dim();
    match profile {
        Profile::Gaussian { amplitude, width, center } => {
            if center.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: center.len() });
            }
            if !(*width > 0.0) {
                return Err(Error::NonFiniteInput);
            }
            let denom = 2.0 * width * width;
            Field::from_fn(grid, |x| {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                Complex64::new(amplitude * (-r2 / denom).exp(), 0.0)
            })
        }
        Profile::PlaneWave { amplitude, modes } => {
            if modes.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: modes.len() });
            }
            if let Some(&bad) = modes.iter().find(|j| j.fract() != 0.0 || !j.is_finite()) {
                return Err(Error::ModeNotOnLattice(bad));
            }
            let step = grid.frequency_step();
            Field::from_fn(grid, |x| {
                let phase: f64 = x.iter().zip(modes).map(|(xi, j)| step * j * xi).sum();
                Complex64::from_polar(*amplitude, phase)
            })
        }
        Profile::FromFile { path } => {
            let field = read_field(path)?;
            if field.grid() != grid {
                return Err(Error::GridMismatch);
            }
            Ok(field)
        }
    }
}

/// A random smooth, spatially localized datum: a sum of three modulated
/// Gaussian bumps with centers in the inner quarter of the box.
///
/// The result is a function of `x` only, so the same draw sampled on grids
/// of different resolution represents the same datum.
pub fn random_smooth_field<R: Rng + ?Sized>(grid: &SpectralGrid, rng: &mut R) -> Field {
    let dim = grid.dim();
    let quarter = 0.25 * grid.half_width();
    let bumps: Vec<(Complex64, f64, [f64; 3], [f64; 3])> = (0..3)
        .map(|_| {
            let amp = Complex64::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let width = rng.gen_range(0.6..1.5);
            let mut center = [0.0; 3];
            let mut wave = [0.0; 3];
            for d in 0..dim {
                center[d] = rng.gen_range(-quarter..quarter);
                wave[d] = rng.gen_range(-2.0..2.0);
            }
            (amp, width, center, wave)
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(amp, width, center, wave)| {
                let mut r2 = 0.0;
                let mut phase = 0.0;
                for d in 0..dim {
                    r2 += (x[d] - center[d]).powi(2);
                    phase += wave[d] * x[d];
                }
                amp * Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
            })
            .sum()
    })
    .expect("Gaussian bumps are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn at_origin(grid: &SpectralGrid, field: &Field) -> Complex64 {
        let mid = grid.points() / 2;
        field.values()[grid.flat_index(&[mid, mid, mid])]
    }

    #[test]
    fn gaussian_peak() {
        let g = SpectralGrid::new(1, 16, 4.0).unwrap();
        let f = sample_profile(
            &g,
            &Profile::Gaussian { amplitude: 1.0, width: 1.0, center: vec![0.0] },
        )
        .unwrap();
        assert_eq!(at_origin(&g, &f), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn plane_wave_at_origin() {
        let g = SpectralGrid::new(1, 16, PI).unwrap();
        let f = sample_profile(&g, &Profile::PlaneWave { amplitude: 2.0, modes: vec![1.0] }).unwrap();
        assert!((at_origin(&g, &f) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(f.values().iter().all(|z| (z.norm() - 2.0).abs() < 1e-14));
    }

    #[test]
    fn off_lattice_mode_rejected() {
        let g = SpectralGrid::new(1, 16, PI).unwrap();
        let err = sample_profile(&g, &Profile::PlaneWave { amplitude: 1.0, modes: vec![0.5] });
        assert!(matches!(err, Err(Error::ModeNotOnLattice(m)) if m == 0.5));
    }

    #[test]
    fn profile_dimension_checked() {
        let g = SpectralGrid::new(2, 8, 1.0).unwrap();
        let err = sample_profile(&g, &Profile::Gaussian { amplitude: 1.0, width: 1.0, center: vec![0.0] });
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn random_field_is_resolution_independent() {
        let coarse = SpectralGrid::new(1, 32, 8.0).unwrap();
        let fine = SpectralGrid::new(1, 64, 8.0).unwrap();
        let a = random_smooth_field(&coarse, &mut ChaCha8Rng::seed_from_u64(5));
        let b = random_smooth_field(&fine, &mut ChaCha8Rng::seed_from_u64(5));
        // Coarse node j coincides with fine node 2j.
        for j in 0..32 {
            assert!((a.values()[j] - b.values()[2 * j]).norm() < 1e-15);
        }
    }
}
