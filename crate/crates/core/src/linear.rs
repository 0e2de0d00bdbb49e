//! Forced linear equation `i ∂_t u + L u = F` on `[t0, T]` under the
//! multipoint condition `u(t0) = φ + Σ_k α_k u(λ_k)`.
//!
//! Per Fourier mode the solution is `û(t) = e^{-i(t-t0)L(ξ)} û0 + Ĝ(t)` with
//! the Duhamel term `Ĝ(t) = -i ∫_{t0}^t e^{-i(t-τ)L(ξ)} F̂(τ) dτ`. Imposing the
//! multipoint condition gives
//!
//! ```text
//! û0(ξ) · D(ξ) = φ̂(ξ) + Σ_k α_k Ĝ(λ_k, ξ),   D(ξ) = 1 - Σ_k α_k e^{-i(λ_k-t0)L(ξ)}
//! ```
//!
//! which is solved mode by mode and then propagated once.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, SpectralGrid, Trajectory};
use crate::norms::{lebesgue_norm, mass, strichartz_norm, AdmissiblePair};
use crate::symbol::{propagator_phase, EllipticSymbol};

pub const DEFAULT_EPS_RES: f64 = 1e-8;

/// Fraction of the box half-width beyond which mass counts as "near the
/// boundary" for the wrap-around check.
const SHELL_START: f64 = 0.9;
pub const SHELL_MASS_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipointTerm {
    pub alpha: Complex64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipointSpec {
    t0: f64,
    t_end: f64,
    terms: Vec<MultipointTerm>,
}

impl MultipointSpec {
    pub fn new(t0: f64, t_end: f64, terms: Vec<MultipointTerm>) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(Error::InvalidMultipoint(format!("horizon {t_end} must exceed t0 = {t0}")));
        }
        for (k, term) in terms.iter().enumerate() {
            if !(term.alpha.re.is_finite() && term.alpha.im.is_finite()) {
                return Err(Error::InvalidMultipoint(format!("alpha_{} is not finite", k + 1)));
            }
            if !(term.lambda > t0 && term.lambda <= t_end) {
                return Err(Error::InvalidMultipoint("lambda out of (t0,T]".into()));
            }
            if terms[..k].iter().any(|other| other.lambda == term.lambda) {
                return Err(Error::InvalidMultipoint(format!("lambda {} repeated", term.lambda)));
            }
        }
        Ok(Self { t0, t_end, terms })
    }

    /// The ordinary Cauchy problem `u(t0) = φ`.
    pub fn classical(t0: f64, t_end: f64) -> Result<Self> {
        Self::new(t0, t_end, Vec::new())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn terms(&self) -> &[MultipointTerm] {
        &self.terms
    }

    /// `Σ |α_k|`; below one the condition can never resonate.
    pub fn alpha_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.alpha.norm()).sum()
    }

    /// Frame indices of the `λ_k` on a grid with `nt` intervals.
    pub fn frame_indices(&self, nt: usize) -> Result<Vec<usize>> {
        self.terms
            .iter()
            .map(|t| {
                crate::grid::field::grid_index(self.t0, self.t_end, nt, t.lambda)
                    .ok_or(Error::LambdaOffGrid { lambda: t.lambda })
            })
            .collect()
    }
}

/// Free propagator `U_L(t) = F^{-1} e^{-itL(ξ)} F` on a fixed grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: SpectralGrid,
    symbol_values: Vec<f64>,
}

impl Propagator {
    pub fn new(symbol: &EllipticSymbol, grid: &SpectralGrid) -> Result<Self> {
        Ok(Self { grid: grid.clone(), symbol_values: grid.symbol_values(symbol)? })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `L(ξ)` over the lattice in storage order.
    pub fn symbol_values(&self) -> &[f64] {
        &self.symbol_values
    }

    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.symbol_values.iter().map(|&l| propagator_phase(t, l)).collect()
    }

    pub(crate) fn apply_spectral(&self, t: f64, data: &mut [Complex64]) {
        for (z, &l) in data.iter_mut().zip(&self.symbol_values) {
            *z *= propagator_phase(t, l);
        }
    }

    pub fn apply(&self, t: f64, field: &Field) -> Result<Field> {
        if field.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut spec = self.grid.forward_transform(field)?.values().to_vec();
        self.apply_spectral(t, &mut spec);
        self.grid.inverse_raw(&mut spec);
        Ok(Field::from_raw(self.grid.clone(), spec))
    }
}

/// `U_L(t) f`.
pub fn apply_propagator(symbol: &EllipticSymbol, t: f64, field: &Field) -> Result<Field> {
    Propagator::new(symbol, field.grid())?.apply(t, field)
}

/// The resolvent factor `D(ξ) = 1 - Σ α_k e^{-i(λ_k - t0) L(ξ)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenominatorProfile {
    pub values: Vec<Complex64>,
    pub min_abs: f64,
}

impl DenominatorProfile {
    fn compute(prop: &Propagator, mp: &MultipointSpec) -> Self {
        let values: Vec<Complex64> = prop
            .symbol_values
            .iter()
            .map(|&l| {
                mp.terms.iter().fold(Complex64::new(1.0, 0.0), |acc, term| {
                    acc - term.alpha * propagator_phase(term.lambda - mp.t0, l)
                })
            })
            .collect();
        let min_abs = values.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
        Self { values, min_abs }
    }

    pub fn check(&self, eps_res: f64) -> Result<()> {
        if self.min_abs > eps_res {
            Ok(())
        } else {
            Err(Error::Resonance { min_abs: self.min_abs, eps_res })
        }
    }
}

pub fn multipoint_denominator(
    symbol: &EllipticSymbol,
    grid: &SpectralGrid,
    mp: &MultipointSpec,
) -> Result<DenominatorProfile> {
    Ok(DenominatorProfile::compute(&Propagator::new(symbol, grid)?, mp))
}

/// Spectral Duhamel recurrence on a uniform grid:
/// `Ĝ_m = E Ĝ_{m-1} - i (Δt/2) (E F̂_{m-1} + F̂_m)` with `E = e^{-iΔtL}`.
pub(crate) fn duhamel_spectral(
    prop: &Propagator,
    forcing: &[Vec<Complex64>],
    dt: f64,
) -> Vec<Vec<Complex64>> {
    let step = prop.phases(dt);
    let half = Complex64::new(0.0, -0.5 * dt);
    let mut out = Vec::with_capacity(forcing.len());
    out.push(vec![Complex64::new(0.0, 0.0); prop.grid.len()]);
    for m in 1..forcing.len() {
        let prev = &out[m - 1];
        let next: Vec<Complex64> = (0..prev.len())
            .map(|i| step[i] * prev[i] + half * (step[i] * forcing[m - 1][i] + forcing[m][i]))
            .collect();
        out.push(next);
    }
    out
}

fn forcing_spectra(forcing: &Trajectory) -> Result<Vec<Vec<Complex64>>> {
    let grid = forcing.grid();
    forcing
        .frames()
        .iter()
        .map(|f| grid.forward_transform(f).map(|s| s.values().to_vec()))
        .collect()
}

fn spectra_to_trajectory(grid: &SpectralGrid, t0: f64, t_end: f64, spectra: Vec<Vec<Complex64>>) -> Result<Trajectory> {
    let frames = spectra
        .into_iter()
        .map(|mut s| {
            grid.inverse_raw(&mut s);
            Field::new(grid.clone(), s).map_err(|_| Error::NonFinite("solution frame".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(t0, t_end, frames)
}

/// `G(t) = -i ∫_{t0}^t U_L(t - τ) F(τ) dτ` on the forcing's time grid.
pub fn duhamel(symbol: &EllipticSymbol, forcing: &Trajectory) -> Result<Trajectory> {
    let prop = Propagator::new(symbol, forcing.grid())?;
    let g = duhamel_spectral(&prop, &forcing_spectra(forcing)?, forcing.dt());
    spectra_to_trajectory(forcing.grid(), forcing.t0(), forcing.t_end(), g)
}

/// Multipoint problem data shared by the linear and nonlinear solvers.
#[derive(Debug, Clone)]
pub(crate) struct MultipointSystem {
    pub prop: Propagator,
    pub mp: MultipointSpec,
    pub denom: DenominatorProfile,
    pub lambda_frames: Vec<usize>,
    pub nt: usize,
    pub phi_hat: Vec<Complex64>,
}

impl MultipointSystem {
    pub fn new(
        symbol: &EllipticSymbol,
        mp: &MultipointSpec,
        phi: &Field,
        nt: usize,
        eps_res: f64,
    ) -> Result<Self> {
        if nt == 0 {
            return Err(Error::InvalidMultipoint("need at least one time interval".into()));
        }
        let grid = phi.grid();
        let prop = Propagator::new(symbol, grid)?;
        let lambda_frames = mp.frame_indices(nt)?;
        let denom = DenominatorProfile::compute(&prop, mp);
        denom.check(eps_res)?;
        let phi_hat = grid.forward_transform(phi)?.values().to_vec();
        Ok(Self { prop, mp: mp.clone(), denom, lambda_frames, nt, phi_hat })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.prop.grid
    }

    pub fn dt(&self) -> f64 {
        (self.mp.t_end - self.mp.t0) / self.nt as f64
    }

    pub fn check_axes(&self, traj: &Trajectory) -> Result<()> {
        if traj.grid() != self.grid()
            || traj.t0() != self.mp.t0
            || traj.t_end() != self.mp.t_end
            || traj.intervals() != self.nt
        {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `û0 = [φ̂ + Σ α_k Ĝ(λ_k)] / D`.
    pub fn initial_spectrum(&self, duhamel: Option<&[Vec<Complex64>]>) -> Vec<Complex64> {
        let mut rhs = self.phi_hat.clone();
        if let Some(g) = duhamel {
            for (term, &m) in self.mp.terms.iter().zip(&self.lambda_frames) {
                for (r, gi) in rhs.iter_mut().zip(&g[m]) {
                    *r += term.alpha * gi;
                }
            }
        }
        for (r, d) in rhs.iter_mut().zip(&self.denom.values) {
            *r /= d;
        }
        rhs
    }

    /// Full solution spectra `û(t_m) = e^{-i(t_m-t0)L} û0 + Ĝ_m` given forcing spectra.
    pub fn solve_spectral(&self, forcing: Option<&[Vec<Complex64>]>) -> Vec<Vec<Complex64>> {
        let g = forcing.map(|f| duhamel_spectral(&self.prop, f, self.dt()));
        let u0 = self.initial_spectrum(g.as_deref());
        (0..=self.nt)
            .map(|m| {
                let t = crate::grid::field::time_at(self.mp.t0, self.mp.t_end, self.nt, m) - self.mp.t0;
                let mut frame = u0.clone();
                self.prop.apply_spectral(t, &mut frame);
                if let Some(g) = &g {
                    for (z, gi) in frame.iter_mut().zip(&g[m]) {
                        *z += gi;
                    }
                }
                frame
            })
            .collect()
    }

    pub fn to_trajectory(&self, spectra: Vec<Vec<Complex64>>) -> Result<Trajectory> {
        spectra_to_trajectory(self.grid(), self.mp.t0, self.mp.t_end, spectra)
    }
}

/// Initial datum `u(t0)` that makes the (optionally forced) solution satisfy
/// the multipoint condition.
pub fn solve_initial_data(
    symbol: &EllipticSymbol,
    mp: &MultipointSpec,
    phi: &Field,
    forcing: Option<&Trajectory>,
    eps_res: f64,
) -> Result<Field> {
    let grid = phi.grid();
    if mp.terms.is_empty() {
        // Classical Cauchy datum; the Duhamel term does not enter.
        if let Some(f) = forcing {
            if f.grid() != grid || f.t0() != mp.t0 || f.t_end() != mp.t_end {
                return Err(Error::GridMismatch);
            }
        }
        return Ok(phi.clone());
    }
    let prop = Propagator::new(symbol, grid)?;
    let denom = DenominatorProfile::compute(&prop, mp);
    denom.check(eps_res)?;
    let phi_hat = grid.forward_transform(phi)?.values().to_vec();
    let (lambda_frames, nt, g) = match forcing {
        Some(f) => {
            if f.grid() != grid || f.t0() != mp.t0 || f.t_end() != mp.t_end {
                return Err(Error::GridMismatch);
            }
            let frames = mp.frame_indices(f.intervals())?;
            let g = duhamel_spectral(&prop, &forcing_spectra(f)?, f.dt());
            (frames, f.intervals(), Some(g))
        }
        None => (Vec::new(), 1, None),
    };
    let system = MultipointSystem { prop, mp: mp.clone(), denom, lambda_frames, nt, phi_hat };
    let mut u0 = system.initial_spectrum(g.as_deref());
    grid.inverse_raw(&mut u0);
    Field::new(grid.clone(), u0).map_err(|_| Error::NonFinite("initial datum".into()))
}

/// Solution of the multipoint problem on `nt` uniform intervals of `[t0, T]`.
pub fn solve_linear_multipoint(
    symbol: &EllipticSymbol,
    mp: &MultipointSpec,
    phi: &Field,
    forcing: Option<&Trajectory>,
    nt: usize,
    eps_res: f64,
) -> Result<Trajectory> {
    let system = MultipointSystem::new(symbol, mp, phi, nt, eps_res)?;
    let spectra = match forcing {
        Some(f) => {
            system.check_axes(f)?;
            system.solve_spectral(Some(&forcing_spectra(f)?))
        }
        None => system.solve_spectral(None),
    };
    system.to_trajectory(spectra)
}

/// Free evolution `U_L(t - t0) φ` sampled on `nt` intervals of `[t0, T]`.
pub fn free_evolution(symbol: &EllipticSymbol, phi: &Field, t0: f64, t_end: f64, nt: usize) -> Result<Trajectory> {
    solve_linear_multipoint(symbol, &MultipointSpec::classical(t0, t_end)?, phi, None, nt, 0.0)
}

/// Relative defect `‖u(t0) - φ - Σ α_k u(λ_k)‖₂ / ‖φ‖₂`.
pub fn multipoint_residual(traj: &Trajectory, mp: &MultipointSpec, phi: &Field) -> Result<f64> {
    if traj.grid() != phi.grid() || traj.t0() != mp.t0 || traj.t_end() != mp.t_end {
        return Err(Error::GridMismatch);
    }
    let frames = mp.frame_indices(traj.intervals())?;
    let mut defect: Vec<Complex64> = traj
        .frame(0)
        .values()
        .iter()
        .zip(phi.values())
        .map(|(u, p)| u - p)
        .collect();
    for (term, &m) in mp.terms.iter().zip(&frames) {
        for (d, u) in defect.iter_mut().zip(traj.frame(m).values()) {
            *d -= term.alpha * u;
        }
    }
    let defect = Field::from_raw(phi.grid().clone(), defect);
    let scale = lebesgue_norm(phi, 2.0)?.max(f64::EPSILON);
    Ok(lebesgue_norm(&defect, 2.0)? / scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveRow {
    pub t: f64,
    /// `‖U_L(t) φ‖_p`.
    pub norm: f64,
    /// `‖U_L(t) φ‖_p / (t^{-n(1/2 - 1/p)} ‖φ‖_{p'})`.
    pub quotient: f64,
    /// Share of the mass with some `|x_d| > 0.9 R`.
    pub shell_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveReport {
    pub p: f64,
    pub dual_norm: f64,
    pub rows: Vec<DispersiveRow>,
    /// Least-squares slope of `log ‖U_L(t) φ‖_p` against `log t`.
    pub slope: Option<f64>,
    /// Raised when any evolved field carries more than 1% of its mass in the
    /// outer shell of the box, where periodic images interfere.
    pub wraparound: bool,
}

/// Fraction of the mass in the outer 10% shell of the box.
pub fn shell_fraction(field: &Field) -> f64 {
    let grid = field.grid();
    let edge = SHELL_START * grid.half_width();
    let total = mass(field);
    if total == 0.0 {
        return 0.0;
    }
    let outer: f64 = field
        .values()
        .iter()
        .enumerate()
        .filter(|(flat, _)| grid.position(*flat)[..grid.dim()].iter().any(|x| x.abs() > edge))
        .map(|(_, z)| z.norm_sqr())
        .sum();
    grid.cell_volume() * outer / total
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Measures `‖U_L(t) φ‖_p` against the decay rate `t^{-n(1/2-1/p)} ‖φ‖_{p'}`.
pub fn verify_dispersive(symbol: &EllipticSymbol, phi: &Field, times: &[f64], p: f64) -> Result<DispersiveReport> {
    if p.is_nan() || p < 2.0 {
        return Err(Error::BadExponent(format!("p = {p} must lie in [2, inf]")));
    }
    if let Some(&t) = times.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::NonpositiveTime(t));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadExponent("times must be strictly increasing".into()));
    }
    let prop = Propagator::new(symbol, phi.grid())?;
    let dual = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    let dual_norm = lebesgue_norm(phi, dual)?;
    let rate = phi.grid().dim() as f64 * (0.5 - if p.is_infinite() { 0.0 } else { 1.0 / p });
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let evolved = prop.apply(t, phi)?;
        let norm = lebesgue_norm(&evolved, p)?;
        let quotient = norm / (t.powf(-rate) * dual_norm);
        rows.push(DispersiveRow { t, norm, quotient, shell_fraction: shell_fraction(&evolved) });
    }
    let logs_t: Vec<f64> = rows.iter().map(|r| r.t.ln()).collect();
    let logs_n: Vec<f64> = rows.iter().map(|r| r.norm.ln()).collect();
    let slope = least_squares_slope(&logs_t, &logs_n);
    let wraparound = shell_fraction(phi) > SHELL_MASS_LIMIT
        || rows.iter().any(|r| r.shell_fraction > SHELL_MASS_LIMIT);
    Ok(DispersiveReport { p, dual_norm, rows, slope, wraparound })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrichartzReport {
    pub pairs: Vec<AdmissiblePair>,
    /// `S⁰` norm of the free evolution divided by `‖φ‖₂`, per datum.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub wraparound: bool,
}

/// Strichartz ratios `‖U_L(·) φ‖_{S⁰} / ‖φ‖₂` of the free evolution for each datum.
pub fn verify_strichartz(
    symbol: &EllipticSymbol,
    data: &[Field],
    t0: f64,
    t_end: f64,
    nt: usize,
    pairs: &[AdmissiblePair],
) -> Result<StrichartzReport> {
    let mut ratios = Vec::with_capacity(data.len());
    let mut wraparound = false;
    for phi in data {
        let traj = free_evolution(symbol, phi, t0, t_end, nt)?;
        wraparound |= traj.frames().iter().any(|f| shell_fraction(f) > SHELL_MASS_LIMIT);
        let denom = lebesgue_norm(phi, 2.0)?;
        ratios.push(strichartz_norm(&traj, pairs)? / denom);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(StrichartzReport { pairs: pairs.to_vec(), ratios, max_ratio, wraparound })
}
