//! Picard iteration for `i ∂_t u + L u + F(u) = 0` under the multipoint
//! condition `u(t0) = φ + Σ α_k u(λ_k)`.
//!
//! The whole space-time trajectory is iterated: `u(λ_k)` enters the initial
//! datum, so the solution cannot be marched forward in time. Each step
//! evaluates the forcing `-F(u)` on all frames, re-solves the multipoint
//! datum against it and propagates with the Duhamel quadrature. Distances
//! are measured in `L^{p+2}_t L^r_x` with `r = 2n(p+2) / (2(n-2) + np)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Trajectory};
use crate::linear::{shell_fraction, MultipointSpec, MultipointSystem, DEFAULT_EPS_RES};
use crate::norms::{
    canonical_pairs, energy, fractional_derivative, mass, mixed_norm, sobolev_norm,
    strichartz_norm,
};
use crate::symbol::EllipticSymbol;

pub const DEFAULT_TOL_FP: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;

/// A pointwise nonlinearity `F(u)` of declared power growth `p`.
pub trait Nonlinearity {
    fn apply(&self, z: Complex64) -> Complex64;

    fn power(&self) -> f64;

    /// Density `G(u)` of the potential energy, `E = ∫ ½ a∇u·∇ū - G(u)`.
    fn potential(&self, z: Complex64) -> f64;
}

/// `F(u) = λ |u|^p u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNonlinearity {
    coupling: f64,
    power: f64,
}

impl PowerNonlinearity {
    pub fn new(coupling: f64, power: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::BadPower(power));
        }
        if !coupling.is_finite() {
            return Err(Error::NonFinite("coupling".into()));
        }
        Ok(Self { coupling, power })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }
}

impl Nonlinearity for PowerNonlinearity {
    fn apply(&self, z: Complex64) -> Complex64 {
        if self.coupling == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        z * (self.coupling * z.norm().powf(self.power))
    }

    fn power(&self) -> f64 {
        self.power
    }

    fn potential(&self, z: Complex64) -> f64 {
        self.coupling / (self.power + 2.0) * z.norm().powf(self.power + 2.0)
    }
}

/// Pointwise `F(u)`; overflow is reported rather than propagated.
pub fn eval_nonlinearity<N: Nonlinearity>(field: &Field, nl: &N) -> Result<Field> {
    let values: Vec<Complex64> = field.values().iter().map(|&z| nl.apply(z)).collect();
    Field::new(field.grid().clone(), values).map_err(|e| match e {
        Error::NonFiniteInput => Error::NonFinite("nonlinearity overflow".into()),
        other => other,
    })
}

/// `max_x |F(u) - F(v)| / (|u - v| (|u|^p + |v|^p))`, skipping points where
/// the denominator vanishes; 0 when every point is skipped.
pub fn lipschitz_check(u: &Field, v: &Field, nl: &PowerNonlinearity) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let p = nl.power();
    Ok(u.values()
        .iter()
        .zip(v.values())
        .filter_map(|(&a, &b)| {
            let den = (a - b).norm() * (a.norm().powf(p) + b.norm().powf(p));
            (den > 0.0).then(|| (nl.apply(a) - nl.apply(b)).norm() / den)
        })
        .fold(0.0, f64::max))
}

/// Spatial exponent of the contraction metric, `r = 2n(p+2) / (2(n-2) + np)`.
///
/// Returns `(r, clamped)`; values outside `[2, ∞)` (only possible for
/// `n = 1, p <= 2`) are clamped to 2.
pub fn metric_exponent(n: usize, p: f64) -> (f64, bool) {
    let n = n as f64;
    let denom = 2.0 * (n - 2.0) + n * p;
    let r = 2.0 * n * (p + 2.0) / denom;
    if denom > 0.0 && r.is_finite() && r >= 2.0 {
        (r, false)
    } else {
        (2.0, true)
    }
}

/// `‖ |∇|^s U_L(t - t0) φ ‖_{L^{p+2}_t L^σ_x([t0, T])}` on `nt` intervals.
#[allow(clippy::too_many_arguments)]
pub fn smallness_indicator(
    symbol: &EllipticSymbol,
    phi: &Field,
    s: f64,
    p: f64,
    t0: f64,
    t_end: f64,
    nt: usize,
    sigma: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::NegativeS(s));
    }
    if !(p > 0.0) {
        return Err(Error::BadPower(p));
    }
    let filtered = fractional_derivative(phi, s, true)?;
    let free = crate::linear::free_evolution(symbol, &filtered, t0, t_end, nt)?;
    mixed_norm(&free, p + 2.0, sigma)
}

/// Multipoint nonlinear problem on a fixed space-time grid.
#[derive(Debug, Clone)]
pub struct NlsProblem<N> {
    pub symbol: EllipticSymbol,
    pub multipoint: MultipointSpec,
    pub phi: Field,
    pub nonlinearity: N,
    /// Number of time intervals on `[t0, T]`.
    pub nt: usize,
    /// Regularity used for the smallness indicator and reported estimates.
    pub s: f64,
    pub eps_res: f64,
    /// Spatial exponent of the smallness indicator; defaults to the metric exponent.
    pub sigma: Option<f64>,
}

impl<N: Nonlinearity> NlsProblem<N> {
    pub fn new(symbol: EllipticSymbol, multipoint: MultipointSpec, phi: Field, nonlinearity: N, nt: usize) -> Self {
        Self { symbol, multipoint, phi, nonlinearity, nt, s: 0.0, eps_res: DEFAULT_EPS_RES, sigma: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    pub tol_fp: f64,
    pub max_iter: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self { tol_fp: DEFAULT_TOL_FP, max_iter: DEFAULT_MAX_ITER }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardDiagnostics {
    pub iterations: usize,
    /// `d(u^{j+1}, u^j)` for each Picard step.
    pub d_history: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    /// `d(u, Φ(u))` for the returned trajectory.
    pub final_residual: f64,
    pub eta: f64,
    pub metric_exponent: f64,
    pub metric_clamped: bool,
    pub sigma: f64,
    /// Max relative deviation of the mass from its value at `t0`.
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub min_abs_denominator: f64,
    /// `‖ |∇|^s u ‖_{L^{p+2}_t L^σ_x}`, the left side of the `2η` bound.
    pub smallness_of_solution: f64,
    /// `‖ |∇|^s u ‖_{S⁰}` over the canonical pair set.
    pub strichartz_value: f64,
    /// `sup_t ‖u(t)‖_{Ẇ^{s,2}}`.
    pub sup_sobolev: f64,
    pub warnings: Vec<String>,
}

/// Fixed-point solver state: the multipoint system is assembled once.
pub struct NlsSolver<'a, N> {
    problem: &'a NlsProblem<N>,
    system: MultipointSystem,
    metric_r: f64,
    metric_clamped: bool,
}

impl<'a, N: Nonlinearity> NlsSolver<'a, N> {
    pub fn new(problem: &'a NlsProblem<N>) -> Result<Self> {
        let p = problem.nonlinearity.power();
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::BadPower(p));
        }
        if !(0.0..=1.0).contains(&problem.s) {
            return Err(Error::NegativeS(problem.s));
        }
        let system = MultipointSystem::new(
            &problem.symbol,
            &problem.multipoint,
            &problem.phi,
            problem.nt,
            problem.eps_res,
        )?;
        let (metric_r, metric_clamped) = metric_exponent(problem.phi.grid().dim(), p);
        Ok(Self { problem, system, metric_r, metric_clamped })
    }

    pub fn metric_exponent(&self) -> f64 {
        self.metric_r
    }

    /// `d(u, v) = ‖u - v‖_{L^{p+2}_t L^r_x}`.
    pub fn distance(&self, u: &Trajectory, v: &Trajectory) -> Result<f64> {
        mixed_norm(&u.difference(v)?, self.problem.nonlinearity.power() + 2.0, self.metric_r)
    }

    /// Solution of the linear multipoint problem (`F = 0`).
    pub fn linear_solution(&self) -> Result<Trajectory> {
        self.system.to_trajectory(self.system.solve_spectral(None))
    }

    /// `Φ(u)`: the multipoint solution forced by `-F(u)`.
    pub fn step(&self, current: &Trajectory) -> Result<Trajectory> {
        self.system.check_axes(current)?;
        let grid = self.system.grid();
        let forcing = current
            .frames()
            .iter()
            .map(|frame| {
                let mut data: Vec<Complex64> =
                    frame.values().iter().map(|&z| -self.problem.nonlinearity.apply(z)).collect();
                if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite("nonlinearity overflow".into()));
                }
                grid.forward_raw(&mut data);
                Ok(data)
            })
            .collect::<Result<Vec<_>>>()?;
        self.system.to_trajectory(self.system.solve_spectral(Some(&forcing)))
    }

    pub fn integral_residual(&self, traj: &Trajectory) -> Result<f64> {
        let next = self.step(traj)?;
        self.distance(traj, &next)
    }

    pub fn solve(&self, settings: &PicardSettings) -> Result<(Trajectory, PicardDiagnostics)> {
        self.solve_from(self.linear_solution()?, settings)
    }

    /// Iterates `u^{j+1} = Φ(u^j)` from `initial` until `d(u^{j+1}, u^j) < tol_fp`.
    pub fn solve_from(&self, initial: Trajectory, settings: &PicardSettings) -> Result<(Trajectory, PicardDiagnostics)> {
        let mut current = initial;
        let mut d_history = Vec::new();
        let mut converged = false;
        for _ in 0..settings.max_iter {
            let next = self.step(&current)?;
            let d = self.distance(&next, &current)?;
            if !d.is_finite() {
                return Err(Error::NonFinite(format!("Picard distance after {} steps", d_history.len() + 1)));
            }
            d_history.push(d);
            current = next;
            if d < settings.tol_fp {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: d_history.len(),
                last_distance: d_history.last().copied().unwrap_or(f64::NAN),
            });
        }
        let diagnostics = self.diagnose(&current, d_history)?;
        Ok((current, diagnostics))
    }

    fn diagnose(&self, traj: &Trajectory, d_history: Vec<f64>) -> Result<PicardDiagnostics> {
        let problem = self.problem;
        let nl = &problem.nonlinearity;
        let p = nl.power();
        let sigma = problem.sigma.unwrap_or(self.metric_r);
        let mut warnings = Vec::new();
        if self.metric_clamped {
            warnings.push(format!(
                "metric exponent r(p={p}, n={}) outside [2, inf); clamped to 2",
                traj.grid().dim()
            ));
        }

        let contraction_ratios = d_history.windows(2).map(|w| w[1] / w[0]).collect();
        let final_residual = self.integral_residual(traj)?;
        let eta = smallness_indicator(
            &problem.symbol,
            &problem.phi,
            problem.s,
            p,
            traj.t0(),
            traj.t_end(),
            traj.intervals(),
            sigma,
        )?;

        let masses: Vec<f64> = traj.frames().iter().map(mass).collect();
        let energies = traj
            .frames()
            .iter()
            .map(|f| energy(f, &problem.symbol, nl))
            .collect::<Result<Vec<_>>>()?;
        let mass_drift = relative_drift(&masses);
        let energy_drift = relative_drift(&energies);

        let filtered = traj.map_frames(|f| fractional_derivative(f, problem.s, true))?;
        let smallness_of_solution = mixed_norm(&filtered, p + 2.0, sigma)?;
        let strichartz_value = strichartz_norm(&filtered, &canonical_pairs(traj.grid().dim()))?;
        let sup_sobolev = traj
            .frames()
            .iter()
            .map(|f| sobolev_norm(f, problem.s, true, 2.0))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);

        let worst_shell = traj.frames().iter().map(shell_fraction).fold(0.0, f64::max);
        if worst_shell > crate::linear::SHELL_MASS_LIMIT {
            warnings.push(format!(
                "{:.2}% of the mass reaches the outer 10% of the box; periodic images may interfere",
                100.0 * worst_shell
            ));
        }

        Ok(PicardDiagnostics {
            iterations: d_history.len(),
            d_history,
            contraction_ratios,
            final_residual,
            eta,
            metric_exponent: self.metric_r,
            metric_clamped: self.metric_clamped,
            sigma,
            mass_drift,
            energy_drift,
            min_abs_denominator: self.system.denom.min_abs,
            smallness_of_solution,
            strichartz_value,
            sup_sobolev,
            warnings,
        })
    }
}

/// `max_m |x_m - x_0| / |x_0|`, with the scale floored at machine epsilon.
pub fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else { return 0.0 };
    let scale = first.abs().max(f64::EPSILON);
    series.iter().map(|x| (x - first).abs() / scale).fold(0.0, f64::max)
}

/// One application of the solution map `Φ`.
pub fn picard_step<N: Nonlinearity>(problem: &NlsProblem<N>, current: &Trajectory) -> Result<Trajectory> {
    NlsSolver::new(problem)?.step(current)
}

pub fn solve_nls_multipoint<N: Nonlinearity>(
    problem: &NlsProblem<N>,
    settings: &PicardSettings,
) -> Result<(Trajectory, PicardDiagnostics)> {
    NlsSolver::new(problem)?.solve(settings)
}

/// Defect `d(u, Φ(u))` of the integral equation.
pub fn integral_residual<N: Nonlinearity>(problem: &NlsProblem<N>, traj: &Trajectory) -> Result<f64> {
    NlsSolver::new(problem)?.integral_residual(traj)
}
