use std::path::PathBuf;

use mpnls::grid::random_smooth_field;
use mpnls::linear::{
    multipoint_denominator, multipoint_residual, shell_fraction, solve_linear_multipoint, SHELL_MASS_LIMIT,
};
use mpnls::nonlinear::{relative_drift, NlsProblem, NlsSolver, PicardSettings};
use mpnls::norms::{canonical_pairs, critical_exponent, fractional_derivative, is_admissible, lebesgue_norm, strichartz_norm};
use mpnls::{Field, PowerNonlinearity, SpectralGrid, Trajectory};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{ConfigError, Exponent, SolveConfig};
use crate::report::{
    ensure_dir, format_dispersive, format_strichartz, generated_by, time_series, write_file, RunResults, Summary,
    TimeSeriesRow, DISPERSIVE_FILE, STRICHARTZ_FILE,
};
use crate::CliError;

fn config_echo(config: &SolveConfig) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

/// `F(t, x) = f(x) e^{-iω(t - t0)}` sampled on the time grid.
fn forcing_trajectory(config: &SolveConfig, grid: &SpectralGrid) -> Result<Option<Trajectory>, CliError> {
    let Some(forcing) = &config.forcing else { return Ok(None) };
    let base = mpnls::grid::sample_profile(grid, &forcing.profile.to_profile(grid.dim()))?;
    let time = &config.time;
    let frames = (0..=time.nt)
        .map(|m| {
            let t = time.t0 + (time.t_end - time.t0) * m as f64 / time.nt as f64;
            base.scaled(Complex64::from_polar(1.0, -forcing.omega * (t - time.t0)))
        })
        .collect();
    Ok(Some(Trajectory::new(time.t0, time.t_end, frames)?))
}

fn wraparound_warning(traj: &Trajectory) -> Option<String> {
    let worst = traj.frames().iter().map(shell_fraction).fold(0.0, f64::max);
    (worst > SHELL_MASS_LIMIT).then(|| {
        format!("{:.2}% of the mass reaches the outer 10% of the box; periodic images may interfere", 100.0 * worst)
    })
}

fn drifts(rows: &[TimeSeriesRow]) -> (f64, f64) {
    let masses: Vec<f64> = rows.iter().map(|r| r.mass).collect();
    let energies: Vec<f64> = rows.iter().map(|r| r.energy).collect();
    (relative_drift(&masses), relative_drift(&energies))
}

fn ensure_finite(traj: &Trajectory, what: &str) -> Result<(), CliError> {
    if traj.is_finite() {
        Ok(())
    } else {
        Err(mpnls::Error::NonFinite(what.into()).into())
    }
}

pub fn run_linear(config: &SolveConfig) -> Result<RunResults, CliError> {
    let symbol = config.symbol()?;
    let grid = config.spectral_grid()?;
    let mp = config.multipoint_spec()?;
    let phi = config.initial_field(&grid)?;
    let forcing = forcing_trajectory(config, &grid)?;
    let eps_res = config.tolerances.eps_res;
    let n = grid.dim();

    let denom = multipoint_denominator(&symbol, &grid, &mp)?;
    denom.check(eps_res)?;
    let traj = solve_linear_multipoint(&symbol, &mp, &phi, forcing.as_ref(), config.time.nt, eps_res)?;
    ensure_finite(&traj, "linear solution")?;
    let residual = multipoint_residual(&traj, &mp, &phi)?;

    let free = PowerNonlinearity::new(0.0, 1.0)?;
    let rows = time_series(&traj, &symbol, &free, config.s, residual)?;
    let (mass_drift, energy_drift) = drifts(&rows);

    let pairs = canonical_pairs(n);
    let filtered = traj.map_frames(|f| fractional_derivative(f, config.s, true))?;
    let strichartz_value = strichartz_norm(&filtered, &pairs)?;

    let regularity = match &config.nonlinearity {
        Some(nl) => Some(critical_exponent(n, nl.p, config.s)?),
        None => None,
    };
    let mut warnings = Vec::new();
    if config.nonlinearity.is_some() {
        warnings.push("nonlinearity ignored by solve-linear".to_string());
    }
    warnings.extend(wraparound_warning(&traj));

    let summary = Summary {
        version: generated_by(),
        config_echo: config_echo(config),
        s_c: regularity.as_ref().map(|r| r.s_c),
        class: regularity.as_ref().map(|r| r.class.to_string()),
        eta: None,
        iterations: None,
        d_history: Vec::new(),
        contraction_ratios: Vec::new(),
        final_residual: None,
        mass_drift,
        energy_drift,
        min_abs_denominator: denom.min_abs,
        strichartz_pairs: pairs.iter().map(|p| p.to_string()).collect(),
        strichartz_value,
        warnings,
    };
    Ok(RunResults { trajectory: traj, rows, summary })
}

pub fn run_nls(config: &SolveConfig) -> Result<RunResults, CliError> {
    let Some(nl_config) = &config.nonlinearity else {
        return Err(ConfigError::ValidationFailure("solve-nls needs a nonlinearity".into()).into());
    };
    if config.forcing.is_some() {
        return Err(ConfigError::ValidationFailure("solve-nls does not take a forcing term".into()).into());
    }
    let symbol = config.symbol()?;
    let grid = config.spectral_grid()?;
    let mp = config.multipoint_spec()?;
    let phi = config.initial_field(&grid)?;
    let nl = PowerNonlinearity::new(nl_config.lambda, nl_config.p)?;
    let n = grid.dim();

    let mut problem = NlsProblem::new(symbol.clone(), mp.clone(), phi.clone(), nl, config.time.nt);
    problem.s = config.s;
    problem.eps_res = config.tolerances.eps_res;
    problem.sigma = config.sigma;
    let settings = PicardSettings { tol_fp: config.tolerances.tol_fp, max_iter: config.tolerances.max_iter };
    let (traj, diag) = NlsSolver::new(&problem)?.solve(&settings)?;
    ensure_finite(&traj, "nonlinear solution")?;
    let residual = multipoint_residual(&traj, &mp, &phi)?;

    let rows = time_series(&traj, &symbol, &nl, config.s, residual)?;
    let regularity = critical_exponent(n, nl_config.p, config.s)?;
    let summary = Summary {
        version: generated_by(),
        config_echo: config_echo(config),
        s_c: Some(regularity.s_c),
        class: Some(regularity.class.to_string()),
        eta: Some(diag.eta),
        iterations: Some(diag.iterations),
        d_history: diag.d_history,
        contraction_ratios: diag.contraction_ratios,
        final_residual: Some(diag.final_residual),
        mass_drift: diag.mass_drift,
        energy_drift: diag.energy_drift,
        min_abs_denominator: diag.min_abs_denominator,
        strichartz_pairs: canonical_pairs(n).iter().map(|p| p.to_string()).collect(),
        strichartz_value: diag.strichartz_value,
        warnings: diag.warnings,
    };
    Ok(RunResults { trajectory: traj, rows, summary })
}

pub(crate) fn verify_dispersive(config: &SolveConfig) -> Result<PathBuf, CliError> {
    let verify = config.verify();
    if verify.times.is_empty() {
        return Err(ConfigError::ValidationFailure("verify.times is required for verify-dispersive".into()).into());
    }
    let symbol = config.symbol()?;
    let grid = config.spectral_grid()?;
    let phi = config.initial_field(&grid)?;
    let report = mpnls::linear::verify_dispersive(&symbol, &phi, &verify.times, verify.p.0)?;

    let dir = &config.outputs.report_path;
    ensure_dir(dir)?;
    let path = dir.join(DISPERSIVE_FILE);
    write_file(&path, format_dispersive(&report).as_bytes())?;
    Ok(path)
}

pub(crate) fn verify_strichartz(config: &SolveConfig) -> Result<PathBuf, CliError> {
    let verify = config.verify();
    let symbol = config.symbol()?;
    let grid = config.spectral_grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(verify.seed);
    let mut data: Vec<Field> = vec![config.initial_field(&grid)?];
    data.extend((0..verify.samples).map(|_| random_smooth_field(&grid, &mut rng)));
    let pairs = canonical_pairs(grid.dim());
    let time = &config.time;
    let report = mpnls::linear::verify_strichartz(&symbol, &data, time.t0, time.t_end, time.nt, &pairs)?;
    let l2 = data.iter().map(|u| lebesgue_norm(u, 2.0)).collect::<mpnls::Result<Vec<_>>>()?;

    let dir = &config.outputs.report_path;
    ensure_dir(dir)?;
    let path = dir.join(STRICHARTZ_FILE);
    write_file(&path, format_strichartz(&report, &l2).as_bytes())?;
    Ok(path)
}

pub(crate) fn classify(n: usize, p: f64, s: f64) -> Result<String, CliError> {
    let report = critical_exponent(n, p, s)?;
    Ok(json!({ "n": n, "p": p, "s": s, "s_c": report.s_c, "class": report.class.to_string() }).to_string())
}

pub(crate) fn check_admissible(n: usize, q: f64, r: f64) -> Result<String, CliError> {
    let class = is_admissible(n, q, r)?;
    Ok(json!({ "n": n, "q": Exponent(q), "r": Exponent(r), "class": class.to_string() }).to_string())
}
