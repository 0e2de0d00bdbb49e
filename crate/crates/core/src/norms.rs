//! Discrete Lebesgue, mixed space-time, Sobolev and Strichartz norms,
//! admissibility and criticality arithmetic, and the conserved mass and
//! energy functionals.
//!
//! All spatial integrals use the grid quadrature `h Σ_x`; time integrals use
//! trapezoidal weights on the trajectory's uniform time grid. Infinite
//! exponents are represented by `f64::INFINITY` and evaluated as maxima over
//! samples.

use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::grid::{Field, Trajectory};
use crate::nonlinear::Nonlinearity;
#[cfg(test)]
use crate::nonlinear::PowerNonlinearity;
use crate::symbol::EllipticSymbol;

const CRITICAL_TIE_TOL: f64 = 1e-12;

fn check_exponent(name: &str, value: f64, min: f64) -> Result<()> {
    if value.is_nan() || value < min {
        return Err(Error::BadExponent(format!("{name} = {value} must lie in [{min}, inf]")));
    }
    Ok(())
}

/// `(Σ w_i a_i^r)^{1/r}` for nonnegative `a_i`, or `max a_i` when `r = ∞`.
/// Scaled by the maximum so large exponents do not overflow.
fn weighted_power_mean(values: impl Iterator<Item = (f64, f64)> + Clone, r: f64) -> f64 {
    let peak = values.clone().map(|(a, _)| a).fold(0.0, f64::max);
    if r.is_infinite() || peak == 0.0 {
        return peak;
    }
    let sum: f64 = values.map(|(a, w)| w * (a / peak).powf(r)).sum();
    peak * sum.powf(1.0 / r)
}

/// `‖u‖_{L^r} = (h Σ_x |u|^r)^{1/r}`, or `max |u|` for `r = ∞`.
pub fn lebesgue_norm(field: &Field, r: f64) -> Result<f64> {
    check_exponent("r", r, 1.0)?;
    let h = field.grid().cell_volume();
    Ok(weighted_power_mean(field.values().iter().map(|z| (z.norm(), h)), r))
}

/// Trapezoidal weights `Δt · (½, 1, …, 1, ½)`.
pub fn trapezoid_weights(traj: &Trajectory) -> Vec<f64> {
    let nt = traj.intervals();
    let dt = traj.dt();
    (0..=nt).map(|m| if m == 0 || m == nt { 0.5 * dt } else { dt }).collect()
}

/// `‖u‖_{L^q_t L^r_x}` over the trajectory's time interval.
pub fn mixed_norm(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    check_exponent("q", q, 1.0)?;
    check_exponent("r", r, 1.0)?;
    let per_frame = traj
        .frames()
        .iter()
        .map(|f| lebesgue_norm(f, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_norm(&per_frame, &trapezoid_weights(traj), q))
}

/// `L^q` norm of a sampled time series with the given quadrature weights.
pub(crate) fn time_norm(samples: &[f64], weights: &[f64], q: f64) -> f64 {
    weighted_power_mean(samples.iter().copied().zip(weights.iter().copied()), q)
}

/// Applies the Fourier multiplier `|ξ|^s` (homogeneous) or `⟨ξ⟩^s`.
///
/// For `s = 0` both multipliers are the identity.
pub fn fractional_derivative(field: &Field, s: f64, homogeneous: bool) -> Result<Field> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::NegativeS(s));
    }
    if s == 0.0 {
        return Ok(field.clone());
    }
    let grid = field.grid();
    let mut spec = grid.forward_transform(field)?;
    for (z, k2) in spec.values_mut().iter_mut().zip(grid.frequency_norms_sq()) {
        let m = if homogeneous { k2.powf(0.5 * s) } else { (1.0 + k2).powf(0.5 * s) };
        *z *= m;
    }
    grid.inverse_transform(&spec)
}

/// `‖u‖_{W^{s,p}}` (multiplier `⟨ξ⟩^s`) or `‖u‖_{Ẇ^{s,p}}` (multiplier `|ξ|^s`).
pub fn sobolev_norm(field: &Field, s: f64, homogeneous: bool, p: f64) -> Result<f64> {
    check_exponent("p", p, 1.0)?;
    lebesgue_norm(&fractional_derivative(field, s, homogeneous)?, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Sharp,
    Nonsharp,
    Rejected,
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Admissibility::Sharp => "sharp",
            Admissibility::Nonsharp => "nonsharp",
            Admissibility::Rejected => "rejected",
        })
    }
}

/// Best rational approximation with denominator at most `10^6`, accepted
/// only when it reproduces `x` to `1e-12` relative.
fn as_rational(x: f64) -> Option<Ratio<i64>> {
    const MAX_DEN: i64 = 1_000_000;
    let (mut h0, mut h1) = (0_i64, 1_i64);
    let (mut k0, mut k1) = (1_i64, 0_i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > MAX_DEN {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(Ratio::new(h1, k1));
        }
        let frac = rest - a as f64;
        if frac == 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

/// `1/x` as a rational, with `1/∞ = 0`.
fn reciprocal(x: f64) -> Option<Ratio<i64>> {
    if x.is_infinite() {
        Some(Ratio::from_integer(0))
    } else {
        as_rational(x).map(|r| r.recip())
    }
}

/// Classifies `(q, r)` in dimension `n`: admissible when
/// `2/q + n/r <= n/2` and `(n, q, r) != (2, 2, ∞)`, sharp on equality.
pub fn is_admissible(n: usize, q: f64, r: f64) -> Result<Admissibility> {
    check_exponent("q", q, 2.0)?;
    check_exponent("r", r, 2.0)?;
    if n == 2 && q == 2.0 && r.is_infinite() {
        return Ok(Admissibility::Rejected);
    }
    let ordering = match (reciprocal(q), reciprocal(r)) {
        (Some(iq), Some(ir)) => {
            let lhs = Ratio::from_integer(2) * iq + Ratio::from_integer(n as i64) * ir;
            lhs.cmp(&Ratio::new(n as i64, 2))
        }
        _ => {
            let lhs = 2.0 / q + n as f64 / r;
            let rhs = n as f64 / 2.0;
            if (lhs - rhs).abs() <= 1e-12 * rhs.max(1.0) {
                std::cmp::Ordering::Equal
            } else {
                lhs.total_cmp(&rhs)
            }
        }
    };
    Ok(match ordering {
        std::cmp::Ordering::Greater => Admissibility::Rejected,
        std::cmp::Ordering::Equal => Admissibility::Sharp,
        std::cmp::Ordering::Less => Admissibility::Nonsharp,
    })
}

/// An admissible exponent pair `(q, r)` for a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissiblePair {
    q: f64,
    r: f64,
    sharp: bool,
}

impl AdmissiblePair {
    pub fn new(n: usize, q: f64, r: f64) -> Result<Self> {
        match is_admissible(n, q, r)? {
            Admissibility::Rejected => Err(Error::InadmissiblePair { n, q, r }),
            class => Ok(Self { q, r, sharp: class == Admissibility::Sharp }),
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sharp(&self) -> bool {
        self.sharp
    }
}

impl fmt::Display for AdmissiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        write!(f, "({},{})", show(self.q), show(self.r))
    }
}

/// The finite pair set standing in for the supremum in the Strichartz norm:
/// `(∞, 2)` plus the sharp pairs with `q ∈ {2 (n > 2 only), 4, 6, 8, ∞}`.
pub fn canonical_pairs(n: usize) -> Vec<AdmissiblePair> {
    let mut pairs = vec![AdmissiblePair { q: f64::INFINITY, r: 2.0, sharp: true }];
    let mut qs = Vec::new();
    if n > 2 {
        qs.push(2.0);
    }
    qs.extend([4.0, 6.0, 8.0]);
    for q in qs {
        // 2/q + n/r = n/2  =>  r = 2nq / (nq - 4)
        let nq = n as f64 * q;
        let r = if nq == 4.0 { f64::INFINITY } else { 2.0 * nq / (nq - 4.0) };
        if r < 2.0 {
            continue;
        }
        if let Ok(pair) = AdmissiblePair::new(n, q, r) {
            if !pairs.iter().any(|p| p.q == pair.q && p.r == pair.r) {
                pairs.push(pair);
            }
        }
    }
    pairs
}

/// `β(r, r̃) = n/2 - 1 - (n/2)(1/r - 1/r̃)`.
pub fn beta(n: usize, r: f64, r_tilde: f64) -> Result<f64> {
    check_exponent("r", r, 1.0)?;
    check_exponent("r_tilde", r_tilde, 1.0)?;
    let half_n = n as f64 / 2.0;
    Ok(half_n - 1.0 - half_n * (1.0 / r - 1.0 / r_tilde))
}

/// Maximum of `‖u‖_{L^q_t L^r_x}` over the given admissible pairs.
pub fn strichartz_norm(traj: &Trajectory, pairs: &[AdmissiblePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    let n = traj.grid().dim();
    let mut best = 0.0_f64;
    for pair in pairs {
        AdmissiblePair::new(n, pair.q, pair.r)?;
        best = best.max(mixed_norm(traj, pair.q, pair.r)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criticality::Subcritical => "subcritical",
            Criticality::Critical => "critical",
            Criticality::Supercritical => "supercritical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub s: f64,
    pub s_c: f64,
    pub class: Criticality,
}

/// Critical regularity `s_c = n/2 - 2/p` and the class of `s` relative to it.
pub fn critical_exponent(n: usize, p: f64, s: f64) -> Result<RegularityReport> {
    if n == 0 {
        return Err(Error::BadDimension(n));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::BadPower(p));
    }
    let s_c = n as f64 / 2.0 - 2.0 / p;
    let class = if (s - s_c).abs() <= CRITICAL_TIE_TOL {
        Criticality::Critical
    } else if s > s_c {
        Criticality::Subcritical
    } else {
        Criticality::Supercritical
    };
    Ok(RegularityReport { s, s_c, class })
}

/// `M(u) = h Σ_x |u|²`.
pub fn mass(field: &Field) -> f64 {
    field.grid().cell_volume() * field.values().iter().map(Complex64::norm_sqr).sum::<f64>()
}

/// Hamiltonian of `i ∂_t u + L u + F(u) = 0`:
/// `E = h Σ_x [ ½ Σ_ij a_ij ∂_i u conj(∂_j u) - G(u) ]`, where `G` is the
/// potential density (`λ/(p+2) |u|^{p+2}` for the power law). Derivatives
/// are taken spectrally.
pub fn energy<N: Nonlinearity>(field: &Field, symbol: &EllipticSymbol, nl: &N) -> Result<f64> {
    let grid = field.grid();
    let n = grid.dim();
    if symbol.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: symbol.dim() });
    }
    let spec = grid.forward_transform(field)?;
    let gradients: Vec<Vec<Complex64>> = (0..n)
        .map(|d| {
            let mut data: Vec<Complex64> = spec
                .values()
                .iter()
                .enumerate()
                .map(|(flat, z)| Complex64::new(0.0, grid.frequency(flat)[d]) * z)
                .collect();
            grid.inverse_raw(&mut data);
            data
        })
        .collect();

    let mut kinetic = Complex64::new(0.0, 0.0);
    let mut potential = 0.0;
    for x in 0..grid.len() {
        for i in 0..n {
            for j in 0..n {
                kinetic += symbol.coeff(i, j) * gradients[i][x] * gradients[j][x].conj();
            }
        }
        potential += nl.potential(field.values()[x]);
    }
    let h = grid.cell_volume();
    let total = h * (0.5 * kinetic - potential);
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(Error::NonFinite("energy".into()));
    }
    debug_assert!(total.im.abs() <= 1e-10 * total.re.abs().max(1.0));
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_smooth_field, sample_profile, Profile, SpectralGrid};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn constant(grid: &SpectralGrid, c: Complex64) -> Field {
        Field::new(grid.clone(), vec![c; grid.len()]).unwrap()
    }

    fn plane_wave(grid: &SpectralGrid, amplitude: f64, modes: Vec<f64>) -> Field {
        sample_profile(grid, &Profile::PlaneWave { amplitude, modes }).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn lebesgue_examples() {
        let g = SpectralGrid::new(1, 32, PI).unwrap();
        let one = constant(&g, Complex64::new(1.0, 0.0));
        assert!(close(lebesgue_norm(&one, 2.0).unwrap(), (2.0 * PI).sqrt(), 1e-14));
        for r in [1.0, 2.0, 7.5, f64::INFINITY] {
            assert_eq!(lebesgue_norm(&Field::zeros(&g), r).unwrap(), 0.0);
        }
        let wave = plane_wave(&g, 2.0, vec![3.0]);
        assert!(close(lebesgue_norm(&wave, f64::INFINITY).unwrap(), 2.0, 1e-14));
        assert!(matches!(lebesgue_norm(&one, 0.5), Err(Error::BadExponent(_))));
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let g = SpectralGrid::new(1, 8, 1.0).unwrap();
        let big = constant(&g, Complex64::new(1e200, 0.0));
        let v = lebesgue_norm(&big, 50.0).unwrap();
        assert!(v.is_finite() && close(v, 1e200 * 2f64.powf(1.0 / 50.0), 1e-12));
    }

    #[test]
    fn mixed_norm_examples() {
        let g = SpectralGrid::new(1, 16, PI).unwrap();
        let one = Trajectory::new(0.0, 1.0, vec![constant(&g, Complex64::new(1.0, 0.0)); 11]).unwrap();
        assert!(close(mixed_norm(&one, 2.0, 2.0).unwrap(), (2.0 * PI).sqrt(), 1e-14));
        let zero = Trajectory::zeros(&g, 0.0, 1.0, 4).unwrap();
        assert_eq!(mixed_norm(&zero, 3.0, f64::INFINITY).unwrap(), 0.0);
        assert!(mixed_norm(&one, 0.0, 2.0).is_err());
    }

    #[test]
    fn mixed_norm_with_equal_exponents_is_flat_space_time_norm() {
        let g = SpectralGrid::new(2, 8, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frames: Vec<Field> = (0..7).map(|_| random_smooth_field(&g, &mut rng)).collect();
        let traj = Trajectory::new(0.5, 2.0, frames).unwrap();
        let w = trapezoid_weights(&traj);
        let h = g.cell_volume();
        for q in [1.0, 2.0, 3.5] {
            let flat: f64 = traj
                .frames()
                .iter()
                .zip(&w)
                .flat_map(|(f, wt)| f.values().iter().map(move |z| wt * h * z.norm().powf(q)))
                .sum::<f64>()
                .powf(1.0 / q);
            assert!(close(mixed_norm(&traj, q, q).unwrap(), flat, 1e-12));
        }
    }

    #[test]
    fn sobolev_examples() {
        let g = SpectralGrid::new(1, 32, PI).unwrap();
        let u = random_smooth_field(&g, &mut ChaCha8Rng::seed_from_u64(2));
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert!(close(sobolev_norm(&u, 0.0, false, p).unwrap(), lebesgue_norm(&u, p).unwrap(), 1e-12));
        }
        // |k|^s √(2π) for a unit plane wave.
        let k = 3.0_f64;
        let wave = plane_wave(&g, 1.0, vec![k]);
        for s in [0.5, 1.0, 1.7] {
            let expected = k.powf(s) * (2.0 * PI).sqrt();
            assert!(close(sobolev_norm(&wave, s, true, 2.0).unwrap(), expected, 1e-12));
        }
        let c = constant(&g, Complex64::new(0.7, -0.2));
        assert!(sobolev_norm(&c, 1.0, true, 2.0).unwrap() < 1e-14);
        assert!(matches!(sobolev_norm(&c, -0.1, true, 2.0), Err(Error::NegativeS(_))));
        assert!(matches!(sobolev_norm(&c, 2.5, true, 2.0), Err(Error::NegativeS(_))));
    }

    #[test]
    fn admissibility_examples() {
        assert_eq!(is_admissible(2, 2.0, f64::INFINITY).unwrap(), Admissibility::Rejected);
        assert_eq!(is_admissible(3, 2.0, 6.0).unwrap(), Admissibility::Sharp);
        assert_eq!(is_admissible(3, f64::INFINITY, 2.0).unwrap(), Admissibility::Sharp);
        assert_eq!(is_admissible(2, 6.0, 3.0).unwrap(), Admissibility::Sharp);
        assert_eq!(is_admissible(2, 8.0, 8.0 / 3.0).unwrap(), Admissibility::Sharp);
        assert_eq!(is_admissible(1, 4.0, f64::INFINITY).unwrap(), Admissibility::Sharp);
        assert_eq!(is_admissible(3, 4.0, 6.0).unwrap(), Admissibility::Nonsharp);
        assert_eq!(is_admissible(1, 2.0, 2.0).unwrap(), Admissibility::Rejected);
        assert!(matches!(is_admissible(2, 1.5, 4.0), Err(Error::BadExponent(_))));
    }

    #[test]
    fn canonical_pairs_are_sharp_and_distinct() {
        for n in 1..=3 {
            let pairs = canonical_pairs(n);
            assert_eq!(pairs[0].q(), f64::INFINITY);
            assert_eq!(pairs[0].r(), 2.0);
            for p in &pairs {
                assert_eq!(is_admissible(n, p.q(), p.r()).unwrap(), Admissibility::Sharp);
            }
        }
        let n2: Vec<(f64, f64)> = canonical_pairs(2).iter().map(|p| (p.q(), p.r())).collect();
        assert_eq!(n2.len(), 4);
        assert!(n2.iter().all(|&(q, _)| q != 2.0));
        assert!(canonical_pairs(3).iter().any(|p| p.q() == 2.0 && p.r() == 6.0));
    }

    #[test]
    fn beta_examples() {
        for n in 1..=3 {
            assert_eq!(beta(n, 3.0, 3.0).unwrap(), n as f64 / 2.0 - 1.0);
        }
        assert!(close(beta(3, 6.0, 2.0).unwrap(), 1.0, 1e-15));
        assert_eq!(beta(2, 5.0, 5.0).unwrap(), 0.0);
        assert!(beta(2, 0.5, 2.0).is_err());
    }

    #[test]
    fn strichartz_norm_behaviour() {
        let g = SpectralGrid::new(2, 8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let frames: Vec<Field> = (0..5).map(|_| random_smooth_field(&g, &mut rng)).collect();
        let traj = Trajectory::new(0.0, 1.0, frames).unwrap();
        let pairs = canonical_pairs(2);
        let single = strichartz_norm(&traj, &pairs[1..2]).unwrap();
        assert_eq!(single, mixed_norm(&traj, pairs[1].q(), pairs[1].r()).unwrap());
        let mut running = 0.0;
        for k in 1..=pairs.len() {
            let v = strichartz_norm(&traj, &pairs[..k]).unwrap();
            assert!(v >= running);
            running = v;
        }
        let zero = Trajectory::zeros(&g, 0.0, 1.0, 3).unwrap();
        assert_eq!(strichartz_norm(&zero, &pairs).unwrap(), 0.0);
        assert!(matches!(strichartz_norm(&traj, &[]), Err(Error::EmptyPairSet)));
        // A pair valid for n = 3 is not admissible on a 2-d trajectory.
        let foreign = AdmissiblePair::new(3, 2.0, 6.0).unwrap();
        assert!(matches!(strichartz_norm(&traj, &[foreign]), Err(Error::InadmissiblePair { .. })));
    }

    #[test]
    fn classification_examples() {
        let r = critical_exponent(3, 4.0, 1.0).unwrap();
        assert_eq!((r.s_c, r.class), (1.0, Criticality::Critical));
        let r = critical_exponent(2, 2.0, 0.0).unwrap();
        assert_eq!((r.s_c, r.class), (0.0, Criticality::Critical));
        let r = critical_exponent(1, 4.0, 0.3).unwrap();
        assert_eq!((r.s_c, r.class), (0.0, Criticality::Subcritical));
        let r = critical_exponent(3, 4.0, 0.5).unwrap();
        assert_eq!(r.class, Criticality::Supercritical);
        assert!(matches!(critical_exponent(3, 0.0, 1.0), Err(Error::BadPower(_))));
    }

    #[test]
    fn mass_examples() {
        let g = SpectralGrid::new(1, 32, PI).unwrap();
        let wave = plane_wave(&g, 2.0, vec![1.0]);
        assert!(close(mass(&wave), 4.0 * 2.0 * PI, 1e-14));
        assert_eq!(mass(&Field::zeros(&g)), 0.0);
        let u = random_smooth_field(&g, &mut ChaCha8Rng::seed_from_u64(4));
        assert!(close(mass(&u), lebesgue_norm(&u, 2.0).unwrap().powi(2), 1e-12));
    }

    #[test]
    fn energy_examples() {
        let g = SpectralGrid::new(1, 32, PI).unwrap();
        let sym = EllipticSymbol::identity(1);
        let free = PowerNonlinearity::new(0.0, 2.0).unwrap();
        let (a, k) = (1.5, 3.0);
        let wave = plane_wave(&g, a, vec![k]);
        let expected = 0.5 * k * k * a * a * 2.0 * PI;
        assert!(close(energy(&wave, &sym, &free).unwrap(), expected, 1e-12));
        let c = constant(&g, Complex64::new(2.0, 1.0));
        assert!(energy(&c, &sym, &free).unwrap().abs() < 1e-12);
        assert_eq!(energy(&Field::zeros(&g), &sym, &free).unwrap(), 0.0);
    }

    #[test]
    fn energy_with_coupling_and_anisotropic_symbol() {
        // ½ Σ a_ij k_i k_j A² |Ω| - λ/(p+2) A^{p+2} |Ω| for a plane wave.
        let g = SpectralGrid::new(2, 16, PI).unwrap();
        let sym = EllipticSymbol::new(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let nl = PowerNonlinearity::new(-1.0, 2.0).unwrap();
        let (a, k) = (0.8, [1.0, -2.0]);
        let wave = plane_wave(&g, a, k.to_vec());
        let vol = (2.0 * PI).powi(2);
        let quad = sym.eval(&k).unwrap();
        let expected = 0.5 * quad * a * a * vol + 0.25 * a.powi(4) * vol;
        assert!(close(energy(&wave, &sym, &nl).unwrap(), expected, 1e-12));
    }

    #[test]
    fn free_energy_nonnegative_and_zero_only_on_constants() {
        let g = SpectralGrid::new(2, 16, 4.0).unwrap();
        let sym = EllipticSymbol::new(&[vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap();
        let free = PowerNonlinearity::new(0.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let u = random_smooth_field(&g, &mut rng);
            assert!(energy(&u, &sym, &free).unwrap() > 1e-12 * mass(&u));
        }
    }

    proptest! {
        #[test]
        fn norms_are_absolutely_homogeneous(re in -5.0..5.0f64, im in -5.0..5.0f64, seed in 0u64..1000) {
            let g = SpectralGrid::new(1, 16, 3.0).unwrap();
            let u = random_smooth_field(&g, &mut ChaCha8Rng::seed_from_u64(seed));
            let c = Complex64::new(re, im);
            let cu = u.scaled(c);
            for r in [1.0, 2.0, 3.0, f64::INFINITY] {
                let lhs = lebesgue_norm(&cu, r).unwrap();
                let rhs = c.norm() * lebesgue_norm(&u, r).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
            }
            let lhs = sobolev_norm(&cu, 0.7, true, 2.0).unwrap();
            let rhs = c.norm() * sobolev_norm(&u, 0.7, true, 2.0).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
            let traj = Trajectory::new(0.0, 1.0, vec![u.clone(), u.scaled(Complex64::new(0.5, 0.0)), u]).unwrap();
            let lhs = mixed_norm(&traj.scaled(c), 4.0, 2.0).unwrap();
            let rhs = c.norm() * mixed_norm(&traj, 4.0, 2.0).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn sharp_iff_scaling_equality(n in 1usize..=3, num in 1i64..40, den in 1i64..40) {
            // Pick 1/q in [0, 1/2] as a rational; derive r from the sharp line.
            let inv_q = Ratio::new(num.min(den), 2 * den.max(num));
            let q = if *inv_q.numer() == 0 { f64::INFINITY } else { (*inv_q.denom() as f64) / (*inv_q.numer() as f64) };
            let inv_r = (Ratio::new(n as i64, 2) - Ratio::from_integer(2) * inv_q) / Ratio::from_integer(n as i64);
            prop_assume!(inv_r >= Ratio::from_integer(0) && inv_r <= Ratio::new(1, 2));
            let r = if *inv_r.numer() == 0 { f64::INFINITY } else { (*inv_r.denom() as f64) / (*inv_r.numer() as f64) };
            prop_assume!(!(n == 2 && q == 2.0 && r.is_infinite()));
            prop_assert_eq!(is_admissible(n, q, r).unwrap(), Admissibility::Sharp);
            // Any strictly larger r (smaller 1/r) leaves the sharp line.
            if r.is_finite() {
                prop_assert_eq!(is_admissible(n, q, r * 1.5).unwrap(), Admissibility::Nonsharp);
            }
        }
    }
}
