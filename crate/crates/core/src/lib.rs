//! Pseudospectral solvers for linear and nonlinear Schrödinger equations
//! `i ∂_t u + L u + F(u) = 0` with a constant-coefficient elliptic part and a
//! multipoint initial condition `u(t0) = φ + Σ α_k u(λ_k)`, together with
//! numerical checks of dispersive decay and Strichartz bounds.
//!
//! Space is discretized on the torus `[-R, R)^n`; the linear flow is applied
//! exactly per Fourier mode and forcing enters through a second-order
//! Duhamel quadrature.

pub mod error;
pub mod grid;
pub mod linear;
pub mod nonlinear;
pub mod norms;
pub mod symbol;

pub use error::{Error, Result};
pub use grid::{Field, Profile, SpectralGrid, Spectrum, Trajectory};
pub use linear::MultipointSpec;
pub use nonlinear::{Nonlinearity, PowerNonlinearity};
pub use symbol::EllipticSymbol;
