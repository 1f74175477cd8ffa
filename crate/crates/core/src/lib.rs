//! Numerical laboratory for the three-dimensional radial semilinear wave equation
//!
//!   u_tt - Δu = |u|^p μ(|u|),   p = 1 + √2,
//!
//! where μ is a modulus of continuity evaluated at the solution amplitude.
//! The crate provides:
//!
//! * modulus families (power-log, iterated-log, log-product, sampled) with a
//!   convergence classifier for the small-amplitude integral ∫ μ^p(λ)/λ dλ,
//! * characteristic-grid solvers (leapfrog and Picard/Duhamel) for the radial
//!   Cauchy problem, with blow-up detection,
//! * the exponential test-function family η and its kernel Φ,
//! * weighted functionals H, 𝒰 with an integral-identity residual check and
//!   Jensen/Hölder diagnostics,
//! * the discrete iteration engine producing double-exponential lower bounds
//!   and a blow-up onset estimate.

pub mod constants;
pub mod error;
pub mod export;
pub mod functional;
pub mod iteration;
pub mod modulus;
pub mod quad;
pub mod radial_wave;
pub mod testfunc;

pub use constants::StraussConstants;
pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
