//! Solitary waves and pseudo-spectral dynamics for the generalized
//! Boussinesq equation
//!
//! ```text
//! u_tt = (u - α u_xx + u_tt - κ u_xxtt + β u^{p+1})_xx
//! ```
//!
//! on a periodic box `[-L, L)`.
//!
//! * [`spectral`]: grid, transforms, Fourier multipliers and norms.
//! * [`model`]: parameters, closed-form solutions, the Green's kernel of
//!   `I - ∂² + κ∂⁴` and the parameter-regime classifier.
//! * [`petviashvili`]: stabilized fixed-point construction of solitary waves.
//! * [`evolution`]: RK4 time stepping of the Fourier system and the
//!   conserved/diagnostic functionals.
//! * [`experiments`]: accuracy tests, convergence studies and blow-up
//!   threshold searches.
//! * [`io`] and [`cli`]: run configuration, data export and the `gbq` binary.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the experiments use.

// `!(x > 0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod io;
pub mod model;
pub mod petviashvili;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = spectral::GridSpec<f64>;
pub type Field = spectral::RealField<f64>;
pub type Spectrum = spectral::SpectrumCoeffs<f64>;
pub type SpectralContext = spectral::Spectral<f64>;
pub type Params = model::EquationParams<f64>;
pub type Hbq = model::HbqParams<f64>;
pub type Kernel = model::KernelSpec<f64>;
pub type Regime = model::RegimeReport<f64>;
pub type SolveConfig = petviashvili::SolitarySolveConfig<f64>;
pub type Solitary = petviashvili::SolitaryResult<f64>;

pub type State = evolution::FieldPair<f64>;
pub type Integrator = evolution::TimeIntegratorConfig<f64>;
pub type Series = evolution::DiagnosticsSeries<f64>;
