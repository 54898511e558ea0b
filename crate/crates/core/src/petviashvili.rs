//! Construction of solitary waves `Q_c` by Petviashvili's stabilized
//! fixed-point iteration in Fourier space.
//!
//! A traveling wave `u = Q_c(x - ct)` solves
//!
//! ```text
//! κc² Q'''' + (α - c²) Q'' + (c² - 1) Q = β Q^{p+1},
//! ```
//!
//! i.e. `D(k) Q̂ = β (Q^{p+1})^` with `D(k) = κc²k⁴ + (c² - α)k² + c² - 1`.
//! The plain iteration `Q̂ ← β(Q^{p+1})^ / D` drifts to zero or infinity;
//! multiplying by `Mₙ^γ`, where `Mₙ` is the ratio of the quadratic forms of
//! the two sides, removes that mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EquationParams;
use crate::scalar::{lit, sech, to_f64, Real};
use crate::spectral::{RealField, Spectral};

/// `D(k) = κc²k⁴ + (c² - α)k² + c² - 1`.
pub fn denominator<T: Real>(k: T, params: &EquationParams<T>, c: T) -> T {
    let c2 = c * c;
    let k2 = k * k;
    params.kappa * c2 * k2 * k2 + (c2 - params.alpha) * k2 + c2 - T::one()
}

/// True iff `D(k) ≠ 0` for every real `k`, decided on the quadratic in
/// `z = k² ≥ 0`.
pub fn check_denominator_positive<T: Real>(params: &EquationParams<T>, c: T) -> bool {
    let c2 = c * c;
    let a = params.kappa * c2;
    let b = c2 - params.alpha;
    let c0 = c2 - T::one();
    if !(c0 > T::zero()) {
        return false;
    }
    if a == T::zero() {
        // linear in z: bz + c0 stays positive on z ≥ 0 iff b ≥ 0
        return b >= T::zero();
    }
    let disc = b * b - lit::<T>(4.0) * a * c0;
    // with c0 > 0 both roots share the sign of -b
    disc < T::zero() || b > T::zero()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialGuess<T> {
    Gaussian {
        amplitude: T,
        width: T,
    },
    SechPower {
        amplitude: T,
        width: T,
        power: T,
    },
    #[serde(skip)]
    Custom(RealField<T>),
}

impl<T: Real> InitialGuess<T> {
    pub fn sample(&self, spectral: &Spectral<T>) -> Result<RealField<T>> {
        let grid = spectral.grid();
        let field = match self {
            InitialGuess::Gaussian { amplitude, width } => {
                let (a, w) = (*amplitude, *width);
                grid.sample(|x| a * (-(x / w) * (x / w)).exp())
            }
            InitialGuess::SechPower {
                amplitude,
                width,
                power,
            } => {
                let (a, w, p) = (*amplitude, *width, *power);
                grid.sample(|x| a * sech(x / w).powf(p))
            }
            InitialGuess::Custom(f) => {
                if f.len() != grid.n_points() {
                    return Err(Error::invalid(
                        "initial_guess",
                        "custom field length does not match grid",
                    ));
                }
                f.clone()
            }
        };
        field.check_finite("initial guess")?;
        Ok(field)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitarySolveConfig<T> {
    pub speed: T,
    /// Exponent on the stabilizing factor.
    pub gamma: T,
    /// Stop once `Error(n)`, `|1 - Mₙ|` and `RES(n)` are all below `tol`.
    pub tol: T,
    pub max_iter: usize,
    pub initial_guess: InitialGuess<T>,
}

impl<T: Real> SolitarySolveConfig<T> {
    /// Defaults: `γ = (p+1)/p`, `tol = 1e-13`, `max_iter = 2000`,
    /// guess `sech²(x)`.
    pub fn new(speed: T, p_exp: u32) -> Self {
        let p = T::from_u32(p_exp).unwrap();
        Self {
            speed,
            gamma: (p + T::one()) / p,
            tol: lit(1e-13),
            max_iter: 2000,
            initial_guess: InitialGuess::SechPower {
                amplitude: T::one(),
                width: T::one(),
                power: lit(2.0),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.speed.is_finite() {
            return Err(Error::invalid("speed", "must be finite"));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::invalid("max_iter", "must be >= 1"));
        }
        if !self.gamma.is_finite() {
            return Err(Error::invalid("gamma", "must be finite"));
        }
        Ok(())
    }
}

/// Per-iteration convergence record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationErrors<T> {
    /// `‖Q_{n+1} - Q_n‖_∞`.
    pub error: T,
    /// `|1 - Mₙ|`.
    pub stabilizer_error: T,
    /// `‖𝓡 Q_n‖_∞`.
    pub residual: T,
}

impl<T: Real> IterationErrors<T> {
    pub fn max(&self) -> T {
        self.error.max(self.stabilizer_error).max(self.residual)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolitaryResult<T> {
    pub profile: RealField<T>,
    pub iterations: usize,
    pub history: Vec<IterationErrors<T>>,
    pub converged: bool,
    /// `M` at the last iteration.
    pub stabilizer: T,
}

/// Consecutive increases of `Error(n)` that count as divergence.
const DIVERGENCE_RUN: usize = 20;

/// Runs the stabilized iteration
/// `Q̂_{n+1} = Mₙ^γ β (Qₙ^{p+1})^ / D(k)` with
/// `Mₙ = Σ D |Q̂ₙ|² / Re Σ β (Qₙ^{p+1})^ conj(Q̂ₙ)`.
///
/// The iterate is carried in Fourier space so that the residual
/// `D Q̂ - β(Q^{p+1})^` is evaluated without amplifying the round-off of
/// a physical-space round trip.
pub fn petviashvili_solve<T: Real>(
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
    cfg: &SolitarySolveConfig<T>,
) -> Result<SolitaryResult<T>> {
    params.validate()?;
    cfg.validate()?;
    let c = cfg.speed;
    if !check_denominator_positive(params, c) {
        return Err(Error::DenominatorVanishes { speed: to_f64(c) });
    }

    let n = spectral.n();
    let half = spectral.half_len();
    let symbol: Vec<T> = spectral
        .half_kappa()
        .iter()
        .map(|&k| denominator(k, params, c))
        .collect();
    let power = params.p_exp as i32 + 1;

    let guess = cfg.initial_guess.sample(spectral)?;
    let mut q_hat = spectral.forward_half(&guess);
    let mut q = vec![T::zero(); n];
    let mut nl = vec![T::zero(); n];
    let mut nl_hat = spectral.zero_half();
    let mut scratch = spectral.zero_half();
    let mut work = vec![T::zero(); n];

    let mut history = Vec::new();
    let mut rising = 0usize;
    let mut converged = false;
    let mut stabilizer = T::nan();

    for iter in 0..cfg.max_iter {
        scratch.copy_from_slice(&q_hat);
        spectral.inverse_half_inplace(&mut scratch, &mut q);
        for (dst, &v) in nl.iter_mut().zip(&q) {
            *dst = params.beta * v.powi(power);
        }
        spectral.forward_half_inplace(&mut nl, &mut nl_hat);

        let mut num = T::zero();
        let mut den = T::zero();
        for m in 0..half {
            let w = if m == 0 || m == half - 1 { T::one() } else { lit(2.0) };
            num += w * symbol[m] * q_hat[m].norm_sqr();
            den += w * (nl_hat[m] * q_hat[m].conj()).re;
        }
        let m_n = num / den;
        stabilizer = m_n;
        if !m_n.is_finite() || !(m_n > T::zero()) {
            return Err(Error::Divergence {
                iteration: iter,
                reason: format!("stabilizing factor {m_n} is not positive and finite"),
            });
        }

        for m in 0..half {
            scratch[m] = q_hat[m] * symbol[m] - nl_hat[m];
        }
        spectral.inverse_half_inplace(&mut scratch, &mut work);
        let residual = max_abs(&work);

        let factor = m_n.powf(cfg.gamma);
        for m in 0..half {
            let next = nl_hat[m] * (factor / symbol[m]);
            scratch[m] = next - q_hat[m];
            q_hat[m] = next;
        }
        spectral.inverse_half_inplace(&mut scratch, &mut work);
        let error = max_abs(&work);

        if !error.is_finite() || !residual.is_finite() {
            return Err(Error::NonFinite {
                context: "Petviashvili iterate",
            });
        }
        if let Some(prev) = history.last() {
            let prev: &IterationErrors<T> = prev;
            rising = if error > prev.error { rising + 1 } else { 0 };
        }
        let record = IterationErrors {
            error,
            stabilizer_error: (T::one() - m_n).abs(),
            residual,
        };
        history.push(record);
        if rising >= DIVERGENCE_RUN {
            return Err(Error::Divergence {
                iteration: iter,
                reason: format!("Error(n) grew for {DIVERGENCE_RUN} consecutive iterations"),
            });
        }
        if record.max() <= cfg.tol {
            converged = true;
            break;
        }
    }

    let profile = spectral.inverse_half(&q_hat);
    Ok(SolitaryResult {
        profile,
        iterations: history.len(),
        history,
        converged,
        stabilizer,
    })
}

/// `𝓡Q = κc²Q'''' + (α - c²)Q'' + (c² - 1)Q - βQ^{p+1}`, with the linear
/// part evaluated as the Fourier multiplier `D(k)`.
pub fn residual<T: Real>(
    q: &RealField<T>,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
    c: T,
) -> Result<RealField<T>> {
    let mut lin = spectral.apply_even_symbol(q, |k| denominator(k, params, c))?;
    for (r, &v) in lin.iter_mut().zip(q.iter()) {
        *r -= params.nonlinearity(v);
    }
    Ok(lin)
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}
