//! Equation parameters, closed-form solutions, the Green's kernel of
//! `I - ∂² + κ∂⁴` and the classifier for the solitary-wave parameter regime.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::petviashvili::check_denominator_positive;
use crate::scalar::{from_usize, lit, sech, Real};
use crate::spectral::{GridSpec, RealField};

/// Coefficients of `u_tt = (u - α u_xx + u_tt - κ u_xxtt + β u^{p+1})_xx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationParams<T> {
    pub alpha: T,
    pub kappa: T,
    pub beta: T,
    /// Nonlinearity exponent `p` in `f(u) = β u^{p+1}`.
    pub p_exp: u32,
}

impl<T: Real> EquationParams<T> {
    pub fn new(alpha: T, kappa: T, beta: T, p_exp: u32) -> Result<Self> {
        let params = Self {
            alpha,
            kappa,
            beta,
            p_exp,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= T::zero()) || !self.alpha.is_finite() {
            return Err(Error::invalid(
                "alpha",
                format!("must be finite and >= 0, got {}", self.alpha),
            ));
        }
        if !(self.kappa >= T::zero()) || !self.kappa.is_finite() {
            return Err(Error::invalid(
                "kappa",
                format!("must be finite and >= 0, got {}", self.kappa),
            ));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be finite"));
        }
        if self.p_exp < 1 {
            return Err(Error::invalid("p", "nonlinearity exponent must be >= 1"));
        }
        Ok(())
    }

    /// `α = κ = 1, β = -1, p = 2`, i.e. `f(u) = -u³`.
    pub fn cubic_focusing() -> Self {
        Self {
            alpha: T::one(),
            kappa: T::one(),
            beta: -T::one(),
            p_exp: 2,
        }
    }

    /// `f(u) = β u^{p+1}`.
    pub fn nonlinearity(&self, u: T) -> T {
        self.beta * u.powi(self.p_exp as i32 + 1)
    }

    /// `F(u) = ∫₀ᵘ f = β u^{p+2} / (p+2)`.
    pub fn potential(&self, u: T) -> T {
        let q = self.p_exp as i32 + 2;
        self.beta * u.powi(q) / T::from_i32(q).unwrap()
    }
}

/// Stationary (`c = 0`) solitary wave, the positive solution of
/// `Q - α Q'' + β Q^{p+1} = 0` for `β < 0`.
pub fn stationary_q0<T: Real>(x: T, params: &EquationParams<T>) -> Result<T> {
    if !(params.beta < T::zero()) {
        return Err(Error::invalid("beta", "stationary wave requires beta < 0"));
    }
    if !(params.alpha > T::zero()) {
        return Err(Error::invalid("alpha", "stationary wave requires alpha > 0"));
    }
    let p = T::from_u32(params.p_exp).unwrap();
    let two = lit::<T>(2.0);
    let amp = ((p + two) / (-two * params.beta)).powf(p.recip());
    let arg = p / two * params.alpha.recip().sqrt() * x;
    Ok(amp * sech(arg).powf(two / p))
}

/// Parameters of the higher-order Boussinesq equation
/// `u_tt = (u + η₁ u_tt - η₂ u_xxtt + u^p)_xx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HbqParams<T> {
    pub eta1: T,
    pub eta2: T,
    pub p_hbq: u32,
}

impl<T: Real> HbqParams<T> {
    pub fn new(eta1: T, eta2: T, p_hbq: u32) -> Result<Self> {
        if !(eta1 > T::zero()) {
            return Err(Error::invalid("eta1", "must be positive"));
        }
        if !(eta2 > T::zero()) {
            return Err(Error::invalid("eta2", "must be positive"));
        }
        if p_hbq < 2 {
            return Err(Error::invalid("p_hbq", "must be >= 2"));
        }
        let hbq = Self { eta1, eta2, p_hbq };
        if !(hbq.speed_bracket() > T::zero()) {
            return Err(Error::invalid(
                "eta1",
                "speed bracket 1 - 4η₁²(p+1)²/(η₂(p²+2p+5)²) must be positive",
            ));
        }
        Ok(hbq)
    }

    /// The benchmark case `η₁ = η₂ = 1, p = 2`.
    pub fn benchmark() -> Self {
        Self {
            eta1: T::one(),
            eta2: T::one(),
            p_hbq: 2,
        }
    }

    fn p(&self) -> T {
        T::from_u32(self.p_hbq).unwrap()
    }

    fn speed_bracket(&self) -> T {
        let p = self.p();
        let s = p * p + lit::<T>(2.0) * p + lit(5.0);
        T::one() - lit::<T>(4.0) * self.eta1 * self.eta1 * (p + T::one()).powi(2) / (self.eta2 * s * s)
    }

    pub fn speed_squared(&self) -> T {
        self.speed_bracket().recip()
    }

    pub fn speed(&self) -> T {
        self.speed_squared().sqrt()
    }

    pub fn amplitude(&self) -> T {
        let p = self.p();
        let one = T::one();
        let s = p * p + lit::<T>(2.0) * p + lit(5.0);
        let base =
            self.eta1 * self.eta1 * self.speed_squared() * (p + one) * (p + lit(3.0)) * (lit::<T>(3.0) * p + one)
                / (lit::<T>(2.0) * self.eta2 * s * s);
        base.powf((p - one).recip())
    }

    pub fn inverse_width(&self) -> T {
        let p = self.p();
        let s = p * p + lit::<T>(2.0) * p + lit(5.0);
        (self.eta1 * (p - T::one()).powi(2) / (lit::<T>(4.0) * self.eta2 * s)).sqrt()
    }

    /// The matching gBq parameters (`α = 0, κ = η₂, β = 1, p = p_hbq - 1`).
    /// Only defined for `η₁ = 1`, where the two equations coincide.
    pub fn gbq_params(&self) -> Result<EquationParams<T>> {
        if self.eta1 != T::one() {
            return Err(Error::invalid("eta1", "gBq correspondence requires eta1 = 1"));
        }
        EquationParams::new(T::zero(), self.eta2, T::one(), self.p_hbq - 1)
    }

    /// Traveling solitary wave `A sech^{4/(p-1)}(B(x - ct - x₀))` with
    /// `c = sign · √c²`.
    pub fn exact(&self, x: T, t: T, x0: T, sign_c: T) -> T {
        let c = sign_c.signum() * self.speed();
        let q = lit::<T>(4.0) / (self.p() - T::one());
        self.amplitude() * sech(self.inverse_width() * (x - c * t - x0)).powf(q)
    }

    /// Time derivative `u_t` of [`HbqParams::exact`].
    pub fn velocity(&self, x: T, t: T, x0: T, sign_c: T) -> T {
        let c = sign_c.signum() * self.speed();
        let q = lit::<T>(4.0) / (self.p() - T::one());
        let b = self.inverse_width();
        let y = b * (x - c * t - x0);
        c * q * self.amplitude() * b * sech(y).powf(q) * y.tanh()
    }

    /// `u_t(x, 0)` of the right-moving wave centred at the origin.
    pub fn initial_velocity(&self, x: T) -> T {
        self.velocity(x, T::zero(), T::zero(), T::one())
    }
}

/// Free-function form of [`HbqParams::exact`].
pub fn hbq_exact<T: Real>(x: T, t: T, hbq: &HbqParams<T>, x0: T, sign_c: T) -> T {
    hbq.exact(x, t, x0, sign_c)
}

/// Free-function form of [`HbqParams::initial_velocity`].
pub fn hbq_initial_velocity<T: Real>(x: T, hbq: &HbqParams<T>) -> T {
    hbq.initial_velocity(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    /// Complex characteristic roots: tails decay with oscillation.
    OscillatoryDecay,
    /// Four real roots: sech-like monotone tails.
    MonotoneDecay,
    /// A purely imaginary root pair: linearized tails do not decay.
    NonDecaying,
    /// The characteristic quartic collapses (`c = 0`, `κ = 0` or `c² = 1`).
    Degenerate,
}

/// Predicates under which no nontrivial `H⁴` solitary wave exists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonexistenceFlags {
    /// `c² ≥ max{α,1}`, `β < 0`, `p` even.
    pub high_speed_defocusing: bool,
    /// `c² ≤ min{α,1}`, `β > 0`, `p` even.
    pub low_speed_focusing: bool,
    /// `α ≤ c² < 1`, any `p`.
    pub subsonic_window: bool,
    /// `κ(1-c²)c²/(c²-α)² > (p+4)²/(4p(3p+8))` with `c² < 1`, `c² ≠ α`.
    pub interpolation_bound: bool,
    /// `α > c² > 1` and `κ ≤ (α-c²)²/(4c²(c²-1))`: purely imaginary roots.
    pub imaginary_roots: bool,
}

impl NonexistenceFlags {
    pub fn any(&self) -> bool {
        self.high_speed_defocusing
            || self.low_speed_focusing
            || self.subsonic_window
            || self.interpolation_bound
            || self.imaginary_roots
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport<T> {
    /// `Δ = (α - c²)² - 4κc²(c² - 1)`.
    pub discriminant: T,
    /// Roots `λ²` of `κc² z² + (α - c²) z + (c² - 1) = 0`; `None` when the
    /// quartic degenerates.
    pub lambda_squared: Option<[Complex<T>; 2]>,
    /// The four characteristic roots `±√z`.
    pub roots: Option<[Complex<T>; 4]>,
    pub profile_class: ProfileClass,
    pub nonexistence: NonexistenceFlags,
    /// Sufficient condition for existence via concentration compactness:
    /// `p > 1, κ > 0, β > 0, c² > 1` and `c⁴(1-4κ) + α² + 2c²(2κ-α) < 0`.
    pub existence_hypothesis: bool,
    /// The Fourier-side denominator never vanishes on the real line.
    pub petviashvili_denominator_ok: bool,
}

/// Relative threshold below which a root component is treated as zero.
const ROOT_ZERO_TOL: f64 = 1e-9;

/// Classifies the solitary-wave regime of `(α, κ, β, p)` at speed `c`.
pub fn regime_classify<T: Real>(params: &EquationParams<T>, c: T) -> RegimeReport<T> {
    let EquationParams {
        alpha,
        kappa,
        beta,
        p_exp,
    } = *params;
    let one = T::one();
    let zero = T::zero();
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let c2 = c * c;
    let p = T::from_u32(p_exp).unwrap();
    let p_even = p_exp % 2 == 0;

    let a = kappa * c2;
    let b = alpha - c2;
    let c0 = c2 - one;
    let discriminant = b * b - four * a * c0;

    let thm_hyp = alpha > zero && kappa > zero;
    let mut flags = NonexistenceFlags {
        high_speed_defocusing: thm_hyp && c2 >= alpha.max(one) && beta < zero && p_even,
        low_speed_focusing: thm_hyp && c2 <= alpha.min(one) && beta > zero && p_even,
        subsonic_window: thm_hyp && alpha <= c2 && c2 < one,
        ..Default::default()
    };
    if thm_hyp && c2 != alpha && c2 < one && c != zero {
        let lhs = kappa * (one - c2) * c2 / ((c2 - alpha) * (c2 - alpha));
        let rhs = (p + four).powi(2) / (four * p * (lit::<T>(3.0) * p + lit(8.0)));
        flags.interpolation_bound = lhs > rhs;
    }
    if alpha > c2 && c2 > one {
        flags.imaginary_roots = kappa <= (alpha - c2).powi(2) / (four * c2 * (c2 - one));
    }

    let existence_hypothesis = p_exp > 1
        && kappa > zero
        && beta > zero
        && c2 > one
        && c2 * c2 * (one - four * kappa) + alpha * alpha + two * c2 * (two * kappa - alpha) < zero;

    let petviashvili_denominator_ok = check_denominator_positive(params, c);

    let (lambda_squared, roots, profile_class) = if a == zero {
        (None, None, ProfileClass::Degenerate)
    } else {
        let z = quadratic_roots(a, b, c0, discriminant);
        let r0 = z[0].sqrt();
        let r1 = z[1].sqrt();
        let roots = [r0, -r0, r1, -r1];
        (Some(z), Some(roots), classify_roots(&roots))
    };

    RegimeReport {
        discriminant,
        lambda_squared,
        roots,
        profile_class,
        nonexistence: flags,
        existence_hypothesis,
        petviashvili_denominator_ok,
    }
}

/// Roots of `a z² + b z + c0` with the cancellation-free real branch.
fn quadratic_roots<T: Real>(a: T, b: T, c0: T, disc: T) -> [Complex<T>; 2] {
    let two = lit::<T>(2.0);
    if disc >= T::zero() {
        let sq = disc.sqrt();
        let q = -(b + b.signum() * sq) / two;
        if q == T::zero() {
            let z = Complex::new(T::zero(), T::zero());
            return [z, z];
        }
        [Complex::new(q / a, T::zero()), Complex::new(c0 / q, T::zero())]
    } else {
        let re = -b / (two * a);
        let im = (-disc).sqrt() / (two * a);
        [Complex::new(re, im), Complex::new(re, -im)]
    }
}

fn classify_roots<T: Real>(roots: &[Complex<T>; 4]) -> ProfileClass {
    let tol = lit::<T>(ROOT_ZERO_TOL);
    if roots.iter().any(|r| r.norm() == T::zero()) {
        return ProfileClass::Degenerate;
    }
    let mut all_real = true;
    for r in roots {
        let mag = r.norm();
        if r.re.abs() <= tol * mag {
            return ProfileClass::NonDecaying;
        }
        if r.im.abs() > tol * mag {
            all_real = false;
        }
    }
    if all_real {
        ProfileClass::MonotoneDecay
    } else {
        ProfileClass::OscillatoryDecay
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelBranch {
    /// `4κ < 1`: two real decay rates.
    Sub,
    /// `4κ = 1`: double root.
    Critical,
    /// `4κ > 1`: oscillatory decay.
    Super,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchShape<T> {
    Sub { lambda1: T, lambda2: T },
    Critical { rate: T },
    Super { sigma: T, omega: T },
}

/// Convolution kernel `K` with `K * f = (I - ∂² + κ∂⁴)^{-1} f`.
///
/// The analytic shape carries the prefactor `κπ`; `normalization` rescales
/// it so that `∫K = 1`, the value of the symbol at zero frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub kappa: T,
    pub branch: KernelBranch,
    pub shape: BranchShape<T>,
    pub normalization: T,
}

impl<T: Real> KernelSpec<T> {
    pub fn new(kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::invalid(
                "kappa",
                format!("kernel requires kappa > 0, got {kappa}"),
            ));
        }
        let one = T::one();
        let two = lit::<T>(2.0);
        let four = lit::<T>(4.0);
        let gap = four * kappa - one;
        // |4κ - 1| below √ε is treated as the double root
        let (branch, shape) = if gap.abs() <= T::epsilon().sqrt() {
            (
                KernelBranch::Critical,
                BranchShape::Critical {
                    rate: kappa.powf(lit(-0.25)),
                },
            )
        } else if gap < T::zero() {
            let s = (one - four * kappa).sqrt();
            (
                KernelBranch::Sub,
                BranchShape::Sub {
                    lambda1: ((one - s) / (two * kappa)).sqrt(),
                    lambda2: ((one + s) / (two * kappa)).sqrt(),
                },
            )
        } else {
            let rk = kappa.sqrt();
            (
                KernelBranch::Super,
                BranchShape::Super {
                    sigma: (two / rk + one / kappa).sqrt() / two,
                    omega: (two / rk - one / kappa).sqrt() / two,
                },
            )
        };
        let mut spec = Self {
            kappa,
            branch,
            shape,
            normalization: one,
        };
        spec.normalization = spec.shape_integral().recip();
        Ok(spec)
    }

    /// Unnormalized kernel shape including the `κπ` prefactor.
    pub fn shape_value(&self, x: T) -> T {
        let ax = x.abs();
        let one = T::one();
        let two = lit::<T>(2.0);
        let bracket = match self.shape {
            BranchShape::Sub { lambda1, lambda2 } => {
                ((-lambda1 * ax).exp() / lambda1 - (-lambda2 * ax).exp() / lambda2)
                    / (lambda2 * lambda2 - lambda1 * lambda1)
            }
            BranchShape::Critical { rate } => self.kappa.powf(lit(0.75)) / two * (one + rate * ax) * (-rate * ax).exp(),
            BranchShape::Super { sigma, omega } => {
                let s2 = sigma * sigma + omega * omega;
                (-sigma * ax).exp() / (two * sigma * omega * s2)
                    * (omega * (omega * x).cos() + sigma * (omega * ax).sin())
            }
        };
        self.kappa * T::PI() * bracket
    }

    /// Closed-form `∫ shape dx` over the real line.
    fn shape_integral(&self) -> T {
        let two = lit::<T>(2.0);
        let bracket = match self.shape {
            BranchShape::Sub { lambda1, lambda2 } => {
                // ∫ e^{-λ|x|}/λ = 2/λ²
                (two / (lambda1 * lambda1) - two / (lambda2 * lambda2)) / (lambda2 * lambda2 - lambda1 * lambda1)
            }
            BranchShape::Critical { rate } => {
                // ∫ (1 + a|x|) e^{-a|x|} = 4/a
                self.kappa.powf(lit(0.75)) / two * lit(4.0) / rate
            }
            BranchShape::Super { sigma, omega } => {
                // ∫ e^{-σ|x|}(ω cos ωx + σ sin ω|x|) = 4σω/(σ²+ω²)
                let s2 = sigma * sigma + omega * omega;
                lit::<T>(4.0) * sigma * omega / s2 / (two * sigma * omega * s2)
            }
        };
        self.kappa * T::PI() * bracket
    }

    /// Exponential decay rate of the tail envelope.
    pub fn decay_rate(&self) -> T {
        match self.shape {
            BranchShape::Sub { lambda1, .. } => lambda1,
            BranchShape::Critical { rate } => rate,
            BranchShape::Super { sigma, .. } => sigma,
        }
    }

    pub fn value(&self, x: T) -> T {
        self.normalization * self.shape_value(x)
    }
}

/// Normalized kernel value `K(x)`.
pub fn kernel_k<T: Real>(x: T, spec: &KernelSpec<T>) -> T {
    spec.value(x)
}

/// Direct quadrature `(K * f)(x_i) = dx Σ_j K(x_i - x_j) f_j`, with each
/// separation wrapped to its nearest periodic image. `O(N²)`; intended as
/// an oracle for the spectral inverse.
pub fn kernel_convolve<T: Real>(f: &RealField<T>, grid: &GridSpec<T>, spec: &KernelSpec<T>) -> Result<RealField<T>> {
    let n = grid.n_points();
    if f.len() != n {
        return Err(Error::invalid("f", "length does not match grid"));
    }
    f.check_finite("kernel_convolve input")?;
    let (l, period, dx) = (grid.half_length(), grid.length(), grid.dx());
    // K(x_i - x_j) depends on i - j only
    let table: Vec<T> = (0..n)
        .map(|m| {
            let mut d = from_usize::<T>(m) * dx;
            if d >= l {
                d -= period;
            }
            spec.value(d)
        })
        .collect();
    let out = (0..n)
        .map(|i| {
            let acc = (0..n).fold(T::zero(), |acc, j| acc + table[(i + n - j) % n] * f[j]);
            acc * dx
        })
        .collect();
    Ok(RealField::new(out))
}
