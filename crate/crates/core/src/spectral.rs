//! Periodic grid, discrete Fourier transforms and Fourier multipliers.
//!
//! The box `[-L, L)` is mapped onto `[0, 2π)` by `X = π(x + L)/L`, so the
//! Fourier mode `k` of a grid function carries the physical wavenumber
//! `κ_k = πk/L`. The forward transform carries the `1/N` factor:
//!
//! ```text
//! Ũ_k = (1/N) Σ_j U_j exp(-i k X_j),     U_j = Σ_k Ũ_k exp(i k X_j),
//! ```
//!
//! with `k ∈ [-N/2, N/2 - 1]`. With this convention the discrete Parseval
//! identity reads `dx Σ |U_j|² = 2L Σ |Ũ_k|²`.
//!
//! Two representations of a spectrum are exposed:
//!
//! * [`SpectrumCoeffs`] holds all `N` coefficients and is what the public
//!   transform pair produces and consumes.
//! * A half spectrum (`N/2 + 1` coefficients, modes `0..=N/2`) is used by the
//!   hot loops. Its last entry is the unmatched mode `k = -N/2`.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Uniform periodic grid on `[-L, L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec<T> {
    half_length: T,
    n_points: usize,
    dx: T,
}

impl<T: Real> GridSpec<T> {
    pub const MIN_POINTS: usize = 8;

    /// Builds the grid `x_j = -L + j·dx`, `dx = 2L/N`.
    pub fn new(half_length: T, n_points: usize) -> Result<Self> {
        if !(half_length > T::zero()) || !half_length.is_finite() {
            return Err(Error::invalid(
                "half_length",
                format!("must be positive and finite, got {half_length}"),
            ));
        }
        if !n_points.is_multiple_of(2) || n_points < Self::MIN_POINTS {
            return Err(Error::invalid(
                "n_points",
                format!("must be even and >= {}, got {n_points}", Self::MIN_POINTS),
            ));
        }
        let dx = lit::<T>(2.0) * half_length / from_usize(n_points);
        Ok(Self {
            half_length,
            n_points,
            dx,
        })
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Period `2L`.
    pub fn length(&self) -> T {
        lit::<T>(2.0) * self.half_length
    }

    pub fn node(&self, j: usize) -> T {
        -self.half_length + from_usize::<T>(j) * self.dx
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Physical wavenumber `πk/L` of mode `k`.
    pub fn wavenumber(&self, k: isize) -> T {
        let pi_over_l = T::PI() / self.half_length;
        let kk = T::from_isize(k).expect("mode index representable");
        pi_over_l * kk
    }

    /// Wavenumbers of modes `k = -N/2, …, N/2 - 1`, in ascending `k`.
    pub fn scaled_wavenumbers(&self) -> Vec<T> {
        let half = (self.n_points / 2) as isize;
        (-half..half).map(|k| self.wavenumber(k)).collect()
    }

    /// Wavenumbers of the half spectrum, modes `0..N/2` followed by `-N/2`.
    pub fn half_wavenumbers(&self) -> Vec<T> {
        let half = self.n_points / 2;
        let mut out: Vec<T> = (0..half).map(|m| self.wavenumber(m as isize)).collect();
        out.push(self.wavenumber(-(half as isize)));
        out
    }

    /// Storage slot of mode `k` in FFT order.
    pub fn mode_slot(&self, k: isize) -> usize {
        let n = self.n_points as isize;
        assert!((-n / 2..n / 2).contains(&k), "mode {k} outside [-N/2, N/2 - 1]");
        k.rem_euclid(n) as usize
    }

    /// Samples `f` at the grid nodes.
    pub fn sample(&self, f: impl Fn(T) -> T) -> RealField<T> {
        RealField::new(self.nodes().into_iter().map(f).collect())
    }
}

/// Values of a real function at the grid nodes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RealField<T>(Vec<T>);

impl<T: Real> RealField<T> {
    pub fn new(samples: Vec<T>) -> Self {
        Self(samples)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![T::zero(); n])
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `max_j |self_j - other_j|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self(self.0.iter().map(|x| *x * factor).collect())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self(self.0.iter().map(|x| f(*x)).collect())
    }

    pub(crate) fn check_finite(&self, context: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { context })
        }
    }
}

impl<T> Deref for RealField<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for RealField<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for RealField<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// All `N` Fourier coefficients `Ũ_k`, `k ∈ [-N/2, N/2 - 1]`, stored in FFT
/// order (non-negative modes first).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumCoeffs<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectrumCoeffs<T> {
    /// Wraps coefficients given in FFT order.
    pub fn from_fft_order(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    /// Builds a spectrum from a function of the mode index.
    pub fn from_fn(n: usize, f: impl Fn(isize) -> Complex<T>) -> Self {
        let half = (n / 2) as isize;
        let mut out = Self::zeros(n);
        for k in -half..half {
            out.set(k, f(k));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn slot(&self, k: isize) -> usize {
        let n = self.coeffs.len() as isize;
        assert!((-n / 2..n / 2).contains(&k), "mode {k} outside [-N/2, N/2 - 1]");
        k.rem_euclid(n) as usize
    }

    pub fn get(&self, k: isize) -> Complex<T> {
        self.coeffs[self.slot(k)]
    }

    pub fn set(&mut self, k: isize, value: Complex<T>) {
        let s = self.slot(k);
        self.coeffs[s] = value;
    }

    pub fn fft_order(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Coefficients in ascending mode order `-N/2, …, N/2 - 1`.
    pub fn ordered(&self) -> Vec<Complex<T>> {
        let half = self.coeffs.len() / 2;
        self.coeffs[half..]
            .iter()
            .chain(&self.coeffs[..half])
            .copied()
            .collect()
    }

    /// Largest `|Ũ_{-k} - conj(Ũ_k)|` over representable pairs, plus the
    /// imaginary parts of the self-conjugate modes `0` and `-N/2`.
    pub fn symmetry_defect(&self) -> T {
        let n = self.coeffs.len();
        let mut defect = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for m in 1..n / 2 {
            defect = defect.max((self.coeffs[n - m] - self.coeffs[m].conj()).norm());
        }
        defect
    }
}

/// Which `L^p` norm to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpNorm {
    L2,
    L4,
    Inf,
}

impl LpNorm {
    /// Parses `2`, `4` or `inf`.
    pub fn parse(p: &str) -> Result<Self> {
        match p.trim().to_ascii_lowercase().as_str() {
            "2" => Ok(LpNorm::L2),
            "4" => Ok(LpNorm::L4),
            "inf" | "infinity" | "max" => Ok(LpNorm::Inf),
            other => Err(Error::invalid(
                "p",
                format!("unsupported norm exponent {other:?}; expected 2, 4 or inf"),
            )),
        }
    }
}

/// Grid plus cached transform plans. Plans are immutable and shared, so a
/// `Spectral` may be cloned into worker threads freely.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    grid: GridSpec<T>,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    inverse_full: Arc<dyn Fft<T>>,
    half_kappa: Vec<T>,
}

impl<T: Real> fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let n = grid.n_points();
        let mut real_planner = RealFftPlanner::<T>::new();
        let r2c = real_planner.plan_fft_forward(n);
        let c2r = real_planner.plan_fft_inverse(n);
        let inverse_full = FftPlanner::<T>::new().plan_fft_inverse(n);
        let half_kappa = grid.half_wavenumbers();
        Self {
            grid,
            r2c,
            c2r,
            inverse_full,
            half_kappa,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n_points()
    }

    /// Length of the half spectrum, `N/2 + 1`.
    pub fn half_len(&self) -> usize {
        self.grid.n_points() / 2 + 1
    }

    /// Wavenumbers matching the half-spectrum layout.
    pub fn half_kappa(&self) -> &[T] {
        &self.half_kappa
    }

    pub fn zero_half(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.half_len()]
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::invalid(
                "field",
                format!("length {len} does not match grid size {}", self.n()),
            ));
        }
        Ok(())
    }

    /// Normalized real-to-complex transform into `out` (length `N/2 + 1`).
    /// `input` is used as scratch and left in an unspecified state.
    pub fn forward_half_inplace(&self, input: &mut [T], out: &mut [Complex<T>]) {
        self.r2c.process(input, out).expect("buffer sizes fixed by the plan");
        let inv_n = T::one() / from_usize::<T>(self.n());
        for c in out.iter_mut() {
            *c *= inv_n;
        }
    }

    /// Normalized real-to-complex transform of `input`.
    pub fn forward_half(&self, input: &[T]) -> Vec<Complex<T>> {
        let mut scratch = input.to_vec();
        let mut out = self.zero_half();
        self.forward_half_inplace(&mut scratch, &mut out);
        out
    }

    /// Complex-to-real inverse into `out`. `spectrum` is used as scratch.
    /// Imaginary parts of the self-conjugate modes are discarded.
    pub fn inverse_half_inplace(&self, spectrum: &mut [Complex<T>], out: &mut [T]) {
        let last = spectrum.len() - 1;
        spectrum[0].im = T::zero();
        spectrum[last].im = T::zero();
        self.c2r.process(spectrum, out).expect("buffer sizes fixed by the plan");
    }

    pub fn inverse_half(&self, spectrum: &[Complex<T>]) -> RealField<T> {
        let mut scratch = spectrum.to_vec();
        let mut out = vec![T::zero(); self.n()];
        self.inverse_half_inplace(&mut scratch, &mut out);
        RealField::new(out)
    }

    /// Forward DFT with the `1/N` normalization.
    pub fn forward_dft(&self, f: &RealField<T>) -> Result<SpectrumCoeffs<T>> {
        self.check_len(f.len())?;
        f.check_finite("forward_dft input")?;
        let half = self.forward_half(f);
        let n = self.n();
        let mut full = vec![Complex::new(T::zero(), T::zero()); n];
        full[..=n / 2].copy_from_slice(&half);
        for m in 1..n / 2 {
            full[n - m] = half[m].conj();
        }
        Ok(SpectrumCoeffs::from_fft_order(full))
    }

    /// Inverse DFT. Fails when the imaginary part of the result exceeds the
    /// round-off tolerance, which signals a spectrum without conjugate
    /// symmetry.
    pub fn inverse_dft(&self, c: &SpectrumCoeffs<T>) -> Result<RealField<T>> {
        self.check_len(c.len())?;
        let mut buf = c.fft_order().to_vec();
        if buf.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "inverse_dft input",
            });
        }
        self.inverse_full.process(&mut buf);
        let scale = buf.iter().fold(T::one(), |m, z| m.max(z.re.abs()));
        let residue = buf.iter().fold(T::zero(), |m, z| m.max(z.im.abs()));
        if residue > symmetry_tolerance::<T>() * scale {
            return Err(Error::SymmetryViolation {
                residue: to_f64(residue),
            });
        }
        Ok(RealField::new(buf.into_iter().map(|z| z.re).collect()))
    }

    /// Multiplies the spectrum by a real even symbol `σ(κ_k)`.
    pub fn apply_even_symbol(&self, f: &RealField<T>, symbol: impl Fn(T) -> T) -> Result<RealField<T>> {
        self.check_len(f.len())?;
        f.check_finite("spectral multiplier input")?;
        let mut spec = self.forward_half(f);
        for (c, &kap) in spec.iter_mut().zip(&self.half_kappa) {
            *c *= symbol(kap);
        }
        Ok(self.inverse_half(&spec))
    }

    /// Multiplies a half spectrum in place by `(iκ_k)^order`. For odd orders
    /// the unmatched mode `k = -N/2` is zeroed.
    pub fn differentiate_half(&self, spec: &mut [Complex<T>], order: u32) {
        let last = spec.len() - 1;
        for (m, (c, &kap)) in spec.iter_mut().zip(&self.half_kappa).enumerate() {
            if order % 2 == 1 && m == last {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            *c *= ik_power(kap, order);
        }
    }

    /// `d^order f / dx^order` by Fourier multiplication.
    pub fn spectral_derivative(&self, f: &RealField<T>, order: u32) -> Result<RealField<T>> {
        if order == 0 {
            return Err(Error::invalid("order", "derivative order must be >= 1"));
        }
        self.check_len(f.len())?;
        f.check_finite("spectral_derivative input")?;
        let mut spec = self.forward_half(f);
        self.differentiate_half(&mut spec, order);
        Ok(self.inverse_half(&spec))
    }

    /// `Σ_k w(κ_k) |Ũ_k|²` over the full spectrum, evaluated on a half
    /// spectrum.
    pub fn weighted_power(&self, spec: &[Complex<T>], weight: impl Fn(T) -> T) -> T {
        let last = spec.len() - 1;
        let two = lit::<T>(2.0);
        spec.iter()
            .zip(&self.half_kappa)
            .enumerate()
            .fold(T::zero(), |acc, (m, (c, &kap))| {
                let mult = if m == 0 || m == last { T::one() } else { two };
                acc + mult * weight(kap) * c.norm_sqr()
            })
    }

    /// `H^s` norm, `‖f‖_s² = 2L Σ_k (1 + κ_k²)^s |Ũ_k|²`.
    pub fn sobolev_norm(&self, f: &RealField<T>, s: T) -> Result<T> {
        self.check_len(f.len())?;
        f.check_finite("sobolev_norm input")?;
        let spec = self.forward_half(f);
        Ok(self.sobolev_norm_half(&spec, s))
    }

    pub fn sobolev_norm_half(&self, spec: &[Complex<T>], s: T) -> T {
        let p = self.weighted_power(spec, |kap| (T::one() + kap * kap).powf(s));
        (self.grid.length() * p).sqrt()
    }

    /// Physical-space `L^p` norm by the rectangle rule.
    pub fn lp_norm(&self, f: &RealField<T>, p: LpNorm) -> T {
        lp_norm(f, p, &self.grid)
    }

    /// Solves `r - r'' + κ r'''' = f` spectrally.
    pub fn helmholtz_inverse(&self, f: &RealField<T>, kappa: T) -> Result<RealField<T>> {
        if !(kappa >= T::zero()) {
            return Err(Error::invalid("kappa", format!("must be >= 0, got {kappa}")));
        }
        self.apply_even_symbol(f, |k| {
            let k2 = k * k;
            T::one() / (T::one() + k2 + kappa * k2 * k2)
        })
    }

    /// `(-∂²)^{-1/2} f` for a mean-free field, with the default mean
    /// tolerance `1e-10 ‖f‖_{L²}`.
    pub fn neg_laplacian_inv_sqrt(&self, f: &RealField<T>) -> Result<RealField<T>> {
        let tol = lit::<T>(1e-10) * self.lp_norm(f, LpNorm::L2);
        self.neg_laplacian_inv_sqrt_with_tol(f, tol)
    }

    pub fn neg_laplacian_inv_sqrt_with_tol(&self, f: &RealField<T>, mean_tol: T) -> Result<RealField<T>> {
        self.check_len(f.len())?;
        f.check_finite("neg_laplacian_inv_sqrt input")?;
        let mut spec = self.forward_half(f);
        check_mean_free(spec[0].norm(), mean_tol)?;
        spec[0] = Complex::new(T::zero(), T::zero());
        for (c, &kap) in spec.iter_mut().zip(&self.half_kappa).skip(1) {
            *c /= kap.abs();
        }
        Ok(self.inverse_half(&spec))
    }

    /// Zeroes the modes with `|k| > N/3` (two-thirds rule).
    pub fn dealias_two_thirds(&self, spec: &mut [Complex<T>]) {
        let cutoff = self.n() / 3;
        for (m, c) in spec.iter_mut().enumerate() {
            if m > cutoff {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// Translates a field by `shift` (periodically) through phase rotation.
    /// The unmatched mode is dropped since its shift is not real.
    pub fn translate(&self, f: &RealField<T>, shift: T) -> Result<RealField<T>> {
        self.check_len(f.len())?;
        f.check_finite("translate input")?;
        let mut spec = self.forward_half(f);
        let last = spec.len() - 1;
        for (m, (c, &kap)) in spec.iter_mut().zip(&self.half_kappa).enumerate() {
            if m == last {
                *c = Complex::new(T::zero(), T::zero());
            } else {
                *c *= Complex::from_polar(T::one(), -kap * shift);
            }
        }
        Ok(self.inverse_half(&spec))
    }
}

pub(crate) fn check_mean_free<T: Real>(magnitude: T, tolerance: T) -> Result<()> {
    if magnitude > tolerance {
        return Err(Error::MeanMode {
            magnitude: to_f64(magnitude),
            tolerance: to_f64(tolerance),
        });
    }
    Ok(())
}

fn symmetry_tolerance<T: Real>() -> T {
    T::epsilon() * lit(4096.0)
}

/// `(iκ)^order` as a complex number.
pub(crate) fn ik_power<T: Real>(kappa: T, order: u32) -> Complex<T> {
    let mag = kappa.powi(order as i32);
    match order % 4 {
        0 => Complex::new(mag, T::zero()),
        1 => Complex::new(T::zero(), mag),
        2 => Complex::new(-mag, T::zero()),
        _ => Complex::new(T::zero(), -mag),
    }
}

/// Physical-space `L^p` norm by the rectangle rule `dx Σ |U_j|^p`.
pub fn lp_norm<T: Real>(f: &[T], p: LpNorm, grid: &GridSpec<T>) -> T {
    match p {
        LpNorm::Inf => f.iter().fold(T::zero(), |m, x| m.max(x.abs())),
        LpNorm::L2 => (grid.dx() * f.iter().fold(T::zero(), |s, x| s + *x * *x)).sqrt(),
        LpNorm::L4 => {
            let s = f.iter().fold(T::zero(), |s, x| {
                let x2 = *x * *x;
                s + x2 * x2
            });
            (grid.dx() * s).sqrt().sqrt()
        }
    }
}

/// Rectangle-rule integral `dx Σ f_j`.
pub fn integrate<T: Real>(f: &[T], grid: &GridSpec<T>) -> T {
    grid.dx() * f.iter().fold(T::zero(), |s, x| s + *x)
}
