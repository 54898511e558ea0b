//! Time evolution of `(u, v = u_t)` under the Fourier system
//!
//! ```text
//! (Ũ_k)_t = Ṽ_k
//! (Ṽ_k)_t = -[(κ_k² + ακ_k⁴) Ũ_k + κ_k² (f(U))^_k] / (1 + κ_k² + κκ_k⁴)
//! ```
//!
//! advanced with classical fixed-step RK4, together with the energy,
//! momentum and potential-well functionals.
//!
//! `v` is always the time derivative `u_t` of the discrete scheme.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EquationParams;
use crate::scalar::{from_usize, lit, Real};
use crate::spectral::{check_mean_free, integrate, RealField, Spectral};

/// Physical-space state `(u, u_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair<T> {
    pub u: RealField<T>,
    pub v: RealField<T>,
}

impl<T: Real> FieldPair<T> {
    pub fn new(u: RealField<T>, v: RealField<T>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::invalid(
                "v",
                format!("length {} does not match u length {}", v.len(), u.len()),
            ));
        }
        Ok(Self { u, v })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            u: RealField::zeros(n),
            v: RealField::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// State held as half spectra (`N/2 + 1` coefficients per channel).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair<T> {
    pub u: Vec<Complex<T>>,
    pub v: Vec<Complex<T>>,
}

impl<T: Real> SpectralPair<T> {
    pub fn from_physical(state: &FieldPair<T>, spectral: &Spectral<T>) -> Result<Self> {
        check_state(state, spectral)?;
        Ok(Self {
            u: spectral.forward_half(&state.u),
            v: spectral.forward_half(&state.v),
        })
    }

    pub fn to_physical(&self, spectral: &Spectral<T>) -> FieldPair<T> {
        FieldPair {
            u: spectral.inverse_half(&self.u),
            v: spectral.inverse_half(&self.v),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn check_state<T: Real>(state: &FieldPair<T>, spectral: &Spectral<T>) -> Result<()> {
    if state.u.len() != spectral.n() || state.v.len() != spectral.n() {
        return Err(Error::invalid(
            "initial",
            format!(
                "field lengths ({}, {}) do not match grid size {}",
                state.u.len(),
                state.v.len(),
                spectral.n()
            ),
        ));
    }
    state.u.check_finite("initial u")?;
    state.v.check_finite("initial v")
}

/// Fixed-step integration settings. `dt = t_final / n_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegratorConfig<T> {
    pub t_final: T,
    pub n_steps: usize,
    /// A snapshot is kept every `snapshot_stride` steps (plus the last).
    pub snapshot_stride: usize,
    /// Blow-up is declared once `‖u‖_{H¹} > blowup_cap · ‖u(0)‖_{H¹}`.
    pub blowup_cap: T,
    pub diagnostics_stride: usize,
    /// Apply the two-thirds rule to the nonlinear term.
    #[serde(default)]
    pub dealias: bool,
}

impl<T: Real> TimeIntegratorConfig<T> {
    /// Diagnostics every step, snapshots at the ends only, cap `1e4`.
    pub fn new(t_final: T, n_steps: usize) -> Self {
        Self {
            t_final,
            n_steps,
            snapshot_stride: n_steps.max(1),
            blowup_cap: lit(1e4),
            diagnostics_stride: 1,
            dealias: false,
        }
    }

    /// `n_steps` chosen so that `dt` does not exceed `dt_max`.
    pub fn with_max_dt(t_final: T, dt_max: T) -> Self {
        let steps = (t_final / dt_max).ceil().to_usize().unwrap_or(1).max(1);
        Self::new(t_final, steps)
    }

    pub fn dt(&self) -> T {
        self.t_final / from_usize(self.n_steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > T::zero()) || !self.t_final.is_finite() {
            return Err(Error::invalid("t_final", "must be finite and positive"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be >= 1"));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::invalid("snapshot_stride", "must be >= 1"));
        }
        if self.diagnostics_stride == 0 {
            return Err(Error::invalid("diagnostics_stride", "must be >= 1"));
        }
        if !(self.blowup_cap > T::zero()) {
            return Err(Error::invalid("blowup_cap", "must be positive"));
        }
        Ok(())
    }

    /// Time after `step` steps; the last step lands exactly on `t_final`.
    fn time_at(&self, step: usize) -> T {
        if step == self.n_steps {
            self.t_final
        } else {
            from_usize::<T>(step) * self.dt()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "t")]
pub enum Outcome<T> {
    Completed,
    BlowupAt(T),
    NonfiniteAt(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries<T> {
    pub times: Vec<T>,
    pub h1_norm: Vec<T>,
    pub energy: Vec<T>,
    pub momentum: Vec<T>,
    pub sup_amplitude: Vec<T>,
    pub outcome: Outcome<T>,
}

impl<T: Real> DiagnosticsSeries<T> {
    fn empty() -> Self {
        Self {
            times: Vec::new(),
            h1_norm: Vec::new(),
            energy: Vec::new(),
            momentum: Vec::new(),
            sup_amplitude: Vec::new(),
            outcome: Outcome::Completed,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute drift when `E(0) = 0`).
    pub fn relative_energy_drift(&self) -> T {
        relative_drift(&self.energy)
    }

    /// `max_t |Q(t) - Q(0)| / (1 + |Q(0)|)`.
    pub fn momentum_drift(&self) -> T {
        let q0 = self.momentum.first().copied().unwrap_or_else(T::zero);
        self.momentum.iter().fold(T::zero(), |m, &q| m.max((q - q0).abs())) / (T::one() + q0.abs())
    }
}

fn relative_drift<T: Real>(xs: &[T]) -> T {
    let x0 = match xs.first() {
        Some(&x) => x,
        None => return T::zero(),
    };
    let scale = if x0 == T::zero() { T::one() } else { x0.abs() };
    xs.iter().fold(T::zero(), |m, &x| m.max((x - x0).abs())) / scale
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub state: FieldPair<T>,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub series: DiagnosticsSeries<T>,
    pub final_state: FieldPair<T>,
    /// Time of `final_state` (earlier than `t_final` after a blow-up).
    pub final_time: T,
}

/// Right-hand side evaluator with cached multipliers and scratch space.
struct RhsEval<T: Real> {
    spectral: Spectral<T>,
    params: EquationParams<T>,
    dealias: bool,
    lin: Vec<T>,
    nl: Vec<T>,
    phys: Vec<T>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> RhsEval<T> {
    fn eval(&mut self, state: &SpectralPair<T>, out: &mut SpectralPair<T>) {
        self.scratch.copy_from_slice(&state.u);
        self.spectral.inverse_half_inplace(&mut self.scratch, &mut self.phys);
        for x in self.phys.iter_mut() {
            *x = self.params.nonlinearity(*x);
        }
        self.spectral.forward_half_inplace(&mut self.phys, &mut self.scratch);
        if self.dealias {
            self.spectral.dealias_two_thirds(&mut self.scratch);
        }
        out.u.copy_from_slice(&state.v);
        for m in 0..out.v.len() {
            out.v[m] = -(state.u[m] * self.lin[m] + self.scratch[m] * self.nl[m]);
        }
        // both k = 0 multipliers vanish; pin the mode so a non-finite
        // nonlinear term cannot leak into the mean of v
        out.v[0] = Complex::new(T::zero(), T::zero());
    }
}

/// RK4 integrator for one trajectory. Owns every scratch buffer, so steps
/// allocate nothing.
pub struct Stepper<T: Real> {
    rhs: RhsEval<T>,
    stage: SpectralPair<T>,
    acc: SpectralPair<T>,
    k: SpectralPair<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(spectral: &Spectral<T>, params: &EquationParams<T>) -> Result<Self> {
        params.validate()?;
        let (lin, nl): (Vec<T>, Vec<T>) = spectral
            .half_kappa()
            .iter()
            .map(|&k| {
                let k2 = k * k;
                let den = T::one() + k2 + params.kappa * k2 * k2;
                ((k2 + params.alpha * k2 * k2) / den, k2 / den)
            })
            .unzip();
        let zero = spectral.zero_half();
        let pair = SpectralPair {
            u: zero.clone(),
            v: zero.clone(),
        };
        Ok(Self {
            rhs: RhsEval {
                spectral: spectral.clone(),
                params: *params,
                dealias: false,
                lin,
                nl,
                phys: vec![T::zero(); spectral.n()],
                scratch: zero,
            },
            stage: pair.clone(),
            acc: pair.clone(),
            k: pair,
        })
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.rhs.dealias = on;
        self
    }

    /// Evaluates the right-hand side at `state` into `out`.
    pub fn rhs_into(&mut self, state: &SpectralPair<T>, out: &mut SpectralPair<T>) {
        self.rhs.eval(state, out);
    }

    /// One classical RK4 step. Negative `dt` integrates backwards.
    pub fn step(&mut self, y: &mut SpectralPair<T>, dt: T) {
        let half = dt / lit(2.0);
        let sixth = dt / lit(6.0);
        let third = dt / lit(3.0);
        let Self { rhs, stage, acc, k } = self;

        rhs.eval(y, k);
        axpy_pair(acc, y, sixth, k);
        axpy_pair(stage, y, half, k);

        rhs.eval(stage, k);
        accumulate_pair(acc, third, k);
        axpy_pair(stage, y, half, k);

        rhs.eval(stage, k);
        accumulate_pair(acc, third, k);
        axpy_pair(stage, y, dt, k);

        rhs.eval(stage, k);
        accumulate_pair(acc, sixth, k);

        std::mem::swap(y, acc);
    }

    /// `steps` RK4 steps of size `dt`.
    pub fn advance(&mut self, y: &mut SpectralPair<T>, dt: T, steps: usize) {
        for _ in 0..steps {
            self.step(y, dt);
        }
    }
}

/// `out = y + a·k`.
fn axpy_pair<T: Real>(out: &mut SpectralPair<T>, y: &SpectralPair<T>, a: T, k: &SpectralPair<T>) {
    for ((o, &y), &k) in out.u.iter_mut().zip(&y.u).zip(&k.u) {
        *o = y + k * a;
    }
    for ((o, &y), &k) in out.v.iter_mut().zip(&y.v).zip(&k.v) {
        *o = y + k * a;
    }
}

/// `out += a·k`.
fn accumulate_pair<T: Real>(out: &mut SpectralPair<T>, a: T, k: &SpectralPair<T>) {
    for (o, &k) in out.u.iter_mut().zip(&k.u) {
        *o += k * a;
    }
    for (o, &k) in out.v.iter_mut().zip(&k.v) {
        *o += k * a;
    }
}

/// Right-hand side of the Fourier system for a spectral state.
pub fn rhs<T: Real>(
    state: &SpectralPair<T>,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
) -> Result<SpectralPair<T>> {
    if state.u.len() != spectral.half_len() || state.v.len() != spectral.half_len() {
        return Err(Error::invalid("state", "half spectra must have N/2 + 1 entries"));
    }
    let mut stepper = Stepper::new(spectral, params)?;
    let mut out = SpectralPair {
        u: spectral.zero_half(),
        v: spectral.zero_half(),
    };
    stepper.rhs_into(state, &mut out);
    Ok(out)
}

/// One RK4 step of a physical-space state. Non-finite results are returned,
/// not rejected, so callers can flag them.
pub fn rk4_step<T: Real>(
    state: &FieldPair<T>,
    dt: T,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
) -> Result<FieldPair<T>> {
    if !dt.is_finite() || dt == T::zero() {
        return Err(Error::invalid("dt", "must be finite and nonzero"));
    }
    let mut y = SpectralPair::from_physical(state, spectral)?;
    Stepper::new(spectral, params)?.step(&mut y, dt);
    Ok(y.to_physical(spectral))
}

/// Integrates `initial` to `cfg.t_final`, stopping early on blow-up or
/// non-finite values. `initial.v` must be mean-free, since the energy's
/// `(-∂²)^{-1/2} v` term is undefined otherwise.
pub fn evolve<T: Real>(
    initial: &FieldPair<T>,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
    cfg: &TimeIntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    params.validate()?;
    let mut y = SpectralPair::from_physical(initial, spectral)?;
    check_mean_free(y.v[0].norm(), mean_tolerance(&initial.v, spectral))?;

    let mut stepper = Stepper::new(spectral, params)?.with_dealias(cfg.dealias);
    let dt = cfg.dt();
    let mut series = DiagnosticsSeries::empty();
    let mut snapshots = vec![Snapshot {
        t: T::zero(),
        state: initial.clone(),
    }];
    record(&mut series, T::zero(), &y, spectral, params);
    let h1_0 = spectral.sobolev_norm_half(&y.u, T::one());
    let cap = cfg.blowup_cap * h1_0;
    let mut final_time = T::zero();

    for step in 1..=cfg.n_steps {
        stepper.step(&mut y, dt);
        let t = cfg.time_at(step);
        final_time = t;
        let h1 = spectral.sobolev_norm_half(&y.u, T::one());
        let stop = if !h1.is_finite() || !y.is_finite() {
            Some(Outcome::NonfiniteAt(t))
        } else if h1 > cap {
            Some(Outcome::BlowupAt(t))
        } else {
            None
        };
        if let Some(outcome) = stop {
            record(&mut series, t, &y, spectral, params);
            series.outcome = outcome;
            snapshots.push(Snapshot {
                t,
                state: y.to_physical(spectral),
            });
            break;
        }
        if step % cfg.diagnostics_stride == 0 || step == cfg.n_steps {
            record(&mut series, t, &y, spectral, params);
        }
        if step % cfg.snapshot_stride == 0 || step == cfg.n_steps {
            snapshots.push(Snapshot {
                t,
                state: y.to_physical(spectral),
            });
        }
    }

    let final_state = snapshots
        .last()
        .map(|s| s.state.clone())
        .unwrap_or_else(|| y.to_physical(spectral));
    Ok(Trajectory {
        snapshots,
        series,
        final_state,
        final_time,
    })
}

fn mean_tolerance<T: Real>(v: &RealField<T>, spectral: &Spectral<T>) -> T {
    lit::<T>(1e-10) * spectral.lp_norm(v, crate::spectral::LpNorm::L2)
}

fn record<T: Real>(
    series: &mut DiagnosticsSeries<T>,
    t: T,
    y: &SpectralPair<T>,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
) {
    let u = spectral.inverse_half(&y.u);
    series.times.push(t);
    series.h1_norm.push(spectral.sobolev_norm_half(&y.u, T::one()));
    series.energy.push(energy_spectral(y, &u, spectral, params));
    series.momentum.push(momentum_spectral(y, spectral, params));
    series.sup_amplitude.push(u.max_abs());
}

/// Energy of a spectral state; the `k = 0` mode of `v` is skipped.
fn energy_spectral<T: Real>(y: &SpectralPair<T>, u: &[T], spectral: &Spectral<T>, params: &EquationParams<T>) -> T {
    let kap = spectral.half_kappa();
    let last = y.u.len() - 1;
    let mut quad = T::zero();
    for (m, &k) in kap.iter().enumerate() {
        let k2 = k * k;
        let vv = y.v[m].norm_sqr();
        let uu = y.u[m].norm_sqr();
        let inv = if m == 0 { T::zero() } else { vv / k2 };
        let term = inv + vv * (T::one() + params.kappa * k2) + uu * (T::one() + params.alpha * k2);
        let w = if m == 0 || m == last { T::one() } else { lit(2.0) };
        quad += w * term;
    }
    let pot: Vec<T> = u.iter().map(|&x| params.potential(x)).collect();
    spectral.grid().length() * quad / lit(2.0) + integrate(&pot, spectral.grid())
}

/// `∫ (u (-∂²)^{-1/2} v + u_x v + κ u_xx v_x) dx`, by the discrete Parseval
/// identity (equal to the rectangle rule applied to the products).
fn momentum_spectral<T: Real>(y: &SpectralPair<T>, spectral: &Spectral<T>, params: &EquationParams<T>) -> T {
    let kap = spectral.half_kappa();
    let last = y.u.len() - 1;
    let mut acc = T::zero();
    for (m, &k) in kap.iter().enumerate().skip(1) {
        let cross = y.u[m] * y.v[m].conj();
        let mut term = cross.re / k.abs();
        if m != last {
            // Re(i k û v̄*) = -k Im(û v̄*)
            term -= (k + params.kappa * k * k * k) * cross.im;
        }
        let w = if m == last { T::one() } else { lit(2.0) };
        acc += w * term;
    }
    spectral.grid().length() * acc
}

/// `E = ½(‖(-∂²)^{-1/2}v‖² + ‖v‖² + κ‖v_x‖² + ‖u‖² + α‖u_x‖²) + ∫F(u)`.
pub fn energy<T: Real>(state: &FieldPair<T>, spectral: &Spectral<T>, params: &EquationParams<T>) -> Result<T> {
    let y = SpectralPair::from_physical(state, spectral)?;
    check_mean_free(y.v[0].norm(), mean_tolerance(&state.v, spectral))?;
    Ok(energy_spectral(&y, &state.u, spectral, params))
}

/// Energy of a localized state on the whole line. The torus sum for
/// `‖(-∂²)^{-1/2}v‖²` omits the `ξ = 0` node of the continuous integral,
/// whose integrand there is `(∫ x v dx)²`; restoring it makes the result
/// spectrally accurate in `L` instead of `O(1/L)`.
pub fn line_energy<T: Real>(state: &FieldPair<T>, spectral: &Spectral<T>, params: &EquationParams<T>) -> Result<T> {
    let torus = energy(state, spectral, params)?;
    let grid = spectral.grid();
    let first_moment: Vec<T> = (0..grid.n_points()).map(|j| grid.node(j) * state.v[j]).collect();
    let m1 = integrate(&first_moment, grid);
    Ok(torus + m1 * m1 / (lit::<T>(2.0) * grid.length()))
}

/// `Q = ∫ (u (-∂²)^{-1/2} u_t + u_x u_t + κ u_xx u_xt) dx`.
pub fn momentum<T: Real>(state: &FieldPair<T>, spectral: &Spectral<T>, params: &EquationParams<T>) -> Result<T> {
    let y = SpectralPair::from_physical(state, spectral)?;
    check_mean_free(y.v[0].norm(), mean_tolerance(&state.v, spectral))?;
    Ok(momentum_spectral(&y, spectral, params))
}

/// `(I, J)` with `J = ½‖u‖₁² + ∫F(u)` and `I = ‖u‖₁² + ∫u f(u)`, where
/// `‖u‖₁² = ‖u‖² + α‖u_x‖²` is the quadratic form of the energy.
pub fn functionals_ij<T: Real>(u: &RealField<T>, spectral: &Spectral<T>, params: &EquationParams<T>) -> Result<(T, T)> {
    if u.len() != spectral.n() {
        return Err(Error::invalid("u", "length does not match grid"));
    }
    u.check_finite("functional input")?;
    let spec = spectral.forward_half(u);
    let h1 = spectral.grid().length() * spectral.weighted_power(&spec, |k| T::one() + params.alpha * k * k);
    let pot: Vec<T> = u.iter().map(|&x| params.potential(x)).collect();
    let work: Vec<T> = u.iter().map(|&x| x * params.nonlinearity(x)).collect();
    let grid = spectral.grid();
    let j = h1 / lit(2.0) + integrate(&pot, grid);
    let i = h1 + integrate(&work, grid);
    Ok((i, j))
}

/// Potential-well depth `d = 4/3` of the cubic focusing case
/// `α = κ = 1, β = -1, p = 2`, attained at `√2 sech`.
pub const CUBIC_WELL_DEPTH: f64 = 4.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    /// No blow-up before `t_final`; finite-horizon evidence only.
    GlobalCandidate,
    Blowup,
}

pub fn classify_outcome<T: Real>(series: &DiagnosticsSeries<T>) -> OutcomeClass {
    match series.outcome {
        Outcome::Completed => OutcomeClass::GlobalCandidate,
        Outcome::BlowupAt(_) | Outcome::NonfiniteAt(_) => OutcomeClass::Blowup,
    }
}

/// `v₀ = -c Q'` for a wave `Q(x - ct)`.
pub fn solitary_initial_velocity<T: Real>(q: &RealField<T>, c: T, spectral: &Spectral<T>) -> Result<RealField<T>> {
    let dq = spectral.spectral_derivative(q, 1)?;
    Ok(dq.scaled(-c))
}
