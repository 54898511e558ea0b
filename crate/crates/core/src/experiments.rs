//! Reproducible numerical experiments: the exact-solution accuracy test,
//! temporal and spatial convergence studies, the amplitude families used to
//! probe the potential-well dichotomy, and the bisection search for the
//! blow-up threshold amplitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    classify_outcome, evolve, functionals_ij, line_energy, solitary_initial_velocity, FieldPair, Outcome, OutcomeClass,
    TimeIntegratorConfig,
};
use crate::model::{EquationParams, HbqParams};
use crate::petviashvili::{petviashvili_solve, SolitarySolveConfig};
use crate::scalar::{from_usize, lit, sech, Real};
use crate::spectral::{GridSpec, RealField, Spectral};

/// Initial data families. The `amp*` families are defined for the cubic
/// focusing case `α = κ = 1, β = -1, p = 2` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum InitialDataFamily<T> {
    /// Petviashvili profile moving right with speed `speed`.
    PetviashviliSoliton { speed: T },
    /// The closed-form wave of the `α = 0, β = 1` case.
    HbqExactSoliton,
    /// `u = -√2 A sech x tanh x`, `v = 0`.
    Amp1,
    /// `u = v = -√2 A sech x tanh x`.
    Amp2,
    /// `u = A [g(x) - ½ g(x-1) - ½ g(x+1)]`, `g = √2 sech`, `v = 0`.
    Amp3,
}

impl<T: Real> InitialDataFamily<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PetviashviliSoliton { .. } => "petviashvili_soliton",
            Self::HbqExactSoliton => "hbq_exact_soliton",
            Self::Amp1 => "amp1",
            Self::Amp2 => "amp2",
            Self::Amp3 => "amp3",
        }
    }

    pub fn is_amplitude_family(&self) -> bool {
        matches!(self, Self::Amp1 | Self::Amp2 | Self::Amp3)
    }
}

fn check_cubic<T: Real>(params: &EquationParams<T>) -> Result<()> {
    if *params != EquationParams::cubic_focusing() {
        return Err(Error::invalid(
            "family",
            "amplitude families require alpha = kappa = 1, beta = -1, p = 2",
        ));
    }
    Ok(())
}

fn hbq_for<T: Real>(params: &EquationParams<T>) -> Result<HbqParams<T>> {
    if params.alpha != T::zero() || params.beta != T::one() {
        return Err(Error::invalid(
            "family",
            "hbq_exact_soliton requires alpha = 0 and beta = 1",
        ));
    }
    HbqParams::new(T::one(), params.kappa, params.p_exp + 1)
}

/// `-√2 sech x tanh x`.
fn amp_shape<T: Real>(x: T) -> T {
    -T::SQRT_2() * sech(x) * x.tanh()
}

fn amp3_shape<T: Real>(x: T) -> T {
    let g = |y: T| T::SQRT_2() * sech(y);
    let half = lit::<T>(0.5);
    g(x) - half * g(x - T::one()) - half * g(x + T::one())
}

/// Samples the family's initial state on the grid. `amplitude` is ignored
/// by the soliton families.
pub fn build_initial<T: Real>(
    family: &InitialDataFamily<T>,
    amplitude: T,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
) -> Result<FieldPair<T>> {
    params.validate()?;
    let grid = spectral.grid();
    if family.is_amplitude_family() {
        check_cubic(params)?;
        if !(amplitude >= T::zero()) || !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite and >= 0"));
        }
    }
    match *family {
        InitialDataFamily::PetviashviliSoliton { speed } => {
            let sol = petviashvili_solve(spectral, params, &SolitarySolveConfig::new(speed, params.p_exp))?;
            if !sol.converged {
                return Err(Error::Divergence {
                    iteration: sol.iterations,
                    reason: "solitary wave iteration did not reach tolerance".into(),
                });
            }
            let v = solitary_initial_velocity(&sol.profile, speed, spectral)?;
            FieldPair::new(sol.profile, v)
        }
        InitialDataFamily::HbqExactSoliton => {
            let hbq = hbq_for(params)?;
            FieldPair::new(
                grid.sample(|x| hbq.exact(x, T::zero(), T::zero(), T::one())),
                grid.sample(|x| hbq.initial_velocity(x)),
            )
        }
        InitialDataFamily::Amp1 => FieldPair::new(
            grid.sample(|x| amplitude * amp_shape(x)),
            RealField::zeros(grid.n_points()),
        ),
        InitialDataFamily::Amp2 => {
            let u = grid.sample(|x| amplitude * amp_shape(x));
            FieldPair::new(u.clone(), u)
        }
        InitialDataFamily::Amp3 => FieldPair::new(
            grid.sample(|x| amplitude * amp3_shape(x)),
            RealField::zeros(grid.n_points()),
        ),
    }
}

/// Initial energy `E₀` and Nehari functional `I₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialFunctionals<T> {
    pub energy: T,
    pub nehari: T,
}

/// Closed forms of `E₀(A)` and `I₀(A)` for `amp1` and `amp2`.
pub fn closed_form_functionals<T: Real>(family: &InitialDataFamily<T>, amplitude: T) -> Result<InitialFunctionals<T>> {
    let a2 = amplitude * amplitude;
    let c35 = lit::<T>(35.0);
    let nehari = lit::<T>(16.0) * a2 * (lit::<T>(7.0) - a2) / c35;
    match family {
        InitialDataFamily::Amp1 => Ok(InitialFunctionals {
            energy: lit::<T>(4.0) * a2 * (lit::<T>(14.0) - a2) / c35,
            nehari,
        }),
        InitialDataFamily::Amp2 => Ok(InitialFunctionals {
            energy: a2 * (lit::<T>(78.0) / lit(15.0) - lit::<T>(4.0) * a2 / c35),
            nehari,
        }),
        other => Err(Error::Unsupported(format!(
            "no closed-form functionals for family {}",
            other.name()
        ))),
    }
}

/// `E₀` and `I₀` by quadrature of the sampled initial state. The energy is
/// the whole-line value (see [`line_energy`]).
pub fn quadrature_functionals<T: Real>(
    family: &InitialDataFamily<T>,
    amplitude: T,
    spectral: &Spectral<T>,
    params: &EquationParams<T>,
) -> Result<InitialFunctionals<T>> {
    let state = build_initial(family, amplitude, spectral, params)?;
    let energy = line_energy(&state, spectral, params)?;
    let (nehari, _) = functionals_ij(&state.u, spectral, params)?;
    Ok(InitialFunctionals { energy, nehari })
}

/// Amplitudes bounding the sets `{E₀(A) < d}` and `{I₀(A) < 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBounds<T> {
    pub depth: T,
    /// Solutions of `E₀(A) = d` in increasing order; `A = 0` is included
    /// when `d = 0`.
    pub energy_roots: Vec<T>,
    /// Positive solutions of `I₀(A) = 0`.
    pub nehari_roots: Vec<T>,
}

/// Search window for amplitude roots.
const ROOT_SCAN_MAX: f64 = 20.0;
const ROOT_SCAN_SAMPLES: usize = 2000;

/// Roots of `f` on `[0, ROOT_SCAN_MAX]` located by a uniform sign scan and
/// refined by bisection to `tol`.
pub fn bracketed_roots<T: Real>(mut f: impl FnMut(T) -> Result<T>, include_origin: bool, tol: T) -> Result<Vec<T>> {
    let h = lit::<T>(ROOT_SCAN_MAX) / from_usize(ROOT_SCAN_SAMPLES);
    let mut roots = Vec::new();
    let mut a_prev = T::zero();
    let mut f_prev = f(a_prev)?;
    if f_prev == T::zero() && include_origin {
        roots.push(T::zero());
    }
    for i in 1..=ROOT_SCAN_SAMPLES {
        let a = from_usize::<T>(i) * h;
        let fa = f(a)?;
        if fa == T::zero() {
            roots.push(a);
        } else if f_prev != T::zero() && (fa > T::zero()) != (f_prev > T::zero()) {
            let (mut lo, mut hi, mut f_lo) = (a_prev, a, f_prev);
            while hi - lo > tol {
                let mid = (lo + hi) / lit(2.0);
                let fm = f(mid)?;
                if fm == T::zero() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm > T::zero()) == (f_lo > T::zero()) {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push((lo + hi) / lit(2.0));
        }
        a_prev = a;
        f_prev = fa;
    }
    Ok(roots)
}

/// Interval endpoints for `amp1`/`amp2` from their closed forms, or for any
/// amplitude family by quadrature on `spectral`.
pub fn theorem_interval_bounds<T: Real>(
    family: &InitialDataFamily<T>,
    depth: T,
    quadrature: Option<(&Spectral<T>, &EquationParams<T>)>,
) -> Result<TheoremBounds<T>> {
    if !family.is_amplitude_family() {
        return Err(Error::Unsupported(format!(
            "interval bounds are defined for amplitude families, not {}",
            family.name()
        )));
    }
    let tol = lit::<T>(1e-12);
    let eval = |a: T| -> Result<InitialFunctionals<T>> {
        match quadrature {
            Some((s, p)) => quadrature_functionals(family, a, s, p),
            None => closed_form_functionals(family, a),
        }
    };
    let energy_roots = bracketed_roots(|a| eval(a).map(|f| f.energy - depth), true, tol)?;
    let nehari_roots = bracketed_roots(|a| eval(a).map(|f| f.nehari), false, tol)?;
    Ok(TheoremBounds {
        depth,
        energy_roots,
        nehari_roots,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport<T> {
    /// `‖Q - Q_exact‖_∞` of the Petviashvili profile on `L = 50, N = 1024`.
    pub petviashvili_linf: T,
    pub petviashvili_iterations: usize,
    /// `‖u(5) - u_exact(5)‖_∞` on `L = 100, N = 2048, M = 1000`.
    pub evolution_linf: T,
    /// The same with `M = 10`, when requested.
    pub evolution_linf_coarse: Option<T>,
}

/// The exact-solution benchmark for both the solitary-wave solver and the
/// time integrator.
pub fn accuracy_test<T: Real>(with_coarse: bool) -> Result<AccuracyReport<T>> {
    let hbq = HbqParams::<T>::benchmark();
    let params = hbq.gbq_params()?;

    let s = Spectral::new(GridSpec::new(lit(50.0), 1024)?);
    let sol = petviashvili_solve(&s, &params, &SolitarySolveConfig::new(hbq.speed(), params.p_exp))?;
    let exact = s.grid().sample(|x| hbq.exact(x, T::zero(), T::zero(), T::one()));
    let petviashvili_linf = sol.profile.max_abs_diff(&exact);

    let s = Spectral::new(GridSpec::new(lit(100.0), 2048)?);
    let initial = build_initial(&InitialDataFamily::HbqExactSoliton, T::zero(), &s, &params)?;
    let t_final = lit::<T>(5.0);
    let exact = s.grid().sample(|x| hbq.exact(x, t_final, T::zero(), T::one()));
    let run = |m: usize| -> Result<T> {
        let mut cfg = TimeIntegratorConfig::new(t_final, m);
        cfg.diagnostics_stride = m;
        let traj = evolve(&initial, &s, &params, &cfg)?;
        Ok(traj.final_state.u.max_abs_diff(&exact))
    };
    let evolution_linf = run(1000)?;
    let evolution_linf_coarse = if with_coarse { Some(run(10)?) } else { None };
    Ok(AccuracyReport {
        petviashvili_linf,
        petviashvili_iterations: sol.iterations,
        evolution_linf,
        evolution_linf_coarse,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceAxis {
    Temporal,
    Spatial,
}

/// The soliton problem used for convergence studies, with its fine
/// reference run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup<T> {
    pub params: EquationParams<T>,
    pub speed: T,
    pub half_length: T,
    pub t_final: T,
    pub reference_points: usize,
    pub reference_steps: usize,
}

impl<T: Real> Default for ConvergenceSetup<T> {
    /// `α = 2, κ = β = 1, p = 1`, `c = 1.3` on `[-100, 100)` to `t = 5`,
    /// reference `N = 1024, M = 5000`.
    fn default() -> Self {
        Self {
            params: EquationParams {
                alpha: lit(2.0),
                kappa: T::one(),
                beta: T::one(),
                p_exp: 1,
            },
            speed: lit(1.3),
            half_length: lit(100.0),
            t_final: lit(5.0),
            reference_points: 1024,
            reference_steps: 5000,
        }
    }
}

/// Errors below this are treated as the round-off plateau.
pub const ROUNDOFF_PLATEAU: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub axis: ConvergenceAxis,
    /// `M` (temporal) or `N` (spatial) for each run.
    pub resolutions: Vec<usize>,
    /// `dt` (temporal) or `dx` (spatial).
    pub step_sizes: Vec<T>,
    pub linf_errors: Vec<T>,
    /// Least-squares slope of `log e` against `log dt` (temporal only).
    pub fitted_order: Option<T>,
    /// `e_i / e_{i+1}` for consecutive runs (spatial only).
    pub reduction_factors: Vec<T>,
    /// Number of leading runs above the round-off plateau.
    pub pre_plateau: usize,
}

/// Runs the study for the given `M` (temporal) or `N` (spatial) values,
/// sorted ascending. Spatial runs use the reference `M` and initial data
/// subsampled from the reference grid, so each `N` must divide it.
pub fn convergence_study<T: Real>(
    setup: &ConvergenceSetup<T>,
    axis: ConvergenceAxis,
    resolutions: &[usize],
) -> Result<ConvergenceReport<T>> {
    let mut res = resolutions.to_vec();
    res.sort_unstable();
    res.dedup();
    if res.len() < 3 {
        return Err(Error::invalid(
            "steps",
            "a convergence study needs at least 3 distinct step sizes",
        ));
    }
    if res.contains(&0) {
        return Err(Error::invalid("steps", "resolutions must be positive"));
    }
    let fine = Spectral::new(GridSpec::new(setup.half_length, setup.reference_points)?);
    let initial = build_initial(
        &InitialDataFamily::PetviashviliSoliton { speed: setup.speed },
        T::zero(),
        &fine,
        &setup.params,
    )?;
    let run = |s: &Spectral<T>, state: &FieldPair<T>, m: usize| -> Result<RealField<T>> {
        let mut cfg = TimeIntegratorConfig::new(setup.t_final, m);
        cfg.diagnostics_stride = m;
        let traj = evolve(state, s, &setup.params, &cfg)?;
        if traj.series.outcome != Outcome::Completed {
            return Err(Error::Divergence {
                iteration: m,
                reason: "convergence run did not complete".into(),
            });
        }
        Ok(traj.final_state.u)
    };
    let reference = run(&fine, &initial, setup.reference_steps)?;

    let mut step_sizes = Vec::with_capacity(res.len());
    let mut errors = Vec::with_capacity(res.len());
    match axis {
        ConvergenceAxis::Temporal => {
            for &m in &res {
                let u = run(&fine, &initial, m)?;
                step_sizes.push(setup.t_final / from_usize(m));
                errors.push(u.max_abs_diff(&reference));
            }
        }
        ConvergenceAxis::Spatial => {
            for &n in &res {
                if !setup.reference_points.is_multiple_of(n) || n >= setup.reference_points {
                    return Err(Error::invalid(
                        "steps",
                        format!(
                            "N = {n} must be a proper divisor of the reference N = {}",
                            setup.reference_points
                        ),
                    ));
                }
                let stride = setup.reference_points / n;
                let coarse = Spectral::new(GridSpec::new(setup.half_length, n)?);
                let sub = |f: &RealField<T>| RealField::new(f.iter().step_by(stride).copied().collect());
                let state = FieldPair::new(sub(&initial.u), sub(&initial.v))?;
                let u = run(&coarse, &state, setup.reference_steps)?;
                step_sizes.push(coarse.grid().dx());
                errors.push(u.max_abs_diff(&sub(&reference)));
            }
        }
    }

    let plateau = lit::<T>(ROUNDOFF_PLATEAU);
    let pre_plateau = errors.iter().take_while(|&&e| e >= plateau).count();
    let (fitted_order, reduction_factors) = match axis {
        ConvergenceAxis::Temporal => {
            let pts: Vec<(T, T)> = step_sizes
                .iter()
                .zip(&errors)
                .filter(|(_, &e)| e >= plateau)
                .map(|(&h, &e)| (h.ln(), e.ln()))
                .collect();
            if pts.len() < 2 {
                return Err(Error::invalid(
                    "steps",
                    "fewer than two errors above the round-off plateau; cannot fit",
                ));
            }
            (Some(least_squares_slope(&pts)), Vec::new())
        }
        ConvergenceAxis::Spatial => (None, errors.windows(2).map(|w| w[0] / w[1]).collect()),
    };
    Ok(ConvergenceReport {
        axis,
        resolutions: res,
        step_sizes,
        linf_errors: errors,
        fitted_order,
        reduction_factors,
        pre_plateau,
    })
}

fn least_squares_slope<T: Real>(pts: &[(T, T)]) -> T {
    let n = from_usize::<T>(pts.len());
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxy = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let sxx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    sxy / sxx
}

/// Bisection search for the amplitude separating global runs from blow-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearchConfig<T> {
    pub family: InitialDataFamily<T>,
    pub params: EquationParams<T>,
    pub bracket: [T; 2],
    pub bisection_tol: T,
    pub half_length: T,
    pub n_points: usize,
    pub integrator: TimeIntegratorConfig<T>,
    /// Number of interior amplitudes classified concurrently before bisecting.
    #[serde(default)]
    pub ladder: Option<usize>,
}

impl<T: Real> ThresholdSearchConfig<T> {
    /// Cubic focusing case on `[-100, 100)` with `N = 2¹³`, `t = 20`,
    /// `dt = 10⁻³` and tolerance `0.01`.
    pub fn new(family: InitialDataFamily<T>, bracket: [T; 2]) -> Self {
        let mut integrator = TimeIntegratorConfig::with_max_dt(lit(20.0), lit(1e-3));
        integrator.diagnostics_stride = 100;
        Self {
            family,
            params: EquationParams::cubic_focusing(),
            bracket,
            bisection_tol: lit(0.01),
            half_length: lit(100.0),
            n_points: 8192,
            integrator,
            ladder: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator.validate()?;
        if !self.family.is_amplitude_family() {
            return Err(Error::invalid("family", "threshold search needs an amplitude family"));
        }
        check_cubic(&self.params)?;
        let [lo, hi] = self.bracket;
        if !(lo >= T::zero() && lo < hi && hi.is_finite()) {
            return Err(Error::invalid("bracket", "need 0 <= A_lo < A_hi"));
        }
        if !(self.bisection_tol > T::zero()) {
            return Err(Error::invalid("bisection_tol", "must be positive"));
        }
        if self.ladder == Some(0) {
            return Err(Error::invalid("ladder", "must be >= 1 when given"));
        }
        GridSpec::new(self.half_length, self.n_points)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe<T> {
    pub amplitude: T,
    pub class: OutcomeClass,
    pub outcome: Outcome<T>,
    /// `max_t ‖u‖_{H¹}` over the recorded diagnostics.
    pub peak_h1: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport<T> {
    /// Final `[A_lo, A_hi]` with `A_lo` global and `A_hi` blowing up.
    pub bracket: [T; 2],
    /// Every probe in evaluation order.
    pub probes: Vec<Probe<T>>,
}

impl<T: Real> ThresholdReport<T> {
    pub fn width(&self) -> T {
        self.bracket[1] - self.bracket[0]
    }
}

/// Evolves the family at one amplitude and classifies the outcome.
pub fn probe_amplitude<T: Real>(
    cfg: &ThresholdSearchConfig<T>,
    spectral: &Spectral<T>,
    amplitude: T,
) -> Result<Probe<T>> {
    let initial = build_initial(&cfg.family, amplitude, spectral, &cfg.params)?;
    let traj = evolve(&initial, spectral, &cfg.params, &cfg.integrator)?;
    let peak_h1 = traj
        .series
        .h1_norm
        .iter()
        .fold(T::zero(), |m, &h| if h.is_finite() { m.max(h) } else { T::infinity() });
    Ok(Probe {
        amplitude,
        class: classify_outcome(&traj.series),
        outcome: traj.series.outcome,
        peak_h1,
    })
}

/// Bisects `cfg.bracket` until its width is at most `bisection_tol`. The
/// endpoints must classify as global (low) and blow-up (high). Fails if
/// the probe log is not monotone in the amplitude.
pub fn threshold_search<T: Real>(cfg: &ThresholdSearchConfig<T>) -> Result<ThresholdReport<T>> {
    cfg.validate()?;
    let spectral = Spectral::new(GridSpec::new(cfg.half_length, cfg.n_points)?);
    let [mut lo, mut hi] = cfg.bracket;
    let mut probes = Vec::new();

    let lo_probe = probe_amplitude(cfg, &spectral, lo)?;
    let hi_probe = probe_amplitude(cfg, &spectral, hi)?;
    let (lo_class, hi_class) = (lo_probe.class, hi_probe.class);
    probes.push(lo_probe);
    probes.push(hi_probe);
    if lo_class != OutcomeClass::GlobalCandidate || hi_class != OutcomeClass::Blowup {
        return Err(Error::invalid(
            "bracket",
            format!(
                "endpoints classify as {lo_class:?} and {hi_class:?}; need global_candidate below and blowup above"
            ),
        ));
    }

    if let Some(k) = cfg.ladder {
        let step = (hi - lo) / from_usize(k + 1);
        let ladder: Vec<T> = (1..=k).map(|i| lo + from_usize::<T>(i) * step).collect();
        let results: Vec<Result<Probe<T>>> = ladder.par_iter().map(|&a| probe_amplitude(cfg, &spectral, a)).collect();
        for r in results {
            probes.push(r?);
        }
        hi = probes
            .iter()
            .filter(|p| p.class == OutcomeClass::Blowup)
            .fold(hi, |m, p| m.min(p.amplitude));
        lo = probes
            .iter()
            .filter(|p| p.class == OutcomeClass::GlobalCandidate && p.amplitude < hi)
            .fold(lo, |m, p| m.max(p.amplitude));
    }

    while hi - lo > cfg.bisection_tol {
        let mid = (lo + hi) / lit(2.0);
        let p = probe_amplitude(cfg, &spectral, mid)?;
        match p.class {
            OutcomeClass::GlobalCandidate => lo = mid,
            OutcomeClass::Blowup => hi = mid,
        }
        probes.push(p);
    }

    let monotone = probes.iter().all(|p| match p.class {
        OutcomeClass::GlobalCandidate => p.amplitude <= lo,
        OutcomeClass::Blowup => p.amplitude >= hi,
    });
    if !monotone {
        return Err(non_monotone());
    }
    Ok(ThresholdReport {
        bracket: [lo, hi],
        probes,
    })
}

fn non_monotone() -> Error {
    Error::Inconsistent("threshold probes are not monotone in the amplitude".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport<T> {
    pub speed: T,
    pub t_final: T,
    /// `‖u(t) - Q(· - ct)‖_∞`.
    pub linf_deviation: T,
    /// The same deviation restricted to where `|Q(· - ct)| < 10⁻⁶ max|Q|`.
    pub tail_max: T,
}

/// Evolves a Petviashvili profile with `v₀ = -cQ'` and compares the result
/// with the spectrally translated profile.
pub fn shape_preservation<T: Real>(
    params: &EquationParams<T>,
    speed: T,
    grid: GridSpec<T>,
    integrator: &TimeIntegratorConfig<T>,
) -> Result<ShapeReport<T>> {
    let s = Spectral::new(grid);
    let initial = build_initial(&InitialDataFamily::PetviashviliSoliton { speed }, T::zero(), &s, params)?;
    let traj = evolve(&initial, &s, params, integrator)?;
    if traj.series.outcome != Outcome::Completed {
        return Err(Error::Divergence {
            iteration: integrator.n_steps,
            reason: "soliton run did not complete".into(),
        });
    }
    let shifted = s.translate(&initial.u, speed * integrator.t_final)?;
    let floor = lit::<T>(1e-6) * initial.u.max_abs();
    let tail_max = shifted
        .iter()
        .zip(traj.final_state.u.iter())
        .filter(|(q, _)| q.abs() < floor)
        .fold(T::zero(), |m, (q, u)| m.max((*u - *q).abs()));
    Ok(ShapeReport {
        speed,
        t_final: integrator.t_final,
        linf_deviation: traj.final_state.u.max_abs_diff(&shifted),
        tail_max,
    })
}
