//! Emission dynamics of the damped single-excitation system.
//!
//! Amplitudes (c_e, c_x, c_g) of |e,0⟩, |x,0⟩, |g,1⟩ evolve under
//!
//! ```text
//! ċ_e = −iΔ_L c_e + (i/2) Ω c_x
//! ċ_x = (i/2) Ω c_e + i g c_g − γ c_x
//! ċ_g = i g c_x − (κ + iΔ_cav) c_g [+ √(2κ) φ_in]
//! ```
//!
//! i.e. iċ = H c with the real couplings −Ω/2 and −g and the decays folded in
//! as anti-Hermitian diagonal terms. With this sign choice a positive Ω
//! transfers |e,0⟩ into −|g,1⟩, the dark-state direction of the triplet.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressed::{classify_regime, Regime};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numerics::{cumulative_trapezoid, trapezoid, Interpolant};
use crate::ode::{integrate_adaptive, integrate_rk4, State, Tolerances};
use crate::params::SystemParams;
use crate::waveform::{AmplitudeTrajectory, PulseEnvelope};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest allowed dt · (fastest rate in the problem).
pub const MAX_STEP_RATE_PRODUCT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Adaptive(Tolerances),
    /// Classical RK4 with this many equal substeps per grid interval.
    FixedRk4 { substeps: usize },
}

impl Default for Method {
    fn default() -> Self {
        Method::Adaptive(Tolerances::default())
    }
}

/// Initial amplitudes of (|e,0⟩, |x,0⟩, |g,1⟩).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub c_e: Complex64,
    pub c_x: Complex64,
    pub c_g: Complex64,
}

impl InitialState {
    pub fn excited() -> Self {
        Self::with_c_e(1.0)
    }

    pub fn with_c_e(c_e: f64) -> Self {
        InitialState {
            c_e: Complex64::new(c_e, 0.0),
            c_x: ZERO,
            c_g: ZERO,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_x.norm_sqr() + self.c_g.norm_sqr()
    }

    fn as_state(&self) -> State<3> {
        [self.c_e, self.c_x, self.c_g]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionResult {
    pub traj: AmplitudeTrajectory,
    /// Photon emission rate 2κ|c_g|² (1/s).
    pub rate: Vec<f64>,
    /// Running ∫2κ|c_g|² dt, integrated alongside the amplitudes.
    pub emitted: Vec<f64>,
    /// Running ∫2γ|c_x|² dt.
    pub spont: Vec<f64>,
    pub p_emit: f64,
    /// Probability lost by spontaneous emission.
    pub p_spont: f64,
}

impl EmissionResult {
    pub fn residual(&self) -> f64 {
        self.traj.final_population()
    }

    /// |c|² plus everything emitted or lost so far, at every sample.
    /// Constant for an exact solution.
    pub fn bookkeeping(&self) -> Vec<f64> {
        (0..self.traj.grid.len())
            .map(|i| self.traj.population(i) + self.emitted[i] + self.spont[i])
            .collect()
    }
}

pub(crate) fn check_step(grid: &TimeGrid, params: &SystemParams, max_omega: f64) -> Result<()> {
    let rate = params.max_rate().max(max_omega);
    let product = grid.dt() * rate;
    if product > MAX_STEP_RATE_PRODUCT {
        return Err(Error::GridTooCoarse {
            product,
            limit: MAX_STEP_RATE_PRODUCT,
            suggested_dt: MAX_STEP_RATE_PRODUCT / rate,
        });
    }
    Ok(())
}

/// Right-hand side of the driven Λ system, optionally fed by an incoming
/// running-wave amplitude through the coupling mirror.
pub(crate) fn lambda_rhs(
    params: &SystemParams,
    omega: f64,
    drive: Complex64,
    c: &State<3>,
) -> State<3> {
    let half = 0.5 * omega;
    [
        -I * params.delta_l * c[0] + I * half * c[1],
        I * half * c[0] + I * params.g * c[2] - params.gamma * c[1],
        I * params.g * c[1] - Complex64::new(params.kappa, params.delta_cav) * c[2] + drive,
    ]
}

pub(crate) fn run<const N: usize, F>(
    f: F,
    grid: &TimeGrid,
    y0: State<N>,
    method: Method,
) -> Result<Vec<State<N>>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    match method {
        Method::Adaptive(tol) => integrate_adaptive(f, grid, y0, tol),
        Method::FixedRk4 { substeps } => Ok(integrate_rk4(f, grid, y0, substeps)),
    }
}

/// Append running probability integrals to a state of amplitudes.
pub(crate) fn with_losses<const N: usize, const M: usize>(
    amps: State<N>,
    extras: &[f64],
) -> State<M> {
    let mut out = [ZERO; M];
    out[..N].copy_from_slice(&amps);
    for (o, e) in out[N..].iter_mut().zip(extras) {
        *o = Complex64::new(*e, 0.0);
    }
    out
}

fn finish(
    params: &SystemParams,
    grid: TimeGrid,
    c_e: Vec<Complex64>,
    c_x: Vec<Complex64>,
    c_g: Vec<Complex64>,
    emitted: Vec<f64>,
    spont: Vec<f64>,
) -> EmissionResult {
    let root = (2.0 * params.kappa).sqrt();
    let rate: Vec<f64> = c_g
        .iter()
        .map(|c| 2.0 * params.kappa * c.norm_sqr())
        .collect();
    let p_emit = *emitted.last().expect("grid has samples");
    let p_spont = *spont.last().expect("grid has samples");
    let phi_out = c_g.iter().map(|c| c * root).collect();
    EmissionResult {
        traj: AmplitudeTrajectory {
            grid,
            c_e,
            c_x,
            c_g,
            phi_out,
        },
        rate,
        emitted,
        spont,
        p_emit,
        p_spont,
    }
}

/// Excited two-level atom in an empty cavity: amplitudes of |x,0⟩ and |g,1⟩.
/// The returned trajectory has c_e ≡ 0.
pub fn integrate_two_level(params: &SystemParams, grid: &TimeGrid) -> Result<EmissionResult> {
    integrate_two_level_with(params, grid, Method::default())
}

pub fn integrate_two_level_with(
    params: &SystemParams,
    grid: &TimeGrid,
    method: Method,
) -> Result<EmissionResult> {
    check_step(grid, params, 0.0)?;
    let p = *params;
    let f = move |_t: f64, c: &State<4>| {
        [
            I * p.g * c[1] - p.gamma * c[0],
            I * p.g * c[0] - Complex64::new(p.kappa, p.delta_cav) * c[1],
            Complex64::new(2.0 * p.kappa * c[1].norm_sqr(), 0.0),
            Complex64::new(2.0 * p.gamma * c[0].norm_sqr(), 0.0),
        ]
    };
    let y0 = with_losses([Complex64::new(1.0, 0.0), ZERO], &[0.0, 0.0]);
    let states = run(f, grid, y0, method)?;
    let c_x = states.iter().map(|s| s[0]).collect();
    let c_g = states.iter().map(|s| s[1]).collect();
    let emitted = states.iter().map(|s| s[2].re).collect();
    let spont = states.iter().map(|s| s[3].re).collect();
    Ok(finish(params, *grid, vec![ZERO; grid.len()], c_x, c_g, emitted, spont))
}

/// Λ atom driven by `pulse` while the cavity couples |x⟩ and |g⟩.
pub fn integrate_lambda(
    params: &SystemParams,
    pulse: &PulseEnvelope,
    initial: InitialState,
) -> Result<EmissionResult> {
    integrate_lambda_with(params, pulse, initial, Method::default())
}

pub fn integrate_lambda_with(
    params: &SystemParams,
    pulse: &PulseEnvelope,
    initial: InitialState,
    method: Method,
) -> Result<EmissionResult> {
    let norm = initial.norm_sqr();
    if !(norm <= 1.0 + 1e-9) {
        return Err(Error::invalid(
            "initial",
            format!("population {norm} exceeds one excitation"),
        ));
    }
    let grid = *pulse.grid();
    check_step(&grid, params, pulse.max_abs())?;
    let omega: Interpolant<'_, f64> = pulse.interpolant();
    let f = |t: f64, c: &State<5>| {
        let amps = [c[0], c[1], c[2]];
        let d = lambda_rhs(params, omega.eval(t), ZERO, &amps);
        with_losses(
            d,
            &[
                2.0 * params.kappa * c[2].norm_sqr(),
                2.0 * params.gamma * c[1].norm_sqr(),
            ],
        )
    };
    let states = run(f, &grid, with_losses(initial.as_state(), &[0.0, 0.0]), method)?;
    let c_e = states.iter().map(|s| s[0]).collect();
    let c_x = states.iter().map(|s| s[1]).collect();
    let c_g = states.iter().map(|s| s[2]).collect();
    let emitted = states.iter().map(|s| s[3].re).collect();
    let spont = states.iter().map(|s| s[4].re).collect();
    Ok(finish(params, grid, c_e, c_x, c_g, emitted, spont))
}

/// ∫2κ|c_g|² dt.
pub fn emission_probability(traj: &AmplitudeTrajectory, kappa: f64) -> f64 {
    let rate: Vec<f64> = traj
        .c_g
        .iter()
        .map(|c| 2.0 * kappa * c.norm_sqr())
        .collect();
    trapezoid(&rate, traj.grid.dt())
}

/// Adiabatic-elimination solution valid when κ ≫ g²/κ ≫ γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSolution {
    pub grid: TimeGrid,
    /// α = 2 / (2γ + 2g²/κ).
    pub alpha: f64,
    pub c_e: Vec<Complex64>,
    pub c_x: Vec<Complex64>,
    pub c_g: Vec<Complex64>,
    /// (α/2) ∫Ω² dt over the whole pulse.
    pub pump_area: f64,
    /// (g²α/κ)[1 − exp(−pump_area)].
    pub p_emit: f64,
    /// g²α/κ, the large-area limit.
    pub p_emit_limit: f64,
}

pub fn adiabatic_bad_cavity(params: &SystemParams, pulse: &PulseEnvelope) -> AdiabaticSolution {
    if classify_regime(params) != Regime::BadCavity {
        warn!("adiabatic solution requested outside the bad-cavity ordering kappa >> g^2/kappa >> gamma");
    }
    let SystemParams {
        g, kappa, gamma, ..
    } = *params;
    let alpha = 2.0 / (2.0 * gamma + 2.0 * g * g / kappa);
    let grid = *pulse.grid();
    let omega2: Vec<f64> = pulse.omega().iter().map(|w| w * w).collect();
    let area = cumulative_trapezoid(&omega2, grid.dt());
    let c_e: Vec<Complex64> = area
        .iter()
        .map(|a| Complex64::new((-0.25 * alpha * a).exp(), 0.0))
        .collect();
    let c_x: Vec<Complex64> = c_e
        .iter()
        .zip(pulse.omega())
        .map(|(ce, w)| I * 0.5 * alpha * w * ce)
        .collect();
    let c_g = c_x.iter().map(|cx| I * (g / kappa) * cx).collect();
    let pump_area = 0.5 * alpha * area.last().copied().unwrap_or(0.0);
    let p_emit_limit = g * g * alpha / kappa;
    AdiabaticSolution {
        grid,
        alpha,
        c_e,
        c_x,
        c_g,
        pump_area,
        p_emit: p_emit_limit * (1.0 - (-pump_area).exp()),
        p_emit_limit,
    }
}
