//! Storage of a single photon in the atom by impedance-matched absorption.
//!
//! The incoming field enters the cavity mode as ċ_g ∋ √(2κ)φ_in and leaves
//! as φ_out = √(2κ)c_g − φ_in. The control pulse is chosen so that φ_out
//! vanishes at all times, i.e. c_g = φ_in/√(2κ).

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_step, lambda_rhs, run, with_losses, InitialState, Method};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numerics::{cumulative_trapezoid, derivative, trapezoid, Interpolant};
use crate::ode::{integrate_adaptive, State, Tolerances};
use crate::params::SystemParams;
use crate::shaper::{
    guarded_ratio, support, synthesize_emission_pulse, DEFAULT_GUARD, RADICAND_TOLERANCE,
};
use crate::waveform::{AmplitudeTrajectory, PhotonWaveform, PulseEnvelope};

/// Default initial |e,0⟩ population needed to start impedance matching.
pub const DEFAULT_C0_SQ: f64 = 0.005;

/// First sample of φ_in allowed relative to its peak.
const START_TOLERANCE: f64 = 1e-6;

/// Input-output coupling of a single-sided cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputOutput {
    pub kappa: f64,
    pub delta_cav: f64,
}

impl InputOutput {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid("kappa", format!("must be > 0, got {kappa}")));
        }
        Ok(Self {
            kappa,
            delta_cav: 0.0,
        })
    }

    /// ċ_cav of the empty cavity.
    pub fn rate(&self, c_cav: Complex64, phi_in: Complex64) -> Complex64 {
        -Complex64::new(self.kappa, self.delta_cav) * c_cav + (2.0 * self.kappa).sqrt() * phi_in
    }

    pub fn output(&self, c_cav: Complex64, phi_in: Complex64) -> Complex64 {
        (2.0 * self.kappa).sqrt() * c_cav - phi_in
    }

    /// Drive the empty cavity with `phi_in`, starting from amplitude `c0`.
    pub fn response(&self, phi_in: &PhotonWaveform, c0: Complex64) -> Result<EmptyCavityResponse> {
        let grid = *phi_in.grid();
        let product = grid.dt() * self.kappa.max(self.delta_cav.abs());
        if product > crate::dynamics::MAX_STEP_RATE_PRODUCT {
            return Err(Error::GridTooCoarse {
                product,
                limit: crate::dynamics::MAX_STEP_RATE_PRODUCT,
                suggested_dt: crate::dynamics::MAX_STEP_RATE_PRODUCT
                    / self.kappa.max(self.delta_cav.abs()),
            });
        }
        let input = phi_in.interpolant();
        let f = |t: f64, c: &State<1>| [self.rate(c[0], input.eval(t))];
        let states = integrate_adaptive(f, &grid, [c0], Tolerances::default())?;
        let c_cav: Vec<Complex64> = states.iter().map(|s| s[0]).collect();
        let phi_out: Vec<Complex64> = c_cav
            .iter()
            .zip(phi_in.amp())
            .map(|(c, p)| self.output(*c, *p))
            .collect();
        let p_reflected = trapezoid(
            &phi_out.iter().map(|p| p.norm_sqr()).collect::<Vec<_>>(),
            grid.dt(),
        );
        Ok(EmptyCavityResponse {
            grid,
            c_cav,
            phi_out,
            p_reflected,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptyCavityResponse {
    pub grid: TimeGrid,
    pub c_cav: Vec<Complex64>,
    pub phi_out: Vec<Complex64>,
    pub p_reflected: f64,
}

impl EmptyCavityResponse {
    /// Times where Re φ_out changes sign, linearly interpolated.
    pub fn sign_changes(&self) -> Vec<f64> {
        let scale = self.phi_out.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let floor = 1e-9 * scale;
        let mut out = Vec::new();
        let mut prev: Option<(usize, f64)> = None;
        for (i, p) in self.phi_out.iter().enumerate() {
            let v = p.re;
            if v.abs() <= floor {
                continue;
            }
            if let Some((j, u)) = prev {
                if u.signum() != v.signum() {
                    let (tj, ti) = (self.grid.t(j), self.grid.t(i));
                    out.push(tj + (ti - tj) * u / (u - v));
                }
            }
            prev = Some((i, v));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionProblem {
    pub params: SystemParams,
    pub phi_in: PhotonWaveform,
    pub c0_sq: f64,
}

impl AbsorptionProblem {
    pub fn new(params: SystemParams, phi_in: PhotonWaveform, c0_sq: f64) -> Result<Self> {
        params.validate()?;
        if !(0.0..1.0).contains(&c0_sq) {
            return Err(Error::invalid("c0_sq", format!("must lie in [0, 1), got {c0_sq}")));
        }
        let peak = phi_in.amp().iter().map(|a| a.norm()).fold(0.0, f64::max);
        if phi_in.amp()[0].norm() > START_TOLERANCE * peak {
            return Err(Error::invalid(
                "phi_in",
                "incoming photon must start smoothly from zero",
            ));
        }
        Ok(Self {
            params,
            phi_in,
            c0_sq,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.phi_in.grid()
    }

    pub fn initial_state(&self) -> InitialState {
        InitialState::with_c_e(-self.c0_sq.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionResult {
    pub traj: AmplitudeTrajectory,
    pub p_reflected: f64,
    pub p_stored: f64,
    pub p_spont: f64,
    /// ∫|φ_in|² of the interpolated input plus the initial population.
    pub p_in: f64,
}

impl AbsorptionResult {
    /// |c_x|² + |c_g|² left at the end.
    pub fn residual(&self) -> f64 {
        let n = self.traj.grid.len() - 1;
        self.traj.c_x[n].norm_sqr() + self.traj.c_g[n].norm_sqr()
    }

    /// Deviation of the probability balance from zero.
    pub fn bookkeeping_error(&self) -> f64 {
        self.p_reflected + self.p_stored + self.p_spont + self.residual() - self.p_in
    }

    /// Stored fraction |c_e(t_end)|².
    pub fn efficiency(&self) -> f64 {
        self.p_stored
    }
}

/// Control pulse that absorbs `phi_in` without reflection.
pub fn synthesize_absorption_pulse(problem: &AbsorptionProblem) -> Result<PulseEnvelope> {
    Ok(absorption_amplitudes(problem, DEFAULT_GUARD)?.pulse)
}

/// Matched pulse together with the amplitudes it is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedAbsorption {
    pub pulse: PulseEnvelope,
    pub c_e: Vec<Complex64>,
    pub c_x: Vec<Complex64>,
    pub c_g: Vec<Complex64>,
    pub clipped: Vec<bool>,
}

pub fn absorption_amplitudes(problem: &AbsorptionProblem, guard: f64) -> Result<MatchedAbsorption> {
    let params = &problem.params;
    if !params.is_resonant() {
        return Err(Error::invalid(
            "delta",
            "pulse synthesis is implemented for resonant driving only",
        ));
    }
    if !problem.phi_in.is_real(1e-12) {
        return Err(Error::invalid("phi_in", "pulse synthesis needs a real photon"));
    }
    let cooperativity = params.cooperativity();
    if !(cooperativity > 0.5) {
        return Err(Error::BelowThreshold { cooperativity });
    }
    let grid = *problem.grid();
    let dt = grid.dt();
    let phi = problem.phi_in.real_part();
    let Some((first, last)) = support(&phi) else {
        return Err(Error::invalid("phi_in", "zero waveform"));
    };
    let duration = (last - first) as f64 * dt;
    if duration * params.kappa < 1.0 {
        warn!(
            "photon of {:.3e} s is shorter than the cavity build-up time {:.3e} s",
            duration,
            1.0 / params.kappa
        );
    }

    let SystemParams {
        g, kappa, gamma, ..
    } = *params;
    let root = (2.0 * kappa).sqrt();
    let c_g: Vec<f64> = phi.iter().map(|p| p / root).collect();
    let c_g_dot = derivative(&c_g, dt);
    let y: Vec<f64> = c_g_dot
        .iter()
        .zip(&c_g)
        .map(|(d, c)| (d - kappa * c) / g)
        .collect();
    let y_dot = derivative(&y, dt);
    let gain: Vec<f64> = phi
        .iter()
        .zip(&y)
        .map(|(p, y)| p * p - 2.0 * gamma * y * y)
        .collect();
    let gained = cumulative_trapezoid(&gain, dt);
    let radicand: Vec<f64> = (0..phi.len())
        .map(|i| problem.c0_sq - y[i] * y[i] - c_g[i] * c_g[i] + gained[i])
        .collect();
    if let Some((i, &r)) = radicand
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        if r < -RADICAND_TOLERANCE {
            return Err(Error::WeakCoupling {
                cooperativity: params.cooperativity(),
                radicand: r,
                time: grid.t(i),
            });
        }
    }
    let c_e_abs: Vec<f64> = radicand.iter().map(|r| r.max(0.0).sqrt()).collect();
    let numerator: Vec<f64> = (0..phi.len())
        .map(|i| 2.0 * (y_dot[i] + gamma * y[i] + g * c_g[i]))
        .collect();
    let (omega, clipped) = guarded_ratio(&numerator, &c_e_abs, guard, |i| {
        i + 1 >= first && i <= last + 1
    });
    Ok(MatchedAbsorption {
        pulse: PulseEnvelope::new(grid, omega)?,
        c_e: c_e_abs.iter().map(|a| Complex64::new(-a, 0.0)).collect(),
        c_x: y.iter().map(|y| Complex64::new(0.0, -y)).collect(),
        c_g: c_g.iter().map(|c| Complex64::new(*c, 0.0)).collect(),
        clipped,
    })
}

/// Absorb the photon starting from c_e = −√c0_sq.
pub fn run_absorption(problem: &AbsorptionProblem, pulse: &PulseEnvelope) -> Result<AbsorptionResult> {
    run_absorption_with(problem, pulse, problem.initial_state(), Method::default())
}

pub fn run_absorption_with(
    problem: &AbsorptionProblem,
    pulse: &PulseEnvelope,
    initial: InitialState,
    method: Method,
) -> Result<AbsorptionResult> {
    let params = &problem.params;
    let grid = *problem.grid();
    grid.ensure_same(pulse.grid())?;
    let norm = initial.norm_sqr();
    if !(norm <= 1.0 + 1e-9) {
        return Err(Error::invalid(
            "initial",
            format!("population {norm} exceeds one excitation"),
        ));
    }
    check_step(&grid, params, pulse.max_abs())?;
    let root = (2.0 * params.kappa).sqrt();
    let omega: Interpolant<'_, f64> = pulse.interpolant();
    let input = problem.phi_in.interpolant();
    // extra states: reflected, spontaneous and incoming probability
    let f = |t: f64, c: &State<6>| {
        let phi = input.eval(t);
        let d = lambda_rhs(params, omega.eval(t), root * phi, &[c[0], c[1], c[2]]);
        with_losses(
            d,
            &[
                (root * c[2] - phi).norm_sqr(),
                2.0 * params.gamma * c[1].norm_sqr(),
                phi.norm_sqr(),
            ],
        )
    };
    let y0 = with_losses([initial.c_e, initial.c_x, initial.c_g], &[0.0; 3]);
    let states = run(f, &grid, y0, method)?;

    let c_e: Vec<Complex64> = states.iter().map(|s| s[0]).collect();
    let c_x: Vec<Complex64> = states.iter().map(|s| s[1]).collect();
    let c_g: Vec<Complex64> = states.iter().map(|s| s[2]).collect();
    let phi_out: Vec<Complex64> = c_g
        .iter()
        .zip(problem.phi_in.amp())
        .map(|(c, p)| root * c - p)
        .collect();
    let last = states.last().expect("grid has samples");
    let (p_reflected, p_spont) = (last[3].re, last[4].re);
    let p_in = last[5].re + norm;
    let p_stored = c_e.last().map(|c| c.norm_sqr()).unwrap_or(0.0);
    Ok(AbsorptionResult {
        traj: AmplitudeTrajectory {
            grid,
            c_e,
            c_x,
            c_g,
            phi_out,
        },
        p_reflected,
        p_stored,
        p_spont,
        p_in,
    })
}

/// One row of a storage-efficiency sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cooperativity: f64,
    pub g: f64,
    pub p_stored: Option<f64>,
    pub p_reflected: Option<f64>,
    pub p_spont: Option<f64>,
    /// Reason the row could not be computed.
    pub infeasible: Option<String>,
}

impl SweepRow {
    /// Optimum 2C/(2C+1) for comparison.
    pub fn reference(&self) -> f64 {
        crate::dressed::optimal_efficiency(self.cooperativity)
    }

    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_none()
    }
}

/// Storage efficiency as a function of cooperativity at fixed κ and γ,
/// with g = √(2Cκγ). Rows are computed in parallel.
pub fn efficiency_sweep(
    kappa: f64,
    gamma: f64,
    photon: &PhotonWaveform,
    c_values: &[f64],
    c0_sq: f64,
) -> Result<Vec<SweepRow>> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "a sweep over C needs gamma > 0"));
    }
    c_values
        .par_iter()
        .map(|&c| sweep_row(kappa, gamma, photon, c, c0_sq))
        .collect()
}

fn sweep_row(
    kappa: f64,
    gamma: f64,
    photon: &PhotonWaveform,
    c: f64,
    c0_sq: f64,
) -> Result<SweepRow> {
    let g = (2.0 * c * kappa * gamma).sqrt();
    let mut row = SweepRow {
        cooperativity: c,
        g,
        p_stored: None,
        p_reflected: None,
        p_spont: None,
        infeasible: None,
    };
    if !(c > 0.5) {
        row.infeasible = Some(Error::BelowThreshold { cooperativity: c }.to_string());
        return Ok(row);
    }
    let params = SystemParams::new(g, kappa, gamma, 0.0, 0.0)?;
    let problem = AbsorptionProblem::new(params, photon.clone(), c0_sq)?;
    let pulse = match synthesize_absorption_pulse(&problem) {
        Ok(p) => p,
        Err(e) if e.is_infeasible() => {
            row.infeasible = Some(e.to_string());
            return Ok(row);
        }
        Err(e) => return Err(e),
    };
    let result = run_absorption(&problem, &pulse)?;
    row.p_stored = Some(result.p_stored);
    row.p_reflected = Some(result.p_reflected);
    row.p_spont = Some(result.p_spont);
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeReversalReport {
    pub max_deviation: f64,
    /// Population left in |e,0⟩ by emission, used as c0_sq for absorption.
    pub c0_sq: f64,
    pub emission_pulse: PulseEnvelope,
    pub absorption_pulse: PulseEnvelope,
}

/// Compare the absorption pulse for the time-reversed photon with the
/// mirror image of the emission pulse. The deviation is relative to the
/// peak |Ω| over samples where both |c_e| exceed the guard.
pub fn time_reversal_check(params: &SystemParams, target: &PhotonWaveform) -> Result<f64> {
    Ok(time_reversal_report(params, target)?.max_deviation)
}

pub fn time_reversal_report(
    params: &SystemParams,
    target: &PhotonWaveform,
) -> Result<TimeReversalReport> {
    let emission = synthesize_emission_pulse(params, target, DEFAULT_GUARD)?;
    let c0_sq = emission.final_excited_population();
    let problem = AbsorptionProblem::new(*params, target.time_reversed(), c0_sq)?;
    let absorption = absorption_amplitudes(&problem, DEFAULT_GUARD)?;

    let n = target.grid().len();
    let mirrored = emission.pulse.time_reversed();
    let valid: Vec<usize> = (0..n)
        .filter(|&i| {
            emission.c_e[n - 1 - i].norm() > DEFAULT_GUARD && absorption.c_e[i].norm() > DEFAULT_GUARD
        })
        .collect();
    let scale = valid
        .iter()
        .map(|&i| mirrored.omega()[i].abs())
        .fold(0.0, f64::max);
    let max_deviation = if scale == 0.0 {
        0.0
    } else {
        valid
            .iter()
            .map(|&i| (absorption.pulse.omega()[i] - mirrored.omega()[i]).abs())
            .fold(0.0, f64::max)
            / scale
    };
    Ok(TimeReversalReport {
        max_deviation,
        c0_sq,
        emission_pulse: emission.pulse,
        absorption_pulse: absorption.pulse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::from_2pi_mhz;
    use crate::waveform::sin2_photon;

    fn storage_problem() -> AbsorptionProblem {
        let params = SystemParams::resonant_2pi_mhz(15.0, 3.0, 3.0).unwrap();
        let grid = TimeGrid::with_max_step(0.0, 3.6e-6, 0.5e-9).unwrap();
        let photon = sin2_photon(grid, 3.14e-6).unwrap();
        AbsorptionProblem::new(params, photon, DEFAULT_C0_SQ).unwrap()
    }

    #[test]
    fn empty_cavity_free_decay() {
        let kappa = from_2pi_mhz(3.0);
        let io = InputOutput::new(kappa).unwrap();
        let grid = TimeGrid::with_max_step(0.0, 20.0 / kappa, 0.01 / kappa).unwrap();
        let resp = io
            .response(&PhotonWaveform::zeros(grid), Complex64::new(1.0, 0.0))
            .unwrap();
        for (t, c) in grid.times().zip(&resp.c_cav) {
            assert!((c.re - (-kappa * t).exp()).abs() < 1e-9);
        }
        assert!((resp.p_reflected - 1.0).abs() < 1e-4);
    }

    #[test]
    fn empty_cavity_reflects_the_photon_with_a_phase_flip() {
        let problem = storage_problem();
        let io = InputOutput::new(problem.params.kappa).unwrap();
        let resp = io.response(&problem.phi_in, Complex64::default()).unwrap();
        assert!((resp.p_reflected - 1.0).abs() < 1e-6, "{}", resp.p_reflected);
        let flips = resp.sign_changes();
        assert_eq!(flips.len(), 1, "{flips:?}");
        assert!((flips[0] - 0.136e-6).abs() < 0.01e-6, "{}", flips[0]);
    }

    #[test]
    fn matched_absorption_does_not_reflect() {
        let problem = storage_problem();
        let pulse = synthesize_absorption_pulse(&problem).unwrap();
        let res = run_absorption(&problem, &pulse).unwrap();
        assert!(res.p_reflected < 1e-10, "{}", res.p_reflected);
        assert!(res.bookkeeping_error().abs() < 1e-6);

        let empty_start = run_absorption_with(
            &problem,
            &pulse,
            InitialState::with_c_e(0.0),
            Method::default(),
        )
        .unwrap();
        assert!((empty_start.p_reflected - 0.005).abs() < 0.001, "{}", empty_start.p_reflected);
    }

    #[test]
    fn sub_threshold_cooperativity_is_refused() {
        let mut problem = storage_problem();
        problem.params = problem.params.with_g((2.0 * 0.4 * problem.params.kappa * problem.params.gamma).sqrt());
        let err = synthesize_absorption_pulse(&problem).unwrap_err();
        assert!(matches!(err, Error::BelowThreshold { .. }), "{err}");
    }

    #[test]
    fn photon_must_start_at_zero() {
        let problem = storage_problem();
        let grid = *problem.grid();
        let flat = PhotonWaveform::from_real(grid, &vec![0.1; grid.len()]).unwrap();
        assert!(AbsorptionProblem::new(problem.params, flat, DEFAULT_C0_SQ).is_err());
    }

    #[test]
    fn sweep_marks_weak_rows() {
        let problem = storage_problem();
        let rows = efficiency_sweep(
            problem.params.kappa,
            problem.params.gamma,
            &problem.phi_in,
            &[0.4, 5.0],
            DEFAULT_C0_SQ,
        )
        .unwrap();
        assert!(!rows[0].is_feasible());
        let stored = rows[1].p_stored.unwrap();
        assert!((stored - 10.0 / 11.0).abs() < 0.02, "{stored}");
        assert!(rows[1].p_reflected.unwrap() < 1e-6);
    }

    #[test]
    fn absorption_mirrors_emission() {
        let params = SystemParams::resonant_2pi_mhz(15.0, 2.0, 0.0).unwrap();
        let grid = TimeGrid::with_max_step(0.0, 500e-9, 0.1e-9).unwrap();
        let shape = sin2_photon(grid, 500e-9).unwrap();
        let norm = crate::shaper::max_emission_norm(&params, &shape, 1e-2).unwrap();
        let target = shape.with_norm(norm).unwrap();
        let report = time_reversal_report(&params, &target).unwrap();
        assert!(report.max_deviation < 1e-3, "{}", report.max_deviation);
        assert!((report.c0_sq - (1.0 - norm)).abs() < 1e-4);
        let mut last = report.max_deviation;
        for gamma in [0.1, 0.2, 0.4] {
            let lossy = params.with_gamma(from_2pi_mhz(gamma));
            let d = time_reversal_check(&lossy, &target).unwrap();
            assert!(d > last, "{d} <= {last}");
            last = d;
        }
    }
}
