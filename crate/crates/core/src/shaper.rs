//! Control pulses that make the cavity emit a photon of prescribed shape.
//!
//! The cavity amplitude follows the target directly, c_g = ψ/√(2κ). The
//! coupling to |x,0⟩ then fixes c_x, probability conservation fixes |c_e|,
//! and the remaining equation of motion yields Ω(t) in closed form.
//!
//! Conventions: resonant driving, real targets. c_g carries the sign of ψ,
//! c_x = −i y with y real, and c_e ≤ 0 so that Ω ≥ 0 wherever ψ ≥ 0. A bin
//! with ψ < 0 (a π phase jump) is produced by a sign-flipped Ω.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressed::optimal_efficiency;
use crate::dynamics::{integrate_lambda, EmissionResult, InitialState};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numerics::{cumulative_trapezoid, derivative, trapezoid};
use crate::params::SystemParams;
use crate::waveform::{normalized_real, sin2_envelope, PhotonWaveform, PulseEnvelope};

/// Default lower bound on |c_e| below which Ω is frozen.
pub const DEFAULT_GUARD: f64 = 1e-3;

/// Radicands down to this value are treated as rounding noise.
pub const RADICAND_TOLERANCE: f64 = 1e-9;

/// Slack on the 2C/(2C+1) bound for lossy atoms.
pub const EFFICIENCY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapingSolution {
    pub target: PhotonWaveform,
    pub pulse: PulseEnvelope,
    pub c_e: Vec<Complex64>,
    pub c_x: Vec<Complex64>,
    pub c_g: Vec<Complex64>,
    /// Samples where |c_e| fell below the guard and Ω was held.
    pub clipped: Vec<bool>,
}

impl ShapingSolution {
    pub fn clipped_count(&self) -> usize {
        self.clipped.iter().filter(|&&c| c).count()
    }

    pub fn initial_state(&self) -> InitialState {
        InitialState {
            c_e: self.c_e[0],
            c_x: self.c_x[0],
            c_g: self.c_g[0],
        }
    }

    /// |c_e|² left behind once the photon has gone.
    pub fn final_excited_population(&self) -> f64 {
        self.c_e.last().map(|c| c.norm_sqr()).unwrap_or(0.0)
    }
}

/// Quantities that are quadratic in the target amplitude.
struct Amplitudes {
    c_g: Vec<f64>,
    /// c_x = −i y
    y: Vec<f64>,
    y_dot: Vec<f64>,
    /// |c_x|² + |c_g|² + cumulative loss, i.e. 1 − |c_e|².
    spent: Vec<f64>,
}

fn require_resonant_real(params: &SystemParams, target: &PhotonWaveform) -> Result<()> {
    if !params.is_resonant() {
        return Err(Error::invalid(
            "delta",
            "pulse synthesis is implemented for resonant driving only",
        ));
    }
    if !target.is_real(1e-12) {
        return Err(Error::invalid(
            "target",
            "pulse synthesis needs a real target (bin phases 0 or pi)",
        ));
    }
    Ok(())
}

fn emission_amplitudes(params: &SystemParams, psi: &[f64], dt: f64) -> Amplitudes {
    let SystemParams {
        g, kappa, gamma, ..
    } = *params;
    let root = (2.0 * kappa).sqrt();
    let c_g: Vec<f64> = psi.iter().map(|p| p / root).collect();
    let c_g_dot = derivative(&c_g, dt);
    let y: Vec<f64> = c_g_dot
        .iter()
        .zip(&c_g)
        .map(|(d, c)| (d + kappa * c) / g)
        .collect();
    let y_dot = derivative(&y, dt);
    let loss: Vec<f64> = y
        .iter()
        .zip(&c_g)
        .map(|(y, c)| 2.0 * gamma * y * y + 2.0 * kappa * c * c)
        .collect();
    let lost = cumulative_trapezoid(&loss, dt);
    let spent = (0..psi.len())
        .map(|i| y[i] * y[i] + c_g[i] * c_g[i] + lost[i])
        .collect();
    Amplitudes {
        c_g,
        y,
        y_dot,
        spent,
    }
}

/// Indices of the first and last nonzero sample.
pub(crate) fn support(psi: &[f64]) -> Option<(usize, usize)> {
    let first = psi.iter().position(|&p| p != 0.0)?;
    let last = psi.iter().rposition(|&p| p != 0.0)?;
    Some((first, last))
}

/// Turn numerator and |c_e| into Ω, holding the last valid value wherever
/// |c_e| drops to the guard while the photon is still being handled.
pub(crate) fn guarded_ratio(
    numerator: &[f64],
    c_e_abs: &[f64],
    guard: f64,
    active: impl Fn(usize) -> bool,
) -> (Vec<f64>, Vec<bool>) {
    let mut omega = Vec::with_capacity(numerator.len());
    let mut clipped = Vec::with_capacity(numerator.len());
    let mut last_valid = 0.0;
    for (i, (&num, &ce)) in numerator.iter().zip(c_e_abs).enumerate() {
        if ce > guard {
            last_valid = num / ce;
            omega.push(last_valid);
            clipped.push(false);
        } else if active(i) {
            omega.push(last_valid);
            clipped.push(true);
        } else {
            omega.push(0.0);
            clipped.push(false);
        }
    }
    (omega, clipped)
}

/// Control pulse that emits `target` from an atom prepared in |e,0⟩.
pub fn synthesize_emission_pulse(
    params: &SystemParams,
    target: &PhotonWaveform,
    guard: f64,
) -> Result<ShapingSolution> {
    require_resonant_real(params, target)?;
    let grid = *target.grid();
    let norm = target.l2_norm();
    if params.gamma > 0.0 {
        let bound = optimal_efficiency(params.cooperativity());
        if norm > bound + EFFICIENCY_SLACK {
            return Err(Error::EfficiencyBound { norm, bound });
        }
    }
    let psi = target.real_part();
    let amps = emission_amplitudes(params, &psi, grid.dt());

    let radicand: Vec<f64> = amps.spent.iter().map(|s| 1.0 - s).collect();
    if let Some((i, &r)) = radicand
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        if r < -RADICAND_TOLERANCE {
            return Err(Error::InfeasibleTarget {
                radicand: r,
                time: grid.t(i),
            });
        }
    }
    let c_e_abs: Vec<f64> = radicand.iter().map(|r| r.max(0.0).sqrt()).collect();
    // Ω c_e = −2(ẏ + γy + g c_g) with c_e = −|c_e|
    let numerator: Vec<f64> = (0..psi.len())
        .map(|i| 2.0 * (amps.y_dot[i] + params.gamma * amps.y[i] + params.g * amps.c_g[i]))
        .collect();
    let last = support(&psi).map(|(_, l)| l);
    let (omega, clipped) = guarded_ratio(&numerator, &c_e_abs, guard, |i| {
        last.is_some_and(|l| i <= l + 1)
    });

    Ok(ShapingSolution {
        target: target.clone(),
        pulse: PulseEnvelope::new(grid, omega)?,
        c_e: c_e_abs.iter().map(|a| Complex64::new(-a, 0.0)).collect(),
        c_x: amps.y.iter().map(|y| Complex64::new(0.0, -y)).collect(),
        c_g: amps.c_g.iter().map(|c| Complex64::new(*c, 0.0)).collect(),
        clipped,
    })
}

/// Largest photon number a target of this shape can carry while keeping
/// |c_e|² ≥ `floor` throughout emission.
pub fn max_emission_norm(params: &SystemParams, target: &PhotonWaveform, floor: f64) -> Result<f64> {
    require_resonant_real(params, target)?;
    let norm = target.l2_norm();
    if norm == 0.0 {
        return Err(Error::invalid("target", "zero waveform"));
    }
    let amps = emission_amplitudes(params, &target.real_part(), target.grid().dt());
    let worst = amps.spent.iter().cloned().fold(0.0, f64::max);
    Ok((norm * (1.0 - floor) / worst).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardReport {
    /// ‖√R_ph − |ψ|‖ / ‖ψ‖ in L2 over the grid.
    pub l2_error: f64,
    pub p_emit: f64,
    pub emission: EmissionResult,
}

/// Drive the full dynamics with the synthesized pulse and compare the
/// emitted photon with the target.
pub fn forward_validate(params: &SystemParams, solution: &ShapingSolution) -> Result<ForwardReport> {
    let emission = integrate_lambda(params, &solution.pulse, solution.initial_state())?;
    let target = solution.target.amp();
    let dt = solution.target.grid().dt();
    let diff: Vec<f64> = emission
        .rate
        .iter()
        .zip(target)
        .map(|(r, t)| (r.sqrt() - t.norm()).powi(2))
        .collect();
    let norm = solution.target.l2_norm();
    let l2_error = if norm == 0.0 {
        trapezoid(&diff, dt).sqrt()
    } else {
        (trapezoid(&diff, dt) / norm).sqrt()
    };
    Ok(ForwardReport {
        l2_error,
        p_emit: emission.p_emit,
        emission,
    })
}

/// One temporal mode of a multi-peak photon: a sin² hump carrying
/// probability amplitude² and a constant phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBin {
    pub amplitude: f64,
    pub phase: f64,
    pub t_center: f64,
    pub width: f64,
}

impl TimeBin {
    pub fn start(&self) -> f64 {
        self.t_center - 0.5 * self.width
    }

    pub fn end(&self) -> f64 {
        self.t_center + 0.5 * self.width
    }
}

/// Evenly spaced, equal-amplitude bins filling `[start, start + k·width]`.
pub fn equal_bins(phases: &[f64], start: f64, width: f64) -> Vec<TimeBin> {
    let amplitude = (phases.len() as f64).recip().sqrt();
    phases
        .iter()
        .enumerate()
        .map(|(k, &phase)| TimeBin {
            amplitude,
            phase,
            t_center: start + (k as f64 + 0.5) * width,
            width,
        })
        .collect()
}

/// Multi-peak photon with a programmable phase per time bin.
pub fn phase_programmed_target(grid: TimeGrid, bins: &[TimeBin]) -> Result<PhotonWaveform> {
    let mut sorted = bins.to_vec();
    sorted.sort_by(|a, b| a.t_center.total_cmp(&b.t_center));
    let slack = 1e-9 * grid.dt();
    for pair in sorted.windows(2) {
        if pair[0].end() > pair[1].start() + slack {
            return Err(Error::OverlappingBins(format!(
                "[{:e}, {:e}] and [{:e}, {:e}]",
                pair[0].start(),
                pair[0].end(),
                pair[1].start(),
                pair[1].end()
            )));
        }
    }
    let mut amp = vec![Complex64::default(); grid.len()];
    for bin in &sorted {
        if !(bin.width > 0.0) || bin.amplitude < 0.0 {
            return Err(Error::invalid("bin", "width must be > 0 and amplitude >= 0"));
        }
        if bin.start() < grid.t_start() - slack || bin.end() > grid.t_end() + slack {
            return Err(Error::invalid("bin", "time bin extends beyond the grid"));
        }
        let hump: Vec<f64> = grid
            .times()
            .map(|t| sin2_envelope((t - bin.start()) / bin.width))
            .collect();
        let weight = trapezoid(&hump.iter().map(|h| h * h).collect::<Vec<_>>(), grid.dt());
        if weight == 0.0 {
            return Err(Error::invalid("bin", "time bin narrower than the grid step"));
        }
        let factor = Complex64::from_polar(bin.amplitude / weight.sqrt(), bin.phase);
        for (a, h) in amp.iter_mut().zip(&hump) {
            *a += factor * *h;
        }
    }
    // exact 0/π phases should give exactly real samples
    for a in amp.iter_mut() {
        if a.im.abs() < 1e-12 * a.re.abs() {
            a.im = 0.0;
        }
    }
    PhotonWaveform::new(grid, amp)
}

/// Unit-norm twin-peak photon ψ ∝ sin²(2π(t − start)/τ) on `[start, start + τ]`.
pub fn twin_peak_target(grid: TimeGrid, start: f64, duration: f64) -> Result<PhotonWaveform> {
    if start < grid.t_start() || start + duration > grid.t_end() * (1.0 + 1e-12) {
        return Err(Error::invalid("duration", "photon does not fit in the grid"));
    }
    let shape = grid
        .times()
        .map(|t| {
            let x = (t - start) / duration;
            if (0.0..=1.0).contains(&x) {
                (2.0 * PI * x).sin().powi(2)
            } else {
                0.0
            }
        })
        .collect();
    normalized_real(grid, shape)
}
