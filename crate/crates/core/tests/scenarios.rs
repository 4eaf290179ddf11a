mod common;

use std::f64::consts::PI;

use cavity_forge::dressed::{beta_factor, purcell_factor_rates};
use cavity_forge::dynamics::{adiabatic_bad_cavity, integrate_lambda, integrate_two_level, InitialState};
use cavity_forge::memory::{efficiency_sweep, time_reversal_report, DEFAULT_C0_SQ};
use cavity_forge::params::from_2pi_mhz;
use cavity_forge::waveform::sin2_photon;
use cavity_forge::{PulseEnvelope, SystemParams, TimeGrid};

use common::{bad_cavity, feasible, strong_coupling};

#[test]
fn strong_coupling_shows_vacuum_rabi_oscillation() {
    let params = strong_coupling();
    let grid = TimeGrid::spanning(0.0, 300e-9, 3001).unwrap();
    let r = integrate_two_level(&params, &grid).unwrap();
    let pop = r.traj.pop_x();
    let maxima = (1..pop.len() - 1)
        .filter(|&i| pop[i] > pop[i - 1] && pop[i] > pop[i + 1])
        .count();
    assert!(maxima >= 3, "{maxima} revivals");
}

#[test]
fn bad_cavity_sine_pump_emits_a_single_peak() {
    let params = bad_cavity();
    let grid = TimeGrid::spanning(0.0, 400e-9, 8001).unwrap();
    let pulse = PulseEnvelope::from_fn(grid, |t| {
        if t <= 200e-9 {
            params.g * (PI * t / 200e-9).sin()
        } else {
            0.0
        }
    })
    .unwrap();
    let r = integrate_lambda(&params, &pulse, InitialState::excited()).unwrap();
    let beta = beta_factor(purcell_factor_rates(&params));
    assert!(r.p_emit >= 0.7 * beta && r.p_emit <= beta, "{} vs {beta}", r.p_emit);
    let top = r.rate.iter().cloned().fold(0.0, f64::max);
    let peaks = (1..r.rate.len() - 1)
        .filter(|&i| r.rate[i] > 0.05 * top)
        .filter(|&i| r.rate[i] > r.rate[i - 1] && r.rate[i] >= r.rate[i + 1])
        .count();
    assert_eq!(peaks, 1);
}

#[test]
fn slow_ramp_leaves_the_intermediate_state_empty() {
    let params = strong_coupling();
    let grid = TimeGrid::spanning(0.0, 1e-6, 20001).unwrap();
    let pulse = PulseEnvelope::from_fn(grid, |t| params.g * t / 1e-6).unwrap();
    let r = integrate_lambda(&params, &pulse, InitialState::excited()).unwrap();
    let worst = r.traj.pop_x().into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn adiabatic_error_shrinks_deeper_in_the_bad_cavity() {
    let mut last = f64::INFINITY;
    for kappa in [20.0, 40.0, 80.0] {
        // g²/(κγ) held at 3.75
        let gamma = 15.0 * 15.0 / (kappa * 3.75);
        let params = SystemParams::resonant_2pi_mhz(15.0, kappa, gamma).unwrap();
        let grid = TimeGrid::spanning(0.0, 5e-6, 100001).unwrap();
        let pulse =
            PulseEnvelope::from_fn(grid, |t| 0.6 * params.g * (PI * t / 5e-6).sin()).unwrap();
        let closed = adiabatic_bad_cavity(&params, &pulse);
        let full = integrate_lambda(&params, &pulse, InitialState::excited()).unwrap();
        let err = (closed.p_emit - full.p_emit).abs();
        assert!(err < last, "kappa {kappa}: {err} >= {last}");
        last = err;
    }
}

#[test]
fn storage_reaches_the_optimum_at_c_5() {
    let rows = efficiency_sweep(
        from_2pi_mhz(3.0),
        from_2pi_mhz(3.0),
        &common::storage_photon(),
        &[5.0],
        DEFAULT_C0_SQ,
    )
    .unwrap();
    let stored = rows[0].p_stored.unwrap();
    assert!((stored - 10.0 / 11.0).abs() < 0.02, "{stored}");
}

#[test]
fn absorption_pulse_is_the_mirror_image_not_a_copy() {
    let params = strong_coupling().with_gamma(0.0);
    let grid = TimeGrid::with_max_step(0.0, 500e-9, 0.1e-9).unwrap();
    let target = feasible(&params, &sin2_photon(grid, 500e-9).unwrap());
    let report = time_reversal_report(&params, &target).unwrap();
    let emit = report.emission_pulse.omega();
    let absorb = report.absorption_pulse.omega();
    let scale = report.emission_pulse.max_abs();
    let copy_gap = emit
        .iter()
        .zip(absorb)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(copy_gap > 0.1 * scale);
    assert!(report.max_deviation < 1e-3);
}

#[test]
fn lossless_memory_with_a_long_photon_stores_nearly_everything() {
    let params = SystemParams::resonant_2pi_mhz(15.0, 3.0, 0.0).unwrap();
    let grid = TimeGrid::with_max_step(0.0, 6e-6, 0.5e-9).unwrap();
    let photon = sin2_photon(grid, 5e-6).unwrap();
    let problem =
        cavity_forge::memory::AbsorptionProblem::new(params, photon, 1e-3).unwrap();
    let pulse = cavity_forge::memory::synthesize_absorption_pulse(&problem).unwrap();
    let r = cavity_forge::memory::run_absorption(&problem, &pulse).unwrap();
    assert!(r.p_stored > 0.999, "{}", r.p_stored);
    assert!(r.p_reflected < 1e-10);
}
