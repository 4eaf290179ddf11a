#![allow(dead_code)]

use cavity_forge::memory::{AbsorptionProblem, DEFAULT_C0_SQ};
use cavity_forge::shaper::max_emission_norm;
use cavity_forge::waveform::sin2_photon;
use cavity_forge::{PhotonWaveform, SystemParams, TimeGrid};

/// |e,0⟩ population kept back when scaling emission targets.
pub const EMISSION_FLOOR: f64 = 1e-2;

/// g = 15, κ = 20, γ = 3 (2π MHz).
pub fn bad_cavity() -> SystemParams {
    SystemParams::resonant_2pi_mhz(15.0, 20.0, 3.0).unwrap()
}

/// g = 15, κ = 2, γ = 3 (2π MHz).
pub fn strong_coupling() -> SystemParams {
    SystemParams::resonant_2pi_mhz(15.0, 2.0, 3.0).unwrap()
}

/// Scale `shape` to the largest photon number it can carry.
pub fn feasible(params: &SystemParams, shape: &PhotonWaveform) -> PhotonWaveform {
    let norm = max_emission_norm(params, shape, EMISSION_FLOOR).unwrap();
    shape.with_norm(norm).unwrap()
}

pub fn storage_photon() -> PhotonWaveform {
    let grid = TimeGrid::with_max_step(0.0, 3.6e-6, 0.5e-9).unwrap();
    sin2_photon(grid, 3.14e-6).unwrap()
}

/// g = 15, κ = 3, γ = 3 (2π MHz), 3.14 µs sin² photon, |c₀|² = 0.5%.
pub fn storage_problem() -> AbsorptionProblem {
    let params = SystemParams::resonant_2pi_mhz(15.0, 3.0, 3.0).unwrap();
    AbsorptionProblem::new(params, storage_photon(), DEFAULT_C0_SQ).unwrap()
}

pub fn report(criterion: &str, pass: bool, detail: String) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}
