//! Closed-form spectra and figures of merit of the coupled atom-cavity system.
//!
//! Triplet eigenfrequencies are reported in the frame where |e,n−1⟩ and
//! |g,n⟩ are degenerate at zero and |x,n−1⟩ sits at the Raman detuning Δ.
//! Add the ladder offset ω_cav(n + ½) with [`DressedTriplet::with_ladder_offset`]
//! for absolute frequencies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// "a ≫ b" is read as a ≥ DOMINANCE_FACTOR · b when classifying regimes.
///
/// Heuristic. The bad-cavity preset (g, κ, γ) = 2π×(15, 20, 3) MHz only has
/// κ/(g²/κ) ≈ 1.78, so any factor above that would misfile it.
pub const DOMINANCE_FACTOR: f64 = 1.5;

/// Fabry-Perot resonator described by its mirrors and mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Mirror separation (m).
    pub length: f64,
    /// Mirror intensity reflectivity.
    pub reflectivity: f64,
    /// Wavelength (m).
    pub wavelength: f64,
    /// Mode volume (m³).
    pub mode_volume: f64,
    /// Quality factor.
    pub quality_factor: f64,
}

impl CavityGeometry {
    pub fn new(
        length: f64,
        reflectivity: f64,
        wavelength: f64,
        mode_volume: f64,
        quality_factor: f64,
    ) -> Result<Self> {
        let geom = CavityGeometry {
            length,
            reflectivity,
            wavelength,
            mode_volume,
            quality_factor,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        check_reflectivity(self.reflectivity)?;
        if !(self.length > 0.0) {
            return Err(Error::invalid("length", "must be > 0"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be > 0"));
        }
        if !(self.mode_volume > 0.0) {
            return Err(Error::invalid("mode_volume", "must be > 0"));
        }
        if !(self.quality_factor > 0.0) {
            return Err(Error::invalid("quality_factor", "must be > 0"));
        }
        Ok(())
    }

    pub fn finesse(&self) -> f64 {
        finesse_unchecked(self.reflectivity)
    }

    /// Free spectral range 2π·c/(2l) in rad/s.
    pub fn free_spectral_range(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / (2.0 * self.length)
    }
}

fn check_reflectivity(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("reflectivity", format!("{r} outside (0, 1)")))
    }
}

fn finesse_unchecked(r: f64) -> f64 {
    PI * r.sqrt() / (1.0 - r)
}

/// Finesse π√R/(1−R) of a resonator with mirror reflectivity R.
pub fn finesse(reflectivity: f64) -> Result<f64> {
    check_reflectivity(reflectivity)?;
    Ok(finesse_unchecked(reflectivity))
}

/// Cavity field decay rate κ (rad/s): the linewidth 2κ equals FSR / finesse.
pub fn kappa_from_geometry(geom: &CavityGeometry) -> f64 {
    geom.free_spectral_range() / geom.finesse() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedDoublet {
    pub n: u32,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Effective Rabi frequency √(4ng² + Δ_cav²).
    pub splitting: f64,
}

/// Jaynes-Cummings doublet of the n-excitation manifold (two-level atom).
pub fn doublet(params: &SystemParams, n: u32) -> Result<DressedDoublet> {
    if n == 0 {
        return Err(Error::invalid(
            "n",
            "the ground state |g,0> is uncoupled and never splits",
        ));
    }
    Ok(doublet_raw(params.g, params.delta_cav, n))
}

fn doublet_raw(g: f64, delta: f64, n: u32) -> DressedDoublet {
    let splitting = (4.0 * n as f64 * g * g + delta * delta).sqrt();
    DressedDoublet {
        n,
        omega_plus: 0.5 * (delta + splitting),
        omega_minus: 0.5 * (delta - splitting),
        splitting,
    }
}

/// Real coefficients over (|e,n−1⟩, |x,n−1⟩, |g,n⟩).
pub type TripletVector = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedTriplet {
    pub n: u32,
    pub omega_0: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// √(4ng² + Ω² + Δ²).
    pub splitting: f64,
    /// tan Θ = Ω / (2g√n).
    pub theta: f64,
    /// tan Φ = √(4ng² + Ω²) / (√(4ng² + Ω² + Δ²) − Δ).
    pub phi: f64,
    pub dark_state: TripletVector,
    pub plus_state: TripletVector,
    pub minus_state: TripletVector,
}

impl DressedTriplet {
    /// Shift all three eigenfrequencies by ω_cav(n + ½).
    pub fn with_ladder_offset(mut self, omega_cav: f64) -> Self {
        let offset = omega_cav * (self.n as f64 + 0.5);
        self.omega_0 += offset;
        self.omega_plus += offset;
        self.omega_minus += offset;
        self
    }

    /// |⟨e,n−1|φ⁰⟩|² / |⟨g,n|φ⁰⟩|².
    pub fn dark_population_ratio(&self) -> f64 {
        let [e, _, g] = self.dark_state;
        e * e / (g * g)
    }
}

/// Interaction block over (|e,n−1⟩, |x,n−1⟩, |g,n⟩) in the frame of
/// [`DressedTriplet`].
pub fn triplet_hamiltonian(params: &SystemParams, n: u32, omega_rabi: f64) -> [[f64; 3]; 3] {
    let gn = params.g * (n as f64).sqrt();
    let half = 0.5 * omega_rabi;
    [
        [0.0, -half, 0.0],
        [-half, params.delta_cav, -gn],
        [0.0, -gn, 0.0],
    ]
}

/// Dressed triplet of a Λ atom driven at Rabi frequency `omega_rabi` in the
/// n-excitation manifold. Requires Raman resonance Δ_L = Δ_cav.
pub fn triplet(params: &SystemParams, n: u32, omega_rabi: f64) -> Result<DressedTriplet> {
    if n == 0 {
        return Err(Error::invalid(
            "n",
            "the ground state |g,0> is uncoupled and never splits",
        ));
    }
    if params.delta_l != params.delta_cav {
        return Err(Error::invalid(
            "delta_l",
            "triplet requires Raman resonance (delta_l == delta_cav)",
        ));
    }
    if !(omega_rabi >= 0.0 && omega_rabi.is_finite()) {
        return Err(Error::invalid("omega_rabi", "must be finite and >= 0"));
    }
    let delta = params.delta_cav;
    let coupling = (4.0 * n as f64 * params.g * params.g + omega_rabi * omega_rabi).sqrt();
    let splitting = (coupling * coupling + delta * delta).sqrt();
    let theta = omega_rabi.atan2(2.0 * params.g * (n as f64).sqrt());
    let phi = coupling.atan2(splitting - delta);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Ok(DressedTriplet {
        n,
        omega_0: 0.0,
        omega_plus: 0.5 * (delta + splitting),
        omega_minus: 0.5 * (delta - splitting),
        splitting,
        theta,
        phi,
        dark_state: [ct, 0.0, -st],
        plus_state: [cp * st, -sp, cp * ct],
        minus_state: [sp * st, cp, sp * ct],
    })
}

/// Geometric Purcell factor 3Qλ³/(4π²V).
pub fn purcell_factor(geom: &CavityGeometry) -> f64 {
    3.0 * geom.quality_factor * geom.wavelength.powi(3) / (4.0 * PI * PI * geom.mode_volume)
}

/// Purcell factor from rates, g²/(κγ) = 2C.
pub fn purcell_factor_rates(params: &SystemParams) -> f64 {
    if params.gamma == 0.0 {
        f64::INFINITY
    } else {
        params.g * params.g / (params.kappa * params.gamma)
    }
}

/// Fraction of spontaneous emission going into the cavity mode, f/(f+1).
pub fn beta_factor(purcell: f64) -> f64 {
    if purcell.is_infinite() {
        1.0
    } else {
        purcell / (purcell + 1.0)
    }
}

/// Photon emission probability 2C/(2C+1) in the cavity-enhanced limit; also
/// the optimum storage efficiency of an impedance-matched memory.
pub fn optimal_efficiency(cooperativity: f64) -> f64 {
    if cooperativity.is_infinite() {
        1.0
    } else {
        2.0 * cooperativity / (2.0 * cooperativity + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    StrongCoupling,
    BadCavity,
    Neither,
}

fn dominates(a: f64, b: f64) -> bool {
    a >= DOMINANCE_FACTOR * b
}

/// Strong coupling: g ≫ {κ, γ}. Bad cavity: κ ≫ g²/κ ≫ γ.
pub fn classify_regime(params: &SystemParams) -> Regime {
    let SystemParams {
        g, kappa, gamma, ..
    } = *params;
    let cavity_emission = g * g / kappa;
    if dominates(g, kappa.max(gamma)) {
        Regime::StrongCoupling
    } else if dominates(kappa, cavity_emission) && dominates(cavity_emission, gamma) {
        Regime::BadCavity
    } else {
        Regime::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::from_2pi_mhz;

    fn p(g: f64, k: f64, gm: f64) -> SystemParams {
        SystemParams::resonant_2pi_mhz(g, k, gm).unwrap()
    }

    #[test]
    fn finesse_values() {
        // π/(1−R) with the √R factor expanded to first order
        let r = 0.99999;
        let f = finesse(r).unwrap();
        let series = PI / (1.0 - r) * (1.0 - 0.5 * (1.0 - r));
        assert!((f - series).abs() / f < 1e-9);
        assert!((f - 314157.0).abs() < 1.0);
        assert!((finesse(0.5).unwrap() - 4.442882938158366).abs() < 1e-12);
        assert!(finesse(0.99999).unwrap() > finesse(0.999989).unwrap());
        assert!(finesse(1.0).is_err());
        assert!(finesse(0.0).is_err());
    }

    fn geometry(length: f64, reflectivity: f64) -> CavityGeometry {
        CavityGeometry::new(length, reflectivity, 780e-9, 1e-14, 1e8).unwrap()
    }

    #[test]
    fn kappa_from_geometry_matches_hand_formula() {
        // pick R so that F = 3e5 exactly: solve π√R/(1−R) = F
        let target = 3.0e5;
        let x = PI / (2.0 * target);
        let sqrt_r = -x + (x * x + 1.0).sqrt();
        let geom = geometry(100e-6, sqrt_r * sqrt_r);
        assert!((geom.finesse() - target).abs() / target < 1e-9);
        let kappa = kappa_from_geometry(&geom);
        let hand = PI * SPEED_OF_LIGHT / (2.0 * 100e-6 * target);
        assert!((kappa - hand).abs() / hand < 1e-9);
        // about 2π × 2.5 MHz
        assert!((kappa / from_2pi_mhz(1.0) - 2.498).abs() < 1e-3);

        let doubled = geometry(200e-6, sqrt_r * sqrt_r);
        assert!((kappa_from_geometry(&doubled) - kappa / 2.0).abs() / kappa < 1e-12);
    }

    #[test]
    fn doublet_splittings() {
        let params = p(15.0, 3.0, 3.0);
        let d1 = doublet(&params, 1).unwrap();
        assert!((d1.splitting - 2.0 * params.g).abs() < 1e-6);
        let d4 = doublet(&params, 4).unwrap();
        assert!((d4.splitting - 4.0 * params.g).abs() < 1e-6);
        assert!(d4.omega_plus >= d4.omega_minus);
        assert!(doublet(&params, 0).is_err());
        // decoupled limit: only the detuning is left
        let d = doublet_raw(0.0, 3.5, 2);
        assert_eq!(d.splitting, 3.5);
    }

    #[test]
    fn dark_state_limits() {
        let params = p(15.0, 3.0, 3.0);
        let t = triplet(&params, 1, 0.0).unwrap();
        assert_eq!(t.dark_state, [1.0, 0.0, -0.0]);
        let strong = triplet(&params, 1, 1e6 * params.g).unwrap();
        assert!((strong.dark_state[2] + 1.0).abs() < 1e-10);
        assert!(strong.dark_state[0].abs() < 1e-5);
    }

    #[test]
    fn dark_population_ratio_is_4ng2_over_omega2() {
        let params = p(15.0, 3.0, 3.0);
        for n in 1..5 {
            let omega = 0.7 * params.g;
            let t = triplet(&params, n, omega).unwrap();
            let expected = 4.0 * n as f64 * params.g.powi(2) / omega.powi(2);
            assert!((t.dark_population_ratio() - expected).abs() / expected < 1e-12);
        }
    }

    #[test]
    fn triplet_requires_raman_resonance() {
        let params = SystemParams::new(1.0, 1.0, 0.0, 0.5, 0.0).unwrap();
        assert!(triplet(&params, 1, 1.0).is_err());
    }

    #[test]
    fn purcell_example() {
        let params = p(15.0, 20.0, 3.0);
        let f = purcell_factor_rates(&params);
        assert!((f - 3.75).abs() < 1e-12);
        let beta = beta_factor(f);
        assert!((beta - 0.7894736842105263).abs() < 1e-12);
        assert!((optimal_efficiency(params.cooperativity()) - beta).abs() < 1e-12);
    }

    #[test]
    fn geometric_purcell_factor() {
        let geom = CavityGeometry::new(1e-4, 0.9999, 1e-6, 3.0e-18, PI * PI * 4.0).unwrap();
        // 3 Q λ³ / (4π² V) with Q = 4π² → 3 λ³ / V = 1
        assert!((purcell_factor(&geom) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regimes_of_the_reference_parameter_sets() {
        assert_eq!(classify_regime(&p(15.0, 2.0, 3.0)), Regime::StrongCoupling);
        assert_eq!(classify_regime(&p(15.0, 20.0, 3.0)), Regime::BadCavity);
        assert_eq!(classify_regime(&p(1.0, 1.0, 1.0)), Regime::Neither);
    }
}
