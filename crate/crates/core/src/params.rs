//! Atom-cavity rates and the unit convention.
//!
//! Rates are quoted externally as multiples of 2π×MHz and stored internally
//! in rad/s. Field decay conventions: the cavity intensity decays at 2κ and
//! the excited atomic population at 2γ.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// rad/s per unit of 2π×MHz.
pub const RAD_PER_S_PER_2PI_MHZ: f64 = TAU * 1.0e6;

pub fn from_2pi_mhz(value: f64) -> f64 {
    value * RAD_PER_S_PER_2PI_MHZ
}

pub fn to_2pi_mhz(value: f64) -> f64 {
    value / RAD_PER_S_PER_2PI_MHZ
}

/// Pump and cavity detunings in 2π×MHz.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Detunings {
    pub pump: f64,
    pub cavity: f64,
}

/// Coupling and decay rates of a single atom in a single cavity mode (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Atom-cavity coupling g.
    pub g: f64,
    /// Cavity field decay κ.
    pub kappa: f64,
    /// Atomic polarisation decay γ.
    pub gamma: f64,
    /// Pump detuning Δ_L.
    pub delta_l: f64,
    /// Cavity detuning Δ_cav.
    pub delta_cav: f64,
}

impl SystemParams {
    /// Build from rates already in rad/s.
    pub fn new(g: f64, kappa: f64, gamma: f64, delta_l: f64, delta_cav: f64) -> Result<Self> {
        let p = SystemParams {
            g,
            kappa,
            gamma,
            delta_l,
            delta_cav,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from rates in 2π×MHz.
    pub fn from_2pi_mhz(g: f64, kappa: f64, gamma: f64, detunings: Detunings) -> Result<Self> {
        Self::new(
            from_2pi_mhz(g),
            from_2pi_mhz(kappa),
            from_2pi_mhz(gamma),
            from_2pi_mhz(detunings.pump),
            from_2pi_mhz(detunings.cavity),
        )
    }

    /// Resonant parameters from (g, κ, γ) in 2π×MHz.
    pub fn resonant_2pi_mhz(g: f64, kappa: f64, gamma: f64) -> Result<Self> {
        Self::from_2pi_mhz(g, kappa, gamma, Detunings::default())
    }

    /// (g, κ, γ, detunings) back in 2π×MHz.
    pub fn to_2pi_mhz(&self) -> (f64, f64, f64, Detunings) {
        (
            to_2pi_mhz(self.g),
            to_2pi_mhz(self.kappa),
            to_2pi_mhz(self.gamma),
            Detunings {
                pump: to_2pi_mhz(self.delta_l),
                cavity: to_2pi_mhz(self.delta_cav),
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("delta_l", self.delta_l),
            ("delta_cav", self.delta_cav),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("{v} is not finite")));
            }
        }
        if self.g <= 0.0 {
            return Err(Error::invalid("g", format!("must be > 0, got {}", self.g)));
        }
        if self.kappa <= 0.0 {
            return Err(Error::invalid(
                "kappa",
                format!("must be > 0, got {}", self.kappa),
            ));
        }
        if self.gamma < 0.0 {
            return Err(Error::invalid(
                "gamma",
                format!("must be >= 0, got {}", self.gamma),
            ));
        }
        Ok(())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Single-atom cooperativity C = g²/(2κγ); infinite for a lossless atom.
    pub fn cooperativity(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            self.g * self.g / (2.0 * self.kappa * self.gamma)
        }
    }

    /// Largest rate appearing in the equations of motion, excluding the pump.
    pub fn max_rate(&self) -> f64 {
        self.g
            .max(self.kappa)
            .max(self.gamma)
            .max(self.delta_l.abs())
            .max(self.delta_cav.abs())
    }

    pub fn is_resonant(&self) -> bool {
        self.delta_l == 0.0 && self.delta_cav == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mhz_units_convert_to_rad_per_second() {
        let p = SystemParams::resonant_2pi_mhz(15.0, 20.0, 3.0).unwrap();
        assert!((p.g / (TAU * 15.0e6) - 1.0).abs() < 1e-15);
        assert!((p.kappa / (TAU * 20.0e6) - 1.0).abs() < 1e-15);
        assert!((p.gamma / (TAU * 3.0e6) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lossless_atom_is_valid() {
        let p = SystemParams::resonant_2pi_mhz(1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.gamma, 0.0);
        assert!(p.cooperativity().is_infinite());
    }

    #[test]
    fn rejects_nonpositive_coupling_or_cavity_decay() {
        assert!(matches!(
            SystemParams::resonant_2pi_mhz(0.0, 1.0, 1.0),
            Err(Error::InvalidParameter { name: "g", .. })
        ));
        assert!(matches!(
            SystemParams::resonant_2pi_mhz(1.0, -1.0, 1.0),
            Err(Error::InvalidParameter { name: "kappa", .. })
        ));
        assert!(SystemParams::resonant_2pi_mhz(1.0, 1.0, -0.1).is_err());
        assert!(SystemParams::resonant_2pi_mhz(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn unit_round_trip() {
        let d = Detunings {
            pump: -4.5,
            cavity: 0.25,
        };
        let p = SystemParams::from_2pi_mhz(15.0, 3.0, 2.0, d).unwrap();
        let (g, k, gm, back) = p.to_2pi_mhz();
        for (a, b) in [(g, 15.0), (k, 3.0), (gm, 2.0), (back.pump, -4.5), (back.cavity, 0.25)] {
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }
}
