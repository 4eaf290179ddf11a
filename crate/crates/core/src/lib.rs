//! Simulation of a single three-level atom in a high-finesse optical cavity.
//!
//! * [`dressed`]: dressed-state spectra, Purcell factor, coupling regimes.
//! * [`dynamics`]: photon emission by cavity-enhanced decay and driven Raman
//!   transitions.
//! * [`shaper`]: the control pulse that emits a photon of prescribed shape.
//! * [`memory`]: the control pulse that absorbs a given photon without
//!   reflection, and storage efficiency.
//! * [`interfere`]: time-resolved two-photon interference at a beam splitter.
//!
//! Rates are rad/s internally; [`params::SystemParams::from_2pi_mhz`] accepts
//! the customary 2π×MHz values.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod interfere;
pub mod memory;
pub mod numerics;
pub mod ode;
pub mod params;
pub mod shaper;
pub mod waveform;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use params::{Detunings, SystemParams};
pub use waveform::{AmplitudeTrajectory, PhotonWaveform, PulseEnvelope};
