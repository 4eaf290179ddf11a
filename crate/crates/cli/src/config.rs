//! Scenario files.
//!
//! Rates are given in 2π × MHz, times in µs (grid steps in ns), phases in
//! radians. Every section except `[params]` is optional.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use cavity_forge::{Detunings, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dressed,
    TwoLevel,
    Emit,
    Shape,
    Absorb,
    Sweep,
    Hom,
    Qutrit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    pub kind: Kind,
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub pulse: PulseSection,
    #[serde(default)]
    pub photon: PhotonSection,
    #[serde(default)]
    pub absorb: AbsorbSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub hom: HomSection,
    #[serde(default)]
    pub qutrit: QutritSection,
    #[serde(default)]
    pub dressed: DressedSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    /// Not needed for `sweep`, where g follows from C.
    pub g: Option<f64>,
    pub kappa: f64,
    pub gamma: f64,
    #[serde(default)]
    pub delta_pump: f64,
    #[serde(default)]
    pub delta_cavity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub t_start_us: f64,
    pub t_end_us: Option<f64>,
    pub dt_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    Sin,
    Ramp,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub shape: PulseShape,
    /// Peak Rabi frequency in units of g.
    pub amplitude_g: f64,
    pub start_us: f64,
    /// Sine half-period, or the time the ramp takes to reach its amplitude.
    pub width_us: f64,
    pub file: Option<String>,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            shape: PulseShape::Sin,
            amplitude_g: 1.0,
            start_us: 0.0,
            width_us: 0.2,
            file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonShape {
    Sin2,
    Twin,
    Bins,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotonSection {
    pub shape: PhotonShape,
    pub start_us: f64,
    pub duration_us: f64,
    /// One phase per time bin for `bins`.
    pub phases: Vec<f64>,
    /// Photon number; the largest feasible value is used when absent.
    pub norm: Option<f64>,
    /// |e,0⟩ population kept back when the norm is chosen automatically.
    pub floor: f64,
    pub file: Option<String>,
}

impl Default for PhotonSection {
    fn default() -> Self {
        Self {
            shape: PhotonShape::Sin2,
            start_us: 0.0,
            duration_us: 0.5,
            phases: vec![0.0, PI, 0.0],
            norm: None,
            floor: 0.01,
            file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// c_e = −√c0_sq
    Prepared,
    /// |g,0⟩
    Ground,
    /// No atom in the cavity.
    EmptyCavity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorbSection {
    pub c0_sq: f64,
    pub initial: InitialCondition,
}

impl Default for AbsorbSection {
    fn default() -> Self {
        Self {
            c0_sq: cavity_forge::memory::DEFAULT_C0_SQ,
            initial: InitialCondition::Prepared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub c_min: f64,
    pub c_max: f64,
    /// Log-spaced points between c_min and c_max.
    pub points: usize,
    /// Additional cooperativities, e.g. below threshold.
    pub extra: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            c_min: 0.6,
            c_max: 50.0,
            points: 16,
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomSection {
    /// Frequency offset of the second photon, 2π × MHz.
    pub detuning: f64,
    pub dephasing_ns: Option<f64>,
    /// Alternative to `dephasing_ns`: full width of the dip.
    pub dip_width_ns: Option<f64>,
    pub mode_overlap: f64,
    /// Monte Carlo pairs; 0 disables sampling.
    pub pairs: usize,
    pub seed: u64,
}

impl Default for HomSection {
    fn default() -> Self {
        Self {
            detuning: 0.0,
            dephasing_ns: None,
            dip_width_ns: None,
            mode_overlap: 1.0,
            pairs: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QutritSection {
    pub signal_phases: Vec<f64>,
    pub lo_phases: Vec<f64>,
    pub bin_width_us: f64,
}

impl Default for QutritSection {
    fn default() -> Self {
        Self {
            signal_phases: vec![0.0, PI, 0.0],
            lo_phases: vec![0.0, 0.0, 0.0],
            bin_width_us: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DressedSection {
    pub n_max: u32,
    /// Pump Rabi frequency, 2π × MHz.
    pub omega_rabi: f64,
}

impl Default for DressedSection {
    fn default() -> Self {
        Self {
            n_max: 5,
            omega_rabi: 0.0,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// g for kinds that need it.
    pub fn g(&self) -> Result<f64> {
        self.params
            .g
            .context("[params] g is required for this scenario")
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let p = &self.params;
        Ok(SystemParams::from_2pi_mhz(
            self.g()?,
            p.kappa,
            p.gamma,
            Detunings {
                pump: p.delta_pump,
                cavity: p.delta_cavity,
            },
        )?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.name.is_empty(), "name must not be empty");
        ensure!(
            self.name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
            "name {:?} may only contain letters, digits, '-' and '_'",
            self.name
        );
        if self.kind == Kind::Sweep {
            ensure!(
                self.params.kappa > 0.0 && self.params.gamma > 0.0,
                "sweep needs kappa > 0 and gamma > 0"
            );
        } else {
            self.system_params()?;
        }
        let g = &self.grid;
        if let Some(dt) = g.dt_ns {
            ensure!(dt > 0.0 && dt.is_finite(), "[grid] dt_ns must be > 0");
        }
        if let Some(end) = g.t_end_us {
            ensure!(end > g.t_start_us, "[grid] t_end_us must exceed t_start_us");
        }
        ensure!(self.pulse.width_us > 0.0, "[pulse] width_us must be > 0");
        ensure!(self.pulse.amplitude_g.is_finite(), "[pulse] amplitude_g must be finite");
        if self.pulse.shape == PulseShape::Csv && self.kind == Kind::Emit {
            ensure!(self.pulse.file.is_some(), "[pulse] shape = \"csv\" needs file");
        }
        let ph = &self.photon;
        ensure!(ph.duration_us > 0.0, "[photon] duration_us must be > 0");
        ensure!((0.0..1.0).contains(&ph.floor), "[photon] floor must lie in [0, 1)");
        if let Some(n) = ph.norm {
            ensure!(n > 0.0 && n <= 1.0, "[photon] norm must lie in (0, 1]");
        }
        if ph.shape == PhotonShape::Bins {
            ensure!(!ph.phases.is_empty(), "[photon] phases must not be empty");
        }
        if ph.shape == PhotonShape::Csv {
            ensure!(ph.file.is_some(), "[photon] shape = \"csv\" needs file");
        }
        ensure!(
            (0.0..1.0).contains(&self.absorb.c0_sq),
            "[absorb] c0_sq must lie in [0, 1)"
        );
        let s = &self.sweep;
        ensure!(
            s.c_min > 0.0 && s.c_max >= s.c_min && s.points >= 1,
            "[sweep] needs 0 < c_min <= c_max and points >= 1"
        );
        let h = &self.hom;
        ensure!(
            (0.0..=1.0).contains(&h.mode_overlap),
            "[hom] mode_overlap must lie in [0, 1]"
        );
        if h.dephasing_ns.is_some() && h.dip_width_ns.is_some() {
            bail!("[hom] give either dephasing_ns or dip_width_ns, not both");
        }
        let q = &self.qutrit;
        ensure!(
            q.signal_phases.len() == q.lo_phases.len() && !q.signal_phases.is_empty(),
            "[qutrit] signal_phases and lo_phases need the same nonzero length"
        );
        ensure!(q.bin_width_us > 0.0, "[qutrit] bin_width_us must be > 0");
        ensure!(self.dressed.n_max >= 1, "[dressed] n_max must be >= 1");
        ensure!(self.dressed.omega_rabi >= 0.0, "[dressed] omega_rabi must be >= 0");
        Ok(())
    }

    /// Minimal scenario of the given kind with default sections.
    pub fn minimal(name: &str, kind: Kind, g: f64, kappa: f64, gamma: f64) -> Self {
        Self {
            name: name.to_string(),
            kind,
            params: ParamsSection {
                g: Some(g),
                kappa,
                gamma,
                delta_pump: 0.0,
                delta_cavity: 0.0,
            },
            grid: GridSection::default(),
            pulse: PulseSection::default(),
            photon: PhotonSection::default(),
            absorb: AbsorbSection::default(),
            sweep: SweepSection::default(),
            hom: HomSection::default(),
            qutrit: QutritSection::default(),
            dressed: DressedSection::default(),
        }
    }
}

/// Read and validate a scenario file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Config::parse(&text).with_context(|| format!("invalid scenario file {}", path.display()))
}

/// Parse phases like `0,pi,0`, `pi/2,-pi,1.5` or `2pi/3`.
pub fn parse_phases(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| parse_phase(t.trim())).collect()
}

fn parse_phase(token: &str) -> Result<f64> {
    let lower = token.to_ascii_lowercase();
    let Some(at) = lower.find("pi") else {
        return lower
            .parse()
            .with_context(|| format!("bad phase {token:?}"));
    };
    let (coef, rest) = lower.split_at(at);
    let coef = match coef.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().with_context(|| format!("bad phase {token:?}"))?,
    };
    let divisor = match &rest[2..] {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .with_context(|| format!("bad phase {token:?}"))?,
    };
    Ok(coef * PI / divisor)
}
