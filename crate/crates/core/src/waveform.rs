//! Sampled signals: photon amplitudes, control pulses and state trajectories.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numerics::{trapezoid, Interpolant};

/// Slack allowed above unit norm before a waveform is rejected.
pub const NORM_SLACK: f64 = 1e-9;

/// Running-wave probability amplitude ψ(t) of a single photon, in 1/√s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonWaveform {
    grid: TimeGrid,
    amp: Vec<Complex64>,
}

impl PhotonWaveform {
    pub fn new(grid: TimeGrid, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                amp.len(),
                grid.len()
            )));
        }
        if amp.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("amp", "non-finite sample"));
        }
        let w = PhotonWaveform { grid, amp };
        let norm = w.l2_norm();
        if norm > 1.0 + NORM_SLACK {
            return Err(Error::invalid(
                "amp",
                format!("norm {norm} exceeds one photon"),
            ));
        }
        Ok(w)
    }

    pub fn from_real(grid: TimeGrid, amp: &[f64]) -> Result<Self> {
        Self::new(grid, amp.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        PhotonWaveform {
            grid,
            amp: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn amp(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ∫|ψ|² dt by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        trapezoid(&self.intensity(), self.grid.dt())
    }

    /// Largest imaginary part relative to the peak magnitude.
    pub fn is_real(&self, tol: f64) -> bool {
        let peak = self.amp.iter().map(|a| a.norm()).fold(0.0, f64::max);
        peak == 0.0 || self.amp.iter().all(|a| a.im.abs() <= tol * peak)
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.re).collect()
    }

    /// Multiply the amplitude by `factor`; fails if the result exceeds one photon.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.amp.iter().map(|a| a * factor).collect())
    }

    /// Rescale so that ∫|ψ|² dt equals `norm`.
    pub fn with_norm(&self, norm: f64) -> Result<Self> {
        let current = self.l2_norm();
        if current == 0.0 {
            return Err(Error::invalid("amp", "cannot rescale a zero waveform"));
        }
        if !(0.0..=1.0 + NORM_SLACK).contains(&norm) {
            return Err(Error::invalid("norm", format!("{norm} outside [0, 1]")));
        }
        self.scaled((norm / current).sqrt())
    }

    /// ψ(t_start + t_end − t).
    pub fn time_reversed(&self) -> Self {
        let mut amp = self.amp.clone();
        amp.reverse();
        PhotonWaveform {
            grid: self.grid,
            amp,
        }
    }

    /// Same samples on a grid shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        PhotonWaveform {
            grid: self.grid.shifted(offset),
            amp: self.amp.clone(),
        }
    }

    /// Multiply by e^{iωt}.
    pub fn frequency_shifted(&self, omega: f64) -> Self {
        let amp = self
            .grid
            .times()
            .zip(&self.amp)
            .map(|(t, a)| a * Complex64::from_polar(1.0, omega * t))
            .collect();
        PhotonWaveform {
            grid: self.grid,
            amp,
        }
    }

    pub fn interpolant(&self) -> Interpolant<'_, Complex64> {
        Interpolant::new(self.grid.t_start(), self.grid.dt(), &self.amp)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re", "im"])?;
        for (t, a) in self.grid.times().zip(&self.amp) {
            w.write_record([fmt17(t), fmt17(a.re), fmt17(a.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let rows = read_columns(input, &["t", "re", "im"])?;
        let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let grid = grid_from_times(&times)?;
        Self::new(
            grid,
            rows.iter().map(|r| Complex64::new(r[1], r[2])).collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&WaveformJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: WaveformJson = serde_json::from_str(text)?;
        if j.re.len() != j.im.len() {
            return Err(Error::Format("re/im length mismatch".into()));
        }
        let grid = TimeGrid::new(j.t_start, j.dt, j.n)?;
        Self::new(
            grid,
            j.re.iter()
                .zip(&j.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct WaveformJson {
    t_start: f64,
    dt: f64,
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<&PhotonWaveform> for WaveformJson {
    fn from(w: &PhotonWaveform) -> Self {
        WaveformJson {
            t_start: w.grid.t_start(),
            dt: w.grid.dt(),
            n: w.grid.len(),
            re: w.amp.iter().map(|a| a.re).collect(),
            im: w.amp.iter().map(|a| a.im).collect(),
        }
    }
}

/// ∫|ψ|² dt.
pub fn l2_norm(w: &PhotonWaveform) -> f64 {
    w.l2_norm()
}

/// Unit-norm ψ ∝ sin²(π(t − t_start)/τ) starting at the first grid sample.
pub fn sin2_photon(grid: TimeGrid, duration: f64) -> Result<PhotonWaveform> {
    sin2_photon_at(grid, grid.t_start(), duration)
}

/// Unit-norm sin² photon occupying `[start, start + duration]`.
pub fn sin2_photon_at(grid: TimeGrid, start: f64, duration: f64) -> Result<PhotonWaveform> {
    if !(duration > 0.0) {
        return Err(Error::invalid("duration", "must be > 0"));
    }
    let tol = 1e-9 * grid.dt();
    if start < grid.t_start() - tol || start + duration > grid.t_end() + tol {
        return Err(Error::invalid(
            "duration",
            format!(
                "photon [{start:e}, {:e}] does not fit in grid [{:e}, {:e}]",
                start + duration,
                grid.t_start(),
                grid.t_end()
            ),
        ));
    }
    let shape: Vec<f64> = grid
        .times()
        .map(|t| sin2_envelope((t - start) / duration))
        .collect();
    normalized_real(grid, shape)
}

/// sin²(πx) on [0, 1], zero elsewhere.
pub(crate) fn sin2_envelope(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        (PI * x).sin().powi(2)
    } else {
        0.0
    }
}

/// Scale a real shape to unit trapezoid norm.
pub(crate) fn normalized_real(grid: TimeGrid, shape: Vec<f64>) -> Result<PhotonWaveform> {
    let norm = trapezoid(&shape.iter().map(|s| s * s).collect::<Vec<_>>(), grid.dt());
    if norm == 0.0 {
        return Err(Error::invalid("duration", "photon has no samples on the grid"));
    }
    let scale = norm.sqrt().recip();
    PhotonWaveform::from_real(grid, &shape.iter().map(|s| s * scale).collect::<Vec<_>>())
}

/// Real control Rabi frequency Ω(t) in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    grid: TimeGrid,
    omega: Vec<f64>,
}

impl PulseEnvelope {
    pub fn new(grid: TimeGrid, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                omega.len(),
                grid.len()
            )));
        }
        if let Some(i) = omega.iter().position(|w| !w.is_finite()) {
            return Err(Error::invalid(
                "omega",
                format!("non-finite Rabi frequency at t = {:e}", grid.t(i)),
            ));
        }
        Ok(PulseEnvelope { grid, omega })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        PulseEnvelope {
            grid,
            omega: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn max_abs(&self) -> f64 {
        self.omega.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Ω(t_start + t_end − t).
    pub fn time_reversed(&self) -> Self {
        let mut omega = self.omega.clone();
        omega.reverse();
        PulseEnvelope {
            grid: self.grid,
            omega,
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        PulseEnvelope {
            grid: self.grid.shifted(offset),
            omega: self.omega.clone(),
        }
    }

    pub fn interpolant(&self) -> Interpolant<'_, f64> {
        Interpolant::new(self.grid.t_start(), self.grid.dt(), &self.omega)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "omega"])?;
        for (t, o) in self.grid.times().zip(&self.omega) {
            w.write_record([fmt17(t), fmt17(*o)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let rows = read_columns(input, &["t", "omega"])?;
        let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        Self::new(grid_from_times(&times)?, rows.iter().map(|r| r[1]).collect())
    }
}

/// Single-excitation amplitudes of |e,0⟩, |x,0⟩, |g,1⟩ and the outgoing
/// running-wave amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrajectory {
    pub grid: TimeGrid,
    pub c_e: Vec<Complex64>,
    pub c_x: Vec<Complex64>,
    pub c_g: Vec<Complex64>,
    pub phi_out: Vec<Complex64>,
}

impl AmplitudeTrajectory {
    pub fn population(&self, i: usize) -> f64 {
        self.c_e[i].norm_sqr() + self.c_x[i].norm_sqr() + self.c_g[i].norm_sqr()
    }

    pub fn pop_e(&self) -> Vec<f64> {
        self.c_e.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn pop_x(&self) -> Vec<f64> {
        self.c_x.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn pop_g(&self) -> Vec<f64> {
        self.c_g.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn final_population(&self) -> f64 {
        self.population(self.grid.len() - 1)
    }

    /// Outgoing photon as a waveform on the trajectory grid.
    pub fn output_waveform(&self) -> Result<PhotonWaveform> {
        PhotonWaveform::new(self.grid, self.phi_out.clone())
    }
}

/// 17 significant digits: enough for an exact decimal round trip of f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_columns<R: Read>(input: R, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Format(format!(
            "expected columns {expected:?}, found {found:?}"
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("data line {}: `{field}`: {e}", line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn grid_from_times(times: &[f64]) -> Result<TimeGrid> {
    if times.len() < 2 {
        return Err(Error::Format("need at least two samples".into()));
    }
    let n = times.len();
    let t0 = times[0];
    let dt = (times[n - 1] - t0) / (n - 1) as f64;
    for (i, &t) in times.iter().enumerate() {
        let expected = t0 + i as f64 * dt;
        if (t - expected).abs() > 1e-6 * dt {
            return Err(Error::Format(format!(
                "non-uniform time column at row {}: {t:e} vs {expected:e}",
                i + 1
            )));
        }
    }
    TimeGrid::new(t0, dt, n)
}
