//! Two-photon interference on a balanced beam splitter with ideal detectors
//! behind its outputs C and D.
//!
//! Photons A and B enter through different ports. A joint detection of one
//! photon at C at t₁ and one at D at t₂ has density
//! ¼|ψ_A(t₁)ψ_B(t₂) − ψ_A(t₂)ψ_B(t₁)|²; both at the same port (ordered)
//! have ⅛|ψ_A(t₁)ψ_B(t₂) + ψ_A(t₂)ψ_B(t₁)|². Imperfect mode overlap and
//! phase diffusion scale the cross term of these expressions.

use std::f64::consts::LN_2;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::shaper::{phase_programmed_target, TimeBin};
use crate::waveform::PhotonWaveform;

/// Probability that the second photon leaves through the other port.
pub fn second_click_probability(delta_phi: f64) -> f64 {
    (0.5 * delta_phi).sin().powi(2)
}

pub fn same_port_probability(delta_phi: f64) -> f64 {
    (0.5 * delta_phi).cos().powi(2)
}

/// Coincidence modulation sin²(ΔωΔτ/2) for photons offset by Δω.
pub fn beat_coincidence_density(delta_omega: f64, delta_tau: &[f64]) -> Vec<f64> {
    delta_tau
        .iter()
        .map(|&tau| (0.5 * delta_omega * tau).sin().powi(2))
        .collect()
}

/// Beat modulation multiplied by the intensity overlap
/// ∫|ψ(t)|²|ψ(t+Δτ)|²dt, evaluated at the lags of `psi`'s grid.
pub fn beat_coincidence_windowed(delta_omega: f64, psi: &PhotonWaveform) -> CoincidenceHistogram {
    let grid = *psi.grid();
    let lags = lag_axis(&grid);
    let beat = beat_coincidence_density(delta_omega, &lags);
    let intensity = psi.intensity();
    let n = grid.len();
    let density = lags
        .iter()
        .zip(&beat)
        .map(|(&tau, &b)| {
            let k = lag_index(tau, grid.dt());
            let window: f64 = (0..n)
                .filter_map(|i| shift(i, k, n).map(|j| intensity[i] * intensity[j]))
                .sum::<f64>()
                * grid.dt();
            b * window
        })
        .collect();
    CoincidenceHistogram {
        delta_tau: lags,
        density,
        bin_width: grid.dt(),
        normalization: Normalization::ProbabilityDensity,
    }
}

/// Gaussian mutual-coherence time that gives a dip of full width at half
/// maximum `width` for identical photons.
pub fn coherence_time_for_dip_width(width: f64) -> f64 {
    width / (2.0 * (2.0 * LN_2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceOptions {
    /// Gaussian phase-diffusion time; `None` for fully coherent photons.
    pub dephasing_time: Option<f64>,
    /// Spatial/polarisation mode overlap in [0, 1]; 0 for distinguishable photons.
    pub mode_overlap: f64,
}

impl Default for InterferenceOptions {
    fn default() -> Self {
        Self {
            dephasing_time: None,
            mode_overlap: 1.0,
        }
    }
}

impl InterferenceOptions {
    pub fn distinguishable() -> Self {
        Self {
            mode_overlap: 0.0,
            ..Self::default()
        }
    }

    pub fn with_dephasing(dephasing_time: f64) -> Self {
        Self {
            dephasing_time: Some(dephasing_time),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mode_overlap) {
            return Err(Error::invalid("mode_overlap", "must lie in [0, 1]"));
        }
        if let Some(t) = self.dephasing_time {
            if !(t > 0.0) {
                return Err(Error::invalid("dephasing_time", "must be > 0"));
            }
        }
        Ok(())
    }

    /// Weight of the interference term at detection delay Δτ.
    pub fn coherence(&self, delta_tau: f64) -> f64 {
        let diffusion = match self.dephasing_time {
            Some(t) => (-0.5 * (delta_tau / t).powi(2)).exp(),
            None => 1.0,
        };
        self.mode_overlap * diffusion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Probability per unit Δτ; sums to the coincidence probability.
    ProbabilityDensity,
    /// Raw event counts per bin.
    Counts { pairs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    /// Bin centres, symmetric around zero.
    pub delta_tau: Vec<f64>,
    pub density: Vec<f64>,
    pub bin_width: f64,
    pub normalization: Normalization,
}

impl CoincidenceHistogram {
    /// Σ density·width for densities, or the number of events for counts.
    pub fn total(&self) -> f64 {
        match self.normalization {
            Normalization::ProbabilityDensity => self.density.iter().sum::<f64>() * self.bin_width,
            Normalization::Counts { .. } => self.density.iter().sum(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.density.iter().map(|d| d.abs()).fold(0.0, f64::max)
    }

    /// Merge `factor` neighbouring bins on each side of the centre bin,
    /// keeping the binning symmetric.
    pub fn rebin(&self, factor: usize) -> Result<Self> {
        if factor == 0 || factor.is_multiple_of(2) {
            return Err(Error::invalid("factor", "rebinning factor must be odd"));
        }
        let centre = self.delta_tau.len() / 2;
        let half = factor / 2;
        let per_side = (centre - half) / factor;
        let mut delta_tau = Vec::new();
        let mut density = Vec::new();
        for b in -(per_side as isize)..=(per_side as isize) {
            let mid = centre as isize + b * factor as isize;
            let lo = (mid - half as isize) as usize;
            let sum: f64 = self.density[lo..lo + factor].iter().sum();
            delta_tau.push(self.delta_tau[mid as usize]);
            density.push(match self.normalization {
                Normalization::ProbabilityDensity => sum / factor as f64,
                Normalization::Counts { .. } => sum,
            });
        }
        Ok(Self {
            delta_tau,
            density,
            bin_width: self.bin_width * factor as f64,
            normalization: self.normalization,
        })
    }
}

fn lag_axis(grid: &TimeGrid) -> Vec<f64> {
    let n = grid.len() as isize;
    (-(n - 1)..n).map(|k| k as f64 * grid.dt()).collect()
}

fn lag_index(tau: f64, dt: f64) -> isize {
    (tau / dt).round() as isize
}

fn shift(i: usize, k: isize, n: usize) -> Option<usize> {
    let j = i as isize + k;
    (0..n as isize).contains(&j).then_some(j as usize)
}

/// Joint densities (C,D), (C,C), (D,D) for photons detected at samples i and j.
#[derive(Clone, Copy)]
struct Joint<'a> {
    a: &'a [Complex64],
    b: &'a [Complex64],
    dt: f64,
    options: InterferenceOptions,
}

impl Joint<'_> {
    fn densities(&self, i: usize, j: usize) -> [f64; 3] {
        let direct = self.a[i] * self.b[j];
        let swapped = self.a[j] * self.b[i];
        let plain = direct.norm_sqr() + swapped.norm_sqr();
        let cross = 2.0 * (direct * swapped.conj()).re * self.options.coherence((j as f64 - i as f64) * self.dt);
        let anti = 0.25 * (plain - cross);
        let same = 0.125 * (plain + cross);
        [anti.max(0.0), same.max(0.0), same.max(0.0)]
    }
}

fn joint<'a>(
    psi_a: &'a PhotonWaveform,
    psi_b: &'a PhotonWaveform,
    options: InterferenceOptions,
) -> Result<Joint<'a>> {
    psi_a.grid().ensure_same(psi_b.grid())?;
    options.validate()?;
    Ok(Joint {
        a: psi_a.amp(),
        b: psi_b.amp(),
        dt: psi_a.grid().dt(),
        options,
    })
}

/// Density of C–D coincidences against Δτ = t_D − t_C.
pub fn hom_correlation(
    psi_a: &PhotonWaveform,
    psi_b: &PhotonWaveform,
    options: InterferenceOptions,
) -> Result<CoincidenceHistogram> {
    let model = joint(psi_a, psi_b, options)?;
    let grid = *psi_a.grid();
    let n = grid.len();
    let lags = lag_axis(&grid);
    let density = lags
        .par_iter()
        .map(|&tau| {
            let k = lag_index(tau, grid.dt());
            (0..n)
                .filter_map(|i| shift(i, k, n).map(|j| model.densities(i, j)[0]))
                .sum::<f64>()
                * grid.dt()
        })
        .collect();
    Ok(CoincidenceHistogram {
        delta_tau: lags,
        density,
        bin_width: grid.dt(),
        normalization: Normalization::ProbabilityDensity,
    })
}

/// A photon spread over k time bins with a phase per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBinPhoton {
    pub phases: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// (start, end) of each bin.
    pub windows: Vec<(f64, f64)>,
}

impl TimeBinPhoton {
    pub fn new(phases: Vec<f64>, amplitudes: Vec<f64>, windows: Vec<(f64, f64)>) -> Result<Self> {
        if phases.is_empty() || phases.len() != amplitudes.len() || phases.len() != windows.len() {
            return Err(Error::invalid(
                "bins",
                "phases, amplitudes and windows must have the same nonzero length",
            ));
        }
        let total: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "amplitudes",
                format!("squared amplitudes sum to {total}, not 1"),
            ));
        }
        let mut sorted = windows.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted.iter().any(|w| !(w.1 > w.0)) {
            return Err(Error::invalid("windows", "each window needs end > start"));
        }
        if let Some(p) = sorted.windows(2).find(|p| p[0].1 > p[1].0) {
            return Err(Error::OverlappingBins(format!("{:?} and {:?}", p[0], p[1])));
        }
        Ok(Self {
            phases,
            amplitudes,
            windows,
        })
    }

    /// Equal amplitudes 1/√k in adjacent windows of `width` from `start`.
    pub fn equal(phases: &[f64], start: f64, width: f64) -> Result<Self> {
        let k = phases.len();
        let windows = (0..k)
            .map(|m| (start + m as f64 * width, start + (m + 1) as f64 * width))
            .collect();
        Self::new(phases.to_vec(), vec![(k as f64).recip().sqrt(); k], windows)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn bin_amplitudes(&self) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect()
    }

    /// Sin² hump per window carrying the bin amplitude and phase.
    pub fn to_waveform(&self, grid: TimeGrid) -> Result<PhotonWaveform> {
        let bins: Vec<TimeBin> = self
            .windows
            .iter()
            .zip(self.amplitudes.iter().zip(&self.phases))
            .map(|(&(s, e), (&amplitude, &phase))| TimeBin {
                amplitude,
                phase,
                t_center: 0.5 * (s + e),
                width: e - s,
            })
            .collect();
        phase_programmed_target(grid, &bins)
    }
}

/// k×k matrix of P(C in bin i, D in bin j) = ¼|S_i L_j − S_j L_i|².
/// For equal amplitudes this is sin²((Δφ_i − Δφ_j)/2)/k² with
/// Δφ_m = φ_signal,m − φ_lo,m.
pub fn qutrit_coincidence_map(signal: &TimeBinPhoton, lo: &TimeBinPhoton) -> Result<Vec<Vec<f64>>> {
    if signal.len() != lo.len() {
        return Err(Error::invalid(
            "bins",
            format!("signal has {} bins, local oscillator {}", signal.len(), lo.len()),
        ));
    }
    let s = signal.bin_amplitudes();
    let l = lo.bin_amplitudes();
    let k = s.len();
    Ok((0..k)
        .map(|i| {
            (0..k)
                .map(|j| 0.25 * (s[i] * l[j] - s[j] * l[i]).norm_sqr())
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    C,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub port: Port,
    pub time: f64,
}

pub type DetectionPair = (DetectionEvent, DetectionEvent);

const CHUNK: usize = 4096;

/// Draw `n_pairs` two-photon detection records. Each chunk of pairs uses its
/// own ChaCha stream so the result does not depend on thread scheduling.
pub fn sample_detections(
    psi_a: &PhotonWaveform,
    psi_b: &PhotonWaveform,
    n_pairs: usize,
    seed: u64,
    options: InterferenceOptions,
) -> Result<Vec<DetectionPair>> {
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs", "must be >= 1"));
    }
    let model = joint(psi_a, psi_b, options)?;
    let grid = *psi_a.grid();
    let n = grid.len();

    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| model.densities(i, j).iter().sum::<f64>()).sum())
        .collect();
    let mut row_cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    for r in &rows {
        acc += r;
        row_cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::invalid("psi", "waveforms carry no probability"));
    }

    let chunks = n_pairs.div_ceil(CHUNK);
    let sampled: Vec<Vec<DetectionPair>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(n_pairs - c * CHUNK);
            let mut out = Vec::with_capacity(count);
            let mut cells = vec![0.0; 3 * n];
            for _ in 0..count {
                let u: f64 = rng.random::<f64>() * acc;
                let i = row_cdf.partition_point(|&x| x <= u).min(n - 1);
                let mut run = 0.0;
                for j in 0..n {
                    let d = model.densities(i, j);
                    for (o, p) in d.iter().enumerate() {
                        run += p;
                        cells[3 * j + o] = run;
                    }
                }
                let v: f64 = rng.random::<f64>() * run;
                let cell = cells.partition_point(|&x| x <= v).min(3 * n - 1);
                let (j, outcome) = (cell / 3, cell % 3);
                let (pi, pj) = match outcome {
                    0 => (Port::C, Port::D),
                    1 => (Port::C, Port::C),
                    _ => (Port::D, Port::D),
                };
                out.push((
                    DetectionEvent {
                        port: pi,
                        time: grid.t(i),
                    },
                    DetectionEvent {
                        port: pj,
                        time: grid.t(j),
                    },
                ));
            }
            out
        })
        .collect();
    Ok(sampled.into_iter().flatten().collect())
}

/// Histogram of C–D pairs against Δτ = t_D − t_C on the lag axis of `grid`.
pub fn coincidence_histogram(pairs: &[DetectionPair], grid: &TimeGrid) -> CoincidenceHistogram {
    let lags = lag_axis(grid);
    let centre = grid.len() as isize - 1;
    let mut counts = vec![0.0; lags.len()];
    for (first, second) in pairs {
        let tau = match (first.port, second.port) {
            (Port::C, Port::D) => second.time - first.time,
            (Port::D, Port::C) => first.time - second.time,
            _ => continue,
        };
        let idx = lag_index(tau, grid.dt()) + centre;
        if let Some(c) = usize::try_from(idx).ok().and_then(|i| counts.get_mut(i)) {
            *c += 1.0;
        }
    }
    CoincidenceHistogram {
        delta_tau: lags,
        density: counts,
        bin_width: grid.dt(),
        normalization: Normalization::Counts { pairs: pairs.len() },
    }
}

/// Singlet-type Bell state (|01⟩ − |10⟩)/√2 in the basis |00⟩,|01⟩,|10⟩,|11⟩.
pub fn bell_state() -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::default(),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::default(),
    ]
}

/// Tolerance for Hermiticity, trace and positivity checks.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

pub fn validate_density_matrix(rho: &Matrix4<Complex64>) -> Result<()> {
    let asym = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > DENSITY_TOLERANCE {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (max |ρ − ρ†| = {asym:e})"
        )));
    }
    let trace = rho.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
        return Err(Error::InvalidDensityMatrix(format!("trace is {trace}")));
    }
    let hermitian = (rho + rho.adjoint()).scale(0.5);
    let lowest = SymmetricEigen::new(hermitian)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if lowest < -DENSITY_TOLERANCE {
        return Err(Error::InvalidDensityMatrix(format!(
            "negative eigenvalue {lowest:e}"
        )));
    }
    Ok(())
}

/// ⟨ψ|ρ|ψ⟩ for the singlet-type Bell state.
pub fn bell_fidelity(rho: &Matrix4<Complex64>) -> Result<f64> {
    validate_density_matrix(rho)?;
    let psi = nalgebra::Vector4::from(bell_state());
    Ok((psi.adjoint() * rho * psi)[(0, 0)].re)
}

/// Werner-type mixture p|ψ⟩⟨ψ| + (1 − p)I/4.
pub fn werner_state(p: f64) -> Matrix4<Complex64> {
    let psi = nalgebra::Vector4::from(bell_state());
    let pure = psi * psi.adjoint();
    pure.scale(p) + Matrix4::identity().scale((1.0 - p) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::sin2_photon;
    use std::f64::consts::PI;

    fn photon() -> PhotonWaveform {
        let grid = TimeGrid::spanning(0.0, 1e-6, 201).unwrap();
        sin2_photon(grid, 1e-6).unwrap()
    }

    #[test]
    fn second_click() {
        assert_eq!(second_click_probability(0.0), 0.0);
        assert!((second_click_probability(PI) - 1.0).abs() < 1e-15);
        assert!((second_click_probability(PI / 2.0) - 0.5).abs() < 1e-15);
        for phi in [0.3, 1.1, 2.9] {
            assert!((second_click_probability(phi) + same_port_probability(phi) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn beat_first_maximum() {
        let dw = 2.0 * PI * 1e6;
        let d = beat_coincidence_density(dw, &[PI / dw, 0.0]);
        assert!((d[0] - 1.0).abs() < 1e-15);
        assert_eq!(d[1], 0.0);
        assert!(beat_coincidence_density(0.0, &[1e-7, 3e-7]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identical_photons_never_split() {
        let p = photon();
        let h = hom_correlation(&p, &p, InterferenceOptions::default()).unwrap();
        assert!(h.max_abs() < 1e-12);
        let d = hom_correlation(&p, &p, InterferenceOptions::distinguishable()).unwrap();
        assert!((d.total() - 0.5).abs() < 1e-9, "{}", d.total());
        assert_eq!(h.delta_tau.len(), 2 * p.grid().len() - 1);
        assert_eq!(h.delta_tau[p.grid().len() - 1], 0.0);
    }

    #[test]
    fn frequency_offset_gives_beats() {
        let p = photon();
        let dw = 2.0 * PI * 4e6;
        let h = hom_correlation(&p, &p.frequency_shifted(dw), InterferenceOptions::default()).unwrap();
        let reference = beat_coincidence_windowed(dw, &p);
        for (a, b) in h.density.iter().zip(&reference.density) {
            assert!((a - b).abs() < 1e-9 * reference.max_abs());
        }
    }

    #[test]
    fn dephasing_opens_a_dip_of_the_requested_width() {
        let t = coherence_time_for_dip_width(470e-9);
        assert!((t - 199.6e-9).abs() < 0.1e-9);
        let opts = InterferenceOptions::with_dephasing(t);
        assert!((opts.coherence(235e-9) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn qutrit_pattern() {
        let lo = TimeBinPhoton::equal(&[0.0; 3], 0.0, 1e-6).unwrap();
        let sig = TimeBinPhoton::equal(&[0.0, PI, 0.0], 0.0, 1e-6).unwrap();
        let m = qutrit_coincidence_map(&sig, &lo).unwrap();
        for (i, row) in m.iter().enumerate() {
            assert!(row[i].abs() < 1e-15);
        }
        assert!(m[0][2].abs() < 1e-15 && m[2][0].abs() < 1e-15);
        assert!((m[0][1] - 1.0 / 9.0).abs() < 1e-15);
        assert!((m[1][2] - 1.0 / 9.0).abs() < 1e-15);
        let flat = qutrit_coincidence_map(&lo, &lo).unwrap();
        assert!(flat.iter().flatten().all(|&x| x == 0.0));
        let two = TimeBinPhoton::equal(&[0.0; 2], 0.0, 1e-6).unwrap();
        assert!(qutrit_coincidence_map(&sig, &two).is_err());
    }

    #[test]
    fn time_bins_reject_bad_layouts() {
        assert!(TimeBinPhoton::new(vec![0.0; 2], vec![0.5; 2], vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(matches!(
            TimeBinPhoton::new(vec![0.0; 2], vec![h; 2], vec![(0.0, 1.0), (0.5, 2.0)]),
            Err(Error::OverlappingBins(_))
        ));
    }

    #[test]
    fn sampling_is_reproducible_and_respects_bunching() {
        let p = photon();
        let opts = InterferenceOptions::default();
        let a = sample_detections(&p, &p, 5000, 7, opts).unwrap();
        let b = sample_detections(&p, &p, 5000, 7, opts).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|(x, y)| x.port == y.port));
        let h = coincidence_histogram(&a, p.grid());
        assert_eq!(h.total(), 0.0);
    }

    #[test]
    fn bell_fidelity_values() {
        assert!((bell_fidelity(&werner_state(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((bell_fidelity(&werner_state(0.0)).unwrap() - 0.25).abs() < 1e-12);
        let f = bell_fidelity(&werner_state(0.86)).unwrap();
        assert!((f - (0.86 + 0.14 / 4.0)).abs() < 1e-12);
        let mut bad = werner_state(1.0);
        bad[(0, 0)] = Complex64::new(-0.1, 0.0);
        bad[(3, 3)] = Complex64::new(0.1, 0.0);
        assert!(matches!(bell_fidelity(&bad), Err(Error::InvalidDensityMatrix(_))));
    }
}
