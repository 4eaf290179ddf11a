//! Running a scenario and rendering its CSV table and JSON summary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cavity_forge::dressed::{
    beta_factor, classify_regime, doublet, purcell_factor_rates, triplet,
};
use cavity_forge::dynamics::{integrate_lambda, integrate_two_level, EmissionResult, InitialState};
use cavity_forge::interfere::{
    coherence_time_for_dip_width, coincidence_histogram, hom_correlation, qutrit_coincidence_map,
    sample_detections, InterferenceOptions, TimeBinPhoton,
};
use cavity_forge::memory::{
    efficiency_sweep, run_absorption_with, synthesize_absorption_pulse, AbsorptionProblem,
    InputOutput,
};
use cavity_forge::params::{from_2pi_mhz, to_2pi_mhz};
use cavity_forge::shaper::{
    equal_bins, forward_validate, max_emission_norm, phase_programmed_target,
    synthesize_emission_pulse, twin_peak_target, DEFAULT_GUARD,
};
use cavity_forge::waveform::{fmt17, sin2_photon_at};
use cavity_forge::{PhotonWaveform, PulseEnvelope, TimeGrid};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Config, InitialCondition, Kind, PhotonShape, PulseShape};

/// Version of the CSV/JSON layout.
pub const FORMAT_VERSION: u32 = 1;

const US: f64 = 1e-6;
const NS: f64 = 1e-9;

/// Product dt · (fastest rate) used when the grid step is not given.
const DEFAULT_STEP_RATE: f64 = 0.05;

pub struct Output {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
}

impl Output {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            summary: Value::Null,
        }
    }

    fn push(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(fmt17).collect());
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }

    /// Write `<name>.csv` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path, name: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        let csv_path = dir.join(format!("{name}.csv"));
        let json_path = dir.join(format!("{name}.json"));
        std::fs::write(&csv_path, self.csv()?)
            .with_context(|| format!("cannot write {}", csv_path.display()))?;
        let mut text = serde_json::to_string_pretty(&self.summary)?;
        text.push('\n');
        std::fs::write(&json_path, text)
            .with_context(|| format!("cannot write {}", json_path.display()))?;
        Ok((csv_path, json_path))
    }
}

pub fn run_scenario(config: &Config, base: &Path) -> Result<Output> {
    let (mut out, results) = match config.kind {
        Kind::Dressed => dressed(config)?,
        Kind::TwoLevel => two_level(config)?,
        Kind::Emit => emit(config, base)?,
        Kind::Shape => shape(config, base)?,
        Kind::Absorb => absorb(config, base)?,
        Kind::Sweep => sweep(config, base)?,
        Kind::Hom => hom(config, base)?,
        Kind::Qutrit => qutrit(config)?,
    };
    let p = &config.params;
    out.summary = json!({
        "version": FORMAT_VERSION,
        "scenario": config.name,
        "kind": config.kind,
        "params_2pi_mhz": {
            "g": p.g,
            "kappa": p.kappa,
            "gamma": p.gamma,
            "delta_pump": p.delta_pump,
            "delta_cavity": p.delta_cavity,
        },
        "columns": out.header,
        "results": results,
    });
    Ok(out)
}

fn grid(config: &Config, default_end: f64, default_dt: f64) -> Result<TimeGrid> {
    let g = &config.grid;
    let start = g.t_start_us * US;
    let end = g.t_end_us.map(|t| t * US).unwrap_or(default_end);
    let dt = g.dt_ns.map(|d| d * NS).unwrap_or(default_dt);
    Ok(TimeGrid::with_max_step(start, end, dt)?)
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn dressed(config: &Config) -> Result<(Output, Value)> {
    let params = config.system_params()?;
    let omega = from_2pi_mhz(config.dressed.omega_rabi);
    let mut out = Output::new(&[
        "n",
        "doublet_plus",
        "doublet_minus",
        "doublet_splitting",
        "triplet_0",
        "triplet_plus",
        "triplet_minus",
        "theta",
        "phi",
    ]);
    let raman = params.delta_l == params.delta_cav;
    for n in 1..=config.dressed.n_max {
        let d = doublet(&params, n)?;
        let mut row = vec![
            n as f64,
            to_2pi_mhz(d.omega_plus),
            to_2pi_mhz(d.omega_minus),
            to_2pi_mhz(d.splitting),
        ];
        if raman {
            let t = triplet(&params, n, omega)?;
            row.extend([
                to_2pi_mhz(t.omega_0),
                to_2pi_mhz(t.omega_plus),
                to_2pi_mhz(t.omega_minus),
                t.theta,
                t.phi,
            ]);
        } else {
            row.extend([f64::NAN; 5]);
        }
        out.push(row);
    }
    let f = purcell_factor_rates(&params);
    let results = json!({
        "regime": format!("{:?}", classify_regime(&params)),
        "cooperativity": params.cooperativity(),
        "purcell_factor": f,
        "beta": beta_factor(f),
        "triplet_computed": raman,
    });
    Ok((out, results))
}

fn trajectory_table(r: &EmissionResult) -> Output {
    let mut out = Output::new(&["t_s", "pop_e", "pop_x", "pop_g", "rate_per_s"]);
    let t = &r.traj;
    for i in 0..t.grid.len() {
        out.push([
            t.grid.t(i),
            t.c_e[i].norm_sqr(),
            t.c_x[i].norm_sqr(),
            t.c_g[i].norm_sqr(),
            r.rate[i],
        ]);
    }
    out
}

fn emission_summary(r: &EmissionResult) -> Value {
    json!({
        "p_emit": r.p_emit,
        "p_spont": r.p_spont,
        "residual": r.residual(),
        "max_pop_x": r.traj.pop_x().into_iter().fold(0.0, f64::max),
    })
}

fn two_level(config: &Config) -> Result<(Output, Value)> {
    let params = config.system_params()?;
    let grid = grid(config, 1.0 * US, DEFAULT_STEP_RATE / params.max_rate())?;
    let r = integrate_two_level(&params, &grid)?;
    Ok((trajectory_table(&r), emission_summary(&r)))
}

fn emit(config: &Config, base: &Path) -> Result<(Output, Value)> {
    let params = config.system_params()?;
    let p = &config.pulse;
    let pulse = if p.shape == PulseShape::Csv {
        let path = resolve(base, p.file.as_deref().unwrap_or_default());
        let file = std::fs::File::open(&path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        PulseEnvelope::read_csv(file).with_context(|| format!("bad pulse file {}", path.display()))?
    } else {
        let amplitude = p.amplitude_g * params.g;
        let (start, width) = (p.start_us * US, p.width_us * US);
        let end = match p.shape {
            PulseShape::Sin => start + 2.0 * width,
            _ => start + width,
        };
        let dt = DEFAULT_STEP_RATE / params.max_rate().max(amplitude.abs());
        let grid = grid(config, end, dt)?;
        let shape = p.shape;
        PulseEnvelope::from_fn(grid, move |t| {
            let x = (t - start) / width;
            match shape {
                PulseShape::Sin if (0.0..=1.0).contains(&x) => amplitude * (PI * x).sin(),
                PulseShape::Ramp if x >= 0.0 => amplitude * x,
                _ => 0.0,
            }
        })?
    };
    let r = integrate_lambda(&params, &pulse, InitialState::excited())?;
    let mut out = trajectory_table(&r);
    out.header.push("omega_rad_per_s".into());
    for (row, w) in out.rows.iter_mut().zip(pulse.omega()) {
        row.push(fmt17(*w));
    }
    Ok((out, emission_summary(&r)))
}

fn photon(config: &Config, base: &Path, grid: TimeGrid) -> Result<PhotonWaveform> {
    let ph = &config.photon;
    let (start, duration) = (ph.start_us * US, ph.duration_us * US);
    Ok(match ph.shape {
        PhotonShape::Sin2 => sin2_photon_at(grid, start, duration)?,
        PhotonShape::Twin => twin_peak_target(grid, start, duration)?,
        PhotonShape::Bins => {
            let width = duration / ph.phases.len() as f64;
            phase_programmed_target(grid, &equal_bins(&ph.phases, start, width))?
        }
        PhotonShape::Csv => {
            let path = resolve(base, ph.file.as_deref().unwrap_or_default());
            let file = std::fs::File::open(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            PhotonWaveform::read_csv(file)
                .with_context(|| format!("bad photon file {}", path.display()))?
        }
    })
}

fn photon_end(config: &Config) -> f64 {
    (config.photon.start_us + config.photon.duration_us) * US
}

fn shape(config: &Config, base: &Path) -> Result<(Output, Value)> {
    let params = config.system_params()?;
    let grid = grid(config, photon_end(config), 0.05 * NS)?;
    let raw = photon(config, base, grid)?;
    let norm = match config.photon.norm {
        Some(n) => n,
        None => max_emission_norm(&params, &raw, config.photon.floor)?,
    };
    let target = raw.with_norm(norm)?;
    let sol = synthesize_emission_pulse(&params, &target, DEFAULT_GUARD)?;
    let report = forward_validate(&params, &sol)?;
    let mut out = Output::new(&[
        "t_s",
        "target",
        "omega_rad_per_s",
        "clipped",
        "emitted_amplitude",
    ]);
    let g = sol.pulse.grid();
    for i in 0..g.len() {
        out.push([
            g.t(i),
            target.amp()[i].re,
            sol.pulse.omega()[i],
            if sol.clipped[i] { 1.0 } else { 0.0 },
            report.emission.rate[i].sqrt(),
        ]);
    }
    let results = json!({
        "l2_error": report.l2_error,
        "p_emit": report.p_emit,
        "clipped_count": sol.clipped_count(),
        "target_norm": norm,
        "max_omega_2pi_mhz": to_2pi_mhz(sol.pulse.max_abs()),
        "final_excited_population": sol.final_excited_population(),
    });
    Ok((out, results))
}

fn absorption_grid(config: &Config) -> Result<TimeGrid> {
    grid(config, photon_end(config) * 1.15, 0.5 * NS)
}

fn absorb(config: &Config, base: &Path) -> Result<(Output, Value)> {
    let grid = absorption_grid(config)?;
    let phi_in = photon(config, base, grid)?;
    if config.absorb.initial == InitialCondition::EmptyCavity {
        let io = InputOutput::new(from_2pi_mhz(config.params.kappa))?;
        let resp = io.response(&phi_in, Complex64::default())?;
        let mut out = Output::new(&[
            "t_s",
            "phi_in",
            "phi_out_re",
            "phi_out_im",
            "cavity_re",
            "cavity_im",
        ]);
        for i in 0..grid.len() {
            out.push([
                grid.t(i),
                phi_in.amp()[i].re,
                resp.phi_out[i].re,
                resp.phi_out[i].im,
                resp.c_cav[i].re,
                resp.c_cav[i].im,
            ]);
        }
        let results = json!({
            "p_reflected": resp.p_reflected,
            "sign_changes_us": resp.sign_changes().iter().map(|t| t / US).collect::<Vec<_>>(),
        });
        return Ok((out, results));
    }

    let params = config.system_params()?;
    let problem = AbsorptionProblem::new(params, phi_in, config.absorb.c0_sq)?;
    let pulse = synthesize_absorption_pulse(&problem)?;
    let initial = match config.absorb.initial {
        InitialCondition::Ground => InitialState::with_c_e(0.0),
        _ => problem.initial_state(),
    };
    let r = run_absorption_with(&problem, &pulse, initial, Default::default())?;
    let mut out = Output::new(&[
        "t_s",
        "phi_in",
        "omega_rad_per_s",
        "phi_out_re",
        "phi_out_im",
        "pop_e",
        "pop_x",
        "pop_g",
    ]);
    let t = &r.traj;
    for i in 0..grid.len() {
        out.push([
            grid.t(i),
            problem.phi_in.amp()[i].re,
            pulse.omega()[i],
            t.phi_out[i].re,
            t.phi_out[i].im,
            t.c_e[i].norm_sqr(),
            t.c_x[i].norm_sqr(),
            t.c_g[i].norm_sqr(),
        ]);
    }
    let results = json!({
        "p_reflected": r.p_reflected,
        "p_stored": r.p_stored,
        "p_spont": r.p_spont,
        "bookkeeping_error": r.bookkeeping_error(),
        "cooperativity": params.cooperativity(),
    });
    Ok((out, results))
}

pub fn cooperativities(config: &Config) -> Vec<f64> {
    let s = &config.sweep;
    let mut c: Vec<f64> = if s.points == 1 {
        vec![s.c_min]
    } else {
        (0..s.points)
            .map(|k| s.c_min * (s.c_max / s.c_min).powf(k as f64 / (s.points - 1) as f64))
            .collect()
    };
    c.extend(&s.extra);
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

fn sweep(config: &Config, base: &Path) -> Result<(Output, Value)> {
    let grid = absorption_grid(config)?;
    let phi_in = photon(config, base, grid)?;
    let (kappa, gamma) = (from_2pi_mhz(config.params.kappa), from_2pi_mhz(config.params.gamma));
    let rows = efficiency_sweep(kappa, gamma, &phi_in, &cooperativities(config), config.absorb.c0_sq)?;
    let mut out = Output::new(&[
        "cooperativity",
        "efficiency",
        "mismatch",
        "optimum",
        "spontaneous",
        "feasible",
    ]);
    for r in &rows {
        out.push([
            r.cooperativity,
            r.p_stored.unwrap_or(f64::NAN),
            r.p_reflected.unwrap_or(f64::NAN),
            r.reference(),
            r.p_spont.unwrap_or(f64::NAN),
            if r.is_feasible() { 1.0 } else { 0.0 },
        ]);
    }
    let infeasible: Vec<Value> = rows
        .iter()
        .filter_map(|r| {
            r.infeasible
                .as_ref()
                .map(|why| json!({"cooperativity": r.cooperativity, "reason": why}))
        })
        .collect();
    let results = json!({
        "rows": rows.len(),
        "infeasible": infeasible,
        "max_mismatch": rows.iter().filter_map(|r| r.p_reflected).fold(0.0, f64::max),
    });
    Ok((out, results))
}

fn hom(config: &Config, base: &Path) -> Result<(Output, Value)> {
    let grid = grid(config, photon_end(config), 2.5 * NS)?;
    let a = photon(config, base, grid)?;
    let b = a.frequency_shifted(from_2pi_mhz(config.hom.detuning));
    let h = &config.hom;
    let dephasing = match (h.dephasing_ns, h.dip_width_ns) {
        (Some(t), _) => Some(t * NS),
        (None, Some(w)) => Some(coherence_time_for_dip_width(w * NS)),
        _ => None,
    };
    let options = InterferenceOptions {
        dephasing_time: dephasing,
        mode_overlap: h.mode_overlap,
    };
    let hist = hom_correlation(&a, &b, options)?;
    let reference = hom_correlation(&a, &b, InterferenceOptions::distinguishable())?;
    let mut header = vec!["delta_tau_s", "density", "distinguishable_density"];
    let counts = if h.pairs > 0 {
        header.push("monte_carlo_counts");
        let events = sample_detections(&a, &b, h.pairs, h.seed, options)?;
        Some(coincidence_histogram(&events, &grid))
    } else {
        None
    };
    let mut out = Output::new(&header);
    for i in 0..hist.delta_tau.len() {
        let mut row = vec![hist.delta_tau[i], hist.density[i], reference.density[i]];
        if let Some(c) = &counts {
            row.push(c.density[i]);
        }
        out.push(row);
    }
    let results = json!({
        "coincidence_probability": hist.total(),
        "reference_probability": reference.total(),
        "ratio": hist.total() / reference.total(),
        "dephasing_time_s": dephasing,
        "monte_carlo_pairs": h.pairs,
        "monte_carlo_coincidences": counts.as_ref().map(|c| c.total()),
    });
    Ok((out, results))
}

fn qutrit(config: &Config) -> Result<(Output, Value)> {
    let q = &config.qutrit;
    let width = q.bin_width_us * US;
    let signal = TimeBinPhoton::equal(&q.signal_phases, 0.0, width)?;
    let lo = TimeBinPhoton::equal(&q.lo_phases, 0.0, width)?;
    let map = qutrit_coincidence_map(&signal, &lo)?;
    let k = map.len();
    let mut header = vec!["c_bin".to_string()];
    header.extend((1..=k).map(|j| format!("d_bin_{j}")));
    let mut out = Output {
        header,
        rows: Vec::new(),
        summary: Value::Null,
    };
    for (i, row) in map.iter().enumerate() {
        out.push(std::iter::once((i + 1) as f64).chain(row.iter().copied()));
    }
    let results = json!({ "map": map });
    Ok((out, results))
}
