//! Command-line front-end: scenario files, presets, CSV/JSON output.

pub mod config;
pub mod presets;
pub mod scenario;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_config, parse_phases, Config, InitialCondition, Kind, PhotonShape, PulseShape};
use crate::scenario::run_scenario;

/// Exit status for a run that failed because the requested physics is impossible.
pub const EXIT_INFEASIBLE: i32 = 2;
/// Exit status for bad flags, unreadable files and other usage errors.
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "cavity-forge", version, about = "Single atom in an optical cavity: spectra, emission, pulse shaping, storage, interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dressed-state doublet and triplet energies for n = 1..N as CSV.
    Dressed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_max: Option<u32>,
        /// Pump Rabi frequency, 2π × MHz.
        #[arg(long)]
        omega_rabi: Option<f64>,
    },
    /// Populations and photon emission rate for a given pump pulse.
    Emit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        pulse: Option<PulseArg>,
        /// Pulse CSV with columns t,omega (seconds, rad/s).
        #[arg(long)]
        pulse_file: Option<PathBuf>,
        /// Peak Rabi frequency in units of g.
        #[arg(long)]
        amplitude_g: Option<f64>,
        #[arg(long)]
        width_us: Option<f64>,
        /// Cavity decay of an atom prepared in |x,0⟩, without pump.
        #[arg(long)]
        two_level: bool,
    },
    /// Pump pulse that emits a photon of prescribed shape, with a round-trip check.
    Shape {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        photon: PhotonArgs,
    },
    /// Impedance-matched absorption of a single photon.
    Absorb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        photon: PhotonArgs,
        /// Initial |e,0⟩ population.
        #[arg(long)]
        c0_sq: Option<f64>,
        #[arg(long, value_enum)]
        initial: Option<InitialArg>,
    },
    /// Storage efficiency against cooperativity.
    #[command(name = "sweep-c")]
    SweepC {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        photon: PhotonArgs,
        #[arg(long)]
        c_min: Option<f64>,
        #[arg(long)]
        c_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Two-photon coincidences behind a beam splitter against Δτ.
    Hom {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        photon: PhotonArgs,
        /// Frequency offset of the second photon, 2π × MHz.
        #[arg(long, allow_negative_numbers = true)]
        detuning: Option<f64>,
        #[arg(long)]
        dephasing_ns: Option<f64>,
        #[arg(long)]
        mode_overlap: Option<f64>,
        /// Monte Carlo pairs, 0 for none.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Coincidence map of two time-bin photons.
    Qutrit {
        #[command(flatten)]
        common: Common,
        /// Phases like `0,pi,0`.
        #[arg(long, allow_hyphen_values = true)]
        signal_phases: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lo_phases: Option<String>,
    },
    /// Run a built-in scenario; `preset list` prints the names.
    Preset {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Print the JSON summary on stdout.
        #[arg(long)]
        json: bool,
        /// Print the scenario file instead of running it.
        #[arg(long)]
        show: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for <name>.csv and <name>.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the JSON summary on stdout.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    name: Option<String>,
    /// Coupling, 2π × MHz.
    #[arg(long)]
    g: Option<f64>,
    /// Cavity field decay, 2π × MHz.
    #[arg(long)]
    kappa: Option<f64>,
    /// Atomic polarisation decay, 2π × MHz.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_pump: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_cavity: Option<f64>,
    #[arg(long)]
    t_end_us: Option<f64>,
    #[arg(long)]
    dt_ns: Option<f64>,
}

#[derive(Debug, Args)]
struct PhotonArgs {
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    /// Photon CSV with columns t,re,im.
    #[arg(long)]
    target_file: Option<PathBuf>,
    /// Bin phases for `--target triple`, like `0,pi,0`.
    #[arg(long, allow_hyphen_values = true)]
    phases: Option<String>,
    #[arg(long)]
    start_us: Option<f64>,
    #[arg(long)]
    duration_us: Option<f64>,
    /// Photon number of the target.
    #[arg(long)]
    norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PulseArg {
    Sin,
    Ramp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Sin2,
    Twin,
    Triple,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitialArg {
    Prepared,
    Ground,
    EmptyCavity,
}

/// Parse `argv` (program name first), run and return the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// 2 when any cause is physically infeasible, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let infeasible = err
        .chain()
        .filter_map(|c| c.downcast_ref::<cavity_forge::Error>())
        .any(|e| e.is_infeasible());
    if infeasible {
        EXIT_INFEASIBLE
    } else {
        EXIT_USAGE
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("CAVITY_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("CAVITY_FORGE_THREADS must be a positive integer, got {value:?}"))?;
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Preset { name, out, json, show } => {
            if name == "list" {
                for n in presets::names() {
                    println!("{n}");
                }
                return Ok(());
            }
            if show {
                print!("{}", presets::source(&name)?);
                return Ok(());
            }
            let config = presets::load(&name)?;
            emit_outputs(&config, Path::new("."), &out, json).map(drop)
        }
        Command::Dressed { common, n_max, omega_rabi } => {
            let (mut config, base) = base_config(&common, &[Kind::Dressed])?;
            set(&mut config.dressed.n_max, n_max);
            set(&mut config.dressed.omega_rabi, omega_rabi);
            finish(config, &base, &common, true)
        }
        Command::Emit { common, pulse, pulse_file, amplitude_g, width_us, two_level } => {
            let (mut config, base) = base_config(&common, &[Kind::Emit, Kind::TwoLevel])?;
            if two_level {
                config.kind = Kind::TwoLevel;
            }
            if let Some(p) = pulse {
                config.pulse.shape = match p {
                    PulseArg::Sin => PulseShape::Sin,
                    PulseArg::Ramp => PulseShape::Ramp,
                };
            }
            if let Some(f) = pulse_file {
                config.pulse.shape = PulseShape::Csv;
                config.pulse.file = Some(path_string(&f));
            }
            set(&mut config.pulse.amplitude_g, amplitude_g);
            set(&mut config.pulse.width_us, width_us);
            finish(config, &base, &common, false)
        }
        Command::Shape { common, photon } => {
            let (mut config, base) = base_config(&common, &[Kind::Shape])?;
            apply_photon(&mut config, &photon)?;
            finish(config, &base, &common, false)
        }
        Command::Absorb { common, photon, c0_sq, initial } => {
            let (mut config, base) = base_config(&common, &[Kind::Absorb])?;
            apply_photon(&mut config, &photon)?;
            set(&mut config.absorb.c0_sq, c0_sq);
            if let Some(i) = initial {
                config.absorb.initial = match i {
                    InitialArg::Prepared => InitialCondition::Prepared,
                    InitialArg::Ground => InitialCondition::Ground,
                    InitialArg::EmptyCavity => InitialCondition::EmptyCavity,
                };
            }
            finish(config, &base, &common, false)
        }
        Command::SweepC { common, photon, c_min, c_max, points } => {
            let (mut config, base) = base_config(&common, &[Kind::Sweep])?;
            apply_photon(&mut config, &photon)?;
            set(&mut config.sweep.c_min, c_min);
            set(&mut config.sweep.c_max, c_max);
            set(&mut config.sweep.points, points);
            finish(config, &base, &common, false)
        }
        Command::Hom { common, photon, detuning, dephasing_ns, mode_overlap, pairs, seed } => {
            let (mut config, base) = base_config(&common, &[Kind::Hom])?;
            apply_photon(&mut config, &photon)?;
            set(&mut config.hom.detuning, detuning);
            if dephasing_ns.is_some() {
                config.hom.dephasing_ns = dephasing_ns;
                config.hom.dip_width_ns = None;
            }
            set(&mut config.hom.mode_overlap, mode_overlap);
            set(&mut config.hom.pairs, pairs);
            set(&mut config.hom.seed, seed);
            finish(config, &base, &common, false)
        }
        Command::Qutrit { common, signal_phases, lo_phases } => {
            let (mut config, base) = base_config(&common, &[Kind::Qutrit])?;
            if let Some(p) = signal_phases {
                config.qutrit.signal_phases = parse_phases(&p)?;
                if lo_phases.is_none() {
                    config.qutrit.lo_phases = vec![0.0; config.qutrit.signal_phases.len()];
                }
            }
            if let Some(p) = lo_phases {
                config.qutrit.lo_phases = parse_phases(&p)?;
            }
            finish(config, &base, &common, false)
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Scenario from `--config` or from flags alone, plus the directory that
/// relative file names in it refer to.
fn base_config(common: &Common, kinds: &[Kind]) -> Result<(Config, PathBuf)> {
    let (mut config, base) = match &common.config {
        Some(path) => {
            let config = load_config(path)?;
            if !kinds.contains(&config.kind) {
                bail!(
                    "{} describes a {:?} scenario, which this subcommand does not run",
                    path.display(),
                    config.kind
                );
            }
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (config, base)
        }
        None => {
            let kind = kinds[0];
            let default_name = match kind {
                Kind::Sweep => "sweep-c".to_string(),
                k => serde_json::to_value(k)?.as_str().unwrap_or("run").to_string(),
            };
            let g = if kind == Kind::Sweep {
                None
            } else {
                Some(common.g.context("--g is required without --config")?)
            };
            let mut config = Config::minimal(
                &default_name,
                kind,
                g.unwrap_or(0.0),
                common.kappa.context("--kappa is required without --config")?,
                common.gamma.context("--gamma is required without --config")?,
            );
            config.params.g = g;
            (config, PathBuf::new())
        }
    };
    let p = &mut config.params;
    if common.g.is_some() {
        p.g = common.g;
    }
    set(&mut p.kappa, common.kappa);
    set(&mut p.gamma, common.gamma);
    set(&mut p.delta_pump, common.delta_pump);
    set(&mut p.delta_cavity, common.delta_cavity);
    if let Some(n) = &common.name {
        config.name = n.clone();
    }
    if common.t_end_us.is_some() {
        config.grid.t_end_us = common.t_end_us;
    }
    if common.dt_ns.is_some() {
        config.grid.dt_ns = common.dt_ns;
    }
    Ok((config, base))
}

fn apply_photon(config: &mut Config, args: &PhotonArgs) -> Result<()> {
    let ph = &mut config.photon;
    if let Some(t) = args.target {
        ph.shape = match t {
            TargetArg::Sin2 => PhotonShape::Sin2,
            TargetArg::Twin => PhotonShape::Twin,
            TargetArg::Triple => PhotonShape::Bins,
        };
    }
    if let Some(f) = &args.target_file {
        ph.shape = PhotonShape::Csv;
        ph.file = Some(path_string(f));
    }
    if let Some(p) = &args.phases {
        ph.phases = parse_phases(p)?;
    }
    set(&mut ph.start_us, args.start_us);
    set(&mut ph.duration_us, args.duration_us);
    if args.norm.is_some() {
        ph.norm = args.norm;
    }
    Ok(())
}

fn finish(config: Config, base: &Path, common: &Common, table_to_stdout: bool) -> Result<()> {
    config.validate()?;
    let output = emit_outputs(&config, base, &common.out, common.json)?;
    if table_to_stdout && !common.json {
        print!("{}", String::from_utf8(output.csv()?)?);
    }
    Ok(())
}

fn emit_outputs(config: &Config, base: &Path, dir: &Path, json: bool) -> Result<scenario::Output> {
    let output = run_scenario(config, base)?;
    let (csv_path, json_path) = output.write(dir, &config.name)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&output.summary)?);
    } else {
        eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(output)
}
