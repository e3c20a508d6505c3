//! Command-line front end for the seven-level thin-cell simulator:
//! config ingestion and validation, coupling-detuning sweeps,
//! population reconstruction across cell thicknesses, and confinement /
//! line-strength diagnostics, all emitted as CSV plus a JSON run
//! manifest for downstream plotting.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use thincell_core::angular::{transition_strength, HalfInt};
use thincell_core::atom::{LIFETIME_4D52, LIFETIME_5P32};
use thincell_core::config::{self, RawConfig, ResolvedConfig, PROFILE_NAME};
use thincell_core::confinement::{max_transit_velocity, resonance_velocity, wall_rate, CellConfig};
use thincell_core::constants;
use thincell_core::observables::{reconstruct_populations, sweep, write_populations_csv};
use thincell_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "thincell",
    version,
    about = "Seven-level Rb ladder spectroscopy in micrometric vapor cells"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON parameter file; keys override the built-in profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV and manifest outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker-thread cap (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Built-in parameter profile user keys are merged over.
    #[arg(long, global = true, default_value = PROFILE_NAME)]
    profile: String,
    /// Spectrum post-processing (overrides the config key).
    #[arg(long, global = true, value_enum)]
    normalize: Option<NormalizeArg>,
    /// Velocity-class filtering (overrides the config key).
    #[arg(long, global = true, value_enum)]
    filter_mode: Option<FilterModeArg>,
    /// Dissipator bookkeeping (overrides the config key).
    #[arg(long, global = true, value_enum)]
    trace_mode: Option<TraceModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    Peak,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterModeArg {
    Rate,
    Cutoff,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceModeArg {
    Conserving,
    Verbatim,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check the configuration; echo resolved and derived values.
    Validate,
    /// Sweep the coupling detuning; write spectrum CSV plus manifest.
    Sweep,
    /// Reconstruct velocity-averaged populations for a list of thicknesses.
    Populations(PopulationsArgs),
    /// Print confinement rates for one cell geometry as CSV.
    Rates(RatesArgs),
    /// Print hyperfine transition strengths as CSV.
    Strength(StrengthArgs),
}

#[derive(Args)]
struct PopulationsArgs {
    /// Cell thicknesses in micrometers (comma-separated or repeated).
    #[arg(long = "thickness-um", value_delimiter = ',')]
    thickness_um: Vec<f64>,
    /// Append a room-temperature 7.5 cm reference-cell row.
    #[arg(long)]
    include_reference: bool,
}

#[derive(Args)]
struct RatesArgs {
    /// Cell thickness in micrometers.
    #[arg(long = "thickness-um")]
    thickness_um: f64,
    /// Vapor temperature in degrees Celsius.
    #[arg(long = "temp-c")]
    temp_c: f64,
}

#[derive(Args)]
struct StrengthArgs {
    /// Lower-level hyperfine quantum number F.
    #[arg(long = "F")]
    f: f64,
    /// Upper-level F'; omitted means every dipole-reachable F'.
    #[arg(long = "Fprime")]
    f_prime: Option<f64>,
    /// Lower-level electronic angular momentum J.
    #[arg(long = "J", default_value_t = 1.5)]
    j: f64,
    /// Upper-level electronic angular momentum J'.
    #[arg(long = "Jprime", default_value_t = 2.5)]
    j_prime: f64,
    /// Nuclear spin I.
    #[arg(long = "I", default_value_t = 2.5)]
    i: f64,
}

/// A failure carrying its process exit code: 2 for configuration
/// problems, 3 for numerical ones, 1 for filesystem trouble.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(context: &str, err: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("{context}: {err}"),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::Config(_)
            | CoreError::MismatchedQuantumNumbers(_)
            | CoreError::NonPhysicalInput(_)
            | CoreError::InvalidGrid(_) => 2,
            CoreError::DegenerateNullSpace { .. }
            | CoreError::NoSteadyState { .. }
            | CoreError::StepSizeTooLarge { .. }
            | CoreError::SweepPoint { .. } => 3,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

/// Everything written by one invocation, echoed for reproducibility:
/// re-running with the embedded config reproduces the CSV byte for byte.
#[derive(serde::Serialize)]
struct RunManifest {
    tool: &'static str,
    tool_version: &'static str,
    created_utc: String,
    command: &'static str,
    profile: String,
    /// Fully populated key set; merging-free re-resolution target.
    config: RawConfig,
    outputs: Vec<String>,
    diagnostics: serde_json::Value,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        // First global-pool builder wins; later ones would error, but the
        // pool is configured exactly once per process here.
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not configure {n} worker threads: {err}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate => cmd_validate(&cli.global),
        Command::Sweep => cmd_sweep(&cli.global),
        Command::Populations(args) => cmd_populations(&cli.global, args),
        Command::Rates(args) => cmd_rates(&cli.global, args),
        Command::Strength(args) => cmd_strength(args),
    }
}

/// Prints one stdout payload, treating a closed pipe as success so that
/// `thincell ... | head` exits quietly.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(err) if err.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::io("cannot write to stdout", err))
        }
        _ => Ok(()),
    }
}

/// Reads the user file (if any), merges it over the profile, applies
/// command-line mode overrides and resolves the result.
fn resolve_config(global: &GlobalArgs) -> Result<ResolvedConfig, Failure> {
    let user = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|err| Failure {
                code: 2,
                message: format!("cannot read config file {}: {err}", path.display()),
            })?;
            RawConfig::from_json(&text)?
        }
        None => RawConfig::default(),
    };
    let mut merged = user.merged_over(&config::builtin_profile(&global.profile)?);
    if let Some(mode) = global.normalize {
        merged.normalize = Some(
            match mode {
                NormalizeArg::None => "none",
                NormalizeArg::Peak => "peak",
            }
            .into(),
        );
    }
    if let Some(mode) = global.filter_mode {
        merged.filter_mode = Some(
            match mode {
                FilterModeArg::Rate => "rate",
                FilterModeArg::Cutoff => "cutoff",
            }
            .into(),
        );
    }
    if let Some(mode) = global.trace_mode {
        merged.trace_mode = Some(
            match mode {
                TraceModeArg::Conserving => "conserving",
                TraceModeArg::Verbatim => "verbatim",
            }
            .into(),
        );
    }
    Ok(config::resolve(&merged)?)
}

fn cmd_validate(global: &GlobalArgs) -> Result<(), Failure> {
    let resolved = resolve_config(global)?;
    let cell = &resolved.sweep.cell;
    let fields = &resolved.sweep.fields;
    let u = cell.most_probable_speed();
    let echo = serde_json::json!({
        "profile": global.profile,
        "config": resolved.raw,
        "derived": {
            "omega_c_45_mhz": constants::angular_to_mhz(fields.omega_c_45),
            "omega_c_46_mhz": constants::angular_to_mhz(fields.omega_c_46),
            "omega_c_47_mhz": constants::angular_to_mhz(fields.omega_c_47),
            "most_probable_speed_m_per_s": u,
            "wall_rate_at_u_per_s": wall_rate(cell, u),
            "max_transit_velocity_5p32_m_per_s":
                max_transit_velocity(cell.thickness, LIFETIME_5P32)?,
            "max_transit_velocity_4d52_m_per_s":
                max_transit_velocity(cell.thickness, LIFETIME_4D52)?,
        },
    });
    emit(&serde_json::to_string_pretty(&echo).expect("echo document serializes"))
}

fn write_manifest(
    global: &GlobalArgs,
    command: &'static str,
    config: &RawConfig,
    outputs: Vec<String>,
    diagnostics: serde_json::Value,
    path: &PathBuf,
) -> Result<(), Failure> {
    let manifest = RunManifest {
        tool: "thincell",
        tool_version: env!("CARGO_PKG_VERSION"),
        created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        command,
        profile: global.profile.clone(),
        config: config.clone(),
        outputs,
        diagnostics,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(path, text + "\n")
        .map_err(|err| Failure::io(&format!("cannot write {}", path.display()), err))
}

fn cmd_sweep(global: &GlobalArgs) -> Result<(), Failure> {
    let resolved = resolve_config(global)?;
    let spectrum = sweep(&resolved.sweep)?.normalized(resolved.normalize);

    fs::create_dir_all(&global.out)
        .map_err(|err| Failure::io(&format!("cannot create {}", global.out.display()), err))?;
    let csv_path = global.out.join("spectrum.csv");
    let manifest_path = global.out.join("spectrum_manifest.json");

    let mut buf = Vec::new();
    spectrum
        .write_csv(&mut buf)
        .expect("in-memory write cannot fail");
    fs::write(&csv_path, buf)
        .map_err(|err| Failure::io(&format!("cannot write {}", csv_path.display()), err))?;

    write_manifest(
        global,
        "sweep",
        &resolved.raw,
        vec![
            csv_path.display().to_string(),
            manifest_path.display().to_string(),
        ],
        serde_json::to_value(&spectrum.metadata).expect("metadata serializes"),
        &manifest_path,
    )?;
    emit(&format!(
        "wrote {}\nwrote {}",
        csv_path.display(),
        manifest_path.display()
    ))
}

fn cmd_populations(global: &GlobalArgs, args: &PopulationsArgs) -> Result<(), Failure> {
    if args.thickness_um.is_empty() && !args.include_reference {
        return Err(Failure {
            code: 2,
            message: "populations needs --thickness-um values and/or --include-reference".into(),
        });
    }
    let resolved = resolve_config(global)?;
    let base = resolved.sweep.cell;
    let mut cells: Vec<CellConfig<f64>> = args
        .thickness_um
        .iter()
        .map(|&um| CellConfig {
            thickness: um * 1e-6,
            ..base
        })
        .collect();
    if args.include_reference {
        cells.push(CellConfig {
            thickness: 7.5e-2,
            temperature: 25.0 + constants::CELSIUS_OFFSET,
            ..base
        });
    }
    let records = reconstruct_populations(&resolved.sweep, &cells)?;

    fs::create_dir_all(&global.out)
        .map_err(|err| Failure::io(&format!("cannot create {}", global.out.display()), err))?;
    let csv_path = global.out.join("populations.csv");
    let manifest_path = global.out.join("populations_manifest.json");

    let mut buf = Vec::new();
    write_populations_csv(&records, &mut buf).expect("in-memory write cannot fail");
    fs::write(&csv_path, buf)
        .map_err(|err| Failure::io(&format!("cannot write {}", csv_path.display()), err))?;

    let max_residual = records
        .iter()
        .map(|r| r.max_residual)
        .fold(0.0_f64, f64::max);
    write_manifest(
        global,
        "populations",
        &resolved.raw,
        vec![
            csv_path.display().to_string(),
            manifest_path.display().to_string(),
        ],
        serde_json::json!({
            "rows": records.len(),
            "velocity_nodes": resolved.sweep.velocity_nodes,
            "velocity_span": resolved.sweep.velocity_span,
            "max_residual": max_residual,
        }),
        &manifest_path,
    )?;
    emit(&format!(
        "wrote {}\nwrote {}",
        csv_path.display(),
        manifest_path.display()
    ))
}

fn cmd_rates(global: &GlobalArgs, args: &RatesArgs) -> Result<(), Failure> {
    let cell = CellConfig::new(
        args.thickness_um * 1e-6,
        args.temp_c + constants::CELSIUS_OFFSET,
    )?;
    let u = cell.most_probable_speed();
    // The excited-state splitting bridged by the probe Doppler shift and
    // the probe wavenumber both come from the active profile.
    let profile = config::builtin_profile(&global.profile)?;
    let delta1 = constants::mhz_to_angular(
        profile
            .delta1_mhz
            .ok_or_else(|| missing_profile_key("delta1_mhz"))?,
    );
    let k_p = constants::wavenumber(
        profile
            .probe_wavelength_nm
            .ok_or_else(|| missing_profile_key("probe_wavelength_nm"))?
            * 1e-9,
    );
    emit(&format!(
        "thickness_um,temp_c,u_m_per_s,wall_rate_at_u_per_s,\
         vmax_5p32_m_per_s,vmax_4d52_m_per_s,resonance_velocity_m_per_s\n\
         {},{},{},{},{},{},{}",
        args.thickness_um,
        args.temp_c,
        u,
        wall_rate(&cell, u),
        max_transit_velocity(cell.thickness, LIFETIME_5P32)?,
        max_transit_velocity(cell.thickness, LIFETIME_4D52)?,
        resonance_velocity(delta1, k_p)?,
    ))
}

fn missing_profile_key(key: &str) -> Failure {
    Failure {
        code: 2,
        message: format!("profile does not define `{key}`"),
    }
}

fn cmd_strength(args: &StrengthArgs) -> Result<(), Failure> {
    let f = quantum_number("F", args.f)?;
    let j = quantum_number("J", args.j)?;
    let j_prime = quantum_number("Jprime", args.j_prime)?;
    let i = quantum_number("I", args.i)?;
    let f_primes: Vec<HalfInt> = match args.f_prime {
        Some(x) => vec![quantum_number("Fprime", x)?],
        // All upper hyperfine levels reachable by a dipole transition:
        // F' couples J' with I and differs from F by at most one.
        None => {
            let lo = (j_prime.twice() - i.twice()).abs();
            let hi = j_prime.twice() + i.twice();
            (lo..=hi)
                .step_by(2)
                .map(HalfInt::from_twice)
                .filter(|fp| (fp.twice() - f.twice()).abs() <= 2)
                .collect()
        }
    };
    if f_primes.is_empty() {
        return Err(Failure {
            code: 2,
            message: format!("no dipole-reachable Fprime for F = {f}, Jprime = {j_prime}, I = {i}"),
        });
    }
    let mut table = String::from("F,Fprime,S");
    for f_prime in f_primes {
        let s: f64 = transition_strength(f, f_prime, j, j_prime, i)?;
        table.push_str(&format!("\n{f},{f_prime},{s}"));
    }
    emit(&table)
}

fn quantum_number(label: &str, x: f64) -> Result<HalfInt, Failure> {
    HalfInt::try_from_f64(x).map_err(|_| Failure {
        code: 2,
        message: format!("{label} = {x} is not a half-integer"),
    })
}
