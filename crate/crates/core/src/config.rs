//! JSON configuration schema, built-in profile and resolution.
//!
//! User-facing units are experiment-friendly: linear MHz for every
//! frequency and rate (converted to angular rad/s on resolution),
//! nanometers for wavelengths, micrometers for the cell thickness and
//! degrees Celsius for the temperature. Configs are merged per key over
//! a built-in profile, so a user file only has to state what differs.
//! The two upper-state splittings have no bundled default and must
//! always be supplied.

use serde::{Deserialize, Serialize};

use crate::atom::{coupling_rabi_split, coupling_strengths, FieldConfig, LevelScheme};
use crate::confinement::{CellConfig, FilterMode};
use crate::constants;
use crate::error::{Error, Result};
use crate::master::TraceMode;
use crate::observables::{Normalize, SweepConfig};
use crate::solver::SolverOptions;

/// Name of the bundled default parameter set (hot Rb-85 ladder, thin
/// cell at 120 C, counter-propagating beams).
pub const PROFILE_NAME: &str = "rb85-thin-cell";

/// Raw key set of a configuration file. Every field is optional so
/// files can be merged per key; `resolve` reports which required keys
/// are still missing afterwards.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Probe Rabi frequency (MHz).
    pub omega_p_mhz: Option<f64>,
    /// Coupling Rabi frequency carried by the strongest line (MHz).
    pub omega_c_mhz: Option<f64>,
    /// Probe detuning (MHz).
    pub delta_p_mhz: Option<f64>,
    /// Parked coupling detuning for single-point runs (MHz).
    pub delta_c_mhz: Option<f64>,
    /// Ground hyperfine splitting (MHz).
    pub omega_hfs_mhz: Option<f64>,
    /// Intermediate-state F=3 <-> F=4 splitting (MHz).
    pub delta1_mhz: Option<f64>,
    /// Upper-state F=3 <-> F=4 splitting (MHz). Required: no default.
    pub delta2_mhz: Option<f64>,
    /// Upper-state F=4 <-> F=5 splitting (MHz). Required: no default.
    pub delta3_mhz: Option<f64>,
    /// Spontaneous decay rates of the five excited levels (MHz).
    pub gamma_mhz: Option<[f64; 5]>,
    /// Ground-manifold exchange rate (MHz).
    pub gamma12_mhz: Option<f64>,
    /// Self-broadening rate added to every excited level (MHz).
    pub gamma_self_mhz: Option<f64>,
    /// Wall-reset branching weight of the ground manifold.
    pub a: Option<f64>,
    /// Wall-collision branching weight of the intermediate levels.
    pub b: Option<f64>,
    /// Wall-collision branching weight of the upper levels.
    pub c: Option<f64>,
    /// Vapor temperature (degrees Celsius).
    pub temperature_c: Option<f64>,
    /// Cell thickness (micrometers).
    pub thickness_um: Option<f64>,
    /// Use the angular wall-rate convention 2*pi*|v|/(L_z/2).
    pub two_pi_wall_rate: Option<bool>,
    /// Wall-rate floor as a fraction of the thermal rate (0 disables).
    pub floor_fraction: Option<f64>,
    /// Probe wavelength (nm).
    pub probe_wavelength_nm: Option<f64>,
    /// Coupling wavelength (nm).
    pub coupling_wavelength_nm: Option<f64>,
    /// Coupling beam runs against the probe.
    pub counter_propagating: Option<bool>,
    /// First coupling detuning of a sweep (MHz).
    pub delta_c_min_mhz: Option<f64>,
    /// Last coupling detuning of a sweep (MHz).
    pub delta_c_max_mhz: Option<f64>,
    /// Number of detuning samples, endpoints included.
    pub n_detunings: Option<usize>,
    /// Number of velocity quadrature nodes.
    pub velocity_nodes: Option<usize>,
    /// Velocity grid half-width in units of the most probable speed.
    pub velocity_span: Option<f64>,
    /// Population bookkeeping: "conserving" or "verbatim".
    pub trace_mode: Option<String>,
    /// Velocity filter: "rate" or "cutoff".
    pub filter_mode: Option<String>,
    /// Spectrum post-processing: "none" or "peak".
    pub normalize: Option<String>,
    /// One-based level labels summed for the fdrop signal.
    pub fdrop_levels: Option<Vec<usize>>,
}

impl RawConfig {
    /// Parses a JSON document, rejecting unknown keys.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("raw config serializes")
    }

    /// Per-key merge: every key set in `self` wins, everything else
    /// falls back to `base`.
    pub fn merged_over(&self, base: &RawConfig) -> RawConfig {
        macro_rules! pick {
            ($($field:ident),* $(,)?) => {
                RawConfig {
                    $($field: self.$field.clone().or_else(|| base.$field.clone()),)*
                }
            };
        }
        pick!(
            omega_p_mhz,
            omega_c_mhz,
            delta_p_mhz,
            delta_c_mhz,
            omega_hfs_mhz,
            delta1_mhz,
            delta2_mhz,
            delta3_mhz,
            gamma_mhz,
            gamma12_mhz,
            gamma_self_mhz,
            a,
            b,
            c,
            temperature_c,
            thickness_um,
            two_pi_wall_rate,
            floor_fraction,
            probe_wavelength_nm,
            coupling_wavelength_nm,
            counter_propagating,
            delta_c_min_mhz,
            delta_c_max_mhz,
            n_detunings,
            velocity_nodes,
            velocity_span,
            trace_mode,
            filter_mode,
            normalize,
            fdrop_levels,
        )
    }
}

/// The bundled profile by name. The two upper-state splittings are
/// deliberately left unset: they are required user inputs.
pub fn builtin_profile(name: &str) -> Result<RawConfig> {
    if name != PROFILE_NAME {
        return Err(Error::Config(format!(
            "unknown profile `{name}` (available: {PROFILE_NAME})"
        )));
    }
    Ok(RawConfig {
        omega_p_mhz: Some(4.0),
        omega_c_mhz: Some(20.0),
        delta_p_mhz: Some(0.0),
        delta_c_mhz: Some(0.0),
        omega_hfs_mhz: Some(3035.0),
        delta1_mhz: Some(120.7),
        delta2_mhz: None,
        delta3_mhz: None,
        gamma_mhz: Some([6.06, 6.06, 1.97, 1.97, 1.97]),
        gamma12_mhz: Some(0.01),
        gamma_self_mhz: Some(1.0),
        a: Some(0.5),
        b: Some(0.5),
        c: Some(0.5),
        temperature_c: Some(120.0),
        thickness_um: Some(0.5),
        two_pi_wall_rate: Some(false),
        floor_fraction: Some(0.0),
        probe_wavelength_nm: Some(780.24),
        coupling_wavelength_nm: Some(1529.37),
        counter_propagating: Some(true),
        delta_c_min_mhz: Some(-500.0),
        delta_c_max_mhz: Some(500.0),
        n_detunings: Some(801),
        velocity_nodes: Some(2001),
        velocity_span: Some(4.0),
        trace_mode: Some("conserving".into()),
        filter_mode: Some("rate".into()),
        normalize: Some("none".into()),
        fdrop_levels: Some(vec![3, 4, 5]),
    })
}

/// Fully resolved run parameters in SI/angular units.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub sweep: SweepConfig<f64>,
    pub normalize: Normalize,
    /// Complete key echo (every field set); re-resolving it reproduces
    /// this configuration exactly.
    pub raw: RawConfig,
}

fn require<T: Clone>(value: &Option<T>, key: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
}

fn parse_trace_mode(s: &str) -> Result<TraceMode> {
    match s {
        "conserving" => Ok(TraceMode::Conserving),
        "verbatim" => Ok(TraceMode::Verbatim),
        other => Err(Error::Config(format!(
            "trace_mode must be \"conserving\" or \"verbatim\", got \"{other}\""
        ))),
    }
}

fn parse_filter_mode(s: &str) -> Result<FilterMode> {
    match s {
        "rate" => Ok(FilterMode::RateFiltering),
        "cutoff" => Ok(FilterMode::HardCutoff),
        other => Err(Error::Config(format!(
            "filter_mode must be \"rate\" or \"cutoff\", got \"{other}\""
        ))),
    }
}

fn parse_normalize(s: &str) -> Result<Normalize> {
    match s {
        "none" => Ok(Normalize::None),
        "peak" => Ok(Normalize::Peak),
        other => Err(Error::Config(format!(
            "normalize must be \"none\" or \"peak\", got \"{other}\""
        ))),
    }
}

/// Checks every key, converts units and builds the domain types.
pub fn resolve(raw: &RawConfig) -> Result<ResolvedConfig> {
    let mhz = constants::mhz_to_angular;

    let delta2_mhz = raw.delta2_mhz.ok_or_else(|| {
        Error::Config(
            "missing required key `delta2_mhz` (upper-state F=3<->F=4 splitting; \
             no bundled default exists, supply it in the config file)"
                .into(),
        )
    })?;
    let delta3_mhz = raw.delta3_mhz.ok_or_else(|| {
        Error::Config(
            "missing required key `delta3_mhz` (upper-state F=4<->F=5 splitting; \
             no bundled default exists, supply it in the config file)"
                .into(),
        )
    })?;

    let gamma_mhz = require(&raw.gamma_mhz, "gamma_mhz")?;
    let scheme = LevelScheme {
        omega_hfs: mhz(require(&raw.omega_hfs_mhz, "omega_hfs_mhz")?),
        delta1: mhz(require(&raw.delta1_mhz, "delta1_mhz")?),
        delta2: mhz(delta2_mhz),
        delta3: mhz(delta3_mhz),
        gamma: gamma_mhz.map(mhz),
        gamma_12: mhz(require(&raw.gamma12_mhz, "gamma12_mhz")?),
        gamma_self: mhz(require(&raw.gamma_self_mhz, "gamma_self_mhz")?),
        branching_a: require(&raw.a, "a")?,
        branching_b: require(&raw.b, "b")?,
        branching_c: require(&raw.c, "c")?,
    };
    scheme.validate()?;

    let probe_nm = require(&raw.probe_wavelength_nm, "probe_wavelength_nm")?;
    let coupling_nm = require(&raw.coupling_wavelength_nm, "coupling_wavelength_nm")?;
    for (key, nm) in [
        ("probe_wavelength_nm", probe_nm),
        ("coupling_wavelength_nm", coupling_nm),
    ] {
        if nm <= 0.0 {
            return Err(Error::Config(format!("{key} must be positive, got {nm}")));
        }
    }
    let omega_c_base = mhz(require(&raw.omega_c_mhz, "omega_c_mhz")?);
    let (omega_c_45, omega_c_46, omega_c_47) =
        coupling_rabi_split(omega_c_base, coupling_strengths()?);
    let fields = FieldConfig {
        omega_p: mhz(require(&raw.omega_p_mhz, "omega_p_mhz")?),
        omega_c_base,
        omega_c_45,
        omega_c_46,
        omega_c_47,
        delta_p: mhz(require(&raw.delta_p_mhz, "delta_p_mhz")?),
        delta_c: mhz(require(&raw.delta_c_mhz, "delta_c_mhz")?),
        k_p: constants::wavenumber(probe_nm * 1e-9),
        k_c: constants::wavenumber(coupling_nm * 1e-9),
        counter_propagating: require(&raw.counter_propagating, "counter_propagating")?,
    };
    fields.validate()?;

    let temperature_c = require(&raw.temperature_c, "temperature_c")?;
    if temperature_c <= -constants::CELSIUS_OFFSET {
        return Err(Error::Config(format!(
            "temperature_c must exceed absolute zero, got {temperature_c}"
        )));
    }
    let thickness_um = require(&raw.thickness_um, "thickness_um")?;
    if thickness_um <= 0.0 {
        return Err(Error::Config(format!(
            "thickness_um must be positive, got {thickness_um}"
        )));
    }
    let floor_fraction = require(&raw.floor_fraction, "floor_fraction")?;
    if !(0.0..1.0).contains(&floor_fraction) {
        return Err(Error::Config(format!(
            "floor_fraction must lie in [0, 1), got {floor_fraction}"
        )));
    }
    let cell = CellConfig {
        thickness: thickness_um * 1e-6,
        temperature: temperature_c + constants::CELSIUS_OFFSET,
        atomic_mass: constants::RB85_MASS,
        two_pi_convention: require(&raw.two_pi_wall_rate, "two_pi_wall_rate")?,
        floor_fraction,
    };
    cell.validate()?;

    let labels = require(&raw.fdrop_levels, "fdrop_levels")?;
    let mut fdrop_levels = Vec::with_capacity(labels.len());
    for &label in &labels {
        if !(1..=7).contains(&label) {
            return Err(Error::Config(format!(
                "fdrop_levels entries are one-based level labels in 1..=7, got {label}"
            )));
        }
        fdrop_levels.push(label - 1);
    }

    let sweep = SweepConfig {
        scheme,
        fields,
        cell,
        delta_c_min: mhz(require(&raw.delta_c_min_mhz, "delta_c_min_mhz")?),
        delta_c_max: mhz(require(&raw.delta_c_max_mhz, "delta_c_max_mhz")?),
        n_detunings: require(&raw.n_detunings, "n_detunings")?,
        velocity_nodes: require(&raw.velocity_nodes, "velocity_nodes")?,
        velocity_span: require(&raw.velocity_span, "velocity_span")?,
        filter_mode: parse_filter_mode(&require(&raw.filter_mode, "filter_mode")?)?,
        trace_mode: parse_trace_mode(&require(&raw.trace_mode, "trace_mode")?)?,
        fdrop_levels,
        solver: SolverOptions::default(),
    };
    sweep.validate()?;

    let normalize = parse_normalize(&require(&raw.normalize, "normalize")?)?;

    Ok(ResolvedConfig {
        sweep,
        normalize,
        raw: raw.clone(),
    })
}

/// Parses a user document, merges it over a profile and resolves.
pub fn load(text: &str, profile: &str) -> Result<ResolvedConfig> {
    let user = RawConfig::from_json(text)?;
    let merged = user.merged_over(&builtin_profile(profile)?);
    resolve(&merged)
}
