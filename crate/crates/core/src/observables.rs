//! Velocity-averaged spectra and population diagnostics for thin cells.
//!
//! Every observable is an ensemble average over a one-dimensional
//! Maxwell-Boltzmann velocity grid: each velocity class gets its own
//! Doppler-shifted Hamiltonian and (in the default filter mode) its own
//! wall-collision rate, its steady state is solved independently, and
//! the requested matrix elements are averaged with the thermal weights.
//! Optically thin signals are reported as column densities, i.e. the
//! velocity average times the cell thickness.

use rayon::prelude::*;

use crate::atom::{build_hamiltonian, FieldConfig, LevelScheme, LIFETIME_4D52, N_LEVELS};
use crate::confinement::{boltzmann_grid, max_transit_velocity, wall_rate, CellConfig, FilterMode};
use crate::constants;
use crate::error::{Error, Result};
use crate::master::{build_liouvillian, build_relaxation, Layout, Liouvillian, TraceMode};
use crate::scalar::Scalar;
use crate::solver::{steady_state_with, SolverOptions};

/// Zero-based density-matrix indices summed for the default
/// fluorescence-detected pumping signal: both intermediate levels plus
/// the lowest upper-state hyperfine level.
pub const DEFAULT_FDROP_LEVELS: [usize; 3] = [2, 3, 4];

/// Zero-based indices of the upper-state manifold whose population is
/// read out as fluorescence.
const UPPER_LEVELS: [usize; 3] = [4, 5, 6];

/// Everything a spectrum sweep needs: the atom, the beams, the cell,
/// the detuning range and the quadrature/filter policy.
#[derive(Clone, Debug)]
pub struct SweepConfig<T: Scalar> {
    pub scheme: LevelScheme<T>,
    pub fields: FieldConfig<T>,
    pub cell: CellConfig<T>,
    /// First coupling detuning of the sweep (rad/s).
    pub delta_c_min: T,
    /// Last coupling detuning of the sweep (rad/s).
    pub delta_c_max: T,
    /// Number of detuning samples (>= 2), endpoints included.
    pub n_detunings: usize,
    /// Number of velocity nodes (>= 3, odd keeps the v = 0 class).
    pub velocity_nodes: usize,
    /// Half-width of the velocity grid in units of the most probable
    /// speed.
    pub velocity_span: T,
    /// How confinement suppresses fast velocity classes.
    pub filter_mode: FilterMode,
    /// Population bookkeeping convention of the dissipator.
    pub trace_mode: TraceMode,
    /// Diagonal indices summed for the fdrop signal.
    pub fdrop_levels: Vec<usize>,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> SweepConfig<T> {
    /// Sweep over +-500 MHz with production-quality grids and the
    /// default filter and bookkeeping conventions.
    pub fn new(scheme: LevelScheme<T>, fields: FieldConfig<T>, cell: CellConfig<T>) -> Self {
        let half_range = T::lit(constants::mhz_to_angular(500.0));
        SweepConfig {
            scheme,
            fields,
            cell,
            delta_c_min: -half_range,
            delta_c_max: half_range,
            n_detunings: 201,
            velocity_nodes: 501,
            velocity_span: T::lit(4.0),
            filter_mode: FilterMode::RateFiltering,
            trace_mode: TraceMode::Conserving,
            fdrop_levels: DEFAULT_FDROP_LEVELS.to_vec(),
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.fields.validate()?;
        self.cell.validate()?;
        if self.n_detunings < 2 {
            return Err(Error::Config(
                "n_detunings must be at least 2 (the range needs both endpoints)".into(),
            ));
        }
        if !(self.delta_c_min < self.delta_c_max) {
            return Err(Error::Config(
                "delta_c_min must lie strictly below delta_c_max".into(),
            ));
        }
        if self.velocity_nodes < 3 {
            return Err(Error::Config("velocity_nodes must be at least 3".into()));
        }
        if self.velocity_span <= T::zero() {
            return Err(Error::Config("velocity_span must be positive".into()));
        }
        if self.fdrop_levels.is_empty() {
            return Err(Error::Config("fdrop_levels must not be empty".into()));
        }
        for (k, &i) in self.fdrop_levels.iter().enumerate() {
            if i >= N_LEVELS {
                return Err(Error::Config(format!(
                    "fdrop level index {i} out of range (0..{N_LEVELS})"
                )));
            }
            if self.fdrop_levels[..k].contains(&i) {
                return Err(Error::Config(format!("fdrop level index {i} repeated")));
            }
        }
        for (name, tol) in [
            ("residual_tol", self.solver.residual_tol),
            ("pivot_tol", self.solver.pivot_tol),
            ("step_error_tol", self.solver.step_error_tol),
        ] {
            if tol <= T::zero() {
                return Err(Error::Config(format!("solver {name} must be positive")));
            }
        }
        Ok(())
    }

    /// The detuning samples, linearly spaced with exact endpoints.
    pub fn detunings(&self) -> Vec<T> {
        let n = self.n_detunings;
        (0..n)
            .map(|i| {
                let f = T::lit(i as f64 / (n - 1) as f64);
                self.delta_c_min * (T::one() - f) + self.delta_c_max * f
            })
            .collect()
    }
}

/// Post-processing applied to a finished spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalize {
    /// Raw column-density signals.
    None,
    /// Each signal divided by its own peak magnitude.
    Peak,
}

/// Provenance and quality echo attached to every spectrum.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SweepMetadata {
    pub code_version: String,
    pub n_detunings: usize,
    pub velocity_nodes: usize,
    pub velocity_span: f64,
    /// Cell thickness (m).
    pub thickness: f64,
    /// Vapor temperature (K).
    pub temperature: f64,
    pub filter_mode: String,
    pub trace_mode: String,
    pub normalization: String,
    /// Worst steady-state residual across every (detuning, velocity)
    /// solve that contributed.
    pub max_residual: f64,
}

/// One full coupling-detuning sweep of the three observables.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Scalar> {
    /// Coupling detunings (rad/s).
    pub delta_c: Vec<T>,
    /// Optical-pumping transmission signal: L_z * <Im rho[1,3]>.
    pub drop: Vec<T>,
    /// Fluorescence-detected pumping signal: L_z * sum of the
    /// configured level populations.
    pub fdrop: Vec<T>,
    /// Upper-state fluorescence: L_z * (p5 + p6 + p7).
    pub fluorescence: Vec<T>,
    pub metadata: SweepMetadata,
}

impl<T: Scalar> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.delta_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_c.is_empty()
    }

    /// A copy with the requested normalization applied.
    pub fn normalized(&self, mode: Normalize) -> Self {
        match mode {
            Normalize::None => self.clone(),
            Normalize::Peak => {
                let scale = |xs: &[T]| -> Vec<T> {
                    let peak = xs.iter().fold(T::zero(), |acc, &x| acc.maxv(x.abs()));
                    if peak > T::zero() {
                        xs.iter().map(|&x| x / peak).collect()
                    } else {
                        xs.to_vec()
                    }
                };
                let mut metadata = self.metadata.clone();
                metadata.normalization = "peak".into();
                Spectrum {
                    delta_c: self.delta_c.clone(),
                    drop: scale(&self.drop),
                    fdrop: scale(&self.fdrop),
                    fluorescence: scale(&self.fluorescence),
                    metadata,
                }
            }
        }
    }

    /// Writes `delta_c_mhz,drop,fdrop,fluorescence` rows. Values use the
    /// shortest round-trip float formatting, so identical sweeps produce
    /// byte-identical files.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "delta_c_mhz,drop,fdrop,fluorescence")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                constants::angular_to_mhz(self.delta_c[k].as_f64()),
                self.drop[k].as_f64(),
                self.fdrop[k].as_f64(),
                self.fluorescence[k].as_f64()
            )?;
        }
        Ok(())
    }
}

/// The three observables at a single coupling detuning.
#[derive(Clone, Copy, Debug)]
pub struct PointSignals<T: Scalar> {
    pub drop: T,
    pub fdrop: T,
    pub fluorescence: T,
    pub max_residual: T,
}

/// Ensemble-averaged per-atom state of one cell geometry.
#[derive(Clone, Debug)]
pub struct PopulationRecord<T: Scalar> {
    /// Cell thickness (m).
    pub thickness: T,
    /// Vapor temperature (K).
    pub temperature: T,
    /// Velocity-averaged level populations, normalized so that together
    /// with `loss` they sum to one.
    pub populations: [T; N_LEVELS],
    /// Velocity-averaged wall-loss occupation.
    pub loss: T,
    /// One-based label of the strongest excited level (3..=7), matching
    /// the `p1..p7` CSV columns.
    pub dominant_level: usize,
    pub max_residual: T,
}

/// Writes `thickness_um,p1..p7,loss,dominant` rows.
pub fn write_populations_csv<T: Scalar, W: std::io::Write>(
    records: &[PopulationRecord<T>],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "thickness_um,p1,p2,p3,p4,p5,p6,p7,loss,dominant")?;
    for r in records {
        write!(out, "{}", r.thickness.as_f64() * 1e6)?;
        for p in &r.populations {
            write!(out, ",{}", p.as_f64())?;
        }
        writeln!(out, ",{},{}", r.loss.as_f64(), r.dominant_level)?;
    }
    Ok(())
}

/// Signal rows of one velocity class across every requested detuning.
struct VelocityRows<T: Scalar> {
    drop: Vec<T>,
    fdrop: Vec<T>,
    fluorescence: Vec<T>,
    max_residual: T,
}

impl<T: Scalar> VelocityRows<T> {
    fn zeros(n: usize) -> Self {
        VelocityRows {
            drop: vec![T::zero(); n],
            fdrop: vec![T::zero(); n],
            fluorescence: vec![T::zero(); n],
            max_residual: T::zero(),
        }
    }
}

/// Wall rate of one velocity class, or `None` if the class is excluded
/// outright by the hard-cutoff filter.
fn class_wall_rate<T: Scalar>(config: &SweepConfig<T>, v: T) -> Result<Option<T>> {
    match config.filter_mode {
        FilterMode::RateFiltering => Ok(Some(wall_rate(&config.cell, v))),
        FilterMode::HardCutoff => {
            let v_max = max_transit_velocity(config.cell.thickness, T::lit(LIFETIME_4D52))?;
            if v.abs() > v_max {
                Ok(None)
            } else {
                Ok(Some(T::zero()))
            }
        }
    }
}

/// Steady-state signals of a single velocity class at every detuning.
///
/// The generator is affine in the coupling detuning (it only shifts the
/// upper-state diagonal), so the class builds two generators once and
/// assembles each detuning as `base + delta_c * shift`.
fn velocity_rows<T: Scalar>(
    config: &SweepConfig<T>,
    detunings: &[T],
    v: T,
) -> Result<VelocityRows<T>> {
    let gamma_l = match class_wall_rate(config, v)? {
        Some(rate) => rate,
        None => return Ok(VelocityRows::zeros(detunings.len())),
    };
    let relax = build_relaxation(&config.scheme, gamma_l, config.trace_mode);
    let mut fields_zero = config.fields.clone();
    fields_zero.delta_c = T::zero();
    let mut fields_one = fields_zero.clone();
    fields_one.delta_c = T::one();
    let base = build_liouvillian(&build_hamiltonian(&config.scheme, &fields_zero, v), &relax);
    let unit = build_liouvillian(&build_hamiltonian(&config.scheme, &fields_one, v), &relax);
    let shift = &unit.matrix - &base.matrix;

    let mut rows = VelocityRows::zeros(0);
    let sum_pops = |rho: &crate::master::DensityMatrix<T>, set: &[usize]| {
        set.iter()
            .fold(T::zero(), |acc, &i| acc + rho.population(i))
    };
    for &dc in detunings {
        let liou = Liouvillian {
            matrix: &base.matrix + &shift * dc,
            layout: Layout::new(N_LEVELS),
            mode: config.trace_mode,
        };
        let (rho, report) =
            steady_state_with(&liou, &config.solver).map_err(|e| Error::SweepPoint {
                delta_c: dc.as_f64(),
                velocity: v.as_f64(),
                source: Box::new(e),
            })?;
        rows.drop.push(rho.matrix[(1, 3)].im);
        rows.fdrop.push(sum_pops(&rho, &config.fdrop_levels));
        rows.fluorescence.push(sum_pops(&rho, &UPPER_LEVELS));
        rows.max_residual = rows.max_residual.maxv(report.residual_norm);
    }
    Ok(rows)
}

/// Velocity-averaged column-density signals at every detuning:
/// (drop, fdrop, fluorescence, worst residual).
fn averaged_rows<T>(config: &SweepConfig<T>, detunings: &[T]) -> Result<(Vec<T>, Vec<T>, Vec<T>, T)>
where
    T: Scalar + Send + Sync,
{
    config.validate()?;
    let grid = boltzmann_grid(&config.cell, config.velocity_nodes, config.velocity_span)?;
    let rows: Vec<VelocityRows<T>> = grid
        .points
        .par_iter()
        .map(|&v| velocity_rows(config, detunings, v))
        .collect::<Result<Vec<_>>>()?;

    let n = detunings.len();
    let mut drop = vec![T::zero(); n];
    let mut fdrop = vec![T::zero(); n];
    let mut fluorescence = vec![T::zero(); n];
    let mut max_residual = T::zero();
    // Fixed left-to-right reduction in grid order keeps runs
    // bit-identical regardless of the worker count.
    for (row, &w) in rows.iter().zip(&grid.weights) {
        for k in 0..n {
            drop[k] = drop[k] + w * row.drop[k];
            fdrop[k] = fdrop[k] + w * row.fdrop[k];
            fluorescence[k] = fluorescence[k] + w * row.fluorescence[k];
        }
        max_residual = max_residual.maxv(row.max_residual);
    }
    let lz = config.cell.thickness;
    for k in 0..n {
        drop[k] = drop[k] * lz;
        fdrop[k] = fdrop[k] * lz;
        fluorescence[k] = fluorescence[k] * lz;
    }
    Ok((drop, fdrop, fluorescence, max_residual))
}

/// Sweeps the coupling detuning and velocity-averages the observables.
pub fn sweep<T>(config: &SweepConfig<T>) -> Result<Spectrum<T>>
where
    T: Scalar + Send + Sync,
{
    let detunings = config.detunings();
    let (drop, fdrop, fluorescence, max_residual) = averaged_rows(config, &detunings)?;
    if let Some((k, &d)) = drop.iter().enumerate().find(|(_, &d)| d < T::zero()) {
        log::warn!(
            "drop signal dipped below zero ({:.3e} at delta_c = {:.3} MHz)",
            d.as_f64(),
            constants::angular_to_mhz(detunings[k].as_f64())
        );
    }
    let metadata = SweepMetadata {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        n_detunings: config.n_detunings,
        velocity_nodes: config.velocity_nodes,
        velocity_span: config.velocity_span.as_f64(),
        thickness: config.cell.thickness.as_f64(),
        temperature: config.cell.temperature.as_f64(),
        filter_mode: match config.filter_mode {
            FilterMode::RateFiltering => "rate-filtering",
            FilterMode::HardCutoff => "hard-cutoff",
        }
        .to_string(),
        trace_mode: match config.trace_mode {
            TraceMode::Conserving => "conserving",
            TraceMode::Verbatim => "verbatim",
        }
        .to_string(),
        normalization: "none".to_string(),
        max_residual: max_residual.as_f64(),
    };
    Ok(Spectrum {
        delta_c: detunings,
        drop,
        fdrop,
        fluorescence,
        metadata,
    })
}

/// All three observables at one coupling detuning.
pub fn point_signals<T>(config: &SweepConfig<T>, delta_c: T) -> Result<PointSignals<T>>
where
    T: Scalar + Send + Sync,
{
    let (drop, fdrop, fluorescence, max_residual) = averaged_rows(config, &[delta_c])?;
    Ok(PointSignals {
        drop: drop[0],
        fdrop: fdrop[0],
        fluorescence: fluorescence[0],
        max_residual,
    })
}

/// Optical-pumping transmission signal at one coupling detuning.
pub fn drop_signal<T>(config: &SweepConfig<T>, delta_c: T) -> Result<T>
where
    T: Scalar + Send + Sync,
{
    Ok(point_signals(config, delta_c)?.drop)
}

/// Fluorescence-detected pumping signal at one coupling detuning.
pub fn fdrop_signal<T>(config: &SweepConfig<T>, delta_c: T) -> Result<T>
where
    T: Scalar + Send + Sync,
{
    Ok(point_signals(config, delta_c)?.fdrop)
}

/// Upper-state fluorescence at one coupling detuning.
pub fn fluorescence_signal<T>(config: &SweepConfig<T>, delta_c: T) -> Result<T>
where
    T: Scalar + Send + Sync,
{
    Ok(point_signals(config, delta_c)?.fluorescence)
}

/// Per-atom state of one velocity class at the parked coupling
/// detuning: (populations, loss, residual).
fn population_row<T: Scalar>(config: &SweepConfig<T>, v: T) -> Result<([T; N_LEVELS], T, T)> {
    let gamma_l = match class_wall_rate(config, v)? {
        Some(rate) => rate,
        None => {
            // A class too fast to complete the two-step excitation stays
            // in the thermal ground mixture.
            let mut pops = [T::zero(); N_LEVELS];
            pops[0] = T::lit(0.5);
            pops[1] = T::lit(0.5);
            return Ok((pops, T::zero(), T::zero()));
        }
    };
    let relax = build_relaxation(&config.scheme, gamma_l, config.trace_mode);
    let h = build_hamiltonian(&config.scheme, &config.fields, v);
    let liou = build_liouvillian(&h, &relax);
    let (rho, report) =
        steady_state_with(&liou, &config.solver).map_err(|e| Error::SweepPoint {
            delta_c: config.fields.delta_c.as_f64(),
            velocity: v.as_f64(),
            source: Box::new(e),
        })?;
    let mut pops = [T::zero(); N_LEVELS];
    for (i, p) in pops.iter_mut().enumerate() {
        *p = rho.population(i);
    }
    Ok((pops, rho.loss, report.residual_norm))
}

/// Ensemble-averaged populations for a list of cell geometries, with
/// the coupling laser parked on the strongest upper-state resonance
/// (delta_c = 0).
///
/// Unlike the column-density signals, each record is normalized by the
/// quadrature weight sum so its populations plus loss add to one.
pub fn reconstruct_populations<T>(
    config: &SweepConfig<T>,
    cells: &[CellConfig<T>],
) -> Result<Vec<PopulationRecord<T>>>
where
    T: Scalar + Send + Sync,
{
    config.validate()?;
    let mut records = Vec::with_capacity(cells.len());
    for cell in cells {
        cell.validate()?;
        let mut cfg = config.clone();
        cfg.cell = *cell;
        cfg.fields.delta_c = T::zero();
        let grid = boltzmann_grid(cell, cfg.velocity_nodes, cfg.velocity_span)?;
        let rows: Vec<([T; N_LEVELS], T, T)> = grid
            .points
            .par_iter()
            .map(|&v| population_row(&cfg, v))
            .collect::<Result<Vec<_>>>()?;

        let mut pops = [T::zero(); N_LEVELS];
        let mut loss = T::zero();
        let mut max_residual = T::zero();
        let mut weight_sum = T::zero();
        for ((p, l, r), &w) in rows.iter().zip(&grid.weights) {
            for i in 0..N_LEVELS {
                pops[i] = pops[i] + w * p[i];
            }
            loss = loss + w * *l;
            max_residual = max_residual.maxv(*r);
            weight_sum = weight_sum + w;
        }
        for p in pops.iter_mut() {
            *p = *p / weight_sum;
        }
        loss = loss / weight_sum;
        let dominant = (2..N_LEVELS).fold(2, |best, i| if pops[i] > pops[best] { i } else { best });
        records.push(PopulationRecord {
            thickness: cell.thickness,
            temperature: cell.temperature,
            populations: pops,
            loss,
            dominant_level: dominant + 1,
            max_residual,
        });
    }
    Ok(records)
}
