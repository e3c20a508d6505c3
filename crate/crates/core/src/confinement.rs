//! Cell-geometry physics: wall-collision rates, transit-based velocity
//! limits, resonance-velocity conditions, and Maxwell-Boltzmann velocity
//! quadrature for a thin vapor cell.

use crate::constants;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How thin-cell confinement suppresses fast velocity classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterMode {
    /// Every class keeps its velocity-dependent wall-collision rate
    /// Gamma_L(v); fast atoms are damped smoothly. The default.
    RateFiltering,
    /// Classes faster than the transit limit L_z / tau(4D5/2) are
    /// excluded outright and the survivors evolve without a wall rate.
    HardCutoff,
}

/// Geometry and thermodynamics of one vapor cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellConfig<T: Scalar> {
    /// Gap between the cell windows along the beam axis (m).
    pub thickness: T,
    /// Vapor temperature (K).
    pub temperature: T,
    /// Atomic mass (kg).
    pub atomic_mass: T,
    /// Use the angular-frequency wall-rate convention 2*pi*|v|/(L_z/2)
    /// instead of the default collision rate |v|/(L_z/2).
    pub two_pi_convention: bool,
    /// Optional floor on the wall rate, expressed as a fraction of the
    /// thermal rate u/(L_z/2); zero disables the floor so slow classes
    /// keep their genuinely small collision rates.
    pub floor_fraction: T,
}

impl<T: Scalar> CellConfig<T> {
    /// A cell of the given thickness (m) and temperature (K) filled with
    /// Rb-85, default rate convention, no rate floor.
    pub fn new(thickness: T, temperature: T) -> Result<Self> {
        let cell = CellConfig {
            thickness,
            temperature,
            atomic_mass: T::lit(constants::RB85_MASS),
            two_pi_convention: false,
            floor_fraction: T::zero(),
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thickness <= T::zero() {
            return Err(Error::NonPhysicalInput(
                "cell thickness must be positive".into(),
            ));
        }
        if self.temperature <= T::zero() {
            return Err(Error::NonPhysicalInput(
                "cell temperature must be positive".into(),
            ));
        }
        if self.atomic_mass <= T::zero() {
            return Err(Error::NonPhysicalInput(
                "atomic mass must be positive".into(),
            ));
        }
        if self.floor_fraction < T::zero() {
            return Err(Error::NonPhysicalInput(
                "wall-rate floor fraction must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Most probable longitudinal speed of this cell's vapor.
    pub fn most_probable_speed(&self) -> T {
        most_probable_speed(self.temperature, self.atomic_mass)
            .expect("validated cell has positive T and m")
    }

    /// Wall-collision rate for an atom moving at longitudinal velocity
    /// `v` (m/s); see [`wall_rate`].
    pub fn wall_rate(&self, v: T) -> T {
        wall_rate(self, v)
    }
}

/// Most probable speed u = sqrt(2 k_B T / m) of a thermal vapor.
pub fn most_probable_speed<T: Scalar>(temperature: T, mass: T) -> Result<T> {
    if temperature <= T::zero() || mass <= T::zero() {
        return Err(Error::NonPhysicalInput(
            "most_probable_speed requires T > 0 and m > 0".into(),
        ));
    }
    let two = T::lit(2.0);
    Ok((two * T::lit(constants::BOLTZMANN) * temperature / mass).sqrt())
}

/// Rate at which an atom with longitudinal velocity `v` reaches a cell
/// window, |v| / (L_z / 2), optionally scaled by 2*pi under the
/// angular-frequency convention. With a positive `floor_fraction` f the
/// speed entering the formula never drops below f*u, which keeps
/// near-stationary classes from becoming artificially long-lived.
pub fn wall_rate<T: Scalar>(cell: &CellConfig<T>, v: T) -> T {
    let half_gap = cell.thickness / T::lit(2.0);
    let mut speed = v.abs();
    if cell.floor_fraction > T::zero() {
        speed = speed.maxv(cell.floor_fraction * cell.most_probable_speed());
    }
    let rate = speed / half_gap;
    if cell.two_pi_convention {
        rate * T::lit(std::f64::consts::TAU)
    } else {
        rate
    }
}

/// Velocity at which a Doppler shift bridges a level splitting:
/// v = splitting / k.
pub fn resonance_velocity<T: Scalar>(splitting: T, k: T) -> Result<T> {
    if k <= T::zero() {
        return Err(Error::NonPhysicalInput(
            "resonance_velocity requires a positive wavevector".into(),
        ));
    }
    Ok(splitting / k)
}

/// Fastest longitudinal velocity whose wall-to-wall transit still takes
/// at least one lifetime tau: v_max = L_z / tau.
pub fn max_transit_velocity<T: Scalar>(thickness: T, tau: T) -> Result<T> {
    if thickness <= T::zero() || tau <= T::zero() {
        return Err(Error::NonPhysicalInput(
            "max_transit_velocity requires L_z > 0 and tau > 0".into(),
        ));
    }
    Ok(thickness / tau)
}

/// Discretised Maxwell-Boltzmann velocity distribution: quadrature nodes
/// and weights that already include the thermal weight
/// W(v) = exp(-v^2/u^2) / (u sqrt(pi)).
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid<T: Scalar> {
    /// Velocity nodes (m/s), strictly increasing, symmetric about zero.
    pub points: Vec<T>,
    /// Non-negative quadrature weights; sum approaches erf(span) for a
    /// grid spanning +-span*u.
    pub weights: Vec<T>,
}

impl<T: Scalar> VelocityGrid<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nodes and weights for the mirror-image geometry (every velocity
    /// negated). Weights are preserved node-for-node.
    pub fn mirrored(&self) -> Self {
        let mut points: Vec<T> = self.points.iter().map(|&v| -v).collect();
        points.reverse();
        let mut weights = self.weights.clone();
        weights.reverse();
        VelocityGrid { points, weights }
    }

    /// Weighted sum of per-node values, Sum_i w_i f(v_i).
    pub fn average<F: Fn(T) -> T>(&self, f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&v, &w)| acc + w * f(v))
    }
}

/// Trapezoid quadrature of the thermal distribution over
/// [-span*u, +span*u] with `n_points` equally spaced nodes. The weights
/// absorb W(v), so they sum to erf(span); spans of at least 3-4 thermal
/// widths keep the truncated tail below common tolerances.
pub fn boltzmann_grid<T: Scalar>(
    cell: &CellConfig<T>,
    n_points: usize,
    span_sigmas: T,
) -> Result<VelocityGrid<T>> {
    if n_points < 3 {
        return Err(Error::InvalidGrid(format!(
            "need at least 3 velocity nodes, got {n_points}"
        )));
    }
    if span_sigmas <= T::zero() {
        return Err(Error::InvalidGrid(
            "grid span must be a positive number of thermal widths".into(),
        ));
    }
    cell.validate()?;
    let u = cell.most_probable_speed();
    let v_max = span_sigmas * u;
    let m = n_points - 1;
    let m_t = T::lit(m as f64);
    let step = T::lit(2.0) * v_max / m_t;
    let norm = T::one() / (u * T::lit(std::f64::consts::PI).sqrt());
    let mut points = Vec::with_capacity(n_points);
    let mut weights = Vec::with_capacity(n_points);
    for i in 0..n_points {
        // (2i - m)/m runs from -1 to +1 exactly antisymmetrically, so
        // node +v and node -v are floating-point mirror images.
        let t = T::lit((2 * i as i64 - m as i64) as f64) / m_t;
        let v = t * v_max;
        let thermal = norm * (-(v / u) * (v / u)).exp();
        let trapezoid = if i == 0 || i == m {
            step / T::lit(2.0)
        } else {
            step
        };
        points.push(v);
        weights.push(thermal * trapezoid);
    }
    Ok(VelocityGrid { points, weights })
}
