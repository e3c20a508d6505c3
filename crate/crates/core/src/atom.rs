//! The seven-level Rb-85 ladder: level energies, laser couplings, and the
//! rotating-frame Hamiltonian.
//!
//! Level order throughout the crate (zero-based indices in brackets):
//! [0] 5S1/2 F=2, [1] 5S1/2 F=3, [2] 5P3/2 F=3, [3] 5P3/2 F=4,
//! [4] 4D5/2 F=3, [5] 4D5/2 F=4, [6] 4D5/2 F=5. The probe couples
//! [1]<->[3]; the coupling beam couples [3] to each of [4], [5], [6].

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probe transition wavelength 5S1/2 -> 5P3/2 (m).
pub const PROBE_WAVELENGTH: f64 = 780.24e-9;
/// Coupling transition wavelength 5P3/2 -> 4D5/2 (m).
pub const COUPLING_WAVELENGTH: f64 = 1529.37e-9;
/// 5P3/2 lifetime (s).
pub const LIFETIME_5P32: f64 = 26.2e-9;
/// 4D5/2 lifetime (s).
pub const LIFETIME_4D52: f64 = 84e-9;

/// Number of coherent levels in the ladder.
pub const N_LEVELS: usize = 7;

/// Level splittings, decay rates and branching weights of the ladder.
/// All frequencies are angular (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelScheme<T: Scalar> {
    /// Ground hyperfine splitting between F=2 and F=3.
    pub omega_hfs: T,
    /// 5P3/2 F=3 <-> F=4 splitting.
    pub delta1: T,
    /// 4D5/2 F=3 <-> F=4 splitting.
    pub delta2: T,
    /// 4D5/2 F=4 <-> F=5 splitting.
    pub delta3: T,
    /// Spontaneous decay rates of levels [2]..[6].
    pub gamma: [T; 5],
    /// Ground-manifold exchange rate between F=2 and F=3.
    pub gamma_12: T,
    /// Self-broadening rate added to every excited level.
    pub gamma_self: T,
    /// Wall-reset branching weight of the ground manifold.
    pub branching_a: T,
    /// Wall-collision branching weight of the 5P3/2 levels.
    pub branching_b: T,
    /// Wall-collision branching weight of the 4D5/2 levels.
    pub branching_c: T,
}

impl<T: Scalar> LevelScheme<T> {
    /// Rb-85 ladder with literature splittings and lifetimes. The two
    /// 4D5/2 splittings have no established reference value and must be
    /// supplied by the caller (rad/s).
    pub fn rb85(delta2: T, delta3: T) -> Result<Self> {
        let mhz = |x: f64| T::lit(std::f64::consts::TAU * 1e6 * x);
        let scheme = LevelScheme {
            omega_hfs: mhz(3035.0),
            delta1: mhz(120.7),
            delta2,
            delta3,
            gamma: [mhz(6.06), mhz(6.06), mhz(1.97), mhz(1.97), mhz(1.97)],
            gamma_12: mhz(0.01),
            gamma_self: mhz(1.0),
            branching_a: T::lit(0.5),
            branching_b: T::lit(0.5),
            branching_c: T::lit(0.5),
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega_hfs", self.omega_hfs),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("delta3", self.delta3),
        ] {
            if value <= T::zero() {
                return Err(Error::NonPhysicalInput(format!(
                    "level splitting {name} must be positive"
                )));
            }
        }
        for rate in self.gamma.iter().chain([&self.gamma_12, &self.gamma_self]) {
            if *rate < T::zero() {
                return Err(Error::NonPhysicalInput(
                    "decay rates must be non-negative".into(),
                ));
            }
        }
        for (name, value) in [
            ("a", self.branching_a),
            ("b", self.branching_b),
            ("c", self.branching_c),
        ] {
            if value < T::zero() || value > T::one() {
                return Err(Error::NonPhysicalInput(format!(
                    "branching weight {name} must lie in [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Laser parameters: Rabi frequencies, detunings, wavevectors, geometry.
/// All frequencies are angular (rad/s), wavevectors rad/m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig<T: Scalar> {
    /// Probe Rabi frequency on [1]<->[3].
    pub omega_p: T,
    /// Coupling Rabi frequency carried by the strongest line, [3]<->[6].
    pub omega_c_base: T,
    /// Per-line coupling Rabi frequencies on [3]<->[4], [3]<->[5], [3]<->[6].
    pub omega_c_45: T,
    pub omega_c_46: T,
    pub omega_c_47: T,
    /// Probe detuning.
    pub delta_p: T,
    /// Coupling detuning.
    pub delta_c: T,
    /// Probe wavevector magnitude.
    pub k_p: T,
    /// Coupling wavevector magnitude.
    pub k_c: T,
    /// Coupling beam travels against the probe (the experimental
    /// geometry); false means co-propagating.
    pub counter_propagating: bool,
}

impl<T: Scalar> FieldConfig<T> {
    /// Counter-propagating probe/coupling beams at the Rb-85 wavelengths,
    /// with the coupling power split across the three hyperfine lines by
    /// their exact transition strengths.
    pub fn rb85_beams(omega_p: T, omega_c_base: T, delta_p: T, delta_c: T) -> Result<Self> {
        let strengths = coupling_strengths()?;
        let (omega_c_45, omega_c_46, omega_c_47) = coupling_rabi_split(omega_c_base, strengths);
        let fields = FieldConfig {
            omega_p,
            omega_c_base,
            omega_c_45,
            omega_c_46,
            omega_c_47,
            delta_p,
            delta_c,
            k_p: T::lit(crate::constants::wavenumber(PROBE_WAVELENGTH)),
            k_c: T::lit(crate::constants::wavenumber(COUPLING_WAVELENGTH)),
            counter_propagating: true,
        };
        fields.validate()?;
        Ok(fields)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega_p", self.omega_p),
            ("omega_c_base", self.omega_c_base),
            ("omega_c_45", self.omega_c_45),
            ("omega_c_46", self.omega_c_46),
            ("omega_c_47", self.omega_c_47),
        ] {
            if value < T::zero() {
                return Err(Error::NonPhysicalInput(format!(
                    "Rabi frequency {name} must be non-negative (a real field amplitude)"
                )));
            }
        }
        if self.k_p <= T::zero() || self.k_c <= T::zero() {
            return Err(Error::NonPhysicalInput(
                "wavevectors must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Exact strength factors of the 5P3/2 F=4 -> 4D5/2 F' in {3,4,5} lines.
pub fn coupling_strengths<T: Scalar>() -> Result<[T; 3]> {
    use crate::angular::{transition_strength, HalfInt};
    let f4 = HalfInt::from_int(4);
    let j = HalfInt::from_twice(3);
    let jp = HalfInt::from_twice(5);
    let i = HalfInt::from_twice(5);
    Ok([
        transition_strength(f4, HalfInt::from_int(3), j, jp, i)?,
        transition_strength(f4, HalfInt::from_int(4), j, jp, i)?,
        transition_strength(f4, HalfInt::from_int(5), j, jp, i)?,
    ])
}

/// Splits a base coupling Rabi frequency across the three hyperfine
/// lines in proportion to the square roots of their transition
/// strengths, normalised so the strongest line carries the base value.
pub fn coupling_rabi_split<T: Scalar>(omega_c_base: T, strengths: [T; 3]) -> (T, T, T) {
    let s_max = strengths
        .iter()
        .copied()
        .fold(T::zero(), |acc, s| acc.maxv(s));
    if s_max <= T::zero() || omega_c_base == T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    let scale = |s: T| omega_c_base * (s / s_max).sqrt();
    (
        scale(strengths[0]),
        scale(strengths[1]),
        scale(strengths[2]),
    )
}

/// Rotating-frame Hamiltonian of the ladder for one longitudinal
/// velocity class (rad/s). The Doppler effect enters through the
/// effective detunings Delta_p - k_p v and, for counter-propagating
/// beams, Delta_c + k_c v.
pub fn build_hamiltonian<T: Scalar>(
    scheme: &LevelScheme<T>,
    fields: &FieldConfig<T>,
    v: T,
) -> DMatrix<Complex<T>> {
    let dp = fields.delta_p - fields.k_p * v;
    let dc = if fields.counter_propagating {
        fields.delta_c + fields.k_c * v
    } else {
        fields.delta_c - fields.k_c * v
    };
    let diag = [
        -scheme.omega_hfs,
        T::zero(),
        dp - scheme.delta1,
        dp,
        dp + dc + scheme.delta2 + scheme.delta3,
        dp + dc + scheme.delta3,
        dp + dc,
    ];
    let mut h = DMatrix::from_element(N_LEVELS, N_LEVELS, Complex::new(T::zero(), T::zero()));
    for (i, &e) in diag.iter().enumerate() {
        h[(i, i)] = Complex::new(e, T::zero());
    }
    let mut couple = |i: usize, j: usize, omega: T| {
        h[(i, j)] = Complex::new(omega, T::zero());
        h[(j, i)] = Complex::new(omega, T::zero());
    };
    couple(1, 3, fields.omega_p);
    couple(3, 4, fields.omega_c_45);
    couple(3, 5, fields.omega_c_46);
    couple(3, 6, fields.omega_c_47);
    h
}
