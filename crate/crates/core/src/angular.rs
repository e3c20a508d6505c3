//! Angular-momentum algebra: half-integer bookkeeping, Wigner 6-j symbols,
//! hyperfine transition strengths and dipole matrix elements.
//!
//! The 6-j symbol is evaluated from the Racah single-sum formula with exact
//! big-rational factorial arithmetic; only the final square root and the
//! conversion to the requested scalar type are floating point. That keeps
//! cancellation out of the alternating sum entirely.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Angular momentum quantum number stored as twice its value, so both
/// integers and half-odd-integers are exact.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    /// Builds from twice the value: `from_twice(3)` is 3/2.
    pub fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    /// Builds from an integer quantum number.
    pub fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// Parses a float that must be an exact integer or half-odd-integer.
    pub fn try_from_f64(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        let rounded = twice.round();
        if !twice.is_finite() || (twice - rounded).abs() > 1e-9 {
            return Err(Error::MismatchedQuantumNumbers(format!(
                "{x} is not an integer or half-integer"
            )));
        }
        Ok(HalfInt {
            twice: rounded as i32,
        })
    }

    pub fn twice(self) -> i32 {
        self.twice
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// Multiplicity 2j + 1.
    pub fn multiplicity(self) -> i32 {
        self.twice + 1
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl std::str::FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"2"`, `"1.5"` and `"3/2"`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some((num, den)) = s.split_once('/') {
            let n: i32 = num
                .trim()
                .parse()
                .map_err(|_| Error::MismatchedQuantumNumbers(format!("cannot parse {s:?}")))?;
            let d: i32 = den
                .trim()
                .parse()
                .map_err(|_| Error::MismatchedQuantumNumbers(format!("cannot parse {s:?}")))?;
            if d == 2 {
                return Ok(HalfInt { twice: n });
            }
            if d == 1 {
                return Ok(HalfInt { twice: 2 * n });
            }
            return Err(Error::MismatchedQuantumNumbers(format!(
                "denominator of {s:?} must be 1 or 2"
            )));
        }
        let x: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::MismatchedQuantumNumbers(format!("cannot parse {s:?}")))?;
        HalfInt::try_from_f64(x)
    }
}

/// Triangle rule |a - b| <= c <= a + b with integer perimeter.
pub fn triangle(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (ta, tb, tc) = (a.twice, b.twice, c.twice);
    tc >= (ta - tb).abs() && tc <= ta + tb && (ta + tb + tc) % 2 == 0
}

fn factorial_table(n_max: usize) -> Vec<BigInt> {
    let mut table = Vec::with_capacity(n_max + 1);
    table.push(BigInt::from(1));
    for k in 1..=n_max {
        let next = &table[k - 1] * BigInt::from(k as u64);
        table.push(next);
    }
    table
}

/// Triangle coefficient Delta(a,b,c) as an exact rational, with all three
/// half-integer arguments passed as twice-values and assumed to satisfy
/// the triangle rule.
fn triangle_coefficient(ta: i32, tb: i32, tc: i32, fact: &[BigInt]) -> BigRational {
    let f = |n: i32| fact[(n / 2) as usize].clone();
    BigRational::new(
        f(ta + tb - tc) * f(ta - tb + tc) * f(-ta + tb + tc),
        f(ta + tb + tc) * BigInt::from((ta + tb + tc) / 2 + 1),
    )
}

/// Wigner 6-j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Returns zero whenever a triangle condition fails or any argument is
/// negative, so selection rules never need separate handling at call
/// sites. The alternating Racah sum and the four triangle coefficients
/// are carried as exact rationals; the result is accurate to a few ulps.
pub fn wigner_6j<T: Scalar>(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> T {
    let js = [j1, j2, j3, j4, j5, j6];
    if js.iter().any(|j| j.is_negative()) {
        return T::zero();
    }
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if triads.iter().any(|&(a, b, c)| !triangle(a, b, c)) {
        return T::zero();
    }

    // Sum limits; all quantities below are plain integers.
    let a = [
        (j1.twice + j2.twice + j3.twice) / 2,
        (j1.twice + j5.twice + j6.twice) / 2,
        (j4.twice + j2.twice + j6.twice) / 2,
        (j4.twice + j5.twice + j3.twice) / 2,
    ];
    let b = [
        (j1.twice + j2.twice + j4.twice + j5.twice) / 2,
        (j1.twice + j3.twice + j4.twice + j6.twice) / 2,
        (j2.twice + j3.twice + j5.twice + j6.twice) / 2,
    ];
    let k_min = *a.iter().max().unwrap();
    let k_max = *b.iter().min().unwrap();
    if k_max < k_min {
        return T::zero();
    }

    let fact = factorial_table((k_max + 1) as usize);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let mut denom = BigInt::from(1);
        for ai in a {
            denom *= &fact[(k - ai) as usize];
        }
        for bi in b {
            denom *= &fact[(bi - k) as usize];
        }
        let term = BigRational::new(fact[(k + 1) as usize].clone(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let mut delta_product = BigRational::new(BigInt::from(1), BigInt::from(1));
    for &(x, y, z) in &triads {
        delta_product *= triangle_coefficient(x.twice, y.twice, z.twice, &fact);
    }

    let magnitude = delta_product.to_f64().unwrap_or(0.0).sqrt();
    let signed = sum.to_f64().unwrap_or(0.0) * magnitude;
    T::lit(signed)
}

/// Hyperfine transition strength factor
/// S = (2F' + 1)(2J + 1) {J J' 1; F' F I}^2 for an electric-dipole line
/// between hyperfine levels F (lower, electronic J) and F' (upper,
/// electronic J') at nuclear spin I.
///
/// Forbidden combinations give zero; for fixed F the strengths over all
/// reachable F' sum to one.
pub fn transition_strength<T: Scalar>(
    f: HalfInt,
    f_prime: HalfInt,
    j: HalfInt,
    j_prime: HalfInt,
    i: HalfInt,
) -> Result<T> {
    for (label, q) in [
        ("F", f),
        ("Fprime", f_prime),
        ("J", j),
        ("Jprime", j_prime),
        ("I", i),
    ] {
        if q.is_negative() {
            return Err(Error::MismatchedQuantumNumbers(format!(
                "{label} = {q} must be non-negative"
            )));
        }
    }
    if !triangle(j, i, f) {
        return Err(Error::MismatchedQuantumNumbers(format!(
            "F = {f} is not a valid coupling of J = {j} with I = {i}"
        )));
    }
    if !triangle(j_prime, i, f_prime) {
        return Err(Error::MismatchedQuantumNumbers(format!(
            "Fprime = {f_prime} is not a valid coupling of Jprime = {j_prime} with I = {i}"
        )));
    }
    let six_j: T = wigner_6j(j, j_prime, HalfInt::ONE, f_prime, f, i);
    let mult = T::lit(f64::from(f_prime.multiplicity() * j.multiplicity()));
    Ok(mult * six_j * six_j)
}

/// Reduced dipole matrix element (C*m) recovered from the excited-state
/// lifetime:
/// |<Ji||d||Jj>| = sqrt( (3 pi eps0 hbar c^3 / omega0^3) (1/tau) (2Jj+1)/(2Ji+1) ).
pub fn reduced_dipole<T: Scalar>(
    omega0: T,
    tau: T,
    j_lower: HalfInt,
    j_upper: HalfInt,
) -> Result<T> {
    if omega0 <= T::zero() || tau <= T::zero() {
        return Err(Error::NonPhysicalInput(
            "reduced_dipole requires omega0 > 0 and tau > 0".into(),
        ));
    }
    if j_lower.is_negative() || j_upper.is_negative() {
        return Err(Error::MismatchedQuantumNumbers(
            "electronic J values must be non-negative".into(),
        ));
    }
    let prefactor = T::lit(
        3.0 * std::f64::consts::PI
            * crate::constants::EPSILON_0
            * crate::constants::HBAR
            * crate::constants::SPEED_OF_LIGHT.powi(3),
    );
    let degeneracy =
        T::lit(f64::from(j_upper.multiplicity())) / T::lit(f64::from(j_lower.multiplicity()));
    let d_squared = prefactor / omega0.powi(3) / tau * degeneracy;
    Ok(d_squared.sqrt())
}

/// Dipole matrix element between hyperfine levels,
/// d = d_reduced * (-1)^(F' + J + 1 + I) * sqrt(S_FF').
///
/// The phase exponent is an integer for any valid electric-dipole
/// coupling, so the result is real up to sign; the complex return type
/// keeps half-odd exponents well-defined should an exotic label set
/// produce one.
pub fn hyperfine_dipole<T: Scalar>(
    reduced: T,
    f: HalfInt,
    f_prime: HalfInt,
    j: HalfInt,
    j_prime: HalfInt,
    i: HalfInt,
) -> Result<nalgebra::Complex<T>> {
    let strength: T = transition_strength(f, f_prime, j, j_prime, i)?;
    // (-1)^x = i^(2x); with x = F' + J + 1 + I the doubled exponent is
    // 2 F' + 2 J + 2 I + 4.
    let twice_exponent = (f_prime.twice + j.twice + i.twice + 4).rem_euclid(4);
    let phase = match twice_exponent {
        0 => nalgebra::Complex::new(T::one(), T::zero()),
        1 => nalgebra::Complex::new(T::zero(), T::one()),
        2 => nalgebra::Complex::new(-T::one(), T::zero()),
        _ => nalgebra::Complex::new(T::zero(), -T::one()),
    };
    Ok(phase.scale(reduced * strength.sqrt()))
}
