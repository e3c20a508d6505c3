//! Steady-state and time-domain solution of the master equation.
//!
//! The steady state comes from a dense constrained linear solve: one
//! redundant row of the Liouvillian is replaced by the unit-trace
//! condition and the 50x50 system is LU-factorised. Rank deficiency
//! beyond the trace freedom falls back to an SVD null-space analysis.
//! The explicit time integrator exists chiefly as an independent
//! verification path for the steady-state solver.

use nalgebra::{DMatrix, DVector};

use crate::confinement::VelocityGrid;
use crate::error::{Error, Result};
use crate::master::{devectorize, vectorize, DensityMatrix, Liouvillian};
use crate::scalar::Scalar;

/// Numerical knobs of the solver, all overridable.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T: Scalar> {
    /// Acceptable steady-state residual, measured as
    /// max|L x| / max|L| (a backward-error style figure that is
    /// invariant under rescaling all rates).
    pub residual_tol: T,
    /// LU pivot ratio below which the constrained system is treated as
    /// rank deficient.
    pub pivot_tol: T,
    /// Bound on the per-step local error estimate of the integrator.
    pub step_error_tol: T,
    /// Iterations of the power method used to estimate the fastest
    /// eigenvalue before choosing the integration step.
    pub power_iterations: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            residual_tol: T::lit(1e-10),
            pivot_tol: T::lit(1e-12),
            step_error_tol: T::lit(1e-8),
            power_iterations: 40,
        }
    }
}

/// Diagnostics of one steady-state solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport<T: Scalar> {
    /// max|L x| / max|L| of the returned state.
    pub residual_norm: T,
    /// Independent stationary directions found (1 for a unique steady
    /// state; larger values signal a decoupled sector).
    pub null_space_dimension: usize,
    /// Rank of the generator implied by the solve path.
    pub rank: usize,
}

/// Unique steady state of the generator with unit total population.
///
/// The loss row (or, when the loss slot is dynamically decoupled, one
/// population row plus a loss pin) is replaced by the trace constraint;
/// the system is solved by LU with partial pivoting. If the pivots
/// reveal extra rank deficiency the steady state is taken from the SVD
/// null space, picking the unit-trace element closest to the thermal
/// ground mixture. Generators that do not conserve population (the
/// verbatim bookkeeping under drive) have no stationary density matrix;
/// this surfaces as a `NoSteadyState` residual error.
pub fn steady_state<T: Scalar>(
    liou: &Liouvillian<T>,
) -> Result<(DensityMatrix<T>, SolveReport<T>)> {
    steady_state_with(liou, &SolverOptions::default())
}

pub fn steady_state_with<T: Scalar>(
    liou: &Liouvillian<T>,
    opts: &SolverOptions<T>,
) -> Result<(DensityMatrix<T>, SolveReport<T>)> {
    let layout = liou.layout;
    let n = layout.n;
    let dim = layout.dim();
    let a = &liou.matrix;
    let scale = {
        let s = a.amax();
        if s > T::zero() {
            s
        } else {
            T::one()
        }
    };

    let loss_row = layout.loss();
    let loss_dynamic =
        (0..dim).any(|k| a[(loss_row, k)] != T::zero() || a[(k, loss_row)] != T::zero());

    // Constraint rows are scaled to the magnitude of the dynamics so the
    // pivot-ratio rank test stays meaningful.
    let mut system = a.clone();
    let mut rhs = DVector::zeros(dim);
    if loss_dynamic {
        // population flows through the loss slot: constrain the full trace
        system.fill_row(loss_row, T::zero());
        for i in 0..n {
            system[(loss_row, layout.diag(i))] = scale;
        }
        system[(loss_row, loss_row)] = scale;
        rhs[loss_row] = scale;
    } else {
        // loss slot inert: pin it to zero and constrain the coherent trace
        system.fill_row(loss_row, T::zero());
        system[(loss_row, loss_row)] = scale;
        let trace_row = layout.diag(0);
        system.fill_row(trace_row, T::zero());
        for i in 0..n {
            system[(trace_row, layout.diag(i))] = scale;
        }
        rhs[trace_row] = scale;
    }

    let lu = system.lu();
    let pivot_ratio = {
        let diag = lu.u().diagonal();
        let max = diag.amax();
        let min = diag.iter().fold(max, |acc, d| acc.minv(d.abs()));
        if max > T::zero() {
            min / max
        } else {
            T::zero()
        }
    };

    let (x, null_dim) = if pivot_ratio > opts.pivot_tol {
        match lu.solve(&rhs) {
            Some(x) => (x, 1),
            None => return null_space_state(liou, scale, opts),
        }
    } else {
        return null_space_state(liou, scale, opts);
    };

    finish_solve(liou, x, scale, null_dim, opts)
}

/// Rank-deficient path: orthonormal null basis from the SVD, then the
/// unit-trace combination closest to the thermal ground mixture.
fn null_space_state<T: Scalar>(
    liou: &Liouvillian<T>,
    scale: T,
    opts: &SolverOptions<T>,
) -> Result<(DensityMatrix<T>, SolveReport<T>)> {
    let layout = liou.layout;
    let dim = layout.dim();
    let svd = liou.matrix.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .expect("SVD of the generator must produce right singular vectors");
    let sigma_max = svd.singular_values.amax();
    let cutoff = opts.pivot_tol
        * if sigma_max > T::zero() {
            sigma_max
        } else {
            T::one()
        };
    let null_rows: Vec<usize> = (0..dim)
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .collect();
    let null_dim = null_rows.len();
    if null_dim == 0 {
        return Err(Error::DegenerateNullSpace { null_dim: 0 });
    }

    let trace = liou.trace_functional();
    let thermal = vectorize(&DensityMatrix::thermal_ground(layout.n), &layout);
    // coordinates of the constraint and of the target in the null basis
    let mut t_coeff = DVector::zeros(null_dim);
    let mut a_coeff = DVector::zeros(null_dim);
    for (idx, &row) in null_rows.iter().enumerate() {
        let basis = v_t.row(row).transpose();
        t_coeff[idx] = trace.dot(&basis);
        a_coeff[idx] = thermal.dot(&basis);
    }
    let tt = t_coeff.dot(&t_coeff);
    if tt <= T::default_epsilon() * T::lit(dim as f64) {
        // every stationary direction is traceless: nothing normalisable
        return Err(Error::DegenerateNullSpace { null_dim });
    }
    let shift = (T::one() - a_coeff.dot(&t_coeff)) / tt;
    let mut x = DVector::zeros(dim);
    for (idx, &row) in null_rows.iter().enumerate() {
        let c = a_coeff[idx] + shift * t_coeff[idx];
        x.axpy(c, &v_t.row(row).transpose(), T::one());
    }

    finish_solve(liou, x, scale, null_dim, opts)
}

fn finish_solve<T: Scalar>(
    liou: &Liouvillian<T>,
    x: DVector<T>,
    scale: T,
    null_dim: usize,
    opts: &SolverOptions<T>,
) -> Result<(DensityMatrix<T>, SolveReport<T>)> {
    let residual = (&liou.matrix * &x).amax() / scale;
    if residual > opts.residual_tol {
        return Err(Error::NoSteadyState {
            residual: residual.as_f64(),
        });
    }
    let report = SolveReport {
        residual_norm: residual,
        null_space_dimension: null_dim,
        rank: liou.dim() - null_dim,
    };
    Ok((devectorize(&x, &liou.layout), report))
}

/// Classic fixed-step 4th-order explicit integration of
/// d vec(rho)/dt = L vec(rho) up to `t_final`.
///
/// The step is the smaller of `dt_max` and 0.1 divided by a power-method
/// estimate of the fastest eigenvalue. Hermiticity is structural (the
/// state lives in the real Hermitian parametrisation), and every step
/// carries a step-doubling local error estimate.
pub fn time_evolve<T: Scalar>(
    liou: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t_final: T,
    dt_max: T,
) -> Result<DensityMatrix<T>> {
    time_evolve_with(liou, rho0, t_final, dt_max, &SolverOptions::default())
}

pub fn time_evolve_with<T: Scalar>(
    liou: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t_final: T,
    dt_max: T,
    opts: &SolverOptions<T>,
) -> Result<DensityMatrix<T>> {
    if t_final <= T::zero() {
        return Ok(rho0.clone());
    }
    if dt_max <= T::zero() {
        return Err(Error::NonPhysicalInput("dt_max must be positive".into()));
    }
    let a = &liou.matrix;
    let layout = liou.layout;
    let mut x = vectorize(rho0, &layout);
    if a.amax() == T::zero() {
        return Ok(rho0.clone());
    }

    let lambda = fastest_rate(a, opts.power_iterations);
    let dt_stable = if lambda > T::zero() {
        T::lit(0.1) / (T::lit(2.0) * lambda)
    } else {
        dt_max
    };
    let dt_target = dt_max.minv(dt_stable);
    let n_steps = (t_final.as_f64() / dt_target.as_f64()).ceil().max(1.0) as usize;
    let dt = t_final / T::lit(n_steps as f64);
    let half = dt / T::lit(2.0);

    for _ in 0..n_steps {
        let coarse = rk4_step(a, &x, dt);
        let mid = rk4_step(a, &x, half);
        let fine = rk4_step(a, &mid, half);
        let estimate = (&coarse - &fine).amax() / T::lit(15.0);
        if estimate > opts.step_error_tol {
            return Err(Error::StepSizeTooLarge {
                estimated_error: estimate.as_f64(),
            });
        }
        x = fine;
    }
    Ok(devectorize(&x, &layout))
}

/// Power-method estimate of the spectral radius.
fn fastest_rate<T: Scalar>(a: &DMatrix<T>, iterations: usize) -> T {
    let dim = a.nrows();
    let mut y = DVector::from_element(dim, T::one() / T::lit(dim as f64).sqrt());
    let mut best = T::zero();
    for _ in 0..iterations {
        let z = a * &y;
        let norm = z.norm();
        if norm == T::zero() {
            return T::zero();
        }
        best = best.maxv(norm / y.norm());
        y = z / norm;
    }
    best
}

fn rk4_step<T: Scalar>(a: &DMatrix<T>, x: &DVector<T>, dt: T) -> DVector<T> {
    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let k1 = a * x;
    let k2 = a * (x + &k1 * half);
    let k3 = a * (x + &k2 * half);
    let k4 = a * (x + &k3 * dt);
    x + (k1 + k2 * two + k3 * two + k4) * sixth
}

/// Thermal average over the velocity grid: Sum_i w_i value_i, summed in
/// grid order for bit-level determinism regardless of how the values
/// were produced.
pub fn velocity_average<T, V>(values: &[V], grid: &VelocityGrid<T>) -> Result<V>
where
    T: Scalar,
    V: Copy + num_traits::Zero + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
{
    if values.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "{} values for {} velocity nodes",
            values.len(),
            grid.len()
        )));
    }
    Ok(values
        .iter()
        .zip(&grid.weights)
        .fold(V::zero(), |acc, (&value, &w)| acc + value * w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{build_hamiltonian, FieldConfig, LevelScheme, N_LEVELS};
    use crate::confinement::{boltzmann_grid, CellConfig};
    use crate::master::{
        build_liouvillian, build_relaxation, restrict_hamiltonian, RelaxationStructure, TraceMode,
    };
    use approx::assert_abs_diff_eq;
    use nalgebra::Complex;

    const TAU: f64 = std::f64::consts::TAU;

    fn natural_scheme() -> LevelScheme<f64> {
        let mut s = LevelScheme::rb85(TAU * 20e6, TAU * 25e6).unwrap();
        s.omega_hfs = 3.0;
        s.delta1 = 0.7;
        s.delta2 = 0.4;
        s.delta3 = 0.3;
        s.gamma = [0.9, 0.8, 0.3, 0.25, 0.2];
        s.gamma_12 = 0.05;
        s.gamma_self = 0.1;
        s
    }

    fn natural_fields(omega_p: f64, omega_c: f64, dp: f64, dc: f64) -> FieldConfig<f64> {
        let mut f = FieldConfig::rb85_beams(omega_p, omega_c, dp, dc).unwrap();
        f.k_p = 1.3;
        f.k_c = 0.8;
        f
    }

    /// Two-level system |g>, |e> with coupling omega, detuning delta,
    /// decay gamma from |e> back to |g>.
    fn two_level(omega: f64, delta: f64, gamma: f64) -> Liouvillian<f64> {
        let mut h = nalgebra::DMatrix::from_element(2, 2, Complex::new(0.0, 0.0));
        h[(1, 1)] = Complex::new(delta, 0.0);
        h[(0, 1)] = Complex::new(omega, 0.0);
        h[(1, 0)] = Complex::new(omega, 0.0);
        let mut relax = RelaxationStructure::none(2, TraceMode::Conserving);
        relax.total_decay[1] = gamma;
        if gamma > 0.0 {
            relax.repopulation.push((1, 0, 1.0));
        }
        build_liouvillian(&h, &relax)
    }

    #[test]
    fn unlit_vapor_relaxes_to_the_ground_mixture() {
        let s = natural_scheme();
        let f = natural_fields(0.0, 0.0, 0.2, -0.1);
        let h = build_hamiltonian(&s, &f, 0.0);
        let relax = build_relaxation(&s, 0.0, TraceMode::Conserving);
        let liou = build_liouvillian(&h, &relax);
        let (rho, report) = steady_state(&liou).unwrap();
        assert_abs_diff_eq!(rho.population(0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.population(1), 0.5, epsilon = 1e-12);
        for i in 2..N_LEVELS {
            assert_abs_diff_eq!(rho.population(i), 0.0, epsilon = 1e-12);
        }
        assert_eq!(rho.loss, 0.0);
        assert!(report.residual_norm < 1e-12);
        assert_eq!(report.null_space_dimension, 1);
    }

    #[test]
    fn two_level_steady_state_matches_the_closed_form() {
        let omega = 0.3;
        let gamma = 1.0;
        for k in 0..11 {
            let delta = -2.0 + 0.4 * k as f64;
            let liou = two_level(omega, delta, gamma);
            let (rho, report) = steady_state(&liou).unwrap();
            let expected =
                omega * (gamma / 2.0) / (delta * delta + gamma * gamma / 4.0 + 2.0 * omega * omega);
            assert_abs_diff_eq!(rho.matrix[(0, 1)].im, expected, epsilon = 1e-8);
            assert!(report.residual_norm < 1e-10);
            // absorption is positive and populations physical
            assert!(rho.matrix[(0, 1)].im > 0.0);
            assert!(rho.population(1) >= 0.0 && rho.population(1) <= 0.5);
        }
    }

    #[test]
    fn two_level_reduction_of_the_full_ladder_matches_the_closed_form() {
        let mut s = natural_scheme();
        s.gamma_12 = 0.0;
        s.gamma_self = 0.0;
        let delta = 0.45;
        let f = natural_fields(0.25, 0.0, delta, 0.0);
        let h = restrict_hamiltonian(&build_hamiltonian(&s, &f, 0.0), &[1, 3]);
        let relax = build_relaxation(&s, 0.0, TraceMode::Conserving).restrict(&[1, 3]);
        let liou = build_liouvillian(&h, &relax);
        let (rho, _) = steady_state(&liou).unwrap();
        let (omega, gamma) = (f.omega_p, s.gamma[1]);
        let expected =
            omega * (gamma / 2.0) / (delta * delta + gamma * gamma / 4.0 + 2.0 * omega * omega);
        assert_abs_diff_eq!(rho.matrix[(0, 1)].im, expected, epsilon = 1e-8);
    }

    #[test]
    fn steady_state_is_a_fixed_point_of_the_flow() {
        let s = natural_scheme();
        let f = natural_fields(0.3, 0.6, 0.1, -0.2);
        let h = build_hamiltonian(&s, &f, 0.4);
        let relax = build_relaxation(&s, 0.15, TraceMode::Conserving);
        let liou = build_liouvillian(&h, &relax);
        let (rho, _) = steady_state(&liou).unwrap();
        let evolved = time_evolve(&liou, &rho, 25.0, 0.5).unwrap();
        for i in 0..N_LEVELS {
            for j in 0..N_LEVELS {
                let d = (evolved.matrix[(i, j)] - rho.matrix[(i, j)]).norm();
                assert!(d < 1e-8, "({i},{j}) drifted by {d}");
            }
        }
        assert_abs_diff_eq!(evolved.loss, rho.loss, epsilon = 1e-8);
    }

    #[test]
    fn relaxation_from_a_random_state_reaches_the_steady_state() {
        let s = natural_scheme();
        let f = natural_fields(0.35, 0.7, -0.15, 0.25);
        let h = build_hamiltonian(&s, &f, -0.3);
        let relax = build_relaxation(&s, 0.2, TraceMode::Conserving);
        let liou = build_liouvillian(&h, &relax);
        let (rho_ss, _) = steady_state(&liou).unwrap();
        let start = DensityMatrix::pure(N_LEVELS, 1);
        let min_rate = 0.05; // slowest rate in natural_scheme (gamma_12)
        let evolved = time_evolve(&liou, &start, 50.0 / min_rate, 1.0).unwrap();
        for i in 0..N_LEVELS {
            for j in 0..N_LEVELS {
                let d = (evolved.matrix[(i, j)] - rho_ss.matrix[(i, j)]).norm();
                assert!(d < 1e-6, "({i},{j}) differs by {d}");
            }
        }
        assert_abs_diff_eq!(evolved.loss, rho_ss.loss, epsilon = 1e-6);
        // conservation along the way
        assert_abs_diff_eq!(evolved.total_population(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn undriven_closed_pair_rabi_oscillates() {
        let omega = 1.0;
        let liou = two_level(omega, 0.0, 0.0);
        let rho0 = DensityMatrix::pure(2, 0);
        for &t in &[0.4, 1.1, 2.0] {
            let rho = time_evolve(&liou, &rho0, t, 0.02 / omega).unwrap();
            let expected = (omega * t).sin().powi(2);
            assert_abs_diff_eq!(rho.population(1), expected, epsilon = 1e-8);
            assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_generator_returns_the_state_exactly() {
        let relax = RelaxationStructure::none(2, TraceMode::Conserving);
        let h = nalgebra::DMatrix::from_element(2, 2, Complex::new(0.0, 0.0));
        let liou = build_liouvillian(&h, &relax);
        let mut rho0 = DensityMatrix::pure(2, 0);
        rho0.matrix[(0, 1)] = Complex::new(0.3, -0.2);
        rho0.matrix[(1, 0)] = Complex::new(0.3, 0.2);
        let rho = time_evolve(&liou, &rho0, 5.0, 0.1).unwrap();
        assert_eq!(rho.matrix, rho0.matrix);
        assert_eq!(rho.loss, rho0.loss);
    }

    #[test]
    fn absurd_error_bound_reports_step_size() {
        let liou = two_level(1.0, 0.0, 0.5);
        let rho0 = DensityMatrix::pure(2, 0);
        let opts = SolverOptions {
            step_error_tol: 1e-30,
            ..SolverOptions::default()
        };
        let err = time_evolve_with(&liou, &rho0, 10.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::StepSizeTooLarge { .. }));
    }

    #[test]
    fn decoupled_grounds_fall_back_to_the_thermal_mixture() {
        let mut s = natural_scheme();
        s.gamma_12 = 0.0;
        let f = natural_fields(0.0, 0.5, 0.0, 0.0);
        let h = build_hamiltonian(&s, &f, 0.0);
        let relax = build_relaxation(&s, 0.0, TraceMode::Conserving);
        let liou = build_liouvillian(&h, &relax);
        let (rho, report) = steady_state(&liou).unwrap();
        assert!(report.null_space_dimension >= 2);
        assert_abs_diff_eq!(rho.population(0), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.population(1), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn driven_verbatim_bookkeeping_has_no_steady_state() {
        let s = natural_scheme();
        let f = natural_fields(0.4, 0.8, 0.0, 0.0);
        let h = build_hamiltonian(&s, &f, 0.0);
        let relax = build_relaxation(&s, 0.1, TraceMode::Verbatim);
        let liou = build_liouvillian(&h, &relax);
        match steady_state(&liou) {
            Err(Error::NoSteadyState { residual }) => assert!(residual > 1e-10),
            other => panic!("expected NoSteadyState, got {other:?}"),
        }
    }

    #[test]
    fn undriven_verbatim_bookkeeping_still_relaxes() {
        // with no excited population the literal equations balance, so a
        // steady state exists even in verbatim mode
        let s = natural_scheme();
        let f = natural_fields(0.0, 0.0, 0.0, 0.0);
        let h = build_hamiltonian(&s, &f, 0.0);
        let relax = build_relaxation(&s, 0.0, TraceMode::Verbatim);
        let liou = build_liouvillian(&h, &relax);
        let (rho, _) = steady_state(&liou).unwrap();
        assert_abs_diff_eq!(rho.population(0), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.population(1), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn velocity_average_contracts() {
        let cell = CellConfig::new(1e-6, 393.15).unwrap();
        let grid = boltzmann_grid(&cell, 1001, 4.0).unwrap();
        let total: f64 = grid.weights.iter().sum();
        let c = 2.5;
        let constants = vec![c; grid.len()];
        let avg: f64 = velocity_average(&constants, &grid).unwrap();
        assert_abs_diff_eq!(avg, c * total, epsilon = 1e-12);
        let odd: Vec<f64> = grid.points.iter().map(|&v| v.powi(3)).collect();
        let avg_odd: f64 = velocity_average(&odd, &grid).unwrap();
        assert!(avg_odd.abs() < 1e-12 * grid.points.last().unwrap().powi(3).abs());
        let complex_values: Vec<Complex<f64>> =
            grid.points.iter().map(|&v| Complex::new(1.0, v)).collect();
        let avg_c = velocity_average(&complex_values, &grid).unwrap();
        assert_abs_diff_eq!(avg_c.re, total, epsilon = 1e-12);
        assert!(avg_c.im.abs() < 1e-9);
        let short = vec![1.0; 3];
        assert!(velocity_average(&short, &grid).is_err());
    }
}
