//! Master-equation assembly: relaxation bookkeeping, the density-matrix
//! state (seven coherent levels plus a scalar loss slot), a real
//! vectorisation layout, and the Liouvillian superoperator.
//!
//! Two bookkeeping modes are provided. `Verbatim` transcribes the
//! reference equation set literally: every cascade decay repopulates each
//! of its daughter levels at the full source rate, the commutator enters
//! with the conjugate phase (+i[H, rho]), and total population is not
//! conserved. `Conserving` is the physical variant: decays branch with
//! fractions that sum to one, wall collisions move population into the
//! loss slot and return it to the ground manifold, and the trace
//! (including the loss slot) is an exact invariant.

use nalgebra::{Complex, DMatrix, DVector};

use crate::atom::LevelScheme;
use crate::scalar::Scalar;

/// Population bookkeeping convention of the dissipator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// Literal transcription of the coupled equations: +i[H, rho]
    /// commutator, double-counted cascade feeds, no loss dynamics, trace
    /// not conserved.
    Verbatim,
    /// Standard -i[H, rho] commutator with branching fractions that sum
    /// to one and a wall-collision loss slot; conserves trace + loss.
    Conserving,
}

/// Decay, dephasing, repopulation and loss routing for every level.
///
/// `repopulation` entries are (source, target, fraction): population
/// flows from `source` to `target` at `fraction * total_decay[source]`.
/// In `Conserving` mode the fractions of each source, together with its
/// `loss_fraction`, sum to one; in `Verbatim` mode they follow the
/// literal equation set and may exceed one in total.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationStructure<T: Scalar> {
    pub mode: TraceMode,
    /// Population outflow rate per level (rad/s). Also the base of the
    /// coherence decay rates (Gamma_i + Gamma_j)/2.
    pub total_decay: Vec<T>,
    /// Pure dephasing added to coherence decay only (rad/s).
    pub coherence_extra: Vec<T>,
    pub repopulation: Vec<(usize, usize, T)>,
    /// Fraction of each level's outflow routed to the loss slot.
    pub loss_fraction: Vec<T>,
    /// Drain rate of the loss slot back into the coherent levels.
    pub loss_return_rate: T,
    /// (target, fraction) routing of the loss drain; fractions sum to 1.
    pub loss_return: Vec<(usize, T)>,
}

impl<T: Scalar> RelaxationStructure<T> {
    /// No relaxation at all (useful for closed-system checks).
    pub fn none(n: usize, mode: TraceMode) -> Self {
        RelaxationStructure {
            mode,
            total_decay: vec![T::zero(); n],
            coherence_extra: vec![T::zero(); n],
            repopulation: Vec::new(),
            loss_fraction: vec![T::zero(); n],
            loss_return_rate: T::zero(),
            loss_return: Vec::new(),
        }
    }

    pub fn n_levels(&self) -> usize {
        self.total_decay.len()
    }

    /// Keeps only the listed levels (in the given order), dropping
    /// repopulation and loss-return entries whose endpoints are removed.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let position = |old: usize| keep.iter().position(|&k| k == old);
        let pick = |v: &Vec<T>| keep.iter().map(|&k| v[k]).collect();
        RelaxationStructure {
            mode: self.mode,
            total_decay: pick(&self.total_decay),
            coherence_extra: pick(&self.coherence_extra),
            repopulation: self
                .repopulation
                .iter()
                .filter_map(|&(s, t, f)| Some((position(s)?, position(t)?, f)))
                .collect(),
            loss_fraction: pick(&self.loss_fraction),
            loss_return_rate: self.loss_return_rate,
            loss_return: self
                .loss_return
                .iter()
                .filter_map(|&(t, f)| Some((position(t)?, f)))
                .collect(),
        }
    }
}

/// Relaxation structure of the seven-level ladder for one velocity class
/// with wall-collision rate `gamma_l`.
///
/// Level totals follow the diagonal relaxation matrix: the ground levels
/// carry the exchange rate Gamma_12, the 5P3/2 levels gamma_i + b*Gamma_L
/// and the 4D5/2 levels gamma_i + c*Gamma_L, with the self-broadening
/// rate added on every excited level (as population outflow in
/// `Verbatim` mode, as pure dephasing in `Conserving` mode). In
/// `Conserving` mode ground-state wall collisions (weight `a`) reset the
/// atom 50/50 within the ground manifold, excited-state wall collisions
/// (weights `b`, `c`) quench the atom into the loss slot, and the loss
/// slot drains back 50/50 into the two ground levels at Gamma_L; an
/// unlit vapor therefore settles into the bare thermal ground mixture.
pub fn build_relaxation<T: Scalar>(
    scheme: &LevelScheme<T>,
    gamma_l: T,
    mode: TraceMode,
) -> RelaxationStructure<T> {
    assert!(gamma_l >= T::zero(), "wall rate must be non-negative");
    let half = T::lit(0.5);
    let b_wall = scheme.branching_b * gamma_l;
    let c_wall = scheme.branching_c * gamma_l;
    match mode {
        TraceMode::Verbatim => {
            let excited = |g: T, wall: T| g + scheme.gamma_self + wall;
            RelaxationStructure {
                mode,
                total_decay: vec![
                    scheme.gamma_12,
                    scheme.gamma_12,
                    excited(scheme.gamma[0], b_wall),
                    excited(scheme.gamma[1], b_wall),
                    excited(scheme.gamma[2], c_wall),
                    excited(scheme.gamma[3], c_wall),
                    excited(scheme.gamma[4], c_wall),
                ],
                coherence_extra: vec![T::zero(); 7],
                // each cascade decay feeds all its daughters at the full
                // source rate; the cycling level [6] feeds nothing
                repopulation: vec![
                    (0, 1, T::one()),
                    (1, 0, T::one()),
                    (2, 0, T::one()),
                    (2, 1, T::one()),
                    (3, 1, T::one()),
                    (4, 2, T::one()),
                    (4, 3, T::one()),
                    (5, 2, T::one()),
                    (5, 3, T::one()),
                ],
                loss_fraction: vec![T::zero(); 7],
                loss_return_rate: T::zero(),
                loss_return: Vec::new(),
            }
        }
        TraceMode::Conserving => {
            let a_wall = scheme.branching_a * gamma_l;
            let spontaneous = [
                scheme.gamma_12,
                scheme.gamma_12,
                scheme.gamma[0],
                scheme.gamma[1],
                scheme.gamma[2],
                scheme.gamma[3],
                scheme.gamma[4],
            ];
            let wall = [a_wall, a_wall, b_wall, b_wall, c_wall, c_wall, c_wall];
            let branches: [&[(usize, T)]; 7] = [
                &[(1, T::one())],
                &[(0, T::one())],
                &[(0, half), (1, half)],
                &[(1, T::one())],
                &[(2, half), (3, half)],
                &[(2, half), (3, half)],
                &[(3, T::one())],
            ];
            let mut total_decay = Vec::with_capacity(7);
            let mut repopulation = Vec::new();
            let mut loss_fraction = Vec::with_capacity(7);
            for i in 0..7 {
                let total = spontaneous[i] + wall[i];
                total_decay.push(total);
                if total > T::zero() {
                    for &(target, weight) in branches[i] {
                        repopulation.push((i, target, weight * spontaneous[i] / total));
                    }
                    if i < 2 {
                        // a ground atom survives its wall collision and
                        // leaves the wall in either ground state: reset
                        // within the manifold, nothing enters the sink
                        if wall[i] > T::zero() {
                            repopulation.push((i, 0, half * wall[i] / total));
                            repopulation.push((i, 1, half * wall[i] / total));
                        }
                        loss_fraction.push(T::zero());
                    } else {
                        loss_fraction.push(wall[i] / total);
                    }
                } else {
                    loss_fraction.push(T::zero());
                }
            }
            let mut coherence_extra = vec![T::zero(); 7];
            for extra in coherence_extra.iter_mut().skip(2) {
                *extra = scheme.gamma_self;
            }
            RelaxationStructure {
                mode,
                total_decay,
                coherence_extra,
                repopulation,
                loss_fraction,
                loss_return_rate: gamma_l,
                loss_return: vec![(0, half), (1, half)],
            }
        }
    }
}

/// Density matrix over the coherent levels plus the scalar loss-slot
/// population.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    pub matrix: DMatrix<Complex<T>>,
    pub loss: T,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DensityMatrix {
            matrix: DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero())),
            loss: T::zero(),
        }
    }

    /// All population in one level.
    pub fn pure(n: usize, level: usize) -> Self {
        let mut dm = Self::zeros(n);
        dm.matrix[(level, level)] = Complex::new(T::one(), T::zero());
        dm
    }

    /// Population split evenly between the two ground levels, as in a
    /// thermal vapor whose ground splitting is far below k_B T.
    pub fn thermal_ground(n: usize) -> Self {
        assert!(n >= 2);
        let mut dm = Self::zeros(n);
        let half = Complex::new(T::lit(0.5), T::zero());
        dm.matrix[(0, 0)] = half;
        dm.matrix[(1, 1)] = half;
        dm
    }

    pub fn n_levels(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn population(&self, i: usize) -> T {
        self.matrix[(i, i)].re
    }

    /// Trace over the coherent levels (loss slot excluded).
    pub fn trace(&self) -> T {
        (0..self.n_levels()).fold(T::zero(), |acc, i| acc + self.matrix[(i, i)].re)
    }

    /// Trace plus loss population: the conserved total in
    /// `Conserving` mode.
    pub fn total_population(&self) -> T {
        self.trace() + self.loss
    }
}

/// Index layout of the real state vector: `n` diagonal populations,
/// then (Re, Im) pairs of the upper-triangle coherences in row-major
/// order, then the loss slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn new(n: usize) -> Self {
        Layout { n }
    }

    pub fn dim(&self) -> usize {
        self.n + self.n * (self.n - 1) + 1
    }

    pub fn diag(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        i
    }

    fn pair(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Slot of Re rho_ij for i < j.
    pub fn re(&self, i: usize, j: usize) -> usize {
        self.n + 2 * self.pair(i, j)
    }

    /// Slot of Im rho_ij for i < j.
    pub fn im(&self, i: usize, j: usize) -> usize {
        self.n + 2 * self.pair(i, j) + 1
    }

    pub fn loss(&self) -> usize {
        self.dim() - 1
    }
}

/// Flattens a Hermitian state into the real layout.
pub fn vectorize<T: Scalar>(state: &DensityMatrix<T>, layout: &Layout) -> DVector<T> {
    let n = layout.n;
    debug_assert_eq!(state.n_levels(), n);
    let mut x = DVector::zeros(layout.dim());
    for i in 0..n {
        x[layout.diag(i)] = state.matrix[(i, i)].re;
        for j in (i + 1)..n {
            x[layout.re(i, j)] = state.matrix[(i, j)].re;
            x[layout.im(i, j)] = state.matrix[(i, j)].im;
        }
    }
    x[layout.loss()] = state.loss;
    x
}

/// Rebuilds the Hermitian state from the real layout.
pub fn devectorize<T: Scalar>(x: &DVector<T>, layout: &Layout) -> DensityMatrix<T> {
    let n = layout.n;
    debug_assert_eq!(x.len(), layout.dim());
    let mut state = DensityMatrix::zeros(n);
    for i in 0..n {
        state.matrix[(i, i)] = Complex::new(x[layout.diag(i)], T::zero());
        for j in (i + 1)..n {
            let z = Complex::new(x[layout.re(i, j)], x[layout.im(i, j)]);
            state.matrix[(i, j)] = z;
            state.matrix[(j, i)] = z.conj();
        }
    }
    state.loss = x[layout.loss()];
    state
}

/// Direct evaluation of the master-equation right-hand side on a
/// Hermitian state: commutator (sign per mode), coherence decay,
/// population outflow, repopulation feeds and loss routing.
pub fn master_rhs<T: Scalar>(
    h: &DMatrix<Complex<T>>,
    relax: &RelaxationStructure<T>,
    state: &DensityMatrix<T>,
) -> DensityMatrix<T> {
    let n = h.nrows();
    debug_assert_eq!(relax.n_levels(), n);
    debug_assert_eq!(state.n_levels(), n);
    let rho = &state.matrix;
    let commutator = h * rho - rho * h;
    let phase = match relax.mode {
        TraceMode::Verbatim => Complex::new(T::zero(), T::one()),
        TraceMode::Conserving => Complex::new(T::zero(), -T::one()),
    };
    let mut d = commutator.map(|z| phase * z);
    let half = T::lit(0.5);
    for i in 0..n {
        d[(i, i)] -= Complex::new(relax.total_decay[i] * rho[(i, i)].re, T::zero());
        for j in 0..n {
            if i == j {
                continue;
            }
            let rate = (relax.total_decay[i]
                + relax.coherence_extra[i]
                + relax.total_decay[j]
                + relax.coherence_extra[j])
                * half;
            d[(i, j)] -= rho[(i, j)].scale(rate);
        }
    }
    for &(src, tgt, frac) in &relax.repopulation {
        let feed = frac * relax.total_decay[src] * rho[(src, src)].re;
        d[(tgt, tgt)] += Complex::new(feed, T::zero());
    }
    let mut dloss = -relax.loss_return_rate * state.loss;
    for i in 0..n {
        dloss += relax.loss_fraction[i] * relax.total_decay[i] * rho[(i, i)].re;
    }
    for &(tgt, frac) in &relax.loss_return {
        d[(tgt, tgt)] += Complex::new(frac * relax.loss_return_rate * state.loss, T::zero());
    }
    DensityMatrix {
        matrix: d,
        loss: dloss,
    }
}

/// The master equation as a real linear operator on the vectorised
/// state, dx/dt = matrix * x.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian<T: Scalar> {
    pub matrix: DMatrix<T>,
    pub layout: Layout,
    pub mode: TraceMode,
}

/// Assembles the superoperator column by column: each real basis
/// direction is lifted to a Hermitian matrix, pushed through
/// [`master_rhs`], and flattened back. Works for any level count with
/// matching Hamiltonian and relaxation dimensions.
pub fn build_liouvillian<T: Scalar>(
    h: &DMatrix<Complex<T>>,
    relax: &RelaxationStructure<T>,
) -> Liouvillian<T> {
    let n = h.nrows();
    assert_eq!(h.ncols(), n, "Hamiltonian must be square");
    assert_eq!(relax.n_levels(), n, "relaxation dimension mismatch");
    let layout = Layout::new(n);
    let dim = layout.dim();
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut basis = DVector::zeros(dim);
    for k in 0..dim {
        basis[k] = T::one();
        let state = devectorize(&basis, &layout);
        let derivative = master_rhs(h, relax, &state);
        matrix.set_column(k, &vectorize(&derivative, &layout));
        basis[k] = T::zero();
    }
    Liouvillian {
        matrix,
        layout,
        mode: relax.mode,
    }
}

impl<T: Scalar> Liouvillian<T> {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Time derivative of a state.
    pub fn apply(&self, state: &DensityMatrix<T>) -> DensityMatrix<T> {
        let x = vectorize(state, &self.layout);
        devectorize(&(&self.matrix * x), &self.layout)
    }

    /// The linear functional measuring total population (all diagonal
    /// slots plus the loss slot). Lies in the left null space exactly
    /// when the generator conserves population.
    pub fn trace_functional(&self) -> DVector<T> {
        let mut t = DVector::zeros(self.dim());
        for i in 0..self.layout.n {
            t[self.layout.diag(i)] = T::one();
        }
        t[self.layout.loss()] = T::one();
        t
    }

    /// Row vector trace^T * L; zero for a population-conserving
    /// generator.
    pub fn trace_leak(&self) -> DVector<T> {
        self.matrix.tr_mul(&self.trace_functional())
    }
}

/// Restriction of a Hamiltonian to a sub-ladder of levels.
pub fn restrict_hamiltonian<T: Scalar>(
    h: &DMatrix<Complex<T>>,
    keep: &[usize],
) -> DMatrix<Complex<T>> {
    let m = keep.len();
    DMatrix::from_fn(m, m, |r, c| h[(keep[r], keep[c])])
}
