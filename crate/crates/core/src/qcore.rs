//! Dense linear algebra on small Hilbert spaces.
//!
//! States are stored as flat complex vectors. Tensor products use row-major
//! indexing: in `a ⊗ b` the index of `a` varies slowest, so the joint index is
//! `i_a * dim(b) + i_b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on the squared norm of a [`PureState`].
pub const NORM_TOL: f64 = 1e-12;
/// Elementwise tolerance for Hermiticity, trace and unitarity checks.
pub const MATRIX_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_FLOOR: f64 = -1e-9;
/// Branches with a smaller probability carry no conditional state.
pub const ZERO_BRANCH: f64 = 1e-14;

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    /// Builds a state from amplitudes that must already be normalized.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyState);
        }
        let amps = DVector::from_vec(amps);
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amps })
    }

    /// Builds a state by normalizing an arbitrary nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyState);
        }
        let mut amps = DVector::from_vec(amps);
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        amps.unscale_mut(norm);
        Ok(Self { amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyState);
        }
        if index >= dim {
            return Err(Error::BasisIndex { index, dim });
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Equality of rays: true when `|⟨self|other⟩| ≥ 1 - tol`.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        match self.inner(other) {
            Ok(z) => z.norm() >= 1.0 - tol,
            Err(_) => false,
        }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            m: &self.amps * self.amps.adjoint(),
        }
    }
}

/// Anything that assigns Born probabilities to pure projectors.
pub trait BornState {
    fn dim(&self) -> usize;

    /// `⟨v|state|v⟩` without dimension checks.
    fn projector_expectation(&self, v: &PureState) -> f64;
}

impl BornState for PureState {
    fn dim(&self) -> usize {
        PureState::dim(self)
    }

    fn projector_expectation(&self, v: &PureState) -> f64 {
        v.amps.dotc(&self.amps).norm_sqr()
    }
}

impl BornState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn projector_expectation(&self, v: &PureState) -> f64 {
        v.amps.dotc(&(&self.m * &v.amps)).re
    }
}

/// Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity before accepting `m`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Err(Error::EmptyState);
        }
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ncols(),
            });
        }
        let herm_dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_dev > MATRIX_TOL {
            return Err(Error::NotHermitian(herm_dev));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > MATRIX_TOL || tr.im.abs() > MATRIX_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let rho = Self { m };
        let min_eig = rho.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(rho)
    }

    /// For matrices that are density matrices by construction.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.projector()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.m + self.m.adjoint()).unscale(2.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Trace over the first factor of a bipartite state with first factor dimension `dim_a`.
    pub fn partial_trace_first(&self, dim_a: usize) -> Result<DensityMatrix> {
        let n = self.dim();
        if dim_a == 0 || !n.is_multiple_of(dim_a) {
            return Err(Error::IndivisibleDimension { joint: n, sub: dim_a });
        }
        let dim_b = n / dim_a;
        let m = DMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|a| self.m[(a * dim_b + i, a * dim_b + j)]).sum()
        });
        Ok(Self { m })
    }

    /// Convex combination `Σ w_k ρ_k` with weights normalized to sum 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts.first().ok_or(Error::EmptyState)?;
        let dim = first.1.dim();
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| w.is_nan() || *w < 0.0) || total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "must be nonnegative with positive sum".into(),
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            check_dim(dim, rho.dim())?;
            m += rho.m.scale(*w / total);
        }
        Ok(Self { m })
    }
}

/// A unitary operator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    m: DMatrix<C64>,
}

impl UnitaryOp {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Err(Error::EmptyState);
        }
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ncols(),
            });
        }
        let dev = (&m * m.adjoint() - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > MATRIX_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// `diag(e^{iθ_0}, …, e^{iθ_{d-1}})`.
    pub fn diagonal_phases(phases: &[f64]) -> Self {
        let diag = DVector::from_iterator(phases.len(), phases.iter().map(|&t| C64::from_polar(1.0, t)));
        Self {
            m: DMatrix::from_diagonal(&diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn dagger(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// The operator `other · self` (apply `self` first).
    pub fn then(&self, other: &UnitaryOp) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { m: &other.m * &self.m })
    }

    pub fn kron(&self, other: &UnitaryOp) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        check_dim(self.dim(), psi.dim())?;
        Ok(PureState {
            amps: &self.m * &psi.amps,
        })
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_dim(self.dim(), rho.dim())?;
        Ok(DensityMatrix {
            m: &self.m * &rho.m * self.m.adjoint(),
        })
    }
}

/// An orthonormal, complete measurement basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: Vec<PureState>,
}

impl MeasurementBasis {
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        let dim = vectors.first().ok_or(Error::EmptyState)?.dim();
        if vectors.len() != dim {
            return Err(Error::IncompleteBasis {
                dim,
                count: vectors.len(),
            });
        }
        for v in &vectors {
            check_dim(dim, v.dim())?;
        }
        let mut dev: f64 = 0.0;
        for (j, u) in vectors.iter().enumerate() {
            for (k, v) in vectors.iter().enumerate() {
                let g = u.amps.dotc(&v.amps);
                let target = if j == k { 1.0 } else { 0.0 };
                dev = dev.max((g - C64::new(target, 0.0)).norm());
            }
        }
        if dev > MATRIX_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { vectors })
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            vectors: (0..dim)
                .map(|k| PureState::basis(dim, k).expect("index below dimension"))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Result<&PureState> {
        self.vectors.get(k).ok_or(Error::OutcomeOutOfRange {
            outcome: k,
            count: self.vectors.len(),
        })
    }
}

/// Row-major tensor product `a ⊗ b`.
pub fn tensor(a: &PureState, b: &PureState) -> PureState {
    PureState {
        amps: a.amps.kronecker(&b.amps),
    }
}

/// Outcome probabilities `⟨v_k|state|v_k⟩`, clamped to `[0, 1]`.
pub fn born_probabilities<S: BornState>(state: &S, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    check_dim(basis.dim(), state.dim())?;
    Ok(basis
        .vectors()
        .iter()
        .map(|v| state.projector_expectation(v).clamp(0.0, 1.0))
        .collect())
}

/// Pure-target fidelity `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    check_dim(rho.dim(), psi.dim())?;
    Ok(rho.projector_expectation(psi).clamp(0.0, 1.0))
}

/// Euclidean chord distance `‖ψ − φ‖` between amplitude vectors.
pub fn pure_state_distance(psi: &PureState, phi: &PureState) -> Result<f64> {
    check_dim(psi.dim(), phi.dim())?;
    Ok((&psi.amps - &phi.amps).norm())
}

/// Result of projecting the first factor of a joint state onto one basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    /// Normalized conditional state of the second factor; `None` for a null branch.
    pub state: Option<PureState>,
}

/// Conditional mixed state after projecting the first factor of a joint density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedBranch {
    pub probability: f64,
    pub state: Option<DensityMatrix>,
}

fn split_dims(joint: usize, basis: &MeasurementBasis) -> Result<usize> {
    let dim_a = basis.dim();
    if !joint.is_multiple_of(dim_a) {
        return Err(Error::IndivisibleDimension { joint, sub: dim_a });
    }
    Ok(joint / dim_a)
}

/// Projects the first factor of `joint` onto `alice_basis[outcome]`.
pub fn project_outcome(joint: &PureState, alice_basis: &MeasurementBasis, outcome: usize) -> Result<Branch> {
    let dim_b = split_dims(joint.dim(), alice_basis)?;
    let v = alice_basis.vector(outcome)?;
    let dim_a = alice_basis.dim();
    let bob = DVector::from_fn(dim_b, |j, _| {
        (0..dim_a)
            .map(|a| v.amps[a].conj() * joint.amps[a * dim_b + j])
            .sum::<C64>()
    });
    let probability = bob.norm_squared();
    let state = (probability > ZERO_BRANCH).then(|| PureState {
        amps: bob.unscale(probability.sqrt()),
    });
    Ok(Branch { probability, state })
}

/// Mixed-state analogue of [`project_outcome`].
pub fn project_outcome_mixed(
    joint: &DensityMatrix,
    alice_basis: &MeasurementBasis,
    outcome: usize,
) -> Result<MixedBranch> {
    let dim_b = split_dims(joint.dim(), alice_basis)?;
    let v = alice_basis.vector(outcome)?;
    let dim_a = alice_basis.dim();
    // ⟨v| ⊗ I applied on both sides
    let m = DMatrix::from_fn(dim_b, dim_b, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..dim_a {
            for b in 0..dim_a {
                acc += v.amps[a].conj() * joint.m[(a * dim_b + i, b * dim_b + j)] * v.amps[b];
            }
        }
        acc
    });
    let probability = m.trace().re;
    let state = (probability > ZERO_BRANCH).then(|| DensityMatrix {
        m: m.unscale(probability),
    });
    Ok(MixedBranch {
        probability: probability.max(0.0),
        state,
    })
}

/// Random state with Gaussian-distributed amplitudes (uniform on the sphere).
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryOp {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    UnitaryOp { m: q * phases }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
