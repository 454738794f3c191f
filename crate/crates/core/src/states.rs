//! State algebra on the composite space: density operators, pure states,
//! Schmidt decomposition, partial trace and transpose, trace-norm distance
//! and tensor powers.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    self, hermiticity_error, kron, kron_vec, outer, CMatrix, CVector, HermitianEigen, ONE, ZERO,
};
use crate::space::BipartiteSpace;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to this value still count as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;

/// Largest composite dimension `tensor_power` will materialize by default.
pub const DEFAULT_DENSE_CAP: usize = 1024;
/// Largest amplitude count `tensor_power_pure` will materialize by default.
pub const DEFAULT_VECTOR_CAP: usize = 1 << 16;

/// Trace-one positive semidefinite Hermitian matrix on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL, TRACE_TOL)
    }

    /// Validates with caller-chosen Hermiticity and trace tolerances. The
    /// matrix is stored unchanged.
    pub fn with_tolerance(matrix: CMatrix, herm_tol: f64, trace_tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, expected square and nonempty",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let herm = hermiticity_error(&matrix);
        if herm > herm_tol {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (max deviation {herm:.3e} > {herm_tol:.0e})"
            )));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::InvalidState(format!(
                "trace is {tr}, expected 1 within {trace_tol:.0e}"
            )));
        }
        let min = HermitianEigen::new(&matrix).min();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "matrix is not positive semidefinite (minimum eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            matrix: outer(&psi.amplitudes),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    /// Convex combination `Σ w_i ρ_i`. Weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let dim = first.1.dim();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "mixture weights must be a probability distribution".into(),
            ));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            check_dim(dim, rho.dim())?;
            m += rho.matrix.scale(*w);
        }
        Ok(Self { matrix: m })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.matrix)
    }

    /// `tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        linalg::trace_product_re(&self.matrix, &self.matrix)
    }

    pub fn kron(&self, other: &DensityOperator) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.nrows())?;
        Ok(Self {
            matrix: u * &self.matrix * u.adjoint(),
        })
    }

    /// `(1-w) ρ + w 1/d`.
    pub fn floor_mixed(&self, w: f64) -> Self {
        let d = self.dim();
        let mut m = self.matrix.scale(1.0 - w);
        for i in 0..d {
            m[(i, i)] += Complex64::new(w / d as f64, 0.0);
        }
        Self { matrix: m }
    }

    /// Leading eigenvector when `tr[ρ²]` is within `tol` of one.
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        if (self.purity() - 1.0).abs() > tol {
            return None;
        }
        let eig = self.eigen();
        let v = eig.vectors.column(self.dim() - 1).into_owned();
        PureState::normalized(v).ok()
    }
}

/// Unit vector on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Accepts vectors whose norm is within `1e-6` of one and renormalizes.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidState(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[i] = ONE;
        Self { amplitudes: v }
    }

    pub fn product(psi_a: &CVector, psi_b: &CVector) -> Result<Self> {
        Self::normalized(kron_vec(psi_a, psi_b))
    }

    /// `(|lo,lo⟩ + |hi,hi⟩)/√2`.
    pub fn bell(space: &BipartiteSpace, lo: usize, hi: usize) -> Result<Self> {
        Self::two_level(space, lo, hi, std::f64::consts::FRAC_PI_4)
    }

    /// `cos θ |lo,lo⟩ + sin θ |hi,hi⟩`.
    pub fn two_level(space: &BipartiteSpace, lo: usize, hi: usize, theta: f64) -> Result<Self> {
        let top = lo.max(hi);
        if lo == hi || top >= space.dim_a() || top >= space.dim_b() {
            return Err(Error::InvalidArgument(format!(
                "levels ({lo}, {hi}) do not fit cutoffs ({}, {})",
                space.dim_a(),
                space.dim_b()
            )));
        }
        let mut v = CVector::zeros(space.dim());
        v[space.index(lo, lo)] = Complex64::new(theta.cos(), 0.0);
        v[space.index(hi, hi)] = Complex64::new(theta.sin(), 0.0);
        Ok(Self { amplitudes: v })
    }

    /// `Σ √p_n |n,n⟩` for a probability vector `p`.
    pub fn from_schmidt_weights(space: &BipartiteSpace, weights: &[f64]) -> Result<Self> {
        if weights.len() > space.dim_a().min(space.dim_b()) {
            return Err(Error::InvalidArgument(format!(
                "{} Schmidt weights exceed the smaller cutoff",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidArgument("negative Schmidt weight".into()));
        }
        let mut v = CVector::zeros(space.dim());
        for (n, &w) in weights.iter().enumerate() {
            v[space.index(n, n)] = Complex64::new(w.sqrt(), 0.0);
        }
        Self::new(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn apply(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.ncols())?;
        Self::normalized(u * &self.amplitudes)
    }

    /// Amplitude matrix `M[a, b] = ψ[a d_B + b]`.
    pub fn amplitude_matrix(&self, space: &BipartiteSpace) -> Result<CMatrix> {
        check_dim(space.dim(), self.dim())?;
        Ok(CMatrix::from_fn(space.dim_a(), space.dim_b(), |a, b| {
            self.amplitudes[space.index(a, b)]
        }))
    }
}

/// `ψ = Σ √p_n ψ_A(n) ⊗ ψ_B(n)` with `p` nonincreasing.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub basis_a: Vec<CVector>,
    pub basis_b: Vec<CVector>,
}

impl SchmidtForm {
    /// Number of coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&p| p > tol).count()
    }

    pub fn reconstruct(&self) -> CVector {
        let da = self.basis_a.first().map_or(0, |v| v.len());
        let db = self.basis_b.first().map_or(0, |v| v.len());
        let mut out = CVector::zeros(da * db);
        for ((p, u), v) in self.coefficients.iter().zip(&self.basis_a).zip(&self.basis_b) {
            out += kron_vec(u, v).scale(p.sqrt());
        }
        out
    }
}

pub fn schmidt_decompose(psi: &PureState, space: &BipartiteSpace) -> Result<SchmidtForm> {
    let norm = psi.amplitudes.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidState(format!("state vector has norm {norm}")));
    }
    let m = psi.amplitude_matrix(space)?;
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let coefficients = order
        .iter()
        .map(|&n| svd.singular_values[n].powi(2))
        .collect();
    let basis_a = order.iter().map(|&n| u.column(n).into_owned()).collect();
    let basis_b = order
        .iter()
        .map(|&n| v_t.row(n).transpose().into_owned())
        .collect();
    Ok(SchmidtForm {
        coefficients,
        basis_a,
        basis_b,
    })
}

/// Reduced operator on A: `(ρ_A)_{a a'} = Σ_b ρ_{(a,b),(a',b)}`.
pub fn partial_trace_b(rho: &DensityOperator, space: &BipartiteSpace) -> Result<DensityOperator> {
    Ok(DensityOperator::from_matrix_unchecked(trace_out_b(
        rho.matrix(),
        space,
    )?))
}

/// Reduced operator on B.
pub fn partial_trace_a(rho: &DensityOperator, space: &BipartiteSpace) -> Result<DensityOperator> {
    check_dim(space.dim(), rho.dim())?;
    let (da, db) = (space.dim_a(), space.dim_b());
    let m = rho.matrix();
    let out = CMatrix::from_fn(db, db, |b, b2| {
        (0..da).map(|a| m[(space.index(a, b), space.index(a, b2))]).sum()
    });
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// Partial trace over B of any square matrix on the composite space.
pub fn trace_out_b(m: &CMatrix, space: &BipartiteSpace) -> Result<CMatrix> {
    check_dim(space.dim(), m.nrows())?;
    let (da, db) = (space.dim_a(), space.dim_b());
    Ok(CMatrix::from_fn(da, da, |a, a2| {
        (0..db).map(|b| m[(space.index(a, b), space.index(a2, b))]).sum()
    }))
}

/// `((a,b),(a',b')) ↦ ((a',b),(a,b'))`. The result is Hermitian with unit
/// trace but need not be positive.
pub fn partial_transpose_a(rho: &DensityOperator, space: &BipartiteSpace) -> Result<CMatrix> {
    partial_transpose_matrix(rho.matrix(), space)
}

pub fn partial_transpose_matrix(m: &CMatrix, space: &BipartiteSpace) -> Result<CMatrix> {
    check_dim(space.dim(), m.nrows())?;
    let n = space.dim();
    let mut out = CMatrix::from_element(n, n, ZERO);
    for r in 0..n {
        let (a, b) = space.split(r);
        for c in 0..n {
            let (a2, b2) = space.split(c);
            out[(space.index(a2, b), space.index(a, b2))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Outcome of the Peres-Horodecki test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NptCertificate {
    pub npt: bool,
    /// Smallest eigenvalue of the partial transpose.
    pub witness: f64,
}

/// NPT iff the partial transpose has an eigenvalue below `-tol`. NPT
/// implies entanglement.
pub fn is_npt(rho: &DensityOperator, space: &BipartiteSpace, tol: f64) -> Result<NptCertificate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let pt = partial_transpose_a(rho, space)?;
    let witness = HermitianEigen::new(&pt).min();
    Ok(NptCertificate {
        npt: witness < -tol,
        witness,
    })
}

/// `‖x − y‖₁`.
pub fn trace_norm_distance(x: &DensityOperator, y: &DensityOperator) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(linalg::trace_norm_hermitian(&(x.matrix() - y.matrix())))
}

/// `‖ |ψ⟩⟨ψ| − |φ⟩⟨φ| ‖₁ = 2√(1 − |⟨ψ|φ⟩|²)`.
pub fn pure_trace_distance(psi: &PureState, phi: &PureState) -> Result<f64> {
    check_dim(psi.dim(), phi.dim())?;
    let f = psi.overlap(phi).norm_sqr().min(1.0);
    Ok(2.0 * (1.0 - f).sqrt())
}

/// Maps composite index on the `A^n | B^n` grouping to the index of the
/// plain Kronecker power `(A B)^{⊗n}`.
fn regroup_permutation(space: &BipartiteSpace, n: usize) -> Vec<usize> {
    let (da, db) = (space.dim_a(), space.dim_b());
    let dan = da.pow(n as u32);
    let dbn = db.pow(n as u32);
    let mut perm = Vec::with_capacity(dan * dbn);
    for alpha in 0..dan {
        for beta in 0..dbn {
            let mut idx = 0;
            let mut ra = alpha;
            let mut rb = beta;
            let mut digits = Vec::with_capacity(n);
            for _ in 0..n {
                digits.push((ra % da, rb % db));
                ra /= da;
                rb /= db;
            }
            for &(a, b) in digits.iter().rev() {
                idx = idx * (da * db) + a * db + b;
            }
            perm.push(idx);
        }
    }
    perm
}

fn checked_power(base: usize, n: usize, cap: usize, what: &'static str) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc.checked_mul(base).unwrap_or(usize::MAX);
        if acc > cap {
            return Err(Error::ResourceLimit {
                what,
                requested: acc,
                cap,
            });
        }
    }
    Ok(acc)
}

/// `ρ^{⊗n}` on `space.power(n)`, i.e. with the A-parties collected against
/// the B-parties. Fails when the composite dimension would exceed `cap`.
pub fn tensor_power(
    rho: &DensityOperator,
    space: &BipartiteSpace,
    n: usize,
    cap: usize,
) -> Result<(DensityOperator, BipartiteSpace)> {
    check_dim(space.dim(), rho.dim())?;
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    checked_power(space.dim(), n, cap, "tensor power dimension")?;
    let mut m = rho.matrix().clone();
    for _ in 1..n {
        m = kron(&m, rho.matrix());
    }
    let perm = regroup_permutation(space, n);
    let dim = perm.len();
    let regrouped = CMatrix::from_fn(dim, dim, |r, c| m[(perm[r], perm[c])]);
    Ok((DensityOperator::from_matrix_unchecked(regrouped), space.power(n)))
}

/// Vector version of [`tensor_power`] with the same regrouping.
pub fn tensor_power_pure(
    psi: &PureState,
    space: &BipartiteSpace,
    n: usize,
    cap: usize,
) -> Result<(PureState, BipartiteSpace)> {
    let factors = vec![psi.clone(); n];
    tensor_product_pure(&factors, space, cap)
}

/// `ψ_1 ⊗ … ⊗ ψ_n` regrouped as `A^n | B^n`.
pub fn tensor_product_pure(
    factors: &[PureState],
    space: &BipartiteSpace,
    cap: usize,
) -> Result<(PureState, BipartiteSpace)> {
    let n = factors.len();
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    checked_power(space.dim(), n, cap, "tensor power vector length")?;
    let mut v = CVector::from_element(1, ONE);
    for f in factors {
        check_dim(space.dim(), f.dim())?;
        v = kron_vec(&v, f.amplitudes());
    }
    let perm = regroup_permutation(space, n);
    let regrouped = CVector::from_fn(perm.len(), |r, _| v[perm[r]]);
    Ok((
        PureState {
            amplitudes: regrouped,
        },
        space.power(n),
    ))
}

/// `P_A ⊗ P_B` restricted to the given local levels, as a rectangular
/// isometry adjoint (rows = block basis, columns = composite basis).
pub fn local_block_projector(
    space: &BipartiteSpace,
    levels_a: &[usize],
    levels_b: &[usize],
) -> Result<(CMatrix, BipartiteSpace)> {
    let block = crate::space::BipartiteSpace::new(
        crate::space::SpectrumSpec::new(
            levels_a.iter().map(|&a| space.spec_a().levels()[a]).collect(),
        )?,
        crate::space::SpectrumSpec::new(
            levels_b.iter().map(|&b| space.spec_b().levels()[b]).collect(),
        )?,
    )?;
    let mut p = CMatrix::zeros(block.dim(), space.dim());
    for (ia, &a) in levels_a.iter().enumerate() {
        for (ib, &b) in levels_b.iter().enumerate() {
            if a >= space.dim_a() || b >= space.dim_b() {
                return Err(Error::InvalidArgument(format!(
                    "block level ({a}, {b}) outside the cutoff"
                )));
            }
            p[(block.index(ia, ib), space.index(a, b))] = ONE;
        }
    }
    Ok((p, block))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::random;
    use crate::space::harmonic_space;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell22() -> (BipartiteSpace, PureState) {
        let s = harmonic_space(2, 2).unwrap();
        let b = PureState::bell(&s, 0, 1).unwrap();
        (s, b)
    }

    #[test]
    fn density_validation_messages() {
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensityOperator::new(m.clone()), Err(Error::InvalidState(s)) if s.contains("Hermitian")));
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityOperator::new(m), Err(Error::InvalidState(s)) if s.contains("trace")));
        let m = linalg::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityOperator::new(m), Err(Error::InvalidState(s)) if s.contains("semidefinite")));
    }

    #[test]
    fn schmidt_of_product_and_bell() {
        let s = harmonic_space(2, 2).unwrap();
        let f = schmidt_decompose(&PureState::basis(4, 0), &s).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-14);
        assert_eq!(f.rank(1e-12), 1);
        let (s, b) = bell22();
        let f = schmidt_decompose(&b, &s).unwrap();
        assert!((f.coefficients[0] - 0.5).abs() < 1e-14);
        assert!((f.coefficients[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn schmidt_rejects_unnormalized() {
        let s = harmonic_space(2, 2).unwrap();
        let psi = PureState {
            amplitudes: CVector::from_element(4, ONE),
        };
        assert!(matches!(schmidt_decompose(&psi, &s), Err(Error::InvalidState(_))));
    }

    #[test]
    fn schmidt_reconstruction_random() {
        let s = harmonic_space(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let psi = random::pure_state(s.dim(), &mut rng);
            let f = schmidt_decompose(&psi, &s).unwrap();
            let err = (f.reconstruct() - psi.amplitudes()).norm();
            assert!(err < 1e-10, "reconstruction error {err}");
            let sum: f64 = f.coefficients.iter().sum();
            assert!((sum - 1.0).abs() < 1e-10);
            assert!(f.coefficients.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn marginals_of_reference_states() {
        let s = harmonic_space(2, 2).unwrap();
        let ground = DensityOperator::from_pure(&PureState::basis(4, 0));
        let m = partial_trace_b(&ground, &s).unwrap();
        assert!(max_abs_diff(m.matrix(), &linalg::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
        let (s, b) = bell22();
        let m = partial_trace_b(&DensityOperator::from_pure(&b), &s).unwrap();
        assert!(max_abs_diff(m.matrix(), &CMatrix::identity(2, 2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn marginal_of_product_is_exact() {
        let s = harmonic_space(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ra = random::density(3, &mut rng);
        let rb = random::density(2, &mut rng);
        let prod = ra.kron(&rb);
        let m = partial_trace_b(&prod, &s).unwrap();
        assert!(max_abs_diff(m.matrix(), ra.matrix()) < 1e-15);
        let m = partial_trace_a(&prod, &s).unwrap();
        assert!(max_abs_diff(m.matrix(), rb.matrix()) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_product() {
        let s = harmonic_space(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ra = random::density(3, &mut rng);
        let rb = random::density(2, &mut rng);
        let pt = partial_transpose_a(&ra.kron(&rb), &s).unwrap();
        let expected = kron(&ra.matrix().transpose(), rb.matrix());
        assert!(max_abs_diff(&pt, &expected) < 1e-15);
        assert!(HermitianEigen::new(&pt).min() > -1e-12);
    }

    #[test]
    fn bell_is_npt_with_half_witness() {
        let (s, b) = bell22();
        let c = is_npt(&DensityOperator::from_pure(&b), &s, 1e-9).unwrap();
        assert!(c.npt);
        assert!((c.witness + 0.5).abs() < 1e-12);
    }

    /// Brute force over a p grid against `(1 - 3p)/4`.
    #[test]
    fn isotropic_partial_transpose_minimum() {
        let (s, b) = bell22();
        let bell = DensityOperator::from_pure(&b);
        let mixed = DensityOperator::maximally_mixed(4);
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let rho = DensityOperator::mixture(&[(p, &bell), (1.0 - p, &mixed)]).unwrap();
            let min = HermitianEigen::new(&partial_transpose_a(&rho, &s).unwrap()).min();
            assert!((min - (1.0 - 3.0 * p) / 4.0).abs() < 1e-12);
        }
        let third = DensityOperator::mixture(&[(1.0 / 3.0, &bell), (2.0 / 3.0, &mixed)]).unwrap();
        assert!(!is_npt(&third, &s, 1e-9).unwrap().npt);
    }

    #[test]
    fn separable_mixture_is_ppt() {
        let s = harmonic_space(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::separable_mixture(&s, 10, &mut rng);
        assert!(!is_npt(&rho, &s, 1e-9).unwrap().npt);
    }

    #[test]
    fn npt_rejects_nonpositive_tol() {
        let (s, b) = bell22();
        assert!(is_npt(&DensityOperator::from_pure(&b), &s, 0.0).is_err());
    }

    #[test]
    fn trace_distance_reference_values() {
        let a = DensityOperator::from_pure(&PureState::basis(4, 0));
        let b = DensityOperator::from_pure(&PureState::basis(4, 3));
        assert_eq!(trace_norm_distance(&a, &a).unwrap(), 0.0);
        assert!((trace_norm_distance(&a, &b).unwrap() - 2.0).abs() < 1e-14);
        assert!(trace_norm_distance(&a, &DensityOperator::maximally_mixed(3)).is_err());
    }

    /// Closed form `2√(1−|c|²)` against eigenvalues of the difference.
    #[test]
    fn pure_distance_matches_eigen_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x = random::pure_state(6, &mut rng);
            let y = random::pure_state(6, &mut rng);
            let closed = pure_trace_distance(&x, &y).unwrap();
            let eig = trace_norm_distance(
                &DensityOperator::from_pure(&x),
                &DensityOperator::from_pure(&y),
            )
            .unwrap();
            assert!((closed - eig).abs() < 1e-10);
        }
    }

    #[test]
    fn tensor_power_identity_and_cap() {
        let (s, b) = bell22();
        let rho = DensityOperator::from_pure(&b);
        let (p1, s1) = tensor_power(&rho, &s, 1, DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(&p1, &rho);
        assert_eq!(s1, s);
        match tensor_power(&rho, &s, 6, 1024) {
            Err(Error::ResourceLimit { cap, .. }) => assert_eq!(cap, 1024),
            other => panic!("expected resource limit, got {other:?}"),
        }
    }

    #[test]
    fn tensor_power_regrouping_matches_vector_route() {
        let s = harmonic_space(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let psi = random::pure_state(s.dim(), &mut rng);
        let (rho2, s2) = tensor_power(&DensityOperator::from_pure(&psi), &s, 2, 1024).unwrap();
        let (psi2, s2v) = tensor_power_pure(&psi, &s, 2, 1024).unwrap();
        assert_eq!(s2, s2v);
        assert!(max_abs_diff(rho2.matrix(), &outer(psi2.amplitudes())) < 1e-15);
        // the A-marginal of the regrouped power is the power of the A-marginal
        let ma = partial_trace_b(&DensityOperator::from_pure(&psi), &s).unwrap();
        let ma2 = partial_trace_b(&rho2, &s2).unwrap();
        assert!(max_abs_diff(ma2.matrix(), &kron(ma.matrix(), ma.matrix())) < 1e-14);
    }

    #[test]
    fn block_projector_extracts_local_block() {
        let s = harmonic_space(4, 4).unwrap();
        let phi = PureState::bell(&s, 2, 3).unwrap();
        let (p, block) = local_block_projector(&s, &[2, 3], &[2, 3]).unwrap();
        let v = &p * phi.amplitudes();
        let expected = PureState::bell(&block, 0, 1).unwrap();
        assert!((v - expected.amplitudes()).norm() < 1e-15);
    }
}
