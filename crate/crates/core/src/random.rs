//! Seeded random states and unitaries for property suites, restarts and
//! demo drivers.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{kron, outer, CMatrix, CVector};
use crate::space::BipartiteSpace;
use crate::states::{DensityOperator, PureState};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Haar-random unit vector.
pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    PureState::normalized(gaussian_vector(dim, rng)).expect("gaussian vector is nonzero")
}

/// Haar-random local vector.
pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = gaussian_vector(dim, rng);
    let n = v.norm();
    v.unscale(n)
}

/// Full-rank density operator from the Ginibre ensemble, `G G† / tr`.
pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let m = &g * g.adjoint();
    let tr = crate::linalg::trace(&m).re;
    DensityOperator::from_matrix_unchecked(m.unscale(tr))
}

/// Haar-random unitary via QR with the phase correction on `R`'s diagonal.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// `U_A ⊗ U_B` with independent Haar factors.
pub fn local_unitary<R: Rng + ?Sized>(space: &BipartiteSpace, rng: &mut R) -> CMatrix {
    let ua = unitary(space.dim_a(), rng);
    let ub = unitary(space.dim_b(), rng);
    kron(&ua, &ub)
}

pub fn product_state<R: Rng + ?Sized>(space: &BipartiteSpace, rng: &mut R) -> PureState {
    let a = unit_vector(space.dim_a(), rng);
    let b = unit_vector(space.dim_b(), rng);
    PureState::product(&a, &b).expect("product of unit vectors")
}

/// Random convex combination of `count` random product pure states.
pub fn separable_mixture<R: Rng + ?Sized>(
    space: &BipartiteSpace,
    count: usize,
    rng: &mut R,
) -> DensityOperator {
    let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    for w in weights {
        let p = product_state(space, rng);
        m += outer(p.amplitudes()).scale(w / total);
    }
    DensityOperator::from_matrix_unchecked(m)
}

/// Random probability vector with every entry at least `floor`.
pub fn distribution<R: Rng + ?Sized>(len: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let scale = 1.0 - floor * len as f64;
    raw.into_iter().map(|x| floor + scale * x / total).collect()
}
