use rayon::prelude::*;

use crate::error::{check_dim, Result};
use crate::linalg::{expectation, kron_vec, CMatrix, CVector, HermitianEigen};
use crate::random::unit_vector;
use crate::space::BipartiteSpace;
use crate::states::PureState;

use super::{argmin_stable, restart_rng};

const MAX_SWEEPS: usize = 200;
const SPECTRAL_STARTS: usize = 3;

/// Product vector `ψ_A ⊗ ψ_B` with the objective value `⟨ψ|G|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    pub psi_a: CVector,
    pub psi_b: CVector,
    pub value: f64,
}

impl ProductPoint {
    pub fn vector(&self) -> CVector {
        kron_vec(&self.psi_a, &self.psi_b)
    }

    pub fn state(&self) -> PureState {
        PureState::normalized(self.vector()).expect("product of unit vectors")
    }
}

/// `Σ_{a,a'} conj(ψ_A[a]) G[(a,b),(a',b')] ψ_A[a']`.
pub(crate) fn contract_a(g: &CMatrix, space: &BipartiteSpace, psi_a: &CVector) -> CMatrix {
    let (da, db) = (space.dim_a(), space.dim_b());
    CMatrix::from_fn(db, db, |b, b2| {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for a in 0..da {
            let ca = psi_a[a].conj();
            for a2 in 0..da {
                acc += ca * g[(space.index(a, b), space.index(a2, b2))] * psi_a[a2];
            }
        }
        acc
    })
}

pub(crate) fn contract_b(g: &CMatrix, space: &BipartiteSpace, psi_b: &CVector) -> CMatrix {
    let (da, db) = (space.dim_a(), space.dim_b());
    CMatrix::from_fn(da, da, |a, a2| {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for b in 0..db {
            let cb = psi_b[b].conj();
            for b2 in 0..db {
                acc += cb * g[(space.index(a, b), space.index(a2, b2))] * psi_b[b2];
            }
        }
        acc
    })
}

fn lowest(m: &CMatrix) -> (f64, CVector) {
    let eig = HermitianEigen::new(m);
    (eig.values[0], eig.vectors.column(0).into_owned())
}

/// Alternating exact minimization from `start_a`. Returns the final point
/// and the objective after every half-step.
pub fn alternating_minimization(
    g: &CMatrix,
    space: &BipartiteSpace,
    start_a: CVector,
) -> (ProductPoint, Vec<f64>) {
    let mut psi_a = start_a;
    let (mut value, mut psi_b) = lowest(&contract_a(g, space, &psi_a));
    let mut trace = vec![value];
    for _ in 0..MAX_SWEEPS {
        let (va, a) = lowest(&contract_b(g, space, &psi_b));
        psi_a = a;
        let (vb, b) = lowest(&contract_a(g, space, &psi_a));
        psi_b = b;
        trace.push(va);
        trace.push(vb);
        let improvement = value - vb;
        value = vb;
        if improvement <= 1e-14 * (1.0 + value.abs()) {
            break;
        }
    }
    let point = ProductPoint {
        value: expectation(g, &kron_vec(&psi_a, &psi_b)),
        psi_a,
        psi_b,
    };
    (point, trace)
}

/// Leading A-side Schmidt vector of each of the `count` lowest eigenvectors
/// of `G`.
fn spectral_starts(g: &CMatrix, space: &BipartiteSpace, count: usize) -> Vec<CVector> {
    let eig = HermitianEigen::new(g);
    (0..count.min(space.dim()))
        .map(|j| {
            let v = eig.vectors.column(j);
            let m = CMatrix::from_fn(space.dim_a(), space.dim_b(), |a, b| v[space.index(a, b)]);
            let svd = m.svd(true, false);
            let top = svd
                .singular_values
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .map_or(0, |(i, _)| i);
            svd.u.expect("requested U").column(top).into_owned()
        })
        .collect()
}

/// Approximate minimizer of `⟨ψ_A ⊗ ψ_B| G |ψ_A ⊗ ψ_B⟩`.
///
/// Deterministic starts come first: the A-level of the smallest diagonal
/// entry of `G`, then the leading Schmidt vectors of the three lowest
/// eigenvectors of `G`. They are followed by `restarts` seeded Haar-random
/// vectors.
pub fn lmo_product_state(
    g: &CMatrix,
    space: &BipartiteSpace,
    restarts: usize,
    seed: u64,
) -> Result<ProductPoint> {
    check_dim(space.dim(), g.nrows())?;
    let da = space.dim_a();
    let best_diag = (0..space.dim())
        .min_by(|&i, &j| g[(i, i)].re.total_cmp(&g[(j, j)].re))
        .unwrap_or(0);
    let mut basis_start = CVector::zeros(da);
    basis_start[space.split(best_diag).0] = crate::linalg::ONE;
    let mut fixed = vec![basis_start];
    fixed.extend(spectral_starts(g, space, SPECTRAL_STARTS));
    let n_fixed = fixed.len();

    let points: Vec<ProductPoint> = (0..n_fixed + restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r < n_fixed {
                fixed[r].clone()
            } else {
                let mut rng = restart_rng(seed, r - n_fixed + 1);
                unit_vector(da, &mut rng)
            };
            alternating_minimization(g, space, start).0
        })
        .collect();
    let best = argmin_stable(&points, |p| p.value).expect("at least one start");
    Ok(points[best].clone())
}
