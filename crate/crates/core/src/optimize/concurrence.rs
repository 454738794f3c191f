use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{binary_entropy, kron, CMatrix, HermitianEigen};
use crate::space::BipartiteSpace;
use crate::states::DensityOperator;

/// Two-qubit concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, where `λ_i` are the
/// decreasing square roots of the eigenvalues of `√ρ ρ̃ √ρ` and
/// `ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn concurrence_2q(rho: &DensityOperator, space: &BipartiteSpace) -> Result<f64> {
    if space.dim_a() != 2 || space.dim_b() != 2 {
        return Err(Error::InvalidArgument(format!(
            "concurrence needs two qubits, got local dimensions ({}, {})",
            space.dim_a(),
            space.dim_b()
        )));
    }
    check_dim(4, rho.dim())?;
    let i = Complex64::new(0.0, 1.0);
    let sy = CMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)]);
    let yy = kron(&sy, &sy);
    let flipped = &yy * rho.matrix().conjugate() * &yy;
    let sqrt_rho = rho.eigen().map(|v| v.max(0.0).sqrt());
    let r = &sqrt_rho * flipped * &sqrt_rho;
    let mut l: Vec<f64> = HermitianEigen::new(&r)
        .values
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Closed-form two-qubit entanglement of formation in bits,
/// `h((1 + √(1 − C²)) / 2)`.
pub fn concurrence_oracle_2q(rho: &DensityOperator, space: &BipartiteSpace) -> Result<f64> {
    let c = concurrence_2q(rho, space)?;
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::space::harmonic_space;
    use crate::states::PureState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn isotropic(p: f64) -> (BipartiteSpace, DensityOperator) {
        let s = harmonic_space(2, 2).unwrap();
        let bell = DensityOperator::from_pure(&PureState::bell(&s, 0, 1).unwrap());
        let rho =
            DensityOperator::mixture(&[(p, &bell), (1.0 - p, &DensityOperator::maximally_mixed(4))])
                .unwrap();
        (s, rho)
    }

    #[test]
    fn bell_has_unit_concurrence() {
        let (s, rho) = isotropic(1.0);
        assert!((concurrence_2q(&rho, &s).unwrap() - 1.0).abs() < 1e-7);
        assert!((concurrence_oracle_2q(&rho, &s).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn products_are_zero() {
        let s = harmonic_space(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let p = DensityOperator::from_pure(&random::product_state(&s, &mut rng));
            assert!(concurrence_oracle_2q(&p, &s).unwrap() < 1e-6);
        }
    }

    /// `C = max(0, (3p − 1)/2)` on the isotropic family.
    #[test]
    fn isotropic_family() {
        for p in [1.0 / 3.0, 0.5, 0.75, 0.9] {
            let (s, rho) = isotropic(p);
            let c = concurrence_2q(&rho, &s).unwrap();
            assert!((c - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs() < 1e-9, "p={p} c={c}");
        }
        let (s, rho) = isotropic(0.5);
        assert!((concurrence_oracle_2q(&rho, &s).unwrap() - 0.11761887377091781).abs() < 1e-9);
        let (s, rho) = isotropic(0.75);
        assert!((concurrence_oracle_2q(&rho, &s).unwrap() - 0.49897302161497825).abs() < 1e-9);
    }

    #[test]
    fn rejects_wrong_dims() {
        let s = harmonic_space(2, 3).unwrap();
        let r = concurrence_oracle_2q(&DensityOperator::maximally_mixed(6), &s);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
