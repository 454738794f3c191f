//! Truncated bipartite Hilbert spaces, local energy ladders, Gibbs states
//! and the mean-energy budget.
//!
//! Composite basis vectors are ordered `i = a * d_B + b` for local indices
//! `(a, b)`. Every other module uses the same convention.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::from_real_diagonal;
use crate::states::{DensityOperator, PureState};

/// Local energy ladder `ε(0) ≤ ε(1) ≤ …` of one subsystem at a finite cutoff.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSpec {
    levels: Vec<f64>,
}

impl SpectrumSpec {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("spectrum has no levels".into()));
        }
        if let Some(bad) = levels.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite level {bad}")));
        }
        if levels[0] < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ground level {} is negative",
                levels[0]
            )));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("levels must be nondecreasing".into()));
        }
        Ok(Self { levels })
    }

    /// `ε(n) = n` for `n = 0..d`.
    pub fn harmonic(d: usize) -> Result<Self> {
        Self::new((0..d).map(|n| n as f64).collect())
    }

    /// Levels of `H ⊗ 1 ⊗ … + … + 1 ⊗ … ⊗ H` on `n` copies, in multi-index
    /// order (not sorted, so the nondecreasing check does not apply).
    fn power(&self, n: usize) -> Self {
        let mut levels = vec![0.0];
        for _ in 0..n {
            levels = levels
                .iter()
                .flat_map(|&e| self.levels.iter().map(move |&l| e + l))
                .collect();
        }
        Self { levels }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Normalized Boltzmann weights `e^{-βε(n)} / Σ e^{-βε(m)}`.
    pub fn gibbs_populations(&self, beta: f64) -> Vec<f64> {
        let e0 = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = self.levels.iter().map(|e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }

    /// `ln tr[e^{-βH}]` on this truncation.
    pub fn log_partition_function(&self, beta: f64) -> f64 {
        let e0 = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        let s: f64 = self.levels.iter().map(|e| (-beta * (e - e0)).exp()).sum();
        -beta * e0 + s.ln()
    }
}

/// Truncated composite space `H_A ⊗ H_B` with `H = H_A ⊗ 1 + 1 ⊗ H_B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartiteSpace {
    spec_a: SpectrumSpec,
    spec_b: SpectrumSpec,
}

impl BipartiteSpace {
    pub fn new(spec_a: SpectrumSpec, spec_b: SpectrumSpec) -> Result<Self> {
        for (name, s) in [("A", &spec_a), ("B", &spec_b)] {
            if s.dim() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "cutoff dimension of party {name} must be at least 2, got {}",
                    s.dim()
                )));
            }
        }
        Ok(Self { spec_a, spec_b })
    }

    pub fn spec_a(&self) -> &SpectrumSpec {
        &self.spec_a
    }

    pub fn spec_b(&self) -> &SpectrumSpec {
        &self.spec_b
    }

    pub fn dim_a(&self) -> usize {
        self.spec_a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.spec_b.dim()
    }

    pub fn dim(&self) -> usize {
        self.dim_a() * self.dim_b()
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.dim_b() + b
    }

    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.dim_b(), i % self.dim_b())
    }

    pub fn energy(&self, a: usize, b: usize) -> f64 {
        self.spec_a.levels[a] + self.spec_b.levels[b]
    }

    /// Diagonal of `H` in composite order.
    pub fn hamiltonian_diagonal(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (a, b) = self.split(i);
                self.energy(a, b)
            })
            .collect()
    }

    pub fn hamiltonian(&self) -> crate::linalg::CMatrix {
        from_real_diagonal(&self.hamiltonian_diagonal())
    }

    pub fn ground_energy(&self) -> f64 {
        self.spec_a.levels[0] + self.spec_b.levels[0]
    }

    /// The space of `n` copies with all A-parties grouped against all
    /// B-parties (`A^n | B^n`).
    pub fn power(&self, n: usize) -> Self {
        Self {
            spec_a: self.spec_a.power(n),
            spec_b: self.spec_b.power(n),
        }
    }
}

/// Strict mean-energy budget `tr[ρH] < M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyBudget(f64);

impl EnergyBudget {
    pub fn new(max_energy: f64) -> Result<Self> {
        if max_energy.is_finite() && max_energy > 0.0 {
            Ok(Self(max_energy))
        } else {
            Err(Error::InvalidArgument(format!(
                "energy budget must be positive and finite, got {max_energy}"
            )))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn admits(&self, energy: f64) -> bool {
        energy < self.0
    }
}

/// Space with the harmonic ladder `ε(n) = n` on both parties.
pub fn harmonic_space(d_a: usize, d_b: usize) -> Result<BipartiteSpace> {
    if d_a < 2 || d_b < 2 {
        return Err(Error::InvalidArgument(format!(
            "cutoff dimensions must be at least 2, got ({d_a}, {d_b})"
        )));
    }
    BipartiteSpace::new(SpectrumSpec::harmonic(d_a)?, SpectrumSpec::harmonic(d_b)?)
}

/// `e^{-βH} / tr[e^{-βH}]` on the truncated space. Diagonal, and equal to
/// the product of the two local Gibbs states.
pub fn gibbs_state(space: &BipartiteSpace, beta: f64) -> Result<DensityOperator> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let pa = space.spec_a.gibbs_populations(beta);
    let pb = space.spec_b.gibbs_populations(beta);
    let diag: Vec<f64> = (0..space.dim())
        .map(|i| {
            let (a, b) = space.split(i);
            pa[a] * pb[b]
        })
        .collect();
    Ok(DensityOperator::from_matrix_unchecked(from_real_diagonal(&diag)))
}

/// `tr[ρH]`.
pub fn mean_energy(space: &BipartiteSpace, rho: &DensityOperator) -> Result<f64> {
    check_dim(space.dim(), rho.dim())?;
    let m = rho.matrix();
    Ok(space
        .hamiltonian_diagonal()
        .iter()
        .enumerate()
        .map(|(i, e)| m[(i, i)].re * e)
        .sum())
}

/// `⟨ψ|H|ψ⟩` without forming the projector.
pub fn mean_energy_pure(space: &BipartiteSpace, psi: &PureState) -> Result<f64> {
    check_dim(space.dim(), psi.dim())?;
    Ok(space
        .hamiltonian_diagonal()
        .iter()
        .zip(psi.amplitudes().iter())
        .map(|(e, c)| c.norm_sqr() * e)
        .sum())
}

pub fn in_energy_budget(
    space: &BipartiteSpace,
    rho: &DensityOperator,
    budget: EnergyBudget,
) -> Result<bool> {
    Ok(budget.admits(mean_energy(space, rho)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{trace_norm_distance, PureState};

    #[test]
    fn harmonic_diagonal_order() {
        let s = harmonic_space(2, 2).unwrap();
        assert_eq!(s.hamiltonian_diagonal(), vec![0.0, 1.0, 1.0, 2.0]);
        assert_eq!(s.ground_energy(), 0.0);
        let s = harmonic_space(3, 2).unwrap();
        assert_eq!(s.dim(), 6);
        let max = s.hamiltonian_diagonal().into_iter().fold(0.0, f64::max);
        assert_eq!(max, 3.0);
    }

    #[test]
    fn rejects_degenerate_cutoff() {
        assert!(matches!(harmonic_space(1, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(harmonic_space(2, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn spectrum_validation() {
        assert!(SpectrumSpec::new(vec![0.0, 2.0, 1.0]).is_err());
        assert!(SpectrumSpec::new(vec![-1.0, 0.0]).is_err());
        assert!(SpectrumSpec::new(vec![0.0, f64::NAN]).is_err());
        assert!(SpectrumSpec::new(vec![0.5, 0.5, 3.0]).is_ok());
    }

    #[test]
    fn gibbs_marginal_populations() {
        let spec = SpectrumSpec::harmonic(3).unwrap();
        let p = spec.gibbs_populations(std::f64::consts::LN_2);
        for (x, y) in p.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn gibbs_rejects_nonpositive_beta() {
        let s = harmonic_space(2, 2).unwrap();
        assert!(gibbs_state(&s, 0.0).is_err());
        assert!(gibbs_state(&s, -1.0).is_err());
    }

    #[test]
    fn gibbs_zero_temperature_limit() {
        let s = harmonic_space(4, 3).unwrap();
        let g = gibbs_state(&s, 50.0).unwrap();
        let ground = DensityOperator::from_pure(&PureState::basis(s.dim(), 0));
        assert!(trace_norm_distance(&g, &ground).unwrap() < 1e-10);
    }

    #[test]
    fn gibbs_trace_and_ordering() {
        let s = harmonic_space(5, 4).unwrap();
        let g = gibbs_state(&s, 0.7).unwrap();
        let tr: f64 = (0..s.dim()).map(|i| g.matrix()[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
        let pa = s.spec_a().gibbs_populations(0.7);
        assert!(pa.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn energies_of_reference_states() {
        let s = harmonic_space(2, 2).unwrap();
        let ground = DensityOperator::from_pure(&PureState::basis(4, 0));
        assert_eq!(mean_energy(&s, &ground).unwrap(), 0.0);
        let bell = PureState::bell(&s, 0, 1).unwrap();
        let e = mean_energy(&s, &DensityOperator::from_pure(&bell)).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        let budget = EnergyBudget::new(0.5).unwrap();
        assert!(in_energy_budget(&s, &ground, budget).unwrap());
        let tight = EnergyBudget::new(0.999).unwrap();
        assert!(!in_energy_budget(&s, &DensityOperator::from_pure(&bell), tight).unwrap());
        assert!(!EnergyBudget::new(1.0).unwrap().admits(1.0));
    }

    #[test]
    fn gibbs_inside_derived_budget() {
        let s = harmonic_space(8, 8).unwrap();
        let g = gibbs_state(&s, 1.0).unwrap();
        let e = mean_energy(&s, &g).unwrap();
        assert!(in_energy_budget(&s, &g, EnergyBudget::new(e + 1.0).unwrap()).unwrap());
    }

    #[test]
    fn mean_energy_dimension_mismatch() {
        let s = harmonic_space(2, 3).unwrap();
        let rho = DensityOperator::maximally_mixed(4);
        assert!(matches!(
            mean_energy(&s, &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_space_levels() {
        let s = harmonic_space(2, 3).unwrap().power(2);
        assert_eq!(s.dim_a(), 4);
        assert_eq!(s.dim_b(), 9);
        assert_eq!(s.spec_a().levels(), &[0.0, 1.0, 1.0, 2.0]);
    }
}
