//! Entropy functionals and bounds. Public entropies are in bits; the free
//! energy works in natural units.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermiticity_error, CMatrix, HermitianEigen};
use crate::space::{mean_energy, BipartiteSpace};
use crate::states::{partial_trace_b, schmidt_decompose, DensityOperator, PureState, PSD_TOL};

/// Eigenvalues below this are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// `log_derivative_action` refuses states with a smaller minimum eigenvalue.
pub const MIN_LOG_EIGENVALUE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    Exact,
    UpperBound,
    #[serde(rename = "upper-bound(heuristic-LMO)")]
    UpperBoundHeuristicLmo,
    Heuristic,
}

/// Value in bits plus solver diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub value: f64,
    pub iterations: usize,
    /// Final optimality gap, when the solver produces one.
    pub gap: Option<f64>,
    pub certificate: Certificate,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl MeasureReport {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            iterations: 0,
            gap: None,
            certificate: Certificate::Exact,
            seed: None,
            notes: Vec::new(),
        }
    }
}

/// Clamps eigenvalues in `[-PSD_TOL, 0)` to zero and rejects anything more
/// negative.
fn clamp_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&v| {
            if v < -PSD_TOL {
                Err(Error::InvalidState(format!(
                    "eigenvalue {v:.3e} is below the positivity tolerance"
                )))
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// `-Σ p log₂ p` over a spectrum, with the same clamping rule as
/// [`von_neumann_entropy`].
pub fn spectrum_entropy(values: &[f64]) -> Result<f64> {
    Ok(clamp_spectrum(values)?
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}

/// `S(ρ) = -tr[ρ log₂ ρ]`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    spectrum_entropy(&rho.eigen().values)
}

/// Entropy of the A-marginal of a pure state.
pub fn entropy_of_entanglement(psi: &PureState, space: &BipartiteSpace) -> Result<f64> {
    let rho = DensityOperator::from_pure(psi);
    von_neumann_entropy(&partial_trace_b(&rho, space)?)
}

/// Same quantity through the squared Schmidt coefficients.
pub fn schmidt_entropy(psi: &PureState, space: &BipartiteSpace) -> Result<f64> {
    spectrum_entropy(&schmidt_decompose(psi, space)?.coefficients)
}

/// Entropy of entanglement for a density operator that must be pure
/// (`tr ρ² = 1` within `purity_tol`).
pub fn entropy_of_entanglement_density(
    rho: &DensityOperator,
    space: &BipartiteSpace,
    purity_tol: f64,
) -> Result<f64> {
    check_dim(space.dim(), rho.dim())?;
    match rho.as_pure(purity_tol) {
        Some(psi) => entropy_of_entanglement(&psi, space),
        None => Err(Error::InvalidArgument(format!(
            "state is mixed (purity {:.6}); use entanglement of formation or relative entropy of entanglement",
            rho.purity()
        ))),
    }
}

/// `S(ρ‖σ) = tr[ρ (log₂ ρ − log₂ σ)]`, `+∞` when the support of `ρ` is not
/// contained in the support of `σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    let er = rho.eigen();
    let es = sigma.eigen();
    let pr = clamp_spectrum(&er.values)?;
    let ps = clamp_spectrum(&es.values)?;
    // overlaps |⟨r_i|s_j⟩|²
    let cross = er.vectors.adjoint() * &es.vectors;
    let mut acc = 0.0;
    for (i, &p) in pr.iter().enumerate() {
        if p <= SUPPORT_TOL {
            continue;
        }
        acc += p * p.log2();
        for (j, &q) in ps.iter().enumerate() {
            let w = p * cross[(i, j)].norm_sqr();
            if q <= SUPPORT_TOL {
                if w > SUPPORT_TOL {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            acc -= w * q.log2();
        }
    }
    Ok(acc.max(0.0))
}

/// Classic Fannes bound `t log₂ d − t log₂ t` for trace distance `t ≤ 1/e`.
pub fn fannes_bound(t: f64, d: usize) -> Result<f64> {
    let window = (-1.0f64).exp();
    if !(0.0..=window).contains(&t) {
        return Err(Error::OutOfDomain(format!(
            "Fannes bound needs 0 <= t <= 1/e, got t = {t}; restrict the sampler to that window"
        )));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {d}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(t * (d as f64).log2() - t * t.log2())
}

/// `F(ω) = tr[ωH] − S(ω)/β` in natural units.
pub fn free_energy(omega: &DensityOperator, beta: f64, space: &BipartiteSpace) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let energy = mean_energy(space, omega)?;
    let s_nats = von_neumann_entropy(omega)? * LN_2;
    Ok(energy - s_nats / beta)
}

/// First divided difference of `ln` at `(a, b)`.
fn log_divided_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-8 * a.max(b) {
        // ln(a/b)/(a-b) expanded around the midpoint
        let m = 0.5 * (a + b);
        let x = d / m;
        (1.0 + x * x / 12.0) / m
    } else {
        (a / b).ln() / d
    }
}

/// Fréchet derivative of the natural matrix logarithm at `rho`, applied to
/// the Hermitian `direction` (Daleckii–Krein form in the eigenbasis of
/// `rho`).
pub fn log_derivative_action(rho: &DensityOperator, direction: &CMatrix) -> Result<CMatrix> {
    log_derivative_with(&rho.eigen(), direction)
}

pub(crate) fn log_derivative_with(eig: &HermitianEigen, direction: &CMatrix) -> Result<CMatrix> {
    check_dim(eig.values.len(), direction.nrows())?;
    if !direction.is_square() || hermiticity_error(direction) > 1e-8 {
        return Err(Error::InvalidArgument("direction must be a Hermitian matrix".into()));
    }
    let min = eig.min();
    if min <= MIN_LOG_EIGENVALUE {
        return Err(Error::IllConditioned(format!(
            "minimum eigenvalue {min:.3e} is too small for the log derivative; floor-mix the state first"
        )));
    }
    let u = &eig.vectors;
    let mut inner = u.adjoint() * direction * u;
    let n = eig.values.len();
    for r in 0..n {
        for c in 0..n {
            let g = log_divided_difference(eig.values[r], eig.values[c]);
            inner[(r, c)] *= Complex64::new(g, 0.0);
        }
    }
    Ok(u * inner * u.adjoint())
}
