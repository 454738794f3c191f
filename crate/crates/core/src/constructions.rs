//! Explicit state families and sequence harnesses: states arbitrarily close
//! to a product state with large entanglement, dense perturbations with
//! unbounded marginal entropy, entangled neighbours inside an energy budget,
//! and per-copy continuity tables.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{outer, CMatrix, CVector, HermitianEigen};
use crate::measures::{entropy_of_entanglement, fannes_bound, schmidt_entropy};
use crate::space::{
    harmonic_space, mean_energy, mean_energy_pure, BipartiteSpace, EnergyBudget,
};
use crate::states::{
    is_npt, local_block_projector, partial_transpose_matrix, pure_trace_distance,
    schmidt_decompose, tensor_power_pure, tensor_product_pure, trace_norm_distance,
    DensityOperator, PureState, DEFAULT_VECTOR_CAP,
};

/// Largest `k` for which the vector path of the near-product family is
/// materialized in tests and reports.
pub const EXAMPLE1_MATRIX_MAX_K: usize = 64;

/// `δ_k = 1 / log₂ k`.
pub fn example1_delta(k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    Ok(1.0 / (k as f64).log2())
}

/// One member of the near-product family at index `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example1Report {
    pub k: u64,
    pub delta_k: f64,
    pub entanglement_bits: f64,
    pub trace_distance_to_ground: f64,
    pub mean_energy: f64,
}

/// `ψ_k = √(1−δ_k) |0,0⟩ + √(δ_k/k) Σ_{n=1..k} |n,n⟩`.
pub fn example1_state(k: usize, space: &BipartiteSpace) -> Result<PureState> {
    let delta = example1_delta(k as u64)?;
    if k + 1 > space.dim_a() || k + 1 > space.dim_b() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} needs cutoffs of at least {}, got ({}, {})",
            k + 1,
            space.dim_a(),
            space.dim_b()
        )));
    }
    let mut v = CVector::zeros(space.dim());
    v[space.index(0, 0)] = Complex64::new((1.0 - delta).sqrt(), 0.0);
    let tail = (delta / k as f64).sqrt();
    for n in 1..=k {
        v[space.index(n, n)] = Complex64::new(tail, 0.0);
    }
    PureState::new(v)
}

/// Closed forms under the harmonic ladder: `E = −(1−δ)log₂(1−δ) + δ log₂(k/δ)`,
/// energy `δ(k+1)`, distance `2√δ`.
pub fn example1_analytic(k: u64) -> Result<Example1Report> {
    let delta = example1_delta(k)?;
    let head = if delta < 1.0 {
        -(1.0 - delta) * (1.0 - delta).log2()
    } else {
        0.0
    };
    Ok(Example1Report {
        k,
        delta_k: delta,
        entanglement_bits: head + delta * (k as f64 / delta).log2(),
        trace_distance_to_ground: 2.0 * delta.sqrt(),
        mean_energy: delta * (k as f64 + 1.0),
    })
}

/// The same report evaluated on the vector `ψ_k` in a `(k+1) × (k+1)`
/// harmonic truncation.
pub fn example1_materialized(k: usize) -> Result<Example1Report> {
    if k > EXAMPLE1_MATRIX_MAX_K {
        return Err(Error::ResourceLimit {
            what: "materialized near-product state index",
            requested: k,
            cap: EXAMPLE1_MATRIX_MAX_K,
        });
    }
    let space = harmonic_space(k + 1, k + 1)?;
    let psi = example1_state(k, &space)?;
    let ground = PureState::basis(space.dim(), 0);
    Ok(Example1Report {
        k: k as u64,
        delta_k: example1_delta(k as u64)?,
        entanglement_bits: entropy_of_entanglement(&psi, &space)?,
        trace_distance_to_ground: pure_trace_distance(&psi, &ground)?,
        mean_energy: mean_energy_pure(&space, &psi)?,
    })
}

/// Scan over `k = kmin, 2 kmin, 4 kmin, … ≤ kmax`.
pub fn example1_scan(kmin: u64, kmax: u64) -> Result<Vec<Example1Report>> {
    if kmin < 2 || kmax < kmin {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= kmin <= kmax, got kmin = {kmin}, kmax = {kmax}"
        )));
    }
    let mut out = Vec::new();
    let mut k = kmin;
    while k <= kmax {
        out.push(example1_analytic(k)?);
        match k.checked_mul(2) {
            Some(next) => k = next,
            None => break,
        }
    }
    Ok(out)
}

/// Perturbed Schmidt weights `q(n) ∝ p(n) + c(n)` on `n = 1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailWeights {
    pub base: Vec<f64>,
    pub k: u64,
    pub cutoff: usize,
    /// Normalized weights, `weights[n-1] = q(n)`.
    pub weights: Vec<f64>,
    /// Sum of the unnormalized weights.
    pub normalizer: f64,
}

impl TailWeights {
    /// Normalized `p(n) + tail(n)` over `n = 1..=cutoff`.
    pub fn with_tail(
        base: &[f64],
        k: u64,
        cutoff: usize,
        tail: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        if base.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("base weights must be nonnegative".into()));
        }
        let mass: f64 = base.iter().sum();
        if mass > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "base weights sum to {mass} > 1"
            )));
        }
        let raw: Vec<f64> = (1..=cutoff)
            .map(|n| base.get(n - 1).copied().unwrap_or(0.0) + tail(n))
            .collect();
        let normalizer: f64 = raw.iter().sum();
        if !(normalizer > 0.0) {
            return Err(Error::InvalidArgument("weights vanish on the cutoff".into()));
        }
        Ok(Self {
            base: base.to_vec(),
            k,
            cutoff,
            weights: raw.into_iter().map(|w| w / normalizer).collect(),
            normalizer,
        })
    }

    pub fn entropy_bits(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&q| q > 0.0)
            .map(|&q| -q * q.log2())
            .sum()
    }

    /// `½ Σ |q(n) − p(n)|` over the cutoff.
    pub fn total_variation(&self) -> f64 {
        0.5 * self
            .weights
            .iter()
            .enumerate()
            .map(|(i, q)| (q - self.base.get(i).copied().unwrap_or(0.0)).abs())
            .sum::<f64>()
    }
}

/// `1 / (k n log₂(n)²)` for `n ≥ 2`, zero at `n = 1`.
pub fn prop2_tail(k: u64, n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        let l = (n as f64).log2();
        1.0 / (k as f64 * n as f64 * l * l)
    }
}

pub fn prop2_weights(p: &[f64], k: u64, cutoff: usize) -> Result<TailWeights> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if cutoff < 4 {
        return Err(Error::InvalidArgument(format!("cutoff must be at least 4, got {cutoff}")));
    }
    if p.len() > cutoff {
        return Err(Error::InvalidArgument(format!(
            "base distribution has {} entries, more than the cutoff {cutoff}",
            p.len()
        )));
    }
    TailWeights::with_tail(p, k, cutoff, |n| prop2_tail(k, n))
}

/// Entropy of the normalized perturbed weights for each cutoff, in order.
pub fn prop2_entropy_growth(p: &[f64], k: u64, cutoffs: &[usize]) -> Result<Vec<(usize, f64)>> {
    if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("cutoffs must be strictly increasing".into()));
    }
    cutoffs
        .iter()
        .map(|&n| Ok((n, prop2_weights(p, k, n)?.entropy_bits())))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborBranch {
    /// Projected state plus the missing weight placed on an entangled block vector.
    TailBlock,
    /// Small mixture of `σ` with a maximally entangled block vector.
    UniformMixture,
    /// Large tolerance: the Bell state on levels {0,1} is already close enough.
    BellBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborCertificate {
    pub k: usize,
    pub branch: NeighborBranch,
    /// Weight carried by the entangled block vector.
    pub mixing_weight: f64,
    pub theta: f64,
    pub trace_distance: f64,
    pub mean_energy: f64,
    /// Smallest eigenvalue of the partial transpose of `ρ` projected onto
    /// the block spanned by levels `k, k+1` of both parties.
    pub npt_witness: f64,
    pub sigma_energy: f64,
    pub eps: f64,
    pub budget: f64,
    /// Whether the removed tail carried at least as much energy as the
    /// block vector replacing it (tail-block branch only).
    pub tail_energy_dominates: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborOptions {
    /// First block index to try.
    pub k_min: usize,
    /// Fixed mixing weight for the mixture branch. `None` uses `eps / 4`,
    /// halved against the energy break-even when the budget requires it.
    pub weight: Option<f64>,
    /// Number of grid points on `θ ∈ (0, π/4]`.
    pub theta_steps: usize,
}

impl Default for NeighborOptions {
    fn default() -> Self {
        Self {
            k_min: 1,
            weight: None,
            theta_steps: 16,
        }
    }
}

/// Minimum eigenvalue of the partial transpose of `ρ` restricted to levels
/// `{k, k+1}` on both sides.
pub fn block_witness(m: &CMatrix, space: &BipartiteSpace, k: usize) -> Result<f64> {
    let (p, block) = local_block_projector(space, &[k, k + 1], &[k, k + 1])?;
    let restricted = &p * m * p.adjoint();
    Ok(HermitianEigen::new(&partial_transpose_matrix(&restricted, &block)?).min())
}

fn embed(space: &BipartiteSpace, psi: &PureState) -> CMatrix {
    debug_assert_eq!(space.dim(), psi.dim());
    outer(psi.amplitudes())
}

/// Finds an NPT state `ρ` with `‖σ−ρ‖₁ < eps` and `tr[Hρ] < M`.
///
/// Scans `k` upward from `options.k_min`. When `σ` carries weight outside
/// the block of levels `< k`, that weight is moved onto
/// `cos θ |k,k⟩ + sin θ |k+1,k+1⟩`; otherwise `σ` is mixed with the
/// maximally entangled vector on levels `k, k+1`.
pub fn dense_entangled_neighbor(
    sigma: &DensityOperator,
    space: &BipartiteSpace,
    eps: f64,
    budget: EnergyBudget,
    tol: f64,
    options: &NeighborOptions,
) -> Result<(DensityOperator, NeighborCertificate)> {
    check_dim(space.dim(), sigma.dim())?;
    if !(eps > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument("eps and tol must be positive".into()));
    }
    let sigma_energy = mean_energy(space, sigma)?;
    if !budget.admits(sigma_energy) {
        return Err(Error::BudgetViolation {
            energy: sigma_energy,
            budget: budget.value(),
        });
    }
    let m_budget = budget.value();
    let mut log = Vec::new();

    let cert = |k, branch, w, theta, dist, energy, witness, dominates| NeighborCertificate {
        k,
        branch,
        mixing_weight: w,
        theta,
        trace_distance: dist,
        mean_energy: energy,
        npt_witness: witness,
        sigma_energy,
        eps,
        budget: m_budget,
        tail_energy_dominates: dominates,
    };

    if eps >= 2.0 && m_budget > 1.0 {
        let bell = DensityOperator::from_pure(&PureState::bell(space, 0, 1)?);
        let dist = trace_norm_distance(sigma, &bell)?;
        let energy = mean_energy(space, &bell)?;
        let witness = block_witness(bell.matrix(), space, 0)?;
        if dist < eps && energy < m_budget && witness < -tol {
            let c = cert(0, NeighborBranch::BellBlock, 1.0, FRAC_PI_4, dist, energy, witness, None);
            return Ok((bell, c));
        }
        log.push(format!("bell block: distance {dist:.3e}, energy {energy:.6}"));
    }

    let k_max = space.dim_a().min(space.dim_b()).saturating_sub(2);
    let h = space.hamiltonian_diagonal();
    let sm = sigma.matrix();
    let n = space.dim();

    for k in options.k_min.max(0)..=k_max {
        let in_block = |i: usize| {
            let (a, b) = space.split(i);
            a < k && b < k
        };
        let lambda: f64 = (0..n).filter(|&i| in_block(i)).map(|i| sm[(i, i)].re).sum();
        let tail = (1.0 - lambda).max(0.0);
        let e_lo = space.energy(k, k);
        let e_hi = space.energy(k + 1, k + 1);

        if tail / 2.0 > tol {
            let mut projected = sm.clone();
            for r in 0..n {
                for c in 0..n {
                    if !(in_block(r) && in_block(c)) {
                        projected[(r, c)] = Complex64::new(0.0, 0.0);
                    }
                }
            }
            let projected_energy: f64 = (0..n).map(|i| projected[(i, i)].re * h[i]).sum();
            let removed_energy = sigma_energy - projected_energy;
            let (i_lo, i_hi) = (space.index(k, k), space.index(k + 1, k + 1));
            for j in (1..=options.theta_steps).rev() {
                let theta = FRAC_PI_4 * j as f64 / options.theta_steps as f64;
                let (c, s) = (theta.cos(), theta.sin());
                let phi_energy = c * c * e_lo + s * s * e_hi;
                let energy = projected_energy + tail * phi_energy;
                if !(energy < m_budget) {
                    log.push(format!("k={k} θ={theta:.4}: energy {energy:.6} >= {m_budget}"));
                    continue;
                }
                // diagonal pinching lower bound on the complement of the block
                let pinched: f64 = (0..n)
                    .filter(|&i| !in_block(i))
                    .map(|i| {
                        let phi_w = if i == i_lo {
                            c * c
                        } else if i == i_hi {
                            s * s
                        } else {
                            0.0
                        };
                        (sm[(i, i)].re - tail * phi_w).abs()
                    })
                    .sum();
                if pinched >= eps {
                    log.push(format!("k={k} θ={theta:.4}: distance >= {pinched:.3e}"));
                    continue;
                }
                let phi = PureState::two_level(space, k, k + 1, theta)?;
                let rho_m = &projected + embed(space, &phi).scale(tail);
                let witness = block_witness(&rho_m, space, k)?;
                if !(witness < -tol) {
                    log.push(format!("k={k} θ={theta:.4}: witness {witness:.3e}"));
                    continue;
                }
                let rho = DensityOperator::from_matrix_unchecked(rho_m);
                let dist = trace_norm_distance(sigma, &rho)?;
                if dist < eps {
                    let dominates = removed_energy >= tail * phi_energy;
                    let c = cert(
                        k,
                        NeighborBranch::TailBlock,
                        tail,
                        theta,
                        dist,
                        energy,
                        witness,
                        Some(dominates),
                    );
                    return Ok((rho, c));
                }
                log.push(format!("k={k} θ={theta:.4}: distance {dist:.3e} >= {eps}"));
            }
        } else {
            let phi_energy = 0.5 * (e_lo + e_hi);
            let mixed_energy = |w: f64| (1.0 - w) * sigma_energy + w * phi_energy;
            let w = match options.weight {
                Some(w) => w,
                None => {
                    let w = eps / 4.0;
                    if mixed_energy(w) < m_budget || phi_energy <= sigma_energy {
                        w
                    } else {
                        w.min(0.5 * (m_budget - sigma_energy) / (phi_energy - sigma_energy))
                    }
                }
            };
            if !(w > 0.0 && w <= 1.0) {
                log.push(format!("k={k}: mixing weight {w} outside (0, 1]"));
                continue;
            }
            let phi = PureState::bell(space, k, k + 1)?;
            let rho_m = sm.scale(1.0 - w) + embed(space, &phi).scale(w);
            let rho = DensityOperator::from_matrix_unchecked(rho_m);
            let energy = mean_energy(space, &rho)?;
            if !(energy < m_budget) {
                log.push(format!("k={k} w={w:.4e}: energy {energy:.6} >= {m_budget}"));
                continue;
            }
            let witness = block_witness(rho.matrix(), space, k)?;
            if !(witness < -tol) {
                log.push(format!("k={k} w={w:.4e}: witness {witness:.3e}"));
                continue;
            }
            let dist = trace_norm_distance(sigma, &rho)?;
            if dist < eps {
                let c = cert(
                    k,
                    NeighborBranch::UniformMixture,
                    w,
                    FRAC_PI_4,
                    dist,
                    energy,
                    witness,
                    None,
                );
                return Ok((rho, c));
            }
            log.push(format!("k={k} w={w:.4e}: distance {dist:.3e} >= {eps}"));
        }
    }
    Err(Error::ConstructionFailed { scan_log: log })
}

/// Independently recomputed certificate quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborVerification {
    pub trace_distance: f64,
    pub mean_energy: f64,
    pub block_witness: f64,
    /// Smallest eigenvalue of the full partial transpose.
    pub full_witness: f64,
    pub valid: bool,
}

/// Rechecks distance, energy and entanglement of `rho` from the matrices
/// alone, ignoring every number stored in the certificate except `k`.
pub fn verify_neighbor(
    sigma: &DensityOperator,
    rho: &DensityOperator,
    space: &BipartiteSpace,
    eps: f64,
    budget: EnergyBudget,
    tol: f64,
    k: usize,
) -> Result<NeighborVerification> {
    let checked = DensityOperator::new(rho.matrix().clone())?;
    let trace_distance = trace_norm_distance(sigma, &checked)?;
    let mean_energy = mean_energy(space, &checked)?;
    let (p, block) = local_block_projector(space, &[k, k + 1], &[k, k + 1])?;
    let restricted = &p * checked.matrix() * p.adjoint();
    let pt = crate::states::partial_transpose_matrix(&restricted, &block)?;
    let block_witness = crate::linalg::eigenvalues(&pt)[0];
    let full = is_npt(&checked, space, tol)?;
    let valid = trace_distance < eps && budget.admits(mean_energy) && block_witness < -tol && full.npt;
    Ok(NeighborVerification {
        trace_distance,
        mean_energy,
        block_witness,
        full_witness: full.witness,
        valid,
    })
}

/// How `σ_n` departs from `σ^{⊗n}` in the per-copy harness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PerturbationSchedule {
    /// `σ_n = σ^{⊗n}`.
    Exact,
    /// `σ_n = τ_n ⊗ σ^{⊗(n-1)}` where `τ_n` moves `scale / n²` of Schmidt
    /// weight from the smallest nonzero coefficient of `σ` to the largest.
    SchmidtWeight { scale: f64 },
}

/// Distance and entanglement gap rows shared by the continuity harnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub index: usize,
    pub trace_distance: f64,
    pub gap_bits: f64,
    /// `None` when the distance is outside the Fannes window.
    pub fannes_bound_bits: Option<f64>,
}

impl ContinuityRow {
    pub fn dominated(&self) -> bool {
        self.fannes_bound_bits.is_some_and(|b| self.gap_bits <= b)
    }
}

fn fannes_or_none(t: f64, d: usize) -> Option<f64> {
    fannes_bound(t, d).ok()
}

/// Schmidt weights of `σ`, in its own Schmidt basis, after moving `amount`
/// from the last nonzero coefficient to the first.
fn shifted_schmidt_state(
    psi: &PureState,
    space: &BipartiteSpace,
    amount: f64,
) -> Result<PureState> {
    let form = schmidt_decompose(psi, space)?;
    let rank = form.rank(1e-12);
    let mut w: Vec<f64> = form.coefficients[..rank].to_vec();
    if rank < 2 {
        return Err(Error::InvalidArgument(
            "Schmidt-weight perturbation needs Schmidt rank >= 2".into(),
        ));
    }
    if amount > w[rank - 1] {
        return Err(Error::InvalidArgument(format!(
            "perturbation {amount} exceeds the smallest Schmidt weight {}",
            w[rank - 1]
        )));
    }
    w[0] += amount;
    w[rank - 1] -= amount;
    let mut v = CVector::zeros(space.dim());
    for (n, wn) in w.iter().enumerate() {
        v += crate::linalg::kron_vec(&form.basis_a[n], &form.basis_b[n]).scale(wn.sqrt());
    }
    PureState::normalized(v)
}

/// Per-copy table `(n, ‖σ_n − σ^{⊗n}‖₁, |E(σ^{⊗n}) − E(σ_n)|/n, Fannes/n)`
/// for `n = 1..=n_max`, on the `A^n | B^n` cut.
pub fn asymptotic_gap_table(
    sigma: &PureState,
    space: &BipartiteSpace,
    schedule: PerturbationSchedule,
    n_max: usize,
) -> Result<Vec<ContinuityRow>> {
    let form = schmidt_decompose(sigma, space)?;
    let rank = form.rank(1e-12);
    if rank > 4 {
        return Err(Error::InvalidArgument(format!(
            "per-copy harness needs Schmidt rank <= 4, got {rank}"
        )));
    }
    // Everything below depends on σ only through its Schmidt coefficients,
    // and the perturbation stays in σ's Schmidt basis, so work on the
    // support: a local isometry away, and independent of the cutoff.
    let support = harmonic_space(rank.max(2), rank.max(2))?;
    let sigma = &PureState::from_schmidt_weights(&support, &form.coefficients[..rank])?;
    let space = &support;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (power, power_space) = tensor_power_pure(sigma, space, n, DEFAULT_VECTOR_CAP)?;
        let perturbed = match schedule {
            PerturbationSchedule::Exact => power.clone(),
            PerturbationSchedule::SchmidtWeight { scale } => {
                let tau = shifted_schmidt_state(sigma, space, scale / (n * n) as f64)?;
                let mut factors = vec![tau];
                factors.extend(std::iter::repeat_n(sigma.clone(), n - 1));
                tensor_product_pure(&factors, space, DEFAULT_VECTOR_CAP)?.0
            }
        };
        let t = pure_trace_distance(&power, &perturbed)?;
        let e_power = schmidt_entropy(&power, &power_space)?;
        let e_pert = schmidt_entropy(&perturbed, &power_space)?;
        let d_eff = rank.pow(n as u32).max(2);
        rows.push(ContinuityRow {
            index: n,
            trace_distance: t,
            gap_bits: (e_power - e_pert).abs() / n as f64,
            fannes_bound_bits: fannes_or_none(t, d_eff).map(|b| b / n as f64),
        });
    }
    Ok(rows)
}

/// Pure states `Σ √w_k(n) |n,n⟩` with `w_k = (1 − s_k) p + s_k q`,
/// `s_k = 2^{-k}`, compared against `Σ √p(n) |n,n⟩`. Every member must lie
/// inside the budget.
pub fn energy_bounded_sequence(
    space: &BipartiteSpace,
    base: &[f64],
    target: &[f64],
    steps: usize,
    budget: EnergyBudget,
) -> Result<Vec<ContinuityRow>> {
    if base.len() != target.len() {
        return Err(Error::InvalidArgument("base and target lengths differ".into()));
    }
    let sigma = PureState::from_schmidt_weights(space, base)?;
    let check = |psi: &PureState| -> Result<()> {
        let e = mean_energy_pure(space, psi)?;
        if budget.admits(e) {
            Ok(())
        } else {
            Err(Error::BudgetViolation {
                energy: e,
                budget: budget.value(),
            })
        }
    };
    check(&sigma)?;
    let e_sigma = entropy_of_entanglement(&sigma, space)?;
    let d_eff = base.len().max(2);
    (1..=steps)
        .map(|k| {
            let s = 0.5f64.powi(k as i32);
            let w: Vec<f64> = base
                .iter()
                .zip(target)
                .map(|(p, q)| (1.0 - s) * p + s * q)
                .collect();
            let psi = PureState::from_schmidt_weights(space, &w)?;
            check(&psi)?;
            let t = pure_trace_distance(&sigma, &psi)?;
            Ok(ContinuityRow {
                index: k,
                trace_distance: t,
                gap_bits: (entropy_of_entanglement(&psi, space)? - e_sigma).abs(),
                fannes_bound_bits: fannes_or_none(t, d_eff),
            })
        })
        .collect()
}
