use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::constructions::ContinuityRow;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{expectation, outer, CMatrix, CVector, HermitianEigen};
use crate::measures::{von_neumann_entropy, Certificate, MeasureReport};
use crate::space::{mean_energy, BipartiteSpace, EnergyBudget};
use crate::states::{trace_norm_distance, DensityOperator};

use super::lmo::{contract_a, contract_b, lmo_product_state, ProductPoint};
use super::{check_cap, DEFAULT_OPTIMIZATION_CAP};

const LINE_SEARCH_STEPS: usize = 60;
const MERGE_FIDELITY: f64 = 1.0 - 1e-12;
const DROP_WEIGHT: f64 = 1e-15;
const CORRECTIVE_STEPS: usize = 20;
const REFINE_ROUNDS: usize = 4;
const COMPACT_FIDELITY: f64 = 1.0 - 1e-6;
const COMPACT_WEIGHT: f64 = 1e-7;
const REFINE_STEPS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct RelEntOptions {
    /// Stop once the Frank-Wolfe gap (bits) drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Random restarts of the product-state oracle per iteration.
    pub restarts: usize,
    pub seed: u64,
    /// Minimum eigenvalue enforced on every iterate by mixing in the
    /// identity.
    pub floor: f64,
    pub dim_cap: usize,
}

impl Default for RelEntOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 1000,
            restarts: 4,
            seed: 0,
            floor: 1e-9,
            dim_cap: DEFAULT_OPTIMIZATION_CAP,
        }
    }
}

/// Explicit convex combination of product states, floor-mixed with the
/// identity. Separable by construction.
#[derive(Clone, Debug)]
pub struct SeparableIterate {
    pub atoms: Vec<(f64, ProductPoint)>,
    /// Weight `η` of the maximally mixed state in the assembled operator.
    pub floor_weight: f64,
    dim: usize,
}

impl SeparableIterate {
    fn maximally_mixed(space: &BipartiteSpace, floor_weight: f64) -> Self {
        let (da, db) = (space.dim_a(), space.dim_b());
        let w = 1.0 / space.dim() as f64;
        let mut atoms = Vec::with_capacity(space.dim());
        for a in 0..da {
            for b in 0..db {
                let mut psi_a = CVector::zeros(da);
                psi_a[a] = crate::linalg::ONE;
                let mut psi_b = CVector::zeros(db);
                psi_b[b] = crate::linalg::ONE;
                atoms.push((w, ProductPoint { psi_a, psi_b, value: 0.0 }));
            }
        }
        Self {
            atoms,
            floor_weight,
            dim: space.dim(),
        }
    }

    fn raw(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (w, p) in &self.atoms {
            m += outer(&p.vector()).scale(*w);
        }
        m
    }

    fn floor(&self, raw: &CMatrix) -> CMatrix {
        let mut m = raw.scale(1.0 - self.floor_weight);
        let add = Complex64::new(self.floor_weight / self.dim as f64, 0.0);
        for i in 0..self.dim {
            m[(i, i)] += add;
        }
        m
    }

    /// The separable operator `(1-η) Σ w_i |x_i⟩⟨x_i| + η 1/d`.
    pub fn assemble(&self) -> DensityOperator {
        DensityOperator::from_matrix_unchecked(self.floor(&self.raw()))
    }

    pub fn weight_sum(&self) -> f64 {
        self.atoms.iter().map(|(w, _)| w).sum()
    }
}

#[derive(Clone, Debug)]
pub struct RelEntResult {
    pub report: MeasureReport,
    pub witness: SeparableIterate,
    /// Objective (bits) after every accepted iteration, starting value first.
    pub history: Vec<f64>,
}

impl RelEntResult {
    pub fn is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0])
    }
}

struct Objective<'a> {
    sigma: &'a CMatrix,
    sigma_entropy: f64,
    floor_weight: f64,
    dim: usize,
}

struct Evaluation {
    value: f64,
    eig: HermitianEigen,
    /// `U† σ U` in the eigenbasis of the floored iterate.
    sigma_rot: CMatrix,
}

impl Objective<'_> {
    fn floored(&self, raw: &CMatrix) -> CMatrix {
        let mut m = raw.scale(1.0 - self.floor_weight);
        let add = Complex64::new(self.floor_weight / self.dim as f64, 0.0);
        for i in 0..self.dim {
            m[(i, i)] += add;
        }
        m
    }

    fn evaluate(&self, raw: &CMatrix) -> Evaluation {
        let eig = HermitianEigen::new(&self.floored(raw));
        let sigma_rot = eig.vectors.adjoint() * self.sigma * &eig.vectors;
        let cross: f64 = eig
            .values
            .iter()
            .enumerate()
            .map(|(j, &mu)| sigma_rot[(j, j)].re * mu.max(f64::MIN_POSITIVE).log2())
            .sum();
        Evaluation {
            value: -self.sigma_entropy - cross,
            eig,
            sigma_rot,
        }
    }

    fn divided(eig: &HermitianEigen, r: usize, c: usize) -> f64 {
        let (a, b) = (eig.values[r], eig.values[c]);
        let d = a - b;
        if d.abs() <= 1e-8 * a.max(b) {
            let m = 0.5 * (a + b);
            let x = d / m;
            (1.0 + x * x / 12.0) / m
        } else {
            (a / b).ln() / d
        }
    }

    /// Gradient with respect to the unfloored combination, in bits.
    fn gradient(&self, ev: &Evaluation) -> CMatrix {
        let n = self.dim;
        let mut inner = ev.sigma_rot.clone();
        for r in 0..n {
            for c in 0..n {
                inner[(r, c)] *= Complex64::new(Self::divided(&ev.eig, r, c), 0.0);
            }
        }
        let u = &ev.eig.vectors;
        (u * inner * u.adjoint()).scale(-(1.0 - self.floor_weight) / LN_2)
    }

    /// Directional derivative along `direction` (unfloored), in bits.
    fn slope(&self, ev: &Evaluation, direction: &CMatrix) -> f64 {
        let u = &ev.eig.vectors;
        let d_rot = u.adjoint() * direction * u;
        let n = self.dim;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (ev.sigma_rot[(c, r)] * d_rot[(r, c)]).re * Self::divided(&ev.eig, r, c);
            }
        }
        -(1.0 - self.floor_weight) * acc / LN_2
    }

    /// Exact line search on the convex restriction `γ ↦ f(raw + γ d)` over
    /// `[0, γ_max]`: Illinois regula falsi on the monotone derivative.
    fn line_search(&self, raw: &CMatrix, direction: &CMatrix, gamma_max: f64) -> f64 {
        let slope_at = |g: f64| self.slope(&self.evaluate(&(raw + direction.scale(g))), direction);
        let s_max = slope_at(gamma_max);
        if s_max <= 0.0 {
            return gamma_max;
        }
        let s0 = slope_at(0.0);
        if s0 >= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, gamma_max);
        let (mut f_lo, mut f_hi) = (s0, s_max);
        let mut side = 0i8;
        for _ in 0..LINE_SEARCH_STEPS {
            let mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
            let f_mid = slope_at(mid);
            if f_mid < 0.0 {
                lo = mid;
                f_lo = f_mid;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = mid;
                f_hi = f_mid;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
            if hi - lo <= 1e-13 * gamma_max || f_mid.abs() <= 1e-13 {
                break;
            }
        }
        if side == 1 { hi } else { lo }
    }
}

fn normalize(iterate: &mut SeparableIterate) {
    let total = iterate.weight_sum();
    for (w, _) in iterate.atoms.iter_mut() {
        *w /= total;
    }
}

/// Pairwise steps inside the active set (no oracle calls): weight moves from
/// the atom with the largest gradient value to the one with the smallest.
fn corrective_steps(
    objective: &Objective<'_>,
    iterate: &mut SeparableIterate,
    raw: &mut CMatrix,
    ev: &mut Evaluation,
    history: &mut Vec<f64>,
    tol: f64,
) {
    for _ in 0..CORRECTIVE_STEPS {
        if iterate.atoms.len() < 2 {
            return;
        }
        let grad = objective.gradient(ev);
        let vectors: Vec<CVector> = iterate.atoms.iter().map(|(_, p)| p.vector()).collect();
        let values: Vec<f64> = vectors.iter().map(|v| expectation(&grad, v)).collect();
        let (mut lo, mut hi) = (0, 0);
        for (i, v) in values.iter().enumerate() {
            if *v < values[lo] {
                lo = i;
            }
            if *v > values[hi] {
                hi = i;
            }
        }
        let w_hi = iterate.atoms[hi].0;
        if (values[hi] - values[lo]) * w_hi < 0.1 * tol {
            return;
        }
        let direction = outer(&vectors[lo]) - outer(&vectors[hi]);
        let gamma = objective.line_search(raw, &direction, w_hi);
        let candidate_raw = &*raw + direction.scale(gamma);
        let candidate = objective.evaluate(&candidate_raw);
        if !(candidate.value <= ev.value) {
            return;
        }
        iterate.atoms[lo].0 += gamma;
        iterate.atoms[hi].0 -= gamma;
        if gamma >= w_hi || iterate.atoms[hi].0 < DROP_WEIGHT {
            iterate.atoms.remove(hi);
        }
        normalize(iterate);
        *raw = iterate.raw();
        *ev = objective.evaluate(raw);
        history.push(ev.value);
    }
}

/// Merges nearly parallel atoms and folds negligible weights into the
/// heaviest atom, keeping the result only if the objective does not rise.
fn compact(
    objective: &Objective<'_>,
    iterate: &mut SeparableIterate,
    raw: &mut CMatrix,
    ev: &mut Evaluation,
) {
    let mut trial = iterate.clone();
    let vectors: Vec<CVector> = trial.atoms.iter().map(|(_, p)| p.vector()).collect();
    let mut alive = vec![true; vectors.len()];
    for i in 0..vectors.len() {
        if !alive[i] {
            continue;
        }
        for j in (i + 1)..vectors.len() {
            if alive[j] && vectors[i].dotc(&vectors[j]).norm_sqr() >= COMPACT_FIDELITY {
                let (keep, drop) = if trial.atoms[i].0 >= trial.atoms[j].0 { (i, j) } else { (j, i) };
                trial.atoms[keep].0 += trial.atoms[drop].0;
                trial.atoms[drop].0 = 0.0;
                alive[drop] = false;
                if drop == i {
                    break;
                }
            }
        }
    }
    let heaviest = (0..trial.atoms.len())
        .max_by(|&a, &b| trial.atoms[a].0.total_cmp(&trial.atoms[b].0))
        .expect("iterate has atoms");
    for i in 0..trial.atoms.len() {
        let w = trial.atoms[i].0;
        if i != heaviest && w > 0.0 && w < COMPACT_WEIGHT {
            trial.atoms[heaviest].0 += w;
            trial.atoms[i].0 = 0.0;
        }
    }
    trial.atoms.retain(|(w, _)| *w > 0.0);
    if trial.atoms.len() == iterate.atoms.len() {
        return;
    }
    let trial_raw = trial.raw();
    let candidate = objective.evaluate(&trial_raw);
    if candidate.value <= ev.value {
        *iterate = trial;
        *raw = trial_raw;
        *ev = candidate;
    }
}

fn tangent_step(v: &CVector, g: &CVector, t: f64) -> CVector {
    let tangent = g - v * v.dotc(g);
    let moved = v - tangent.scale(t);
    let n = moved.norm();
    moved.unscale(n)
}

/// Projected gradient descent on the product vectors of every active atom
/// with weights held fixed; steps are accepted only if the objective drops.
fn refine_atoms(
    objective: &Objective<'_>,
    space: &BipartiteSpace,
    iterate: &mut SeparableIterate,
    raw: &mut CMatrix,
    ev: &mut Evaluation,
    history: &mut Vec<f64>,
    step: &mut f64,
) {
    for _ in 0..REFINE_STEPS {
        let grad = objective.gradient(ev);
        let directions: Vec<(CVector, CVector)> = iterate
            .atoms
            .iter()
            .map(|(w, p)| {
                let ga = contract_b(&grad, space, &p.psi_b) * &p.psi_a;
                let gb = contract_a(&grad, space, &p.psi_a) * &p.psi_b;
                (ga.scale(*w), gb.scale(*w))
            })
            .collect();
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = iterate.clone();
            for ((_, p), (ga, gb)) in trial.atoms.iter_mut().zip(&directions) {
                p.psi_a = tangent_step(&p.psi_a, ga, *step);
                p.psi_b = tangent_step(&p.psi_b, gb, *step);
            }
            let trial_raw = trial.raw();
            let candidate = objective.evaluate(&trial_raw);
            if candidate.value < ev.value {
                *iterate = trial;
                *raw = trial_raw;
                *ev = candidate;
                history.push(ev.value);
                *step *= 1.5;
                accepted = true;
                break;
            }
            *step *= 0.5;
        }
        if !accepted {
            *step = step.max(1e-12);
            return;
        }
    }
}

fn iteration_seed(seed: u64, it: usize) -> u64 {
    seed ^ (it as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Frank-Wolfe estimate of `min_{ρ separable} S(σ‖ρ)` in bits.
///
/// The oracle is heuristic (restarted alternating minimization), so the
/// reported value is an upper bound up to oracle failures, tagged
/// accordingly. Non-convergence within `max_iter` returns the best iterate
/// with its gap recorded.
pub fn relative_entropy_of_entanglement(
    sigma: &DensityOperator,
    space: &BipartiteSpace,
    options: &RelEntOptions,
) -> Result<RelEntResult> {
    check_dim(space.dim(), sigma.dim())?;
    check_cap(space.dim(), options.dim_cap)?;
    if !(options.tol > 0.0) || !(options.floor > 0.0) {
        return Err(Error::InvalidArgument("tol and floor must be positive".into()));
    }
    let dim = space.dim();
    let floor_weight = (options.floor * dim as f64).min(0.5);
    let objective = Objective {
        sigma: sigma.matrix(),
        sigma_entropy: von_neumann_entropy(sigma)?,
        floor_weight,
        dim,
    };

    let mut iterate = SeparableIterate::maximally_mixed(space, floor_weight);
    let mut raw = iterate.raw();
    let mut ev = objective.evaluate(&raw);
    let mut history = vec![ev.value];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut step = 0.1;
    let mut notes = vec![format!(
        "iterates floor-mixed with weight {floor_weight:.3e} of the maximally mixed state"
    )];

    for it in 0..options.max_iter {
        let grad = objective.gradient(&ev);
        let fw = lmo_product_state(&grad, space, options.restarts, iteration_seed(options.seed, it))?;
        let atom_values: Vec<f64> = iterate
            .atoms
            .iter()
            .map(|(_, p)| expectation(&grad, &p.vector()))
            .collect();
        let current: f64 = iterate
            .atoms
            .iter()
            .zip(&atom_values)
            .map(|((w, _), v)| w * v)
            .sum();
        gap = (current - fw.value).max(0.0);
        iterations = it;
        if gap < options.tol {
            break;
        }
        let away = atom_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("iterate has atoms");
        let away_gap = atom_values[away] - current;
        let away_weight = iterate.atoms[away].0;

        let use_away = away_gap > gap && away_weight < 1.0;
        let (direction, gamma_max) = if use_away {
            let v = outer(&iterate.atoms[away].1.vector());
            (&raw - v, away_weight / (1.0 - away_weight))
        } else {
            (outer(&fw.vector()) - &raw, 1.0)
        };
        let gamma = objective.line_search(&raw, &direction, gamma_max);
        let candidate_raw = &raw + direction.scale(gamma);
        let candidate = objective.evaluate(&candidate_raw);
        if !(candidate.value <= ev.value) {
            notes.push(format!("stopped at iteration {it}: line search made no progress"));
            break;
        }

        if use_away {
            for (w, _) in iterate.atoms.iter_mut() {
                *w *= 1.0 + gamma;
            }
            iterate.atoms[away].0 -= gamma;
            if gamma >= gamma_max || iterate.atoms[away].0 < DROP_WEIGHT {
                iterate.atoms.remove(away);
            }
        } else {
            for (w, _) in iterate.atoms.iter_mut() {
                *w *= 1.0 - gamma;
            }
            let fv = fw.vector();
            match iterate
                .atoms
                .iter_mut()
                .find(|(_, p)| p.vector().dotc(&fv).norm_sqr() >= MERGE_FIDELITY)
            {
                Some((w, _)) => *w += gamma,
                None => iterate.atoms.push((gamma, fw)),
            }
            iterate.atoms.retain(|(w, _)| *w >= DROP_WEIGHT);
        }
        normalize(&mut iterate);
        raw = iterate.raw();
        ev = objective.evaluate(&raw);
        history.push(ev.value);
        for _ in 0..REFINE_ROUNDS {
            corrective_steps(&objective, &mut iterate, &mut raw, &mut ev, &mut history, options.tol);
            refine_atoms(&objective, space, &mut iterate, &mut raw, &mut ev, &mut history, &mut step);
        }
        compact(&objective, &mut iterate, &mut raw, &mut ev);
        iterations = it + 1;
    }
    if gap >= options.tol {
        notes.push(format!("gap {gap:.3e} above tolerance after {iterations} iterations"));
    }

    Ok(RelEntResult {
        report: MeasureReport {
            value: ev.value.max(0.0),
            iterations,
            gap: Some(gap),
            certificate: Certificate::UpperBoundHeuristicLmo,
            seed: Some(options.seed),
            notes,
        },
        witness: iterate,
        history,
    })
}

/// Empirical modulus of continuity of the relative entropy of entanglement:
/// rows `(i, ‖σ − σ_i‖₁, |E_R(σ) − E_R(σ_i)| / copies)` for
/// `σ_i = (1 − s_i) σ + s_i τ`. Every run reuses the same seed.
pub fn er_continuity_probe(
    sigma: &DensityOperator,
    space: &BipartiteSpace,
    target: &DensityOperator,
    scales: &[f64],
    budget: Option<EnergyBudget>,
    copies: usize,
    options: &RelEntOptions,
) -> Result<Vec<ContinuityRow>> {
    check_dim(space.dim(), target.dim())?;
    let check_budget = |rho: &DensityOperator| -> Result<()> {
        if let Some(b) = budget {
            let e = mean_energy(space, rho)?;
            if !b.admits(e) {
                return Err(Error::BudgetViolation {
                    energy: e,
                    budget: b.value(),
                });
            }
        }
        Ok(())
    };
    check_budget(sigma)?;
    let base = relative_entropy_of_entanglement(sigma, space, options)?.report.value;
    let copies = copies.max(1) as f64;
    scales
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidArgument(format!("scale {s} outside [0, 1]")));
            }
            let perturbed = DensityOperator::mixture(&[(1.0 - s, sigma), (s, target)])?;
            check_budget(&perturbed)?;
            let value = relative_entropy_of_entanglement(&perturbed, space, options)?.report.value;
            Ok(ContinuityRow {
                index: i + 1,
                trace_distance: trace_norm_distance(sigma, &perturbed)?,
                gap_bits: (base - value).abs() / copies,
                fannes_bound_bits: None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::entropy_of_entanglement;
    use crate::random;
    use crate::space::harmonic_space;
    use crate::states::{is_npt, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_mixture_is_near_zero() {
        let s = harmonic_space(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = random::separable_mixture(&s, 5, &mut rng);
        let r = relative_entropy_of_entanglement(&sigma, &s, &RelEntOptions::default()).unwrap();
        assert!(r.report.value <= 1e-4, "{:?}", r.report);
        assert!(r.is_monotone());
    }

    #[test]
    fn pure_states_match_entanglement_entropy() {
        let s = harmonic_space(2, 2).unwrap();
        for w in [[0.5, 0.5], [0.8, 0.2]] {
            let psi = PureState::from_schmidt_weights(&s, &w).unwrap();
            let e = entropy_of_entanglement(&psi, &s).unwrap();
            let r = relative_entropy_of_entanglement(
                &DensityOperator::from_pure(&psi),
                &s,
                &RelEntOptions::default(),
            )
            .unwrap();
            assert!((r.report.value - e).abs() < 5e-3, "{} vs {e}: {:?}", r.report.value, r.report);
            assert!(r.is_monotone());
        }
    }

    #[test]
    fn witness_is_ppt() {
        let s = harmonic_space(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sigma = random::density(6, &mut rng);
        let r = relative_entropy_of_entanglement(&sigma, &s, &RelEntOptions::default()).unwrap();
        let w = r.witness.assemble();
        assert!(!is_npt(&w, &s, 1e-9).unwrap().npt);
        assert!((r.witness.weight_sum() - 1.0).abs() < 1e-12);
        assert!(r.witness.atoms.iter().all(|(w, _)| *w >= 0.0));
    }

    #[test]
    fn cap_is_enforced() {
        let s = harmonic_space(7, 7).unwrap();
        let r = relative_entropy_of_entanglement(
            &DensityOperator::maximally_mixed(49),
            &s,
            &RelEntOptions::default(),
        );
        assert!(matches!(r, Err(Error::ResourceLimit { cap: 36, .. })));
    }

    #[test]
    fn zero_perturbation_probe() {
        let s = harmonic_space(2, 2).unwrap();
        let bell = DensityOperator::from_pure(&PureState::bell(&s, 0, 1).unwrap());
        let opts = RelEntOptions::default();
        let rows = er_continuity_probe(
            &bell,
            &s,
            &DensityOperator::maximally_mixed(4),
            &[0.0],
            None,
            1,
            &opts,
        )
        .unwrap();
        assert!(rows[0].gap_bits <= 2.0 * opts.tol);
    }
}
