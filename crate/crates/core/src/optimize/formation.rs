use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianEigen};
use crate::measures::{entropy_of_entanglement, Certificate, MeasureReport};
use crate::random::unitary;
use crate::space::BipartiteSpace;
use crate::states::{DensityOperator, PureState};

use super::{argmin_stable, check_cap, restart_rng, DEFAULT_OPTIMIZATION_CAP};

const RANK_TOL: f64 = 1e-12;
const POLISH_PASSES: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct FormationOptions {
    /// Number of ensemble members; `None` means twice the rank of `σ`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    /// Annealing sweeps over all member pairs.
    pub sweeps: usize,
    /// Proposals per pair and sweep.
    pub trials_per_pair: usize,
    pub seed: u64,
    pub dim_cap: usize,
}

impl Default for FormationOptions {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 6,
            sweeps: 20,
            trials_per_pair: 4,
            seed: 0,
            dim_cap: DEFAULT_OPTIMIZATION_CAP,
        }
    }
}

/// `σ = Σ p_i |ψ_i⟩⟨ψ_i|`, with `isometry` mapping the eigen-ensemble of `σ`
/// onto the members.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub states: Vec<PureState>,
    /// `K × r` matrix with orthonormal columns: member `i` is
    /// `Σ_j isometry[i, j] √λ_j e_j`.
    pub isometry: CMatrix,
}

impl Decomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.states.first().map_or(0, PureState::dim);
        let mut m = CMatrix::zeros(dim, dim);
        for (p, s) in self.weights.iter().zip(&self.states) {
            m += crate::linalg::outer(s.amplitudes()).scale(*p);
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct FormationResult {
    pub report: MeasureReport,
    pub decomposition: Decomposition,
}

/// `p · E(ψ/‖ψ‖)` for an unnormalized member `ψ` with `p = ‖ψ‖²`, computed
/// as `-Σ μ log₂ μ + p log₂ p` over the eigenvalues `μ` of the unnormalized
/// smaller marginal.
fn weighted_entropy(v: &CVector, space: &BipartiteSpace) -> f64 {
    let (da, db) = (space.dim_a(), space.dim_b());
    let m = CMatrix::from_fn(da, db, |a, b| v[space.index(a, b)]);
    let marginal = if da <= db { &m * m.adjoint() } else { m.adjoint() * &m };
    let p: f64 = v.norm_squared();
    if p <= 0.0 {
        return 0.0;
    }
    let mut acc = p * p.log2();
    for mu in HermitianEigen::new(&marginal).values {
        if mu > 0.0 {
            acc -= mu * mu.log2();
        }
    }
    acc.max(0.0)
}

struct Ensemble<'a> {
    space: &'a BipartiteSpace,
    members: Vec<CVector>,
    isometry: CMatrix,
    costs: Vec<f64>,
}

impl<'a> Ensemble<'a> {
    fn new(space: &'a BipartiteSpace, eigen_members: &[CVector], isometry: CMatrix) -> Self {
        let k = isometry.nrows();
        let members: Vec<CVector> = (0..k)
            .map(|i| {
                let mut v = CVector::zeros(space.dim());
                for (j, e) in eigen_members.iter().enumerate() {
                    v += e * isometry[(i, j)];
                }
                v
            })
            .collect();
        let costs = members.iter().map(|v| weighted_entropy(v, space)).collect();
        Self {
            space,
            members,
            isometry,
            costs,
        }
    }

    fn total(&self) -> f64 {
        self.costs.iter().sum()
    }

    /// Members `i`, `k` after `[[c, −s e^{−iφ}], [s e^{iφ}, c]]`.
    fn rotated(&self, i: usize, k: usize, theta: f64, phi: f64) -> (CVector, CVector) {
        let (c, s) = (theta.cos(), theta.sin());
        let e = Complex64::from_polar(s, phi);
        let vi = self.members[i].scale(c) - &self.members[k] * e.conj();
        let vk = &self.members[i] * e + self.members[k].scale(c);
        (vi, vk)
    }

    fn propose(&self, i: usize, k: usize, theta: f64, phi: f64) -> (f64, CVector, CVector) {
        let (vi, vk) = self.rotated(i, k, theta, phi);
        let delta = weighted_entropy(&vi, self.space) + weighted_entropy(&vk, self.space)
            - self.costs[i]
            - self.costs[k];
        (delta, vi, vk)
    }

    fn accept(&mut self, i: usize, k: usize, theta: f64, phi: f64, vi: CVector, vk: CVector) {
        let (c, s) = (theta.cos(), theta.sin());
        let e = Complex64::from_polar(s, phi);
        let ri = self.isometry.row(i).into_owned();
        let rk = self.isometry.row(k).into_owned();
        self.isometry.set_row(i, &(ri.scale(c) - &rk * e.conj()));
        self.isometry.set_row(k, &(&ri * e + rk.scale(c)));
        self.costs[i] = weighted_entropy(&vi, self.space);
        self.costs[k] = weighted_entropy(&vk, self.space);
        self.members[i] = vi;
        self.members[k] = vk;
    }

    /// Deterministic coordinate polish: shrinking rotation steps along a
    /// few phases until no pair improves by more than `1e-12`.
    fn polish(&mut self, max_passes: usize) {
        let n = self.members.len();
        let phases = [0.0, FRAC_PI_2, std::f64::consts::PI, 3.0 * FRAC_PI_2];
        let mut step = 0.1;
        for _ in 0..max_passes {
            if step < 1e-5 {
                break;
            }
            let before = self.total();
            for i in 0..n {
                for k in (i + 1)..n {
                    for &phi in &phases {
                        for theta in [step, -step] {
                            let (delta, vi, vk) = self.propose(i, k, theta, phi);
                            if delta < -1e-15 {
                                self.accept(i, k, theta, phi, vi, vk);
                            }
                        }
                    }
                }
            }
            if before - self.total() < 1e-12 {
                step *= 0.5;
            }
        }
    }
}

struct RunOutcome {
    value: f64,
    isometry: CMatrix,
    accepted: usize,
}

fn anneal(
    space: &BipartiteSpace,
    eigen_members: &[CVector],
    start: CMatrix,
    options: &FormationOptions,
    restart: usize,
) -> RunOutcome {
    let mut rng = restart_rng(options.seed, restart);
    let mut ens = Ensemble::new(space, eigen_members, start);
    let k = ens.members.len();
    let mut pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect();
    let mut best_value = ens.total();
    let mut best_isometry = ens.isometry.clone();
    let mut step = FRAC_PI_2;
    let mut temperature = 0.01 * best_value.max(1e-3);
    let mut accepted = 0;
    for _ in 0..options.sweeps {
        pairs.shuffle(&mut rng);
        for &(i, j) in &pairs {
            for _ in 0..options.trials_per_pair {
                let theta = step * rng.random_range(-1.0..1.0);
                let phi = rng.random_range(0.0..TAU);
                let (delta, vi, vj) = ens.propose(i, j, theta, phi);
                let take = delta < 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
                if take {
                    ens.accept(i, j, theta, phi, vi, vj);
                    accepted += 1;
                    let total = ens.total();
                    if total < best_value {
                        best_value = total;
                        best_isometry = ens.isometry.clone();
                    }
                }
            }
        }
        step *= 0.95;
        temperature *= 0.95;
    }
    let mut ens = Ensemble::new(space, eigen_members, best_isometry);
    ens.polish(POLISH_PASSES);
    RunOutcome {
        value: ens.total(),
        isometry: ens.isometry,
        accepted,
    }
}

/// Upper bound on the entanglement of formation by searching over
/// decompositions `σ = Σ p_i |ψ_i⟩⟨ψ_i|`.
///
/// Every decomposition with `K` members arises from a `K × r` isometry
/// applied to the eigen-ensemble of `σ`; the search moves through isometries
/// by Givens rotations between member pairs under an annealing schedule
/// (step and temperature decay by 0.95 per sweep), then polishes greedily.
/// Pure inputs short-circuit to the entropy of entanglement.
pub fn entanglement_of_formation(
    sigma: &DensityOperator,
    space: &BipartiteSpace,
    options: &FormationOptions,
) -> Result<FormationResult> {
    check_dim(space.dim(), sigma.dim())?;
    check_cap(space.dim(), options.dim_cap)?;
    let eig = sigma.eigen();
    let support: Vec<usize> = (0..eig.values.len())
        .rev()
        .filter(|&j| eig.values[j] > RANK_TOL)
        .collect();
    let rank = support.len();
    let ensemble_size = options.ensemble_size.unwrap_or(2 * rank);
    if ensemble_size < rank {
        return Err(Error::InvalidArgument(format!(
            "ensemble size {ensemble_size} is below the rank {rank} of the state"
        )));
    }
    let eigen_members: Vec<CVector> = support
        .iter()
        .map(|&j| eig.vectors.column(j).scale(eig.values[j].sqrt()))
        .collect();

    if rank == 1 {
        let psi = PureState::normalized(eigen_members[0].clone())?;
        let value = entropy_of_entanglement(&psi, space)?;
        let mut report = MeasureReport::exact(value);
        report.seed = Some(options.seed);
        report.notes.push("pure input: single-term decomposition".into());
        return Ok(FormationResult {
            report,
            decomposition: Decomposition {
                weights: vec![1.0],
                states: vec![psi],
                isometry: CMatrix::identity(1, 1),
            },
        });
    }

    let runs: Vec<RunOutcome> = (0..=options.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                CMatrix::identity(ensemble_size, rank)
            } else {
                let mut rng = restart_rng(options.seed ^ 0xA5A5_5A5A_F0F0_0F0F, r);
                unitary(ensemble_size, &mut rng).columns(0, rank).into_owned()
            };
            anneal(space, &eigen_members, start, options, r)
        })
        .collect();
    let best = argmin_stable(&runs, |r| r.value).expect("at least one run");
    let run = &runs[best];

    let ens = Ensemble::new(space, &eigen_members, run.isometry.clone());
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for v in &ens.members {
        let p = v.norm_squared();
        if p > 0.0 {
            weights.push(p);
            states.push(PureState::normalized(v.clone())?);
        }
    }
    Ok(FormationResult {
        report: MeasureReport {
            value: run.value,
            iterations: options.sweeps,
            gap: None,
            certificate: Certificate::UpperBound,
            seed: Some(options.seed),
            notes: vec![format!(
                "ensemble size {ensemble_size}, best restart {best}, {} accepted moves",
                run.accepted
            )],
        },
        decomposition: Decomposition {
            weights,
            states,
            isometry: run.isometry.clone(),
        },
    })
}
