use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use truncent::constructions::{
    asymptotic_gap_table, dense_entangled_neighbor, energy_bounded_sequence, example1_materialized,
    example1_scan, ContinuityRow, Example1Report, NeighborCertificate, NeighborOptions,
    PerturbationSchedule, EXAMPLE1_MATRIX_MAX_K,
};
use truncent::measures::{entropy_of_entanglement, von_neumann_entropy};
use truncent::optimize::{
    entanglement_of_formation, er_continuity_probe, relative_entropy_of_entanglement,
    FormationOptions, RelEntOptions, DEFAULT_OPTIMIZATION_CAP,
};
use truncent::space::{gibbs_state, harmonic_space, mean_energy, mean_energy_pure};
use truncent::states::{is_npt, tensor_power, trace_norm_distance};
use truncent::{
    BipartiteSpace, DensityOperator, EnergyBudget, MeasureReport, PureState, SpectrumSpec,
};

use crate::config::{Format, RunConfig, Settings};
use crate::statefile::{LoadedState, StateFile, FILE_TOL};
use crate::{Builtin, Cli, CliError, Command, Mode, Source, Which, EXIT_CONSTRUCTION, EXIT_OK};

/// Entanglement witnesses must be below `-NPT_TOL`.
pub const NPT_TOL: f64 = 1e-12;
/// Analytic and materialized near-product rows must agree to this.
const EXAMPLE1_CROSS_TOL: f64 = 1e-9;

/// What to write and how to exit. A nonzero `code` with output still
/// writes the output (failed checks are reported, not hidden).
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub out: Option<PathBuf>,
    pub code: i32,
    pub message: Option<String>,
}

#[derive(Serialize)]
struct Metadata {
    timestamp_unix: u64,
    version: &'static str,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    settings: &'a Settings,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<Metadata>,
}

struct Context {
    settings: Settings,
    metadata: bool,
}

impl Context {
    fn json<T: Serialize>(&self, command: &str, result: T) -> String {
        let metadata = self.metadata.then(|| Metadata {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            version: env!("CARGO_PKG_VERSION"),
        });
        let env = Envelope {
            command,
            settings: &self.settings,
            result,
            metadata,
        };
        let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
        s.push('\n');
        s
    }

    fn output(&self, text: String) -> Output {
        Output {
            text,
            out: self.settings.out.clone(),
            code: EXIT_OK,
            message: None,
        }
    }

    fn rel_ent_options(&self) -> RelEntOptions {
        let d = RelEntOptions::default();
        RelEntOptions {
            tol: self.settings.tol,
            max_iter: self.settings.max_iter.unwrap_or(d.max_iter),
            restarts: self.settings.restarts,
            seed: self.settings.seed,
            ..d
        }
    }

    fn formation_options(&self) -> FormationOptions {
        let d = FormationOptions::default();
        FormationOptions {
            restarts: self.settings.restarts,
            sweeps: self.settings.max_iter.unwrap_or(d.sweeps),
            seed: self.settings.seed,
            ..d
        }
    }

    fn space(&self) -> Result<BipartiteSpace, CliError> {
        Ok(harmonic_space(self.settings.cutoff[0], self.settings.cutoff[1])?)
    }

    /// The state named by `source`, or `fallback` when neither a file nor a
    /// builtin is given.
    fn load(
        &self,
        source: &Source,
        fallback: Builtin,
    ) -> Result<(BipartiteSpace, LoadedState, String), CliError> {
        if let Some(path) = &source.state {
            let file = StateFile::read(path)?;
            let state = file.state().map_err(|e| e.context(&path.display().to_string()))?;
            return Ok((file.space()?, state, path.display().to_string()));
        }
        let builtin = source.builtin.unwrap_or(fallback);
        let space = self.space()?;
        let state = match builtin {
            Builtin::Ground => LoadedState::Pure(PureState::basis(space.dim(), 0)),
            Builtin::Bell => LoadedState::Pure(PureState::bell(&space, 0, 1)?),
            Builtin::Gibbs => LoadedState::Mixed(gibbs_state(&space, self.settings.beta)?),
        };
        let label = format!("builtin:{builtin:?}").to_lowercase();
        Ok((space, state, label))
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    let file_config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let settings = file_config.overlay(cli.flags.to_config()?).resolve()?;
    let ctx = Context {
        settings,
        metadata: !cli.no_metadata,
    };
    match &cli.command {
        Command::DemoExample1 { kmin, kmax } => demo_example1(&ctx, *kmin, *kmax),
        Command::DemoNeighbor {
            source,
            k_min,
            weight,
            rho_out,
        } => demo_neighbor(&ctx, source, *k_min, *weight, rho_out.as_ref()),
        Command::Measure { source, which } => measure(&ctx, source, *which),
        Command::Continuity {
            mode,
            source,
            scale,
            scales,
            copies,
            steps,
            strength,
        } => continuity(
            &ctx,
            *mode,
            source,
            ContinuityArgs {
                scale: *scale,
                scales: scales.clone(),
                copies: *copies,
                steps: *steps,
                strength: *strength,
            },
        ),
    }
}

pub const EXAMPLE1_HEADER: &str = "k,delta_k,E_bits,trace_distance,mean_energy";
pub const CONTINUITY_HEADER: &str = "index,trace_distance,gap_bits,fannes_bound_bits";

#[derive(Serialize)]
struct Example1Result {
    rows: Vec<Example1Report>,
    failed_checks: Vec<String>,
}

fn example1_checks(rows: &[Example1Report]) -> Result<Vec<String>, CliError> {
    let mut failed = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.trace_distance_to_ground >= a.trace_distance_to_ground {
            failed.push(format!("trace distance not decreasing from k={} to k={}", a.k, b.k));
        }
        if b.mean_energy <= a.mean_energy {
            failed.push(format!("mean energy not increasing from k={} to k={}", a.k, b.k));
        }
        if b.entanglement_bits >= a.entanglement_bits {
            failed.push(format!("E not decreasing from k={} to k={}", a.k, b.k));
        }
    }
    for r in rows.iter().filter(|r| r.k as usize <= EXAMPLE1_MATRIX_MAX_K) {
        let m = example1_materialized(r.k as usize)?;
        let worst = [
            (m.entanglement_bits - r.entanglement_bits).abs(),
            (m.trace_distance_to_ground - r.trace_distance_to_ground).abs(),
            (m.mean_energy - r.mean_energy).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if worst > EXAMPLE1_CROSS_TOL {
            failed.push(format!("k={}: vector path differs from closed form by {worst:.3e}", r.k));
        }
    }
    Ok(failed)
}

fn demo_example1(ctx: &Context, kmin: u64, kmax: u64) -> Result<Output, CliError> {
    let rows = example1_scan(kmin, kmax)?;
    let failed_checks = example1_checks(&rows)?;
    let text = match ctx.settings.format {
        Format::Csv => {
            let mut s = format!("{EXAMPLE1_HEADER}\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.k, r.delta_k, r.entanglement_bits, r.trace_distance_to_ground, r.mean_energy
                ));
            }
            s
        }
        Format::Json => ctx.json(
            "demo-example1",
            Example1Result {
                rows,
                failed_checks: failed_checks.clone(),
            },
        ),
    };
    let mut out = ctx.output(text);
    if !failed_checks.is_empty() {
        out.code = EXIT_CONSTRUCTION;
        out.message = Some(format!("scan checks failed: {}", failed_checks.join("; ")));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Verification {
    pub trace_distance: f64,
    pub mean_energy: f64,
    /// Smallest eigenvalue of the full partial transpose.
    pub full_witness: f64,
    pub valid: bool,
}

/// Recomputes the three certificate conditions from the two matrices alone.
pub fn verify_certificate(
    sigma: &DensityOperator,
    rho: &DensityOperator,
    space: &BipartiteSpace,
    eps: f64,
    budget: EnergyBudget,
) -> Result<Verification, CliError> {
    let rho = DensityOperator::new(rho.matrix().clone())?;
    let trace_distance = trace_norm_distance(sigma, &rho)?;
    let energy = mean_energy(space, &rho)?;
    let npt = is_npt(&rho, space, NPT_TOL)?;
    Ok(Verification {
        trace_distance,
        mean_energy: energy,
        full_witness: npt.witness,
        valid: trace_distance < eps && budget.admits(energy) && npt.npt,
    })
}

#[derive(Serialize)]
struct NeighborResult<'a> {
    state: &'a str,
    certificate: NeighborCertificate,
    verification: Verification,
}

fn demo_neighbor(
    ctx: &Context,
    source: &Source,
    k_min: Option<usize>,
    weight: Option<f64>,
    rho_out: Option<&PathBuf>,
) -> Result<Output, CliError> {
    let (space, state, label) = ctx.load(source, Builtin::Ground)?;
    let sigma = state.density();
    let budget = EnergyBudget::new(ctx.settings.require_budget()?)?;
    let defaults = NeighborOptions::default();
    let options = NeighborOptions {
        k_min: k_min.unwrap_or(defaults.k_min),
        weight,
        ..defaults
    };
    let eps = ctx.settings.eps;
    let (rho, certificate) = dense_entangled_neighbor(&sigma, &space, eps, budget, NPT_TOL, &options)?;
    let verification = verify_certificate(&sigma, &rho, &space, eps, budget)?;
    if !verification.valid {
        let mut e = CliError::construction("certificate failed independent verification");
        e.detail = Some(serde_json::json!({
            "certificate": certificate,
            "verification": verification,
        }));
        return Err(e);
    }
    if let Some(path) = rho_out {
        StateFile::from_density([space.dim_a(), space.dim_b()], &rho).write(path)?;
    }
    let text = ctx.json(
        "demo-neighbor",
        NeighborResult {
            state: &label,
            certificate,
            verification,
        },
    );
    Ok(ctx.output(text))
}

#[derive(Serialize)]
struct MeasureResult<'a> {
    state: &'a str,
    measure: &'a str,
    report: MeasureReport,
}

fn measure(ctx: &Context, source: &Source, which: Which) -> Result<Output, CliError> {
    let (space, state, label) = ctx.load(source, Builtin::Bell)?;
    let (name, report) = match which {
        Which::S => ("S", MeasureReport::exact(von_neumann_entropy(&state.density())?)),
        Which::E => {
            let psi = match &state {
                LoadedState::Pure(p) => p.clone(),
                LoadedState::Mixed(d) => d.as_pure(FILE_TOL).ok_or_else(|| {
                    CliError::dispatch(format!(
                        "the entropy of entanglement is defined for pure states only, and this \
                         state is mixed (purity {:.6}); use --which EF (entanglement of \
                         formation) or --which ER (relative entropy of entanglement)",
                        d.purity()
                    ))
                })?,
            };
            ("E", MeasureReport::exact(entropy_of_entanglement(&psi, &space)?))
        }
        Which::Ef => (
            "EF",
            entanglement_of_formation(&state.density(), &space, &ctx.formation_options())?.report,
        ),
        Which::Er => (
            "ER",
            relative_entropy_of_entanglement(&state.density(), &space, &ctx.rel_ent_options())?
                .report,
        ),
    };
    let text = ctx.json(
        "measure",
        MeasureResult {
            state: &label,
            measure: name,
            report,
        },
    );
    Ok(ctx.output(text))
}

struct ContinuityArgs {
    scale: Option<f64>,
    scales: Option<Vec<f64>>,
    copies: Option<usize>,
    steps: Option<usize>,
    strength: Option<f64>,
}

#[derive(Serialize)]
struct ContinuityResult<'a> {
    mode: &'a str,
    state: &'a str,
    rows: Vec<ContinuityRow>,
}

pub fn continuity_csv(rows: &[ContinuityRow]) -> String {
    let mut s = format!("{CONTINUITY_HEADER}\n");
    for r in rows {
        let fannes = r.fannes_bound_bits.map(|b| b.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},{}\n", r.index, r.trace_distance, r.gap_bits, fannes));
    }
    s
}

fn continuity(
    ctx: &Context,
    mode: Mode,
    source: &Source,
    args: ContinuityArgs,
) -> Result<Output, CliError> {
    let (label, rows) = match mode {
        Mode::Prop3 => ("energy-bounded sequence".to_string(), prop3(ctx, &args)?),
        Mode::Prop4 => {
            let (space, state, label) = ctx.load(source, Builtin::Bell)?;
            let LoadedState::Pure(psi) = state else {
                return Err(CliError::dispatch("prop4 needs a pure state"));
            };
            let scale = args.scale.unwrap_or(0.1);
            let rows = asymptotic_gap_table(
                &psi,
                &space,
                PerturbationSchedule::SchmidtWeight { scale },
                args.copies.unwrap_or(6),
            )?;
            (label, rows)
        }
        Mode::Prop8 => {
            let (space, state, label) = ctx.load(source, Builtin::Bell)?;
            let sigma = state.density();
            let target = DensityOperator::maximally_mixed(space.dim());
            let scales = args.scales.clone().unwrap_or_else(|| vec![0.1, 0.01, 0.001]);
            let budget = ctx.settings.budget.map(EnergyBudget::new).transpose()?;
            let rows = er_continuity_probe(
                &sigma,
                &space,
                &target,
                &scales,
                budget,
                1,
                &ctx.rel_ent_options(),
            )?;
            (label, rows)
        }
        Mode::Prop9 => {
            let (space, state, label) = ctx.load(source, Builtin::Bell)?;
            (label, prop9(ctx, &space, &state.density(), &args)?)
        }
    };
    let mode_name = format!("{mode:?}").to_lowercase();
    let text = match ctx.settings.format {
        Format::Csv => continuity_csv(&rows),
        Format::Json => ctx.json(
            "continuity",
            ContinuityResult {
                mode: &mode_name,
                state: &label,
                rows,
            },
        ),
    };
    Ok(ctx.output(text))
}

/// Gibbs-weighted Schmidt state on the smaller cutoff moved toward uniform
/// weights by `strength`.
fn prop3(ctx: &Context, args: &ContinuityArgs) -> Result<Vec<ContinuityRow>, CliError> {
    let space = ctx.space()?;
    let d = space.dim_a().min(space.dim_b());
    let base = SpectrumSpec::harmonic(d)?.gibbs_populations(ctx.settings.beta);
    let strength = args.strength.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&strength) {
        return Err(CliError::usage(format!("strength must lie in [0, 1], got {strength}")));
    }
    let target: Vec<f64> = base
        .iter()
        .map(|p| (1.0 - strength) * p + strength / d as f64)
        .collect();
    let budget = match ctx.settings.budget {
        Some(m) => m,
        None => {
            let e = |w: &[f64]| -> Result<f64, CliError> {
                Ok(mean_energy_pure(&space, &PureState::from_schmidt_weights(&space, w)?)?)
            };
            e(&base)?.max(e(&target)?) + 1.0
        }
    };
    Ok(energy_bounded_sequence(
        &space,
        &base,
        &target,
        args.steps.unwrap_or(12),
        EnergyBudget::new(budget)?,
    )?)
}

/// Rows `n = 1..=copies`: `σ_n = (1 − s_n) σ^{⊗n} + s_n 1/d^n` with
/// `s_n = scale / n²`, gap divided by `n`.
fn prop9(
    ctx: &Context,
    space: &BipartiteSpace,
    sigma: &DensityOperator,
    args: &ContinuityArgs,
) -> Result<Vec<ContinuityRow>, CliError> {
    let scale = args.scale.unwrap_or(0.1);
    let options = ctx.rel_ent_options();
    let mut rows = Vec::new();
    for n in 1..=args.copies.unwrap_or(2) {
        let (power, power_space) = tensor_power(sigma, space, n, DEFAULT_OPTIMIZATION_CAP)?;
        let target = DensityOperator::maximally_mixed(power_space.dim());
        let s = scale / (n * n) as f64;
        let mut row = er_continuity_probe(&power, &power_space, &target, &[s], None, n, &options)?
            .pop()
            .expect("one scale gives one row");
        row.index = n;
        rows.push(row);
    }
    Ok(rows)
}
