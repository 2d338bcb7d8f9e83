//! Command implementations: each builds a [`ResultTable`] from resolved
//! parameters. Every command is a pure function of (configuration, seed);
//! internal parallelism is delegated to the library.

use anyhow::Result;
use clap::Args;
use cvqit_core::atomlight::{
    build_cluster, build_ghz, eraser, erasing_kappa2, pulse_and_measure, sum_z_form,
    verify_variances, y_difference_form, EnsembleRegister, GhzMode, InterfaceConfig, SampleGraph,
};
use cvqit_core::broadcast::{
    ptilde_realistic, run_protocol, traitor_strategy_shift, ProtocolConfig, Strategy,
    TripartiteResource, Verdict,
};
use cvqit_core::entanglement::{log_negativity, negativity, van_loock_furusawa, VlfPartition};
use cvqit_core::nongauss::{
    bit_correlation_q, negativity_closed_form, q_gaussian_closed_form, q_mixture_with_vacuum,
    q_photon_subtracted_series, random_gaussian_scatter, NegativityFamily, StateModel, WignerPoly,
};
use cvqit_core::phase_space::standard_form;
use cvqit_core::qkd::{acceptance_interval, efficiency, AttackModel, QkdState};
use cvqit_core::rng::seeded;
use cvqit_core::{Error, GaussianState, ModePartition};

use crate::config::ParamSource;
use crate::table::ResultTable;
use crate::UsageError;

const NAN: f64 = f64::NAN;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Evenly spaced sweep over `[lo, hi]`, inclusive; a single point sits at
/// `lo`.
fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// qkd
// ---------------------------------------------------------------------------

/// Acceptance window and protocol efficiency of a symmetric normal-form
/// state, either at a single correlation value or swept over c_x.
#[derive(Debug, Args, Default)]
pub struct QkdArgs {
    /// Marginal variance λ ≥ 1.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Position correlation c_x.
    #[arg(long)]
    pub cx: Option<f64>,
    /// Momentum correlation magnitude c_p.
    #[arg(long)]
    pub cp: Option<f64>,
    /// Alice's outcome modulus for the reported window.
    #[arg(long)]
    pub x0a: Option<f64>,
    /// Attack model: "ind" (individual) or "coh" (finite coherent).
    #[arg(long)]
    pub attack: Option<String>,
    /// Number of sweep points over c_x; 0 evaluates the single --cx value.
    #[arg(long)]
    pub sweep_points: Option<u64>,
    /// Sweep lower bound for c_x.
    #[arg(long)]
    pub cx_min: Option<f64>,
    /// Sweep upper bound for c_x.
    #[arg(long)]
    pub cx_max: Option<f64>,
}

fn parse_attack(name: &str) -> Result<AttackModel> {
    match name {
        "ind" | "individual" => Ok(AttackModel::Individual),
        "coh" | "coherent" => Ok(AttackModel::FiniteCoherent),
        other => Err(usage(format!(
            "unknown attack model '{other}' (expected 'ind' or 'coh')"
        ))),
    }
}

pub fn qkd(args: &QkdArgs, src: &mut ParamSource) -> Result<ResultTable> {
    let lambda = src.f64("lambda", args.lambda, 2.0)?;
    let cx = src.f64("cx", args.cx, 1.2)?;
    let cp = src.f64("cp", args.cp, 0.8)?;
    let x0a = src.f64("x0a", args.x0a, 1.0)?;
    let attack_name = src.string("attack", args.attack.as_deref(), "ind")?;
    let sweep = src.u64("sweep_points", args.sweep_points, 0)? as usize;
    let cx_min = src.f64("cx_min", args.cx_min, 1.3)?;
    let cx_max = src.f64("cx_max", args.cx_max, 1.54)?;
    let attack = parse_attack(&attack_name)?;

    let cx_values = if sweep == 0 {
        vec![cx]
    } else {
        linspace(cx_min, cx_max, sweep)
    };
    let mut table = ResultTable::new(
        &[
            "lambda",
            "c_x",
            "c_p",
            "x0a",
            "log_negativity",
            "window_parameter",
            "delta_lo",
            "delta_hi",
            "window_length",
            "efficiency",
        ],
        src.echo("qkd", None),
    );
    for cxv in cx_values {
        let st = QkdState::new(lambda, cxv, cp)?;
        let (param, lo, hi, len) = match acceptance_interval(&st, x0a, attack) {
            Ok(w) => (w.parameter, w.delta_lo, w.delta_hi, w.length),
            Err(Error::Precondition(_)) => (NAN, NAN, NAN, NAN),
            Err(e) => return Err(e.into()),
        };
        let eff = efficiency(&st, attack, Default::default())?;
        table.push_row(vec![
            lambda,
            cxv,
            cp,
            x0a,
            st.log_negativity(),
            param,
            lo,
            hi,
            len,
            eff,
        ])?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// broadcast
// ---------------------------------------------------------------------------

/// Conditional broadcast probability p̃ over an (x₀, Δ) grid at fixed
/// entanglement parameter.
#[derive(Debug, Args, Default)]
pub struct BroadcastPtildeArgs {
    /// Entanglement parameter a ≥ 1.
    #[arg(long)]
    pub a: Option<f64>,
    /// Added thermal noise n ≥ 1.
    #[arg(long)]
    pub n: Option<f64>,
    /// Homodyne uncertainty σ ≥ 0.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<u64>,
    /// Largest outcome modulus x₀ on the grid.
    #[arg(long)]
    pub x0_max: Option<f64>,
    /// Largest undesired-element shift Δ on the grid.
    #[arg(long)]
    pub delta_max: Option<f64>,
}

pub fn broadcast_ptilde(args: &BroadcastPtildeArgs, src: &mut ParamSource) -> Result<ResultTable> {
    let a = src.f64("a", args.a, 1.5)?;
    let n = src.f64("n", args.n, 1.0)?;
    let sigma = src.f64("sigma", args.sigma, 0.0)?;
    let grid = src.u64("grid", args.grid, 50)? as usize;
    let x0_max = src.f64("x0_max", args.x0_max, 10.0)?;
    let delta_max = src.f64("delta_max", args.delta_max, 5.0)?;
    if grid == 0 {
        return Err(usage("grid must be positive"));
    }

    let mut table = ResultTable::new(
        &["x0", "delta", "ptilde"],
        src.echo("broadcast.ptilde", None),
    );
    for i in 0..grid {
        let x0 = x0_max * (i + 1) as f64 / grid as f64;
        for delta in linspace(0.0, delta_max, grid) {
            let p = ptilde_realistic(a, n, sigma, x0, delta)?;
            table.push_row(vec![x0, delta, p])?;
        }
    }
    Ok(table)
}

/// Feasible entanglement range and best error bound over an (x₀/√n, Δ/√n)
/// grid.
#[derive(Debug, Args, Default)]
pub struct BroadcastRegionArgs {
    /// Slack ε in the usefulness condition p̃ ≥ 1/3 − ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Homodyne uncertainty σ ≥ 0.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<u64>,
    /// Largest noise-rescaled outcome on the grid.
    #[arg(long)]
    pub x0_max: Option<f64>,
    /// Largest noise-rescaled shift on the grid.
    #[arg(long)]
    pub delta_max: Option<f64>,
}

pub fn broadcast_region(args: &BroadcastRegionArgs, src: &mut ParamSource) -> Result<ResultTable> {
    let epsilon = src.f64("epsilon", args.epsilon, 1e-3)?;
    let sigma = src.f64("sigma", args.sigma, 0.0)?;
    let grid = src.u64("grid", args.grid, 8)? as usize;
    let x0_max = src.f64("x0_max", args.x0_max, 5.0)?;
    let delta_max = src.f64("delta_max", args.delta_max, 5.0)?;
    if grid == 0 {
        return Err(usage("grid must be positive"));
    }

    let mut points = Vec::new();
    for i in 0..grid {
        let x0 = x0_max * (i + 1) as f64 / grid as f64;
        for delta in linspace(0.0, delta_max, grid) {
            points.push((x0, delta));
        }
    }
    let region = cvqit_core::broadcast::useful_region(epsilon, sigma, &points)?;
    let mut table = ResultTable::new(
        &["x0", "delta", "a_min", "a_max", "eta_best"],
        src.echo("broadcast.region", None),
    );
    for p in region {
        table.push_row(vec![
            p.x0,
            p.delta,
            p.a_min.unwrap_or(NAN),
            p.a_max.unwrap_or(NAN),
            p.eta_best.unwrap_or(NAN),
        ])?;
    }
    Ok(table)
}

/// One seeded protocol execution with a chosen adversary strategy.
#[derive(Debug, Args, Default)]
pub struct BroadcastRunArgs {
    /// Entanglement parameter a ≥ 1.
    #[arg(long)]
    pub a: Option<f64>,
    /// Added thermal noise n ≥ 1.
    #[arg(long)]
    pub n: Option<f64>,
    /// Coincident outcome modulus announced by the sender.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Homodyne uncertainty σ ≥ 0.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Coincident invocations to simulate.
    #[arg(long)]
    pub m_states: Option<u64>,
    /// Order bit broadcast by an honest sender.
    #[arg(long)]
    pub bit: Option<u64>,
    /// Strategy: "honest", "shift" (displacement scale λ'), or "split"
    /// (inconsistent sender bits).
    #[arg(long)]
    pub strategy: Option<String>,
    /// Displacement scale λ' of the shift adversary.
    #[arg(long)]
    pub lambda_prime: Option<f64>,
    /// Dishonest party index (0 sender, 1/2 receivers) for "shift".
    #[arg(long)]
    pub party: Option<u64>,
}

pub fn broadcast_run(
    args: &BroadcastRunArgs,
    src: &mut ParamSource,
    seed: u64,
) -> Result<ResultTable> {
    let a = src.f64("a", args.a, 1.5)?;
    let n = src.f64("n", args.n, 1.0)?;
    let x0 = src.f64("x0", args.x0, 3.0)?;
    let sigma = src.f64("sigma", args.sigma, 0.1)?;
    let m_states = src.u64("m_states", args.m_states, 4000)? as usize;
    let bit = src.u64("bit", args.bit, 0)? as u8;
    let strategy_name = src.string("strategy", args.strategy.as_deref(), "honest")?;
    let lambda_prime = src.f64("lambda_prime", args.lambda_prime, 1.5)?;
    let party = src.u64("party", args.party, 0)? as usize;
    if party > 2 {
        return Err(usage("party must be 0, 1 or 2"));
    }

    let mut strategies = [Strategy::Honest; 3];
    match strategy_name.as_str() {
        "honest" => {}
        "shift" => strategies[party] = traitor_strategy_shift(lambda_prime),
        "split" => {
            strategies[0] = Strategy::InconsistentBits {
                to_r0: bit,
                to_r1: 1 - bit,
            }
        }
        other => {
            return Err(usage(format!(
                "unknown strategy '{other}' (expected 'honest', 'shift' or 'split')"
            )))
        }
    }

    let res = TripartiteResource::new(a, n)?;
    let mut cfg = ProtocolConfig::new(x0, sigma, m_states, seed);
    cfg.bit = bit;
    let transcript = run_protocol(&res, &cfg, strategies)?;
    let (verdict_bit, aborted) = match &transcript.verdict {
        Verdict::Agreement(b) => (*b as f64, 0.0),
        Verdict::Abort(_) => (-1.0, 1.0),
    };

    let mut columns = vec![
        "verdict_bit".to_string(),
        "aborted".to_string(),
        "invocations".to_string(),
    ];
    for k in 0..8 {
        columns.push(format!("count_{k:03b}"));
    }
    columns.extend(
        ["primitive_triples", "discarded_u", "honest_consistent"]
            .iter()
            .map(|s| s.to_string()),
    );
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = ResultTable::new(&column_refs, src.echo("broadcast.run", Some(seed)));
    let mut row = vec![verdict_bit, aborted, transcript.stats.invocations as f64];
    row.extend(transcript.stats.counts.iter().map(|&c| c as f64));
    row.push(transcript.stats.primitive_triples as f64);
    row.push(transcript.stats.discarded_u as f64);
    row.push(f64::from(u8::from(transcript.honest_actions_consistent())));
    table.push_row(row)?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// qcorr
// ---------------------------------------------------------------------------

/// Bit correlation Q versus negativity along a one-parameter state family.
#[derive(Debug, Args, Default)]
pub struct QcorrCurveArgs {
    /// Family: "tms", "bell", "psub" or "mixture".
    #[arg(long)]
    pub family: Option<String>,
    /// Number of points along the family parameter.
    #[arg(long)]
    pub points: Option<u64>,
    /// Largest squeezing (tms, psub) on the sweep.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Beam-splitter transmittivity of the photon-subtracted family.
    #[arg(long)]
    pub transmittivity: Option<f64>,
    /// Fixed squeezing of the vacuum-mixture family.
    #[arg(long)]
    pub r: Option<f64>,
}

pub fn qcorr_curve(args: &QcorrCurveArgs, src: &mut ParamSource) -> Result<ResultTable> {
    let family = src.string("family", args.family.as_deref(), "tms")?;
    let points = src.u64("points", args.points, 9)? as usize;
    let r_max = src.f64("r_max", args.r_max, 1.0)?;
    let transmittivity = src.f64("transmittivity", args.transmittivity, 0.8)?;
    let r_fixed = src.f64("r", args.r, 0.8)?;
    if points == 0 {
        return Err(usage("points must be positive"));
    }

    let mut table = ResultTable::new(
        &["parameter", "negativity", "scaled_negativity", "q"],
        src.echo("qcorr.curve", None),
    );
    for i in 0..points {
        let (param, neg, q) = match family.as_str() {
            "tms" => {
                let r = r_max * (i + 1) as f64 / points as f64;
                let neg = negativity_closed_form(&NegativityFamily::TwoModeSqueezed { r })?;
                let q = q_gaussian_closed_form(&GaussianState::two_mode_squeezed(r))?;
                (r, neg, q)
            }
            "bell" => {
                let p = (i + 1) as f64 / (points + 1) as f64;
                let neg = negativity_closed_form(&NegativityFamily::Bell { p })?;
                let state = StateModel::Wigner(WignerPoly::bell(
                    cvqit_core::nongauss::BellKind::PhiPlus,
                    p,
                )?);
                let (q, _) = bit_correlation_q(&state)?;
                (p, neg, q)
            }
            "psub" => {
                let r = r_max * (i + 1) as f64 / points as f64;
                let neg = negativity_closed_form(&NegativityFamily::PhotonSubtracted {
                    transmittivity,
                    r,
                })?;
                let q = q_photon_subtracted_series(transmittivity, r, 400)?;
                (r, neg, q)
            }
            "mixture" => {
                let p = (i + 1) as f64 / (points + 1) as f64;
                let neg =
                    negativity_closed_form(&NegativityFamily::MixtureWithVacuum { p, r: r_fixed })?;
                let q = q_mixture_with_vacuum(p, r_fixed)?;
                (p, neg, q)
            }
            other => {
                return Err(usage(format!(
                    "unknown family '{other}' (expected 'tms', 'bell', 'psub' or 'mixture')"
                )))
            }
        };
        table.push_row(vec![param, neg, 2.0 * neg / (2.0 * neg + 1.0), q])?;
    }
    Ok(table)
}

/// Q / negativity / purity scatter over random two-mode Gaussian states.
#[derive(Debug, Args, Default)]
pub struct QcorrScatterArgs {
    /// Number of sampled states.
    #[arg(long)]
    pub count: Option<u64>,
    /// Largest marginal variance of the sampler.
    #[arg(long)]
    pub lambda_max: Option<f64>,
}

pub fn qcorr_scatter(
    args: &QcorrScatterArgs,
    src: &mut ParamSource,
    seed: u64,
) -> Result<ResultTable> {
    let count = src.u64("count", args.count, 200)? as usize;
    let lambda_max = src.f64("lambda_max", args.lambda_max, 3.0)?;
    let pts = random_gaussian_scatter(count, lambda_max, seed)?;
    let mut table = ResultTable::new(
        &["negativity", "scaled_negativity", "q", "purity"],
        src.echo("qcorr.scatter", Some(seed)),
    );
    for p in pts {
        table.push_row(vec![p.negativity, p.scaled_negativity, p.q, p.purity])?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// atomlight
// ---------------------------------------------------------------------------

/// Standard form of the post-measurement two-sample state after one pulse.
#[derive(Debug, Args, Default)]
pub struct AtomEprArgs {
    /// Coupling strength κ of the pulse.
    #[arg(long)]
    pub kappa: Option<f64>,
}

pub fn atomlight_epr(args: &AtomEprArgs, src: &mut ParamSource, seed: u64) -> Result<ResultTable> {
    let kappa = src.f64("kappa", args.kappa, 1.0)?;
    let mut rng = seeded(seed);
    let reg = EnsembleRegister::new(2)?;
    let cfg = InterfaceConfig::uniform(2, kappa, 0.0)?;
    let post = pulse_and_measure(&reg, &cfg, &mut rng)?;
    let sf = standard_form(post.state())?;
    let k2 = kappa * kappa;
    let r_closed = 0.5 * ((1.0 + k2) / (1.0 + 2.0 * k2).sqrt()).acosh();
    let mut table = ResultTable::new(
        &["kappa", "r_closed", "lambda_a", "lambda_b", "c_x", "c_p"],
        src.echo("atomlight.epr", Some(seed)),
    );
    table.push_row(vec![
        kappa,
        r_closed,
        sf.lambda_a,
        sf.lambda_b,
        sf.c_x,
        sf.c_p,
    ])?;
    Ok(table)
}

/// Residual entanglement after a second pulse sweeping through the erasing
/// coupling.
#[derive(Debug, Args, Default)]
pub struct AtomEraserArgs {
    /// Coupling strength κ₁ of the entangling pulse.
    #[arg(long)]
    pub kappa1: Option<f64>,
    /// Number of atomic samples.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Number of κ₂ sweep points.
    #[arg(long)]
    pub points: Option<u64>,
}

pub fn atomlight_eraser(
    args: &AtomEraserArgs,
    src: &mut ParamSource,
    seed: u64,
) -> Result<ResultTable> {
    let kappa1 = src.f64("kappa1", args.kappa1, 1.0)?;
    let samples = src.u64("samples", args.samples, 2)? as usize;
    let points = src.u64("points", args.points, 9)? as usize;
    if points == 0 {
        return Err(usage("points must be positive"));
    }
    let kappa2_star = erasing_kappa2(kappa1, samples)?;
    let split = ModePartition::bipartition(vec![0], (1..samples).collect())?;
    let mut rng = seeded(seed);
    let mut table = ResultTable::new(
        &["kappa2", "kappa2_star", "log_negativity"],
        src.echo("atomlight.eraser", Some(seed)),
    );
    for kappa2 in linspace(0.0, 2.0 * kappa2_star, points) {
        let reg = EnsembleRegister::new(samples)?;
        let cfg = InterfaceConfig::uniform(samples, kappa1, 0.0)?;
        let entangled = pulse_and_measure(&reg, &cfg, &mut rng)?;
        let erased = eraser(&entangled, kappa2, &mut rng)?;
        let ln = log_negativity(erased.state(), &split)?;
        table.push_row(vec![kappa2, kappa2_star, ln])?;
    }
    Ok(table)
}

/// Multipartite variances and separability test of a GHZ-type register.
#[derive(Debug, Args, Default)]
pub struct AtomGhzArgs {
    /// Number of atomic samples (≥ 2).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Coupling strength κ of each pulse.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Construction: "single", "pairwise" or "even".
    #[arg(long)]
    pub mode: Option<String>,
}

pub fn atomlight_ghz(args: &AtomGhzArgs, src: &mut ParamSource, seed: u64) -> Result<ResultTable> {
    let samples = src.u64("samples", args.samples, 3)? as usize;
    let kappa = src.f64("kappa", args.kappa, 1.0)?;
    let mode_name = src.string("mode", args.mode.as_deref(), "pairwise")?;
    let mode = match mode_name.as_str() {
        "single" => GhzMode::SinglePulse,
        "pairwise" => GhzMode::Pairwise,
        "even" => GhzMode::OptimalEven,
        other => {
            return Err(usage(format!(
                "unknown GHZ mode '{other}' (expected 'single', 'pairwise' or 'even')"
            )))
        }
    };

    let mut rng = seeded(seed);
    let reg = build_ghz(samples, kappa, mode, &mut rng)?;
    let forms = vec![sum_z_form(samples), y_difference_form(samples, 0, 1)?];
    let vars = verify_variances(&reg, &forms)?;
    let nf = samples as f64;
    let k2 = kappa * kappa;
    let (target_sum, target_diff) = match mode {
        GhzMode::Pairwise => (nf / (2.0 + 2.0 * nf * k2), 1.0 / (1.0 + nf * k2)),
        GhzMode::SinglePulse => ((nf / 2.0) / (1.0 + nf * k2), NAN),
        GhzMode::OptimalEven => (NAN, NAN),
    };

    // Separability test on the {0} | {1, rest} bipartition with the printed
    // coefficient choice h = e₀ − e₁, g = (1, …, 1).
    let mut h = vec![0.0; samples];
    h[0] = 1.0;
    h[1] = -1.0;
    let g = vec![1.0; samples];
    let partition = VlfPartition {
        m: 0,
        n: 1,
        set_i: Vec::new(),
        set_i_prime: (2..samples).collect(),
    };
    let vlf = van_loock_furusawa(reg.state(), &h, &g, &partition)?;

    let mut table = ResultTable::new(
        &[
            "samples",
            "kappa",
            "var_sum_z",
            "target_sum_z",
            "var_y_diff",
            "target_y_diff",
            "vlf_lhs",
            "vlf_bound",
            "violated",
        ],
        src.echo("atomlight.ghz", Some(seed)),
    );
    table.push_row(vec![
        nf,
        kappa,
        vars[0],
        target_sum,
        vars[1],
        target_diff,
        vlf.lhs,
        vlf.bound,
        f64::from(u8::from(vlf.violated)),
    ])?;
    Ok(table)
}

/// Cluster-variable variances of a register built on a path graph.
#[derive(Debug, Args, Default)]
pub struct AtomClusterArgs {
    /// Number of atomic samples on the path.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Coupling strength κ of each vertex pulse.
    #[arg(long)]
    pub kappa: Option<f64>,
}

pub fn atomlight_cluster(
    args: &AtomClusterArgs,
    src: &mut ParamSource,
    seed: u64,
) -> Result<ResultTable> {
    let samples = src.u64("samples", args.samples, 4)? as usize;
    let kappa = src.f64("kappa", args.kappa, 1.0)?;
    let graph = SampleGraph::path(samples)?;
    let mut rng = seeded(seed);
    let outcome = build_cluster(&graph, kappa, &mut rng)?;
    let mut table = ResultTable::new(
        &["vertex", "variance", "connected"],
        src.echo("atomlight.cluster", Some(seed)),
    );
    let connected = f64::from(u8::from(outcome.connected));
    for (v, var) in outcome.variances.iter().enumerate() {
        table.push_row(vec![v as f64, *var, connected])?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// core
// ---------------------------------------------------------------------------

/// State-algebra summary of a two-mode standard-form state.
#[derive(Debug, Args, Default)]
pub struct CoreArgs {
    /// First-mode diagonal parameter λ_a.
    #[arg(long)]
    pub lambda_a: Option<f64>,
    /// Second-mode diagonal parameter λ_b.
    #[arg(long)]
    pub lambda_b: Option<f64>,
    /// Position correlation c_x.
    #[arg(long)]
    pub cx: Option<f64>,
    /// Momentum correlation c_p.
    #[arg(long)]
    pub cp: Option<f64>,
}

pub fn core_summary(args: &CoreArgs, src: &mut ParamSource) -> Result<ResultTable> {
    let lambda_a = src.f64("lambda_a", args.lambda_a, 1.5)?;
    let lambda_b = src.f64("lambda_b", args.lambda_b, 1.5)?;
    let cx = src.f64("cx", args.cx, 0.9)?;
    let cp = src.f64("cp", args.cp, -0.5)?;
    let state = GaussianState::standard_form_state(lambda_a, lambda_b, cx, cp);
    let physical = state.check_physicality(1e-9)?;
    let split = ModePartition::bipartition(vec![0], vec![1])?;
    let (ln, neg, q) = if physical {
        (
            log_negativity(&state, &split)?,
            negativity(&state, &split)?,
            q_gaussian_closed_form(&state)?,
        )
    } else {
        (NAN, NAN, NAN)
    };
    let mut table = ResultTable::new(
        &[
            "lambda_a",
            "lambda_b",
            "c_x",
            "c_p",
            "physical",
            "purity",
            "log_negativity",
            "negativity",
            "q",
        ],
        src.echo("core", None),
    );
    table.push_row(vec![
        lambda_a,
        lambda_b,
        cx,
        cp,
        f64::from(u8::from(physical)),
        if physical { state.purity()? } else { NAN },
        ln,
        neg,
        q,
    ])?;
    Ok(table)
}
