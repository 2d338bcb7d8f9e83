//! Key distribution from symmetric two-mode Gaussian states with homodyne
//! sign binning.
//!
//! Alice and Bob share a symmetric NPPT state, measure position quadratures,
//! keep only outcome pairs whose moduli fall inside a security interval, and
//! map signs to bits. The module provides the digitalized-outcome
//! probabilities, the error probability, the eavesdropper-state overlap,
//! the security inequalities against individual and finite-coherent attacks,
//! the acceptance interval, the protocol efficiency integral, and a seeded
//! Monte-Carlo sampler of key runs.

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate;
use crate::phase_space::GaussianState;
use crate::rng::GaussianSampler;

/// Symmetric two-mode Gaussian state in the key-distribution normal form:
/// covariance
/// `[[λ, 0, c_x, 0], [0, λ, 0, −c_p], [c_x, 0, λ, 0], [0, −c_p, 0, λ]]`
/// with the sign convention c_x ≥ |c_p| ≥ 0 (the momentum correlation
/// carries an explicit minus sign).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QkdState {
    /// Common local symplectic eigenvalue λ ≥ 1 (fixed energy per mode).
    pub lambda: f64,
    /// Position correlation, c_x ≥ |c_p|.
    pub c_x: f64,
    /// Momentum correlation magnitude; the covariance entry is −c_p.
    pub c_p: f64,
}

impl QkdState {
    /// Validates λ ≥ 1, c_x ≥ |c_p| ≥ 0 and physicality
    /// (λ − c_x)(λ + c_p) ≥ 1.
    pub fn new(lambda: f64, c_x: f64, c_p: f64) -> Result<Self> {
        if lambda < 1.0 {
            return Err(Error::Precondition(format!(
                "lambda must be ≥ 1, got {lambda}"
            )));
        }
        if c_x < 0.0 || c_x < c_p.abs() {
            return Err(Error::Precondition(format!(
                "correlations must satisfy c_x ≥ |c_p| ≥ 0, got c_x={c_x}, c_p={c_p}"
            )));
        }
        if (lambda - c_x) * (lambda + c_p) < 1.0 - 1e-9 {
            return Err(Error::Unphysical(format!(
                "(λ−c_x)(λ+c_p) = {} < 1",
                (lambda - c_x) * (lambda + c_p)
            )));
        }
        Ok(Self { lambda, c_x, c_p })
    }

    /// The shared two-mode state as a phase-space object.
    pub fn to_state(&self) -> GaussianState {
        GaussianState::new(
            DVector::zeros(4),
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    self.lambda,
                    0.0,
                    self.c_x,
                    0.0, //
                    0.0,
                    self.lambda,
                    0.0,
                    -self.c_p, //
                    self.c_x,
                    0.0,
                    self.lambda,
                    0.0, //
                    0.0,
                    -self.c_p,
                    0.0,
                    self.lambda,
                ],
            ),
        )
        .expect("normal-form covariance is well formed")
    }

    /// True iff the state is entangled: (λ − c_x)(λ − c_p) < 1.
    pub fn is_nppt(&self) -> bool {
        (self.lambda - self.c_x) * (self.lambda - self.c_p) < 1.0 - 1e-12
    }

    /// Logarithmic negativity log₂ 1/√((λ−c_x)(λ−c_p)), clamped at zero.
    pub fn log_negativity(&self) -> f64 {
        (-0.5 * ((self.lambda - self.c_x) * (self.lambda - self.c_p)).log2()).max(0.0)
    }

    /// True iff the state is pure: (λ−c_x)(λ+c_p) = (λ+c_x)(λ−c_p) = 1.
    pub fn is_pure(&self, tol: f64) -> bool {
        ((self.lambda - self.c_x) * (self.lambda + self.c_p) - 1.0).abs() <= tol
            && ((self.lambda + self.c_x) * (self.lambda - self.c_p) - 1.0).abs() <= tol
    }

    /// True iff the state stays secure under finite coherent attacks for
    /// some outcome window: λ − (λ+c_x)(λ−c_x)(λ−c_p) > 0.
    pub fn coherent_attack_viable(&self) -> bool {
        self.lambda - (self.lambda + self.c_x) * (self.lambda - self.c_x) * (self.lambda - self.c_p)
            > 0.0
    }
}

/// Eavesdropper model determining the security inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackModel {
    /// Eve measures her modes one by one: secure iff ε/(1−ε) < overlap.
    Individual,
    /// Eve stores and measures blocks coherently: secure iff
    /// ε/(1−ε) < overlap².
    FiniteCoherent,
}

/// Digitalized-outcome probabilities at measurement width σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbabilities {
    /// 𝒫^{++} = 𝒫^{−−}: both moduli matched with equal signs.
    pub p_same: f64,
    /// 𝒫^{−+} = 𝒫^{+−}: matched moduli, opposite signs.
    pub p_diff: f64,
    /// The Gaussian overlap prefactor K(σ).
    pub prefactor: f64,
}

/// Probability that projecting onto width-σ Gaussians centred at
/// ±|x₀A|, ±|x₀B| yields equal respectively opposite signs:
/// K(σ)·exp[(±2|x₀A||x₀B|c_x − (λ+σ²)(x₀A²+x₀B²)) / ((λ+σ²)² − c_x²)]
/// with K(σ) = 4σ² / (√((λ+σ²)²−c_x²)·√((λσ²+1)²−c_p²σ⁴)).
pub fn joint_probabilities(
    st: &QkdState,
    x0a: f64,
    x0b: f64,
    sigma: f64,
) -> Result<JointProbabilities> {
    if sigma <= 0.0 {
        return Err(Error::Precondition(
            "sigma must be positive; use error_probability for the sharp limit".into(),
        ));
    }
    let (l, cx, cp) = (st.lambda, st.c_x, st.c_p);
    let s2 = sigma * sigma;
    let dx = (l + s2) * (l + s2) - cx * cx;
    let dp = (l * s2 + 1.0) * (l * s2 + 1.0) - cp * cp * s2 * s2;
    let k = 4.0 * s2 / (dx.sqrt() * dp.sqrt());
    let u = x0a.abs();
    let v = x0b.abs();
    let quad = (l + s2) * (u * u + v * v);
    Ok(JointProbabilities {
        p_same: k * ((2.0 * u * v * cx - quad) / dx).exp(),
        p_diff: k * ((-2.0 * u * v * cx - quad) / dx).exp(),
        prefactor: k,
    })
}

/// Sharp-measurement (σ→0) probability that the two sign bits differ:
/// ε = 1 / (1 + exp(4c_x|x₀A||x₀B| / (λ² − c_x²))).
pub fn error_probability(st: &QkdState, x0a: f64, x0b: f64) -> Result<f64> {
    let denom = st.lambda * st.lambda - st.c_x * st.c_x;
    if denom <= 0.0 {
        return Err(Error::Numeric(format!(
            "λ² − c_x² = {denom} is not positive: singular marginal"
        )));
    }
    Ok(1.0 / (1.0 + (4.0 * st.c_x * x0a.abs() * x0b.abs() / denom).exp()))
}

/// Squared overlap |⟨e₊₊|e₋₋⟩|² between the eavesdropper's conditional
/// states after equal-sign versus opposite-sign projections:
/// exp( −4/(λ²−c_x²) · [ ((x₀A²+x₀B²)/2)(λ²−c_x²−1)λ
///                       + |x₀A||x₀B|(c_x − c_p(λ²−c_x²)) ] ).
pub fn eve_overlap(st: &QkdState, x0a: f64, x0b: f64) -> Result<f64> {
    let (l, cx, cp) = (st.lambda, st.c_x, st.c_p);
    let denom = l * l - cx * cx;
    if denom <= 0.0 {
        return Err(Error::Numeric(format!(
            "λ² − c_x² = {denom} is not positive: singular marginal"
        )));
    }
    let u = x0a.abs();
    let v = x0b.abs();
    let bracket = 0.5 * (u * u + v * v) * (denom - 1.0) * l + u * v * (cx - cp * denom);
    Ok((-4.0 / denom * bracket).exp())
}

/// Security test for an outcome pair: ε/(1−ε) < overlap (individual
/// attacks) or ε/(1−ε) < overlap² (finite coherent attacks). The squared
/// overlap |⟨e₊₊|e₋₋⟩|² is what [`eve_overlap`] returns, so the individual
/// bound uses its square root.
pub fn security_ok(st: &QkdState, x0a: f64, x0b: f64, attack: AttackModel) -> Result<bool> {
    let eps = error_probability(st, x0a, x0b)?;
    let overlap_sq = eve_overlap(st, x0a, x0b)?;
    let ratio = eps / (1.0 - eps);
    Ok(match attack {
        AttackModel::Individual => ratio < overlap_sq.sqrt(),
        AttackModel::FiniteCoherent => ratio < overlap_sq,
    })
}

/// Window of acceptable Bob outcomes for a given Alice outcome, as bounds
/// on Δx₀ = |x₀B| − |x₀A|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceInterval {
    /// Lower end of Δx₀ (always finite, > −|x₀A|).
    pub delta_lo: f64,
    /// Upper end of Δx₀; +∞ for pure states (parameter = 1).
    pub delta_hi: f64,
    /// The interval parameter: α for individual attacks, β for coherent.
    pub parameter: f64,
    /// Interval length 4√α/(α−1)·|x₀A|; +∞ when unbounded.
    pub length: f64,
}

impl AcceptanceInterval {
    /// True when the upper end extends to infinity (pure shared state).
    pub fn is_unbounded(&self) -> bool {
        self.delta_hi.is_infinite()
    }

    /// True iff Bob's outcome modulus |x₀B| falls inside the window for
    /// Alice's outcome `x0a`; the window bounds scale with |x₀A|.
    pub fn accepts(&self, x0a: f64, x0b: f64) -> bool {
        let delta = x0b.abs() - x0a.abs();
        let s = self.parameter.sqrt();
        let lo = 2.0 / (-s - 1.0) * x0a.abs();
        let hi = if self.delta_hi.is_infinite() {
            f64::INFINITY
        } else {
            2.0 / (s - 1.0) * x0a.abs()
        };
        delta >= lo && delta <= hi
    }
}

/// The secure outcome window Δx₀ ∈ [2/(−√α−1), 2/(√α−1)]·|x₀A| with
/// α = ((c_x−λ)/(c_x+λ))·(1−(λ+c_x)(λ+c_p))/(1−(λ−c_x)(λ−c_p))
/// for individual attacks, and the analogous β window with
/// β = 2λ(λ²−c_x²−1)/(λ−(λ+c_x)(λ−c_x)(λ−c_p)) for finite coherent
/// attacks. Errors when the parameter drops below 1 (no secure window).
pub fn acceptance_interval(
    st: &QkdState,
    x0a: f64,
    attack: AttackModel,
) -> Result<AcceptanceInterval> {
    let (l, cx, cp) = (st.lambda, st.c_x, st.c_p);
    let param = match attack {
        AttackModel::Individual => {
            let denom = 1.0 - (l - cx) * (l - cp);
            if denom <= 0.0 {
                return Err(Error::Precondition(
                    "state is not NPPT: no secure outcome window exists".into(),
                ));
            }
            (cx - l) / (cx + l) * (1.0 - (l + cx) * (l + cp)) / denom
        }
        AttackModel::FiniteCoherent => {
            // The coherent security equality ε/(1−ε) = overlap² reduces to
            // A(x₀A²+x₀B²)/2 = C·x₀A·x₀B with A = λ(λ²−c_x²−1) and
            // C = c_p(λ²−c_x²); its endpoint parameter is (A+C)/(C−A),
            // with C−A = λ−(λ+c_x)(λ−c_x)(λ−c_p) the viability margin.
            let a = l * (l * l - cx * cx - 1.0);
            let c = cp * (l * l - cx * cx);
            if c - a <= 0.0 {
                return Err(Error::Precondition(
                    "state fails the coherent-attack constraint λ − (λ+c_x)(λ−c_x)(λ−c_p) > 0"
                        .into(),
                ));
            }
            (a + c) / (c - a)
        }
    };
    if param < 1.0 - 1e-9 {
        return Err(Error::Precondition(format!(
            "interval parameter {param} < 1: no secure outcome window"
        )));
    }
    // Snap to the pure-state point to avoid an artificially huge window
    // from rounding noise.
    let param = if (param - 1.0).abs() <= 1e-9 {
        1.0
    } else {
        param
    };
    let u = x0a.abs();
    let sqrt_p = param.sqrt();
    let delta_lo = 2.0 / (-sqrt_p - 1.0) * u;
    let (delta_hi, length) = if param == 1.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (2.0 / (sqrt_p - 1.0) * u, 4.0 * sqrt_p / (param - 1.0) * u)
    };
    Ok(AcceptanceInterval {
        delta_lo,
        delta_hi,
        parameter: param,
        length,
    })
}

/// Residual error after classical advantage distillation over blocks of M
/// bits: ε_M = ε^M / ((1−ε)^M + ε^M).
pub fn cad_error(eps: f64, m: u32) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Precondition(format!(
            "advantage distillation needs 0 ≤ ε < 1/2, got {eps}"
        )));
    }
    if m == 0 {
        return Err(Error::Precondition(
            "block length M must be positive".into(),
        ));
    }
    // Evaluate via the odds ratio to stay stable for large M.
    let odds = (eps / (1.0 - eps)).powi(m as i32);
    Ok(odds / (1.0 + odds))
}

/// Quadrature resolution for the efficiency integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyQuadrature {
    /// Gauss-Legendre points per dimension.
    pub points: usize,
    /// Integration cutoff in units of √λ; Gaussian tails beyond ~8 are
    /// negligible.
    pub cutoff_sigmas: f64,
}

impl Default for EfficiencyQuadrature {
    fn default() -> Self {
        Self {
            points: 160,
            cutoff_sigmas: 8.0,
        }
    }
}

/// Position-marginal density of the shared state at (x₀A, x₀B):
/// exp((2c_x·x₀A·x₀B − λ(x₀A²+x₀B²))/(λ²−c_x²)) / (π√(λ²−c_x²)).
pub fn position_marginal(st: &QkdState, x0a: f64, x0b: f64) -> f64 {
    let denom = st.lambda * st.lambda - st.c_x * st.c_x;
    ((2.0 * st.c_x * x0a * x0b - st.lambda * (x0a * x0a + x0b * x0b)) / denom).exp()
        / (std::f64::consts::PI * denom.sqrt())
}

/// Protocol efficiency: the average probability of harvesting a correlated
/// bit, ∫∫_{Δx₀∈window} (1−ε)·marginal dx₀A dx₀B over the signed outcome
/// plane. Returns 0 when no secure window exists (e.g. separable states).
/// Errors if two quadrature resolutions disagree beyond 1e-6.
pub fn efficiency(st: &QkdState, attack: AttackModel, quad: EfficiencyQuadrature) -> Result<f64> {
    let window = match acceptance_interval(st, 1.0, attack) {
        Ok(w) => w,
        Err(Error::Precondition(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let coarse = efficiency_quadrature(st, &window, quad.points, quad.cutoff_sigmas)?;
    let fine = efficiency_quadrature(st, &window, 2 * quad.points, quad.cutoff_sigmas)?;
    if (coarse - fine).abs() > 1e-6 * fine.abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "efficiency quadrature did not converge: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

/// Efficiency for an explicit (possibly artificially shrunk) window; the
/// window's relative bounds (per unit |x₀A|) scale with the outer variable.
pub fn efficiency_with_window(
    st: &QkdState,
    window: &AcceptanceInterval,
    quad: EfficiencyQuadrature,
) -> Result<f64> {
    efficiency_quadrature(st, window, quad.points, quad.cutoff_sigmas)
}

fn efficiency_quadrature(
    st: &QkdState,
    unit_window: &AcceptanceInterval,
    points: usize,
    cutoff_sigmas: f64,
) -> Result<f64> {
    let cutoff = cutoff_sigmas * st.lambda.sqrt();
    // Sum over the four sign quadrants at fixed moduli (u, v): the window
    // and ε depend on moduli only, the marginal's cross term alternates.
    let value = integrate::integrate_1d(
        |u: f64| {
            let lo = (u + unit_window.delta_lo * u).max(0.0);
            let hi = (u + unit_window.delta_hi * u).min(cutoff);
            if hi <= lo {
                return 0.0;
            }
            integrate::integrate_1d(
                |v: f64| {
                    let eps = error_probability(st, u, v).unwrap_or(0.5);
                    let dens = 2.0 * (position_marginal(st, u, v) + position_marginal(st, u, -v));
                    (1.0 - eps) * dens
                },
                lo,
                hi,
                points,
            )
        },
        0.0,
        cutoff,
        points,
    );
    Ok(value)
}

/// Sampling plan for a Monte-Carlo key run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRunConfig {
    /// Measurement width used for bookkeeping (the sampler itself draws
    /// sharp outcomes from the position marginal).
    pub sigma: f64,
    /// Advantage-distillation block length.
    pub m: u32,
    /// Number of measurement rounds.
    pub samples: usize,
    /// Seed for the deterministic generator.
    pub seed: u64,
    /// Attack model fixing the acceptance window.
    pub attack: AttackModel,
}

/// Transcript of a simulated key run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRunSummary {
    /// Alice's accepted sign bits (0 = positive outcome).
    pub raw_bits_a: Vec<u8>,
    /// Bob's accepted sign bits.
    pub raw_bits_b: Vec<u8>,
    /// Fraction of accepted rounds with differing bits.
    pub empirical_eps: f64,
    /// Accepted rounds over total rounds.
    pub accepted_fraction: f64,
    /// Mean analytic ε over the accepted outcome pairs.
    pub mean_pointwise_eps: f64,
    /// Residual error after advantage distillation of the empirical rate.
    pub cad_eps: Option<f64>,
}

/// Simulates the sign-binning protocol: draws (x_A, x_B) from the position
/// marginal (covariance γ_xx/2), applies the acceptance window (all rounds
/// are kept when no window exists so the raw statistics remain observable),
/// and digitalizes the signs into bits.
pub fn simulate_key_run(st: &QkdState, cfg: &KeyRunConfig) -> Result<KeyRunSummary> {
    let x_marginal = GaussianState::new(
        DVector::zeros(2),
        DMatrix::from_row_slice(2, 2, &[st.lambda, st.c_x, st.c_x, st.lambda]),
    )?;
    let sampler = GaussianSampler::new(&x_marginal)?;
    let window = acceptance_interval(st, 1.0, cfg.attack).ok();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut bits_a = Vec::new();
    let mut bits_b = Vec::new();
    let mut disagreements = 0usize;
    let mut eps_sum = 0.0;
    for _ in 0..cfg.samples {
        let xy = sampler.sample(&mut rng);
        let (xa, xb) = (xy[0], xy[1]);
        let accepted = match &window {
            Some(w) => w.accepts(xa, xb),
            None => true,
        };
        if !accepted {
            continue;
        }
        let ba = u8::from(xa < 0.0);
        let bb = u8::from(xb < 0.0);
        if ba != bb {
            disagreements += 1;
        }
        eps_sum += error_probability(st, xa, xb)?;
        bits_a.push(ba);
        bits_b.push(bb);
    }
    let accepted = bits_a.len();
    let empirical_eps = if accepted > 0 {
        disagreements as f64 / accepted as f64
    } else {
        0.0
    };
    let cad_eps = if empirical_eps < 0.5 {
        Some(cad_error(empirical_eps, cfg.m)?)
    } else {
        None
    };
    Ok(KeyRunSummary {
        raw_bits_a: bits_a,
        raw_bits_b: bits_b,
        empirical_eps,
        accepted_fraction: accepted as f64 / cfg.samples.max(1) as f64,
        mean_pointwise_eps: if accepted > 0 {
            eps_sum / accepted as f64
        } else {
            0.0
        },
        cad_eps,
    })
}
