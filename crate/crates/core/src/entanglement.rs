//! Separability criteria and entanglement quantifiers for two- and
//! three-mode Gaussian states.
//!
//! Partial transposition acts in phase space as a momentum sign flip
//! θ = diag(1, −1) on the transposed modes; a 1×N Gaussian state is
//! entangled iff the partially transposed covariance matrix has a
//! symplectic eigenvalue below 1 (NPPT).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::phase_space::{standard_form, GaussianState, ModePartition, StandardFormParams};

/// Tolerance on partial-transpose symplectic eigenvalues for NPPT tests.
pub const NPPT_TOL: f64 = 1e-9;

/// Covariance matrix after partial transposition of the modes in the first
/// subset of `split`.
pub fn partial_transpose(state: &GaussianState, split: &ModePartition) -> Result<DMatrix<f64>> {
    split.validate(state.modes())?;
    let transposed = split
        .subsets()
        .first()
        .ok_or_else(|| Error::Addressing("empty partition".into()))?;
    let mut theta = DMatrix::identity(2 * state.modes(), 2 * state.modes());
    for &m in transposed {
        theta[(2 * m + 1, 2 * m + 1)] = -1.0;
    }
    Ok(&theta * state.covariance() * &theta)
}

/// Symplectic spectrum {μ̃ᵢ} of the partial transpose across `split`.
pub fn pt_symplectic_spectrum(state: &GaussianState, split: &ModePartition) -> Result<Vec<f64>> {
    linalg::symplectic_spectrum(&partial_transpose(state, split)?)
}

/// True iff the state has non-positive partial transpose across `split`
/// (min μ̃ < 1 − tol): entanglement for 1×N Gaussian states.
pub fn is_nppt(state: &GaussianState, split: &ModePartition) -> Result<bool> {
    let mu = pt_symplectic_spectrum(state, split)?;
    Ok(mu.iter().any(|&m| m < 1.0 - NPPT_TOL))
}

/// Logarithmic negativity E_N = −Σᵢ log₂ min(μ̃ᵢ, 1) ≥ 0.
pub fn log_negativity(state: &GaussianState, split: &ModePartition) -> Result<f64> {
    let mu = pt_symplectic_spectrum(state, split)?;
    Ok(mu.iter().map(|&m| -m.min(1.0).log2()).sum())
}

/// Negativity N = (Πᵢ 1/min(μ̃ᵢ, 1) − 1)/2 ≥ 0.
pub fn negativity(state: &GaussianState, split: &ModePartition) -> Result<f64> {
    let mu = pt_symplectic_spectrum(state, split)?;
    let prod: f64 = mu.iter().map(|&m| 1.0 / m.min(1.0)).product();
    Ok(0.5 * (prod - 1.0))
}

/// Entropy of entanglement of a *pure* state across `split`:
/// Σ [((μ+1)/2)·log₂((μ+1)/2) − ((μ−1)/2)·log₂((μ−1)/2)] over the
/// symplectic spectrum of the reduction.
pub fn entropy_of_entanglement(state: &GaussianState, split: &ModePartition) -> Result<f64> {
    if !state.is_pure(1e-6) {
        return Err(Error::Precondition(
            "entropy of entanglement is defined for pure states only".into(),
        ));
    }
    split.validate(state.modes())?;
    let side = split
        .subsets()
        .iter()
        .min_by_key(|s| s.len())
        .ok_or_else(|| Error::Addressing("empty partition".into()))?;
    let reduced = state.reduce(&ModePartition::single(side.clone()))?;
    let mu = reduced.symplectic_spectrum()?;
    Ok(mu
        .iter()
        .map(|&m| {
            let plus = 0.5 * (m + 1.0);
            let minus = 0.5 * (m - 1.0);
            let t1 = if plus > 0.0 { plus * plus.log2() } else { 0.0 };
            let t2 = if minus > 1e-15 {
                minus * minus.log2()
            } else {
                0.0
            };
            t1 - t2
        })
        .sum())
}

/// Outcome of an EPR-variance (Duan) separability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuanOutcome {
    /// var(û) + var(v̂) in vacuum units.
    pub lhs: f64,
    /// Separability bound a² + 1/a².
    pub bound: f64,
    /// True iff lhs < bound, witnessing entanglement.
    pub violated: bool,
    /// The parameter a at which the test was evaluated.
    pub a: f64,
}

/// Duan EPR-variance test at a given parameter a with the plain operators
/// û = |a|x̂₁ + x̂₂/a, v̂ = |a|p̂₁ − p̂₂/a. Separable states satisfy
/// lhs ≥ a² + 1/a².
pub fn duan_test(state: &GaussianState, a: f64) -> Result<DuanOutcome> {
    duan_test_signed(state, a, 1.0, 1.0)
}

/// Duan test with sign-adapted operators û = |a|x̂₁ + s_x·x̂₂/a,
/// v̂ = |a|p̂₁ − s_p·p̂₂/a. Signs adapted to the correlations make the test
/// maximally sensitive (e.g. (x̂₁ − x̂₂, p̂₁ + p̂₂) for a two-mode squeezed
/// state).
pub fn duan_test_signed(state: &GaussianState, a: f64, s_x: f64, s_p: f64) -> Result<DuanOutcome> {
    if state.modes() != 2 {
        return Err(Error::Dimension(
            "Duan test requires a two-mode state".into(),
        ));
    }
    if a == 0.0 {
        return Err(Error::Precondition(
            "Duan parameter a must be nonzero".into(),
        ));
    }
    let aa = a.abs();
    let u = DVector::from_vec(vec![aa, 0.0, s_x / a, 0.0]);
    let v = DVector::from_vec(vec![0.0, aa, 0.0, -s_p / a]);
    let lhs = state.variance_of_form(&u)? + state.variance_of_form(&v)?;
    let bound = a * a + 1.0 / (a * a);
    Ok(DuanOutcome {
        lhs,
        bound,
        violated: lhs < bound - 1e-12,
        a,
    })
}

/// Duan test with correlation-adapted signs: the x-operator sign opposes
/// the x₁x₂ covariance and the p-operator sign follows the p₁p₂ covariance,
/// matching the standard-form-II operator convention.
pub fn duan_test_adapted(state: &GaussianState, a: f64) -> Result<DuanOutcome> {
    let g = state.covariance();
    // û = |a|x̂₁ − sign(⟨x₁x₂⟩)x̂₂/a, v̂ = |a|p̂₁ − sign(⟨p₁p₂⟩)p̂₂/a.
    let s_x = if g[(0, 2)] > 0.0 { -1.0 } else { 1.0 };
    let s_p = if g[(1, 3)] < 0.0 { -1.0 } else { 1.0 };
    duan_test_signed(state, a, s_x, s_p)
}

/// Standard form II of a two-mode state: the covariance matrix
/// diag-blocks (n₁, n₂), (m₁, m₂) with correlations (c₁, c₂) satisfying
/// (n₁−1)/(m₁−1) = (n₂−1)/(m₂−1) and
/// |c₁| − |c₂| = √((n₁−1)(m₁−1)) − √((n₂−1)(m₂−1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardFormII {
    /// Diagonal entries (n₁, n₂, m₁, m₂).
    pub n1: f64,
    /// See `n1`.
    pub n2: f64,
    /// See `n1`.
    pub m1: f64,
    /// See `n1`.
    pub m2: f64,
    /// Correlations (c₁, c₂).
    pub c1: f64,
    /// See `c1`.
    pub c2: f64,
}

impl StandardFormII {
    /// The optimal Duan parameter a₀ with a₀² = √((m₁−1)/(n₁−1)).
    pub fn a0(&self) -> f64 {
        ((self.m1 - 1.0) / (self.n1 - 1.0)).sqrt().sqrt()
    }
}

/// Computes standard form II from the standard-form-I invariants by solving
/// for the two local squeezings (t₁ = e^{−2r₁}, t₂ = e^{−2r₂}) with nested
/// bisection; the inner equation balances the diagonal ratios, the outer
/// one the correlation condition.
pub fn standard_form_ii(state: &GaussianState) -> Result<StandardFormII> {
    let p = standard_form(state)?;
    standard_form_ii_from_params(&p)
}

/// See [`standard_form_ii`]; operates directly on form-I parameters.
pub fn standard_form_ii_from_params(p: &StandardFormParams) -> Result<StandardFormII> {
    let (la, lb, cx, cp) = (p.lambda_a, p.lambda_b, p.c_x, p.c_p);
    if cx.abs() < 1e-12 && cp.abs() < 1e-12 {
        // Product state: already in form II with t₁ = t₂ = 1.
        return Ok(StandardFormII {
            n1: la,
            n2: la,
            m1: lb,
            m2: lb,
            c1: 0.0,
            c2: 0.0,
        });
    }
    let build = |t1: f64, t2: f64| StandardFormII {
        n1: la * t1,
        n2: la / t1,
        m1: lb * t2,
        m2: lb / t2,
        c1: cx * (t1 * t2).sqrt(),
        c2: cp / (t1 * t2).sqrt(),
    };
    // Inner solve: given t₁, find t₂ ∈ [1/λ_b, λ_b] with
    // (n₁−1)(m₂−1) = (n₂−1)(m₁−1); the residual is monotone in t₂.
    let inner = |t1: f64| -> f64 {
        let f = |t2: f64| (la * t1 - 1.0) * (lb / t2 - 1.0) - (la / t1 - 1.0) * (lb * t2 - 1.0);
        let (mut lo, mut hi) = (1.0 / lb, lb);
        if lb <= 1.0 + 1e-14 {
            return 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // Outer residual: the correlation condition of form II.
    let outer = |t1: f64| -> f64 {
        let t2 = inner(t1);
        let f = build(t1, t2);
        let g1 = ((f.n1 - 1.0).max(0.0) * (f.m1 - 1.0).max(0.0)).sqrt();
        let g2 = ((f.n2 - 1.0).max(0.0) * (f.m2 - 1.0).max(0.0)).sqrt();
        (f.c1.abs() - f.c2.abs()) - (g1 - g2)
    };
    if la <= 1.0 + 1e-14 || lb <= 1.0 + 1e-14 {
        // One marginal is pure: the whole state is a product state and
        // form II degenerates to form I.
        return Ok(build(1.0, 1.0));
    }
    // Bracket a sign change of the outer residual on t₁ ∈ (1/λ_a, λ_a).
    let lo0 = 1.0 / la + 1e-12;
    let hi0 = la - 1e-12;
    let steps = 400;
    let mut bracket = None;
    let mut prev_t = lo0;
    let mut prev_v = outer(lo0);
    for k in 1..=steps {
        let t = lo0 + (hi0 - lo0) * (k as f64) / (steps as f64);
        let v = outer(t);
        if prev_v == 0.0 || prev_v * v <= 0.0 {
            bracket = Some((prev_t, t));
            break;
        }
        prev_t = t;
        prev_v = v;
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::Numeric(
            "no standard-form-II solution bracketed (correlations too degenerate)".into(),
        )
    })?;
    let sign_lo = outer(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if outer(mid).signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t1 = 0.5 * (lo + hi);
    Ok(build(t1, inner(t1)))
}

/// Duan test at the optimal working point: transforms to standard form II,
/// evaluates the sign-adapted operators at the closed-form a₀, and refines
/// with a golden-section search over a ∈ [1e-3, 1e3] as a fallback for
/// numerically degenerate correlations. For Gaussian states this violation
/// is equivalent to NPPT.
pub fn duan_test_optimal(state: &GaussianState) -> Result<DuanOutcome> {
    let f2 = standard_form_ii(state)?;
    let s_x = if f2.c1 != 0.0 { -f2.c1.signum() } else { -1.0 };
    let s_p = if f2.c2 != 0.0 { f2.c2.signum() } else { 1.0 };
    let form_state = GaussianState::new(
        DVector::zeros(4),
        DMatrix::from_row_slice(
            4,
            4,
            &[
                f2.n1, 0.0, f2.c1, 0.0, //
                0.0, f2.n2, 0.0, f2.c2, //
                f2.c1, 0.0, f2.m1, 0.0, //
                0.0, f2.c2, 0.0, f2.m2,
            ],
        ),
    )?;
    let margin = |out: &DuanOutcome| out.lhs - out.bound;
    let eval = |a: f64| duan_test_signed(&form_state, a, s_x, s_p);
    let mut best = if (f2.n1 - 1.0).abs() > 1e-12 && (f2.m1 - 1.0) > 1e-12 && f2.n1 > 1.0 {
        eval(f2.a0())?
    } else {
        eval(1.0)?
    };
    // Golden-section refinement of the violation margin over log a.
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((1e-3f64).ln(), (1e3f64).ln());
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = margin(&eval(x1.exp())?);
    let mut f2v = margin(&eval(x2.exp())?);
    for _ in 0..200 {
        if f1 < f2v {
            hi = x2;
            x2 = x1;
            f2v = f1;
            x1 = hi - phi * (hi - lo);
            f1 = margin(&eval(x1.exp())?);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2v;
            x2 = lo + phi * (hi - lo);
            f2v = margin(&eval(x2.exp())?);
        }
    }
    let refined = eval((0.5 * (lo + hi)).exp())?;
    if margin(&refined) < margin(&best) {
        best = refined;
    }
    Ok(best)
}

/// Tripartite PPT classification of a three-mode Gaussian state, from the
/// count of NPPT one-versus-rest splits. PPT alone cannot distinguish
/// bound-entangled from fully separable states (classes 4 and 5).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripartiteClass {
    /// All three splits NPPT: genuine tripartite entanglement (class 1).
    FullyInseparable,
    /// Exactly two splits NPPT (class 2).
    OneModeBiseparable,
    /// Exactly one split NPPT (class 3).
    TwoModeBiseparable,
    /// No NPPT split: bound entangled or fully separable (classes 4-5).
    BoundOrSeparable,
}

/// Classifies a three-mode state by running the NPPT test on every
/// one-versus-two split.
pub fn classify_tripartite(state: &GaussianState) -> Result<TripartiteClass> {
    if state.modes() != 3 {
        return Err(Error::Dimension(
            "tripartite classification needs 3 modes".into(),
        ));
    }
    let mut count = 0;
    for k in 0..3 {
        let rest: Vec<usize> = (0..3).filter(|&m| m != k).collect();
        let split = ModePartition::bipartition(vec![k], rest)?;
        if is_nppt(state, &split)? {
            count += 1;
        }
    }
    Ok(match count {
        3 => TripartiteClass::FullyInseparable,
        2 => TripartiteClass::OneModeBiseparable,
        1 => TripartiteClass::TwoModeBiseparable,
        _ => TripartiteClass::BoundOrSeparable,
    })
}

/// Choice of the distinguished modes (m, n) and the two disjoint index sets
/// grouping the remaining modes in the multipartite variance criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VlfPartition {
    /// First distinguished mode.
    pub m: usize,
    /// Second distinguished mode.
    pub n: usize,
    /// Modes grouped with `m`.
    pub set_i: Vec<usize>,
    /// Modes grouped with `n`.
    pub set_i_prime: Vec<usize>,
}

/// Outcome of the van Loock-Furusawa multipartite variance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlfOutcome {
    /// var(Σhᵢx̂ᵢ) + var(Σgᵢp̂ᵢ) in vacuum units.
    pub lhs: f64,
    /// The bound f(h, g) = |h_m g_m + Σ_{r∈I} h_r g_r| + |h_n g_n + Σ_{s∈I'} h_s g_s|.
    pub bound: f64,
    /// True iff lhs < bound: the state is not separable across the
    /// bipartition {m}∪I | {n}∪I'.
    pub violated: bool,
}

/// Van Loock-Furusawa separability test: states separable across the
/// bipartition {m}∪I | {n}∪I' satisfy
/// var(û) + var(v̂) ≥ f(h, g) with û = Σhᵢx̂ᵢ, v̂ = Σgᵢp̂ᵢ.
pub fn van_loock_furusawa(
    state: &GaussianState,
    h: &[f64],
    g: &[f64],
    partition: &VlfPartition,
) -> Result<VlfOutcome> {
    let n_modes = state.modes();
    if h.len() != n_modes || g.len() != n_modes {
        return Err(Error::Dimension(format!(
            "coefficient vectors must have length {n_modes}"
        )));
    }
    let mut seen = vec![false; n_modes];
    let mut mark = |i: usize| -> Result<()> {
        if i >= n_modes || seen[i] {
            return Err(Error::Addressing(format!(
                "inconsistent partition index {i}"
            )));
        }
        seen[i] = true;
        Ok(())
    };
    mark(partition.m)?;
    mark(partition.n)?;
    for &i in partition.set_i.iter().chain(&partition.set_i_prime) {
        mark(i)?;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Addressing(
            "partition does not cover all modes".into(),
        ));
    }
    let mut u = DVector::zeros(2 * n_modes);
    let mut v = DVector::zeros(2 * n_modes);
    for i in 0..n_modes {
        u[2 * i] = h[i];
        v[2 * i + 1] = g[i];
    }
    let lhs = state.variance_of_form(&u)? + state.variance_of_form(&v)?;
    let term_m: f64 =
        h[partition.m] * g[partition.m] + partition.set_i.iter().map(|&r| h[r] * g[r]).sum::<f64>();
    let term_n: f64 = h[partition.n] * g[partition.n]
        + partition
            .set_i_prime
            .iter()
            .map(|&s| h[s] * g[s])
            .sum::<f64>();
    let bound = term_m.abs() + term_n.abs();
    Ok(VlfOutcome {
        lhs,
        bound,
        violated: lhs < bound - 1e-12,
    })
}
