//! Bit-quadrature correlations of Gaussian and non-Gaussian two-mode states.
//!
//! States are represented exactly as polynomial×Gaussian Wigner functions
//! ([`WignerPoly`]): a sum of components, each a complex-coefficient
//! polynomial multiplying a normalized Gaussian kernel. Ladder operators act
//! on this representation in closed form ([`apply_ladder`]), so every finite
//! Fock superposition (Fock states, photonic Bell states, the photonic
//! qutrit) is built without truncation error. Photon-subtracted states,
//! whose Fock expansion reaches high occupation numbers, use a dedicated
//! number-diagonal representation ([`NumberDiagonalState`]) whose rotated
//! position marginal is available in closed form.
//!
//! On top of the representation the module provides the sign-binned
//! quadrature correlation ([`sign_binned_expectation`]), its supremum over local
//! quadrature angles ([`bit_correlation_q`]), the closed-form series for
//! photon-subtracted states ([`q_photon_subtracted_series`]), closed-form
//! negativities ([`negativity_closed_form`]) and a random scatter of
//! two-mode Gaussian states ([`random_gaussian_scatter`]).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement;
use crate::error::{Error, Result};
use crate::integrate::gauss_legendre;
use crate::phase_space::{GaussianState, ModePartition};
use crate::rng::seeded;

type C64 = Complex<f64>;

const PRUNE_TOL: f64 = 1e-300;

/// Sparse polynomial in the 2N phase-space variables (x₁, p₁, x₂, p₂, …)
/// with complex coefficients, closed under the operations required by the
/// ladder maps: addition, multiplication, differentiation and linear
/// variable substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Vec<u8>, C64>,
}

impl Poly {
    /// The zero polynomial in `vars` variables.
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    /// A constant polynomial.
    pub fn constant(vars: usize, c: C64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(&vec![0; vars], c);
        p
    }

    /// A single monomial.
    pub fn monomial(vars: usize, powers: &[u8], c: C64) -> Self {
        assert_eq!(powers.len(), vars);
        let mut p = Self::zero(vars);
        p.add_term(powers, c);
        p
    }

    /// Number of variables.
    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Iterator over (powers, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &C64)> {
        self.terms.iter()
    }

    fn add_term(&mut self, powers: &[u8], c: C64) {
        if c.norm() <= PRUNE_TOL {
            return;
        }
        let entry = self
            .terms
            .entry(powers.to_vec())
            .or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() <= PRUNE_TOL {
            self.terms.remove(powers);
        }
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k, *c);
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (k, c) in &self.terms {
            out.add_term(k, c * s);
        }
        out
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.vars, other.vars);
        let mut out = Poly::zero(self.vars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key: Vec<u8> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.add_term(&key, ca * cb);
            }
        }
        out
    }

    /// Formal derivative with respect to variable `var`.
    pub fn differentiate(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (k, c) in &self.terms {
            if k[var] == 0 {
                continue;
            }
            let mut key = k.clone();
            key[var] -= 1;
            out.add_term(&key, c * C64::new(k[var] as f64, 0.0));
        }
        out
    }

    /// Substitution ζ → Mζ: returns `Q` with `Q(ζ) = P(Mζ)`.
    pub fn substitute_linear(&self, m: &DMatrix<f64>) -> Poly {
        assert_eq!(m.nrows(), self.vars);
        assert_eq!(m.ncols(), self.vars);
        // Linear forms replacing each variable.
        let forms: Vec<Poly> = (0..self.vars)
            .map(|i| {
                let mut f = Poly::zero(self.vars);
                for j in 0..self.vars {
                    if m[(i, j)] != 0.0 {
                        let mut key = vec![0u8; self.vars];
                        key[j] = 1;
                        f.add_term(&key, C64::new(m[(i, j)], 0.0));
                    }
                }
                f
            })
            .collect();
        let mut out = Poly::zero(self.vars);
        for (k, c) in &self.terms {
            let mut term = Poly::constant(self.vars, *c);
            for (v, &e) in k.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&forms[v]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluates the polynomial at a real point.
    pub fn eval(&self, point: &[f64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let mut m = 1.0;
            for (v, &e) in k.iter().enumerate() {
                m *= point[v].powi(e as i32);
            }
            acc += c * m;
        }
        acc
    }

    /// Maximum exponent of variable `var` over all terms.
    pub fn max_degree(&self, var: usize) -> u8 {
        self.terms.keys().map(|k| k[var]).max().unwrap_or(0)
    }

    /// Largest imaginary part among coefficients (relative to the largest
    /// coefficient magnitude); zero for a real polynomial.
    pub fn imag_defect(&self) -> f64 {
        let scale = self
            .terms
            .values()
            .fold(0.0f64, |a, c| a.max(c.norm()))
            .max(1.0);
        self.terms.values().fold(0.0f64, |a, c| a.max(c.im.abs())) / scale
    }
}

/// `∫ ζ^powers e^{−ζᵀAζ − cᵀζ} d^{2N}ζ`, evaluated exactly by
/// differentiating the Gaussian generating function:
/// the integral equals `(−1)^{|powers|} π^N/√det A · ∂_b^powers
/// e^{(b+c)ᵀ(A⁻¹/4)(b+c)} |_{b=0}`.
pub fn gaussian_moment_integral(a: &DMatrix<f64>, c: &DVector<f64>, powers: &[u8]) -> Result<f64> {
    let n2 = a.nrows();
    if !a.is_square() || !n2.is_multiple_of(2) || c.len() != n2 || powers.len() != n2 {
        return Err(Error::Dimension(
            "moment integral needs a square 2N×2N matrix with matching vector lengths".into(),
        ));
    }
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Precondition("moment kernel must be positive definite".into()))?;
    let det = chol.determinant();
    let m = chol.inverse() / 4.0;
    // Differentiate Q·e^S with S = (b+c)ᵀM(b+c): the polynomial prefactor Q
    // picks up ∂Q + Q·∂S per derivative, with ∂_i S = 2(M(b+c))_i.
    let mut q = Poly::constant(n2, C64::new(1.0, 0.0));
    let mc = &m * c;
    let total: u32 = powers.iter().map(|&p| p as u32).sum();
    for (i, &p) in powers.iter().enumerate() {
        for _ in 0..p {
            let mut grad = Poly::constant(n2, C64::new(2.0 * mc[i], 0.0));
            for j in 0..n2 {
                if m[(i, j)] != 0.0 {
                    let mut key = vec![0u8; n2];
                    key[j] = 1;
                    grad.add_term(&key, C64::new(2.0 * m[(i, j)], 0.0));
                }
            }
            q = q.differentiate(i).add(&q.mul(&grad));
        }
    }
    let at_zero = q.eval(&vec![0.0; n2]).re;
    let sign = if total.is_multiple_of(2) { 1.0 } else { -1.0 };
    let exp = (c.dot(&(&m * c))).exp();
    Ok(sign * std::f64::consts::PI.powi((n2 / 2) as i32) / det.sqrt() * at_zero * exp)
}

/// One additive component of a phase-space quasi-distribution: a polynomial
/// times a normalized Gaussian kernel.
#[derive(Clone, Debug)]
pub struct WignerComponent {
    /// Polynomial prefactor (weights absorbed here).
    pub poly: Poly,
    /// Normalized Gaussian kernel (a physical Gaussian state).
    pub kernel: GaussianState,
}

/// Exact polynomial×Gaussian Wigner representation of an N-mode state:
/// `W(ζ) = Σ_i P_i(ζ)·G_i(ζ)` with each `G_i` a normalized Gaussian. The
/// representation is linear (mixtures are sums) and closed under the ladder
/// maps, symplectic transformations and moment integration.
#[derive(Clone, Debug)]
pub struct WignerPoly {
    modes: usize,
    components: Vec<WignerComponent>,
}

/// Flavours of two-photon Bell-like superpositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    /// √p|00⟩ + √(1−p)|11⟩
    PhiPlus,
    /// √p|00⟩ − √(1−p)|11⟩
    PhiMinus,
    /// √p|01⟩ + √(1−p)|10⟩
    PsiPlus,
    /// √p|01⟩ − √(1−p)|10⟩
    PsiMinus,
}

/// Ladder operator selector for [`apply_ladder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderOp {
    /// â
    Annihilate,
    /// â†
    Create,
}

/// Side of the density operator the ladder operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderSide {
    Left,
    Right,
}

impl WignerPoly {
    /// The N-mode vacuum.
    pub fn vacuum(modes: usize) -> Self {
        Self::from_gaussian(&GaussianState::vacuum(modes))
    }

    /// A Gaussian state as a trivial (constant-polynomial) representation.
    pub fn from_gaussian(state: &GaussianState) -> Self {
        Self {
            modes: state.modes(),
            components: vec![WignerComponent {
                poly: Poly::constant(2 * state.modes(), C64::new(1.0, 0.0)),
                kernel: state.clone(),
            }],
        }
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// The additive components.
    pub fn components(&self) -> &[WignerComponent] {
        &self.components
    }

    /// Pointwise value of the distribution at a phase-space point.
    pub fn value(&self, point: &[f64]) -> Result<f64> {
        if point.len() != 2 * self.modes {
            return Err(Error::Dimension(format!(
                "expected {} phase-space coordinates, got {}",
                2 * self.modes,
                point.len()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for comp in &self.components {
            let gamma = comp.kernel.covariance();
            let d = comp.kernel.displacement();
            let inv = gamma
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numeric("singular kernel covariance".into()))?;
            let delta = DVector::from_row_slice(point) - d;
            let q = delta.dot(&(&inv * &delta));
            let norm = std::f64::consts::PI.powi(self.modes as i32) * gamma.determinant().sqrt();
            acc += comp.poly.eval(point) * ((-q).exp() / norm);
        }
        Ok(acc.re)
    }

    /// Exact moment `∫ ζ^powers W(ζ) d^{2N}ζ` through the Gaussian
    /// generating-function identities.
    pub fn moment(&self, powers: &[u8]) -> Result<f64> {
        if powers.len() != 2 * self.modes {
            return Err(Error::Dimension(format!(
                "expected {} exponents, got {}",
                2 * self.modes,
                powers.len()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for comp in &self.components {
            let gamma = comp.kernel.covariance();
            let d = comp.kernel.displacement();
            let a = gamma
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numeric("singular kernel covariance".into()))?;
            let c = -2.0 * (&a * d);
            let norm = std::f64::consts::PI.powi(self.modes as i32) * gamma.determinant().sqrt();
            let pref = (-(d.dot(&(&a * d)))).exp() / norm;
            for (k, coef) in comp.poly.terms() {
                let mut total = k.clone();
                for (t, &p) in total.iter_mut().zip(powers) {
                    *t += p;
                }
                acc += coef * (pref * gaussian_moment_integral(&a, &c, &total)?);
            }
        }
        Ok(acc.re)
    }

    /// Total integral of the distribution (1 for a normalized state).
    pub fn integral(&self) -> Result<f64> {
        self.moment(&vec![0; 2 * self.modes])
    }

    /// Rescales the representation by `1/integral`.
    pub fn normalize(&mut self) -> Result<()> {
        let total = self.integral()?;
        if total.abs() < 1e-300 {
            return Err(Error::Numeric(
                "cannot normalize a zero distribution".into(),
            ));
        }
        for comp in &mut self.components {
            comp.poly = comp.poly.scale(C64::new(1.0 / total, 0.0));
        }
        Ok(())
    }

    /// Applies a symplectic transformation `S` to the representation:
    /// kernels map as γ → SγSᵀ, d → Sd and polynomials as P(ζ) → P(S⁻¹ζ).
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<WignerPoly> {
        if s.nrows() != 2 * self.modes || s.ncols() != 2 * self.modes {
            return Err(Error::Dimension("transformation size mismatch".into()));
        }
        let s_inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular transformation".into()))?;
        let mut components = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let gamma = s * comp.kernel.covariance() * s.transpose();
            let d = s * comp.kernel.displacement();
            components.push(WignerComponent {
                poly: comp.poly.substitute_linear(&s_inv),
                kernel: GaussianState::new(d, gamma)?,
            });
        }
        Ok(WignerPoly {
            modes: self.modes,
            components,
        })
    }

    /// Convex combination `w·self + (1−w)·other` (both normalized).
    pub fn mix(&self, other: &WignerPoly, w: f64) -> Result<WignerPoly> {
        if self.modes != other.modes {
            return Err(Error::Dimension(
                "cannot mix states of different mode count".into(),
            ));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Precondition(format!(
                "mixing weight must be in [0,1], got {w}"
            )));
        }
        let mut components: Vec<WignerComponent> = self
            .components
            .iter()
            .map(|c| WignerComponent {
                poly: c.poly.scale(C64::new(w, 0.0)),
                kernel: c.kernel.clone(),
            })
            .collect();
        components.extend(other.components.iter().map(|c| WignerComponent {
            poly: c.poly.scale(C64::new(1.0 - w, 0.0)),
            kernel: c.kernel.clone(),
        }));
        Ok(WignerPoly {
            modes: self.modes,
            components,
        })
    }

    /// Density operator of a finite two-mode Fock superposition
    /// `Σ ψ_(n,m) |n,m⟩`, built exactly by ladder maps on the vacuum.
    pub fn from_fock_amplitudes(amplitudes: &[((u8, u8), f64)]) -> Result<WignerPoly> {
        let norm2: f64 = amplitudes.iter().map(|(_, a)| a * a).sum();
        if amplitudes.is_empty() || (norm2 - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(
                "Fock amplitudes must be non-empty and normalized".into(),
            ));
        }
        let vac = WignerPoly::vacuum(2);
        let mut out = WignerPoly {
            modes: 2,
            components: Vec::new(),
        };
        for &((n1, m1), a1) in amplitudes {
            // Left factor (a†₁)^n (a†₂)^m acting on the vacuum projector.
            let mut left = vac.clone();
            for _ in 0..n1 {
                left = apply_ladder(&left, LadderOp::Create, LadderSide::Left, 0)?;
            }
            for _ in 0..m1 {
                left = apply_ladder(&left, LadderOp::Create, LadderSide::Left, 1)?;
            }
            for &((n2, m2), a2) in amplitudes {
                let mut term = left.clone();
                for _ in 0..n2 {
                    term = apply_ladder(&term, LadderOp::Annihilate, LadderSide::Right, 0)?;
                }
                for _ in 0..m2 {
                    term = apply_ladder(&term, LadderOp::Annihilate, LadderSide::Right, 1)?;
                }
                let scale = a1 * a2
                    / (factorial(n1) * factorial(m1) * factorial(n2) * factorial(m2)).sqrt();
                for comp in term.components {
                    out.components.push(WignerComponent {
                        poly: comp.poly.scale(C64::new(scale, 0.0)),
                        kernel: comp.kernel,
                    });
                }
            }
        }
        out.merge_components();
        Ok(out)
    }

    /// Single-mode Fock state |n⟩⟨n|.
    pub fn fock(n: u8) -> Result<WignerPoly> {
        let mut w = WignerPoly::vacuum(1);
        for _ in 0..n {
            w = apply_ladder(&w, LadderOp::Create, LadderSide::Left, 0)?;
        }
        for _ in 0..n {
            w = apply_ladder(&w, LadderOp::Annihilate, LadderSide::Right, 0)?;
        }
        let scale = 1.0 / factorial(n);
        for comp in &mut w.components {
            comp.poly = comp.poly.scale(C64::new(scale, 0.0));
        }
        Ok(w)
    }

    /// Photonic Bell-like state with weight `p` on the first branch.
    pub fn bell(kind: BellKind, p: f64) -> Result<WignerPoly> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Precondition(format!("p must be in [0,1], got {p}")));
        }
        let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
        let amps: Vec<((u8, u8), f64)> = match kind {
            BellKind::PhiPlus => vec![((0, 0), a), ((1, 1), b)],
            BellKind::PhiMinus => vec![((0, 0), a), ((1, 1), -b)],
            BellKind::PsiPlus => vec![((0, 1), a), ((1, 0), b)],
            BellKind::PsiMinus => vec![((0, 1), a), ((1, 0), -b)],
        };
        WignerPoly::from_fock_amplitudes(&amps)
    }

    /// Photonic qutrit |00⟩/√2 + (|02⟩ + |20⟩)/2: uncorrelated up to second
    /// moments yet entangled.
    pub fn photonic_qutrit() -> Result<WignerPoly> {
        WignerPoly::from_fock_amplitudes(&[
            ((0, 0), 1.0 / 2f64.sqrt()),
            ((0, 2), 0.5),
            ((2, 0), 0.5),
        ])
    }

    fn merge_components(&mut self) {
        // Components built from the vacuum share the same kernel; collapse
        // them into a single polynomial.
        if self.components.len() < 2 {
            return;
        }
        let first = self.components[0].kernel.clone();
        let same = self.components.iter().all(|c| {
            (c.kernel.covariance() - first.covariance()).amax() < 1e-14
                && (c.kernel.displacement() - first.displacement()).amax() < 1e-14
        });
        if same {
            let mut poly = Poly::zero(2 * self.modes);
            for c in &self.components {
                poly = poly.add(&c.poly);
            }
            self.components = vec![WignerComponent {
                poly,
                kernel: first,
            }];
        }
    }
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).map(|k| k as f64).product::<f64>().max(1.0)
}

fn binomial(n: u8, k: u8) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Applies a ladder operator to the representation: the operator action
/// `â ρ̂ ↔ (α + ½∂/∂α*)W` (and its three companions) becomes an exact
/// polynomial update against the Gaussian kernel, with `α = (x + ip)/√2`.
pub fn apply_ladder(
    w: &WignerPoly,
    op: LadderOp,
    side: LadderSide,
    mode: usize,
) -> Result<WignerPoly> {
    if mode >= w.modes {
        return Err(Error::Addressing(format!(
            "mode {mode} out of range for a {}-mode state",
            w.modes
        )));
    }
    let n2 = 2 * w.modes;
    let (ix, ip) = (2 * mode, 2 * mode + 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Multiplication part α or α*, and the derivative (∂x ± i∂p)/(2√2) with
    // its sign.
    let i = C64::new(0.0, 1.0);
    let (mul_p_coef, deriv_sign, deriv_i) = match (op, side) {
        // â ρ̂: α + ½∂α* = (x+ip)/√2 + (∂x + i∂p)/(2√2)
        (LadderOp::Annihilate, LadderSide::Left) => (i, 1.0, i),
        // ρ̂ â: α − ½∂α*
        (LadderOp::Annihilate, LadderSide::Right) => (i, -1.0, i),
        // â† ρ̂: α* − ½∂α = (x−ip)/√2 − (∂x − i∂p)/(2√2)
        (LadderOp::Create, LadderSide::Left) => (-i, -1.0, -i),
        // ρ̂ â†: α* + ½∂α
        (LadderOp::Create, LadderSide::Right) => (-i, 1.0, -i),
    };
    let mut components = Vec::with_capacity(w.components.len());
    for comp in &w.components {
        let gamma = comp.kernel.covariance();
        let d = comp.kernel.displacement();
        let a = gamma
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular kernel covariance".into()))?;
        let ad = &a * d;
        // Derivative of the kernel: ∂_j K = −2(A(ζ−d))_j K, a linear form.
        let kernel_grad = |j: usize| -> Poly {
            let mut g = Poly::constant(n2, C64::new(2.0 * ad[j], 0.0));
            for k in 0..n2 {
                if a[(j, k)] != 0.0 {
                    let mut key = vec![0u8; n2];
                    key[k] = 1;
                    g.add_term(&key, C64::new(-2.0 * a[(j, k)], 0.0));
                }
            }
            g
        };
        let total_deriv = |j: usize| -> Poly {
            comp.poly
                .differentiate(j)
                .add(&comp.poly.mul(&kernel_grad(j)))
        };
        let mut x_key = vec![0u8; n2];
        x_key[ix] = 1;
        let mut p_key = vec![0u8; n2];
        p_key[ip] = 1;
        let mul = Poly::monomial(n2, &x_key, C64::new(s, 0.0)).add(&Poly::monomial(
            n2,
            &p_key,
            mul_p_coef * s,
        ));
        let mut poly = comp.poly.mul(&mul);
        let half = C64::new(deriv_sign * 0.5 * s, 0.0);
        poly = poly.add(&total_deriv(ix).scale(half));
        poly = poly.add(&total_deriv(ip).scale(half * deriv_i));
        components.push(WignerComponent {
            poly,
            kernel: comp.kernel.clone(),
        });
    }
    Ok(WignerPoly {
        modes: w.modes,
        components,
    })
}

/// Pure number-diagonal two-mode state `Σ c_n |n,n⟩` (real coefficients).
/// Its rotated position marginal is the closed form
/// `|Σ c_n e^{−in(θ+φ)} ψ_n(x_A) ψ_n(x_B)|²` with ψ_n the oscillator
/// eigenfunctions, which keeps high-occupation states (photon-subtracted
/// states) tractable where the expanded Wigner polynomial would not be.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumberDiagonalState {
    coeffs: Vec<f64>,
}

impl NumberDiagonalState {
    /// Builds the state from Fock coefficients (normalized internally).
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
        if coeffs.is_empty() || !norm2.is_finite() || norm2 <= 0.0 {
            return Err(Error::Precondition(
                "number-diagonal coefficients must be non-empty with positive norm".into(),
            ));
        }
        let n = norm2.sqrt();
        Ok(Self {
            coeffs: coeffs.into_iter().map(|c| c / n).collect(),
        })
    }

    /// The normalized Fock coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Photon-subtracted two-mode state obtained by mixing each arm of a
    /// two-mode squeezed state (squeezing `r`) with vacuum at a beam
    /// splitter of transmittivity `T` and conditioning on one photon in each
    /// reflected arm: `c_n ∝ (n+1)(TΛ)ⁿ` with `Λ = tanh r`. The Fock series
    /// is truncated once the discarded weight falls below 1e-12.
    pub fn photon_subtracted(transmittivity: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittivity) {
            return Err(Error::Precondition(format!(
                "transmittivity must be in [0,1], got {transmittivity}"
            )));
        }
        if !(r >= 0.0) {
            return Err(Error::Precondition(format!(
                "squeezing must be ≥ 0, got {r}"
            )));
        }
        let x = transmittivity * r.tanh();
        let norm = (1.0 - x * x).powf(1.5) / (1.0 + x * x).sqrt();
        let mut coeffs = Vec::new();
        let mut tail_start = 0usize;
        let mut acc = 0.0;
        for n in 0..4000usize {
            let c = (n as f64 + 1.0) * x.powi(n as i32) * norm;
            coeffs.push(c);
            acc += c * c;
            if 1.0 - acc < 1e-12 {
                tail_start = n;
                break;
            }
        }
        if 1.0 - acc >= 1e-12 {
            return Err(Error::Numeric(
                "photon-subtracted Fock series did not converge".into(),
            ));
        }
        let _ = tail_start;
        Self::from_coeffs(coeffs)
    }
}

/// A two-mode state in whichever representation suits it, plus convex
/// mixtures (the sign-binned correlation is linear in the state).
#[derive(Clone, Debug)]
pub enum StateModel {
    /// Polynomial×Gaussian representation.
    Wigner(WignerPoly),
    /// Pure number-diagonal superposition.
    NumberDiagonal(NumberDiagonalState),
    /// Convex mixture of models (weights must sum to 1).
    Mixture(Vec<(f64, StateModel)>),
}

/// Mixes a state with the two-mode vacuum: `p·inner + (1−p)·|00⟩⟨00|`.
pub fn mixture_with_vacuum(p: f64, inner: StateModel) -> Result<StateModel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("p must be in [0,1], got {p}")));
    }
    Ok(StateModel::Mixture(vec![
        (p, inner),
        (1.0 - p, StateModel::Wigner(WignerPoly::vacuum(2))),
    ]))
}

/// Pair of local quadrature angles, reduced modulo π.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleChoice {
    pub theta: f64,
    pub phi: f64,
}

impl AngleChoice {
    /// Builds the pair, reducing both angles into [0, π).
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: theta.rem_euclid(std::f64::consts::PI),
            phi: phi.rem_euclid(std::f64::consts::PI),
        }
    }
}

const QUAD_NODES: usize = 64;

/// Pre-processed state ready for repeated angle evaluations.
enum CompiledPart {
    /// Polynomial×Gaussian component: marginalized symbolically per angle.
    Poly { poly: Poly, kernel: GaussianState },
    /// Number-diagonal terms: `E(θ,φ) = Σ coef·cos(diff·(θ+φ))`.
    Diag { terms: Vec<(u32, f64)> },
}

fn compile(state: &StateModel, weight: f64, out: &mut Vec<(f64, CompiledPart)>) -> Result<()> {
    match state {
        StateModel::Wigner(w) => {
            if w.modes() != 2 {
                return Err(Error::Dimension(format!(
                    "bit correlations need a two-mode state, got {} modes",
                    w.modes()
                )));
            }
            for comp in w.components() {
                out.push((
                    weight,
                    CompiledPart::Poly {
                        poly: comp.poly.clone(),
                        kernel: comp.kernel.clone(),
                    },
                ));
            }
        }
        StateModel::NumberDiagonal(nd) => {
            let k = sign_overlap_matrix(nd.coeffs.len());
            let mut terms = Vec::new();
            for n in 0..nd.coeffs.len() {
                for m in 0..n {
                    let coef = 2.0 * nd.coeffs[n] * nd.coeffs[m] * k[(n, m)] * k[(n, m)];
                    if coef.abs() > 1e-18 {
                        terms.push(((n - m) as u32, coef));
                    }
                }
            }
            out.push((weight, CompiledPart::Diag { terms }));
        }
        StateModel::Mixture(parts) => {
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            if (total - 1.0).abs() > 1e-9 || parts.iter().any(|(w, _)| *w < 0.0) {
                return Err(Error::Precondition(
                    "mixture weights must be non-negative and sum to 1".into(),
                ));
            }
            for (w, s) in parts {
                compile(s, weight * w, out)?;
            }
        }
    }
    Ok(())
}

/// `K_{nm} = ∫ ψ_n(x) ψ_m(x) sgn(x) dx` for oscillator eigenfunctions
/// (non-zero only for n+m odd), by quadrature on the half-line.
fn sign_overlap_matrix(size: usize) -> DMatrix<f64> {
    let cutoff = (2.0 * size as f64 + 1.0).sqrt() + 6.0;
    let nodes = 160 + 12 * size;
    let (gn, gw) = gauss_legendre(nodes);
    let mut k = DMatrix::zeros(size, size);
    for (t, w) in gn.iter().zip(&gw) {
        let x = 0.5 * cutoff * (t + 1.0);
        let jac = 0.5 * cutoff * w;
        // Normalized Hermite-function recurrence.
        let mut psi = vec![0.0f64; size];
        psi[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        if size > 1 {
            psi[1] = 2f64.sqrt() * x * psi[0];
        }
        for n in 1..size.saturating_sub(1) {
            psi[n + 1] = (2.0 / (n as f64 + 1.0)).sqrt() * x * psi[n]
                - (n as f64 / (n as f64 + 1.0)).sqrt() * psi[n - 1];
        }
        for n in 0..size {
            for m in 0..n {
                if (n + m) % 2 == 1 {
                    // sgn integral over the full line = twice the half-line.
                    k[(n, m)] += 2.0 * jac * psi[n] * psi[m];
                }
            }
        }
    }
    for n in 0..size {
        for m in 0..n {
            k[(m, n)] = k[(n, m)];
        }
    }
    k
}

/// Sign-binned correlation of one polynomial×Gaussian component at given
/// angles: the state is rotated (active view), the momentum variables are
/// eliminated symbolically through conditional Gaussian moments, and the
/// resulting polynomial×Gaussian position marginal is integrated over the
/// four quadrants with the sign pattern of `sgn(x_A x_B)`.
fn poly_sign_binned(
    poly: &Poly,
    kernel: &GaussianState,
    angles: AngleChoice,
    base_nodes: &(Vec<f64>, Vec<f64>),
) -> Result<f64> {
    let (ct, st) = (angles.theta.cos(), angles.theta.sin());
    let (cp, sp) = (angles.phi.cos(), angles.phi.sin());
    let mut s = DMatrix::zeros(4, 4);
    s[(0, 0)] = ct;
    s[(0, 1)] = st;
    s[(1, 0)] = -st;
    s[(1, 1)] = ct;
    s[(2, 2)] = cp;
    s[(2, 3)] = sp;
    s[(3, 2)] = -sp;
    s[(3, 3)] = cp;
    let gamma = &s * kernel.covariance() * s.transpose();
    let d = &s * kernel.displacement();
    let rotated = poly.substitute_linear(&s.transpose());

    // Statistical covariance, partitioned into position (0,2) and momentum
    // (1,3) blocks.
    let c = gamma / 2.0;
    let idx_x = [0usize, 2];
    let idx_p = [1usize, 3];
    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| c[(rows[i], cols[j])])
    };
    let cxx = pick(&idx_x, &idx_x);
    let cpp = pick(&idx_p, &idx_p);
    let cpx = pick(&idx_p, &idx_x);
    let cxx_inv = cxx
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular position covariance".into()))?;
    let reg = &cpx * &cxx_inv;
    let sigma_c = &cpp - &reg * cpx.transpose();
    let d_x = DVector::from_vec(vec![d[0], d[2]]);
    let d_p = DVector::from_vec(vec![d[1], d[3]]);

    // Conditional central moments of the momentum pair.
    let deg_p = rotated.max_degree(1).max(rotated.max_degree(3));
    let a_cond = sigma_c
        .clone()
        .try_inverse()
        .map(|m| m / 2.0)
        .ok_or_else(|| Error::Numeric("singular conditional covariance".into()))?;
    let z0 = gaussian_moment_integral(&a_cond, &DVector::zeros(2), &[0, 0])?;
    let mut cm = vec![vec![0.0f64; deg_p as usize + 1]; deg_p as usize + 1];
    for a in 0..=deg_p as usize {
        for b in 0..=deg_p as usize {
            if (a + b) % 2 == 0 {
                cm[a][b] =
                    gaussian_moment_integral(&a_cond, &DVector::zeros(2), &[a as u8, b as u8])?
                        / z0;
            }
        }
    }

    // Conditional means μ(x) = d_p + R(x − d_x) as two-variable affine
    // polynomials, plus their powers.
    let affine = |row: usize| -> Poly {
        let mut p = Poly::constant(
            2,
            C64::new(
                d_p[row] - reg[(row, 0)] * d_x[0] - reg[(row, 1)] * d_x[1],
                0.0,
            ),
        );
        p.add_term(&[1, 0], C64::new(reg[(row, 0)], 0.0));
        p.add_term(&[0, 1], C64::new(reg[(row, 1)], 0.0));
        p
    };
    let mu = [affine(0), affine(1)];
    let mut mu_pows: [Vec<Poly>; 2] = [
        vec![Poly::constant(2, C64::new(1.0, 0.0))],
        vec![Poly::constant(2, C64::new(1.0, 0.0))],
    ];
    for k in 0..2 {
        for _ in 0..deg_p {
            let last = mu_pows[k].last().unwrap().mul(&mu[k]);
            mu_pows[k].push(last);
        }
    }

    // Assemble the marginal polynomial M(x_A, x_B).
    let mut marginal = Poly::zero(2);
    for (key, coef) in rotated.terms() {
        let (i, j, k, l) = (key[0], key[1], key[2], key[3]);
        let mut pmom = Poly::zero(2);
        for a in 0..=j {
            for b in 0..=l {
                let central = cm[a as usize][b as usize];
                if central == 0.0 {
                    continue;
                }
                let w = binomial(j, a) * binomial(l, b) * central;
                let prod = mu_pows[0][(j - a) as usize].mul(&mu_pows[1][(l - b) as usize]);
                pmom = pmom.add(&prod.scale(C64::new(w, 0.0)));
            }
        }
        let mono = Poly::monomial(2, &[i, k], *coef);
        marginal = marginal.add(&mono.mul(&pmom));
    }

    // Quadrant integration against the Gaussian position marginal.
    let det = cxx.determinant();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
    let cutoff = 8.0 * cxx[(0, 0)].max(cxx[(1, 1)]).sqrt() + d_x.amax() + 1.0;
    let (gn, gw) = base_nodes;
    let mut acc = 0.0;
    for &sa in &[1.0f64, -1.0] {
        for &sb in &[1.0f64, -1.0] {
            let mut quad = 0.0;
            for (ta, wa) in gn.iter().zip(gw) {
                let xa = sa * 0.5 * cutoff * (ta + 1.0);
                for (tb, wb) in gn.iter().zip(gw) {
                    let xb = sb * 0.5 * cutoff * (tb + 1.0);
                    let qa = xa - d_x[0];
                    let qb = xb - d_x[1];
                    let q = cxx_inv[(0, 0)] * qa * qa
                        + 2.0 * cxx_inv[(0, 1)] * qa * qb
                        + cxx_inv[(1, 1)] * qb * qb;
                    quad += wa * wb * marginal.eval(&[xa, xb]).re * (-0.5 * q).exp();
                }
            }
            acc += sa * sb * quad * norm * 0.25 * cutoff * cutoff;
        }
    }
    Ok(acc)
}

fn e_value(
    parts: &[(f64, CompiledPart)],
    angles: AngleChoice,
    base_nodes: &(Vec<f64>, Vec<f64>),
) -> Result<f64> {
    let mut acc = 0.0;
    for (w, part) in parts {
        acc += w * match part {
            CompiledPart::Poly { poly, kernel } => {
                poly_sign_binned(poly, kernel, angles, base_nodes)?
            }
            CompiledPart::Diag { terms } => {
                let sum = angles.theta + angles.phi;
                terms
                    .iter()
                    .map(|&(diff, coef)| coef * (diff as f64 * sum).cos())
                    .sum()
            }
        };
    }
    Ok(acc)
}

/// Sign-binned quadrature correlation
/// `E(θ,φ) = ∫∫ marginal(x_A^θ, x_B^φ) sgn(x_A x_B)` of a two-mode state.
pub fn sign_binned_expectation(state: &StateModel, angles: AngleChoice) -> Result<f64> {
    let mut parts = Vec::new();
    compile(state, 1.0, &mut parts)?;
    let nodes = gauss_legendre(QUAD_NODES);
    e_value(&parts, angles, &nodes)
}

/// Checks the fairness condition: both single-mode marginals must be
/// unbiased between positive and negative outcomes, which for the states
/// handled here reduces to vanishing first moments.
pub fn check_fairness(state: &StateModel) -> Result<()> {
    match state {
        StateModel::Wigner(w) => {
            for v in 0..2 * w.modes() {
                let mut powers = vec![0u8; 2 * w.modes()];
                powers[v] = 1;
                let m = w.moment(&powers)?;
                if m.abs() > 1e-9 {
                    return Err(Error::Precondition(format!(
                        "fairness violated: first moment of variable {v} is {m:.3e}"
                    )));
                }
            }
            Ok(())
        }
        // Number-diagonal states have even marginals.
        StateModel::NumberDiagonal(_) => Ok(()),
        StateModel::Mixture(parts) => {
            for (_, s) in parts {
                check_fairness(s)?;
            }
            Ok(())
        }
    }
}

/// Upper bound on the oscillation frequency of E(θ, φ) in either angle:
/// a monomial of total degree d per mode contributes trig degree d under
/// rotation, the Gaussian kernel itself contributes degree 2, and a
/// number-diagonal term |n⟩⟨m| oscillates at frequency n − m.
fn angle_frequency_bound(parts: &[(f64, CompiledPart)]) -> usize {
    let mut freq = 2usize;
    for (_, part) in parts {
        match part {
            CompiledPart::Poly { poly, .. } => {
                for mode in 0..poly.vars() / 2 {
                    let d = poly
                        .terms()
                        .map(|(k, _)| (k[2 * mode] + k[2 * mode + 1]) as usize)
                        .max()
                        .unwrap_or(0);
                    freq = freq.max(d);
                }
            }
            CompiledPart::Diag { terms } => {
                freq = freq.max(terms.iter().map(|&(d, _)| d as usize).max().unwrap_or(0));
            }
        }
    }
    freq
}

/// Supremum of |E(θ,φ)| over the local quadrature angles: a coarse grid
/// over [0, π)² (evaluated in parallel, resolution adapted to the state's
/// trig frequency content) followed by a pattern-search local refinement to
/// 1e-6. Returns the optimum and the optimizing angles.
pub fn bit_correlation_q(state: &StateModel) -> Result<(f64, AngleChoice)> {
    check_fairness(state)?;
    let mut parts = Vec::new();
    compile(state, 1.0, &mut parts)?;
    let nodes = gauss_legendre(QUAD_NODES);
    // At least four grid samples per oscillation plus a safety margin keeps
    // the coarse maximum inside the global basin for the local refinement.
    let grid = (4 * angle_frequency_bound(&parts) + 12).clamp(16, 64);
    let step = std::f64::consts::PI / grid as f64;
    let cells: Vec<(usize, usize)> = (0..grid)
        .flat_map(|i| (0..grid).map(move |j| (i, j)))
        .collect();
    let evals: Vec<Result<(f64, AngleChoice)>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let angles = AngleChoice::new(i as f64 * step, j as f64 * step);
            Ok((e_value(&parts, angles, &nodes)?.abs(), angles))
        })
        .collect();
    let mut best = (0.0f64, AngleChoice::new(0.0, 0.0));
    for e in evals {
        let (v, a) = e?;
        if v > best.0 {
            best = (v, a);
        }
    }
    // Pattern search with shrinking step.
    let mut h = step;
    let (mut q, mut angles) = best;
    while h > 1e-7 {
        let mut improved = false;
        for (dt, dp) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let cand = AngleChoice::new(angles.theta + dt, angles.phi + dp);
            let v = e_value(&parts, cand, &nodes)?.abs();
            if v > q + 1e-12 {
                q = v;
                angles = cand;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok((q, angles))
}

/// Closed-form bit correlation of a centered two-mode Gaussian state:
/// `(2/π) arcsin ρ*`, where ρ* is the largest correlation coefficient over
/// all pairs of local quadrature directions, `ρ* = σ_max(A^{−1/2} C B^{−1/2})`
/// for the covariance blocks `[[A, C], [Cᵀ, B]]`. On a state in standard
/// form this reduces to `max(|c_x|, |c_p|)/√(λ_a λ_b)`; working directly on
/// the blocks avoids the cancellation the standard-form extraction suffers
/// at `|c_x| = |c_p|`.
pub fn q_gaussian_closed_form(state: &GaussianState) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::Dimension(format!(
            "bit correlation needs a two-mode state, got {} modes",
            state.modes()
        )));
    }
    let g = state.covariance();
    let a = g.fixed_view::<2, 2>(0, 0).into_owned();
    let b = g.fixed_view::<2, 2>(2, 2).into_owned();
    let c = g.fixed_view::<2, 2>(0, 2).into_owned();
    let k = inv_sqrt_spd_2x2(&a)? * c * inv_sqrt_spd_2x2(&b)?;
    // Largest singular value of the 2×2 matrix K.
    let fro2 = k.iter().map(|v| v * v).sum::<f64>();
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    let rho = (0.5 * (fro2 + disc.sqrt())).sqrt();
    if rho >= 1.0 {
        if rho > 1.0 + 1e-9 {
            return Err(Error::Unphysical(
                "correlation exceeds the marginal bound".into(),
            ));
        }
        return Ok(1.0);
    }
    Ok((2.0 / std::f64::consts::PI) * rho.asin())
}

/// Inverse principal square root of a symmetric positive definite 2×2
/// matrix, in closed form: with s = √det M and t = √(tr M + 2s),
/// `√M = (M + sI)/t` and `det √M = s`.
fn inv_sqrt_spd_2x2(m: &nalgebra::Matrix2<f64>) -> Result<nalgebra::Matrix2<f64>> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let tr = m[(0, 0)] + m[(1, 1)];
    if det <= 0.0 || tr <= 0.0 {
        return Err(Error::Unphysical(
            "marginal covariance block is not positive definite".into(),
        ));
    }
    let s = det.sqrt();
    let t = (tr + 2.0 * s).sqrt();
    Ok(nalgebra::Matrix2::new(m[(1, 1)] + s, -m[(0, 1)], -m[(1, 0)], m[(0, 0)] + s) / (t * s))
}

/// Natural logarithm of |Γ(z)| for real z away from the poles
/// (Lanczos approximation plus the reflection formula).
fn ln_abs_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // |Γ(z)| = π / (|sin(πz)| |Γ(1−z)|)
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * z).sin().abs().ln()
            - ln_abs_gamma(1.0 - z);
    }
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    let z = z - 1.0;
    let mut x = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Closed-form series for the bit correlation of a photon-subtracted state:
/// `Q = Σ_{n>m} 2^{m+n+3} π [ℱ(m,n) − ℱ(n,m)]² c_m c_n / ((m−n)² m! n!)`
/// with `ℱ(m,n) = [Γ(−m/2) Γ((1−n)/2)]⁻¹`, evaluated in log-space. Fails if
/// `n_max` leaves a tail above 1e-10.
pub fn q_photon_subtracted_series(transmittivity: f64, r: f64, n_max: usize) -> Result<f64> {
    let state = NumberDiagonalState::photon_subtracted(transmittivity, r)?;
    let x = transmittivity * r.tanh();
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_c = |n: usize| -> f64 {
        ((n as f64 + 1.0) * state_norm(transmittivity, r)).ln() + n as f64 * x.ln()
    };
    fn state_norm(t: f64, r: f64) -> f64 {
        let x = t * r.tanh();
        (1.0 - x * x).powf(1.5) / (1.0 + x * x).sqrt()
    }
    // ℱ(m,n) is non-zero only when m is odd and n is even (the reciprocal
    // gammas vanish at their poles); for each opposite-parity pair exactly
    // one of ℱ(m,n), ℱ(n,m) survives.
    let ln_f = |m: usize, n: usize| -> Option<f64> {
        if m % 2 == 1 && n.is_multiple_of(2) {
            Some(-ln_abs_gamma(-(m as f64) / 2.0) - ln_abs_gamma((1.0 - n as f64) / 2.0))
        } else {
            None
        }
    };
    let ln2 = 2f64.ln();
    let lnpi = std::f64::consts::PI.ln();
    let mut q = 0.0;
    let mut band = 0.0;
    let top = n_max.min(state.coeffs().len().saturating_sub(1));
    for n in 1..=top {
        for m in 0..n {
            let lf = match ln_f(m, n).or_else(|| ln_f(n, m)) {
                Some(v) => v,
                None => continue,
            };
            let ln_term = (m + n + 3) as f64 * ln2 + lnpi + 2.0 * lf + ln_c(m) + ln_c(n)
                - 2.0 * ((n - m) as f64).ln()
                - ln_abs_gamma(m as f64 + 1.0)
                - ln_abs_gamma(n as f64 + 1.0);
            let term = ln_term.exp();
            q += term;
            if n == top {
                band += term;
            }
        }
    }
    if top < state.coeffs().len() - 1 && band > 1e-10 {
        return Err(Error::Precondition(format!(
            "n_max = {n_max} leaves a series tail of about {band:.2e} > 1e-10"
        )));
    }
    Ok(q)
}

/// Families with printed closed-form negativities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NegativityFamily {
    /// Bell-like photonic superposition with branch weight p.
    Bell { p: f64 },
    /// Photon-subtracted state (beam-splitter transmittivity, squeezing).
    PhotonSubtracted { transmittivity: f64, r: f64 },
    /// Two-mode squeezed state mixed with the vacuum with weight p.
    MixtureWithVacuum { p: f64, r: f64 },
    /// Pure two-mode squeezed state.
    TwoModeSqueezed { r: f64 },
}

/// Printed closed-form negativities: `√(p(1−p))` for Bell states,
/// `2/(1−TΛ) − 1/(1+T²Λ²) − 1` for photon-subtracted states,
/// `p(e^{2r}−1)/2` for vacuum mixtures and `(e^{2r}−1)/2` for the two-mode
/// squeezed state itself.
pub fn negativity_closed_form(family: &NegativityFamily) -> Result<f64> {
    match *family {
        NegativityFamily::Bell { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Precondition(format!("p must be in [0,1], got {p}")));
            }
            Ok((p * (1.0 - p)).sqrt())
        }
        NegativityFamily::PhotonSubtracted { transmittivity, r } => {
            if !(0.0..=1.0).contains(&transmittivity) || !(r >= 0.0) {
                return Err(Error::Precondition(
                    "photon-subtracted parameters out of range".into(),
                ));
            }
            let x = transmittivity * r.tanh();
            Ok(2.0 / (1.0 - x) - 1.0 / (1.0 + x * x) - 1.0)
        }
        NegativityFamily::MixtureWithVacuum { p, r } => {
            if !(0.0..=1.0).contains(&p) || !(r >= 0.0) {
                return Err(Error::Precondition(
                    "mixture parameters out of range".into(),
                ));
            }
            Ok(p * ((2.0 * r).exp() - 1.0) / 2.0)
        }
        NegativityFamily::TwoModeSqueezed { r } => {
            if !(r >= 0.0) {
                return Err(Error::Precondition(format!(
                    "squeezing must be ≥ 0, got {r}"
                )));
            }
            Ok(((2.0 * r).exp() - 1.0) / 2.0)
        }
    }
}

/// Printed closed form for the bit correlation of a two-mode squeezed state
/// mixed with the vacuum: `(2p/π)·arctan(N_m[1/(2N_m+p) + 1/p])`.
pub fn q_mixture_with_vacuum(p: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(r >= 0.0) {
        return Err(Error::Precondition(
            "mixture parameters out of range".into(),
        ));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let nm = negativity_closed_form(&NegativityFamily::MixtureWithVacuum { p, r })?;
    Ok((2.0 * p / std::f64::consts::PI) * (nm * (1.0 / (2.0 * nm + p) + 1.0 / p)).atan())
}

/// One sampled random two-mode Gaussian state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    /// Negativity N.
    pub negativity: f64,
    /// Normalized negativity 2N/(2N+1).
    pub scaled_negativity: f64,
    /// Bit correlation Q (closed form, optimum at unrotated positions).
    pub q: f64,
    /// Global purity.
    pub purity: f64,
}

/// Samples random physical two-mode Gaussian states in standard form with
/// marginals up to `lambda_max` and returns their negativity, bit
/// correlation and purity.
pub fn random_gaussian_scatter(
    count: usize,
    lambda_max: f64,
    seed: u64,
) -> Result<Vec<ScatterPoint>> {
    if !(lambda_max > 1.0) {
        return Err(Error::Precondition(format!(
            "lambda_max must exceed 1, got {lambda_max}"
        )));
    }
    let mut rng = seeded(seed);
    let split = ModePartition::bipartition(vec![0], vec![1])?;
    let mut out = Vec::with_capacity(count);
    let mut guard = 0usize;
    while out.len() < count {
        guard += 1;
        if guard > 2000 * count.max(1) {
            return Err(Error::Numeric("rejection sampling stalled".into()));
        }
        let la = 1.0 + rng.gen::<f64>() * (lambda_max - 1.0);
        let lb = 1.0 + rng.gen::<f64>() * (lambda_max - 1.0);
        let cmax = (la * lb).sqrt();
        let cx = rng.gen::<f64>() * cmax;
        let cp = (2.0 * rng.gen::<f64>() - 1.0) * cx;
        let state = GaussianState::standard_form_state(la, lb, cx, cp);
        if !state.check_physicality(1e-9).unwrap_or(false) {
            continue;
        }
        let n = entanglement::negativity(&state, &split)?;
        let q = q_gaussian_closed_form(&state)?;
        out.push(ScatterPoint {
            negativity: n,
            scaled_negativity: 2.0 * n / (2.0 * n + 1.0),
            q,
            purity: state.purity()?,
        });
    }
    Ok(out)
}
