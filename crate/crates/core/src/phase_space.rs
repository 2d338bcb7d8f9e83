//! Gaussian state representation and the state-level calculus.
//!
//! A Gaussian state of N modes is fully described by its displacement vector
//! d (first moments, length 2N) and covariance matrix γ (symmetrized second
//! moments, 2N×2N), normalized so that the vacuum has γ = I. Quadratures are
//! ordered (x₁, p₁, x₂, p₂, …). Under this convention the statistical
//! covariance of quadrature outcomes is γ/2 (vacuum variance 1/2 per
//! quadrature), the constant used by all Monte-Carlo samplers in this crate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default tolerance on symplectic eigenvalues for physicality checks.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// The symplectic form J of an N-mode phase space: block-diagonal copies of
/// `[[0, 1], [-1, 0]]`. Antisymmetric, squares to −I, determinant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    mode_count: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    /// Builds the symplectic form for `mode_count` modes.
    pub fn new(mode_count: usize) -> Self {
        assert!(mode_count > 0, "mode count must be positive");
        Self {
            mode_count,
            matrix: linalg::symplectic_form_matrix(mode_count),
        }
    }

    /// Number of modes N.
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// The 2N×2N matrix of the form.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// A disjoint grouping of mode indices (0-based), used to address
/// reductions, partial transposes and measurements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModePartition {
    subsets: Vec<Vec<usize>>,
}

impl ModePartition {
    /// A partition with the given subsets. Fails if any index repeats.
    pub fn new(subsets: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &subsets {
            for &i in s {
                if !seen.insert(i) {
                    return Err(Error::Addressing(format!(
                        "mode index {i} appears in more than one subset"
                    )));
                }
            }
        }
        Ok(Self { subsets })
    }

    /// A single-group partition.
    pub fn single(modes: Vec<usize>) -> Self {
        Self::new(vec![modes]).expect("a single subset cannot overlap itself")
    }

    /// A two-group partition (A | B).
    pub fn bipartition(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        Self::new(vec![a, b])
    }

    /// The subsets of the partition.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// All member indices, in subset order.
    pub fn flattened(&self) -> Vec<usize> {
        self.subsets.iter().flatten().copied().collect()
    }

    /// Checks that every index addresses a mode of an N-mode state.
    pub fn validate(&self, modes: usize) -> Result<()> {
        for &i in self.subsets.iter().flatten() {
            if i >= modes {
                return Err(Error::Addressing(format!(
                    "mode index {i} out of range for a {modes}-mode state"
                )));
            }
        }
        Ok(())
    }
}

/// Serialized layout of [`GaussianState`]: row-major covariance matrix,
/// full-precision decimal floats.
#[derive(Serialize, Deserialize)]
struct GaussianStateRepr {
    modes: usize,
    d: Vec<f64>,
    gamma: Vec<Vec<f64>>,
}

/// An N-mode Gaussian state: displacement vector and covariance matrix in
/// vacuum-normalized quadrature units.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    d: DVector<f64>,
    gamma: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from its displacement and covariance matrix.
    ///
    /// Checks dimensions and symmetry; physicality is *not* enforced here
    /// (call [`GaussianState::check_physicality`]) so that intermediate
    /// matrices can be staged.
    pub fn new(d: DVector<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() || !gamma.nrows().is_multiple_of(2) || gamma.nrows() == 0
        {
            return Err(Error::Dimension(format!(
                "covariance matrix must be square with even positive dimension, got {}x{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        if d.len() != gamma.nrows() {
            return Err(Error::Dimension(format!(
                "displacement length {} does not match covariance dimension {}",
                d.len(),
                gamma.nrows()
            )));
        }
        if !linalg::is_symmetric(&gamma, 1e-9 * (1.0 + gamma.amax())) {
            return Err(Error::Numeric("covariance matrix is not symmetric".into()));
        }
        Ok(Self {
            modes: gamma.nrows() / 2,
            d,
            gamma,
        })
    }

    /// The N-mode vacuum: d = 0, γ = I.
    pub fn vacuum(modes: usize) -> Self {
        Self {
            modes,
            d: DVector::zeros(2 * modes),
            gamma: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Single-mode thermal state with mean photon number M: γ = (2M+1)·I.
    pub fn thermal(mean_photons: f64) -> Self {
        let nu = 2.0 * mean_photons + 1.0;
        Self {
            modes: 1,
            d: DVector::zeros(2),
            gamma: DMatrix::identity(2, 2) * nu,
        }
    }

    /// Single-mode coherent state: γ = I, d = (q₀, p₀).
    pub fn coherent(q0: f64, p0: f64) -> Self {
        Self {
            modes: 1,
            d: DVector::from_vec(vec![q0, p0]),
            gamma: DMatrix::identity(2, 2),
        }
    }

    /// Single-mode squeezed vacuum: γ = diag(e^{−2r}, e^{2r}).
    pub fn squeezed(r: f64) -> Self {
        Self {
            modes: 1,
            d: DVector::zeros(2),
            gamma: DMatrix::from_diagonal(&DVector::from_vec(vec![
                (-2.0 * r).exp(),
                (2.0 * r).exp(),
            ])),
        }
    }

    /// Two-mode squeezed vacuum with parameter r: diagonal blocks
    /// cosh(2r)·I, off-diagonal blocks diag(sinh 2r, −sinh 2r).
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        let gamma = DMatrix::from_row_slice(
            4,
            4,
            &[
                c, 0.0, s, 0.0, //
                0.0, c, 0.0, -s, //
                s, 0.0, c, 0.0, //
                0.0, -s, 0.0, c,
            ],
        );
        Self {
            modes: 2,
            d: DVector::zeros(4),
            gamma,
        }
    }

    /// Two-mode state in standard form: diag blocks λ_a·I, λ_b·I and
    /// off-diagonal diag(c_x, c_p).
    pub fn standard_form_state(lambda_a: f64, lambda_b: f64, c_x: f64, c_p: f64) -> Self {
        let gamma = DMatrix::from_row_slice(
            4,
            4,
            &[
                lambda_a, 0.0, c_x, 0.0, //
                0.0, lambda_a, 0.0, c_p, //
                c_x, 0.0, lambda_b, 0.0, //
                0.0, c_p, 0.0, lambda_b,
            ],
        );
        Self {
            modes: 2,
            d: DVector::zeros(4),
            gamma,
        }
    }

    /// Number of modes N.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Displacement vector (length 2N).
    pub fn displacement(&self) -> &DVector<f64> {
        &self.d
    }

    /// Covariance matrix (2N×2N).
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    /// Replaces the displacement vector.
    pub fn with_displacement(mut self, d: DVector<f64>) -> Result<Self> {
        if d.len() != 2 * self.modes {
            return Err(Error::Dimension(format!(
                "displacement length {} does not match {} modes",
                d.len(),
                self.modes
            )));
        }
        self.d = d;
        Ok(self)
    }

    /// True iff the state is physical: all symplectic eigenvalues ≥ 1 − tol.
    pub fn check_physicality(&self, tol: f64) -> Result<bool> {
        let mu = self.symplectic_spectrum()?;
        Ok(mu.iter().all(|&m| m >= 1.0 - tol))
    }

    /// Symplectic spectrum {μᵢ} of the covariance matrix, descending.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        linalg::symplectic_spectrum(&self.gamma)
    }

    /// Purity 1/√(det γ) ∈ (0, 1].
    pub fn purity(&self) -> Result<f64> {
        let det = self.gamma.determinant();
        if det < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical(format!(
                "covariance determinant {det:.6e} below 1: purity would exceed 1"
            )));
        }
        Ok(1.0 / det.sqrt())
    }

    /// True iff the state is pure within `tol` (purity ≥ 1 − tol).
    pub fn is_pure(&self, tol: f64) -> bool {
        matches!(self.purity(), Ok(p) if p >= 1.0 - tol)
    }

    /// Variance of the linear quadrature form ℓᵀR in the state: ℓᵀ(γ/2)ℓ.
    ///
    /// With γ_vac = I this gives the vacuum variance 1/2 per quadrature;
    /// all criteria bounds in this crate use the same units.
    pub fn variance_of_form(&self, ell: &DVector<f64>) -> Result<f64> {
        if ell.len() != 2 * self.modes {
            return Err(Error::Dimension(format!(
                "form length {} does not match {} modes",
                ell.len(),
                self.modes
            )));
        }
        Ok(0.5 * (ell.transpose() * &self.gamma * ell)[(0, 0)])
    }

    /// Keeps the modes listed in `keep` (all subsets, in order), tracing out
    /// the rest.
    pub fn reduce(&self, keep: &ModePartition) -> Result<GaussianState> {
        keep.validate(self.modes)?;
        let kept = keep.flattened();
        if kept.is_empty() {
            return Err(Error::Precondition(
                "cannot reduce onto an empty mode set".into(),
            ));
        }
        let idx: Vec<usize> = kept.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let n = idx.len();
        let mut gamma = DMatrix::zeros(n, n);
        let mut d = DVector::zeros(n);
        for (r, &ir) in idx.iter().enumerate() {
            d[r] = self.d[ir];
            for (c, &ic) in idx.iter().enumerate() {
                gamma[(r, c)] = self.gamma[(ir, ic)];
            }
        }
        GaussianState::new(d, gamma)
    }

    /// Tensor product: block-diagonal covariance, concatenated displacement.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let n1 = 2 * self.modes;
        let n2 = 2 * other.modes;
        let mut gamma = DMatrix::zeros(n1 + n2, n1 + n2);
        gamma.view_mut((0, 0), (n1, n1)).copy_from(&self.gamma);
        gamma.view_mut((n1, n1), (n2, n2)).copy_from(&other.gamma);
        let mut d = DVector::zeros(n1 + n2);
        d.rows_mut(0, n1).copy_from(&self.d);
        d.rows_mut(n1, n2).copy_from(&other.d);
        GaussianState {
            modes: self.modes + other.modes,
            d,
            gamma,
        }
    }

    /// Serializes to the canonical JSON layout
    /// `{modes, d: [...], gamma: [[...]]}` (row-major).
    pub fn to_json(&self) -> String {
        let repr = GaussianStateRepr {
            modes: self.modes,
            d: self.d.iter().copied().collect(),
            gamma: (0..2 * self.modes)
                .map(|r| (0..2 * self.modes).map(|c| self.gamma[(r, c)]).collect())
                .collect(),
        };
        serde_json::to_string(&repr).expect("serialization of plain floats cannot fail")
    }

    /// Parses the canonical JSON layout produced by [`GaussianState::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: GaussianStateRepr = serde_json::from_str(text)
            .map_err(|e| Error::Precondition(format!("invalid state JSON: {e}")))?;
        let n = 2 * repr.modes;
        if repr.gamma.len() != n || repr.gamma.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!(
                "gamma must be {n}x{n} for {} modes",
                repr.modes
            )));
        }
        let flat: Vec<f64> = repr.gamma.into_iter().flatten().collect();
        GaussianState::new(
            DVector::from_vec(repr.d),
            DMatrix::from_row_slice(n, n, &flat),
        )
    }
}

/// Fidelity between two Gaussian states, valid when at least one is pure:
/// `[det((γ₁+γ₂)/2)]^{−1/2} · exp(−δᵀ(γ₁+γ₂)⁻¹δ)` with δ = d₂ − d₁.
pub fn fidelity(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    if s1.modes != s2.modes {
        return Err(Error::Dimension(format!(
            "fidelity of states with {} and {} modes",
            s1.modes, s2.modes
        )));
    }
    if !s1.is_pure(PHYSICALITY_TOL) && !s2.is_pure(PHYSICALITY_TOL) {
        return Err(Error::Unsupported(
            "fidelity of two mixed Gaussian states is out of scope; one argument must be pure"
                .into(),
        ));
    }
    let sum = &s1.gamma + &s2.gamma;
    let half_sum = &sum * 0.5;
    let det = half_sum.determinant();
    if det <= 0.0 {
        return Err(Error::Numeric("singular covariance sum in fidelity".into()));
    }
    let delta = &s2.d - &s1.d;
    let solve = sum
        .clone()
        .lu()
        .solve(&delta)
        .ok_or_else(|| Error::Numeric("singular covariance sum in fidelity".into()))?;
    let quad = (delta.transpose() * solve)[(0, 0)];
    Ok((1.0 / det.sqrt()) * (-quad).exp())
}

/// Standard-form parameters (λ_a, λ_b, c_x, c_p) of a two-mode Gaussian
/// state: the canonical covariance matrix reachable by local symplectics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardFormParams {
    /// First-mode diagonal parameter λ_a ≥ 1.
    pub lambda_a: f64,
    /// Second-mode diagonal parameter λ_b ≥ 1.
    pub lambda_b: f64,
    /// Position-position correlation, c_x ≥ |c_p|.
    pub c_x: f64,
    /// Momentum-momentum correlation.
    pub c_p: f64,
}

impl StandardFormParams {
    /// Global purity 1/√((λ_aλ_b − c_x²)(λ_aλ_b − c_p²)) of the form.
    pub fn purity(&self) -> f64 {
        let m = self.lambda_a * self.lambda_b;
        1.0 / ((m - self.c_x * self.c_x) * (m - self.c_p * self.c_p)).sqrt()
    }

    /// The local-symplectic invariant Δ = λ_a² + λ_b² + 2c_xc_p.
    pub fn seralian(&self) -> f64 {
        self.lambda_a * self.lambda_a + self.lambda_b * self.lambda_b + 2.0 * self.c_x * self.c_p
    }
}

/// Extracts the standard-form parameters of a two-mode state from its four
/// local-symplectic invariants (det γ_A, det γ_B, det C, det γ).
///
/// λ_a = √det γ_A, λ_b = √det γ_B, and (c_x², c_p²) are the roots of
/// t² − s·t + (det C)² with s = (λ_aλ_b)² + (det C)² − det γ, all divided by
/// λ_aλ_b; the sign of c_p follows det C and the convention c_x ≥ |c_p| ≥ 0.
pub fn standard_form(state: &GaussianState) -> Result<StandardFormParams> {
    if state.modes != 2 {
        return Err(Error::Dimension(format!(
            "standard form requires a two-mode state, got {} modes",
            state.modes
        )));
    }
    if !state.check_physicality(1e-6)? {
        return Err(Error::Unphysical(
            "standard form of an unphysical state".into(),
        ));
    }
    let g = &state.gamma;
    let det_a = g.view((0, 0), (2, 2)).determinant();
    let det_b = g.view((2, 2), (2, 2)).determinant();
    let det_c = g.view((0, 2), (2, 2)).determinant();
    let det_g = g.determinant();
    let lambda_a = det_a.sqrt();
    let lambda_b = det_b.sqrt();
    let m = lambda_a * lambda_b;
    if m <= 0.0 {
        return Err(Error::Numeric("degenerate local covariance block".into()));
    }
    // det γ = (m − c_x²)(m − c_p²), det C = c_x·c_p. With u = c_x², v = c_p²:
    // u + v = (m² + detC² − det γ)/m and u·v = detC².
    let s = (m * m + det_c * det_c - det_g) / m;
    let disc = (s * s - 4.0 * det_c * det_c).max(0.0).sqrt();
    let u = 0.5 * (s + disc);
    let v = 0.5 * (s - disc).max(0.0);
    let c_x = u.max(0.0).sqrt();
    let c_p = det_c.signum() * v.sqrt();
    // Tie-breaking: if |c_x| = |c_p|, order so c_x ≥ 0 (already holds).
    Ok(StandardFormParams {
        lambda_a,
        lambda_b,
        c_x,
        c_p,
    })
}

/// Symplectic spectrum of the reduction of a *pure* state onto the smaller
/// side of the given bipartition; the Gaussian analogue of the Schmidt
/// coefficients.
pub fn schmidt_spectrum(state: &GaussianState, partition: &ModePartition) -> Result<Vec<f64>> {
    if !state.is_pure(1e-6) {
        return Err(Error::Precondition(
            "Schmidt spectrum is defined for pure states only".into(),
        ));
    }
    partition.validate(state.modes)?;
    if partition.subsets().len() != 2 {
        return Err(Error::Addressing(
            "Schmidt spectrum needs a two-subset partition".into(),
        ));
    }
    let smaller = partition
        .subsets()
        .iter()
        .min_by_key(|s| s.len())
        .expect("two subsets are present");
    let reduced = state.reduce(&ModePartition::single(smaller.clone()))?;
    reduced.symplectic_spectrum()
}

/// Purifies an N-mode state into a pure 2N-mode state whose reduction onto
/// the first N modes equals the input:
/// γ_pure = [[γ, C], [Cᵀ, θγθ]] with C = J·√(−(Jγ)² − I)·θ and
/// θ = diag(1, −1) per mode.
pub fn purification(mixed: &GaussianState) -> Result<GaussianState> {
    let n = mixed.modes;
    let two_n = 2 * n;
    if !mixed.check_physicality(1e-7)? {
        return Err(Error::Unphysical(
            "cannot purify an unphysical state".into(),
        ));
    }
    let j = linalg::symplectic_form_matrix(n);
    let jg = &j * &mixed.gamma;
    // −(Jγ)² − I is symmetric positive semidefinite for physical γ.
    let inner = -(&jg * &jg) - DMatrix::<f64>::identity(two_n, two_n);
    // Symmetrize against roundoff before taking the square root.
    let inner = (&inner + inner.transpose()) * 0.5;
    let root = linalg::sqrt_psd(&inner, 1e-10 * (1.0 + inner.amax()))?;
    let theta = theta_matrix(n);
    let c = &j * root * &theta;
    let mut gamma = DMatrix::zeros(2 * two_n, 2 * two_n);
    gamma
        .view_mut((0, 0), (two_n, two_n))
        .copy_from(&mixed.gamma);
    gamma.view_mut((0, two_n), (two_n, two_n)).copy_from(&c);
    gamma
        .view_mut((two_n, 0), (two_n, two_n))
        .copy_from(&c.transpose());
    gamma
        .view_mut((two_n, two_n), (two_n, two_n))
        .copy_from(&(&theta * &mixed.gamma * &theta));
    // Roundoff symmetrization.
    let gamma = (&gamma + gamma.transpose()) * 0.5;
    let mut d = DVector::zeros(2 * two_n);
    d.rows_mut(0, two_n).copy_from(&mixed.d);
    GaussianState::new(d, gamma)
}

/// The mode-wise reflection θ = diag(1, −1)^{⊕N} (momentum sign flip),
/// i.e. the phase-space action of transposition.
pub fn theta_matrix(modes: usize) -> DMatrix<f64> {
    let mut t = DMatrix::identity(2 * modes, 2 * modes);
    for k in 0..modes {
        t[(2 * k + 1, 2 * k + 1)] = -1.0;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_is_physical_and_pure() {
        let v = GaussianState::vacuum(1);
        assert!(v.check_physicality(PHYSICALITY_TOL).unwrap());
        assert_abs_diff_eq!(v.purity().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn below_vacuum_diagonal_state_is_unphysical() {
        // diag(0.5, 0.5) has symplectic eigenvalue 0.5 < 1.
        let gamma = DMatrix::identity(2, 2) * 0.5;
        let s = GaussianState::new(DVector::zeros(2), gamma).unwrap();
        assert!(!s.check_physicality(PHYSICALITY_TOL).unwrap());
    }

    #[test]
    fn thermal_purity() {
        let t = GaussianState::thermal(1.0); // γ = 3I
        assert_abs_diff_eq!(t.purity().unwrap(), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn tms_is_pure_with_unit_spectrum() {
        let s = GaussianState::two_mode_squeezed(0.5);
        let mu = s.symplectic_spectrum().unwrap();
        for m in mu {
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-10);
        }
        assert!(s.is_pure(1e-10));
    }

    #[test]
    fn fidelity_identities() {
        let v = GaussianState::vacuum(1);
        assert_abs_diff_eq!(fidelity(&v, &v).unwrap(), 1.0, epsilon = 1e-14);

        // Coherent vs vacuum: exp(−(q₀²+p₀²)/2).
        let c = GaussianState::coherent(0.7, -0.4);
        let expected = (-(0.7f64 * 0.7 + 0.4 * 0.4) / 2.0).exp();
        assert_abs_diff_eq!(fidelity(&c, &v).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(fidelity(&v, &c).unwrap(), expected, epsilon = 1e-14);

        // Squeezed vs vacuum: 1/cosh(r).
        let r = 0.5;
        let s = GaussianState::squeezed(r);
        assert_abs_diff_eq!(fidelity(&s, &v).unwrap(), 1.0 / r.cosh(), epsilon = 1e-12);

        // Two mixed arguments are rejected.
        let t = GaussianState::thermal(1.0);
        assert!(fidelity(&t, &t).is_err());
    }

    #[test]
    fn reduce_and_tensor_roundtrip() {
        let t = GaussianState::thermal(1.0);
        let s = GaussianState::squeezed(0.3);
        let joint = t.tensor(&s);
        assert_eq!(joint.modes(), 2);
        let back_t = joint.reduce(&ModePartition::single(vec![0])).unwrap();
        let back_s = joint.reduce(&ModePartition::single(vec![1])).unwrap();
        assert_abs_diff_eq!((back_t.covariance() - t.covariance()).amax(), 0.0);
        assert_abs_diff_eq!((back_s.covariance() - s.covariance()).amax(), 0.0);
    }

    #[test]
    fn tms_reduction_is_thermal_like() {
        let r = 0.4;
        let s = GaussianState::two_mode_squeezed(r);
        let a = s.reduce(&ModePartition::single(vec![0])).unwrap();
        let expected = (2.0 * r).cosh();
        assert_abs_diff_eq!(a.covariance()[(0, 0)], expected, epsilon = 1e-14);
        assert_abs_diff_eq!(a.covariance()[(1, 1)], expected, epsilon = 1e-14);
        assert_abs_diff_eq!(a.covariance()[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn standard_form_of_tms() {
        let r = 0.35;
        let p = standard_form(&GaussianState::two_mode_squeezed(r)).unwrap();
        assert_abs_diff_eq!(p.lambda_a, (2.0 * r).cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.lambda_b, (2.0 * r).cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.c_x, (2.0 * r).sinh(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.c_p, -(2.0 * r).sinh(), epsilon = 1e-12);
    }

    #[test]
    fn standard_form_of_product_vacuum() {
        let p = standard_form(&GaussianState::vacuum(2)).unwrap();
        assert_abs_diff_eq!(p.lambda_a, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.lambda_b, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.c_x, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.c_p, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn schmidt_spectrum_of_tms() {
        let r = 0.6;
        let s = GaussianState::two_mode_squeezed(r);
        let part = ModePartition::bipartition(vec![0], vec![1]).unwrap();
        let mu = schmidt_spectrum(&s, &part).unwrap();
        assert_eq!(mu.len(), 1);
        assert_abs_diff_eq!(mu[0], (2.0 * r).cosh(), epsilon = 1e-10);
    }

    #[test]
    fn purification_of_thermal_state() {
        let nu = 5.0; // M = 2
        let t = GaussianState::thermal(2.0);
        let pure = purification(&t).unwrap();
        assert_abs_diff_eq!(pure.purity().unwrap(), 1.0, epsilon = 1e-9);
        let back = pure.reduce(&ModePartition::single(vec![0])).unwrap();
        assert_abs_diff_eq!(
            (back.covariance() - t.covariance()).amax(),
            0.0,
            epsilon = 1e-10
        );
        let part = ModePartition::bipartition(vec![0], vec![1]).unwrap();
        let mu = schmidt_spectrum(&pure, &part).unwrap();
        assert_abs_diff_eq!(mu[0], nu, epsilon = 1e-9);
    }

    #[test]
    fn purification_of_vacuum_is_uncorrelated() {
        let pure = purification(&GaussianState::vacuum(1)).unwrap();
        let c = pure.covariance().view((0, 2), (2, 2)).amax();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let s = GaussianState::two_mode_squeezed(0.25)
            .with_displacement(DVector::from_vec(vec![0.1, -0.2, 0.3, 0.0]))
            .unwrap();
        let text = s.to_json();
        let back = GaussianState::from_json(&text).unwrap();
        assert_eq!(back.modes(), 2);
        assert_abs_diff_eq!((back.covariance() - s.covariance()).amax(), 0.0);
        assert_abs_diff_eq!((back.displacement() - s.displacement()).amax(), 0.0);
    }
}
