//! Symplectic generators, Gaussian channels, and homodyne measurement
//! updates.
//!
//! A Gaussian unitary acts on a state as γ' = SγSᵀ, d' = Sd + s with S a
//! symplectic matrix and s an optional phase-space translation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::phase_space::{GaussianState, ModePartition};

/// Relative eigenvalue cutoff for Moore-Penrose pseudo-inverses of the
/// (rank-deficient by construction) measured-quadrature blocks.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

/// A Gaussian unitary in phase space: a symplectic matrix plus an optional
/// translation. Construction validates SᵀJS = J to 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
    translation: DVector<f64>,
}

impl SymplecticTransform {
    /// Builds a transform from an explicit matrix and translation,
    /// validating the symplectic condition.
    pub fn new(matrix: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "symplectic matrix must be square with even dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if translation.len() != matrix.nrows() {
            return Err(Error::Dimension(
                "translation length does not match matrix dimension".into(),
            ));
        }
        let defect = linalg::symplectic_defect(&matrix);
        if defect > 1e-12 * (1.0 + matrix.amax().powi(2)) {
            return Err(Error::Numeric(format!(
                "matrix is not symplectic (max |SᵀJS − J| = {defect:.3e})"
            )));
        }
        Ok(Self {
            matrix,
            translation,
        })
    }

    /// The identity transform on `modes` modes.
    pub fn identity(modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
            translation: DVector::zeros(2 * modes),
        }
    }

    /// Single-mode phase shift: S_θ = [[cos θ, sin θ], [−sin θ, cos θ]].
    pub fn phase_shift(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
            translation: DVector::zeros(2),
        }
    }

    /// Single-mode squeezer: S_r = diag(e^{−r}, e^{r}).
    pub fn squeeze(r: f64) -> Self {
        Self {
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![(-r).exp(), r.exp()])),
            translation: DVector::zeros(2),
        }
    }

    /// Phase-space displacement by (q₀, p₀, …) on `translation.len()/2` modes.
    pub fn displacement(translation: DVector<f64>) -> Self {
        let n = translation.len();
        Self {
            matrix: DMatrix::identity(n, n),
            translation,
        }
    }

    /// Two-mode beam splitter with reflectivity R = sin²(θ/2).
    pub fn beam_splitter(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self {
            matrix: DMatrix::from_row_slice(
                4,
                4,
                &[
                    c, 0.0, s, 0.0, //
                    0.0, c, 0.0, s, //
                    -s, 0.0, c, 0.0, //
                    0.0, -s, 0.0, c,
                ],
            ),
            translation: DVector::zeros(4),
        }
    }

    /// Two-mode squeezer with parameter r.
    pub fn two_mode_squeeze(r: f64) -> Self {
        let ch = r.cosh();
        let sh = r.sinh();
        Self {
            matrix: DMatrix::from_row_slice(
                4,
                4,
                &[
                    ch, 0.0, sh, 0.0, //
                    0.0, ch, 0.0, -sh, //
                    sh, 0.0, ch, 0.0, //
                    0.0, -sh, 0.0, ch,
                ],
            ),
            translation: DVector::zeros(4),
        }
    }

    /// The three-mode "tritter" (double beam splitter) that turns three
    /// independently squeezed inputs into a fully symmetric entangled state.
    pub fn tritter() -> Self {
        let a = 1.0 / 3.0f64.sqrt();
        let b = (2.0f64 / 3.0).sqrt();
        let c = -1.0 / 6.0f64.sqrt();
        let d = 1.0 / 2.0f64.sqrt();
        let z = 0.0;
        Self {
            matrix: DMatrix::from_row_slice(
                6,
                6,
                &[
                    a, z, b, z, z, z, //
                    z, a, z, b, z, z, //
                    a, z, c, z, d, z, //
                    z, a, z, c, z, d, //
                    a, z, c, z, -d, z, //
                    z, a, z, c, z, -d,
                ],
            ),
            translation: DVector::zeros(6),
        }
    }

    /// The symplectic matrix S.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The translation s.
    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    /// Number of modes the transform acts on.
    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Composition: `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SymplecticTransform) -> Result<SymplecticTransform> {
        if self.modes() != other.modes() {
            return Err(Error::Dimension(
                "composing transforms of different sizes".into(),
            ));
        }
        Ok(SymplecticTransform {
            matrix: &self.matrix * &other.matrix,
            translation: &self.matrix * &other.translation + &self.translation,
        })
    }

    /// Embeds a transform acting on `targets` (mode indices of an N-mode
    /// system, in the order the transform expects) into the full system.
    pub fn embed(&self, total_modes: usize, targets: &[usize]) -> Result<SymplecticTransform> {
        if targets.len() != self.modes() {
            return Err(Error::Dimension(format!(
                "transform acts on {} modes but {} targets given",
                self.modes(),
                targets.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &t in targets {
            if t >= total_modes || !seen.insert(t) {
                return Err(Error::Addressing(format!("bad target mode index {t}")));
            }
        }
        let n = 2 * total_modes;
        let mut m = DMatrix::identity(n, n);
        let mut s = DVector::zeros(n);
        for (bi, &ti) in targets.iter().enumerate() {
            s[2 * ti] = self.translation[2 * bi];
            s[2 * ti + 1] = self.translation[2 * bi + 1];
            for (bj, &tj) in targets.iter().enumerate() {
                for di in 0..2 {
                    for dj in 0..2 {
                        m[(2 * ti + di, 2 * tj + dj)] = self.matrix[(2 * bi + di, 2 * bj + dj)];
                    }
                }
            }
        }
        SymplecticTransform::new(m, s)
    }

    /// Applies the transform: γ' = SγSᵀ, d' = Sd + s.
    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if self.modes() != state.modes() {
            return Err(Error::Dimension(format!(
                "transform on {} modes applied to {}-mode state",
                self.modes(),
                state.modes()
            )));
        }
        let gamma = &self.matrix * state.covariance() * self.matrix.transpose();
        let gamma = (&gamma + gamma.transpose()) * 0.5;
        let d = &self.matrix * state.displacement() + &self.translation;
        GaussianState::new(d, gamma)
    }
}

/// Result of a homodyne measurement: the recorded angles and outcomes plus
/// the post-measurement state of the unmeasured modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomodyneOutcome {
    /// Indices of the measured modes.
    pub measured_modes: Vec<usize>,
    /// Quadrature angle per measured mode (0 = position).
    pub angles: Vec<f64>,
    /// Measured values, one per measured mode.
    pub outcomes: Vec<f64>,
    /// Post-measurement Gaussian state of the kept modes.
    #[serde(with = "state_as_json")]
    pub post_state: GaussianState,
}

mod state_as_json {
    //! Serializes the embedded state through its canonical JSON layout.
    use super::GaussianState;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(state: &GaussianState, ser: S) -> Result<S::Ok, S::Error> {
        let value: serde_json::Value =
            serde_json::from_str(&state.to_json()).expect("canonical layout is valid JSON");
        serde::Serialize::serialize(&value, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<GaussianState, D::Error> {
        let value = serde_json::Value::deserialize(de)?;
        GaussianState::from_json(&value.to_string()).map_err(D::Error::custom)
    }
}

/// Measures one quadrature (angle per mode, 0 = position) on each mode in
/// `modes`, returning outcomes and the updated state of the rest.
///
/// The angle is handled by pre-applying a phase rotation of −angle to each
/// measured mode, so only the x-quadrature measurement is primitive. If
/// `outcomes` is `None` they are sampled from the Gaussian marginal of the
/// measured quadratures (covariance γ_xx/2). The post-measurement covariance
/// is outcome-independent:
/// γ'_A = γ_A − C (Xγ_BX)⁺ Cᵀ, d'_A = d_A + C (Xγ_BX)⁺ X(v − d_B),
/// with X the x-projector on the measured block and ⁺ the pseudo-inverse.
pub fn homodyne<R: Rng>(
    state: &GaussianState,
    modes: &ModePartition,
    angles: &[f64],
    outcomes: Option<&[f64]>,
    rng: &mut R,
) -> Result<HomodyneOutcome> {
    modes.validate(state.modes())?;
    let measured = modes.flattened();
    if measured.is_empty() {
        return Err(Error::Precondition("empty measured mode set".into()));
    }
    if measured.len() == state.modes() {
        return Err(Error::Precondition(
            "at least one mode must remain unmeasured".into(),
        ));
    }
    if angles.len() != measured.len() {
        return Err(Error::Dimension(format!(
            "{} angles for {} measured modes",
            angles.len(),
            measured.len()
        )));
    }
    if let Some(v) = outcomes {
        if v.len() != measured.len() {
            return Err(Error::Dimension(format!(
                "{} outcomes for {} measured modes",
                v.len(),
                measured.len()
            )));
        }
    }

    // Pre-rotate measured modes so the requested quadrature becomes x.
    let mut rotated = state.clone();
    for (&m, &angle) in measured.iter().zip(angles) {
        if angle != 0.0 {
            let rot = SymplecticTransform::phase_shift(-angle).embed(state.modes(), &[m])?;
            rotated = rot.apply(&rotated)?;
        }
    }

    let kept: Vec<usize> = (0..state.modes())
        .filter(|m| !measured.contains(m))
        .collect();
    let idx_a: Vec<usize> = kept.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let idx_b: Vec<usize> = measured.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let g = rotated.covariance();
    let d = rotated.displacement();
    let na = idx_a.len();
    let nb = idx_b.len();
    let mut gamma_a = DMatrix::zeros(na, na);
    let mut gamma_b = DMatrix::zeros(nb, nb);
    let mut cross = DMatrix::zeros(na, nb);
    let mut d_a = DVector::zeros(na);
    let mut d_b = DVector::zeros(nb);
    for (r, &ir) in idx_a.iter().enumerate() {
        d_a[r] = d[ir];
        for (c, &ic) in idx_a.iter().enumerate() {
            gamma_a[(r, c)] = g[(ir, ic)];
        }
        for (c, &ic) in idx_b.iter().enumerate() {
            cross[(r, c)] = g[(ir, ic)];
        }
    }
    for (r, &ir) in idx_b.iter().enumerate() {
        d_b[r] = d[ir];
        for (c, &ic) in idx_b.iter().enumerate() {
            gamma_b[(r, c)] = g[(ir, ic)];
        }
    }

    // X projects onto the x components of the measured block.
    let mut x_proj = DMatrix::zeros(nb, nb);
    for k in 0..measured.len() {
        x_proj[(2 * k, 2 * k)] = 1.0;
    }
    let xgx = &x_proj * &gamma_b * &x_proj;
    let mp = linalg::pseudo_inverse_sym(&xgx, PSEUDO_INVERSE_CUTOFF)?;

    // Outcomes: provided, or sampled from the x-marginal N(d_x, γ_xx/2).
    let values: Vec<f64> = match outcomes {
        Some(v) => v.to_vec(),
        None => {
            let mut x_gamma = DMatrix::zeros(nb, nb);
            // Marginal over x quadratures only; p entries left at a dummy
            // positive value so the sampler stays well-posed, then ignored.
            for r in 0..nb {
                for c in 0..nb {
                    x_gamma[(r, c)] = xgx[(r, c)];
                }
            }
            for k in 0..measured.len() {
                if x_gamma[(2 * k + 1, 2 * k + 1)] == 0.0 {
                    x_gamma[(2 * k + 1, 2 * k + 1)] = 1.0;
                }
            }
            let marginal = GaussianState::new(d_b.clone(), x_gamma)?;
            let sampler = crate::rng::GaussianSampler::new(&marginal)?;
            let point = sampler.sample(rng);
            (0..measured.len()).map(|k| point[2 * k]).collect()
        }
    };

    // Deviation of the measured x's from their means, embedded at x slots.
    let mut dev = DVector::zeros(nb);
    for (k, &v) in values.iter().enumerate() {
        dev[2 * k] = v - d_b[2 * k];
    }
    let update = &cross * &mp;
    let gamma_post = &gamma_a - &update * &xgx * update.transpose();
    let gamma_post = (&gamma_post + gamma_post.transpose()) * 0.5;
    let d_post = &d_a + update * dev;

    Ok(HomodyneOutcome {
        measured_modes: measured,
        angles: angles.to_vec(),
        outcomes: values,
        post_state: GaussianState::new(d_post, gamma_post)?,
    })
}

/// A Gaussian channel in its state dual (Choi) form: the covariance matrix
/// Γ and displacement Δ of the channel's characteristic state over
/// (output ⊕ input) modes.
#[derive(Debug, Clone)]
pub struct GaussianChannel {
    gamma: DMatrix<f64>,
    delta: DVector<f64>,
    input_modes: usize,
    output_modes: usize,
}

impl GaussianChannel {
    /// Builds a channel from its Choi state (output modes first).
    pub fn new(choi: &GaussianState, output_modes: usize) -> Result<Self> {
        if output_modes == 0 || output_modes >= choi.modes() {
            return Err(Error::Dimension(format!(
                "output modes {} incompatible with a {}-mode characteristic state",
                output_modes,
                choi.modes()
            )));
        }
        if !choi.check_physicality(1e-6)? {
            return Err(Error::Unphysical(
                "channel characteristic state is unphysical".into(),
            ));
        }
        Ok(Self {
            gamma: choi.covariance().clone(),
            delta: choi.displacement().clone(),
            input_modes: choi.modes() - output_modes,
            output_modes,
        })
    }

    /// An approximation of the identity channel: the Choi state of the
    /// identity is the infinitely entangled two-mode squeezed state; `r`
    /// controls the truncation (r ≈ 10 leaves errors below 1e-6).
    pub fn identity_approx(r: f64) -> Self {
        let choi = GaussianState::two_mode_squeezed(r);
        Self {
            gamma: choi.covariance().clone(),
            delta: DVector::zeros(4),
            input_modes: 1,
            output_modes: 1,
        }
    }

    /// Number of input modes N_B.
    pub fn input_modes(&self) -> usize {
        self.input_modes
    }

    /// Number of output modes N_A.
    pub fn output_modes(&self) -> usize {
        self.output_modes
    }

    /// Applies the channel through the state-operation isomorphism:
    /// γ' = Γ̃_A − Γ̃_AB(Γ̃_B + γ)⁻¹Γ̃_ABᵀ,
    /// d' = Δ_A + Γ̃_AB(Γ̃_B + γ)⁻¹(Δ_B + d),
    /// where Γ̃ = (I ⊕ θ)Γ(I ⊕ θ) flips input-mode momenta.
    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.modes() != self.input_modes {
            return Err(Error::Dimension(format!(
                "channel expects {} input modes, state has {}",
                self.input_modes,
                state.modes()
            )));
        }
        let na = 2 * self.output_modes;
        let nb = 2 * self.input_modes;
        let theta = crate::phase_space::theta_matrix(self.input_modes);
        let mut flip = DMatrix::identity(na + nb, na + nb);
        flip.view_mut((na, na), (nb, nb)).copy_from(&theta);
        let gt = &flip * &self.gamma * &flip;
        let gt_a = gt.view((0, 0), (na, na)).into_owned();
        let gt_ab = gt.view((0, na), (na, nb)).into_owned();
        let gt_b = gt.view((na, na), (nb, nb)).into_owned();
        let denom = &gt_b + state.covariance();
        let denom_sym = (&denom + denom.transpose()) * 0.5;
        let inv = linalg::pseudo_inverse_sym(&denom_sym, PSEUDO_INVERSE_CUTOFF)
            .map_err(|e| Error::Numeric(format!("singular channel denominator: {e}")))?;
        let gamma_out = &gt_a - &gt_ab * &inv * gt_ab.transpose();
        let gamma_out = (&gamma_out + gamma_out.transpose()) * 0.5;
        let delta_a = self.delta.rows(0, na).into_owned();
        let delta_b = self.delta.rows(na, nb).into_owned();
        let d_out = delta_a + &gt_ab * &inv * (delta_b + state.displacement());
        GaussianState::new(d_out, gamma_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::PHYSICALITY_TOL;
    use approx::assert_abs_diff_eq;

    fn vacuum_rng() -> impl Rng {
        crate::rng::seeded(1)
    }

    #[test]
    fn generators_are_symplectic() {
        for t in [
            SymplecticTransform::phase_shift(0.7),
            SymplecticTransform::squeeze(0.5),
            SymplecticTransform::beam_splitter(1.1),
            SymplecticTransform::two_mode_squeeze(0.9),
            SymplecticTransform::tritter(),
        ] {
            assert!(linalg::symplectic_defect(t.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn passive_generators_are_orthogonal() {
        for t in [
            SymplecticTransform::phase_shift(0.3),
            SymplecticTransform::beam_splitter(0.8),
            SymplecticTransform::tritter(),
        ] {
            let m = t.matrix();
            let gram = m.transpose() * m;
            let id = DMatrix::<f64>::identity(m.nrows(), m.nrows());
            assert_abs_diff_eq!((gram - id).amax(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn squeeze_zero_is_identity() {
        let t = SymplecticTransform::squeeze(0.0);
        let id = DMatrix::<f64>::identity(2, 2);
        assert_abs_diff_eq!((t.matrix() - id).amax(), 0.0);
    }

    #[test]
    fn two_mode_squeeze_on_vacuum_gives_tms_state() {
        let r = 0.8;
        let out = SymplecticTransform::two_mode_squeeze(r)
            .apply(&GaussianState::vacuum(2))
            .unwrap();
        let expected = GaussianState::two_mode_squeezed(r);
        assert_abs_diff_eq!(
            (out.covariance() - expected.covariance()).amax(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn displacement_produces_coherent_state() {
        let s = SymplecticTransform::displacement(DVector::from_vec(vec![1.5, -0.5]));
        let out = s.apply(&GaussianState::vacuum(1)).unwrap();
        assert_abs_diff_eq!(out.displacement()[0], 1.5);
        assert_abs_diff_eq!(out.displacement()[1], -0.5);
        assert_abs_diff_eq!(
            (out.covariance() - DMatrix::<f64>::identity(2, 2)).amax(),
            0.0
        );
    }

    #[test]
    fn squeeze_on_vacuum() {
        let r = 0.4;
        let out = SymplecticTransform::squeeze(r)
            .apply(&GaussianState::vacuum(1))
            .unwrap();
        assert_abs_diff_eq!(out.covariance()[(0, 0)], (-2.0 * r).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(out.covariance()[(1, 1)], (2.0 * r).exp(), epsilon = 1e-14);
    }

    #[test]
    fn embed_acts_on_selected_modes() {
        let sq = SymplecticTransform::squeeze(0.3).embed(3, &[1]).unwrap();
        let out = sq.apply(&GaussianState::vacuum(3)).unwrap();
        assert_abs_diff_eq!(out.covariance()[(2, 2)], (-0.6f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(out.covariance()[(0, 0)], 1.0);
        assert_abs_diff_eq!(out.covariance()[(4, 4)], 1.0);
    }

    #[test]
    fn homodyne_on_uncorrelated_modes_leaves_rest_unchanged() {
        let state = GaussianState::vacuum(2);
        let mut rng = vacuum_rng();
        let out = homodyne(
            &state,
            &ModePartition::single(vec![1]),
            &[0.0],
            None,
            &mut rng,
        )
        .unwrap();
        let post = &out.post_state;
        assert_eq!(post.modes(), 1);
        assert_abs_diff_eq!(
            (post.covariance() - DMatrix::<f64>::identity(2, 2)).amax(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(post.displacement().amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn homodyne_on_tms_squeezes_the_partner() {
        let r = 0.6;
        let state = GaussianState::two_mode_squeezed(r);
        let mut rng = vacuum_rng();
        let out = homodyne(
            &state,
            &ModePartition::single(vec![1]),
            &[0.0],
            Some(&[0.37]),
            &mut rng,
        )
        .unwrap();
        let g = out.post_state.covariance();
        let c2r = (2.0 * r).cosh();
        assert_abs_diff_eq!(g[(0, 0)], 1.0 / c2r, epsilon = 1e-10);
        assert_abs_diff_eq!(g[(1, 1)], c2r, epsilon = 1e-10);
        assert!(out.post_state.is_pure(1e-9));
    }

    #[test]
    fn homodyne_post_cm_is_outcome_independent() {
        let state = GaussianState::two_mode_squeezed(0.5);
        let mut rng = vacuum_rng();
        let reference = homodyne(
            &state,
            &ModePartition::single(vec![0]),
            &[0.4],
            Some(&[0.0]),
            &mut rng,
        )
        .unwrap();
        for k in 0..10 {
            let out = homodyne(
                &state,
                &ModePartition::single(vec![0]),
                &[0.4],
                Some(&[(k as f64) - 4.5]),
                &mut rng,
            )
            .unwrap();
            assert_abs_diff_eq!(
                (out.post_state.covariance() - reference.post_state.covariance()).amax(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn repeated_homodyne_is_idempotent_on_the_cm() {
        // Measure x on mode 1 of a three-mode entangled state twice: the
        // second measurement must not change the covariance of mode 2.
        let tms = GaussianState::two_mode_squeezed(0.7).tensor(&GaussianState::vacuum(1));
        let bs = SymplecticTransform::beam_splitter(0.9)
            .embed(3, &[1, 2])
            .unwrap();
        let state = bs.apply(&tms).unwrap();
        let mut rng = vacuum_rng();
        let first = homodyne(
            &state,
            &ModePartition::single(vec![1]),
            &[0.0],
            Some(&[0.2]),
            &mut rng,
        )
        .unwrap();
        // Re-append a mode in the same marginal state as the measured one
        // is not meaningful; instead check directly that measuring x twice
        // in a row on a fresh copy gives the same kept-mode covariance.
        let again = homodyne(
            &state,
            &ModePartition::single(vec![1]),
            &[0.0],
            Some(&[-1.3]),
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(
            (first.post_state.covariance() - again.post_state.covariance()).amax(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn homodyne_preserves_purity_of_pure_global_states() {
        let state = GaussianState::two_mode_squeezed(0.9);
        let mut rng = vacuum_rng();
        let out = homodyne(
            &state,
            &ModePartition::single(vec![1]),
            &[1.1],
            None,
            &mut rng,
        )
        .unwrap();
        assert_abs_diff_eq!(out.post_state.purity().unwrap(), 1.0, epsilon = 1e-9);
        assert!(out.post_state.check_physicality(PHYSICALITY_TOL).unwrap());
    }

    #[test]
    fn identity_channel_approximation() {
        let ch = GaussianChannel::identity_approx(10.0);
        let input = GaussianState::coherent(0.3, -0.8);
        let out = ch.apply(&input).unwrap();
        assert!((out.covariance() - input.covariance()).amax() < 1e-6);
        assert!((out.displacement() - input.displacement()).amax() < 1e-6);
    }

    #[test]
    fn channel_preserves_physicality() {
        let mut rng = vacuum_rng();
        let ch = GaussianChannel::identity_approx(2.0);
        for _ in 0..100 {
            // Random physical one-mode state: squeezed thermal, rotated.
            let m: f64 = rng.gen_range(0.0..2.0);
            let r: f64 = rng.gen_range(-1.0..1.0);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let base = GaussianState::thermal(m);
            let s = SymplecticTransform::phase_shift(th)
                .compose(&SymplecticTransform::squeeze(r))
                .unwrap();
            let state = s.apply(&base).unwrap();
            let out = ch.apply(&state).unwrap();
            assert!(out.check_physicality(1e-7).unwrap());
        }
    }
}
