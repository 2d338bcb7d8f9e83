//! Measurement-induced entanglement between atomic ensembles through a
//! quantum non-demolition (QND) atom-light interface.
//!
//! Each polarized atomic ensemble is one effective bosonic mode (transverse
//! collective-spin quadratures in vacuum units); a light pulse crossing the
//! ensembles at per-sample angles couples one effective light mode to a
//! single collective spin combination with dimensionless strength κ. Because
//! that combination commutes with the interaction (the QND property),
//! homodyning the light afterwards squeezes it without disturbing it.
//!
//! On top of the single-pulse primitive ([`pulse_symplectic`],
//! [`pulse_and_measure`]) the module builds the standard pipelines: EPR pairs
//! from one pulse, the entanglement eraser (a second, orthogonal pulse whose
//! intensity is tuned to undo the first measurement's back-action,
//! [`eraser`]), GHZ-type states ([`build_ghz`]) and cluster-type states on a
//! graph ([`build_cluster`]), plus variance verification against the
//! multipartite separability criteria ([`verify_variances`]).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ops::{homodyne, SymplecticTransform};
use crate::phase_space::{GaussianState, ModePartition};

/// One light pulse: coupling strength and the beam angle at each sample.
///
/// The effective interaction couples the light momentum quadrature to
/// `Σᵢ (p̂ᵢ cos αᵢ + x̂ᵢ sin αᵢ)` over the addressed samples, with the
/// dimensionless strength `κ` absorbing the pulse intensity and the atomic
/// polarization. Samples outside the beam path are masked out with `active`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceConfig {
    kappa: f64,
    angles: Vec<f64>,
    active: Vec<bool>,
}

impl InterfaceConfig {
    /// Pulse addressing every sample, one angle per sample.
    pub fn new(kappa: f64, angles: Vec<f64>) -> Result<Self> {
        let active = vec![true; angles.len()];
        Self::with_active(kappa, angles, active)
    }

    /// Pulse with an explicit active mask (inactive samples are untouched).
    pub fn with_active(kappa: f64, angles: Vec<f64>, active: Vec<bool>) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::Precondition(format!(
                "coupling must be finite and non-negative, got {kappa}"
            )));
        }
        if angles.is_empty() || angles.len() != active.len() {
            return Err(Error::Dimension(
                "angle and active lists must be non-empty and of equal length".into(),
            ));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Precondition("angles must be finite".into()));
        }
        Ok(Self {
            kappa,
            angles,
            active,
        })
    }

    /// Pulse through every sample at a common angle.
    pub fn uniform(samples: usize, kappa: f64, angle: f64) -> Result<Self> {
        Self::new(kappa, vec![angle; samples])
    }

    /// Number of samples the configuration describes.
    pub fn samples(&self) -> usize {
        self.angles.len()
    }

    /// Coupling strength κ.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Per-sample beam angles.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Per-sample active mask.
    pub fn active(&self) -> &[bool] {
        &self.active
    }
}

/// Transverse collective-spin quadrature of one sample: `Y` is the position
/// quadrature, `Z` its conjugate momentum quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinQuadrature {
    Y,
    Z,
}

/// Register of atomic ensembles: an N-sample Gaussian state (one mode per
/// sample, light appears only transiently inside a pulse) plus the canonical
/// dictionary from (sample, quadrature) to phase-space index.
#[derive(Clone, Debug)]
pub struct EnsembleRegister {
    state: GaussianState,
}

impl EnsembleRegister {
    /// Fresh register: every sample polarized, i.e. in vacuum.
    pub fn new(samples: usize) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Precondition(
                "register needs at least one sample".into(),
            ));
        }
        Ok(Self {
            state: GaussianState::vacuum(samples),
        })
    }

    /// Wraps an existing (physical) Gaussian state.
    pub fn from_state(state: GaussianState) -> Result<Self> {
        if !state.check_physicality(1e-9)? {
            return Err(Error::Unphysical("register state is not physical".into()));
        }
        Ok(Self { state })
    }

    /// Number of samples.
    pub fn samples(&self) -> usize {
        self.state.modes()
    }

    /// The underlying Gaussian state.
    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    /// Phase-space index of a sample quadrature.
    pub fn index(&self, sample: usize, quadrature: SpinQuadrature) -> Result<usize> {
        if sample >= self.samples() {
            return Err(Error::Addressing(format!(
                "sample {sample} out of range for {} samples",
                self.samples()
            )));
        }
        Ok(match quadrature {
            SpinQuadrature::Y => 2 * sample,
            SpinQuadrature::Z => 2 * sample + 1,
        })
    }
}

/// Symplectic transformation of one pulse on N samples plus one (final)
/// light mode.
///
/// Generated by `κ p̂_L Σᵢ (p̂ᵢ cos αᵢ + x̂ᵢ sin αᵢ)` over the active
/// samples; since both `p̂_L` and the measured spin combination commute with
/// the generator, the flow is a single exact linear step:
/// `x̂ᵢ → x̂ᵢ + κ cos αᵢ p̂_L`, `p̂ᵢ → p̂ᵢ − κ sin αᵢ p̂_L`,
/// `x̂_L → x̂_L + κ Σᵢ (p̂ᵢ cos αᵢ + x̂ᵢ sin αᵢ)`.
pub fn pulse_symplectic(cfg: &InterfaceConfig) -> Result<SymplecticTransform> {
    let n = cfg.samples();
    let dim = 2 * (n + 1);
    let (xl, pl) = (2 * n, 2 * n + 1);
    let mut s = DMatrix::identity(dim, dim);
    for i in 0..n {
        if !cfg.active[i] {
            continue;
        }
        let (c, sn) = (cfg.angles[i].cos(), cfg.angles[i].sin());
        s[(2 * i, pl)] += cfg.kappa * c;
        s[(2 * i + 1, pl)] -= cfg.kappa * sn;
        s[(xl, 2 * i + 1)] += cfg.kappa * c;
        s[(xl, 2 * i)] += cfg.kappa * sn;
    }
    SymplecticTransform::new(s, DVector::zeros(dim))
}

/// Runs one pulse and measures the light: appends a fresh light mode in
/// vacuum, applies the pulse symplectic, homodynes the light position
/// quadrature and drops the light mode. The post-measurement covariance is
/// outcome-independent; the (outcome-dependent) displacement is retained.
pub fn pulse_and_measure<R: Rng>(
    reg: &EnsembleRegister,
    cfg: &InterfaceConfig,
    rng: &mut R,
) -> Result<EnsembleRegister> {
    if cfg.samples() != reg.samples() {
        return Err(Error::Dimension(format!(
            "pulse addresses {} samples, register has {}",
            cfg.samples(),
            reg.samples()
        )));
    }
    let joint = reg.state.tensor(&GaussianState::vacuum(1));
    let after = pulse_symplectic(cfg)?.apply(&joint)?;
    let light = ModePartition::single(vec![reg.samples()]);
    let outcome = homodyne(&after, &light, &[0.0], None, rng)?;
    EnsembleRegister::from_state(outcome.post_state)
}

/// The second-pulse coupling that exactly undoes the entangling back-action
/// of a first pulse of strength `kappa1` through `samples` ensembles:
/// `κ₂² = κ₁²/(N κ₁² + 1)`.
pub fn erasing_kappa2(kappa1: f64, samples: usize) -> Result<f64> {
    if !kappa1.is_finite() || kappa1 < 0.0 || samples == 0 {
        return Err(Error::Precondition(
            "eraser needs a non-negative coupling and at least one sample".into(),
        ));
    }
    let k2 = kappa1 * kappa1;
    Ok((k2 / (samples as f64 * k2 + 1.0)).sqrt())
}

/// Entanglement eraser: a second pulse orthogonal to the entangling one
/// (angle π/2 at every sample) with strength `kappa2`, followed by the light
/// measurement. At `kappa2 = erasing_kappa2(kappa1, N)` the register returns
/// to an uncorrelated vacuum-covariance state (up to a run-dependent
/// displacement); `kappa2 = 0` leaves the register untouched.
pub fn eraser<R: Rng>(
    reg: &EnsembleRegister,
    kappa2: f64,
    rng: &mut R,
) -> Result<EnsembleRegister> {
    if kappa2 == 0.0 {
        return Ok(reg.clone());
    }
    let cfg = InterfaceConfig::uniform(reg.samples(), kappa2, std::f64::consts::FRAC_PI_2)?;
    pulse_and_measure(reg, &cfg, rng)
}

/// Pulse sequence used to prepare a GHZ-type register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhzMode {
    /// One entangling pulse through all samples (squeezes the total
    /// momentum sum only).
    SinglePulse,
    /// The full scheme: one collective pulse plus one pulse per sample pair
    /// squeezing that pair's position difference ((N choose 2) + 1 pulses).
    Pairwise,
    /// Two-pulse scheme for an even number of samples: the collective pulse
    /// plus one pulse at alternating angles ±π/2 squeezing the alternating
    /// position sum.
    OptimalEven,
}

/// Prepares a GHZ-type state of `samples` ensembles with the requested pulse
/// sequence at strength `kappa`.
pub fn build_ghz<R: Rng>(
    samples: usize,
    kappa: f64,
    mode: GhzMode,
    rng: &mut R,
) -> Result<EnsembleRegister> {
    if samples < 2 {
        return Err(Error::Precondition(
            "GHZ preparation needs at least two samples".into(),
        ));
    }
    if mode == GhzMode::OptimalEven && !samples.is_multiple_of(2) {
        return Err(Error::Unsupported(
            "the two-pulse alternating-angle scheme requires an even number of samples".into(),
        ));
    }
    let mut reg = EnsembleRegister::new(samples)?;
    // Collective pulse squeezing the momentum sum.
    reg = pulse_and_measure(&reg, &InterfaceConfig::uniform(samples, kappa, 0.0)?, rng)?;
    match mode {
        GhzMode::SinglePulse => {}
        GhzMode::Pairwise => {
            for i in 0..samples {
                for j in (i + 1)..samples {
                    let mut angles = vec![0.0; samples];
                    let mut active = vec![false; samples];
                    angles[i] = std::f64::consts::FRAC_PI_2;
                    angles[j] = -std::f64::consts::FRAC_PI_2;
                    active[i] = true;
                    active[j] = true;
                    let cfg = InterfaceConfig::with_active(kappa, angles, active)?;
                    reg = pulse_and_measure(&reg, &cfg, rng)?;
                }
            }
        }
        GhzMode::OptimalEven => {
            let angles: Vec<f64> = (0..samples)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * std::f64::consts::FRAC_PI_2)
                .collect();
            reg = pulse_and_measure(&reg, &InterfaceConfig::new(kappa, angles)?, rng)?;
        }
    }
    Ok(reg)
}

/// Undirected graph over sample indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleGraph {
    samples: usize,
    edges: Vec<(usize, usize)>,
}

impl SampleGraph {
    /// Builds a graph; edges must join distinct in-range vertices.
    pub fn new(samples: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Precondition(
                "graph needs at least one vertex".into(),
            ));
        }
        for &(a, b) in &edges {
            if a >= samples || b >= samples || a == b {
                return Err(Error::Addressing(format!(
                    "invalid edge ({a}, {b}) for {samples} vertices"
                )));
            }
        }
        Ok(Self { samples, edges })
    }

    /// Linear chain 0—1—…—(n−1).
    pub fn path(samples: usize) -> Result<Self> {
        let edges = (0..samples.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::new(samples, edges)
    }

    /// Number of vertices.
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Neighbor set of a vertex.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether the graph is connected.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.samples];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Outcome of a cluster-state preparation.
#[derive(Clone, Debug)]
pub struct ClusterOutcome {
    /// The prepared register.
    pub register: EnsembleRegister,
    /// Final variance of each vertex's cluster variable (vacuum units,
    /// decreasing in κ).
    pub variances: Vec<f64>,
    /// False if the graph was disconnected (still processed per component).
    pub connected: bool,
}

/// Linear form of vertex `a`'s cluster variable in the π/4-rotated spin
/// frame: `(x̂_a + p̂_a)/√2 − Σ_{b∈N_a} (x̂_b − p̂_b)/√2`.
pub fn cluster_form(graph: &SampleGraph, vertex: usize) -> Result<DVector<f64>> {
    if vertex >= graph.samples() {
        return Err(Error::Addressing(format!("vertex {vertex} out of range")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut ell = DVector::zeros(2 * graph.samples());
    ell[2 * vertex] = s;
    ell[2 * vertex + 1] = s;
    for b in graph.neighbors(vertex) {
        ell[2 * b] = -s;
        ell[2 * b + 1] = s;
    }
    Ok(ell)
}

/// Prepares a cluster-type state on `graph`: one pulse per vertex, passing
/// through the vertex at angle +π/4 and through its neighbors at −π/4, so
/// the measured spin combination is exactly that vertex's cluster variable.
/// The cluster variables commute, so the pulses squeeze them independently.
pub fn build_cluster<R: Rng>(
    graph: &SampleGraph,
    kappa: f64,
    rng: &mut R,
) -> Result<ClusterOutcome> {
    let n = graph.samples();
    let mut reg = EnsembleRegister::new(n)?;
    for a in 0..n {
        let mut angles = vec![0.0; n];
        let mut active = vec![false; n];
        angles[a] = std::f64::consts::FRAC_PI_4;
        active[a] = true;
        for b in graph.neighbors(a) {
            angles[b] = -std::f64::consts::FRAC_PI_4;
            active[b] = true;
        }
        let cfg = InterfaceConfig::with_active(kappa, angles, active)?;
        reg = pulse_and_measure(&reg, &cfg, rng)?;
    }
    let forms: Vec<DVector<f64>> = (0..n)
        .map(|a| cluster_form(graph, a))
        .collect::<Result<_>>()?;
    let variances = verify_variances(&reg, &forms)?;
    Ok(ClusterOutcome {
        register: reg,
        variances,
        connected: graph.is_connected(),
    })
}

/// Variance of each linear form over the register quadratures, in vacuum
/// units: `ℓᵀ(γ/2)ℓ` per form.
pub fn verify_variances(reg: &EnsembleRegister, forms: &[DVector<f64>]) -> Result<Vec<f64>> {
    forms
        .iter()
        .map(|ell| reg.state.variance_of_form(ell))
        .collect()
}

/// Form for the total momentum-quadrature sum `Σᵢ p̂ᵢ`.
pub fn sum_z_form(samples: usize) -> DVector<f64> {
    let mut ell = DVector::zeros(2 * samples);
    for i in 0..samples {
        ell[2 * i + 1] = 1.0;
    }
    ell
}

/// Form for the position-quadrature difference `x̂ᵢ − x̂ⱼ`.
pub fn y_difference_form(samples: usize, i: usize, j: usize) -> Result<DVector<f64>> {
    if i >= samples || j >= samples || i == j {
        return Err(Error::Addressing(format!(
            "invalid sample pair ({i}, {j}) for {samples} samples"
        )));
    }
    let mut ell = DVector::zeros(2 * samples);
    ell[2 * i] = 1.0;
    ell[2 * j] = -1.0;
    Ok(ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{self, VlfPartition};
    use crate::linalg::symplectic_defect;
    use crate::phase_space::standard_form;
    use crate::rng::seeded;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn zero_coupling_pulse_is_identity() {
        let cfg = InterfaceConfig::new(0.0, vec![0.3, -1.1, 2.0]).unwrap();
        let s = pulse_symplectic(&cfg).unwrap();
        assert_abs_diff_eq!(
            (s.matrix() - DMatrix::<f64>::identity(8, 8)).amax(),
            0.0,
            epsilon = 0.0
        );
    }

    #[test]
    fn printed_two_sample_interaction_matrix() {
        // Two samples at zero angle: the interaction matrix, written in the
        // convention γ' = SγSᵀ used throughout this crate (the transposed
        // convention lists the same matrix transposed).
        let k = 0.8;
        let cfg = InterfaceConfig::new(k, vec![0.0, 0.0]).unwrap();
        let s = pulse_symplectic(&cfg).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(6, 6, &[
            1.0, 0.0, 0.0, 0.0, 0.0, k,
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, k,
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, k,   0.0, k,   1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ]);
        assert_abs_diff_eq!((s.matrix() - expected).amax(), 0.0, epsilon = 1e-15);
        // The post-pulse covariance of atoms+light matches the printed one.
        let joint = GaussianState::vacuum(3);
        let after = s.apply(&joint).unwrap();
        let k2 = k * k;
        #[rustfmt::skip]
        let gamma = DMatrix::from_row_slice(6, 6, &[
            1.0 + k2, 0.0, k2,       0.0, 0.0,            k,
            0.0,      1.0, 0.0,      0.0, k,              0.0,
            k2,       0.0, 1.0 + k2, 0.0, 0.0,            k,
            0.0,      0.0, 0.0,      1.0, k,              0.0,
            0.0,      k,   0.0,      k,   1.0 + 2.0 * k2, 0.0,
            k,        0.0, k,        0.0, 0.0,            1.0,
        ]);
        assert_abs_diff_eq!((after.covariance() - gamma).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pulse_is_symplectic_for_random_angles() {
        let mut rng = seeded(7);
        for samples in 1..=4 {
            for _ in 0..5 {
                let angles: Vec<f64> = (0..samples).map(|_| rng.gen_range(-3.2..3.2)).collect();
                let kappa = rng.gen_range(0.0..3.0);
                let cfg = InterfaceConfig::new(kappa, angles).unwrap();
                let s = pulse_symplectic(&cfg).unwrap();
                assert!(symplectic_defect(s.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn qnd_combination_is_preserved_by_the_pulse() {
        // The measured spin combination Σ(p̂ᵢcosαᵢ + x̂ᵢsinαᵢ) commutes with
        // the interaction: its variance is identical before and after.
        let angles = [0.4, -1.2, 2.6];
        let cfg = InterfaceConfig::new(1.7, angles.to_vec()).unwrap();
        let s = pulse_symplectic(&cfg).unwrap();
        let joint = GaussianState::vacuum(4);
        let after = s.apply(&joint).unwrap();
        let mut ell = DVector::zeros(8);
        for (i, a) in angles.iter().enumerate() {
            ell[2 * i] = a.sin();
            ell[2 * i + 1] = a.cos();
        }
        assert_abs_diff_eq!(
            joint.variance_of_form(&ell).unwrap(),
            after.variance_of_form(&ell).unwrap(),
            epsilon = 1e-12
        );
        // The light momentum is preserved too.
        let mut pl = DVector::zeros(8);
        pl[7] = 1.0;
        assert_abs_diff_eq!(
            joint.variance_of_form(&pl).unwrap(),
            after.variance_of_form(&pl).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_pulse_variances_match_closed_forms() {
        let kappa = 1.3;
        let mut rng = seeded(3);
        let reg = EnsembleRegister::new(2).unwrap();
        let cfg = InterfaceConfig::uniform(2, kappa, 0.0).unwrap();
        let reg = pulse_and_measure(&reg, &cfg, &mut rng).unwrap();
        let k2 = kappa * kappa;
        let sum_z = sum_z_form(2);
        let diff_y = y_difference_form(2, 0, 1).unwrap();
        let mut sum_y = DVector::zeros(4);
        sum_y[0] = 1.0;
        sum_y[2] = 1.0;
        let mut diff_z = DVector::zeros(4);
        diff_z[1] = 1.0;
        diff_z[3] = -1.0;
        let v = verify_variances(&reg, &[sum_z, diff_y, sum_y, diff_z]).unwrap();
        assert_relative_eq!(v[0], 1.0 / (1.0 + 2.0 * k2), epsilon = 1e-12);
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(v[2], 1.0 + 2.0 * k2, epsilon = 1e-12);
        assert_relative_eq!(v[3], 1.0, epsilon = 1e-12);
        // Squeezed pair violates the two-mode variance bound.
        assert!(v[0] + v[1] < 2.0);
        let split = ModePartition::bipartition(vec![0], vec![1]).unwrap();
        assert!(entanglement::is_nppt(reg.state(), &split).unwrap());
    }

    #[test]
    fn post_state_is_a_two_mode_squeezed_state() {
        for &kappa in &[0.5f64, 1.0, 2.0] {
            let mut rng = seeded(11);
            let reg = EnsembleRegister::new(2).unwrap();
            let cfg = InterfaceConfig::uniform(2, kappa, 0.0).unwrap();
            let reg = pulse_and_measure(&reg, &cfg, &mut rng).unwrap();
            let k2 = kappa * kappa;
            let r = 0.5 * ((1.0 + k2) / (1.0 + 2.0 * k2).sqrt()).acosh();
            // Tolerances limited by the numeric standard-form extraction.
            let sf = standard_form(reg.state()).unwrap();
            assert_relative_eq!(sf.lambda_a, (2.0 * r).cosh(), epsilon = 1e-7);
            assert_relative_eq!(sf.lambda_b, (2.0 * r).cosh(), epsilon = 1e-7);
            assert_relative_eq!(sf.c_x, (2.0 * r).sinh(), epsilon = 1e-7);
            assert_relative_eq!(sf.c_p, -(2.0 * r).sinh(), epsilon = 1e-7);
            assert!(reg.state().is_pure(1e-9));
            if (kappa - 1.0).abs() < 1e-12 {
                assert_abs_diff_eq!(r, 0.2747, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn post_covariance_is_outcome_independent() {
        let reg = EnsembleRegister::new(2).unwrap();
        let cfg = InterfaceConfig::uniform(2, 1.0, 0.0).unwrap();
        let joint = reg.state().tensor(&GaussianState::vacuum(1));
        let after = pulse_symplectic(&cfg).unwrap().apply(&joint).unwrap();
        let light = ModePartition::single(vec![2]);
        let mut rng = seeded(0);
        let mut reference: Option<DMatrix<f64>> = None;
        let mut displacements = Vec::new();
        for k in 0..10 {
            let out = homodyne(&after, &light, &[0.0], Some(&[k as f64 - 5.0]), &mut rng).unwrap();
            let cm = out.post_state.covariance().clone();
            match &reference {
                None => reference = Some(cm),
                Some(r) => assert_abs_diff_eq!((r - cm).amax(), 0.0, epsilon = 1e-12),
            }
            displacements.push(out.post_state.displacement().clone());
        }
        // Displacements do depend on the outcome.
        assert!((displacements[0].clone() - displacements[9].clone()).amax() > 1e-6);
    }

    #[test]
    fn eraser_restores_the_vacuum_covariance() {
        let kappa1 = 1.0;
        for samples in 2..=5 {
            let mut rng = seeded(samples as u64);
            let reg = EnsembleRegister::new(samples).unwrap();
            let cfg = InterfaceConfig::uniform(samples, kappa1, 0.0).unwrap();
            let entangled = pulse_and_measure(&reg, &cfg, &mut rng).unwrap();
            let kappa2 = erasing_kappa2(kappa1, samples).unwrap();
            assert_relative_eq!(
                kappa2 * kappa2,
                1.0 / (samples as f64 + 1.0),
                epsilon = 1e-14
            );
            let erased = eraser(&entangled, kappa2, &mut rng).unwrap();
            let id = DMatrix::<f64>::identity(2 * samples, 2 * samples);
            assert_abs_diff_eq!(
                (erased.state().covariance() - id).amax(),
                0.0,
                epsilon = 1e-10
            );
            if samples == 2 {
                let split = ModePartition::bipartition(vec![0], vec![1]).unwrap();
                assert_abs_diff_eq!(
                    entanglement::negativity(erased.state(), &split).unwrap(),
                    0.0,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn eraser_variance_cross_check() {
        // After both pulses: var(p̂₁+p̂₂) = 2κ₂² + 1/(2κ₁²+1) and
        // var(x̂₁+x̂₂) = (2κ₁²+1)/((4κ₁²+2)κ₂²+1).
        let (kappa1, kappa2) = (0.9f64, 0.45f64);
        let mut rng = seeded(5);
        let reg = EnsembleRegister::new(2).unwrap();
        let cfg = InterfaceConfig::uniform(2, kappa1, 0.0).unwrap();
        let reg = pulse_and_measure(&reg, &cfg, &mut rng).unwrap();
        let reg = eraser(&reg, kappa2, &mut rng).unwrap();
        let (k1, k2) = (kappa1 * kappa1, kappa2 * kappa2);
        let mut sum_y = DVector::zeros(4);
        sum_y[0] = 1.0;
        sum_y[2] = 1.0;
        let v = verify_variances(&reg, &[sum_z_form(2), sum_y]).unwrap();
        assert_relative_eq!(v[0], 2.0 * k2 + 1.0 / (2.0 * k1 + 1.0), epsilon = 1e-12);
        assert_relative_eq!(
            v[1],
            (2.0 * k1 + 1.0) / ((4.0 * k1 + 2.0) * k2 + 1.0),
            epsilon = 1e-12
        );
        // A zero-strength eraser is a no-op.
        let untouched = eraser(&reg, 0.0, &mut rng).unwrap();
        assert_abs_diff_eq!(
            (untouched.state().covariance() - reg.state().covariance()).amax(),
            0.0,
            epsilon = 0.0
        );
    }

    #[test]
    fn negativity_decreases_monotonically_to_the_erasing_point() {
        let kappa1 = 1.0;
        let split = ModePartition::bipartition(vec![0], vec![1]).unwrap();
        let kstar = erasing_kappa2(kappa1, 2).unwrap();
        let mut prev = f64::INFINITY;
        for step in 0..=6 {
            let kappa2 = kstar * step as f64 / 6.0;
            let mut rng = seeded(17);
            let reg = EnsembleRegister::new(2).unwrap();
            let cfg = InterfaceConfig::uniform(2, kappa1, 0.0).unwrap();
            let reg = pulse_and_measure(&reg, &cfg, &mut rng).unwrap();
            let reg = eraser(&reg, kappa2, &mut rng).unwrap();
            let n = entanglement::negativity(reg.state(), &split).unwrap();
            assert!(n < prev + 1e-12, "negativity not decreasing at κ₂={kappa2}");
            prev = n;
        }
        assert_abs_diff_eq!(prev, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn pairwise_ghz_variances_match_closed_forms() {
        let (samples, kappa) = (3usize, 1.0f64);
        let mut rng = seeded(23);
        let reg = build_ghz(samples, kappa, GhzMode::Pairwise, &mut rng).unwrap();
        let n = samples as f64;
        let k2 = kappa * kappa;
        let sum_z = sum_z_form(samples);
        let v = verify_variances(&reg, &[sum_z]).unwrap();
        assert_relative_eq!(v[0], n / (2.0 + 2.0 * n * k2), epsilon = 1e-9);
        let mut diffs = Vec::new();
        for i in 0..samples {
            for j in (i + 1)..samples {
                let form = y_difference_form(samples, i, j).unwrap();
                diffs.push(verify_variances(&reg, &[form]).unwrap()[0]);
            }
        }
        for d in &diffs {
            assert_relative_eq!(*d, 1.0 / (1.0 + n * k2), epsilon = 1e-9);
            // All pairwise differences are equal by symmetry.
            assert_relative_eq!(*d, diffs[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_multipartite_criterion() {
        // N=3 pairwise at κ=1 violates the three-mode variance bound with
        // h = (1, −1, 0), g = (1, 1, 1); the vacuum does not.
        let partition = VlfPartition {
            m: 0,
            n: 1,
            set_i: vec![],
            set_i_prime: vec![2],
        };
        let h = [1.0, -1.0, 0.0];
        let g = [1.0, 1.0, 1.0];
        let mut rng = seeded(29);
        let reg = build_ghz(3, 1.0, GhzMode::Pairwise, &mut rng).unwrap();
        let out = entanglement::van_loock_furusawa(reg.state(), &h, &g, &partition).unwrap();
        assert!(out.violated);
        let vac = build_ghz(3, 0.0, GhzMode::Pairwise, &mut rng).unwrap();
        let base = entanglement::van_loock_furusawa(vac.state(), &h, &g, &partition).unwrap();
        assert!(!base.violated);
        assert_abs_diff_eq!(
            (vac.state().covariance() - DMatrix::<f64>::identity(6, 6)).amax(),
            0.0,
            epsilon = 1e-12
        );
        // The erased register does not violate the criterion either.
        let cfg = InterfaceConfig::uniform(3, 1.0, 0.0).unwrap();
        let ent = pulse_and_measure(&EnsembleRegister::new(3).unwrap(), &cfg, &mut rng).unwrap();
        let erased = eraser(&ent, erasing_kappa2(1.0, 3).unwrap(), &mut rng).unwrap();
        let after = entanglement::van_loock_furusawa(erased.state(), &h, &g, &partition).unwrap();
        assert!(!after.violated);
    }

    #[test]
    fn alternating_angle_scheme_for_even_sample_counts() {
        let mut rng = seeded(31);
        let reg = build_ghz(4, 1.0, GhzMode::OptimalEven, &mut rng).unwrap();
        // The alternating-sign operators violate the four-mode criterion.
        let h = [1.0, -1.0, 1.0, -1.0];
        let g = [1.0, 1.0, 1.0, 1.0];
        let partition = VlfPartition {
            m: 0,
            n: 1,
            set_i: vec![2],
            set_i_prime: vec![3],
        };
        let out = entanglement::van_loock_furusawa(reg.state(), &h, &g, &partition).unwrap();
        assert!(out.violated);
        // Both squeezed combinations sit at their closed-form values.
        let mut alt = DVector::zeros(8);
        for i in 0..4 {
            alt[2 * i] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let v = verify_variances(&reg, &[sum_z_form(4), alt]).unwrap();
        assert_relative_eq!(v[0], 4.0 / (2.0 + 8.0), epsilon = 1e-9);
        assert_relative_eq!(v[1], 2.0 / (1.0 + 4.0), epsilon = 1e-9);
        // Odd sample counts are rejected.
        assert!(matches!(
            build_ghz(3, 1.0, GhzMode::OptimalEven, &mut rng),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn two_vertex_cluster_reproduces_the_bipartite_scheme() {
        // The 2-node cluster pulses squeeze the π/4-rotated pair variables;
        // the resulting variances of x̂₁−x̂₂ and p̂₁+p̂₂ coincide with the
        // two-pulse bipartite pipeline squeezing those forms directly.
        let kappa = 0.8;
        let mut rng = seeded(37);
        let graph = SampleGraph::path(2).unwrap();
        let cluster = build_cluster(&graph, kappa, &mut rng).unwrap();

        let reg = EnsembleRegister::new(2).unwrap();
        let first = InterfaceConfig::uniform(2, kappa, 0.0).unwrap();
        let second = InterfaceConfig::new(
            kappa,
            vec![std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2],
        )
        .unwrap();
        let reg = pulse_and_measure(&reg, &first, &mut rng).unwrap();
        let reg = pulse_and_measure(&reg, &second, &mut rng).unwrap();

        let forms = [sum_z_form(2), y_difference_form(2, 0, 1).unwrap()];
        let via_cluster = verify_variances(&cluster.register, &forms).unwrap();
        let via_pipeline = verify_variances(&reg, &forms).unwrap();
        for (a, b) in via_cluster.iter().zip(&via_pipeline) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
        assert!(cluster.connected);
    }

    #[test]
    fn linear_cluster_squeezes_every_cluster_variable() {
        let graph = SampleGraph::path(4).unwrap();
        let mut rng = seeded(41);
        let squeezed = build_cluster(&graph, 1.0, &mut rng).unwrap();
        let baseline = build_cluster(&graph, 0.0, &mut rng).unwrap();
        assert_eq!(squeezed.variances.len(), 4);
        for (v, b) in squeezed.variances.iter().zip(&baseline.variances) {
            assert!(v < b, "cluster variable not squeezed ({v} ≥ {b})");
        }
        // κ = 0 leaves the vacuum baseline.
        let id = DMatrix::<f64>::identity(8, 8);
        assert_abs_diff_eq!(
            (baseline.register.state().covariance() - id).amax(),
            0.0,
            epsilon = 1e-12
        );
        // Disconnected graphs are processed but flagged.
        let two_pairs = SampleGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let out = build_cluster(&two_pairs, 1.0, &mut rng).unwrap();
        assert!(!out.connected);
    }

    #[test]
    fn verify_variances_baseline_and_errors() {
        let reg = EnsembleRegister::new(2).unwrap();
        let mut unit = DVector::zeros(4);
        unit[0] = 1.0;
        let v = verify_variances(&reg, &[unit]).unwrap();
        assert_relative_eq!(v[0], 0.5, epsilon = 1e-15);
        let wrong = DVector::zeros(6);
        assert!(verify_variances(&reg, &[wrong]).is_err());
    }

    #[test]
    fn configuration_validation() {
        assert!(InterfaceConfig::new(f64::NAN, vec![0.0]).is_err());
        assert!(InterfaceConfig::new(-0.5, vec![0.0]).is_err());
        assert!(InterfaceConfig::new(1.0, vec![]).is_err());
        assert!(InterfaceConfig::with_active(1.0, vec![0.0, 0.0], vec![true]).is_err());
        let reg = EnsembleRegister::new(2).unwrap();
        assert!(reg.index(2, SpinQuadrature::Y).is_err());
        assert_eq!(reg.index(1, SpinQuadrature::Z).unwrap(), 3);
        let cfg = InterfaceConfig::uniform(3, 1.0, 0.0).unwrap();
        let mut rng = seeded(1);
        assert!(pulse_and_measure(&reg, &cfg, &mut rng).is_err());
    }
}
