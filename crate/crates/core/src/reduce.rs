//! No-bunching postselection and the trace over distinguishability labels.
//!
//! After postselection each surviving term is a spin pattern and a label
//! pattern, both listed by detector. Tracing out the labels against the Gram
//! matrix `G_ij = ⟨d_i|d_j⟩` gives
//!
//! ```text
//! ρ_raw[s, s'] = Σ_{t: s, t': s'} a_t · conj(a_t') · ∏_det G[label_t'(det), label_t(det)]
//! ```
//!
//! with `p_success = tr ρ_raw` and `ρ = ρ_raw / p_success`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::expansion::ExpandedState;
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::spin::{basis_index, Spin};
use crate::transform::TransformSpec;

pub const GRAM_HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const GRAM_PSD_TOLERANCE: f64 = 1e-9;
/// Success probabilities at or below this are treated as an impossible postselection.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-15;

/// Pairwise overlaps `⟨d_i|d_j⟩` of the distinguishability states.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    g: CMatrix,
}

impl GramMatrix {
    pub fn new(g: CMatrix) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || g.ncols() != n {
            return Err(Error::invalid(format!(
                "gram matrix must be square and nonempty, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("gram matrix has a non-finite entry"));
        }
        for i in 0..n {
            if (g[(i, i)] - ONE).norm() > GRAM_HERMITIAN_TOLERANCE {
                return Err(Error::invalid(format!(
                    "gram diagonal entry ({i},{i}) is {}, expected 1",
                    g[(i, i)]
                )));
            }
            for j in 0..n {
                if (g[(i, j)] - g[(j, i)].conj()).norm() > GRAM_HERMITIAN_TOLERANCE {
                    return Err(Error::invalid(format!("gram matrix is not Hermitian at ({i},{j})")));
                }
                if g[(i, j)].norm() > 1.0 + GRAM_HERMITIAN_TOLERANCE {
                    return Err(Error::invalid(format!("gram overlap ({i},{j}) exceeds 1 in magnitude")));
                }
            }
        }
        let min = linalg::min_eigenvalue(&g);
        if min < -GRAM_PSD_TOLERANCE {
            return Err(Error::GramNotPsd(min));
        }
        Ok(Self { g })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "gram matrix rows must all have length equal to the row count",
            ));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Fully distinguishable particles.
    pub fn identity(n: usize) -> Self {
        Self {
            g: CMatrix::identity(n, n),
        }
    }

    /// Fully indistinguishable particles.
    pub fn all_ones(n: usize) -> Self {
        Self {
            g: CMatrix::from_element(n, n, ONE),
        }
    }

    /// Every off-diagonal overlap equal to the real value `g`.
    pub fn uniform(n: usize, g: f64) -> Result<Self> {
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                ONE
            } else {
                Complex64::new(g, 0.0)
            }
        }))
    }

    /// Particles sharing a class index are identical, different classes orthogonal.
    /// `[0, 1, 0]` puts particles 1 and 3 in one temporal mode and particle 2 in another.
    pub fn from_classes(classes: &[usize]) -> Self {
        let n = classes.len();
        Self {
            g: CMatrix::from_fn(n, n, |i, j| if classes[i] == classes[j] { ONE } else { ZERO }),
        }
    }

    pub fn from_delays(model: &DelayModel) -> Self {
        let l = &model.delays;
        let n = l.len();
        Self {
            g: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    ONE
                } else {
                    let x = (l[i] - l[j]) / model.coherence_length;
                    Complex64::new((-x * x).exp(), 0.0)
                }
            }),
        }
    }

    pub fn size(&self) -> usize {
        self.g.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.g[(i, j)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }
}

/// Path delays `L_i` and the single-particle coherence length `L_c`, in the same units.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayModel {
    pub coherence_length: f64,
    pub delays: Vec<f64>,
}

impl DelayModel {
    pub fn new(coherence_length: f64, delays: Vec<f64>) -> Result<Self> {
        if !coherence_length.is_finite() || coherence_length <= 0.0 {
            return Err(Error::invalid(format!(
                "coherence length must be positive, got {coherence_length}"
            )));
        }
        if delays.is_empty() || delays.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("delays must be a nonempty list of finite numbers"));
        }
        Ok(Self {
            coherence_length,
            delays,
        })
    }
}

/// Gaussian mutual coherence `G_ij = exp(−((L_i − L_j)/L_c)²)`.
pub fn gram_from_delays(model: &DelayModel) -> GramMatrix {
    GramMatrix::from_delays(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostselectedTerm {
    pub amplitude: Complex64,
    pub spins: Vec<Spin>,
    /// Source-particle label found at each detector.
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostselectedState {
    terms: Vec<PostselectedTerm>,
    num_particles: usize,
    raw_weight: f64,
}

impl PostselectedState {
    pub fn terms(&self) -> &[PostselectedTerm] {
        &self.terms
    }

    pub fn num_particles(&self) -> usize {
        self.num_particles
    }

    /// `Σ |a_t|²`, the success probability when every particle is distinguishable.
    pub fn raw_weight(&self) -> f64 {
        self.raw_weight
    }

    /// Amplitudes summed per spin pattern, ignoring labels. This is the
    /// postselected state vector when all particles are indistinguishable.
    pub fn coherent_amplitudes(&self) -> Vec<Complex64> {
        let mut psi = vec![ZERO; 1 << self.num_particles];
        for t in &self.terms {
            psi[basis_index(&t.spins)] += t.amplitude;
        }
        psi
    }
}

/// Keeps the terms whose detector assignment is a bijection and relists
/// spins and labels by detector. Bosonic relabeling carries no sign.
pub fn postselect_no_bunching(state: &ExpandedState) -> Result<PostselectedState> {
    let Some(m) = state.num_modes() else {
        return Err(Error::NotTransformed);
    };
    let n = state.num_particles();
    if m != n {
        return Err(Error::UnsupportedConfiguration(format!(
            "no-bunching postselection needs as many detectors as particles ({n}), got {m}"
        )));
    }
    let mut merged: BTreeMap<(Vec<Spin>, Vec<usize>), Complex64> = BTreeMap::new();
    for term in state.terms() {
        let mut spins = vec![None; n];
        let mut labels = vec![0usize; n];
        let mut bijective = true;
        for p in &term.particles {
            let det = p.detector.expect("transformed state has detectors");
            if spins[det].is_some() {
                bijective = false;
                break;
            }
            spins[det] = Some(p.spin);
            labels[det] = p.label;
        }
        if !bijective {
            continue;
        }
        let spins: Vec<Spin> = spins
            .into_iter()
            .map(|s| s.expect("bijection fills every detector"))
            .collect();
        *merged.entry((spins, labels)).or_insert(ZERO) += term.amplitude;
    }
    let terms: Vec<PostselectedTerm> = merged
        .into_iter()
        .map(|((spins, labels), amplitude)| PostselectedTerm {
            amplitude,
            spins,
            labels,
        })
        .collect();
    let raw_weight = terms.iter().map(|t| t.amplitude.norm_sqr()).sum();
    Ok(PostselectedState {
        terms,
        num_particles: n,
        raw_weight,
    })
}

/// Unnormalized `ρ_raw` over the spin basis.
pub fn unnormalized_density(ps: &PostselectedState, gram: &GramMatrix) -> Result<CMatrix> {
    let n = ps.num_particles();
    if gram.size() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: gram.size(),
        });
    }
    let dim = 1usize << n;
    let mut raw = CMatrix::zeros(dim, dim);
    let index: Vec<usize> = ps.terms.iter().map(|t| basis_index(&t.spins)).collect();
    for (t, &row) in ps.terms.iter().zip(&index) {
        for (tp, &col) in ps.terms.iter().zip(&index) {
            let overlap = tp
                .labels
                .iter()
                .zip(&t.labels)
                .fold(ONE, |acc, (&lb, &lk)| acc * gram.get(lb, lk));
            raw[(row, col)] += t.amplitude * tp.amplitude.conj() * overlap;
        }
    }
    Ok(raw)
}

/// Traces the labels out against `gram`; returns the normalized density matrix and `p_success`.
pub fn trace_distinguishability(ps: &PostselectedState, gram: &GramMatrix) -> Result<(DensityMatrix, f64)> {
    let raw = unnormalized_density(ps, gram)?;
    let p_success = linalg::trace(&raw).re;
    if p_success.is_nan() || p_success <= MIN_SUCCESS_PROBABILITY {
        return Err(Error::PostselectionImpossible(p_success));
    }
    let rho = linalg::hermitize(&raw) / Complex64::new(p_success, 0.0);
    Ok((DensityMatrix::from_matrix_unchecked(rho), p_success))
}

/// Initial spins are irrelevant once `S` is applied; particle `k` starts with
/// the spin of its first reachable detector.
pub fn initial_spins(spec: &TransformSpec) -> Vec<Spin> {
    (0..spec.num_particles())
        .map(|k| {
            (0..spec.num_modes())
                .find_map(|j| spec.spin(k, j))
                .expect("validated spec has a reachable detector per particle")
        })
        .collect()
}

/// Full pipeline: expand, postselect, trace. Returns `(ρ, p_success)`.
pub fn simulate(spec: &TransformSpec, gram: &GramMatrix) -> Result<(DensityMatrix, f64)> {
    let expanded = ExpandedState::initial(&initial_spins(spec))?.apply_transform(spec)?;
    let ps = postselect_no_bunching(&expanded)?;
    trace_distinguishability(&ps, gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{balanced_tritter_rows, ghz_preset, w_preset, GhzParams};
    use std::f64::consts::FRAC_1_SQRT_2;
    use Spin::{Down as D, Up as U};

    fn ghz_postselected() -> PostselectedState {
        let spec = ghz_preset(&GhzParams::balanced()).unwrap();
        let e = ExpandedState::initial(&initial_spins(&spec))
            .unwrap()
            .apply_transform(&spec)
            .unwrap();
        postselect_no_bunching(&e).unwrap()
    }

    #[test]
    fn ghz_keeps_two_terms() {
        let ps = ghz_postselected();
        assert_eq!(ps.terms().len(), 2);
        let a = FRAC_1_SQRT_2.powi(3);
        let down = ps.terms().iter().find(|t| t.spins == vec![D, D, D]).unwrap();
        assert_eq!(down.labels, vec![0, 1, 2]);
        assert!((down.amplitude.re - a).abs() < 1e-15);
        let up = ps.terms().iter().find(|t| t.spins == vec![U, U, U]).unwrap();
        assert_eq!(up.labels, vec![2, 0, 1]);
        assert!((up.amplitude.re - a).abs() < 1e-15);
    }

    #[test]
    fn w_keeps_six_terms() {
        let spec = w_preset(balanced_tritter_rows()).unwrap();
        let e = ExpandedState::initial(&[D, D, U])
            .unwrap()
            .apply_transform(&spec)
            .unwrap();
        let ps = postselect_no_bunching(&e).unwrap();
        assert_eq!(ps.terms().len(), 6);
        // α1β2γ3 |↓d1⟩|↓d2⟩|↑d3⟩ and α3β2γ1 |↑d3⟩|↓d2⟩|↓d1⟩ among them
        assert!(ps
            .terms()
            .iter()
            .any(|t| t.spins == vec![D, D, U] && t.labels == vec![0, 1, 2]));
        assert!(ps
            .terms()
            .iter()
            .any(|t| t.spins == vec![U, D, D] && t.labels == vec![2, 1, 0]));
    }

    #[test]
    fn permutation_routing_keeps_one_term() {
        let spec = w_preset([[ZERO, ONE, ZERO], [ZERO, ZERO, ONE], [ONE, ZERO, ZERO]]).unwrap();
        let e = ExpandedState::initial(&[D, D, U])
            .unwrap()
            .apply_transform(&spec)
            .unwrap();
        let ps = postselect_no_bunching(&e).unwrap();
        assert_eq!(ps.terms().len(), 1);
        assert_eq!(ps.terms()[0].amplitude, ONE);
        assert_eq!(ps.terms()[0].labels, vec![2, 0, 1]);
    }

    #[test]
    fn postselect_errors() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let spec = TransformSpec::custom(
            vec![vec![h, h, ZERO], vec![ZERO, h, h]],
            vec![vec![Some(D), Some(D), None], vec![None, Some(U), Some(U)]],
        )
        .unwrap();
        let e = ExpandedState::initial(&[D, U]).unwrap();
        assert_eq!(postselect_no_bunching(&e), Err(Error::NotTransformed));
        let e = e.apply_transform(&spec).unwrap();
        assert!(matches!(
            postselect_no_bunching(&e),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn ghz_indistinguishable_is_pure_ghz() {
        let (rho, p) = trace_distinguishability(&ghz_postselected(), &GramMatrix::all_ones(3)).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
        for (i, j) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
            assert!((rho.get(i, j) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
        rho.check_invariants().unwrap();
    }

    #[test]
    fn ghz_third_particle_distinguishable_is_separable() {
        let gram = GramMatrix::from_classes(&[0, 0, 1]);
        let (rho, _) = trace_distinguishability(&ghz_postselected(), &gram).unwrap();
        assert_eq!(rho.get(0, 7), ZERO);
        assert_eq!(rho.get(7, 0), ZERO);
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((rho.get(7, 7).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn destructive_interference_is_an_error() {
        // Hong-Ou-Mandel: two identical particles, same spin, balanced beamsplitter.
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let spec = TransformSpec::custom(
            vec![vec![h, h], vec![h, -h]],
            vec![vec![Some(D), Some(D)], vec![Some(D), Some(D)]],
        )
        .unwrap();
        let err = simulate(&spec, &GramMatrix::all_ones(2)).unwrap_err();
        assert!(matches!(err, Error::PostselectionImpossible(_)));
        assert!(err.is_numerical());
        let (_, p) = simulate(&spec, &GramMatrix::identity(2)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gram_validation() {
        assert!(GramMatrix::uniform(3, 0.5).is_ok());
        let bad = GramMatrix::from_rows(&[vec![ONE, ONE, ZERO], vec![ONE, ONE, ONE], vec![ZERO, ONE, ONE]]);
        assert!(matches!(bad, Err(Error::GramNotPsd(_))));
        let not_herm =
            GramMatrix::from_rows(&[vec![ONE, Complex64::new(0.0, 0.5)], vec![Complex64::new(0.0, 0.5), ONE]]);
        assert!(not_herm.is_err());
        let bad_diag = GramMatrix::from_rows(&[vec![Complex64::new(0.9, 0.0)]]);
        assert!(bad_diag.is_err());
        assert!(GramMatrix::uniform(2, 1.2).is_err());
        assert!(GramMatrix::from_rows(&[vec![ONE, ZERO]]).is_err());
    }

    #[test]
    fn delays_to_gram() {
        let g = gram_from_delays(&DelayModel::new(0.5, vec![0.0, 0.0, 0.0]).unwrap());
        assert_eq!(g, GramMatrix::all_ones(3));
        let g = gram_from_delays(&DelayModel::new(0.5, vec![0.0, 0.0, 5.0]).unwrap());
        assert!(g.get(0, 2).re < 1e-40 && g.get(1, 2).re < 1e-40);
        assert_eq!(g.get(0, 1), ONE);
        assert!((g.get(0, 2).re - (-100f64).exp()).abs() < 1e-60);
        let g = gram_from_delays(&DelayModel::new(1.0, vec![0.0, 1.0, 0.0]).unwrap());
        assert!((g.get(0, 1).re - 0.36787944117144233).abs() < 1e-15);
        assert!(DelayModel::new(0.0, vec![0.0]).is_err());
        assert!(DelayModel::new(1.0, vec![]).is_err());
        GramMatrix::new(g.matrix().clone()).unwrap();
    }
}
