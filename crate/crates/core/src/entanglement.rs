//! Fidelity-based genuine tripartite entanglement witnesses.
//!
//! A GHZ fidelity above 1/2 or a W fidelity above 2/3 witnesses genuine
//! tripartite entanglement of the respective class. Failing both says nothing
//! about separability; the report only states which witnesses fired.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};

pub const GHZ_BOUND: f64 = 0.5;
pub const W_BOUND: f64 = 2.0 / 3.0;
/// Slack added to each witness bound before the strict comparison.
pub const WITNESS_TOLERANCE: f64 = 1e-9;

pub const PHASE_GRID: usize = 256;
pub const PHASE_STEP_FLOOR: f64 = 1e-6;

/// Basis indices of |↓↓↑⟩, |↓↑↓⟩, |↑↓↓⟩.
const W_SUPPORT: [usize; 3] = [0b001, 0b010, 0b100];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetKind {
    Ghz,
    W { phi1: f64, phi2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub kind: TargetKind,
    vector: Vec<Complex64>,
}

impl TargetState {
    /// `(|↓…↓⟩ + |↑…↑⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> Self {
        let dim = 1usize << n;
        let mut v = vec![ZERO; dim];
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[0] = a;
        v[dim - 1] = a;
        Self {
            kind: TargetKind::Ghz,
            vector: v,
        }
    }

    /// `(|↓↓↑⟩ + e^{iφ₁}|↓↑↓⟩ + e^{iφ₂}|↑↓↓⟩)/√3`.
    pub fn w(phi1: f64, phi2: f64) -> Self {
        let mut v = vec![ZERO; 8];
        let c = 1.0 / 3f64.sqrt();
        v[W_SUPPORT[0]] = Complex64::new(c, 0.0);
        v[W_SUPPORT[1]] = Complex64::from_polar(c, phi1);
        v[W_SUPPORT[2]] = Complex64::from_polar(c, phi2);
        Self {
            kind: TargetKind::W { phi1, phi2 },
            vector: v,
        }
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.vector).expect("targets are normalized")
    }
}

/// `⟨ψ|ρ|ψ⟩`
pub fn fidelity_pure(rho: &DensityMatrix, target: &TargetState) -> Result<f64> {
    if rho.dim() != target.vector.len() {
        return Err(Error::DimensionMismatch {
            expected: target.vector.len(),
            found: rho.dim(),
        });
    }
    Ok(linalg::expectation(rho.matrix(), &target.vector).re.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn fidelity_mixed(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    rho.check_invariants()?;
    sigma.check_invariants()?;
    let sqrt_rho = linalg::psd_sqrt(rho.matrix());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let (values, _) = linalg::hermitian_eigen(&inner);
    let root_trace: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Fidelity with the generalized W state as a function of its two phases,
/// restricted to the three-dimensional W support of `ρ`.
#[derive(Debug, Clone)]
pub struct WPhaseObjective {
    block: [[Complex64; 3]; 3],
}

impl WPhaseObjective {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        if rho.num_qubits() != 3 {
            return Err(Error::UnsupportedConfiguration(format!(
                "W phase search needs 3 qubits, got {}",
                rho.num_qubits()
            )));
        }
        let mut block = [[ZERO; 3]; 3];
        for (a, &ia) in W_SUPPORT.iter().enumerate() {
            for (b, &ib) in W_SUPPORT.iter().enumerate() {
                block[a][b] = rho.get(ia, ib);
            }
        }
        Ok(Self { block })
    }

    pub fn value(&self, phi1: f64, phi2: f64) -> f64 {
        let c = [
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, phi1),
            Complex64::from_polar(1.0, phi2),
        ];
        let mut acc = ZERO;
        for a in 0..3 {
            for b in 0..3 {
                acc += c[a].conj() * self.block[a][b] * c[b];
            }
        }
        (acc.re / 3.0).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WPhaseOptimum {
    /// Radians, wrapped into (−π, π].
    pub phi1: f64,
    pub phi2: f64,
    pub fidelity: f64,
}

/// Maximizes the W fidelity over both phases: a 256×256 grid on [0, 2π)², then
/// coordinate ascent with step halving down to 1e-6 rad. Grid ties go to the
/// lexicographically smallest (φ₁, φ₂).
pub fn optimize_w_phases(rho: &DensityMatrix) -> Result<WPhaseOptimum> {
    let objective = WPhaseObjective::new(rho)?;
    let spacing = TAU / PHASE_GRID as f64;

    let (mut best, gi, gj) = (0..PHASE_GRID * PHASE_GRID)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / PHASE_GRID, idx % PHASE_GRID);
            (objective.value(i as f64 * spacing, j as f64 * spacing), i, j)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let (mut phi1, mut phi2) = (gi as f64 * spacing, gj as f64 * spacing);

    let mut step = spacing;
    while step >= PHASE_STEP_FLOOR {
        let mut moved = false;
        for (d1, d2) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let value = objective.value(phi1 + d1, phi2 + d2);
            if value > best {
                best = value;
                phi1 += d1;
                phi2 += d2;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(WPhaseOptimum {
        phi1: wrap_phase(phi1),
        phi2: wrap_phase(phi2),
        fidelity: best,
    })
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    GenuineGhzWitnessed,
    GenuineWWitnessed,
    WitnessInconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::GenuineGhzWitnessed => "genuine-GHZ-witnessed",
            Verdict::GenuineWWitnessed => "genuine-W-witnessed",
            Verdict::WitnessInconclusive => "witness-inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub fidelity_ghz: f64,
    pub fidelity_w_max: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub ghz_witness_passed: bool,
    pub w_witness_passed: bool,
    pub offdiag_norm: f64,
    pub verdict: Verdict,
}

pub fn classify(rho: &DensityMatrix) -> Result<ClassificationReport> {
    classify_with_margin(rho, 0.0)
}

/// Witness `k` passes iff `F_k > bound_k + margin`.
pub fn classify_with_margin(rho: &DensityMatrix, margin: f64) -> Result<ClassificationReport> {
    if rho.num_qubits() != 3 {
        return Err(Error::UnsupportedConfiguration(format!(
            "classification needs 3 qubits, got {}",
            rho.num_qubits()
        )));
    }
    let fidelity_ghz = fidelity_pure(rho, &TargetState::ghz(3))?;
    let w = optimize_w_phases(rho)?;
    let ghz_witness_passed = fidelity_ghz > GHZ_BOUND + margin + WITNESS_TOLERANCE;
    let w_witness_passed = w.fidelity > W_BOUND + margin + WITNESS_TOLERANCE;
    // GHZ and W targets have disjoint support, so at most one witness can fire.
    let verdict = if ghz_witness_passed {
        Verdict::GenuineGhzWitnessed
    } else if w_witness_passed {
        Verdict::GenuineWWitnessed
    } else {
        Verdict::WitnessInconclusive
    };
    Ok(ClassificationReport {
        fidelity_ghz,
        fidelity_w_max: w.fidelity,
        phi1: w.phi1,
        phi2: w.phi2,
        ghz_witness_passed,
        w_witness_passed,
        offdiag_norm: rho.offdiag_norm(),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::basis_projector;

    #[test]
    fn pure_fidelities() {
        let ghz = TargetState::ghz(3);
        let rho = ghz.density();
        assert!((fidelity_pure(&rho, &ghz).unwrap() - 1.0).abs() < 1e-12);
        let mix = DensityMatrix::mixture(&[(0.5, &basis_projector(3, 0)), (0.5, &basis_projector(3, 7))]).unwrap();
        assert!((fidelity_pure(&mix, &ghz).unwrap() - 0.5).abs() < 1e-12);
        let mm = DensityMatrix::maximally_mixed(3);
        assert!((fidelity_pure(&mm, &TargetState::w(0.3, 1.1)).unwrap() - 0.125).abs() < 1e-12);
        assert!(fidelity_pure(&DensityMatrix::maximally_mixed(2), &ghz).is_err());
    }

    #[test]
    fn mixed_fidelities() {
        let ghz = TargetState::ghz(3).density();
        assert!((fidelity_mixed(&ghz, &ghz).unwrap() - 1.0).abs() < 1e-8);
        let w = TargetState::w(0.0, 0.0);
        let overlap: Complex64 = TargetState::ghz(3)
            .vector()
            .iter()
            .zip(w.vector())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let f = fidelity_mixed(&ghz, &w.density()).unwrap();
        assert!((f - overlap.norm_sqr()).abs() < 1e-8);
        let p0 = basis_projector(1, 0);
        let p1 = basis_projector(1, 1);
        let half = DensityMatrix::mixture(&[(1.0, &p0), (1.0, &p1)]).unwrap();
        assert!((fidelity_mixed(&half, &p0).unwrap() - 0.5).abs() < 1e-8);
        assert!((fidelity_mixed(&p0, &half).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn phase_free_w_optimum_at_origin() {
        let opt = optimize_w_phases(&TargetState::w(0.0, 0.0).density()).unwrap();
        assert!((opt.fidelity - 1.0).abs() < 1e-12);
        assert!(opt.phi1.abs() < 1e-9 && opt.phi2.abs() < 1e-9);
    }

    #[test]
    fn flat_objective_breaks_ties_at_origin() {
        let mix = DensityMatrix::mixture(&[
            (1.0, &basis_projector(3, 1)),
            (1.0, &basis_projector(3, 2)),
            (1.0, &basis_projector(3, 4)),
        ])
        .unwrap();
        let opt = optimize_w_phases(&mix).unwrap();
        assert!((opt.fidelity - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!((opt.phi1, opt.phi2), (0.0, 0.0));
    }

    #[test]
    fn objective_matches_direct_fidelity() {
        let rho = DensityMatrix::mixture(&[
            (0.6, &TargetState::w(0.4, -1.3).density()),
            (0.4, &TargetState::ghz(3).density()),
        ])
        .unwrap();
        let obj = WPhaseObjective::new(&rho).unwrap();
        for (a, b) in [(0.0, 0.0), (1.0, 2.0), (-2.5, 0.7), (3.1, -3.1)] {
            let direct = fidelity_pure(&rho, &TargetState::w(a, b)).unwrap();
            assert!((obj.value(a, b) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_phase_range() {
        assert!((wrap_phase(1.79 * PI) + 0.21 * PI).abs() < 1e-12);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn classification_boundaries() {
        let ghz = classify(&TargetState::ghz(3).density()).unwrap();
        assert_eq!(ghz.verdict, Verdict::GenuineGhzWitnessed);
        let w = classify(&TargetState::w(0.2, 0.9).density()).unwrap();
        assert_eq!(w.verdict, Verdict::GenuineWWitnessed);
        assert!(!w.ghz_witness_passed);
        let with_margin = classify_with_margin(&TargetState::ghz(3).density(), 0.6).unwrap();
        assert_eq!(with_margin.verdict, Verdict::WitnessInconclusive);
        assert!(classify(&DensityMatrix::maximally_mixed(2)).is_err());
    }
}
