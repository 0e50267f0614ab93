//! Brute-force reference path for verification.
//!
//! Enumerates every bijection `particle → detector` for bra and ket
//! separately and forms each density-matrix entry from first principles. It
//! deliberately shares nothing with `expansion` or `reduce` beyond reading the
//! input matrices, so agreement between the two paths is meaningful.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reduce::GramMatrix;
use crate::spin::Spin;
use crate::transform::TransformSpec;

pub const MAX_BRUTE_PARTICLES: usize = 5;
pub const MAX_PERMANENT_SIZE: usize = 12;

/// One no-bunching outcome: particle `k` sits at `detector[k]` with `spin[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOutcome {
    pub detector: Vec<usize>,
    pub spin: Vec<Spin>,
    pub amplitude: Complex64,
}

impl LabeledOutcome {
    /// Spin-basis index, detector 0 most significant, written out independently.
    fn spin_index(&self) -> usize {
        let n = self.detector.len();
        let mut idx = 0;
        for k in 0..n {
            if self.spin[k] == Spin::Up {
                idx += 1 << (n - 1 - self.detector[k]);
            }
        }
        idx
    }

    /// Which particle sits at `det`.
    fn particle_at(&self, det: usize) -> usize {
        self.detector.iter().position(|&d| d == det).expect("bijection")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDensity {
    /// Normalized density matrix, row-major nested vectors.
    pub rho: Vec<Vec<Complex64>>,
    pub p_success: f64,
}

/// All `n!` permutations of `0..n`, generated by Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Every no-bunching outcome with nonzero amplitude `∏_k T[k][σ(k)]`.
pub fn no_bunching_outcomes(spec: &TransformSpec) -> Vec<LabeledOutcome> {
    let n = spec.num_particles();
    permutations(n)
        .into_iter()
        .filter_map(|sigma| {
            let mut amplitude = Complex64::new(1.0, 0.0);
            let mut spin = Vec::with_capacity(n);
            for (k, &d) in sigma.iter().enumerate() {
                amplitude *= spec.amplitude(k, d);
                spin.push(spec.spin(k, d)?);
            }
            Some(LabeledOutcome {
                detector: sigma,
                spin,
                amplitude,
            })
        })
        .collect()
}

/// Reference `(ρ, p_success)` for `N = M ≤ 5`.
pub fn brute_density_matrix(spec: &TransformSpec, gram: &GramMatrix) -> Result<OracleDensity> {
    let n = spec.num_particles();
    if n > MAX_BRUTE_PARTICLES {
        return Err(Error::SizeLimit(format!(
            "oracle enumerates N! outcomes and is limited to N <= {MAX_BRUTE_PARTICLES}, got {n}"
        )));
    }
    if spec.num_modes() != n {
        return Err(Error::UnsupportedConfiguration("oracle needs N = M".into()));
    }
    if gram.size() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: gram.size(),
        });
    }
    let outcomes = no_bunching_outcomes(spec);
    let dim = 1usize << n;
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for ket in &outcomes {
        for bra in &outcomes {
            // ⟨labels_bra|labels_ket⟩ as a product over ket particles: particle k
            // occupies detector σ(k), where the bra has particle τ⁻¹(σ(k)).
            let mut overlap = Complex64::new(1.0, 0.0);
            for k in 0..n {
                let bra_particle = bra.particle_at(ket.detector[k]);
                overlap *= gram.get(bra_particle, k);
            }
            rho[ket.spin_index()][bra.spin_index()] += ket.amplitude * bra.amplitude.conj() * overlap;
        }
    }
    let p_success: f64 = (0..dim).map(|i| rho[i][i].re).sum();
    if p_success <= 1e-15 {
        return Err(Error::PostselectionImpossible(p_success));
    }
    for row in rho.iter_mut() {
        for z in row.iter_mut() {
            *z /= p_success;
        }
    }
    Ok(OracleDensity { rho, p_success })
}

/// Ryser's formula with Gray-code subset updates, `O(2^K · K)`.
pub fn permanent(matrix: &[Vec<Complex64>]) -> Result<Complex64> {
    let k = matrix.len();
    if matrix.iter().any(|row| row.len() != k) {
        return Err(Error::invalid("permanent needs a square matrix"));
    }
    if k > MAX_PERMANENT_SIZE {
        return Err(Error::SizeLimit(format!(
            "permanent limited to {MAX_PERMANENT_SIZE}x{MAX_PERMANENT_SIZE}"
        )));
    }
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); k];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray = 0usize;
    for step in 1..(1usize << k) {
        let next = step ^ (step >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += matrix[i][col];
            } else {
                *s -= matrix[i][col];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        let sign = if (k - gray.count_ones() as usize).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        total += prod * sign;
    }
    Ok(total)
}

/// Definition-level permanent, `Σ_σ ∏_i A[i][σ(i)]`.
pub fn permanent_naive(matrix: &[Vec<Complex64>]) -> Complex64 {
    let k = matrix.len();
    permutations(k)
        .into_iter()
        .map(|sigma| {
            sigma
                .iter()
                .enumerate()
                .map(|(i, &j)| matrix[i][j])
                .product::<Complex64>()
        })
        .sum()
}
