//! Many-particle states as weighted sums of product terms, and the
//! distributive expansion of the N-fold creation-operator product.
//!
//! The raw expansion keeps terms where several particles land in the same
//! detector, with no `√n!` occupation factors. Those terms are never physical
//! amplitudes here: they are discarded by no-bunching postselection before any
//! probability is formed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ONE, ZERO};
use crate::spin::Spin;
use crate::transform::TransformSpec;

/// One particle's detector, internal state and distinguishability label.
/// `detector` is `None` until the transformation has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SingleParticleKet {
    pub detector: Option<usize>,
    pub spin: Spin,
    pub label: usize,
}

/// Position `k` in `particles` is source particle `k`, which also carries label `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub amplitude: Complex64,
    pub particles: Vec<SingleParticleKet>,
}

impl ProductTerm {
    /// Detector of each particle, in particle order.
    pub fn detectors(&self) -> Option<Vec<usize>> {
        self.particles.iter().map(|p| p.detector).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedState {
    terms: Vec<ProductTerm>,
    num_particles: usize,
    num_modes: Option<usize>,
}

impl ExpandedState {
    /// Untransformed state: one term, amplitude 1, particle `k` with spin `spins[k]` and label `k`.
    pub fn initial(spins: &[Spin]) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::invalid("initial state needs at least one particle"));
        }
        let particles = spins
            .iter()
            .enumerate()
            .map(|(k, &spin)| SingleParticleKet {
                detector: None,
                spin,
                label: k,
            })
            .collect();
        Ok(Self {
            terms: vec![ProductTerm {
                amplitude: ONE,
                particles,
            }],
            num_particles: spins.len(),
            num_modes: None,
        })
    }

    pub fn is_transformed(&self) -> bool {
        self.num_modes.is_some()
    }

    pub fn num_particles(&self) -> usize {
        self.num_particles
    }

    pub fn num_modes(&self) -> Option<usize> {
        self.num_modes
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Expands `∏_k (Σ_j T_kj b†_kj)`: one term per choice function `particle → detector`
    /// with every `T_{k,j(k)} ≠ 0`, amplitude `∏_k T_{k,j(k)}`, spin `S_{k,j(k)}`.
    ///
    /// Terms come out in lexicographic order of the choice function, particle 0 most
    /// significant. Distinct choice functions give distinct assignments, so no merging occurs.
    pub fn apply_transform(&self, spec: &TransformSpec) -> Result<Self> {
        if self.is_transformed() {
            return Err(Error::AlreadyTransformed);
        }
        if spec.num_particles() != self.num_particles {
            return Err(Error::DimensionMismatch {
                expected: self.num_particles,
                found: spec.num_particles(),
            });
        }
        let n = self.num_particles;
        let m = spec.num_modes();
        let reachable: Vec<Vec<usize>> = (0..n)
            .map(|k| (0..m).filter(|&j| spec.amplitude(k, j) != ZERO).collect())
            .collect();

        let mut terms = Vec::with_capacity(reachable.iter().map(Vec::len).product());
        let mut choice = vec![0usize; n];
        'outer: loop {
            let mut amplitude = ONE;
            let mut particles = Vec::with_capacity(n);
            for k in 0..n {
                let j = reachable[k][choice[k]];
                amplitude *= spec.amplitude(k, j);
                let spin = spec.spin(k, j).expect("nonzero amplitude always has a spin");
                particles.push(SingleParticleKet {
                    detector: Some(j),
                    spin,
                    label: k,
                });
            }
            terms.push(ProductTerm { amplitude, particles });

            // odometer, last particle fastest
            for k in (0..n).rev() {
                choice[k] += 1;
                if choice[k] < reachable[k].len() {
                    continue 'outer;
                }
                choice[k] = 0;
            }
            break;
        }
        Ok(Self {
            terms,
            num_particles: n,
            num_modes: Some(m),
        })
    }

    /// Amplitude of the term placing particle `k` at `assignment[k] = (detector, spin)`; zero if absent.
    pub fn amplitude_of(&self, assignment: &[(usize, Spin)]) -> Complex64 {
        if assignment.len() != self.num_particles {
            return ZERO;
        }
        self.terms
            .iter()
            .find(|t| {
                t.particles
                    .iter()
                    .zip(assignment)
                    .all(|(p, &(d, s))| p.detector == Some(d) && p.spin == s)
            })
            .map_or(ZERO, |t| t.amplitude)
    }
}
