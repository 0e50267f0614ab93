//! Transformation specifications: the amplitude matrix `T` that spreads each
//! particle over the detectors, and the matrix `S` of internal states each
//! particle carries into each detector.
//!
//! Only per-row normalization is enforced. `T` need not be unitary; the GHZ
//! preset with balanced entries has non-orthogonal columns.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};
use crate::spin::Spin;
use num_complex::Complex64;

/// Tolerance on `Σ_j |T_ij|² = 1`.
pub const ROW_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    amplitudes: CMatrix,
    spins: Vec<Vec<Option<Spin>>>,
}

impl TransformSpec {
    /// Validates and builds a spec. `spins[i][j]` is `None` exactly where `t[i][j]` is zero.
    pub fn custom(t: Vec<Vec<Complex64>>, spins: Vec<Vec<Option<Spin>>>) -> Result<Self> {
        let n = t.len();
        if n == 0 {
            return Err(Error::invalid("transformation needs at least one particle row"));
        }
        let m = t[0].len();
        if m == 0 {
            return Err(Error::invalid("transformation needs at least one detector column"));
        }
        if t.iter().any(|row| row.len() != m) {
            return Err(Error::invalid("amplitude matrix rows have unequal lengths"));
        }
        if spins.len() != n || spins.iter().any(|row| row.len() != m) {
            return Err(Error::invalid(format!(
                "spin matrix must be {n}x{m} to match the amplitude matrix"
            )));
        }
        for (i, row) in t.iter().enumerate() {
            if row.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite amplitude")));
            }
            let norm: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            if norm == 0.0 {
                return Err(Error::invalid(format!(
                    "row {i} is all zero: particle {i} never reaches a detector"
                )));
            }
            if (norm - 1.0).abs() > ROW_NORM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "row {i} is not normalized: sum of |T_ij|^2 = {norm}"
                )));
            }
            for (j, z) in row.iter().enumerate() {
                let zero = *z == ZERO;
                match (zero, spins[i][j]) {
                    (true, Some(_)) => {
                        return Err(Error::invalid(format!("spin ({i},{j}) is set but T_{i}{j} is zero")))
                    }
                    (false, None) => {
                        return Err(Error::invalid(format!(
                            "spin ({i},{j}) is unused but T_{i}{j} is nonzero"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let amplitudes = CMatrix::from_fn(n, m, |i, j| t[i][j]);
        Ok(Self { amplitudes, spins })
    }

    /// Like [`custom`](Self::custom) but fills `S` from a full spin pattern,
    /// marking zero-amplitude entries unused.
    pub fn with_spin_pattern(t: Vec<Vec<Complex64>>, pattern: &[Vec<Spin>]) -> Result<Self> {
        if pattern.len() != t.len() {
            return Err(Error::invalid("spin pattern row count does not match amplitudes"));
        }
        let spins = t
            .iter()
            .zip(pattern)
            .map(|(row, srow)| {
                if row.len() != srow.len() {
                    return Err(Error::invalid("spin pattern column count does not match amplitudes"));
                }
                Ok(row.iter().zip(srow).map(|(z, &s)| (*z != ZERO).then_some(s)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::custom(t, spins)
    }

    pub fn num_particles(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn amplitude(&self, particle: usize, mode: usize) -> Complex64 {
        self.amplitudes[(particle, mode)]
    }

    pub fn spin(&self, particle: usize, mode: usize) -> Option<Spin> {
        self.spins[particle][mode]
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn spins(&self) -> &[Vec<Option<Spin>>] {
        &self.spins
    }

    /// Element-wise `|T_ij|²`.
    pub fn intensity_matrix(&self) -> CMatrix {
        self.amplitudes.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.num_particles())
            .map(|i| self.amplitudes.row(i).iter().copied().collect())
            .collect()
    }
}

/// Amplitudes of the GHZ routing: particle 1 splits over detectors 1 and 2,
/// particle 2 over 2 and 3, particle 3 over 1 and 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzParams {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub beta2: Complex64,
    pub beta3: Complex64,
    pub gamma1: Complex64,
    pub gamma3: Complex64,
}

impl GhzParams {
    pub fn balanced() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            alpha1: h,
            alpha2: h,
            beta2: h,
            beta3: h,
            gamma1: h,
            gamma3: h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("alpha", self.alpha1, self.alpha2),
            ("beta", self.beta2, self.beta3),
            ("gamma", self.gamma1, self.gamma3),
        ];
        for (name, a, b) in pairs {
            let norm = a.norm_sqr() + b.norm_sqr();
            if (norm - 1.0).abs() > ROW_NORM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "{name} amplitudes are not normalized: |{name}|^2 sum = {norm}"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        Some(match name {
            "alpha1" => self.alpha1,
            "alpha2" => self.alpha2,
            "beta2" => self.beta2,
            "beta3" => self.beta3,
            "gamma1" => self.gamma1,
            "gamma3" => self.gamma3,
            _ => return None,
        })
    }

    /// Sets `name` to the real value `magnitude` and its row partner to
    /// `sqrt(1 - magnitude²)`, keeping the row normalized.
    pub fn set_with_partner(&mut self, name: &str, magnitude: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&magnitude) {
            return Err(Error::invalid(format!(
                "amplitude magnitude {magnitude} for {name} is outside [0, 1]"
            )));
        }
        let value = Complex64::new(magnitude, 0.0);
        let partner = Complex64::new((1.0 - magnitude * magnitude).max(0.0).sqrt(), 0.0);
        let (slot, other) = match name {
            "alpha1" => (&mut self.alpha1, &mut self.alpha2),
            "alpha2" => (&mut self.alpha2, &mut self.alpha1),
            "beta2" => (&mut self.beta2, &mut self.beta3),
            "beta3" => (&mut self.beta3, &mut self.beta2),
            "gamma1" => (&mut self.gamma1, &mut self.gamma3),
            "gamma3" => (&mut self.gamma3, &mut self.gamma1),
            _ => return Err(Error::invalid(format!("unknown GHZ amplitude '{name}'"))),
        };
        *slot = value;
        *other = partner;
        Ok(())
    }
}

/// 3×3 GHZ spec:
/// rows (α₁↓, α₂↑, 0), (0, β₂↓, β₃↑), (γ₁↑, 0, γ₃↓).
pub fn ghz_preset(p: &GhzParams) -> Result<TransformSpec> {
    p.validate()?;
    let t = vec![
        vec![p.alpha1, p.alpha2, ZERO],
        vec![ZERO, p.beta2, p.beta3],
        vec![p.gamma1, ZERO, p.gamma3],
    ];
    use Spin::{Down as D, Up as U};
    let pattern = vec![vec![D, U, D], vec![D, D, U], vec![U, D, D]];
    TransformSpec::with_spin_pattern(t, &pattern)
}

/// 3×3 W spec with a full amplitude matrix; particles 1 and 2 stay down, particle 3 stays up.
pub fn w_preset(rows: [[Complex64; 3]; 3]) -> Result<TransformSpec> {
    let t: Vec<Vec<Complex64>> = rows.iter().map(|r| r.to_vec()).collect();
    use Spin::{Down as D, Up as U};
    let pattern = vec![vec![D, D, D], vec![D, D, D], vec![U, U, U]];
    TransformSpec::with_spin_pattern(t, &pattern)
}

/// Symmetric tritter with every amplitude `1/√3`.
pub fn balanced_tritter_rows() -> [[Complex64; 3]; 3] {
    [[Complex64::new(1.0 / 3f64.sqrt(), 0.0); 3]; 3]
}

/// Tritter with DFT phases `ω^{jk}/√3`, `ω = exp(2πi/3)`.
pub fn dft_tritter_rows() -> [[Complex64; 3]; 3] {
    let mut rows = [[ZERO; 3]; 3];
    for (j, row) in rows.iter_mut().enumerate() {
        for (k, z) in row.iter_mut().enumerate() {
            *z = Complex64::from_polar(1.0 / 3f64.sqrt(), 2.0 * PI * (j * k) as f64 / 3.0);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use Spin::{Down as D, Up as U};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ghz_balanced_structure() {
        let spec = ghz_preset(&GhzParams::balanced()).unwrap();
        assert_eq!((spec.num_particles(), spec.num_modes()), (3, 3));
        let expected_spins = [
            [Some(D), Some(U), None],
            [None, Some(D), Some(U)],
            [Some(U), None, Some(D)],
        ];
        for (i, row) in expected_spins.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                assert_eq!(spec.spin(i, j), s);
                assert_eq!(spec.amplitude(i, j) != ZERO, s.is_some());
            }
        }
        let nonzero = spec.amplitudes().iter().filter(|z| **z != ZERO).count();
        assert_eq!(nonzero, 6);
    }

    #[test]
    fn ghz_passes_validation_despite_non_unitarity() {
        let spec = ghz_preset(&GhzParams::balanced()).unwrap();
        let t = spec.amplitudes();
        let gram = t.adjoint() * t;
        let identity = CMatrix::identity(3, 3);
        assert!((gram - identity).norm() > 0.1);
    }

    #[test]
    fn ghz_deterministic_routing_marks_unused() {
        let mut p = GhzParams::balanced();
        p.alpha1 = c(1.0);
        p.alpha2 = ZERO;
        let spec = ghz_preset(&p).unwrap();
        assert_eq!(spec.spin(0, 1), None);
        assert_eq!(spec.spin(0, 0), Some(D));
    }

    #[test]
    fn ghz_unbalanced_and_invalid() {
        let mut p = GhzParams::balanced();
        p.alpha1 = c(0.6);
        p.alpha2 = c(0.8);
        assert!(ghz_preset(&p).is_ok());
        p.alpha2 = c(0.7);
        assert!(matches!(ghz_preset(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn partner_setter_keeps_normalization() {
        let mut p = GhzParams::balanced();
        p.set_with_partner("beta3", 0.6).unwrap();
        assert_eq!(p.beta3, c(0.6));
        assert!((p.beta2.re - 0.8).abs() < 1e-15);
        assert!(p.set_with_partner("delta1", 0.5).is_err());
        assert!(p.set_with_partner("alpha1", 1.5).is_err());
    }

    #[test]
    fn w_presets() {
        let spec = w_preset(balanced_tritter_rows()).unwrap();
        for j in 0..3 {
            assert_eq!(spec.spin(0, j), Some(D));
            assert_eq!(spec.spin(1, j), Some(D));
            assert_eq!(spec.spin(2, j), Some(U));
        }
        let dft = w_preset(dft_tritter_rows()).unwrap();
        for row in dft.rows() {
            let norm: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let t = dft.amplitudes();
        assert!((t.adjoint() * t - CMatrix::identity(3, 3)).norm() < 1e-12);

        let one = c(1.0);
        let perm = [[one, ZERO, ZERO], [ZERO, one, ZERO], [ZERO, ZERO, one]];
        let spec = w_preset(perm).unwrap();
        assert_eq!(spec.spin(0, 1), None);
    }

    #[test]
    fn w_rejects_bad_row() {
        let mut rows = balanced_tritter_rows();
        rows[1][2] = c(0.9);
        assert!(w_preset(rows).is_err());
    }

    #[test]
    fn custom_two_particle_scheme() {
        let h = c(FRAC_1_SQRT_2);
        let spec = TransformSpec::custom(
            vec![vec![h, h], vec![h, -h]],
            vec![vec![Some(D), Some(D)], vec![Some(U), Some(U)]],
        )
        .unwrap();
        assert_eq!(spec.num_particles(), 2);
    }

    #[test]
    fn custom_rejections() {
        let h = c(FRAC_1_SQRT_2);
        let not_normalized = TransformSpec::custom(vec![vec![h, c(0.5)]], vec![vec![Some(D), Some(U)]]);
        assert!(not_normalized.is_err());
        let zero_row = TransformSpec::custom(
            vec![vec![h, h], vec![ZERO, ZERO]],
            vec![vec![Some(D), Some(D)], vec![None, None]],
        );
        let msg = zero_row.unwrap_err().to_string();
        assert!(msg.contains("all zero"), "{msg}");
        let spin_mismatch = TransformSpec::custom(vec![vec![c(1.0), ZERO]], vec![vec![Some(D), Some(U)]]);
        assert!(spin_mismatch.is_err());
        let ragged = TransformSpec::custom(
            vec![vec![c(1.0)], vec![h, h]],
            vec![vec![Some(D)], vec![Some(D), Some(D)]],
        );
        assert!(ragged.is_err());
    }
}
