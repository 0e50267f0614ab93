#![allow(dead_code)]

use overlap_entangle::transform::{self, GhzParams};
use overlap_entangle::{Complex64, DensityMatrix, GramMatrix, Spin, TransformSpec};
use rand::Rng;

pub const DDU: usize = 0b001;
pub const DUD: usize = 0b010;
pub const UDD: usize = 0b100;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Row-normalized `n × n` transformation with roughly a quarter of the
/// entries zeroed and random spins on the rest.
pub fn random_spec<R: Rng>(rng: &mut R, n: usize) -> TransformSpec {
    loop {
        let mut t = vec![vec![c(0.0, 0.0); n]; n];
        let mut s = vec![vec![None; n]; n];
        for k in 0..n {
            let keep = rng.random_range(0..n);
            for j in 0..n {
                if j == keep || rng.random_bool(0.75) {
                    t[k][j] = random_complex(rng);
                    s[k][j] = Some(if rng.random_bool(0.5) { Spin::Up } else { Spin::Down });
                }
            }
            let norm = t[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                continue;
            }
            for z in t[k].iter_mut() {
                *z /= norm;
            }
        }
        if let Ok(spec) = TransformSpec::custom(t, s) {
            return spec;
        }
    }
}

/// Gram matrix of `n` random unit vectors in `C^rank`.
pub fn random_gram<R: Rng>(rng: &mut R, n: usize, rank: usize) -> GramMatrix {
    let vecs: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            let v: Vec<Complex64> = (0..rank).map(|_| random_complex(rng)).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        c(1.0, 0.0)
                    } else {
                        vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a.conj() * b).sum()
                    }
                })
                .collect()
        })
        .collect();
    GramMatrix::from_rows(&rows).expect("Gram of unit vectors is valid")
}

pub fn random_ghz_params<R: Rng>(rng: &mut R) -> GhzParams {
    let mut pair = || {
        let a = random_complex(rng);
        let b = random_complex(rng);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (a / n, b / n)
    };
    let (alpha1, alpha2) = pair();
    let (beta2, beta3) = pair();
    let (gamma1, gamma3) = pair();
    GhzParams {
        alpha1,
        alpha2,
        beta2,
        beta3,
        gamma1,
        gamma3,
    }
}

/// Closed-form GHZ-scheme density matrix: populations |α₁β₂γ₃|², |α₂β₃γ₁|²
/// and coherence α₁β₂γ₃(α₂β₃γ₁)* ⟨d₃|d₁⟩⟨d₁|d₂⟩⟨d₂|d₃⟩.
pub fn ghz_closed_form(p: &GhzParams, gram: &GramMatrix) -> (Vec<Vec<Complex64>>, f64) {
    let a = p.alpha1 * p.beta2 * p.gamma3;
    let b = p.alpha2 * p.beta3 * p.gamma1;
    let overlap = gram.get(2, 0) * gram.get(0, 1) * gram.get(1, 2);
    let mut rho = vec![vec![c(0.0, 0.0); 8]; 8];
    rho[0][0] = c(a.norm_sqr(), 0.0);
    rho[7][7] = c(b.norm_sqr(), 0.0);
    rho[0][7] = a * b.conj() * overlap;
    rho[7][0] = rho[0][7].conj();
    normalize(rho)
}

fn normalize(mut rho: Vec<Vec<Complex64>>) -> (Vec<Vec<Complex64>>, f64) {
    let p: f64 = (0..rho.len()).map(|i| rho[i][i].re).sum();
    for row in rho.iter_mut() {
        for z in row.iter_mut() {
            *z /= p;
        }
    }
    (rho, p)
}

fn add_projector(rho: &mut [Vec<Complex64>], psi: &[(usize, Complex64)]) {
    for &(i, a) in psi {
        for &(j, b) in psi {
            rho[i][j] += a * b.conj();
        }
    }
}

/// Closed-form W-scheme density matrices for the four distinguishability
/// cases, written in the tritter entries `rows[particle][detector]`.
pub fn w_closed_form(rows: &[[Complex64; 3]; 3], case: u8) -> (Vec<Vec<Complex64>>, f64) {
    let (a, b, g) = (rows[0], rows[1], rows[2]);
    let mut rho = vec![vec![c(0.0, 0.0); 8]; 8];
    let t123 = a[0] * b[1] * g[2];
    let t132 = a[0] * b[2] * g[1];
    let t213 = a[1] * b[0] * g[2];
    let t231 = a[1] * b[2] * g[0];
    let t312 = a[2] * b[0] * g[1];
    let t321 = a[2] * b[1] * g[0];
    match case {
        1 => add_projector(&mut rho, &[(DDU, t123 + t213), (DUD, t132 + t312), (UDD, t231 + t321)]),
        2 => {
            add_projector(&mut rho, &[(DDU, t123), (UDD, t321)]);
            add_projector(&mut rho, &[(DUD, t132), (UDD, t231)]);
            add_projector(&mut rho, &[(DDU, t213), (DUD, t312)]);
        }
        3 => {
            rho[DDU][DDU] = c((t123 + t213).norm_sqr(), 0.0);
            rho[DUD][DUD] = c((t132 + t312).norm_sqr(), 0.0);
            rho[UDD][UDD] = c((t231 + t321).norm_sqr(), 0.0);
        }
        4 => {
            rho[DDU][DDU] = c(t123.norm_sqr() + t213.norm_sqr(), 0.0);
            rho[DUD][DUD] = c(t132.norm_sqr() + t312.norm_sqr(), 0.0);
            rho[UDD][UDD] = c(t231.norm_sqr() + t321.norm_sqr(), 0.0);
        }
        _ => panic!("cases are 1..=4"),
    }
    normalize(rho)
}

pub fn w_case_gram(case: u8) -> GramMatrix {
    match case {
        1 => GramMatrix::from_classes(&[0, 0, 0]),
        2 => GramMatrix::from_classes(&[0, 1, 0]),
        3 => GramMatrix::from_classes(&[0, 0, 1]),
        4 => GramMatrix::from_classes(&[0, 1, 2]),
        _ => panic!("cases are 1..=4"),
    }
}

pub fn balanced_w() -> TransformSpec {
    transform::w_preset(transform::balanced_tritter_rows()).unwrap()
}

pub fn max_entry_diff(rho: &DensityMatrix, reference: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in reference.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            worst = worst.max((rho.get(i, j) - z).norm());
        }
    }
    worst
}

pub fn assert_physical(rho: &DensityMatrix) {
    rho.check_invariants()
        .unwrap_or_else(|e| panic!("invariants violated: {e}"));
}
