//! Pauli-basis state tomography: a seeded forward simulation of finite-shot
//! counts, linear inversion, and a diluted `RρR` maximum-likelihood estimator.
//!
//! Each qubit is measured in an X, Y or Z eigenbasis with the +1 eigenvector
//! listed first, so outcome bit 0 means +1 (and `down`/H for Z). Outcome
//! bitstrings are written detector 0 first.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    /// Eigenvectors, +1 first.
    fn eigenvectors(self) -> [[Complex64; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (r, i) = (Complex64::new(h, 0.0), Complex64::new(0.0, h));
        match self {
            PauliAxis::X => [[r, r], [r, -r]],
            PauliAxis::Y => [[r, i], [r, -i]],
            PauliAxis::Z => [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    fn matrix(self) -> CMatrix {
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliAxis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    fn symbol(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// One Pauli axis per qubit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasurementSetting(pub Vec<PauliAxis>);

impl MeasurementSetting {
    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// Product measurement vectors, indexed by outcome bitstring.
    fn outcome_vectors(&self) -> Vec<Vec<Complex64>> {
        let n = self.0.len();
        (0..1usize << n)
            .map(|outcome| {
                let factors: Vec<[Complex64; 2]> = self
                    .0
                    .iter()
                    .enumerate()
                    .map(|(k, axis)| axis.eigenvectors()[(outcome >> (n - 1 - k)) & 1])
                    .collect();
                linalg::kron_vectors(&factors)
            })
            .collect()
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|a| write!(f, "{}", a.symbol()))
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::invalid("empty measurement setting"));
        }
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(PauliAxis::X),
                'Y' => Ok(PauliAxis::Y),
                'Z' => Ok(PauliAxis::Z),
                other => Err(Error::invalid(format!("unknown Pauli axis '{other}' in setting '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(MeasurementSetting)
    }
}

/// All `3^n` Pauli settings in lexicographic X < Y < Z order.
pub fn all_pauli_settings(n: usize) -> Vec<MeasurementSetting> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<PauliAxis>| {
                PauliAxis::ALL.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(MeasurementSetting).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingCounts {
    pub setting: MeasurementSetting,
    /// Indexed by outcome bitstring.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    pub num_qubits: usize,
    pub shots_per_setting: u64,
    pub seed: Option<u64>,
    pub entries: Vec<SettingCounts>,
}

impl CountsTable {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::invalid("counts table needs at least one qubit"));
        }
        if self.entries.is_empty() {
            return Err(Error::invalid("counts table has no settings"));
        }
        for e in &self.entries {
            if e.setting.num_qubits() != self.num_qubits {
                return Err(Error::invalid(format!(
                    "setting {} does not have {} qubits",
                    e.setting, self.num_qubits
                )));
            }
            if e.counts.len() != 1 << self.num_qubits {
                return Err(Error::invalid(format!(
                    "setting {} has the wrong outcome count",
                    e.setting
                )));
            }
            let total: u64 = e.counts.iter().sum();
            if total != self.shots_per_setting {
                return Err(Error::invalid(format!(
                    "setting {} counts sum to {total}, expected {}",
                    e.setting, self.shots_per_setting
                )));
            }
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Result<Frequencies> {
        self.validate()?;
        let shots = self.shots_per_setting as f64;
        Ok(Frequencies {
            num_qubits: self.num_qubits,
            entries: self
                .entries
                .iter()
                .map(|e| (e.setting.clone(), e.counts.iter().map(|&c| c as f64 / shots).collect()))
                .collect(),
        })
    }
}

/// Relative outcome frequencies per setting; exact Born probabilities model infinite statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequencies {
    pub num_qubits: usize,
    pub entries: Vec<(MeasurementSetting, Vec<f64>)>,
}

/// Born-rule outcome probabilities `tr(ρ Π_o)` for one setting.
pub fn born_probabilities(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<Vec<f64>> {
    if setting.num_qubits() != rho.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rho.num_qubits(),
            found: setting.num_qubits(),
        });
    }
    Ok(setting
        .outcome_vectors()
        .iter()
        .map(|v| linalg::expectation(rho.matrix(), v).re.max(0.0))
        .collect())
}

pub fn exact_frequencies(rho: &DensityMatrix, settings: &[MeasurementSetting]) -> Result<Frequencies> {
    let entries = settings
        .iter()
        .map(|s| Ok((s.clone(), born_probabilities(rho, s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Frequencies {
        num_qubits: rho.num_qubits(),
        entries,
    })
}

/// Multinomial sampling of `shots` outcomes per setting. Setting `i` draws from
/// its own ChaCha8 stream `(seed, i)`, so each setting is reproducible on its own.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    if settings.is_empty() {
        return Err(Error::invalid("no measurement settings given"));
    }
    rho.check_invariants()?;
    let mut entries = Vec::with_capacity(settings.len());
    for (index, setting) in settings.iter().enumerate() {
        let probs = born_probabilities(rho, setting)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        entries.push(SettingCounts {
            setting: setting.clone(),
            counts: sample_multinomial(&probs, shots, &mut rng),
        });
    }
    Ok(CountsTable {
        num_qubits: rho.num_qubits(),
        shots_per_setting: shots,
        seed: Some(seed),
        entries,
    })
}

/// Sequential conditional binomials.
fn sample_multinomial(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .expect("probability within [0, 1]")
            .sample(rng);
        counts[i] = draw;
        remaining -= draw;
        mass -= p;
    }
    counts
}

/// Counts that reproduce the Born probabilities when `shots · p` is integral;
/// otherwise rounded by largest remainder.
pub fn expected_counts(rho: &DensityMatrix, settings: &[MeasurementSetting], shots: u64) -> Result<CountsTable> {
    let freqs = exact_frequencies(rho, settings)?;
    let entries = freqs
        .entries
        .into_iter()
        .map(|(setting, probs)| {
            let scaled: Vec<f64> = probs.iter().map(|p| p * shots as f64).collect();
            let mut counts: Vec<u64> = scaled.iter().map(|x| (x + 1e-9).floor() as u64).collect();
            let mut deficit = shots.saturating_sub(counts.iter().sum());
            let mut order: Vec<usize> = (0..scaled.len()).collect();
            order.sort_by(|&a, &b| {
                let ra = scaled[a] - counts[a] as f64;
                let rb = scaled[b] - counts[b] as f64;
                rb.total_cmp(&ra).then(a.cmp(&b))
            });
            for &i in order.iter().cycle() {
                if deficit == 0 {
                    break;
                }
                counts[i] += 1;
                deficit -= 1;
            }
            SettingCounts { setting, counts }
        })
        .collect();
    Ok(CountsTable {
        num_qubits: rho.num_qubits(),
        shots_per_setting: shots,
        seed: None,
        entries,
    })
}

/// Linear inversion `ρ̂ = 2^{-N} Σ_P ⟨P⟩ P`. Hermitian with unit trace, not necessarily PSD.
pub fn reconstruct_linear(counts: &CountsTable) -> Result<CMatrix> {
    reconstruct_linear_frequencies(&counts.frequencies()?)
}

pub fn reconstruct_linear_frequencies(freqs: &Frequencies) -> Result<CMatrix> {
    let n = freqs.num_qubits;
    let dim = 1usize << n;
    let mut rho = CMatrix::zeros(dim, dim);
    // Pauli strings as base-4 digits: 0 = I, 1 = X, 2 = Y, 3 = Z.
    for code in 0..(1usize << (2 * n)) {
        let ops: Vec<Option<PauliAxis>> = (0..n)
            .map(|k| match (code >> (2 * (n - 1 - k))) & 3 {
                0 => None,
                1 => Some(PauliAxis::X),
                2 => Some(PauliAxis::Y),
                _ => Some(PauliAxis::Z),
            })
            .collect();
        let expectation = if ops.iter().all(Option::is_none) {
            1.0
        } else {
            let mut sum = 0.0;
            let mut hits = 0usize;
            for (setting, f) in &freqs.entries {
                if !ops.iter().zip(&setting.0).all(|(op, ax)| op.is_none_or(|o| o == *ax)) {
                    continue;
                }
                hits += 1;
                for (outcome, &p) in f.iter().enumerate() {
                    let parity = ops
                        .iter()
                        .enumerate()
                        .filter(|(_, op)| op.is_some())
                        .map(|(k, _)| (outcome >> (n - 1 - k)) & 1)
                        .sum::<usize>();
                    sum += if parity % 2 == 0 { p } else { -p };
                }
            }
            if hits == 0 {
                let name: String = ops.iter().map(|o| o.map_or('I', PauliAxis::symbol)).collect();
                return Err(Error::IncompleteSettings(name));
            }
            sum / hits as f64
        };
        if expectation == 0.0 {
            continue;
        }
        let pauli = ops.iter().fold(DMatrix::from_element(1, 1, ONE), |acc: CMatrix, op| {
            let m = op.map_or_else(|| CMatrix::identity(2, 2), PauliAxis::matrix);
            acc.kronecker(&m)
        });
        rho += pauli * Complex64::new(expectation / dim as f64, 0.0);
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iters: usize,
    /// Stop once an accepted step gains less log-likelihood than this.
    pub tol: f64,
    /// Mixing weight `t` in the step operator `(1 − t) I + t R`; `t = 1` is plain `RρR`.
    pub dilution: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-13,
            dilution: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Log-likelihood after each accepted iteration.
    pub history: Vec<f64>,
}

pub fn reconstruct_mle(counts: &CountsTable, options: &MleOptions) -> Result<MleResult> {
    reconstruct_mle_frequencies(&counts.frequencies()?, options)
}

struct Projector {
    vector: Vec<Complex64>,
    freq: f64,
}

fn log_likelihood(rho: &CMatrix, projectors: &[Projector]) -> (f64, Vec<f64>) {
    let probs: Vec<f64> = projectors
        .iter()
        .map(|p| linalg::expectation(rho, &p.vector).re.max(1e-300))
        .collect();
    let ll = projectors.iter().zip(&probs).map(|(p, &q)| p.freq * q.ln()).sum();
    (ll, probs)
}

/// Diluted `RρR` iteration from the maximally mixed state. A step that would
/// lower the likelihood is retried with half the dilution weight, so the
/// recorded likelihood never decreases.
pub fn reconstruct_mle_frequencies(freqs: &Frequencies, options: &MleOptions) -> Result<MleResult> {
    if !(options.dilution > 0.0 && options.dilution <= 1.0) {
        return Err(Error::invalid(format!(
            "dilution must be in (0, 1], got {}",
            options.dilution
        )));
    }
    if freqs.entries.is_empty() {
        return Err(Error::invalid("no measurement settings given"));
    }
    let n = freqs.num_qubits;
    let dim = 1usize << n;
    let num_settings = freqs.entries.len() as f64;
    // The linear estimator's completeness check doubles as input validation.
    reconstruct_linear_frequencies(freqs)?;

    let mut projectors = Vec::new();
    for (setting, f) in &freqs.entries {
        if setting.num_qubits() != n || f.len() != dim {
            return Err(Error::invalid(format!("setting {setting} does not match {n} qubits")));
        }
        let total: f64 = f.iter().sum();
        if f.iter().any(|x| x.is_nan() || *x < 0.0) || total <= 0.0 {
            return Err(Error::invalid(format!("setting {setting} has invalid frequencies")));
        }
        for (vector, &x) in setting.outcome_vectors().into_iter().zip(f) {
            if x > 0.0 {
                projectors.push(Projector {
                    vector,
                    freq: x / total / num_settings,
                });
            }
        }
    }

    let identity = CMatrix::identity(dim, dim);
    let mut rho = identity.clone() / Complex64::new(dim as f64, 0.0);
    let (mut ll, mut probs) = log_likelihood(&rho, &projectors);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iters {
        iterations += 1;
        let mut r = CMatrix::zeros(dim, dim);
        for (p, &q) in projectors.iter().zip(&probs) {
            let w = Complex64::new(p.freq / q, 0.0);
            for i in 0..dim {
                let vi = p.vector[i] * w;
                for j in 0..dim {
                    r[(i, j)] += vi * p.vector[j].conj();
                }
            }
        }
        let mut t = options.dilution;
        let mut accepted = None;
        for _ in 0..40 {
            let step = &identity * Complex64::new(1.0 - t, 0.0) + &r * Complex64::new(t, 0.0);
            let mut next = &step * &rho * step.adjoint();
            next = linalg::hermitize(&next);
            let tr = linalg::trace(&next).re;
            next /= Complex64::new(tr, 0.0);
            let (next_ll, next_probs) = log_likelihood(&next, &projectors);
            if next_ll >= ll {
                accepted = Some((next, next_ll, next_probs));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_ll, next_probs)) = accepted else {
            converged = true;
            break;
        };
        let gain = next_ll - ll;
        rho = next;
        ll = next_ll;
        probs = next_probs;
        history.push(ll);
        if gain < options.tol {
            converged = true;
            break;
        }
    }

    let rho = DensityMatrix::try_new(linalg::hermitize(&rho))?;
    Ok(MleResult {
        rho,
        iterations,
        log_likelihood: ll,
        converged,
        history,
    })
}

const COUNTS_MAGIC: &str = "# overlap-entangle counts v1";

/// Delimited text: a comment header with `qubits`, `shots` and optional `seed`,
/// then `setting,outcome,count` rows.
pub fn write_counts(table: &CountsTable) -> String {
    let mut out = String::new();
    out.push_str(COUNTS_MAGIC);
    out.push('\n');
    out.push_str(&format!(
        "# qubits={} shots={}",
        table.num_qubits, table.shots_per_setting
    ));
    if let Some(seed) = table.seed {
        out.push_str(&format!(" seed={seed}"));
    }
    out.push('\n');
    out.push_str("# outcome bit k is qubit/detector k; 0 is the +1 eigenvector of the setting's axis\n");
    out.push_str("setting,outcome,count\n");
    let n = table.num_qubits;
    for e in &table.entries {
        for (o, c) in e.counts.iter().enumerate() {
            out.push_str(&format!("{},{:0width$b},{}\n", e.setting, o, c, width = n));
        }
    }
    out
}

pub fn parse_counts(text: &str) -> Result<CountsTable> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut qubits: Option<usize> = None;
    let mut shots: Option<u64> = None;
    let mut seed: Option<u64> = None;
    let mut saw_columns = false;
    let mut rows: BTreeMap<MeasurementSetting, (Vec<u64>, usize, usize)> = BTreeMap::new();
    let mut order: Vec<MeasurementSetting> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else {
                    continue;
                };
                let parse = |v: &str| {
                    v.parse::<u64>()
                        .map_err(|_| err(line_no, format!("header field '{key}' is not an integer: '{v}'")))
                };
                match key {
                    "qubits" => qubits = Some(parse(value)? as usize),
                    "shots" => shots = Some(parse(value)?),
                    "seed" => seed = Some(parse(value)?),
                    _ => {}
                }
            }
            continue;
        }
        if !saw_columns {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["setting", "outcome", "count"] {
                return Err(err(
                    line_no,
                    format!("expected column header 'setting,outcome,count', found '{line}'"),
                ));
            }
            saw_columns = true;
            continue;
        }
        let n = qubits.ok_or_else(|| err(line_no, "data row before 'qubits=' header".into()))?;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(
                line_no,
                format!("expected 3 comma-separated fields, found {}", fields.len()),
            ));
        }
        let setting: MeasurementSetting = fields[0].parse().map_err(|e: Error| err(line_no, e.to_string()))?;
        if setting.num_qubits() != n {
            return Err(err(
                line_no,
                format!("setting '{}' does not have {n} qubits", fields[0]),
            ));
        }
        if fields[1].len() != n || !fields[1].chars().all(|c| c == '0' || c == '1') {
            return Err(err(line_no, format!("outcome '{}' is not a {n}-bit string", fields[1])));
        }
        let outcome = usize::from_str_radix(fields[1], 2).expect("checked binary digits");
        let count: u64 = fields[2]
            .parse()
            .map_err(|_| err(line_no, format!("count '{}' is not a nonnegative integer", fields[2])))?;
        let entry = rows.entry(setting.clone()).or_insert_with(|| {
            order.push(setting.clone());
            (vec![0; 1 << n], 0, line_no)
        });
        if entry.1 & (1 << outcome) != 0 {
            return Err(err(
                line_no,
                format!("duplicate row for setting {setting} outcome {}", fields[1]),
            ));
        }
        entry.0[outcome] = count;
        entry.1 |= 1 << outcome;
        entry.2 = line_no;
    }

    let n = qubits.ok_or_else(|| err(last_line, "missing 'qubits=' header".into()))?;
    let shots = shots.ok_or_else(|| err(last_line, "missing 'shots=' header".into()))?;
    if !saw_columns || rows.is_empty() {
        return Err(err(last_line, "no data rows".into()));
    }
    let mut entries = Vec::with_capacity(order.len());
    for setting in order {
        let (counts, _, line) = rows.remove(&setting).expect("inserted above");
        let total: u64 = counts.iter().sum();
        if total != shots {
            return Err(err(
                line,
                format!("setting {setting} counts sum to {total}, expected shots={shots} (file truncated?)"),
            ));
        }
        entries.push(SettingCounts { setting, counts });
    }
    let table = CountsTable {
        num_qubits: n,
        shots_per_setting: shots,
        seed,
        entries,
    };
    table.validate().map_err(|e| err(last_line, e.to_string()))?;
    Ok(table)
}
