//! Experiment configuration files (JSON).

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::error::Error;
use crate::reduce::{DelayModel, GramMatrix};
use crate::spin::Spin;
use crate::tomography::{all_pauli_settings, MeasurementSetting};
use crate::transform::{self, GhzParams, TransformSpec};

/// A complex number written as `0.5`, `[re, im]` or `{"re": .., "im": ..}`.
/// Always serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
    Object {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) | ComplexValue::Object { re, im } => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue::Pair([z.re, z.im])
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let z = self.value();
        [z.re, z.im].serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TritterKind {
    #[default]
    Balanced,
    Dft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum TransformConfig {
    Ghz {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha1: Option<ComplexValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha2: Option<ComplexValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta2: Option<ComplexValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta3: Option<ComplexValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma1: Option<ComplexValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma3: Option<ComplexValue>,
    },
    W {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tritter: Option<TritterKind>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<Vec<ComplexValue>>>,
    },
    Custom {
        t: Vec<Vec<ComplexValue>>,
        /// `"down"`, `"up"` or `"unused"` per entry.
        s: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DistinguishabilityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<ComplexValue>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delays: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub shots: u64,
    pub seed: u64,
    /// Defaults to all `3^N` Pauli settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Free-form label echoed into the report, e.g. `"II"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub transform: TransformConfig,
    pub distinguishability: DistinguishabilityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomography: Option<TomographyConfig>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub witness_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Config after validation, with every owning module's invariants checked.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub raw: ExperimentConfig,
    pub spec: TransformSpec,
    pub gram: GramMatrix,
    pub settings: Option<Vec<MeasurementSetting>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CliError::config(
                origin,
                if field == "." { "(root)".to_string() } else { field },
                "parse-error",
                format!("{inner}"),
            )
        })
    }

    /// SHA-256 of the canonical JSON form. Output locations are excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self, origin: &str) -> Result<ValidatedConfig, CliError> {
        let spec = build_spec(&self.transform).map_err(|(field, e)| CliError::from_error(origin, &field, e))?;
        let n = spec.num_particles();
        let gram =
            build_gram(&self.distinguishability, n).map_err(|(field, e)| CliError::from_error(origin, &field, e))?;
        if !self.witness_margin.is_finite() || self.witness_margin < 0.0 {
            return Err(CliError::config(
                origin,
                "witness_margin",
                "invalid-input",
                "must be a nonnegative number",
            ));
        }
        let settings = match &self.tomography {
            None => None,
            Some(t) => {
                if t.shots == 0 {
                    return Err(CliError::config(
                        origin,
                        "tomography.shots",
                        "invalid-input",
                        "must be at least 1",
                    ));
                }
                if let Some(tol) = t.tol {
                    if tol.is_nan() || tol < 0.0 {
                        return Err(CliError::config(
                            origin,
                            "tomography.tol",
                            "invalid-input",
                            "must be nonnegative",
                        ));
                    }
                }
                Some(match &t.settings {
                    None => all_pauli_settings(n),
                    Some(list) => list
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let parsed: MeasurementSetting = s
                                .parse()
                                .map_err(|e| CliError::from_error(origin, &format!("tomography.settings[{i}]"), e))?;
                            if parsed.num_qubits() != n {
                                return Err(CliError::config(
                                    origin,
                                    format!("tomography.settings[{i}]"),
                                    "invalid-input",
                                    format!("setting '{s}' must have {n} axes"),
                                ));
                            }
                            Ok(parsed)
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                })
            }
        };
        Ok(ValidatedConfig {
            raw: self.clone(),
            spec,
            gram,
            settings,
        })
    }
}

type FieldResult<T> = Result<T, (String, Error)>;

fn complex_rows(rows: &[Vec<ComplexValue>]) -> Vec<Vec<Complex64>> {
    rows.iter().map(|r| r.iter().map(|z| z.value()).collect()).collect()
}

pub fn ghz_params(
    alpha1: Option<ComplexValue>,
    alpha2: Option<ComplexValue>,
    beta2: Option<ComplexValue>,
    beta3: Option<ComplexValue>,
    gamma1: Option<ComplexValue>,
    gamma3: Option<ComplexValue>,
) -> GhzParams {
    let pick = |v: Option<ComplexValue>| v.map_or(Complex64::new(FRAC_1_SQRT_2, 0.0), ComplexValue::value);
    GhzParams {
        alpha1: pick(alpha1),
        alpha2: pick(alpha2),
        beta2: pick(beta2),
        beta3: pick(beta3),
        gamma1: pick(gamma1),
        gamma3: pick(gamma3),
    }
}

pub fn build_spec(cfg: &TransformConfig) -> FieldResult<TransformSpec> {
    match cfg {
        TransformConfig::Ghz {
            alpha1,
            alpha2,
            beta2,
            beta3,
            gamma1,
            gamma3,
        } => {
            let p = ghz_params(*alpha1, *alpha2, *beta2, *beta3, *gamma1, *gamma3);
            transform::ghz_preset(&p).map_err(|e| ("transform".into(), e))
        }
        TransformConfig::W { tritter, rows } => {
            let rows = match (rows, tritter) {
                (Some(_), Some(_)) => {
                    return Err((
                        "transform.rows".into(),
                        Error::invalid("give either 'rows' or 'tritter', not both"),
                    ))
                }
                (Some(rows), None) => {
                    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
                        return Err(("transform.rows".into(), Error::invalid("W rows must be a 3x3 matrix")));
                    }
                    let v = complex_rows(rows);
                    [
                        [v[0][0], v[0][1], v[0][2]],
                        [v[1][0], v[1][1], v[1][2]],
                        [v[2][0], v[2][1], v[2][2]],
                    ]
                }
                (None, Some(TritterKind::Dft)) => transform::dft_tritter_rows(),
                (None, _) => transform::balanced_tritter_rows(),
            };
            transform::w_preset(rows).map_err(|e| ("transform.rows".into(), e))
        }
        TransformConfig::Custom { t, s } => {
            let spins = s
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| match v.to_ascii_lowercase().as_str() {
                            "unused" | "-" | "none" => Ok(None),
                            other => other
                                .parse::<Spin>()
                                .map(Some)
                                .map_err(|e| (format!("transform.s[{i}][{j}]"), e)),
                        })
                        .collect::<FieldResult<Vec<_>>>()
                })
                .collect::<FieldResult<Vec<_>>>()?;
            TransformSpec::custom(complex_rows(t), spins).map_err(|e| ("transform.t".into(), e))
        }
    }
}

pub fn build_gram(cfg: &DistinguishabilityConfig, n: usize) -> FieldResult<GramMatrix> {
    match (&cfg.gram, &cfg.delays) {
        (Some(_), Some(_)) | (None, None) => Err((
            "distinguishability".into(),
            Error::invalid("exactly one of 'gram' or 'delays' must be given"),
        )),
        (Some(rows), None) => {
            if cfg.coherence_length.is_some() {
                return Err((
                    "distinguishability.coherence_length".into(),
                    Error::invalid("coherence_length only applies to 'delays'"),
                ));
            }
            if rows.len() != n {
                return Err((
                    "distinguishability.gram".into(),
                    Error::DimensionMismatch {
                        expected: n,
                        found: rows.len(),
                    },
                ));
            }
            GramMatrix::from_rows(&complex_rows(rows)).map_err(|e| ("distinguishability.gram".into(), e))
        }
        (None, Some(delays)) => {
            if delays.len() != n {
                return Err((
                    "distinguishability.delays".into(),
                    Error::DimensionMismatch {
                        expected: n,
                        found: delays.len(),
                    },
                ));
            }
            let lc = cfg.coherence_length.ok_or_else(|| {
                (
                    "distinguishability.coherence_length".to_string(),
                    Error::invalid("required with 'delays'"),
                )
            })?;
            let model = DelayModel::new(lc, delays.clone())
                .map_err(|e| ("distinguishability.coherence_length".to_string(), e))?;
            Ok(GramMatrix::from_delays(&model))
        }
    }
}
