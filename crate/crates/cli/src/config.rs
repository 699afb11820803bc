//! Run configuration: a JSON file merged with command-line overrides.
//!
//! Complex values are `{"re": .., "im": ..}` objects, plain numbers, or
//! `"a+bi"` strings; all go through [`parse_complex`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer};
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    TwoLevel,
    Oscillator,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scalar(pub Complex64);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Value::deserialize(d)?;
        scalar_from_value(&v).map(Scalar).map_err(D::Error::custom)
    }
}

fn scalar_from_value(v: &Value) -> Result<Complex64, String> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|x| Complex64::new(x, 0.0))
            .ok_or_else(|| format!("bad number {n}")),
        Value::String(s) => parse_complex(s),
        Value::Object(map) => {
            if let Some(k) = map.keys().find(|k| *k != "re" && *k != "im") {
                return Err(format!("unknown key {k:?} in complex value (expected re, im)"));
            }
            let part = |k: &str| match map.get(k) {
                None => Err(format!("complex value needs {k:?}")),
                Some(x) => x.as_f64().ok_or_else(|| format!("{k:?} must be a number")),
            };
            Ok(Complex64::new(part("re")?, part("im")?))
        }
        other => Err(format!(
            "expected a number, \"a+bi\" string or {{re, im}} object, got {other}"
        )),
    }
}

/// Parses `3`, `-2.5e-3`, `i`, `-2i`, `1+2i`, `1e-3-4.5e-2i` (`j` also accepted).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse {text:?} as a complex number");
    let num = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    let z = match s.strip_suffix(['i', 'j']) {
        Some(body) => {
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            match split {
                Some(k) => {
                    let re = body[..k].parse::<f64>().map_err(|_| bad())?;
                    Complex64::new(re, num(&body[k..])?)
                }
                None => Complex64::new(0.0, num(body)?),
            }
        }
        None if s.is_empty() => return Err(bad()),
        None => Complex64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub c1: Option<Scalar>,
    pub c2: Option<Scalar>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub seed_f: Option<f64>,
    pub seed_g: Option<f64>,
    pub g_from: Option<f64>,
    pub g_to: Option<f64>,
    pub g_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub param: Option<String>,
    pub center: Option<Scalar>,
    pub radius: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<Model>,
    /// Two-level: eps1, eps2, omega1, omega2, phi1, phi2 (degrees).
    /// Oscillator: omega1, omega2, k1, k2, f, g.
    #[serde(default)]
    pub params: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default, rename = "loop")]
    pub loop_: LoopConfig,
    pub output_path: Option<PathBuf>,
    pub output_format: Option<Format>,
}

pub const TWO_LEVEL_KEYS: [&str; 6] = ["eps1", "eps2", "omega1", "omega2", "phi1", "phi2"];
pub const OSCILLATOR_KEYS: [&str; 6] = ["omega1", "omega2", "k1", "k2", "f", "g"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `name=value` overrides.
    pub fn set_params(&mut self, pairs: &[String]) -> Result<(), CliError> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param expects name=value, got {p:?}")))?;
            let z = parse_complex(v).map_err(|e| CliError::Config(format!("parameter {k}: {e}")))?;
            self.params.insert(k.trim().to_string(), Scalar(z));
        }
        Ok(())
    }

    /// Fixes the model, rejecting a config written for the other one, and
    /// checks that every parameter name belongs to it.
    pub fn require_model(&mut self, model: Model) -> Result<(), CliError> {
        match self.model {
            Some(m) if m != model => {
                return Err(CliError::Config(format!(
                    "config is for model {m:?}, command needs {model:?}"
                )));
            }
            _ => self.model = Some(model),
        }
        let known: &[&str] = match model {
            Model::TwoLevel => &TWO_LEVEL_KEYS,
            Model::Oscillator => &OSCILLATOR_KEYS,
        };
        if let Some(k) = self.params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::Config(format!(
                "unknown parameter {k:?} for {model:?} (expected {})",
                known.join(", ")
            )));
        }
        Ok(())
    }

    pub fn complex(&self, name: &str) -> Result<Complex64, CliError> {
        self.params
            .get(name)
            .map(|s| s.0)
            .ok_or_else(|| CliError::Config(format!("missing parameter {name:?}")))
    }

    pub fn real(&self, name: &str) -> Result<f64, CliError> {
        let z = self.complex(name)?;
        if z.im != 0.0 {
            return Err(CliError::Config(format!("parameter {name:?} must be real, got {z}")));
        }
        Ok(z.re)
    }

    pub fn real_or(&self, name: &str, default: f64) -> Result<f64, CliError> {
        if self.params.contains_key(name) {
            self.real(name)
        } else {
            Ok(default)
        }
    }
}

pub fn required<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_strings() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("3"), Ok(c(3.0, 0.0)));
        assert_eq!(parse_complex("-i"), Ok(c(0.0, -1.0)));
        assert_eq!(parse_complex("i"), Ok(c(0.0, 1.0)));
        assert_eq!(parse_complex("2.5j"), Ok(c(0.0, 2.5)));
        assert_eq!(parse_complex("1+2i"), Ok(c(1.0, 2.0)));
        assert_eq!(parse_complex(" 1 - i "), Ok(c(1.0, -1.0)));
        assert_eq!(parse_complex("1e-3-4.5e-2i"), Ok(c(1e-3, -4.5e-2)));
        assert_eq!(parse_complex("-1e+2+1E-1i"), Ok(c(-100.0, 0.1)));
        for bad in ["", "x", "1+", "1+2", "nan", "1++2i", "inf"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn scalar_forms() {
        let v: BTreeMap<String, Scalar> =
            serde_json::from_str(r#"{"a": 2, "b": {"re": 1, "im": -1}, "c": "3-4i"}"#).unwrap();
        assert_eq!(v["a"].0, Complex64::new(2.0, 0.0));
        assert_eq!(v["b"].0, Complex64::new(1.0, -1.0));
        assert_eq!(v["c"].0, Complex64::new(3.0, -4.0));
        assert!(serde_json::from_str::<Scalar>(r#"{"re": 1, "im": 0, "x": 2}"#).is_err());
        assert!(serde_json::from_str::<Scalar>(r#"{"re": 1}"#).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"modle": "oscillator"}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sweep": {"form": 1}}"#).is_err());
        let mut cfg: RunConfig = serde_json::from_str(r#"{"params": {"k3": 1}}"#).unwrap();
        assert!(cfg.require_model(Model::Oscillator).is_err());
    }
}
