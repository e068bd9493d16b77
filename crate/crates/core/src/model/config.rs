//! Flat `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, keys are dotted
//! `section.name`. Model keys:
//!
//! | key | values |
//! |---|---|
//! | `model.t0` | real, default 0 |
//! | `model.sidedness` | `two_sided` (default) or `one_sided_right` |
//! | `radial.family` | `exponential` (`radial.rate`), `weibull_tail` (`radial.beta`), `half_normal` |
//! | `angular.family` | `uniform` (`angular.lo`, `angular.hi`), `symmetric_power` (`angular.tau`, `angular.half_width`), `asymmetric_power` (`angular.tau_minus`, `angular.tau_plus`, `angular.weight`, `angular.half_width`) |
//! | `shape_u.family` | `power` (`shape_u.kappa` or `shape_u.kappa_minus`/`shape_u.kappa_plus`, `shape_u.scale` default 1), `cosine` |
//! | `shape_v.family` | `sine`, `seifert_linear` (`shape_v.rho`), `power` (`shape_v.rho`, `shape_v.delta`, `shape_v.d`), `theta_polynomial` (`shape_v.theta_t0`, `shape_v.n`, `shape_v.theta_n_deriv`) |
//!
//! Other sections (`verify.*`, `case.*`) are read by the command line tool.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::builtin::{AngularSpec, ModelSpec, RadialSpec, ShapeUSpec, ShapeVSpec};
use super::Sidedness;
use crate::error::{Error, Result};

const MODEL_SECTIONS: [&str; 5] = ["model.", "radial.", "angular.", "shape_u.", "shape_v."];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Config { line, msg: format!("expected `key = value`, got `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.contains('.') {
                return Err(Error::Config { line, msg: format!("key `{key}` must be `section.name`") });
            }
            if entries.insert(key.to_string(), (value.to_string(), line)).is_some() {
                return Err(Error::Config { line, msg: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::MissingParameter(key.to_string()))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|_| Error::Config {
                line: *line,
                msg: format!("cannot parse value `{v}` of `{key}`"),
            }),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    pub fn parse_req<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse_opt(key)?.ok_or_else(|| Error::MissingParameter(key.to_string()))
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), (value.to_string(), 0));
    }

    /// `key=value` lines in key order; stable input for hashing.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, (v, _))| format!("{k}={v}\n")).collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let t0 = self.parse_or("model.t0", 0.0)?;
        let sidedness = match self.get("model.sidedness").unwrap_or("two_sided") {
            "two_sided" => Sidedness::TwoSided,
            "one_sided_right" => Sidedness::OneSidedRight,
            other => return Err(unknown("model sidedness", other)),
        };
        let radial = match self.require("radial.family")? {
            "exponential" => RadialSpec::Exponential { rate: self.parse_or("radial.rate", 1.0)? },
            "weibull_tail" => RadialSpec::WeibullTail { beta: self.parse_req("radial.beta")? },
            "half_normal" => RadialSpec::HalfNormal,
            other => return Err(unknown("radial", other)),
        };
        let angular = match self.require("angular.family")? {
            "uniform" => AngularSpec::Uniform { lo: self.parse_req("angular.lo")?, hi: self.parse_req("angular.hi")? },
            "symmetric_power" => AngularSpec::SymmetricPower {
                tau: self.parse_req("angular.tau")?,
                half_width: self.parse_or("angular.half_width", 1.0)?,
            },
            "asymmetric_power" => AngularSpec::AsymmetricPower {
                tau_minus: self.parse_req("angular.tau_minus")?,
                tau_plus: self.parse_req("angular.tau_plus")?,
                weight: self.parse_or("angular.weight", 0.5)?,
                half_width: self.parse_or("angular.half_width", 1.0)?,
            },
            other => return Err(unknown("angular", other)),
        };
        let shape_u = match self.require("shape_u.family")? {
            "power" => {
                let both: Option<f64> = self.parse_opt("shape_u.kappa")?;
                let side = |key: &str| -> Result<f64> {
                    match (self.parse_opt(key)?, both) {
                        (Some(k), _) | (None, Some(k)) => Ok(k),
                        (None, None) => Err(Error::MissingParameter(key.to_string())),
                    }
                };
                ShapeUSpec::Power {
                    kappa_minus: side("shape_u.kappa_minus")?,
                    kappa_plus: side("shape_u.kappa_plus")?,
                    scale: self.parse_or("shape_u.scale", 1.0)?,
                }
            }
            "cosine" => ShapeUSpec::Cosine,
            other => return Err(unknown("shape_u", other)),
        };
        let shape_v = match self.get("shape_v.family") {
            None => None,
            Some("sine") => Some(ShapeVSpec::Sine),
            Some("seifert_linear") => Some(ShapeVSpec::SeifertLinear { rho: self.parse_req("shape_v.rho")? }),
            Some("power") => Some(ShapeVSpec::Power {
                rho: self.parse_req("shape_v.rho")?,
                delta: self.parse_req("shape_v.delta")?,
                d: self.parse_or("shape_v.d", 1.0)?,
            }),
            Some("theta_polynomial") => Some(ShapeVSpec::ThetaPolynomial {
                theta_t0: self.parse_req("shape_v.theta_t0")?,
                n: self.parse_req("shape_v.n")?,
                theta_n_deriv: self.parse_req("shape_v.theta_n_deriv")?,
            }),
            Some(other) => return Err(unknown("shape_v", other)),
        };
        let spec = ModelSpec { t0, sidedness, radial, angular, shape_u, shape_v };
        self.check_model_keys(&spec)?;
        Ok(spec)
    }

    // Rejects stray model keys so a typo does not silently fall back to a default.
    fn check_model_keys(&self, spec: &ModelSpec) -> Result<()> {
        let allowed: &[&str] = &[
            "model.t0",
            "model.sidedness",
            "radial.family",
            "angular.family",
            "shape_u.family",
            "shape_v.family",
        ];
        let mut family_keys: Vec<&str> = Vec::new();
        family_keys.extend(match spec.radial {
            RadialSpec::Exponential { .. } => &["radial.rate"][..],
            RadialSpec::WeibullTail { .. } => &["radial.beta"][..],
            RadialSpec::HalfNormal => &[][..],
        });
        family_keys.extend(match spec.angular {
            AngularSpec::Uniform { .. } => &["angular.lo", "angular.hi"][..],
            AngularSpec::SymmetricPower { .. } => &["angular.tau", "angular.half_width"][..],
            AngularSpec::AsymmetricPower { .. } => {
                &["angular.tau_minus", "angular.tau_plus", "angular.weight", "angular.half_width"][..]
            }
        });
        family_keys.extend(match spec.shape_u {
            ShapeUSpec::Power { .. } => &["shape_u.kappa", "shape_u.kappa_minus", "shape_u.kappa_plus", "shape_u.scale"][..],
            ShapeUSpec::Cosine => &[][..],
        });
        family_keys.extend(match spec.shape_v {
            None | Some(ShapeVSpec::Sine) => &[][..],
            Some(ShapeVSpec::SeifertLinear { .. }) => &["shape_v.rho"][..],
            Some(ShapeVSpec::Power { .. }) => &["shape_v.rho", "shape_v.delta", "shape_v.d"][..],
            Some(ShapeVSpec::ThetaPolynomial { .. }) => {
                &["shape_v.theta_t0", "shape_v.n", "shape_v.theta_n_deriv"][..]
            }
        });
        for (key, (_, line)) in &self.entries {
            let in_model = MODEL_SECTIONS.iter().any(|p| key.starts_with(p));
            if in_model && !allowed.contains(&key.as_str()) && !family_keys.contains(&key.as_str()) {
                return Err(Error::Config { line: *line, msg: format!("unknown or unused key `{key}`") });
            }
        }
        Ok(())
    }
}

fn unknown(component: &'static str, name: &str) -> Error {
    Error::UnknownFamily { component, name: name.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F1: &str = "
# fixture F1
radial.family = exponential
radial.rate = 1.0
angular.family = uniform
angular.lo = -1
angular.hi = 1
shape_u.family = power
shape_u.kappa = 2.0
";

    #[test]
    fn parses_f1() {
        let spec = ConfigMap::parse(F1).unwrap().model_spec().unwrap();
        assert_eq!(spec, ModelSpec::fixture_f1());
    }

    #[test]
    fn missing_family_names_key() {
        let text = F1.replace("radial.family = exponential", "");
        let err = ConfigMap::parse(&text).unwrap().model_spec().unwrap_err();
        assert!(matches!(&err, Error::MissingParameter(k) if k == "radial.family"), "{err}");
    }

    #[test]
    fn unknown_family() {
        let text = F1.replace("= exponential", "= pareto");
        let err = ConfigMap::parse(&text).unwrap().model_spec().unwrap_err();
        assert!(matches!(err, Error::UnknownFamily { component: "radial", .. }));
    }

    #[test]
    fn typo_key_rejected() {
        let text = format!("{F1}\nshape_u.kapa_plus = 1.0\n");
        let err = ConfigMap::parse(&text).unwrap().model_spec().unwrap_err();
        assert!(err.to_string().contains("shape_u.kapa_plus"));
    }

    #[test]
    fn syntax_errors_carry_line() {
        assert!(matches!(ConfigMap::parse("a.b = 1\nnonsense\n"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(ConfigMap::parse("a.b = 1\na.b = 2\n"), Err(Error::Config { line: 2, .. })));
        let bad = ConfigMap::parse("radial.family = exponential\nradial.rate = fast\n").unwrap();
        assert!(matches!(bad.model_spec(), Err(Error::Config { line: 2, .. })));
    }

    #[test]
    fn canonical_is_order_independent() {
        let a = ConfigMap::parse("x.a = 1\nx.b = 2\n").unwrap();
        let b = ConfigMap::parse("x.b = 2\n# c\nx.a=1").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
