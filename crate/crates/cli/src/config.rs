//! TOML run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hcseries::checks::CheckOptions;
use hcseries::root_data::{datum, Bullet, Datum, Family, KappaSpec};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub datum: Option<DatumConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DatumConfig {
    pub family: String,
    pub rank: usize,
    #[serde(default = "default_bullet")]
    pub bullet: String,
    pub q: f64,
    #[serde(default)]
    pub kappa: BTreeMap<String, KappaEntry>,
}

fn default_bullet() -> String {
    "u".into()
}

/// A multiplicity on one orbit: a number, or a table with `alpha` and the
/// optional `two_alpha`, `alpha1`, `two_alpha1`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum KappaEntry {
    Scalar(f64),
    Table(KappaTable),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KappaTable {
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_alpha1: Option<f64>,
}

impl KappaEntry {
    fn spec(&self) -> KappaSpec {
        match self {
            KappaEntry::Scalar(k) => KappaSpec::uniform(*k),
            KappaEntry::Table(t) => {
                KappaSpec { alpha: t.alpha, two_alpha: t.two_alpha, alpha1: t.alpha1, two_alpha1: t.two_alpha1 }
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole_guard: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_scale: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config("io", format!("cannot read {}: {}", path.display(), e)))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Failure::config("parse", format!("{}: {}", path.display(), e)))?;
        cfg.numerics.validate()?;
        Ok(cfg)
    }

    pub fn build_datum(&self) -> Result<Option<Datum>, Failure> {
        let Some(dc) = &self.datum else { return Ok(None) };
        let family = Family::parse(&dc.family)
            .ok_or_else(|| Failure::config("unsupported_datum", format!("unknown family '{}'", dc.family)))?;
        let bullet = Bullet::parse(&dc.bullet)
            .ok_or_else(|| Failure::config("unsupported_datum", format!("bullet must be 'u' or 't', got '{}'", dc.bullet)))?;
        let specs: Vec<(String, KappaSpec)> = dc.kappa.iter().map(|(k, v)| (k.clone(), v.spec())).collect();
        let refs: Vec<(&str, KappaSpec)> = specs.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        datum(family, dc.rank, bullet, &refs, dc.q).map(Some).map_err(Failure::from_datum)
    }

    pub fn check_options(&self) -> CheckOptions {
        let n = &self.numerics;
        let mut o = CheckOptions::default();
        if let Some(s) = n.seed {
            o.seed = s;
        }
        o.samples = n.samples;
        o.trunc = n.trunc;
        o.factor_cutoff = n.factor_cutoff;
        o.pole_guard = n.pole_guard;
        if let Some(t) = n.tol_scale {
            o.tol_scale = t;
        }
        o
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::config("invalid_numerics", m));
        if let Some(t) = self.trunc {
            if t < 3 {
                return bad(format!("trunc must be at least 3, got {}", t));
            }
        }
        if let Some(c) = self.factor_cutoff {
            if !(c > 0.0 && c < 1.0) {
                return bad(format!("factor_cutoff must lie in (0, 1), got {}", c));
            }
        }
        if let Some(g) = self.pole_guard {
            if !(g > 0.0) {
                return bad(format!("pole_guard must be positive, got {}", g));
            }
        }
        if self.samples == Some(0) {
            return bad("samples must be positive".into());
        }
        if let Some(t) = self.tol_scale {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tol_scale must be positive, got {}", t));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_and_table_kappa() {
        let cfg: RunConfig = toml::from_str(
            r#"
            [datum]
            family = "koornwinder"
            rank = 2
            bullet = "t"
            q = 0.3
            [datum.kappa]
            long = 0.25
            short = { alpha = 0.3, two_alpha = 0.1, alpha1 = 0.2, two_alpha1 = -0.1 }
            "#,
        )
        .unwrap();
        let d = cfg.build_datum().unwrap().unwrap();
        assert_eq!(d.rank, 2);
        assert_eq!(d.weyl.order(), 8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<RunConfig, _> = toml::from_str("[numerics]\ntrunk = 4\n");
        assert!(r.is_err());
    }

    #[test]
    fn missing_datum_means_reference_data() {
        let cfg: RunConfig = toml::from_str("suites = [\"theta\"]\n").unwrap();
        assert!(cfg.build_datum().unwrap().is_none());
    }
}
