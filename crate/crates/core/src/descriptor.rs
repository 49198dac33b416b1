//! JSON distribution descriptors.
//!
//! A descriptor is either a bare kind name (`uniform01`) or an object
//! `{"kind": ..., "params": {...}}`. Composite kinds take their base as a
//! nested descriptor under `params.base`:
//!
//! | kind | params |
//! |---|---|
//! | `uniform01`, `exp_ratio`, `arcsine` | none |
//! | `point_mass` | `a` |
//! | `lamperti` | `alpha` |
//! | `thinned` | `base`, `sigma` |
//! | `tilt_base` | `base`, `c` |
//! | `scaled`, `shifted` | `base`, `c` |
//! | `catalog:<name>` | `alpha`, `sigma`, `c` as the entry needs |

use serde_json::{Map, Value};

use crate::catalog::{self, Params};
use crate::dist::{self, DistributionSpec};
use crate::error::{Error, Result};

/// Parses a descriptor string. Anything that is not valid JSON is taken as a
/// bare kind name.
pub fn parse(text: &str) -> Result<DistributionSpec> {
    let text = text.trim();
    match serde_json::from_str::<Value>(text) {
        Ok(v) => from_value(&v),
        Err(_) => from_value(&Value::String(text.to_string())),
    }
}

pub fn from_value(v: &Value) -> Result<DistributionSpec> {
    let empty = Map::new();
    let (kind, params) = match v {
        Value::String(s) => (s.as_str(), &empty),
        Value::Object(o) => {
            let kind = o
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::domain("descriptor needs a string field 'kind'"))?;
            let params = match o.get("params") {
                None | Some(Value::Null) => &empty,
                Some(Value::Object(p)) => p,
                Some(_) => return Err(Error::domain("descriptor 'params' must be an object")),
            };
            (kind, params)
        }
        _ => return Err(Error::domain("descriptor must be a kind name or an object")),
    };
    build(kind, params)
}

fn number(params: &Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::domain(format!("descriptor parameter '{key}' must be a number")))
}

fn optional(params: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::domain(format!("descriptor parameter '{key}' must be a number"))),
    }
}

fn base(params: &Map<String, Value>) -> Result<DistributionSpec> {
    let b = params
        .get("base")
        .ok_or_else(|| Error::domain("descriptor parameter 'base' is required"))?;
    from_value(b)
}

fn build(kind: &str, params: &Map<String, Value>) -> Result<DistributionSpec> {
    if let Some(name) = kind.strip_prefix("catalog:") {
        let info = catalog::info(name)?;
        let mut p = info.defaults;
        p = Params {
            alpha: optional(params, "alpha")?.or(p.alpha),
            sigma: optional(params, "sigma")?.or(p.sigma),
            c: optional(params, "c")?.or(p.c),
        };
        let e = catalog::entry(name, &p)?;
        return e.spec.ok_or_else(|| {
            Error::precondition(format!("catalog entry '{name}' is a density only, not a base distribution"))
        });
    }
    match kind {
        "uniform01" | "uniform" => Ok(dist::uniform01()),
        "exp_ratio" => Ok(dist::exp_ratio()),
        "arcsine" => Ok(catalog::arcsine_spec()),
        "point_mass" => dist::point_mass(number(params, "a")?),
        "lamperti" => dist::lamperti(number(params, "alpha")?),
        "thinned" => Ok(dist::thin(&base(params)?, number(params, "sigma")?)?.into_spec()),
        "tilt_base" => Ok(dist::tilt_base(&base(params)?, number(params, "c")?)?.into_spec()),
        "scaled" => base(params)?.scaled(number(params, "c")?),
        "shifted" => base(params)?.shifted(number(params, "c")?),
        other => Err(Error::domain(format!("unknown distribution kind '{other}'"))),
    }
}
