//! Effective configuration of each command: defaults, overlaid by a JSON
//! config file, overlaid by explicit flags.

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Numeric list given either as text or as a JSON array.
///
/// Text forms: `a:step:b` (inclusive arithmetic grid), `a..b` (inclusive
/// integer range) or a comma-separated list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListSpec {
    Numbers(Vec<f64>),
    Text(String),
}

impl ListSpec {
    pub fn text(s: &str) -> Self {
        ListSpec::Text(s.to_owned())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let out = match self {
            ListSpec::Numbers(v) => v.clone(),
            ListSpec::Text(s) => parse_list(s)?,
        };
        if out.is_empty() {
            bail!("empty list");
        }
        if out.iter().any(|x| !x.is_finite()) {
            bail!("non-finite value in list {self:?}");
        }
        Ok(out)
    }

    pub fn integers(&self) -> Result<Vec<usize>> {
        self.values()?
            .into_iter()
            .map(|x| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(anyhow!("{x} is not a nonnegative integer"))
                }
            })
            .collect()
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?} in {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            bail!("empty range {s:?}");
        }
        return Ok((a as i64..=b as i64).map(|x| x as f64).collect());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(num).collect(),
        3 => {
            let (a, step, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step <= 0.0 || b < a {
                bail!("invalid grid {s:?}");
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            if n > 1_000_000 {
                bail!("grid {s:?} has too many points");
            }
            // round to 12 decimals so 0.1·3 prints as 0.3
            Ok((0..=n).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => bail!("cannot parse list {s:?}"),
    }
}

/// `defaults ⊕ file ⊕ flags`, key by key.
pub fn merge<T: DeserializeOwned + Serialize + Default>(file: Option<&Value>, flags: Value) -> Result<T> {
    let mut base = match serde_json::to_value(T::default())? {
        Value::Object(m) => m,
        _ => unreachable!("configs are structs"),
    };
    let mut overlay = |v: &Value, what: &str| -> Result<()> {
        let Value::Object(m) = v else { bail!("{what} must be a JSON object") };
        for (k, val) in m {
            if !base.contains_key(k) {
                bail!("unknown {what} key {k:?}");
            }
            if !val.is_null() {
                base.insert(k.clone(), val.clone());
            }
        }
        Ok(())
    };
    if let Some(f) = file {
        overlay(f, "config")?;
    }
    overlay(&flags, "flag")?;
    Ok(serde_json::from_value(Value::Object(base))?)
}

pub fn read_config(path: Option<&std::path::Path>) -> Result<Option<Value>> {
    path.map(|p| {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
    })
    .transpose()
}

/// Drops `None` fields of a flag struct.
pub fn flags_value<T: Serialize>(flags: &T) -> Result<Value> {
    let v = serde_json::to_value(flags)?;
    Ok(match v {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).collect::<Map<_, _>>()),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(ListSpec::text("0:0.1:0.5").values().unwrap(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(ListSpec::text("2..4").integers().unwrap(), vec![2, 3, 4]);
        assert_eq!(ListSpec::text("2,3").integers().unwrap(), vec![2, 3]);
        assert_eq!(ListSpec::Numbers(vec![0.25]).values().unwrap(), vec![0.25]);
        assert!(ListSpec::text("0:-1:1").values().is_err());
        assert!(ListSpec::text("a,b").values().is_err());
        assert!(ListSpec::text("2.5").integers().is_err());
    }

    #[derive(Serialize, Deserialize, Default, Debug, PartialEq)]
    struct Demo {
        a: u32,
        b: String,
    }

    #[test]
    fn flags_win() {
        let file = serde_json::json!({"a": 3, "b": "file"});
        let flags = serde_json::json!({"b": "flag"});
        let d: Demo = merge(Some(&file), flags).unwrap();
        assert_eq!(d, Demo { a: 3, b: "flag".into() });
        assert!(merge::<Demo>(Some(&serde_json::json!({"c": 1})), Value::Object(Map::new())).is_err());
    }
}
