//! TOML scenario files with `key=value` overrides.
//!
//! The file is merged over the built-in wavy scenario table by table, so any
//! key left out keeps its default. Arrays replace the default wholesale.
//! Unknown keys are errors that name the offending path.

use std::path::Path;
use std::str::FromStr;

use toml::{Table, Value};
use usvwave_sim::ScenarioConfig;

use crate::error::{HarnessError, Result};

/// One `--set key=value`. Keys are dotted paths; `name[i]` indexes an array.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: Value,
}

impl FromStr for Override {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::InvalidArgument(format!("override `{s}` is not key=value")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(HarnessError::InvalidArgument(format!("override `{s}` has an empty key")));
        }
        // TOML literal if it parses as one, a bare string otherwise
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        Ok(Self {
            key: key.to_string(),
            value,
        })
    }
}

enum Segment<'a> {
    Key(&'a str),
    Index(usize),
}

fn segments(key: &str) -> Result<Vec<Segment<'_>>> {
    let bad = || HarnessError::config(key, "malformed key path");
    let mut out = Vec::new();
    for part in key.split('.') {
        let (name, mut rest) = part.split_once('[').map_or((part, ""), |(n, r)| (n, r));
        if name.is_empty() {
            return Err(bad());
        }
        out.push(Segment::Key(name));
        while !rest.is_empty() {
            let (idx, after) = rest.split_once(']').ok_or_else(bad)?;
            out.push(Segment::Index(idx.parse().map_err(|_| bad())?));
            rest = after.strip_prefix('[').unwrap_or(after);
            if !after.is_empty() && !after.starts_with('[') {
                return Err(bad());
            }
        }
    }
    Ok(out)
}

fn child<'a>(cur: &'a mut Value, seg: &Segment<'_>, next: Option<&Segment<'_>>, key: &str) -> Result<&'a mut Value> {
    match *seg {
        Segment::Key(k) => {
            let table = cur
                .as_table_mut()
                .ok_or_else(|| HarnessError::config(key, format!("`{k}` is not inside a table")))?;
            Ok(table.entry(k.to_string()).or_insert_with(|| match next {
                Some(Segment::Index(_)) => Value::Array(Vec::new()),
                _ => Value::Table(Table::new()),
            }))
        }
        Segment::Index(idx) => {
            let arr = cur
                .as_array_mut()
                .ok_or_else(|| HarnessError::config(key, "indexed value is not an array"))?;
            let len = arr.len();
            arr.get_mut(idx)
                .ok_or_else(|| HarnessError::config(key, format!("index {idx} out of range (length {len})")))
        }
    }
}

fn apply(root: &mut Table, ov: &Override) -> Result<()> {
    let segs = segments(&ov.key)?;
    let mut doc = Value::Table(std::mem::take(root));
    let mut walk = || -> Result<()> {
        let mut cur = &mut doc;
        for (i, seg) in segs.iter().enumerate() {
            cur = child(cur, seg, segs.get(i + 1), &ov.key)?;
        }
        *cur = ov.value.clone();
        Ok(())
    };
    let outcome = walk();
    if let Value::Table(t) = doc {
        *root = t;
    }
    outcome
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn defaults() -> Table {
    let text = toml::to_string(&ScenarioConfig::default()).expect("default scenario serializes");
    text.parse().expect("default scenario round-trips through TOML")
}

/// Parses, merges over the defaults, overrides, deserializes and validates.
pub fn parse_config(text: &str, overrides: &[Override]) -> Result<ScenarioConfig> {
    let file: Table = text
        .parse()
        .map_err(|e: toml::de::Error| HarnessError::config("<file>", e.to_string().trim().to_string()))?;
    let mut table = defaults();
    merge(&mut table, file);
    for ov in overrides {
        apply(&mut table, ov)?;
    }
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(table).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { "<root>".to_string() } else { path };
        HarnessError::config(key, e.into_inner().to_string().trim().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[Override]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    parse_config(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use usvwave_sim::config::{Task, Variant};

    fn ov(s: &str) -> Override {
        s.parse().unwrap()
    }

    #[test]
    fn empty_file_is_the_default_scenario() {
        assert_eq!(parse_config("", &[]).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn overrides_reach_nested_and_indexed_keys() {
        let cfg = parse_config(
            "task = \"land\"\n",
            &[
                ov("variant=gps-only"),
                ov("planner.follow.hover_height=2.5"),
                ov("truth.waves=[{channel = \"w\", omega0 = 1.0, amplitude = 0.2}]"),
                ov("truth.waves[0].amplitude = 0.3"),
                ov("seed=7"),
            ],
        )
        .unwrap();
        assert_eq!(cfg.task, Task::Land);
        assert_eq!(cfg.variant, Variant::GpsOnly);
        assert_eq!(cfg.planner.follow.hover_height, 2.5);
        assert_eq!(cfg.truth.waves.len(), 1);
        assert_eq!(cfg.truth.waves[0].amplitude, 0.3);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config("[estimator]\ngate = 0.9\n", &[]).unwrap_err();
        assert!(matches!(err, HarnessError::Config { .. }));
        assert!(err.to_string().contains("estimator"), "{err}");
        assert!(err.to_string().contains("gate"), "{err}");

        let err = parse_config("", &[ov("planner.follow.horizon=3")]).unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
    }

    #[test]
    fn wrong_types_and_semantic_errors_are_named() {
        let err = parse_config("duration = \"long\"", &[]).unwrap_err();
        assert!(err.to_string().contains("duration"), "{err}");
        let err = parse_config("[sensors.gps]\nrate = -1.0\nnoise_std = [1.0, 1.0, 1.0]\n", &[]).unwrap_err();
        assert!(err.to_string().contains("sensors.gps.rate"), "{err}");
    }

    #[test]
    fn malformed_overrides_are_rejected() {
        assert!("novalue".parse::<Override>().is_err());
        assert!(parse_config("", &[ov("truth.waves[99].amplitude=1")]).is_err());
        assert!(parse_config("", &[ov("seed.inner=1")]).is_err());
    }

    #[test]
    fn partial_tables_keep_the_other_defaults() {
        let cfg = parse_config("[estimator.process_noise]\nwave = 0.005\n", &[ov("sensors.gps.rate=5")]).unwrap();
        let d = ScenarioConfig::default();
        assert_eq!(cfg.estimator.process_noise.wave, 0.005);
        assert_eq!(cfg.estimator.process_noise.position, d.estimator.process_noise.position);
        assert_eq!(cfg.sensors.gps.rate, 5.0);
        assert_eq!(cfg.sensors.gps.noise_std, d.sensors.gps.noise_std);
        assert_eq!(cfg.estimator.waves, d.estimator.waves);
    }

    #[test]
    fn bare_words_become_strings() {
        assert_eq!(ov("task=land").value, Value::String("land".into()));
        assert_eq!(ov("x=1.5").value, Value::Float(1.5));
    }
}
