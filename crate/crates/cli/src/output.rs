//! Machine-readable output. Reals become decimal strings so that the files
//! round-trip exactly and compare byte for byte between runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub fn reals_as_strings(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format!("{:?}", n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(xs) => Value::Array(xs.into_iter().map(reals_as_strings).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, reals_as_strings(x))).collect()),
        other => other,
    }
}

fn cell(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// One `key,value` row per top-level field.
fn flat_csv(v: &Value) -> String {
    let mut out = String::from("key,value\n");
    if let Value::Object(m) = v {
        for (k, x) in m {
            out.push_str(&format!("{},{}\n", k, cell(x)));
        }
    }
    out
}

/// Writes `<name>.json` or `<name>.csv` into the output directory.
pub fn write_report<T: Serialize>(cfg: &RunConfig, name: &str, report: &T) -> Result<PathBuf, CliError> {
    let value = reals_as_strings(serde_json::to_value(report)?);
    fs::create_dir_all(&cfg.output_dir)?;
    let path = match cfg.format {
        Format::Json => {
            let p = cfg.output_dir.join(format!("{name}.json"));
            fs::write(&p, serde_json::to_string_pretty(&value)? + "\n")?;
            p
        }
        Format::Csv => {
            let p = cfg.output_dir.join(format!("{name}.csv"));
            fs::write(&p, flat_csv(&value))?;
            p
        }
    };
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, text)?;
    Ok(p)
}
