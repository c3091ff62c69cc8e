//! Deterministic JSON and CSV writers that carry the run configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float with 17 significant digits; empty for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    version: &'static str,
    config: &'a RunConfig,
}

pub fn out_path(cfg: &RunConfig, name: &str) -> anyhow::Result<PathBuf> {
    let dir = Path::new(&cfg.out);
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

/// Writes `{"version", "config", ...body}` as pretty JSON.
pub fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, body: &T) -> anyhow::Result<PathBuf> {
    let path = out_path(cfg, name)?;
    let mut value = serde_json::to_value(Provenance { version: VERSION, config: cfg })?;
    let body = serde_json::to_value(body)?;
    let (Some(obj), serde_json::Value::Object(extra)) = (value.as_object_mut(), body) else {
        anyhow::bail!("output body must be a JSON object");
    };
    obj.extend(extra);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// CSV with one leading `# {"version", "config"}` comment line.
pub fn write_csv(cfg: &RunConfig, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<PathBuf> {
    let path = out_path(cfg, name)?;
    let mut file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "# {}", serde_json::to_string(&Provenance { version: VERSION, config: cfg })?)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}
