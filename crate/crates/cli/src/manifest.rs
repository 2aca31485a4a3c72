//! Run manifests written next to every output file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use linkrec::io::write_atomic;
use linkrec::Error;

use crate::Params;

/// Fully resolved parameters of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch; the only field allowed to differ between identical runs.
    pub timestamp: u64,
    pub alpha: f64,
    pub locality: usize,
    pub beta: f64,
    pub k_max: usize,
    pub k_fraction: Value,
    pub rho: Value,
    pub epsilon: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub threads: usize,
    #[serde(serialize_with = "paths_map")]
    pub inputs: Vec<(String, PathBuf)>,
    pub outputs: Vec<PathBuf>,
    pub extra: BTreeMap<String, Value>,
}

fn paths_map<S: serde::Serializer>(v: &[(String, PathBuf)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(v.len()))?;
    for (k, p) in v {
        m.serialize_entry(k, p)?;
    }
    m.end()
}

/// A scalar when there is one value, a list otherwise.
fn scalar_or_list(v: &[f64]) -> Value {
    match v {
        [x] => Value::from(*x),
        _ => Value::from(v.to_vec()),
    }
}

impl RunManifest {
    pub fn new(subcommand: &str, p: &Params) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            alpha: p.alpha,
            locality: p.locality,
            beta: p.beta,
            k_max: p.kmax,
            k_fraction: scalar_or_list(&p.k_frac),
            rho: scalar_or_list(&p.rho),
            epsilon: p.epsilon,
            max_iter: p.max_iter,
            restarts: p.restarts,
            seed: p.seed,
            threads: p.threads(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("manifest values serialize");
        self.extra.insert(key.to_string(), v);
        self
    }

    /// Writes the manifest to `<output>.manifest.json`.
    pub fn write_beside(&self, output: &Path) -> Result<(), Error> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_atomic(Path::new(&name), text.as_bytes())
    }
}
