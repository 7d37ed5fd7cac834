//! Time-series profiles of RAN variables.
//!
//! A profile is what one control application produces while running alone:
//! a timestamped stream of `(variable, slice, value)` observations. On disk it
//! is a tab-separated file with columns timestamp, variable, slice and value.
//! Lines starting with `#` before the header carry the application id and
//! free-form metadata as `# key=value`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROFILE_HEADER: &str = "timestamp\tvariable\tslice\tvalue";

/// Allocated PRBs of a slice.
pub const SLICE_PRB: &str = "slice_prb";
/// Downlink buffer occupancy in bytes.
pub const DL_BUFFER_BYTES: &str = "dl_buffer_bytes";
/// Downlink throughput in Mbps.
pub const TX_BRATE_DL_MBPS: &str = "tx_brate_dl_mbps";

/// Identifies one series inside a profile.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub variable: String,
    pub slice: String,
}

impl SeriesKey {
    pub fn new(variable: impl Into<String>, slice: impl Into<String>) -> Self {
        SeriesKey {
            variable: variable.into(),
            slice: slice.into(),
        }
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.variable, self.slice)
    }
}

impl FromStr for SeriesKey {
    type Err = Error;

    /// Parses `variable:slice`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().split_once(':') {
            Some((v, sl)) if !v.is_empty() && !sl.is_empty() => Ok(SeriesKey::new(v, sl)),
            _ => Err(Error::InvalidConfig(format!(
                "series key `{s}` is not of the form variable:slice"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub timestamp: f64,
    pub variable: String,
    pub slice: String,
    pub value: f64,
}

impl Observation {
    pub fn new(
        timestamp: f64,
        variable: impl Into<String>,
        slice: impl Into<String>,
        value: f64,
    ) -> Result<Self> {
        if !(timestamp >= 0.0) || !timestamp.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "timestamp must be finite and non-negative, got {timestamp}"
            )));
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteSample { index: 0, value });
        }
        Ok(Observation {
            timestamp,
            variable: variable.into(),
            slice: slice.into(),
            value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile {
    pub app_id: String,
    observations: Vec<Observation>,
    pub metadata: BTreeMap<String, String>,
}

impl Profile {
    /// Builds a profile, stably sorting observations by timestamp.
    pub fn new(app_id: impl Into<String>, mut observations: Vec<Observation>) -> Self {
        observations.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        Profile {
            app_id: app_id.into(),
            observations,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Every `(variable, slice)` pair with at least one observation, sorted.
    pub fn keys(&self) -> Vec<SeriesKey> {
        self.observations
            .iter()
            .map(|o| (o.variable.as_str(), o.slice.as_str()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|(v, s)| SeriesKey::new(v, s))
            .collect()
    }

    pub fn covers(&self, key: &SeriesKey) -> bool {
        self.observations
            .iter()
            .any(|o| o.variable == key.variable && o.slice == key.slice)
    }

    /// Values of one series in timestamp order.
    pub fn extract_series(&self, variable: &str, slice: &str) -> Result<Vec<f64>> {
        let mut seen_variable = false;
        let values: Vec<f64> = self
            .observations
            .iter()
            .filter(|o| {
                let hit = o.variable == variable;
                seen_variable |= hit;
                hit && o.slice == slice
            })
            .map(|o| o.value)
            .collect();
        if !values.is_empty() {
            Ok(values)
        } else if seen_variable {
            Err(Error::UnknownSlice {
                variable: variable.to_string(),
                slice: slice.to_string(),
            })
        } else {
            Err(Error::UnknownVariable(variable.to_string()))
        }
    }

    pub fn series(&self, key: &SeriesKey) -> Result<Vec<f64>> {
        self.extract_series(&key.variable, &key.slice)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.observations.len() + 2));
        out.push_str(&format!("# app_id={}\n", self.app_id));
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(PROFILE_HEADER);
        out.push('\n');
        for o in &self.observations {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                o.timestamp, o.variable, o.slice, o.value
            ));
        }
        out
    }

    /// Parses the profile TSV format. `source` names the input in errors and,
    /// when the file carries no `app_id` comment, becomes the application id.
    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: source.to_string(),
            line,
            msg,
        };
        let mut app_id = None;
        let mut metadata = BTreeMap::new();
        let mut header_seen = false;
        let mut observations = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            if !header_seen {
                if let Some(comment) = raw.strip_prefix('#') {
                    if let Some((k, v)) = comment.trim_start().split_once('=') {
                        if k == "app_id" {
                            app_id = Some(v.to_string());
                        } else {
                            metadata.insert(k.to_string(), v.to_string());
                        }
                    }
                    continue;
                }
                if raw.trim_end() != PROFILE_HEADER {
                    return Err(parse_err(
                        lineno,
                        format!("expected header `{PROFILE_HEADER}`"),
                    ));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 4 {
                return Err(parse_err(
                    lineno,
                    format!("expected 4 tab-separated fields, found {}", fields.len()),
                ));
            }
            let timestamp: f64 = fields[0]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad timestamp `{}`", fields[0])))?;
            let value: f64 = fields[3]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value `{}`", fields[3])))?;
            let obs = Observation::new(timestamp, fields[1], fields[2], value)
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            observations.push(obs);
        }
        if !header_seen {
            return Err(parse_err(0, "missing header".to_string()));
        }
        let sorted = observations
            .windows(2)
            .all(|w| w[0].timestamp <= w[1].timestamp);
        if !sorted {
            return Err(parse_err(
                0,
                "observations not sorted by timestamp".to_string(),
            ));
        }
        Ok(Profile {
            app_id: app_id.unwrap_or_else(|| source.to_string()),
            observations,
            metadata,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = crate::io::read_file(path)?;
        let stem = path
            .file_name()
            .and_then(|s| s.to_str())
            .map(|s| s.split('.').next().unwrap_or(s))
            .unwrap_or("profile");
        Profile::from_tsv(&text, stem)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_tsv())
    }
}
