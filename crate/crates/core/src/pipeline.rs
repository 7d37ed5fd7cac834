//! Batch commands: simulate, profile, conflict, predict, compare, reproduce.
//!
//! Each command writes its outputs under a directory and returns a
//! [`RunManifest`] listing inputs, outputs, and a digest of the resolved
//! configuration. Output names follow `<label>.<variable>.<slice>.<kind>.tsv`.
//! Commands never read the clock, so reruns produce byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ecdf::{build_ecdf, parse_step_tsv, Ecdf};
use crate::error::{Error, Result};
use crate::metrics::{conflict_report, default_kpm_keys, ConflictReport, DistancePair};
use crate::predictor::{predict, PredictionReport, TimingSpec, WeightVector};
use crate::profile::{Profile, SeriesKey, DL_BUFFER_BYTES, SLICE_PRB, TX_BRATE_DL_MBPS};
use crate::sim::{
    agents_from_json, occupancy_fractions, run_concurrent, run_single, trace_to_profile, AgentSpec,
    ScenarioConfig,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Below this many samples a series still yields an ECDF, but a thin one.
pub const MIN_TRUSTED_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Command {
    Simulate,
    Profile,
    Conflict,
    Predict,
    Compare,
    Reproduce,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Simulate => "simulate",
            Command::Profile => "profile",
            Command::Conflict => "conflict",
            Command::Predict => "predict",
            Command::Compare => "compare",
            Command::Reproduce => "reproduce",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub config_digest: String,
    pub tool_version: String,
}

impl RunManifest {
    fn new(command: Command, inputs: Vec<PathBuf>, resolved: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            command,
            inputs,
            outputs: Vec::new(),
            config_digest: digest(resolved)?,
            tool_version: TOOL_VERSION.to_string(),
        })
    }

    /// Every listed output exists and is non-empty.
    pub fn verify(&self) -> Result<()> {
        for path in &self.outputs {
            let len = std::fs::metadata(path)
                .map_err(|source| Error::Read {
                    path: path.clone(),
                    source,
                })?
                .len();
            if len == 0 {
                return Err(Error::Write {
                    path: path.clone(),
                    source: std::io::Error::other("empty output"),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `<command>.manifest.json` into `dir`.
    pub fn write_into(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        crate::io::write_file(&path, self.to_json()?)?;
        Ok(path)
    }

    fn emit(&mut self, path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
        crate::io::write_file(&path, contents)?;
        self.outputs.push(path);
        Ok(())
    }
}

fn digest(resolved: &impl Serialize) -> Result<String> {
    let canonical = serde_json::to_vec(resolved)?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}

fn series_file(dir: &Path, label: &str, key: &SeriesKey, kind: &str) -> PathBuf {
    dir.join(format!("{label}.{}.{}.{kind}.tsv", key.variable, key.slice))
}

/// Series with fewer than [`MIN_TRUSTED_SAMPLES`] observations.
pub fn sparse_series(profile: &Profile) -> Vec<(SeriesKey, usize)> {
    profile
        .keys()
        .into_iter()
        .filter_map(|k| {
            let n = profile.series(&k).map(|s| s.len()).unwrap_or(0);
            (n < MIN_TRUSTED_SAMPLES).then_some((k, n))
        })
        .collect()
}

/// Keys present in every profile.
pub fn shared_keys(profiles: &[&Profile]) -> Vec<SeriesKey> {
    let mut iter = profiles.iter();
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    let mut keys: BTreeSet<SeriesKey> = first.keys().into_iter().collect();
    for p in iter {
        let other: BTreeSet<SeriesKey> = p.keys().into_iter().collect();
        keys = keys.intersection(&other).cloned().collect();
    }
    keys.into_iter().collect()
}

// ---------------------------------------------------------------------------
// simulate

/// A scenario file may carry its agents inline.
#[derive(Debug, Clone, Deserialize)]
struct ScenarioFile {
    #[serde(flatten)]
    scenario: ScenarioConfig,
    #[serde(default)]
    agents: Option<Vec<AgentSpec>>,
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub config: Option<PathBuf>,
    pub agents: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub concurrent: bool,
    pub seed: Option<u64>,
    pub label: Option<String>,
}

/// The default pair: an energy saver and a throughput maximizer, both acting
/// once a second, half a second apart.
pub fn default_agents() -> Vec<AgentSpec> {
    vec![
        AgentSpec::energy_saver("es", 1.0),
        AgentSpec::throughput_max("tm", 1.0).with_offset(0.5),
    ]
}

pub fn load_scenario(
    config: Option<&Path>,
    agents: Option<&Path>,
    seed: Option<u64>,
) -> Result<(ScenarioConfig, Vec<AgentSpec>)> {
    let (mut scenario, inline) = match config {
        Some(path) => {
            let file: ScenarioFile = serde_json::from_str(&crate::io::read_file(path)?)?;
            (file.scenario, file.agents)
        }
        None => (ScenarioConfig::default(), None),
    };
    let agent_list = match agents {
        Some(path) => agents_from_json(&crate::io::read_file(path)?)?,
        None => inline.unwrap_or_else(default_agents),
    };
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    scenario.validate()?;
    Ok((scenario, agent_list))
}

pub fn simulate(opts: &SimulateOptions) -> Result<RunManifest> {
    let (scenario, agents) =
        load_scenario(opts.config.as_deref(), opts.agents.as_deref(), opts.seed)?;
    let label = opts
        .label
        .clone()
        .unwrap_or_else(|| "concurrent".to_string());

    #[derive(Serialize)]
    struct Resolved<'a> {
        scenario: &'a ScenarioConfig,
        agents: &'a [AgentSpec],
        concurrent: bool,
        label: &'a str,
    }
    let inputs = opts
        .config
        .iter()
        .chain(opts.agents.iter())
        .cloned()
        .collect();
    let mut manifest = RunManifest::new(
        Command::Simulate,
        inputs,
        &Resolved {
            scenario: &scenario,
            agents: &agents,
            concurrent: opts.concurrent,
            label: &label,
        },
    )?;

    if opts.concurrent {
        let trace = run_concurrent(&scenario, &agents)?;
        let profile = trace_to_profile(&trace, &label)?;
        manifest.emit(
            opts.out_dir.join(format!("{label}.profile.tsv")),
            profile.to_tsv(),
        )?;
        manifest.emit(
            opts.out_dir.join(format!("{label}.trace.tsv")),
            trace.to_trace_tsv(),
        )?;
    } else {
        for agent in &agents {
            let trace = run_single(&scenario, agent)?;
            let profile = trace_to_profile(&trace, &agent.app_id)?;
            let id = &agent.app_id;
            manifest.emit(
                opts.out_dir.join(format!("{id}.profile.tsv")),
                profile.to_tsv(),
            )?;
            manifest.emit(
                opts.out_dir.join(format!("{id}.trace.tsv")),
                trace.to_trace_tsv(),
            )?;
        }
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// profile

/// Writes one ECDF file per series of a profile.
pub fn profile_ecdfs(
    profile_path: &Path,
    out_dir: &Path,
    label: Option<&str>,
) -> Result<RunManifest> {
    let profile = Profile::read(profile_path)?;
    let label = label.unwrap_or(&profile.app_id).to_string();
    let mut manifest = RunManifest::new(
        Command::Profile,
        vec![profile_path.to_path_buf()],
        &("profile", &label),
    )?;
    for key in profile.keys() {
        let ecdf = build_ecdf(&profile.series(&key)?)?;
        manifest.emit(series_file(out_dir, &label, &key, "ecdf"), ecdf.to_tsv())?;
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// conflict

pub fn conflict(
    profile_a: &Path,
    profile_b: &Path,
    kpm_keys: Option<&[SeriesKey]>,
    out_path: &Path,
) -> Result<(ConflictReport, RunManifest)> {
    let a = Profile::read(profile_a)?;
    let b = Profile::read(profile_b)?;
    let variables = shared_keys(&[&a, &b]);
    let kpms = match kpm_keys {
        Some(keys) => keys.to_vec(),
        None => {
            let slices: BTreeSet<&str> = variables.iter().map(|k| k.slice.as_str()).collect();
            default_kpm_keys(slices)
        }
    };
    let report = conflict_report(&a, &b, &variables, &kpms)?;
    let mut manifest = RunManifest::new(
        Command::Conflict,
        vec![profile_a.to_path_buf(), profile_b.to_path_buf()],
        &("conflict", &kpms),
    )?;
    manifest.emit(out_path.to_path_buf(), report.to_json()?)?;
    Ok((report, manifest))
}

// ---------------------------------------------------------------------------
// predict

#[derive(Debug, Clone, Default)]
pub struct PredictOptions {
    pub profiles: Vec<PathBuf>,
    pub periods: Vec<f64>,
    pub offsets: Option<Vec<f64>>,
    pub holds: Option<Vec<f64>>,
    pub measured: Option<PathBuf>,
    pub label: String,
    pub out_dir: PathBuf,
}

/// Zips periods with optional offsets and holds; all lists must match the
/// profile count.
pub fn build_timings(
    count: usize,
    periods: &[f64],
    offsets: Option<&[f64]>,
    holds: Option<&[f64]>,
) -> Result<Vec<TimingSpec>> {
    let check = |what: &str, len: usize| {
        if len == count {
            Ok(())
        } else {
            Err(Error::ConfigMismatch(format!(
                "{count} profiles but {len} {what}"
            )))
        }
    };
    check("periods", periods.len())?;
    if let Some(o) = offsets {
        check("offsets", o.len())?;
    }
    if let Some(h) = holds {
        check("holds", h.len())?;
    }
    Ok((0..count)
        .map(|i| TimingSpec {
            period: periods[i],
            offset: offsets.map_or(0.0, |o| o[i]),
            hold: holds.map(|h| h[i]),
        })
        .collect())
}

pub fn predict_files(opts: &PredictOptions) -> Result<(PredictionReport, RunManifest)> {
    if opts.profiles.is_empty() {
        return Err(Error::EmptyInput);
    }
    let timings = build_timings(
        opts.profiles.len(),
        &opts.periods,
        opts.offsets.as_deref(),
        opts.holds.as_deref(),
    )?;
    let profiles = opts
        .profiles
        .iter()
        .map(|p| Profile::read(p))
        .collect::<Result<Vec<_>>>()?;
    let measured = opts.measured.as_deref().map(Profile::read).transpose()?;
    let refs: Vec<&Profile> = profiles.iter().collect();
    let variables = shared_keys(&refs);
    let report = predict(
        &profiles,
        &timings,
        &variables,
        measured.as_ref(),
        &opts.label,
    )?;

    let mut inputs = opts.profiles.clone();
    inputs.extend(opts.measured.iter().cloned());
    let mut manifest = RunManifest::new(
        Command::Predict,
        inputs,
        &("predict", &opts.label, &timings),
    )?;
    write_prediction(&mut manifest, &opts.out_dir, &report)?;
    Ok((report, manifest))
}

fn write_prediction(
    manifest: &mut RunManifest,
    dir: &Path,
    report: &PredictionReport,
) -> Result<()> {
    let label = &report.config_label;
    for (key, pred) in &report.per_variable {
        manifest.emit(series_file(dir, label, key, "pred"), pred.to_tsv())?;
    }
    manifest.emit(
        dir.join(format!("{label}.prediction.json")),
        report.to_json()?,
    )
}

// ---------------------------------------------------------------------------
// compare

#[derive(Debug, Clone, PartialEq)]
pub enum Comparison {
    /// Two step-CDF files.
    Cdf(DistancePair),
    /// Two profiles, compared series by series.
    Profiles(BTreeMap<SeriesKey, DistancePair>),
}

fn is_profile(text: &str) -> bool {
    text.lines()
        .find(|l| !l.starts_with('#') && !l.trim().is_empty())
        .is_some_and(|l| l.trim_end() == crate::profile::PROFILE_HEADER)
}

fn load_step(text: &str, source: &str) -> Result<Ecdf> {
    let (support, probs, n) = parse_step_tsv(text, source)?;
    Ecdf::from_parts(support, probs, n.unwrap_or(0))
}

/// Distances between two step-CDF files (ECDF or prediction) or between two
/// profiles.
pub fn compare(a: &Path, b: &Path, out_path: Option<&Path>) -> Result<(Comparison, RunManifest)> {
    let ta = crate::io::read_file(a)?;
    let tb = crate::io::read_file(b)?;
    let (sa, sb) = (a.display().to_string(), b.display().to_string());
    let comparison = match (is_profile(&ta), is_profile(&tb)) {
        (true, true) => {
            let pa = Profile::from_tsv(&ta, &sa)?;
            let pb = Profile::from_tsv(&tb, &sb)?;
            let mut map = BTreeMap::new();
            for key in shared_keys(&[&pa, &pb]) {
                let ea = build_ecdf(&pa.series(&key)?)?;
                let eb = build_ecdf(&pb.series(&key)?)?;
                map.insert(key, DistancePair::between(&ea, &eb));
            }
            Comparison::Profiles(map)
        }
        (false, false) => Comparison::Cdf(DistancePair::between(
            &load_step(&ta, &sa)?,
            &load_step(&tb, &sb)?,
        )),
        _ => {
            return Err(Error::ConfigMismatch(
                "compare needs two profiles or two step-CDF files".into(),
            ))
        }
    };
    let mut manifest = RunManifest::new(
        Command::Compare,
        vec![a.to_path_buf(), b.to_path_buf()],
        &"compare",
    )?;
    if let Some(out) = out_path {
        let json = match &comparison {
            Comparison::Cdf(d) => serde_json::to_string_pretty(d)?,
            Comparison::Profiles(m) => serde_json::to_string_pretty(&serde_json::json!({
                "per_variable": crate::metrics::keyed_rows(m)
            }))?,
        };
        manifest.emit(out.to_path_buf(), json + "\n")?;
    }
    Ok((comparison, manifest))
}

// ---------------------------------------------------------------------------
// reproduce

/// One concurrent deployment to predict and then measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deployment {
    pub label: String,
    pub es: TimingSpec,
    pub tm: TimingSpec,
}

impl Deployment {
    fn new(label: &str, es: TimingSpec, tm: TimingSpec) -> Self {
        Deployment {
            label: label.to_string(),
            es,
            tm,
        }
    }
}

/// Equal periods, fast energy saver, fast throughput maximizer.
pub fn default_deployments() -> Vec<Deployment> {
    vec![
        Deployment::new(
            "ES1-TM1",
            TimingSpec::every(1.0),
            TimingSpec::every(1.0).with_offset(0.5),
        ),
        Deployment::new(
            "ES2-TM10",
            TimingSpec::every(2.0),
            TimingSpec::every(10.0).with_offset(1.0),
        ),
        Deployment::new(
            "ES10-TM2",
            TimingSpec::every(10.0).with_offset(1.0),
            TimingSpec::every(2.0),
        ),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceOptions {
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub scenario: ScenarioConfig,
    pub deployments: Vec<Deployment>,
    /// Slice whose variables are predicted and compared.
    pub slice: String,
    /// Period used when profiling each application alone.
    pub profiling_period: f64,
}

impl ReproduceOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        ReproduceOptions {
            out_dir: out_dir.into(),
            scenario: ScenarioConfig::default(),
            deployments: default_deployments(),
            slice: "embb".to_string(),
            profiling_period: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub config: String,
    pub key: SeriesKey,
    /// Prediction with timing-derived effective weights.
    pub effective: DistancePair,
    /// Prediction with plain rate weights.
    pub rate: DistancePair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentOutcome {
    pub label: String,
    pub weights: WeightVector,
    pub rate_weights: WeightVector,
    pub occupancy: BTreeMap<String, f64>,
    /// Integral distance of the measured PRB ECDF to each solo profile.
    pub prb_int_to_es: f64,
    pub prb_int_to_tm: f64,
}

#[derive(Debug, Clone)]
pub struct ReproduceSummary {
    pub conflict: ConflictReport,
    pub rows: Vec<ComparisonRow>,
    pub deployments: Vec<DeploymentOutcome>,
}

impl ReproduceSummary {
    pub const HEADER: &'static str = "config\tvariable\tslice\tks\tint\tks_rate\tint_rate";

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.config,
                r.key.variable,
                r.key.slice,
                r.effective.ks,
                r.effective.int,
                r.rate.ks,
                r.rate.int
            ));
        }
        out
    }

    pub fn deployments_tsv(&self) -> String {
        let mut out = String::from(
            "config\tes_weight\ttm_weight\tes_rate_weight\ttm_rate_weight\tes_occupancy\ttm_occupancy\tprb_int_to_es\tprb_int_to_tm\n",
        );
        for d in &self.deployments {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                d.label,
                d.weights.weights()[0],
                d.weights.weights()[1],
                d.rate_weights.weights()[0],
                d.rate_weights.weights()[1],
                d.occupancy.get("es").copied().unwrap_or(0.0),
                d.occupancy.get("tm").copied().unwrap_or(0.0),
                d.prb_int_to_es,
                d.prb_int_to_tm,
            ));
        }
        out
    }

    pub fn row(&self, config: &str, variable: &str) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.key.variable == variable)
    }
}

/// Profiles both applications alone, then for every deployment predicts the
/// concurrent distributions, simulates the deployment, and compares.
pub fn reproduce(opts: &ReproduceOptions) -> Result<(ReproduceSummary, RunManifest)> {
    let dir = &opts.out_dir;
    let scenario = &opts.scenario;
    let mut manifest = RunManifest::new(Command::Reproduce, Vec::new(), opts)?;

    let es_agent = AgentSpec::energy_saver("es", opts.profiling_period);
    let tm_agent = AgentSpec::throughput_max("tm", opts.profiling_period);
    let solo = |agent: &AgentSpec| -> Result<Profile> {
        let trace = run_single(scenario, agent)?;
        trace_to_profile(&trace, &agent.app_id)
    };
    let es = solo(&es_agent).map_err(|e| e.in_stage("profile"))?;
    let tm = solo(&tm_agent).map_err(|e| e.in_stage("profile"))?;
    manifest.emit(dir.join("es.profile.tsv"), es.to_tsv())?;
    manifest.emit(dir.join("tm.profile.tsv"), tm.to_tsv())?;

    let variables: Vec<SeriesKey> = [SLICE_PRB, DL_BUFFER_BYTES, TX_BRATE_DL_MBPS]
        .into_iter()
        .map(|v| SeriesKey::new(v, opts.slice.as_str()))
        .collect();
    let conflict = conflict_report(
        &es,
        &tm,
        &variables,
        &default_kpm_keys([opts.slice.as_str()]),
    )
    .map_err(|e| e.in_stage("conflict"))?;
    manifest.emit(dir.join("conflict.json"), conflict.to_json()?)?;

    let prb_key = SeriesKey::new(SLICE_PRB, opts.slice.as_str());
    let es_prb = build_ecdf(&es.series(&prb_key)?)?;
    let tm_prb = build_ecdf(&tm.series(&prb_key)?)?;

    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for dep in &opts.deployments {
        let label = dep.label.as_str();
        let profiles = [es.clone(), tm.clone()];
        let timings = [dep.es, dep.tm];
        let rate_timings = [
            TimingSpec::every(dep.es.period),
            TimingSpec::every(dep.tm.period),
        ];

        let mut prediction = predict(&profiles, &timings, &variables, None, label)
            .map_err(|e| e.in_stage("predict"))?;
        let rate_prediction = predict(&profiles, &rate_timings, &variables, None, label)
            .map_err(|e| e.in_stage("predict"))?;

        let agents = [
            AgentSpec {
                timing: dep.es,
                ..es_agent.clone()
            },
            AgentSpec {
                timing: dep.tm,
                ..tm_agent.clone()
            },
        ];
        let trace = run_concurrent(scenario, &agents).map_err(|e| e.in_stage("measure"))?;
        let measured = trace_to_profile(&trace, label).map_err(|e| e.in_stage("measure"))?;
        let occupancy = occupancy_fractions(&trace).map_err(|e| e.in_stage("measure"))?;
        manifest.emit(
            dir.join(format!("{label}.measured.profile.tsv")),
            measured.to_tsv(),
        )?;

        let mut comparison = BTreeMap::new();
        for key in &variables {
            let actual = build_ecdf(&measured.series(key)?).map_err(|e| e.in_stage("compare"))?;
            let effective = DistancePair::between(&prediction.per_variable[key], &actual);
            let rate = DistancePair::between(&rate_prediction.per_variable[key], &actual);
            comparison.insert(key.clone(), effective);
            rows.push(ComparisonRow {
                config: label.to_string(),
                key: key.clone(),
                effective,
                rate,
            });
            manifest.emit(series_file(dir, label, key, "measured"), actual.to_tsv())?;
        }
        prediction.comparison = Some(comparison);
        write_prediction(&mut manifest, dir, &prediction)?;

        let measured_prb = build_ecdf(&measured.series(&prb_key)?)?;
        outcomes.push(DeploymentOutcome {
            label: label.to_string(),
            weights: prediction.per_variable[&prb_key].weights.clone(),
            rate_weights: rate_prediction.per_variable[&prb_key].weights.clone(),
            occupancy,
            prb_int_to_es: crate::metrics::int_distance(&measured_prb, &es_prb),
            prb_int_to_tm: crate::metrics::int_distance(&measured_prb, &tm_prb),
        });
    }

    let summary = ReproduceSummary {
        conflict,
        rows,
        deployments: outcomes,
    };
    manifest.emit(dir.join("summary.tsv"), summary.to_tsv())?;
    manifest.emit(dir.join("deployments.tsv"), summary.deployments_tsv())?;
    Ok((summary, manifest))
}
