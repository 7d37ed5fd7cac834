//! Frequency-weighted ECDF mixtures.
//!
//! Each application's ECDF is step-interpolated onto the union support and
//! the results are summed with weights derived from control timing. Rate
//! weights are proportional to `1/period`; effective weights are proportional
//! to the fraction of time an application's most recent action stays in force
//! before another application overwrites it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ecdf::{build_ecdf, step_interpolate, step_tsv, union_support, Ecdf, StepCdf};
use crate::error::{Error, Result};
use crate::metrics::{keyed_rows, DistancePair, KeyedDistance};
use crate::profile::{Profile, SeriesKey};

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Control timing of one application, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSpec {
    pub period: f64,
    #[serde(default)]
    pub offset: f64,
    /// Mean time per cycle the application's action stays in effect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold: Option<f64>,
}

impl TimingSpec {
    pub fn every(period: f64) -> Self {
        TimingSpec {
            period,
            offset: 0.0,
            hold: None,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_hold(mut self, hold: f64) -> Self {
        self.hold = Some(hold);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::NonPositivePeriod(self.period));
        }
        if !(self.offset >= 0.0 && self.offset < self.period) {
            return Err(Error::InconsistentTiming(format!(
                "offset {} outside [0, {})",
                self.offset, self.period
            )));
        }
        if let Some(hold) = self.hold {
            if hold > self.period {
                return Err(Error::HoldExceedsPeriod {
                    hold,
                    period: self.period,
                });
            }
            if !(hold > 0.0) {
                return Err(Error::InconsistentTiming(format!(
                    "hold must be positive, got {hold}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WeightMode {
    /// Proportional to control-message rate `1/period`.
    Rate,
    /// Proportional to the fraction of time each action stays in force.
    Effective,
    /// `1/hold` substituted into the rate formula. Kept for comparison only:
    /// it gives the longer-held action the smaller weight.
    InverseHold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    mode: WeightMode,
}

impl WeightVector {
    /// Wraps explicit weights; they must be positive and sum to 1.
    pub fn new(weights: Vec<f64>, mode: WeightMode) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.iter().any(|w| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "weights must lie in (0, 1]: {weights:?}"
            )));
        }
        let total = ordered_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(WeightVector { weights, mode })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Sum that does not depend on the order of its terms.
fn ordered_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.collect();
    v.sort_unstable_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Normalizes positive scores into weights, `w_i = 1 / sum_j(s_j / s_i)`.
/// Equal scores give exactly `1/n`.
fn normalize(scores: &[f64], mode: WeightMode) -> Result<WeightVector> {
    let weights = scores
        .iter()
        .map(|&si| 1.0 / ordered_sum(scores.iter().map(|&sj| sj / si)))
        .collect();
    WeightVector::new(weights, mode)
}

/// `w_i = (1/tau_i) / sum_j (1/tau_j)`.
pub fn rate_weights(periods: &[f64]) -> Result<WeightVector> {
    if periods.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&p) = periods.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::NonPositivePeriod(p));
    }
    let rates: Vec<f64> = periods.iter().map(|p| 1.0 / p).collect();
    normalize(&rates, WeightMode::Rate)
}

/// Per-cycle holds, either given explicitly or derived from the offsets of a
/// shared period.
fn resolve_holds(timings: &[TimingSpec]) -> Result<Vec<f64>> {
    if timings.is_empty() {
        return Err(Error::EmptyInput);
    }
    for t in timings {
        t.validate()?;
    }
    let given: Vec<f64> = timings.iter().filter_map(|t| t.hold).collect();
    if given.len() == timings.len() {
        return Ok(given);
    }
    if !given.is_empty() {
        return Err(Error::InconsistentTiming(
            "hold given for some applications but not all".into(),
        ));
    }
    let period = timings[0].period;
    if timings.iter().any(|t| t.period != period) {
        return Err(Error::InconsistentTiming(
            "holds are absent and periods differ".into(),
        ));
    }
    // Each action lasts until the next offset on the cyclic timeline.
    let mut order: Vec<usize> = (0..timings.len()).collect();
    order.sort_by(|&a, &b| timings[a].offset.total_cmp(&timings[b].offset));
    let mut holds = vec![0.0; timings.len()];
    for (pos, &i) in order.iter().enumerate() {
        let next = match order.get(pos + 1) {
            Some(&j) => timings[j].offset,
            None => timings[order[0]].offset + period,
        };
        let hold = next - timings[i].offset;
        if !(hold > 0.0) {
            return Err(Error::InconsistentTiming(format!(
                "applications share offset {}",
                timings[i].offset
            )));
        }
        holds[i] = hold;
    }
    Ok(holds)
}

/// Weights proportional to each application's in-force time fraction
/// `hold / period`.
pub fn effective_weights(timings: &[TimingSpec]) -> Result<WeightVector> {
    let holds = resolve_holds(timings)?;
    let fractions: Vec<f64> = holds
        .iter()
        .zip(timings)
        .map(|(h, t)| h / t.period)
        .collect();
    normalize(&fractions, WeightMode::Effective)
}

/// The rate formula with the hold in place of the period.
pub fn inverse_hold_weights(timings: &[TimingSpec]) -> Result<WeightVector> {
    let holds = resolve_holds(timings)?;
    let rates: Vec<f64> = holds.iter().map(|h| 1.0 / h).collect();
    normalize(&rates, WeightMode::InverseHold)
}

/// Mean per-cycle hold of each application under last-writer-wins, from the
/// periodic firing schedule.
///
/// Works for unequal periods. Simultaneous firings resolve by later offset,
/// then by later position in `timings`. The schedule is integrated over the
/// hyperperiod when the periods are commensurate at microsecond resolution,
/// otherwise over 1000 cycles of the slowest application.
pub fn schedule_holds(timings: &[TimingSpec]) -> Result<Vec<f64>> {
    if timings.is_empty() {
        return Err(Error::EmptyInput);
    }
    for t in timings {
        t.validate()?;
    }
    let max_period = timings.iter().map(|t| t.period).fold(0.0, f64::max);
    let horizon = hyperperiod(timings.iter().map(|t| t.period))
        .filter(|h| *h <= 1e4 * max_period)
        .unwrap_or(1000.0 * max_period);
    // Skip the warm-up before every application has acted once.
    let start = timings.iter().map(|t| t.offset).fold(0.0, f64::max);
    let end = start + horizon;

    struct Firing {
        time: f64,
        offset: f64,
        agent: usize,
    }
    let mut firings = Vec::new();
    for (agent, t) in timings.iter().enumerate() {
        let mut k = 0u64;
        loop {
            let time = t.offset + k as f64 * t.period;
            if time >= end {
                break;
            }
            firings.push(Firing {
                time,
                offset: t.offset,
                agent,
            });
            k += 1;
        }
    }
    firings.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.offset.total_cmp(&b.offset))
            .then(a.agent.cmp(&b.agent))
    });

    let mut active = vec![0.0; timings.len()];
    for (idx, f) in firings.iter().enumerate() {
        let until = firings.get(idx + 1).map_or(end, |n| n.time);
        let lo = f.time.max(start);
        let hi = until.min(end);
        if hi > lo {
            active[f.agent] += hi - lo;
        }
    }
    let holds: Vec<f64> = active
        .iter()
        .zip(timings)
        .map(|(a, t)| a / horizon * t.period)
        .collect();
    if let Some(i) = holds.iter().position(|h| !(*h > 0.0)) {
        return Err(Error::InconsistentTiming(format!(
            "application {i} is never the last writer"
        )));
    }
    Ok(holds)
}

fn hyperperiod(periods: impl Iterator<Item = f64>) -> Option<f64> {
    const SCALE: f64 = 1e6;
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut lcm: u128 = 1;
    for p in periods {
        let scaled = p * SCALE;
        let units = scaled.round();
        if (scaled - units).abs() > 1e-6 * scaled.max(1.0) || units < 1.0 {
            return None;
        }
        let units = units as u128;
        lcm = lcm / gcd(lcm, units) * units;
        if lcm > u64::MAX as u128 {
            return None;
        }
    }
    Some(lcm as f64 / SCALE)
}

/// Weighted mixture of step CDFs on their merged support.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedCdf {
    support: Vec<f64>,
    probs: Vec<f64>,
    pub weights: WeightVector,
    /// Application ids in weight order.
    pub inputs: Vec<String>,
    sample_count: usize,
}

impl StepCdf for PredictedCdf {
    fn support(&self) -> &[f64] {
        &self.support
    }

    fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl PredictedCdf {
    /// Total samples across all inputs.
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn to_tsv(&self) -> String {
        step_tsv(&self.support, &self.probs, self.sample_count)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_tsv())
    }
}

/// `F_w(x) = sum_i w_i * F_i(x)` on the union of the input supports.
pub fn weighted_ecdf_average(ecdfs: &[Ecdf], weights: &WeightVector) -> Result<PredictedCdf> {
    if ecdfs.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: ecdfs.len(),
            right: weights.len(),
        });
    }
    let support = union_support(ecdfs)?;
    let mut components = ecdfs
        .iter()
        .zip(weights.weights())
        .map(|(e, &w)| step_interpolate(e, &support).map(|f| (w, f)))
        .collect::<Result<Vec<_>>>()?;

    // Accumulate in a canonical order so that permuting the inputs cannot
    // change the result by even one ulp.
    components.sort_by(|(wa, fa), (wb, fb)| {
        wa.total_cmp(wb).then_with(|| {
            fa.iter()
                .zip(fb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    let mut probs = vec![0.0; support.len()];
    for (w, f) in &components {
        for (acc, v) in probs.iter_mut().zip(f) {
            *acc += w * v;
        }
    }
    for p in probs.iter_mut() {
        *p = p.min(1.0);
    }
    if let Some(last) = probs.last_mut() {
        *last = 1.0;
    }
    Ok(PredictedCdf {
        support,
        probs,
        weights: weights.clone(),
        inputs: Vec::new(),
        sample_count: ecdfs.iter().map(Ecdf::sample_count).sum(),
    })
}

/// Picks the weighting for a set of timings: effective when holds or non-zero
/// offsets are supplied, rate otherwise.
pub fn timing_weights(timings: &[TimingSpec]) -> Result<WeightVector> {
    let has_hold = timings.iter().any(|t| t.hold.is_some());
    let has_offset = timings.iter().any(|t| t.offset != 0.0);
    if has_hold {
        return effective_weights(timings);
    }
    if has_offset {
        let shared_period = timings.iter().all(|t| t.period == timings[0].period);
        if shared_period {
            return effective_weights(timings);
        }
        let holds = schedule_holds(timings)?;
        let with_holds: Vec<TimingSpec> = timings
            .iter()
            .zip(holds)
            .map(|(t, h)| t.with_hold(h.min(t.period)))
            .collect();
        return effective_weights(&with_holds);
    }
    let periods: Vec<f64> = timings.iter().map(|t| t.period).collect();
    rate_weights(&periods)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub config_label: String,
    pub per_variable: BTreeMap<SeriesKey, PredictedCdf>,
    pub comparison: Option<BTreeMap<SeriesKey, DistancePair>>,
}

/// Predicts the distribution of every requested variable when the profiled
/// applications run together, optionally scoring it against a measured
/// concurrent profile.
pub fn predict(
    profiles: &[Profile],
    timings: &[TimingSpec],
    variables: &[SeriesKey],
    measured: Option<&Profile>,
    config_label: &str,
) -> Result<PredictionReport> {
    if profiles.len() != timings.len() {
        return Err(Error::ConfigMismatch(format!(
            "{} profiles but {} timings",
            profiles.len(),
            timings.len()
        )));
    }
    if profiles.is_empty() {
        return Err(Error::EmptyInput);
    }
    let weights = timing_weights(timings)?;
    let inputs: Vec<String> = profiles.iter().map(|p| p.app_id.clone()).collect();

    let mut per_variable = BTreeMap::new();
    for key in variables {
        let ecdfs = profiles
            .iter()
            .map(|p| build_ecdf(&p.series(key)?))
            .collect::<Result<Vec<_>>>()?;
        let mut predicted = weighted_ecdf_average(&ecdfs, &weights)?;
        predicted.inputs = inputs.clone();
        per_variable.insert(key.clone(), predicted);
    }

    let comparison = measured
        .map(|m| {
            per_variable
                .iter()
                .map(|(key, pred)| {
                    let actual = build_ecdf(&m.series(key)?)?;
                    Ok((key.clone(), DistancePair::between(pred, &actual)))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .transpose()?;

    Ok(PredictionReport {
        config_label: config_label.to_string(),
        per_variable,
        comparison,
    })
}

#[derive(Serialize)]
struct PredictedRow<'a> {
    variable: &'a str,
    slice: &'a str,
    support: &'a [f64],
    probs: &'a [f64],
    weights: &'a [f64],
    mode: WeightMode,
}

#[derive(Serialize)]
struct PredictionReportDoc<'a> {
    config_label: &'a str,
    per_variable: Vec<PredictedRow<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Vec<KeyedDistance>>,
}

impl PredictionReport {
    pub fn to_json(&self) -> Result<String> {
        let doc = PredictionReportDoc {
            config_label: &self.config_label,
            per_variable: self
                .per_variable
                .iter()
                .map(|(k, p)| PredictedRow {
                    variable: &k.variable,
                    slice: &k.slice,
                    support: &p.support,
                    probs: &p.probs,
                    weights: p.weights.weights(),
                    mode: p.weights.mode(),
                })
                .collect(),
            comparison: self.comparison.as_ref().map(keyed_rows),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_json()?)
    }
}
