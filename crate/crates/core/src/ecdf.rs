//! Empirical CDFs and the support-vector algebra shared by the distance and
//! prediction code.
//!
//! An [`Ecdf`] is kept in canonical form: distinct support points in strictly
//! increasing order, each paired with the right-continuous cumulative
//! probability at that point. Support values are compared with exact float
//! equality; no epsilon merging is done.

use std::path::Path;

use crate::error::{Error, Result};

pub const STEP_HEADER: &str = "x\ty";

/// A right-continuous step CDF described by its jump points.
///
/// Implemented by measured ECDFs and predicted mixtures alike, so both can be
/// fed to the distance functions unchanged.
pub trait StepCdf {
    fn support(&self) -> &[f64];
    fn probs(&self) -> &[f64];

    /// `F(x)`: the probability at the largest support point `<= x`, or 0.
    fn evaluate(&self, x: f64) -> f64 {
        let idx = self.support().partition_point(|&s| s <= x);
        if idx == 0 {
            0.0
        } else {
            self.probs()[idx - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    support: Vec<f64>,
    probs: Vec<f64>,
    sample_count: usize,
}

impl StepCdf for Ecdf {
    fn support(&self) -> &[f64] {
        &self.support
    }

    fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl Ecdf {
    /// Builds the ECDF of `samples`. Duplicates collapse into one support
    /// point carrying their accumulated mass.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        build_ecdf(samples)
    }

    /// Assembles an ECDF from already-computed parts, checking the canonical
    /// form invariants.
    pub fn from_parts(support: Vec<f64>, probs: Vec<f64>, sample_count: usize) -> Result<Self> {
        validate_step(&support, &probs)?;
        Ok(Ecdf {
            support,
            probs,
            sample_count,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.support[0]
    }

    pub fn max(&self) -> f64 {
        self.support[self.support.len() - 1]
    }

    pub fn to_tsv(&self) -> String {
        step_tsv(&self.support, &self.probs, self.sample_count)
    }

    pub fn from_tsv(text: &str, source: &str) -> Result<Self> {
        let (support, probs, sample_count) = parse_step_tsv(text, source)?;
        Ecdf::from_parts(support, probs, sample_count.unwrap_or(0)).map_err(|e| Error::Parse {
            path: source.to_string(),
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = crate::io::read_file(path)?;
        Ecdf::from_tsv(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_tsv())
    }
}

pub fn build_ecdf(samples: &[f64]) -> Result<Ecdf> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteSample { index, value });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);

    let n = sorted.len();
    let total = n as f64;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    let mut i = 0;
    while i < n {
        let x = sorted[i];
        let mut j = i + 1;
        while j < n && sorted[j] == x {
            j += 1;
        }
        support.push(x);
        probs.push(j as f64 / total);
        i = j;
    }
    Ok(Ecdf {
        support,
        probs,
        sample_count: n,
    })
}

/// Sorted, deduplicated union of the inputs' supports.
pub fn union_support<C: StepCdf>(cdfs: &[C]) -> Result<Vec<f64>> {
    let (first, rest) = cdfs.split_first().ok_or(Error::EmptyInput)?;
    let mut acc = first.support().to_vec();
    for cdf in rest {
        acc = merge_two(&acc, cdf.support());
    }
    Ok(acc)
}

pub(crate) fn merge_two(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x < y {
            out.push(x);
            i += 1;
        } else if y < x {
            out.push(y);
            j += 1;
        } else {
            out.push(x);
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Evaluates `cdf` at every point of `common`, which must be strictly
/// increasing and contain every support point of `cdf`.
pub fn step_interpolate<C: StepCdf + ?Sized>(cdf: &C, common: &[f64]) -> Result<Vec<f64>> {
    if let Some(k) = common.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::UnsortedSupport(k + 1));
    }
    let support = cdf.support();
    let probs = cdf.probs();
    let mut out = Vec::with_capacity(common.len());
    let mut j = 0;
    let mut current = 0.0;
    for &c in common {
        if j < support.len() {
            if support[j] < c {
                return Err(Error::SupportNotCovered(support[j]));
            }
            if support[j] == c {
                current = probs[j];
                j += 1;
            }
        }
        out.push(current);
    }
    if j < support.len() {
        return Err(Error::SupportNotCovered(support[j]));
    }
    Ok(out)
}

pub(crate) fn validate_step(support: &[f64], probs: &[f64]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::EmptyInput);
    }
    if support.len() != probs.len() {
        return Err(Error::LengthMismatch {
            left: support.len(),
            right: probs.len(),
        });
    }
    if let Some((index, &value)) = support.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteSample { index, value });
    }
    if let Some(k) = support.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::UnsortedSupport(k + 1));
    }
    let monotone = probs.windows(2).all(|w| w[0] <= w[1]);
    let in_range = probs.iter().all(|&p| p > 0.0 && p <= 1.0);
    if !monotone || !in_range || probs[probs.len() - 1] != 1.0 {
        return Err(Error::InvalidConfig(
            "cumulative probabilities must be non-decreasing in (0, 1] and end at 1".into(),
        ));
    }
    Ok(())
}

/// Shared writer for the two-column `x`, `y` step-function format.
pub(crate) fn step_tsv(support: &[f64], probs: &[f64], sample_count: usize) -> String {
    let mut out = String::with_capacity(24 * (support.len() + 2));
    out.push_str(&format!("# samples={sample_count}\n"));
    out.push_str(STEP_HEADER);
    out.push('\n');
    for (x, y) in support.iter().zip(probs) {
        out.push_str(&format!("{x}\t{y}\n"));
    }
    out
}

pub(crate) fn parse_step_tsv(
    text: &str,
    source: &str,
) -> Result<(Vec<f64>, Vec<f64>, Option<usize>)> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let mut samples = None;
    let mut header_seen = false;
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if let Some(comment) = raw.strip_prefix('#') {
                if let Some(n) = comment.trim_start().strip_prefix("samples=") {
                    samples = Some(
                        n.trim()
                            .parse()
                            .map_err(|_| parse_err(lineno, format!("bad sample count `{n}`")))?,
                    );
                }
                continue;
            }
            if raw.trim_end() != STEP_HEADER {
                return Err(parse_err(
                    lineno,
                    format!("expected header `{STEP_HEADER}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let (x, y) = raw
            .split_once('\t')
            .ok_or_else(|| parse_err(lineno, "expected two tab-separated fields".into()))?;
        support.push(
            x.parse()
                .map_err(|_| parse_err(lineno, format!("bad x `{x}`")))?,
        );
        probs.push(
            y.trim_end()
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad y `{y}`")))?,
        );
    }
    if !header_seen {
        return Err(parse_err(0, "missing header".into()));
    }
    Ok((support, probs, samples))
}
