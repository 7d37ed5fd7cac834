//! Distances between step CDFs and the conflict severity index.
//!
//! Both distances are evaluated exactly on the union of the two supports:
//! between consecutive union points both step functions are constant, so the
//! K-S maximum is attained at a union point and the integral is a finite sum
//! of rectangles. Outside `[min, max]` of the union both CDFs agree (0 or 1).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ecdf::{build_ecdf, merge_two, step_interpolate, StepCdf};
use crate::error::{Error, Result};
use crate::profile::{Profile, SeriesKey, DL_BUFFER_BYTES, TX_BRATE_DL_MBPS};

/// Kolmogorov-Smirnov and integral distance for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DistancePair {
    pub ks: f64,
    pub int: f64,
}

impl DistancePair {
    pub fn between<A: StepCdf + ?Sized, B: StepCdf + ?Sized>(a: &A, b: &B) -> Self {
        let gaps = StepGaps::new(a, b);
        DistancePair {
            ks: gaps.max_gap(),
            int: gaps.integral().value,
        }
    }
}

/// Result of [`int_distance_flagged`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntDistance {
    pub value: f64,
    /// Both inputs are the same single point mass; the span is zero and the
    /// distance is reported as 0.
    pub degenerate_span: bool,
}

struct StepGaps {
    common: Vec<f64>,
    gaps: Vec<f64>,
}

impl StepGaps {
    fn new<A: StepCdf + ?Sized, B: StepCdf + ?Sized>(a: &A, b: &B) -> Self {
        let common = merge_two(a.support(), b.support());
        // Both supports are subsets of `common` by construction.
        let fa = step_interpolate(a, &common).expect("union covers support");
        let fb = step_interpolate(b, &common).expect("union covers support");
        let gaps = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).collect();
        StepGaps { common, gaps }
    }

    fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max).min(1.0)
    }

    fn integral(&self) -> IntDistance {
        let n = self.common.len();
        let span = self.common[n - 1] - self.common[0];
        if n < 2 || span <= 0.0 {
            return IntDistance {
                value: 0.0,
                degenerate_span: true,
            };
        }
        let mut area = 0.0;
        let mut bound: f64 = 0.0;
        for k in 0..n - 1 {
            area += self.gaps[k] * (self.common[k + 1] - self.common[k]);
            bound = bound.max(self.gaps[k]);
        }
        // Mean gap over the span can never exceed the largest gap; rounding in
        // the summed widths is not allowed to push it over.
        IntDistance {
            value: (area / span).min(bound),
            degenerate_span: false,
        }
    }
}

/// Largest vertical gap between two step CDFs.
pub fn ks_distance<A: StepCdf + ?Sized, B: StepCdf + ?Sized>(a: &A, b: &B) -> f64 {
    StepGaps::new(a, b).max_gap()
}

/// Area between two step CDFs divided by the span of their union support.
/// Identical point masses (zero span) yield 0.
pub fn int_distance<A: StepCdf + ?Sized, B: StepCdf + ?Sized>(a: &A, b: &B) -> f64 {
    int_distance_flagged(a, b).value
}

pub fn int_distance_flagged<A: StepCdf + ?Sized, B: StepCdf + ?Sized>(a: &A, b: &B) -> IntDistance {
    StepGaps::new(a, b).integral()
}

/// Mean integral distance over `kpm_keys`.
pub fn severity_index(
    pairs: &BTreeMap<SeriesKey, DistancePair>,
    kpm_keys: &[SeriesKey],
) -> Result<f64> {
    if kpm_keys.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for key in kpm_keys {
        sum += pairs
            .get(key)
            .ok_or_else(|| Error::MissingKey(key.clone()))?
            .int;
    }
    Ok((sum / kpm_keys.len() as f64).clamp(0.0, 1.0))
}

/// Throughput and buffer occupancy for every slice in `slices`.
pub fn default_kpm_keys<'a>(slices: impl IntoIterator<Item = &'a str>) -> Vec<SeriesKey> {
    slices
        .into_iter()
        .flat_map(|s| {
            [
                SeriesKey::new(TX_BRATE_DL_MBPS, s),
                SeriesKey::new(DL_BUFFER_BYTES, s),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport {
    pub app_a: String,
    pub app_b: String,
    pub per_variable: BTreeMap<SeriesKey, DistancePair>,
    pub severity: f64,
    pub severity_kpms: Vec<SeriesKey>,
}

pub fn conflict_report(
    profile_a: &Profile,
    profile_b: &Profile,
    variables: &[SeriesKey],
    kpm_keys: &[SeriesKey],
) -> Result<ConflictReport> {
    let mut per_variable = BTreeMap::new();
    for key in variables {
        let a = build_ecdf(&profile_a.series(key)?)?;
        let b = build_ecdf(&profile_b.series(key)?)?;
        per_variable.insert(key.clone(), DistancePair::between(&a, &b));
    }
    let severity = severity_index(&per_variable, kpm_keys)?;
    Ok(ConflictReport {
        app_a: profile_a.app_id.clone(),
        app_b: profile_b.app_id.clone(),
        per_variable,
        severity,
        severity_kpms: kpm_keys.to_vec(),
    })
}

#[derive(Serialize, Deserialize)]
pub(crate) struct KeyedDistance {
    pub variable: String,
    pub slice: String,
    pub ks: f64,
    pub int: f64,
}

pub(crate) fn keyed_rows(map: &BTreeMap<SeriesKey, DistancePair>) -> Vec<KeyedDistance> {
    map.iter()
        .map(|(k, d)| KeyedDistance {
            variable: k.variable.clone(),
            slice: k.slice.clone(),
            ks: d.ks,
            int: d.int,
        })
        .collect()
}

pub(crate) fn from_keyed_rows(rows: Vec<KeyedDistance>) -> BTreeMap<SeriesKey, DistancePair> {
    rows.into_iter()
        .map(|r| {
            (
                SeriesKey::new(r.variable, r.slice),
                DistancePair {
                    ks: r.ks,
                    int: r.int,
                },
            )
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ConflictReportDoc {
    app_a: String,
    app_b: String,
    per_variable: Vec<KeyedDistance>,
    severity: f64,
    severity_kpms: Vec<SeriesKey>,
}

impl ConflictReport {
    pub fn to_json(&self) -> Result<String> {
        let doc = ConflictReportDoc {
            app_a: self.app_a.clone(),
            app_b: self.app_b.clone(),
            per_variable: keyed_rows(&self.per_variable),
            severity: self.severity,
            severity_kpms: self.severity_kpms.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ConflictReportDoc = serde_json::from_str(text)?;
        Ok(ConflictReport {
            app_a: doc.app_a,
            app_b: doc.app_b,
            per_variable: from_keyed_rows(doc.per_variable),
            severity: doc.severity,
            severity_kpms: doc.severity_kpms,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_json()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecdf::Ecdf;
    use crate::profile::{Observation, SLICE_PRB};
    use proptest::prelude::*;

    fn ecdf(support: &[f64], probs: &[f64]) -> Ecdf {
        Ecdf::from_parts(support.to_vec(), probs.to_vec(), 0).unwrap()
    }

    #[test]
    fn ks_examples() {
        let zero = ecdf(&[0.0], &[1.0]);
        let one = ecdf(&[1.0], &[1.0]);
        assert_eq!(ks_distance(&zero, &one), 1.0);
        assert_eq!(ks_distance(&zero, &zero), 0.0);
        let a = ecdf(&[1.0, 2.0], &[0.5, 1.0]);
        let b = ecdf(&[1.0, 2.0], &[0.25, 1.0]);
        assert_eq!(ks_distance(&a, &b), 0.25);
    }

    #[test]
    fn int_examples() {
        let zero = ecdf(&[0.0], &[1.0]);
        let one = ecdf(&[1.0], &[1.0]);
        assert_eq!(int_distance(&zero, &one), 1.0);
        let a = ecdf(&[1.0, 2.0, 4.0], &[0.2, 0.5, 1.0]);
        assert_eq!(int_distance(&a, &a), 0.0);
        // |1 - 0.5| over [0, 1], span 1.
        let uniform = ecdf(&[0.0, 1.0], &[0.5, 1.0]);
        assert_eq!(int_distance(&zero, &uniform), 0.5);
    }

    #[test]
    fn degenerate_span_is_flagged() {
        let p = ecdf(&[3.0], &[1.0]);
        let d = int_distance_flagged(&p, &p);
        assert!(d.degenerate_span);
        assert_eq!(d.value, 0.0);
        let q = ecdf(&[4.0], &[1.0]);
        assert!(!int_distance_flagged(&p, &q).degenerate_span);
    }

    #[test]
    fn severity_examples() {
        let t = SeriesKey::new(TX_BRATE_DL_MBPS, "embb");
        let b = SeriesKey::new(DL_BUFFER_BYTES, "embb");
        let mut pairs = BTreeMap::new();
        pairs.insert(t.clone(), DistancePair { ks: 0.5, int: 0.2 });
        pairs.insert(b.clone(), DistancePair { ks: 0.9, int: 0.4 });
        let s = severity_index(&pairs, &[t.clone(), b.clone()]).unwrap();
        assert!((s - 0.3).abs() < 1e-15);

        let mut one = BTreeMap::new();
        one.insert(t.clone(), DistancePair { ks: 0.3, int: 0.12 });
        assert_eq!(
            severity_index(&one, std::slice::from_ref(&t)).unwrap(),
            0.12
        );

        let mut zeros = BTreeMap::new();
        zeros.insert(t.clone(), DistancePair::default());
        zeros.insert(b.clone(), DistancePair::default());
        assert_eq!(
            severity_index(&zeros, &[t.clone(), b.clone()]).unwrap(),
            0.0
        );

        assert!(matches!(
            severity_index(&one, std::slice::from_ref(&b)),
            Err(Error::MissingKey(k)) if k == b
        ));
        assert!(matches!(severity_index(&one, &[]), Err(Error::EmptyInput)));
    }

    fn prb_profile(app: &str, values: &[f64]) -> Profile {
        let obs = values
            .iter()
            .enumerate()
            .flat_map(|(i, &v)| {
                let t = i as f64;
                [
                    Observation::new(t, SLICE_PRB, "embb", v).unwrap(),
                    Observation::new(t, TX_BRATE_DL_MBPS, "embb", 2.0 + v / 100.0).unwrap(),
                    Observation::new(t, DL_BUFFER_BYTES, "embb", 30.0 - v).unwrap(),
                ]
            })
            .collect();
        Profile::new(app, obs)
    }

    #[test]
    fn self_comparison_is_conflict_free() {
        let p = prb_profile("es", &[3.0, 6.0, 9.0, 9.0, 12.0]);
        let keys = p.keys();
        let kpms = default_kpm_keys(["embb"]);
        let r = conflict_report(&p, &p, &keys, &kpms).unwrap();
        assert!(r
            .per_variable
            .values()
            .all(|d| *d == DistancePair::default()));
        assert_eq!(r.severity, 0.0);
    }

    #[test]
    fn disjoint_prb_ranges_have_unit_ks() {
        let es = prb_profile("es", &[3.0, 6.0, 9.0, 12.0, 9.0, 6.0]);
        let tm = prb_profile("tm", &[15.0, 18.0, 21.0, 24.0, 27.0, 30.0]);
        let key = SeriesKey::new(SLICE_PRB, "embb");
        let r = conflict_report(
            &es,
            &tm,
            std::slice::from_ref(&key),
            std::slice::from_ref(&key),
        )
        .unwrap();
        assert_eq!(r.per_variable[&key].ks, 1.0);

        // Brute force: scan a dense grid for the largest gap.
        let a = build_ecdf(&es.series(&key).unwrap()).unwrap();
        let b = build_ecdf(&tm.series(&key).unwrap()).unwrap();
        let brute = (0..=400)
            .map(|i| i as f64 * 0.1)
            .map(|x| (a.evaluate(x) - b.evaluate(x)).abs())
            .fold(0.0, f64::max);
        assert_eq!(brute, 1.0);
    }

    #[test]
    fn missing_kpm_key_propagates() {
        let p = prb_profile("es", &[3.0, 6.0]);
        let key = SeriesKey::new(SLICE_PRB, "embb");
        let missing = SeriesKey::new(TX_BRATE_DL_MBPS, "mmtc");
        assert!(matches!(
            conflict_report(&p, &p, &[key], &[missing]),
            Err(Error::MissingKey(_))
        ));
    }

    #[test]
    fn report_json_shape_and_round_trip() {
        let es = prb_profile("es", &[3.0, 6.0, 9.0]);
        let tm = prb_profile("tm", &[15.0, 18.0, 9.0]);
        let keys = es.keys();
        let r = conflict_report(&es, &tm, &keys, &default_kpm_keys(["embb"])).unwrap();
        let json = r.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for field in [
            "app_a",
            "app_b",
            "per_variable",
            "severity",
            "severity_kpms",
        ] {
            assert!(v.get(field).is_some(), "{field}");
        }
        let row = &v["per_variable"][0];
        for field in ["variable", "slice", "ks", "int"] {
            assert!(row.get(field).is_some(), "{field}");
        }
        assert_eq!(ConflictReport::from_json(&json).unwrap(), r);
    }

    fn samples() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((-20i32..20).prop_map(|v| f64::from(v) * 0.5), 1..40)
    }

    proptest! {
        #[test]
        fn symmetric_and_ordered(xs in samples(), ys in samples()) {
            let a = build_ecdf(&xs).unwrap();
            let b = build_ecdf(&ys).unwrap();
            let ab = DistancePair::between(&a, &b);
            let ba = DistancePair::between(&b, &a);
            prop_assert_eq!(ab, ba);
            prop_assert!(0.0 <= ab.int && ab.int <= ab.ks && ab.ks <= 1.0);
            prop_assert_eq!(DistancePair::between(&a, &a), DistancePair::default());
        }

        #[test]
        fn same_multiset_gives_zero_ks(xs in samples()) {
            let mut rev = xs.clone();
            rev.reverse();
            let a = build_ecdf(&xs).unwrap();
            let b = build_ecdf(&rev).unwrap();
            prop_assert_eq!(ks_distance(&a, &b), 0.0);
        }
    }
}
