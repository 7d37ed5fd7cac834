//! Predicting the RAN state produced by control applications that share a
//! parameter, from profiles recorded while each application ran alone.
//!
//! The pipeline is: profile each application ([`profile`], [`sim`]), build
//! ECDFs ([`ecdf`]), measure how far apart the applications are
//! ([`metrics`]), mix their ECDFs by control frequency ([`predictor`]), and
//! compare the mixture to a measured concurrent run ([`pipeline`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ecdf;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod predictor;
pub mod profile;
pub mod sim;

mod io;

pub use ecdf::{build_ecdf, step_interpolate, union_support, Ecdf, StepCdf};
pub use error::{Error, Result};
pub use metrics::{
    conflict_report, default_kpm_keys, int_distance, int_distance_flagged, ks_distance,
    severity_index, ConflictReport, DistancePair, IntDistance,
};
pub use predictor::{
    effective_weights, inverse_hold_weights, predict, rate_weights, schedule_holds, timing_weights,
    weighted_ecdf_average, PredictedCdf, PredictionReport, TimingSpec, WeightMode, WeightVector,
};
pub use profile::{Observation, Profile, SeriesKey};
