//! JSON reports, one per task. Field names follow the core types they wrap.

use nustab_core::conditions::{ObservabilityDoubling, SecondOrderHautus};
use nustab_core::diophantine::Xi0;
use nustab_core::rate::{DeviationRow, OptimalityProxy, PositiveIncreaseCert, PseudoinverseSeries};
use nustab_core::resolvent::{Method, TransferReport};
use nustab_core::{
    ApproxStats, ContinuedFraction, HautusReport, ModalSystem, ObservabilityReport, PeakSeries, RateFunction, SlopeFit,
    SystemSpec, WavepacketParams,
};
use serde::{Deserialize, Serialize};

use crate::recipes::Measurement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesReport {
    pub system: SystemSpec,
    pub modal: ModalSystem,
    pub spectral_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanReport {
    pub system: SystemSpec,
    pub method: Method,
    pub points: usize,
    pub max_norm: f64,
    pub argmax_s: f64,
    pub transfer: TransferReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeaksReport {
    pub system: SystemSpec,
    pub series: PeakSeries,
    pub fit: SlopeFit,
    /// Fit over the running maxima; absent with fewer than five records.
    pub envelope_fit: Option<SlopeFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConsistency {
    /// max over the fit window of `trace(t)·M⁻¹(t)`
    pub max: f64,
    pub tail_over_head: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayReport {
    pub system: SystemSpec,
    pub points: usize,
    pub fit_window: [f64; 2],
    pub fit: SlopeFit,
    pub truncation_floor: f64,
    pub horizon: Option<f64>,
    pub beyond_horizon: bool,
    pub rate: Option<RateFunction>,
    pub consistency: Option<RateConsistency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsReport {
    pub system: SystemSpec,
    pub seed: u64,
    pub wavepackets: WavepacketParams,
    /// Hautus test with `(2M², 2M)`; `M` is the configured rate, else the
    /// wavepacket prediction.
    pub hautus_rate: RateFunction,
    pub hautus: HautusReport,
    pub observability: ObservabilityReport,
    pub doubling: Option<ObservabilityDoubling>,
    pub second_order: Option<SecondOrderHautus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalityReport {
    pub system: SystemSpec,
    pub rate: RateFunction,
    pub certificate: Option<PositiveIncreaseCert>,
    /// Why no certificate was issued.
    pub certificate_error: Option<String>,
    pub proxy: OptimalityProxy,
    pub lower_bounds: PseudoinverseSeries,
    pub deviation_window: [usize; 2],
    pub deviations: Vec<DeviationRow>,
    pub deviation_means: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiophantineReport {
    pub xi0: Xi0,
    pub continued_fraction: ContinuedFraction,
    pub stats: ApproxStats,
    pub epsilon: f64,
    /// `2√2 c_est / n_max`
    pub sine_bound_at_n_max: Option<f64>,
    /// `2√2/(n_max log(n_max)^{1+ε})`, reported but not certified
    pub log_bound_at_n_max: Option<f64>,
    pub implied_rate: Option<RateFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckResult {
    pub measurement: Measurement,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceReport {
    pub recipe: String,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}
