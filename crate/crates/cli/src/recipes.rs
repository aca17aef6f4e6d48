//! Named reproduction runs with the ranges their measurements must land in.

use nustab_core::assembly::assemble_system;
use nustab_core::fit::fit_loglog;
use nustab_core::rate::pseudoinverse_lower_bounds;
use nustab_core::resolvent::{fit_growth_exponent, peak_series, Method};
use nustab_core::semigroup::{decay_trace, eig_decompose, fit_decay_exponent, time_grid, truncation_floor, Spacing};
use nustab_core::{build_modal_system, DampingSpec, SystemKind, SystemSpec, WeakProfile};
use serde::{Deserialize, Serialize};

/// Decay fits sample the window on this many log-spaced times.
pub const DECAY_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Measurement {
    /// log-log slope of resolvent peaks against their location `s` for modes
    /// `lo..=hi`; with `records`, the running maxima against `n`
    PeakSlope { truncation: usize, lo: usize, hi: usize, records: bool },
    /// log-log slope of `‖T(t)A⁻¹‖` over `[t_lo, t_hi]`
    DecayExponent { truncation: usize, t_lo: f64, t_hi: f64 },
    /// log-log slope of the running maxima of the pseudoinverse lower bounds
    /// against `n` for `n ≤ hi`
    LowerBoundSlope { truncation: usize, hi: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub measurement: Measurement,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub name: String,
    pub description: String,
    pub system: SystemKind,
    pub damping: DampingSpec,
    pub expectations: Vec<Expectation>,
}

fn peak(truncation: usize, records: bool, lo: f64, hi: f64) -> Expectation {
    let (a, b) = if records { (1, 100) } else { (5, 40) };
    Expectation { measurement: Measurement::PeakSlope { truncation, lo: a, hi: b, records }, lo, hi }
}

fn decay(truncation: usize, t_lo: f64, t_hi: f64, lo: f64, hi: f64) -> Expectation {
    Expectation { measurement: Measurement::DecayExponent { truncation, t_lo, t_hi }, lo, hi }
}

pub fn catalogue() -> Vec<Recipe> {
    let weak = |p| DampingSpec::Weak(p);
    let recipe = |name: &str, description: &str, system, damping, expectations| Recipe {
        name: name.into(),
        description: description.into(),
        system,
        damping,
        expectations,
    };
    vec![
        recipe(
            "cor63-one-minus-xi",
            "string with damping profile 1-xi: peaks grow like s^2, decay like t^-1/2",
            SystemKind::Wave1d,
            weak(WeakProfile::OneMinusXi),
            vec![peak(200, false, 1.85, 2.15), decay(60, 10.0, 300.0, -0.57, -0.43)],
        ),
        recipe(
            "cor63-xi2",
            "string with damping profile xi^2(1-xi): peaks grow like s^6, decay like t^-1/6",
            SystemKind::Wave1d,
            weak(WeakProfile::Xi2OneMinusXi),
            vec![peak(200, false, 5.7, 6.3), decay(60, 10.0, 200.0, -0.22, -0.12)],
        ),
        recipe(
            "beam-one-minus-xi",
            "hinged beam with damping profile 1-xi: peaks grow like s, decay like t^-1",
            SystemKind::Beam1d,
            weak(WeakProfile::OneMinusXi),
            vec![peak(200, false, 0.9, 1.1), decay(40, 5.0, 200.0, -1.1, -0.9)],
        ),
        recipe(
            "fractional-alpha-0.25",
            "string with diagonal damping lambda^-1/4: decay like t^-2",
            SystemKind::Wave1d,
            DampingSpec::FractionalDiag { alpha: 0.25 },
            vec![decay(60, 10.0, 50.0, -2.2, -1.8)],
        ),
        recipe(
            "fractional-alpha-0.5",
            "string with diagonal damping lambda^-1/2: decay like t^-1",
            SystemKind::Wave1d,
            DampingSpec::FractionalDiag { alpha: 0.5 },
            vec![decay(60, 10.0, 300.0, -1.1, -0.9)],
        ),
        recipe(
            "pointwise-golden",
            "string damped at the golden-ratio conjugate: bounds and peaks grow like n^2",
            SystemKind::Wave1d,
            DampingSpec::Pointwise { xi0: (5f64.sqrt() - 1.0) / 2.0 },
            vec![
                Expectation { measurement: Measurement::LowerBoundSlope { truncation: 200, hi: 100 }, lo: 1.8, hi: 2.2 },
                peak(200, true, 1.8, 2.2),
            ],
        ),
    ]
}

pub fn find(name: &str) -> Option<Recipe> {
    catalogue().into_iter().find(|r| r.name == name)
}

fn running_max(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut best = f64::NEG_INFINITY;
    let mut out = (Vec::new(), Vec::new());
    for (&a, &b) in x.iter().zip(y) {
        if b > best {
            best = b;
            out.0.push(a);
            out.1.push(b);
        }
    }
    out
}

impl Recipe {
    pub fn spec(&self, truncation: usize) -> SystemSpec {
        SystemSpec::new(self.system, self.damping.clone(), truncation)
    }

    pub fn measure(&self, m: &Measurement) -> nustab_core::Result<f64> {
        match *m {
            Measurement::PeakSlope { truncation, lo, hi, records } => {
                let dg = assemble_system(&build_modal_system(&self.spec(truncation))?)?;
                let ps = peak_series(&dg, Method::structured(&dg.damping), lo, hi)?;
                if records {
                    let n: Vec<f64> = ps.n.iter().map(|&k| k as f64).collect();
                    let (n, v) = running_max(&n, &ps.peak);
                    Ok(fit_loglog(&n, &v, 5)?.exponent)
                } else {
                    Ok(fit_growth_exponent(&ps)?.exponent)
                }
            }
            Measurement::DecayExponent { truncation, t_lo, t_hi } => {
                let dg = assemble_system(&build_modal_system(&self.spec(truncation))?)?;
                let sf = eig_decompose(&dg)?;
                let grid = time_grid(t_lo, t_hi, DECAY_POINTS, Spacing::Log)?;
                let trace = decay_trace(&sf, &grid, None)?;
                Ok(fit_decay_exponent(&trace, t_lo, t_hi, truncation_floor(&sf.lambdas))?.exponent)
            }
            Measurement::LowerBoundSlope { truncation, hi } => {
                let ms = build_modal_system(&self.spec(truncation))?;
                let lb = pseudoinverse_lower_bounds(&ms);
                let (n, v): (Vec<f64>, Vec<f64>) = lb
                    .n
                    .iter()
                    .zip(&lb.lower_bound)
                    .take(hi)
                    .filter_map(|(&n, b)| b.map(|b| (n as f64, b)))
                    .unzip();
                let (n, v) = running_max(&n, &v);
                Ok(fit_loglog(&n, &v, 5)?.exponent)
            }
        }
    }
}

impl Measurement {
    pub fn label(&self) -> String {
        match self {
            Measurement::PeakSlope { truncation, lo, hi, records: false } => {
                format!("peak slope n {lo}..{hi} N={truncation}")
            }
            Measurement::PeakSlope { truncation, lo, hi, records: true } => {
                format!("peak record slope n {lo}..{hi} N={truncation}")
            }
            Measurement::DecayExponent { truncation, t_lo, t_hi } => {
                format!("decay exponent t {t_lo}..{t_hi} N={truncation}")
            }
            Measurement::LowerBoundSlope { truncation, hi } => format!("lower-bound record slope n<={hi} N={truncation}"),
        }
    }
}
