//! Finite modal data for the damped string and beam on the unit interval.
//!
//! Mode `n` has eigenfunction `√2 sin(nπξ)`; its frequency is `nπ` for the
//! string and `n²π²` for the hinged beam. Damping enters either as a
//! rank-one coupling `b_n = B₀*φ_n` or as a diagonal sequence `d_n`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Wave1d,
    Beam1d,
}

impl SystemKind {
    pub fn frequency(self, n: usize) -> f64 {
        let k = n as f64 * PI;
        match self {
            SystemKind::Wave1d => k,
            SystemKind::Beam1d => k * k,
        }
    }
}

/// Spatial profile `b(ξ)` of a bounded (multiplicative) damping.
#[derive(Debug, Clone, PartialEq)]
pub enum WeakProfile {
    OneMinusXi,
    Xi2OneMinusXi,
    /// Characteristic function of `[0, ξ₀]`.
    Indicator { xi0: f64 },
    /// Values of `b` on a uniform grid of `[0, 1]` including both ends,
    /// joined piecewise linearly.
    Samples { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDamping", into = "RawDamping")]
pub enum DampingSpec {
    None,
    Weak(WeakProfile),
    Pointwise { xi0: f64 },
    FractionalDiag { alpha: f64 },
    /// User-supplied rank-one couplings `b_1, b_2, ...`.
    Couplings { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    RankOne,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub system: SystemKind,
    pub damping: DampingSpec,
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub n: usize,
    pub lambda: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalSystem {
    pub kind: SystemKind,
    pub modes: Vec<Mode>,
    pub damping_kind: DampingKind,
}

fn check_location(xi0: f64) -> Result<()> {
    if xi0.is_finite() && xi0 > 0.0 && xi0 < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("damping location xi0 = {xi0} must lie in (0, 1)")))
    }
}

impl DampingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DampingSpec::None => Ok(()),
            DampingSpec::Weak(WeakProfile::Indicator { xi0 }) | DampingSpec::Pointwise { xi0 } => {
                check_location(*xi0)
            }
            DampingSpec::Weak(WeakProfile::Samples { values }) => {
                if values.len() < 2 {
                    return Err(Error::Config("a sampled profile needs at least 2 values".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("sampled profile contains non-finite values".into()));
                }
                Ok(())
            }
            DampingSpec::Weak(_) => Ok(()),
            DampingSpec::FractionalDiag { alpha } => {
                if alpha.is_finite() && *alpha > 0.0 && *alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("fractional exponent alpha = {alpha} must lie in (0, 1]")))
                }
            }
            DampingSpec::Couplings { values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    Err(Error::Config("coupling sequence contains non-finite values".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn damping_kind(&self) -> DampingKind {
        match self {
            DampingSpec::FractionalDiag { .. } => DampingKind::Diagonal,
            _ => DampingKind::RankOne,
        }
    }
}

impl SystemSpec {
    pub fn new(system: SystemKind, damping: DampingSpec, truncation: usize) -> Self {
        SystemSpec { system, damping, truncation }
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 2 {
            return Err(Error::InsufficientModes { required: 2, got: self.truncation });
        }
        self.damping.validate()?;
        if let DampingSpec::Couplings { values } = &self.damping {
            if values.len() < self.truncation {
                return Err(Error::Config(format!(
                    "{} couplings supplied for truncation {}",
                    values.len(),
                    self.truncation
                )));
            }
        }
        Ok(())
    }

    pub fn with_truncation(&self, truncation: usize) -> Self {
        SystemSpec { truncation, ..self.clone() }
    }
}

/// `x` reduced to `[-1, 1]` modulo 2, exactly.
fn reduce_half_turns(x: f64) -> f64 {
    x - 2.0 * (0.5 * x).round()
}

/// `sin(πx)`, exactly zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = reduce_half_turns(x);
    match r {
        _ if r == 0.0 || r.abs() == 1.0 => 0.0,
        _ if r.abs() == 0.5 => r.signum(),
        _ => (PI * r).sin(),
    }
}

/// `cos(πx)`, exactly zero at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    let r = reduce_half_turns(x);
    match r {
        _ if r == 0.0 => 1.0,
        _ if r.abs() == 1.0 => -1.0,
        _ if r.abs() == 0.5 => 0.0,
        _ => (PI * r).cos(),
    }
}

/// Closed-form or quadrature value of the coupling of mode `n`.
///
/// For [`DampingSpec::FractionalDiag`] this is the diagonal entry `λ_n^{-α}`.
pub fn coupling_coefficient(spec: &SystemSpec, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("mode indices start at 1".into()));
    }
    spec.damping.validate()?;
    let nf = n as f64;
    let k = nf * PI;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(match &spec.damping {
        DampingSpec::None => 0.0,
        DampingSpec::Weak(WeakProfile::OneMinusXi) => SQRT_2 / k,
        // √2 ∫ ξ²(1−ξ) sin(kξ) dξ = −2√2 (1 + 2(−1)ⁿ) / k³
        DampingSpec::Weak(WeakProfile::Xi2OneMinusXi) => -2.0 * SQRT_2 * (1.0 + 2.0 * sign) / (k * k * k),
        DampingSpec::Weak(WeakProfile::Indicator { xi0 }) => SQRT_2 * (1.0 - cos_pi(nf * xi0)) / k,
        DampingSpec::Weak(WeakProfile::Samples { values }) => sampled_coefficient(values, n),
        DampingSpec::Pointwise { xi0 } => SQRT_2 * sin_pi(nf * xi0),
        DampingSpec::FractionalDiag { alpha } => spec.system.frequency(n).powf(-alpha),
        DampingSpec::Couplings { values } => *values
            .get(n - 1)
            .ok_or_else(|| Error::Config(format!("no coupling supplied for mode {n}")))?,
    })
}

const GAUSS8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn gauss8(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS8
        .iter()
        .map(|&(x, w)| w * (f(mid - half * x) + f(mid + half * x)))
        .sum::<f64>()
        * half
}

/// `√2 ∫₀¹ b(ξ) sin(nπξ) dξ` by composite 8-point Gauss–Legendre on
/// `panels` equal subintervals.
pub fn profile_coefficient(b: impl Fn(f64) -> f64, n: usize, panels: usize) -> f64 {
    let k = n as f64 * PI;
    let f = |x: f64| b(x) * (k * x).sin();
    let panels = panels.max(1);
    let h = 1.0 / panels as f64;
    SQRT_2 * (0..panels).map(|p| gauss8(&f, p as f64 * h, (p + 1) as f64 * h)).sum::<f64>()
}

/// Panel count used for mode `n`: a few panels per half-wavelength.
pub fn panels_for_mode(n: usize) -> usize {
    4 * (n + 1)
}

fn sampled_coefficient(values: &[f64], n: usize) -> f64 {
    let cells = values.len() - 1;
    let h = 1.0 / cells as f64;
    let sub = panels_for_mode(n).div_ceil(cells);
    let k = n as f64 * PI;
    let mut acc = 0.0;
    for (i, w) in values.windows(2).enumerate() {
        let x0 = i as f64 * h;
        let (v0, v1) = (w[0], w[1]);
        let f = |x: f64| (v0 + (v1 - v0) * (x - x0) / h) * (k * x).sin();
        let step = h / sub as f64;
        for j in 0..sub {
            let a = x0 + j as f64 * step;
            acc += gauss8(&f, a, a + step);
        }
    }
    SQRT_2 * acc
}

pub fn build_modal_system(spec: &SystemSpec) -> Result<ModalSystem> {
    spec.validate()?;
    let modes = (1..=spec.truncation)
        .map(|n| {
            Ok(Mode { n, lambda: spec.system.frequency(n), coupling: coupling_coefficient(spec, n)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModalSystem { kind: spec.system, modes, damping_kind: spec.damping.damping_kind() })
}

impl ModalSystem {
    /// Builds a system from explicit modes; frequencies must increase strictly.
    pub fn from_modes(kind: SystemKind, modes: Vec<Mode>, damping_kind: DampingKind) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InsufficientModes { required: 1, got: 0 });
        }
        if modes.iter().any(|m| !(m.lambda > 0.0) || !m.coupling.is_finite()) {
            return Err(Error::Config("frequencies must be positive and couplings finite".into()));
        }
        if modes.windows(2).any(|w| w[1].lambda <= w[0].lambda) {
            return Err(Error::Config("frequencies must increase strictly".into()));
        }
        Ok(ModalSystem { kind, modes, damping_kind })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Dimension of the first-order state space.
    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn couplings(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.coupling).collect()
    }

    pub fn spectral_gap(&self) -> Result<f64> {
        spectral_gap(self)
    }

    /// Same modes with damping `κBB*`.
    pub fn scaled(&self, kappa: f64) -> Self {
        let r = kappa.sqrt();
        let modes = self.modes.iter().map(|m| Mode { coupling: m.coupling * r, ..*m }).collect();
        ModalSystem { modes, ..self.clone() }
    }

    pub fn undamped(&self) -> Self {
        self.scaled(0.0)
    }
}

pub fn spectral_gap(ms: &ModalSystem) -> Result<f64> {
    if ms.modes.len() < 2 {
        return Err(Error::InsufficientModes { required: 2, got: ms.modes.len() });
    }
    Ok(ms.modes.windows(2).map(|w| w[1].lambda - w[0].lambda).fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDamping {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

impl TryFrom<RawDamping> for DampingSpec {
    type Error = Error;

    fn try_from(raw: RawDamping) -> Result<Self> {
        let unexpected = |field: &str| Error::Config(format!("field `{field}` not allowed for damping kind `{}`", raw.kind));
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| Error::Config(format!("damping kind `{}` requires `{field}`", raw.kind)))
        };
        let spec = match raw.kind.as_str() {
            "none" => {
                if raw.profile.is_some() || raw.xi0.is_some() || raw.alpha.is_some() || raw.values.is_some() {
                    return Err(unexpected("profile/xi0/alpha/values"));
                }
                DampingSpec::None
            }
            "weak" => {
                if raw.alpha.is_some() {
                    return Err(unexpected("alpha"));
                }
                let profile = raw
                    .profile
                    .as_deref()
                    .ok_or_else(|| Error::Config("weak damping requires `profile`".into()))?;
                let p = match profile {
                    "one_minus_xi" => WeakProfile::OneMinusXi,
                    "xi2_one_minus_xi" => WeakProfile::Xi2OneMinusXi,
                    "indicator" => WeakProfile::Indicator { xi0: need(raw.xi0, "xi0")? },
                    "samples" => WeakProfile::Samples {
                        values: raw
                            .values
                            .clone()
                            .ok_or_else(|| Error::Config("sampled profile requires `values`".into()))?,
                    },
                    other => return Err(Error::Config(format!("unknown weak profile `{other}`"))),
                };
                if !matches!(p, WeakProfile::Indicator { .. }) && raw.xi0.is_some() {
                    return Err(unexpected("xi0"));
                }
                if !matches!(p, WeakProfile::Samples { .. }) && raw.values.is_some() {
                    return Err(unexpected("values"));
                }
                DampingSpec::Weak(p)
            }
            "pointwise" => {
                if raw.profile.is_some() || raw.alpha.is_some() || raw.values.is_some() {
                    return Err(unexpected("profile/alpha/values"));
                }
                DampingSpec::Pointwise { xi0: need(raw.xi0, "xi0")? }
            }
            "fractional_diag" => {
                if raw.profile.is_some() || raw.xi0.is_some() || raw.values.is_some() {
                    return Err(unexpected("profile/xi0/values"));
                }
                DampingSpec::FractionalDiag { alpha: need(raw.alpha, "alpha")? }
            }
            "couplings" => {
                if raw.profile.is_some() || raw.xi0.is_some() || raw.alpha.is_some() {
                    return Err(unexpected("profile/xi0/alpha"));
                }
                DampingSpec::Couplings {
                    values: raw.values.ok_or_else(|| Error::Config("`couplings` requires `values`".into()))?,
                }
            }
            other => return Err(Error::Config(format!("unknown damping kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<DampingSpec> for RawDamping {
    fn from(d: DampingSpec) -> Self {
        let mut raw = RawDamping { kind: String::new(), profile: None, xi0: None, alpha: None, values: None };
        match d {
            DampingSpec::None => raw.kind = "none".into(),
            DampingSpec::Weak(p) => {
                raw.kind = "weak".into();
                raw.profile = Some(
                    match p {
                        WeakProfile::OneMinusXi => "one_minus_xi",
                        WeakProfile::Xi2OneMinusXi => "xi2_one_minus_xi",
                        WeakProfile::Indicator { xi0 } => {
                            raw.xi0 = Some(xi0);
                            "indicator"
                        }
                        WeakProfile::Samples { values } => {
                            raw.values = Some(values);
                            "samples"
                        }
                    }
                    .into(),
                );
            }
            DampingSpec::Pointwise { xi0 } => {
                raw.kind = "pointwise".into();
                raw.xi0 = Some(xi0);
            }
            DampingSpec::FractionalDiag { alpha } => {
                raw.kind = "fractional_diag".into();
                raw.alpha = Some(alpha);
            }
            DampingSpec::Couplings { values } => {
                raw.kind = "couplings".into();
                raw.values = Some(values);
            }
        }
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wave(damping: DampingSpec, n: usize) -> SystemSpec {
        SystemSpec::new(SystemKind::Wave1d, damping, n)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn one_minus_xi_table() {
        let ms = build_modal_system(&wave(DampingSpec::Weak(WeakProfile::OneMinusXi), 3)).unwrap();
        for (i, m) in ms.modes.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!(close(m.lambda, n * PI, 1e-15));
            assert!(close(m.coupling, SQRT_2 / (n * PI), 1e-15));
        }
        assert!(close(ms.modes[0].coupling, 0.450_158_2, 1e-7));
        assert_eq!(ms.damping_kind, DampingKind::RankOne);
    }

    #[test]
    fn beam_frequencies() {
        let ms = build_modal_system(&SystemSpec::new(SystemKind::Beam1d, DampingSpec::None, 2)).unwrap();
        assert!(close(ms.modes[0].lambda, PI * PI, 1e-15));
        assert!(close(ms.modes[1].lambda, 4.0 * PI * PI, 1e-15));
    }

    #[test]
    fn fractional_is_diagonal() {
        let ms = build_modal_system(&wave(DampingSpec::FractionalDiag { alpha: 1.0 }, 2)).unwrap();
        assert_eq!(ms.damping_kind, DampingKind::Diagonal);
        assert!(close(ms.modes[0].coupling, 1.0 / PI, 1e-15));
        assert!(close(ms.modes[1].coupling, 1.0 / (2.0 * PI), 1e-15));
    }

    #[test]
    fn pointwise_quarter() {
        let c = coupling_coefficient(&wave(DampingSpec::Pointwise { xi0: 0.25 }, 4), 2).unwrap();
        assert!(close(c, SQRT_2, 1e-15));
    }

    #[test]
    fn cubic_profile_matches_quadrature() {
        let spec = wave(DampingSpec::Weak(WeakProfile::Xi2OneMinusXi), 4);
        for n in 1..=30 {
            let closed = coupling_coefficient(&spec, n).unwrap();
            let quad = profile_coefficient(|x| x * x * (1.0 - x), n, 64 * (n + 1));
            assert!((closed - quad).abs() <= 1e-12 * closed.abs(), "n={n}: {closed} vs {quad}");
        }
        let b2 = coupling_coefficient(&spec, 2).unwrap();
        assert!(close(b2, -3.0 * SQRT_2 / (4.0 * PI.powi(3)), 1e-14));
        assert!(close(b2, -0.034_207_9, 1e-5));
        let b1 = coupling_coefficient(&spec, 1).unwrap();
        assert!(close(b1, 2.0 * SQRT_2 / PI.powi(3), 1e-14));
    }

    #[test]
    fn indicator_matches_quadrature() {
        let xi0 = 0.3;
        let spec = wave(DampingSpec::Weak(WeakProfile::Indicator { xi0 }), 4);
        for n in 1..=20 {
            let closed = coupling_coefficient(&spec, n).unwrap();
            // split the integral at the jump so each piece is smooth
            let k = n as f64 * PI;
            let panels = 200;
            let h = xi0 / panels as f64;
            let f = |x: f64| (k * x).sin();
            let quad = SQRT_2 * (0..panels).map(|p| gauss8(&f, p as f64 * h, (p + 1) as f64 * h)).sum::<f64>();
            assert!((closed - quad).abs() <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn sampled_linear_profile_is_exact() {
        let values: Vec<f64> = (0..=10).map(|i| 1.0 - i as f64 / 10.0).collect();
        let spec = wave(DampingSpec::Weak(WeakProfile::Samples { values }), 50);
        for n in 1..=50 {
            let q = coupling_coefficient(&spec, n).unwrap();
            assert!(close(q, SQRT_2 / (n as f64 * PI), 1e-10), "n={n}");
        }
        for n in 1..=50 {
            let q = profile_coefficient(|x| 1.0 - x, n, panels_for_mode(n));
            assert!(close(q, SQRT_2 / (n as f64 * PI), 1e-10));
        }
    }

    #[test]
    fn gaps() {
        let w = build_modal_system(&wave(DampingSpec::None, 10)).unwrap();
        assert!(close(spectral_gap(&w).unwrap(), PI, 1e-13));
        let b = build_modal_system(&SystemSpec::new(SystemKind::Beam1d, DampingSpec::None, 10)).unwrap();
        assert!(close(spectral_gap(&b).unwrap(), 3.0 * PI * PI, 1e-13));
        let values: Vec<f64> = vec![0.0, 1.0, 0.5];
        let s = build_modal_system(&wave(DampingSpec::Weak(WeakProfile::Samples { values }), 6)).unwrap();
        assert!(close(s.spectral_gap().unwrap(), PI, 1e-13));
        let one = ModalSystem::from_modes(
            SystemKind::Wave1d,
            vec![Mode { n: 1, lambda: PI, coupling: 1.0 }],
            DampingKind::RankOne,
        )
        .unwrap();
        assert!(matches!(spectral_gap(&one), Err(Error::InsufficientModes { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_modal_system(&wave(DampingSpec::Pointwise { xi0: 1.0 }, 4)).is_err());
        assert!(build_modal_system(&wave(DampingSpec::Pointwise { xi0: 0.0 }, 4)).is_err());
        assert!(build_modal_system(&wave(DampingSpec::FractionalDiag { alpha: 0.0 }, 4)).is_err());
        assert!(build_modal_system(&wave(DampingSpec::FractionalDiag { alpha: 1.5 }, 4)).is_err());
        assert!(build_modal_system(&wave(DampingSpec::None, 1)).is_err());
        assert!(build_modal_system(&wave(DampingSpec::Couplings { values: vec![1.0] }, 2)).is_err());
    }

    #[test]
    fn damping_json_round_trip() {
        let cases = [
            DampingSpec::None,
            DampingSpec::Weak(WeakProfile::OneMinusXi),
            DampingSpec::Weak(WeakProfile::Xi2OneMinusXi),
            DampingSpec::Weak(WeakProfile::Indicator { xi0: 0.4 }),
            DampingSpec::Weak(WeakProfile::Samples { values: vec![1.0, 0.5, 0.0] }),
            DampingSpec::Pointwise { xi0: 0.618 },
            DampingSpec::FractionalDiag { alpha: 0.25 },
            DampingSpec::Couplings { values: vec![1.0, 2.0] },
        ];
        for d in cases {
            let text = serde_json::to_string(&d).unwrap();
            let back: DampingSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, d, "{text}");
        }
        let spec: SystemSpec = serde_json::from_str(
            r#"{"system":"beam1d","damping":{"kind":"weak","profile":"one_minus_xi"},"truncation":40}"#,
        )
        .unwrap();
        assert_eq!(spec.system, SystemKind::Beam1d);
        assert!(serde_json::from_str::<DampingSpec>(r#"{"kind":"pointwise","xi0":0.5,"alpha":1}"#).is_err());
        assert!(serde_json::from_str::<DampingSpec>(r#"{"kind":"weak","profile":"one_minus_xi","extra":1}"#).is_err());
        assert!(serde_json::from_str::<DampingSpec>(r#"{"kind":"pointwise","xi0":1.5}"#).is_err());
    }

    proptest! {
        #[test]
        fn frequencies_increase(n in 2usize..200, beam in any::<bool>()) {
            let kind = if beam { SystemKind::Beam1d } else { SystemKind::Wave1d };
            let ms = build_modal_system(&SystemSpec::new(kind, DampingSpec::None, n)).unwrap();
            prop_assert!(ms.modes.windows(2).all(|w| w[1].lambda > w[0].lambda));
            let gap = spectral_gap(&ms).unwrap();
            let expect = if beam { 3.0 * PI * PI } else { PI };
            prop_assert!((gap - expect).abs() <= 1e-12 * expect);
        }

        #[test]
        fn indicator_bound(xi0 in 0.001f64..0.999, n in 1usize..500) {
            let spec = wave(DampingSpec::Weak(WeakProfile::Indicator { xi0 }), 2);
            let b = coupling_coefficient(&spec, n).unwrap();
            prop_assert!(b.abs() <= 2.0 * SQRT_2 / (n as f64 * PI) * (1.0 + 1e-14));
        }
    }
}
