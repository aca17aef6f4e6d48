//! Frequency- and time-domain conditions that imply non-uniform stability,
//! checked on truncated systems: wavepacket bounds, the non-uniform Hautus
//! test, Schrödinger-type observability and observability integrals.

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{DampedGenerator, DampingMatrix, TruncatedGenerator};
use crate::error::{Error, Result};
use crate::modal::{build_modal_system, DampingKind, ModalSystem, SystemSpec};
use crate::rate::{Interpolation, RateFunction};
use crate::resolvent::PeakSeries;
use crate::sampling::{basis_vectors, norm_sq, random_unit_complex, sample_stream};
use crate::semigroup::{energy_balance, orbit, SpectralFactorization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketParams {
    pub delta0: f64,
    /// Frequencies at which `γ₀` is tabulated.
    pub s: Vec<f64>,
    pub gamma0: Vec<f64>,
    pub predicted_m: RateFunction,
}

impl WavepacketParams {
    /// `γ₀(s)` as the smallest mode bound in `(s−δ₀, s+δ₀)`; `None` when the
    /// window holds no frequency.
    pub fn gamma0_at(&self, s: f64) -> Option<f64> {
        self.s
            .iter()
            .zip(&self.gamma0)
            .filter(|(&l, _)| (l - s.abs()).abs() < self.delta0)
            .map(|(_, &g)| g)
            .reduce(f64::min)
    }
}

/// `δ₀ = gap/4` and per-mode bounds `|b_n|` (rank-one) or `d_n` (diagonal).
pub fn wavepacket_params(ms: &ModalSystem) -> Result<WavepacketParams> {
    if ms.is_empty() {
        return Err(Error::InsufficientModes { required: 1, got: 0 });
    }
    let delta0 = ms.spectral_gap()? / 4.0;
    let s = ms.frequencies();
    let bounds: Vec<f64> = ms.modes.iter().map(|m| m.coupling.abs()).collect();
    let gamma0: Vec<f64> = s
        .iter()
        .map(|&l| {
            s.iter().zip(&bounds).filter(|(&m, _)| (m - l).abs() < delta0).map(|(_, &b)| b).fold(f64::INFINITY, f64::min)
        })
        .collect();
    if let Some(k) = gamma0.iter().position(|&g| !(g > 0.0)) {
        return Err(Error::UndampedMode { n: ms.modes[k].n });
    }
    let m: Vec<f64> = gamma0.iter().map(|g| 1.0 / (g * g * delta0 * delta0)).collect();
    let predicted_m = RateFunction::tabulated(s.clone(), running_max(&m), Interpolation::Linear)?;
    Ok(WavepacketParams { delta0, s, gamma0, predicted_m })
}

fn running_max(v: &[f64]) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    v.iter()
        .map(|&x| {
            best = best.max(x);
            best
        })
        .collect()
}

/// Monotone envelope of `γ₀(s)⁻²δ₀⁻²` on the tabulated frequencies.
#[allow(non_snake_case)]
pub fn predicted_M_from_wavepackets(wp: &WavepacketParams) -> Result<RateFunction> {
    if wp.s.len() < 3 {
        return Err(Error::TooFewPoints { what: "wavepacket table", got: wp.s.len(), required: 3 });
    }
    let m: Vec<f64> = wp.gamma0.iter().map(|g| 1.0 / (g * g * wp.delta0 * wp.delta0)).collect();
    RateFunction::tabulated(wp.s.clone(), running_max(&m), Interpolation::Linear)
}

/// Smallest `C` with `peak_n ≤ C·M(s_n)` across the series.
pub fn peak_constant(peaks: &PeakSeries, m: &RateFunction) -> Result<f64> {
    let mut c = 0.0f64;
    for (&s, &p) in peaks.s.iter().zip(&peaks.peak) {
        c = c.max(p / m.eval(s)?);
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HautusReport {
    pub sample_count: usize,
    /// max of `‖x‖² / (M_o(s)‖(is−A)x‖² + m_o(s)‖B*x‖²)`
    #[serde(with = "crate::float_serde")]
    pub worst_ratio: f64,
    #[serde(with = "crate::float_serde")]
    pub worst_s: f64,
    pub worst_sample: usize,
    pub pass: bool,
}

/// Slack on the pass flag; eigenvectors of `A` attain equality.
pub const HAUTUS_ROUNDING: f64 = 1e-12;

/// Evaluates the non-uniform Hautus inequality on every `(s, x)` pair.
///
/// `big_m` and `small_m` are plain functions of `s` so that non-monotone
/// choices such as `1/dist(s, σ(A))²` can be tested.
pub fn hautus_check<F, G>(
    generator: &TruncatedGenerator,
    damping: &DampingMatrix,
    big_m: F,
    small_m: G,
    s_samples: &[f64],
    x_samples: &[Vec<c64>],
) -> Result<HautusReport>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let dim = generator.dim();
    if let Some(x) = x_samples.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    let observed: Vec<f64> = x_samples.iter().map(|x| damping.observe_norm_sq(x)).collect();
    let xn: Vec<f64> = x_samples.iter().map(|x| norm_sq(x)).collect();
    let worst = s_samples
        .par_iter()
        .map(|&s| {
            let (bm, sm) = (big_m(s), small_m(s));
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (k, x) in x_samples.iter().enumerate() {
                let shifted = norm_sq(&generator.shifted_apply(s, x));
                let denom = bm * shifted + sm * observed[k];
                let r = if denom > 0.0 {
                    xn[k] / denom
                } else if xn[k] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                if r > best.0 {
                    best = (r, k);
                }
            }
            (best.0, s, best.1)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, f64::NAN, 0), |acc, v| if v.0 > acc.0 { v } else { acc });
    Ok(HautusReport {
        sample_count: s_samples.len() * x_samples.len(),
        worst_ratio: worst.0,
        worst_s: worst.1,
        worst_sample: worst.2,
        pass: worst.0 <= 1.0 + HAUTUS_ROUNDING,
    })
}

/// The modal basis followed by `random` seeded unit vectors.
pub fn sample_states(dim: usize, random: usize, seed: u64) -> Vec<Vec<c64>> {
    let mut out = basis_vectors(dim);
    let mut rng = sample_stream(seed, 1);
    out.extend((0..random).map(|_| random_unit_complex(&mut rng, dim)));
    out
}

/// The pair `M_o = 2M²`, `m_o = 2M` built from a resolvent bound `M`.
pub fn converse_pair(m: &RateFunction) -> (impl Fn(f64) -> f64 + Sync + '_, impl Fn(f64) -> f64 + Sync + '_) {
    let big = move |s: f64| {
        let v = m.eval(s).unwrap_or(f64::NAN);
        2.0 * v * v
    };
    let small = move |s: f64| 2.0 * m.eval(s).unwrap_or(f64::NAN);
    (big, small)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerWavepacket {
    pub eta: f64,
    pub c0: f64,
    pub s: Vec<f64>,
    pub delta0: Vec<f64>,
    pub gamma0: Vec<f64>,
    /// `(1+s²)M_S(s)m_S(s)`
    pub predicted_m: Vec<f64>,
}

/// Wavepacket parameters from Schrödinger-type observability `(M_S, m_S)`.
/// `η = inf M_S(s)(1+s)²` is taken over `grid`, which should start at 0.
pub fn schrodinger_to_wavepacket(
    big_ms: impl Fn(f64) -> f64,
    small_ms: impl Fn(f64) -> f64,
    grid: &[f64],
) -> Result<SchrodingerWavepacket> {
    if grid.is_empty() {
        return Err(Error::TooFewPoints { what: "frequency grid", got: 0, required: 1 });
    }
    let eta = grid.iter().map(|&s| big_ms(s) * (1.0 + s) * (1.0 + s)).fold(f64::INFINITY, f64::min);
    if !(eta > 0.0) {
        return Err(Error::Precondition(format!("inf M_S(s)(1+s)^2 = {eta} is not positive")));
    }
    let r0 = grid.iter().map(|&s| small_ms(s)).fold(f64::INFINITY, f64::min);
    if !(r0 > 0.0) {
        return Err(Error::Precondition(format!("m_S has infimum {r0} on the grid")));
    }
    let c0 = eta.sqrt().min(0.5);
    let delta0 = grid.iter().map(|&s| c0 / ((2.0 * big_ms(s)).sqrt() * (1.0 + s))).collect();
    let gamma0 = grid.iter().map(|&s| 1.0 / (2.0 * small_ms(s)).sqrt()).collect();
    let predicted_m = grid.iter().map(|&s| (1.0 + s * s) * big_ms(s) * small_ms(s)).collect();
    Ok(SchrodingerWavepacket { eta, c0, s: grid.to_vec(), delta0, gamma0, predicted_m })
}

/// `∫₀^τ e^{iΔt} dt`.
fn exp_integral(delta: f64, tau: f64) -> c64 {
    let z = delta * tau;
    if z.abs() < 1e-3 {
        // τ Σ (iz)^k/(k+1)!
        let iz = c64::new(0.0, z);
        let mut term = c64::new(1.0, 0.0);
        let mut acc = term;
        for k in 1..8 {
            term = term * iz / (k as f64 + 1.0);
            acc += term;
        }
        acc * tau
    } else {
        (c64::new(0.0, z).exp() - 1.0) / c64::new(0.0, delta)
    }
}

/// `∫₀^τ |Σ_k γ_k e^{iω_k t}|² dt`.
fn trig_norm_integral(terms: &[(c64, f64)], tau: f64) -> f64 {
    let mut acc = 0.0;
    for (j, &(gj, wj)) in terms.iter().enumerate() {
        acc += gj.norm_sqr() * tau;
        for &(gk, wk) in &terms[j + 1..] {
            acc += 2.0 * (gj * gk.conj() * exp_integral(wj - wk, tau)).re;
        }
    }
    acc
}

/// Output of mode `n` as two exponentials: `b(c cos λt − a sin λt)`.
fn mode_terms(b: f64, lambda: f64, a: c64, c: c64) -> [(c64, f64); 2] {
    let i = c64::new(0.0, 1.0);
    [((c + i * a) * (0.5 * b), lambda), ((c - i * a) * (0.5 * b), -lambda)]
}

fn check_state(ms: &ModalSystem, x: &[c64]) -> Result<()> {
    if x.len() != ms.dim() {
        return Err(Error::DimensionMismatch { expected: ms.dim(), got: x.len() });
    }
    Ok(())
}

/// `∫₀^τ ‖B*T(t)x‖² dt` for the undamped group, in closed form.
pub fn observability_integral(ms: &ModalSystem, x: &[c64], tau: f64) -> Result<f64> {
    check_state(ms, x)?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let per_mode = ms.modes.iter().enumerate().map(|(k, m)| mode_terms(m.coupling, m.lambda, x[2 * k], x[2 * k + 1]));
    Ok(match ms.damping_kind {
        DampingKind::RankOne => {
            let terms: Vec<(c64, f64)> = per_mode.flatten().filter(|(g, _)| g.norm_sqr() > 0.0).collect();
            trig_norm_integral(&terms, tau)
        }
        DampingKind::Diagonal => per_mode.map(|t| trig_norm_integral(&t, tau)).sum(),
    })
}

/// `T(t)x` for the undamped group.
pub fn undamped_evolve(ms: &ModalSystem, x: &[c64], t: f64) -> Result<Vec<c64>> {
    check_state(ms, x)?;
    let mut y = x.to_vec();
    for (k, m) in ms.modes.iter().enumerate() {
        let (c, s) = ((m.lambda * t).cos(), (m.lambda * t).sin());
        let (a, v) = (x[2 * k], x[2 * k + 1]);
        y[2 * k] = a * c + v * s;
        y[2 * k + 1] = -a * s + v * c;
    }
    Ok(y)
}

/// `‖(−A)^{-β}x‖²` computed mode by mode.
pub fn fractional_norm_sq(ms: &ModalSystem, x: &[c64], beta: f64) -> f64 {
    ms.modes
        .iter()
        .enumerate()
        .map(|(k, m)| m.lambda.powf(-2.0 * beta) * (x[2 * k].norm_sqr() + x[2 * k + 1].norm_sqr()))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub beta: f64,
    pub tau: f64,
    /// min over samples of `∫₀^τ‖B*T(t)x‖²dt / ‖(−A)^{-β}x‖²`
    #[serde(with = "crate::float_serde")]
    pub c_tau: f64,
    pub argmin: usize,
    pub sample_count: usize,
    pub pass: bool,
}

pub fn nonuniform_obs_check(ms: &ModalSystem, beta: f64, tau: f64, samples: &[Vec<c64>]) -> Result<ObservabilityReport> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("beta must be nonnegative, got {beta}")));
    }
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|x| {
            let denom = fractional_norm_sq(ms, x, beta);
            observability_integral(ms, x, tau).map(|v| if denom > 0.0 { v / denom } else { f64::INFINITY })
        })
        .collect::<Result<_>>()?;
    let (argmin, c_tau) =
        ratios.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (k, r)| if r < a.1 { (k, r) } else { a });
    let c_tau = c_tau.max(0.0);
    Ok(ObservabilityReport { beta, tau, c_tau, argmin, sample_count: samples.len(), pass: c_tau > 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityDoubling {
    pub beta: f64,
    pub tau: f64,
    pub truncation: usize,
    #[serde(with = "crate::float_serde")]
    pub c_tau: f64,
    #[serde(with = "crate::float_serde")]
    pub c_tau_doubled: f64,
    /// `log₂(c_τ(N)/c_τ(2N))`
    #[serde(with = "crate::float_serde")]
    pub kappa: f64,
    pub pass: bool,
}

pub const DOUBLING_TOLERANCE: f64 = 0.05;

/// Runs [`nonuniform_obs_check`] at `N` and `2N`, each with the modal basis and
/// `random` unit vectors. A positive constant that shrinks geometrically with
/// `N` is a truncation artefact, so the verdict requires `κ < 0.05`.
pub fn observability_doubling(spec: &SystemSpec, beta: f64, tau: f64, random: usize, seed: u64) -> Result<ObservabilityDoubling> {
    let mut c = [0.0; 2];
    for (i, factor) in [1usize, 2].into_iter().enumerate() {
        let ms = build_modal_system(&spec.with_truncation(spec.truncation * factor))?;
        let samples = sample_states(ms.dim(), random, seed);
        c[i] = nonuniform_obs_check(&ms, beta, tau, &samples)?.c_tau;
    }
    let kappa = if c[1] > 0.0 { (c[0] / c[1]).log2() } else { f64::INFINITY };
    Ok(ObservabilityDoubling {
        beta,
        tau,
        truncation: spec.truncation,
        c_tau: c[0],
        c_tau_doubled: c[1],
        kappa,
        pass: c[0] > 0.0 && c[1] > 0.0 && kappa < DOUBLING_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilitySandwich {
    pub undamped: f64,
    pub damped: f64,
    /// `‖x‖² − ‖T_B(τ)x‖²`
    pub energy_loss: f64,
    /// `|2·damped − energy_loss| / energy_loss`
    pub identity_gap: f64,
    pub ordered: bool,
}

/// Compares the undamped and damped output energies over `[0, τ]`.
pub fn damped_observability_sandwich(
    ms: &ModalSystem,
    dg: &DampedGenerator,
    sf: &SpectralFactorization,
    x: &[c64],
    tau: f64,
) -> Result<ObservabilitySandwich> {
    check_state(ms, x)?;
    if norm_sq(x) == 0.0 {
        return Ok(ObservabilitySandwich { undamped: 0.0, damped: 0.0, energy_loss: 0.0, identity_gap: 0.0, ordered: true });
    }
    let undamped = observability_integral(ms, x, tau)?;
    let eb = energy_balance(sf, dg, x, tau)?;
    let damped = 0.5 * eb.dissipated;
    Ok(ObservabilitySandwich {
        undamped,
        damped,
        energy_loss: eb.energy_loss,
        identity_gap: eb.relative_gap(),
        ordered: damped <= undamped * (1.0 + 1e-9) + 1e-15,
    })
}

/// Damped state after `τ`, for callers chaining sandwiches.
pub fn damped_state(sf: &SpectralFactorization, x: &[c64], tau: f64) -> Result<Vec<c64>> {
    orbit(sf, x, tau)
}

/// Constants converting a Hautus test for the second-order system into one for
/// the first-order system: `c_B = sup_n |b_n|/λ_n` and `c_A = λ₁²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderHautus {
    pub c_b: f64,
    pub c_a: f64,
}

pub fn hautus_secondorder_constants(ms: &ModalSystem) -> Result<SecondOrderHautus> {
    let first = ms.modes.first().ok_or(Error::InsufficientModes { required: 1, got: 0 })?;
    let c_b = ms.modes.iter().map(|m| m.coupling.abs() / m.lambda).fold(0.0, f64::max);
    Ok(SecondOrderHautus { c_b, c_a: first.lambda * first.lambda })
}

impl SecondOrderHautus {
    /// `(M_o, m_o) = (max{M̃_o, 8m̃_o c_B² + c_A}, 4m̃_o)` at one frequency.
    pub fn first_order(&self, big_tilde: f64, small_tilde: f64) -> Result<(f64, f64)> {
        if !(big_tilde > 0.0) || !(small_tilde > 0.0) {
            return Err(Error::Precondition("second-order Hautus functions must be positive".into()));
        }
        Ok((big_tilde.max(8.0 * small_tilde * self.c_b * self.c_b + self.c_a), 4.0 * small_tilde))
    }

    /// `(M̃_o, m̃_o) = (M_o, m_o/2)`.
    pub fn second_order(&self, big: f64, small: f64) -> (f64, f64) {
        (big, 0.5 * small)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_damping, assemble_generator, assemble_system};
    use crate::modal::{DampingSpec, Mode, SystemKind, WeakProfile};
    use crate::resolvent::{default_grid, peak_series, scan, Method};
    use crate::semigroup::eig_decompose;
    use std::f64::consts::{PI, SQRT_2};

    fn system(kind: SystemKind, d: DampingSpec, n: usize) -> ModalSystem {
        build_modal_system(&SystemSpec::new(kind, d, n)).unwrap()
    }

    fn omx() -> DampingSpec {
        DampingSpec::Weak(WeakProfile::OneMinusXi)
    }

    fn zero(n: usize) -> Vec<c64> {
        vec![c64::new(0.0, 0.0); n]
    }

    #[test]
    fn wavepacket_tables() {
        let wp = wavepacket_params(&system(SystemKind::Wave1d, omx(), 20)).unwrap();
        assert!((wp.delta0 - PI / 4.0).abs() < 1e-14);
        for (n, g) in wp.gamma0.iter().enumerate() {
            assert!((g - SQRT_2 / ((n + 1) as f64 * PI)).abs() < 1e-15);
        }
        assert_eq!(wp.gamma0_at(3.0 * PI + 0.7), Some(wp.gamma0[2]));
        assert_eq!(wp.gamma0_at(3.5 * PI), None);
        // M(nπ) = (nπ)²/2 · 16/π² = 8n²
        let m = predicted_M_from_wavepackets(&wp).unwrap();
        for n in 1..=20 {
            assert!((m.eval(n as f64 * PI).unwrap() - 8.0 * (n * n) as f64).abs() < 1e-9);
        }

        let wp = wavepacket_params(&system(SystemKind::Beam1d, omx(), 10)).unwrap();
        assert!((wp.delta0 - 3.0 * PI * PI / 4.0).abs() < 1e-12);

        let alpha = 0.3;
        let wp = wavepacket_params(&system(SystemKind::Wave1d, DampingSpec::FractionalDiag { alpha }, 10)).unwrap();
        let m = predicted_M_from_wavepackets(&wp).unwrap();
        for (l, g) in wp.s.iter().zip(&wp.gamma0) {
            assert!((g - l.powf(-alpha)).abs() < 1e-15);
            let ratio = m.eval(*l).unwrap() / l.powf(2.0 * alpha);
            assert!((ratio - 16.0 / (PI * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_profile_envelope() {
        let wp = wavepacket_params(&system(SystemKind::Wave1d, DampingSpec::Weak(WeakProfile::Xi2OneMinusXi), 30)).unwrap();
        let m = predicted_M_from_wavepackets(&wp).unwrap();
        let ratios: Vec<f64> = (10..=30).map(|n| m.eval(n as f64 * PI).unwrap() / (n as f64).powi(6)).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 2.5, "{lo} {hi}");
    }

    #[test]
    fn constant_gamma_gives_constant_rate() {
        let modes = (1..=6).map(|n| Mode { n, lambda: n as f64 * PI, coupling: 0.5 }).collect();
        let ms = ModalSystem::from_modes(SystemKind::Wave1d, modes, DampingKind::RankOne).unwrap();
        let m = predicted_M_from_wavepackets(&wavepacket_params(&ms).unwrap()).unwrap();
        let v0 = m.eval(PI).unwrap();
        assert!((1..=6).all(|n| m.eval(n as f64 * PI).unwrap() == v0));
    }

    #[test]
    fn wavepacket_undamped_mode_rejected() {
        let ms = system(SystemKind::Wave1d, DampingSpec::Pointwise { xi0: 0.5 }, 6);
        assert!(matches!(wavepacket_params(&ms), Err(Error::UndampedMode { n: 2 })));
    }

    #[test]
    fn peaks_bounded_by_wavepacket_rate() {
        let ms = system(SystemKind::Wave1d, omx(), 40);
        let dg = assemble_system(&ms).unwrap();
        let m = predicted_M_from_wavepackets(&wavepacket_params(&ms).unwrap()).unwrap();
        let peaks = peak_series(&dg, Method::RankOne, 1, 20).unwrap();
        let c = peak_constant(&peaks, &m).unwrap();
        assert!(c.is_finite() && c > 0.0 && c < 10.0, "{c}");
    }

    #[test]
    fn hautus_normal_baseline() {
        let ms = system(SystemKind::Wave1d, omx(), 8);
        let g = assemble_generator(&ms);
        let d = assemble_damping(&ms);
        let lambdas = ms.frequencies();
        let dist = |s: f64| lambdas.iter().map(|l| (s.abs() - l).abs()).fold(f64::INFINITY, f64::min);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let eig: Vec<Vec<c64>> = (0..8)
            .map(|k| {
                let mut x = zero(16);
                x[2 * k] = c64::new(r, 0.0);
                x[2 * k + 1] = c64::new(0.0, r);
                x
            })
            .collect();
        let s: Vec<f64> = (0..40).map(|j| 0.37 + j as f64 * 0.61).collect();
        let rep = hautus_check(&g, &d, |s| 1.0 / dist(s).powi(2), |_| 0.0, &s, &eig).unwrap();
        assert!(rep.pass && rep.worst_ratio <= 1.0 + 1e-12, "{rep:?}");
    }

    #[test]
    fn hautus_converse_from_scan() {
        let ms = system(SystemKind::Wave1d, omx(), 30);
        let dg = assemble_system(&ms).unwrap();
        let grid = default_grid(&ms.frequencies(), &[0.0, 0.25, 0.5, 0.75]);
        let sc = scan(&dg, Method::RankOne, &grid, true).unwrap();
        let m = RateFunction::tabulated(sc.s.clone(), sc.norms.clone(), Interpolation::Linear).unwrap();
        let (big, small) = converse_pair(&m);
        let samples = sample_states(60, 500, 99);
        let rep = hautus_check(&dg.generator, &dg.damping, big, small, &sc.s, &samples).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.sample_count, sc.s.len() * 560);
    }

    #[test]
    fn hautus_undersized_fails() {
        let ms = system(SystemKind::Wave1d, omx(), 20);
        let dg = assemble_system(&ms).unwrap();
        let n = 4;
        let s = ms.modes[n - 1].lambda;
        let peaks = peak_series(&dg, Method::RankOne, n, n).unwrap();
        let m = RateFunction::Constant { value: peaks.peak[0] };
        let (big, small) = converse_pair(&m);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut x = zero(40);
        x[2 * (n - 1)] = c64::new(r, 0.0);
        x[2 * (n - 1) + 1] = c64::new(0.0, r);
        let ok = hautus_check(&dg.generator, &dg.damping, &big, &small, &[s], &[x.clone()]).unwrap();
        assert!(ok.pass);
        let bad = hautus_check(&dg.generator, &dg.damping, &big, |s| 1e-4 * small(s), &[s], &[x]).unwrap();
        assert!(!bad.pass && bad.worst_ratio > 1.0);
    }

    #[test]
    fn schrodinger_conversion() {
        let grid: Vec<f64> = (0..50).map(|k| k as f64 * 0.5).collect();
        let w = schrodinger_to_wavepacket(|_| 1.0, |_| 1.0, &grid).unwrap();
        assert_eq!((w.eta, w.c0), (1.0, 0.5));
        for (k, &s) in grid.iter().enumerate() {
            assert!((w.delta0[k] - 1.0 / (2.0 * SQRT_2 * (1.0 + s))).abs() < 1e-15);
            assert!((w.gamma0[k] - 1.0 / SQRT_2).abs() < 1e-15);
            assert!((w.predicted_m[k] - (1.0 + s * s)).abs() < 1e-12);
        }
        let w = schrodinger_to_wavepacket(|s| (1.0 + s).powi(-2), |_| 1.0, &grid).unwrap();
        assert!((w.eta - 1.0).abs() < 1e-15);
        assert!(w.delta0.iter().all(|d| (d - 1.0 / SQRT_2 * 0.5).abs() < 1e-12));
        assert!(matches!(schrodinger_to_wavepacket(|_| 0.0, |_| 1.0, &grid), Err(Error::Precondition(_))));
    }

    fn unit_system() -> ModalSystem {
        let modes = (1..=4).map(|n| Mode { n, lambda: n as f64 * PI, coupling: if n == 1 { 1.0 } else { 0.3 } }).collect();
        ModalSystem::from_modes(SystemKind::Wave1d, modes, DampingKind::RankOne).unwrap()
    }

    #[test]
    fn single_mode_integrals() {
        let ms = unit_system();
        let mut x = zero(8);
        x[1] = c64::new(1.0, 0.0);
        assert!((observability_integral(&ms, &x, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let mut x = zero(8);
        x[0] = c64::new(1.0, 0.0);
        assert!((observability_integral(&ms, &x, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
    }

    #[test]
    fn mixed_modes_match_quadrature() {
        let ms = unit_system();
        let mut x = zero(8);
        x[1] = c64::new(0.5f64.sqrt(), 0.0);
        x[3] = c64::new(0.5f64.sqrt(), 0.0);
        x[2] = c64::new(0.1, -0.2);
        let tau = 1.7;
        let f = |t: f64| {
            let y = undamped_evolve(&ms, &x, t).unwrap();
            let o: c64 = ms.modes.iter().enumerate().map(|(k, m)| y[2 * k + 1] * m.coupling).sum();
            o.norm_sqr()
        };
        let oracle = adaptive_simpson(&f, 0.0, tau, 1e-14);
        assert!((observability_integral(&ms, &x, tau).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn integral_additivity() {
        for d in [omx(), DampingSpec::FractionalDiag { alpha: 0.5 }] {
            let ms = system(SystemKind::Wave1d, d, 12);
            let mut rng = sample_stream(5, 0);
            let x = random_unit_complex(&mut rng, 24);
            let (t1, t2) = (0.9, 2.3);
            let whole = observability_integral(&ms, &x, t1 + t2).unwrap();
            let split = observability_integral(&ms, &x, t1).unwrap()
                + observability_integral(&ms, &undamped_evolve(&ms, &x, t1).unwrap(), t2).unwrap();
            assert!((whole - split).abs() < 1e-10);
        }
    }

    #[test]
    fn fractional_observability() {
        let tau = 2.0 + 2.0 * PI * PI;
        let ms = system(SystemKind::Wave1d, DampingSpec::FractionalDiag { alpha: 0.5 }, 20);
        let rep = nonuniform_obs_check(&ms, 0.5, tau, &basis_vectors(40)).unwrap();
        assert!(rep.c_tau >= tau / 2.0 - 1.0 / (2.0 * PI) && rep.pass, "{rep:?}");

        let spec = SystemSpec::new(SystemKind::Wave1d, DampingSpec::FractionalDiag { alpha: 0.5 }, 20);
        assert!(observability_doubling(&spec, 0.5, tau, 50, 3).unwrap().pass);
        assert!(!observability_doubling(&spec, 0.25, tau, 50, 3).unwrap().pass);
    }

    #[test]
    fn exact_observability() {
        let tau = 2.0 + 2.0 * PI * PI;
        let spec = SystemSpec::new(SystemKind::Wave1d, DampingSpec::Couplings { values: vec![1.0; 10] }, 10);
        let ms = build_modal_system(&spec).unwrap();
        let rep = nonuniform_obs_check(&ms, 0.0, tau, &basis_vectors(20)).unwrap();
        assert!((rep.c_tau - (tau / 2.0 - 1.0 / (2.0 * PI))).abs() < 1.0 / (2.0 * PI), "{rep:?}");

        let mut values = vec![1.0; 10];
        values[3] = 0.0;
        let spec = SystemSpec::new(SystemKind::Wave1d, DampingSpec::Couplings { values }, 10);
        let ms = build_modal_system(&spec).unwrap();
        let rep = nonuniform_obs_check(&ms, 0.0, tau, &sample_states(20, 10, 1)).unwrap();
        assert!(rep.c_tau == 0.0 && !rep.pass);
    }

    #[test]
    fn sandwich() {
        let ms = system(SystemKind::Wave1d, omx(), 40);
        let dg = assemble_system(&ms).unwrap();
        let sf = eig_decompose(&dg).unwrap();
        let zero_state = zero(80);
        let z = damped_observability_sandwich(&ms, &dg, &sf, &zero_state, 1.0).unwrap();
        assert_eq!((z.undamped, z.damped), (0.0, 0.0));
        let mut rng = sample_stream(17, 0);
        let x = random_unit_complex(&mut rng, 80);
        let r = damped_observability_sandwich(&ms, &dg, &sf, &x, 8.0).unwrap();
        assert!(r.identity_gap < 1e-6 && r.ordered, "{r:?}");

        let weak = ms.scaled(1e-6);
        let dgw = assemble_system(&weak).unwrap();
        let sfw = eig_decompose(&dgw).unwrap();
        let w = damped_observability_sandwich(&weak, &dgw, &sfw, &x, 2.0).unwrap();
        assert!((w.damped - w.undamped).abs() < 1e-4 * w.undamped, "{w:?}");
    }

    #[test]
    fn second_order_constants() {
        let ms = system(SystemKind::Wave1d, omx(), 20);
        let k = hautus_secondorder_constants(&ms).unwrap();
        assert!((k.c_b - SQRT_2 / (PI * PI)).abs() < 1e-15);
        assert!((k.c_a - PI * PI).abs() < 1e-13);
        let (big, small) = k.first_order(1.0, 1.0).unwrap();
        assert_eq!(small, 4.0);
        assert!((big - (8.0 * k.c_b * k.c_b + PI * PI)).abs() < 1e-13);
        let (bt, st) = k.second_order(big, small);
        let bound = (8.0 * k.c_b * k.c_b + k.c_a).max(8.0);
        assert!(bt / 1.0 <= bound && st / 1.0 <= bound);
        assert_eq!(st, 2.0);
    }
}
