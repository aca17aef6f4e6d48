//! Growth functions `M(s)` bounding the resolvent, their sup-inverses and the
//! decay envelopes `1/M⁻¹(t)` they predict, plus the spectral lower bounds
//! that show a given `M` cannot be improved.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::assembly::DampedGenerator;
use crate::error::{Error, Result};
use crate::fit::fit_loglog;
use crate::modal::ModalSystem;
use crate::semigroup::DecayTrace;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Right-continuous steps: `M(s) = M_i` on `[s_i, s_{i+1})`.
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateFunction {
    /// `c·s^a`
    Power { coeff: f64, exponent: f64 },
    /// `c·s^a·log(shift + s)^b`
    PowerLog { coeff: f64, exponent: f64, log_exponent: f64, shift: f64 },
    Constant { value: f64 },
    /// Samples `(s_i, M_i)`; evaluation and inversion use the running maximum.
    Tabulated {
        s: Vec<f64>,
        m: Vec<f64>,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

impl RateFunction {
    pub fn power(coeff: f64, exponent: f64) -> Self {
        RateFunction::Power { coeff, exponent }
    }

    pub fn tabulated(s: Vec<f64>, m: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        let r = RateFunction::Tabulated { s, m, interpolation };
        r.validate()?;
        Ok(r)
    }

    /// Samples `f` on `grid`.
    pub fn tabulate(f: impl Fn(f64) -> f64, grid: &[f64]) -> Result<Self> {
        Self::tabulated(grid.to_vec(), grid.iter().map(|&s| f(s)).collect(), Interpolation::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Data(what.to_string()));
        match self {
            RateFunction::Power { coeff, exponent } => {
                if !(*coeff > 0.0) || !(*exponent >= 0.0) || !coeff.is_finite() || !exponent.is_finite() {
                    return bad("power law needs coeff > 0 and exponent >= 0");
                }
            }
            RateFunction::PowerLog { coeff, exponent, log_exponent, shift } => {
                if !(*coeff > 0.0) || !(*exponent >= 0.0) || !(*log_exponent >= 0.0) || !(*shift >= 1.0) {
                    return bad("power-log law needs coeff > 0, exponents >= 0 and shift >= 1");
                }
            }
            RateFunction::Constant { value } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return bad("constant rate must be positive");
                }
            }
            RateFunction::Tabulated { s, m, .. } => {
                if s.len() != m.len() || s.is_empty() {
                    return bad("table needs equally many s and M values");
                }
                if s[0] < 0.0 || s.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table abscissae must be nonnegative and strictly increasing");
                }
                if m.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return bad("table values must be positive and finite");
                }
            }
        }
        Ok(())
    }

    /// Whether the raw samples are already non-decreasing.
    pub fn is_monotone(&self) -> bool {
        match self {
            RateFunction::Tabulated { m, .. } => m.windows(2).all(|w| w[1] >= w[0]),
            _ => true,
        }
    }

    fn envelope(m: &[f64]) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        m.iter()
            .map(|&v| {
                best = best.max(v);
                best
            })
            .collect()
    }

    pub fn domain_start(&self) -> f64 {
        match self {
            RateFunction::Tabulated { s, .. } => s[0],
            _ => 0.0,
        }
    }

    /// `M(|s|)`. Tabulated functions are constant to the left of the table and
    /// undefined to the right of it.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let s = s.abs();
        Ok(match self {
            RateFunction::Power { coeff, exponent } => coeff * s.powf(*exponent),
            RateFunction::PowerLog { coeff, exponent, log_exponent, shift } => {
                coeff * s.powf(*exponent) * (shift + s).ln().powf(*log_exponent)
            }
            RateFunction::Constant { value } => *value,
            RateFunction::Tabulated { s: xs, m, interpolation } => {
                let env = Self::envelope(m);
                let last = xs.len() - 1;
                if s > xs[last] {
                    return Err(Error::Domain(format!("s = {s} beyond the table end {}", xs[last])));
                }
                if s <= xs[0] {
                    return Ok(env[0]);
                }
                let j = xs.partition_point(|&x| x <= s) - 1;
                if j == last {
                    return Ok(env[last]);
                }
                match interpolation {
                    Interpolation::Step => env[j],
                    Interpolation::Linear => {
                        let w = (s - xs[j]) / (xs[j + 1] - xs[j]);
                        env[j] + w * (env[j + 1] - env[j])
                    }
                }
            }
        })
    }

    /// `M⁻¹(t) = sup{s ≥ s₀ : M(s) ≤ t}`; infinite when `M` never exceeds `t`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::Domain("t is NaN".into()));
        }
        let start = self.eval(self.domain_start())?;
        if t < start {
            return Err(Error::Domain(format!("t = {t} is below M(s0) = {start}")));
        }
        match self {
            RateFunction::Power { coeff, exponent } => {
                if *exponent == 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok((t / coeff).powf(1.0 / exponent))
                }
            }
            RateFunction::Constant { .. } => Ok(f64::INFINITY),
            RateFunction::PowerLog { .. } => {
                let mut lo = 0.0;
                let mut hi = 1.0;
                while self.eval(hi)? <= t {
                    lo = hi;
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Ok(f64::INFINITY);
                    }
                }
                for _ in 0..2000 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.eval(mid)? <= t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(lo)
            }
            RateFunction::Tabulated { s: xs, m, interpolation } => {
                let env = Self::envelope(m);
                let last = xs.len() - 1;
                if t == env[last] {
                    return Ok(xs[last]);
                }
                if t > env[last] {
                    return Err(Error::BeyondTable { t, max: env[last] });
                }
                // first index whose envelope exceeds t
                let j = env.partition_point(|&v| v <= t);
                match interpolation {
                    Interpolation::Step => Ok(xs[j]),
                    Interpolation::Linear => {
                        let i = j - 1;
                        let w = (t - env[i]) / (env[j] - env[i]);
                        let mut s = (xs[i] + w * (xs[j] - xs[i])).clamp(xs[i], xs[j]);
                        while s > xs[i] && self.eval(s)? > t {
                            s = s.next_down();
                        }
                        Ok(s)
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveIncreaseCert {
    pub alpha: f64,
    pub c_alpha: f64,
    pub s0: f64,
    /// Largest `s` at which the ratio was tested.
    pub s_max: f64,
    pub lambda_max: f64,
    pub s_points: usize,
    pub lambda_points: usize,
}

const ALPHA_TOP: i64 = 2000;
const ALPHA_FLOOR: f64 = 0.05;
const C_FLOOR: f64 = 0.01;
const STABILITY: f64 = 0.99;

/// Searches for `α, c_α` with `M(λs)/M(s) ≥ c_α λ^α` for `λ ∈ [1, λ_max]` and
/// grid points `s ≤ max(grid)/λ_max`.
///
/// The exponent is scanned downwards in steps of 0.01. A candidate is accepted
/// once `c_α ≥ 0.01` and the normalised ratio `M(λs)/(M(s)λ^α)` over
/// `λ ∈ [√λ_max, λ_max]` stays within 1% of its minimum over `[1, √λ_max]`.
/// The second condition rejects exponents that only hold because the tested
/// range of `λ` is bounded.
pub fn check_positive_increase(m: &RateFunction, lambda_max: f64, grid: &[f64]) -> Result<PositiveIncreaseCert> {
    m.validate()?;
    if !m.is_monotone() {
        return Err(Error::Data("tabulated rate is not monotone".into()));
    }
    if !(lambda_max > 1.0) {
        return Err(Error::Domain("lambda_max must exceed 1".into()));
    }
    let s_cap = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max) / lambda_max;
    let mut svals = Vec::new();
    for &s in grid {
        if s <= s_cap && s >= m.domain_start() {
            let v = m.eval(s)?;
            if v > 0.0 {
                svals.push((s, v));
            }
        }
    }
    if svals.len() < 2 {
        return Err(Error::TooFewPoints { what: "positive-increase grid", got: svals.len(), required: 2 });
    }
    let lambdas: Vec<f64> = (0..65).map(|k| lambda_max.powf(k as f64 / 64.0)).collect();
    let split = lambda_max.sqrt();
    let mut ratio = Vec::with_capacity(svals.len() * lambdas.len());
    for &(s, v) in &svals {
        for &l in &lambdas {
            ratio.push(m.eval((l * s).min(s_cap * lambda_max))? / v);
        }
    }
    let mut best_c_only = 0.0;
    for k in 0..=(ALPHA_TOP - 5) {
        let alpha = (ALPHA_TOP - k) as f64 / 100.0;
        let scale: Vec<f64> = lambdas.iter().map(|l| l.powf(-alpha)).collect();
        let mut head = f64::INFINITY;
        let mut tail = f64::INFINITY;
        for row in ratio.chunks(lambdas.len()) {
            for (j, r) in row.iter().enumerate() {
                let v = r * scale[j];
                if lambdas[j] <= split {
                    head = head.min(v);
                }
                if lambdas[j] >= split {
                    tail = tail.min(v);
                }
            }
        }
        let c = head.min(tail);
        if c >= C_FLOOR && best_c_only == 0.0 {
            best_c_only = alpha;
        }
        if c >= C_FLOOR && tail >= STABILITY * head {
            return Ok(PositiveIncreaseCert {
                alpha,
                c_alpha: c.min(1.0),
                s0: svals[0].0,
                s_max: svals[svals.len() - 1].0,
                lambda_max,
                s_points: svals.len(),
                lambda_points: lambdas.len(),
            });
        }
    }
    Err(Error::NoPositiveIncrease { floor: ALPHA_FLOOR, best: best_c_only })
}

/// Right-inverse as a function.
pub fn invert_rate(m: &RateFunction) -> impl Fn(f64) -> Result<f64> + '_ {
    move |t| m.inverse(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub rate: RateFunction,
    /// False when no positive-increase certificate backs the envelope.
    pub certified: bool,
}

impl DecayEnvelope {
    /// `1/M⁻¹(t)`; zero when `M` is bounded by `t` everywhere.
    pub fn at(&self, t: f64) -> Result<f64> {
        let inv = self.rate.inverse(t)?;
        Ok(if inv.is_infinite() { 0.0 } else { 1.0 / inv })
    }

    /// Bounded `M`: exponential decay, outside the polynomial formula.
    pub fn exponential_regime(&self) -> bool {
        match &self.rate {
            RateFunction::Constant { .. } => true,
            RateFunction::Power { exponent, .. } => *exponent == 0.0,
            _ => false,
        }
    }
}

pub fn predict_decay(m: &RateFunction, cert: Option<&PositiveIncreaseCert>) -> DecayEnvelope {
    DecayEnvelope { rate: m.clone(), certified: cert.is_some() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoinverseSeries {
    pub n: Vec<usize>,
    pub lambda: Vec<f64>,
    /// `‖B_{s_n}‖²`, the damping projected on the eigenvector at `iλ_n`.
    pub bs_norm_sq: Vec<f64>,
    /// `‖B_{s_n}†‖² = 1/‖B_{s_n}‖²`; `None` for undamped modes.
    pub lower_bound: Vec<Option<f64>>,
    pub undamped_modes: Vec<usize>,
}

/// `‖B*v_n‖²` for the unit eigenvector `v_n = (e_n⁽¹⁾ + i e_n⁽²⁾)/√2` of `A` at `iλ_n`.
fn projected_damping(ms: &ModalSystem, k: usize) -> f64 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (pos, vel) = (c64::new(r, 0.0), c64::new(0.0, r));
    let b = ms.modes[k].coupling;
    // damping reads the velocity slot only, so the position part drops out
    let out = pos * 0.0 + vel * b;
    out.norm_sqr()
}

pub fn pseudoinverse_lower_bounds(ms: &ModalSystem) -> PseudoinverseSeries {
    let mut out = PseudoinverseSeries { n: vec![], lambda: vec![], bs_norm_sq: vec![], lower_bound: vec![], undamped_modes: vec![] };
    for (k, mode) in ms.modes.iter().enumerate() {
        let b = projected_damping(ms, k);
        out.n.push(mode.n);
        out.lambda.push(mode.lambda);
        out.bs_norm_sq.push(b);
        if b > 0.0 {
            out.lower_bound.push(Some(1.0 / b));
        } else {
            out.lower_bound.push(None);
            out.undamped_modes.push(mode.n);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n: usize,
    pub lambda_n: f64,
    #[serde(rename = "Bs_norm_sq")]
    pub bs_norm_sq: f64,
    pub mu_re: f64,
    pub mu_im: f64,
    pub deviation: f64,
    /// Two computed eigenvalues within a quarter gap of `iλ_n`.
    pub ambiguous: bool,
}

/// Compares computed eigenvalues near `iλ_n` with `iλ_n − ‖B_{s_n}‖²`.
pub fn eigenvalue_asymptotics(eigs: &[c64], ms: &ModalSystem, lo: usize, hi: usize) -> Result<Vec<DeviationRow>> {
    let limit = ms.len() / 2;
    if lo == 0 || hi < lo || hi > limit {
        return Err(Error::ValidityWindow { lo, hi, limit });
    }
    let pis = pseudoinverse_lower_bounds(ms);
    let mut rows = Vec::new();
    for n in lo..=hi {
        let k = n - 1;
        let l = ms.modes[k].lambda;
        let left = if k > 0 { l - ms.modes[k - 1].lambda } else { f64::INFINITY };
        let right = if k + 1 < ms.len() { ms.modes[k + 1].lambda - l } else { f64::INFINITY };
        let quarter = 0.25 * left.min(right);
        let target = c64::new(0.0, l);
        let mut sorted: Vec<(f64, c64)> = eigs.iter().map(|&z| ((z - target).norm(), z)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (d0, mu) = sorted[0];
        let ambiguous = sorted.len() > 1 && sorted[1].0 < quarter && d0 < quarter;
        let b = pis.bs_norm_sq[k];
        let predicted = c64::new(-b, l);
        let dev = (mu - predicted).norm();
        let deviation = if b > 0.0 {
            dev / b
        } else if dev <= 1e-12 * l {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(DeviationRow { n, lambda_n: l, bs_norm_sq: b, mu_re: mu.re, mu_im: mu.im, deviation, ambiguous });
    }
    Ok(rows)
}

pub fn eigenvalue_asymptotics_check(dg: &DampedGenerator, ms: &ModalSystem, lo: usize, hi: usize) -> Result<Vec<DeviationRow>> {
    let eigs = dg.matrix.eigenvalues().map_err(|e| Error::Numerical(format!("eigenvalues: {e:?}")))?;
    eigenvalue_asymptotics(&eigs, ms, lo, hi)
}

/// Mean deviation over the first and second halves of the table.
pub fn deviation_halves(rows: &[DeviationRow]) -> (f64, f64) {
    let h = rows.len() / 2;
    let mean = |r: &[DeviationRow]| r.iter().map(|x| x.deviation).sum::<f64>() / r.len().max(1) as f64;
    (mean(&rows[..h]), mean(&rows[h..]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityProxy {
    pub t_start: f64,
    pub t_end: f64,
    /// max of `M₀⁻¹(t)·trace(t)` over the second half of the trace
    #[serde(with = "crate::float_serde")]
    pub limsup: f64,
    #[serde(with = "crate::float_serde")]
    pub min: f64,
    /// `limsup / min`
    #[serde(with = "crate::float_serde")]
    pub spread: f64,
    /// log-log slope of the proxy over the second half
    #[serde(with = "crate::float_serde")]
    pub trend_exponent: f64,
    pub certified: bool,
}

/// Finite-horizon stand-in for `limsup M₀⁻¹(t)‖T_B(t)A_B⁻¹‖ > 0`, taken over the
/// second half (by index) of the trace's time grid. Certified when the proxy is
/// positive, varies by less than a factor 3 and shows no decay trend beyond
/// `t^{-0.1}`.
pub fn optimality_limsup(trace: &DecayTrace, m0: &RateFunction) -> Result<OptimalityProxy> {
    let n = trace.t.len();
    let h = n / 2;
    if n - h < 3 {
        return Err(Error::TooFewPoints { what: "optimality proxy", got: n - h, required: 3 });
    }
    let t = &trace.t[h..];
    let p: Vec<f64> = t
        .iter()
        .zip(&trace.values[h..])
        .map(|(&t, &v)| m0.inverse(t).map(|s| s * v))
        .collect::<Result<_>>()?;
    let limsup = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let trend = if min > 0.0 && limsup.is_finite() { fit_loglog(t, &p, 3)?.exponent } else { f64::NAN };
    let spread = limsup / min;
    Ok(OptimalityProxy {
        t_start: t[0],
        t_end: t[t.len() - 1],
        limsup,
        min,
        spread,
        trend_exponent: trend,
        certified: limsup > 0.0 && spread < 3.0 && trend >= -0.1,
    })
}
