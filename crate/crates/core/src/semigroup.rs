//! Time evolution of the truncated damped system and decay measurements.

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::DampedGenerator;
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, SlopeFit};
use crate::linalg::{expm, extreme_singular_values_c, spectral_norm};
use crate::rate::{predict_decay, RateFunction};

const CONDITIONING_LIMIT: f64 = 1e8;
const RECONSTRUCTION_LIMIT: f64 = 1e-8;

/// Eigendecomposition `A_B = VΛV⁻¹` with unit eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralFactorization {
    pub eigenvalues: Vec<c64>,
    pub vectors: Mat<c64>,
    pub inverse_vectors: Mat<c64>,
    pub conditioning: f64,
    pub reconstruction_error: f64,
    /// Evaluate through the matrix exponential instead of the eigenbasis.
    pub use_expm: bool,
    pub lambdas: Vec<f64>,
    matrix: Mat<f64>,
    generator_inverse: Mat<f64>,
    /// `Λ⁻¹V⁻¹`, so that `V e^{tΛ} Λ⁻¹V⁻¹ = e^{tA_B}A_B⁻¹`.
    smoothing: Mat<c64>,
}

fn frob(m: &Mat<f64>) -> f64 {
    m.norm_l2()
}

pub fn eig_decompose(dg: &DampedGenerator) -> Result<SpectralFactorization> {
    let a = &dg.matrix;
    let n = dg.dim();
    let generator_inverse = a.partial_piv_lu().inverse();
    if generator_inverse.col_iter().any(|c| c.iter().any(|x| !x.is_finite())) {
        return Err(Error::Numerical("damped generator is singular".into()));
    }
    let eig = a.eigen().map_err(|e| Error::Numerical(format!("eigendecomposition: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let eigenvalues: Vec<c64> = (0..n).map(|k| s[k]).collect();
    let mut vectors = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        let norm = (0..n).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            vectors[(i, j)] = u[(i, j)] / norm;
        }
    }
    let top_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if top_re > 1e-12 {
        return Err(Error::Numerical(format!("eigenvalue with real part {top_re:e} in a dissipative generator")));
    }
    let (smax, smin) = extreme_singular_values_c(vectors.as_ref())?;
    let conditioning = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let inverse_vectors = vectors.partial_piv_lu().inverse();
    let recon = Mat::<f64>::from_fn(n, n, |i, j| {
        let v: c64 = (0..n).map(|k| vectors[(i, k)] * eigenvalues[k] * inverse_vectors[(k, j)]).sum();
        v.re - a[(i, j)]
    });
    let reconstruction_error = frob(&recon) / frob(a);
    let use_expm =
        !(conditioning <= CONDITIONING_LIMIT) || !(reconstruction_error <= RECONSTRUCTION_LIMIT);
    let smoothing = Mat::<c64>::from_fn(n, n, |i, j| inverse_vectors[(i, j)] / eigenvalues[i]);
    Ok(SpectralFactorization {
        eigenvalues,
        vectors,
        inverse_vectors,
        conditioning,
        reconstruction_error,
        use_expm,
        lambdas: dg.generator.lambdas.clone(),
        matrix: a.clone(),
        generator_inverse,
        smoothing,
    })
}

impl SpectralFactorization {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn generator_inverse(&self) -> &Mat<f64> {
        &self.generator_inverse
    }

    /// `V e^{tΛ} W`, real part.
    fn evolve(&self, t: f64, w: &Mat<c64>) -> Mat<f64> {
        let n = self.dim();
        let e: Vec<c64> = self.eigenvalues.iter().map(|&mu| (mu * t).exp()).collect();
        let scaled = Mat::<c64>::from_fn(n, w.ncols(), |i, j| e[i] * w[(i, j)]);
        let prod = &self.vectors * &scaled;
        Mat::from_fn(n, w.ncols(), |i, j| prod[(i, j)].re)
    }

    /// `e^{tA_B}` as a dense matrix.
    pub fn exponential(&self, t: f64) -> Result<Mat<f64>> {
        if self.use_expm {
            expm(self.matrix.as_ref(), t)
        } else {
            Ok(self.evolve(t, &self.inverse_vectors))
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// `‖e^{tA_B}A_B⁻¹‖`.
pub fn propagator_norm(sf: &SpectralFactorization, t: f64) -> Result<f64> {
    check_time(t)?;
    let m = if sf.use_expm {
        expm(sf.matrix.as_ref(), t)? * &sf.generator_inverse
    } else {
        sf.evolve(t, &sf.smoothing)
    };
    spectral_norm(m.as_ref())
}

/// `‖e^{tA_B}‖`.
pub fn semigroup_norm(sf: &SpectralFactorization, t: f64) -> Result<f64> {
    check_time(t)?;
    spectral_norm(sf.exponential(t)?.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

pub fn time_grid(start: f64, stop: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(stop > start) || points < 2 {
        return Err(Error::Domain(format!("bad time grid [{start}, {stop}] with {points} points")));
    }
    let h = (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            let w = k as f64 / h;
            match spacing {
                Spacing::Log => start * (stop / start).powf(w),
                Spacing::Linear => start + (stop - start) * w,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub t: Vec<f64>,
    /// `‖e^{tA_B}A_B⁻¹‖`
    pub values: Vec<f64>,
    /// `1/M⁻¹(t)`, absent where the rate cannot be inverted.
    pub predicted: Option<Vec<Option<f64>>>,
    /// `M(λ_{N/2})`; polynomial behaviour of the untruncated system is only
    /// visible before this time.
    pub horizon: Option<f64>,
    pub beyond_horizon: bool,
}

/// `M(λ_{N/2})`.
pub fn validity_horizon(lambdas: &[f64], m: &RateFunction) -> Option<f64> {
    let k = (lambdas.len() / 2).max(1) - 1;
    m.eval(lambdas[k]).ok()
}

pub fn decay_trace(sf: &SpectralFactorization, grid: &[f64], m: Option<&RateFunction>) -> Result<DecayTrace> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.first().is_some_and(|&t| !(t > 0.0)) {
        return Err(Error::Domain("time grid must be positive and increasing".into()));
    }
    let values: Vec<f64> = grid.par_iter().map(|&t| propagator_norm(sf, t)).collect::<Result<_>>()?;
    let (predicted, horizon) = match m {
        Some(m) => {
            let env = predict_decay(m, None);
            let p = grid.iter().map(|&t| env.at(t).ok()).collect();
            (Some(p), validity_horizon(&sf.lambdas, m))
        }
        None => (None, None),
    };
    let beyond_horizon = match (horizon, grid.last()) {
        (Some(h), Some(&t)) => t > h,
        _ => false,
    };
    Ok(DecayTrace { t: grid.to_vec(), values, predicted, horizon, beyond_horizon })
}

/// `1/λ_N`: below this the truncated trace is dominated by missing modes.
pub fn truncation_floor(lambdas: &[f64]) -> f64 {
    1.0 / lambdas[lambdas.len() - 1]
}

/// Fits the decay exponent over `t ∈ [lo, hi]`, dropping points whose value is
/// below a tenth of `floor`.
pub fn fit_decay_exponent(trace: &DecayTrace, lo: f64, hi: f64, floor: f64) -> Result<SlopeFit> {
    let (t, v): (Vec<f64>, Vec<f64>) = trace
        .t
        .iter()
        .zip(&trace.values)
        .filter(|(&t, &v)| t >= lo && t <= hi && v >= 0.1 * floor)
        .map(|(&t, &v)| (t, v))
        .unzip();
    if t.len() < 8 {
        return Err(Error::TooFewPoints { what: "decay fit window", got: t.len(), required: 8 });
    }
    fit_loglog(&t, &v, 8)
}

/// `max trace(t)·M⁻¹(t)` over the window and its tail/head ratio.
pub fn rate_consistency(trace: &DecayTrace, m: &RateFunction, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let p: Vec<f64> = trace
        .t
        .iter()
        .zip(&trace.values)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &v)| m.inverse(t).map(|s| s * v))
        .collect::<Result<_>>()?;
    if p.len() < 2 {
        return Err(Error::TooFewPoints { what: "rate consistency window", got: p.len(), required: 2 });
    }
    let h = p.len() / 2;
    let head = p[..h].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = p[h..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((head.max(tail), tail / head))
}

fn as_column(x: &[c64]) -> Mat<c64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

/// `e^{tA_B}x₀` for complex `x₀`.
pub fn orbit(sf: &SpectralFactorization, x0: &[c64], t: f64) -> Result<Vec<c64>> {
    check_time(t)?;
    let n = sf.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if sf.use_expm {
        let e = expm(sf.matrix.as_ref(), t)?;
        Ok((0..n).map(|i| (0..n).map(|j| x0[j] * e[(i, j)]).sum()).collect())
    } else {
        let c = &sf.inverse_vectors * as_column(x0);
        let ex: Vec<c64> = sf.eigenvalues.iter().map(|&mu| (mu * t).exp()).collect();
        Ok((0..n).map(|i| (0..n).map(|k| sf.vectors[(i, k)] * ex[k] * c[(k, 0)]).sum()).collect())
    }
}

/// `‖e^{tA_B}x₀‖` along `grid`.
pub fn orbit_decay(sf: &SpectralFactorization, x0: &[c64], grid: &[f64]) -> Result<Vec<f64>> {
    if x0.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(Error::Precondition("initial state is zero".into()));
    }
    grid.par_iter()
        .map(|&t| orbit(sf, x0, t).map(|y| y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    /// `‖x₀‖² − ‖e^{τA_B}x₀‖²`
    pub energy_loss: f64,
    /// `2∫₀^τ ‖B*e^{tA_B}x₀‖² dt` by composite Simpson
    pub dissipated: f64,
    pub steps: usize,
}

impl EnergyBalance {
    pub fn relative_gap(&self) -> f64 {
        (self.energy_loss - self.dissipated).abs() / self.energy_loss.abs().max(f64::MIN_POSITIVE)
    }
}

/// Simpson step `h ≤ min(0.01, 0.1/λ_N)`.
pub fn energy_balance(sf: &SpectralFactorization, dg: &DampedGenerator, x0: &[c64], tau: f64) -> Result<EnergyBalance> {
    check_time(tau)?;
    let lmax = sf.lambdas[sf.lambdas.len() - 1];
    let hmax = 0.01f64.min(0.1 / lmax);
    let mut steps = (tau / hmax).ceil() as usize;
    steps += steps % 2;
    let steps = steps.max(2);
    let h = tau / steps as f64;
    let n = sf.dim();
    // B*V columns times V⁻¹x₀ give B*e^{tA_B}x₀ = Σ_k r_k e^{tμ_k}
    let c = &sf.inverse_vectors * as_column(x0);
    let outputs = dg.damping.observe(&vec![c64::new(0.0, 0.0); n]).len();
    let mut r = vec![vec![c64::new(0.0, 0.0); n]; outputs];
    for k in 0..n {
        let col: Vec<c64> = (0..n).map(|i| sf.vectors[(i, k)]).collect();
        for (o, z) in dg.damping.observe(&col).into_iter().enumerate() {
            r[o][k] = z * c[(k, 0)];
        }
    }
    let dissipation = |t: f64| -> f64 {
        let ex: Vec<c64> = sf.eigenvalues.iter().map(|&mu| (mu * t).exp()).collect();
        r.iter().map(|row| row.iter().zip(&ex).map(|(a, b)| a * b).sum::<c64>().norm_sqr()).sum()
    };
    let total: f64 = (0..=steps)
        .into_par_iter()
        .map(|j| {
            let w = if j == 0 || j == steps {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * dissipation(j as f64 * h)
        })
        .sum();
    let dissipated = 2.0 * total * h / 3.0;
    let x_norm: f64 = x0.iter().map(|z| z.norm_sqr()).sum();
    let y = orbit(sf, x0, tau)?;
    let energy_loss = x_norm - y.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(EnergyBalance { energy_loss, dissipated, steps })
}
