//! Resolvent norms `‖(is − A + BB*)⁻¹‖` along the imaginary axis.
//!
//! Three evaluation paths:
//! * `Dense`: smallest singular value of the assembled `2N × 2N` matrix.
//! * `RankOne`: `R_B = R − (Rβ)(βᵀR)/(1 + βᵀRβ)` with the undamped resolvent
//!   `R` applied block by block, and the norm found by Lanczos on `R_B^H R_B`.
//! * `BlockDiagonal`: diagonal damping leaves the `2 × 2` blocks uncoupled.

use std::fmt;

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_system, DampedGenerator, DampingMatrix, TruncatedGenerator};
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, SlopeFit};
use crate::linalg::extreme_singular_values_c;
use crate::modal::{build_modal_system, SystemSpec};
use crate::sampling::{random_unit_complex, sample_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    RankOne,
    BlockDiagonal,
}

impl Method {
    /// The structured path matching the damping.
    pub fn structured(damping: &DampingMatrix) -> Method {
        match damping {
            DampingMatrix::RankOne { .. } => Method::RankOne,
            DampingMatrix::Diagonal { .. } => Method::BlockDiagonal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::RankOne => "rank_one",
            Method::BlockDiagonal => "block_diagonal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `is − A + BB*` as a complex matrix.
pub fn shifted_matrix(dg: &DampedGenerator, s: f64) -> Mat<c64> {
    let m = &dg.matrix;
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let v = c64::new(-m[(i, j)], 0.0);
        if i == j { v + c64::new(0.0, s) } else { v }
    })
}

pub fn resolvent_norm_dense(dg: &DampedGenerator, s: f64) -> Result<f64> {
    let (hi, lo) = extreme_singular_values_c(shifted_matrix(dg, s).as_ref())?;
    if lo < 1e-14 * hi {
        return Err(Error::SpectrumHit { s, sigma_min: lo, norm: hi });
    }
    Ok(1.0 / lo)
}

fn check_pole(lambdas: &[f64], s: f64) -> Result<()> {
    for &l in lambdas {
        if (l - s.abs()).abs() <= 4.0 * f64::EPSILON * l {
            return Err(Error::UndampedPole { s, lambda: l });
        }
    }
    Ok(())
}

/// Undamped block resolvent `(is − A_n)⁻¹ = [[is, λ], [−λ, is]] / (λ² − s²)`.
#[inline]
fn block(l: f64, s: f64) -> (c64, f64) {
    (c64::new(0.0, s / ((l - s) * (l + s))), l / ((l - s) * (l + s)))
}

/// The rank-one corrected resolvent at a fixed `s`, ready for repeated application.
///
/// The mode nearest to `|s|` is split off and its pole cancelled in closed form:
/// with `δ = λ² − s²`, block numerator `M` (so the block is `M/δ`), `c = β_nᵀMβ_n`
/// and `g = (−β_v, β_p)`, one has `cM − Mβ_nβ_nᵀM = δ ggᵀ`. Hence
/// `R_B = R′ + [M(1+q′) + ggᵀ − u_n w′ᵀ − u′w_nᵀ − δu′w′ᵀ] / D` with
/// `D = c + δ(1+q′)`, where primes denote the remaining modes. This stays
/// accurate at and near a damped frequency.
pub struct KatoResolvent<'a> {
    lambdas: &'a [f64],
    s: f64,
    /// index of the split-off mode
    pivot: usize,
    delta: f64,
    /// numerator block `[[is, λ], [−λ, is]]` of the split-off mode
    m: [[c64; 2]; 2],
    g: [f64; 2],
    /// `R′β` and `R′ᵀβ`, zero on the split-off block
    u: Vec<c64>,
    w: Vec<c64>,
    un: [c64; 2],
    wn: [c64; 2],
    one_plus_qr: c64,
    c: c64,
    d: c64,
}

impl<'a> KatoResolvent<'a> {
    pub fn new(generator: &'a TruncatedGenerator, beta: &[f64], s: f64) -> Result<Self> {
        let lambdas = &generator.lambdas[..];
        if beta.len() != 2 * lambdas.len() {
            return Err(Error::DimensionMismatch { expected: 2 * lambdas.len(), got: beta.len() });
        }
        if lambdas.is_empty() {
            return Err(Error::Config("empty generator".into()));
        }
        let pivot = (0..lambdas.len())
            .min_by(|&i, &j| (lambdas[i] - s.abs()).abs().total_cmp(&(lambdas[j] - s.abs()).abs()))
            .unwrap();
        let mut u = vec![c64::new(0.0, 0.0); beta.len()];
        let mut w = vec![c64::new(0.0, 0.0); beta.len()];
        for (k, &l) in lambdas.iter().enumerate() {
            if k == pivot {
                continue;
            }
            let (d, o) = block(l, s);
            let (b1, b2) = (beta[2 * k], beta[2 * k + 1]);
            u[2 * k] = d * b1 + o * b2;
            u[2 * k + 1] = -o * b1 + d * b2;
            w[2 * k] = d * b1 - o * b2;
            w[2 * k + 1] = o * b1 + d * b2;
        }
        let qr: c64 = beta.iter().zip(&u).map(|(&b, &z)| z * b).sum();
        let l = lambdas[pivot];
        let delta = (l - s) * (l + s);
        let is = c64::new(0.0, s);
        let lc = c64::new(l, 0.0);
        let m = [[is, lc], [-lc, is]];
        let (bp, bv) = (beta[2 * pivot], beta[2 * pivot + 1]);
        let un = [m[0][0] * bp + m[0][1] * bv, m[1][0] * bp + m[1][1] * bv];
        let wn = [m[0][0] * bp + m[1][0] * bv, m[0][1] * bp + m[1][1] * bv];
        let c = is * (bp * bp + bv * bv);
        let one_plus_qr = c64::new(1.0, 0.0) + qr;
        let d = c + one_plus_qr * delta;
        if c == c64::new(0.0, 0.0) {
            check_pole(lambdas, s)?;
        }
        if d.norm() < 1e-12 * delta.abs() || d == c64::new(0.0, 0.0) {
            return Err(Error::KatoDenominatorSingular { s, modulus: if delta == 0.0 { 0.0 } else { d.norm() / delta.abs() } });
        }
        Ok(KatoResolvent { lambdas, s, pivot, delta, m, g: [-bv, bp], u, w, un, wn, one_plus_qr, c, d })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `R_B x`.
    pub fn apply(&self, x: &[c64], y: &mut [c64]) {
        let mut tw = c64::new(0.0, 0.0);
        for (wi, xi) in self.w.iter().zip(x) {
            tw += wi * xi;
        }
        let k0 = 2 * self.pivot;
        let xn = [x[k0], x[k0 + 1]];
        let tn = self.wn[0] * xn[0] + self.wn[1] * xn[1];
        let off = (tn + tw * self.delta) / self.d;
        for (k, &l) in self.lambdas.iter().enumerate() {
            if k == self.pivot {
                continue;
            }
            let (d, o) = block(l, self.s);
            let (a, b) = (x[2 * k], x[2 * k + 1]);
            y[2 * k] = d * a + b * o - self.u[2 * k] * off;
            y[2 * k + 1] = -a * o + d * b - self.u[2 * k + 1] * off;
        }
        let ggx = self.g[0] * xn[0] + self.g[1] * xn[1];
        for i in 0..2 {
            let mx = self.m[i][0] * xn[0] + self.m[i][1] * xn[1];
            y[k0 + i] = (mx * self.one_plus_qr + ggx * self.g[i] - self.un[i] * tw) / self.d;
        }
    }

    /// `R_B^H y`.
    pub fn apply_adjoint(&self, y: &[c64], x: &mut [c64]) {
        let mut tb = c64::new(0.0, 0.0);
        for (ui, yi) in self.u.iter().zip(y) {
            tb += ui.conj() * yi;
        }
        let k0 = 2 * self.pivot;
        let yn = [y[k0], y[k0 + 1]];
        let ta = self.un[0].conj() * yn[0] + self.un[1].conj() * yn[1];
        let dc = self.d.conj();
        let off = (ta + tb * self.delta) / dc;
        for (k, &l) in self.lambdas.iter().enumerate() {
            if k == self.pivot {
                continue;
            }
            let (d, o) = block(l, self.s);
            let d = d.conj();
            let (a, b) = (y[2 * k], y[2 * k + 1]);
            x[2 * k] = d * a - b * o - self.w[2 * k].conj() * off;
            x[2 * k + 1] = a * o + d * b - self.w[2 * k + 1].conj() * off;
        }
        let ggy = self.g[0] * yn[0] + self.g[1] * yn[1];
        let f = self.one_plus_qr.conj();
        for i in 0..2 {
            let mhy = self.m[0][i].conj() * yn[0] + self.m[1][i].conj() * yn[1];
            x[k0 + i] = (mhy * f + ggy * self.g[i] - self.wn[i].conj() * tb) / dc;
        }
    }

    /// `‖B*R_B‖`, the norm of the row `βᵀR_B = (w_n + δw′)ᵀ / D`.
    pub fn observation_norm(&self) -> f64 {
        let off: f64 = self.w.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.delta * self.delta;
        let on = self.wn[0].norm_sqr() + self.wn[1].norm_sqr();
        (on + off).sqrt() / self.d.norm()
    }

    /// `|B*R_B B| = |c + δq′| / |D|`.
    pub fn transfer_norm(&self) -> f64 {
        ((self.c + (self.one_plus_qr - 1.0) * self.delta) / self.d).norm()
    }

    pub fn norm(&self) -> f64 {
        let n = self.dim();
        let mut tmp = vec![c64::new(0.0, 0.0); n];
        lanczos_top(n, |x, y| {
            self.apply(x, &mut tmp);
            self.apply_adjoint(&tmp, y);
        })
        .sqrt()
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(a, b)` below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..a.len() {
        let off = if k == 0 { 0.0 } else { b[k - 1] * b[k - 1] };
        d = a[k] - x - if k == 0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a[k].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_top(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for k in 0..n {
        let r = if k > 0 { b[k - 1].abs() } else { 0.0 } + if k + 1 < n { b[k].abs() } else { 0.0 };
        hi = hi.max(a[k] + r);
        lo = lo.min(a[k] - r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator given by
/// its action, via Lanczos with full reorthogonalisation.
pub(crate) fn lanczos_top(n: usize, mut op: impl FnMut(&[c64], &mut [c64])) -> f64 {
    let mut basis: Vec<Vec<c64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_unit_complex(&mut sample_rng(0x1a2c_205), n);
    let mut w = vec![c64::new(0.0, 0.0); n];
    let mut theta = 0.0;
    let mut quiet = 0;
    for j in 0..n {
        op(&v, &mut w);
        let a: f64 = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum();
        alpha.push(a);
        basis.push(v.clone());
        for _ in 0..2 {
            for q in &basis {
                let c: c64 = q.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let next = tridiagonal_top(&alpha, &beta);
        let bn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let change = (next - theta).abs();
        theta = next;
        if bn <= 1e-14 * theta.max(f64::MIN_POSITIVE) {
            break;
        }
        if j >= 2 && change <= 1e-14 * theta {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        beta.push(bn);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / bn;
        }
    }
    theta
}

pub fn resolvent_norm_rankone(generator: &TruncatedGenerator, beta: &[f64], s: f64) -> Result<f64> {
    Ok(KatoResolvent::new(generator, beta, s)?.norm())
}

/// `(is − A_n + D_n)` for the block of mode `n` with diagonal damping `d`:
/// returns `(σ_max, |det|)`.
fn diag_block(l: f64, d: f64, s: f64) -> (f64, c64) {
    let d2 = d * d;
    let det = c64::new((l - s) * (l + s), s * d2);
    let fro = 2.0 * l * l + s * s + s * s + d2 * d2;
    let disc = (fro * fro - 4.0 * det.norm_sqr()).max(0.0).sqrt();
    ((0.5 * (fro + disc)).sqrt(), det)
}

pub fn resolvent_norm_block(generator: &TruncatedGenerator, d: &[f64], s: f64) -> Result<f64> {
    if d.len() != generator.modes() {
        return Err(Error::DimensionMismatch { expected: generator.modes(), got: d.len() });
    }
    let mut worst: f64 = 0.0;
    for (&l, &dk) in generator.lambdas.iter().zip(d) {
        let (smax, det) = diag_block(l, dk, s);
        if det.norm() <= 1e-14 * smax * smax {
            return Err(Error::SpectrumHit { s, sigma_min: det.norm() / smax, norm: smax });
        }
        worst = worst.max(smax / det.norm());
    }
    Ok(worst)
}

pub fn resolvent_norm(dg: &DampedGenerator, method: Method, s: f64) -> Result<f64> {
    match (method, &dg.damping) {
        (Method::Dense, _) => resolvent_norm_dense(dg, s),
        (Method::RankOne, DampingMatrix::RankOne { beta }) => resolvent_norm_rankone(&dg.generator, beta, s),
        (Method::BlockDiagonal, DampingMatrix::Diagonal { d }) => resolvent_norm_block(&dg.generator, d, s),
        (m, _) => Err(Error::Config(format!("method {m} does not apply to this damping"))),
    }
}

/// `(‖B*R_B(is)‖, ‖B*R_B(is)B‖)`.
pub fn damping_transfer(dg: &DampedGenerator, s: f64) -> Result<(f64, f64)> {
    match &dg.damping {
        DampingMatrix::RankOne { beta } => match KatoResolvent::new(&dg.generator, beta, s) {
            Ok(k) => Ok((k.observation_norm(), k.transfer_norm())),
            Err(Error::UndampedPole { .. }) => damping_transfer_dense(dg, s),
            Err(e) => Err(e),
        },
        DampingMatrix::Diagonal { d } => {
            let mut obs: f64 = 0.0;
            let mut tr: f64 = 0.0;
            for (&l, &dk) in dg.generator.lambdas.iter().zip(d) {
                let (_, det) = diag_block(l, dk, s);
                let m = det.norm();
                obs = obs.max(dk * (l * l + s * s).sqrt() / m);
                tr = tr.max(dk * dk * s.abs() / m);
            }
            Ok((obs, tr))
        }
    }
}

/// Same quantities through a dense LU solve.
pub fn damping_transfer_dense(dg: &DampedGenerator, s: f64) -> Result<(f64, f64)> {
    use faer::linalg::solvers::DenseSolveCore;
    let rb = shifted_matrix(dg, s).partial_piv_lu().inverse();
    let n = dg.dim();
    let bcols: Vec<Vec<f64>> = match &dg.damping {
        DampingMatrix::RankOne { beta } => vec![beta.clone()],
        DampingMatrix::Diagonal { d } => (0..d.len())
            .map(|k| {
                let mut c = vec![0.0; n];
                c[2 * k + 1] = d[k];
                c
            })
            .collect(),
    };
    let r = bcols.len();
    let bstar_rb = Mat::from_fn(r, n, |i, j| (0..n).map(|k| rb[(k, j)] * bcols[i][k]).sum::<c64>());
    let transfer = Mat::from_fn(r, r, |i, j| (0..n).map(|k| bstar_rb[(i, k)] * bcols[j][k]).sum::<c64>());
    Ok((
        crate::linalg::spectral_norm_c(bstar_rb.as_ref())?,
        crate::linalg::spectral_norm_c(transfer.as_ref())?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventScan {
    pub s: Vec<f64>,
    pub norms: Vec<f64>,
    pub methods: Vec<Method>,
    pub truncation: usize,
}

impl ResolventScan {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn argmax(&self) -> Option<usize> {
        (0..self.norms.len()).max_by(|&a, &b| self.norms[a].total_cmp(&self.norms[b]))
    }
}

/// `{λ_n} ∪ {midpoints} ∪ refinements`, sorted and deduplicated.
pub fn default_grid(lambdas: &[f64], refinements: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = lambdas.to_vec();
    g.extend(lambdas.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    g.extend_from_slice(refinements);
    g.retain(|v| v.is_finite());
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Evaluates the resolvent norm on every grid point. With `dense_at_poles`,
/// points on undamped frequencies fall back to the dense path.
pub fn scan(dg: &DampedGenerator, method: Method, grid: &[f64], dense_at_poles: bool) -> Result<ResolventScan> {
    let rows: Vec<Result<(f64, Method)>> = grid
        .par_iter()
        .map(|&s| match resolvent_norm(dg, method, s) {
            Err(Error::UndampedPole { .. }) if dense_at_poles => Ok((resolvent_norm_dense(dg, s)?, Method::Dense)),
            other => other.map(|v| (v, method)),
        })
        .collect();
    let mut out = ResolventScan { s: Vec::new(), norms: Vec::new(), methods: Vec::new(), truncation: dg.modes() };
    for (s, r) in grid.iter().zip(rows) {
        let (v, m) = r?;
        out.s.push(*s);
        out.norms.push(v);
        out.methods.push(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub points: usize,
    /// max over the scan of `‖B*R_B‖ / norm^{1/2}`
    pub worst_observation_ratio: f64,
    /// max over the scan of `‖B*R_B B‖`
    pub worst_transfer: f64,
    pub pass: bool,
}

/// Checks `‖B*R_B‖ ≤ (1+1e−6)‖R_B‖^{1/2}` and `‖B*R_B B‖ ≤ 1+1e−10` on a scan.
pub fn transfer_bounds(dg: &DampedGenerator, sc: &ResolventScan) -> Result<TransferReport> {
    let vals: Vec<Result<(f64, f64)>> = sc.s.par_iter().map(|&s| damping_transfer(dg, s)).collect();
    let mut obs: f64 = 0.0;
    let mut tr: f64 = 0.0;
    for (v, norm) in vals.into_iter().zip(&sc.norms) {
        let (o, t) = v?;
        obs = obs.max(o / norm.sqrt());
        tr = tr.max(t);
    }
    Ok(TransferReport {
        points: sc.len(),
        worst_observation_ratio: obs,
        worst_transfer: tr,
        pass: obs <= 1.0 + 1e-6 && tr <= 1.0 + 1e-10,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSeries {
    pub n: Vec<usize>,
    pub s: Vec<f64>,
    pub peak: Vec<f64>,
    pub method: Method,
    pub truncation: usize,
}

impl PeakSeries {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// Entries whose peak exceeds every earlier peak.
    pub fn upper_envelope(&self) -> PeakSeries {
        let mut out = PeakSeries { n: vec![], s: vec![], peak: vec![], method: self.method, truncation: self.truncation };
        let mut best = f64::NEG_INFINITY;
        for k in 0..self.len() {
            if self.peak[k] > best {
                best = self.peak[k];
                out.n.push(self.n[k]);
                out.s.push(self.s[k]);
                out.peak.push(self.peak[k]);
            }
        }
        out
    }

    pub fn restrict(&self, lo: usize, hi: usize) -> PeakSeries {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.n[k] >= lo && self.n[k] <= hi).collect();
        PeakSeries {
            n: keep.iter().map(|&k| self.n[k]).collect(),
            s: keep.iter().map(|&k| self.s[k]).collect(),
            peak: keep.iter().map(|&k| self.peak[k]).collect(),
            method: self.method,
            truncation: self.truncation,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of the resolvent norm on `[λ_n − g/4, λ_n + g/4]`,
/// `g` the distance to the nearest neighbouring frequency.
pub fn locate_peak(dg: &DampedGenerator, method: Method, n: usize) -> Result<(f64, f64)> {
    let l = &dg.generator.lambdas;
    if n == 0 || n > l.len() {
        return Err(Error::Domain(format!("mode {n} outside 1..={}", l.len())));
    }
    let couplings = dg.damping.velocity_couplings();
    if couplings[n - 1] == 0.0 {
        return Err(Error::UndampedMode { n });
    }
    let k = n - 1;
    let left = if k > 0 { l[k] - l[k - 1] } else { f64::INFINITY };
    let right = if k + 1 < l.len() { l[k + 1] - l[k] } else { f64::INFINITY };
    let gap = left.min(right).min(l[k]);
    let eval = |s: f64| resolvent_norm(dg, method, s);
    let (mut a, mut b) = (l[k] - 0.25 * gap, l[k] + 0.25 * gap);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let tol = 4.0 * f64::EPSILON * l[k];
    let mut iter = 0;
    while b - a > tol && iter < 400 {
        iter += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Peaks for modes `lo..=hi`, which must sit inside the window `n ≤ N/2`.
pub fn peak_series(dg: &DampedGenerator, method: Method, lo: usize, hi: usize) -> Result<PeakSeries> {
    let limit = dg.modes() / 2;
    if lo == 0 || hi < lo || hi > limit {
        return Err(Error::ValidityWindow { lo, hi, limit });
    }
    let peaks: Vec<Result<(f64, f64)>> = (lo..=hi).into_par_iter().map(|n| locate_peak(dg, method, n)).collect();
    let mut out = PeakSeries { n: vec![], s: vec![], peak: vec![], method, truncation: dg.modes() };
    for (n, p) in (lo..=hi).zip(peaks) {
        let (s, v) = p?;
        out.n.push(n);
        out.s.push(s);
        out.peak.push(v);
    }
    Ok(out)
}

/// Slope of `log(peak)` against `log(s)`.
pub fn fit_growth_exponent(ps: &PeakSeries) -> Result<SlopeFit> {
    if ps.len() < 5 {
        return Err(Error::TooFewPoints { what: "peak series", got: ps.len(), required: 5 });
    }
    fit_loglog(&ps.s, &ps.peak, 5)
}

/// Largest relative change of the peaks `lo..=hi` when the truncation doubles.
pub fn doubling_change(spec: &SystemSpec, method: Method, lo: usize, hi: usize) -> Result<f64> {
    let a = peak_series(&assemble_system(&build_modal_system(spec)?)?, method, lo, hi)?;
    let wide = spec.with_truncation(2 * spec.truncation);
    let b = peak_series(&assemble_system(&build_modal_system(&wide)?)?, method, lo, hi)?;
    Ok(a.peak.iter().zip(&b.peak).map(|(x, y)| (x - y).abs() / y).fold(0.0, f64::max))
}
