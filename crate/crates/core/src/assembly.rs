//! First-order generator and damping in orthonormal modal coordinates.
//!
//! Mode `n` occupies slots `2(n-1)` (position, `(φ_n/λ_n, 0)`) and
//! `2(n-1)+1` (velocity, `(0, φ_n)`). In this basis the energy norm is the
//! Euclidean norm of the coefficient vector.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::modal::{DampingKind, ModalSystem};
use crate::sampling::{random_unit_complex, sample_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedGenerator {
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DampingMatrix {
    /// `BB* = ββᵀ`, with `β` of length `2N`.
    RankOne { beta: Vec<f64> },
    /// `BB* = diag(0, d_1², 0, d_2², ...)`, with `d` of length `N`.
    Diagonal { d: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct DampedGenerator {
    pub generator: TruncatedGenerator,
    pub damping: DampingMatrix,
    pub matrix: Mat<f64>,
}

impl TruncatedGenerator {
    pub fn modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.lambdas.len()
    }

    pub fn matrix(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.dim(), self.dim());
        for (k, &l) in self.lambdas.iter().enumerate() {
            m[(2 * k, 2 * k + 1)] = l;
            m[(2 * k + 1, 2 * k)] = -l;
        }
        m
    }

    /// `(is − A)x`, block by block.
    pub fn shifted_apply(&self, s: f64, x: &[c64]) -> Vec<c64> {
        let i = c64::new(0.0, 1.0);
        let mut y = vec![c64::new(0.0, 0.0); x.len()];
        for (k, &l) in self.lambdas.iter().enumerate() {
            let (a, v) = (x[2 * k], x[2 * k + 1]);
            y[2 * k] = i * s * a - l * v;
            y[2 * k + 1] = l * a + i * s * v;
        }
        y
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); x.len()];
        for (k, &l) in self.lambdas.iter().enumerate() {
            y[2 * k] = x[2 * k + 1] * l;
            y[2 * k + 1] = -x[2 * k] * l;
        }
        y
    }
}

impl DampingMatrix {
    pub fn dim(&self) -> usize {
        match self {
            DampingMatrix::RankOne { beta } => beta.len(),
            DampingMatrix::Diagonal { d } => 2 * d.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DampingMatrix::RankOne { beta } => beta.iter().all(|&b| b == 0.0),
            DampingMatrix::Diagonal { d } => d.iter().all(|&b| b == 0.0),
        }
    }

    /// The vector `B*x` (length 1 for rank-one damping, `N` for diagonal).
    pub fn observe(&self, x: &[c64]) -> Vec<c64> {
        match self {
            DampingMatrix::RankOne { beta } => {
                vec![beta.iter().zip(x).map(|(&b, &z)| z * b).sum()]
            }
            DampingMatrix::Diagonal { d } => d.iter().enumerate().map(|(k, &dk)| x[2 * k + 1] * dk).collect(),
        }
    }

    pub fn observe_norm_sq(&self, x: &[c64]) -> f64 {
        self.observe(x).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn bbt(&self) -> Mat<f64> {
        let n = self.dim();
        match self {
            DampingMatrix::RankOne { beta } => Mat::from_fn(n, n, |i, j| beta[i] * beta[j]),
            DampingMatrix::Diagonal { d } => {
                Mat::from_fn(n, n, |i, j| if i == j && i % 2 == 1 { d[i / 2] * d[i / 2] } else { 0.0 })
            }
        }
    }

    /// Per-mode velocity couplings.
    pub fn velocity_couplings(&self) -> Vec<f64> {
        match self {
            DampingMatrix::RankOne { beta } => beta.iter().skip(1).step_by(2).copied().collect(),
            DampingMatrix::Diagonal { d } => d.clone(),
        }
    }

    pub fn scaled(&self, kappa: f64) -> Self {
        let r = kappa.sqrt();
        match self {
            DampingMatrix::RankOne { beta } => DampingMatrix::RankOne { beta: beta.iter().map(|b| b * r).collect() },
            DampingMatrix::Diagonal { d } => DampingMatrix::Diagonal { d: d.iter().map(|b| b * r).collect() },
        }
    }
}

pub fn assemble_generator(ms: &ModalSystem) -> TruncatedGenerator {
    TruncatedGenerator { lambdas: ms.frequencies() }
}

pub fn assemble_damping(ms: &ModalSystem) -> DampingMatrix {
    match ms.damping_kind {
        DampingKind::RankOne => {
            let mut beta = vec![0.0; ms.dim()];
            for (k, m) in ms.modes.iter().enumerate() {
                beta[2 * k + 1] = m.coupling;
            }
            DampingMatrix::RankOne { beta }
        }
        DampingKind::Diagonal => DampingMatrix::Diagonal { d: ms.couplings() },
    }
}

pub fn assemble_damped(generator: &TruncatedGenerator, damping: &DampingMatrix) -> Result<DampedGenerator> {
    if generator.dim() != damping.dim() {
        return Err(Error::DimensionMismatch { expected: generator.dim(), got: damping.dim() });
    }
    let mut matrix = generator.matrix();
    let bbt = damping.bbt();
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            matrix[(i, j)] -= bbt[(i, j)];
        }
    }
    let dg = DampedGenerator { generator: generator.clone(), damping: damping.clone(), matrix };
    let mut rng = sample_rng(0x5eed_0d15);
    for _ in 0..16 {
        let x = random_unit_complex(&mut rng, dg.dim());
        let defect = dg.dissipation_defect(&x);
        if defect > 1e-12 {
            return Err(Error::Numerical(format!("dissipation identity violated by {defect:e}")));
        }
    }
    Ok(dg)
}

/// Shortcut for `assemble_damped(assemble_generator(ms), assemble_damping(ms))`.
pub fn assemble_system(ms: &ModalSystem) -> Result<DampedGenerator> {
    assemble_damped(&assemble_generator(ms), &assemble_damping(ms))
}

impl DampedGenerator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn modes(&self) -> usize {
        self.generator.modes()
    }

    /// `Re⟨Mx, x⟩`, read off the symmetric part of the assembled matrix.
    pub fn real_quadratic_form(&self, x: &[c64]) -> f64 {
        let m = &self.matrix;
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                let sym = 0.5 * (m[(i, j)] + m[(j, i)]);
                if sym != 0.0 {
                    acc += sym * (x[i].conj() * x[j]).re;
                }
            }
        }
        acc
    }

    /// `|Re⟨(A − BB*)x, x⟩ + ‖B*x‖²| / ‖x‖²`.
    pub fn dissipation_defect(&self, x: &[c64]) -> f64 {
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if nx == 0.0 {
            return 0.0;
        }
        (self.real_quadratic_form(x) + self.damping.observe_norm_sq(x)).abs() / nx
    }

    /// Column-major entries, for dumps.
    pub fn column_major(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).map(|(i, j)| self.matrix[(i, j)]).collect()
    }
}
