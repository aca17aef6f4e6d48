//! Dense helpers on top of faer: spectral norms and the matrix exponential.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

pub fn spectral_norm(m: MatRef<'_, f64>) -> Result<f64> {
    let sv = m.singular_values().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

pub fn spectral_norm_c(m: MatRef<'_, c64>) -> Result<f64> {
    let sv = m.singular_values().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

/// Largest and smallest singular values.
pub fn extreme_singular_values_c(m: MatRef<'_, c64>) -> Result<(f64, f64)> {
    let sv = m.singular_values().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) => Ok((hi, lo)),
        _ => Err(Error::Numerical("empty matrix".into())),
    }
}

pub fn one_norm(m: MatRef<'_, f64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn frobenius_c(m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

fn comb(terms: &[(f64, &Mat<f64>)], identity: f64) -> Mat<f64> {
    let n = terms[0].1.nrows();
    Mat::from_fn(n, n, |i, j| {
        let mut v = if i == j { identity } else { 0.0 };
        for (c, m) in terms {
            v += c * m[(i, j)];
        }
        v
    })
}

/// `e^{tA}` by degree-13 Padé approximation with scaling and squaring.
pub fn expm(a: MatRef<'_, f64>, t: f64) -> Result<Mat<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    let norm = one_norm(a) * t.abs();
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = t / 2f64.powi(squarings);
    let a1 = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let inner_u = &a6 * comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
    let u = &a1 * comb(&[(1.0, &inner_u), (b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1]);
    let inner_v = &a6 * comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
    let v = comb(&[(1.0, &inner_v), (b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0]);
    let p = comb(&[(1.0, &v), (1.0, &u)], 0.0);
    let q = comb(&[(1.0, &v), (-1.0, &u)], 0.0);
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.col_iter().any(|c| c.iter().any(|x| !x.is_finite())) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_exponential() {
        let w = 3.7;
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => w,
            (1, 0) => -w,
            _ => 0.0,
        });
        for &t in &[0.0, 0.1, 1.0, 17.3, 250.0] {
            let e = expm(a.as_ref(), t).unwrap();
            let (c, s) = ((w * t).cos(), (w * t).sin());
            assert!((e[(0, 0)] - c).abs() < 1e-11, "t={t}");
            assert!((e[(0, 1)] - s).abs() < 1e-11);
            assert!((e[(1, 0)] + s).abs() < 1e-11);
        }
    }

    #[test]
    fn damped_scalar_block() {
        // [[-1, 1], [0, -1]] has exponential e^{-t}[[1, t], [0, 1]]
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => -1.0,
            (0, 1) => 1.0,
            _ => 0.0,
        });
        let t = 3.0;
        let e = expm(a.as_ref(), t).unwrap();
        let d = (-t).exp();
        assert!((e[(0, 0)] - d).abs() < 1e-14);
        assert!((e[(0, 1)] - t * d).abs() < 1e-14);
        assert!(e[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn norms() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { [3.0, -4.0][i] } else { 0.0 });
        assert!((spectral_norm(m.as_ref()).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(one_norm(m.as_ref()), 4.0);
    }
}
