//! Finite-difference witnesses for the gradient and Hessian of `h_S^k`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::polynomials::{h_gradient, h_value};
use crate::error::{Error, Result};
use crate::matroid::{ElementSet, FractionalPoint};

/// Default central-difference step for gradients.
pub const GRADIENT_STEP: f64 = 1e-5;

/// Default central-difference step for Hessian entries.
pub const HESSIAN_STEP: f64 = 1e-3;

/// Closed-form gradient of `h_S^k` next to its central-difference estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_abs_diff: f64,
    pub step: f64,
}

/// Compares [`h_gradient`] with central differences of [`h_value`].
/// Coordinates are moved by `±step`, so `x` should sit at least `step`
/// inside the cube.
pub fn check_h_gradient(
    x: &FractionalPoint,
    s: &ElementSet,
    k: usize,
    step: f64,
) -> Result<GradientReport> {
    if step <= 0.0 {
        return Err(Error::Parameter(format!(
            "step must be positive, got {step}"
        )));
    }
    let analytic = h_gradient(x, s, k)?;
    let mut numeric = Vec::with_capacity(s.len());
    for i in s.iter() {
        let up = x.with_coord(i, x.get(i) + step)?;
        let down = x.with_coord(i, x.get(i) - step)?;
        numeric.push((h_value(&up, s, k)? - h_value(&down, s, k)?) / (2.0 * step));
    }
    let max_abs_diff = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(GradientReport {
        analytic,
        numeric,
        max_abs_diff,
        step,
    })
}

/// Central-difference Hessian of `f` at `x`.
pub fn finite_difference_hessian<F>(f: F, x: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = x.len();
    let mut probe = x.to_vec();
    let mut eval = |moves: &[(usize, f64)]| {
        for &(i, delta) in moves {
            probe[i] += delta;
        }
        let v = f(&probe);
        for &(i, delta) in moves {
            probe[i] -= delta;
        }
        v
    };
    let centre = eval(&[]);
    let h2 = step * step;
    let mut hessian = DMatrix::zeros(d, d);
    for i in 0..d {
        hessian[(i, i)] = (eval(&[(i, step)]) - 2.0 * centre + eval(&[(i, -step)])) / h2;
        for j in 0..i {
            let v = (eval(&[(i, step), (j, step)])
                - eval(&[(i, step), (j, -step)])
                - eval(&[(i, -step), (j, step)])
                + eval(&[(i, -step), (j, -step)]))
                / (4.0 * h2);
            hessian[(i, j)] = v;
            hessian[(j, i)] = v;
        }
    }
    hessian
}

/// Finite-difference Hessian of `h_S^k` with `|S| = n - 1` at
/// `(k/n, .., k/n)`.
pub fn h_hessian_numeric(k: usize, n: usize, step: f64) -> Result<DMatrix<f64>> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "Hessian needs n >= 2 and 1 <= k <= n-1 (got k={k}, n={n})"
        )));
    }
    let p = k as f64 / n as f64;
    if !(step > 0.0 && step < p.min(1.0 - p)) {
        return Err(Error::Parameter(format!(
            "step {step} must be positive and keep probes inside the cube"
        )));
    }
    let centre = vec![p; n - 1];
    let s = FractionalPoint::new(centre.clone())?.ground().full();
    let f = |probe: &[f64]| {
        let x = FractionalPoint::new(probe.to_vec()).expect("probe inside the cube");
        h_value(&x, &s, k).expect("size checked")
    };
    Ok(finite_difference_hessian(f, &centre, step))
}

/// Eigenvalues of a symmetric matrix in increasing order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}
