//! Linear-reference (Airy) sectors for the long-range leg.
//!
//! Each sector is diagonalised at its midpoint; in that local basis every
//! channel sees `w(x) = lambda + s (x - c)` and is propagated exactly with
//! Airy functions. The residual coupling enters through Simpson end
//! corrections. Airy evaluations are done in `f64`.

use nalgebra::DMatrix;

use super::mld::{constant_reference, half_step};
use crate::airy::airy_scaled;
use crate::linalg::Singular;
use crate::num::{lit, Real};

/// Below this `|alpha| h` the linear term is negligible and a constant
/// reference is used instead (Airy arguments would lose precision).
const MIN_ALPHA_H: f64 = 1e-4;

/// `(y1, y2 = y3, y4)` of `psi'' = (lambda + s (x - c)) psi` over `[c - h/2, c + h/2]`.
pub(crate) fn linear_reference(lambda: f64, s: f64, h: f64) -> (f64, f64, f64) {
    let alpha = s.cbrt();
    if (alpha * h).abs() < MIN_ALPHA_H {
        let (a, b) = constant_reference(lambda, h);
        return (a, b, a);
    }
    let shift = lambda / (alpha * alpha);
    let za = -alpha * h * 0.5 + shift;
    let zb = alpha * h * 0.5 + shift;
    let a = airy_scaled(za);
    let b = airy_scaled(zb);
    // Ai = ai e^-zeta, Bi = bi e^zeta; factor out e^|zeta_b - zeta_a|.
    let d = b.zeta - a.zeta;
    let m = d.abs();
    let fa = (d - m).exp();
    let fb = (-d - m).exp();
    let den = a.ai * b.bi * fa - b.ai * a.bi * fb;
    let y1 = -alpha * (a.aip * b.bi * fa - b.ai * a.bip * fb) / den;
    let y4 = alpha * (a.ai * b.bip * fa - b.aip * a.bi * fb) / den;
    let y2 = alpha * (-m).exp() / (std::f64::consts::PI * den);
    (y1, y2, y4)
}

/// One linear-reference sector of width `h`. `Y` is in the channel basis
/// on entry and exit.
pub(crate) fn sector<T: Real>(
    y: &mut DMatrix<T>,
    wa: &DMatrix<T>,
    wc: &DMatrix<T>,
    wb: &DMatrix<T>,
    h: T,
    end_corrections: bool,
) -> Result<usize, Singular> {
    let n = y.nrows();
    let eig = wc.clone().symmetric_eigen();
    let t = eig.eigenvectors;
    let tt = t.transpose();
    let la = &tt * wa * &t;
    let lb = &tt * wb * &t;
    let hf = h.as_f64();

    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    let mut y4 = Vec::with_capacity(n);
    // Diagonal of the reference at the two ends.
    let mut ref_a = Vec::with_capacity(n);
    let mut ref_b = Vec::with_capacity(n);
    for j in 0..n {
        let lambda = eig.eigenvalues[j];
        let s = (lb[(j, j)] - la[(j, j)]) / h;
        let (a, b, c) = linear_reference(lambda.as_f64(), s.as_f64(), hf);
        // b underflows to 0 across wide closed sectors; that only decouples the ends
        if !a.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(Singular);
        }
        y1.push(lit::<T>(a));
        y2.push(lit::<T>(b));
        y4.push(lit::<T>(c));
        let linear = (s.as_f64().cbrt() * hf).abs() >= MIN_ALPHA_H;
        let half = if linear { s * h / lit(2.0) } else { T::zero() };
        ref_a.push(lambda - half);
        ref_b.push(lambda + half);
    }

    let mut yl = &tt * &*y * &t;
    let w = h / lit(6.0);
    if end_corrections {
        for j in 0..n {
            for i in 0..n {
                let r = if i == j { la[(i, i)] - ref_a[i] } else { la[(i, j)] };
                yl[(i, j)] += w * r;
            }
        }
    }
    let nodes = half_step(&mut yl, &y1, &y2, &y2, &y4)?;
    if end_corrections {
        for j in 0..n {
            for i in 0..n {
                let r = if i == j { lb[(i, i)] - ref_b[i] } else { lb[(i, j)] };
                yl[(i, j)] += w * r;
            }
        }
    }
    *y = &t * yl * &tt;
    Ok(nodes)
}
