//! Modified log-derivative sectors with a constant diagonal reference.

use nalgebra::DMatrix;

use crate::linalg::{Singular, SymmetricFactor};
use crate::num::{lit, Real};

/// Largest reference phase `k h` allowed in one half-sector for an open
/// channel. Keeps the node count formula valid (it needs `k h < pi`).
pub(crate) const MAX_HALF_PHASE: f64 = 1.0;

/// Half-sector propagator elements `(y1 = y4, y2 = y3)` of the constant
/// reference `psi'' = p2 psi` over width `h`.
pub(crate) fn constant_reference<T: Real>(p2: T, h: T) -> (T, T) {
    let u = p2 * h * h;
    let (xcoth, xcsch) = if u.abs() < lit(1e-3) {
        let u2 = u * u;
        (
            T::one() + u / lit(3.0) - u2 / lit(45.0) + u2 * u * lit(2.0 / 945.0),
            T::one() - u / lit(6.0) + u2 * lit(7.0 / 360.0) - u2 * u * lit(31.0 / 15120.0),
        )
    } else if u > T::zero() {
        let x = u.sqrt();
        // e = exp(-2x); coth = (1 + e)/(1 - e), csch = 2 sqrt(e)/(1 - e)
        let one_minus = -(-(x + x)).exp_m1();
        let e = T::one() - one_minus;
        (x * (T::one() + e) / one_minus, x * lit::<T>(2.0) * (-x).exp() / one_minus)
    } else {
        let x = (-u).sqrt();
        let (s, c) = x.sin_cos();
        (x * c / s, x / s)
    };
    (xcoth / h, xcsch / h)
}

/// `Y <- y4 - y3 (Y + y1)^-1 y2` for diagonal reference elements.
/// Returns the number of nodes of the solution inside the half-sector.
pub(crate) fn half_step<T: Real>(y: &mut DMatrix<T>, y1: &[T], y2: &[T], y3: &[T], y4: &[T]) -> Result<usize, Singular> {
    let n = y.nrows();
    for i in 0..n {
        y[(i, i)] += y1[i];
    }
    let f = SymmetricFactor::new(y)?;
    let inv = f.inverse();
    for j in 0..n {
        for i in 0..n {
            y[(i, j)] = -y3[i] * inv[(i, j)] * y2[j];
        }
        y[(j, j)] += y4[j];
    }
    Ok(f.negative_count())
}

/// Largest open-channel reference phase over a half-width `h`.
pub(crate) fn open_phase<T: Real>(wc: &DMatrix<T>, h: T) -> T {
    let mut worst = T::zero();
    for i in 0..wc.nrows() {
        if wc[(i, i)] < T::zero() {
            worst = worst.max((-wc[(i, i)]).sqrt() * h);
        }
    }
    worst
}

/// One sector of width `2h` with the coupling evaluated at its start,
/// midpoint and end. The reference is the diagonal of `wc`.
pub(crate) fn sector<T: Real>(
    y: &mut DMatrix<T>,
    wa: &DMatrix<T>,
    wc: &DMatrix<T>,
    wb: &DMatrix<T>,
    h: T,
) -> Result<usize, Singular> {
    let n = y.nrows();
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = constant_reference(wc[(i, i)], h);
        y1.push(a);
        y2.push(b);
    }
    let third = h / lit(3.0);
    for j in 0..n {
        for i in 0..n {
            let r = if i == j { wa[(i, i)] - wc[(i, i)] } else { wa[(i, j)] };
            y[(i, j)] += third * r;
        }
    }
    let mut nodes = half_step(y, &y1, &y2, &y2, &y1)?;

    // Midpoint: (4h/3) (I - h^2 U / 6)^-1 U with U = wc - diag(wc).
    let mut u = wc.clone();
    let mut off = false;
    for i in 0..n {
        u[(i, i)] = T::zero();
        for j in 0..i {
            off |= u[(i, j)] != T::zero();
        }
    }
    if off {
        let a = h * h / lit(6.0);
        let mut m = -&u * a;
        for i in 0..n {
            m[(i, i)] += T::one();
        }
        let q = SymmetricFactor::new(&m)?.inverse() * &u;
        let w = h * lit(4.0 / 3.0);
        for j in 0..n {
            for i in 0..n {
                y[(i, j)] += w * q[(i, j)];
            }
        }
    }
    nodes += half_step(y, &y1, &y2, &y2, &y1)?;

    for j in 0..n {
        for i in 0..n {
            let r = if i == j { wb[(i, i)] - wc[(i, i)] } else { wb[(i, j)] };
            y[(i, j)] += third * r;
        }
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_series_joins_closed_forms() {
        for p2 in [0.999e-3, -0.999e-3, 1.001e-3, -1.001e-3] {
            let (a, b) = constant_reference(p2, 1.0f64);
            let x = p2.abs().sqrt();
            let (ea, eb) = if p2 > 0.0 { (x / x.tanh(), x / x.sinh()) } else { (x / x.tan(), x / x.sin()) };
            assert!((a - ea).abs() < 1e-14 && (b - eb).abs() < 1e-14, "{p2}");
        }
    }

    #[test]
    fn large_closed_phase_stays_finite() {
        let (a, b) = constant_reference(1e8f64, 1.0);
        assert!((a - 1e4).abs() < 1e-9);
        assert_eq!(b, 0.0);
    }
}
