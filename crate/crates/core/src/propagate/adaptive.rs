//! Step-doubling error control around modified log-derivative sectors.

use nalgebra::DMatrix;

use super::Coupling;
use crate::error::Result;
use crate::num::{lit, Real};
use crate::potential::RadialProblem;

/// March `y` from `x0` to `x1` with step width `H` chosen so that one
/// sector of width `H` and two of width `H/2` agree to `tol` (relative to
/// `|Y| + 1/H`). Returns `(nodes, sectors)`; the fine result is kept.
pub(crate) fn leg<T: Real, P: RadialProblem<T> + ?Sized>(
    y: &mut DMatrix<T>,
    x0: T,
    x1: T,
    h0: T,
    tol: T,
    coupling: &Coupling<'_, T, P>,
    max_steps: usize,
) -> Result<(usize, usize)> {
    let mut x = x0;
    let mut step = h0.min(x1 - x0);
    let min_step = (x1 - x0) * lit(1e-12);
    let mut nodes = 0;
    let mut steps = 0;
    let mut w0 = coupling.eval(x);
    let quarter: T = lit(0.25);
    while x < x1 {
        if steps >= max_steps {
            return Err(coupling.failure(x, "step count limit reached"));
        }
        let last = x + step >= x1;
        if last {
            step = x1 - x;
        }
        let w1 = coupling.eval(x + step * quarter);
        let w2 = coupling.eval(x + step * lit(0.5));
        let w3 = coupling.eval(x + step * lit(0.75));
        let xe = if last { x1 } else { x + step };
        let w4 = coupling.eval(xe);

        let mut coarse = y.clone();
        let nc = coupling.sector(&mut coarse, x, &w0, &w2, &w4, step * lit(0.5))?;
        let mut fine = y.clone();
        let mut nf = coupling.sector(&mut fine, x, &w0, &w1, &w2, step * quarter)?;
        nf += coupling.sector(&mut fine, x + step * lit(0.5), &w2, &w3, &w4, step * quarter)?;
        steps += 3;

        let scale = fine.norm() + T::one() / step;
        let err = (&fine - &coarse).norm() / scale;
        let ok = err <= tol && nc == nf;
        if ok || step <= min_step {
            *y = fine;
            nodes += nf;
            x = xe;
            w0 = w4;
        }
        let factor = if err > T::zero() {
            (lit::<T>(0.9) * (tol / err).powf(lit(0.2))).min(lit(2.0)).max(lit(0.2))
        } else {
            lit(2.0)
        };
        step = if ok { step * factor } else { step * factor.min(lit(0.5)) };
    }
    Ok((nodes, steps))
}
