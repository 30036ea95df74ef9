//! Log-derivative propagation of the coupled radial equations
//! `psi'' = 2M (V(R) - E) psi` with Johnson node counting.
//!
//! The outward leg runs from the wall at `r_min` to `r_match` with fixed
//! steps. The inward leg starts from the decaying semiclassical solution
//! at `r_max`, crosses the long-range region with variable steps down to
//! `r_mid` and continues with fixed steps to `r_match`. Inward
//! propagation is done in the mirror coordinate `x = -R`, where the
//! log-derivative is `-Y`.

mod adaptive;
mod airy;
mod mld;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetrize, Singular, SymmetricFactor};
use crate::num::{lit, Real};
use crate::potential::{InteractionModel, RadialProblem, Variant};

/// Log-derivative value used for `psi(r_min) = 0`.
pub const WALL_LOG_DERIVATIVE: f64 = 1e20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Outward,
    Inward,
}

/// Propagator for the variable-step long-range part of the inward leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LongRangeMethod {
    /// Linear reference potential solved with Airy functions.
    Airy,
    /// Modified log-derivative sectors under step-doubling error control.
    StepDoubling { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivativeState<T: Real> {
    /// `psi' psi^-1`, in the radial coordinate (not mirrored).
    pub y: DMatrix<T>,
    pub r: T,
    pub direction: Direction,
    /// Nodes of the solution crossed on this leg.
    pub nodes: usize,
    /// Largest asymmetry removed from `Y` along the way.
    pub asymmetry: T,
    pub sectors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationGrid<T: Real> {
    pub r_min: T,
    pub r_match: T,
    pub r_mid: T,
    pub r_max: T,
    /// Fixed step of the short-range legs.
    pub dr: T,
    pub long_range: LongRangeMethod,
    /// Geometric growth of the long-range step.
    pub growth: T,
    /// Cap on the open-channel WKB phase `h k` per long-range step.
    pub max_phase: T,
    /// Cap on `h / R` per long-range step (curvature of closed channels).
    pub max_relative_step: T,
    pub max_sectors: usize,
}

impl<T: Real> PropagationGrid<T> {
    pub fn new(r_min: T, r_match: T, r_mid: T, r_max: T, dr: T) -> Result<Self> {
        let g = PropagationGrid {
            r_min,
            r_match,
            r_mid,
            r_max,
            dr,
            long_range: LongRangeMethod::Airy,
            growth: lit(1.1),
            max_phase: lit(0.1),
            max_relative_step: lit(0.02),
            max_sectors: 50_000_000,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = self.r_min < self.r_match && self.r_match < self.r_mid && self.r_mid < self.r_max;
        if !(self.r_min >= T::zero()) || !ordered {
            return Err(invalid(format!(
                "grid must satisfy 0 <= r_min < r_match < r_mid < r_max, got {} {} {} {}",
                self.r_min.as_f64(),
                self.r_match.as_f64(),
                self.r_mid.as_f64(),
                self.r_max.as_f64()
            )));
        }
        if !(self.dr > T::zero()) || !(self.growth >= T::one()) || !(self.max_phase > T::zero()) || !(self.max_relative_step > T::zero()) {
            return Err(invalid("dr, growth and the step caps must be positive (growth >= 1)"));
        }
        Ok(())
    }

    /// Defaults for a model: reduced hard wall uses `r_match = r_min +
    /// 1e-3`, `r_mid = 0.2`, `r_max = 3`, `dr = 1e-5`. The Lennard-Jones
    /// variant uses the dipole length (or `R6` without dipoles) as the
    /// length unit, `r_match = 8 a0` and a step that also resolves the well.
    pub fn for_model(model: &InteractionModel<T>) -> Result<Self> {
        match *model.variant() {
            Variant::HardWallDipole { r_min } => {
                let dr = lit::<T>(1e-5);
                let r_match = r_min + lit(1e-3);
                let r_mid = lit::<T>(0.2).max(r_match + dr * lit(10.0));
                let r_max = lit::<T>(3.0).max(r_mid * lit(3.0));
                Self::new(r_min, r_match, r_mid, r_max, dr)
            }
            Variant::LennardJonesDipole { c6, c12, dipole_product, mass, r_min } => {
                let r_dip = mass * dipole_product.abs();
                let r6 = (lit::<T>(2.0) * mass * c6).sqrt().sqrt();
                let length = if r_dip > T::zero() { r_dip } else { r6 };
                let depth = c6 * c6 / (lit::<T>(4.0) * c12);
                let r_e = (lit::<T>(2.0) * c12 / c6).powf(lit(1.0 / 6.0));
                let k_well = (lit::<T>(2.0) * mass * depth).sqrt();
                let dr = (length * lit(1e-5)).min(lit::<T>(0.05) / k_well);
                let mut r_match = lit::<T>(8.0);
                if !(r_match > r_min + dr * lit(10.0)) {
                    r_match = r_min.max(r_e) + dr * lit(10.0);
                }
                let r_mid = (length * lit(0.2))
                    .min(r_e * lit(5.0))
                    .max(r_match + dr * lit(10.0));
                let r_max = (length * lit(3.0)).max(r_mid * lit(3.0));
                Self::new(r_min, r_match, r_mid, r_max, dr)
            }
        }
    }

    pub fn with_long_range(mut self, m: LongRangeMethod) -> Self {
        self.long_range = m;
        self
    }

    pub fn with_r_max(mut self, r_max: T) -> Self {
        self.r_max = r_max;
        self
    }

    /// Enlarges `r_max` geometrically until `energy` lies below every
    /// adiabat there.
    pub fn closed_at<P: RadialProblem<T> + ?Sized>(&self, problem: &P, energy: T) -> Result<Self> {
        let mut g = self.clone();
        for _ in 0..200 {
            if outer_boundary(problem, energy, g.r_max).is_ok() {
                return Ok(g);
            }
            g.r_max *= lit(1.5);
        }
        outer_boundary(problem, energy, g.r_max).map(|_| g)
    }
}

/// `W(x) = 2M (V(R) - E)` with `R = x` or, mirrored, `R = -x`.
pub(crate) struct Coupling<'a, T: Real, P: RadialProblem<T> + ?Sized> {
    problem: &'a P,
    energy: T,
    two_m: T,
    mirror: bool,
}

impl<'a, T: Real, P: RadialProblem<T> + ?Sized> Coupling<'a, T, P> {
    fn new(problem: &'a P, energy: T, mirror: bool) -> Self {
        Coupling { problem, energy, two_m: lit::<T>(2.0) * problem.mass(), mirror }
    }

    fn radius(&self, x: T) -> T {
        if self.mirror {
            -x
        } else {
            x
        }
    }

    pub(crate) fn eval(&self, x: T) -> DMatrix<T> {
        let n = self.problem.dim();
        let mut w = DMatrix::zeros(n, n);
        self.problem.potential_into(self.radius(x), &mut w);
        for i in 0..n {
            w[(i, i)] -= self.energy;
        }
        w *= self.two_m;
        w
    }

    pub(crate) fn failure(&self, x: T, reason: &str) -> Error {
        Error::Propagation { radius: self.radius(x).as_f64(), reason: reason.to_string() }
    }

    /// Modified log-derivative sector `[a, a + 2h]`, split further when an
    /// open channel would accumulate too much phase.
    pub(crate) fn sector(&self, y: &mut DMatrix<T>, a: T, wa: &DMatrix<T>, wc: &DMatrix<T>, wb: &DMatrix<T>, h: T) -> Result<usize> {
        let phase = mld::open_phase(wc, h);
        let limit: T = lit(mld::MAX_HALF_PHASE);
        let nodes = if phase > limit {
            let m = (phase * lit(2.0) / limit).ceil().to_usize().unwrap_or(2).max(2);
            let hs = h / lit(m as f64);
            let mut nodes = 0;
            let mut w0 = wa.clone();
            for k in 0..m {
                let s = a + hs * lit(2.0 * k as f64);
                let w1 = self.eval(s + hs);
                let w2 = if k + 1 == m { wb.clone() } else { self.eval(s + hs + hs) };
                nodes += self.sector(y, s, &w0, &w1, &w2, hs)?;
                w0 = w2;
            }
            nodes
        } else {
            mld::sector(y, wa, wc, wb, h).map_err(|Singular| self.failure(a + h, "singular log-derivative update"))?
        };
        Ok(nodes)
    }
}

fn check_finite<T: Real>(y: &DMatrix<T>) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Fixed-step modified log-derivative leg from `x0` to `x1`.
fn fixed_leg<T: Real, P: RadialProblem<T> + ?Sized>(
    y: &mut DMatrix<T>,
    x0: T,
    x1: T,
    dr: T,
    coupling: &Coupling<'_, T, P>,
    max_sectors: usize,
    asym: &mut T,
) -> Result<(usize, usize)> {
    let span = x1 - x0;
    let count = (span / (dr * lit(2.0))).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    if count > max_sectors {
        return Err(coupling.failure(x0, &format!("{count} sectors exceed the limit of {max_sectors}")));
    }
    let h = span / lit(2.0 * count as f64);
    let mut wa = coupling.eval(x0);
    let mut nodes = 0;
    for k in 0..count {
        let a = x0 + h * lit(2.0 * k as f64);
        let b = if k + 1 == count { x1 } else { x0 + h * lit(2.0 * (k + 1) as f64) };
        let wc = coupling.eval(a + h);
        let wb = coupling.eval(b);
        nodes += coupling.sector(y, a, &wa, &wc, &wb, (b - a) / lit(2.0))?;
        *asym = (*asym).max(symmetrize(y));
        if !check_finite(y) {
            return Err(coupling.failure(b, "non-finite log-derivative"));
        }
        wa = wb;
    }
    Ok((nodes, count))
}

/// Radii from `r_mid` to `r_max`: the step starts at `dr`, grows by
/// `growth` and is capped by the local WKB phase `h k` of the open
/// channels and, for closed ones, by the relative step `h / R`.
fn long_range_radii<T: Real, P: RadialProblem<T> + ?Sized>(
    problem: &P,
    energy: T,
    grid: &PropagationGrid<T>,
) -> Result<Vec<T>> {
    let coupling = Coupling::new(problem, energy, false);
    let mut pts = vec![grid.r_mid];
    let mut r = grid.r_mid;
    let mut h = grid.dr;
    while r < grid.r_max {
        if pts.len() > grid.max_sectors {
            return Err(coupling.failure(r, "long-range step count limit reached"));
        }
        let w = coupling.eval(r);
        let k_open = (0..w.nrows()).fold(T::zero(), |m, i| m.max(-w[(i, i)])).sqrt();
        h *= grid.growth;
        h = h.min(grid.max_relative_step * r);
        if k_open > T::zero() {
            h = h.min(grid.max_phase / k_open);
        }
        if r + h * lit(1.5) >= grid.r_max {
            pts.push(grid.r_max);
            break;
        }
        r += h;
        pts.push(r);
    }
    Ok(pts)
}

/// Checks that `energy` is below every adiabat at `r_max` and returns the
/// adiabatic decay constants and eigenvectors of `W(r_max)`.
fn outer_boundary<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, energy: T, r_max: T) -> Result<(Vec<T>, DMatrix<T>)> {
    let w = Coupling::new(problem, energy, false).eval(r_max);
    let eig = w.symmetric_eigen();
    let open = eig.eigenvalues.iter().filter(|v| !(**v > T::zero())).count();
    if open > 0 {
        // adiabats are indexed from the bottom; the highest open one is reported
        return Err(Error::OpenAtOuterBoundary { energy: energy.as_f64(), r_max: r_max.as_f64(), adiabat: open - 1 });
    }
    let kappa = eig.eigenvalues.iter().map(|v| v.sqrt()).collect();
    Ok((kappa, eig.eigenvectors))
}

/// Outward propagation from the wall at `r_min` to `r_match`.
pub fn logder_outward<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, energy: T, grid: &PropagationGrid<T>) -> Result<LogDerivativeState<T>> {
    grid.validate()?;
    outward_fixed(problem, energy, grid.r_min, grid.r_match, grid.dr, grid.max_sectors)
}

/// Outward fixed-step propagation between arbitrary radii from a wall.
pub fn outward_fixed<T: Real, P: RadialProblem<T> + ?Sized>(
    problem: &P,
    energy: T,
    r_start: T,
    r_end: T,
    dr: T,
    max_sectors: usize,
) -> Result<LogDerivativeState<T>> {
    if !(r_start < r_end) || !(dr > T::zero()) {
        return Err(invalid("outward leg needs r_start < r_end and dr > 0"));
    }
    let n = problem.dim();
    let mut y = DMatrix::identity(n, n) * lit::<T>(WALL_LOG_DERIVATIVE);
    let c = Coupling::new(problem, energy, false);
    let mut asym = T::zero();
    let (nodes, sectors) = fixed_leg(&mut y, r_start, r_end, dr, &c, max_sectors, &mut asym)?;
    Ok(LogDerivativeState { y, r: r_end, direction: Direction::Outward, nodes, asymmetry: asym, sectors })
}

/// Continues an outward state to `r_end` with step-doubling control.
pub fn outward_adaptive<T: Real, P: RadialProblem<T> + ?Sized>(
    problem: &P,
    energy: T,
    state: &LogDerivativeState<T>,
    r_end: T,
    h0: T,
    tol: T,
) -> Result<LogDerivativeState<T>> {
    if state.direction != Direction::Outward || !(r_end > state.r) {
        return Err(invalid("adaptive continuation needs an outward state below r_end"));
    }
    let c = Coupling::new(problem, energy, false);
    let mut y = state.y.clone();
    let (nodes, sectors) = adaptive::leg(&mut y, state.r, r_end, h0, tol, &c, 50_000_000)?;
    let asym = symmetrize(&mut y);
    Ok(LogDerivativeState {
        y,
        r: r_end,
        direction: Direction::Outward,
        nodes: state.nodes + nodes,
        asymmetry: state.asymmetry.max(asym),
        sectors: state.sectors + sectors,
    })
}

/// Inward propagation from the semiclassical boundary at `r_max` to `r_match`.
pub fn logder_inward<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, energy: T, grid: &PropagationGrid<T>) -> Result<LogDerivativeState<T>> {
    grid.validate()?;
    let (kappa, t) = outer_boundary(problem, energy, grid.r_max)?;
    let n = problem.dim();
    // Mirror coordinate: Z = -Y = T diag(kappa) T^T.
    let mut z = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut s = T::zero();
            for k in 0..n {
                s += t[(i, k)] * kappa[k] * t[(j, k)];
            }
            z[(i, j)] = s;
        }
    }
    let c = Coupling::new(problem, energy, true);
    let mut asym = T::zero();
    let mut nodes = 0;
    let mut sectors = 0;
    match grid.long_range {
        LongRangeMethod::Airy => {
            let radii = long_range_radii(problem, energy, grid)?;
            let mut wa = c.eval(-grid.r_max);
            for pair in radii.windows(2).rev() {
                let (a, b) = (-pair[1], -pair[0]);
                let wc = c.eval((a + b) / lit(2.0));
                let wb = c.eval(b);
                nodes += airy::sector(&mut z, &wa, &wc, &wb, b - a, true)
                    .map_err(|Singular| c.failure(a, "singular Airy sector"))?;
                asym = asym.max(symmetrize(&mut z));
                if !check_finite(&z) {
                    return Err(c.failure(b, "non-finite log-derivative"));
                }
                wa = wb;
                sectors += 1;
            }
        }
        LongRangeMethod::StepDoubling { tol } => {
            let h0 = (grid.r_max - grid.r_mid) * lit(1e-3);
            let (k, s) = adaptive::leg(&mut z, -grid.r_max, -grid.r_mid, h0, lit(tol), &c, grid.max_sectors)?;
            nodes += k;
            sectors += s;
            asym = asym.max(symmetrize(&mut z));
        }
    }
    let (k, s) = fixed_leg(&mut z, -grid.r_mid, -grid.r_match, grid.dr, &c, grid.max_sectors, &mut asym)?;
    Ok(LogDerivativeState {
        y: -z,
        r: grid.r_match,
        direction: Direction::Inward,
        nodes: nodes + k,
        asymmetry: asym,
        sectors: sectors + s,
    })
}

/// The matching matrix `Y_out - Y_in` at `r_match` and its spectrum.
#[derive(Debug, Clone)]
pub struct Matching<T: Real> {
    pub outward: LogDerivativeState<T>,
    pub inward: LogDerivativeState<T>,
    /// Ascending eigenvalues of the matching matrix.
    pub eigenvalues: Vec<T>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<T>,
}

impl<T: Real> Matching<T> {
    pub fn negative(&self) -> usize {
        self.eigenvalues.iter().filter(|v| **v < T::zero()).count()
    }

    /// Number of bound states below the energy (Johnson's theorem).
    pub fn node_count(&self) -> usize {
        self.outward.nodes + self.inward.nodes + self.negative()
    }

    pub fn smallest(&self) -> T {
        self.eigenvalues.iter().copied().fold(T::max_value().unwrap_or_else(T::one), |m, v| if v.abs() < m.abs() { v } else { m })
    }
}

pub fn matching<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, energy: T, grid: &PropagationGrid<T>) -> Result<Matching<T>> {
    let outward = logder_outward(problem, energy, grid)?;
    let inward = logder_inward(problem, energy, grid)?;
    let m = &outward.y - &inward.y;
    let (values, vectors) = crate::potential::sorted_eigen(m);
    Ok(Matching { outward, inward, eigenvalues: values.iter().copied().collect(), eigenvectors: vectors })
}

/// Number of bound states with energy below `energy`.
pub fn node_count<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, energy: T, grid: &PropagationGrid<T>) -> Result<usize> {
    let outward = logder_outward(problem, energy, grid)?;
    let inward = logder_inward(problem, energy, grid)?;
    let neg = match SymmetricFactor::new(&(&outward.y - &inward.y)) {
        Ok(f) => f.negative_count(),
        Err(Singular) => {
            let m = &outward.y - &inward.y;
            m.symmetric_eigenvalues().iter().filter(|v| **v < T::zero()).count()
        }
    };
    Ok(outward.nodes + inward.nodes + neg)
}

#[cfg(test)]
mod tests;
