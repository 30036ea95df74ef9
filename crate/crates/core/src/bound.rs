//! Bound-state energies from the matching matrix, first-order dipole
//! shifts and the zero-energy s-wave scattering length.

use crate::basis::{dipole_element, ChannelBasis};
use crate::error::{invalid, Error, Result};
use crate::num::{lit, Real};
use crate::potential::{InteractionModel, RadialProblem, Variant};
use crate::propagate::{self, Matching, PropagationGrid};

/// Named value of a scanned parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateRecord<T: Real> {
    pub parameter: Option<Parameter>,
    pub energy: T,
    /// 0 = deepest state found in the search window.
    pub node_index: usize,
    /// Number of states of the whole system below this one.
    pub states_below: usize,
    pub basis: String,
    pub l_max: Option<u32>,
    pub dr: T,
    /// Width of the final energy bracket.
    pub tolerance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSearch<T: Real> {
    pub states: Vec<BoundStateRecord<T>>,
    /// `node_count(E_lo)`.
    pub below: usize,
    /// `node_count(E_hi) - node_count(E_lo)`.
    pub expected: usize,
    pub complete: bool,
    /// Propagations performed.
    pub evaluations: usize,
}

/// Matching data at one energy; a propagation that hits an exactly
/// singular update is retried at a nudged energy.
#[derive(Clone)]
struct Probe<T: Real> {
    energy: T,
    nodes: usize,
    negative: usize,
    eigenvalues: Vec<T>,
}

impl<T: Real> Probe<T> {
    fn count(&self) -> usize {
        self.nodes + self.negative
    }
}

struct Evaluator<'a, T: Real, P: RadialProblem<T> + ?Sized> {
    problem: &'a P,
    grid: &'a PropagationGrid<T>,
    nudge: T,
    calls: usize,
}

impl<'a, T: Real, P: RadialProblem<T> + ?Sized> Evaluator<'a, T, P> {
    fn probe(&mut self, e: T) -> Result<Probe<T>> {
        let mut energy = e;
        let mut last = None;
        for _ in 0..3 {
            self.calls += 1;
            match propagate::matching(self.problem, energy, self.grid) {
                Ok(m) => return Ok(probe_from(energy, &m)),
                Err(err @ Error::Propagation { .. }) => {
                    last = Some(err);
                    energy += self.nudge;
                }
                Err(err) => return Err(err),
            }
        }
        Err(last.expect("retry loop ran"))
    }
}

fn probe_from<T: Real>(energy: T, m: &Matching<T>) -> Probe<T> {
    Probe { energy, nodes: m.outward.nodes + m.inward.nodes, negative: m.negative(), eigenvalues: m.eigenvalues.clone() }
}

/// Eigenvalue of `Y_out - Y_in` at `r_match` closest to zero.
pub fn matching_eigenvalue<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, energy: T, grid: &PropagationGrid<T>) -> Result<T> {
    Ok(propagate::matching(problem, energy, grid)?.smallest())
}

/// All states with `e_lo < E < e_hi`, each converged to a bracket narrower
/// than `tol_e`. The grid is extended outward if `e_hi` is not closed at
/// its `r_max`.
pub fn find_bound_states<T: Real, P: RadialProblem<T> + ?Sized>(
    problem: &P,
    grid: &PropagationGrid<T>,
    e_lo: T,
    e_hi: T,
    tol_e: T,
) -> Result<BoundStateSearch<T>> {
    if !(e_lo < e_hi) || !(tol_e > T::zero()) {
        return Err(invalid("need e_lo < e_hi and tol_e > 0"));
    }
    let grid = grid.closed_at(problem, e_hi)?;
    let mut ev = Evaluator { problem, grid: &grid, nudge: tol_e * lit(1e-3), calls: 0 };
    let lo = ev.probe(e_lo)?;
    let hi = ev.probe(e_hi)?;
    let expected = hi.count().saturating_sub(lo.count());
    let base = lo.count();

    let mut found: Vec<(T, T)> = Vec::new();
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let diff = b.count().saturating_sub(a.count());
        if diff == 0 {
            continue;
        }
        let width = b.energy - a.energy;
        if diff == 1 && a.nodes == b.nodes {
            found.push(refine(&mut ev, a, b, tol_e)?);
            continue;
        }
        if width <= tol_e {
            // unresolvable cluster: report each state at the midpoint
            let mid = (a.energy + b.energy) / lit(2.0);
            for _ in 0..diff {
                found.push((mid, width));
            }
            continue;
        }
        let mid = ev.probe((a.energy + b.energy) / lit(2.0))?;
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
    found.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite energies"));

    let states: Vec<BoundStateRecord<T>> = found
        .iter()
        .enumerate()
        .map(|(i, &(energy, tol))| BoundStateRecord {
            parameter: None,
            energy,
            node_index: i,
            states_below: base + i,
            basis: problem.descriptor(),
            l_max: problem.l_max(),
            dr: grid.dr,
            tolerance: tol,
        })
        .collect();
    let complete = states.len() == expected;
    Ok(BoundStateSearch { states, below: base, expected, complete, evaluations: ev.calls })
}

/// Illinois iteration on the isolating eigenvalue of the matching matrix.
/// On entry `a` and `b` have equal node totals and one more negative
/// matching eigenvalue at `b`; that eigenvalue (index `a.negative` in
/// ascending order) is continuous and decreasing across the bracket.
fn refine<T: Real, P: RadialProblem<T> + ?Sized>(ev: &mut Evaluator<'_, T, P>, a: Probe<T>, b: Probe<T>, tol_e: T) -> Result<(T, T)> {
    let m = a.negative;
    let nodes = a.nodes;
    let (mut xa, mut fa) = (a.energy, a.eigenvalues[m]);
    let (mut xb, mut fb) = (b.energy, b.eigenvalues[m]);
    let mut side = 0i8;
    for _ in 0..200 {
        let span = xb - xa;
        if span <= tol_e {
            break;
        }
        let mut x = xb - fb * span / (fb - fa);
        let guard = span * lit(1e-3);
        if !(x > xa + guard && x < xb - guard) || side.abs() > 3 {
            x = (xa + xb) / lit(2.0);
            side = 0;
        }
        let p = ev.probe(x)?;
        if p.nodes != nodes {
            return Err(Error::RootSearch(format!("node total changed inside an isolated bracket at E = {:e}", x.as_f64())));
        }
        let f = p.eigenvalues[m];
        if f == T::zero() {
            return Ok((p.energy, T::zero()));
        }
        // Illinois: halve the stale end's value when the same side repeats
        if f > T::zero() {
            xa = p.energy;
            fa = f;
            side = if side < 0 { side - 1 } else { -1 };
            if side < -1 {
                fb /= lit(2.0);
            }
        } else {
            xb = p.energy;
            fb = f;
            side = if side > 0 { side + 1 } else { 1 };
            if side > 1 {
                fa /= lit(2.0);
            }
        }
    }
    let span = xb - xa;
    let root = if fa != fb { xb - fb * span / (fb - fa) } else { (xa + xb) / lit(2.0) };
    Ok((root.max(xa).min(xb), span))
}

/// Number of states below `-offset`, i.e. the node count just below
/// threshold. `r_max` is enlarged until `-offset` is closed there.
pub fn threshold_count<T: Real, P: RadialProblem<T> + ?Sized>(problem: &P, grid: &PropagationGrid<T>, offset: T) -> Result<usize> {
    if !(offset > T::zero()) {
        return Err(invalid("threshold offset must be positive"));
    }
    let energy = -offset;
    let grid = grid.closed_at(problem, energy)?;
    propagate::node_count(problem, energy, &grid)
}

/// Partial wave with the largest component in the matching-matrix
/// eigenvector whose eigenvalue is closest to zero: the dominant channel of
/// a state at `energy`, read at the matching radius.
pub fn dominant_partial_wave<T: Real>(model: &InteractionModel<T>, energy: T, grid: &PropagationGrid<T>) -> Result<u32> {
    let grid = grid.closed_at(model, energy)?;
    let m = propagate::matching(model, energy, &grid)?;
    let k = (0..m.eigenvalues.len())
        .min_by(|&a, &b| m.eigenvalues[a].abs().partial_cmp(&m.eigenvalues[b].abs()).expect("finite eigenvalues"))
        .ok_or_else(|| invalid("empty basis"))?;
    let col = m.eigenvectors.column(k);
    let j = (0..col.len())
        .max_by(|&a, &b| col[a].abs().partial_cmp(&col[b].abs()).expect("finite eigenvector"))
        .expect("non-empty column");
    Ok(model.basis().channels()[j].l)
}

/// Energy of the state with `index` states below it, inside `(e_lo, e_hi)`.
pub fn state_by_index<T: Real, P: RadialProblem<T> + ?Sized>(
    problem: &P,
    grid: &PropagationGrid<T>,
    index: usize,
    e_lo: T,
    e_hi: T,
    tol_e: T,
) -> Result<T> {
    let grid = grid.closed_at(problem, e_hi)?;
    let mut ev = Evaluator { problem, grid: &grid, nudge: tol_e * lit(1e-3), calls: 0 };
    let mut a = ev.probe(e_lo)?;
    let mut b = ev.probe(e_hi)?;
    if !(a.count() <= index && b.count() > index) {
        return Err(Error::RootSearch(format!(
            "state {index} is not inside the window ({} states below E_lo, {} below E_hi)",
            a.count(),
            b.count()
        )));
    }
    loop {
        if a.count() == index && b.count() == index + 1 && a.nodes == b.nodes {
            return refine(&mut ev, a, b, tol_e).map(|r| r.0);
        }
        if b.energy - a.energy <= tol_e {
            return Ok((a.energy + b.energy) / lit(2.0));
        }
        let mid = ev.probe((a.energy + b.energy) / lit(2.0))?;
        if mid.count() > index {
            b = mid;
        } else {
            a = mid;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringLength<T: Real> {
    pub a: T,
    pub r_end: T,
    /// `|a(r_end) - a(r_end / 2)|`.
    pub convergence: T,
    /// Log-derivative at `r_end`; its zero is the pole of `a`.
    pub y_end: T,
    /// `|a|` exceeds `1e3 r_end`: the scattering length is at a pole.
    pub pole: bool,
}

/// Zero-energy s-wave scattering length of a one-channel problem, from
/// `a = R - 1/Y(R)` at `R = r_end`.
pub fn scattering_length<T: Real, P: RadialProblem<T> + ?Sized>(
    problem: &P,
    r_min: T,
    r_end: T,
    dr: T,
) -> Result<ScatteringLength<T>> {
    if problem.dim() != 1 {
        return Err(invalid("scattering length needs a single-channel problem"));
    }
    let r_half = r_end / lit(2.0);
    if !(r_min < r_half) {
        return Err(invalid("r_end must exceed 2 r_min"));
    }
    let r_fixed = (r_min + dr * lit(2000.0)).min(r_half);
    let tol: T = lit::<T>(1e-11).max(T::epsilon() * lit(1e3));
    let s0 = propagate::outward_fixed(problem, T::zero(), r_min, r_fixed, dr, usize::MAX)?;
    let s1 = if r_half > r_fixed { propagate::outward_adaptive(problem, T::zero(), &s0, r_half, dr * lit(4.0), tol)? } else { s0 };
    let s2 = propagate::outward_adaptive(problem, T::zero(), &s1, r_end, dr * lit(4.0), tol)?;
    let length = |r: T, y: T| r - T::one() / y;
    let a_half = length(r_half, s1.y[(0, 0)]);
    let y_end = s2.y[(0, 0)];
    let a = length(r_end, y_end);
    Ok(ScatteringLength { a, r_end, convergence: (a - a_half).abs(), y_end, pole: a.abs() > r_end * lit(1e3) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderShift<T: Real> {
    /// `d1 d2 W_LL <R^-3>`.
    pub shift: T,
    /// Angular factor `W_LL(M_L)`.
    pub angular: T,
    pub expectation_r3: T,
    pub unperturbed_energy: T,
}

/// First-order dipole shift of the `v`-th (from the bottom) single-channel
/// Lennard-Jones level with partial wave `l`, projection `ml`.
/// `<R^-3>` comes from a Hellmann-Feynman derivative of the level energy
/// with respect to an added `lambda R^-3` term, Richardson-extrapolated
/// over two step sizes.
pub fn first_order_shift<T: Real>(model: &InteractionModel<T>, v: usize, l: u32, ml: i32, tol_e: T) -> Result<FirstOrderShift<T>> {
    let (d1d2, r_min) = match *model.variant() {
        Variant::LennardJonesDipole { dipole_product, r_min, .. } => (dipole_product, r_min),
        Variant::HardWallDipole { .. } => return Err(invalid("first-order shift needs a Lennard-Jones model")),
    };
    if ml.unsigned_abs() > l {
        return Err(invalid(format!("|M_L| = {} exceeds L = {l}", ml.unsigned_abs())));
    }
    let single = model.with_basis(ChannelBasis::single(l)).with_dipole_product(T::zero());
    let grid = PropagationGrid::for_model(&model.with_r_min(r_min).with_basis(ChannelBasis::single(l)))?;
    let depth = model.well_depth().expect("Lennard-Jones model");
    let e_lo = -depth * lit(1.0001);
    let e_hi = -tol_e * lit(10.0);
    let e0 = state_by_index(&single, &grid, v, e_lo, e_hi, tol_e)?;
    let angular: T = lit(dipole_element(l, l, ml));
    if l == 0 {
        return Ok(FirstOrderShift { shift: T::zero(), angular: T::zero(), expectation_r3: T::zero(), unperturbed_energy: e0 });
    }

    // Step size: perturb by ~1e-4 of the distance to the nearer neighbour.
    let below = if v > 0 { Some(state_by_index(&single, &grid, v - 1, e_lo, e0, tol_e)?) } else { None };
    let above = state_by_index(&single, &grid, v + 1, e0, e_hi, tol_e).ok();
    let gap = [below.map(|b| e0 - b), above.map(|a| a - e0), Some(-e0)]
        .into_iter()
        .flatten()
        .fold(T::max_value().unwrap_or_else(T::one), |m, g| m.min(g));
    let r_e = model.well_position().expect("Lennard-Jones model");
    let delta = gap * lit(1e-4) * r_e * r_e * r_e;
    let fine_tol = tol_e.min(gap * lit(1e-10));

    let level = |lambda: T| -> Result<T> {
        let m = single.with_isotropic_r3(lambda);
        let lo = e0 - gap / lit(2.0);
        let hi = (e0 + gap / lit(2.0)).min(e_hi);
        state_by_index(&m, &grid, v, lo, hi, fine_tol)
    };
    let derivative = |d: T| -> Result<T> { Ok((level(d)? - level(-d)?) / (d + d)) };
    let coarse = derivative(delta)?;
    let fine = derivative(delta / lit(2.0))?;
    let r3 = (fine * lit(4.0) - coarse) / lit(3.0);
    Ok(FirstOrderShift { shift: d1d2 * angular * r3, angular, expectation_r3: r3, unperturbed_energy: e0 })
}
