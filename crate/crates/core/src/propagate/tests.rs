use super::*;
use crate::basis::{build_basis, Parity};

/// R-independent potential matrix.
struct Constant {
    v: DMatrix<f64>,
    mass: f64,
}

impl RadialProblem<f64> for Constant {
    fn dim(&self) -> usize {
        self.v.nrows()
    }
    fn mass(&self) -> f64 {
        self.mass
    }
    fn potential_into(&self, _r: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.v);
    }
}

fn free(n: usize) -> Constant {
    Constant { v: DMatrix::zeros(n, n), mass: 1.0 }
}

/// Closed form for constant W = 2M(V - E) below all thresholds.
fn exact_wall(w: &DMatrix<f64>, dist: f64) -> DMatrix<f64> {
    let eig = w.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| {
        if l > 0.0 {
            let k = l.sqrt();
            k / (k * dist).tanh()
        } else {
            let k = (-l).sqrt();
            k / (k * dist).tan()
        }
    }));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

#[test]
fn free_particle_closed_forms() {
    let p = free(1);
    for e in [-3.0, -0.01, 0.5] {
        let s = outward_fixed(&p, e, 0.1, 1.3, 1e-3, usize::MAX).unwrap();
        let x = 2.0 * e;
        let expect = if e < 0.0 {
            let k = (-x).sqrt();
            k / (k * 1.2).tanh()
        } else {
            let k = x.sqrt();
            k / (k * 1.2).tan()
        };
        assert!((s.y[(0, 0)] - expect).abs() < 1e-8 * expect.abs(), "E={e}: {} vs {expect}", s.y[(0, 0)]);
        assert_eq!(s.nodes, 0);
    }
}

#[test]
fn open_channel_nodes_are_counted() {
    // k = 10, interval 1.2: sin(k x) vanishes at x = pi/10 * j, j = 1..3
    let s = outward_fixed(&free(1), 50.0, 0.0, 1.2, 1e-3, usize::MAX).unwrap();
    assert_eq!(s.nodes, 3);
}

#[test]
fn decoupled_channels_stay_diagonal() {
    let p = Constant { v: DMatrix::from_diagonal(&nalgebra::dvector![0.0, 2.0]), mass: 1.0 };
    let s = outward_fixed(&p, -1.0, 0.0, 1.0, 1e-3, usize::MAX).unwrap();
    assert_eq!(s.y[(0, 1)], 0.0);
    for (i, w) in [2.0f64, 6.0].iter().enumerate() {
        let k = w.sqrt();
        assert!((s.y[(i, i)] - k / k.tanh()).abs() < 1e-8 * k);
    }
}

#[test]
fn fourth_order_convergence() {
    let v = DMatrix::from_row_slice(3, 3, &[0.0, 3.0, 0.5, 3.0, 4.0, -2.0, 0.5, -2.0, 1.0]);
    let p = Constant { v, mass: 1.0 };
    let e = -10.0;
    let w = (&p.v - DMatrix::identity(3, 3) * e) * 2.0;
    let exact = exact_wall(&w, 1.0);
    let err = |dr: f64| (outward_fixed(&p, e, 0.0, 1.0, dr, usize::MAX).unwrap().y - &exact).norm();
    let (e1, e2) = (err(0.02), err(0.01));
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "observed order {order} ({e1:e} -> {e2:e})");
}

#[test]
fn coupled_oscillatory_closed_form() {
    // eigenchannels with both signs of W, including an open one
    let v = DMatrix::from_row_slice(2, 2, &[-4.0, 1.5, 1.5, 3.0]);
    let p = Constant { v, mass: 1.0 };
    let w = &p.v * 2.0;
    let exact = exact_wall(&w, 0.5);
    let s = outward_fixed(&p, 0.0, 1.0, 1.5, 2e-4, usize::MAX).unwrap();
    assert!((s.y - &exact).norm() < 1e-8 * exact.norm());
}

#[test]
fn inward_constant_potential_is_exact() {
    let p = free(1);
    let g = PropagationGrid::new(0.0, 0.1, 0.5, 3.0, 1e-3).unwrap();
    for method in [LongRangeMethod::Airy, LongRangeMethod::StepDoubling { tol: 1e-10 }] {
        let s = logder_inward(&p, -2.0, &g.clone().with_long_range(method)).unwrap();
        assert!((s.y[(0, 0)] + 2.0).abs() < 1e-8, "{method:?}: {}", s.y[(0, 0)]);
        assert_eq!(s.nodes, 0);
    }
}

#[test]
fn inward_rejects_open_boundary() {
    let g = PropagationGrid::new(0.0, 0.1, 0.5, 3.0, 1e-3).unwrap();
    assert!(matches!(logder_inward(&free(1), 0.5, &g), Err(Error::OpenAtOuterBoundary { .. })));
}

fn dipole_model(l_max: u32, r_min: f64) -> InteractionModel<f64> {
    InteractionModel::hard_wall(build_basis(Parity::Even, 0, l_max).unwrap(), r_min).unwrap()
}

#[test]
fn airy_leg_matches_step_doubling() {
    let m = dipole_model(6, 0.05);
    let g = PropagationGrid::for_model(&m).unwrap();
    for e in [-2000.0, -5.0, -0.3, -1e-3] {
        let g = g.closed_at(&m, e).unwrap();
        let a = logder_inward(&m, e, &g).unwrap();
        let b = logder_inward(&m, e, &g.clone().with_long_range(LongRangeMethod::StepDoubling { tol: 1e-11 })).unwrap();
        let rel = (&a.y - &b.y).norm() / b.y.norm();
        assert!(rel < 1e-6, "E={e}: relative difference {rel:e}");
        assert_eq!(a.nodes, b.nodes);
    }
}

#[test]
fn node_count_is_monotone_in_energy() {
    let m = dipole_model(4, 0.02);
    let g = PropagationGrid::for_model(&m).unwrap();
    let mut last = 0;
    for e in [-2000.0, -500.0, -100.0, -20.0, -5.0, -1.0] {
        let n = node_count(&m, e, &g).unwrap();
        assert!(n >= last);
        last = n;
    }
    assert!(last > 0);
}

#[test]
fn single_precision_path() {
    // The reference is exact here, so a coarse step only limits roundoff:
    // each sector cancels terms of size 1/h against Y.
    let p = Constant32;
    let s = outward_fixed(&p, -0.5f32, 0.0, 1.0, 5e-2, usize::MAX).unwrap();
    let expect = 1.0f32 / 1.0f32.tanh();
    assert!((s.y[(0, 0)] - expect).abs() < 1e-4, "{} vs {expect}", s.y[(0, 0)]);
}

struct Constant32;

impl RadialProblem<f32> for Constant32 {
    fn dim(&self) -> usize {
        1
    }
    fn mass(&self) -> f32 {
        1.0
    }
    fn potential_into(&self, _r: f32, out: &mut DMatrix<f32>) {
        out[(0, 0)] = 0.0;
    }
}
