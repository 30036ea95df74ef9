mod common;

use common::{dy_single, Numerov};
use dipbound::basis::{build_basis, ChannelBasis, Parity};
use dipbound::bound::{dominant_partial_wave, find_bound_states, first_order_shift, matching_eigenvalue, scattering_length, state_by_index};
use dipbound::potential::{InteractionModel, RadialProblem};
use dipbound::propagate::{logder_inward, logder_outward, matching, node_count, PropagationGrid};
use dipbound::units::PhysicalSystem;
use dipbound::{Grid, Model};
use nalgebra::DMatrix;

fn oracle_for(m: &Model) -> (impl Fn(f64) -> f64 + '_, f64) {
    (move |r: f64| m.potential(r)[(0, 0)], m.r_min())
}

#[test]
fn deep_lennard_jones_levels_match_numerov() {
    let m = dy_single(800.0, 0);
    let de = m.well_depth().unwrap();
    let (v, r_min) = oracle_for(&m);
    let oracle = Numerov { v: &v, mass: m.mass(), r_min, r_box: r_min + 14.0 };
    let levels: Vec<f64> = (0..11).map(|i| oracle.level(i, -1.001 * de, -0.3 * de, 1e-3)).collect();
    let g = Grid::for_model(&m).unwrap();
    let found = find_bound_states(&m, &g, -1.001 * de, 0.5 * (levels[9] + levels[10]), 1e-12).unwrap();
    assert!(found.complete);
    assert_eq!(found.states.len(), 10);
    for (s, o) in found.states.iter().zip(&levels) {
        assert!(((s.energy - o) / de).abs() < 1e-6, "{} vs {o}", s.energy);
    }
}

#[test]
fn zero_energy_count_equals_roots_found() {
    // light pair so the full spectrum is short
    let sys = PhysicalSystem { reduced_mass_u: 4.0, de_cm: Some(150.0), ..PhysicalSystem::dysprosium() };
    let m = Model::from_physical(&sys, ChannelBasis::single(0), None).unwrap().with_dipole_product(0.0);
    let de = m.well_depth().unwrap();
    let e6 = 1.0 / (2.0 * m.mass() * (2.0 * m.mass() * 2003.0f64).sqrt());
    let zero_minus = -1e-6 * e6;
    let g = Grid::for_model(&m).unwrap().closed_at(&m, zero_minus).unwrap();
    let count = node_count(&m, zero_minus, &g).unwrap();
    let found = find_bound_states(&m, &g, -1.0001 * de, zero_minus, 1e-10 * de).unwrap();
    assert!(count > 3);
    assert_eq!(found.states.len(), count);
    assert!(found.complete);
    // and the oracle agrees on the number of levels
    let (v, r_min) = oracle_for(&m);
    let oracle = Numerov { v: &v, mass: m.mass(), r_min, r_box: 400.0 };
    assert_eq!(oracle.count_below(zero_minus, 2e-3), count);
}

#[test]
fn outward_and_inward_agree_at_a_level() {
    let m = dy_single(800.0, 2);
    let de = m.well_depth().unwrap();
    let g = Grid::for_model(&m).unwrap();
    let e = state_by_index(&m, &g, 4, -de, -0.2 * de, 1e-13).unwrap();
    let a = logder_outward(&m, e, &g).unwrap().y[(0, 0)];
    let b = logder_inward(&m, e, &g).unwrap().y[(0, 0)];
    assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn expectation_of_inverse_cube_matches_wavefunction_integral() {
    let sys = PhysicalSystem { de_cm: Some(800.0), ..PhysicalSystem::dysprosium() };
    let full = Model::from_physical(&sys, build_basis(Parity::Even, 0, 4).unwrap(), None).unwrap();
    let shift = first_order_shift(&full, 3, 2, 0, 1e-13).unwrap();
    assert!((shift.angular + 4.0 / 7.0).abs() < 1e-14);
    assert!(shift.shift < 0.0, "L=2, M_L=0 moves down");

    let single = dy_single(800.0, 2);
    let de = single.well_depth().unwrap();
    let (v, r_min) = oracle_for(&single);
    let oracle = Numerov { v: &v, mass: single.mass(), r_min, r_box: r_min + 14.0 };
    let r3 = oracle.expectation(3, -de, -0.3 * de, 1e-3, &|r| r.powi(-3));
    assert!(((shift.expectation_r3 - r3) / r3).abs() < 1e-6, "{} vs {r3}", shift.expectation_r3);
    assert!((shift.shift - full.dipole_product() * (-4.0 / 7.0) * r3).abs() < 1e-6 * shift.shift.abs());
}

#[test]
fn s_wave_has_no_first_order_shift() {
    let sys = PhysicalSystem { de_cm: Some(800.0), ..PhysicalSystem::dysprosium() };
    let full = Model::from_physical(&sys, build_basis(Parity::Even, 0, 4).unwrap(), None).unwrap();
    for v in [0, 5] {
        assert_eq!(first_order_shift(&full, v, 0, 0, 1e-12).unwrap().shift, 0.0);
    }
}

#[test]
fn shift_is_even_in_projection() {
    let sys = PhysicalSystem { de_cm: Some(800.0), ..PhysicalSystem::dysprosium() };
    let full = Model::from_physical(&sys, build_basis(Parity::Odd, 1, 5).unwrap(), None).unwrap();
    let a = first_order_shift(&full, 2, 3, 1, 1e-13).unwrap();
    let b = first_order_shift(&full, 2, 3, -1, 1e-13).unwrap();
    assert!((a.shift - b.shift).abs() <= 1e-9 * a.shift.abs());
}

struct Free;

impl RadialProblem<f64> for Free {
    fn dim(&self) -> usize {
        1
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn potential_into(&self, _r: f64, out: &mut DMatrix<f64>) {
        out[(0, 0)] = 0.0;
    }
}

#[test]
fn hard_sphere_scattering_length_is_its_radius() {
    let s = scattering_length(&Free, 2.5, 400.0, 1e-3).unwrap();
    // roundoff of the log-derivative algebra limits this to ~1e-8
    assert!((s.a - 2.5).abs() < 1e-7 * 2.5, "{}", s.a);
    assert!(!s.pole);
}

#[test]
fn free_particle_has_no_matching_zero() {
    let g = PropagationGrid::new(0.5, 1.0, 2.0, 6.0, 1e-3).unwrap();
    let values: Vec<f64> = [-4.0, -1.0, -0.3, -0.05].iter().map(|&e| matching_eigenvalue(&Free, e, &g).unwrap()).collect();
    assert!(values.iter().all(|v| *v > 0.0) || values.iter().all(|v| *v < 0.0), "{values:?}");
    assert!(find_bound_states(&Free, &g, -4.0, -0.05, 1e-8).unwrap().states.is_empty());
}

#[test]
fn wall_outside_the_well_binds_nothing() {
    let m = InteractionModel::hard_wall(build_basis(Parity::Even, 0, 10).unwrap(), 10.0).unwrap();
    let g = PropagationGrid::for_model(&m).unwrap();
    let found = find_bound_states(&m, &g, -50.0, -1e-4, 1e-9).unwrap();
    assert!(found.states.is_empty());
    assert!(found.complete);
}

#[test]
fn matching_eigenvector_names_the_dominant_partial_wave() {
    // The L = 0, 2, 4 members of one deep vibrational level lie within
    // ~1e-4 D_e of each other. With the Dy moments reduced tenfold the
    // dipole coupling is far below that splitting, so each coupled level
    // must be dominated by the partial wave whose unperturbed level is
    // nearest. (At full Dy strength deep levels are strongly mixed.)
    let sys = PhysicalSystem { de_cm: Some(800.0), ..PhysicalSystem::dysprosium() }.with_dipoles_scaled(0.1);
    let basis = build_basis(Parity::Even, 0, 4).unwrap();
    let full = Model::from_physical(&sys, basis.clone(), None).unwrap();
    let g = Grid::for_model(&full).unwrap();
    let de = full.well_depth().unwrap();
    let unperturbed: Vec<(u32, f64)> = [0u32, 2, 4]
        .iter()
        .map(|&l| {
            let single = dy_single(800.0, l);
            (l, state_by_index(&single, &Grid::for_model(&single).unwrap(), 6, -de, -0.1 * de, 1e-13).unwrap())
        })
        .collect();
    let centre = unperturbed[1].1;
    let window = 2e-3 * de;
    let found = find_bound_states(&full, &g, centre - window, centre + window, 1e-13).unwrap();
    assert_eq!(found.states.len(), 3);
    for s in &found.states {
        let m = matching(&full, s.energy, &g).unwrap();
        let k = (0..m.eigenvalues.len()).min_by(|&a, &b| m.eigenvalues[a].abs().partial_cmp(&m.eigenvalues[b].abs()).unwrap()).unwrap();
        let vec = m.eigenvectors.column(k);
        let dominant = (0..vec.len()).max_by(|&a, &b| vec[a].abs().partial_cmp(&vec[b].abs()).unwrap()).unwrap();
        let nearest = unperturbed.iter().min_by(|a, b| (a.1 - s.energy).abs().partial_cmp(&(b.1 - s.energy).abs()).unwrap()).unwrap().0;
        assert_eq!(basis.channels()[dominant].l, nearest, "level {}", s.energy);
        assert_eq!(dominant_partial_wave(&full, s.energy, &g).unwrap(), nearest);
    }
}
