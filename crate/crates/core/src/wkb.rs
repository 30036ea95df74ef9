//! Semiclassical phase integrals over adiabatic curves and the resulting
//! estimate of the number of bound states.
//!
//! `Phi = int Re sqrt(-2 M eps(r)) dr` from the wall outward. The
//! double-exponential rule handles the square-root branch points at the
//! turning points, which are used as interval ends. Works in `f64`.

use quadrature::integrate;

use crate::basis::dipole_element;
use crate::error::{invalid, Result};
use crate::potential::{InteractionModel, UnitSystem};

/// Known long-range form of a curve, `eps(r) ~ -coefficient r^-power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    None,
    PowerLaw { coefficient: f64, power: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIntegral {
    pub phi: f64,
    /// Quadrature error estimate, plus the truncated remainder when the
    /// curve is still attractive at the cut and has no analytic tail.
    pub error: f64,
    /// Radii where the curve changes sign.
    pub turning_points: Vec<f64>,
    /// Analytic contribution beyond `r_cut`.
    pub tail: f64,
}

/// Geometric ratio of the sign-change scan.
const SCAN_RATIO: f64 = 1.02;

fn bisect_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `int_a^b sqrt(max(-2 M eps, 0))`, split geometrically so each piece is
/// within reach of one double-exponential pass.
fn integrate_allowed(curve: &dyn Fn(f64) -> f64, mass: f64, a: f64, b: f64) -> (f64, f64) {
    let g = |r: f64| (-2.0 * mass * curve(r)).max(0.0).sqrt();
    let mut edges = vec![a];
    let mut x = a;
    while x * 2.0 < b {
        x *= 2.0;
        edges.push(x);
    }
    edges.push(b);
    let (mut total, mut err) = (0.0, 0.0);
    for w in edges.windows(2) {
        let scale = g(0.5 * (w[0] + w[1])).max(g(w[0])).max(1e-300) * (w[1] - w[0]);
        let out = integrate(g, w[0], w[1], 1e-12 * scale);
        total += out.integral;
        err += out.error_estimate;
    }
    (total, err)
}

/// Phase integral of `curve` from `r_min` to `r_cut`, plus the analytic
/// `tail` beyond `r_cut` when the curve is still attractive there.
pub fn phase_integral(curve: &dyn Fn(f64) -> f64, mass: f64, r_min: f64, r_cut: f64, tail: Tail) -> Result<PhaseIntegral> {
    if !(r_min > 0.0 && r_cut > r_min && mass > 0.0) {
        return Err(invalid("phase integral needs 0 < r_min < r_cut and a positive mass"));
    }
    // sign changes on a geometric scan
    let mut roots = Vec::new();
    let mut r = r_min;
    let mut neg = curve(r) < 0.0;
    while r < r_cut {
        let next = (r * SCAN_RATIO).min(r_cut);
        let n = curve(next) < 0.0;
        if n != neg {
            roots.push(bisect_root(curve, r, next));
        }
        neg = n;
        r = next;
    }
    let mut edges = vec![r_min];
    edges.extend(&roots);
    edges.push(r_cut);
    let (mut phi, mut error) = (0.0, 0.0);
    for w in edges.windows(2) {
        if curve(0.5 * (w[0] + w[1])) < 0.0 {
            let (i, e) = integrate_allowed(curve, mass, w[0], w[1]);
            phi += i;
            error += e;
        }
    }
    let mut tail_part = 0.0;
    if curve(r_cut) < 0.0 {
        match tail {
            Tail::PowerLaw { coefficient, power } if power > 2.0 => {
                // int_rc^inf sqrt(2 M c) r^(-p/2) dr
                let k = 1.0 - power / 2.0;
                tail_part = (2.0 * mass * coefficient).sqrt() * r_cut.powf(k) / (-k);
            }
            _ => {
                // remainder estimate: the integrand times the cut radius
                error += (-2.0 * mass * curve(r_cut)).sqrt() * r_cut;
            }
        }
    }
    Ok(PhaseIntegral { phi: phi + tail_part, error, turning_points: roots, tail: tail_part })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIntegralResult {
    pub phi: Vec<f64>,
    pub v_d: Vec<f64>,
    pub count: Vec<usize>,
    pub total: usize,
}

/// `floor(v_D) + 1` for `v_D >= 0`, else 0.
pub fn count_from_v_d(v_d: f64) -> usize {
    if v_d >= 0.0 {
        v_d.floor() as usize + 1
    } else {
        0
    }
}

/// Relative accuracy at which the lowest adiabat is replaced by its
/// second-order tail.
const TAIL_MATCH: f64 = 1e-4;

/// WKB estimate for the lowest `n_adiabats` adiabats of a reduced-unit
/// model with a wall at `r_min`.
pub fn wkb_counts(model: &InteractionModel<f64>, r_min: f64, n_adiabats: usize) -> Result<PhaseIntegralResult> {
    if model.units() != UnitSystem::Reduced {
        return Err(invalid("WKB counts are defined for the reduced-unit model"));
    }
    let basis = model.basis();
    if n_adiabats > basis.len() {
        return Err(invalid(format!("{n_adiabats} adiabats requested from a basis of {}", basis.len())));
    }
    let mass = 1.0;
    let mut asymptotic_l: Vec<u32> = basis.channels().iter().map(|c| c.l).collect();
    asymptotic_l.sort_unstable();

    let mut result = PhaseIntegralResult { phi: Vec::new(), v_d: Vec::new(), count: Vec::new(), total: 0 };
    for (n, &l_inf) in asymptotic_l.iter().enumerate().take(n_adiabats) {
        let curve = |r: f64| model.adiabatic_energies(r)[n];
        let pi = if l_inf == 0 && basis.index_of(2).is_some() {
            // second-order tail -W02^2 / (3 r^4) of the s-wave adiabat
            let w02 = dipole_element(0, 2, basis.ml()) * model.dipole_product();
            let c = w02 * w02 / 3.0;
            let mut r_cut = r_min.max(1.0);
            while (curve(r_cut) + c / r_cut.powi(4)).abs() > TAIL_MATCH * curve(r_cut).abs() {
                r_cut *= 1.2;
                if r_cut > 1e12 {
                    return Err(invalid("lowest adiabat never reaches its r^-4 tail"));
                }
            }
            phase_integral(&curve, mass, r_min, r_cut.max(r_min * 1.2), Tail::PowerLaw { coefficient: c, power: 4.0 })?
        } else {
            let mut r_cut = (10.0f64).max(10.0 * r_min);
            while curve(r_cut) < 0.0 {
                r_cut *= 2.0;
                if r_cut > 1e12 {
                    return Err(invalid(format!("adiabat {n} stays attractive without a known tail")));
                }
            }
            phase_integral(&curve, mass, r_min, r_cut, Tail::None)?
        };
        let v_d = pi.phi / std::f64::consts::PI - 0.5;
        let count = count_from_v_d(v_d);
        result.phi.push(pi.phi);
        result.v_d.push(v_d);
        result.count.push(count);
        result.total += count;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Parity};

    #[test]
    fn inverse_cube_closed_form() {
        for r_min in [1e-3, 0.04, 1.0] {
            let p = phase_integral(&|r: f64| -2.0 / r.powi(3), 1.0, r_min, 50.0, Tail::PowerLaw { coefficient: 2.0, power: 3.0 }).unwrap();
            let exact = 4.0 / r_min.sqrt();
            assert!((p.phi - exact).abs() < 1e-9 * exact, "{} vs {exact}", p.phi);
        }
    }

    #[test]
    fn purely_repulsive_curve_has_no_phase() {
        let p = phase_integral(&|r: f64| 3.0 / (r * r), 1.0, 0.01, 10.0, Tail::None).unwrap();
        assert_eq!(p.phi, 0.0);
    }

    #[test]
    fn turning_point_branch_is_integrated_accurately() {
        // eps = -(1 - r^2)/2 on [0, 1]: int sqrt(1 - r^2) = pi/4
        let p = phase_integral(&|r: f64| -(1.0 - r * r) / 2.0, 1.0, 1e-12, 3.0, Tail::None).unwrap();
        assert!((p.phi - std::f64::consts::FRAC_PI_4).abs() < 1e-10, "{}", p.phi);
        assert_eq!(p.turning_points.len(), 1);
    }

    #[test]
    fn count_convention() {
        assert_eq!(count_from_v_d(-0.2), 0);
        assert_eq!(count_from_v_d(0.0), 1);
        assert_eq!(count_from_v_d(2.7), 3);
    }

    #[test]
    fn wall_far_outside_binds_nothing() {
        let m = InteractionModel::hard_wall(build_basis(Parity::Even, 0, 20).unwrap(), 10.0).unwrap();
        assert_eq!(wkb_counts(&m, 10.0, 5).unwrap().total, 0);
    }

    #[test]
    fn too_many_adiabats_rejected() {
        let m = InteractionModel::hard_wall(build_basis(Parity::Even, 0, 4).unwrap(), 0.1).unwrap();
        assert!(wkb_counts(&m, 0.1, 4).is_err());
    }

    fn model(l_max: u32, r_min: f64) -> InteractionModel<f64> {
        InteractionModel::hard_wall(build_basis(Parity::Even, 0, l_max).unwrap(), r_min).unwrap()
    }

    #[test]
    fn small_wall_count_near_inverse_cube_limit() {
        let r_min = 1e-3;
        let w = wkb_counts(&model(60, r_min), r_min, 1).unwrap();
        let limit = 4.0 / (std::f64::consts::PI * r_min.sqrt()) - 0.5;
        let rel = (w.count[0] as f64 - limit).abs() / limit;
        assert!(rel < 0.15, "count {} vs {limit}", w.count[0]);
    }

    #[test]
    fn lowest_adiabat_slope_is_minus_half() {
        let a = wkb_counts(&model(80, 1e-3), 1e-3, 1).unwrap().v_d[0];
        let b = wkb_counts(&model(80, 1e-4), 1e-4, 1).unwrap().v_d[0];
        let slope = (b / a).ln() / 0.1f64.ln();
        assert!((slope + 0.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn monotone_in_wall_and_ordered_by_adiabat() {
        let mut prev: Option<PhaseIntegralResult> = None;
        for r_min in [0.005, 0.01, 0.03, 0.1, 0.3] {
            let w = wkb_counts(&model(30, r_min), r_min, 6).unwrap();
            for n in 1..6 {
                assert!(w.count[n] <= w.count[n - 1]);
                assert!(w.phi[n] >= 0.0);
            }
            if let Some(p) = prev {
                for n in 0..6 {
                    assert!(w.phi[n] <= p.phi[n] && w.count[n] <= p.count[n]);
                }
            }
            prev = Some(w);
        }
    }

    #[test]
    fn first_state_appears_near_a_tenth() {
        let vd = |r: f64| wkb_counts(&model(20, r), r, 1).unwrap().v_d[0];
        let (mut lo, mut hi) = (0.01, 1.0);
        assert!(vd(lo) > 0.0 && vd(hi) < 0.0);
        for _ in 0..30 {
            let mid = (lo * hi).sqrt();
            if vd(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // within an order of magnitude of 0.1
        assert!(lo > 0.01 && lo < 1.0, "{lo}");
    }
}
