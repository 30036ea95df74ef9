//! Independent reference solvers shared by the integration tests.
#![allow(dead_code)]

use dipbound::basis::ChannelBasis;
use dipbound::units::PhysicalSystem;
use dipbound::Model;

/// Single-channel `psi'' = 2M (V - E) psi` on `[r_min, r_box]` with
/// `psi = 0` at both ends, solved by Numerov shooting. The number of sign
/// changes of the discrete solution counts the levels below `E`.
pub struct Numerov<'a> {
    pub v: &'a dyn Fn(f64) -> f64,
    pub mass: f64,
    pub r_min: f64,
    pub r_box: f64,
}

impl Numerov<'_> {
    fn march(&self, e: f64, h: f64, mut keep: Option<&mut Vec<f64>>) -> usize {
        let n = ((self.r_box - self.r_min) / h).round() as usize;
        let f = |i: usize| {
            let r = self.r_min + h * i as f64;
            1.0 - h * h * 2.0 * self.mass * ((self.v)(r) - e) / 12.0
        };
        let (mut p0, mut p1) = (0.0f64, 1e-30f64);
        let (mut f0, mut f1) = (f(0), f(1));
        if let Some(k) = keep.as_deref_mut() {
            k.clear();
            k.push(p0);
            k.push(p1);
        }
        let mut nodes = 0;
        for i in 1..n {
            let f2 = f(i + 1);
            let p2 = ((12.0 - 10.0 * f1) * p1 - f0 * p0) / f2;
            if p2 == 0.0 || (p2 < 0.0) != (p1 < 0.0) {
                nodes += 1;
            }
            p0 = p1;
            p1 = p2;
            f0 = f1;
            f1 = f2;
            if let Some(k) = keep.as_deref_mut() {
                k.push(p2);
            }
            if p1.abs() > 1e200 {
                p0 *= 1e-200;
                p1 *= 1e-200;
                if let Some(k) = keep.as_deref_mut() {
                    k.iter_mut().for_each(|x| *x *= 1e-200);
                }
            }
        }
        // the last point is the wall; a node there belongs to the level itself
        if p1 == 0.0 {
            nodes -= 1;
        }
        nodes
    }

    /// Level `index` (0 = deepest) of the discrete problem at step `h`.
    pub fn level_at(&self, index: usize, mut lo: f64, mut hi: f64, h: f64) -> f64 {
        assert!(self.march(lo, h, None) <= index && self.march(hi, h, None) > index, "level {index} not bracketed");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.march(mid, h, None) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Richardson-extrapolated level from steps `h` and `h/2`.
    pub fn level(&self, index: usize, lo: f64, hi: f64, h: f64) -> f64 {
        let a = self.level_at(index, lo, hi, h);
        let b = self.level_at(index, lo, hi, h / 2.0);
        b + (b - a) / 15.0
    }

    pub fn count_below(&self, e: f64, h: f64) -> usize {
        self.march(e, h, None)
    }

    /// Wavefunction at energy `e` on the step-`h` grid: outward from the
    /// wall to the outer classical turning point, inward from the box end,
    /// joined continuously. One-sided shooting would be swamped by the
    /// growing solution in the outer forbidden region.
    pub fn wavefunction(&self, e: f64, h: f64) -> Vec<f64> {
        let n = ((self.r_box - self.r_min) / h).round() as usize;
        let r = |i: usize| self.r_min + h * i as f64;
        let f = |i: usize| 1.0 - h * h * 2.0 * self.mass * ((self.v)(r(i)) - e) / 12.0;
        let turn = (1..n).rev().find(|&i| (self.v)(r(i)) < e).expect("level has an allowed region");
        let mut out = vec![0.0; n + 1];
        out[1] = 1e-30;
        for i in 1..turn {
            out[i + 1] = ((12.0 - 10.0 * f(i)) * out[i] - f(i - 1) * out[i - 1]) / f(i + 1);
            if out[i + 1].abs() > 1e200 {
                out[..=i + 1].iter_mut().for_each(|x| *x *= 1e-200);
            }
        }
        let mut inw = vec![0.0; n + 1];
        inw[n - 1] = 1e-30;
        for i in (turn + 1..n).rev() {
            inw[i - 1] = ((12.0 - 10.0 * f(i)) * inw[i] - f(i + 1) * inw[i + 1]) / f(i - 1);
            if inw[i - 1].abs() > 1e200 {
                inw[i - 1..].iter_mut().for_each(|x| *x *= 1e-200);
            }
        }
        let scale = out[turn] / inw[turn];
        for i in turn + 1..=n {
            out[i] = inw[i] * scale;
        }
        let big = out.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        out.iter_mut().for_each(|p| *p /= big);
        out
    }

    /// `<g(R)>` over the level-`index` wavefunction (Simpson rule),
    /// Richardson-extrapolated over `h` and `h/2`.
    pub fn expectation(&self, index: usize, lo: f64, hi: f64, h: f64, g: &dyn Fn(f64) -> f64) -> f64 {
        let one = |h: f64| {
            let e = self.level_at(index, lo, hi, h);
            let psi = self.wavefunction(e, h);
            let n = psi.len() - 1;
            let (mut num, mut den) = (0.0, 0.0);
            for (i, p) in psi.iter().enumerate() {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                let r = self.r_min + h * i as f64;
                num += w * p * p * g(r);
                den += w * p * p;
            }
            num / den
        };
        let (a, b) = (one(h), one(h / 2.0));
        b + (b - a) / 15.0
    }
}

/// Dy pair with the given well depth, as a one-channel model for partial
/// wave `l` with the dipole switched off.
pub fn dy_single(de_cm: f64, l: u32) -> Model {
    let sys = PhysicalSystem { de_cm: Some(de_cm), ..PhysicalSystem::dysprosium() };
    Model::from_physical(&sys, ChannelBasis::single(l), None).unwrap().with_dipole_product(0.0)
}
