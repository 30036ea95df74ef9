//! Airy functions of real argument with exponential scaling.
//!
//! For `z > 0` the values are returned as `Ai e^{zeta}`, `Ai' e^{zeta}`,
//! `Bi e^{-zeta}`, `Bi' e^{-zeta}` with `zeta = 2/3 z^{3/2}`; for `z <= 0`
//! they are unscaled and `zeta = 0`.

use std::f64::consts::PI;

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;
const SQRT3: f64 = 1.732_050_807_568_877_2;

const MACLAURIN_AI_MAX: f64 = 2.0;
const MACLAURIN_BI_MAX: f64 = 8.0;
const TAYLOR_MARCH_MAX: f64 = 9.0;
const TAYLOR_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiry {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
    pub zeta: f64,
}

impl ScaledAiry {
    /// Unscaled values; overflows for large positive `z`.
    pub fn unscaled(&self) -> (f64, f64, f64, f64) {
        let d = (-self.zeta).exp();
        let g = self.zeta.exp();
        (self.ai * d, self.aip * d, self.bi * g, self.bip * g)
    }
}

pub fn airy_scaled(z: f64) -> ScaledAiry {
    if z > 0.0 {
        let zeta = 2.0 / 3.0 * z * z.sqrt();
        let (ai, aip) = if z <= MACLAURIN_AI_MAX {
            let (ai, aip, _, _) = maclaurin(z);
            let e = zeta.exp();
            (ai * e, aip * e)
        } else {
            ai_from_bessel_k(z, zeta)
        };
        let (bi, bip) = if z <= MACLAURIN_BI_MAX {
            let (_, _, bi, bip) = maclaurin(z);
            let e = (-zeta).exp();
            (bi * e, bip * e)
        } else {
            bi_asymptotic(z, zeta)
        };
        ScaledAiry { ai, aip, bi, bip, zeta }
    } else if -z <= TAYLOR_MARCH_MAX {
        let (ai, aip, bi, bip) = taylor_march(z);
        ScaledAiry { ai, aip, bi, bip, zeta: 0.0 }
    } else {
        let (ai, aip, bi, bip) = oscillatory_asymptotic(-z);
        ScaledAiry { ai, aip, bi, bip, zeta: 0.0 }
    }
}

/// Unscaled `(Ai, Ai', Bi, Bi')`.
pub fn airy(z: f64) -> (f64, f64, f64, f64) {
    airy_scaled(z).unscaled()
}

fn maclaurin(z: f64) -> (f64, f64, f64, f64) {
    let z3 = z * z * z;
    let (mut f, mut g) = (1.0, z);
    let (mut fp, mut gp) = (0.0, 1.0);
    let (mut t, mut s) = (1.0, z);
    let (mut p, mut q) = (0.0, 1.0);
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        t *= z3 / ((k3 - 1.0) * k3);
        s *= z3 / (k3 * (k3 + 1.0));
        p = if k == 1 { z * z / 2.0 } else { p * z3 / ((k3 - 1.0) * (k3 - 3.0)) };
        q *= z3 / (k3 * (k3 - 2.0));
        f += t;
        g += s;
        fp += p;
        gp += q;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if t.abs() + s.abs() + p.abs() + q.abs() <= 1e-17 * scale {
            break;
        }
    }
    let c1 = AI0;
    let c2 = -AIP0;
    (
        c1 * f - c2 * g,
        c1 * fp - c2 * gp,
        SQRT3 * (c1 * f + c2 * g),
        SQRT3 * (c1 * fp + c2 * gp),
    )
}

/// March the Taylor series of the Airy equation from 0 to `z`.
fn taylor_march(z: f64) -> (f64, f64, f64, f64) {
    let mut y = [AI0, AIP0, SQRT3 * AI0, -SQRT3 * AIP0];
    let mut z0 = 0.0;
    let steps = (z.abs() / TAYLOR_STEP).ceil().max(1.0) as usize;
    let h = z / steps as f64;
    for _ in 0..steps {
        let (a, ap) = taylor_step(z0, y[0], y[1], h);
        let (b, bp) = taylor_step(z0, y[2], y[3], h);
        y = [a, ap, b, bp];
        z0 += h;
    }
    (y[0], y[1], y[2], y[3])
}

fn taylor_step(z0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // y'' = z y  =>  a_{n+2} = (z0 a_n + a_{n-1}) / ((n+2)(n+1))
    let (mut am1, mut an, mut an1) = (0.0, y, yp);
    let mut val = y + yp * h;
    let mut der = yp;
    let mut hp = h;
    // |h| <= 1/2 and |z0| <= 9: the series is exhausted well before 40 terms.
    for n in 0..40 {
        let nf = n as f64;
        let an2 = (z0 * an + am1) / ((nf + 2.0) * (nf + 1.0));
        let dterm = (nf + 2.0) * an2 * hp;
        hp *= h;
        let vterm = an2 * hp;
        val += vterm;
        der += dterm;
        am1 = an;
        an = an1;
        an1 = an2;
    }
    (val, der)
}

/// Scaled `K_nu(x) e^x` and `K_{nu+1}(x) e^x` for |nu| <= 1/2 by Steed's
/// continued fraction (Temme's CF2); accurate for x >~ 1.5.
fn bessel_k_scaled(nu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - nu * nu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let k1 = kmu * (nu + x + 0.5 - h) / x;
    (kmu, k1)
}

fn ai_from_bessel_k(z: f64, zeta: f64) -> (f64, f64) {
    let (k13, k43) = bessel_k_scaled(1.0 / 3.0, zeta);
    let k23 = k43 - 2.0 / (3.0 * zeta) * k13;
    let ai = (z / 3.0).sqrt() * k13 / PI;
    let aip = -z / (PI * SQRT3) * k23;
    (ai, aip)
}

fn asymptotic_coefficients() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static C: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    C.get_or_init(|| {
        let mut out = vec![(1.0, 1.0)];
        let mut u = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
            out.push((u, v));
        }
        out
    })
}

/// Sums `sum_k sign^k c_k / zeta^k` stopping at the smallest term.
fn asymptotic_sum(zeta: f64, alternate: bool, pick: impl Fn(&(f64, f64)) -> f64) -> f64 {
    let coef = asymptotic_coefficients();
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for (k, c) in coef.iter().enumerate() {
        let sign = if alternate && k % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * pick(c) * pow;
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
        pow /= zeta;
    }
    sum
}

fn bi_asymptotic(z: f64, zeta: f64) -> (f64, f64) {
    let z14 = z.powf(0.25);
    let su = asymptotic_sum(zeta, false, |c| c.0);
    let sv = asymptotic_sum(zeta, false, |c| c.1);
    let rp = PI.sqrt();
    (su / (rp * z14), z14 * sv / rp)
}

/// DLMF 9.7.9-9.7.12 for Ai(-x), Bi(-x) and derivatives.
fn oscillatory_asymptotic(x: f64) -> (f64, f64, f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let coef = asymptotic_coefficients();
    let split = |pick: fn(&(f64, f64)) -> f64| -> (f64, f64) {
        // even part sum (-1)^k c_{2k} zeta^{-2k}, odd part sum (-1)^k c_{2k+1} zeta^{-2k-1}
        let mut even = 0.0;
        let mut odd = 0.0;
        let mut pow = 1.0;
        let mut last = f64::INFINITY;
        for (k, c) in coef.iter().enumerate() {
            let term = pick(c) * pow;
            if term.abs() > last {
                break;
            }
            last = term.abs();
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                even += sign * term;
            } else {
                odd += sign * term;
            }
            if last < 1e-17 {
                break;
            }
            pow /= zeta;
        }
        (even, odd)
    };
    let (ue, uo) = split(|c| c.0);
    let (ve, vo) = split(|c| c.1);
    let (s, c) = (zeta + PI / 4.0).sin_cos();
    let rp = PI.sqrt();
    let x14 = x.powf(0.25);
    let ai = (s * ue - c * uo) / (rp * x14);
    let bi = (c * ue + s * uo) / (rp * x14);
    let aip = -x14 / rp * (c * ve + s * vo);
    let bip = x14 / rp * (s * ve - c * vo);
    (ai, aip, bi, bip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    // Reference values from scipy.special.airy / airye.
    #[rustfmt::skip]
    const UNSCALED: &[(f64, f64, f64, f64, f64)] = &[
        (-20.0, -0.17640612707798434, 0.8928628567364726, -0.20013930932265164, -0.7914290338395351),
        (-12.0, -0.06655517505437264, 1.0231104533679707, -0.29571991207807313, -0.23673219783112154),
        (-9.5, 0.3191032477191283, -0.10809531881186986, 0.03778543248946606, 0.9847140700021199),
        (-8.5, -0.33029023763020887, -0.032313348284639276, 0.007754436447658451, -0.9629691651201748),
        (-5.0, 0.3507610090241142, 0.3271928185544436, -0.13836913490160083, 0.778411773001899),
        (-2.3, 0.026706333057357055, 0.7000336628765759, -0.45492823439436497, -0.0058110593070512355),
        (-0.7, 0.5110003975750101, -0.14464128564332107, 0.2752680119878796, 0.5449991200691819),
        (0.0, 0.3550280538878172, -0.2588194037928068, 0.6149266274460007, 0.4482883573538264),
        (0.4, 0.25474235429567627, -0.23583203441920828, 0.801773000013597, 0.5072816760506225),
        (1.9, 0.04059442003152913, -0.06043678178575662, 2.9191768630421087, 3.495165862891613),
        (2.6, 0.013289282529671482, -0.02256131088610874, 7.510087698082275, 11.202445467843921),
        (5.0, 0.00010834442813607433, -0.0002474138908684623, 657.7920441711713, 1435.8190802179822),
        (7.9, 6.23964009728394e-08, -1.772995832943035e-07, 907790.6160619943, 2521924.1139567834),
    ];

    #[test]
    fn unscaled_reference_values() {
        for &(z, ai, aip, bi, bip) in UNSCALED {
            let (a, ap, b, bp) = airy(z);
            assert!(close(a, ai, 2e-12), "Ai({z}) = {a} vs {ai}");
            assert!(close(ap, aip, 2e-12), "Ai'({z}) = {ap} vs {aip}");
            assert!(close(b, bi, 2e-12), "Bi({z}) = {b} vs {bi}");
            assert!(close(bp, bip, 2e-12), "Bi'({z}) = {bp} vs {bip}");
        }
    }

    // scipy.special.airye: eAi = Ai exp(zeta), eBi = Bi exp(-zeta) for z > 0.
    #[rustfmt::skip]
    const SCALED: &[(f64, f64, f64, f64, f64)] = &[
        (2.1, 0.22778653656129078, -0.35329317774395974, 0.49220288030303394, 0.6340057173130743),
        (8.1, 0.16648357439874192, -0.47882789534700987, 0.33599652536886343, 0.9455910450388177),
        (30.0, 0.12045939663973669, -0.6607833325212036, 0.24122445526882694, 1.3192228350679096),
        (400.0, 0.06307749180063416, -1.2615892563656799, 0.12615826893013615, 2.523086523523415),
    ];

    #[test]
    fn scaled_reference_values() {
        for &(z, ai, aip, bi, bip) in SCALED {
            let s = airy_scaled(z);
            assert!(close(s.ai, ai, 2e-12), "eAi({z}) = {} vs {ai}", s.ai);
            assert!(close(s.aip, aip, 2e-12), "eAi'({z}) = {} vs {aip}", s.aip);
            assert!(close(s.bi, bi, 2e-12), "eBi({z}) = {} vs {bi}", s.bi);
            assert!(close(s.bip, bip, 2e-12), "eBi'({z}) = {} vs {bip}", s.bip);
        }
    }

    #[test]
    fn wronskian_holds_everywhere() {
        let mut z = -30.0;
        while z < 60.0 {
            let s = airy_scaled(z);
            let w = s.ai * s.bip - s.aip * s.bi;
            assert!((w * PI - 1.0).abs() < 1e-11, "W({z}) = {w}");
            z += 0.173;
        }
    }

    #[test]
    fn branches_join_continuously() {
        for edge in [-TAYLOR_MARCH_MAX, MACLAURIN_AI_MAX, MACLAURIN_BI_MAX] {
            let a = airy_scaled(edge - 1e-9);
            let b = airy_scaled(edge + 1e-9);
            // The two sides are 2e-9 apart; derivatives are O(1).
            let jump = (a.ai - b.ai).abs().max((a.bi - b.bi).abs());
            assert!(jump < 1e-8, "jump {jump} at {edge}");
        }
    }
}
