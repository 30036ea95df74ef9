//! Partial-wave channel bases and the angular matrix of the dipole-dipole
//! operator `-2 P2(cos theta)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(l: u32) -> Self {
        if l.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Channel {
    pub l: u32,
    pub ml: i32,
}

/// Channels of one parity and one `M_L`, sorted by ascending `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelBasis {
    parity: Parity,
    ml: i32,
    l_max: u32,
    channels: Vec<Channel>,
}

impl ChannelBasis {
    pub fn new(parity: Parity, ml: i32, l_max: u32) -> Result<Self> {
        let l_min = ml.unsigned_abs();
        let first = if Parity::of(l_min) == parity { l_min } else { l_min + 1 };
        let channels: Vec<Channel> = (first..=l_max).step_by(2).map(|l| Channel { l, ml }).collect();
        if channels.is_empty() {
            return Err(invalid(format!(
                "no {parity} partial wave with |M_L| = {} <= L <= {l_max}",
                ml.unsigned_abs()
            )));
        }
        Ok(ChannelBasis { parity, ml, l_max, channels })
    }

    /// Single channel `L` (with `M_L = 0`).
    pub fn single(l: u32) -> Self {
        ChannelBasis::new(Parity::of(l), 0, l)
            .map(|mut b| {
                b.channels.retain(|c| c.l == l);
                b
            })
            .expect("L >= 0 always forms a basis")
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn ml(&self) -> i32 {
        self.ml
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn index_of(&self, l: u32) -> Option<usize> {
        self.channels.iter().position(|c| c.l == l)
    }

    /// Short label used in CSV output, e.g. `even/ML=0/Lmax=40`.
    pub fn descriptor(&self) -> String {
        format!("{}/ML={}/Lmax={}", self.parity, self.ml, self.l_max)
    }
}

pub fn build_basis(parity: Parity, ml: i32, l_max: u32) -> Result<ChannelBasis> {
    ChannelBasis::new(parity, ml, l_max)
}

/// Default `L_max` for a wall at `r_min` (in units of `R_dip`). The lowest
/// adiabats localise in angle with width ~ `(r / 6)^(1/4)`, so the basis
/// must reach `L ~ 12 r^(-1/4)`; this converges node counts at 0- for
/// `r_min` in `[1e-3, 1]`.
pub fn auto_l_max(r_min: f64, parity: Parity, ml: i32) -> u32 {
    let target = (12.0 * r_min.powf(-0.25)).ceil().max(4.0) as u32;
    let mut l = target.max(ml.unsigned_abs());
    if Parity::of(l) != parity {
        l += 1;
    }
    l
}

/// Exact 3j symbol: `sign * sqrt(square)` with `square` rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wigner3jExact {
    pub sign: i8,
    pub square: BigRational,
}

impl Wigner3jExact {
    pub fn zero() -> Self {
        Wigner3jExact { sign: 0, square: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let sq = self.square.to_f64().expect("3j square converts to f64");
        f64::from(self.sign) * sq.sqrt()
    }
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = Vec::with_capacity(n + 1);
    f.push(BigInt::one());
    for k in 1..=n {
        let next = &f[k - 1] * BigInt::from(k);
        f.push(next);
    }
    f
}

/// Racah's closed-form sum for integer angular momenta, evaluated in exact
/// rational arithmetic. Selection-rule failures give zero.
pub fn wigner3j_exact(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> Wigner3jExact {
    if j1 < 0 || j2 < 0 || j3 < 0 {
        return Wigner3jExact::zero();
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 || m1 + m2 + m3 != 0 {
        return Wigner3jExact::zero();
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return Wigner3jExact::zero();
    }
    let fact = factorials((j1 + j2 + j3 + 1) as usize);
    let f = |n: i64| -> &BigInt { &fact[n as usize] };

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = f(k)
            * f(j3 - j2 + k + m1)
            * f(j3 - j1 + k - m2)
            * f(j1 + j2 - j3 - k)
            * f(j1 - k - m1)
            * f(j2 - k + m2);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Wigner3jExact::zero();
    }
    let triangle = BigRational::new(
        f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3),
        f(j1 + j2 + j3 + 1).clone(),
    );
    let moments = f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3);
    let square = &sum * &sum * triangle * BigRational::from_integer(moments);

    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1 } else { -1 };
    let sign = if sum.is_positive() { phase } else { -phase };
    Wigner3jExact { sign, square }
}

type Key = (i64, i64, i64, i64, i64, i64);

fn cache() -> &'static RwLock<HashMap<Key, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// 3j symbol for integer arguments as a floating-point number. Values are
/// memoized; the memo table is shared between threads.
pub fn wigner3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    let key = (j1, j2, j3, m1, m2, m3);
    if let Some(v) = cache().read().ok().and_then(|c| c.get(&key).copied()) {
        return v;
    }
    let v = wigner3j_exact(j1, j2, j3, m1, m2, m3).to_f64();
    if let Ok(mut c) = cache().write() {
        c.insert(key, v);
    }
    v
}

/// `<L M | -2 P2(cos theta) | L' M>` for a single pair of channels.
pub fn dipole_element(l: u32, lp: u32, ml: i32) -> f64 {
    let (l, lp, m) = (i64::from(l), i64::from(lp), i64::from(ml));
    let phase = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let a = wigner3j(l, 2, lp, -m, 0, m);
    if a == 0.0 {
        return 0.0;
    }
    let b = wigner3j(l, 2, lp, 0, 0, 0);
    -2.0 * phase * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt() * a * b
}

/// Angular part of the reduced potential: the dipole operator is `W / r^3`
/// and the centrifugal term is `L(L+1) / (2 r^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T: Real> {
    pub w: DMatrix<T>,
    /// `L(L+1)` per channel.
    pub centrifugal: Vec<T>,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn dim(&self) -> usize {
        self.centrifugal.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.w == self.w.transpose()
    }
}

pub fn dipole_coupling_matrix<T: Real>(basis: &ChannelBasis) -> CouplingMatrix<T> {
    let n = basis.len();
    let ch = basis.channels();
    let mut w = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let li = ch[i].l;
            let lj = ch[j].l;
            if li.abs_diff(lj) > 2 {
                continue;
            }
            let v = T::lit(dipole_element(li, lj, basis.ml()));
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let centrifugal = ch.iter().map(|c| T::lit(f64::from(c.l) * f64::from(c.l + 1))).collect();
    CouplingMatrix { w, centrifugal }
}
