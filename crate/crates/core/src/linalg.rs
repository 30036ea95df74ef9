//! Symmetric indefinite factorization `P A P^T = L D L^T` (Bunch-Kaufman
//! pivoting) used for the log-derivative inversions. The block-diagonal
//! `D` gives the inertia of `A` by Sylvester's law.

use nalgebra::DMatrix;

use crate::num::{lit, Real};

#[derive(Debug, Clone)]
enum Block<T> {
    One(T),
    Two([T; 3]), // (d11, d21, d22)
}

#[derive(Debug, Clone)]
pub struct SymmetricFactor<T: Real> {
    l: DMatrix<T>,
    blocks: Vec<(usize, Block<T>)>,
    perm: Vec<usize>,
    negative: usize,
}

/// Returned when a pivot vanishes; the matrix is singular to working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

impl<T: Real> SymmetricFactor<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self, Singular> {
        let n = a.nrows();
        let mut a = a.clone();
        let mut l = DMatrix::<T>::identity(n, n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();
        let mut negative = 0;
        let alpha: T = (T::one() + lit::<T>(17.0).sqrt()) / lit(8.0);

        let swap = |a: &mut DMatrix<T>, l: &mut DMatrix<T>, perm: &mut Vec<usize>, k: usize, p: usize, q: usize| {
            if p == q {
                return;
            }
            a.swap_rows(p, q);
            a.swap_columns(p, q);
            for c in 0..k {
                l.swap((p, c), (q, c));
            }
            perm.swap(p, q);
        };

        let mut k = 0;
        while k < n {
            let absakk = a[(k, k)].abs();
            let (mut imax, mut colmax) = (k, T::zero());
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > colmax {
                    colmax = v;
                    imax = i;
                }
            }
            if absakk.max(colmax) == T::zero() {
                return Err(Singular);
            }
            let (kp, two) = if absakk >= alpha * colmax {
                (k, false)
            } else {
                let mut rowmax = T::zero();
                for j in k..n {
                    if j != imax {
                        rowmax = rowmax.max(a[(imax, j)].abs());
                    }
                }
                if absakk * rowmax >= alpha * colmax * colmax {
                    (k, false)
                } else if a[(imax, imax)].abs() >= alpha * rowmax {
                    (imax, false)
                } else {
                    (imax, true)
                }
            };

            if !two {
                swap(&mut a, &mut l, &mut perm, k, k, kp);
                let d = a[(k, k)];
                if d == T::zero() || !d.is_finite() {
                    return Err(Singular);
                }
                if d < T::zero() {
                    negative += 1;
                }
                for i in k + 1..n {
                    l[(i, k)] = a[(i, k)] / d;
                }
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    if akj == T::zero() {
                        continue;
                    }
                    for i in k + 1..n {
                        let lik = l[(i, k)];
                        a[(i, j)] -= lik * akj;
                    }
                }
                blocks.push((k, Block::One(d)));
                k += 1;
            } else {
                swap(&mut a, &mut l, &mut perm, k, k + 1, kp);
                let d11 = a[(k, k)];
                let d21 = a[(k + 1, k)];
                let d22 = a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                if det == T::zero() || !det.is_finite() {
                    return Err(Singular);
                }
                if det < T::zero() {
                    negative += 1;
                } else if d11 + d22 < T::zero() {
                    negative += 2;
                }
                let (i11, i21, i22) = (d22 / det, -d21 / det, d11 / det);
                for i in k + 2..n {
                    let (x, y) = (a[(i, k)], a[(i, k + 1)]);
                    l[(i, k)] = x * i11 + y * i21;
                    l[(i, k + 1)] = x * i21 + y * i22;
                }
                for j in k + 2..n {
                    let (akj, ak1j) = (a[(k, j)], a[(k + 1, j)]);
                    for i in k + 2..n {
                        let upd = l[(i, k)] * akj + l[(i, k + 1)] * ak1j;
                        a[(i, j)] -= upd;
                    }
                }
                blocks.push((k, Block::Two([d11, d21, d22])));
                k += 2;
            }
        }
        Ok(SymmetricFactor { l, blocks, perm, negative })
    }

    /// Number of negative eigenvalues of the factored matrix.
    pub fn negative_count(&self) -> usize {
        self.negative
    }

    pub fn inverse(&self) -> DMatrix<T> {
        let n = self.l.nrows();
        // X = L^{-1} (unit lower triangular), column by column.
        let mut x = DMatrix::<T>::identity(n, n);
        for j in 0..n {
            for i in j + 1..n {
                let mut s = T::zero();
                for k in j..i {
                    s += self.l[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = -s;
            }
        }
        // Y = D^{-1} X
        let mut y = x.clone();
        for (k, b) in &self.blocks {
            match *b {
                Block::One(d) => {
                    let inv = T::one() / d;
                    for c in 0..n {
                        y[(*k, c)] = x[(*k, c)] * inv;
                    }
                }
                Block::Two([d11, d21, d22]) => {
                    let det = d11 * d22 - d21 * d21;
                    let (i11, i21, i22) = (d22 / det, -d21 / det, d11 / det);
                    for c in 0..n {
                        let (p, q) = (x[(*k, c)], x[(*k + 1, c)]);
                        y[(*k, c)] = i11 * p + i21 * q;
                        y[(*k + 1, c)] = i21 * p + i22 * q;
                    }
                }
            }
        }
        let m = x.transpose() * y;
        let mut out = DMatrix::<T>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.perm[i], self.perm[j])] = m[(i, j)];
            }
        }
        out
    }
}

/// Symmetrizes in place: `a <- (a + a^T) / 2`. Returns the largest
/// asymmetry removed.
pub fn symmetrize<T: Real>(a: &mut DMatrix<T>) -> T {
    let n = a.nrows();
    let half: T = lit(0.5);
    let mut worst = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = (a[(i, j)] - a[(j, i)]).abs();
            worst = worst.max(d);
            let m = (a[(i, j)] + a[(j, i)]) * half;
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, vals: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        let mut it = vals.iter();
        for i in 0..n {
            for j in i..n {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn zero_diagonal_needs_two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let f = SymmetricFactor::new(&a).unwrap();
        assert_eq!(f.negative_count(), 1);
        assert!((f.inverse() - &a).norm() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(SymmetricFactor::new(&a).is_err());
    }

    proptest! {
        #[test]
        fn inertia_and_inverse_match_eigen(n in 1usize..9, seed in prop::collection::vec(-3.0f64..3.0, 45)) {
            let a = random_symmetric(n, &seed);
            let eig = a.clone().symmetric_eigenvalues();
            prop_assume!(eig.iter().all(|e| e.abs() > 1e-6));
            let f = SymmetricFactor::new(&a).unwrap();
            let neg = eig.iter().filter(|e| **e < 0.0).count();
            prop_assert_eq!(f.negative_count(), neg);
            let prod = &a * f.inverse();
            let err = (prod - DMatrix::identity(n, n)).norm();
            let cond = eig.iter().fold(0.0f64, |m, e| m.max(e.abs())) / eig.iter().fold(f64::MAX, |m, e| m.min(e.abs()));
            prop_assert!(err < 1e-12 * cond.max(1.0) * n as f64, "err {} cond {}", err, cond);
        }
    }
}
