//! Coupled-channel potential matrices and adiabatic potential curves.

use nalgebra::{DMatrix, DVector};

use crate::basis::{dipole_coupling_matrix, ChannelBasis, CouplingMatrix};
use crate::error::{invalid, Result};
use crate::num::{lit, Real};
use crate::units::{compute_scales, PhysicalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    /// Lengths in R_dip, energies in E_dip, unit mass.
    Reduced,
    /// Atomic units.
    Atomic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Variant<T: Real> {
    /// Pure dipole-dipole problem in reduced units with psi(r_min) = 0.
    HardWallDipole { r_min: T },
    /// Dipole-dipole plus `C12 R^-12 - C6 R^-6`, atomic units, with
    /// psi(r_min) = 0 placed inside the repulsive wall.
    LennardJonesDipole {
        c6: T,
        c12: T,
        dipole_product: T,
        mass: T,
        r_min: T,
    },
}

/// Complete radial problem: `psi'' = 2 M (V(R) - E) psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionModel<T: Real> {
    variant: Variant<T>,
    basis: ChannelBasis,
    coupling: CouplingMatrix<T>,
    /// Extra isotropic `lambda / R^3` term; zero except when probing `<R^-3>`.
    isotropic_r3: T,
    /// Cached `dipole_product * W`.
    dipole_w: DMatrix<T>,
}

/// Anything that provides a symmetric potential matrix along R.
pub trait RadialProblem<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn mass(&self) -> T;

    /// Writes V(R) into `out` (dim x dim). `r` must be positive.
    fn potential_into(&self, r: T, out: &mut DMatrix<T>);

    fn potential(&self, r: T) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        self.potential_into(r, &mut m);
        m
    }

    /// Basis label carried into output records.
    fn descriptor(&self) -> String {
        format!("{}ch", self.dim())
    }

    fn l_max(&self) -> Option<u32> {
        None
    }
}

impl<T: Real> InteractionModel<T> {
    pub fn hard_wall(basis: ChannelBasis, r_min: T) -> Result<Self> {
        if !(r_min > T::zero()) {
            return Err(invalid("hard-wall radius must be positive"));
        }
        Ok(Self::assemble(Variant::HardWallDipole { r_min }, basis))
    }

    pub fn lennard_jones(basis: ChannelBasis, c6: T, c12: T, dipole_product: T, mass: T, r_min: T) -> Result<Self> {
        if !(c12 > T::zero()) || c6 < T::zero() {
            return Err(invalid("Lennard-Jones needs C12 > 0 and C6 >= 0"));
        }
        if !(mass > T::zero()) || !(r_min > T::zero()) {
            return Err(invalid("mass and inner wall radius must be positive"));
        }
        Ok(Self::assemble(
            Variant::LennardJonesDipole { c6, c12, dipole_product, mass, r_min },
            basis,
        ))
    }

    fn assemble(variant: Variant<T>, basis: ChannelBasis) -> Self {
        let coupling = dipole_coupling_matrix::<T>(&basis);
        let strength = match &variant {
            Variant::HardWallDipole { .. } => T::one(),
            Variant::LennardJonesDipole { dipole_product, .. } => *dipole_product,
        };
        let dipole_w = coupling.w.scale(strength);
        InteractionModel {
            variant,
            basis,
            coupling,
            isotropic_r3: T::zero(),
            dipole_w,
        }
    }

    pub fn variant(&self) -> &Variant<T> {
        &self.variant
    }

    pub fn basis(&self) -> &ChannelBasis {
        &self.basis
    }

    pub fn coupling(&self) -> &CouplingMatrix<T> {
        &self.coupling
    }

    pub fn units(&self) -> UnitSystem {
        match self.variant {
            Variant::HardWallDipole { .. } => UnitSystem::Reduced,
            Variant::LennardJonesDipole { .. } => UnitSystem::Atomic,
        }
    }

    pub fn r_min(&self) -> T {
        match self.variant {
            Variant::HardWallDipole { r_min } | Variant::LennardJonesDipole { r_min, .. } => r_min,
        }
    }

    pub fn dipole_product(&self) -> T {
        match self.variant {
            Variant::HardWallDipole { .. } => T::one(),
            Variant::LennardJonesDipole { dipole_product, .. } => dipole_product,
        }
    }

    pub fn isotropic_r3(&self) -> T {
        self.isotropic_r3
    }

    /// Same model on a different channel basis.
    pub fn with_basis(&self, basis: ChannelBasis) -> Self {
        let mut m = Self::assemble(self.variant.clone(), basis);
        m.isotropic_r3 = self.isotropic_r3;
        m
    }

    pub fn with_r_min(&self, r_min: T) -> Self {
        let mut variant = self.variant.clone();
        match &mut variant {
            Variant::HardWallDipole { r_min: r } | Variant::LennardJonesDipole { r_min: r, .. } => *r = r_min,
        }
        let mut m = Self::assemble(variant, self.basis.clone());
        m.isotropic_r3 = self.isotropic_r3;
        m
    }

    /// Lennard-Jones model with a different `d1 d2`; hard-wall models are
    /// returned unchanged since their dipole strength is fixed by the units.
    pub fn with_dipole_product(&self, d1d2: T) -> Self {
        let mut variant = self.variant.clone();
        if let Variant::LennardJonesDipole { dipole_product, .. } = &mut variant {
            *dipole_product = d1d2;
        }
        let mut m = Self::assemble(variant, self.basis.clone());
        m.isotropic_r3 = self.isotropic_r3;
        m
    }

    pub fn with_isotropic_r3(&self, lambda: T) -> Self {
        let mut m = self.clone();
        m.isotropic_r3 = lambda;
        m
    }

    /// `C12 R^-12 - C6 R^-6`, zero for the hard-wall variant.
    pub fn short_range(&self, r: T) -> T {
        match self.variant {
            Variant::HardWallDipole { .. } => T::zero(),
            Variant::LennardJonesDipole { c6, c12, .. } => {
                let r6 = (r * r * r).powi(2);
                c12 / (r6 * r6) - c6 / r6
            }
        }
    }

    /// `D_e = C6^2 / (4 C12)`.
    pub fn well_depth(&self) -> Option<T> {
        match self.variant {
            Variant::HardWallDipole { .. } => None,
            Variant::LennardJonesDipole { c6, c12, .. } => Some(c6 * c6 / (lit::<T>(4.0) * c12)),
        }
    }

    /// Position of the Lennard-Jones minimum `(2 C12 / C6)^(1/6)`.
    pub fn well_position(&self) -> Option<T> {
        match self.variant {
            Variant::HardWallDipole { .. } => None,
            Variant::LennardJonesDipole { c6, c12, .. } => {
                Some((lit::<T>(2.0) * c12 / c6).powf(lit(1.0 / 6.0)))
            }
        }
    }

    /// `U(r)`: centrifugal + dipole (+ Lennard-Jones) in the model's units.
    pub fn potential_matrix(&self, r: T) -> Result<DMatrix<T>> {
        if !(r > T::zero()) {
            return Err(invalid(format!("radius must be positive, got {}", r.as_f64())));
        }
        Ok(self.potential(r))
    }

    /// Eigenvalues (ascending) and eigenvectors of `U(r)`.
    pub fn adiabatic_decomposition(&self, r: T) -> (DVector<T>, DMatrix<T>) {
        sorted_eigen(self.potential(r))
    }

    pub fn adiabatic_energies(&self, r: T) -> Vec<T> {
        let mut v: Vec<T> = self.potential(r).symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        v
    }
}

/// Default position of the `psi = 0` wall inside the Lennard-Jones
/// repulsion: `0.75 sigma`, where the potential is about `100 D_e`.
pub fn default_lj_wall(c6: f64, c12: f64) -> f64 {
    0.75 * (c12 / c6).powf(1.0 / 6.0)
}

impl InteractionModel<f64> {
    /// Lennard-Jones model in atomic units from physical parameters. The
    /// well depth must be set; the wall defaults to [`default_lj_wall`].
    pub fn from_physical(sys: &PhysicalSystem, basis: ChannelBasis, r_min: Option<f64>) -> Result<Self> {
        let scales = compute_scales(sys)?;
        let c12 = scales.c12.ok_or_else(|| invalid("a Lennard-Jones model needs the well depth de_cm"))?;
        let r_min = r_min.unwrap_or_else(|| default_lj_wall(sys.c6, c12));
        Self::lennard_jones(basis, sys.c6, c12, sys.dipole_product(), sys.mass_au(), r_min)
    }
}

impl<T: Real> RadialProblem<T> for InteractionModel<T> {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn mass(&self) -> T {
        match self.variant {
            Variant::HardWallDipole { .. } => T::one(),
            Variant::LennardJonesDipole { mass, .. } => mass,
        }
    }

    fn descriptor(&self) -> String {
        self.basis.descriptor()
    }

    fn l_max(&self) -> Option<u32> {
        Some(self.basis.l_max())
    }

    fn potential_into(&self, r: T, out: &mut DMatrix<T>) {
        let inv_r = T::one() / r;
        let inv_r3 = inv_r * inv_r * inv_r;
        out.copy_from(&self.dipole_w);
        *out *= inv_r3;
        let rot = inv_r * inv_r / (lit::<T>(2.0) * self.mass());
        let iso = self.short_range(r) + self.isotropic_r3 * inv_r3;
        for (i, l2) in self.coupling.centrifugal.iter().enumerate() {
            out[(i, i)] += *l2 * rot + iso;
        }
    }
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending and the
/// eigenvector columns permuted to match.
pub fn sorted_eigen<T: Real>(m: DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let values = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `-(4/15) r^-4`, the second-order energy of the lowest adiabat.
pub fn lowest_adiabat_second_order<T: Real>(r: T) -> T {
    -lit::<T>(4.0 / 15.0) / r.powi(4)
}

/// Adiabats on a radial grid with continuity tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabatCurves<T: Real> {
    /// Ascending radii.
    pub r: Vec<T>,
    /// `curves[n][k]` is adiabat `n` at `r[k]`.
    pub curves: Vec<Vec<T>>,
    /// Asymptotic partial wave of each curve (assignment at the largest r).
    pub asymptotic_l: Vec<u32>,
    /// Smallest assigned eigenvector overlap between grid points `k` and `k+1`.
    pub step_overlap: Vec<T>,
    /// Set when some step could not be assigned unambiguously.
    pub coarse_grid: bool,
}

/// Overlap below which an assignment between neighbouring grid points is
/// considered ambiguous.
pub const AMBIGUOUS_OVERLAP: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Adiabats ordered by maximal eigenvector overlap with the neighbouring grid
/// point, seeded by ascending order at the largest radius.
pub fn adiabats<T: Real>(model: &InteractionModel<T>, r_grid: &[T]) -> Result<AdiabatCurves<T>> {
    if r_grid.is_empty() {
        return Err(invalid("empty radial grid"));
    }
    if !(r_grid[0] > T::zero()) || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("radial grid must be positive and strictly ascending"));
    }
    let n = model.dim();
    let m = r_grid.len();
    let mut curves = vec![vec![T::zero(); m]; n];
    let mut step_overlap = vec![T::one(); m.saturating_sub(1)];

    let (vals, vecs) = model.adiabatic_decomposition(r_grid[m - 1]);
    for c in 0..n {
        curves[c][m - 1] = vals[c];
    }
    let asymptotic_l = (0..n)
        .map(|c| {
            let col = vecs.column(c);
            let best = col.iamax();
            model.basis().channels()[best].l
        })
        .collect();

    let mut prev = vecs;
    let mut coarse = false;
    for k in (0..m - 1).rev() {
        let (vals, vecs) = model.adiabatic_decomposition(r_grid[k]);
        let overlap = prev.transpose() * &vecs;
        let assign = greedy_assignment(&overlap);
        let mut next = DMatrix::zeros(n, n);
        let mut worst = T::one();
        for (c, &j) in assign.iter().enumerate() {
            curves[c][k] = vals[j];
            let mut col = vecs.column(j).clone_owned();
            // Fix the sign so consecutive overlaps are positive.
            if overlap[(c, j)] < T::zero() {
                col.neg_mut();
            }
            next.set_column(c, &col);
            worst = worst.min(overlap[(c, j)].abs());
        }
        step_overlap[k] = worst;
        if worst < lit(AMBIGUOUS_OVERLAP) {
            coarse = true;
        }
        prev = next;
    }
    Ok(AdiabatCurves {
        r: r_grid.to_vec(),
        curves,
        asymptotic_l,
        step_overlap,
        coarse_grid: coarse,
    })
}

/// Pairs rows (previous states) with columns (new states) by repeatedly
/// taking the largest remaining |overlap|; ties go to the lower eigenvalue
/// (smaller column index).
fn greedy_assignment<T: Real>(overlap: &DMatrix<T>) -> Vec<usize> {
    let n = overlap.nrows();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|&(i1, j1), &(i2, j2)| {
        let a = overlap[(i1, j1)].abs();
        let b = overlap[(i2, j2)].abs();
        b.partial_cmp(&a)
            .expect("finite overlaps")
            .then(j1.cmp(&j2))
            .then(i1.cmp(&i2))
    });
    let mut row_done = vec![false; n];
    let mut col_done = vec![false; n];
    let mut out = vec![usize::MAX; n];
    let mut left = n;
    for (i, j) in pairs {
        if left == 0 {
            break;
        }
        if row_done[i] || col_done[j] {
            continue;
        }
        row_done[i] = true;
        col_done[j] = true;
        out[i] = j;
        left -= 1;
    }
    out
}

/// The `index`-th (ascending) adiabat of a model as a one-channel radial
/// problem, without nonadiabatic corrections.
#[derive(Debug, Clone)]
pub struct SingleAdiabat<'a, T: Real> {
    pub model: &'a InteractionModel<T>,
    pub index: usize,
}

impl<'a, T: Real> RadialProblem<T> for SingleAdiabat<'a, T> {
    fn dim(&self) -> usize {
        1
    }

    fn mass(&self) -> T {
        self.model.mass()
    }

    fn potential_into(&self, r: T, out: &mut DMatrix<T>) {
        out[(0, 0)] = self.model.adiabatic_energies(r)[self.index];
    }

    fn descriptor(&self) -> String {
        format!("adiabat{}/{}", self.index, self.model.basis().descriptor())
    }

    fn l_max(&self) -> Option<u32> {
        Some(self.model.basis().l_max())
    }
}
