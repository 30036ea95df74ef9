//! Physical constants, conversion to dipole units and the characteristic
//! length and energy scales of a dipolar pair.
//!
//! Internally everything is in atomic units (hbar = e = m_e = 4 pi eps0 = 1).

use crate::error::{invalid, Error, Result};

/// Fine-structure constant (CODATA 2018).
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
/// Bohr magneton in atomic units.
pub const BOHR_MAGNETON_AU: f64 = 0.5;
/// One Debye in e a0.
pub const DEBYE_AU: f64 = 0.393_430_307;
/// Unified atomic mass unit in electron masses.
pub const DALTON_AU: f64 = 1_822.888_486_209;
/// Hartree in Hz.
pub const HARTREE_HZ: f64 = 6.579_683_920_502e15;
/// Hartree in cm^-1.
pub const HARTREE_CM: f64 = 219_474.631_363_2;

pub fn debye_to_au(d: f64) -> f64 {
    d * DEBYE_AU
}

pub fn au_to_debye(d: f64) -> f64 {
    d / DEBYE_AU
}

pub fn cm_to_hartree(e: f64) -> f64 {
    e / HARTREE_CM
}

pub fn hartree_to_cm(e: f64) -> f64 {
    e * HARTREE_CM
}

pub fn hartree_to_hz(e: f64) -> f64 {
    e * HARTREE_HZ
}

pub fn mhz_to_hartree(f: f64) -> f64 {
    f * 1e6 / HARTREE_HZ
}

/// Effective electric dipole (e a0) of a magnetic moment given in Bohr
/// magnetons: d = mu / c, i.e. mu[au] * alpha in atomic units.
pub fn magnetic_to_electric_dipole(mu_bohr: f64) -> f64 {
    mu_bohr * BOHR_MAGNETON_AU * FINE_STRUCTURE
}

/// Rotational contribution to C6, `d^4 / (6 B)`, with `d` in e a0 and `b_rot`
/// in hartree. Result in E_h a0^6.
pub fn rotational_c6(d_lim: f64, b_rot: f64) -> Result<f64> {
    if !(b_rot > 0.0) || !b_rot.is_finite() {
        return Err(invalid(format!("rotational constant must be positive, got {b_rot}")));
    }
    Ok(d_lim.powi(4) / (6.0 * b_rot))
}

/// Dipole moment of one particle. Exactly one kind per particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    /// Electric dipole in e a0.
    Electric(f64),
    /// Magnetic dipole in Bohr magnetons.
    Magnetic(f64),
}

impl Moment {
    pub fn debye(d: f64) -> Self {
        Moment::Electric(debye_to_au(d))
    }

    pub fn bohr_magnetons(mu: f64) -> Self {
        Moment::Magnetic(mu)
    }

    /// Equivalent electric dipole in e a0.
    pub fn electric_au(self) -> f64 {
        match self {
            Moment::Electric(d) => d,
            Moment::Magnetic(mu) => magnetic_to_electric_dipole(mu),
        }
    }
}

/// A pair of dipolar particles in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSystem {
    pub moment1: Moment,
    pub moment2: Moment,
    /// Reduced mass in unified atomic mass units.
    pub reduced_mass_u: f64,
    /// Dispersion coefficient in E_h a0^6.
    pub c6: f64,
    /// Lennard-Jones well depth in cm^-1.
    pub de_cm: Option<f64>,
}

impl PhysicalSystem {
    pub fn validate(&self) -> Result<()> {
        if !(self.reduced_mass_u > 0.0) {
            return Err(invalid("reduced mass must be positive"));
        }
        if !(self.c6 >= 0.0) {
            return Err(invalid("C6 must be nonnegative"));
        }
        if let Some(de) = self.de_cm {
            if !(de >= 0.0) {
                return Err(invalid("well depth must be nonnegative"));
            }
        }
        for m in [self.moment1, self.moment2] {
            let v = match m {
                Moment::Electric(v) | Moment::Magnetic(v) => v,
            };
            if !v.is_finite() {
                return Err(invalid("dipole moments must be finite"));
            }
        }
        Ok(())
    }

    pub fn mass_au(&self) -> f64 {
        self.reduced_mass_u * DALTON_AU
    }

    /// Product d1 d2 of the effective electric dipoles, in (e a0)^2.
    pub fn dipole_product(&self) -> f64 {
        self.moment1.electric_au() * self.moment2.electric_au()
    }

    /// Copy with both dipoles multiplied by `factor`.
    pub fn with_dipoles_scaled(&self, factor: f64) -> Self {
        let scale = |m: Moment| match m {
            Moment::Electric(d) => Moment::Electric(d * factor),
            Moment::Magnetic(mu) => Moment::Magnetic(mu * factor),
        };
        PhysicalSystem {
            moment1: scale(self.moment1),
            moment2: scale(self.moment2),
            ..self.clone()
        }
    }

    /// Bosonic 162Dy with the dispersion coefficient used for the magnetic
    /// atom calculations.
    pub fn dysprosium() -> Self {
        PhysicalSystem {
            moment1: Moment::Magnetic(9.93),
            moment2: Moment::Magnetic(9.93),
            reduced_mass_u: 81.96,
            c6: 2003.0,
            de_cm: None,
        }
    }
}

/// Characteristic scales of a dipolar pair, atomic units unless suffixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub r_dip: f64,
    /// Infinite when the dipole product vanishes.
    pub e_dip: f64,
    pub r6: f64,
    pub e6: f64,
    pub r4: f64,
    /// Repulsive Lennard-Jones coefficient, present when a well depth is given.
    pub c12: Option<f64>,
}

impl Scales {
    pub fn has_dipole(&self) -> bool {
        self.r_dip > 0.0
    }

    pub fn e_dip_hz(&self) -> f64 {
        hartree_to_hz(self.e_dip)
    }

    pub fn e6_hz(&self) -> f64 {
        hartree_to_hz(self.e6)
    }
}

/// `R_4 / R_dip`.
pub fn r4_ratio() -> f64 {
    (8.0f64 / 15.0).sqrt()
}

/// `C12` for a Lennard-Jones well of depth `de` (hartree) and tail `c6`.
pub fn lj_c12(c6: f64, de: f64) -> Result<f64> {
    if !(de > 0.0) {
        return Err(invalid("well depth must be positive to define C12"));
    }
    Ok(c6 * c6 / (4.0 * de))
}

pub fn compute_scales(sys: &PhysicalSystem) -> Result<Scales> {
    sys.validate()?;
    let mass = sys.mass_au();
    let r_dip = mass * sys.dipole_product().abs();
    let e_dip = if r_dip > 0.0 {
        1.0 / (mass * r_dip * r_dip)
    } else {
        f64::INFINITY
    };
    let r6 = (2.0 * mass * sys.c6).powf(0.25);
    let e6 = if r6 > 0.0 {
        1.0 / (2.0 * mass * r6 * r6)
    } else {
        f64::INFINITY
    };
    let c12 = match sys.de_cm {
        Some(de) if de > 0.0 => Some(lj_c12(sys.c6, cm_to_hartree(de))?),
        _ => None,
    };
    Ok(Scales {
        r_dip,
        e_dip,
        r6,
        e6,
        r4: r4_ratio() * r_dip,
        c12,
    })
}

/// One line of the molecule parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeRecord {
    pub name: String,
    pub dipole_debye: f64,
    /// Molecular mass in u; the pair reduced mass is half of it.
    pub mass_u: f64,
    pub b_rot_mhz: f64,
}

impl MoleculeRecord {
    pub fn c6(&self) -> Result<f64> {
        rotational_c6(debye_to_au(self.dipole_debye), mhz_to_hartree(self.b_rot_mhz))
    }

    /// Identical-molecule pair at the limiting (molecule-fixed) dipole.
    pub fn pair(&self) -> Result<PhysicalSystem> {
        Ok(PhysicalSystem {
            moment1: Moment::debye(self.dipole_debye),
            moment2: Moment::debye(self.dipole_debye),
            reduced_mass_u: 0.5 * self.mass_u,
            c6: self.c6()?,
            de_cm: None,
        })
    }
}

const BUILTIN_MOLECULES: &str = include_str!("../data/molecules.dat");

pub fn builtin_molecules() -> Vec<MoleculeRecord> {
    parse_molecules(BUILTIN_MOLECULES).expect("bundled molecule table parses")
}

/// Parse `name d[D] mass[u] B_rot[MHz]` records; `#` starts a comment.
pub fn parse_molecules(text: &str) -> Result<Vec<MoleculeRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| Error::Data { line: i + 1, msg };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |k: usize, what: &str| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|_| err(format!("bad {what} `{}`", fields[k])))
        };
        let rec = MoleculeRecord {
            name: fields[0].to_string(),
            dipole_debye: num(1, "dipole")?,
            mass_u: num(2, "mass")?,
            b_rot_mhz: num(3, "rotational constant")?,
        };
        if !(rec.mass_u > 0.0) || !(rec.b_rot_mhz > 0.0) || !(rec.dipole_debye >= 0.0) {
            return Err(err(format!("nonphysical parameters for {}", rec.name)));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn find_molecule<'a>(table: &'a [MoleculeRecord], name: &str) -> Option<&'a MoleculeRecord> {
    table.iter().find(|m| m.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn magnetic_dipole_conversion() {
        assert_eq!(magnetic_to_electric_dipole(0.0), 0.0);
        assert_relative_eq!(magnetic_to_electric_dipole(1.0), FINE_STRUCTURE / 2.0);
        assert_relative_eq!(magnetic_to_electric_dipole(9.93), 0.036231, max_relative = 1e-4);
    }

    #[test]
    fn dysprosium_scales() {
        let s = compute_scales(&PhysicalSystem::dysprosium()).unwrap();
        assert!((s.r_dip / 196.0 - 1.0).abs() < 0.01, "{}", s.r_dip);
        assert!((s.r6 / 154.0 - 1.0).abs() < 0.02, "{}", s.r6);
        assert_relative_eq!(s.e_dip * s.mass_scale_check(), 1.0, max_relative = 1e-12);
    }

    impl Scales {
        fn mass_scale_check(&self) -> f64 {
            PhysicalSystem::dysprosium().mass_au() * self.r_dip * self.r_dip
        }
    }

    #[test]
    fn zero_dipole_has_no_dipole_energy() {
        let mut sys = PhysicalSystem::dysprosium();
        sys.moment1 = Moment::Electric(0.0);
        sys.moment2 = Moment::Electric(0.0);
        let s = compute_scales(&sys).unwrap();
        assert_eq!(s.r_dip, 0.0);
        assert_eq!(s.r4, 0.0);
        assert!(s.e_dip.is_infinite());
        assert!(!s.has_dipole());
    }

    #[test]
    fn rotational_c6_rules() {
        assert!(rotational_c6(1.0, 0.0).is_err());
        assert!(rotational_c6(1.0, -1.0).is_err());
        assert_eq!(rotational_c6(0.0, 1e-7).unwrap(), 0.0);
        let a = rotational_c6(0.3, 1e-7).unwrap();
        let b = rotational_c6(0.6, 1e-7).unwrap();
        assert_relative_eq!(b / a, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn krb_table_row() {
        let table = builtin_molecules();
        assert_eq!(table.len(), 6);
        let krb = find_molecule(&table, "krb").unwrap();
        let c6 = krb.c6().unwrap();
        assert!((c6 / 2.4e3 - 1.0).abs() < 0.10, "{c6}");
        let s = compute_scales(&krb.pair().unwrap()).unwrap();
        assert!((s.r_dip / 5.7e3 - 1.0).abs() < 0.05, "{}", s.r_dip);
        assert!((s.e_dip_hz() / 1725.0 - 1.0).abs() < 0.05, "{}", s.e_dip_hz());
    }

    #[test]
    fn molecule_file_errors_carry_line_numbers() {
        let err = parse_molecules("# header\nKRb 0.57 126.9\n").unwrap_err();
        assert_eq!(err, Error::Data { line: 2, msg: "expected 4 fields, found 3".into() });
        assert!(parse_molecules("X 1.0 abc 10\n").is_err());
        assert!(parse_molecules("X 1.0 10 -5\n").is_err());
    }

    #[test]
    fn c12_from_well_depth() {
        let c12 = lj_c12(2003.0, 0.003).unwrap();
        assert_relative_eq!(2003.0f64.powi(2) / (4.0 * c12), 0.003, max_relative = 1e-14);
        assert!(lj_c12(1.0, 0.0).is_err());
    }
}
