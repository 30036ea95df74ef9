//! Run configuration: a TOML file with one model, basis, grid and energy
//! block, plus the block of the chosen subcommand.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use dipbound::basis::{auto_l_max, Parity};
use dipbound::propagate::LongRangeMethod;
use dipbound::scan::{Axis, BasisSpec, EnergyUnit, GridOverrides, ModelTemplate, ScanParameter};
use dipbound::units::{builtin_molecules, compute_scales, find_molecule, parse_molecules, Moment, PhysicalSystem};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Scales,
    Adiabats,
    Wkb,
    Bound,
    Scatlen,
    Scan,
}

/// Declared once per file; must agree with the model variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Lengths in `R_dip`, energies in `E_dip`.
    Reduced,
    /// Hartree atomic units (lengths in `a0`).
    Atomic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    HardWall,
    LennardJones,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub model: ModelConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabats: Option<AdiabatsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wkb: Option<WkbConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatlen: Option<ScatlenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: VariantKind,
    /// Wall radius (`R_dip` reduced, `a0` atomic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    /// `Dy` or a molecule of the parameter table; explicit fields override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub molecule_file: Option<PathBuf>,
    /// Magnetic moment of each particle, Bohr magnetons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnetic_moment: Option<f64>,
    /// Electric dipole of each particle, Debye.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_debye: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_mass_u: Option<f64>,
    /// `E_h a0^6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de_cm: Option<f64>,
    /// Multiplies both dipoles; 0 switches the dipole interaction off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LMax {
    Fixed(u32),
    /// Must be the word `auto`.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityName {
    Even,
    Odd,
}

impl From<ParityName> for Parity {
    fn from(p: ParityName) -> Self {
        match p {
            ParityName::Even => Parity::Even,
            ParityName::Odd => Parity::Odd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub parity: ParityName,
    pub ml: i32,
    pub l_max: LMax,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { parity: ParityName::Even, ml: 0, l_max: LMax::Named("auto".into()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LongRangeName {
    Airy,
    StepDoubling,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_match: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_mid: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_range: Option<LongRangeName>,
    /// Error tolerance of the step-doubling long-range leg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnitName {
    Native,
    Hartree,
    #[serde(rename = "cm-1")]
    Wavenumber,
    #[serde(rename = "MHz")]
    Megahertz,
    #[serde(rename = "E6")]
    E6,
    #[serde(rename = "E_dip")]
    EDip,
}

impl From<EnergyUnitName> for EnergyUnit {
    fn from(u: EnergyUnitName) -> Self {
        match u {
            EnergyUnitName::Native => EnergyUnit::Native,
            EnergyUnitName::Hartree => EnergyUnit::Hartree,
            EnergyUnitName::Wavenumber => EnergyUnit::Wavenumber,
            EnergyUnitName::Megahertz => EnergyUnit::Megahertz,
            EnergyUnitName::E6 => EnergyUnit::E6,
            EnergyUnitName::EDip => EnergyUnit::EDip,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub unit: EnergyUnitName,
    /// `[E_lo, E_hi]` with `E_hi < 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_offset: Option<f64>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig { unit: EnergyUnitName::Native, window: None, tol: 1e-8, zero_offset: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabatsConfig {
    pub r: [f64; 2],
    pub points: usize,
    pub spacing: Spacing,
    /// Number of curves written (lowest first); all by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WkbConfig {
    /// Range of wall radii, log-spaced.
    pub r_min: [f64; 2],
    pub points: usize,
    /// Adiabats whose `v_D` is written; the total always uses all.
    #[serde(default = "default_wkb_report")]
    pub report: usize,
}

fn default_wkb_report() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatlenConfig {
    /// Outer radius in units of `R6`.
    pub r_end_r6: f64,
    /// Optional well-depth sweep `[lo, hi]` in cm^-1; the model depth otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de_cm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterName {
    RMin,
    DeCm,
    DipoleDebye,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Linear,
    InverseSqrt,
    Log10,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Bound states at every point.
    States,
    /// Node count at 0- (and the WKB total for the hard wall).
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveConfig {
    pub max_fraction: f64,
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub parameter: ParameterName,
    pub axis: AxisName,
    /// Range of the axis coordinate.
    pub range: [f64; 2],
    pub points: usize,
    pub mode: ScanMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveConfig>,
    /// Sub-scans; the top-level basis when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bases: Vec<BasisConfig>,
}

impl From<ParameterName> for ScanParameter {
    fn from(p: ParameterName) -> Self {
        match p {
            ParameterName::RMin => ScanParameter::RMin,
            ParameterName::DeCm => ScanParameter::WellDepth,
            ParameterName::DipoleDebye => ScanParameter::Dipole,
        }
    }
}

impl From<AxisName> for Axis {
    fn from(a: AxisName) -> Self {
        match a {
            AxisName::Linear => Axis::Linear,
            AxisName::InverseSqrt => Axis::InverseSqrt,
            AxisName::Log10 => Axis::Log10,
        }
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
}

fn missing(field: &str) -> ConfigError {
    ConfigError(format!("missing field `{field}` (no species preset supplies it)"))
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn check_units(&self) -> Result<(), ConfigError> {
        match (self.model.variant, self.units) {
            (VariantKind::HardWall, Units::Reduced) | (VariantKind::LennardJones, Units::Atomic) => Ok(()),
            (VariantKind::HardWall, Units::Atomic) => Err(ConfigError("`units`: the hard-wall model is defined in reduced units".into())),
            (VariantKind::LennardJones, Units::Reduced) => Err(ConfigError("`units`: the Lennard-Jones model is defined in atomic units".into())),
        }
    }

    /// Physical pair from the species preset and explicit fields.
    pub fn physical_system(&self) -> Result<PhysicalSystem, ConfigError> {
        let m = &self.model;
        let mut sys = match &m.species {
            Some(name) if name.eq_ignore_ascii_case("dy") => Some(PhysicalSystem::dysprosium()),
            Some(name) => {
                let table = match &m.molecule_file {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("`model.molecule_file` {}: {e}", path.display())))?;
                        parse_molecules(&text).map_err(|e| ConfigError(format!("`model.molecule_file` {}: {e}", path.display())))?
                    }
                    None => builtin_molecules(),
                };
                let rec = find_molecule(&table, name).ok_or_else(|| ConfigError(format!("`model.species`: unknown species `{name}`")))?;
                Some(rec.pair().map_err(|e| ConfigError(format!("`model.species`: {e}")))?)
            }
            None => None,
        };
        let moment = match (m.magnetic_moment, m.dipole_debye) {
            (Some(_), Some(_)) => return Err(ConfigError("give one of `model.magnetic_moment` and `model.dipole_debye`".into())),
            (Some(mu), None) => Some(Moment::bohr_magnetons(mu)),
            (None, Some(d)) => Some(Moment::debye(d)),
            (None, None) => None,
        };
        let base = match sys.take() {
            Some(s) => s,
            None => PhysicalSystem {
                moment1: moment.ok_or_else(|| missing("model.magnetic_moment` or `model.dipole_debye"))?,
                moment2: moment.ok_or_else(|| missing("model.magnetic_moment` or `model.dipole_debye"))?,
                reduced_mass_u: m.reduced_mass_u.ok_or_else(|| missing("model.reduced_mass_u"))?,
                c6: m.c6.ok_or_else(|| missing("model.c6"))?,
                de_cm: None,
            },
        };
        let mut sys = base;
        if let Some(mo) = moment {
            sys.moment1 = mo;
            sys.moment2 = mo;
        }
        if let Some(v) = m.reduced_mass_u {
            sys.reduced_mass_u = v;
        }
        if let Some(v) = m.c6 {
            sys.c6 = v;
        }
        if m.de_cm.is_some() {
            sys.de_cm = m.de_cm;
        }
        if let Some(f) = m.dipole_scale {
            sys = sys.with_dipoles_scaled(f);
        }
        sys.validate().map_err(|e| ConfigError(format!("`model`: {e}")))?;
        Ok(sys)
    }

    pub fn template(&self) -> Result<ModelTemplate, ConfigError> {
        self.check_units()?;
        match self.model.variant {
            VariantKind::HardWall => Ok(ModelTemplate::HardWall { r_min: self.model.r_min.ok_or_else(|| missing("model.r_min"))? }),
            VariantKind::LennardJones => Ok(ModelTemplate::LennardJones { system: self.physical_system()?, r_min: self.model.r_min }),
        }
    }

    /// Wall radius in units of `R_dip` (for the automatic `L_max`).
    fn reduced_wall(&self, wall: Option<f64>) -> Result<f64, ConfigError> {
        match self.model.variant {
            VariantKind::HardWall => wall.or(self.model.r_min).ok_or_else(|| missing("model.r_min")),
            VariantKind::LennardJones => {
                let sys = self.physical_system()?;
                let s = compute_scales(&sys).map_err(|e| ConfigError(format!("`model`: {e}")))?;
                if !s.has_dipole() {
                    return Err(ConfigError("`basis.l_max = \"auto\"` needs a dipole; set `l_max`".into()));
                }
                let wall = match wall.or(self.model.r_min) {
                    Some(w) => w,
                    None => {
                        let c12 = s.c12.ok_or_else(|| missing("model.de_cm"))?;
                        dipbound::potential::default_lj_wall(sys.c6, c12)
                    }
                };
                Ok(wall / s.r_dip)
            }
        }
    }

    /// `wall` is the smallest wall radius the run will use, when scanned.
    pub fn basis_spec(&self, b: &BasisConfig, wall: Option<f64>) -> Result<BasisSpec, ConfigError> {
        let parity: Parity = b.parity.into();
        let l_max = match &b.l_max {
            LMax::Fixed(l) => *l,
            LMax::Named(s) if s == "auto" => auto_l_max(self.reduced_wall(wall)?, parity, b.ml),
            LMax::Named(s) => return Err(ConfigError(format!("`basis.l_max`: expected an integer or \"auto\", found `{s}`"))),
        };
        Ok(BasisSpec { parity, ml: b.ml, l_max })
    }

    pub fn grid_overrides(&self) -> Result<GridOverrides, ConfigError> {
        let g = &self.grid;
        let long_range = match (g.long_range, g.step_tol) {
            (Some(LongRangeName::StepDoubling), tol) => Some(LongRangeMethod::StepDoubling { tol: tol.unwrap_or(1e-10) }),
            (Some(LongRangeName::Airy), None) => Some(LongRangeMethod::Airy),
            (Some(LongRangeName::Airy), Some(_)) => return Err(ConfigError("`grid.step_tol` applies to `long_range = \"step_doubling\"` only".into())),
            (None, Some(_)) => return Err(ConfigError("`grid.step_tol` needs `long_range = \"step_doubling\"`".into())),
            (None, None) => None,
        };
        Ok(GridOverrides { r_match: g.r_match, r_mid: g.r_mid, r_max: g.r_max, dr: g.dr, long_range })
    }

    pub fn window(&self) -> Result<(f64, f64), ConfigError> {
        let [lo, hi] = self.energy.window.ok_or_else(|| ConfigError("missing field `energy.window`".into()))?;
        if !(lo < hi && hi < 0.0) {
            return Err(ConfigError("`energy.window` must satisfy E_lo < E_hi < 0".into()));
        }
        Ok((lo, hi))
    }

    /// Applies `--lmax` to every basis block.
    pub fn override_l_max(&mut self, l: u32) {
        self.basis.l_max = LMax::Fixed(l);
        if let Some(scan) = &mut self.scan {
            for b in &mut scan.bases {
                b.l_max = LMax::Fixed(l);
            }
        }
    }
}
