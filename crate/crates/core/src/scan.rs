//! Parameter sweeps: bound states versus wall position, well depth or
//! dipole moment, node counts versus the WKB estimate, and CSV output.
//!
//! Points are independent work items (no state following across points);
//! they run on a bounded rayon pool and are merged back in axis order, so
//! output does not depend on the worker count.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::basis::{build_basis, ChannelBasis, Parity};
use crate::bound::{dominant_partial_wave, find_bound_states, threshold_count, BoundStateSearch, Parameter};
use crate::error::{invalid, Error, Result};
use crate::potential::{AdiabatCurves, InteractionModel};
use crate::propagate::{LongRangeMethod, PropagationGrid};
use crate::units::{compute_scales, hartree_to_cm, hartree_to_hz, Moment, PhysicalSystem};
use crate::wkb::{wkb_counts, PhaseIntegralResult};

/// Model with one field left to the scan.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelTemplate {
    /// Reduced units (lengths in `R_dip`, energies in `E_dip`).
    HardWall { r_min: f64 },
    /// Atomic units. `r_min = None` uses the default wall inside the repulsion.
    LennardJones { system: PhysicalSystem, r_min: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParameter {
    /// Wall radius: reduced for the hard wall, `a0` for Lennard-Jones.
    RMin,
    /// Lennard-Jones well depth, cm^-1.
    WellDepth,
    /// Electric dipole of each particle, Debye.
    Dipole,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::RMin => "r_min",
            ScanParameter::WellDepth => "de_cm",
            ScanParameter::Dipole => "dipole_debye",
        }
    }
}

/// Coordinate in which points are spaced uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Linear,
    /// `x = value^-1/2`; for the hard wall this is proportional to `d`.
    InverseSqrt,
    /// `x = log10(value)`.
    Log10,
}

impl Axis {
    pub fn to_value(self, x: f64) -> f64 {
        match self {
            Axis::Linear => x,
            Axis::InverseSqrt => 1.0 / (x * x),
            Axis::Log10 => 10f64.powf(x),
        }
    }

    pub fn label(self, p: ScanParameter) -> String {
        match self {
            Axis::Linear => p.name().to_string(),
            Axis::InverseSqrt => format!("{}^-1/2", p.name()),
            Axis::Log10 => format!("log10 {}", p.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Points {
    Uniform(usize),
    /// Start uniform, then bisect intervals where some state moves by more
    /// than `max_fraction` of the window (or the state count changes), up
    /// to `max_depth` times.
    Adaptive { initial: usize, max_fraction: f64, max_depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    pub parity: Parity,
    pub ml: i32,
    pub l_max: u32,
}

impl BasisSpec {
    pub fn build(&self) -> Result<ChannelBasis> {
        build_basis(self.parity, self.ml, self.l_max)
    }
}

/// Unit of the energy window and of the energies written out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyUnit {
    /// Model units: `E_dip` for the hard wall, hartree for Lennard-Jones.
    Native,
    Hartree,
    Wavenumber,
    Megahertz,
    /// `E_6` of the Lennard-Jones tail.
    E6,
    /// `E_dip` of the pair.
    EDip,
}

impl EnergyUnit {
    pub fn name(self) -> &'static str {
        match self {
            EnergyUnit::Native => "native",
            EnergyUnit::Hartree => "hartree",
            EnergyUnit::Wavenumber => "cm-1",
            EnergyUnit::Megahertz => "MHz",
            EnergyUnit::E6 => "E6",
            EnergyUnit::EDip => "E_dip",
        }
    }
}

/// Optional replacements for the model-derived grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridOverrides {
    pub r_match: Option<f64>,
    pub r_mid: Option<f64>,
    pub r_max: Option<f64>,
    pub dr: Option<f64>,
    pub long_range: Option<LongRangeMethod>,
}

impl GridOverrides {
    pub fn apply(&self, mut g: PropagationGrid<f64>) -> Result<PropagationGrid<f64>> {
        if let Some(v) = self.r_match {
            g.r_match = v;
        }
        if let Some(v) = self.r_mid {
            g.r_mid = v;
        }
        if let Some(v) = self.r_max {
            g.r_max = v;
        }
        if let Some(v) = self.dr {
            g.dr = v;
        }
        if let Some(m) = self.long_range {
            g.long_range = m;
        }
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub model: ModelTemplate,
    pub parameter: ScanParameter,
    pub axis: Axis,
    /// Range of the axis coordinate.
    pub range: (f64, f64),
    pub points: Points,
    /// Each point is solved in every basis (e.g. both `M_L` sub-scans).
    pub bases: Vec<BasisSpec>,
    pub energy_unit: EnergyUnit,
    /// `[E_lo, E_hi)` in `energy_unit`; `E_hi < 0`. Needed for state
    /// searches, not for counts.
    pub window: Option<(f64, f64)>,
    /// Energy tolerance in `energy_unit`.
    pub tol_e: f64,
    pub grid: GridOverrides,
    /// How far below threshold "0-" is, in `energy_unit`. Defaults to
    /// `1e-9 E_dip` (hard wall) or `1e-6 E_6` (Lennard-Jones).
    pub zero_offset: Option<f64>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo < hi) {
            return Err(invalid("scan range needs lo < hi"));
        }
        if self.axis == Axis::InverseSqrt && !(lo > 0.0) {
            return Err(invalid("an inverse-sqrt axis needs a positive range"));
        }
        match self.points {
            Points::Uniform(n) if n < 2 => return Err(invalid("a scan needs at least 2 points")),
            Points::Adaptive { initial, max_fraction, .. } if initial < 2 || !(max_fraction > 0.0) => {
                return Err(invalid("adaptive scan needs initial >= 2 and max_fraction > 0"))
            }
            _ => {}
        }
        if self.bases.is_empty() {
            return Err(invalid("scan needs at least one basis"));
        }
        if let Some((e_lo, e_hi)) = self.window {
            if !(e_lo < e_hi && e_hi < 0.0) {
                return Err(invalid("energy window must satisfy E_lo < E_hi < 0"));
            }
        }
        if !(self.tol_e > 0.0) {
            return Err(invalid("tol_e must be positive"));
        }
        if let Some(z) = self.zero_offset {
            if !(z > 0.0) {
                return Err(invalid("zero_offset must be positive"));
            }
        }
        match (&self.model, self.parameter) {
            (ModelTemplate::HardWall { .. }, ScanParameter::RMin) => {}
            (ModelTemplate::HardWall { .. }, p) => {
                return Err(invalid(format!("the reduced hard-wall model cannot scan {}", p.name())));
            }
            _ => {}
        }
        Ok(())
    }

    fn initial_axis(&self) -> Vec<f64> {
        let n = match self.points {
            Points::Uniform(n) => n,
            Points::Adaptive { initial, .. } => initial,
        };
        let (lo, hi) = self.range;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Model of one point, and the factor converting native energies to
    /// `energy_unit`.
    pub fn model_at(&self, value: f64, basis: &BasisSpec) -> Result<(InteractionModel<f64>, f64)> {
        let b = basis.build()?;
        match &self.model {
            ModelTemplate::HardWall { r_min } => {
                let r = if self.parameter == ScanParameter::RMin { value } else { *r_min };
                let factor = match self.energy_unit {
                    EnergyUnit::Native | EnergyUnit::EDip => 1.0,
                    u => return Err(invalid(format!("energy unit {} needs a physical model", u.name()))),
                };
                Ok((InteractionModel::hard_wall(b, r)?, factor))
            }
            ModelTemplate::LennardJones { system, r_min } => {
                let mut sys = system.clone();
                let mut wall = *r_min;
                match self.parameter {
                    ScanParameter::RMin => wall = Some(value),
                    ScanParameter::WellDepth => sys.de_cm = Some(value),
                    ScanParameter::Dipole => {
                        sys.moment1 = Moment::debye(value);
                        sys.moment2 = Moment::debye(value);
                    }
                }
                let scales = compute_scales(&sys)?;
                let factor = match self.energy_unit {
                    EnergyUnit::Native | EnergyUnit::Hartree => 1.0,
                    EnergyUnit::Wavenumber => hartree_to_cm(1.0),
                    EnergyUnit::Megahertz => hartree_to_hz(1.0) * 1e-6,
                    EnergyUnit::E6 => 1.0 / scales.e6,
                    EnergyUnit::EDip if scales.has_dipole() => 1.0 / scales.e_dip,
                    EnergyUnit::EDip => return Err(invalid("E_dip is undefined without dipoles")),
                };
                Ok((InteractionModel::from_physical(&sys, b, wall)?, factor))
            }
        }
    }

    fn grid_for(&self, model: &InteractionModel<f64>) -> Result<PropagationGrid<f64>> {
        self.grid.apply(PropagationGrid::for_model(model)?)
    }

    /// "0-" in native units.
    fn zero_offset_native(&self, factor: f64) -> Result<f64> {
        if let Some(z) = self.zero_offset {
            return Ok(z / factor);
        }
        Ok(match &self.model {
            ModelTemplate::HardWall { .. } => 1e-9,
            ModelTemplate::LennardJones { system, .. } => {
                let mut sys = system.clone();
                sys.de_cm = None;
                1e-6 * compute_scales(&sys)?.e6
            }
        })
    }

    /// Provenance lines describing the scan (without the `#` prefix).
    pub fn describe(&self) -> Vec<String> {
        let mut out = vec![
            format!("model: {:?}", self.model),
            format!("parameter: {} on axis {} in [{:e}, {:e}], points {:?}", self.parameter.name(), self.axis.label(self.parameter), self.range.0, self.range.1, self.points),
        ];
        for b in &self.bases {
            out.push(format!("basis: parity {:?}, M_L {}, L_max {}", b.parity, b.ml, b.l_max));
        }
        let window = match self.window {
            Some((lo, hi)) => format!("[{lo:e}, {hi:e})"),
            None => "none".into(),
        };
        out.push(format!("energy: unit {}, window {window}, tol_e {:e}, zero_offset {:?}", self.energy_unit.name(), self.tol_e, self.zero_offset));
        out.push(format!("grid overrides: {:?}", self.grid));
        out
    }
}

/// Result of one (point, basis) work item.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub x: f64,
    pub parameter: Parameter,
    pub basis: String,
    /// Energies in the spec's unit.
    pub search: std::result::Result<BoundStateSearch<f64>, Error>,
    /// Dominant partial wave of each state (None where it could not be read).
    pub dominant_l: Vec<Option<u32>>,
}

/// Suspicious step between neighbouring points of one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpFlag {
    pub x: f64,
    pub basis: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub parameter: ScanParameter,
    pub axis: Axis,
    pub energy_unit: EnergyUnit,
    /// Sorted by axis coordinate, then by basis order of the spec.
    pub points: Vec<PointResult>,
    pub flags: Vec<JumpFlag>,
}

/// Bound states at one axis coordinate in one basis.
pub fn solve_point(spec: &ScanSpec, x: f64, basis: &BasisSpec) -> PointResult {
    let value = spec.axis.to_value(x);
    let parameter = Parameter { name: spec.parameter.name().to_string(), value };
    let mut descriptor = format!("{:?}/ML{}/Lmax{}", basis.parity, basis.ml, basis.l_max);
    let mut dominant_l = Vec::new();
    let search = (|| {
        let (model, factor) = spec.model_at(value, basis)?;
        descriptor = model.basis().descriptor();
        let grid = spec.grid_for(&model)?;
        let (lo, hi) = spec.window.ok_or_else(|| invalid("a state search needs an energy window"))?;
        let (e_lo, e_hi) = (lo / factor, hi / factor);
        let mut s = find_bound_states(&model, &grid, e_lo, e_hi, spec.tol_e / factor)?;
        let closed = grid.closed_at(&model, e_hi)?;
        dominant_l = s.states.iter().map(|r| dominant_partial_wave(&model, r.energy, &closed).ok()).collect();
        for r in &mut s.states {
            r.energy *= factor;
            r.tolerance *= factor;
            r.parameter = Some(parameter.clone());
        }
        Ok(s)
    })();
    PointResult { x, parameter, basis: descriptor, search, dominant_l }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("worker pool: {e}")))
}

fn solve_all(spec: &ScanSpec, xs: &[f64], pool: &rayon::ThreadPool) -> Vec<PointResult> {
    let items: Vec<(f64, &BasisSpec)> = xs.iter().flat_map(|&x| spec.bases.iter().map(move |b| (x, b))).collect();
    pool.install(|| items.par_iter().map(|&(x, b)| solve_point(spec, x, b)).collect())
}

fn energies(p: &PointResult) -> Option<Vec<f64>> {
    p.search.as_ref().ok().map(|s| s.states.iter().map(|r| r.energy).collect())
}

/// Whether the interval between two results of the same basis needs a
/// midpoint.
fn needs_refinement(a: &PointResult, b: &PointResult, threshold: f64) -> bool {
    match (energies(a), energies(b)) {
        (Some(ea), Some(eb)) => {
            ea.len() != eb.len() || ea.iter().rev().zip(eb.iter().rev()).any(|(u, v)| (u - v).abs() > threshold)
        }
        _ => false,
    }
}

/// Bound states at every point of the scan, in every basis.
pub fn run_scan(spec: &ScanSpec, workers: usize) -> Result<ScanTable> {
    spec.validate()?;
    if spec.window.is_none() {
        return Err(invalid("a state scan needs an energy window"));
    }
    let pool = pool(workers)?;
    let nb = spec.bases.len();
    let mut xs = spec.initial_axis();
    let mut results = solve_all(spec, &xs, &pool);

    if let Points::Adaptive { max_fraction, max_depth, .. } = spec.points {
        let threshold = spec.window.map_or(f64::INFINITY, |(lo, hi)| max_fraction * (hi - lo));
        for _ in 0..max_depth {
            let mut mids = Vec::new();
            for i in 0..xs.len() - 1 {
                let refine = (0..nb).any(|k| needs_refinement(&results[i * nb + k], &results[(i + 1) * nb + k], threshold));
                if refine {
                    mids.push(0.5 * (xs[i] + xs[i + 1]));
                }
            }
            if mids.is_empty() {
                break;
            }
            let extra = solve_all(spec, &mids, &pool);
            let mut merged: Vec<(f64, Vec<PointResult>)> = results.chunks(nb).map(|c| (c[0].x, c.to_vec())).collect();
            merged.extend(extra.chunks(nb).map(|c| (c[0].x, c.to_vec())));
            merged.sort_by(|a, b| a.0.total_cmp(&b.0));
            xs = merged.iter().map(|m| m.0).collect();
            results = merged.into_iter().flat_map(|m| m.1).collect();
        }
    }

    let flags = detect_jumps(&results, nb, spec.tol_e);
    Ok(ScanTable { parameter: spec.parameter, axis: spec.axis, energy_unit: spec.energy_unit, points: results, flags })
}

/// Flags steps more than ten times the local trend (a probable missed or
/// spurious state) and threshold counts that change by more than one
/// between neighbouring points. States are aligned from threshold down.
pub fn detect_jumps(points: &[PointResult], n_bases: usize, tol_e: f64) -> Vec<JumpFlag> {
    let mut flags = Vec::new();
    for k in 0..n_bases {
        let series: Vec<&PointResult> = points.iter().skip(k).step_by(n_bases).collect();
        for w in series.windows(2) {
            if let (Ok(a), Ok(b)) = (&w[0].search, &w[1].search) {
                let (ca, cb) = (a.below + a.expected, b.below + b.expected);
                if ca.abs_diff(cb) > 1 {
                    flags.push(JumpFlag {
                        x: w[1].x,
                        basis: w[1].basis.clone(),
                        message: format!("count below E_hi changed {ca} -> {cb}; resolution loss"),
                    });
                }
            }
        }
        for w in series.windows(3) {
            let (Some(e0), Some(e1), Some(e2)) = (energies(w[0]), energies(w[1]), energies(w[2])) else {
                continue;
            };
            if e0.len() != e1.len() || e1.len() != e2.len() {
                continue;
            }
            let (h1, h2) = (w[1].x - w[0].x, w[2].x - w[1].x);
            for (j, ((a, b), c)) in e0.iter().rev().zip(e1.iter().rev()).zip(e2.iter().rev()).enumerate() {
                let trend = (b - a).abs() / h1;
                let step = (c - b).abs() / h2;
                if step > 10.0 * trend && (c - b).abs() > 100.0 * tol_e {
                    flags.push(JumpFlag {
                        x: w[2].x,
                        basis: w[2].basis.clone(),
                        message: format!("state {j} below threshold stepped {:e}, ten times its local trend", c - b),
                    });
                }
            }
        }
    }
    flags
}

/// Provenance header shared by every CSV.
pub fn header_lines(extra: &[String]) -> String {
    let mut s = format!("# dipbound {}\n", env!("CARGO_PKG_VERSION"));
    for l in extra {
        for line in l.lines() {
            let _ = writeln!(s, "# {line}");
        }
    }
    s
}

fn csv_body<F>(columns: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).map_err(csv_error)?;
    fill(&mut w).map_err(csv_error)?;
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| invalid(format!("csv: {e}")))
}

fn csv_error(e: csv::Error) -> Error {
    invalid(format!("csv: {e}"))
}

impl ScanTable {
    /// One row per state; points without states get an `empty` row and
    /// failed points an `error: ...` row.
    pub fn to_csv(&self, provenance: &[String]) -> Result<String> {
        let axis = self.axis.label(self.parameter);
        let energy = format!("energy_{}", self.energy_unit.name());
        let columns = ["x", "parameter", "basis", &energy, "node_index", "states_below", "dominant_l", "count_lo", "count_hi", "l_max", "dr", "tolerance", "status"];
        let mut extra = vec![format!("x = {axis}; parameter = {}", self.parameter.name())];
        extra.extend(provenance.iter().cloned());
        for f in &self.flags {
            extra.push(format!("flag: x = {:e}, {}: {}", f.x, f.basis, f.message));
        }
        let body = csv_body(&columns, |w| {
            for p in &self.points {
                let (x, v) = (format!("{:e}", p.x), format!("{:e}", p.parameter.value));
                match &p.search {
                    Err(e) => w.write_record([&x, &v, &p.basis, "", "", "", "", "", "", "", "", "", &format!("error: {e}")])?,
                    Ok(s) => {
                        let (lo, hi) = (s.below.to_string(), (s.below + s.expected).to_string());
                        if s.states.is_empty() {
                            w.write_record([&x, &v, &p.basis, "", "", "", "", &lo, &hi, "", "", "", "empty"])?;
                        }
                        let status = if s.complete { "ok" } else { "incomplete" };
                        for (i, r) in s.states.iter().enumerate() {
                            let label = p.dominant_l.get(i).copied().flatten().map(|l| l.to_string()).unwrap_or_default();
                            w.write_record([
                                &x,
                                &v,
                                &r.basis,
                                &format!("{:e}", r.energy),
                                &r.node_index.to_string(),
                                &r.states_below.to_string(),
                                &label,
                                &lo,
                                &hi,
                                &r.l_max.map(|l| l.to_string()).unwrap_or_default(),
                                &format!("{:e}", r.dr),
                                &format!("{:e}", r.tolerance),
                                status,
                            ])?;
                        }
                    }
                }
            }
            Ok(())
        })?;
        Ok(header_lines(&extra) + &body)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub x: f64,
    pub value: f64,
    pub basis: String,
    /// Node count at `0-`.
    pub nodes: std::result::Result<usize, Error>,
    /// WKB estimate over all adiabats (reduced hard-wall model only).
    pub wkb: Option<std::result::Result<PhaseIntegralResult, Error>>,
}

/// Node count at `0-` and the WKB total at every point of the scan.
pub fn count_vs_parameter(spec: &ScanSpec, workers: usize) -> Result<Vec<CountRow>> {
    spec.validate()?;
    let pool = pool(workers)?;
    let items: Vec<(f64, &BasisSpec)> = spec.initial_axis().into_iter().flat_map(|x| spec.bases.iter().map(move |b| (x, b))).collect();
    let rows = pool.install(|| {
        items
            .par_iter()
            .map(|&(x, b)| {
                let value = spec.axis.to_value(x);
                let built = spec.model_at(value, b);
                let basis = built.as_ref().map(|(m, _)| m.basis().descriptor()).unwrap_or_default();
                let nodes = built.as_ref().map_err(Clone::clone).and_then(|(m, factor)| {
                    let grid = spec.grid_for(m)?;
                    threshold_count(m, &grid, spec.zero_offset_native(*factor)?)
                });
                let wkb = match (&spec.model, &built) {
                    (ModelTemplate::HardWall { .. }, Ok((m, _))) => Some(wkb_counts(m, value, m.basis().len())),
                    (ModelTemplate::HardWall { .. }, Err(e)) => Some(Err(e.clone())),
                    _ => None,
                };
                CountRow { x, value, basis, nodes, wkb }
            })
            .collect()
    });
    Ok(rows)
}

/// Count table; `n_v_d` adiabats also get their `v_D` column.
pub fn counts_to_csv(spec: &ScanSpec, rows: &[CountRow], n_v_d: usize, provenance: &[String]) -> Result<String> {
    let mut columns: Vec<String> = ["x", "parameter", "basis", "node_count", "wkb_total"].iter().map(|c| c.to_string()).collect();
    columns.extend((0..n_v_d).map(|i| format!("v_d_{i}")));
    columns.push("status".into());
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut extra = vec![format!("x = {}; parameter = {}", spec.axis.label(spec.parameter), spec.parameter.name())];
    extra.extend(provenance.iter().cloned());
    let body = csv_body(&columns, |w| {
        for r in rows {
            let mut errors = Vec::new();
            let nodes = match &r.nodes {
                Ok(n) => n.to_string(),
                Err(e) => {
                    errors.push(format!("nodes: {e}"));
                    String::new()
                }
            };
            let mut v_d = vec![String::new(); n_v_d];
            let wkb = match &r.wkb {
                Some(Ok(p)) => {
                    for (slot, v) in v_d.iter_mut().zip(&p.v_d) {
                        *slot = format!("{v:e}");
                    }
                    p.total.to_string()
                }
                Some(Err(e)) => {
                    errors.push(format!("wkb: {e}"));
                    String::new()
                }
                None => String::new(),
            };
            let status = if errors.is_empty() { "ok".to_string() } else { format!("error: {}", errors.join("; ")) };
            let mut row = vec![format!("{:e}", r.x), format!("{:e}", r.value), r.basis.clone(), nodes, wkb];
            row.extend(v_d);
            row.push(status);
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    Ok(header_lines(&extra) + &body)
}

/// Adiabats as columns, with the lowest one also multiplied by `r^3` and
/// `r^4`.
pub fn adiabats_to_csv(curves: &AdiabatCurves<f64>, provenance: &[String]) -> Result<String> {
    let n = curves.curves.len();
    let mut columns: Vec<String> = vec!["r".into()];
    columns.extend((0..n).map(|i| format!("eps_{i}")));
    columns.push("eps0_r3".into());
    columns.push("eps0_r4".into());
    let mut extra = provenance.to_vec();
    extra.push(format!("asymptotic L: {:?}", curves.asymptotic_l));
    if curves.coarse_grid {
        extra.push("warning: some grid steps could not be assigned unambiguously".into());
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let body = csv_body(&cols, |w| {
        for (k, &r) in curves.r.iter().enumerate() {
            let mut row: Vec<String> = vec![format!("{r:e}")];
            row.extend(curves.curves.iter().map(|c| format!("{:e}", c[k])));
            let e0 = curves.curves.first().map(|c| c[k]).unwrap_or(f64::NAN);
            row.push(format!("{:e}", e0 * r.powi(3)));
            row.push(format!("{:e}", e0 * r.powi(4)));
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    Ok(header_lines(&extra) + &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall_spec(range: (f64, f64), points: Points) -> ScanSpec {
        ScanSpec {
            model: ModelTemplate::HardWall { r_min: 0.1 },
            parameter: ScanParameter::RMin,
            axis: Axis::InverseSqrt,
            range,
            points,
            bases: vec![BasisSpec { parity: Parity::Even, ml: 0, l_max: 8 }],
            energy_unit: EnergyUnit::Native,
            window: Some((-500.0, -1e-6)),
            tol_e: 1e-8,
            grid: GridOverrides::default(),
            zero_offset: None,
        }
    }

    #[test]
    fn spec_validation() {
        let good = wall_spec((1.0, 3.0), Points::Uniform(3));
        assert!(good.validate().is_ok());
        let mut s = good.clone();
        s.range = (3.0, 1.0);
        assert!(s.validate().is_err());
        let mut s = good.clone();
        s.points = Points::Uniform(1);
        assert!(s.validate().is_err());
        let mut s = good.clone();
        s.window = Some((-1.0, 0.0));
        assert!(s.validate().is_err());
        let mut s = good;
        s.parameter = ScanParameter::WellDepth;
        assert!(s.validate().is_err());
    }

    #[test]
    fn inverse_sqrt_axis() {
        assert_eq!(Axis::InverseSqrt.to_value(2.0), 0.25);
        assert_eq!(Axis::InverseSqrt.label(ScanParameter::RMin), "r_min^-1/2");
    }

    #[test]
    fn failed_point_is_a_row_not_an_abort() {
        let mut s = wall_spec((1.0, 2.0), Points::Uniform(2));
        // matching radius inside the wall at x = 1 (r_min = 1) only
        s.grid.r_match = Some(0.5);
        s.grid.r_mid = Some(1.5);
        s.grid.r_max = Some(4.5);
        let t = run_scan(&s, 2).unwrap();
        assert!(t.points[0].search.is_err());
        assert!(t.points[1].search.is_ok());
        let csv = t.to_csv(&[]).unwrap();
        assert!(csv.contains("error: "));
    }

    #[test]
    fn output_does_not_depend_on_workers() {
        let s = wall_spec((1.0, 4.0), Points::Uniform(4));
        let a = run_scan(&s, 1).unwrap().to_csv(&s.describe()).unwrap();
        let b = run_scan(&s, 3).unwrap().to_csv(&s.describe()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adaptive_inserts_points_where_states_move() {
        let s = wall_spec((1.0, 4.0), Points::Adaptive { initial: 3, max_fraction: 0.01, max_depth: 2 });
        let t = run_scan(&s, 2).unwrap();
        assert!(t.points.len() > 3);
        assert!(t.points.windows(2).all(|w| w[0].x < w[1].x));
    }

    #[test]
    fn jump_detector_flags_outlier_step() {
        let point = |x: f64, e: f64| PointResult {
            x,
            parameter: Parameter { name: "r_min".into(), value: x },
            basis: "b".into(),
            search: Ok(BoundStateSearch {
                states: vec![crate::bound::BoundStateRecord {
                    parameter: None,
                    energy: e,
                    node_index: 0,
                    states_below: 0,
                    basis: "b".into(),
                    l_max: None,
                    dr: 1e-5,
                    tolerance: 1e-9,
                }],
                below: 0,
                expected: 1,
                complete: true,
                evaluations: 1,
            }),
            dominant_l: vec![Some(0)],
        };
        let smooth = [point(0.0, -1.0), point(1.0, -1.1), point(2.0, -1.2)];
        assert!(detect_jumps(&smooth, 1, 1e-8).is_empty());
        let jumpy = [point(0.0, -1.0), point(1.0, -1.1), point(2.0, -3.0)];
        assert_eq!(detect_jumps(&jumpy, 1, 1e-8).len(), 1);
    }

    #[test]
    fn far_wall_counts_nothing() {
        let mut s = wall_spec((10.0, 20.0), Points::Uniform(2));
        s.axis = Axis::Linear;
        let rows = count_vs_parameter(&s, 1).unwrap();
        for r in rows {
            assert_eq!(r.nodes.unwrap(), 0);
            assert_eq!(r.wkb.unwrap().unwrap().total, 0);
        }
    }
}
