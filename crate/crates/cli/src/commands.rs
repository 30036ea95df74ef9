//! One function per subcommand; each returns the finished CSV text.

use dipbound::basis::ChannelBasis;
use dipbound::bound::scattering_length;
use dipbound::potential::{adiabats, InteractionModel};
use dipbound::propagate::PropagationGrid;
use dipbound::scan::{
    adiabats_to_csv, count_vs_parameter, counts_to_csv, header_lines, run_scan, solve_point, Axis, Points, ScanParameter, ScanSpec, ScanTable,
};
use dipbound::units::compute_scales;

use crate::config::{RunConfig, ScanMode, Spacing, Subcommand, VariantKind};
use crate::{CliError, ConfigError, CONFIG_BEGIN, CONFIG_END};

/// Config echo plus any extra provenance, ready for the CSV header.
fn provenance(cfg: &RunConfig, extra: Vec<String>) -> Vec<String> {
    let mut out = vec![CONFIG_BEGIN.to_string()];
    out.extend(cfg.to_toml().lines().map(str::to_string));
    out.push(CONFIG_END.to_string());
    out.extend(extra);
    out
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
    block.as_ref().ok_or_else(|| ConfigError(format!("missing block `[{name}]`")))
}

/// Runs `sub` on `cfg` (already carrying flag overrides).
pub fn execute(cfg: &RunConfig, sub: Subcommand) -> Result<String, CliError> {
    cfg.check_units()?;
    match sub {
        Subcommand::Scales => scales(cfg),
        Subcommand::Adiabats => adiabat_table(cfg),
        Subcommand::Wkb => wkb(cfg),
        Subcommand::Bound => bound(cfg),
        Subcommand::Scatlen => scatlen(cfg),
        Subcommand::Scan => scan(cfg),
    }
}

fn workers(cfg: &RunConfig) -> usize {
    cfg.workers.unwrap_or(1)
}

fn scales(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.model.variant != VariantKind::LennardJones {
        return Err(ConfigError("`scales` needs a physical (Lennard-Jones, atomic-unit) model".into()).into());
    }
    let sys = cfg.physical_system()?;
    let s = compute_scales(&sys)?;
    let f = |v: f64| format!("{v:e}");
    let row = vec![
        f(s.r_dip),
        f(s.e_dip),
        f(s.e_dip_hz()),
        f(s.r6),
        f(s.e6),
        f(s.e6_hz()),
        f(s.r4),
        s.c12.map(f).unwrap_or_default(),
    ];
    let body = csv_table(&["r_dip_a0", "e_dip_hartree", "e_dip_hz", "r6_a0", "e6_hartree", "e6_hz", "r4_a0", "c12"], &[row])?;
    Ok(header_lines(&provenance(cfg, vec![format!("system: {sys:?}")])) + &body)
}

fn model_with(cfg: &RunConfig, basis: ChannelBasis, wall: Option<f64>) -> Result<InteractionModel<f64>, CliError> {
    Ok(match cfg.model.variant {
        VariantKind::HardWall => {
            let r = wall.or(cfg.model.r_min).ok_or_else(|| ConfigError("missing field `model.r_min`".into()))?;
            InteractionModel::hard_wall(basis, r)?
        }
        VariantKind::LennardJones => InteractionModel::from_physical(&cfg.physical_system()?, basis, wall.or(cfg.model.r_min))?,
    })
}

fn adiabat_table(cfg: &RunConfig) -> Result<String, CliError> {
    let a = require(&cfg.adiabats, "adiabats")?;
    let [lo, hi] = a.r;
    if !(lo > 0.0 && lo < hi && a.points >= 2) {
        return Err(ConfigError("`adiabats`: need 0 < r[0] < r[1] and points >= 2".into()).into());
    }
    let wall = match cfg.model.variant {
        VariantKind::HardWall => Some(cfg.model.r_min.unwrap_or(lo)),
        VariantKind::LennardJones => cfg.model.r_min,
    };
    let spec = cfg.basis_spec(&cfg.basis, wall)?;
    let model = model_with(cfg, spec.build()?, wall)?;
    let n = a.points;
    let r: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            match a.spacing {
                Spacing::Linear => lo + (hi - lo) * t,
                Spacing::Log => lo * (hi / lo).powf(t),
            }
        })
        .collect();
    let mut curves = adiabats(&model, &r)?;
    if let Some(k) = a.count {
        curves.curves.truncate(k);
        curves.asymptotic_l.truncate(k);
    }
    let extra = vec![format!("basis: {}", model.basis().descriptor())];
    Ok(adiabats_to_csv(&curves, &provenance(cfg, extra))?)
}

fn scan_spec(cfg: &RunConfig, parameter: ScanParameter, axis: Axis, range: (f64, f64), points: Points, window: Option<(f64, f64)>) -> Result<ScanSpec, CliError> {
    let wall = if parameter == ScanParameter::RMin {
        Some(axis.to_value(range.0).min(axis.to_value(range.1)))
    } else {
        None
    };
    let bases = match &cfg.scan {
        Some(s) if !s.bases.is_empty() => s.bases.iter().map(|b| cfg.basis_spec(b, wall)).collect::<Result<Vec<_>, _>>()?,
        _ => vec![cfg.basis_spec(&cfg.basis, wall)?],
    };
    let model = match cfg.model.variant {
        // the wall is scanned; a fixed value is only a placeholder
        VariantKind::HardWall if parameter == ScanParameter::RMin && cfg.model.r_min.is_none() => dipbound::scan::ModelTemplate::HardWall { r_min: f64::NAN },
        _ => cfg.template()?,
    };
    let spec = ScanSpec {
        model,
        parameter,
        axis,
        range,
        points,
        bases,
        energy_unit: cfg.energy.unit.into(),
        window,
        tol_e: cfg.energy.tol,
        grid: cfg.grid_overrides()?,
        zero_offset: cfg.energy.zero_offset,
    };
    spec.validate()?;
    Ok(spec)
}

fn wkb(cfg: &RunConfig) -> Result<String, CliError> {
    let w = require(&cfg.wkb, "wkb")?;
    if cfg.model.variant != VariantKind::HardWall {
        return Err(ConfigError("`wkb` is defined for the reduced hard-wall model".into()).into());
    }
    let [lo, hi] = w.r_min;
    if !(lo > 0.0 && lo < hi) {
        return Err(ConfigError("`wkb.r_min`: need 0 < lo < hi".into()).into());
    }
    let spec = scan_spec(cfg, ScanParameter::RMin, Axis::Log10, (lo.log10(), hi.log10()), Points::Uniform(w.points), None)?;
    let rows = count_vs_parameter(&spec, workers(cfg))?;
    Ok(counts_to_csv(&spec, &rows, w.report, &provenance(cfg, spec.describe()))?)
}

fn bound(cfg: &RunConfig) -> Result<String, CliError> {
    let window = cfg.window()?;
    let (parameter, x) = match cfg.model.variant {
        VariantKind::HardWall => (ScanParameter::RMin, cfg.model.r_min.ok_or_else(|| ConfigError("missing field `model.r_min`".into()))?),
        VariantKind::LennardJones => (ScanParameter::WellDepth, cfg.physical_system()?.de_cm.ok_or_else(|| ConfigError("missing field `model.de_cm`".into()))?),
    };
    let spec = scan_spec(cfg, parameter, Axis::Linear, (x, x + 1.0), Points::Uniform(2), Some(window))?;
    let point = solve_point(&spec, x, &spec.bases[0]);
    if let Err(e) = &point.search {
        return Err(e.clone().into());
    }
    let table = ScanTable { parameter, axis: Axis::Linear, energy_unit: spec.energy_unit, points: vec![point], flags: Vec::new() };
    let mut extra = spec.describe();
    extra.retain(|l| !l.starts_with("parameter:"));
    Ok(table.to_csv(&provenance(cfg, extra))?)
}

fn scatlen(cfg: &RunConfig) -> Result<String, CliError> {
    let s = require(&cfg.scatlen, "scatlen")?;
    if cfg.model.variant != VariantKind::LennardJones {
        return Err(ConfigError("`scatlen` needs the Lennard-Jones model".into()).into());
    }
    let base = cfg.physical_system()?.with_dipoles_scaled(0.0);
    let depths: Vec<f64> = match (s.de_cm, s.points) {
        (Some([lo, hi]), Some(n)) if lo < hi && n >= 2 => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        (Some(_), _) => return Err(ConfigError("`scatlen.de_cm` needs lo < hi and `points` >= 2".into()).into()),
        (None, _) => vec![base.de_cm.ok_or_else(|| ConfigError("missing field `model.de_cm`".into()))?],
    };
    let mut rows = Vec::new();
    for de in depths {
        let mut sys = base.clone();
        sys.de_cm = Some(de);
        let model = InteractionModel::from_physical(&sys, ChannelBasis::single(0), cfg.model.r_min)?;
        let grid = cfg.grid_overrides()?.apply(PropagationGrid::for_model(&model)?)?;
        let r6 = compute_scales(&sys)?.r6;
        let mut cells = vec![format!("{de:e}")];
        let status = match scattering_length(&model, model.r_min(), s.r_end_r6 * r6, grid.dr) {
            Ok(a) => {
                cells.extend([format!("{:e}", a.a), format!("{:e}", a.a / r6), format!("{:e}", a.convergence), format!("{:e}", a.y_end), a.pole.to_string()]);
                "ok".to_string()
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(String::new(), 5));
                format!("error: {e}")
            }
        };
        cells.push(status);
        rows.push(cells);
    }
    let body = csv_table(&["de_cm", "a_a0", "a_r6", "convergence_a0", "y_end", "pole", "status"], &rows)?;
    Ok(header_lines(&provenance(cfg, vec!["s-wave, dipole off".into()])) + &body)
}

fn scan(cfg: &RunConfig) -> Result<String, CliError> {
    let s = require(&cfg.scan, "scan")?;
    let points = match &s.adaptive {
        Some(a) => Points::Adaptive { initial: s.points, max_fraction: a.max_fraction, max_depth: a.max_depth },
        None => Points::Uniform(s.points),
    };
    let range = (s.range[0], s.range[1]);
    match s.mode {
        ScanMode::States => {
            let spec = scan_spec(cfg, s.parameter.into(), s.axis.into(), range, points, Some(cfg.window()?))?;
            let table = run_scan(&spec, workers(cfg))?;
            Ok(table.to_csv(&provenance(cfg, spec.describe()))?)
        }
        ScanMode::Counts => {
            let spec = scan_spec(cfg, s.parameter.into(), s.axis.into(), range, points, cfg.energy.window.map(|[a, b]| (a, b)))?;
            let rows = count_vs_parameter(&spec, workers(cfg))?;
            let n_v_d = if cfg.model.variant == VariantKind::HardWall { 5 } else { 0 };
            Ok(counts_to_csv(&spec, &rows, n_v_d, &provenance(cfg, spec.describe()))?)
        }
    }
}
