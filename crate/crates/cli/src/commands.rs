use std::path::Path;

use gaussbomb_core::bombardment::{
    channel_route_series, closed_form_series, search_cp_violation, truncated_cp_check_with,
    CpViolation, MAX_CLOSED_FORM_ORDER, MAX_SERIES_ORDER,
};
use gaussbomb_core::channel::{apply, is_cptp_with, reduce_from_joint};
use gaussbomb_core::classify::{classify_with, table_availability};
use gaussbomb_core::interpolation::{generators_from_channel, propagate};
use gaussbomb_core::random;
use gaussbomb_core::thermal::{analyze, simulate, Dynamics, TrajectoryPoint};
use gaussbomb_core::{
    Availability, DynamicsReport, GaussianState, GeneratorSeries, JointSetup, ThermalReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Mode, RunConfig, Setup};
use crate::exit::{CliError, CliResult};
use crate::output::{emit, json, write_atomic, Table};

/// Largest allowed interpolated-minus-discrete deviation at `t = n dt`,
/// relative to `max(1, largest entry)`.
pub const STROBOSCOPIC_TOL: f64 = 1e-8;

const DEFAULT_ORDER: usize = 2;

fn order(requested: Option<usize>) -> CliResult<usize> {
    let k = requested.unwrap_or(DEFAULT_ORDER);
    if k > MAX_SERIES_ORDER {
        return Err(CliError::Usage(format!(
            "order must be at most {MAX_SERIES_ORDER}, got {k}"
        )));
    }
    Ok(k)
}

fn state_columns(prefix: &str, dim: usize) -> Vec<String> {
    let mut cols = vec![format!("{prefix}purity")];
    cols.extend((0..dim).map(|i| format!("{prefix}mean_{i}")));
    for i in 0..dim {
        cols.extend((0..dim).map(|j| format!("{prefix}cov_{i}_{j}")));
    }
    cols
}

fn state_values(s: &GaussianState) -> Vec<f64> {
    let mut v = vec![1.0 / s.cov.determinant()];
    v.extend(s.mean.iter());
    // nalgebra stores column-major; emit rows in order.
    for i in 0..s.dim() {
        v.extend(s.cov.row(i).iter());
    }
    v
}

fn max_abs_diff(a: &GaussianState, b: &GaussianState) -> (f64, f64) {
    let diff = (&a.mean - &b.mean).amax().max((&a.cov - &b.cov).amax());
    let scale = 1f64.max(b.mean.amax()).max(b.cov.amax());
    (diff, scale)
}

pub fn evolve(cfg: &RunConfig, out: Option<&Path>) -> CliResult<()> {
    let setup = cfg.setup()?;
    let j = setup.joint()?;
    let s0 = cfg.initial_state(&setup)?;
    let channel = reduce_from_joint(&j)?;
    let dim = s0.dim();
    let (steps, sub, dt) = (cfg.steps, cfg.substeps, cfg.dt);

    let mut header = vec!["t".to_string()];
    let mut worst = 0.0f64;
    let table = match cfg.mode {
        Mode::Discrete => {
            header.extend(state_columns("", dim));
            let mut table = Table::new(&header);
            let mut s = s0;
            for n in 0..=steps {
                if n > 0 {
                    s = apply(&channel, &s)?;
                }
                let mut row = vec![Some(n as f64 * dt)];
                row.extend(state_values(&s).into_iter().map(Some));
                table.row(&row);
            }
            table
        }
        Mode::Interpolated | Mode::Both => {
            let both = cfg.mode == Mode::Both;
            let g = generators_from_channel(&channel, dt)?;
            if both {
                header.extend(state_columns("discrete_", dim));
                header.extend(state_columns("interpolated_", dim));
                header.push("max_abs_diff".into());
            } else {
                header.extend(state_columns("", dim));
            }
            let width = header.len();
            let mut table = Table::new(&header);
            let mut discrete = s0.clone();
            for n in 0..=steps {
                if n > 0 {
                    discrete = apply(&channel, &discrete)?;
                }
                let last = if n == steps { 1 } else { sub };
                for m in 0..last {
                    let t = (n as f64 + m as f64 / sub as f64) * dt;
                    let s = apply(&propagate(&g, t)?, &s0)?;
                    let mut row = vec![Some(t)];
                    if both {
                        let strobe = m == 0;
                        row.extend(state_values(&discrete).into_iter().map(|x| strobe.then_some(x)));
                        row.extend(state_values(&s).into_iter().map(Some));
                        if strobe {
                            let (d, scale) = max_abs_diff(&s, &discrete);
                            worst = worst.max(d / scale);
                            row.push(Some(d));
                        } else {
                            row.push(None);
                        }
                    } else {
                        row.extend(state_values(&s).into_iter().map(Some));
                    }
                    debug_assert_eq!(row.len(), width);
                    table.row(&row);
                }
            }
            table
        }
    };
    emit(out, &table.into_string())?;
    if worst > STROBOSCOPIC_TOL {
        return Err(CliError::Invariant(format!(
            "interpolated and discrete states differ by {worst:e} at a stroboscopic time"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ThermalSummary {
    report: ThermalReport,
    dynamics: Dynamics,
    steps: usize,
    #[serde(rename = "final")]
    final_point: TrajectoryPoint,
    /// `|nu_S(final) - nu_infinity|` when a fixed point exists.
    fixed_point_gap: Option<f64>,
}

pub fn thermalize(cfg: &RunConfig, out: Option<&Path>) -> CliResult<()> {
    let setup = cfg.setup()?;
    let Setup::Bath(bath) = &setup else {
        return Err(CliError::Usage("thermalize needs an oscillator_bath setup".into()));
    };
    let report = analyze(bath)?;
    let dynamics = cfg.dynamics.unwrap_or(Dynamics::Discrete);
    let traj = simulate(bath, &cfg.initial_state(&setup)?, cfg.steps, dynamics)?;

    let header: Vec<String> = ["t", "nu_S", "s_cross", "s_plus", "purity"].map(String::from).into();
    let mut table = Table::new(&header);
    for p in &traj {
        table.row(&[p.t, p.nu_s, p.s_cross, p.s_plus, p.purity].map(Some));
    }
    let final_point = *traj.last().expect("simulate returns at least the initial point");
    let summary = ThermalSummary {
        report,
        dynamics,
        steps: cfg.steps,
        final_point,
        fixed_point_gap: report.nu_infinity.map(|nu| (final_point.nu_s - nu).abs()),
    };
    let text = json(&summary);
    if let Some(path) = out {
        write_atomic(path, &table.into_string())?;
        write_atomic(&path.with_extension("json"), &text)?;
    }
    emit(None, &text)?;
    if report.has_fixed_point && !report.passivity_ok {
        return Err(CliError::Invariant(
            "the fixed point is colder than the bath".into(),
        ));
    }
    Ok(())
}

/// The configured setup, or the seeded random sweep it asks for.
fn setups(cfg: &RunConfig) -> CliResult<Vec<JointSetup>> {
    match &cfg.sweep {
        None => Ok(vec![cfg.setup()?.joint()?]),
        Some(sw) => {
            if sw.count == 0 || sw.system_modes == 0 || sw.ancilla_modes == 0 {
                return Err(CliError::Usage("sweep: count and mode numbers must be positive".into()));
            }
            if !(1.0 <= sw.nu_min && sw.nu_min <= sw.nu_max) {
                return Err(CliError::Usage("sweep: need 1 <= nu_min <= nu_max".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok((0..sw.count)
                .map(|_| {
                    random::joint_setup_with_ancilla(
                        &mut rng,
                        sw.system_modes,
                        sw.ancilla_modes,
                        cfg.dt,
                        sw.nu_min,
                        sw.nu_max,
                    )
                })
                .collect())
        }
    }
}

fn series(j: &JointSetup, k: usize) -> CliResult<GeneratorSeries> {
    Ok(if k <= MAX_CLOSED_FORM_ORDER {
        closed_form_series(j, k)?
    } else {
        channel_route_series(j, k)?
    })
}

#[derive(Serialize)]
struct CpEntry {
    channel_margin: f64,
    /// Margin of the series truncated at each order `0..=k`.
    margins: Vec<f64>,
}

#[derive(Serialize)]
struct Violation {
    index: usize,
    order: usize,
    margin: f64,
}

#[derive(Serialize)]
struct CpSweepReport {
    order: usize,
    dt: f64,
    min_margin: Vec<f64>,
    min_channel_margin: f64,
    violations: Vec<Violation>,
    entries: Vec<CpEntry>,
}

#[derive(Serialize)]
struct CpSearchReport {
    order: usize,
    cp: bool,
    worst: Option<CpViolation>,
}

pub fn check_cp(cfg: &RunConfig, k: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let k = order(k.or(cfg.order))?;
    let tol = &cfg.tolerances;

    if let Some(search) = &cfg.search {
        let worst = search_cp_violation(k, &search.energies, &search.couplings, &search.steps)?;
        let cp = worst.as_ref().is_none_or(|w| w.margin >= -tol.cp);
        emit_json(out, &CpSearchReport { order: k, cp, worst })?;
        if !cp && k <= MAX_CLOSED_FORM_ORDER {
            return Err(CliError::Invariant(format!("order-{k} search found a CP violation")));
        }
        return Ok(());
    }

    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for (index, j) in setups(cfg)?.iter().enumerate() {
        let s = series(j, k)?;
        let margins = (0..=k)
            .map(|i| truncated_cp_check_with(&s, i, cfg.dt, tol).map(|r| r.margin))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, &m) in margins.iter().enumerate() {
            if m < -tol.cp {
                violations.push(Violation { index, order: i, margin: m });
            }
        }
        let channel_margin = is_cptp_with(&reduce_from_joint(j)?, tol)?.margin;
        entries.push(CpEntry { channel_margin, margins });
    }
    let min_margin = (0..=k)
        .map(|i| entries.iter().map(|e| e.margins[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let min_channel_margin = entries.iter().map(|e| e.channel_margin).fold(f64::INFINITY, f64::min);
    let channel_bad = min_channel_margin < -tol.cp;
    let low_order_bad = violations.iter().any(|v| v.order <= MAX_CLOSED_FORM_ORDER);
    let report = CpSweepReport { order: k, dt: cfg.dt, min_margin, min_channel_margin, violations, entries };
    emit_json(out, &report)?;
    if channel_bad {
        return Err(CliError::Invariant("a bombardment channel failed the CP test".into()));
    }
    if low_order_bad {
        return Err(CliError::Invariant(
            "a truncated generator of order at most 2 failed the CP test".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyEntry {
    by_order: Vec<Availability>,
    /// Everything present in the series through the requested order.
    cumulative: DynamicsReport,
    /// Classification of the exact interpolation generators at the configured step.
    interpolated: DynamicsReport,
}

#[derive(Serialize)]
struct ClassifyReport {
    order: usize,
    dt: f64,
    conforms: bool,
    entries: Vec<ClassifyEntry>,
}

pub fn classify(cfg: &RunConfig, k: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let k = order(k.or(cfg.order))?;
    let mut entries = Vec::new();
    for j in setups(cfg)? {
        let s = channel_route_series(&j, k)?;
        let by_order = (0..=k)
            .map(|i| table_availability(&s, i))
            .collect::<Result<Vec<_>, _>>()?;
        let cumulative = by_order
            .iter()
            .fold(DynamicsReport::default(), |acc, a| acc.union(&a.report));
        let g = generators_from_channel(&reduce_from_joint(&j)?, cfg.dt)?;
        let interpolated = classify_with(&g, cfg.tolerances.classify)?;
        entries.push(ClassifyEntry { by_order, cumulative, interpolated });
    }
    let conforms = entries.iter().all(|e| e.by_order.iter().all(|a| a.conforms));
    emit_json(out, &ClassifyReport { order: k, dt: cfg.dt, conforms, entries })?;
    if !conforms {
        return Err(CliError::Invariant(
            "a series coefficient contains dynamics its order does not permit".into(),
        ));
    }
    Ok(())
}

pub fn series_cmd(cfg: &RunConfig, k: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let k = order(k.or(cfg.order))?;
    let j = cfg.setup()?.joint()?;
    emit_json(out, &series(&j, k)?)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let text = json(value);
    if let Some(path) = out {
        write_atomic(path, &text)?;
    }
    emit(None, &text)?;
    Ok(())
}
