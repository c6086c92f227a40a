use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use otto_core::dynamics::{build_rate_matrix, evolve_populations, thermalization_time, BathSpec};
use otto_core::io::{round_sig, write_rows};
use otto_core::metrics::{engine_metrics, near_carnot_for_cycle, reliability_ratio, tur_bound_f};
use otto_core::sweep::{fit_scaling, run_sweep, Axis, Constraint, Quantity, RowStatus, SweepPlan};
use otto_core::validate::{run_validation, Fault, Level};
use otto_core::work_stats::{independent_moments, joint_distribution_with, moments, MERGE_REL_TOL};
use otto_core::{Execution, HalfInt};
use serde::Serialize;

use crate::config::{Resolved, RunConfig};
use crate::error::CliError;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn emit<T: Serialize>(r: &Resolved, rows: &[T]) -> Result<(), CliError> {
    let path = r.output_path();
    let out = open_output(path.as_deref())?;
    write_rows(out, rows, r.format).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(p) = path {
        eprintln!("wrote {} rows to {}", rows.len(), p.display());
    }
    Ok(())
}

fn rounded(x: Option<f64>, precision: Option<usize>) -> Option<f64> {
    match precision {
        Some(d) => x.map(|v| round_sig(v, d)),
        None => x,
    }
}

#[derive(Serialize)]
struct ReportRow {
    quantity: &'static str,
    collective: Option<f64>,
    independent: Option<f64>,
    near_carnot: Option<f64>,
}

pub fn cycle(cfg: &RunConfig, atoms: Option<&Path>, exec: Execution) -> Result<(), CliError> {
    let r = cfg.resolve()?;
    let p = &r.cycle;
    let dist = joint_distribution_with(p, exec)?;
    let col = engine_metrics(&moments(&dist), p);
    let ind = engine_metrics(&independent_moments(p)?, p);
    let lambda_r = reliability_ratio(&col, &ind).ok();
    let pred = near_carnot_for_cycle(p)?;
    let f = tur_bound_f(p.theta_c(), p.theta_h())?.f_value;

    let row = |quantity, collective: Option<f64>, independent: Option<f64>, near_carnot: Option<f64>| ReportRow {
        quantity,
        collective: rounded(collective, r.precision),
        independent: rounded(independent, r.precision),
        near_carnot: rounded(near_carnot, r.precision),
    };
    let rows = vec![
        row("mean_w", Some(-col.work_extracted), Some(-ind.work_extracted), Some(pred.mean_w)),
        row("var_w", Some(col.work_variance), Some(ind.work_variance), Some(pred.var_w_two_bath)),
        row("var_w_limit", None, None, Some(pred.var_w_limit)),
        row("mean_q_h", Some(col.mean_q_h), Some(ind.mean_q_h), None),
        row("mean_q_c", Some(col.mean_q_c), Some(ind.mean_q_c), None),
        row("reliability", col.reliability, ind.reliability, None),
        row("efficiency", col.efficiency, ind.efficiency, None),
        row("eta", Some(p.eta()), Some(p.eta()), None),
        row("eta_carnot", Some(col.eta_carnot), Some(ind.eta_carnot), None),
        row("entropy_production", Some(col.entropy_production), Some(ind.entropy_production), None),
        row("uncertainty_q", col.uncertainty_q, ind.uncertainty_q, None),
        row("tur_rhs_collective", Some(col.tur_rhs_collective), Some(ind.tur_rhs_collective), None),
        row("tur_rhs_standard", Some(col.tur_rhs_standard), Some(ind.tur_rhs_standard), None),
        row("f_bound", Some(f), Some(f), None),
        row("lambda_r", lambda_r, None, pred.lambda_r),
    ];
    emit(&r, &rows)?;

    if let Some(path) = atoms {
        let out = open_output(Some(path))?;
        dist.write_csv(out, MERGE_REL_TOL).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn sweep(
    cfg: &RunConfig,
    axis: &str,
    axis2: Option<&str>,
    constraint: Option<Constraint>,
    fits: &[Quantity],
    exec: Execution,
) -> Result<(), CliError> {
    let r = cfg.resolve()?;
    let axis1: Axis = axis.parse().map_err(|e: otto_core::Error| CliError::config("--axis", e.to_string()))?;
    let axis2: Option<Axis> = axis2
        .map(|a| a.parse().map_err(|e: otto_core::Error| CliError::config("--axis2", e.to_string())))
        .transpose()?;
    let constraint = match (constraint, r.delta) {
        (Some(c), _) => c,
        (None, Some(d)) => Constraint::FixDelta(d),
        (None, None) => Constraint::FixBetas,
    };
    let plan = SweepPlan { base: r.base.clone(), axis1, axis2, constraint };
    let mut rows = run_sweep(&plan, exec)?;

    for &q in fits {
        let fit = fit_scaling(&rows, q)?;
        eprintln!(
            "fit {q:?}: exponent {:.4} ± {:.4}, prefactor {:.4e}, r² {:.6}, n in [{}, {}] ({} points)",
            fit.exponent, fit.exponent_stderr, fit.prefactor, fit.r_squared, fit.n_min, fit.n_max, fit.points
        );
    }
    let skipped = rows.iter().filter(|row| row.status != RowStatus::Ok).count();
    if skipped > 0 {
        eprintln!("{skipped} of {} grid points skipped", rows.len());
    }
    if let Some(d) = r.precision {
        rows.iter_mut().for_each(|row| row.round(d));
    }
    emit(&r, &rows)
}

#[derive(Debug, Clone, Copy)]
pub enum StartState {
    Uniform,
    Bottom,
    Top,
}

#[derive(Debug, Clone)]
pub struct DynamicsOpts {
    pub j: Option<HalfInt>,
    pub hot: bool,
    pub rate: f64,
    pub start: StartState,
    pub t_max: Option<f64>,
    pub points: usize,
    pub epsilon: f64,
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    m: HalfInt,
    population: f64,
}

const THERMALIZATION_CAP: f64 = 1e12;

pub fn dynamics(cfg: &RunConfig, o: &DynamicsOpts) -> Result<(), CliError> {
    let r = cfg.resolve()?;
    let p = &r.cycle;
    if !(o.rate > 0.0 && o.rate.is_finite()) {
        return Err(CliError::config("--rate", "must be positive"));
    }
    if o.points < 2 {
        return Err(CliError::config("--points", "need at least 2 trace times"));
    }
    if let Some(t) = o.t_max {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::config("--t-max", "must be positive"));
        }
    }
    let j = o.j.unwrap_or(p.ensemble.max_j());
    let (beta, omega) = if o.hot { (p.beta_h, p.omega_h) } else { (p.beta_c, p.omega_c) };
    let rates = build_rate_matrix(&p.model, &p.ensemble, j, omega, &BathSpec::new(beta, o.rate))?;

    let dim = rates.dim();
    let p0 = match o.start {
        StartState::Uniform => vec![1.0 / dim as f64; dim],
        StartState::Bottom => (0..dim).map(|i| f64::from(u8::from(i == 0))).collect(),
        StartState::Top => (0..dim).map(|i| f64::from(u8::from(i + 1 == dim))).collect(),
    };
    let therm = thermalization_time(&rates, &p0, o.epsilon, THERMALIZATION_CAP);
    let t_max = match (&therm, o.t_max) {
        (_, Some(t)) => t,
        (Ok(th), None) if th.time > 0.0 => th.time,
        (Ok(th), None) => 1.0 / th.spectral_gap.max(f64::MIN_POSITIVE),
        (Err(e), None) => return Err(CliError::Compute(e.clone())),
    };
    match &therm {
        Ok(th) => eprintln!(
            "j={j} levels={dim} beta={beta} omega={omega} spectral_gap={:.6e} thermalization_time={:.6e} residual={:.3e}",
            th.spectral_gap, th.time, th.residual
        ),
        Err(e) => eprintln!("j={j} levels={dim} beta={beta} omega={omega} thermalization not reached: {e}"),
    }

    let ms: Vec<HalfInt> = rates.gibbs().spectrum.levels.iter().map(|l| l.m).collect();
    let mut rows = Vec::with_capacity(o.points * dim);
    for k in 0..o.points {
        let t = t_max * k as f64 / (o.points - 1) as f64;
        let pop = evolve_populations(&rates, &p0, t)?;
        for (&m, x) in ms.iter().zip(pop) {
            rows.push(TraceRow { t, m, population: rounded(Some(x), r.precision).unwrap_or(x) });
        }
    }
    emit(&r, &rows)
}

pub fn validate(level: Level, fault: Option<Fault>) -> Result<(), CliError> {
    let results = run_validation(level, fault);
    let mut failed = Vec::new();
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failed.push(c.name.as_str());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            results.len(),
            failed.join(",")
        )))
    }
}
