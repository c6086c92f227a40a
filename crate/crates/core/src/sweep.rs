//! Parameter sweeps over cycle settings, scaling fits and contour extraction.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{
    engine_metrics, near_carnot_for_cycle, reliability_ratio, tur_bound_f, tur_check, EngineMetrics,
};
use crate::spectra::{ModelSpec, SpinEnsemble};
use crate::steady_state::BlockWeights;
use crate::work_stats::{independent_moments, joint_distribution_with, moments, Coupling, CycleParams};
use crate::{Error, Execution, HalfInt, Result};

/// How the block weights are chosen at every sweep point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSpec {
    /// All weight on `j = ns`.
    #[default]
    Symmetric,
    /// Weights induced by the maximally mixed product state.
    UniformProduct,
    /// Explicit `j → P_j`.
    Weights(BTreeMap<HalfInt, f64>),
    Independent,
}

impl CouplingSpec {
    pub fn resolve(&self, ensemble: &SpinEnsemble) -> Result<Coupling> {
        Ok(match self {
            CouplingSpec::Symmetric => Coupling::Collective(BlockWeights::symmetric(ensemble)),
            CouplingSpec::UniformProduct => Coupling::Collective(BlockWeights::uniform_product(ensemble)?),
            CouplingSpec::Weights(w) => Coupling::Collective(BlockWeights::new(ensemble, w)?),
            CouplingSpec::Independent => Coupling::Independent,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CouplingSpec::Symmetric => "symmetric",
            CouplingSpec::UniformProduct => "uniform_product",
            CouplingSpec::Weights(_) => "weights",
            CouplingSpec::Independent => "independent",
        }
    }
}

/// Cycle settings before the sweep axes are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub model: ModelSpec,
    pub ensemble: SpinEnsemble,
    pub omega_c: f64,
    pub omega_h: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub coupling: CouplingSpec,
}

impl SweepBase {
    pub fn cycle(&self) -> Result<CycleParams> {
        CycleParams::new(
            self.model,
            self.ensemble,
            self.omega_c,
            self.omega_h,
            self.beta_c,
            self.beta_h,
            self.coupling.resolve(&self.ensemble)?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    N,
    #[serde(rename = "t_h")]
    Th,
    X,
    GammaLmg,
    Delta,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::N => "n",
            AxisName::Th => "t_h",
            AxisName::X => "x",
            AxisName::GammaLmg => "gamma_lmg",
            AxisName::Delta => "delta",
        }
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(AxisName::N),
            "t_h" | "T_h" => Ok(AxisName::Th),
            "x" => Ok(AxisName::X),
            "gamma_lmg" | "gamma" => Ok(AxisName::GammaLmg),
            "delta" => Ok(AxisName::Delta),
            _ => Err(Error::invalid("axis", format!("unknown axis {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: AxisName, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("axis", format!("{} grid is empty", name.as_str())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("axis", format!("{} grid has non-finite values", name.as_str())));
        }
        Ok(Axis { name, values })
    }
}

/// Parse `name=a:b` (unit steps), `name=a:b:step`, `name=log:a:b:count`
/// or `name=v1,v2,...`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, grid) = s
            .split_once('=')
            .ok_or_else(|| Error::invalid("axis", format!("expected name=grid, got {s:?}")))?;
        let name: AxisName = name.trim().parse()?;
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("axis", format!("bad number {t:?} in {s:?}")))
        };
        let parts: Vec<&str> = grid.split(':').collect();
        let values = match parts.as_slice() {
            ["log", a, b, count] => {
                let (a, b) = (num(a)?, num(b)?);
                let count = num(count)? as usize;
                if !(a > 0.0 && b > 0.0) || count == 0 {
                    return Err(Error::invalid("axis", format!("log grid needs positive bounds and count in {s:?}")));
                }
                if count == 1 {
                    vec![a]
                } else {
                    (0..count)
                        .map(|i| a * (b / a).powf(i as f64 / (count - 1) as f64))
                        .collect()
                }
            }
            [a, b] | [a, b, _] => {
                let (a, b) = (num(a)?, num(b)?);
                let step = if parts.len() == 3 { num(parts[2])? } else { 1.0 };
                if !(step > 0.0) || b < a {
                    return Err(Error::invalid("axis", format!("empty range in {s:?}")));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| a + step * i as f64).collect()
            }
            [list] => list
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(num)
                .collect::<Result<Vec<_>>>()?,
            _ => return Err(Error::invalid("axis", format!("cannot parse grid {s:?}"))),
        };
        Axis::new(name, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Hold `Δ = β_cω_c − β_hω_h` fixed by adjusting `β_c`.
    FixDelta(f64),
    /// Keep both inverse temperatures of the base.
    FixBetas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: SweepBase,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub constraint: Constraint,
}

impl SweepPlan {
    pub fn len(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in output order: `axis1` outer, `axis2` inner.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.axis1.values {
            match &self.axis2 {
                Some(ax) => out.extend(ax.values.iter().map(|&b| (a, Some(b)))),
                None => out.push((a, None)),
            }
        }
        out
    }
}

/// `β_c = (β_hω_h + Δ)/ω_c`.
pub fn carnot_beta_c(omega_c: f64, omega_h: f64, beta_h: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
    }
    if !(omega_c > 0.0 && omega_h.is_finite() && beta_h >= 0.0 && beta_h.is_finite()) {
        return Err(Error::invalid("omega_c", "frequencies must be positive, beta_h non-negative"));
    }
    let beta_c = (beta_h * omega_h + delta) / omega_c;
    if beta_c <= beta_h {
        return Err(Error::invalid(
            "delta",
            format!("gives beta_c = {beta_c} not above beta_h = {beta_h}"),
        ));
    }
    Ok(beta_c)
}

/// Cycle with `β_c` fixed by `Δ` at the given `β_h`.
pub fn carnot_closure(
    model: ModelSpec,
    ensemble: SpinEnsemble,
    coupling: Coupling,
    omega_c: f64,
    omega_h: f64,
    beta_h: f64,
    delta: f64,
) -> Result<CycleParams> {
    let beta_c = carnot_beta_c(omega_c, omega_h, beta_h, delta)?;
    CycleParams::new(model, ensemble, omega_c, omega_h, beta_c, beta_h, coupling)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Skip,
    Error,
}

/// One sweep point: inputs, exact metrics for the configured coupling and
/// for independent spins, and near-Carnot predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub status: RowStatus,
    pub message: String,
    pub model: String,
    pub x: Option<u32>,
    pub gamma_lmg: Option<f64>,
    pub n: u32,
    pub s: HalfInt,
    pub coupling: String,
    pub omega_c: f64,
    pub omega_h: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub t_h: f64,
    pub theta_c: f64,
    pub theta_h: f64,
    pub delta: f64,
    pub eta: f64,
    pub eta_carnot: f64,
    pub mean_w: Option<f64>,
    pub var_w: Option<f64>,
    pub mean_q_h: Option<f64>,
    pub reliability: Option<f64>,
    pub efficiency: Option<f64>,
    pub entropy_production: Option<f64>,
    pub uncertainty_q: Option<f64>,
    pub tur_collective_ok: Option<bool>,
    pub tur_standard_ok: Option<bool>,
    pub ind_mean_w: Option<f64>,
    pub ind_var_w: Option<f64>,
    pub ind_reliability: Option<f64>,
    pub ind_entropy_production: Option<f64>,
    pub ind_uncertainty_q: Option<f64>,
    pub lambda_r: Option<f64>,
    pub pred_mean_w: Option<f64>,
    pub pred_var_w_two_bath: Option<f64>,
    pub pred_var_w_limit: Option<f64>,
    pub pred_lambda_r: Option<f64>,
    pub f_bound: Option<f64>,
}

impl SweepRow {
    /// Round every derived floating-point column to `digits` significant
    /// digits. Axis values and inputs are left exact.
    pub fn round(&mut self, digits: usize) {
        let r = |x: &mut f64| *x = crate::io::round_sig(*x, digits);
        for x in [&mut self.theta_c, &mut self.theta_h, &mut self.delta, &mut self.eta, &mut self.eta_carnot] {
            r(x);
        }
        for x in [
            &mut self.mean_w,
            &mut self.var_w,
            &mut self.mean_q_h,
            &mut self.reliability,
            &mut self.efficiency,
            &mut self.entropy_production,
            &mut self.uncertainty_q,
            &mut self.ind_mean_w,
            &mut self.ind_var_w,
            &mut self.ind_reliability,
            &mut self.ind_entropy_production,
            &mut self.ind_uncertainty_q,
            &mut self.lambda_r,
            &mut self.pred_mean_w,
            &mut self.pred_var_w_two_bath,
            &mut self.pred_var_w_limit,
            &mut self.pred_lambda_r,
            &mut self.f_bound,
        ]
        .into_iter()
        .flatten()
        {
            r(x);
        }
    }
}

struct Resolved {
    model: ModelSpec,
    ensemble: SpinEnsemble,
    beta_c: f64,
    beta_h: f64,
}

fn apply_axes(plan: &SweepPlan, a1: f64, a2: Option<f64>) -> std::result::Result<Resolved, String> {
    let b = &plan.base;
    let mut model = b.model;
    let mut n = b.ensemble.n;
    let mut beta_h = b.beta_h;
    let mut delta = match plan.constraint {
        Constraint::FixDelta(d) => Some(d),
        Constraint::FixBetas => None,
    };
    let axes = std::iter::once((plan.axis1.name, a1)).chain(plan.axis2.as_ref().zip(a2).map(|(ax, v)| (ax.name, v)));
    for (name, v) in axes {
        match name {
            AxisName::N => {
                if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(format!("n = {v} is not a positive integer"));
                }
                n = v as u32;
            }
            AxisName::Th => {
                if !(v > 0.0) {
                    return Err(format!("t_h = {v} is not positive"));
                }
                beta_h = 1.0 / v;
            }
            AxisName::X => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(format!("x = {v} is not a positive integer"));
                }
                model = ModelSpec::PowerX { x: v as u32 };
            }
            AxisName::GammaLmg => model = ModelSpec::Lmg { gamma: v },
            AxisName::Delta => delta = Some(v),
        }
    }
    let ensemble = SpinEnsemble::new(n, b.ensemble.s).map_err(|e| e.to_string())?;
    let beta_c = match delta {
        Some(d) => carnot_beta_c(b.omega_c, b.omega_h, beta_h, d).map_err(|e| e.to_string())?,
        None => b.beta_c,
    };
    Ok(Resolved { model, ensemble, beta_c, beta_h })
}

fn empty_row(plan: &SweepPlan, index: usize, a1: f64, a2: Option<f64>) -> SweepRow {
    let b = &plan.base;
    SweepRow {
        index,
        axis1: a1,
        axis2: a2,
        status: RowStatus::Ok,
        message: String::new(),
        model: b.model.name().to_string(),
        x: None,
        gamma_lmg: None,
        n: b.ensemble.n,
        s: b.ensemble.s,
        coupling: b.coupling.name().to_string(),
        omega_c: b.omega_c,
        omega_h: b.omega_h,
        beta_c: b.beta_c,
        beta_h: b.beta_h,
        t_h: 1.0 / b.beta_h,
        theta_c: b.beta_c * b.omega_c,
        theta_h: b.beta_h * b.omega_h,
        delta: b.beta_c * b.omega_c - b.beta_h * b.omega_h,
        eta: 1.0 - b.omega_c / b.omega_h,
        eta_carnot: 1.0 - b.beta_h / b.beta_c,
        mean_w: None,
        var_w: None,
        mean_q_h: None,
        reliability: None,
        efficiency: None,
        entropy_production: None,
        uncertainty_q: None,
        tur_collective_ok: None,
        tur_standard_ok: None,
        ind_mean_w: None,
        ind_var_w: None,
        ind_reliability: None,
        ind_entropy_production: None,
        ind_uncertainty_q: None,
        lambda_r: None,
        pred_mean_w: None,
        pred_var_w_two_bath: None,
        pred_var_w_limit: None,
        pred_lambda_r: None,
        f_bound: None,
    }
}

fn fill_metrics(row: &mut SweepRow, p: &CycleParams) -> Result<()> {
    let main = match &p.coupling {
        Coupling::Collective(_) => engine_metrics(&moments(&joint_distribution_with(p, Execution::Sequential)?), p),
        Coupling::Independent => engine_metrics(&independent_moments(p)?, p),
    };
    let ind = engine_metrics(&independent_moments(p)?, p);
    let set_main = |row: &mut SweepRow, m: &EngineMetrics| {
        row.mean_w = Some(-m.work_extracted);
        row.var_w = Some(m.work_variance);
        row.mean_q_h = Some(m.mean_q_h);
        row.reliability = m.reliability;
        row.efficiency = m.efficiency;
        row.entropy_production = Some(m.entropy_production);
        row.uncertainty_q = m.uncertainty_q;
        if let Some(t) = tur_check(m) {
            row.tur_collective_ok = Some(t.collective_bound);
            row.tur_standard_ok = Some(t.standard_bound);
        }
    };
    set_main(row, &main);
    row.ind_mean_w = Some(-ind.work_extracted);
    row.ind_var_w = Some(ind.work_variance);
    row.ind_reliability = ind.reliability;
    row.ind_entropy_production = Some(ind.entropy_production);
    row.ind_uncertainty_q = ind.uncertainty_q;
    row.lambda_r = reliability_ratio(&main, &ind).ok();

    let pred = near_carnot_for_cycle(p)?;
    row.pred_mean_w = Some(pred.mean_w);
    row.pred_var_w_two_bath = Some(pred.var_w_two_bath);
    row.pred_var_w_limit = Some(pred.var_w_limit);
    row.pred_lambda_r = pred.lambda_r;
    row.f_bound = tur_bound_f(p.theta_c(), p.theta_h()).ok().map(|b| b.f_value);
    Ok(())
}

fn evaluate(plan: &SweepPlan, index: usize, a1: f64, a2: Option<f64>) -> SweepRow {
    let mut row = empty_row(plan, index, a1, a2);
    let r = match apply_axes(plan, a1, a2) {
        Ok(r) => r,
        Err(msg) => {
            row.status = RowStatus::Skip;
            row.message = msg;
            return row;
        }
    };
    row.model = r.model.name().to_string();
    row.x = matches!(r.model, ModelSpec::PowerX { .. }).then(|| r.model.order());
    row.gamma_lmg = r.model.gamma();
    row.n = r.ensemble.n;
    row.beta_c = r.beta_c;
    row.beta_h = r.beta_h;
    row.t_h = 1.0 / r.beta_h;
    row.theta_c = r.beta_c * plan.base.omega_c;
    row.theta_h = r.beta_h * plan.base.omega_h;

    let params = plan.base.coupling.resolve(&r.ensemble).and_then(|c| {
        CycleParams::new(r.model, r.ensemble, plan.base.omega_c, plan.base.omega_h, r.beta_c, r.beta_h, c)
    });
    let params = match params {
        Ok(p) => p,
        Err(e) => {
            row.status = RowStatus::Skip;
            row.message = e.to_string();
            return row;
        }
    };
    row.delta = params.delta();
    row.eta = params.eta();
    row.eta_carnot = params.eta_carnot();
    if !params.is_engine_regime() {
        row.status = RowStatus::Skip;
        row.message = "outside the engine regime".into();
        return row;
    }
    if let Err(e) = fill_metrics(&mut row, &params) {
        row.status = RowStatus::Error;
        row.message = e.to_string();
    }
    row
}

/// Evaluate every grid point; row order follows [`SweepPlan::points`]
/// whatever the execution strategy.
pub fn run_sweep(plan: &SweepPlan, exec: Execution) -> Result<Vec<SweepRow>> {
    plan.base.model.validate()?;
    let points = plan.points();
    if points.is_empty() {
        return Err(Error::invalid("axis", "sweep grid is empty"));
    }
    Ok(exec.map_range(points.len(), |i| evaluate(plan, i, points[i].0, points[i].1)))
}

/// Per-row scalar used for fits and contours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    VarW,
    AbsMeanW,
    LambdaR,
    UncertaintyQ,
    IndVarW,
    IndAbsMeanW,
    PredLambdaR,
}

impl Quantity {
    pub fn of(self, row: &SweepRow) -> Option<f64> {
        if row.status != RowStatus::Ok {
            return None;
        }
        match self {
            Quantity::VarW => row.var_w,
            Quantity::AbsMeanW => row.mean_w.map(f64::abs),
            Quantity::LambdaR => row.lambda_r,
            Quantity::UncertaintyQ => row.uncertainty_q,
            Quantity::IndVarW => row.ind_var_w,
            Quantity::IndAbsMeanW => row.ind_mean_w.map(f64::abs),
            Quantity::PredLambdaR => row.pred_lambda_r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub n_min: u32,
    pub n_max: u32,
    pub points: usize,
}

/// Minimum number of points in a scaling fit.
pub const MIN_FIT_POINTS: usize = 5;

/// Least-squares slope of `ln q` against `ln n` over the upper half (in `n`)
/// of the `Ok` rows.
pub fn fit_scaling(rows: &[SweepRow], quantity: Quantity) -> Result<ScalingFit> {
    let mut data = Vec::new();
    for row in rows.iter().filter(|r| r.status == RowStatus::Ok) {
        let Some(v) = quantity.of(row) else { continue };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid("quantity", format!("non-positive value {v} at n = {}", row.n)));
        }
        data.push((row.n, v));
    }
    data.sort_by_key(|&(n, _)| n);
    let upper = data.split_off(data.len() / 2);
    fit_log_log(&upper)
}

/// Least-squares fit of `ln q = ln a + k ln n` over all given points.
pub fn fit_log_log(data: &[(u32, f64)]) -> Result<ScalingFit> {
    if data.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(
            "fit",
            format!("need at least {MIN_FIT_POINTS} points, got {}", data.len()),
        ));
    }
    let xs: Vec<f64> = data.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = data.iter().map(|&(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit", "all points share one n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit {
        exponent: slope,
        exponent_stderr: (ssr / (k - 2.0) / sxx).sqrt(),
        prefactor: intercept.exp(),
        r_squared: if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 },
        n_min: data.iter().map(|d| d.0).min().unwrap_or(0),
        n_max: data.iter().map(|d| d.0).max().unwrap_or(0),
        points: data.len(),
    })
}

/// Where a quantity crosses `level` along `axis2` at one `axis1` value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub axis1: f64,
    /// Linear interpolation between the bracketing grid points.
    pub axis2: f64,
}

/// Level crossings along `axis2` for every `axis1` value of a two-axis sweep.
pub fn contour_crossings(rows: &[SweepRow], quantity: Quantity, level: f64) -> Vec<Crossing> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let a1 = rows[start].axis1;
        let mut end = start;
        while end < rows.len() && rows[end].axis1 == a1 {
            end += 1;
        }
        let line: Vec<(f64, f64)> = rows[start..end]
            .iter()
            .filter_map(|r| Some((r.axis2?, quantity.of(r)? - level)))
            .collect();
        for w in line.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y0 == 0.0 {
                out.push(Crossing { axis1: a1, axis2: x0 });
            } else if y0 * y1 < 0.0 {
                out.push(Crossing { axis1: a1, axis2: x0 + (x1 - x0) * y0 / (y0 - y1) });
            }
        }
        start = end;
    }
    out
}
