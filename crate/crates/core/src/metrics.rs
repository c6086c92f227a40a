//! Engine figures of merit and thermodynamic uncertainty relations.

use serde::{Deserialize, Serialize};

use crate::spectra::{ModelSpec, SpinEnsemble};
use crate::steady_state::{collective_steady_state, gibbs_block};
use crate::thermo::{thermo_point, thermo_point_mixture, ThermoPoint};
use crate::work_stats::{Coupling, CycleParams, Moments};
use crate::{Error, Result};

/// Absolute slack allowed when checking TUR bounds.
pub const TUR_SLACK: f64 = 1e-10;

/// Per-cycle figures of merit.
///
/// `reliability`, `efficiency` and `uncertainty_q` are `None` when the cycle
/// is degenerate (`var(W) = 0`, or no heat absorbed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineMetrics {
    /// `−⟨W⟩`.
    pub work_extracted: f64,
    pub work_variance: f64,
    pub mean_q_h: f64,
    pub mean_q_c: f64,
    /// `|⟨W⟩| / √var(W)`.
    pub reliability: Option<f64>,
    /// `−⟨W⟩ / ⟨Q_h⟩`.
    pub efficiency: Option<f64>,
    pub eta_carnot: f64,
    /// `⟨Σ⟩ = −β_h⟨Q_h⟩ − β_c⟨Q_c⟩`.
    pub entropy_production: f64,
    /// `𝒬 = ⟨Σ⟩ / r²`.
    pub uncertainty_q: Option<f64>,
    pub tur_rhs_collective: f64,
    pub tur_rhs_standard: f64,
    pub degenerate: bool,
}

impl EngineMetrics {
    pub fn reliability_sq(&self) -> Option<f64> {
        self.reliability.map(|r| r * r)
    }
}

pub fn engine_metrics(m: &Moments, params: &CycleParams) -> EngineMetrics {
    let mean_q_c = m.mean_q_c();
    let entropy_production = -params.beta_h * m.mean_q_h - params.beta_c * mean_q_c;
    let degenerate = !(m.var_w > 0.0) || m.mean_w == 0.0;
    let reliability = (!degenerate).then(|| m.mean_w.abs() / m.var_w.sqrt());
    // Σ var / ⟨W⟩² rather than Σ / r², to avoid rounding through the square root
    let uncertainty_q = (!degenerate).then(|| entropy_production * m.var_w / (m.mean_w * m.mean_w));
    let efficiency = (m.mean_q_h > 0.0).then(|| -m.mean_w / m.mean_q_h);
    EngineMetrics {
        work_extracted: -m.mean_w,
        work_variance: m.var_w,
        mean_q_h: m.mean_q_h,
        mean_q_c,
        reliability,
        efficiency,
        eta_carnot: params.eta_carnot(),
        entropy_production,
        uncertainty_q,
        tur_rhs_collective: 2.0 - entropy_production,
        tur_rhs_standard: 2.0,
        degenerate,
    }
}

/// `λ_r = r²_col / r²_ind`.
pub fn reliability_ratio(collective: &EngineMetrics, independent: &EngineMetrics) -> Result<f64> {
    match (collective.reliability, independent.reliability) {
        (Some(a), Some(b)) if b > 0.0 => Ok((a * a) / (b * b)),
        _ => Err(Error::Degenerate("reliability undefined for a degenerate cycle".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurBound {
    pub theta_c: f64,
    pub theta_h: f64,
    pub delta: f64,
    /// `f(Δ, θ_h)`.
    pub f_value: f64,
    /// `Δ coth(Δ/2)`, the `θ_h → ∞` limit of `f`.
    pub f_large_theta: f64,
}

/// `Δ coth(Δ/2)`.
pub fn f_large_theta(delta: f64) -> f64 {
    if delta.abs() < 1e-6 {
        2.0 + delta * delta / 6.0
    } else {
        delta / (0.5 * delta).tanh()
    }
}

/// The bound function
/// `f = Δ[cosh Δ + cosh(Δ+θ_h) + cosh θ_h − 3] / [sinh(Δ+θ_h) − sinh Δ − sinh θ_h]`,
/// written with `cosh x − 1 = 2 sinh²(x/2)` so that neither side cancels.
pub fn tur_bound_f(theta_c: f64, theta_h: f64) -> Result<TurBound> {
    if !(theta_h > 0.0 && theta_h.is_finite()) {
        return Err(Error::invalid("theta_h", format!("must be positive, got {theta_h}")));
    }
    if !(theta_c > theta_h && theta_c.is_finite()) {
        return Err(Error::invalid("theta_c", format!("must exceed theta_h, got {theta_c}")));
    }
    let delta = theta_c - theta_h;
    let sh2 = |x: f64| {
        let s = (0.5 * x).sinh();
        2.0 * s * s
    };
    let num = sh2(delta) + sh2(delta + theta_h) + sh2(theta_h);
    let den = delta.sinh() * sh2(theta_h) + theta_h.sinh() * sh2(delta);
    let f_value = if den.is_finite() && num.is_finite() {
        delta * num / den
    } else {
        // both sides overflow: keep the leading exponentials
        delta * (1.0 + (-theta_h).exp() + (-delta).exp()) / (1.0 - (-theta_h).exp() - (-delta).exp()).max(f64::MIN_POSITIVE)
    };
    Ok(TurBound {
        theta_c,
        theta_h,
        delta,
        f_value,
        f_large_theta: f_large_theta(delta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurReport {
    /// `𝒬 ≥ 2 − ⟨Σ⟩`.
    pub collective_bound: bool,
    /// `𝒬 ≥ 2`.
    pub standard_bound: bool,
    /// Collective bound holds while the standard one fails.
    pub standard_violation: bool,
}

pub fn tur_check(m: &EngineMetrics) -> Option<TurReport> {
    let q = m.uncertainty_q?;
    let collective_bound = q >= m.tur_rhs_collective - TUR_SLACK;
    let standard_bound = q >= m.tur_rhs_standard;
    Some(TurReport {
        collective_bound,
        standard_bound,
        standard_violation: collective_bound && !standard_bound,
    })
}

/// Heat-capacity predictions for the near-Carnot regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearCarnot {
    /// `−Δη ω_h² (β_c − β_h) C(θ_h)/θ_h²`.
    pub mean_w: f64,
    /// `(ω_c − ω_h)² [C(θ_h)/θ_h² + C(θ_c)/θ_c²]`.
    pub var_w_two_bath: f64,
    /// `2 ω_h² η_C² C(θ_h)/θ_h²`.
    pub var_w_limit: f64,
    /// `C^col(θ_h) / C^ind(θ_h)`; `None` without an independent reference.
    pub lambda_r: Option<f64>,
}

/// Predictions from thermodynamics of the working medium at the hot corner
/// (`β_h`, `ω_h`) and cold corner (`β_c`, `ω_c`).
pub fn near_carnot_predictions(
    hot: &ThermoPoint,
    cold: &ThermoPoint,
    independent_hot: Option<&ThermoPoint>,
    params: &CycleParams,
) -> NearCarnot {
    let g_h = hot.capacity_over_theta_sq();
    let g_c = cold.capacity_over_theta_sq();
    let (wc, wh) = (params.omega_c, params.omega_h);
    let eta_c = params.eta_carnot();
    NearCarnot {
        mean_w: -params.delta_eta() * wh * wh * (params.beta_c - params.beta_h) * g_h,
        var_w_two_bath: (wc - wh) * (wc - wh) * (g_h + g_c),
        var_w_limit: 2.0 * wh * wh * eta_c * eta_c * g_h,
        lambda_r: independent_hot
            .map(|ind| ind.capacity_over_theta_sq())
            .filter(|&d| d > 0.0)
            .map(|d| g_h / d),
    }
}

/// Thermodynamics of `n` independent spin-`s` linear particles.
pub fn independent_thermo_point(ensemble: &SpinEnsemble, beta: f64, omega: f64) -> Result<ThermoPoint> {
    let one = SpinEnsemble::new(1, ensemble.s)?;
    let spectrum = crate::spectra::subspace_spectrum(&ModelSpec::Linear, &one, one.max_j(), omega)?;
    let t = thermo_point(&gibbs_block(&spectrum, beta)?);
    let n = ensemble.n as f64;
    Ok(ThermoPoint::new(beta, omega, n * t.mean_energy, n * t.var_energy))
}

/// Working-medium thermodynamics at `(β, ω)` for the coupling of `params`.
pub fn cycle_thermo_point(params: &CycleParams, beta: f64, omega: f64) -> Result<ThermoPoint> {
    match &params.coupling {
        Coupling::Collective(w) => thermo_point_mixture(&collective_steady_state(
            &params.model,
            &params.ensemble,
            beta,
            omega,
            w,
        )?),
        Coupling::Independent => independent_thermo_point(&params.ensemble, beta, omega),
    }
}

/// [`near_carnot_predictions`] with all thermodynamic inputs computed from
/// `params`; `λ_r` is taken against independent linear spins.
pub fn near_carnot_for_cycle(params: &CycleParams) -> Result<NearCarnot> {
    let hot = cycle_thermo_point(params, params.beta_h, params.omega_h)?;
    let cold = cycle_thermo_point(params, params.beta_c, params.omega_c)?;
    let ind = independent_thermo_point(&params.ensemble, params.beta_h, params.omega_h)?;
    Ok(near_carnot_predictions(&hot, &cold, Some(&ind), params))
}
