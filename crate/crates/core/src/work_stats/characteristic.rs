//! Closed-form characteristic function of `(W, Q_h)` for the Linear model in
//! the Dicke block, and moments recovered from it by finite differences.

use num_complex::Complex64;

use super::{CycleParams, Coupling, Moments, WorkHeatDistribution};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Below this `|N·d|` the ratio `expm1(N d)/expm1(d)` is taken from its series.
const SERIES_CUTOFF: f64 = 1e-4;

fn check_closed_form(params: &CycleParams) -> Result<()> {
    if params.model.order() != 1 {
        return Err(Error::Unsupported(format!(
            "closed-form characteristic function needs the linear model, got {}",
            params.model.name()
        )));
    }
    match &params.coupling {
        Coupling::Collective(w) if w.is_single_block(params.ensemble.max_j()) => Ok(()),
        _ => Err(Error::Unsupported(
            "closed-form characteristic function needs all weight in the j = ns block".into(),
        )),
    }
}

fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `ln[(e^{N u} − e^{N v}) / (e^u − e^v)]`.
fn ln_geometric(u: Complex64, v: Complex64, big_n: f64) -> Complex64 {
    let (a, b) = if u.re >= v.re { (u, v) } else { (v, u) };
    let d = b - a;
    let nd = d * big_n;
    let ratio = if nd.norm() < SERIES_CUTOFF {
        // (N + N²d/2 + N³d²/6 + N⁴d³/24) / (1 + d/2 + d²/6 + d³/24)
        let num = big_n * (1.0 + nd / 2.0 + nd * nd / 6.0 + nd * nd * nd / 24.0);
        let den = 1.0 + d / 2.0 + d * d / 6.0 + d * d * d / 24.0;
        num / den
    } else {
        expm1(nd) / expm1(d)
    };
    a * (big_n - 1.0) + ratio.ln()
}

/// `ln[sinh(θ/2) / sinh(Nθ/2)]`.
fn ln_sinh_ratio(theta: f64, big_n: f64) -> f64 {
    if theta == 0.0 {
        return -big_n.ln();
    }
    -0.5 * (big_n - 1.0) * theta + (-(-theta).exp_m1()).ln() - (-(-big_n * theta).exp_m1()).ln()
}

/// `χ(γ₁, γ₂) = ⟨exp(iγ₁W + iγ₂Q_h)⟩` in closed form.
///
/// Evaluated in log space, so large `θ` or large blocks do not overflow.
pub fn characteristic_function(params: &CycleParams, gamma1: f64, gamma2: f64) -> Result<Complex64> {
    check_closed_form(params)?;
    if !(gamma1.is_finite() && gamma2.is_finite()) {
        return Err(Error::invalid("gamma", "counting variables must be finite"));
    }
    if gamma1 == 0.0 && gamma2 == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let big_n = params.ensemble.max_j().dimension() as f64;
    let ns = params.ensemble.max_j().value();
    let (wc, wh) = (params.omega_c, params.omega_h);
    let (tc, th) = (params.theta_c(), params.theta_h());
    let phase_hot = gamma1 * wh;
    let phase_mixed = gamma1 * wc + gamma2 * wh;

    let r_hot = ln_geometric(Complex64::new(th, phase_hot), Complex64::new(0.0, phase_mixed), big_n);
    let r_cold = ln_geometric(Complex64::new(0.0, phase_hot), Complex64::new(tc, phase_mixed), big_n);
    let shift = Complex64::new(
        -ns * (tc + th),
        -2.0 * ns * (gamma1 * (wc + wh) + gamma2 * wh),
    );
    let ln_pref = ln_sinh_ratio(tc, big_n) + ln_sinh_ratio(th, big_n);
    Ok((r_hot + r_cold + shift + ln_pref).exp())
}

/// `Σ p·exp(iγ₁W + iγ₂Q_h)` over the atoms.
pub fn characteristic_function_enumerated(dist: &WorkHeatDistribution, gamma1: f64, gamma2: f64) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for a in &dist.atoms {
        let (s, c) = (gamma1 * a.w + gamma2 * a.q_h).sin_cos();
        re.add(a.p * c);
        im.add(a.p * s);
    }
    Complex64::new(re.value(), im.value())
}

/// Central differences of `χ` at the origin with Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    /// Base step in units of `1/(ω_h·(2ns+1))`.
    pub step: f64,
    /// Number of halvings in the Richardson tableau.
    pub levels: usize,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        FiniteDifference { step: 0.1, levels: 3 }
    }
}

fn richardson(mut col: Vec<f64>) -> f64 {
    let mut factor = 4.0;
    while col.len() > 1 {
        col = col.windows(2).map(|p| (factor * p[1] - p[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    col[0]
}

/// Moments of `(W, Q_h)` from finite differences of the closed-form `χ`.
pub fn moments_from_characteristic(params: &CycleParams, fd: FiniteDifference) -> Result<Moments> {
    check_closed_form(params)?;
    if !(fd.step > 0.0 && fd.step.is_finite()) || fd.levels == 0 {
        return Err(Error::invalid("step", "finite-difference step must be positive"));
    }
    let scale = params.omega_h * params.ensemble.max_j().dimension() as f64;
    let chi = |g1: f64, g2: f64| characteristic_function(params, g1, g2);

    let mut first_w = Vec::new();
    let mut first_q = Vec::new();
    let mut second_w = Vec::new();
    let mut second_q = Vec::new();
    let mut mixed = Vec::new();
    for l in 0..fd.levels {
        let h = fd.step / scale / f64::powi(2.0, l as i32);
        let (wp, wm) = (chi(h, 0.0)?, chi(-h, 0.0)?);
        let (qp, qm) = (chi(0.0, h)?, chi(0.0, -h)?);
        // χ' = i⟨X⟩, χ'' = −⟨X²⟩
        first_w.push((wp - wm).im / (2.0 * h));
        first_q.push((qp - qm).im / (2.0 * h));
        second_w.push(-(wp + wm - 2.0).re / (h * h));
        second_q.push(-(qp + qm - 2.0).re / (h * h));
        let cross = chi(h, h)? - chi(h, -h)? - chi(-h, h)? + chi(-h, -h)?;
        mixed.push(-cross.re / (4.0 * h * h));
    }
    let (mean_w, mean_q_h) = (richardson(first_w), richardson(first_q));
    let (mean_w2, mean_q_h2, mean_w_q_h) = (richardson(second_w), richardson(second_q), richardson(mixed));
    Ok(Moments {
        mean_w,
        mean_w2,
        var_w: mean_w2 - mean_w * mean_w,
        mean_q_h,
        mean_q_h2,
        var_q_h: mean_q_h2 - mean_q_h * mean_q_h,
        mean_w_q_h,
        cov_w_q_h: mean_w_q_h - mean_w * mean_q_h,
    })
}
