//! Oracle suite: named checks of the library against independent references.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_rate_matrix_oriented, evolve_populations, steady_state_residual, uniform_populations, BathSpec, Orientation};
use crate::metrics::{engine_metrics, independent_thermo_point, tur_bound_f, tur_check};
use crate::spectra::{dimension_check, subspace_spectrum, ModelSpec, SpinEnsemble};
use crate::steady_state::gibbs_block;
use crate::thermo::{heat_capacity_closed_form_linear, thermo_point, var_h_asymptotic};
use crate::work_stats::{
    independent_moments, joint_distribution, moments, moments_from_characteristic, product_basis_oracle, Coupling,
    CycleParams, FiniteDifference, Moments,
};
use crate::{Execution, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_0770;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// `n ≤ 6`, at most 10² grid points per check.
    #[default]
    Fast,
    Full,
}

/// Deliberate defects for mutation testing of the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Reverse the ladder direction of the dissipator.
    DissipatorSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from(name: &str, r: Result<std::result::Result<String, String>>) -> Self {
        let (passed, detail) = match r {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        CheckResult { name: name.to_string(), passed, detail }
    }
}

type Outcome = Result<std::result::Result<String, String>>;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// The `[⟨W⟩, var W, ⟨Q_h⟩, var Q_h, cov]` worst relative mismatch.
pub fn moments_mismatch(a: &Moments, b: &Moments) -> f64 {
    [
        rel(a.mean_w, b.mean_w),
        rel(a.var_w, b.var_w),
        rel(a.mean_q_h, b.mean_q_h),
        rel(a.var_q_h, b.var_q_h),
        rel(a.cov_w_q_h, b.cov_w_q_h),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Reference near-Carnot cycle: `ω_c = 0.1`, `ω_h = 0.5`, `β_h = 10⁻⁶`, `Δ = 0.005`.
pub fn fig1_cycle(model: ModelSpec, n: u32) -> Result<CycleParams> {
    let e = SpinEnsemble::qubits(n)?;
    let beta_h = 1e-6;
    let beta_c = crate::sweep::carnot_beta_c(0.1, 0.5, beta_h, 0.005)?;
    CycleParams::symmetric(model, e, 0.1, 0.5, beta_c, beta_h)
}

/// Random engine-regime cycles with all weight on `j = ns`:
/// `θ_h ∈ [10⁻³, 10]`, `Δ ∈ [10⁻³, 5]` (log-uniform), `ω_h ∈ [0.1, 2]`,
/// `ω_c/ω_h ∈ [0.05, 0.95]`, `2 ≤ n ≤ max_n`, one of the three models.
/// (`n = 1` is excluded: even-`x` and `γ = 0` spectra are flat there.)
pub fn random_engine_draws(count: usize, max_n: u32, seed: u64) -> Result<Vec<CycleParams>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng.random_range(2..=max_n.max(2));
        let model = match rng.random_range(0..3) {
            0 => ModelSpec::Linear,
            1 => ModelSpec::PowerX { x: rng.random_range(2..=4) },
            _ => ModelSpec::Lmg { gamma: rng.random_range(-1.5..1.5) },
        };
        let theta_h = 10f64.powf(rng.random_range(-3.0..1.0));
        let delta = 10f64.powf(rng.random_range(-3.0..(5f64).log10()));
        let omega_h = rng.random_range(0.1..2.0);
        let omega_c = omega_h * rng.random_range(0.05..0.95);
        let beta_h = theta_h / omega_h;
        let beta_c = (theta_h + delta) / omega_c;
        out.push(CycleParams::symmetric(model, SpinEnsemble::qubits(n)?, omega_c, omega_h, beta_c, beta_h)?);
    }
    Ok(out)
}

fn check_dimensions(level: Level) -> Outcome {
    let max = if level == Level::Fast { 6 } else { 20 };
    for n in 1..=max {
        if !dimension_check(&SpinEnsemble::qubits(n)?)? {
            return Ok(Err(format!("dimension sum fails at n = {n}")));
        }
    }
    Ok(Ok(format!("n = 1..{max}")))
}

fn check_oracle_triangle(_: Level) -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let p = fig1_cycle(ModelSpec::Linear, n)?;
        let d = joint_distribution(&p)?;
        if (d.total_probability() - 1.0).abs() > 1e-12 || d.atoms.iter().any(|a| a.p < 0.0) {
            return Ok(Err(format!("distribution not normalized at n = {n}")));
        }
        let exact = moments(&d);
        let fd = moments_from_characteristic(&p, FiniteDifference::default())?;
        worst = worst.max(moments_mismatch(&fd, &exact));

        let ind = p.with_coupling(Coupling::Independent)?;
        let brute = moments(&product_basis_oracle(&ind)?);
        worst = worst.max(moments_mismatch(&brute, &independent_moments(&ind)?));
    }
    Ok(if worst <= 1e-6 { Ok(format!("worst relative mismatch {worst:.2e}")) } else { Err(format!("mismatch {worst:.2e} > 1e-6")) })
}

fn check_detailed_balance(level: Level, fault: Option<Fault>) -> Outcome {
    let orientation = match fault {
        Some(Fault::DissipatorSign) => Orientation::Flipped,
        None => Orientation::Emission,
    };
    let max = if level == Level::Fast { 6 } else { 10 };
    let (beta, omega) = (1.0, 1.0);
    for n in 1..=max {
        let e = SpinEnsemble::qubits(n)?;
        let r = build_rate_matrix_oriented(&ModelSpec::Linear, &e, e.max_j(), omega, &BathSpec::new(beta, 1.0), orientation)?;
        let l = r.generator();
        let p = nalgebra::DVector::from_vec(r.gibbs().populations.clone());
        let fixed = (&l * &p).amax();
        if fixed > 1e-12 * l.amax() {
            return Ok(Err(format!("Gibbs state is not stationary at n = {n} (|Lp| = {fixed:.2e})")));
        }
        for i in 0..r.dim() - 1 {
            let ratio = r.down[i + 1] / r.up[i];
            if rel(ratio, (beta * omega).exp()) > 1e-12 {
                return Ok(Err(format!("KMS ratio {ratio} at n = {n}")));
            }
        }
        let evolved = evolve_populations(&r, &uniform_populations(&r), 50.0)?;
        let tv = steady_state_residual(&evolved, r.gibbs())?;
        if tv >= 1e-8 {
            return Ok(Err(format!("residual {tv:.2e} after t = 50 at n = {n}")));
        }
    }
    Ok(Ok(format!("n = 1..{max}")))
}

fn check_heat_capacity(level: Level) -> Outcome {
    let ns: &[u32] = if level == Level::Fast { &[1, 2, 6] } else { &[1, 2, 10, 50, 200] };
    let mut worst: f64 = 0.0;
    for &n in ns {
        let e = SpinEnsemble::qubits(n)?;
        for theta in [1e-3, 0.01, 0.1, 1.0, 5.0] {
            let s = subspace_spectrum(&ModelSpec::Linear, &e, e.max_j(), 1.0)?;
            let exact = thermo_point(&gibbs_block(&s, theta)?).heat_capacity;
            worst = worst.max(rel(heat_capacity_closed_form_linear(n, theta, 1.0)?, exact));
        }
    }
    Ok(if worst <= 1e-9 { Ok(format!("worst {worst:.2e}")) } else { Err(format!("closed form off by {worst:.2e}")) })
}

fn check_asymptotic_variance(_: Level) -> Outcome {
    let n = 1000;
    let e = SpinEnsemble::qubits(n)?;
    for model in [ModelSpec::Linear, ModelSpec::PowerX { x: 2 }, ModelSpec::Lmg { gamma: 0.7 }] {
        let s = subspace_spectrum(&model, &e, e.max_j(), 1.0)?;
        let exact = thermo_point(&gibbs_block(&s, 1e-6)?).var_energy;
        let asym = var_h_asymptotic(&model, n, 1.0)?;
        if rel(exact, asym) > 0.01 {
            return Ok(Err(format!("{} off by {:.2e}", model.name(), rel(exact, asym))));
        }
    }
    Ok(Ok("n = 1000 within 1%".into()))
}

fn check_tur_draws(level: Level, seed: u64) -> Outcome {
    let (count, max_n) = if level == Level::Fast { (100, 6) } else { (1000, 50) };
    let draws = random_engine_draws(count, max_n, seed)?;
    let results = Execution::default().map(&draws, |p| -> Result<Option<String>> {
        let m = engine_metrics(&moments(&joint_distribution(p)?), p);
        Ok(match tur_check(&m) {
            Some(t) if t.collective_bound => None,
            Some(_) => Some(format!(
                "n = {} {} θ_c = {} θ_h = {}: Q = {} < 2 − Σ = {}",
                p.ensemble.n,
                p.model.name(),
                p.theta_c(),
                p.theta_h(),
                m.uncertainty_q.unwrap_or(f64::NAN),
                m.tur_rhs_collective
            )),
            None => Some("degenerate draw".into()),
        })
    });
    for r in results {
        if let Some(msg) = r? {
            return Ok(Err(msg));
        }
    }
    Ok(Ok(format!("{count} draws, 2 ≤ n ≤ {max_n}")))
}

fn check_bound_function(level: Level) -> Outcome {
    let k = if level == Level::Fast { 10 } else { 60 };
    let mut min = f64::INFINITY;
    for i in 0..=k {
        let th = 0.01 * 2000f64.powf(i as f64 / k as f64);
        for l in 0..=k {
            let d = 1e-3 * 5000f64.powf(l as f64 / k as f64);
            min = min.min(tur_bound_f(th + d, th)?.f_value);
        }
    }
    Ok(if min >= 2.0 - 1e-10 { Ok(format!("min f = {min:.10}")) } else { Err(format!("f dips to {min}")) })
}

fn check_independent_q(level: Level) -> Outcome {
    let max = if level == Level::Fast { 6 } else { 100 };
    let one = fig1_cycle(ModelSpec::Linear, 1)?.with_coupling(Coupling::Independent)?;
    let q1 = engine_metrics(&independent_moments(&one)?, &one).uncertainty_q;
    for n in 1..=max {
        let p = fig1_cycle(ModelSpec::Linear, n)?.with_coupling(Coupling::Independent)?;
        let q = engine_metrics(&independent_moments(&p)?, &p).uncertainty_q;
        match (q, q1) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-10 => {}
            _ => return Ok(Err(format!("Q_ind({n}) = {q:?} vs Q_ind(1) = {q1:?}"))),
        }
    }
    Ok(Ok(format!("n = 1..{max}")))
}

fn check_lambda_limit(level: Level) -> Outcome {
    let ns: &[u32] = if level == Level::Fast { &[6] } else { &[10, 20, 50] };
    let mut detail = Vec::new();
    for &n in ns {
        let p = fig1_cycle(ModelSpec::Linear, n)?;
        let col = engine_metrics(&moments(&joint_distribution(&p)?), &p);
        let ind = engine_metrics(&independent_moments(&p)?, &p);
        let lam = crate::metrics::reliability_ratio(&col, &ind)?;
        let target = (n as f64 + 2.0) / 3.0;
        if rel(lam, target) > 0.05 {
            return Ok(Err(format!("λ_r({n}) = {lam} vs {target}")));
        }
        detail.push(format!("λ_r({n}) = {lam:.4}"));
    }
    Ok(Ok(detail.join(", ")))
}

fn check_independent_capacity(_: Level) -> Outcome {
    let e = SpinEnsemble::qubits(4)?;
    let c = independent_thermo_point(&e, 1.0, 1.0)?.heat_capacity;
    let want = crate::thermo::heat_capacity_independent(4, 1.0, 1.0)?;
    Ok(if rel(c, want) < 1e-12 { Ok(format!("C = {c:.6}")) } else { Err(format!("{c} vs {want}")) })
}

/// Run every check for `level`, optionally with an injected defect.
pub fn run_validation(level: Level, fault: Option<Fault>) -> Vec<CheckResult> {
    let mut out = vec![
        CheckResult::from("dimension_sum", check_dimensions(level)),
        CheckResult::from("oracle_triangle", check_oracle_triangle(level)),
        CheckResult::from("detailed_balance", check_detailed_balance(level, fault)),
        CheckResult::from("heat_capacity_closed_form", check_heat_capacity(level)),
        CheckResult::from("independent_heat_capacity", check_independent_capacity(level)),
        CheckResult::from("tur_collective_bound", check_tur_draws(level, DEFAULT_SEED)),
        CheckResult::from("tur_bound_function", check_bound_function(level)),
        CheckResult::from("independent_q_invariance", check_independent_q(level)),
        CheckResult::from("lambda_r_limit", check_lambda_limit(level)),
    ];
    if level == Level::Full {
        out.push(CheckResult::from("asymptotic_variance", check_asymptotic_variance(level)));
    }
    out
}
