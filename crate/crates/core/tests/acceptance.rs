//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use otto_core::dynamics::{
    build_rate_matrix, evolve_populations, steady_state_residual, uniform_populations, BathSpec,
};
use otto_core::metrics::{engine_metrics, reliability_ratio, tur_bound_f, tur_check, TUR_SLACK};
use otto_core::spectra::{subspace_spectrum, ModelSpec, SpinEnsemble};
use otto_core::steady_state::gibbs_block;
use otto_core::sweep::{
    contour_crossings, fit_scaling, run_sweep, Axis, AxisName, Constraint, CouplingSpec, Quantity, RowStatus,
    SweepBase, SweepPlan,
};
use otto_core::thermo::{heat_capacity_closed_form_linear, thermo_point};
use otto_core::validate::{fig1_cycle, moments_mismatch, random_engine_draws, run_validation, Fault, Level, DEFAULT_SEED};
use otto_core::work_stats::{
    independent_ensemble_moments, independent_moments, joint_distribution, moments, moments_from_characteristic,
    product_basis_oracle, single_particle, Coupling, FiniteDifference,
};
use otto_core::{Execution, Result};

const ORACLE_REL: f64 = 1e-6;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const CLOSED_FORM_REL: f64 = 1e-9;
const HIGH_T_REL: f64 = 1e-3;
const ASYMPTOTIC_REL: f64 = 0.01;
const ASYMPTOTIC_BUDGET: Duration = Duration::from_secs(5);
const SLOPE_TOL: f64 = 0.05;
const SCALING_BUDGET: Duration = Duration::from_secs(60);
const LAMBDA_REL: f64 = 0.05;
const TUR_DRAWS: usize = 1000;
const TUR_MAX_N: u32 = 50;
const Q_IND_ABS: f64 = 1e-10;
const TV_TARGET: f64 = 1e-8;
const KMS_REL: f64 = 1e-12;

type Verdict = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fig1_base(model: ModelSpec, n: u32) -> SweepBase {
    SweepBase {
        model,
        ensemble: SpinEnsemble::qubits(n).unwrap(),
        omega_c: 0.1,
        omega_h: 0.5,
        beta_c: 0.05,
        beta_h: 1e-6,
        coupling: CouplingSpec::Symmetric,
    }
}

fn oracle_triangle() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let p = fig1_cycle(ModelSpec::Linear, n)?;
        let enumerated = moments(&joint_distribution(&p)?);
        let from_chi = moments_from_characteristic(&p, FiniteDifference::default())?;
        worst = worst.max(moments_mismatch(&from_chi, &enumerated));

        let ind = p.with_coupling(Coupling::Independent)?;
        let single = moments(&joint_distribution(&single_particle(&p)?)?);
        let scaled = independent_ensemble_moments(&single, n);
        let brute = moments(&product_basis_oracle(&ind)?);
        worst = worst.max(moments_mismatch(&brute, &scaled));
    }
    let elapsed = start.elapsed();
    Ok((
        worst <= ORACLE_REL && elapsed < ORACLE_BUDGET,
        format!("worst relative mismatch {worst:.2e} (tol {ORACLE_REL:.0e}), {:.2} s", elapsed.as_secs_f64()),
    ))
}

fn heat_capacity() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [1u32, 2, 10, 50] {
        let e = SpinEnsemble::qubits(n)?;
        let s = subspace_spectrum(&ModelSpec::Linear, &e, e.max_j(), 1.0)?;
        for theta in [1e-3, 0.1, 1.0, 5.0] {
            let exact = thermo_point(&gibbs_block(&s, theta)?).heat_capacity;
            worst = worst.max(rel(heat_capacity_closed_form_linear(n, theta, 1.0)?, exact));
        }
    }
    let mut worst_limit: f64 = 0.0;
    let theta = 1e-4;
    for n in [1u32, 2, 10, 50] {
        let e = SpinEnsemble::qubits(n)?;
        let s = subspace_spectrum(&ModelSpec::Linear, &e, e.max_j(), 1.0)?;
        let c = thermo_point(&gibbs_block(&s, theta)?).heat_capacity / (theta * theta);
        let limit = (n * (n + 2)) as f64 / 12.0;
        worst_limit = worst_limit.max(rel(c, limit));
    }
    Ok((
        worst <= CLOSED_FORM_REL && worst_limit <= HIGH_T_REL,
        format!("closed form {worst:.2e} (tol {CLOSED_FORM_REL:.0e}); n(n+2)/12 limit {worst_limit:.2e} (tol {HIGH_T_REL:.0e})"),
    ))
}

fn asymptotic_variance() -> Verdict {
    let start = Instant::now();
    let n = 1000;
    let e = SpinEnsemble::qubits(n)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, model, want) in [
        ("x=1", ModelSpec::Linear, 1.0 / 12.0),
        ("x=2", ModelSpec::PowerX { x: 2 }, 1.0 / 180.0),
        ("lmg", ModelSpec::Lmg { gamma: 0.7 }, 1.0 / 180.0 + 0.49 / 12.0),
    ] {
        let s = subspace_spectrum(&model, &e, e.max_j(), 1.0)?;
        let got = thermo_point(&gibbs_block(&s, 1e-6)?).var_energy / (n as f64 * n as f64);
        let err = rel(got, want);
        ok &= err <= ASYMPTOTIC_REL;
        parts.push(format!("{label} {got:.7} vs {want:.7} ({err:.1e})"));
    }
    let elapsed = start.elapsed();
    Ok((ok && elapsed < ASYMPTOTIC_BUDGET, format!("{}; {:.2} s", parts.join(", "), elapsed.as_secs_f64())))
}

fn scaling_exponents() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, model) in [
        ("x=1", ModelSpec::Linear),
        ("x=2", ModelSpec::PowerX { x: 2 }),
        ("lmg", ModelSpec::Lmg { gamma: 0.7 }),
    ] {
        let plan = SweepPlan {
            base: fig1_base(model, 10),
            axis1: Axis::new(AxisName::N, (10..=100).map(f64::from).collect())?,
            axis2: None,
            constraint: Constraint::FixDelta(0.005),
        };
        let rows = run_sweep(&plan, Execution::Parallel)?;
        for (q, want, name) in [
            (Quantity::VarW, 2.0, "var(W)"),
            (Quantity::AbsMeanW, 2.0, "|<W>|"),
            (Quantity::LambdaR, 1.0, "lambda_r"),
        ] {
            let fit = fit_scaling(&rows, q)?;
            let pass = (fit.exponent - want).abs() <= SLOPE_TOL;
            ok &= pass;
            parts.push(format!(
                "{label} {name} {:.3}±{:.3}{}",
                fit.exponent,
                fit.exponent_stderr,
                if pass { "" } else { " (out of tolerance)" }
            ));
        }
    }
    let elapsed = start.elapsed();
    Ok((
        ok && elapsed < SCALING_BUDGET,
        format!("fit n in [55, 100]: {}; {:.2} s", parts.join(", "), elapsed.as_secs_f64()),
    ))
}

fn lambda_limit() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [10u32, 20, 50] {
        let p = fig1_cycle(ModelSpec::Linear, n)?;
        let col = engine_metrics(&moments(&joint_distribution(&p)?), &p);
        let ind = engine_metrics(&independent_moments(&p)?, &p);
        let lam = reliability_ratio(&col, &ind)?;
        let want = (n as f64 + 2.0) / 3.0;
        ok &= rel(lam, want) <= LAMBDA_REL;
        parts.push(format!("n={n} {lam:.4} vs {want:.4}"));
    }
    Ok((ok, parts.join(", ")))
}

fn tur_suite() -> Verdict {
    // (a) collective bound on random draws
    let draws = random_engine_draws(TUR_DRAWS, TUR_MAX_N, DEFAULT_SEED)?;
    let margins = Execution::Parallel.map(&draws, |p| -> Result<f64> {
        let m = engine_metrics(&moments(&joint_distribution(p)?), p);
        Ok(m.uncertainty_q.unwrap_or(f64::NAN) - m.tur_rhs_collective)
    });
    let mut min_margin = f64::INFINITY;
    let mut violations = 0;
    for m in margins {
        let m = m?;
        if !(m >= -TUR_SLACK) {
            violations += 1;
        }
        min_margin = min_margin.min(m);
    }

    // (b) standard-TUR violation with n >= 20, θ_h <= 0.05
    let mut witness = None;
    'search: for n in [20u32, 30, 40, 60] {
        for t_h in [0.5, 2.0, 10.0, 100.0, 1000.0] {
            let beta_h = 1.0 / t_h;
            if beta_h * 0.5 > 0.05 {
                continue;
            }
            let beta_c = otto_core::sweep::carnot_beta_c(0.1, 0.5, beta_h, 0.005)?;
            let p = otto_core::work_stats::CycleParams::symmetric(ModelSpec::Linear, SpinEnsemble::qubits(n)?, 0.1, 0.5, beta_c, beta_h)?;
            let m = engine_metrics(&moments(&joint_distribution(&p)?), &p);
            if let Some(t) = tur_check(&m) {
                if t.standard_violation {
                    witness = Some(format!("n={n} θ_h={:.3} Q={:.5}", p.theta_h(), m.uncertainty_q.unwrap()));
                    break 'search;
                }
            }
        }
    }

    // (c) Q_ind independent of n
    let p1 = fig1_cycle(ModelSpec::Linear, 1)?;
    let q1 = engine_metrics(&independent_moments(&p1)?, &p1).uncertainty_q.unwrap();
    let mut q_spread: f64 = 0.0;
    for n in 1..=100 {
        let p = fig1_cycle(ModelSpec::Linear, n)?.with_coupling(Coupling::Independent)?;
        let q = engine_metrics(&independent_moments(&p)?, &p).uncertainty_q.unwrap();
        q_spread = q_spread.max((q - q1).abs());
    }

    // (d) f >= 2 on the scan grid, approaching 2 as Δ -> 0
    let mut f_min = f64::INFINITY;
    let mut f_min_by_delta = Vec::new();
    for l in 0..=40 {
        let d = 1e-3 * 5000f64.powf(l as f64 / 40.0);
        let mut row_min = f64::INFINITY;
        for i in 0..=60 {
            let th = 0.01 * 2000f64.powf(i as f64 / 60.0);
            row_min = row_min.min(tur_bound_f(th + d, th)?.f_value);
        }
        f_min = f_min.min(row_min);
        f_min_by_delta.push(row_min);
    }
    let approaches_two = f_min_by_delta.windows(2).all(|w| w[0] <= w[1]) && f_min_by_delta[0] - 2.0 < 1e-6;

    let ok = violations == 0 && witness.is_some() && q_spread <= Q_IND_ABS && f_min >= 2.0 - 1e-10 && approaches_two;
    Ok((
        ok,
        format!(
            "{violations} violations in {TUR_DRAWS} draws (min margin {min_margin:.2e}); standard violation at {}; Q_ind spread {q_spread:.1e}; min f {f_min:.9}",
            witness.unwrap_or_else(|| "none".into())
        ),
    ))
}

fn dynamics() -> Verdict {
    let mut worst_tv: f64 = 0.0;
    let mut worst_kms: f64 = 0.0;
    for n in 1..=10 {
        let e = SpinEnsemble::qubits(n)?;
        let (beta, omega) = (1.0, 1.0);
        let r = build_rate_matrix(&ModelSpec::Linear, &e, e.max_j(), omega, &BathSpec::new(beta, 1.0))?;
        let p = evolve_populations(&r, &uniform_populations(&r), 50.0)?;
        worst_tv = worst_tv.max(steady_state_residual(&p, r.gibbs())?);
        for i in 0..r.dim() - 1 {
            worst_kms = worst_kms.max(rel(r.down[i + 1] / r.up[i], (beta * omega).exp()));
        }
    }
    let mutated = run_validation(Level::Fast, Some(Fault::DissipatorSign));
    let caught = mutated.iter().any(|c| c.name == "detailed_balance" && !c.passed);
    Ok((
        worst_tv < TV_TARGET && worst_kms <= KMS_REL && caught,
        format!(
            "TV {worst_tv:.2e} (tol {TV_TARGET:.0e}), KMS {worst_kms:.1e}, sign mutation {}",
            if caught { "caught" } else { "missed" }
        ),
    ))
}

fn figure_reproduction() -> Verdict {
    let plan = SweepPlan {
        base: fig1_base(ModelSpec::Linear, 2),
        axis1: Axis::new(AxisName::N, (2..=60).map(f64::from).collect())?,
        axis2: Some("t_h=log:0.1:1000:25".parse()?),
        constraint: Constraint::FixDelta(0.005),
    };
    let rows = run_sweep(&plan, Execution::Parallel)?;
    let ok_rows = rows.iter().filter(|r| r.status == RowStatus::Ok).count();
    let lambda_contour = contour_crossings(&rows, Quantity::LambdaR, 1.0);
    let q_contour = contour_crossings(&rows, Quantity::UncertaintyQ, 2.0);

    let mut monotone_breaks = 0;
    for chunk in rows.chunks(25) {
        if chunk[0].n < 10 {
            continue;
        }
        let lams: Vec<f64> = chunk.iter().filter_map(|r| r.lambda_r).collect();
        monotone_breaks += lams.windows(2).filter(|w| w[1] < w[0]).count();
    }
    Ok((
        ok_rows == rows.len() && !lambda_contour.is_empty() && !q_contour.is_empty() && monotone_breaks == 0,
        format!(
            "{} points; lambda_r=1 crossings {}, Q=2 crossings {}, monotonicity breaks {monotone_breaks}",
            rows.len(),
            lambda_contour.len(),
            q_contour.len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("oracle triangle", oracle_triangle),
        ("heat-capacity formulas", heat_capacity),
        ("asymptotic var(H)", asymptotic_variance),
        ("scaling exponents", scaling_exponents),
        ("lambda_r closed-form limit", lambda_limit),
        ("TUR suite", tur_suite),
        ("dynamics", dynamics),
        ("two-axis sweep contours", figure_reproduction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("criterion {}: {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
