use otto_core::io::{write_rows, OutputFormat};
use otto_core::sweep::{fit_scaling, run_sweep, Constraint, CouplingSpec, Quantity, RowStatus, SweepBase, SweepPlan};
use otto_core::spectra::{ModelSpec, SpinEnsemble};
use otto_core::Execution;

fn plan(axis1: &str, axis2: Option<&str>) -> SweepPlan {
    SweepPlan {
        base: SweepBase {
            model: ModelSpec::Linear,
            ensemble: SpinEnsemble::qubits(2).unwrap(),
            omega_c: 0.1,
            omega_h: 0.5,
            beta_c: 0.05,
            beta_h: 1e-6,
            coupling: CouplingSpec::Symmetric,
        },
        axis1: axis1.parse().unwrap(),
        axis2: axis2.map(|a| a.parse().unwrap()),
        constraint: Constraint::FixDelta(0.005),
    }
}

#[test]
fn sequential_and_parallel_rows_identical() {
    let p = plan("n=2:30", Some("t_h=log:0.1:100:6"));
    let a = run_sweep(&p, Execution::Sequential).unwrap();
    let b = run_sweep(&p, Execution::Parallel).unwrap();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    write_rows(&mut ca, &a, OutputFormat::Csv).unwrap();
    write_rows(&mut cb, &b, OutputFormat::Csv).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a.len(), 29 * 6);
}

#[test]
fn csv_header_and_row_count() {
    let rows = run_sweep(&plan("n=2,3,4", None), Execution::default()).unwrap();
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows, OutputFormat::Csv).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("index,axis1,axis2,status,message,model"));
    assert!(header.ends_with("pred_lambda_r,f_bound"));
    assert_eq!(lines.count(), 3);
    assert!(rows.iter().all(|r| r.status == RowStatus::Ok));
}

#[test]
fn invalid_points_become_skip_rows() {
    let mut p = plan("n=2,3", None);
    p.base.omega_c = 0.5;
    let rows = run_sweep(&p, Execution::default()).unwrap();
    assert!(rows.iter().all(|r| r.status != RowStatus::Ok));
}

#[test]
fn linear_variance_scaling_near_two() {
    let rows = run_sweep(&plan("n=10:100", None), Execution::default()).unwrap();
    let fit = fit_scaling(&rows, Quantity::VarW).unwrap();
    assert!((fit.exponent - 2.0).abs() < 0.05, "{fit:?}");
    let fit = fit_scaling(&rows, Quantity::IndVarW).unwrap();
    assert!((fit.exponent - 1.0).abs() < 1e-6, "{fit:?}");
}
