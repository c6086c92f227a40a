//! Brute-force TPM enumeration over the product basis of independent qubits.

use std::collections::BTreeMap;

use super::{Atom, AtomKey, CycleParams, Coupling, WorkHeatDistribution};
use crate::spectra::ModelSpec;
use crate::steady_state::independent_qubit_state;
use crate::sum::CompensatedSum;
use crate::{Error, HalfInt, Result};

/// Largest `n` accepted by [`product_basis_oracle`] (`4^12 ≈ 1.7·10⁷` outcomes).
pub const PRODUCT_ORACLE_MAX_N: u32 = 12;

/// Enumerate all `4^n` measurement records of `n` independently coupled
/// qubits. Records with the same outcome counts are aggregated into one atom.
pub fn product_basis_oracle(params: &CycleParams) -> Result<WorkHeatDistribution> {
    let n = params.ensemble.n;
    if !matches!(params.coupling, Coupling::Independent) {
        return Err(Error::Unsupported("product-basis oracle needs independent coupling".into()));
    }
    if params.ensemble.s != HalfInt::HALF || params.model.order() != 1 {
        return Err(Error::Unsupported("product-basis oracle covers linear spin-1/2 only".into()));
    }
    if n > PRODUCT_ORACLE_MAX_N {
        return Err(Error::CostGuard(format!(
            "product-basis oracle limited to n <= {PRODUCT_ORACLE_MAX_N}, got {n}"
        )));
    }
    debug_assert!(matches!(params.model, ModelSpec::Linear | ModelSpec::PowerX { x: 1 }));

    let up_c = independent_qubit_state(params.beta_c, params.omega_c)?.excited_population;
    let up_h = independent_qubit_state(params.beta_h, params.omega_h)?.excited_population;
    let m = [-0.5, 0.5];
    let p_cold = [1.0 - up_c, up_c];
    let p_hot = [1.0 - up_h, up_h];
    // outcome t = 2·initial + after_hot
    let mut w = [0.0; 4];
    let mut q = [0.0; 4];
    let mut p = [0.0; 4];
    for t in 0..4 {
        let (i, k) = (t / 2, t % 2);
        w[t] = (params.omega_h - params.omega_c) * (m[i] - m[k]);
        q[t] = params.omega_h * (m[k] - m[i]);
        p[t] = p_cold[i] * p_hot[k];
    }

    let mut acc: BTreeMap<[u16; 4], CompensatedSum> = BTreeMap::new();
    for record in 0..4u64.pow(n) {
        let mut counts = [0u16; 4];
        let mut prob = 1.0;
        let mut r = record;
        for _ in 0..n {
            let t = (r % 4) as usize;
            counts[t] += 1;
            prob *= p[t];
            r /= 4;
        }
        acc.entry(counts).or_default().add(prob);
    }

    let atoms = acc
        .into_iter()
        .map(|(counts, prob)| {
            let c = counts.map(f64::from);
            Atom {
                w: (0..4).map(|t| c[t] * w[t]).sum(),
                q_h: (0..4).map(|t| c[t] * q[t]).sum(),
                p: prob.value(),
                key: AtomKey::Product { counts },
            }
        })
        .collect();
    Ok(WorkHeatDistribution { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::SpinEnsemble;
    use crate::work_stats::{independent_moments, joint_distribution, moments};

    fn independent(n: u32) -> CycleParams {
        let e = SpinEnsemble::qubits(n).unwrap();
        CycleParams::new(ModelSpec::Linear, e, 0.1, 0.5, 2.0, 0.2, Coupling::Independent).unwrap()
    }

    #[test]
    fn matches_scaled_single_spin() {
        for n in 1..=6 {
            let p = independent(n);
            let d = product_basis_oracle(&p).unwrap();
            assert!((d.total_probability() - 1.0).abs() < 1e-12);
            let (a, b) = (moments(&d), independent_moments(&p).unwrap());
            for (x, y) in [(a.mean_w, b.mean_w), (a.var_w, b.var_w), (a.mean_q_h, b.mean_q_h), (a.var_q_h, b.var_q_h), (a.cov_w_q_h, b.cov_w_q_h)] {
                assert!((x - y).abs() <= 1e-10 * y.abs(), "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn single_qubit_equals_collective() {
        let p = independent(1);
        let a = moments(&product_basis_oracle(&p).unwrap());
        let b = moments(&joint_distribution(&p).unwrap());
        assert!((a.mean_w - b.mean_w).abs() < 1e-16 && (a.var_w - b.var_w).abs() < 1e-16);
    }

    #[test]
    fn cost_guard() {
        assert!(matches!(product_basis_oracle(&independent(13)), Err(Error::CostGuard(_))));
        let e = SpinEnsemble::qubits(2).unwrap();
        let p = CycleParams::symmetric(ModelSpec::Linear, e, 0.1, 0.5, 2.0, 0.2).unwrap();
        assert!(product_basis_oracle(&p).is_err());
    }
}
