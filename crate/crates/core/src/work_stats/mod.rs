//! Two-point-measurement statistics of one Otto cycle.
//!
//! The working medium starts in the cold steady state at frequency `ω_c`,
//! is ramped to `ω_h` (work `W₁`), thermalizes with the hot bath (heat
//! `Q_h`), is ramped back (work `W₂`) and thermalizes with the cold bath.
//! Projective energy measurements at each corner give the joint
//! distribution of `W = W₁ + W₂` and `Q_h`.
//!
//! Sign convention: `W` is work done on the medium, so an engine has
//! `⟨W⟩ < 0`.

mod characteristic;
mod oracle;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use characteristic::{
    characteristic_function, characteristic_function_enumerated, moments_from_characteristic,
    FiniteDifference,
};
pub use oracle::{product_basis_oracle, PRODUCT_ORACLE_MAX_N};

use crate::spectra::{self, ModelSpec, SpinEnsemble};
use crate::steady_state::{gibbs_block, BlockWeights};
use crate::sum::CompensatedSum;
use crate::{Error, Execution, HalfInt, Result};

/// Default relative tolerance for merging degenerate atoms on export.
pub const MERGE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// All spins couple through the collective operators; block weights `P_j`.
    Collective(BlockWeights),
    /// Every spin couples to its own bath.
    Independent,
}

impl Coupling {
    pub fn is_collective(&self) -> bool {
        matches!(self, Coupling::Collective(_))
    }
}

/// Parameters of one Otto cycle.
///
/// Construction enforces `0 < ω_c ≤ ω_h`, `β_c ≥ β_h ≥ 0` and `β_c > 0`.
/// The equalities are admitted so that degenerate cycles can be analyzed;
/// [`CycleParams::is_engine_regime`] tells whether the cycle runs as an
/// engine.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleParams {
    pub model: ModelSpec,
    pub ensemble: SpinEnsemble,
    pub omega_c: f64,
    pub omega_h: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub coupling: Coupling,
}

impl CycleParams {
    pub fn new(
        model: ModelSpec,
        ensemble: SpinEnsemble,
        omega_c: f64,
        omega_h: f64,
        beta_c: f64,
        beta_h: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        model.validate()?;
        for (name, v) in [("omega_c", omega_c), ("omega_h", omega_h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if omega_c > omega_h {
            return Err(Error::invalid(
                "omega_c",
                format!("must not exceed omega_h ({omega_c} > {omega_h})"),
            ));
        }
        for (name, v) in [("beta_c", beta_c), ("beta_h", beta_h)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if beta_c <= 0.0 {
            return Err(Error::invalid("beta_c", "must be positive"));
        }
        if beta_c < beta_h {
            return Err(Error::invalid(
                "beta_c",
                format!("the cold bath must be colder than the hot one ({beta_c} < {beta_h})"),
            ));
        }
        if let Coupling::Collective(w) = &coupling {
            for (j, _) in w.iter() {
                if !ensemble.contains_block(j) {
                    return Err(Error::DisallowedBlock {
                        j: j.to_string(),
                        reason: "weight on a block the ensemble does not have".into(),
                    });
                }
            }
        }
        Ok(CycleParams {
            model,
            ensemble,
            omega_c,
            omega_h,
            beta_c,
            beta_h,
            coupling,
        })
    }

    /// Same cycle with all weight in the Dicke block.
    pub fn symmetric(
        model: ModelSpec,
        ensemble: SpinEnsemble,
        omega_c: f64,
        omega_h: f64,
        beta_c: f64,
        beta_h: f64,
    ) -> Result<Self> {
        let w = BlockWeights::symmetric(&ensemble);
        Self::new(model, ensemble, omega_c, omega_h, beta_c, beta_h, Coupling::Collective(w))
    }

    pub fn with_coupling(&self, coupling: Coupling) -> Result<Self> {
        Self::new(
            self.model,
            self.ensemble,
            self.omega_c,
            self.omega_h,
            self.beta_c,
            self.beta_h,
            coupling,
        )
    }

    pub fn theta_c(&self) -> f64 {
        self.beta_c * self.omega_c
    }

    pub fn theta_h(&self) -> f64 {
        self.beta_h * self.omega_h
    }

    /// `Δ = θ_c − θ_h`.
    pub fn delta(&self) -> f64 {
        self.theta_c() - self.theta_h()
    }

    /// Otto efficiency `1 − ω_c/ω_h`.
    pub fn eta(&self) -> f64 {
        1.0 - self.omega_c / self.omega_h
    }

    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.beta_h / self.beta_c
    }

    /// `Δη = η_C − η = Δ / (β_c ω_h)`.
    pub fn delta_eta(&self) -> f64 {
        self.delta() / (self.beta_c * self.omega_h)
    }

    /// `ω_c < ω_h`, `β_c > β_h > 0` and `Δ > 0`.
    pub fn is_engine_regime(&self) -> bool {
        self.omega_c < self.omega_h && self.beta_c > self.beta_h && self.beta_h > 0.0 && self.delta() > 0.0
    }
}

/// Identity of the measurement record that produced an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomKey {
    /// Collective block `j`; level index `initial` measured at the start of the
    /// cycle and `after_hot` at the end of the hot stroke.
    Levels { j: HalfInt, initial: u32, after_hot: u32 },
    /// Independent spins: how many spins had each `(initial, after_hot)`
    /// outcome, indexed `[↓↓, ↓↑, ↑↓, ↑↑]`.
    Product { counts: [u16; 4] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub q_h: f64,
    pub p: f64,
    pub key: AtomKey,
}

/// A merged `(W, Q_h, p)` triple for export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergedAtom {
    pub w: f64,
    pub q_h: f64,
    pub p: f64,
}

/// Exact joint distribution of work and hot-bath heat.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorkHeatDistribution {
    pub atoms: Vec<Atom>,
}

impl WorkHeatDistribution {
    pub fn total_probability(&self) -> f64 {
        crate::sum::sum(self.atoms.iter().map(|a| a.p))
    }

    fn energy_scale(&self) -> f64 {
        let s = self
            .atoms
            .iter()
            .fold(0.0f64, |acc, a| acc.max(a.w.abs()).max(a.q_h.abs()));
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Merge atoms whose `(W, Q_h)` agree within `rel_tol` times the largest
    /// energy in the distribution. Merged values are probability-weighted
    /// means; output is sorted by `(W, Q_h)`.
    pub fn merged(&self, rel_tol: f64) -> Vec<MergedAtom> {
        let tol = rel_tol * self.energy_scale();
        // key order first so equal (W, Q_h) ties resolve identically every run
        let mut idx: Vec<usize> = (0..self.atoms.len()).collect();
        idx.sort_by(|&a, &b| {
            let (x, y) = (&self.atoms[a], &self.atoms[b]);
            x.w.total_cmp(&y.w)
                .then(x.q_h.total_cmp(&y.q_h))
                .then(x.key.cmp(&y.key))
        });

        let mut out = Vec::new();
        let mut start = 0;
        while start < idx.len() {
            let mut end = start + 1;
            while end < idx.len() && self.atoms[idx[end]].w - self.atoms[idx[end - 1]].w <= tol {
                end += 1;
            }
            let mut group: Vec<usize> = idx[start..end].to_vec();
            group.sort_by(|&a, &b| {
                let (x, y) = (&self.atoms[a], &self.atoms[b]);
                x.q_h.total_cmp(&y.q_h).then(x.key.cmp(&y.key))
            });
            let mut g0 = 0;
            while g0 < group.len() {
                let mut g1 = g0 + 1;
                while g1 < group.len()
                    && self.atoms[group[g1]].q_h - self.atoms[group[g1 - 1]].q_h <= tol
                {
                    g1 += 1;
                }
                let mut p = CompensatedSum::new();
                let mut pw = CompensatedSum::new();
                let mut pq = CompensatedSum::new();
                for &i in &group[g0..g1] {
                    let a = &self.atoms[i];
                    p.add(a.p);
                    pw.add(a.p * a.w);
                    pq.add(a.p * a.q_h);
                }
                let (p, first) = (p.value(), &self.atoms[group[g0]]);
                let (w, q_h) = if p > 0.0 {
                    (pw.value() / p, pq.value() / p)
                } else {
                    (first.w, first.q_h)
                };
                out.push(MergedAtom { w, q_h, p });
                g0 = g1;
            }
            start = end;
        }
        out.sort_by(|a, b| a.w.total_cmp(&b.w).then(a.q_h.total_cmp(&b.q_h)));
        out
    }

    /// Merged atoms as CSV rows `w,q_h,p` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W, rel_tol: f64) -> Result<()> {
        writeln!(out, "w,q_h,p")?;
        for a in self.merged(rel_tol) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", a.w, a.q_h, a.p)?;
        }
        Ok(())
    }
}

/// Joint TPM distribution for collective coupling.
pub fn joint_distribution(params: &CycleParams) -> Result<WorkHeatDistribution> {
    joint_distribution_with(params, Execution::default())
}

/// [`joint_distribution`] with an explicit execution strategy over blocks.
pub fn joint_distribution_with(params: &CycleParams, exec: Execution) -> Result<WorkHeatDistribution> {
    let weights = match &params.coupling {
        Coupling::Collective(w) => w,
        Coupling::Independent if params.ensemble.n == 1 => {
            return joint_distribution_with(&single_particle(params)?, exec)
        }
        Coupling::Independent => {
            return Err(Error::Unsupported(
                "independent coupling: use independent_ensemble_moments or product_basis_oracle".into(),
            ))
        }
    };
    let blocks: Vec<(HalfInt, f64)> = weights.iter().collect();
    let per_block = exec.map(&blocks, |&(j, weight)| block_atoms(params, j, weight));
    let mut atoms = Vec::new();
    for block in per_block {
        atoms.extend(block?);
    }
    Ok(WorkHeatDistribution { atoms })
}

fn block_atoms(params: &CycleParams, j: HalfInt, weight: f64) -> Result<Vec<Atom>> {
    let cold = spectra::subspace_spectrum(&params.model, &params.ensemble, j, params.omega_c)?;
    let hot = spectra::subspace_spectrum(&params.model, &params.ensemble, j, params.omega_h)?;
    let p_cold = gibbs_block(&cold, params.beta_c)?.populations;
    let p_hot = gibbs_block(&hot, params.beta_h)?.populations;
    let d = cold.len();
    let mut atoms = Vec::with_capacity(d * d);
    for i in 0..d {
        let (e0_i, et_i) = (cold.levels[i].energy, hot.levels[i].energy);
        for k in 0..d {
            let (e0_k, et_k) = (cold.levels[k].energy, hot.levels[k].energy);
            atoms.push(Atom {
                w: (et_i - e0_i) + (e0_k - et_k),
                q_h: et_k - et_i,
                p: weight * p_cold[i] * p_hot[k],
                key: AtomKey::Levels {
                    j,
                    initial: i as u32,
                    after_hot: k as u32,
                },
            });
        }
    }
    Ok(atoms)
}

/// The one-particle cycle (`n = 1`, same spin, same frequencies and baths).
pub fn single_particle(params: &CycleParams) -> Result<CycleParams> {
    let one = SpinEnsemble::new(1, params.ensemble.s)?;
    CycleParams::new(
        ModelSpec::Linear,
        one,
        params.omega_c,
        params.omega_h,
        params.beta_c,
        params.beta_h,
        Coupling::Collective(BlockWeights::symmetric(&one)),
    )
}

/// First and second moments of `W` and `Q_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_w: f64,
    pub mean_w2: f64,
    pub var_w: f64,
    pub mean_q_h: f64,
    pub mean_q_h2: f64,
    pub var_q_h: f64,
    pub mean_w_q_h: f64,
    pub cov_w_q_h: f64,
}

impl Moments {
    /// `⟨Q_c⟩` from the first law on cycle averages.
    pub fn mean_q_c(&self) -> f64 {
        -self.mean_w - self.mean_q_h
    }
}

/// Moments by compensated, two-pass summation over the atoms.
pub fn moments(dist: &WorkHeatDistribution) -> Moments {
    let mut w = CompensatedSum::new();
    let mut q = CompensatedSum::new();
    for a in &dist.atoms {
        w.add(a.p * a.w);
        q.add(a.p * a.q_h);
    }
    let (mean_w, mean_q_h) = (w.value(), q.value());
    let mut vw = CompensatedSum::new();
    let mut vq = CompensatedSum::new();
    let mut cwq = CompensatedSum::new();
    for a in &dist.atoms {
        let (dw, dq) = (a.w - mean_w, a.q_h - mean_q_h);
        vw.add(a.p * dw * dw);
        vq.add(a.p * dq * dq);
        cwq.add(a.p * dw * dq);
    }
    let (var_w, var_q_h, cov_w_q_h) = (vw.value().max(0.0), vq.value().max(0.0), cwq.value());
    Moments {
        mean_w,
        mean_w2: var_w + mean_w * mean_w,
        var_w,
        mean_q_h,
        mean_q_h2: var_q_h + mean_q_h * mean_q_h,
        var_q_h,
        mean_w_q_h: cov_w_q_h + mean_w * mean_q_h,
        cov_w_q_h,
    }
}

/// Moments of `n` independent copies of a single-spin engine: means,
/// variances and the covariance all scale by `n`.
pub fn independent_ensemble_moments(single: &Moments, n: u32) -> Moments {
    let nf = n as f64;
    let (mean_w, mean_q_h) = (nf * single.mean_w, nf * single.mean_q_h);
    let (var_w, var_q_h, cov) = (nf * single.var_w, nf * single.var_q_h, nf * single.cov_w_q_h);
    Moments {
        mean_w,
        mean_w2: var_w + mean_w * mean_w,
        var_w,
        mean_q_h,
        mean_q_h2: var_q_h + mean_q_h * mean_q_h,
        var_q_h,
        mean_w_q_h: cov + mean_w * mean_q_h,
        cov_w_q_h: cov,
    }
}

/// Moments of the independent-coupling engine with the same spins, baths
/// and frequencies as `params`, built from the exact one-particle cycle.
pub fn independent_moments(params: &CycleParams) -> Result<Moments> {
    let single = moments(&joint_distribution_with(&single_particle(params)?, Execution::Sequential)?);
    Ok(independent_ensemble_moments(&single, params.ensemble.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn qubit(omega_c: f64, omega_h: f64, theta_c: f64, theta_h: f64) -> CycleParams {
        CycleParams::symmetric(
            ModelSpec::Linear,
            SpinEnsemble::qubits(1).unwrap(),
            omega_c,
            omega_h,
            theta_c / omega_c,
            theta_h / omega_h,
        )
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Four-outcome qubit enumeration written out by hand.
    fn qubit_oracle(p: &CycleParams) -> (f64, f64) {
        let up_c = 1.0 / (1.0 + p.theta_c().exp());
        let up_h = 1.0 / (1.0 + p.theta_h().exp());
        let dw = p.omega_h - p.omega_c;
        let mut mean = 0.0;
        let mut second = 0.0;
        for (mi, pi) in [(-0.5, 1.0 - up_c), (0.5, up_c)] {
            for (mk, pk) in [(-0.5, 1.0 - up_h), (0.5, up_h)] {
                let w: f64 = dw * (mi - mk);
                mean += pi * pk * w;
                second += pi * pk * w * w;
            }
        }
        (mean, second - mean * mean)
    }

    #[test]
    fn qubit_has_four_atoms_and_known_mean() {
        let p = qubit(0.1, 0.5, 0.2, 0.1);
        let d = joint_distribution(&p).unwrap();
        assert_eq!(d.atoms.len(), 4);
        let m = moments(&d);
        let closed = (0.5 - 0.1) * ((0.05f64).tanh() - (0.1f64).tanh()) / 2.0;
        let (oracle_mean, oracle_var) = qubit_oracle(&p);
        assert!(rel(m.mean_w, closed) < 1e-13);
        assert!(rel(m.mean_w, oracle_mean) < 1e-13);
        assert!((m.mean_w - -0.00994192).abs() < 5e-9);
        assert!(rel(m.var_w, oracle_var) < 1e-13);
        let sech2 = |x: f64| 1.0 / x.cosh().powi(2);
        let var_closed = 0.4f64.powi(2) * (sech2(0.1) + sech2(0.05)) / 4.0;
        assert!(rel(m.var_w, var_closed) < 1e-13);
    }

    #[test]
    fn degenerate_cycle_has_no_work_or_heat() {
        let p = CycleParams::symmetric(ModelSpec::Linear, SpinEnsemble::qubits(3).unwrap(), 0.4, 0.4, 1.1, 1.1).unwrap();
        let m = moments(&joint_distribution(&p).unwrap());
        assert_eq!(m.mean_w, 0.0);
        assert!(m.mean_q_h.abs() < 1e-15);
        assert_eq!(m.var_w, 0.0);
    }

    #[test]
    fn point_mass_moments() {
        let d = WorkHeatDistribution {
            atoms: vec![Atom {
                w: -0.3,
                q_h: 0.7,
                p: 1.0,
                key: AtomKey::Levels { j: HalfInt::HALF, initial: 0, after_hot: 0 },
            }],
        };
        let m = moments(&d);
        assert_eq!(m.mean_w, -0.3);
        assert_eq!(m.var_w, 0.0);
        assert_eq!(m.mean_q_h, 0.7);
    }

    #[test]
    fn two_qubit_dicke_block_has_nine_atoms() {
        let p = CycleParams::symmetric(ModelSpec::Linear, SpinEnsemble::qubits(2).unwrap(), 0.1, 0.5, 2.0, 0.2).unwrap();
        let d = joint_distribution(&p).unwrap();
        assert_eq!(d.atoms.len(), 9);
        assert!((d.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_uses_per_block_normalization() {
        let e = SpinEnsemble::qubits(2).unwrap();
        let w = BlockWeights::new(&e, &BTreeMap::from([(HalfInt::ZERO, 0.25), (HalfInt::ONE, 0.75)])).unwrap();
        let p = CycleParams::new(ModelSpec::Linear, e, 0.1, 0.5, 2.0, 0.2, Coupling::Collective(w)).unwrap();
        let d = joint_distribution(&p).unwrap();
        assert_eq!(d.atoms.len(), 1 + 9);
        assert!((d.total_probability() - 1.0).abs() < 1e-12);
        let singlet: f64 = d
            .atoms
            .iter()
            .filter(|a| matches!(a.key, AtomKey::Levels { j, .. } if j == HalfInt::ZERO))
            .map(|a| a.p)
            .sum();
        assert!((singlet - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_cycles() {
        let e = SpinEnsemble::qubits(2).unwrap();
        assert!(CycleParams::symmetric(ModelSpec::Linear, e, 0.6, 0.5, 2.0, 0.2).is_err());
        assert!(CycleParams::symmetric(ModelSpec::Linear, e, 0.1, 0.5, 0.1, 0.2).is_err());
        assert!(CycleParams::symmetric(ModelSpec::Linear, e, 0.1, 0.5, 0.0, 0.0).is_err());
        assert!(CycleParams::symmetric(ModelSpec::Linear, e, 0.1, 0.5, f64::NAN, 0.2).is_err());
        let p = CycleParams::new(ModelSpec::Linear, e, 0.1, 0.5, 2.0, 0.2, Coupling::Independent).unwrap();
        assert!(joint_distribution(&p).is_err());
    }

    #[test]
    fn derived_quantities() {
        let p = qubit(0.1, 0.5, 0.2, 0.1);
        assert!((p.beta_c - 2.0).abs() < 1e-15 && (p.beta_h - 0.2).abs() < 1e-15);
        assert!((p.eta() - 0.8).abs() < 1e-15);
        assert!((p.eta_carnot() - 0.9).abs() < 1e-15);
        assert!((p.delta_eta() - (p.eta_carnot() - p.eta())).abs() < 1e-12);
        assert!(p.is_engine_regime());
    }

    #[test]
    fn engine_signs_and_first_law() {
        for n in [1u32, 3, 8] {
            let p = CycleParams::symmetric(ModelSpec::Linear, SpinEnsemble::qubits(n).unwrap(), 0.2, 0.7, 3.0, 0.5).unwrap();
            let m = moments(&joint_distribution(&p).unwrap());
            assert!(m.mean_w < 0.0 && m.mean_q_h > 0.0);
            assert!(m.mean_q_c() < 0.0);
            assert_eq!(m.mean_w + m.mean_q_h + m.mean_q_c(), 0.0);
        }
    }

    #[test]
    fn per_atom_first_law() {
        // W + Q_h + Q_c = 0 with Q_c = ε_i(ω_c) − ε_k(ω_c) for each record
        let p = CycleParams::symmetric(ModelSpec::Lmg { gamma: 0.7 }, SpinEnsemble::qubits(5).unwrap(), 0.3, 0.9, 2.0, 0.4).unwrap();
        let e = p.ensemble;
        let cold = spectra::subspace_spectrum(&p.model, &e, e.max_j(), p.omega_c).unwrap();
        for a in joint_distribution(&p).unwrap().atoms {
            let AtomKey::Levels { initial, after_hot, .. } = a.key else { unreachable!() };
            let q_c = cold.levels[initial as usize].energy - cold.levels[after_hot as usize].energy;
            assert!((a.w + a.q_h + q_c).abs() < 1e-14);
        }
    }

    #[test]
    fn merging_degenerate_levels_preserves_moments() {
        for x in [2u32, 4] {
            let p = CycleParams::symmetric(ModelSpec::PowerX { x }, SpinEnsemble::qubits(8).unwrap(), 0.2, 0.6, 1.5, 0.3).unwrap();
            let d = joint_distribution(&p).unwrap();
            let merged = d.merged(MERGE_REL_TOL);
            assert!(merged.len() < d.atoms.len());
            let as_dist = WorkHeatDistribution {
                atoms: merged
                    .iter()
                    .enumerate()
                    .map(|(i, a)| Atom {
                        w: a.w,
                        q_h: a.q_h,
                        p: a.p,
                        key: AtomKey::Levels { j: HalfInt::ZERO, initial: i as u32, after_hot: 0 },
                    })
                    .collect(),
            };
            let (a, b) = (moments(&d), moments(&as_dist));
            assert!((as_dist.total_probability() - 1.0).abs() < 1e-12);
            for (u, v) in [(a.mean_w, b.mean_w), (a.var_w, b.var_w), (a.mean_q_h, b.mean_q_h), (a.var_q_h, b.var_q_h), (a.cov_w_q_h, b.cov_w_q_h)] {
                assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn csv_export_has_seventeen_digits() {
        let p = qubit(0.1, 0.5, 0.2, 0.1);
        let mut buf = Vec::new();
        joint_distribution(&p).unwrap().write_csv(&mut buf, MERGE_REL_TOL).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("w,q_h,p"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 3);
        let mantissa = row[2].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
        // qubit: W ∈ {−0.4, 0, 0, 0.4} -> three merged atoms, the middle one twice
        assert_eq!(text.lines().count(), 1 + 3);
    }

    #[test]
    fn independent_scaling() {
        let p = qubit(0.1, 0.5, 0.2, 0.1);
        let one = moments(&joint_distribution(&p).unwrap());
        let hundred = independent_ensemble_moments(&one, 100);
        assert!(rel(hundred.mean_w, 100.0 * one.mean_w) < 1e-15);
        assert!((hundred.mean_w - -0.994192).abs() < 5e-7);
        assert_eq!(hundred.var_w / one.var_w, 100.0);
        assert_eq!(independent_ensemble_moments(&one, 1), one);
    }
}
