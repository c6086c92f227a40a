//! Equilibrium response: mean energy, energy variance and heat capacity.
//!
//! The heat capacity is `C = β² var(H)` (k_B = 1). Exact values come from
//! direct sums over block populations; the closed form for the linear Dicke
//! block and the large-`n` asymptotics are exposed separately so that their
//! finite-size error can be measured rather than assumed.

use serde::{Deserialize, Serialize};

use crate::spectra::ModelSpec;
use crate::steady_state::{check_beta, BlockGibbs, BlockMixture};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Below this `βω` the closed-form heat capacity returns its `β → 0` limit.
pub const SMALL_THETA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub omega: f64,
    /// `βω`.
    pub theta: f64,
    pub mean_energy: f64,
    /// Thermal energy variance. For block mixtures this is the `P_j`-weighted
    /// within-block variance, the quantity that `−∂⟨H⟩/∂β` measures.
    pub var_energy: f64,
    pub heat_capacity: f64,
}

impl ThermoPoint {
    pub(crate) fn new(beta: f64, omega: f64, mean_energy: f64, var_energy: f64) -> Self {
        ThermoPoint {
            beta,
            omega,
            theta: beta * omega,
            mean_energy,
            var_energy,
            heat_capacity: beta * beta * var_energy,
        }
    }

    /// `C / θ² = var(H) / ω²`, finite at `β = 0`.
    pub fn capacity_over_theta_sq(&self) -> f64 {
        self.var_energy / (self.omega * self.omega)
    }
}

/// `(⟨H⟩, var H)` of one block, two-pass about the block minimum.
pub(crate) fn block_energy_moments(g: &BlockGibbs) -> (f64, f64) {
    let e_min = g.spectrum.min_energy();
    let mut shifted = CompensatedSum::new();
    for (l, p) in g.spectrum.levels.iter().zip(&g.populations) {
        shifted.add(p * (l.energy - e_min));
    }
    let mean = e_min + shifted.value();
    let mut var = CompensatedSum::new();
    for (l, p) in g.spectrum.levels.iter().zip(&g.populations) {
        let d = l.energy - mean;
        var.add(p * d * d);
    }
    (mean, var.value().max(0.0))
}

/// Exact thermodynamics of a single Gibbs block.
pub fn thermo_point(g: &BlockGibbs) -> ThermoPoint {
    let (mean, var) = block_energy_moments(g);
    ThermoPoint::new(g.beta, g.spectrum.omega, mean, var)
}

/// Exact thermodynamics of a block mixture (fixed weights).
pub fn thermo_point_mixture(mix: &BlockMixture) -> Result<ThermoPoint> {
    let first = mix
        .blocks
        .first()
        .ok_or_else(|| Error::invalid("mixture", "no blocks"))?;
    let (beta, omega) = (first.gibbs.beta, first.gibbs.spectrum.omega);
    let mut mean = CompensatedSum::new();
    let mut var = CompensatedSum::new();
    for b in &mix.blocks {
        let (m, v) = block_energy_moments(&b.gibbs);
        mean.add(b.weight * m);
        var.add(b.weight * v);
    }
    Ok(ThermoPoint::new(beta, omega, mean.value(), var.value()))
}

/// Full energy variance of a mixture, including the spread of block means.
pub fn mixture_total_variance(mix: &BlockMixture) -> f64 {
    let mut mean = CompensatedSum::new();
    let moments: Vec<(f64, f64, f64)> = mix
        .blocks
        .iter()
        .map(|b| {
            let (m, v) = block_energy_moments(&b.gibbs);
            mean.add(b.weight * m);
            (b.weight, m, v)
        })
        .collect();
    let mean = mean.value();
    crate::sum::sum(moments.iter().map(|(w, m, v)| w * (v + (m - mean) * (m - mean))))
}

// B_2, B_4, ..., B_22
const BERNOULLI_EVEN: [f64; 11] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
];

/// `csch²(y) − 1/y²` for `y ≥ 0`, without cancellation near zero.
fn csch_sq_minus_pole(y: f64) -> f64 {
    if y < 0.3 {
        // csch²y = 1/y² − Σ_k (2k−1) 2^{2k} B_{2k} / (2k)! · y^{2k−2}
        let y2 = y * y;
        let mut acc = 0.0;
        let mut pow2 = 1.0; // 2^{2k}
        let mut fact = 1.0; // (2k)!
        let mut ypow = 1.0; // y^{2k-2}
        for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k = (i + 1) as f64;
            pow2 *= 4.0;
            fact *= (2.0 * k - 1.0) * (2.0 * k);
            acc -= (2.0 * k - 1.0) * pow2 * b / fact * ypow;
            ypow *= y2;
        }
        acc
    } else {
        let e = (-2.0 * y).exp_m1();
        4.0 * (-2.0 * y).exp() / (e * e) - 1.0 / (y * y)
    }
}

/// Closed-form heat capacity of the linear model in the Dicke block of `n`
/// qubits: `(βω)²/4 · [csch²(βω/2) − (n+1)² csch²((n+1)βω/2)]`.
pub fn heat_capacity_closed_form_linear(n: u32, beta: f64, omega: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", "must be positive and finite"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one particle"));
    }
    let theta = beta * omega;
    let nf = n as f64;
    if theta < SMALL_THETA {
        return Ok(theta * theta * nf * (nf + 2.0) / 12.0);
    }
    let a = theta / 2.0;
    let big = (nf + 1.0) * a;
    // The 1/y² poles of the two csch² terms cancel exactly.
    let bracket = csch_sq_minus_pole(a) - (nf + 1.0) * (nf + 1.0) * csch_sq_minus_pole(big);
    Ok(0.25 * theta * theta * bracket)
}

/// Leading large-`n`, `β → 0` energy variance in the Dicke block.
///
/// * `PowerX`, even `x`: `n²ω² x² / (4^x (2x+1)(x+1)²)`
/// * `PowerX`, odd `x` (and `Linear`): `n²ω² / (4^x (2x+1))`
/// * `Lmg`: `n²ω² (1/180 + γ²/12)`
pub fn var_h_asymptotic(model: &ModelSpec, n: u32, omega: f64) -> Result<f64> {
    model.validate()?;
    let scale = (n as f64) * (n as f64) * omega * omega;
    let unit = match *model {
        ModelSpec::Linear => 1.0 / 12.0,
        ModelSpec::PowerX { x } => {
            let xf = x as f64;
            let base = 4f64.powi(x as i32) * (2.0 * xf + 1.0);
            if x % 2 == 0 {
                xf * xf / (base * (xf + 1.0) * (xf + 1.0))
            } else {
                1.0 / base
            }
        }
        ModelSpec::Lmg { gamma } => 1.0 / 180.0 + gamma * gamma / 12.0,
    };
    Ok(scale * unit)
}

/// Heat capacity of `n` independent qubits with `H = ω Σ σ_z/2`.
pub fn heat_capacity_independent(n: u32, beta: f64, omega: f64) -> Result<f64> {
    check_beta(beta)?;
    let theta = beta * omega;
    let sech = 1.0 / (theta / 2.0).cosh();
    Ok(n as f64 * 0.25 * theta * theta * sech * sech)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{allowed_j, subspace_spectrum, SpinEnsemble};
    use crate::steady_state::{collective_steady_state, gibbs_block, BlockWeights};
    use crate::HalfInt;
    use std::collections::BTreeMap;

    fn dicke_point(model: &ModelSpec, n: u32, beta: f64, omega: f64) -> ThermoPoint {
        let e = SpinEnsemble::qubits(n).unwrap();
        let sp = subspace_spectrum(model, &e, e.max_j(), omega).unwrap();
        thermo_point(&gibbs_block(&sp, beta).unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn qubit_capacity_is_sech_squared() {
        for theta in [0.1, 1.0, 5.0] {
            let t = dicke_point(&ModelSpec::Linear, 1, theta, 1.0);
            let want = 0.25 * theta * theta / (theta / 2.0).cosh().powi(2);
            assert!(rel(t.heat_capacity, want) < 1e-13, "theta {theta}");
        }
    }

    #[test]
    fn capacity_is_beta_squared_variance() {
        let t = dicke_point(&ModelSpec::Lmg { gamma: 0.7 }, 9, 0.8, 1.3);
        assert!(rel(t.heat_capacity, t.beta * t.beta * t.var_energy) < 1e-14);
        assert!(t.var_energy >= 0.0);
    }

    #[test]
    fn infinite_temperature_limit_is_uniform_variance() {
        for n in [1u32, 2, 7, 10] {
            let t = dicke_point(&ModelSpec::Linear, n, 0.0, 1.0);
            let nf = n as f64;
            assert!(rel(t.capacity_over_theta_sq(), nf * (nf + 2.0) / 12.0) < 1e-14);
            assert_eq!(t.heat_capacity, 0.0);
        }
    }

    #[test]
    fn restricted_block_limit_is_j_j_plus_one_over_three() {
        let e = SpinEnsemble::qubits(10).unwrap();
        for j in allowed_j(&e) {
            let sp = subspace_spectrum(&ModelSpec::Linear, &e, j, 1.0).unwrap();
            let t = thermo_point(&gibbs_block(&sp, 1e-7).unwrap());
            let want = j.casimir() / 3.0;
            if want > 0.0 {
                assert!(rel(t.heat_capacity / (t.theta * t.theta), want) < 1e-9);
            } else {
                assert_eq!(t.heat_capacity, 0.0);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let c = heat_capacity_closed_form_linear(1, 1.0, 1.0).unwrap();
        let want = 0.25 / 0.5f64.cosh().powi(2);
        assert!(rel(c, want) < 1e-14);
        assert!((c - 0.196611).abs() < 1e-6);

        let c = heat_capacity_closed_form_linear(10, 1e-7, 1.0).unwrap();
        assert!(rel(c / 1e-14, 10.0) < 1e-12);

        // second term vanishes as n grows
        let c = heat_capacity_closed_form_linear(5000, 1.0, 1.0).unwrap();
        let csch2 = 1.0 / 0.5f64.sinh().powi(2);
        assert!(rel(c, 0.25 * csch2) < 1e-12);
    }

    #[test]
    fn closed_form_matches_gibbs_sum() {
        for n in [1u32, 2, 3, 10, 50, 200] {
            for theta in [1e-3, 0.01, 0.1, 1.0, 5.0, 10.0] {
                let brute = dicke_point(&ModelSpec::Linear, n, theta, 1.0).heat_capacity;
                let closed = heat_capacity_closed_form_linear(n, theta, 1.0).unwrap();
                assert!(rel(closed, brute) < 1e-9, "n {n} theta {theta}: {closed} vs {brute}");
            }
        }
    }

    #[test]
    fn series_and_direct_branches_meet() {
        let below = csch_sq_minus_pole(0.3 - 1e-12);
        let above = csch_sq_minus_pole(0.3);
        assert!((below - above).abs() < 1e-13);
        assert!((csch_sq_minus_pole(0.0) + 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn asymptotic_variance_constants() {
        let n = 10;
        let s = 100.0;
        assert!(rel(var_h_asymptotic(&ModelSpec::Linear, n, 1.0).unwrap(), s / 12.0) < 1e-15);
        assert!(rel(var_h_asymptotic(&ModelSpec::PowerX { x: 1 }, n, 1.0).unwrap(), s / 12.0) < 1e-15);
        assert!(rel(var_h_asymptotic(&ModelSpec::PowerX { x: 2 }, n, 1.0).unwrap(), s / 180.0) < 1e-15);
        let lmg = var_h_asymptotic(&ModelSpec::Lmg { gamma: 0.7 }, n, 1.0).unwrap() / s;
        assert!((lmg - 0.0463889).abs() < 5e-8);
        // odd x = 3: 1/(64·7)
        assert!(rel(var_h_asymptotic(&ModelSpec::PowerX { x: 3 }, n, 1.0).unwrap(), s / 448.0) < 1e-15);
    }

    #[test]
    fn independent_capacity() {
        let one = heat_capacity_independent(1, 1.0, 1.0).unwrap();
        assert!(rel(heat_capacity_independent(4, 1.0, 1.0).unwrap(), 4.0 * one) < 1e-15);
        assert!((4.0 * one - 0.786443).abs() < 5e-6);
        assert_eq!(heat_capacity_independent(4, 0.0, 1.0).unwrap(), 0.0);
        for theta in [0.01, 0.5, 2.0] {
            let c1 = heat_capacity_closed_form_linear(1, theta, 1.0).unwrap();
            assert!(rel(heat_capacity_independent(1, theta, 1.0).unwrap(), c1) < 1e-12);
        }
    }

    #[test]
    fn capacity_matches_energy_derivative() {
        for model in [ModelSpec::Linear, ModelSpec::PowerX { x: 2 }, ModelSpec::Lmg { gamma: 0.7 }] {
            for (n, beta) in [(4u32, 0.3), (20, 0.05), (50, 1.2)] {
                let t = dicke_point(&model, n, beta, 0.9);
                let h = 1e-5 * beta;
                let up = dicke_point(&model, n, beta + h, 0.9).mean_energy;
                let down = dicke_point(&model, n, beta - h, 0.9).mean_energy;
                let fd = -beta * beta * (up - down) / (2.0 * h);
                assert!(rel(fd, t.heat_capacity) < 1e-6, "{model:?} n {n}: {fd} vs {}", t.heat_capacity);
            }
        }
    }

    #[test]
    fn mixture_capacity_matches_energy_derivative() {
        let e = SpinEnsemble::qubits(6).unwrap();
        let w = BlockWeights::uniform_product(&e).unwrap();
        let at = |beta: f64| {
            thermo_point_mixture(&collective_steady_state(&ModelSpec::Linear, &e, beta, 1.0, &w).unwrap()).unwrap()
        };
        let beta = 0.4;
        let h = 1e-5 * beta;
        let fd = -beta * beta * (at(beta + h).mean_energy - at(beta - h).mean_energy) / (2.0 * h);
        assert!(rel(fd, at(beta).heat_capacity) < 1e-6);
    }

    #[test]
    fn mixture_moments_are_weighted_block_sums() {
        let e = SpinEnsemble::qubits(4).unwrap();
        let w = BlockWeights::new(&e, &BTreeMap::from([(HalfInt::ZERO, 0.2), (HalfInt::ONE, 0.3), (HalfInt::from_int(2), 0.5)])).unwrap();
        let mix = collective_steady_state(&ModelSpec::Linear, &e, 0.9, 1.1, &w).unwrap();
        // direct summation over every (j, m)
        let mut mean = 0.0;
        let mut second = 0.0;
        for b in &mix.blocks {
            for (l, p) in b.gibbs.spectrum.levels.iter().zip(&b.gibbs.populations) {
                mean += b.weight * p * l.energy;
                second += b.weight * p * l.energy * l.energy;
            }
        }
        let t = thermo_point_mixture(&mix).unwrap();
        assert!(rel(t.mean_energy, mean) < 1e-13);
        assert!(rel(mixture_total_variance(&mix), second - mean * mean) < 1e-12);
    }

    #[test]
    fn block_capacity_crossover_against_independent() {
        // β → 0: per-block C grows with j, and small blocks fall below n/4.
        let n = 10;
        let e = SpinEnsemble::qubits(n).unwrap();
        let beta = 1e-6;
        let ind = heat_capacity_independent(n, beta, 1.0).unwrap();
        let caps: Vec<f64> = allowed_j(&e)
            .into_iter()
            .map(|j| {
                let sp = subspace_spectrum(&ModelSpec::Linear, &e, j, 1.0).unwrap();
                thermo_point(&gibbs_block(&sp, beta).unwrap()).heat_capacity
            })
            .collect();
        assert!(caps.windows(2).all(|w| w[1] > w[0]));
        assert!(caps.iter().any(|&c| c < ind));
        assert!(caps.iter().any(|&c| c > ind));
    }
}
