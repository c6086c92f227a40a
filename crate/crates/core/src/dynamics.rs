//! Population dynamics of one `j` block under a collective thermal bath.
//!
//! For the linear model the diagonal sector of the collective master
//! equation is a birth-death chain on `m = −j..j`:
//!
//! * `m → m−1` at `Γ(ω)·[j(j+1) − m(m−1)]` (emission)
//! * `m → m+1` at `Γ(−ω)·[j(j+1) − m(m+1)]` (absorption)
//!
//! with a flat spectral function `Γ(ω) = κ` and `Γ(−ω) = e^{−βω} κ`.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::spectra::{subspace_spectrum, ModelSpec, SpinEnsemble};
use crate::steady_state::{check_beta, gibbs_block, BlockGibbs};
use crate::{Error, HalfInt, Result};

/// Cap on uniformization terms per chunk.
const MAX_TERMS: usize = 100_000;
/// `Λ·dt` per uniformization chunk.
const CHUNK: f64 = 32.0;
/// Poisson weight below which the series is cut once past its mode.
const TAIL: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub beta: f64,
    /// `κ`, the positive-frequency spectral value.
    pub base_rate: f64,
    pub active: bool,
}

impl BathSpec {
    pub fn new(beta: f64, base_rate: f64) -> Self {
        BathSpec { beta, base_rate, active: true }
    }
}

/// Which ladder direction the `Γ(ω)` term drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `Γ(ω)` lowers `m`; relaxes to `e^{−βmω}`.
    #[default]
    Emission,
    /// `Γ(ω)` raises `m`; relaxes to `e^{+βmω}`.
    Flipped,
}

/// Nearest-neighbour transition rates of one block, indexed by level
/// (`0 ↔ m = −j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub j: HalfInt,
    pub omega: f64,
    pub beta: f64,
    /// `down[i]`: rate from level `i` to `i − 1`.
    pub down: Vec<f64>,
    /// `up[i]`: rate from level `i` to `i + 1`.
    pub up: Vec<f64>,
    gibbs: BlockGibbs,
}

pub fn build_rate_matrix(
    model: &ModelSpec,
    ensemble: &SpinEnsemble,
    j: HalfInt,
    omega: f64,
    bath: &BathSpec,
) -> Result<RateMatrix> {
    build_rate_matrix_oriented(model, ensemble, j, omega, bath, Orientation::Emission)
}

pub fn build_rate_matrix_oriented(
    model: &ModelSpec,
    ensemble: &SpinEnsemble,
    j: HalfInt,
    omega: f64,
    bath: &BathSpec,
    orientation: Orientation,
) -> Result<RateMatrix> {
    if model.order() != 1 {
        return Err(Error::Unsupported(format!(
            "rate equations need uniform level spacing, got model {}",
            model.name()
        )));
    }
    if !bath.active {
        return Err(Error::invalid("bath", "inactive bath has no dynamics"));
    }
    if !(bath.base_rate > 0.0 && bath.base_rate.is_finite()) {
        return Err(Error::invalid("base_rate", "must be positive and finite"));
    }
    check_beta(bath.beta)?;
    let spectrum = subspace_spectrum(model, ensemble, j, omega)?;
    let gibbs = gibbs_block(&spectrum, bath.beta)?;

    let kappa = bath.base_rate;
    let boltzmann = (-bath.beta * omega).exp();
    let (k_down, k_up) = match orientation {
        Orientation::Emission => (kappa, kappa * boltzmann),
        Orientation::Flipped => (kappa * boltzmann, kappa),
    };
    let c = j.casimir();
    let mut down = Vec::with_capacity(spectrum.len());
    let mut up = Vec::with_capacity(spectrum.len());
    for level in &spectrum.levels {
        let m = level.m.value();
        down.push(k_down * (c - m * (m - 1.0)));
        up.push(k_up * (c - m * (m + 1.0)));
    }
    Ok(RateMatrix {
        j,
        omega,
        beta: bath.beta,
        down,
        up,
        gibbs,
    })
}

impl RateMatrix {
    pub fn dim(&self) -> usize {
        self.down.len()
    }

    /// Gibbs state `e^{−βmω}/Z` of the block.
    pub fn gibbs(&self) -> &BlockGibbs {
        &self.gibbs
    }

    /// Total exit rate of each level.
    pub fn exit_rates(&self) -> Vec<f64> {
        self.down.iter().zip(&self.up).map(|(d, u)| d + u).collect()
    }

    /// Dense generator `L` with `dp/dt = L p`; columns sum to zero.
    pub fn generator(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut l = DMatrix::zeros(d, d);
        for i in 0..d {
            l[(i, i)] = -(self.down[i] + self.up[i]);
            if i > 0 {
                l[(i - 1, i)] = self.down[i];
            }
            if i + 1 < d {
                l[(i + 1, i)] = self.up[i];
            }
        }
        l
    }

    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut v = -(self.down[i] + self.up[i]) * p[i];
            if i + 1 < d {
                v += self.down[i + 1] * p[i + 1];
            }
            if i > 0 {
                v += self.up[i - 1] * p[i - 1];
            }
            out[i] = v;
        }
    }

    /// Smallest nonzero relaxation rate, from the symmetrized generator.
    pub fn spectral_gap(&self) -> f64 {
        let d = self.dim();
        if d < 2 {
            return 0.0;
        }
        let mut s = DMatrix::zeros(d, d);
        for i in 0..d {
            s[(i, i)] = -(self.down[i] + self.up[i]);
            if i + 1 < d {
                let off = (self.up[i] * self.down[i + 1]).sqrt();
                s[(i, i + 1)] = off;
                s[(i + 1, i)] = off;
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        -ev[1]
    }
}

fn check_populations(rates: &RateMatrix, p: &[f64]) -> Result<()> {
    if p.len() != rates.dim() {
        return Err(Error::invalid(
            "populations",
            format!("expected {} entries, got {}", rates.dim(), p.len()),
        ));
    }
    if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::invalid("populations", "entries must be finite and non-negative"));
    }
    let total: f64 = crate::sum::sum(p.iter().copied());
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("populations", format!("must sum to 1, got {total}")));
    }
    Ok(())
}

/// `e^{L t} p0` by uniformization: every term is non-negative, so the output
/// stays a probability vector.
pub fn evolve_populations(rates: &RateMatrix, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    check_populations(rates, p0)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "duration must be finite and non-negative"));
    }
    let lambda = rates.exit_rates().into_iter().fold(0.0, f64::max);
    let mut p = p0.to_vec();
    if t == 0.0 || lambda == 0.0 {
        return Ok(p);
    }
    let chunks = (lambda * t / CHUNK).ceil().max(1.0);
    let dt = t / chunks;
    let mu = lambda * dt;
    let d = rates.dim();
    let mut term = vec![0.0; d];
    let mut lp = vec![0.0; d];
    for _ in 0..chunks as u64 {
        // Σ_k Poisson(k; μ) Pᵏ p with P = I + L/Λ
        term.copy_from_slice(&p);
        let mut weight = (-mu).exp();
        let mut acc: Vec<f64> = term.iter().map(|x| weight * x).collect();
        let mut k = 0usize;
        while (k as f64) <= mu || weight > TAIL {
            k += 1;
            if k > MAX_TERMS {
                return Err(Error::Integration(format!(
                    "uniformization did not converge in {MAX_TERMS} terms (Λdt = {mu})"
                )));
            }
            rates.apply(&term, &mut lp);
            for i in 0..d {
                term[i] += lp[i] / lambda;
            }
            weight *= mu / k as f64;
            for i in 0..d {
                acc[i] += weight * term[i];
            }
        }
        p = acc;
    }
    Ok(p)
}

/// Total-variation distance `½ Σ |p − target|`.
pub fn steady_state_residual(p: &[f64], target: &BlockGibbs) -> Result<f64> {
    if p.len() != target.populations.len() {
        return Err(Error::invalid(
            "populations",
            format!("expected {} entries, got {}", target.populations.len(), p.len()),
        ));
    }
    Ok(0.5 * crate::sum::sum(p.iter().zip(&target.populations).map(|(a, b)| (a - b).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thermalization {
    /// Smallest time found with residual below `epsilon`.
    pub time: f64,
    pub residual: f64,
    pub spectral_gap: f64,
}

/// Time for `p0` to come within `epsilon` (total variation) of the Gibbs
/// state, by doubling then bisection. Fails past `time_cap`.
pub fn thermalization_time(
    rates: &RateMatrix,
    p0: &[f64],
    epsilon: f64,
    time_cap: f64,
) -> Result<Thermalization> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    check_populations(rates, p0)?;
    let gap = rates.spectral_gap();
    let residual = |t: f64| -> Result<f64> { steady_state_residual(&evolve_populations(rates, p0, t)?, rates.gibbs()) };
    let r0 = residual(0.0)?;
    if r0 < epsilon {
        return Ok(Thermalization { time: 0.0, residual: r0, spectral_gap: gap });
    }
    let mut lo = 0.0;
    let mut hi = if gap > 0.0 { 1.0 / gap } else { 1.0 };
    let mut r_hi = residual(hi)?;
    while r_hi >= epsilon {
        lo = hi;
        hi *= 2.0;
        if hi > time_cap {
            return Err(Error::NoConvergence(format!(
                "residual {r_hi:.3e} still above {epsilon:.3e} at t = {lo:.6e} (cap {time_cap:.6e})"
            )));
        }
        let r_prev = r_hi;
        r_hi = residual(hi)?;
        if gap > 0.0 && lo * gap > 8.0 && r_hi > 0.5 * r_prev {
            return Err(Error::NoConvergence(format!(
                "residual stalled at {r_hi:.3e} above {epsilon:.3e} by t = {hi:.6e}"
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r = residual(mid)?;
        if r < epsilon {
            hi = mid;
            r_hi = r;
        } else {
            lo = mid;
        }
    }
    Ok(Thermalization { time: hi, residual: r_hi, spectral_gap: gap })
}

/// Uniform populations over the block.
pub fn uniform_populations(rates: &RateMatrix) -> Vec<f64> {
    vec![1.0 / rates.dim() as f64; rates.dim()]
}

/// CSV rows `t,m,population` at each requested time.
pub fn write_trace<W: Write>(mut out: W, rates: &RateMatrix, p0: &[f64], times: &[f64]) -> Result<()> {
    writeln!(out, "t,m,population")?;
    let ms: Vec<HalfInt> = rates.gibbs().spectrum.levels.iter().map(|l| l.m).collect();
    for &t in times {
        let p = evolve_populations(rates, p0, t)?;
        for (m, x) in ms.iter().zip(p) {
            writeln!(out, "{t:.16e},{m},{x:.16e}")?;
        }
    }
    Ok(())
}
