//! Steady states reached at the end of each thermalization stroke.
//!
//! Under collective coupling the state is a mixture of Gibbs states, one per
//! angular-momentum block, with block weights `P_j` fixed by the initial
//! state. Under independent coupling every spin relaxes to its own thermal
//! state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spectra::{self, ModelSpec, SpinEnsemble, SubspaceSpectrum};
use crate::{Error, HalfInt, Result};

/// Tolerance on `Σ P_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() {
        return Err(Error::invalid("beta", "is NaN"));
    }
    if !beta.is_finite() {
        return Err(Error::invalid("beta", "must be finite"));
    }
    if beta < 0.0 {
        return Err(Error::invalid("beta", format!("negative temperatures are not supported (beta = {beta})")));
    }
    Ok(())
}

/// Gibbs populations of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockGibbs {
    pub spectrum: SubspaceSpectrum,
    pub beta: f64,
    /// Populations aligned with `spectrum.levels`.
    pub populations: Vec<f64>,
    /// `ln Z_j`; kept in log form so large blocks at low temperature do not overflow.
    pub ln_partition: f64,
}

impl BlockGibbs {
    pub fn partition_function(&self) -> f64 {
        self.ln_partition.exp()
    }

    pub fn population(&self, m: HalfInt) -> Option<f64> {
        self.spectrum
            .levels
            .iter()
            .position(|l| l.m == m)
            .map(|i| self.populations[i])
    }
}

/// Normalized `exp(−β ε_m) / Z_j` over one block.
///
/// Energies are shifted by the block minimum before exponentiation.
pub fn gibbs_block(spectrum: &SubspaceSpectrum, beta: f64) -> Result<BlockGibbs> {
    check_beta(beta)?;
    if spectrum.is_empty() {
        return Err(Error::invalid("spectrum", "no levels"));
    }
    let e_min = spectrum.min_energy();
    let weights: Vec<f64> = spectrum
        .energies()
        .map(|e| (-beta * (e - e_min)).exp())
        .collect();
    let z_shifted = crate::sum::sum(weights.iter().copied());
    let populations = weights.iter().map(|w| w / z_shifted).collect();
    Ok(BlockGibbs {
        spectrum: spectrum.clone(),
        beta,
        populations,
        ln_partition: -beta * e_min + z_shifted.ln(),
    })
}

/// Block weights `P_j`, summed over the identical copies of each block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights {
    // ascending in j, strictly positive weights only
    entries: Vec<(HalfInt, f64)>,
}

impl BlockWeights {
    /// Validate an explicit map `j → P_j` against `ensemble`.
    pub fn new(ensemble: &SpinEnsemble, weights: &BTreeMap<HalfInt, f64>) -> Result<Self> {
        let allowed = spectra::allowed_j(ensemble);
        let mut total = 0.0;
        for (&j, &p) in weights {
            if !allowed.contains(&j) {
                return Err(Error::DisallowedBlock {
                    j: j.to_string(),
                    reason: format!("not an allowed block of n = {}, s = {}", ensemble.n, ensemble.s),
                });
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid("weights", format!("P_{j} = {p} is not a probability")));
            }
            total += p;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid("weights", format!("must sum to 1, got {total}")));
        }
        let entries = weights
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(&j, &p)| (j, p))
            .collect();
        Ok(BlockWeights { entries })
    }

    /// All weight in the Dicke block `j = ns`.
    pub fn symmetric(ensemble: &SpinEnsemble) -> Self {
        BlockWeights {
            entries: vec![(ensemble.max_j(), 1.0)],
        }
    }

    /// Weights induced by the maximally mixed initial state of `n` qubits;
    /// see [`dicke_weights_from_uniform_product`].
    pub fn uniform_product(ensemble: &SpinEnsemble) -> Result<Self> {
        dicke_weights_from_uniform_product(ensemble)
    }

    pub fn iter(&self) -> impl Iterator<Item = (HalfInt, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: HalfInt) -> f64 {
        self.entries
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn to_map(&self) -> BTreeMap<HalfInt, f64> {
        self.entries.iter().copied().collect()
    }

    /// Whether all weight sits in the block `j`.
    pub fn is_single_block(&self, j: HalfInt) -> bool {
        self.entries.len() == 1 && self.entries[0].0 == j
    }
}

/// `P_j = l_j (2j+1) / 2^n`: the block weights of the maximally mixed
/// state of `n` spin-1/2 particles.
pub fn dicke_weights_from_uniform_product(ensemble: &SpinEnsemble) -> Result<BlockWeights> {
    if !ensemble.is_qubits() {
        return Err(Error::Unsupported(
            "uniform-product weights need spin-1/2 multiplicities".into(),
        ));
    }
    let n = ensemble.n;
    let mut entries = Vec::new();
    for j in spectra::allowed_j(ensemble) {
        let p = if n <= spectra::EXACT_MULTIPLICITY_MAX_N {
            let count = spectra::multiplicity(n, j)? * j.dimension() as u128;
            count as f64 / 2f64.powi(n as i32)
        } else {
            (spectra::ln_multiplicity(n, j)? + (j.dimension() as f64).ln()
                - n as f64 * std::f64::consts::LN_2)
                .exp()
        };
        if p > 0.0 {
            entries.push((j, p));
        }
    }
    Ok(BlockWeights { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureBlock {
    pub j: HalfInt,
    pub weight: f64,
    pub gibbs: BlockGibbs,
}

/// `Σ_j P_j ρ_j^th`: the collective steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMixture {
    pub blocks: Vec<MixtureBlock>,
}

impl BlockMixture {
    /// Joint probability of `(j, m)`.
    pub fn probability(&self, j: HalfInt, m: HalfInt) -> f64 {
        self.blocks
            .iter()
            .find(|b| b.j == j)
            .and_then(|b| b.gibbs.population(m).map(|p| p * b.weight))
            .unwrap_or(0.0)
    }

    pub fn total_probability(&self) -> f64 {
        crate::sum::sum(
            self.blocks
                .iter()
                .flat_map(|b| b.gibbs.populations.iter().map(move |p| p * b.weight)),
        )
    }
}

/// Gibbs state of every weighted block at `(β, ω)`.
pub fn collective_steady_state(
    model: &ModelSpec,
    ensemble: &SpinEnsemble,
    beta: f64,
    omega: f64,
    weights: &BlockWeights,
) -> Result<BlockMixture> {
    check_beta(beta)?;
    let blocks = weights
        .iter()
        .map(|(j, weight)| {
            let spectrum = spectra::subspace_spectrum(model, ensemble, j, omega)?;
            Ok(MixtureBlock {
                j,
                weight,
                gibbs: gibbs_block(&spectrum, beta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockMixture { blocks })
}

/// Thermal state of one spin-1/2 with `H = ω σ_z / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitThermal {
    pub beta: f64,
    pub omega: f64,
    /// Population of `m = +1/2`.
    pub excited_population: f64,
}

pub fn independent_qubit_state(beta: f64, omega: f64) -> Result<QubitThermal> {
    check_beta(beta)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", "must be positive and finite"));
    }
    // e^{-θ/2} / (2 cosh(θ/2)) = 1 / (1 + e^θ)
    let theta = beta * omega;
    Ok(QubitThermal {
        beta,
        omega,
        excited_population: 1.0 / (1.0 + theta.exp()),
    })
}
