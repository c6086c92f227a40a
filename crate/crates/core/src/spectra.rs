//! Collective angular-momentum structure and working-medium spectra.
//!
//! An ensemble of `n` spin-`s` particles decomposes into blocks of total
//! angular momentum `j`, each appearing `l_j` times. All three working-medium
//! models are diagonal in the collective `|j, m⟩` basis, so a block spectrum
//! is just a list of `(m, ε_m)` pairs.

use serde::{Deserialize, Serialize};

use crate::{Error, HalfInt, Result};

/// Largest `n` for which multiplicities are computed in exact `u128`
/// arithmetic.
pub const EXACT_MULTIPLICITY_MAX_N: u32 = 120;

/// Working-medium Hamiltonian `H = ω·G` with `G` one of:
///
/// * `Linear`: `G = J_z`
/// * `PowerX { x }`: `G = n (J_z / n)^x`
/// * `Lmg { gamma }`: `G = (J_x² + J_y²)/n + γ J_z`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Linear,
    #[serde(rename = "power")]
    PowerX { x: u32 },
    Lmg { gamma: f64 },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::PowerX { x: 0 } => {
                Err(Error::invalid("x", "interaction order must be at least 1"))
            }
            ModelSpec::Lmg { gamma } if !gamma.is_finite() => {
                Err(Error::invalid("gamma_lmg", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Linear => "linear",
            ModelSpec::PowerX { .. } => "power",
            ModelSpec::Lmg { .. } => "lmg",
        }
    }

    /// Interaction order `x` (1 for the linear model, 0 when not applicable).
    pub fn order(&self) -> u32 {
        match self {
            ModelSpec::Linear => 1,
            ModelSpec::PowerX { x } => *x,
            ModelSpec::Lmg { .. } => 0,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            ModelSpec::Lmg { gamma } => Some(*gamma),
            _ => None,
        }
    }

    /// `ε / ω` for level `m` of block `j` in an `n`-particle ensemble.
    pub fn unit_energy(&self, n: u32, j: HalfInt, m: HalfInt) -> f64 {
        let mv = m.value();
        match *self {
            ModelSpec::Linear => mv,
            // m^x / n^(x-1); for x = 1 this is m / 1.0, bit-identical to Linear.
            ModelSpec::PowerX { x } => mv.powi(x as i32) / (n as f64).powi(x as i32 - 1),
            ModelSpec::Lmg { gamma } => (j.casimir() - mv * mv) / n as f64 + gamma * mv,
        }
    }
}

/// `n` identical spin-`s` particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinEnsemble {
    pub n: u32,
    pub s: HalfInt,
}

impl SpinEnsemble {
    pub fn new(n: u32, s: HalfInt) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one particle"));
        }
        if s.twice() <= 0 {
            return Err(Error::invalid("s", "spin must be a positive half-integer"));
        }
        Ok(SpinEnsemble { n, s })
    }

    /// `n` spin-1/2 particles.
    pub fn qubits(n: u32) -> Result<Self> {
        Self::new(n, HalfInt::HALF)
    }

    pub fn is_qubits(&self) -> bool {
        self.s == HalfInt::HALF
    }

    /// The maximal (Dicke) block `j = ns`.
    pub fn max_j(&self) -> HalfInt {
        self.s.times(self.n)
    }

    pub fn contains_block(&self, j: HalfInt) -> bool {
        allowed_j(self).contains(&j)
    }
}

/// Allowed total angular momenta, ascending from `j0` to `ns`.
///
/// A single particle has only `j = s`. For `n ≥ 2` the values run in unit
/// steps from 0 (integer `ns`) or 1/2 (half-integer `ns`).
pub fn allowed_j(ensemble: &SpinEnsemble) -> Vec<HalfInt> {
    let top = ensemble.max_j();
    if ensemble.n == 1 {
        return vec![top];
    }
    let start = if top.is_integer() { 0 } else { 1 };
    (start..=top.twice())
        .step_by(2)
        .map(HalfInt::from_twice)
        .collect()
}

fn check_qubit_block(n: u32, j: HalfInt) -> Result<()> {
    let top = HalfInt::from_twice(n as i64);
    let reason = if j > top {
        Some(format!("exceeds n/2 = {top}"))
    } else if j.twice() < 0 {
        Some("must be non-negative".to_string())
    } else if (top - j).twice() % 2 != 0 {
        Some(format!("parity differs from n/2 = {top}"))
    } else {
        None
    };
    match reason {
        Some(reason) => Err(Error::DisallowedBlock {
            j: j.to_string(),
            reason,
        }),
        None => Ok(()),
    }
}

fn binomial_u128(n: u32, k: i64) -> Option<u128> {
    if k < 0 || k > n as i64 {
        return Some(0);
    }
    let k = k.min(n as i64 - k) as u128;
    let n = n as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul(n - i)? / (i + 1);
    }
    Some(c)
}

/// Number of spin-`j` blocks in `n` spin-1/2 particles, exact.
///
/// Uses `l_j = C(n, n/2 − j) − C(n, n/2 − j − 1)`, which equals
/// `(2j+1)·n! / ((n/2+j+1)!·(n/2−j)!)`. Limited to
/// `n ≤ EXACT_MULTIPLICITY_MAX_N`; see [`ln_multiplicity`] beyond that.
pub fn multiplicity(n: u32, j: HalfInt) -> Result<u128> {
    check_qubit_block(n, j)?;
    if n > EXACT_MULTIPLICITY_MAX_N {
        return Err(Error::CostGuard(format!(
            "exact multiplicity limited to n <= {EXACT_MULTIPLICITY_MAX_N}, got {n}"
        )));
    }
    let k = (n as i64 - j.twice()) / 2;
    let a = binomial_u128(n, k).expect("binomial fits in u128 for n <= 120");
    let b = binomial_u128(n, k - 1).expect("binomial fits in u128 for n <= 120");
    Ok(a - b)
}

/// `ln k!` by direct summation.
pub fn ln_factorial(k: u64) -> f64 {
    crate::sum::sum((2..=k).map(|i| (i as f64).ln()))
}

/// Natural log of the spin-1/2 multiplicity, valid for any `n`.
pub fn ln_multiplicity(n: u32, j: HalfInt) -> Result<f64> {
    check_qubit_block(n, j)?;
    if n <= EXACT_MULTIPLICITY_MAX_N {
        return Ok((multiplicity(n, j)? as f64).ln());
    }
    let n2 = n as i64;
    let up = ((n2 + j.twice()) / 2 + 1) as u64;
    let down = ((n2 - j.twice()) / 2) as u64;
    Ok((j.dimension() as f64).ln() + ln_factorial(n as u64) - ln_factorial(up) - ln_factorial(down))
}

/// Checks `Σ_j l_j (2j+1) = 2^n` in exact integer arithmetic.
pub fn dimension_check(ensemble: &SpinEnsemble) -> Result<bool> {
    if !ensemble.is_qubits() {
        return Err(Error::Unsupported(
            "multiplicities are only available for spin-1/2 ensembles".into(),
        ));
    }
    if ensemble.n > EXACT_MULTIPLICITY_MAX_N {
        return Err(Error::CostGuard(format!(
            "exact dimension check limited to n <= {EXACT_MULTIPLICITY_MAX_N}"
        )));
    }
    let mut total: u128 = 0;
    for j in allowed_j(ensemble) {
        total += multiplicity(ensemble.n, j)? * j.dimension() as u128;
    }
    Ok(total == 1u128 << ensemble.n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub m: HalfInt,
    pub energy: f64,
}

/// Energies `ε_m`, `m = −j..j`, of one angular-momentum block at frequency `ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpectrum {
    pub j: HalfInt,
    pub omega: f64,
    pub levels: Vec<Level>,
}

impl SubspaceSpectrum {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|l| l.energy)
    }

    pub fn min_energy(&self) -> f64 {
        self.energies().fold(f64::INFINITY, f64::min)
    }
}

/// Block spectrum of `model` in block `j` of `ensemble` at frequency `omega`.
pub fn subspace_spectrum(
    model: &ModelSpec,
    ensemble: &SpinEnsemble,
    j: HalfInt,
    omega: f64,
) -> Result<SubspaceSpectrum> {
    model.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", format!("must be positive and finite, got {omega}")));
    }
    if !ensemble.contains_block(j) {
        return Err(Error::DisallowedBlock {
            j: j.to_string(),
            reason: format!("allowed range is {:?}", allowed_range(ensemble)),
        });
    }
    if matches!(model, ModelSpec::Lmg { .. }) && j != ensemble.max_j() {
        return Err(Error::DisallowedBlock {
            j: j.to_string(),
            reason: format!("the LMG steady state is only defined for j = ns = {}", ensemble.max_j()),
        });
    }
    let n = ensemble.n;
    let levels = (0..=2 * j.twice())
        .step_by(2)
        .map(|k| {
            let m = HalfInt::from_twice(k - j.twice());
            Level {
                m,
                energy: omega * model.unit_energy(n, j, m),
            }
        })
        .collect();
    Ok(SubspaceSpectrum { j, omega, levels })
}

fn allowed_range(ensemble: &SpinEnsemble) -> (String, String) {
    let js = allowed_j(ensemble);
    (js[0].to_string(), js[js.len() - 1].to_string())
}
