//! Entropy as a functor and equilibria as entropy maxima.
//!
//! States of an `n+1`-outcome system are probability configurations
//! `p = (p_0, ..., p_n)`. A process `q <- p` is admissible exactly when it
//! does not destroy entropy, `S(q) - S(p) >= 0`; that difference is additive
//! under chaining processes, which is what makes "entropy change" a functor
//! and the admissible processes a category rather than just a relation. This
//! module provides the state-side calculus for that category:
//!
//! * Shannon entropy `S(p) = -sum p_i ln p_i` (with `0 ln 0 = 0`) and the
//!   entropy change `delta` of a process;
//! * the second-law feasibility test, with an optional slack for noisy data;
//! * the microcanonical (uniform) configuration — the unique interior
//!   critical point of `S`, hence the equilibrium that is removed from the
//!   state space of the process category;
//! * the entropy gradient in the chart `(p_1, ..., p_n)` (eliminating `p_0`),
//!   whose vanishing characterizes the microcanonical state;
//! * Gibbs equilibria `p_i ~ exp(-E_i / kT)` for an energy model, exposing
//!   the partition function and the inverse-temperature multiplier, plus a
//!   brute-force entropy maximizer over the fixed-mean-energy slice that is
//!   used as an independent oracle in tests.

use crate::error::{Error, Result};
use crate::numerics::{nullspace_basis, solve_min_norm, DenseMatrix, ToleranceConfig};

/// How far a configuration must stay from the simplex boundary and from the
/// uniform configuration to count as an admissible state.
pub const STATE_MARGIN: f64 = 1e-12;

/// Probability configuration over `n + 1` outcomes.
///
/// Entries are nonnegative and sum to one within `1e-12`. Boundary entries
/// (exact zeros) are allowed here; operations that need interior points
/// check for themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    probs: Vec<f64>,
}

impl Configuration {
    /// Validate and wrap a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::BadDimension {
                detail: format!("a configuration needs at least 2 outcomes, got {}", probs.len()),
            });
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                what: "configuration entries".into(),
            });
        }
        if let Some(neg) = probs.iter().find(|&&p| p < 0.0) {
            return Err(Error::InvalidConfiguration {
                detail: format!("negative probability {neg}"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfiguration {
                detail: format!("probabilities sum to {sum}, not 1 within 1e-12"),
            });
        }
        Ok(Configuration { probs })
    }

    /// Rebuild a configuration from chart coordinates `(p_1, ..., p_n)`,
    /// recovering `p_0 = 1 - sum`.
    pub fn from_chart(chart: &[f64]) -> Result<Self> {
        if chart.is_empty() {
            return Err(Error::BadDimension {
                detail: "empty chart for a configuration".into(),
            });
        }
        let tail_sum: f64 = chart.iter().sum();
        let mut probs = Vec::with_capacity(chart.len() + 1);
        probs.push(1.0 - tail_sum);
        probs.extend_from_slice(chart);
        Configuration::new(probs)
    }

    /// Number of degrees of freedom (`len - 1`).
    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Chart coordinates `(p_1, ..., p_n)`.
    pub fn chart(&self) -> Vec<f64> {
        self.probs[1..].to_vec()
    }
}

/// Shannon entropy `-sum p_i ln p_i`, with the `0 ln 0 = 0` convention.
///
/// Ranges over `[0, ln(n+1)]`; the upper bound is attained exactly at the
/// microcanonical configuration.
pub fn entropy(p: &Configuration) -> f64 {
    entropy_raw(p.probs())
}

/// Entropy of a raw probability slice (no validation); shared with the
/// samplers and the oracle, which work on buffers mid-search.
pub(crate) fn entropy_raw(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum::<f64>()
}

/// Entropy change `S(q) - S(p)` of the process `q <- p`.
///
/// Additive under chaining: the change of a composite process is the sum of
/// the changes of its stages (this is what the composition law of the
/// process category preserves).
pub fn delta_entropy(q: &Configuration, p: &Configuration) -> Result<f64> {
    if q.probs.len() != p.probs.len() {
        return Err(Error::DimensionMismatch {
            what: "entropy change between configurations".into(),
            expected: p.probs.len(),
            found: q.probs.len(),
        });
    }
    Ok(entropy(q) - entropy(p))
}

/// Second-law feasibility of the process `q <- p`: entropy must not drop by
/// more than `slack` (use `slack = 0` for the exact law).
pub fn is_feasible(q: &Configuration, p: &Configuration, slack: f64) -> Result<bool> {
    if !slack.is_finite() {
        return Err(Error::NonFinite {
            what: "feasibility slack".into(),
        });
    }
    Ok(delta_entropy(q, p)? >= -slack)
}

/// The microcanonical configuration: uniform probabilities `1/(n+1)`.
pub fn microcanonical(n: usize) -> Result<Configuration> {
    if n < 1 {
        return Err(Error::BadDimension {
            detail: "microcanonical configuration needs n >= 1".into(),
        });
    }
    Configuration::new(vec![1.0 / (n + 1) as f64; n + 1])
}

/// Gradient of the entropy in the chart `(p_1, ..., p_n)`:
/// component `i` is `-(ln p_i - ln p_0)`.
///
/// Vanishes exactly at the microcanonical configuration and nowhere else in
/// the interior, which is why the uniform state is the unique equilibrium.
/// Errors with [`Error::BoundaryConfiguration`] if any probability is zero.
pub fn entropy_gradient(p: &Configuration) -> Result<Vec<f64>> {
    if p.probs.iter().any(|&x| x == 0.0) {
        return Err(Error::BoundaryConfiguration);
    }
    let log_p0 = p.probs[0].ln();
    Ok(p.probs[1..].iter().map(|&pi| -(pi.ln() - log_p0)).collect())
}

/// True iff `p` is an admissible state of the process category: strictly
/// interior and distinct from the microcanonical configuration, both by
/// margin [`STATE_MARGIN`].
pub fn is_valid_state(p: &Configuration) -> bool {
    let uniform = 1.0 / p.probs.len() as f64;
    let interior = p.probs.iter().all(|&x| x > STATE_MARGIN);
    let off_uniform = p
        .probs
        .iter()
        .any(|&x| (x - uniform).abs() > STATE_MARGIN);
    interior && off_uniform
}

/// True iff some admissible process ends at `target` starting from `p`,
/// i.e. iff `S(target) >= S(p)`.
///
/// Both configurations must be admissible states (the reachability question
/// is posed inside the process category, which excludes boundary and
/// microcanonical states).
pub fn can_reach(target: &Configuration, p: &Configuration) -> Result<bool> {
    if target.probs.len() != p.probs.len() {
        return Err(Error::DimensionMismatch {
            what: "reachability between configurations".into(),
            expected: p.probs.len(),
            found: target.probs.len(),
        });
    }
    if !is_valid_state(p) {
        return Err(Error::InvalidConfiguration {
            detail: "start is not an admissible state (boundary or microcanonical)".into(),
        });
    }
    if !is_valid_state(target) {
        return Err(Error::InvalidConfiguration {
            detail: "target is not an admissible state (boundary or microcanonical)".into(),
        });
    }
    Ok(entropy(target) >= entropy(p))
}

/// Energy assignment for the outcomes, with a temperature and Boltzmann
/// constant (defaults to 1, i.e. energies measured in units of `kT`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    energies: Vec<f64>,
    temperature: f64,
    boltzmann: f64,
}

impl EnergyModel {
    pub fn new(energies: Vec<f64>, temperature: f64, boltzmann: f64) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::BadDimension {
                detail: format!("an energy model needs at least 2 levels, got {}", energies.len()),
            });
        }
        if energies.iter().any(|e| !e.is_finite())
            || !temperature.is_finite()
            || !boltzmann.is_finite()
        {
            return Err(Error::NonFinite {
                what: "energy model fields".into(),
            });
        }
        if temperature <= 0.0 || boltzmann <= 0.0 {
            return Err(Error::InvalidSpec {
                detail: "temperature and Boltzmann constant must be positive".into(),
            });
        }
        Ok(EnergyModel {
            energies,
            temperature,
            boltzmann,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn boltzmann(&self) -> f64 {
        self.boltzmann
    }

    /// Thermal energy scale `kT`.
    pub fn kt(&self) -> f64 {
        self.boltzmann * self.temperature
    }

    /// Mean energy of a configuration under this model.
    pub fn mean_energy(&self, p: &Configuration) -> Result<f64> {
        if p.probs().len() != self.energies.len() {
            return Err(Error::DimensionMismatch {
                what: "mean energy".into(),
                expected: self.energies.len(),
                found: p.probs().len(),
            });
        }
        Ok(self
            .energies
            .iter()
            .zip(p.probs())
            .map(|(e, p)| e * p)
            .sum())
    }
}

/// Gibbs equilibrium data: the maximum-entropy configuration at fixed mean
/// energy, its partition function, and the inverse-temperature multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSolution {
    /// Equilibrium configuration `p_i = exp(-E_i/kT) / Z`.
    pub p_eq: Configuration,
    /// Partition function `Z = sum_i exp(-E_i/kT)`.
    pub z: f64,
    /// Multiplier `-1/(kT)` conjugate to the energy constraint.
    pub lambda1: f64,
}

/// Closed-form Gibbs equilibrium of an energy model.
///
/// The weights are computed with the minimum energy shifted to zero before
/// exponentiation, so the equilibrium stays accurate for large energies
/// whose naive exponentials would under- or overflow. The shift is restored
/// in the reported partition function, which must itself be representable;
/// if the true `Z` lies outside `f64` range the call errors rather than
/// report a rounded-to-zero or infinite value.
pub fn gibbs_equilibrium(model: &EnergyModel) -> Result<GibbsSolution> {
    let kt = model.kt();
    let shift = model
        .energies
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = model
        .energies
        .iter()
        .map(|e| (-(e - shift) / kt).exp())
        .collect();
    let z_shifted: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w == 0.0) {
        return Err(Error::InvalidResult {
            detail: "Gibbs weights underflowed to zero; energy spread too large for kT".into(),
        });
    }
    let z = z_shifted * (-shift / kt).exp();
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::NonFinite {
            what: "partition function".into(),
        });
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / z_shifted).collect();
    Ok(GibbsSolution {
        p_eq: Configuration::new(probs)?,
        z,
        lambda1: -1.0 / kt,
    })
}

/// Search effort for [`gibbs_bruteforce_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    /// Grid points per axis in the first (global) sweep.
    pub grid: usize,
    /// Number of zoom-in refinement rounds after the global sweep.
    pub refine_rounds: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            grid: 201,
            refine_rounds: 6,
        }
    }
}

/// Brute-force entropy maximizer over the slice of the simplex with the same
/// mean energy as the closed-form equilibrium. Supports `n <= 3`.
///
/// The constraint level is the problem statement; the search itself never
/// consults the closed form. The affine slice `{sum p = 1, <p, E> = U}` is
/// parametrized by an orthonormal nullspace basis of the constraint matrix,
/// scanned on a dense coefficient grid, and the best cell is zoomed
/// repeatedly. Used in tests to check the exponential-family solution
/// against a method with no shared structure.
pub fn gibbs_bruteforce_oracle(
    model: &EnergyModel,
    budget: &OracleBudget,
) -> Result<Configuration> {
    let n = model.energies.len() - 1;
    if n > 3 {
        return Err(Error::BadDimension {
            detail: format!("brute-force oracle supports n <= 3, got n = {n}"),
        });
    }
    if budget.grid < 3 {
        return Err(Error::BadDimension {
            detail: "oracle grid must have at least 3 points per axis".into(),
        });
    }
    let u_star = model.mean_energy(&gibbs_equilibrium(model)?.p_eq)?;
    let tol = ToleranceConfig::default();

    // Affine slice: rows are the normalization and mean-energy constraints.
    let dim = n + 1;
    let mut constraints = DenseMatrix::zeros(2, dim);
    for j in 0..dim {
        constraints.set(0, j, 1.0);
        constraints.set(1, j, model.energies()[j]);
    }
    let (p_hat, residual) = solve_min_norm(&constraints, &[1.0, u_star], &tol)?;
    if residual > 1e-9 {
        return Err(Error::InvalidResult {
            detail: format!("constraint system inconsistent, residual {residual:e}"),
        });
    }
    let basis = nullspace_basis(&constraints, &tol)?;
    let k = basis.cols();
    if k == 0 {
        // The slice is a single point (distinct two-level energies).
        return Configuration::new(clamp_tiny(&p_hat));
    }

    let eval = |coeffs: &[f64]| -> Option<(f64, Vec<f64>)> {
        let mut p = p_hat.clone();
        for (j, &c) in coeffs.iter().enumerate() {
            for i in 0..dim {
                p[i] += c * basis.get(i, j);
            }
        }
        if p.iter().any(|&x| x < -1e-15) {
            return None;
        }
        let p = clamp_tiny(&p);
        Some((entropy_raw(&p), p))
    };

    // Global sweep, then zoom: the coefficient box always contains the slice
    // polytope (the simplex has diameter sqrt(2) and the basis is
    // orthonormal), so round 0 sees every feasible cell.
    let mut center = vec![0.0; k];
    let mut half_range = 1.6;
    let mut best_s = f64::NEG_INFINITY;
    let mut best_p: Option<Vec<f64>> = None;
    let mut best_c = center.clone();
    for round in 0..=budget.refine_rounds {
        let g = if round == 0 { budget.grid } else { 41 };
        let mut idx = vec![0usize; k];
        loop {
            let coeffs: Vec<f64> = idx
                .iter()
                .zip(&center)
                .map(|(&i, &c)| c - half_range + 2.0 * half_range * i as f64 / (g - 1) as f64)
                .collect();
            if let Some((s, p)) = eval(&coeffs) {
                if s > best_s {
                    best_s = s;
                    best_p = Some(p);
                    best_c = coeffs;
                }
            }
            // Odometer over the k-dimensional grid.
            let mut axis = 0;
            loop {
                if axis == k {
                    break;
                }
                idx[axis] += 1;
                if idx[axis] < g {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
            if axis == k {
                break;
            }
        }
        center = best_c.clone();
        // Keep two grid cells on either side of the best point.
        half_range *= 4.0 / (g - 1) as f64;
    }
    match best_p {
        Some(p) => Configuration::new(p),
        None => Err(Error::InvalidResult {
            detail: "no feasible point found on the constraint slice".into(),
        }),
    }
}

/// Clamp rounding-level negatives (>= -1e-15) to exact zero.
fn clamp_tiny(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| if x < 0.0 { 0.0 } else { x }).collect()
}
