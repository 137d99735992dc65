//! Closed forms for the energy-constrained bosonic Gaussian channel and the
//! number-shift photon channel, plus the numerical check that both reach the
//! same capacity.
//!
//! The Gaussian channel maps an amplitude `alpha` to the thermal state with
//! `N` noise quanta displaced by `alpha`. The photon channel maps an integer
//! `m` to the same thermal state shifted up the number ladder by `m`. Under
//! the mean-signal-energy constraint `E` both have capacity
//! `g(N + E) - g(N)` with `g(x) = (x + 1) ln(x + 1) - x ln x`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::channel::{Ensemble, Signal, SignalBase};
use crate::discretizer::{self, EnergyConstraint, GridSpec, Prior, StateMap};
use crate::error::{domain, Error, Result};
use crate::fock::{self, DensityOperator, Displacer, HermitianOperator, StateVector, C64, TAIL_LIMIT};

/// Noise and signal budget of a single-mode Gaussian channel, in quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannelSpec {
    pub noise: f64,
    pub budget: f64,
}

impl GaussianChannelSpec {
    pub fn new(noise: f64, budget: f64) -> Result<Self> {
        if !(noise >= 0.0) || !noise.is_finite() {
            return domain(format!("noise N must be finite and >= 0, got {noise}"));
        }
        if !(budget >= 0.0) || !budget.is_finite() {
            return domain(format!("energy E must be finite and >= 0, got {budget}"));
        }
        Ok(Self { noise, budget })
    }
}

/// `x ln(1 + 1/x)`, continuous at zero.
fn x_log1p_inv(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 / x).ln_1p()
    }
}

/// Entropy of the thermal state with `n` mean quanta: `(N+1)ln(N+1) - N ln N`.
pub fn thermal_entropy(n: f64) -> f64 {
    n.ln_1p() + x_log1p_inv(n)
}

/// Entropy of the output-energy-maximizing state: `thermal_entropy(N + E)`.
pub fn max_output_entropy(spec: &GaussianChannelSpec) -> f64 {
    thermal_entropy(spec.noise + spec.budget)
}

/// Capacity `ln(1 + E/(N+1)) + (N+E) ln(1 + 1/(N+E)) - N ln(1 + 1/N)`.
pub fn gaussian_capacity(spec: &GaussianChannelSpec) -> f64 {
    let (n, e) = (spec.noise, spec.budget);
    (e / (n + 1.0)).ln_1p() + x_log1p_inv(n + e) - x_log1p_inv(n)
}

/// Complex Gaussian prior `exp(-|alpha|^2 / E) / (pi E)`, the capacity-achieving
/// input distribution of the Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalGaussianPrior {
    pub energy: f64,
}

impl OptimalGaussianPrior {
    pub fn new(energy: f64) -> Result<Self> {
        if !(energy >= 0.0) || !energy.is_finite() {
            return domain(format!("prior energy must be finite and >= 0, got {energy}"));
        }
        Ok(Self { energy })
    }

    /// Density with respect to `d^2 alpha`; zero everywhere when `E = 0`
    /// (the prior is then the point mass [`Prior::point_mass`]).
    pub fn pdf(&self, alpha: C64) -> f64 {
        if self.energy == 0.0 {
            return 0.0;
        }
        (-alpha.norm_sqr() / self.energy).exp() / (PI * self.energy)
    }

    /// `|alpha|^2 ~ Exp(mean E)`, phase uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        if self.energy == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let u: f64 = rng.random();
        let radius2 = -self.energy * (1.0 - u).ln();
        let theta = 2.0 * PI * rng.random::<f64>();
        C64::from_polar(radius2.sqrt(), theta)
    }
}

impl Prior for OptimalGaussianPrior {
    fn density(&self, x: C64) -> f64 {
        self.pdf(x)
    }

    fn point_mass(&self) -> Option<C64> {
        (self.energy == 0.0).then(|| C64::new(0.0, 0.0))
    }
}

/// Number-shifted thermal state `P^m S_0 P^m*` with `P|n> = |n+1>`.
pub fn photon_state(m: usize, noise: f64, dim: usize) -> Result<DensityOperator> {
    if m >= dim {
        return Err(Error::Truncation { context: "photon state", tail: 1.0, limit: TAIL_LIMIT });
    }
    let (weights, deficit) = fock::thermal_weights(noise, dim - m)?;
    if deficit > TAIL_LIMIT {
        return Err(Error::Truncation { context: "photon state", tail: deficit, limit: TAIL_LIMIT });
    }
    let mut diag = vec![0.0; dim];
    diag[m..].copy_from_slice(&weights);
    let op = HermitianOperator::from_real_diagonal(&diag);
    DensityOperator::new(op.into_matrix(), deficit)
}

/// First `len` weights of the optimal photon-channel prior
/// `pi_m = N/(N+E) delta_{m0} + E/(N+E) (1/(N+E+1)) ((N+E)/(N+E+1))^m`.
pub fn photon_optimal_prior(spec: &GaussianChannelSpec, len: usize) -> Vec<f64> {
    let (n, e) = (spec.noise, spec.budget);
    let total = n + e;
    if total == 0.0 {
        let mut p = vec![0.0; len];
        if len > 0 {
            p[0] = 1.0;
        }
        return p;
    }
    let ratio = total / (total + 1.0);
    (0..len)
        .map(|m| {
            let geometric = ratio.powi(m as i32) / (total + 1.0);
            let delta = if m == 0 { n / total } else { 0.0 };
            delta + e / total * geometric
        })
        .collect()
}

/// Mass of the optimal photon prior at shifts `m >= len`.
pub fn photon_prior_tail(spec: &GaussianChannelSpec, len: usize) -> f64 {
    let total = spec.noise + spec.budget;
    if total == 0.0 {
        return if len == 0 { 1.0 } else { 0.0 };
    }
    spec.budget / total * (total / (total + 1.0)).powi(len as i32)
}

/// Photon-channel ensemble under the optimal prior with `f(m) = m`.
///
/// The prior is cut where the next signal would exceed the truncation
/// limit; a cut that drops more than the tail limit is an error.
pub fn photon_ensemble(spec: &GaussianChannelSpec, dim: usize) -> Result<Ensemble> {
    let q = spec.noise / (spec.noise + 1.0);
    // Largest shift whose thermal tail stays below the limit.
    let mut max_shift = dim - 1;
    if q > 0.0 {
        let needed = (TAIL_LIMIT.ln() / q.ln()).ceil() as usize;
        max_shift = dim.saturating_sub(needed.max(1));
    }
    let prior_cut = (1..=max_shift + 1)
        .find(|&len| photon_prior_tail(spec, len) < 1e-15)
        .unwrap_or(max_shift + 1);
    let len = prior_cut.min(max_shift + 1);
    let tail = photon_prior_tail(spec, len);
    if tail > TAIL_LIMIT {
        return Err(Error::Truncation { context: "photon prior", tail, limit: TAIL_LIMIT });
    }
    let mut weights = photon_optimal_prior(spec, len);
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let signals = (0..len)
        .map(|m| {
            if spec.noise == 0.0 {
                StateVector::number(m, dim).map(Signal::pure)
            } else {
                photon_state(m, spec.noise, dim).map(Signal::mixed)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let points = (0..len).map(|m| C64::new(m as f64, 0.0)).collect();
    let f_values = (0..len).map(|m| m as f64).collect();
    Ensemble::new(points, weights, signals, f_values, spec.budget)
}

/// Gaussian-channel signals `alpha -> V(alpha) S_0 V(alpha)^dagger`.
///
/// Phase covariant, so one base state per radius is computed and cached.
pub struct GaussianStates {
    noise: f64,
    dim: usize,
    displacer: Option<Displacer>,
    cache: Mutex<HashMap<u64, Arc<SignalBase>>>,
}

impl GaussianStates {
    pub fn new(noise: f64, dim: usize) -> Result<Self> {
        GaussianChannelSpec::new(noise, 0.0)?;
        let displacer = if noise > 0.0 { Some(Displacer::new(dim)?) } else { None };
        Ok(Self { noise, dim, displacer, cache: Mutex::new(HashMap::new()) })
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    fn compute_base(&self, r: f64) -> Result<SignalBase> {
        let alpha = C64::new(r, 0.0);
        match &self.displacer {
            None => Ok(SignalBase::Pure(fock::coherent_state(alpha, self.dim)?)),
            Some(d) => Ok(SignalBase::Mixed(d.displaced_thermal(alpha, self.noise)?)),
        }
    }
}

impl StateMap for GaussianStates {
    fn dim(&self) -> usize {
        self.dim
    }

    fn radial_base(&self, r: f64) -> Option<Result<Arc<SignalBase>>> {
        let key = r.to_bits();
        if let Some(b) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Some(Ok(b.clone()));
        }
        Some(self.compute_base(r).map(|b| {
            let b = Arc::new(b);
            self.cache.lock().expect("cache poisoned").insert(key, b.clone());
            b
        }))
    }

    /// All signals are unitarily equivalent to the thermal state.
    fn entropy(&self, _x: C64) -> Result<f64> {
        Ok(thermal_entropy(self.noise))
    }
}

/// Finite Gaussian-channel ensemble from the polar-grid discretization of
/// the optimal prior at `level`.
pub fn gaussian_grid_ensemble(spec: &GaussianChannelSpec, grid: &GridSpec, dim: usize) -> Result<Ensemble> {
    let prior = OptimalGaussianPrior::new(spec.budget)?;
    let states = GaussianStates::new(spec.noise, dim)?;
    let d = discretizer::discretize(&prior, &states, &EnergyConstraint, spec.budget, grid)?;
    Ok(d.ensemble)
}

/// `Tr S_pi a^dagger a <= N + E` for the ensemble average.
pub fn satisfies_output_constraint(ens: &Ensemble, spec: &GaussianChannelSpec) -> Result<bool> {
    let avg = ens.average_state()?;
    Ok(fock::mean_photon_number(&avg) <= spec.noise + spec.budget + 1e-9)
}

/// Holevo quantities of the photon and discretized Gaussian ensembles next
/// to the closed-form capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub spec: GaussianChannelSpec,
    pub dim: usize,
    pub level: usize,
    pub capacity: f64,
    pub photon_delta_h: f64,
    pub gaussian_delta_h: f64,
    pub max_deviation: f64,
}

impl EquivalenceReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "energy",
        "noise",
        "dim",
        "level",
        "capacity",
        "photon_delta_h",
        "gaussian_delta_h",
        "max_deviation",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.spec.budget.to_string(),
            self.spec.noise.to_string(),
            self.dim.to_string(),
            self.level.to_string(),
            format!("{:.12}", self.capacity),
            format!("{:.12}", self.photon_delta_h),
            format!("{:.12}", self.gaussian_delta_h),
            format!("{:.3e}", self.max_deviation),
        ]
    }
}

/// Compares both channels against the closed-form capacity.
pub fn equivalence_check(
    spec: &GaussianChannelSpec,
    dim: usize,
    grid: &GridSpec,
) -> Result<EquivalenceReport> {
    let capacity = gaussian_capacity(spec);
    let photon_delta_h = photon_ensemble(spec, dim)?.holevo_quantity()?;
    let gaussian_delta_h = gaussian_grid_ensemble(spec, grid, dim)?.holevo_quantity()?;
    let max_deviation =
        (photon_delta_h - capacity).abs().max((gaussian_delta_h - capacity).abs());
    Ok(EquivalenceReport {
        spec: *spec,
        dim,
        level: grid.level,
        capacity,
        photon_delta_h,
        gaussian_delta_h,
        max_deviation,
    })
}
