//! Finite-support ensembles with an additive input constraint.
//!
//! An [`Ensemble`] pairs each input point with a prior weight, a signal
//! state and the value of the constraint functional `f` at that point.
//! Signals are stored as a shared base state plus a phase rotation so that
//! discretized priors with hundreds of thousands of points over a few
//! thousand distinct radii stay cheap to hold and to average.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::fock::{
    self, entropy_of_spectrum, CMatrix, DensityOperator, HermitianOperator, StateVector, C64,
    PSD_TOL,
};

/// Tolerance on `sum(weights) = 1` accepted at construction, before renormalizing.
const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Slack allowed in the feasibility test `sum f pi <= E`.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalBase {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl SignalBase {
    pub fn dim(&self) -> usize {
        match self {
            SignalBase::Pure(v) => v.dim(),
            SignalBase::Mixed(r) => r.dim(),
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            SignalBase::Pure(_) => 0.0,
            SignalBase::Mixed(r) => fock::von_neumann_entropy(r),
        }
    }

    pub fn matrix(&self) -> CMatrix {
        match self {
            SignalBase::Pure(v) => v.amplitudes() * v.amplitudes().adjoint(),
            SignalBase::Mixed(r) => r.matrix().clone(),
        }
    }
}

/// A signal state `R(phase) base R(phase)^dagger`, where `R` is the
/// phase-space rotation `exp(i phase a^dagger a)`.
#[derive(Debug, Clone)]
pub struct Signal {
    base: Arc<SignalBase>,
    phase: f64,
}

impl Signal {
    pub fn pure(v: StateVector) -> Self {
        Self { base: Arc::new(SignalBase::Pure(v)), phase: 0.0 }
    }

    pub fn mixed(rho: DensityOperator) -> Self {
        Self { base: Arc::new(SignalBase::Mixed(rho)), phase: 0.0 }
    }

    /// Shares `base` with other signals; only the phase differs.
    pub fn rotated(base: Arc<SignalBase>, phase: f64) -> Self {
        Self { base, phase }
    }

    pub fn base(&self) -> &Arc<SignalBase> {
        &self.base
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_pure(&self) -> bool {
        matches!(*self.base, SignalBase::Pure(_))
    }

    /// The state vector of a pure signal.
    pub fn vector(&self) -> Option<StateVector> {
        match &*self.base {
            SignalBase::Pure(v) if self.phase == 0.0 => Some(v.clone()),
            SignalBase::Pure(v) => Some(v.rotated(self.phase)),
            SignalBase::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> DensityOperator {
        match &*self.base {
            SignalBase::Pure(v) => v.rotated(self.phase).projector(),
            SignalBase::Mixed(r) if self.phase == 0.0 => r.clone(),
            SignalBase::Mixed(r) => r.rotated(self.phase),
        }
    }

    pub fn entropy(&self) -> f64 {
        self.base.entropy()
    }
}

/// Finite ensemble `{(x_i, pi_i, S_i, f(x_i))}` with budget `E`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    points: Vec<C64>,
    weights: Vec<f64>,
    signals: Vec<Signal>,
    f_values: Vec<f64>,
    budget: f64,
}

impl Ensemble {
    pub fn new(
        points: Vec<C64>,
        weights: Vec<f64>,
        signals: Vec<Signal>,
        f_values: Vec<f64>,
        budget: f64,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty ensemble".into()));
        }
        if points.len() != n || signals.len() != n || f_values.len() != n {
            return Err(Error::InvalidInput(format!(
                "ensemble columns differ in length: points {}, weights {n}, signals {}, f {}",
                points.len(),
                signals.len(),
                f_values.len()
            )));
        }
        let dim = signals[0].dim();
        if let Some(s) = signals.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return domain("ensemble weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return domain(format!("ensemble weights sum to {total}, not 1"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        if f_values.iter().any(|f| !f.is_finite()) || !budget.is_finite() {
            return domain("constraint values must be finite");
        }
        Ok(Self { points, weights, signals, f_values, budget })
    }

    /// Uniform prior over `signals` with `f = 0`, labelled by index.
    pub fn uniform(signals: Vec<Signal>) -> Result<Self> {
        let n = signals.len();
        let points = (0..n).map(|i| C64::new(i as f64, 0.0)).collect();
        Self::new(points, vec![1.0 / n as f64; n], signals, vec![0.0; n], 0.0)
    }

    /// Same points, signals and constraint with a different prior.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(
            self.points.clone(),
            weights,
            self.signals.clone(),
            self.f_values.clone(),
            self.budget,
        )
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.signals[0].dim()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn all_pure(&self) -> bool {
        self.signals.iter().all(Signal::is_pure)
    }

    /// `sum_i f(x_i) pi_i`.
    pub fn constraint_value(&self) -> f64 {
        self.weights.iter().zip(&self.f_values).map(|(w, f)| w * f).sum()
    }

    /// Membership in the constrained class: `sum f pi <= E`.
    pub fn is_feasible(&self) -> bool {
        self.constraint_value() <= self.budget + FEASIBILITY_SLACK
    }

    /// `sum_i c_i S_i` for nonnegative coefficients, unnormalized.
    ///
    /// Signals sharing a base are summed through the phase characteristic
    /// `phi(k) = sum c_i exp(i k theta_i)`, which multiplies the base's
    /// `(m, n)` entry at `k = m - n`.
    pub fn weighted_operator(&self, coefficients: &[f64]) -> Result<HermitianOperator> {
        self.accumulate(coefficients, |_| Ok(None))
    }

    fn accumulate<F>(&self, coefficients: &[f64], transform: F) -> Result<HermitianOperator>
    where
        F: Fn(&SignalBase) -> Result<Option<CMatrix>>,
    {
        if coefficients.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coefficients.len(),
            });
        }
        let d = self.dim();
        let mut group_of: HashMap<usize, usize> = HashMap::new();
        let mut groups: Vec<(Arc<SignalBase>, Vec<usize>)> = Vec::new();
        for (i, s) in self.signals.iter().enumerate() {
            let key = Arc::as_ptr(&s.base) as usize;
            let g = *group_of.entry(key).or_insert_with(|| {
                groups.push((s.base.clone(), Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(i);
        }

        let mut acc = CMatrix::zeros(d, d);
        for (base, members) in &groups {
            // phi[k] for k = 0..d; negative offsets are conjugates.
            let mut phi = vec![C64::new(0.0, 0.0); d];
            for &i in members {
                let c = coefficients[i];
                if c == 0.0 {
                    continue;
                }
                let theta = self.signals[i].phase;
                if theta == 0.0 {
                    phi.iter_mut().for_each(|p| p.re += c);
                } else {
                    let step = C64::from_polar(1.0, theta);
                    let mut z = C64::new(c, 0.0);
                    for p in phi.iter_mut() {
                        *p += z;
                        z *= step;
                    }
                }
            }
            if phi[0].re == 0.0 {
                continue;
            }
            let phase = |m: usize, n: usize| if m >= n { phi[m - n] } else { phi[n - m].conj() };
            match (transform(base)?, &**base) {
                (Some(b), _) => add_phased(&mut acc, &b, phase),
                (None, SignalBase::Pure(v)) => {
                    let a = v.amplitudes();
                    for n in 0..d {
                        for m in 0..d {
                            acc[(m, n)] += a[m] * a[n].conj() * phase(m, n);
                        }
                    }
                }
                (None, SignalBase::Mixed(r)) => add_phased(&mut acc, r.matrix(), phase),
            }
        }
        Ok(HermitianOperator::from_matrix_unchecked(acc))
    }

    /// Ensemble average `S_pi = sum_i pi_i S_i`.
    pub fn average_state(&self) -> Result<DensityOperator> {
        let op = self.weighted_operator(&self.weights)?;
        let deficit: f64 = self
            .weights
            .iter()
            .zip(&self.signals)
            .map(|(w, s)| {
                w * match &*s.base {
                    SignalBase::Pure(v) => v.tail_mass(),
                    SignalBase::Mixed(r) => r.trace_deficit(),
                }
            })
            .sum();
        Ok(DensityOperator::from_parts(op.into_matrix(), deficit))
    }

    /// `sum_i pi_i H(S_i)`, computing each distinct base entropy once.
    pub fn mean_signal_entropy(&self) -> f64 {
        let mut cache: HashMap<usize, f64> = HashMap::new();
        self.weights
            .iter()
            .zip(&self.signals)
            .map(|(w, s)| {
                if *w == 0.0 {
                    return 0.0;
                }
                let key = Arc::as_ptr(&s.base) as usize;
                w * *cache.entry(key).or_insert_with(|| s.entropy())
            })
            .sum()
    }

    /// Holevo quantity `H(sum pi_i S_i) - sum pi_i H(S_i)` in nats.
    pub fn holevo_quantity(&self) -> Result<f64> {
        let avg = self.weighted_operator(&self.weights)?;
        let h_avg = entropy_of_spectrum(&avg.eigenvalues());
        Ok(h_avg - self.mean_signal_entropy())
    }

    /// Shannon information `I_1(pi, X)` of the classical channel
    /// `P(j|i) = Tr S_i X_j`, including the completing outcome.
    pub fn mutual_information(&self, povm: &Povm) -> Result<f64> {
        if povm.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: povm.dim() });
        }
        let outcomes = povm.all_elements();
        let conditional: Vec<Vec<f64>> = self
            .signals
            .iter()
            .map(|s| {
                let rho = s.density();
                outcomes
                    .iter()
                    .map(|x| trace_product(rho.matrix(), x.matrix()).max(0.0))
                    .collect()
            })
            .collect();
        let mut info = 0.0;
        for j in 0..outcomes.len() {
            let q: f64 = self
                .weights
                .iter()
                .zip(&conditional)
                .map(|(w, p)| w * p[j])
                .sum();
            if q <= 0.0 {
                continue;
            }
            for (w, p) in self.weights.iter().zip(&conditional) {
                if *w > 0.0 && p[j] > 0.0 {
                    info += w * p[j] * (p[j] / q).ln();
                }
            }
        }
        Ok(info)
    }

    /// Two-letter ensemble with product signals `S_i (x) S_k` under a joint
    /// prior `joint[i][k]` over this ensemble's letters.
    pub fn two_letter(&self, joint: &[Vec<f64>]) -> Result<Ensemble> {
        let n = self.len();
        if joint.len() != n || joint.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("joint prior must be n x n".into()));
        }
        let densities: Vec<DensityOperator> = self.signals.iter().map(Signal::density).collect();
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        let mut signals = Vec::with_capacity(n * n);
        let mut f_values = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                points.push(C64::new(i as f64, k as f64));
                weights.push(joint[i][k]);
                signals.push(Signal::mixed(densities[i].tensor(&densities[k])));
                f_values.push(self.f_values[i] + self.f_values[k]);
            }
        }
        Ensemble::new(points, weights, signals, f_values, 2.0 * self.budget)
    }

    /// Writes `re,im,weight,f_value` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["re", "im", "weight", "f_value"])?;
        for ((p, wt), f) in self.points.iter().zip(&self.weights).zip(&self.f_values) {
            w.write_record(&[
                format!("{:e}", p.re),
                format!("{:e}", p.im),
                format!("{wt:e}"),
                format!("{f:e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `re,im,weight,f_value` rows and rebuilds each state with `generator`.
    pub fn read_csv<R: Read>(
        reader: R,
        generator: StateGenerator,
        dim: usize,
        budget: f64,
    ) -> Result<Ensemble> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut f_values = Vec::new();
        for rec in r.deserialize::<(f64, f64, f64, f64)>() {
            let (re, im, w, f) = rec?;
            points.push(C64::new(re, im));
            weights.push(w);
            f_values.push(f);
        }
        let signals = points
            .iter()
            .map(|&p| generator.signal(p, dim))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(points, weights, signals, f_values, budget)
    }
}

fn add_phased<P: Fn(usize, usize) -> C64>(acc: &mut CMatrix, b: &CMatrix, phase: P) {
    let d = acc.nrows();
    for n in 0..d {
        for m in 0..d {
            acc[(m, n)] += b[(m, n)] * phase(m, n);
        }
    }
}

/// `Tr(A B)` for square matrices of equal size.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut t = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t.re
}

/// Named constructors mapping an input point to a signal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateGenerator {
    /// `|alpha>`.
    Coherent,
    /// Thermal state with the given noise, displaced by the point.
    DisplacedThermal(f64),
    /// Number-shifted thermal state; the point's real part is the shift `m`.
    Photon(f64),
}

impl StateGenerator {
    pub fn signal(&self, point: C64, dim: usize) -> Result<Signal> {
        match *self {
            StateGenerator::Coherent => Ok(Signal::pure(fock::coherent_state(point, dim)?)),
            StateGenerator::DisplacedThermal(0.0) => {
                Ok(Signal::pure(fock::coherent_state(point, dim)?))
            }
            StateGenerator::DisplacedThermal(n) => {
                Ok(Signal::mixed(fock::displaced_thermal(point, n, dim)?))
            }
            StateGenerator::Photon(n) => {
                let m = point.re.round();
                if point.im != 0.0 || m < 0.0 || (point.re - m).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "photon-channel point must be a nonnegative integer, got {point}"
                    )));
                }
                Ok(Signal::mixed(crate::gaussian::photon_state(m as usize, n, dim)?))
            }
        }
    }
}

impl FromStr for StateGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let noise = |arg: &str| {
            arg.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad noise value in generator '{s}'")))
        };
        match s.split_once(':') {
            None if s == "coherent" => Ok(StateGenerator::Coherent),
            Some(("displaced_thermal", n)) => Ok(StateGenerator::DisplacedThermal(noise(n)?)),
            Some(("photon", n)) => Ok(StateGenerator::Photon(noise(n)?)),
            _ => Err(Error::InvalidInput(format!(
                "unknown state generator '{s}' (expected coherent, displaced_thermal:N or photon:N)"
            ))),
        }
    }
}

/// Tolerance on `sum X_j + X_0 = I`.
pub const POVM_TOL: f64 = 1e-9;

/// A resolution of identity with the completing element stored explicitly.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
    completion: HermitianOperator,
}

impl Povm {
    /// Completes `elements` (which must sum to at most `I`) with `X_0 = I - sum X_j`.
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("POVM needs at least one element".into()))?;
        let d = first.dim();
        let mut sum = CMatrix::zeros(d, d);
        for x in &elements {
            if x.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
            }
            let min = x.min_eigenvalue();
            if min < -PSD_TOL {
                return domain(format!("POVM element not PSD (min eigenvalue {min:.3e})"));
            }
            sum += x.matrix();
        }
        let completion =
            HermitianOperator::from_matrix_unchecked(CMatrix::identity(d, d) - sum);
        let min = completion.min_eigenvalue();
        if min < -PSD_TOL {
            return domain(format!("POVM elements exceed identity (min eigenvalue of X0 {min:.3e})"));
        }
        Ok(Self { elements, completion })
    }

    /// Projective measurement onto orthonormal `vectors`, completed to `I`.
    pub fn projective(vectors: &[StateVector]) -> Result<Self> {
        let elements = vectors
            .iter()
            .map(|v| HermitianOperator::from_matrix_unchecked(v.amplitudes() * v.amplitudes().adjoint()))
            .collect();
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.completion.dim()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn completion(&self) -> &HermitianOperator {
        &self.completion
    }

    /// Elements followed by the completion.
    pub fn all_elements(&self) -> Vec<&HermitianOperator> {
        self.elements.iter().chain(std::iter::once(&self.completion)).collect()
    }

    /// `max |sum X_j + X_0 - I|`.
    pub fn identity_defect(&self) -> f64 {
        let d = self.dim();
        let mut sum = self.completion.matrix().clone();
        for x in &self.elements {
            sum += x.matrix();
        }
        (sum - CMatrix::identity(d, d)).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, thermal_state};
    use std::f64::consts::LN_2;

    fn basis(n: usize, d: usize) -> StateVector {
        StateVector::number(n, d).unwrap()
    }

    #[test]
    fn single_state_average_is_itself() {
        let rho = thermal_state(0.4, 20).unwrap();
        let ens = Ensemble::uniform(vec![Signal::mixed(rho.clone())]).unwrap();
        let avg = ens.average_state().unwrap();
        assert!((avg.matrix() - rho.matrix()).norm() < 1e-14);
    }

    #[test]
    fn average_of_orthogonal_projectors() {
        let ens = Ensemble::uniform(vec![Signal::pure(basis(0, 4)), Signal::pure(basis(1, 4))])
            .unwrap();
        let avg = ens.average_state().unwrap();
        assert!((avg.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((avg.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(avg.matrix()[(2, 2)].norm() < 1e-15);
    }

    #[test]
    fn rotated_signals_average_like_explicit_states() {
        let v = coherent_state(C64::new(0.8, 0.0), 20).unwrap();
        let base = Arc::new(SignalBase::Pure(v));
        let phases = [0.0, 0.7, 2.1, 4.0];
        let signals: Vec<Signal> =
            phases.iter().map(|&t| Signal::rotated(base.clone(), t)).collect();
        let explicit: Vec<Signal> = signals.iter().map(|s| Signal::mixed(s.density())).collect();
        let w = vec![0.1, 0.2, 0.3, 0.4];
        let a = Ensemble::uniform(signals).unwrap().with_weights(w.clone()).unwrap();
        let b = Ensemble::uniform(explicit).unwrap().with_weights(w).unwrap();
        let da = a.average_state().unwrap();
        let db = b.average_state().unwrap();
        assert!((da.matrix() - db.matrix()).norm() < 1e-13);
    }

    #[test]
    fn holevo_of_identical_states_is_zero() {
        let rho = thermal_state(0.8, 30).unwrap();
        let ens = Ensemble::uniform(vec![Signal::mixed(rho.clone()), Signal::mixed(rho)])
            .unwrap()
            .with_weights(vec![0.3, 0.7])
            .unwrap();
        assert!(ens.holevo_quantity().unwrap().abs() < 1e-10);
    }

    #[test]
    fn holevo_of_orthogonal_pure_states() {
        let ens = Ensemble::uniform(vec![Signal::pure(basis(0, 3)), Signal::pure(basis(2, 3))])
            .unwrap();
        assert!((ens.holevo_quantity().unwrap() - LN_2).abs() < 1e-10);
    }

    #[test]
    fn constraint_value_and_feasibility() {
        let ens = Ensemble::uniform(vec![Signal::pure(basis(0, 3)), Signal::pure(basis(1, 3))])
            .unwrap();
        assert_eq!(ens.constraint_value(), 0.0);
        assert!(ens.is_feasible());

        let e = Ensemble::new(
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![0.5, 0.5],
            vec![Signal::pure(basis(0, 3)), Signal::pure(basis(1, 3))],
            vec![0.0, 1.0],
            0.4,
        )
        .unwrap();
        assert!((e.constraint_value() - 0.5).abs() < 1e-15);
        assert!(!e.is_feasible());
    }

    #[test]
    fn trivial_povm_gives_no_information() {
        let ens = Ensemble::uniform(vec![Signal::pure(basis(0, 2)), Signal::pure(basis(1, 2))])
            .unwrap();
        let povm = Povm::new(vec![HermitianOperator::identity(2)]).unwrap();
        assert!(povm.identity_defect() < 1e-15);
        assert!(ens.mutual_information(&povm).unwrap().abs() < 1e-15);
    }

    #[test]
    fn projective_measurement_on_orthogonal_states() {
        let states = vec![basis(0, 3), basis(1, 3)];
        let ens = Ensemble::uniform(states.iter().cloned().map(Signal::pure).collect()).unwrap();
        let povm = Povm::projective(&states).unwrap();
        assert!((ens.mutual_information(&povm).unwrap() - LN_2).abs() < 1e-10);
        // X0 projects on |2> and is never triggered.
        assert!((povm.completion().matrix()[(2, 2)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn povm_exceeding_identity_rejected() {
        let two = HermitianOperator::from_real_diagonal(&[2.0, 0.0]);
        assert!(Povm::new(vec![two]).is_err());
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let err = Ensemble::uniform(vec![Signal::pure(basis(0, 2)), Signal::pure(basis(0, 3))]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let ens = Ensemble::uniform(vec![Signal::pure(basis(0, 2)), Signal::pure(basis(1, 2))])
            .unwrap();
        assert!(ens.with_weights(vec![0.5, 0.6]).is_err());
        assert!(ens.with_weights(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn generator_parsing() {
        assert_eq!("coherent".parse::<StateGenerator>().unwrap(), StateGenerator::Coherent);
        assert_eq!(
            "displaced_thermal:0.5".parse::<StateGenerator>().unwrap(),
            StateGenerator::DisplacedThermal(0.5)
        );
        assert_eq!("photon:1".parse::<StateGenerator>().unwrap(), StateGenerator::Photon(1.0));
        assert!("squeezed".parse::<StateGenerator>().is_err());
        assert!("photon:x".parse::<StateGenerator>().is_err());
    }

    #[test]
    fn csv_roundtrip_rebuilds_states() {
        let gen = StateGenerator::Coherent;
        let pts = [C64::new(0.0, 0.0), C64::new(0.5, -0.25), C64::new(-1.0, 0.3)];
        let ens = Ensemble::new(
            pts.to_vec(),
            vec![0.25, 0.5, 0.25],
            pts.iter().map(|&p| gen.signal(p, 24).unwrap()).collect(),
            pts.iter().map(|p| p.norm_sqr()).collect(),
            1.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("re,im,weight,f_value\n"));
        let back = Ensemble::read_csv(buf.as_slice(), gen, 24, 1.0).unwrap();
        assert_eq!(back.points(), ens.points());
        assert!(
            (back.holevo_quantity().unwrap() - ens.holevo_quantity().unwrap()).abs() < 1e-12
        );
    }
}
