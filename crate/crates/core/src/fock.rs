//! Truncated Fock-space linear algebra.
//!
//! States and operators of a single bosonic mode are represented on the
//! span of the first `dim` number states `|0>, ..., |dim-1>`. Every
//! constructor accounts for the probability mass that falls outside the
//! cutoff and refuses to build a state whose tail exceeds [`TAIL_LIMIT`].
//!
//! All entropies are in nats.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest tail mass a constructor accepts before reporting a truncation error.
pub const TAIL_LIMIT: f64 = 1e-6;
/// Eigenvalues below this floor do not contribute to the entropy.
pub const EIGEN_FLOOR: f64 = 1e-14;
/// Negative eigenvalues above this bound are treated as round-off.
pub const PSD_TOL: f64 = 1e-10;
/// Maximum entrywise anti-Hermitian part accepted by [`HermitianOperator::new`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A normalized pure state on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    tail_mass: f64,
}

impl StateVector {
    /// Normalizes `amplitudes`; `tail_mass` records mass lost before normalization.
    pub fn new(amplitudes: CVector, tail_mass: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("state vector of dimension 0".into()));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("state vector with zero or non-finite norm".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            tail_mass: tail_mass.max(0.0),
        })
    }

    /// The number state `|n>`.
    pub fn number(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Truncation {
                context: "number state",
                tail: 1.0,
                limit: TAIL_LIMIT,
            });
        }
        let mut v = CVector::zeros(dim);
        v[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v, tail_mass: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|self><self|` as a density operator.
    pub fn projector(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::from_parts(m, self.tail_mass)
    }

    /// Applies the phase rotation `exp(i theta a^dagger a)`.
    pub fn rotated(&self, theta: f64) -> StateVector {
        let amplitudes = CVector::from_iterator(
            self.dim(),
            self.amplitudes
                .iter()
                .enumerate()
                .map(|(n, c)| c * C64::from_polar(1.0, n as f64 * theta)),
        );
        StateVector { amplitudes, tail_mass: self.tail_mass }
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }
}

/// A Hermitian matrix on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Checks squareness and Hermiticity, then symmetrizes away round-off.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let defect = hermitian_defect(&entries);
        if defect > HERMITIAN_TOL {
            return domain(format!("matrix is not Hermitian (defect {defect:.3e})"));
        }
        Ok(Self::from_matrix_unchecked(entries))
    }

    pub(crate) fn from_matrix_unchecked(entries: CMatrix) -> Self {
        let sym = (&entries + entries.adjoint()) * C64::new(0.5, 0.0);
        Self { entries: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMatrix::identity(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = CVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { entries: CMatrix::from_diagonal(&d) }
    }

    /// The number operator `a^dagger a`.
    pub fn number_operator(dim: usize) -> Self {
        let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
        Self::from_real_diagonal(&diag)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    /// Eigenvalues (unsorted) and the unitary whose columns are eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = self.entries.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A unit-trace positive semidefinite operator.
///
/// `trace_deficit` is the probability mass that was lost to the cutoff
/// before the matrix was renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
    trace_deficit: f64,
}

impl DensityOperator {
    /// Validates a matrix as a density operator, renormalizing its trace.
    ///
    /// The trace must already be within `1e-8` of one unless the caller
    /// passes the missing mass as `trace_deficit`.
    pub fn new(entries: CMatrix, trace_deficit: f64) -> Result<Self> {
        let op = HermitianOperator::new(entries)?;
        let tr = op.trace();
        if (tr + trace_deficit - 1.0).abs() > 1e-8 && (tr - 1.0).abs() > 1e-8 {
            return domain(format!("trace {tr:.12} is not 1"));
        }
        let min = op.min_eigenvalue();
        if min < -PSD_TOL {
            return domain(format!("not positive semidefinite (min eigenvalue {min:.3e})"));
        }
        Ok(Self::from_parts(op.into_matrix(), trace_deficit))
    }

    /// Builds from a matrix known to be Hermitian PSD by construction.
    pub(crate) fn from_parts(entries: CMatrix, trace_deficit: f64) -> Self {
        let mut op = HermitianOperator::from_matrix_unchecked(entries);
        let tr = op.trace();
        if tr > 0.0 {
            op.entries /= C64::new(tr, 0.0);
        }
        Self { op, trace_deficit: trace_deficit.max(0.0) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.op.eigenvalues()
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_with(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        (a.adjoint() * self.matrix() * a)[(0, 0)].re
    }

    /// Applies `exp(i theta a^dagger a)` by conjugation.
    pub fn rotated(&self, theta: f64) -> DensityOperator {
        let d = self.dim();
        let m = CMatrix::from_fn(d, d, |i, j| {
            self.matrix()[(i, j)] * C64::from_polar(1.0, (i as f64 - j as f64) * theta)
        });
        DensityOperator {
            op: HermitianOperator { entries: m },
            trace_deficit: self.trace_deficit,
        }
    }

    /// Convex combination `sum_i w_i rho_i`; weights are renormalized.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<DensityOperator> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let d = first.1.dim();
        let mut acc = CMatrix::zeros(d, d);
        let mut total = 0.0;
        let mut deficit = 0.0;
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
            }
            if *w < 0.0 {
                return domain("negative mixture weight");
            }
            acc += rho.matrix() * C64::new(*w, 0.0);
            total += w;
            deficit += w * rho.trace_deficit();
        }
        if total <= 0.0 {
            return domain("mixture weights sum to zero");
        }
        Ok(DensityOperator::from_parts(acc, deficit / total))
    }

    /// `rho (x) sigma` on the product space of dimension `d1 * d2`.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let m = self.matrix().kronecker(other.matrix());
        DensityOperator::from_parts(m, self.trace_deficit + other.trace_deficit)
    }
}

/// Coherent state `|z>` truncated to `dim` levels.
///
/// Fails when more than [`TAIL_LIMIT`] of the Poisson weight lies at or
/// above `dim`.
pub fn coherent_state(z: C64, dim: usize) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be at least 1".into()));
    }
    let mut amps = CVector::zeros(dim);
    let mut c = C64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    let mut mass = 0.0;
    for n in 0..dim {
        if n > 0 {
            c = c * z / (n as f64).sqrt();
        }
        amps[n] = c;
        mass += c.norm_sqr();
    }
    let tail = (1.0 - mass).max(0.0);
    if tail > TAIL_LIMIT {
        return Err(Error::Truncation { context: "coherent state", tail, limit: TAIL_LIMIT });
    }
    StateVector::new(amps, tail)
}

/// Geometric Fock-basis weights of the thermal state with `noise` mean quanta,
/// together with the truncated tail mass `(N/(N+1))^dim`.
pub fn thermal_weights(noise: f64, dim: usize) -> Result<(Vec<f64>, f64)> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return domain(format!("noise must be finite and >= 0, got {noise}"));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be at least 1".into()));
    }
    let q = noise / (noise + 1.0);
    let weights: Vec<f64> = (0..dim).map(|n| q.powi(n as i32) / (noise + 1.0)).collect();
    let deficit = q.powi(dim as i32);
    Ok((weights, deficit))
}

/// Thermal state with mean `noise` quanta, diagonal in the number basis.
pub fn thermal_state(noise: f64, dim: usize) -> Result<DensityOperator> {
    let (weights, deficit) = thermal_weights(noise, dim)?;
    if deficit > TAIL_LIMIT {
        return Err(Error::Truncation { context: "thermal state", tail: deficit, limit: TAIL_LIMIT });
    }
    let m = HermitianOperator::from_real_diagonal(&weights).into_matrix();
    Ok(DensityOperator::from_parts(m, deficit))
}

/// Annihilation operator on `dim` levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Truncated displacement operator together with its unitarity check.
#[derive(Debug, Clone)]
pub struct Displacement {
    pub matrix: CMatrix,
    /// `max |V^dagger V - I|` over the guarded leading block.
    pub unitarity_defect: f64,
    /// Size of the leading block on which the defect was measured.
    pub guarded_dim: usize,
}

/// `V(alpha) = exp(alpha a^dagger - conj(alpha) a)` by scaling-and-squaring
/// of the truncated generator.
pub fn displacement(alpha: C64, dim: usize) -> Result<Displacement> {
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be at least 1".into()));
    }
    let a = annihilation(dim);
    let generator = a.adjoint() * alpha - &a * alpha.conj();
    let v = generator.exp();
    let guard = (4.0 * alpha.norm() * (dim as f64).sqrt()).ceil() as usize;
    let guarded_dim = dim.saturating_sub(guard);
    let vv = v.adjoint() * &v;
    let mut defect = 0.0f64;
    for i in 0..guarded_dim {
        for j in 0..guarded_dim {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((vv[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    if defect > TAIL_LIMIT {
        return Err(Error::Truncation {
            context: "displacement unitarity",
            tail: defect,
            limit: TAIL_LIMIT,
        });
    }
    Ok(Displacement { matrix: v, unitarity_defect: defect, guarded_dim })
}

/// Spectral form of the real-amplitude displacement generator `a^dagger - a`
/// on a padded working space.
///
/// `V(r) = U exp(-i r Lambda) U^dagger` where `i (a^dagger - a) = U Lambda U^dagger`.
/// One eigendecomposition serves every radius, and complex amplitudes
/// follow by phase rotation, so batches of displaced states cost one
/// matrix product each.
#[derive(Debug, Clone)]
pub struct Displacer {
    dim: usize,
    work_dim: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Displacer {
    /// Output dimension `dim`; the generator is diagonalized on `2 * dim` levels.
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_work_dim(dim, 2 * dim)
    }

    pub fn with_work_dim(dim: usize, work_dim: usize) -> Result<Self> {
        if dim == 0 || work_dim < dim {
            return Err(Error::InvalidInput(format!(
                "invalid displacer dimensions dim={dim}, work_dim={work_dim}"
            )));
        }
        let a = annihilation(work_dim);
        let k = (a.adjoint() - &a) * C64::new(0.0, 1.0);
        let (eigenvalues, eigenvectors) = HermitianOperator::from_matrix_unchecked(k).eigen();
        Ok(Self { dim, work_dim, eigenvalues, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn work_dim(&self) -> usize {
        self.work_dim
    }

    /// Columns `V(r)|n>` for `n < count`, on the working space.
    fn columns(&self, r: f64, count: usize) -> CMatrix {
        let u = &self.eigenvectors;
        let phases: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, -r * l))
            .collect();
        // (U^dagger)_{k n} = conj(U_{n k}); scale row k by the phase.
        let mut rhs = CMatrix::zeros(self.work_dim, count);
        for n in 0..count {
            for k in 0..self.work_dim {
                rhs[(k, n)] = phases[k] * u[(n, k)].conj();
            }
        }
        u * rhs
    }

    /// Full displacement matrix on the output space (leading block of the working space).
    pub fn displacement(&self, alpha: C64) -> CMatrix {
        let cols = self.columns(alpha.norm(), self.dim);
        let block = cols.view((0, 0), (self.dim, self.dim)).into_owned();
        rotate_matrix(&block, alpha.arg())
    }

    /// Displaced thermal state `V(alpha) S_0 V(alpha)^dagger` projected on `dim` levels.
    pub fn displaced_thermal(&self, alpha: C64, noise: f64) -> Result<DensityOperator> {
        let (weights, thermal_tail) = thermal_weights(noise, self.work_dim)?;
        let count = weights
            .iter()
            .position(|&w| w < 1e-20)
            .unwrap_or(weights.len())
            .max(1)
            .min(self.dim);
        let cols = self.columns(alpha.norm(), count);
        let mut w = CMatrix::zeros(self.dim, count);
        for n in 0..count {
            let s = weights[n].sqrt();
            for i in 0..self.dim {
                w[(i, n)] = cols[(i, n)] * s;
            }
        }
        let block = &w * w.adjoint();
        let kept: f64 = block.diagonal().iter().map(|c| c.re).sum();
        let deficit = (1.0 - kept).max(0.0) + thermal_tail;
        if deficit > TAIL_LIMIT {
            return Err(Error::Truncation {
                context: "displaced thermal state",
                tail: deficit,
                limit: TAIL_LIMIT,
            });
        }
        let rho = DensityOperator::from_parts(block, deficit);
        Ok(if alpha.arg() != 0.0 { rho.rotated(alpha.arg()) } else { rho })
    }
}

/// `R(theta) M R(theta)^dagger` with `R(theta) = exp(i theta a^dagger a)`.
pub fn rotate_matrix(m: &CMatrix, theta: f64) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] * C64::from_polar(1.0, (i as f64 - j as f64) * theta)
    })
}

/// Thermal state with `noise` mean quanta displaced by `alpha`.
pub fn displaced_thermal(alpha: C64, noise: f64, dim: usize) -> Result<DensityOperator> {
    Displacer::new(dim)?.displaced_thermal(alpha, noise)
}

/// `-sum lambda ln lambda` over eigenvalues of an unnormalized PSD spectrum,
/// ignoring values below [`EIGEN_FLOOR`].
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l >= EIGEN_FLOOR)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues()).max(0.0)
}

/// `Tr rho a^dagger a`.
pub fn mean_photon_number(rho: &DensityOperator) -> f64 {
    rho.matrix()
        .diagonal()
        .iter()
        .enumerate()
        .map(|(n, c)| n as f64 * c.re)
        .sum()
}

/// `f(M)` through the eigendecomposition of `M`.
pub fn hermitian_function<F>(m: &HermitianOperator, f: F) -> HermitianOperator
where
    F: Fn(f64) -> f64,
{
    let (vals, u) = m.eigen();
    let fd = CVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::new(f(l), 0.0)));
    let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * fd[j]);
    HermitianOperator::from_matrix_unchecked(scaled * u.adjoint())
}

fn clip_for_power(l: f64) -> Result<f64> {
    if l < -PSD_TOL {
        return domain(format!("eigenvalue {l:.3e} is negative in a fractional power"));
    }
    Ok(l.max(0.0))
}

/// `M^exponent` for PSD `M`; tiny negative eigenvalues are clipped to zero.
pub fn hermitian_power(m: &HermitianOperator, exponent: f64) -> Result<HermitianOperator> {
    let (vals, u) = m.eigen();
    let mut fd = Vec::with_capacity(vals.len());
    for l in vals {
        let l = clip_for_power(l)?;
        fd.push(if l == 0.0 { 0.0 } else { l.powf(exponent) });
    }
    let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * fd[j]);
    Ok(HermitianOperator::from_matrix_unchecked(scaled * u.adjoint()))
}

pub fn hermitian_sqrt(m: &HermitianOperator) -> Result<HermitianOperator> {
    hermitian_power(m, 0.5)
}

/// `Tr M^exponent` for PSD `M`, from the eigenvalues alone.
pub fn trace_power(m: &HermitianOperator, exponent: f64) -> Result<f64> {
    let mut total = 0.0;
    for l in m.eigenvalues() {
        let l = clip_for_power(l)?;
        if l > 0.0 {
            total += l.powf(exponent);
        }
    }
    Ok(total)
}

/// `H(P_m rho P_m) + t ln t` with `t = Tr P_m rho P_m`, where `P_m` projects
/// onto the first `m` number states. Nondecreasing in `m` and equal to
/// `H(rho)` at `m = dim`.
pub fn corner_entropy(rho: &DensityOperator, m: usize) -> f64 {
    let m = m.min(rho.dim());
    if m == 0 {
        return 0.0;
    }
    let block = rho.matrix().view((0, 0), (m, m)).into_owned();
    let op = HermitianOperator::from_matrix_unchecked(block);
    let t = op.trace();
    let h = entropy_of_spectrum(&op.eigenvalues());
    if t > 0.0 {
        h + t * t.ln()
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn vacuum_coherent_state() {
        let v = coherent_state(c(0.0), 4).unwrap();
        assert_eq!(v.amplitudes()[0], c(1.0));
        for n in 1..4 {
            assert_eq!(v.amplitudes()[n], c(0.0));
        }
        assert_eq!(v.tail_mass(), 0.0);
    }

    #[test]
    fn coherent_overlap_matches_gaussian_kernel() {
        let z = coherent_state(c(0.0), 40).unwrap();
        let w = coherent_state(c(1.0), 40).unwrap();
        let ov = z.inner(&w).norm_sqr();
        assert!((ov - (-1.0f64).exp()).abs() < 1e-9);

        let a = coherent_state(C64::new(0.3, -0.7), 40).unwrap();
        let b = coherent_state(C64::new(-0.4, 0.2), 40).unwrap();
        let d2 = (C64::new(0.3, -0.7) - C64::new(-0.4, 0.2)).norm_sqr();
        assert!((a.inner(&b).norm_sqr() - (-d2).exp()).abs() < 1e-9);
    }

    #[test]
    fn coherent_mean_photon_number() {
        // Oracle: untruncated Poisson(1) weights summed directly.
        let mut p = (-1.0f64).exp();
        let mut mean = 0.0;
        for n in 1..200 {
            p /= n as f64;
            mean += n as f64 * p;
        }
        let v = coherent_state(c(1.0), 40).unwrap();
        assert!((v.mean_photon_number() - mean).abs() < 1e-8);
        assert!((v.mean_photon_number() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coherent_state_truncation_error() {
        let err = coherent_state(c(4.0), 10).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn thermal_vacuum_and_entropy() {
        let t0 = thermal_state(0.0, 5).unwrap();
        assert_eq!(t0.matrix()[(0, 0)], c(1.0));
        assert!(t0.matrix().iter().skip(1).all(|x| x.norm() == 0.0));

        let t1 = thermal_state(1.0, 60).unwrap();
        assert!((von_neumann_entropy(&t1) - 2.0 * LN_2).abs() < 1e-6);
        assert!((mean_photon_number(&t1) - 1.0).abs() < 1e-6);
        assert!((t1.trace_deficit() - 0.5f64.powi(60)).abs() < 1e-30);

        // Oracle: closed form (N+1) ln(N+1) - N ln N at N = 2.
        let t2 = thermal_state(2.0, 80).unwrap();
        let h = 3.0 * 3.0f64.ln() - 2.0 * 2.0f64.ln();
        assert!((von_neumann_entropy(&t2) - h).abs() < 1e-6);
        assert!((h - 1.909543).abs() < 1e-6);
    }

    #[test]
    fn thermal_state_truncation_error() {
        assert!(matches!(thermal_state(5.0, 20), Err(Error::Truncation { .. })));
        assert!(matches!(thermal_state(-1.0, 20), Err(Error::Domain(_))));
    }

    #[test]
    fn displacement_identity_at_zero() {
        let d = displacement(c(0.0), 8).unwrap();
        let diff = (&d.matrix - CMatrix::identity(8, 8)).norm();
        assert!(diff < 1e-14);
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = c(0.5);
        let d = displacement(alpha, 40).unwrap();
        let col = d.matrix.column(0).into_owned();
        let vac_displaced = StateVector::new(col, 0.0).unwrap();
        let coh = coherent_state(alpha, 40).unwrap();
        let fid = vac_displaced.inner(&coh).norm_sqr();
        assert!(fid >= 1.0 - 1e-8, "fidelity {fid}");
    }

    #[test]
    fn spectral_displacer_matches_exponential() {
        let dim = 30;
        let alpha = C64::new(0.6, -0.4);
        let exp_route = displacement(alpha, dim).unwrap().matrix;
        let disp = Displacer::with_work_dim(dim, dim).unwrap();
        let spectral = disp.displacement(alpha);
        assert!((exp_route - spectral).norm() < 1e-10);
    }

    #[test]
    fn displaced_thermal_mean_and_entropy() {
        let rho = displaced_thermal(c(1.0), 1.0, 60).unwrap();
        assert!((mean_photon_number(&rho) - 2.0).abs() < 1e-5);
        assert!((von_neumann_entropy(&rho) - 2.0 * LN_2).abs() < 1e-5);
    }

    #[test]
    fn displaced_thermal_reduces_to_known_states() {
        let a = displaced_thermal(c(0.0), 0.7, 40).unwrap();
        let b = thermal_state(0.7, 40).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-10);

        let alpha = C64::new(0.6, 0.8);
        let rho = displaced_thermal(alpha, 0.0, 40).unwrap();
        let coh = coherent_state(alpha, 40).unwrap();
        assert!(rho.fidelity_with(&coh) >= 1.0 - 1e-8);
    }

    #[test]
    fn entropy_of_simple_states() {
        let pure = coherent_state(C64::new(0.4, 0.1), 20).unwrap().projector();
        assert!(von_neumann_entropy(&pure).abs() < 1e-10);
        let half = DensityOperator::new(
            HermitianOperator::from_real_diagonal(&[0.5, 0.5]).into_matrix(),
            0.0,
        )
        .unwrap();
        assert!((von_neumann_entropy(&half) - LN_2).abs() < 1e-12);
    }

    #[test]
    fn vacuum_mean_photon_number() {
        let v = StateVector::number(0, 6).unwrap().projector();
        assert_eq!(mean_photon_number(&v), 0.0);
    }

    #[test]
    fn hermitian_function_examples() {
        let id = HermitianOperator::identity(3);
        let s = hermitian_sqrt(&id).unwrap();
        assert!((s.matrix() - CMatrix::identity(3, 3)).norm() < 1e-14);

        let m = HermitianOperator::from_real_diagonal(&[4.0, 9.0]);
        let s = hermitian_sqrt(&m).unwrap();
        assert!((s.matrix()[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s.matrix()[(1, 1)].re - 3.0).abs() < 1e-12);
        assert!(s.matrix()[(0, 1)].norm() < 1e-12);

        let sq = hermitian_function(&m, |x| x * x);
        assert!((sq.matrix()[(1, 1)].re - 81.0).abs() < 1e-10);

        // Oracle: sum of squared geometric weights, 1/(2N+1) at N = 1.
        let t = thermal_state(1.0, 60).unwrap();
        let (w, _) = thermal_weights(1.0, 60).unwrap();
        let oracle: f64 = w.iter().map(|x| x * x).sum();
        let tr2 = trace_power(t.operator(), 2.0).unwrap();
        assert!((tr2 - oracle).abs() < 1e-6);
        assert!((tr2 - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn fractional_power_rejects_negative_spectrum() {
        let m = HermitianOperator::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(hermitian_sqrt(&m), Err(Error::Domain(_))));
        let tiny = HermitianOperator::from_real_diagonal(&[1.0, -1e-12]);
        let s = hermitian_sqrt(&tiny).unwrap();
        assert_eq!(s.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn corner_entropy_reaches_full_entropy() {
        let rho = displaced_thermal(C64::new(0.7, 0.2), 0.5, 30).unwrap();
        let full = von_neumann_entropy(&rho);
        assert!((corner_entropy(&rho, 30) - full).abs() < 1e-12);
    }
}
