#![allow(dead_code)]

use qchannel_core::channel::{Ensemble, Povm, Signal};
use qchannel_core::fock::{self, DensityOperator, HermitianOperator, StateVector};
use qchannel_core::{CMatrix, CVector, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_pure<R: Rng>(rng: &mut R, d: usize) -> StateVector {
    let v: CVector = ginibre(rng, d, 1).column(0).into_owned();
    StateVector::new(v, 0.0).unwrap()
}

/// `A A^dagger / Tr` with a random rank between 1 and `d`.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DensityOperator {
    let rank = rng.random_range(1..=d);
    let a = ginibre(rng, d, rank);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    let m = (m.clone() + m.adjoint()) * C64::new(0.5 / tr, 0.0);
    DensityOperator::new(m, 0.0).unwrap()
}

pub fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_signal<R: Rng>(rng: &mut R, d: usize) -> Signal {
    if rng.random_bool(0.5) {
        Signal::pure(random_pure(rng, d))
    } else {
        Signal::mixed(random_density(rng, d))
    }
}

pub fn random_ensemble<R: Rng>(rng: &mut R, d: usize, k: usize) -> Ensemble {
    let signals: Vec<Signal> = (0..k).map(|_| random_signal(rng, d)).collect();
    let weights = random_weights(rng, k);
    let points = (0..k).map(|i| C64::new(i as f64, 0.0)).collect();
    Ensemble::new(points, weights, signals, vec![0.0; k], 0.0).unwrap()
}

/// `k` elements `c S^{-1/2} B_j S^{-1/2}` with `S = sum B_j` and `c` in
/// `(0.5, 1]`; the completion is at least `(1 - c) I`.
pub fn random_povm<R: Rng>(rng: &mut R, d: usize, k: usize) -> Povm {
    let parts: Vec<CMatrix> = (0..k)
        .map(|_| {
            let rank = rng.random_range(1..=d);
            let a = ginibre(rng, d, rank);
            &a * a.adjoint()
        })
        .collect();
    let sum = parts.iter().fold(CMatrix::zeros(d, d), |acc, b| acc + b);
    let sum = HermitianOperator::new((sum.clone() + sum.adjoint()) * C64::new(0.5, 0.0)).unwrap();
    // Pseudo-inverse on the support, so the elements sum to c times a projector.
    let cutoff = 1e-9 * sum.eigenvalues().iter().copied().fold(0.0, f64::max);
    let inv_sqrt = fock::hermitian_function(&sum, |x| if x > cutoff { x.powf(-0.5) } else { 0.0 });
    let c = 0.5 + 0.5 * rng.random::<f64>();
    let elements = parts
        .iter()
        .map(|b| {
            let x = inv_sqrt.matrix() * b * inv_sqrt.matrix() * C64::new(c, 0.0);
            HermitianOperator::new((x.clone() + x.adjoint()) * C64::new(0.5, 0.0)).unwrap()
        })
        .collect();
    Povm::new(elements).unwrap()
}
