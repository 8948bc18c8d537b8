#![allow(dead_code)]

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;
use weakval::qstate::{SpectralObservable, StateVector};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn raw_amplitudes(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
        .prop_filter("nonzero", |v: &Vec<C64>| v.iter().any(|a| a.norm() > 1e-3))
}

/// A pre/post pair of equal dimension in 2..=8.
pub fn state_pair() -> impl Strategy<Value = (StateVector, StateVector)> {
    (2usize..=8).prop_flat_map(|d| {
        (raw_amplitudes(d), raw_amplitudes(d)).prop_map(|(a, b)| {
            (StateVector::new(a).unwrap(), StateVector::new(b).unwrap())
        })
    })
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(s) = StateVector::new(v) {
            return s;
        }
    }
}

/// Orthonormal basis by Gram-Schmidt on random vectors.
pub fn random_basis<R: Rng>(rng: &mut R, dim: usize) -> Vec<StateVector> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    while basis.len() < dim {
        let mut v: Vec<C64> = random_state(rng, dim).amplitudes().to_vec();
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    basis
        .into_iter()
        .map(|v| StateVector::new(v).unwrap())
        .collect()
}

pub fn random_observable<R: Rng>(rng: &mut R, dim: usize) -> SpectralObservable {
    let eigs = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    SpectralObservable::new(eigs, random_basis(rng, dim)).unwrap()
}
