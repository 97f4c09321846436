//! Random generators for law sweeps and the perturbation experiment.
//!
//! Entries are drawn uniformly from the unit square in ℂ. Callers pass any
//! `Rng`; reproducibility comes from seeding it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;

use crate::blockmap::BlockMap;
use crate::mean::State;
use crate::multimatrix::{ComplexMatrix, IndexSystem, MMElement, C64};

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_matrix(n, n, rng);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_element<R: Rng + ?Sized>(index: &IndexSystem, rng: &mut R) -> MMElement {
    MMElement::from_fn(index, |_, n| random_matrix(n, n, rng))
}

pub fn random_hermitian_element<R: Rng + ?Sized>(index: &IndexSystem, rng: &mut R) -> MMElement {
    MMElement::from_fn(index, |_, n| random_hermitian(n, rng))
}

/// A random linear map with every block populated.
pub fn random_block_map<R: Rng + ?Sized>(
    domain: &IndexSystem,
    codomain: &IndexSystem,
    rng: &mut R,
) -> BlockMap {
    let mut blocks = BTreeMap::new();
    for a in 0..domain.len() {
        for b in 0..codomain.len() {
            let m = random_matrix(codomain.dim(b).pow(2), domain.dim(a).pow(2), rng);
            blocks.insert((a, b), m);
        }
    }
    BlockMap::new(domain, codomain, blocks).expect("shapes follow the index systems")
}

/// A random complex-valued functional, in general neither positive nor Hermitian.
pub fn random_functional<R: Rng + ?Sized>(domain: &IndexSystem, rng: &mut R) -> BlockMap {
    let densities: Vec<ComplexMatrix> = domain
        .dims()
        .iter()
        .map(|&n| random_matrix(n, n, rng))
        .collect();
    BlockMap::functional(domain, &densities).expect("densities follow the index system")
}

/// A random state: densities `AA^*` scaled to total trace one.
pub fn random_state<R: Rng + ?Sized>(index: &IndexSystem, rng: &mut R) -> State {
    let mut densities: Vec<ComplexMatrix> = index
        .dims()
        .iter()
        .map(|&n| {
            let a = random_matrix(n, n, rng);
            &a * a.adjoint()
        })
        .collect();
    let total: f64 = densities.iter().map(|d| d.trace().re).sum();
    for d in &mut densities {
        *d /= C64::new(total, 0.0);
        let h = (&*d + d.adjoint()) * C64::new(0.5, 0.0);
        *d = h;
    }
    State::new(index, densities).expect("positive with unit trace")
}
