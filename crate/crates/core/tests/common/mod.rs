#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use werner_gap::matrix::{ComplexMatrix, C64};
use werner_gap::quantum::{BlochVector, DensityMatrix};

pub fn unit_from(u: f64, phi: f64) -> BlochVector {
    BlochVector::from_angles(u.clamp(-1.0, 1.0).acos(), phi)
}

pub fn unit_vector() -> impl Strategy<Value = BlochVector> {
    (-1.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(u, phi)| unit_from(u, phi))
}

pub fn random_unit<R: Rng>(rng: &mut R) -> BlochVector {
    unit_from(rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// `G G† / Tr` for a complex Gaussian-like `G`; full rank with probability one.
pub fn ginibre_state(entries: &[f64], dim: usize) -> DensityMatrix {
    assert_eq!(entries.len(), 2 * dim * dim);
    let g: Vec<C64> = entries.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    let g = ComplexMatrix::new(dim, dim, g).unwrap();
    let h = &g * &g.adjoint();
    let tr = h.trace().re;
    DensityMatrix::new(h.scale_real(1.0 / tr)).unwrap()
}

pub fn two_qubit_state() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec(-1.0f64..1.0, 32).prop_map(|e| ginibre_state(&e, 4))
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let e: Vec<f64> = (0..2 * dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ginibre_state(&e, dim)
}

/// Haar-like unitary by Gram–Schmidt on random complex columns.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for c in &cols {
            let overlap: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= overlap * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for (j, c) in cols.iter().enumerate() {
        for (i, z) in c.iter().enumerate() {
            data[i * dim + j] = *z;
        }
    }
    ComplexMatrix::new(dim, dim, data).unwrap()
}
