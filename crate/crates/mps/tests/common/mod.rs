//! Dense views of chains for the oracle suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use tnkit_core::{ITensor, Index};
use tnkit_mps::{Mpo, Mps};
use tnkit_oracles::for_each_index;

/// Elements of `t` in row-major order over `order`.
pub fn elements(t: &ITensor, order: &[Index]) -> Vec<C64> {
    let shape: Vec<usize> = order.iter().map(Index::dim).collect();
    let mut out = Vec::with_capacity(shape.iter().product());
    for_each_index(&shape, |ix| {
        let ivs: Vec<_> = order.iter().zip(ix).map(|(i, &v)| i.at(v + 1)).collect();
        out.push(t.get(&ivs).unwrap());
    });
    out
}

/// The state as a vector, site 1 most significant.
pub fn dense_vector(psi: &Mps) -> DVector<C64> {
    let t = psi.contract_all().unwrap();
    DVector::from_vec(elements(&t, &psi.siteinds()))
}

/// The operator as a matrix, rows over primed sites, site 1 most
/// significant.
pub fn dense_matrix(w: &Mpo) -> DMatrix<C64> {
    let t = w.contract_all().unwrap();
    let s = w.siteinds();
    let order: Vec<Index> = s.iter().map(Index::prime).chain(s.iter().cloned()).collect();
    let d: usize = s.iter().map(Index::dim).product();
    DMatrix::from_row_slice(d, d, &elements(&t, &order))
}

pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

pub fn neel(n: usize) -> Vec<&'static str> {
    (0..n).map(|j| if j % 2 == 0 { "Up" } else { "Dn" }).collect()
}

/// `|⟨a|b⟩| / (|a| |b|)`.
pub fn fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm() / (a.norm() * b.norm())
}
