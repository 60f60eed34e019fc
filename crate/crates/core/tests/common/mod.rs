//! Random tensor generators and element-wise views for the oracle suites.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;
use tnkit_core::{delta, diag_itensor, Arrow, ElType, ITensor, Index, QN};
use tnkit_oracles::for_each_index;

/// Elements of `t` in row-major order over `order`, read one at a time.
pub fn elements(t: &ITensor, order: &[Index]) -> Vec<C64> {
    let shape: Vec<usize> = order.iter().map(Index::dim).collect();
    let mut out = Vec::with_capacity(shape.iter().product());
    for_each_index(&shape, |ix| {
        let ivs: Vec<_> = order.iter().zip(ix).map(|(i, &v)| i.at(v + 1)).collect();
        out.push(t.get(&ivs).unwrap());
    });
    out
}

fn label(pool: &[Index], i: &Index) -> i64 {
    pool.iter().position(|p| p == i).expect("index from pool") as i64
}

/// `a * b` and the nested-loop reference, both over the result's indices.
pub fn contract_vs_oracle(a: &ITensor, b: &ITensor) -> (Vec<C64>, Vec<C64>) {
    let c = a * b;
    let pool: Vec<Index> = a.inds().iter().chain(b.inds()).cloned().collect();
    let shape = |t: &ITensor| t.inds().iter().map(Index::dim).collect::<Vec<_>>();
    let labels = |inds: &[Index]| inds.iter().map(|i| label(&pool, i)).collect::<Vec<_>>();
    let want = tnkit_oracles::naive_contract(
        &elements(a, a.inds()),
        &shape(a),
        &labels(a.inds()),
        &elements(b, b.inds()),
        &shape(b),
        &labels(b.inds()),
        &labels(c.inds()),
    );
    (elements(&c, c.inds()), want)
}

fn el<R: Rng>(rng: &mut R) -> ElType {
    if rng.random_bool(0.5) {
        ElType::Real
    } else {
        ElType::Complex
    }
}

fn scalar<R: Rng>(rng: &mut R, el: ElType) -> C64 {
    let re = rng.random_range(-1.0..1.0);
    match el {
        ElType::Real => C64::new(re, 0.0),
        ElType::Complex => C64::new(re, rng.random_range(-1.0..1.0)),
    }
}

/// A dense, diagonal or uniform-diagonal tensor over `inds`.
fn dense_family<R: Rng>(rng: &mut R, inds: &[Index], nshared: usize) -> ITensor {
    let e = el(rng);
    let kind = rng.random_range(0..4);
    if inds.len() >= 2 && kind == 1 {
        let n = inds.iter().map(Index::dim).min().unwrap();
        let vals = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        return diag_itensor(inds, vals).unwrap().scaled(scalar(rng, e));
    }
    if inds.len() >= 2 && kind == 2 && (inds.len() == 2 || nshared <= 1) {
        return delta(inds).unwrap().scaled(scalar(rng, e));
    }
    if inds.len() == 2 && kind == 3 && inds[0].dim() == inds[1].dim() {
        return delta(inds).unwrap();
    }
    ITensor::random(e, inds, rng).unwrap()
}

/// Pair of tensors without QNs: orders at most 5, dimensions at most 4,
/// mixing dense, diagonal and uniform storage.
pub fn dense_pair<R: Rng>(rng: &mut R) -> (ITensor, ITensor) {
    let nshared = rng.random_range(0..=3);
    let na = rng.random_range(0..=5 - nshared);
    let nb = rng.random_range(0..=5 - nshared);
    let mk = |rng: &mut R, n: usize| -> Vec<Index> {
        (0..n)
            .map(|_| Index::new(rng.random_range(1..=4), "x").unwrap())
            .collect()
    };
    let shared = mk(rng, nshared);
    let mut ai: Vec<Index> = shared.iter().cloned().chain(mk(rng, na)).collect();
    let mut bi: Vec<Index> = shared.iter().cloned().chain(mk(rng, nb)).collect();
    ai.shuffle(rng);
    bi.shuffle(rng);
    let a = if ai.is_empty() {
        ITensor::scalar_tensor(scalar(rng, ElType::Real))
    } else {
        dense_family(rng, &ai, nshared)
    };
    let b = if bi.is_empty() {
        ITensor::scalar_tensor(scalar(rng, ElType::Complex))
    } else {
        dense_family(rng, &bi, nshared)
    };
    (a, b)
}

/// A QN index with one to three `Sz` subspaces and total dimension at most 4.
pub fn qn_index<R: Rng>(rng: &mut R, dir: Arrow) -> Index {
    let mut left = rng.random_range(1..=4);
    let mut sub = Vec::new();
    let mut q = rng.random_range(-2..=2);
    while left > 0 && sub.len() < 3 {
        let d = rng.random_range(1..=left);
        sub.push((QN::one("Sz", q).unwrap(), d));
        left -= d;
        q += rng.random_range(1..=2);
    }
    if left > 0 {
        sub.last_mut().unwrap().1 += left;
    }
    Index::with_qns(sub, "q", dir).unwrap()
}

fn arrow<R: Rng>(rng: &mut R) -> Arrow {
    if rng.random_bool(0.5) {
        Arrow::Out
    } else {
        Arrow::In
    }
}

/// Block-sparse tensor over `inds` with the flux of a randomly chosen element.
pub fn random_blocks<R: Rng>(rng: &mut R, inds: &[Index]) -> ITensor {
    let mut flux = QN::empty();
    for i in inds {
        let b = rng.random_range(0..i.nblocks());
        let q = i.block_qn(b);
        flux = match i.dir() {
            Arrow::In => flux.try_sub(&q).unwrap(),
            _ => flux.try_add(&q).unwrap(),
        };
    }
    ITensor::random_with_flux(el(rng), inds, &flux, rng).unwrap()
}

/// Pair of QN tensors with opposite arrows on shared indices. The second
/// operand is sometimes a diagonal tensor linking a shared index to a copy.
pub fn qn_pair<R: Rng>(rng: &mut R) -> (ITensor, ITensor) {
    let nshared = rng.random_range(0..=3);
    let na = rng.random_range(0..=5 - nshared).max(usize::from(nshared == 0));
    let nb = rng.random_range(0..=5 - nshared).max(usize::from(nshared == 0));
    let shared: Vec<Index> = (0..nshared)
        .map(|_| {
            let d = arrow(rng);
            qn_index(rng, d)
        })
        .collect();
    let mut ai: Vec<Index> = shared.clone();
    ai.extend((0..na).map(|_| {
        let d = arrow(rng);
        qn_index(rng, d)
    }));
    ai.shuffle(rng);
    let a = random_blocks(rng, &ai);
    if nshared == 1 && rng.random_bool(0.3) {
        let s = shared[0].dag();
        let copy = shared[0].prime();
        let n = s.dim();
        let vals = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = if rng.random_bool(0.5) {
            diag_itensor(&[s, copy], vals).unwrap()
        } else {
            delta(&[s, copy]).unwrap()
        };
        return (a, b);
    }
    let mut bi: Vec<Index> = shared.iter().map(Index::dag).collect();
    bi.extend((0..nb).map(|_| {
        let d = arrow(rng);
        qn_index(rng, d)
    }));
    bi.shuffle(rng);
    let b = random_blocks(rng, &bi);
    (a, b)
}
