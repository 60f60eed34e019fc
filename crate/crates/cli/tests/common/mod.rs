//! Random archivable values.
#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod tensors;

use rand::Rng;
use tnkit_core::{combiner, Arrow, ITensor, Index, C64, QN};
use tnkit_mps::{heisenberg, random_mps, random_mps_qn, siteinds, Mpo, Mps, OpSum};

pub fn random_qn<R: Rng>(rng: &mut R) -> QN {
    let names = ["N", "Sz", "P"];
    let k = rng.random_range(0..=3);
    let entries: Vec<(&str, i32, i32)> = names[..k]
        .iter()
        .map(|n| {
            let m = if rng.random_bool(0.3) {
                rng.random_range(2..5)
            } else {
                1
            };
            (*n, rng.random_range(-5..=5), m)
        })
        .collect();
    QN::from_entries(entries).unwrap()
}

pub fn random_index<R: Rng>(rng: &mut R) -> Index {
    let tags = ["", "a", "Site,n=3", "Link,l=12,x"][rng.random_range(0..4)];
    let i = if rng.random_bool(0.5) {
        Index::new(rng.random_range(1..=9), tags).unwrap()
    } else {
        let dir = if rng.random_bool(0.5) { Arrow::In } else { Arrow::Out };
        tensors::qn_index(rng, dir).set_tags(tags).unwrap()
    };
    i.prime_by(rng.random_range(0..=3)).unwrap()
}

/// At least `n` tensors mixing every storage kind, combiners included.
pub fn random_tensors<R: Rng>(rng: &mut R, n: usize) -> Vec<ITensor> {
    let mut ts = Vec::new();
    while ts.len() < n {
        let (x, y) = if rng.random_bool(0.5) {
            tensors::dense_pair(rng)
        } else {
            tensors::qn_pair(rng)
        };
        ts.push(x);
        ts.push(y);
        if rng.random_bool(0.1) {
            let inds: Vec<Index> = (0..rng.random_range(1..=3))
                .map(|_| Index::new(rng.random_range(1..=3), "c").unwrap())
                .collect();
            ts.push(combiner(&inds, "cmb").unwrap().0);
        }
    }
    ts
}

/// A random state, dense or QN, with a random gauge, and an operator on
/// the same sites.
pub fn random_chain<R: Rng>(rng: &mut R) -> (Mps, Mpo) {
    let n = rng.random_range(2..=5);
    let qn = rng.random_bool(0.5);
    let s = siteinds("S=1/2", n, qn).unwrap();
    let mut psi = if qn {
        let st: Vec<&str> = (0..n).map(|_| if rng.random_bool(0.5) { "Up" } else { "Dn" }).collect();
        random_mps_qn(&s, &st, rng.random_range(1..=4), rng).unwrap()
    } else {
        random_mps(&s, rng.random_range(1..=4), rng).unwrap()
    };
    psi.orthogonalize(rng.random_range(1..=n)).unwrap();
    let h = if rng.random_bool(0.5) {
        heisenberg(n).to_mpo(&s).unwrap()
    } else {
        let mut o = OpSum::new();
        o.add_term(C64::new(rng.random(), rng.random()), &[("S+", 1), ("S-", n)])
            .unwrap();
        o.add_term(C64::new(rng.random(), rng.random()), &[("S-", 1), ("S+", n)])
            .unwrap();
        o.to_mpo(&s).unwrap()
    };
    (psi, h)
}
