mod common;

use common::{complexify, dense_matrix};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use tnkit_mps::{heisenberg, siteinds, OpSum};
use tnkit_oracles::{embed, heisenberg_kron, spin_half};

fn spin_op(name: &str) -> DMatrix<f64> {
    let (sz, sp, sm) = spin_half();
    match name {
        "Sz" => sz,
        "S+" => sp,
        "S-" => sm,
        _ => unreachable!(),
    }
}

/// Kronecker-product reference for a spin-1/2 operator sum.
fn kron_oracle(n: usize, terms: &[(f64, Vec<(&str, usize)>)]) -> DMatrix<f64> {
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for (c, fs) in terms {
        let mut t = DMatrix::identity(dim, dim);
        for (name, j) in fs {
            t *= embed(&spin_op(name), j - 1, n);
        }
        h += *c * t;
    }
    h
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn heisenberg_matches_kronecker_sum() {
    for n in [2, 3, 4, 6] {
        for qn in [false, true] {
            let s = siteinds("S=1/2", n, qn).unwrap();
            let h = dense_matrix(&heisenberg(n).to_mpo(&s).unwrap());
            assert!(max_diff(&h, &complexify(&heisenberg_kron(n))) < 1e-12, "n={n} qn={qn}");
        }
    }
}

#[test]
fn heisenberg_link_dimension_is_five() {
    for n in 4..=20 {
        for qn in [false, true] {
            let s = siteinds("S=1/2", n, qn).unwrap();
            let h = heisenberg(n).to_mpo(&s).unwrap();
            assert!(
                h.linkdims().iter().all(|&d| d == 5),
                "n={n} qn={qn}: {:?}",
                h.linkdims()
            );
        }
    }
}

#[test]
fn compiled_operator_is_hermitian() {
    let n = 5;
    let s = siteinds("S=1/2", n, false).unwrap();
    let mut a = OpSum::new();
    a.add_term(C64::new(0.3, 0.7), &[("S+", 1), ("S-", 4)]).unwrap();
    a.add_term(C64::new(0.3, -0.7), &[("S-", 1), ("S+", 4)]).unwrap();
    a.add_term(1.5, &[("Sy", 2), ("Sx", 3)]).unwrap();
    a.add_term(-0.4, &[("Sz", 5)]).unwrap();
    let h = dense_matrix(&a.to_mpo(&s).unwrap());
    assert!(max_diff(&h, &h.adjoint()) < 1e-12);
}

fn term_strategy(n: usize) -> impl Strategy<Value = (f64, Vec<(&'static str, usize)>)> {
    let factor = (prop::sample::select(vec!["Sz", "S+", "S-"]), 1..=n);
    (-2.0..2.0f64, prop::collection::vec(factor, 1..=3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_sums_match_kronecker_oracle(terms in prop::collection::vec(term_strategy(5), 1..8)) {
        let n = 5;
        let s = siteinds("S=1/2", n, false).unwrap();
        let mut a = OpSum::new();
        for (c, fs) in &terms {
            a.add_term(*c, fs).unwrap();
        }
        let h = dense_matrix(&a.to_mpo(&s).unwrap());
        let o = complexify(&kron_oracle(n, &terms));
        let scale = o.iter().map(|x| x.norm()).fold(1.0, f64::max);
        prop_assert!(max_diff(&h, &o) < 1e-12 * scale);
    }

    #[test]
    fn compilation_is_linear(
        t1 in prop::collection::vec(term_strategy(4), 1..5),
        t2 in prop::collection::vec(term_strategy(4), 1..5),
        alpha in -2.0..2.0f64,
    ) {
        let s = siteinds("S=1/2", 4, false).unwrap();
        let build = |ts: &[(f64, Vec<(&str, usize)>)]| {
            let mut a = OpSum::new();
            for (c, fs) in ts {
                a.add_term(*c, fs).unwrap();
            }
            a
        };
        let (a, b) = (build(&t1), build(&t2));
        let lhs = dense_matrix(&(a.scaled(alpha) + b.clone()).to_mpo(&s).unwrap());
        let rhs = dense_matrix(&a.to_mpo(&s).unwrap()) * C64::new(alpha, 0.0) + dense_matrix(&b.to_mpo(&s).unwrap());
        let scale = rhs.iter().map(|x| x.norm()).fold(1.0, f64::max);
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12 * scale);
    }
}

#[test]
fn qn_and_dense_compilations_agree() {
    let n = 6;
    let mut a = OpSum::new();
    for j in 1..n {
        a.add_term(0.7, &[("S+", j), ("S-", j + 1)]).unwrap();
        a.add_term(0.7, &[("S-", j), ("S+", j + 1)]).unwrap();
    }
    a.add_term(0.2, &[("Sz", 1), ("Sz", 6)]).unwrap();
    a.add_term(-0.3, &[("S+", 2), ("Sz", 3), ("S-", 5)]).unwrap();
    a.add_term(-0.3, &[("S-", 2), ("Sz", 3), ("S+", 5)]).unwrap();
    let d = dense_matrix(&a.to_mpo(&siteinds("S=1/2", n, false).unwrap()).unwrap());
    let q = dense_matrix(&a.to_mpo(&siteinds("S=1/2", n, true).unwrap()).unwrap());
    assert!(max_diff(&d, &q) < 1e-12);
}
