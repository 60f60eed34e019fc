//! Brute-force references on plain arrays. Nothing here depends on the
//! library under test.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Row-major strides of `shape`.
fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Calls `f` on every multi-index of `shape` in row-major order.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut ix = vec![0; shape.len()];
    loop {
        f(&ix);
        let mut d = shape.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            ix[d] += 1;
            if ix[d] < shape[d] {
                break;
            }
            ix[d] = 0;
        }
    }
}

/// Nested-loop contraction of row-major arrays. Labels shared by `a` and
/// `b` are summed; the result is laid out in `out` label order.
pub fn naive_contract(
    a: &[C64],
    ashape: &[usize],
    alab: &[i64],
    b: &[C64],
    bshape: &[usize],
    blab: &[i64],
    out: &[i64],
) -> Vec<C64> {
    let mut dims: Vec<(i64, usize)> = Vec::new();
    for (l, d) in alab.iter().zip(ashape).chain(blab.iter().zip(bshape)) {
        match dims.iter().find(|x| x.0 == *l) {
            Some(x) => assert_eq!(x.1, *d, "label {l} has two dimensions"),
            None => dims.push((*l, *d)),
        }
    }
    let all: Vec<i64> = dims.iter().map(|x| x.0).collect();
    let shape: Vec<usize> = dims.iter().map(|x| x.1).collect();
    let pos = |l: &i64| all.iter().position(|x| x == l).unwrap();
    let (sa, sb) = (strides(ashape), strides(bshape));
    let oshape: Vec<usize> = out.iter().map(|l| shape[pos(l)]).collect();
    let so = strides(&oshape);
    let mut c = vec![C64::new(0.0, 0.0); oshape.iter().product()];
    for_each_index(&shape, |ix| {
        let ia: usize = alab.iter().zip(&sa).map(|(l, s)| ix[pos(l)] * s).sum();
        let ib: usize = blab.iter().zip(&sb).map(|(l, s)| ix[pos(l)] * s).sum();
        let io: usize = out.iter().zip(&so).map(|(l, s)| ix[pos(l)] * s).sum();
        c[io] += a[ia] * b[ib];
    });
    c
}

/// Largest `|x - y|` relative to `max(1, max|y|)`.
pub fn rel_diff(x: &[C64], y: &[C64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let scale = y.iter().map(|v| v.norm()).fold(1.0, f64::max);
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

/// Truncation by scanning every cut point: the smallest kept count whose
/// relative discarded square sum is within `cutoff`, clamped to
/// `[mindim, maxdim]`, with the error at that count.
pub fn cut_point(values: &[f64], cutoff: f64, maxdim: usize, mindim: usize) -> (usize, f64) {
    let w: Vec<f64> = values.iter().map(|s| s * s).collect();
    let total: f64 = w.iter().sum();
    let err_at = |n: usize| {
        if total > 0.0 {
            w[n..].iter().sum::<f64>() / total
        } else {
            0.0
        }
    };
    let errs: Vec<(usize, f64)> = (1..=w.len()).map(|n| (n, err_at(n))).collect();
    let n = errs
        .iter()
        .filter(|(_, e)| *e <= cutoff)
        .map(|(n, _)| *n)
        .min()
        .unwrap_or(w.len());
    let n = n.max(mindim).min(maxdim).clamp(1, w.len());
    (n, err_at(n))
}

/// `A ⊗ B` for square matrices.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Spin-1/2 operators `(Sz, S+, S-)`, basis order up then down.
pub fn spin_half() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    (
        DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]),
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
    )
}

/// `op` acting on site `j` (0-based) of an `n`-site chain of dimension-`d`
/// sites, site 0 most significant.
pub fn embed(op: &DMatrix<f64>, j: usize, n: usize) -> DMatrix<f64> {
    let d = op.nrows();
    let mut m = DMatrix::<f64>::identity(1, 1);
    for k in 0..n {
        let f = if k == j { op.clone() } else { DMatrix::identity(d, d) };
        m = kron(&m, &f);
    }
    m
}

/// Open-chain spin-1/2 Heisenberg Hamiltonian by Kronecker products.
pub fn heisenberg_kron(n: usize) -> DMatrix<f64> {
    let (sz, sp, sm) = spin_half();
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for j in 0..n - 1 {
        h += embed(&sz, j, n) * embed(&sz, j + 1, n);
        h += 0.5 * embed(&sp, j, n) * embed(&sm, j + 1, n);
        h += 0.5 * embed(&sm, j, n) * embed(&sp, j + 1, n);
    }
    h
}

/// Open-chain spin-1/2 Heisenberg Hamiltonian restricted to basis states
/// with `n_up` up spins, built by bit flips. Returns the matrix and basis
/// (bit `n-1-j` set means site `j` is up).
pub fn heisenberg_sector(n: usize, n_up: usize) -> (DMatrix<f64>, Vec<u32>) {
    let basis: Vec<u32> = (0u32..1 << n).filter(|s| s.count_ones() as usize == n_up).collect();
    let find = |s: u32| basis.binary_search(&s).unwrap();
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    let up = |s: u32, j: usize| (s >> (n - 1 - j)) & 1 == 1;
    for (c, &s) in basis.iter().enumerate() {
        for j in 0..n - 1 {
            let (a, b) = (up(s, j), up(s, j + 1));
            h[(c, c)] += if a == b { 0.25 } else { -0.25 };
            if a != b {
                let t = s ^ (1 << (n - 1 - j)) ^ (1 << (n - 2 - j));
                h[(find(t), c)] += 0.5;
            }
        }
    }
    (h, basis)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Ground-state energy per site of the infinite spin-1/2 Heisenberg chain.
pub fn bethe_energy_per_site() -> f64 {
    0.25 - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_product_by_loops() {
        let a: Vec<C64> = (0..6).map(|x| C64::new(x as f64, 0.0)).collect();
        let b: Vec<C64> = (0..12).map(|x| C64::new(1.0, x as f64)).collect();
        let c = naive_contract(&a, &[2, 3], &[1, 0], &b, &[3, 4], &[0, 2], &[1, 2]);
        let am = DMatrix::from_row_slice(2, 3, &a);
        let bm = DMatrix::from_row_slice(3, 4, &b);
        let cm = am * bm;
        for r in 0..2 {
            for k in 0..4 {
                assert!((c[r * 4 + k] - cm[(r, k)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sector_matches_kronecker() {
        let full = eigenvalues(&heisenberg_kron(6));
        let mut sec: Vec<f64> = (0..=6).flat_map(|u| eigenvalues(&heisenberg_sector(6, u).0)).collect();
        sec.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in full.iter().zip(&sec) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn two_site_singlet() {
        let e = eigenvalues(&heisenberg_kron(2));
        assert!((e[0] + 0.75).abs() < 1e-14);
        assert!((e[3] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn cut_point_examples() {
        assert_eq!(cut_point(&[1.0, 0.0, 0.0], 0.0, usize::MAX, 1), (1, 0.0));
        assert_eq!(cut_point(&[0.5; 4], 0.0, 2, 1), (2, 0.5));
    }
}
