//! Raw dense arrays and the label-based contraction kernel.
//!
//! Arrays are row-major. Contraction labels follow the usual convention:
//! a negative label appears once in each operand and marks a summed pair, a
//! positive label marks a free dimension. The output carries the positive
//! labels of `A` in operand order followed by those of `B`.

use std::borrow::Cow;
use std::cell::Cell;
use std::collections::HashSet;

use num_traits::Zero;

use crate::error::{Result, TensorError};
use crate::linalg::{provider, MatRef};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for d in (0..shape.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * shape[d + 1];
    }
    strides
}

impl<T: Scalar> DenseTensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        DenseTensor {
            shape: shape.to_vec(),
            data: vec![T::zero(); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(TensorError::Shape(format!(
                "{} elements for shape {shape:?}",
                data.len()
            )));
        }
        Ok(DenseTensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let mut out = Self::zeros(shape);
        let mut idx = vec![0; shape.len()];
        for x in out.data.iter_mut() {
            *x = f(&idx);
            for d in (0..shape.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseTensor<U> {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&mut self, s: T) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s * other` for identically shaped arrays.
    pub fn axpy(&mut self, s: T, other: &DenseTensor<T>) {
        assert_eq!(self.shape, other.shape, "axpy shape mismatch");
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += s * *y;
        }
    }

    pub fn norm_sqr(&self) -> T::Real {
        self.data.iter().fold(T::Real::zero(), |acc, x| acc + x.abs_sqr())
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(TensorError::Shape(format!(
                "cannot reshape {:?} to {shape:?}",
                self.shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }
}

thread_local! {
    static PERMUTED: Cell<u64> = const { Cell::new(0) };
}

/// Elements moved by non-trivial permutations on this thread so far.
pub fn permuted_elements() -> u64 {
    PERMUTED.with(Cell::get)
}

fn check_perm(perm: &[usize], rank: usize) -> Result<()> {
    let mut seen = vec![false; rank];
    if perm.len() != rank {
        return Err(TensorError::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= rank || seen[p] {
            return Err(TensorError::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Output dimension `d` is input dimension `perm[d]`.
pub fn permutedims<'a, T: Scalar>(t: &'a DenseTensor<T>, perm: &[usize]) -> Result<Cow<'a, DenseTensor<T>>> {
    check_perm(perm, t.rank())?;
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return Ok(Cow::Borrowed(t));
    }
    Ok(Cow::Owned(permute_unchecked(t, perm)))
}

fn permute_unchecked<T: Scalar>(t: &DenseTensor<T>, perm: &[usize]) -> DenseTensor<T> {
    let rank = t.rank();
    let in_strides = row_major_strides(&t.shape);
    let shape: Vec<usize> = perm.iter().map(|&p| t.shape[p]).collect();
    let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    let mut data = Vec::with_capacity(t.data.len());
    PERMUTED.with(|n| n.set(n.get() + t.data.len() as u64));
    if t.data.is_empty() {
        return DenseTensor { shape, data };
    }
    let last = rank - 1;
    let (inner_dim, inner_stride) = (shape[last], strides[last]);
    let mut idx = vec![0usize; rank];
    let mut base = 0usize;
    loop {
        for i in 0..inner_dim {
            data.push(t.data[base + i * inner_stride]);
        }
        let mut d = last;
        loop {
            if d == 0 {
                return DenseTensor { shape, data };
            }
            d -= 1;
            idx[d] += 1;
            base += strides[d];
            if idx[d] < shape[d] {
                break;
            }
            base -= strides[d] * idx[d];
            idx[d] = 0;
        }
    }
}

/// Positions of contracted and free dimensions in both operands.
#[derive(Clone, Debug)]
pub(crate) struct LabelPlan {
    /// Contracted positions in A, in A's order.
    pub ca: Vec<usize>,
    /// Matching positions in B.
    pub cb: Vec<usize>,
    pub fa: Vec<usize>,
    pub fb: Vec<usize>,
    pub out: Vec<i32>,
}

pub(crate) fn plan_labels(sa: &[usize], la: &[i32], sb: &[usize], lb: &[i32]) -> Result<LabelPlan> {
    if la.len() != sa.len() || lb.len() != sb.len() {
        return Err(TensorError::Labels("label count differs from rank".into()));
    }
    let mut positive = HashSet::new();
    for &l in la.iter().chain(lb) {
        if l == 0 {
            return Err(TensorError::Labels("label 0 is not allowed".into()));
        }
        if l > 0 && !positive.insert(l) {
            return Err(TensorError::Labels(format!("free label {l} repeated")));
        }
    }
    let mut plan = LabelPlan {
        ca: Vec::new(),
        cb: Vec::new(),
        fa: Vec::new(),
        fb: Vec::new(),
        out: Vec::new(),
    };
    for (i, &l) in la.iter().enumerate() {
        if l > 0 {
            plan.fa.push(i);
            plan.out.push(l);
            continue;
        }
        if la.iter().filter(|&&x| x == l).count() != 1 {
            return Err(TensorError::Labels(format!("label {l} repeated in A")));
        }
        let mut hits = lb.iter().enumerate().filter(|(_, &x)| x == l);
        let j = match (hits.next(), hits.next()) {
            (Some((j, _)), None) => j,
            _ => return Err(TensorError::Labels(format!("label {l} must appear exactly once in B"))),
        };
        if sa[i] != sb[j] {
            return Err(TensorError::Labels(format!(
                "label {l} pairs dims {} and {}",
                sa[i], sb[j]
            )));
        }
        plan.ca.push(i);
        plan.cb.push(j);
    }
    for (j, &l) in lb.iter().enumerate() {
        if l > 0 {
            plan.fb.push(j);
            plan.out.push(l);
        } else if !la.contains(&l) {
            return Err(TensorError::Labels(format!("label {l} missing from A")));
        }
    }
    Ok(plan)
}

/// Matrix orientation of an operand already in contiguous form.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Layout {
    FreeFirst,
    ContractedFirst,
}

/// Whether `free` and `contracted` positions already occupy two contiguous
/// blocks with the free positions in increasing order.
fn layout_of(free: &[usize], contracted: &[usize]) -> Option<Layout> {
    let nf = free.len();
    let free_sorted = free.windows(2).all(|w| w[0] < w[1]);
    if !free_sorted {
        return None;
    }
    if free.iter().enumerate().all(|(i, &p)| p == i) && contracted.iter().all(|&p| p >= nf) {
        return Some(Layout::FreeFirst);
    }
    let nc = contracted.len();
    if free.iter().enumerate().all(|(i, &p)| p == nc + i) && contracted.iter().all(|&p| p < nc) {
        return Some(Layout::ContractedFirst);
    }
    None
}

/// Order of the contracted pairs as they sit in memory, as a permutation of
/// pair indices.
fn pair_order(positions: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by_key(|&k| positions[k]);
    order
}

/// Contracts `A` and `B` over their negative labels.
pub fn dense_contract<T: Scalar>(
    a: &DenseTensor<T>,
    la: &[i32],
    b: &DenseTensor<T>,
    lb: &[i32],
) -> Result<(DenseTensor<T>, Vec<i32>)> {
    let plan = plan_labels(&a.shape, la, &b.shape, lb)?;
    Ok((contract_planned(a, b, &plan), plan.out))
}

pub(crate) fn contract_planned<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>, plan: &LabelPlan) -> DenseTensor<T> {
    let m: usize = plan.fa.iter().map(|&p| a.shape[p]).product();
    let n: usize = plan.fb.iter().map(|&p| b.shape[p]).product();
    let k: usize = plan.ca.iter().map(|&p| a.shape[p]).product();

    let order_a = pair_order(&plan.ca);
    let order_b = pair_order(&plan.cb);
    let lay_a = layout_of(&plan.fa, &plan.ca);
    let lay_b = layout_of(&plan.fb, &plan.cb);

    // Pick the pair order both matrices use; permute as little as possible.
    let keep_a = lay_a.is_some();
    let keep_b = lay_b.is_some() && (!keep_a || order_a == order_b || b.len() > a.len());
    let keep_a = keep_a && (!keep_b || order_a == order_b || a.len() >= b.len());
    let order = if keep_a {
        order_a
    } else if keep_b {
        order_b
    } else {
        (0..plan.ca.len()).collect()
    };

    let (a_mat, lay_a) = if keep_a {
        (Cow::Borrowed(a), lay_a.unwrap_or(Layout::FreeFirst))
    } else {
        let perm: Vec<usize> = plan
            .fa
            .iter()
            .copied()
            .chain(order.iter().map(|&q| plan.ca[q]))
            .collect();
        (Cow::Owned(permute_unchecked(a, &perm)), Layout::FreeFirst)
    };
    let (b_mat, lay_b) = if keep_b {
        (Cow::Borrowed(b), lay_b.unwrap_or(Layout::ContractedFirst))
    } else {
        let perm: Vec<usize> = order
            .iter()
            .map(|&q| plan.cb[q])
            .chain(plan.fb.iter().copied())
            .collect();
        (Cow::Owned(permute_unchecked(b, &perm)), Layout::ContractedFirst)
    };

    let a_ref = MatRef {
        data: a_mat.data(),
        rows: m,
        cols: k,
        rs: if lay_a == Layout::FreeFirst { k } else { 1 } as isize,
        cs: if lay_a == Layout::FreeFirst { 1 } else { m } as isize,
    };
    let b_ref = MatRef {
        data: b_mat.data(),
        rows: k,
        cols: n,
        rs: if lay_b == Layout::ContractedFirst { n } else { 1 } as isize,
        cs: if lay_b == Layout::ContractedFirst { 1 } else { k } as isize,
    };
    let c = provider::<T>().gemm(a_ref, b_ref);
    let shape: Vec<usize> = plan
        .fa
        .iter()
        .map(|&p| a.shape[p])
        .chain(plan.fb.iter().map(|&p| b.shape[p]))
        .collect();
    DenseTensor {
        shape,
        data: c.into_data(),
    }
}
