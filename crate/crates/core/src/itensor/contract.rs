use std::ops::Mul;

use super::{diag_at, diag_len, diag_to_blocks, special, to_dense_data, Data, ITensor, Storage};
use crate::blocksparse::blocksparse_contract;
use crate::dense::{dense_contract, permutedims, row_major_strides, DenseTensor};
use crate::error::{Result, TensorError};
use crate::index::Index;
use crate::scalar::Scalar;
use crate::C64;

/// Contracts every index shared by `a` and `b`.
///
/// Shared QN indices must have opposite arrows. With no shared index the
/// result is the outer product; with all indices shared it is order 0.
///
/// Operands are visited in a canonical order, so `a * b` and `b * a` agree
/// bit for bit.
pub fn contract(a: &ITensor, b: &ITensor) -> Result<ITensor> {
    if operand_key(b) < operand_key(a) {
        contract_ordered(b, a)
    } else {
        contract_ordered(a, b)
    }
}

type OperandKey<'a> = (Vec<(u64, u32, Vec<&'a str>)>, u8);

fn operand_key(t: &ITensor) -> OperandKey<'_> {
    let inds = t
        .inds
        .iter()
        .map(|i| (i.id(), i.plev(), i.tags().iter().collect()))
        .collect();
    (inds, t.storage_kind() as u8)
}

fn contract_ordered(a: &ITensor, b: &ITensor) -> Result<ITensor> {
    let mut pairs = Vec::new();
    for (i, ia) in a.inds.iter().enumerate() {
        if let Some(j) = b.inds.iter().position(|ib| ib == ia) {
            let ib = &b.inds[j];
            if ia.has_qns() && ib.has_qns() && ia.dir() == ib.dir() {
                return Err(TensorError::ArrowMismatch(ia.to_string()));
            }
            pairs.push((i, j));
        }
    }

    match (&a.store, &b.store) {
        (Storage::Combiner, Storage::Combiner) => {
            return Err(TensorError::Unsupported("contracting two combiners".into()))
        }
        (Storage::Combiner, _) => return special::apply_combiner(a, b),
        (_, Storage::Combiner) => return special::apply_combiner(b, a),
        _ => {}
    }

    if a.inds.is_empty() {
        return scale_by_scalar(b, a);
    }
    if b.inds.is_empty() {
        return scale_by_scalar(a, b);
    }

    if let Some(t) = relabel(a, b, &pairs).or_else(|| {
        let swapped: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (j, i)).collect();
        relabel(b, a, &swapped)
    }) {
        return Ok(t);
    }

    if pairs.len() > 1 && [a, b].iter().any(|t| is_uniform(t) && t.order() > 2) {
        return Err(TensorError::Unsupported(
            "a delta of order > 2 may share only one index".into(),
        ));
    }

    match (&a.store, &b.store) {
        (Storage::Real(x), Storage::Real(y)) => {
            let (d, inds) = contract_data(x, &a.inds, y, &b.inds, &pairs)?;
            Ok(ITensor {
                inds,
                store: Storage::Real(d),
            })
        }
        _ => {
            let x = complex_data(a);
            let y = complex_data(b);
            let (d, inds) = contract_data(&x, &a.inds, &y, &b.inds, &pairs)?;
            Ok(ITensor {
                inds,
                store: Storage::Complex(d),
            })
        }
    }
}

fn complex_data(t: &ITensor) -> Data<C64> {
    match &t.store {
        Storage::Real(d) => d.map(|x| C64::new(x, 0.0)),
        Storage::Complex(d) => d.clone(),
        Storage::Combiner => unreachable!("combiners are dispatched earlier"),
    }
}

fn is_uniform(t: &ITensor) -> bool {
    matches!(
        t.store,
        Storage::Real(Data::Uniform(_)) | Storage::Complex(Data::Uniform(_))
    )
}

fn is_unit_delta(t: &ITensor) -> bool {
    match &t.store {
        Storage::Real(Data::Uniform(x)) => *x == 1.0,
        Storage::Complex(Data::Uniform(x)) => *x == C64::new(1.0, 0.0),
        _ => false,
    }
}

/// `delta(k, i) * B(k, ...)` with equal dimensions renames `k` to `i` on B.
fn relabel(delta: &ITensor, other: &ITensor, pairs: &[(usize, usize)]) -> Option<ITensor> {
    if delta.order() != 2 || pairs.len() != 1 || !is_unit_delta(delta) {
        return None;
    }
    if matches!(other.store, Storage::Combiner) {
        return None;
    }
    let (dk, ok) = pairs[0];
    let new = &delta.inds[1 - dk];
    let old = &other.inds[ok];
    if !new.same_space(old) || (old.has_qns() && new.dir() != old.dir()) {
        return None;
    }
    let mut inds = other.inds.clone();
    inds[ok] = new.clone();
    Some(ITensor {
        inds,
        store: other.store.clone(),
    })
}

fn scale_by_scalar(t: &ITensor, s: &ITensor) -> Result<ITensor> {
    let v = s.scalar()?;
    let mut out = t.clone();
    if matches!(out.store, Storage::Combiner) {
        out = out.densify();
    }
    out.scale_mut(v);
    Ok(out)
}

fn labels(na: usize, nb: usize, pairs: &[(usize, usize)]) -> (Vec<i32>, Vec<i32>) {
    let mut la = vec![0i32; na];
    let mut lb = vec![0i32; nb];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        la[i] = -(k as i32 + 1);
        lb[j] = -(k as i32 + 1);
    }
    let mut next = 1;
    for l in la.iter_mut().chain(lb.iter_mut()) {
        if *l == 0 {
            *l = next;
            next += 1;
        }
    }
    (la, lb)
}

fn out_inds(ai: &[Index], bi: &[Index], la: &[i32], lb: &[i32], out: &[i32]) -> Vec<Index> {
    out.iter()
        .map(|&l| match la.iter().position(|&x| x == l) {
            Some(p) => ai[p].clone(),
            None => bi[lb.iter().position(|&x| x == l).expect("label from B")].clone(),
        })
        .collect()
}

pub(crate) fn contract_data<T: Scalar>(
    a: &Data<T>,
    ai: &[Index],
    b: &Data<T>,
    bi: &[Index],
    pairs: &[(usize, usize)],
) -> Result<(Data<T>, Vec<Index>)> {
    let (la, lb) = labels(ai.len(), bi.len(), pairs);
    let is_diag = |d: &Data<T>| matches!(d, Data::Diag(_) | Data::Uniform(_));
    match (a, b) {
        (Data::Dense(x), Data::Dense(y)) => {
            let (c, out) = dense_contract(x, &la, y, &lb)?;
            Ok((Data::Dense(c), out_inds(ai, bi, &la, &lb, &out)))
        }
        (Data::Blocks(x, fx), Data::Blocks(y, fy)) => {
            let (c, out) = blocksparse_contract(x, &la, y, &lb)?;
            let flux = match (fx, fy) {
                (Some(p), Some(q)) => Some(p.try_add(q)?),
                _ => None,
            };
            Ok((Data::Blocks(c, flux), out_inds(ai, bi, &la, &lb, &out)))
        }
        (x, y) if is_diag(x) && is_diag(y) => diag_diag(x, ai, y, bi, pairs),
        (x, Data::Dense(y)) if is_diag(x) => diag_dense(x, ai, y, bi, pairs),
        (Data::Dense(x), y) if is_diag(y) => {
            let swapped: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (j, i)).collect();
            diag_dense(y, bi, x, ai, &swapped)
        }
        (x, Data::Blocks(..)) if is_diag(x) => {
            if !ai.iter().all(Index::has_qns) {
                return Err(TensorError::MixedStorage(
                    "diagonal tensor without QNs times block-sparse".into(),
                ));
            }
            let (bs, f) = diag_to_blocks(x, ai)?;
            contract_data(&Data::Blocks(bs, f), ai, b, bi, pairs)
        }
        (Data::Blocks(..), y) if is_diag(y) => {
            if !bi.iter().all(Index::has_qns) {
                return Err(TensorError::MixedStorage(
                    "block-sparse times diagonal tensor without QNs".into(),
                ));
            }
            let (bs, f) = diag_to_blocks(y, bi)?;
            contract_data(a, ai, &Data::Blocks(bs, f), bi, pairs)
        }
        _ => Err(TensorError::MixedStorage(
            "dense times block-sparse; densify one operand first".into(),
        )),
    }
}

/// Diagonal `D` times dense `B`: output indices are D's free then B's free.
fn diag_dense<T: Scalar>(
    d: &Data<T>,
    di: &[Index],
    b: &DenseTensor<T>,
    bi: &[Index],
    pairs: &[(usize, usize)],
) -> Result<(Data<T>, Vec<Index>)> {
    let dfree: Vec<usize> = (0..di.len()).filter(|p| !pairs.iter().any(|q| q.0 == *p)).collect();
    let bfree: Vec<usize> = (0..bi.len()).filter(|p| !pairs.iter().any(|q| q.1 == *p)).collect();
    let perm: Vec<usize> = pairs.iter().map(|q| q.1).chain(bfree.iter().copied()).collect();
    let bp = permutedims(b, &perm)?;
    let bstr = row_major_strides(bp.shape());
    let bdiag: usize = bstr[..pairs.len()].iter().sum();
    let nfree: usize = bfree.iter().map(|&p| bi[p].dim()).product();

    let shape: Vec<usize> = dfree
        .iter()
        .map(|&p| di[p].dim())
        .chain(bfree.iter().map(|&p| bi[p].dim()))
        .collect();
    let cstr = row_major_strides(&shape);
    let cdiag: usize = cstr[..dfree.len()].iter().sum();
    let mut c = DenseTensor::zeros(&shape);
    let bd = bp.data();
    let cd = c.data_mut();
    for t in 0..diag_len(di) {
        let v = diag_at(d, t);
        let (cb, bb) = (t * cdiag, t * bdiag);
        for y in 0..nfree {
            cd[cb + y] += v * bd[bb + y];
        }
    }
    let inds = dfree
        .iter()
        .map(|&p| di[p].clone())
        .chain(bfree.iter().map(|&p| bi[p].clone()))
        .collect();
    Ok((Data::Dense(c), inds))
}

fn diag_diag<T: Scalar>(
    a: &Data<T>,
    ai: &[Index],
    b: &Data<T>,
    bi: &[Index],
    pairs: &[(usize, usize)],
) -> Result<(Data<T>, Vec<Index>)> {
    if pairs.is_empty() {
        let x = Data::Dense(to_dense_data(a, ai));
        let y = Data::Dense(to_dense_data(b, bi));
        return contract_data(&x, ai, &y, bi, pairs);
    }
    let inds: Vec<Index> = (0..ai.len())
        .filter(|p| !pairs.iter().any(|q| q.0 == *p))
        .map(|p| ai[p].clone())
        .chain(
            (0..bi.len())
                .filter(|p| !pairs.iter().any(|q| q.1 == *p))
                .map(|p| bi[p].clone()),
        )
        .collect();
    let common = diag_len(ai).min(diag_len(bi));
    if inds.is_empty() {
        let s = (0..common).fold(T::zero(), |acc, t| acc + diag_at(a, t) * diag_at(b, t));
        return Ok((Data::Dense(DenseTensor::from_vec(&[], vec![s])?), inds));
    }
    let n = diag_len(&inds);
    if let (Data::Uniform(x), Data::Uniform(y)) = (a, b) {
        if n == common {
            return Ok((Data::Uniform(*x * *y), inds));
        }
    }
    let vals = (0..n)
        .map(|t| {
            if t < common {
                diag_at(a, t) * diag_at(b, t)
            } else {
                T::zero()
            }
        })
        .collect();
    Ok((Data::Diag(vals), inds))
}

/// Panics on contraction errors; see [`contract`].
impl Mul for &ITensor {
    type Output = ITensor;

    fn mul(self, rhs: &ITensor) -> ITensor {
        contract(self, rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for ITensor {
    type Output = ITensor;

    fn mul(self, rhs: ITensor) -> ITensor {
        &self * &rhs
    }
}
