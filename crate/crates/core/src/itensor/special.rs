use super::{all_qn, check_distinct, diag_len, to_dense_data, Data, ITensor, Storage};
use crate::dense::{permutedims, DenseTensor};
use crate::error::{Result, TensorError};
use crate::index::Index;
use crate::C64;

/// Identity-like tensor: ones on the diagonal, stored as a single value.
///
/// QN indices must share one subspace structure (arrows may differ).
pub fn delta(inds: &[Index]) -> Result<ITensor> {
    if inds.len() < 2 {
        return Err(TensorError::Unsupported("delta needs at least two indices".into()));
    }
    check_distinct(inds)?;
    if all_qn(inds)? && !inds.iter().all(|i| i.same_space(&inds[0])) {
        return Err(TensorError::IndexMismatch(
            "delta over QN indices with different subspaces".into(),
        ));
    }
    Ok(ITensor {
        inds: inds.to_vec(),
        store: Storage::Real(Data::Uniform(1.0)),
    })
}

/// Diagonal tensor with the given real diagonal.
pub fn diag_itensor(inds: &[Index], vals: Vec<f64>) -> Result<ITensor> {
    check_distinct(inds)?;
    all_qn(inds)?;
    if vals.len() != diag_len(inds) {
        return Err(TensorError::Shape(format!(
            "{} diagonal values for minimum dimension {}",
            vals.len(),
            diag_len(inds)
        )));
    }
    Ok(ITensor {
        inds: inds.to_vec(),
        store: Storage::Real(Data::Diag(vals)),
    })
}

/// Combiner merging `inds` (non-QN) into one new index of the product
/// dimension. Returns the combiner and the combined index.
pub fn combiner(inds: &[Index], tags: &str) -> Result<(ITensor, Index)> {
    if inds.is_empty() {
        return Err(TensorError::Unsupported("combiner needs at least one index".into()));
    }
    if inds.iter().any(Index::has_qns) {
        return Err(TensorError::Unsupported("combiner over QN indices".into()));
    }
    check_distinct(inds)?;
    let c = Index::new(inds.iter().map(Index::dim).product(), tags)?;
    let mut all = vec![c.clone()];
    all.extend_from_slice(inds);
    Ok((
        ITensor {
            inds: all,
            store: Storage::Combiner,
        },
        c,
    ))
}

/// The combined index of a combiner tensor.
pub fn combinedind(t: &ITensor) -> Option<Index> {
    match t.store {
        Storage::Combiner => t.inds.first().cloned(),
        _ => None,
    }
}

/// The combiner as an explicit 0/1 tensor over its internal index order.
pub(crate) fn combiner_dense(inds: &[Index]) -> DenseTensor<f64> {
    let n = inds[0].dim();
    let mut d = DenseTensor::zeros(&inds.iter().map(Index::dim).collect::<Vec<_>>());
    for c in 0..n {
        d.data_mut()[c * n + c] = 1.0;
    }
    d
}

/// Contracts combiner `c` with `t`: merges when `t` has every constituent,
/// splits when `t` has the combined index.
pub(crate) fn apply_combiner(c: &ITensor, t: &ITensor) -> Result<ITensor> {
    let cind = &c.inds[0];
    let parts = &c.inds[1..];
    let (perm, head): (Vec<usize>, Vec<Index>) = if let Some(p) = t.inds.iter().position(|i| i == cind) {
        (std::iter::once(p).collect(), parts.to_vec())
    } else if t.hasinds(parts) {
        let ps = parts
            .iter()
            .map(|i| t.inds.iter().position(|j| j == i).expect("checked by hasinds"))
            .collect();
        (ps, vec![cind.clone()])
    } else {
        return Err(TensorError::CombinerMismatch);
    };
    let rest: Vec<usize> = (0..t.inds.len()).filter(|k| !perm.contains(k)).collect();
    let full: Vec<usize> = perm.iter().chain(&rest).copied().collect();
    let inds: Vec<Index> = head
        .into_iter()
        .chain(rest.iter().map(|&k| t.inds[k].clone()))
        .collect();
    let shape: Vec<usize> = inds.iter().map(Index::dim).collect();

    fn go<T: crate::Scalar>(d: &Data<T>, tinds: &[Index], full: &[usize], shape: &[usize]) -> Result<Data<T>> {
        if matches!(d, Data::Blocks(..)) {
            return Err(TensorError::Unsupported(
                "combiner applied to a block-sparse tensor".into(),
            ));
        }
        let dense = to_dense_data(d, tinds);
        let p = permutedims(&dense, full)?.into_owned();
        Ok(Data::Dense(p.reshape(shape)?))
    }
    let store = match &t.store {
        Storage::Real(d) => Storage::Real(go(d, &t.inds, &full, &shape)?),
        Storage::Complex(d) => Storage::Complex(go::<C64>(d, &t.inds, &full, &shape)?),
        Storage::Combiner => return Err(TensorError::Unsupported("contracting two combiners".into())),
    };
    Ok(ITensor { inds, store })
}
