//! The user-facing tensor: an unordered set of indices over polymorphic
//! storage. Internal index order is never observable; elements are addressed
//! by [`IndexVal`] pairs and operations match indices by identity.

mod arith;
mod contract;
mod special;

use std::collections::HashSet;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::blocksparse::{for_each_coord, BlockSparseTensor};
use crate::dense::{permutedims, DenseTensor};
use crate::error::{Result, TensorError};
use crate::index::{Arrow, Index, IndexVal};
use crate::qn::QN;
use crate::scalar::Scalar;
use crate::C64;

pub use contract::contract;
pub use special::{combinedind, combiner, delta, diag_itensor};

/// Element storage for one scalar type.
#[derive(Clone, Debug, PartialEq)]
pub enum Data<T> {
    /// Row-major over the tensor's internal index order.
    Dense(DenseTensor<T>),
    /// Diagonal entries; length is the minimum index dimension.
    Diag(Vec<T>),
    /// A diagonal whose entries are all equal.
    Uniform(T),
    /// Stored blocks and the common block flux (unset while empty).
    Blocks(BlockSparseTensor<T>, Option<QN>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Real(Data<f64>),
    Complex(Data<C64>),
    /// Combiner: the first index is the combined one.
    Combiner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StorageKind {
    DenseReal,
    DenseComplex,
    Diag,
    DiagUniform,
    BlockSparse,
    Combiner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ElType {
    #[default]
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ITensor {
    inds: Vec<Index>,
    store: Storage,
}

impl<T: Scalar> Data<T> {
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Data<U> {
        match self {
            Data::Dense(d) => Data::Dense(d.map(f)),
            Data::Diag(v) => Data::Diag(v.iter().map(|&x| f(x)).collect()),
            Data::Uniform(x) => Data::Uniform(f(*x)),
            Data::Blocks(b, flux) => Data::Blocks(b.map(f), flux.clone()),
        }
    }

    fn scale(&mut self, s: T) {
        match self {
            Data::Dense(d) => d.scale(s),
            Data::Diag(v) => v.iter_mut().for_each(|x| *x *= s),
            Data::Uniform(x) => *x *= s,
            Data::Blocks(b, _) => b.scale(s),
        }
    }
}

fn diag_len(inds: &[Index]) -> usize {
    inds.iter().map(Index::dim).min().unwrap_or(1)
}

fn shape_of(inds: &[Index]) -> Vec<usize> {
    inds.iter().map(Index::dim).collect()
}

fn blockdims_of(inds: &[Index]) -> Vec<Vec<usize>> {
    inds.iter().map(Index::blockdims).collect()
}

/// Flux carried by the block at `coord`: Out charges add, In charges subtract.
pub(crate) fn block_flux(inds: &[Index], coord: &[usize]) -> QN {
    let mut q = QN::empty();
    for (ind, &b) in inds.iter().zip(coord) {
        let bq = ind.block_qn(b);
        q = match ind.dir() {
            Arrow::In => &q - &bq,
            _ => &q + &bq,
        };
    }
    q
}

fn check_distinct(inds: &[Index]) -> Result<()> {
    let mut seen = HashSet::with_capacity(inds.len());
    for i in inds {
        if !seen.insert(i) {
            return Err(TensorError::DuplicateIndex(i.to_string()));
        }
    }
    Ok(())
}

fn all_qn(inds: &[Index]) -> Result<bool> {
    let n = inds.iter().filter(|i| i.has_qns()).count();
    if n != 0 && n != inds.len() {
        return Err(TensorError::IndexMismatch("indices must all carry QNs or none".into()));
    }
    Ok(n != 0 && n == inds.len())
}

/// Densifies any non-combiner storage over `inds`.
pub(crate) fn to_dense_data<T: Scalar>(data: &Data<T>, inds: &[Index]) -> DenseTensor<T> {
    let shape = shape_of(inds);
    match data {
        Data::Dense(d) => d.clone(),
        Data::Blocks(b, _) => b.to_dense(),
        Data::Diag(_) | Data::Uniform(_) => {
            let mut out = DenseTensor::zeros(&shape);
            let stride: usize = crate::dense::row_major_strides(&shape).iter().sum();
            for t in 0..diag_len(inds) {
                out.data_mut()[t * stride] = diag_at(data, t);
            }
            out
        }
    }
}

pub(crate) fn diag_at<T: Scalar>(data: &Data<T>, t: usize) -> T {
    match data {
        Data::Diag(v) => v[t],
        Data::Uniform(x) => *x,
        _ => unreachable!("diag_at on non-diagonal storage"),
    }
}

/// Converts diagonal storage over QN indices to blocks.
pub(crate) fn diag_to_blocks<T: Scalar>(data: &Data<T>, inds: &[Index]) -> Result<(BlockSparseTensor<T>, Option<QN>)> {
    let mut bs = BlockSparseTensor::new(blockdims_of(inds));
    let mut flux: Option<QN> = None;
    let mut coord = vec![0; inds.len()];
    let mut inner = vec![0; inds.len()];
    for t in 0..diag_len(inds) {
        for (d, ind) in inds.iter().enumerate() {
            let (b, o) = ind.locate(t);
            coord[d] = b;
            inner[d] = o;
        }
        let q = block_flux(inds, &coord);
        match &flux {
            None => flux = Some(q),
            Some(f) if *f != q => {
                return Err(TensorError::FluxViolation {
                    expected: f.to_string(),
                    found: q.to_string(),
                })
            }
            _ => {}
        }
        bs.block_or_zero(&coord)?.set(&inner, diag_at(data, t));
    }
    Ok((bs, flux))
}

fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let re: f64 = rng.sample(StandardNormal);
    if T::IS_COMPLEX {
        let im: f64 = rng.sample(StandardNormal);
        T::from_c64(Complex64::new(re, im))
    } else {
        T::from_c64(Complex64::new(re, 0.0))
    }
}

/// Blocks of `inds` with flux `flux`, each entry drawn from `fill`.
fn flux_blocks<T: Scalar>(inds: &[Index], flux: &QN, mut fill: impl FnMut() -> T) -> Result<BlockSparseTensor<T>> {
    let mut bs = BlockSparseTensor::new(blockdims_of(inds));
    let counts: Vec<usize> = inds.iter().map(Index::nblocks).collect();
    let mut coords = Vec::new();
    for_each_coord(&counts, |c| {
        if block_flux(inds, c) == *flux {
            coords.push(c.to_vec());
        }
    });
    if coords.is_empty() {
        return Err(TensorError::NoBlocksWithFlux(flux.to_string()));
    }
    for c in coords {
        let shape = bs.block_shape(&c);
        let block = DenseTensor::from_fn(&shape, |_| fill());
        bs.insert_block(c, block)?;
    }
    Ok(bs)
}

fn random_data<T: Scalar, R: Rng + ?Sized>(inds: &[Index], flux: Option<&QN>, rng: &mut R) -> Result<Data<T>> {
    match flux {
        Some(flux) => Ok(Data::Blocks(
            flux_blocks(inds, flux, || normal(rng))?,
            Some(flux.clone()),
        )),
        None => {
            let shape = shape_of(inds);
            Ok(Data::Dense(DenseTensor::from_fn(&shape, |_| normal(rng))))
        }
    }
}

impl ITensor {
    /// Zero tensor. Dense and real for plain indices; an empty block-sparse
    /// tensor with unset flux when every index carries QNs.
    pub fn new(inds: &[Index]) -> Result<Self> {
        check_distinct(inds)?;
        let store = if all_qn(inds)? {
            Storage::Real(Data::Blocks(BlockSparseTensor::new(blockdims_of(inds)), None))
        } else {
            Storage::Real(Data::Dense(DenseTensor::zeros(&shape_of(inds))))
        };
        Ok(ITensor {
            inds: inds.to_vec(),
            store,
        })
    }

    /// Builds a tensor from raw parts, checking the storage against `inds`.
    pub fn from_parts(inds: Vec<Index>, store: Storage) -> Result<Self> {
        check_distinct(&inds)?;
        fn check<T: Scalar>(data: &Data<T>, inds: &[Index]) -> Result<()> {
            match data {
                Data::Dense(d) if d.shape() != shape_of(inds) => Err(TensorError::Shape(format!(
                    "dense storage {:?} for index dims {:?}",
                    d.shape(),
                    shape_of(inds)
                ))),
                Data::Diag(v) if v.len() != diag_len(inds) => {
                    Err(TensorError::Shape("diagonal length differs from min dimension".into()))
                }
                Data::Blocks(b, flux) => {
                    if !all_qn(inds)? || b.blockdims() != blockdims_of(inds) {
                        return Err(TensorError::Shape(
                            "block structure differs from index subspaces".into(),
                        ));
                    }
                    for coord in b.blocks().keys() {
                        let q = block_flux(inds, coord);
                        if flux.as_ref() != Some(&q) {
                            return Err(TensorError::FluxViolation {
                                expected: flux.as_ref().map_or("unset".into(), QN::to_string),
                                found: q.to_string(),
                            });
                        }
                    }
                    Ok(())
                }
                _ => Ok(()),
            }
        }
        match &store {
            Storage::Real(d) => check(d, &inds)?,
            Storage::Complex(d) => check(d, &inds)?,
            Storage::Combiner => {
                if inds.len() < 2 || inds[0].dim() != inds[1..].iter().map(Index::dim).product::<usize>() {
                    return Err(TensorError::CombinerMismatch);
                }
            }
        }
        Ok(ITensor { inds, store })
    }

    /// Real dense tensor from row-major data over `inds` in the given order.
    pub fn from_vec(inds: &[Index], data: Vec<f64>) -> Result<Self> {
        check_distinct(inds)?;
        let d = DenseTensor::from_vec(&shape_of(inds), data)?;
        Ok(ITensor {
            inds: inds.to_vec(),
            store: Storage::Real(Data::Dense(d)),
        })
    }

    pub fn from_vec_complex(inds: &[Index], data: Vec<C64>) -> Result<Self> {
        check_distinct(inds)?;
        let d = DenseTensor::from_vec(&shape_of(inds), data)?;
        Ok(ITensor {
            inds: inds.to_vec(),
            store: Storage::Complex(Data::Dense(d)),
        })
    }

    /// Order-0 tensor holding `v`.
    pub fn scalar_tensor(v: impl Into<C64>) -> Self {
        let v = v.into();
        let store = if v.im == 0.0 {
            Storage::Real(Data::Dense(DenseTensor::from_vec(&[], vec![v.re]).expect("length 1")))
        } else {
            Storage::Complex(Data::Dense(DenseTensor::from_vec(&[], vec![v]).expect("length 1")))
        };
        ITensor {
            inds: Vec::new(),
            store,
        }
    }

    /// I.i.d. standard normal entries. Tensors over QN indices get flux `QN()`.
    pub fn random<R: Rng + ?Sized>(el: ElType, inds: &[Index], rng: &mut R) -> Result<Self> {
        if all_qn(inds)? {
            return Self::random_with_flux(el, inds, &QN::empty(), rng);
        }
        check_distinct(inds)?;
        let store = match el {
            ElType::Real => Storage::Real(random_data(inds, None, rng)?),
            ElType::Complex => Storage::Complex(random_data(inds, None, rng)?),
        };
        Ok(ITensor {
            inds: inds.to_vec(),
            store,
        })
    }

    /// Random block-sparse tensor filling exactly the blocks of flux `flux`.
    pub fn random_with_flux<R: Rng + ?Sized>(el: ElType, inds: &[Index], flux: &QN, rng: &mut R) -> Result<Self> {
        check_distinct(inds)?;
        if !all_qn(inds)? {
            return Err(TensorError::NotQn);
        }
        let store = match el {
            ElType::Real => Storage::Real(random_data(inds, Some(flux), rng)?),
            ElType::Complex => Storage::Complex(random_data(inds, Some(flux), rng)?),
        };
        Ok(ITensor {
            inds: inds.to_vec(),
            store,
        })
    }

    /// Zero block-sparse tensor with every block of flux `flux` allocated.
    pub fn zeros_with_flux(inds: &[Index], flux: &QN) -> Result<Self> {
        check_distinct(inds)?;
        if !all_qn(inds)? {
            return Err(TensorError::NotQn);
        }
        let bs = flux_blocks(inds, flux, || 0.0)?;
        Ok(ITensor {
            inds: inds.to_vec(),
            store: Storage::Real(Data::Blocks(bs, Some(flux.clone()))),
        })
    }

    pub fn inds(&self) -> &[Index] {
        &self.inds
    }

    pub fn order(&self) -> usize {
        self.inds.len()
    }

    pub fn store(&self) -> &Storage {
        &self.store
    }

    pub fn into_parts(self) -> (Vec<Index>, Storage) {
        (self.inds, self.store)
    }

    pub fn storage_kind(&self) -> StorageKind {
        match &self.store {
            Storage::Combiner => StorageKind::Combiner,
            Storage::Real(Data::Dense(_)) => StorageKind::DenseReal,
            Storage::Complex(Data::Dense(_)) => StorageKind::DenseComplex,
            Storage::Real(Data::Diag(_)) | Storage::Complex(Data::Diag(_)) => StorageKind::Diag,
            Storage::Real(Data::Uniform(_)) | Storage::Complex(Data::Uniform(_)) => StorageKind::DiagUniform,
            Storage::Real(Data::Blocks(..)) | Storage::Complex(Data::Blocks(..)) => StorageKind::BlockSparse,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.store, Storage::Complex(_))
    }

    pub fn has_qns(&self) -> bool {
        !self.inds.is_empty() && self.inds.iter().all(Index::has_qns)
    }

    /// Number of stored elements.
    pub fn nnz(&self) -> usize {
        fn n<T: Scalar>(d: &Data<T>) -> usize {
            match d {
                Data::Dense(d) => d.len(),
                Data::Diag(v) => v.len(),
                Data::Uniform(_) => 1,
                Data::Blocks(b, _) => b.nnz(),
            }
        }
        match &self.store {
            Storage::Real(d) => n(d),
            Storage::Complex(d) => n(d),
            Storage::Combiner => 0,
        }
    }

    /// Number of stored blocks (1 for non-block storage).
    pub fn nnzblocks(&self) -> usize {
        match &self.store {
            Storage::Real(Data::Blocks(b, _)) => b.nnzblocks(),
            Storage::Complex(Data::Blocks(b, _)) => b.nnzblocks(),
            _ => 1,
        }
    }

    // ---- element access ----

    fn positions(&self, ivs: &[IndexVal<'_>]) -> Result<Vec<usize>> {
        if ivs.len() != self.inds.len() {
            return Err(TensorError::IndexMismatch(format!(
                "{} index values for a tensor of order {}",
                ivs.len(),
                self.inds.len()
            )));
        }
        let mut pos = vec![usize::MAX; self.inds.len()];
        for iv in ivs {
            let k = self
                .inds
                .iter()
                .position(|i| i == iv.index)
                .ok_or_else(|| TensorError::IndexMismatch(format!("{} not in tensor", iv.index)))?;
            if pos[k] != usize::MAX {
                return Err(TensorError::DuplicateIndex(iv.index.to_string()));
            }
            if iv.val == 0 || iv.val > iv.index.dim() {
                return Err(TensorError::OutOfRange {
                    val: iv.val,
                    dim: iv.index.dim(),
                });
            }
            pos[k] = iv.val - 1;
        }
        Ok(pos)
    }

    /// Element addressed by `ivs` (1-based values, any order).
    pub fn get(&self, ivs: &[IndexVal<'_>]) -> Result<C64> {
        let pos = self.positions(ivs)?;
        fn read<T: Scalar>(d: &Data<T>, pos: &[usize]) -> T {
            match d {
                Data::Dense(d) => d.get(pos),
                Data::Diag(_) | Data::Uniform(_) => {
                    if pos.iter().all(|&p| p == pos[0]) {
                        diag_at(d, pos[0])
                    } else {
                        T::zero()
                    }
                }
                Data::Blocks(b, _) => b.get(pos),
            }
        }
        match &self.store {
            Storage::Real(d) => Ok(C64::new(read(d, &pos), 0.0)),
            Storage::Complex(d) => Ok(read(d, &pos)),
            Storage::Combiner => Err(TensorError::Unsupported("element access on a combiner".into())),
        }
    }

    /// Real element; errors on complex storage.
    pub fn get_real(&self, ivs: &[IndexVal<'_>]) -> Result<f64> {
        if self.is_complex() {
            return Err(TensorError::Unsupported("real read of complex storage".into()));
        }
        Ok(self.get(ivs)?.re)
    }

    /// Sets the element addressed by `ivs`. A complex value promotes real
    /// storage; on an empty QN tensor the first set fixes the flux.
    pub fn set(&mut self, ivs: &[IndexVal<'_>], v: impl Into<C64>) -> Result<()> {
        let v = v.into();
        let pos = self.positions(ivs)?;
        if v.im != 0.0 {
            self.promote();
        }
        fn write<T: Scalar>(d: &mut Data<T>, inds: &[Index], pos: &[usize], v: T) -> Result<()> {
            match d {
                Data::Dense(d) => d.set(pos, v),
                Data::Diag(vals) => {
                    if pos.iter().any(|&p| p != pos[0]) {
                        return Err(TensorError::OffDiagonal);
                    }
                    vals[pos[0]] = v;
                }
                Data::Uniform(x) => {
                    if pos.iter().any(|&p| p != pos[0]) {
                        return Err(TensorError::OffDiagonal);
                    }
                    let mut vals = vec![*x; diag_len(inds)];
                    vals[pos[0]] = v;
                    *d = Data::Diag(vals);
                }
                Data::Blocks(b, flux) => {
                    let (coord, inner): (Vec<usize>, Vec<usize>) =
                        inds.iter().zip(pos).map(|(i, &p)| i.locate(p)).unzip();
                    let q = block_flux(inds, &coord);
                    match flux {
                        None => *flux = Some(q),
                        Some(f) if *f != q => {
                            return Err(TensorError::FluxViolation {
                                expected: f.to_string(),
                                found: q.to_string(),
                            })
                        }
                        _ => {}
                    }
                    b.block_or_zero(&coord)?.set(&inner, v);
                }
            }
            Ok(())
        }
        match &mut self.store {
            Storage::Real(d) => write(d, &self.inds, &pos, v.re),
            Storage::Complex(d) => write(d, &self.inds, &pos, v),
            Storage::Combiner => Err(TensorError::Unsupported("element access on a combiner".into())),
        }
    }

    /// The value of an order-0 tensor.
    pub fn scalar(&self) -> Result<C64> {
        if !self.inds.is_empty() {
            return Err(TensorError::NotScalar(self.inds.len()));
        }
        fn one<T: Scalar>(d: &Data<T>) -> T {
            match d {
                Data::Dense(d) => d.data().first().copied().unwrap_or_else(T::zero),
                Data::Diag(v) => v.first().copied().unwrap_or_else(T::zero),
                Data::Uniform(x) => *x,
                Data::Blocks(b, _) => b.blocks().values().next().map_or(T::zero(), |b| b.data()[0]),
            }
        }
        match &self.store {
            Storage::Real(d) => Ok(C64::new(one(d), 0.0)),
            Storage::Complex(d) => Ok(one(d)),
            Storage::Combiner => Err(TensorError::NotScalar(0)),
        }
    }

    /// Real value of an order-0 tensor; errors on complex storage.
    pub fn scalar_real(&self) -> Result<f64> {
        if self.is_complex() {
            return Err(TensorError::Unsupported("real read of complex storage".into()));
        }
        Ok(self.scalar()?.re)
    }

    // ---- QN bookkeeping ----

    /// Common flux of the stored blocks; `None` while unset.
    pub fn flux(&self) -> Result<Option<QN>> {
        fn f<T: Scalar>(d: &Data<T>, inds: &[Index]) -> Result<Option<QN>> {
            match d {
                Data::Blocks(_, flux) => Ok(flux.clone()),
                Data::Diag(_) | Data::Uniform(_) if all_qn(inds)? && !inds.is_empty() => Ok(diag_to_blocks(d, inds)?.1),
                _ => Err(TensorError::NotQn),
            }
        }
        match &self.store {
            Storage::Real(d) => f(d, &self.inds),
            Storage::Complex(d) => f(d, &self.inds),
            Storage::Combiner => Err(TensorError::NotQn),
        }
    }

    // ---- conversions ----

    /// Promotes real storage to complex in place.
    pub fn promote(&mut self) {
        if let Storage::Real(d) = &self.store {
            self.store = Storage::Complex(d.map(|x| C64::new(x, 0.0)));
        }
    }

    pub fn to_complex(&self) -> ITensor {
        let mut t = self.clone();
        t.promote();
        t
    }

    /// Drops imaginary parts no larger than `tol` times the largest modulus.
    /// Returns `None` if some imaginary part exceeds that.
    pub fn to_real_if_close(&self, tol: f64) -> Option<ITensor> {
        let Storage::Complex(d) = &self.store else {
            return Some(self.clone());
        };
        let vals: Vec<C64> = match d {
            Data::Dense(x) => x.data().to_vec(),
            Data::Diag(v) => v.clone(),
            Data::Uniform(x) => vec![*x],
            Data::Blocks(b, _) => b.blocks().values().flat_map(|b| b.data().to_vec()).collect(),
        };
        let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if vals.iter().any(|z| z.im.abs() > tol * scale) {
            return None;
        }
        Some(ITensor {
            inds: self.inds.clone(),
            store: Storage::Real(d.map(|z| z.re)),
        })
    }

    /// Same tensor with dense storage (indices, including QN data, unchanged).
    pub fn densify(&self) -> ITensor {
        let store = match &self.store {
            Storage::Real(d) => Storage::Real(Data::Dense(to_dense_data(d, &self.inds))),
            Storage::Complex(d) => Storage::Complex(Data::Dense(to_dense_data(d, &self.inds))),
            Storage::Combiner => {
                let c = special::combiner_dense(&self.inds);
                Storage::Real(Data::Dense(c))
            }
        };
        ITensor {
            inds: self.inds.clone(),
            store,
        }
    }

    /// Block-sparse form of a tensor over QN indices. Dense storage keeps the
    /// blocks holding a nonzero element, which must all share one flux.
    pub fn to_blocks(&self) -> Result<ITensor> {
        if !self.has_qns() {
            return Err(TensorError::NotQn);
        }
        fn conv<T: Scalar>(d: &Data<T>, inds: &[Index]) -> Result<Data<T>> {
            match d {
                Data::Blocks(..) => Ok(d.clone()),
                Data::Diag(_) | Data::Uniform(_) => {
                    let (b, f) = diag_to_blocks(d, inds)?;
                    Ok(Data::Blocks(b, f))
                }
                Data::Dense(x) => {
                    let bd = blockdims_of(inds);
                    let probe = BlockSparseTensor::from_dense(x, bd.clone(), |_| true)?;
                    let mut flux: Option<QN> = None;
                    let mut keep = HashSet::new();
                    for (c, b) in probe.blocks() {
                        if b.data().iter().all(|v| *v == T::zero()) {
                            continue;
                        }
                        let q = block_flux(inds, c);
                        match &flux {
                            None => flux = Some(q),
                            Some(f) if *f != q => {
                                return Err(TensorError::FluxViolation {
                                    expected: f.to_string(),
                                    found: q.to_string(),
                                })
                            }
                            _ => {}
                        }
                        keep.insert(c.clone());
                    }
                    let bs = BlockSparseTensor::from_dense(x, bd, |c| keep.contains(c))?;
                    Ok(Data::Blocks(bs, flux))
                }
            }
        }
        let store = match &self.store {
            Storage::Real(d) => Storage::Real(conv(d, &self.inds)?),
            Storage::Complex(d) => Storage::Complex(conv(d, &self.inds)?),
            Storage::Combiner => return Err(TensorError::Unsupported("QN combiner".into())),
        };
        Ok(ITensor {
            inds: self.inds.clone(),
            store,
        })
    }

    /// Same tensor with internal index order `order`.
    pub fn permute(&self, order: &[Index]) -> Result<ITensor> {
        let perm = self.perm_to(order)?;
        fn p<T: Scalar>(d: &Data<T>, perm: &[usize]) -> Result<Data<T>> {
            Ok(match d {
                Data::Dense(x) => Data::Dense(permutedims(x, perm)?.into_owned()),
                Data::Blocks(b, f) => Data::Blocks(b.permutedims(perm)?, f.clone()),
                other => other.clone(),
            })
        }
        let store = match &self.store {
            Storage::Real(d) => Storage::Real(p(d, &perm)?),
            Storage::Complex(d) => Storage::Complex(p(d, &perm)?),
            Storage::Combiner if perm.first() == Some(&0) => Storage::Combiner,
            Storage::Combiner => return Err(TensorError::Unsupported("reordering a combiner".into())),
        };
        Ok(ITensor {
            inds: perm.iter().map(|&k| self.inds[k].clone()).collect(),
            store,
        })
    }

    /// `perm[d]` is the internal position of `order[d]`.
    pub(crate) fn perm_to(&self, order: &[Index]) -> Result<Vec<usize>> {
        if order.len() != self.inds.len() {
            return Err(TensorError::IndexMismatch("index sets differ".into()));
        }
        let mut used = vec![false; self.inds.len()];
        order
            .iter()
            .map(|i| {
                let k = self
                    .inds
                    .iter()
                    .position(|j| j == i)
                    .ok_or_else(|| TensorError::IndexMismatch(format!("{i} not in tensor")))?;
                if used[k] {
                    return Err(TensorError::DuplicateIndex(i.to_string()));
                }
                used[k] = true;
                Ok(k)
            })
            .collect()
    }

    /// Dense row-major copy of the elements over `order`.
    pub fn to_array(&self, order: &[Index]) -> Result<DenseTensor<C64>> {
        let t = self.densify().permute(order)?;
        Ok(match t.store {
            Storage::Real(Data::Dense(d)) => d.map(|x| C64::new(x, 0.0)),
            Storage::Complex(Data::Dense(d)) => d,
            _ => unreachable!("densify yields dense storage"),
        })
    }

    /// Real dense copy over `order`; errors on complex storage.
    pub fn to_array_real(&self, order: &[Index]) -> Result<DenseTensor<f64>> {
        if self.is_complex() {
            return Err(TensorError::Unsupported("real read of complex storage".into()));
        }
        Ok(self.to_array(order)?.map(|z| z.re))
    }

    // ---- index queries ----

    pub fn hasind(&self, i: &Index) -> bool {
        self.inds.contains(i)
    }

    pub fn hasinds(&self, is: &[Index]) -> bool {
        is.iter().all(|i| self.hasind(i))
    }

    /// First index satisfying `pred`.
    pub fn find_ind(&self, pred: impl Fn(&Index) -> bool) -> Option<&Index> {
        self.inds.iter().find(|i| pred(i))
    }

    /// First index carrying every tag in the comma-separated `tags`.
    pub fn ind_with_tags(&self, tags: &str) -> Option<&Index> {
        let want = crate::index::TagSet::parse(tags).ok()?;
        self.find_ind(|i| i.tags().contains_all(&want))
    }

    // ---- index transformations ----

    /// Applies `f` to every index; the results must stay distinct and keep
    /// each index's dimension and subspace structure.
    pub fn map_inds(&self, f: impl Fn(&Index) -> Index) -> Result<ITensor> {
        let inds: Vec<Index> = self.inds.iter().map(f).collect();
        for (a, b) in inds.iter().zip(&self.inds) {
            if a.dim() != b.dim() || a.blockdims() != b.blockdims() {
                return Err(TensorError::IndexMismatch(format!("{b} replaced by {a}")));
            }
        }
        check_distinct(&inds)?;
        Ok(ITensor {
            inds,
            store: self.store.clone(),
        })
    }

    pub fn prime(&self) -> ITensor {
        self.prime_by(1).expect("priming up keeps indices distinct")
    }

    pub fn prime_by(&self, inc: i32) -> Result<ITensor> {
        let mut inds = Vec::with_capacity(self.inds.len());
        for i in &self.inds {
            inds.push(i.prime_by(inc)?);
        }
        Ok(ITensor {
            inds,
            store: self.store.clone(),
        })
    }

    /// Primes only the indices in `which`.
    pub fn prime_inds(&self, which: &[Index]) -> Result<ITensor> {
        self.map_inds(|i| if which.contains(i) { i.prime() } else { i.clone() })
    }

    /// Primes only indices carrying every tag in `tags`.
    pub fn prime_tags(&self, tags: &str) -> Result<ITensor> {
        let want = crate::index::TagSet::parse(tags)?;
        self.map_inds(|i| {
            if i.tags().contains_all(&want) {
                i.prime()
            } else {
                i.clone()
            }
        })
    }

    pub fn noprime(&self) -> Result<ITensor> {
        self.map_inds(Index::noprime)
    }

    /// Maps prime level `from` to `to` on every index.
    pub fn map_prime(&self, from: u32, to: u32) -> Result<ITensor> {
        self.map_inds(|i| if i.plev() == from { i.with_plev(to) } else { i.clone() })
    }

    pub fn replaceind(&self, old: &Index, new: &Index) -> Result<ITensor> {
        if !self.hasind(old) {
            return Err(TensorError::IndexMismatch(format!("{old} not in tensor")));
        }
        self.map_inds(|i| if i == old { new.clone() } else { i.clone() })
    }

    pub fn replaceinds(&self, old: &[Index], new: &[Index]) -> Result<ITensor> {
        if old.len() != new.len() {
            return Err(TensorError::IndexMismatch("replacement lists differ in length".into()));
        }
        if !self.hasinds(old) {
            return Err(TensorError::IndexMismatch("replaced index not in tensor".into()));
        }
        self.map_inds(|i| match old.iter().position(|o| o == i) {
            Some(k) => new[k].clone(),
            None => i.clone(),
        })
    }

    pub fn add_tags(&self, tags: &str) -> Result<ITensor> {
        let mut inds = Vec::with_capacity(self.inds.len());
        for i in &self.inds {
            inds.push(i.add_tags(tags)?);
        }
        check_distinct(&inds)?;
        Ok(ITensor {
            inds,
            store: self.store.clone(),
        })
    }

    /// Complex conjugate with all arrows reversed.
    pub fn dag(&self) -> ITensor {
        let store = match &self.store {
            Storage::Complex(d) => {
                let mut d = d.map(|z| z.conj());
                if let Data::Blocks(_, Some(f)) = &mut d {
                    *f = -&*f;
                }
                Storage::Complex(d)
            }
            Storage::Real(Data::Blocks(b, f)) => Storage::Real(Data::Blocks(b.clone(), f.as_ref().map(|q| -q))),
            other => other.clone(),
        };
        ITensor {
            inds: self.inds.iter().map(Index::dag).collect(),
            store,
        }
    }

    pub fn norm(&self) -> f64 {
        fn n2<T: Scalar>(d: &Data<T>, inds: &[Index]) -> f64 {
            let r = match d {
                Data::Dense(x) => x.norm_sqr(),
                Data::Diag(v) => v.iter().fold(T::Real::zero(), |a, x| a + x.abs_sqr()),
                Data::Uniform(x) => x.abs_sqr() * T::Real::from_usize(diag_len(inds)).expect("usize fits"),
                Data::Blocks(b, _) => b.norm_sqr(),
            };
            num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
        }
        match &self.store {
            Storage::Real(d) => n2(d, &self.inds).sqrt(),
            Storage::Complex(d) => n2(d, &self.inds).sqrt(),
            Storage::Combiner => f64::NAN,
        }
    }

    /// In-place scalar multiplication; a complex factor promotes.
    pub fn scale_mut(&mut self, s: impl Into<C64>) {
        let s = s.into();
        if s.im != 0.0 {
            self.promote();
        }
        match &mut self.store {
            Storage::Real(d) => d.scale(s.re),
            Storage::Complex(d) => d.scale(s),
            Storage::Combiner => {}
        }
    }
}

use num_traits::{FromPrimitive, Zero};

/// First index shared by `a` and `b`.
pub fn commonind(a: &ITensor, b: &ITensor) -> Option<Index> {
    a.inds.iter().find(|i| b.hasind(i)).cloned()
}

/// All indices shared by `a` and `b`, in `a`'s internal order.
pub fn commoninds(a: &ITensor, b: &ITensor) -> Vec<Index> {
    a.inds.iter().filter(|i| b.hasind(i)).cloned().collect()
}

/// Indices of `a` not present on `b`.
pub fn uniqueinds(a: &ITensor, b: &ITensor) -> Vec<Index> {
    a.inds.iter().filter(|i| !b.hasind(i)).cloned().collect()
}

/// Indices of `a` not in `excl`.
pub fn uniqueinds_of(a: &ITensor, excl: &[Index]) -> Vec<Index> {
    a.inds.iter().filter(|i| !excl.contains(i)).cloned().collect()
}
