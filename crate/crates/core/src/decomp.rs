//! Tensor factorizations over an index bipartition.
//!
//! The tensor is fused to a matrix per QN sector (a single sector for dense
//! storage), each sector is factorized with the active [`DenseLinalg`]
//! provider, and truncation is applied once to the merged spectrum.
//!
//! Arrow conventions for QN tensors: the new link carries one subspace per
//! kept sector, labelled by the sector's row flux. `U` and `Q` hold it
//! incoming, so `flux(U) = flux(Q) = QN()`; `S` holds `(u, dag(v))`;
//! `V` and `R` hold it outgoing and carry the flux of the input.
//!
//! [`DenseLinalg`]: crate::linalg::DenseLinalg

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Float, ToPrimitive};

use crate::blocksparse::{BlockCoord, BlockSparseTensor};
use crate::dense::{permutedims, DenseTensor};
use crate::error::{Result, TensorError};
use crate::index::{Arrow, Index};
use crate::itensor::{block_flux, Data, ITensor, Storage};
use crate::linalg::{provider, Matrix};
use crate::qn::QN;
use crate::scalar::Scalar;
use crate::C64;

/// Truncation controls shared by all factorizations.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncParams {
    /// Largest allowed relative discarded weight.
    pub cutoff: f64,
    /// `None` means unlimited.
    pub maxdim: Option<usize>,
    pub mindim: usize,
}

impl Default for TruncParams {
    fn default() -> Self {
        TruncParams {
            cutoff: 0.0,
            maxdim: None,
            mindim: 1,
        }
    }
}

impl TruncParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn maxdim(mut self, maxdim: usize) -> Self {
        self.maxdim = Some(maxdim);
        self
    }

    pub fn mindim(mut self, mindim: usize) -> Self {
        self.mindim = mindim;
        self
    }
}

/// Kept singular values (or eigenvalues), descending, and the relative
/// discarded weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub truncerr: f64,
}

thread_local! {
    static FACTORIZATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Tensor factorizations (SVD, QR, eigen) performed on this thread so far.
pub fn factorizations() -> u64 {
    FACTORIZATIONS.with(Cell::get)
}

fn count() {
    FACTORIZATIONS.with(|c| c.set(c.get() + 1));
}

/// Kept count and relative discarded weight for descending non-negative
/// `weights` (squared singular values, or eigenvalues).
///
/// The count is the smallest `n` whose discarded tail is within
/// `cutoff * total`, then clamped to `[mindim, maxdim]` and the length.
pub fn truncate_weights(weights: &[f64], p: &TruncParams) -> Result<(usize, f64)> {
    if weights.is_empty() {
        return Err(TensorError::EmptySpectrum);
    }
    if p.cutoff < 0.0 || p.cutoff.is_nan() {
        return Err(TensorError::NegativeCutoff(p.cutoff));
    }
    let total: f64 = weights.iter().sum();
    let tail = |n: usize| weights[n..].iter().sum::<f64>();
    let mut n = weights.len();
    for k in 1..=weights.len() {
        if tail(k) <= p.cutoff * total {
            n = k;
            break;
        }
    }
    n = n.max(p.mindim);
    if let Some(m) = p.maxdim {
        n = n.min(m);
    }
    n = n.clamp(1, weights.len());
    let err = if total > 0.0 { tail(n) / total } else { 0.0 };
    Ok((n, err))
}

/// Truncation of descending singular values: weights are their squares.
pub fn truncate_spectrum(values: &[f64], p: &TruncParams) -> Result<(usize, f64)> {
    let w: Vec<f64> = values.iter().map(|s| s * s).collect();
    truncate_weights(&w, p)
}

/// One QN sector of the fused matrix.
struct Sector<T: Scalar> {
    qn: QN,
    rows: Vec<(BlockCoord, usize)>,
    cols: Vec<(BlockCoord, usize)>,
    mat: Matrix<T>,
}

fn block_size(inds: &[Index], pos: &[usize], coord: &[usize]) -> usize {
    pos.iter().zip(coord).map(|(&p, &b)| inds[p].blockdim(b)).product()
}

fn with_offsets(inds: &[Index], pos: &[usize], coords: BTreeSet<BlockCoord>) -> (Vec<(BlockCoord, usize)>, usize) {
    let mut off = 0;
    let v = coords
        .into_iter()
        .map(|c| {
            let o = off;
            off += block_size(inds, pos, &c);
            (c, o)
        })
        .collect();
    (v, off)
}

fn sub_flux(inds: &[Index], pos: &[usize], coord: &[usize]) -> QN {
    let sub: Vec<Index> = pos.iter().map(|&p| inds[p].clone()).collect();
    block_flux(&sub, coord)
}

/// Fuses block-sparse data into per-sector matrices keyed by row flux.
fn gather_blocks<T: Scalar>(
    bs: &BlockSparseTensor<T>,
    inds: &[Index],
    rows: &[usize],
    cols: &[usize],
    square: bool,
) -> Result<Vec<Sector<T>>> {
    let mut groups: BTreeMap<QN, (BTreeSet<BlockCoord>, BTreeSet<BlockCoord>)> = BTreeMap::new();
    for coord in bs.blocks().keys() {
        let rc: BlockCoord = rows.iter().map(|&p| coord[p]).collect();
        let cc: BlockCoord = cols.iter().map(|&p| coord[p]).collect();
        let q = sub_flux(inds, rows, &rc);
        let g = groups.entry(q).or_default();
        if square {
            g.0.insert(cc.clone());
            g.1.insert(rc.clone());
        }
        g.0.insert(rc);
        g.1.insert(cc);
    }
    let perm: Vec<usize> = rows.iter().chain(cols).copied().collect();
    let mut sectors = Vec::with_capacity(groups.len());
    for (qn, (rset, cset)) in groups {
        let (rows_off, m) = with_offsets(inds, rows, rset);
        let (cols_off, n) = with_offsets(inds, cols, cset);
        sectors.push(Sector {
            qn,
            rows: rows_off,
            cols: cols_off,
            mat: Matrix::zeros(m, n),
        });
    }
    let find =
        |list: &[(BlockCoord, usize)], c: &BlockCoord| list.binary_search_by(|(x, _)| x.cmp(c)).map(|k| list[k].1).ok();
    for (coord, block) in bs.blocks() {
        let rc: BlockCoord = rows.iter().map(|&p| coord[p]).collect();
        let cc: BlockCoord = cols.iter().map(|&p| coord[p]).collect();
        let q = sub_flux(inds, rows, &rc);
        let s = sectors.iter_mut().find(|s| s.qn == q).expect("sector created above");
        let ro = find(&s.rows, &rc).expect("row coord registered");
        let co = find(&s.cols, &cc).expect("col coord registered");
        let mr = block_size(inds, rows, &rc);
        let nc = block_size(inds, cols, &cc);
        let p = permutedims(block, &perm)?;
        let d = p.data();
        for r in 0..mr {
            for c in 0..nc {
                s.mat.set(ro + r, co + c, d[r * nc + c]);
            }
        }
    }
    Ok(sectors)
}

fn gather_dense<T: Scalar>(
    d: &DenseTensor<T>,
    inds: &[Index],
    rows: &[usize],
    cols: &[usize],
) -> Result<Vec<Sector<T>>> {
    let perm: Vec<usize> = rows.iter().chain(cols).copied().collect();
    let m: usize = rows.iter().map(|&p| inds[p].dim()).product();
    let n: usize = cols.iter().map(|&p| inds[p].dim()).product();
    let p = permutedims(d, &perm)?.into_owned();
    Ok(vec![Sector {
        qn: QN::empty(),
        rows: vec![(vec![0; rows.len()], 0)],
        cols: vec![(vec![0; cols.len()], 0)],
        mat: Matrix::from_vec(m, n, p.into_data())?,
    }])
}

/// Positions of `row_inds` in `t` and of the remaining indices.
fn bipartition(t: &ITensor, row_inds: &[Index]) -> Result<(Vec<usize>, Vec<usize>)> {
    if row_inds.is_empty() || row_inds.len() >= t.order() {
        return Err(TensorError::Bipartition);
    }
    let mut rows = Vec::with_capacity(row_inds.len());
    for r in row_inds {
        let p = t.inds().iter().position(|i| i == r).ok_or(TensorError::Bipartition)?;
        if rows.contains(&p) {
            return Err(TensorError::Bipartition);
        }
        rows.push(p);
    }
    let cols = (0..t.order()).filter(|p| !rows.contains(p)).collect();
    Ok((rows, cols))
}

/// Real or complex block-sparse (QN) or dense view of `t`'s data.
enum View<'a> {
    Real(std::borrow::Cow<'a, Data<f64>>),
    Complex(std::borrow::Cow<'a, Data<C64>>),
}

fn view(t: &ITensor) -> Result<(View<'_>, bool)> {
    let qn = t.has_qns();
    let conv = |t: &ITensor| -> Result<ITensor> {
        if qn {
            t.to_blocks()
        } else {
            Ok(t.densify())
        }
    };
    let needs = match t.store() {
        Storage::Combiner => return Err(TensorError::Unsupported("factorizing a combiner".into())),
        Storage::Real(Data::Blocks(..)) | Storage::Complex(Data::Blocks(..)) => false,
        Storage::Real(Data::Dense(_)) | Storage::Complex(Data::Dense(_)) => qn,
        _ => true,
    };
    if !needs {
        return Ok(match t.store() {
            Storage::Real(d) => (View::Real(std::borrow::Cow::Borrowed(d)), qn),
            Storage::Complex(d) => (View::Complex(std::borrow::Cow::Borrowed(d)), qn),
            Storage::Combiner => unreachable!(),
        });
    }
    let c = conv(t)?;
    Ok(match c.into_parts().1 {
        Storage::Real(d) => (View::Real(std::borrow::Cow::Owned(d)), qn),
        Storage::Complex(d) => (View::Complex(std::borrow::Cow::Owned(d)), qn),
        Storage::Combiner => unreachable!(),
    })
}

fn sectors_of<T: Scalar>(
    d: &Data<T>,
    inds: &[Index],
    rows: &[usize],
    cols: &[usize],
    square: bool,
) -> Result<Vec<Sector<T>>> {
    match d {
        Data::Dense(x) => gather_dense(x, inds, rows, cols),
        Data::Blocks(bs, _) => gather_blocks(bs, inds, rows, cols, square),
        _ => unreachable!("view yields dense or block storage"),
    }
}

/// Sector indices ordered by value, for a global descending merge.
fn merged_order(values: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = values
        .iter()
        .enumerate()
        .flat_map(|(s, v)| (0..v.len()).map(move |k| (s, k)))
        .collect();
    all.sort_by(|a, b| {
        values[b.0][b.1]
            .partial_cmp(&values[a.0][a.1])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    all
}

/// Per-sector kept counts after a global truncation.
fn global_truncation(values: &[Vec<f64>], squared: bool, p: &TruncParams) -> Result<(Vec<usize>, Spectrum)> {
    let order = merged_order(values);
    let weights: Vec<f64> = order
        .iter()
        .map(|&(s, k)| {
            let v = values[s][k];
            if squared {
                v * v
            } else {
                v.max(0.0)
            }
        })
        .collect();
    let (n, truncerr) = truncate_weights(&weights, p)?;
    let mut keep = vec![0; values.len()];
    for &(s, _) in &order[..n] {
        keep[s] += 1;
    }
    let kept = order[..n].iter().map(|&(s, k)| values[s][k]).collect();
    Ok((keep, Spectrum { values: kept, truncerr }))
}

fn make_link(qn: bool, sectors: &[(QN, usize)], tags: &str) -> Result<Index> {
    if qn {
        Index::with_qns(sectors.to_vec(), tags, Arrow::Out)
    } else {
        Index::new(sectors.iter().map(|s| s.1).sum(), tags)
    }
}

/// Builds the tensor with indices `side` (positions in `inds`) plus the link
/// at `link_first`, from per-sector matrices whose link dimension is `k[s]`.
#[allow(clippy::too_many_arguments)]
fn assemble<T: Scalar>(
    qn: bool,
    inds: &[Index],
    side: &[usize],
    coords: &[&[(BlockCoord, usize)]],
    mats: &[Matrix<T>],
    link: &Index,
    link_first: bool,
    flux: Option<QN>,
) -> Result<(Vec<Index>, Data<T>)> {
    let side_inds: Vec<Index> = side.iter().map(|&p| inds[p].clone()).collect();
    let out_inds: Vec<Index> = if link_first {
        std::iter::once(link.clone()).chain(side_inds.iter().cloned()).collect()
    } else {
        side_inds.iter().cloned().chain(std::iter::once(link.clone())).collect()
    };
    if !qn {
        let m = &mats[0];
        let shape: Vec<usize> = out_inds.iter().map(Index::dim).collect();
        let d = DenseTensor::from_vec(&shape, m.data().to_vec())?;
        return Ok((out_inds, Data::Dense(d)));
    }
    let mut bs = BlockSparseTensor::new(out_inds.iter().map(Index::blockdims).collect());
    for (s, (list, m)) in coords.iter().zip(mats).enumerate() {
        let k = if link_first { m.rows() } else { m.cols() };
        for (c, off) in list.iter() {
            let sz = block_size(inds, side, c);
            let mut shape: Vec<usize> = side.iter().zip(c).map(|(&p, &b)| inds[p].blockdim(b)).collect();
            let mut coord = c.clone();
            let data: Vec<T> = if link_first {
                shape.insert(0, k);
                coord.insert(0, s);
                (0..k)
                    .flat_map(|r| (0..sz).map(move |x| (r, x)))
                    .map(|(r, x)| m.get(r, off + x))
                    .collect()
            } else {
                shape.push(k);
                coord.push(s);
                (0..sz)
                    .flat_map(|x| (0..k).map(move |r| (x, r)))
                    .map(|(x, r)| m.get(off + x, r))
                    .collect()
            };
            bs.insert_block(coord, DenseTensor::from_vec(&shape, data)?)?;
        }
    }
    Ok((out_inds, Data::Blocks(bs, flux)))
}

fn wrap<T: Scalar>(inds: Vec<Index>, d: Data<T>) -> ITensor
where
    Data<T>: IntoStorage,
{
    ITensor::from_parts(inds, d.into_storage()).expect("factor is consistent by construction")
}

trait IntoStorage {
    fn into_storage(self) -> Storage;
}

impl IntoStorage for Data<f64> {
    fn into_storage(self) -> Storage {
        Storage::Real(self)
    }
}

impl IntoStorage for Data<C64> {
    fn into_storage(self) -> Storage {
        Storage::Complex(self)
    }
}

#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: ITensor,
    pub s: ITensor,
    pub v: ITensor,
    pub spec: Spectrum,
    /// Link shared by `u` and `s`.
    pub u_link: Index,
    /// Link shared by `s` and `v`.
    pub v_link: Index,
}

/// `T ≈ U * S * V` with `U` over `row_inds` and `V` over the rest.
pub fn svd(t: &ITensor, row_inds: &[Index], p: &TruncParams) -> Result<SvdResult> {
    svd_tagged(t, row_inds, p, "Link,u", "Link,v")
}

pub fn svd_tagged(t: &ITensor, row_inds: &[Index], p: &TruncParams, utags: &str, vtags: &str) -> Result<SvdResult> {
    let (rows, cols) = bipartition(t, row_inds)?;
    if p.cutoff < 0.0 {
        return Err(TensorError::NegativeCutoff(p.cutoff));
    }
    count();
    let (v, qn) = view(t)?;
    match v {
        View::Real(d) => svd_impl(&d, t.inds(), &rows, &cols, qn, p, utags, vtags),
        View::Complex(d) => svd_impl(&d, t.inds(), &rows, &cols, qn, p, utags, vtags),
    }
}

#[allow(clippy::too_many_arguments)]
fn svd_impl<T: Scalar>(
    d: &Data<T>,
    inds: &[Index],
    rows: &[usize],
    cols: &[usize],
    qn: bool,
    p: &TruncParams,
    utags: &str,
    vtags: &str,
) -> Result<SvdResult>
where
    Data<T>: IntoStorage,
{
    let flux = match d {
        Data::Blocks(_, f) => f.clone(),
        _ => None,
    };
    let sectors = sectors_of(d, inds, rows, cols, false)?;
    let lin = provider::<T>();
    let mut svds = Vec::with_capacity(sectors.len());
    for s in &sectors {
        svds.push(lin.svd(&s.mat)?);
    }
    let values: Vec<Vec<f64>> = svds
        .iter()
        .map(|x| x.s.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let (keep, spec) = global_truncation(&values, true, p)?;

    let mut link_sectors = Vec::new();
    let mut umats = Vec::new();
    let mut vmats = Vec::new();
    let mut rcoords = Vec::new();
    let mut ccoords = Vec::new();
    let mut diag = Vec::new();
    for ((s, x), &k) in sectors.iter().zip(&svds).zip(&keep) {
        if k == 0 {
            continue;
        }
        link_sectors.push((s.qn.clone(), k));
        umats.push(x.u.take_cols(k));
        vmats.push(x.vt.take_rows(k));
        rcoords.push(s.rows.as_slice());
        ccoords.push(s.cols.as_slice());
        diag.extend(x.s[..k].iter().map(|v| v.to_f64().unwrap_or(f64::NAN)));
    }
    let u_link = make_link(qn, &link_sectors, utags)?;
    let v_link = make_link(qn, &link_sectors, vtags)?;

    let (ui, ud) = assemble(
        qn,
        inds,
        rows,
        &rcoords,
        &umats,
        &u_link.dag(),
        false,
        qn.then(QN::empty),
    )?;
    let (vi, vd) = assemble(qn, inds, cols, &ccoords, &vmats, &v_link, true, flux)?;
    let u = wrap(ui, ud);
    let v = wrap(vi, vd);
    let s = crate::itensor::diag_itensor(&[u_link.clone(), v_link.dag()], diag)?;
    Ok(SvdResult {
        u,
        s,
        v,
        spec,
        u_link,
        v_link,
    })
}

/// `T = Q * R` with `Q` isometric over `row_inds`. Returns the shared link.
pub fn qr(t: &ITensor, row_inds: &[Index]) -> Result<(ITensor, ITensor, Index)> {
    qr_tagged(t, row_inds, "Link,qr")
}

pub fn qr_tagged(t: &ITensor, row_inds: &[Index], tags: &str) -> Result<(ITensor, ITensor, Index)> {
    let (rows, cols) = bipartition(t, row_inds)?;
    count();
    let (v, qn) = view(t)?;
    match v {
        View::Real(d) => qr_impl(&d, t.inds(), &rows, &cols, qn, tags),
        View::Complex(d) => qr_impl(&d, t.inds(), &rows, &cols, qn, tags),
    }
}

fn qr_impl<T: Scalar>(
    d: &Data<T>,
    inds: &[Index],
    rows: &[usize],
    cols: &[usize],
    qn: bool,
    tags: &str,
) -> Result<(ITensor, ITensor, Index)>
where
    Data<T>: IntoStorage,
{
    let flux = match d {
        Data::Blocks(_, f) => f.clone(),
        _ => None,
    };
    let sectors = sectors_of(d, inds, rows, cols, false)?;
    if sectors.is_empty() {
        return Err(TensorError::EmptySpectrum);
    }
    let lin = provider::<T>();
    let mut link_sectors = Vec::new();
    let (mut qs, mut rs) = (Vec::new(), Vec::new());
    for s in &sectors {
        let f = lin.qr(&s.mat)?;
        link_sectors.push((s.qn.clone(), f.q.cols()));
        qs.push(f.q);
        rs.push(f.r);
    }
    let rcoords: Vec<&[(BlockCoord, usize)]> = sectors.iter().map(|s| s.rows.as_slice()).collect();
    let ccoords: Vec<&[(BlockCoord, usize)]> = sectors.iter().map(|s| s.cols.as_slice()).collect();
    let link = make_link(qn, &link_sectors, tags)?;
    let (qi, qd) = assemble(qn, inds, rows, &rcoords, &qs, &link.dag(), false, qn.then(QN::empty))?;
    let (ri, rd) = assemble(qn, inds, cols, &ccoords, &rs, &link, true, flux)?;
    Ok((wrap(qi, qd), wrap(ri, rd), link))
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Eigenvectors over the row indices plus `dag(link)`.
    pub u: ITensor,
    /// Diagonal eigenvalues over `(link, dag(link'))`.
    pub d: ITensor,
    pub spec: Spectrum,
    pub link: Index,
}

/// Eigendecomposition of a tensor Hermitian between `row_inds` and their
/// partners (same id and tags, different prime level).
///
/// With `Ud = dag(U)` carrying partner indices and `link'`,
/// `T ≈ U * D * Ud`.
pub fn eigen_hermitian(t: &ITensor, row_inds: &[Index], p: &TruncParams) -> Result<EigenResult> {
    let (rows, _) = bipartition(t, row_inds)?;
    let mut cols = Vec::with_capacity(rows.len());
    for &r in &rows {
        let ri = &t.inds()[r];
        let c = t
            .inds()
            .iter()
            .position(|i| i.id() == ri.id() && i.tags() == ri.tags() && i.plev() != ri.plev())
            .ok_or(TensorError::Bipartition)?;
        cols.push(c);
    }
    if rows.len() + cols.len() != t.order() {
        return Err(TensorError::Bipartition);
    }
    if p.cutoff < 0.0 {
        return Err(TensorError::NegativeCutoff(p.cutoff));
    }
    count();
    let (v, qn) = view(t)?;
    match v {
        View::Real(d) => eigen_impl(&d, t.inds(), &rows, &cols, qn, p),
        View::Complex(d) => eigen_impl(&d, t.inds(), &rows, &cols, qn, p),
    }
}

fn eigen_impl<T: Scalar>(
    d: &Data<T>,
    inds: &[Index],
    rows: &[usize],
    cols: &[usize],
    qn: bool,
    p: &TruncParams,
) -> Result<EigenResult>
where
    Data<T>: IntoStorage,
{
    if let Data::Blocks(_, Some(f)) = d {
        if !f.is_zero() {
            return Err(TensorError::NotHermitian(f64::INFINITY));
        }
    }
    let sectors = sectors_of(d, inds, rows, cols, true)?;
    let lin = provider::<T>();
    let mut eigs = Vec::with_capacity(sectors.len());
    for s in &sectors {
        let m = &s.mat;
        if m.rows() != m.cols() {
            return Err(TensorError::NotHermitian(f64::INFINITY));
        }
        let scale = m
            .data()
            .iter()
            .map(|x| x.modulus().to_f64().unwrap_or(0.0))
            .fold(1.0, f64::max);
        let dev = m.max_abs_diff(&m.adjoint()).to_f64().unwrap_or(f64::INFINITY);
        if dev > 1e-10 * scale {
            return Err(TensorError::NotHermitian(dev));
        }
        eigs.push(lin.eigh(m)?);
    }
    let values: Vec<Vec<f64>> = eigs
        .iter()
        .map(|e| e.values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let (keep, spec) = global_truncation(&values, false, p)?;

    let mut link_sectors = Vec::new();
    let mut umats = Vec::new();
    let mut rcoords = Vec::new();
    let mut diag = Vec::new();
    for ((s, e), &k) in sectors.iter().zip(&eigs).zip(&keep) {
        if k == 0 {
            continue;
        }
        link_sectors.push((s.qn.clone(), k));
        umats.push(e.vectors.take_cols(k));
        rcoords.push(s.rows.as_slice());
        diag.extend(values_of(&e.values[..k]));
    }
    let link = make_link(qn, &link_sectors, "Link,eigen")?;
    let (ui, ud) = assemble(qn, inds, rows, &rcoords, &umats, &link.dag(), false, qn.then(QN::empty))?;
    let u = wrap(ui, ud);
    let dt = crate::itensor::diag_itensor(&[link.clone(), link.prime().dag()], diag)?;
    Ok(EigenResult { u, d: dt, spec, link })
}

fn values_of<R: Float + ToPrimitive>(v: &[R]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}
