//! Matrix product states and operators.
//!
//! Sites are numbered from 1. Tensor `j` carries its site index (two for an
//! MPO), the link to `j - 1` and the link to `j + 1`; neighbours share
//! exactly one index. Positions `<= llim` are left-orthogonal and positions
//! `>= rlim` right-orthogonal.

use std::marker::PhantomData;

use rand::Rng;
use tnkit_core::decomp::{qr_tagged, svd_tagged};
use tnkit_core::{commonind, Arrow, ElType, ITensor, Index, TruncParams, C64, QN};

use crate::error::{MpsError, Result};
use crate::sitetypes::{op, state};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OperatorKind;

/// A chain of tensors with cached orthogonality limits.
#[derive(Debug)]
pub struct Chain<K> {
    tensors: Vec<ITensor>,
    llim: usize,
    rlim: usize,
    kind: PhantomData<K>,
}

impl<K> Clone for Chain<K> {
    fn clone(&self) -> Self {
        Chain::from_parts(self.tensors.clone(), self.llim, self.rlim)
    }
}

pub type Mps = Chain<StateKind>;
pub type Mpo = Chain<OperatorKind>;

pub(crate) fn link_tags(b: usize) -> String {
    format!("Link,l={b}")
}

/// Replaces `old` by `new`, keeping the arrow `old` has in `t`.
pub(crate) fn swap_ind(t: &ITensor, old: &Index, new: &Index) -> Result<ITensor> {
    Ok(t.map_inds(|i| if i == old { new.with_dir(i.dir()) } else { i.clone() })?)
}

/// Sum of outgoing charges: the QN seen leaving through `i` at `block`.
pub(crate) fn outgoing(i: &Index, block: usize) -> QN {
    match i.dir() {
        Arrow::In => -i.block_qn(block),
        _ => i.block_qn(block),
    }
}

impl<K> Chain<K> {
    /// Wraps tensors with no orthogonality claims.
    pub fn new(tensors: Vec<ITensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(MpsError::EmptyChain);
        }
        for (b, w) in tensors.windows(2).enumerate() {
            let shared = tnkit_core::commoninds(&w[0], &w[1]).len();
            if shared != 1 {
                return Err(MpsError::Mismatch(format!(
                    "tensors {} and {} share {shared} indices",
                    b + 1,
                    b + 2
                )));
            }
        }
        let n = tensors.len();
        Ok(Chain {
            tensors,
            llim: 0,
            rlim: n + 1,
            kind: PhantomData,
        })
    }

    pub(crate) fn from_parts(tensors: Vec<ITensor>, llim: usize, rlim: usize) -> Self {
        Chain {
            tensors,
            llim,
            rlim,
            kind: PhantomData,
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Tensor at site `j` (1-based).
    pub fn get(&self, j: usize) -> &ITensor {
        &self.tensors[j - 1]
    }

    /// Replaces tensor `j` and withdraws orthogonality claims that cover it.
    pub fn set(&mut self, j: usize, t: ITensor) {
        self.tensors[j - 1] = t;
        self.llim = self.llim.min(j - 1);
        self.rlim = self.rlim.max(j + 1);
    }

    pub fn tensors(&self) -> &[ITensor] {
        &self.tensors
    }

    pub fn into_tensors(self) -> Vec<ITensor> {
        self.tensors
    }

    pub fn llim(&self) -> usize {
        self.llim
    }

    pub fn rlim(&self) -> usize {
        self.rlim
    }

    /// Overrides the orthogonality limits; the caller vouches for them.
    pub fn set_ortho_lims(&mut self, llim: usize, rlim: usize) {
        assert!(llim < rlim && rlim <= self.len() + 1, "invalid orthogonality limits");
        self.llim = llim;
        self.rlim = rlim;
    }

    /// The orthogonality center, if the limits pin it to one site.
    pub fn ortho_center(&self) -> Option<usize> {
        (self.rlim == self.llim + 2).then_some(self.llim + 1)
    }

    /// Link between sites `b` and `b + 1`, as it appears on tensor `b`.
    pub fn linkind(&self, b: usize) -> Option<Index> {
        if b == 0 || b >= self.len() {
            return None;
        }
        commonind(self.get(b), self.get(b + 1))
    }

    pub fn linkdims(&self) -> Vec<usize> {
        (1..self.len())
            .map(|b| self.linkind(b).map_or(0, |l| l.dim()))
            .collect()
    }

    pub fn maxlinkdim(&self) -> usize {
        self.linkdims().into_iter().max().unwrap_or(1)
    }

    /// Indices of tensor `j` not shared with its neighbours.
    pub fn site_inds(&self, j: usize) -> Vec<Index> {
        let links: Vec<Index> = [self.linkind(j - 1), self.linkind(j)].into_iter().flatten().collect();
        self.get(j)
            .inds()
            .iter()
            .filter(|i| !links.contains(i))
            .cloned()
            .collect()
    }

    fn non_right_inds(&self, j: usize) -> Vec<Index> {
        let r = self.linkind(j);
        self.get(j)
            .inds()
            .iter()
            .filter(|i| Some(*i) != r.as_ref())
            .cloned()
            .collect()
    }

    fn non_left_inds(&self, j: usize) -> Vec<Index> {
        let l = self.linkind(j - 1);
        self.get(j)
            .inds()
            .iter()
            .filter(|i| Some(*i) != l.as_ref())
            .cloned()
            .collect()
    }

    /// Gauges the chain so that `j` is the orthogonality center. Only the
    /// tensors between the cached limits and `j` are factorized.
    pub fn orthogonalize(&mut self, j: usize) -> Result<()> {
        let n = self.len();
        if j == 0 || j > n {
            return Err(MpsError::SiteOutOfRange { site: j, n });
        }
        while self.llim + 1 < j {
            let b = self.llim + 1;
            let (q, r, _) = qr_tagged(self.get(b), &self.non_right_inds(b), &link_tags(b))?;
            self.tensors[b] = &r * &self.tensors[b];
            self.tensors[b - 1] = q;
            self.llim = b;
        }
        while self.rlim > j + 1 {
            let b = self.rlim - 1;
            let (q, r, _) = qr_tagged(self.get(b), &self.non_left_inds(b), &link_tags(b - 1))?;
            self.tensors[b - 2] = &self.tensors[b - 2] * &r;
            self.tensors[b - 1] = q;
            self.rlim = b;
        }
        self.llim = j - 1;
        self.rlim = j + 1;
        Ok(())
    }

    /// Compresses every bond with `p`. Returns the truncation error of each
    /// bond, bond `b` at position `b - 1`. Leaves the center at site 1.
    pub fn truncate(&mut self, p: &TruncParams) -> Result<Vec<f64>> {
        let n = self.len();
        let mut errs = vec![0.0; n.saturating_sub(1)];
        if n == 1 {
            return Ok(errs);
        }
        self.orthogonalize(n)?;
        for j in (2..=n).rev() {
            let left = self.linkind(j - 1).expect("chain is connected");
            let tags = link_tags(j - 1);
            let f = svd_tagged(self.get(j), std::slice::from_ref(&left), p, &tags, &tags)?;
            errs[j - 2] = f.spec.truncerr;
            self.tensors[j - 2] = &(&self.tensors[j - 2] * &f.u) * &f.s;
            self.tensors[j - 1] = f.v;
            self.llim = j - 2;
            self.rlim = j;
        }
        Ok(errs)
    }

    /// Multiplies the chain by `s`, acting on one tensor.
    pub fn scale(&mut self, s: impl Into<C64>) {
        let j = self.ortho_center().unwrap_or(1);
        self.tensors[j - 1].scale_mut(s);
    }

    pub fn scaled(&self, s: impl Into<C64>) -> Self {
        let mut c = self.clone();
        c.scale(s);
        c
    }

    /// Complex conjugate with reversed arrows.
    pub fn dag(&self) -> Self {
        Chain {
            tensors: self.tensors.iter().map(ITensor::dag).collect(),
            llim: self.llim,
            rlim: self.rlim,
            kind: PhantomData,
        }
    }

    /// Replaces every link with a fresh copy.
    pub fn sim_links(&self) -> Result<Self> {
        let mut c = self.clone();
        for b in 1..self.len() {
            let l = self.linkind(b).expect("chain is connected");
            let s = l.sim();
            c.tensors[b - 1] = swap_ind(&c.tensors[b - 1], &l, &s)?;
            c.tensors[b] = swap_ind(&c.tensors[b], &l, &s)?;
        }
        Ok(c)
    }

    /// Contracts the whole chain into one tensor.
    pub fn contract_all(&self) -> Result<ITensor> {
        let mut t = self.tensors[0].clone();
        for x in &self.tensors[1..] {
            t = tnkit_core::contract(&t, x)?;
        }
        Ok(t)
    }

    /// Total QN flux, `None` for non-QN chains or chains with no stored
    /// blocks.
    pub fn flux(&self) -> Result<Option<QN>> {
        let mut total = QN::empty();
        for t in &self.tensors {
            if !t.has_qns() {
                return Ok(None);
            }
            match t.flux()? {
                Some(f) => total = total.try_add(&f)?,
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }
}

impl Mps {
    /// Site index of tensor `j`.
    pub fn siteind(&self, j: usize) -> Index {
        self.site_inds(j)
            .into_iter()
            .next()
            .expect("MPS tensor has a site index")
    }

    pub fn siteinds(&self) -> Vec<Index> {
        (1..=self.len()).map(|j| self.siteind(j)).collect()
    }

    /// Successive SVDs of `t`, one site at a time from the left.
    pub fn from_dense(t: &ITensor, sites: &[Index], p: &TruncParams) -> Result<Mps> {
        let n = sites.len();
        if n == 0 {
            return Err(MpsError::EmptyChain);
        }
        if t.order() != n || !t.hasinds(sites) {
            return Err(MpsError::Mismatch("dense tensor is not over the given sites".into()));
        }
        let mut tensors = Vec::with_capacity(n);
        let mut rest = t.clone();
        let mut prev: Option<Index> = None;
        for (j, s) in sites.iter().enumerate().take(n - 1) {
            let mut rows: Vec<Index> = prev.iter().cloned().collect();
            rows.push(s.clone());
            let tags = link_tags(j + 1);
            let f = svd_tagged(&rest, &rows, p, &tags, &tags)?;
            rest = &f.s * &f.v;
            prev = Some(f.u_link.clone());
            tensors.push(f.u);
        }
        tensors.push(rest);
        Ok(Mps::from_parts(tensors, n - 1, n + 1))
    }

    /// ⟨self|other⟩, conjugating `self`.
    pub fn inner(&self, other: &Mps) -> Result<C64> {
        check_sites(self, other)?;
        let bra = self.dag().sim_links()?;
        let mut e = &bra.tensors[0] * &other.tensors[0];
        for j in 1..self.len() {
            e = &(&e * &bra.tensors[j]) * &other.tensors[j];
        }
        Ok(e.scalar()?)
    }

    pub fn norm(&self) -> Result<f64> {
        if let Some(c) = self.ortho_center() {
            return Ok(self.get(c).norm());
        }
        Ok(self.inner(self)?.re.max(0.0).sqrt())
    }

    /// Scales to unit norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm()?;
        if n == 0.0 {
            return Err(MpsError::ZeroVector);
        }
        self.scale(1.0 / n);
        Ok(n)
    }

    /// `⟨op_j⟩ / ⟨ψ|ψ⟩` at every site, measured at the orthogonality center.
    pub fn expect(&self, name: &str) -> Result<Vec<f64>> {
        let mut psi = self.clone();
        let mut out = Vec::with_capacity(self.len());
        for j in 1..=self.len() {
            psi.orthogonalize(j)?;
            let a = psi.get(j);
            let s = psi.siteind(j);
            let o = op(name, &s)?;
            let bra = a.dag().prime_inds(std::slice::from_ref(&s))?;
            let num = (&(&bra * &o) * a).scalar()?;
            let den = a.norm().powi(2);
            if den == 0.0 {
                return Err(MpsError::ZeroVector);
            }
            out.push(num.re / den);
        }
        Ok(out)
    }
}

impl Mpo {
    /// The unprimed site index of tensor `j`.
    pub fn siteind(&self, j: usize) -> Index {
        self.site_inds(j)
            .into_iter()
            .find(|i| i.plev() == 0)
            .expect("MPO tensor has an unprimed site index")
    }

    pub fn siteinds(&self) -> Vec<Index> {
        (1..=self.len()).map(|j| self.siteind(j)).collect()
    }

    /// Product of `"Id"` operators.
    pub fn identity(sites: &[Index]) -> Result<Mpo> {
        let ops = sites.iter().map(|s| op("Id", s)).collect::<Result<Vec<_>>>()?;
        Ok(Mpo::from_parts(link_product(ops, &[])?, 0, sites.len() + 1))
    }
}

/// `⟨bra|H|ket⟩`, conjugating `bra`.
pub fn inner_mpo(bra: &Mps, h: &Mpo, ket: &Mps) -> Result<C64> {
    check_sites(bra, ket)?;
    if h.len() != ket.len() {
        return Err(MpsError::Mismatch(format!(
            "MPO length {}, MPS length {}",
            h.len(),
            ket.len()
        )));
    }
    let b = bra.dag().sim_links()?;
    let mut e: Option<ITensor> = None;
    for j in 1..=ket.len() {
        let s = ket.siteind(j);
        if !h.get(j).hasinds(&[s.clone(), s.prime()]) {
            return Err(MpsError::Mismatch(format!("MPO does not act on site index {j}")));
        }
        let bj = b.get(j).prime_inds(std::slice::from_ref(&s))?;
        let k = match e {
            Some(e) => &e * ket.get(j),
            None => ket.get(j).clone(),
        };
        e = Some(&(&k * h.get(j)) * &bj);
    }
    Ok(e.expect("chain is nonempty").scalar()?)
}

pub(crate) fn check_sites(a: &Mps, b: &Mps) -> Result<()> {
    if a.len() != b.len() {
        return Err(MpsError::Mismatch(format!("lengths {} and {}", a.len(), b.len())));
    }
    for j in 1..=a.len() {
        if a.siteind(j) != b.siteind(j) {
            return Err(MpsError::Mismatch(format!("site index {j} differs")));
        }
    }
    Ok(())
}

/// Joins single-site tensors with dimension-1 links. `charges[b]`, when
/// given, is the QN flowing from site `b + 1` to `b + 2`.
fn link_product(mut ts: Vec<ITensor>, charges: &[QN]) -> Result<Vec<ITensor>> {
    let qn = ts.iter().all(ITensor::has_qns);
    for b in 1..ts.len() {
        let tags = link_tags(b);
        let l = if qn {
            let q = charges.get(b - 1).cloned().unwrap_or_else(QN::empty);
            Index::with_qns(vec![(q, 1)], &tags, Arrow::In)?
        } else {
            Index::new(1, &tags)?
        };
        let mut left = ITensor::new(std::slice::from_ref(&l))?;
        left.set(&[l.at(1)], 1.0)?;
        let ld = l.dag();
        let mut right = ITensor::new(std::slice::from_ref(&ld))?;
        right.set(&[ld.at(1)], 1.0)?;
        ts[b - 1] = &ts[b - 1] * &left;
        ts[b] = &ts[b] * &right;
    }
    Ok(ts)
}

/// Product state with one named state per site.
pub fn product_mps<S: AsRef<str>>(sites: &[Index], states: &[S]) -> Result<Mps> {
    if sites.is_empty() {
        return Err(MpsError::EmptyChain);
    }
    if sites.len() != states.len() {
        return Err(MpsError::Mismatch(format!(
            "{} sites, {} states",
            sites.len(),
            states.len()
        )));
    }
    let ts = sites
        .iter()
        .zip(states)
        .map(|(s, n)| state(n.as_ref(), s))
        .collect::<Result<Vec<_>>>()?;
    let mut charges = Vec::new();
    if sites.iter().all(Index::has_qns) {
        let mut acc = QN::empty();
        for t in &ts[..ts.len() - 1] {
            acc = acc.try_add(&t.flux()?.unwrap_or_else(QN::empty))?;
            charges.push(acc.clone());
        }
    }
    Ok(Mps::from_parts(link_product(ts, &charges)?, 0, 2))
}

/// Random normalized MPS with link dimensions at most `linkdim`.
///
/// Starts from random single-site states and applies sweeps of random
/// two-site gates, truncating each bond to `linkdim`.
pub fn random_mps<R: Rng + ?Sized>(sites: &[Index], linkdim: usize, rng: &mut R) -> Result<Mps> {
    if sites.iter().any(Index::has_qns) {
        return Err(MpsError::Mismatch(
            "QN sites need a reference state; use random_mps_qn".into(),
        ));
    }
    if sites.is_empty() {
        return Err(MpsError::EmptyChain);
    }
    let mut ts = Vec::with_capacity(sites.len());
    for s in sites {
        let mut t = ITensor::random(ElType::Real, std::slice::from_ref(s), rng)?;
        let n = t.norm();
        t.scale_mut(1.0 / n);
        ts.push(t);
    }
    let psi = Mps::from_parts(link_product(ts, &[])?, 0, 2);
    scramble(psi, linkdim, rng)
}

/// Random normalized MPS in the QN sector of the product state `states`.
pub fn random_mps_qn<R: Rng + ?Sized, S: AsRef<str>>(
    sites: &[Index],
    states: &[S],
    linkdim: usize,
    rng: &mut R,
) -> Result<Mps> {
    let psi = product_mps(sites, states)?;
    scramble(psi, linkdim, rng)
}

fn scramble<R: Rng + ?Sized>(mut psi: Mps, linkdim: usize, rng: &mut R) -> Result<Mps> {
    let n = psi.len();
    if linkdim == 0 {
        return Err(MpsError::Mismatch("link dimension must be at least 1".into()));
    }
    if linkdim > 1 && n > 1 {
        let d = (1..=n).map(|j| psi.siteind(j).dim()).max().unwrap_or(2).max(2) as f64;
        let sweeps = ((linkdim as f64).ln() / d.ln()).ceil() as usize + 1;
        let p = TruncParams::new().cutoff(1e-14).maxdim(linkdim);
        psi.orthogonalize(1)?;
        for _ in 0..sweeps {
            for b in 1..n {
                let (s1, s2) = (psi.siteind(b), psi.siteind(b + 1));
                let gate_inds = [s1.prime(), s2.prime(), s1.dag(), s2.dag()];
                let g = if s1.has_qns() {
                    ITensor::random_with_flux(ElType::Real, &gate_inds, &QN::empty(), rng)?
                } else {
                    ITensor::random(ElType::Real, &gate_inds, rng)?
                };
                let theta = (&g * &(psi.get(b) * psi.get(b + 1))).noprime()?;
                let mut rows = vec![s1];
                rows.extend(psi.linkind(b - 1));
                let tags = link_tags(b);
                let f = svd_tagged(&theta, &rows, &p, &tags, &tags)?;
                let mut rest = &f.s * &f.v;
                let nrm = rest.norm();
                if nrm == 0.0 {
                    return Err(MpsError::ZeroVector);
                }
                rest.scale_mut(1.0 / nrm);
                psi.tensors[b - 1] = f.u;
                psi.tensors[b] = rest;
                psi.llim = b;
                psi.rlim = b + 2;
            }
            psi.orthogonalize(1)?;
        }
    }
    psi.normalize()?;
    Ok(psi)
}

/// `psi + phi` by direct-sum links, then truncated with `p`.
pub fn add(psi: &Mps, phi: &Mps, p: &TruncParams) -> Result<Mps> {
    check_sites(psi, phi)?;
    let n = psi.len();
    if n == 1 {
        let t = psi.get(1).try_add(phi.get(1))?;
        return Ok(Mps::from_parts(vec![t], 0, 2));
    }
    let qn = psi.get(1).has_qns();
    // c[b]: charge shift on phi's link b that aligns phi's tensor fluxes with psi's.
    let mut shift = vec![QN::empty(); n];
    if qn {
        for b in 1..n {
            let fp = psi.get(b).flux()?;
            let fq = phi.get(b).flux()?;
            let delta = match (fp, fq) {
                (Some(a), Some(c)) => a.try_sub(&c)?,
                _ => QN::empty(),
            };
            shift[b] = shift[b - 1].try_add(&delta)?;
        }
    }
    let mut pt: Vec<ITensor> = psi.tensors.clone();
    let mut qt: Vec<ITensor> = phi.tensors.clone();
    for b in 1..n {
        let lp = psi.linkind(b).expect("chain is connected");
        let lq = phi.linkind(b).expect("chain is connected");
        let (dp, dq) = (lp.dim(), lq.dim());
        let tags = link_tags(b);
        let ln = if qn {
            let mut sp: Vec<(QN, usize)> = (0..lp.nblocks()).map(|k| (lp.block_qn(k), lp.blockdim(k))).collect();
            for k in 0..lq.nblocks() {
                let out = outgoing(&lq, k).try_add(&shift[b])?;
                let q = if lp.dir() == Arrow::In { -out } else { out };
                sp.push((q, lq.blockdim(k)));
            }
            Index::with_qns(sp, &tags, lp.dir())?
        } else {
            Index::new(dp + dq, &tags)?
        };
        let embed = |l: &Index, new: &Index, offset: usize| -> Result<ITensor> {
            let ld = l.dag();
            let mut e = ITensor::new(&[ld.clone(), new.clone()])?;
            for k in 1..=l.dim() {
                e.set(&[ld.at(k), new.at(offset + k)], 1.0)?;
            }
            Ok(e)
        };
        let lp_r = psi
            .get(b + 1)
            .inds()
            .iter()
            .find(|i| **i == lp)
            .cloned()
            .expect("shared link");
        let lq_r = phi
            .get(b + 1)
            .inds()
            .iter()
            .find(|i| **i == lq)
            .cloned()
            .expect("shared link");
        pt[b - 1] = &pt[b - 1] * &embed(&lp, &ln, 0)?;
        pt[b] = &pt[b] * &embed(&lp_r, &ln.dag(), 0)?;
        qt[b - 1] = &qt[b - 1] * &embed(&lq, &ln, dp)?;
        qt[b] = &qt[b] * &embed(&lq_r, &ln.dag(), dp)?;
    }
    let ts = pt
        .iter()
        .zip(&qt)
        .map(|(a, c)| a.try_add(c).map_err(MpsError::from))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Mps::from_parts(ts, 0, n + 1);
    out.truncate(p)?;
    Ok(out)
}
