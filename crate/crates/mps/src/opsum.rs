//! AutoMPO: sums of local operator products compiled into compressed MPOs.
//!
//! For every bond the terms crossing it define a coefficient matrix between
//! their left and right operator strings. Its right singular vectors span
//! the bond's channels; two extra channels carry "nothing placed yet" and
//! "term complete". Each site tensor re-expresses the right strings of one
//! bond through the channels of the next.

use std::collections::BTreeMap;
use std::ops::Add;

use num_complex::Complex64 as C64;
use tnkit_core::linalg::{provider, Matrix};
use tnkit_core::{truncate_spectrum, Arrow, ITensor, Index, Scalar, TruncParams, QN};

use crate::error::{MpsError, Result};
use crate::mps::{link_tags, Mpo};
use crate::sitetypes::{op_from_matrix, op_matrix};

const CUTOFF: f64 = 1e-15;

/// One product of named local operators with its coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct OpTerm {
    pub coef: C64,
    /// `(operator name, 1-based site)` in the order given.
    pub factors: Vec<(String, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpSum {
    terms: Vec<OpTerm>,
}

impl OpSum {
    pub fn new() -> Self {
        OpSum::default()
    }

    /// Appends `coef * Π factors`.
    pub fn add_term(&mut self, coef: impl Into<C64>, factors: &[(&str, usize)]) -> Result<&mut Self> {
        if factors.is_empty() {
            return Err(MpsError::EmptyTerm);
        }
        if let Some(&(_, j)) = factors.iter().find(|(_, j)| *j == 0) {
            return Err(MpsError::SiteOutOfRange { site: j, n: 0 });
        }
        self.terms.push(OpTerm {
            coef: coef.into(),
            factors: factors.iter().map(|&(o, j)| (o.to_string(), j)).collect(),
        });
        Ok(self)
    }

    /// Appends a term with coefficient 1.
    pub fn add_ops(&mut self, factors: &[(&str, usize)]) -> Result<&mut Self> {
        self.add_term(1.0, factors)
    }

    pub fn terms(&self) -> &[OpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, a: impl Into<C64>) -> OpSum {
        let a = a.into();
        OpSum {
            terms: self
                .terms
                .iter()
                .map(|t| OpTerm {
                    coef: a * t.coef,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    /// Compiles the sum into an MPO over `sites`.
    pub fn to_mpo(&self, sites: &[Index]) -> Result<Mpo> {
        let c = Compiler::new(self, sites)?;
        if c.complex {
            c.build::<C64>()
        } else {
            c.build::<f64>()
        }
    }
}

impl Add for OpSum {
    type Output = OpSum;

    fn add(mut self, rhs: OpSum) -> OpSum {
        self.terms.extend(rhs.terms);
        self
    }
}

/// A factor: site and operator id in that site's table.
type Factor = (usize, usize);

struct LocalOp {
    mat: Vec<C64>,
    flux: QN,
}

struct Term {
    coef: C64,
    factors: Vec<Factor>,
}

struct Compiler<'a> {
    sites: &'a [Index],
    qn: bool,
    complex: bool,
    ops: Vec<Vec<LocalOp>>,
    terms: Vec<Term>,
    flux: QN,
}

/// Right strings of one bond, grouped by flux, with the kept channels.
struct Bond<T> {
    /// String -> (sector, position in the sector).
    rmap: BTreeMap<Vec<Factor>, (usize, usize)>,
    /// Per sector: the QN of its strings and its channels' vectors.
    sectors: Vec<(QN, Vec<Vec<T>>)>,
    /// First channel number of each sector.
    offset: Vec<usize>,
    nmid: usize,
}

impl<'a> Compiler<'a> {
    fn new(sum: &OpSum, sites: &'a [Index]) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(MpsError::EmptyChain);
        }
        let qn = sites.iter().all(Index::has_qns);
        let mut tables: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); n];
        let mut ops: Vec<Vec<LocalOp>> = (0..n).map(|_| Vec::new()).collect();
        let mut merged: BTreeMap<Vec<Factor>, C64> = BTreeMap::new();
        for t in &sum.terms {
            if t.factors.is_empty() {
                return Err(MpsError::EmptyTerm);
            }
            let mut fs = t.factors.clone();
            for (_, j) in &fs {
                if *j == 0 || *j > n {
                    return Err(MpsError::SiteOutOfRange { site: *j, n });
                }
            }
            fs.sort_by_key(|(_, j)| *j);
            let mut grouped: Vec<(usize, Vec<String>)> = Vec::new();
            for (o, j) in fs {
                match grouped.last_mut() {
                    Some((k, names)) if *k == j => names.push(o),
                    _ => grouped.push((j, vec![o])),
                }
            }
            let mut factors = Vec::with_capacity(grouped.len());
            for (j, names) in grouped {
                let key = names.join("*");
                let s = &sites[j - 1];
                let id = match tables[j - 1].get(&key) {
                    Some(&id) => id,
                    None => {
                        let d = s.dim();
                        let mut mat = op_matrix(&names[0], s)?;
                        for o in &names[1..] {
                            mat = matmul(&mat, &op_matrix(o, s)?, d);
                        }
                        let flux = if qn {
                            op_from_matrix(&mat, s)?.flux()?.unwrap_or_else(QN::empty)
                        } else {
                            QN::empty()
                        };
                        ops[j - 1].push(LocalOp { mat, flux });
                        tables[j - 1].insert(key, ops[j - 1].len() - 1);
                        ops[j - 1].len() - 1
                    }
                };
                factors.push((j, id));
            }
            *merged.entry(factors).or_insert(C64::new(0.0, 0.0)) += t.coef;
        }
        let terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(factors, coef)| Term { coef, factors })
            .collect();
        let complex =
            terms.iter().any(|t| t.coef.im != 0.0) || ops.iter().flatten().any(|o| o.mat.iter().any(|z| z.im != 0.0));
        let mut c = Compiler {
            sites,
            qn,
            complex,
            ops,
            terms,
            flux: QN::empty(),
        };
        if qn {
            let mut total: Option<QN> = None;
            for t in &c.terms {
                let f = c.string_flux(&t.factors)?;
                match &total {
                    Some(q) if *q != f => return Err(MpsError::MixedFlux(q.to_string(), f.to_string())),
                    _ => total = Some(f),
                }
            }
            c.flux = total.unwrap_or_else(QN::empty);
        }
        Ok(c)
    }

    fn string_flux(&self, fs: &[Factor]) -> Result<QN> {
        let mut q = QN::empty();
        for &(j, o) in fs {
            q = q.try_add(&self.ops[j - 1][o].flux)?;
        }
        Ok(q)
    }

    fn bond<T: Scalar>(&self, b: usize) -> Result<Bond<T>> {
        let mut rmap: BTreeMap<Vec<Factor>, (usize, usize)> = BTreeMap::new();
        let mut sector_of: BTreeMap<QN, usize> = BTreeMap::new();
        let mut rows: Vec<BTreeMap<Vec<Factor>, usize>> = Vec::new();
        let mut ncols: Vec<usize> = Vec::new();
        let mut entries: Vec<Vec<(usize, usize, C64)>> = Vec::new();
        let mut qns: Vec<QN> = Vec::new();
        for t in &self.terms {
            let (first, last) = (t.factors[0].0, t.factors[t.factors.len() - 1].0);
            if !(first <= b && b < last) {
                continue;
            }
            let split = t.factors.iter().position(|f| f.0 > b).expect("term crosses the bond");
            let (l, r) = t.factors.split_at(split);
            let q = self.string_flux(r)?;
            let s = *sector_of.entry(q.clone()).or_insert_with(|| {
                rows.push(BTreeMap::new());
                ncols.push(0);
                entries.push(Vec::new());
                qns.push(q);
                rows.len() - 1
            });
            let col = match rmap.get(r) {
                Some(&(_, c)) => c,
                None => {
                    ncols[s] += 1;
                    rmap.insert(r.to_vec(), (s, ncols[s] - 1));
                    ncols[s] - 1
                }
            };
            let nr = rows[s].len();
            let row = *rows[s].entry(l.to_vec()).or_insert(nr);
            entries[s].push((row, col, t.coef));
        }
        let lin = provider::<T>();
        let mut svals: Vec<(f64, usize, usize)> = Vec::new();
        let mut vts = Vec::with_capacity(rows.len());
        for s in 0..rows.len() {
            let mut m = Matrix::<T>::zeros(rows[s].len(), ncols[s]);
            for &(r, c, v) in &entries[s] {
                m.set(r, c, m.get(r, c) + T::from_c64(v));
            }
            let f = lin.svd(&m)?;
            for (k, x) in f.s.iter().enumerate() {
                svals.push((x.to_c64().re, s, k));
            }
            vts.push(f.vt);
        }
        svals.sort_by(|a, b| b.0.total_cmp(&a.0));
        let values: Vec<f64> = svals.iter().map(|x| x.0).collect();
        let keep = if values.iter().all(|&v| v == 0.0) {
            0
        } else {
            truncate_spectrum(&values, &TruncParams::new().cutoff(CUTOFF))?.0
        };
        let mut kept: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
        for &(_, s, k) in &svals[..keep] {
            kept[s].push(k);
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| qns[a].cmp(&qns[b]));
        let mut remap = vec![0; rows.len()];
        let mut sectors = Vec::new();
        let mut offset = Vec::new();
        let mut nmid = 0;
        for (new, &s) in order.iter().enumerate() {
            remap[s] = new;
            kept[s].sort_unstable();
            let vecs: Vec<Vec<T>> = kept[s]
                .iter()
                .map(|&k| (0..ncols[s]).map(|c| vts[s].get(k, c).conj()).collect())
                .collect();
            offset.push(nmid);
            nmid += vecs.len();
            sectors.push((qns[s].clone(), vecs));
        }
        for v in rmap.values_mut() {
            v.0 = remap[v.0];
        }
        Ok(Bond {
            rmap,
            sectors,
            offset,
            nmid,
        })
    }

    fn build<T: Scalar>(&self) -> Result<Mpo> {
        let n = self.sites.len();
        let bonds: Vec<Bond<T>> = (0..=n)
            .map(|b| {
                if b == 0 || b == n {
                    Ok(Bond {
                        rmap: BTreeMap::new(),
                        sectors: Vec::new(),
                        offset: Vec::new(),
                        nmid: 0,
                    })
                } else {
                    self.bond::<T>(b)
                }
            })
            .collect::<Result<_>>()?;
        // Channel layout: start, mids by sector, end; the outer bonds keep
        // only start (b = 0) or end (b = n).
        let start = |b: usize| (b < n).then_some(0);
        let end = |b: usize| (b > 0).then(|| if b == n { 0 } else { bonds[b].nmid + 1 });
        let mid = |_: usize, k: usize| 1 + k;
        let width = |b: usize| if b == 0 || b == n { 1 } else { bonds[b].nmid + 2 };

        let links: Vec<Option<Index>> = (0..=n)
            .map(|b| {
                if b == 0 || b == n {
                    return Ok(None);
                }
                let tags = link_tags(b);
                if !self.qn {
                    return Ok(Some(Index::new(width(b), &tags)?));
                }
                let mut qs: Vec<QN> = vec![QN::empty()];
                for (q, vecs) in &bonds[b].sectors {
                    let left = self.flux.try_sub(q)?;
                    qs.extend(std::iter::repeat_n(left, vecs.len()));
                }
                qs.push(self.flux.clone());
                let mut space: Vec<(QN, usize)> = Vec::new();
                for q in qs {
                    match space.last_mut() {
                        Some((p, d)) if *p == q => *d += 1,
                        _ => space.push((q, 1)),
                    }
                }
                Ok(Some(Index::with_qns(space, &tags, Arrow::In)?))
            })
            .collect::<Result<_>>()?;

        let mut tensors = Vec::with_capacity(n);
        for j in 1..=n {
            let d = self.sites[j - 1].dim();
            let (wl, wr) = (width(j - 1), width(j));
            let mut w: BTreeMap<(usize, usize), Vec<C64>> = BTreeMap::new();
            let mut acc = |a: usize, c: usize, x: C64, m: &[C64]| {
                let e = w.entry((a, c)).or_insert_with(|| vec![C64::new(0.0, 0.0); d * d]);
                for (y, z) in e.iter_mut().zip(m) {
                    *y += x * z;
                }
            };
            let id: Vec<C64> = (0..d * d)
                .map(|k| {
                    if k / d == k % d {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            let one = C64::new(1.0, 0.0);
            if let (Some(a), Some(c)) = (start(j - 1), start(j)) {
                acc(a, c, one, &id);
            }
            if let (Some(a), Some(c)) = (end(j - 1), end(j)) {
                acc(a, c, one, &id);
            }
            let (prev, next) = (&bonds[j - 1], &bonds[j]);
            let through = |rest: &[Factor]| -> Vec<(usize, C64)> {
                let Some(&(s, pos)) = next.rmap.get(rest) else {
                    return Vec::new();
                };
                next.sectors[s]
                    .1
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (mid(j, next.offset[s] + k), v[pos].to_c64()))
                    .collect()
            };
            for t in &self.terms {
                let (first, last) = (t.factors[0].0, t.factors[t.factors.len() - 1].0);
                if first != j {
                    continue;
                }
                let m = &self.ops[j - 1][t.factors[0].1].mat;
                let a = start(j - 1).expect("a term starts left of the last bond");
                if last == j {
                    acc(a, end(j).expect("site j > 0"), t.coef, m);
                } else {
                    for (c, v) in through(&t.factors[1..]) {
                        acc(a, c, t.coef * v, m);
                    }
                }
            }
            for (r, &(s, pos)) in &prev.rmap {
                let (m, rest): (&[C64], &[Factor]) = if r[0].0 == j {
                    (&self.ops[j - 1][r[0].1].mat, &r[1..])
                } else {
                    (&id, &r[..])
                };
                for (k, v) in prev.sectors[s].1.iter().enumerate() {
                    let a = mid(j - 1, prev.offset[s] + k);
                    let x = v[pos].to_c64().conj();
                    if rest.is_empty() {
                        acc(a, end(j).expect("site j > 0"), x, m);
                    } else {
                        for (c, y) in through(rest) {
                            acc(a, c, x * y, m);
                        }
                    }
                }
            }

            let s = &self.sites[j - 1];
            let (sp, sd) = (s.prime(), s.dag());
            let left = links[j - 1].as_ref().map(Index::dag);
            let right = links[j].clone();
            let mut inds = Vec::with_capacity(4);
            inds.extend(left.clone());
            inds.push(sp.clone());
            inds.push(sd.clone());
            inds.extend(right.clone());
            let mut t = ITensor::new(&inds)?;
            let mut keys: Vec<&(usize, usize)> = w.keys().collect();
            keys.sort_unstable();
            for &(a, c) in keys {
                debug_assert!(a < wl && c < wr);
                let m = &w[&(a, c)];
                for r in 0..d {
                    for q in 0..d {
                        let v = m[r * d + q];
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let v = if self.complex { v } else { C64::new(v.re, 0.0) };
                        let mut iv = Vec::with_capacity(4);
                        if let Some(l) = &left {
                            iv.push(l.at(a + 1));
                        }
                        iv.push(sp.at(r + 1));
                        iv.push(sd.at(q + 1));
                        if let Some(l) = &right {
                            iv.push(l.at(c + 1));
                        }
                        t.set(&iv, v)?;
                    }
                }
            }
            tensors.push(t);
        }
        Ok(Mpo::from_parts(tensors, 0, n + 1))
    }
}

fn matmul(a: &[C64], b: &[C64], d: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for k in 0..d {
            let x = a[r * d + k];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..d {
                out[r * d + c] += x * b[k * d + c];
            }
        }
    }
    out
}

/// The Heisenberg chain `Σ Sz Sz + (S+ S- + S- S+)/2` on `n` sites.
pub fn heisenberg(n: usize) -> OpSum {
    let mut a = OpSum::new();
    for j in 1..n {
        a.add_ops(&[("Sz", j), ("Sz", j + 1)]).expect("nonempty term");
        a.add_term(0.5, &[("S+", j), ("S-", j + 1)]).expect("nonempty term");
        a.add_term(0.5, &[("S-", j), ("S+", j + 1)]).expect("nonempty term");
    }
    a
}
