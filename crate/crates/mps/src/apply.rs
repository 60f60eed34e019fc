//! Applying an MPO to an MPS and multiplying MPOs.

use tnkit_core::decomp::{eigen_hermitian, qr_tagged};
use tnkit_core::{commoninds, uniqueinds, uniqueinds_of, ITensor, TruncParams};

use crate::error::{MpsError, Result};
use crate::mps::{link_tags, swap_ind, Chain, Mpo, Mps};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApplyMethod {
    /// Contract site by site, then compress the doubled links.
    Naive,
    /// Truncate by diagonalizing reduced density matrices of the product.
    DensityMatrix,
}

/// Site tensors `W_j * psi_j` with the output site unprimed.
fn site_products(w: &Mpo, psi: &Mps) -> Result<Vec<ITensor>> {
    if w.len() != psi.len() {
        return Err(MpsError::Mismatch(format!(
            "MPO length {}, MPS length {}",
            w.len(),
            psi.len()
        )));
    }
    let w = w.sim_links()?;
    (1..=psi.len())
        .map(|j| {
            let s = psi.siteind(j);
            if !w.get(j).hasinds(&[s.clone(), s.prime()]) {
                return Err(MpsError::Mismatch(format!("MPO does not act on site index {j}")));
            }
            swap_ind(&(w.get(j) * psi.get(j)), &s.prime(), &s)
        })
        .collect()
}

/// Replaces every pair of parallel links by one, with a left-to-right QR
/// sweep. The result is left-orthogonal up to the last site.
fn fuse_links<K>(mut ts: Vec<ITensor>) -> Result<Chain<K>> {
    let n = ts.len();
    for b in 1..n {
        let rows = uniqueinds(&ts[b - 1], &ts[b]);
        let (q, r, _) = qr_tagged(&ts[b - 1], &rows, &link_tags(b))?;
        ts[b] = &r * &ts[b];
        ts[b - 1] = q;
    }
    Ok(Chain::from_parts(ts, n - 1, n + 1))
}

/// `W|psi>` compressed with `p`.
pub fn apply_mpo(w: &Mpo, psi: &Mps, method: ApplyMethod, p: &TruncParams) -> Result<Mps> {
    let ks = site_products(w, psi)?;
    match method {
        ApplyMethod::Naive => {
            let mut out: Mps = fuse_links(ks)?;
            out.truncate(p)?;
            Ok(out)
        }
        ApplyMethod::DensityMatrix => density_matrix(ks, p),
    }
}

fn density_matrix(ks: Vec<ITensor>, p: &TruncParams) -> Result<Mps> {
    let n = ks.len();
    if n == 1 {
        return Ok(Mps::from_parts(ks, 0, 2));
    }
    let links: Vec<_> = (0..n - 1).map(|b| commoninds(&ks[b], &ks[b + 1])).collect();
    // renv[j]: <K|K> over the 0-based sites j.., bra links primed.
    let mut renv: Vec<Option<ITensor>> = vec![None; n + 1];
    for j in (1..n).rev() {
        let mut bl = links[j - 1].clone();
        bl.extend(links.get(j).cloned().unwrap_or_default());
        let bra = ks[j].dag().prime_inds(&bl)?;
        let kb = &ks[j] * &bra;
        renv[j] = Some(match &renv[j + 1] {
            Some(r) => &kb * r,
            None => kb,
        });
    }
    let mut out = Vec::with_capacity(n);
    let mut c = ks[0].clone();
    for j in 0..n - 1 {
        let rows = uniqueinds_of(&c, &links[j]);
        let all: Vec<_> = c.inds().to_vec();
        let bra = c.dag().prime_inds(&all)?;
        let r = renv[j + 1].as_ref().expect("built above");
        let rho = &(&c * r) * &bra;
        let e = eigen_hermitian(&rho, &rows, p)?;
        let tagged = e.link.set_tags(&link_tags(j + 1))?;
        let u = swap_ind(&e.u, &e.link, &tagged)?;
        c = &(&u.dag() * &c) * &ks[j + 1];
        out.push(u);
    }
    out.push(c);
    Ok(Mps::from_parts(out, n - 1, n + 1))
}

/// The operator product `a * b` (apply `b` first), compressed with `p`.
pub fn mpo_contract(a: &Mpo, b: &Mpo, p: &TruncParams) -> Result<Mpo> {
    if a.len() != b.len() {
        return Err(MpsError::Mismatch(format!("MPO lengths {} and {}", a.len(), b.len())));
    }
    let a = a.sim_links()?;
    let ts = (1..=b.len())
        .map(|j| {
            let s = b.siteind(j);
            if !a.get(j).hasinds(&[s.clone(), s.prime()]) || !b.get(j).hasind(&s.prime()) {
                return Err(MpsError::Mismatch(format!("MPOs act on different site {j}")));
            }
            let up = a.get(j).prime_inds(&[s.clone(), s.prime()])?;
            Ok((&up * b.get(j)).map_prime(2, 1)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Mpo = fuse_links(ts)?;
    out.truncate(p)?;
    Ok(out)
}
