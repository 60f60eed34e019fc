//! Environments of the two-site effective Hamiltonian.

use tnkit_core::ITensor;

use crate::error::{MpsError, Result};
use crate::mps::{Mpo, Mps};

/// Cached left and right environments. `l[j]` covers sites `1..=j` and
/// `r[j]` covers `j..=n`; `l[0]` and `r[n + 1]` are trivial.
#[derive(Clone, Debug)]
struct Envs {
    l: Vec<Option<ITensor>>,
    r: Vec<Option<ITensor>>,
    lvalid: usize,
    rvalid: usize,
    updates: usize,
}

impl Envs {
    fn new(n: usize) -> Self {
        Envs {
            l: vec![None; n + 2],
            r: vec![None; n + 2],
            lvalid: 0,
            rvalid: n + 1,
            updates: 0,
        }
    }

    /// Brings `l[b - 1]` and `r[b + 2]` up to date, then withdraws the
    /// environments that overlap the bond, since its tensors are about to
    /// change.
    fn position(
        &mut self,
        b: usize,
        mut grow_left: impl FnMut(Option<&ITensor>, usize) -> ITensor,
        mut grow_right: impl FnMut(Option<&ITensor>, usize) -> ITensor,
    ) {
        while self.lvalid < b - 1 {
            let j = self.lvalid + 1;
            self.l[j] = Some(grow_left(self.l[j - 1].as_ref(), j));
            self.lvalid = j;
            self.updates += 1;
        }
        while self.rvalid > b + 2 {
            let j = self.rvalid - 1;
            self.r[j] = Some(grow_right(self.r[j + 1].as_ref(), j));
            self.rvalid = j;
            self.updates += 1;
        }
        self.lvalid = b - 1;
        self.rvalid = b + 2;
    }

    fn left(&self, b: usize) -> Option<&ITensor> {
        self.l[b - 1].as_ref()
    }

    fn right(&self, b: usize) -> Option<&ITensor> {
        self.r[b + 2].as_ref()
    }
}

fn times(e: Option<&ITensor>, t: &ITensor) -> ITensor {
    match e {
        Some(e) => e * t,
        None => t.clone(),
    }
}

fn check_bond(psi: &Mps, n: usize, b: usize) -> Result<()> {
    if b == 0 || b + 1 > n {
        return Err(MpsError::SiteOutOfRange { site: b, n });
    }
    if psi.llim() + 1 < b || psi.rlim() > b + 2 {
        return Err(MpsError::CenterMisplaced {
            bond: b,
            llim: psi.llim(),
            rlim: psi.rlim(),
        });
    }
    Ok(())
}

/// `H` projected onto the two-site space of a bond of `psi`.
#[derive(Clone, Debug)]
pub struct ProjMpo {
    h: Mpo,
    envs: Envs,
    bond: usize,
}

impl ProjMpo {
    pub fn new(h: Mpo) -> Self {
        let n = h.len();
        ProjMpo {
            h,
            envs: Envs::new(n),
            bond: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Environment tensors computed so far.
    pub fn updates(&self) -> usize {
        self.envs.updates
    }

    /// Prepares `product` for bond `(b, b + 1)`. Only environments outside
    /// the bond are read from `psi`.
    pub fn position(&mut self, psi: &Mps, b: usize) -> Result<()> {
        check_bond(psi, self.h.len(), b)?;
        if psi.len() != self.h.len() {
            return Err(MpsError::Mismatch(format!(
                "MPO length {}, MPS length {}",
                self.h.len(),
                psi.len()
            )));
        }
        let h = &self.h;
        self.envs.position(
            b,
            |e, j| {
                let a = psi.get(j);
                &(&times(e, a) * h.get(j)) * &a.dag().prime()
            },
            |e, j| {
                let a = psi.get(j);
                &(&times(e, a) * h.get(j)) * &a.dag().prime()
            },
        );
        self.bond = b;
        Ok(())
    }

    /// `H_eff θ` for the current bond, with the same indices as `θ`.
    pub fn product(&self, theta: &ITensor) -> Result<ITensor> {
        let b = self.bond;
        let mut t = times(self.envs.left(b), theta);
        t = &t * self.h.get(b);
        t = &t * self.h.get(b + 1);
        if let Some(r) = self.envs.right(b) {
            t = &t * r;
        }
        Ok(t.noprime()?)
    }
}

/// Penalty `w |φ⟩⟨φ|` projected onto a bond of `psi`.
#[derive(Clone, Debug)]
pub struct ProjMps {
    /// `φ` conjugated, with fresh links.
    bra: Mps,
    weight: f64,
    envs: Envs,
    bond: usize,
}

impl ProjMps {
    pub fn new(phi: &Mps, weight: f64) -> Result<Self> {
        Ok(ProjMps {
            bra: phi.dag().sim_links()?,
            weight,
            envs: Envs::new(phi.len()),
            bond: 0,
        })
    }

    pub fn updates(&self) -> usize {
        self.envs.updates
    }

    pub fn position(&mut self, psi: &Mps, b: usize) -> Result<()> {
        check_bond(psi, self.bra.len(), b)?;
        crate::mps::check_sites(psi, &self.bra)?;
        let bra = &self.bra;
        self.envs.position(
            b,
            |e, j| &times(e, psi.get(j)) * bra.get(j),
            |e, j| &times(e, psi.get(j)) * bra.get(j),
        );
        self.bond = b;
        Ok(())
    }

    /// `⟨φ|` restricted to the bond space.
    fn projected_bra(&self) -> ITensor {
        let b = self.bond;
        let mut z = times(self.envs.left(b), self.bra.get(b));
        z = &z * self.bra.get(b + 1);
        if let Some(r) = self.envs.right(b) {
            z = &z * r;
        }
        z
    }

    /// Adds `w ⟨φ|θ⟩ |φ⟩` to `out`.
    pub fn add_product(&self, theta: &ITensor, out: ITensor) -> Result<ITensor> {
        let z = self.projected_bra();
        if z.norm() == 0.0 {
            return Ok(out);
        }
        let ov = (&z * theta).scalar()?;
        if ov.norm() == 0.0 {
            return Ok(out);
        }
        Ok(out.axpy(ov * self.weight, &z.dag())?)
    }
}

/// Sum of several projected MPOs plus penalty projectors.
#[derive(Clone, Debug)]
pub struct ProjSum {
    pub(crate) hs: Vec<ProjMpo>,
    pub(crate) penalties: Vec<ProjMps>,
}

impl ProjSum {
    pub fn new(hs: Vec<Mpo>, penalties: Vec<ProjMps>) -> Result<Self> {
        if hs.is_empty() {
            return Err(MpsError::EmptyChain);
        }
        let n = hs[0].len();
        if hs.iter().any(|h| h.len() != n) {
            return Err(MpsError::Mismatch("MPOs of different lengths".into()));
        }
        Ok(ProjSum {
            hs: hs.into_iter().map(ProjMpo::new).collect(),
            penalties,
        })
    }

    pub fn position(&mut self, psi: &Mps, b: usize) -> Result<()> {
        for h in &mut self.hs {
            h.position(psi, b)?;
        }
        for p in &mut self.penalties {
            p.position(psi, b)?;
        }
        Ok(())
    }

    /// `Σ H_eff θ`, without penalties.
    pub fn product_h(&self, theta: &ITensor) -> Result<ITensor> {
        let mut out = self.hs[0].product(theta)?;
        for h in &self.hs[1..] {
            out = out.try_add(&h.product(theta)?)?;
        }
        Ok(out)
    }

    /// The full effective operator, penalties included.
    pub fn product(&self, theta: &ITensor) -> Result<ITensor> {
        let mut out = self.product_h(theta)?;
        for p in &self.penalties {
            out = p.add_product(theta, out)?;
        }
        Ok(out)
    }

    pub fn updates(&self) -> usize {
        self.hs.iter().map(ProjMpo::updates).sum::<usize>() + self.penalties.iter().map(ProjMps::updates).sum::<usize>()
    }
}
