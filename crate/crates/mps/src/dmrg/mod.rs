//! Two-site DMRG.

mod lanczos;
mod observer;
mod proj;
mod sweeps;

use std::fmt;
use std::time::Instant;

use tnkit_core::decomp::svd_tagged;
use tnkit_core::uniqueinds;

use crate::error::{MpsError, Result};
use crate::mps::{inner_mpo, link_tags, Mpo, Mps};

pub use lanczos::{dot, lanczos_ground, LanczosParams, LanczosResult};
pub use observer::{Direction, EnergyObserver, LocalObserver, NoObserver, Observer, StepInfo};
pub use proj::{ProjMpo, ProjMps, ProjSum};
pub use sweeps::Sweeps;

/// One line of the sweep log.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    /// `⟨ψ|H|ψ⟩` at the end of the sweep.
    pub energy: f64,
    pub maxlinkdim: usize,
    /// Wall time of the sweep in seconds.
    pub time: f64,
    /// Largest truncation error of the sweep.
    pub truncerr: f64,
}

impl SweepRecord {
    /// The log line, with the time replaced by zero when `timing` is off.
    pub fn line(&self, timing: bool) -> String {
        let t = if timing { self.time } else { 0.0 };
        format!(
            "After sweep {} energy={:.12} maxlinkdim={} time={:.3}",
            self.sweep, self.energy, self.maxlinkdim, t
        )
    }
}

impl fmt::Display for SweepRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line(true))
    }
}

pub struct DmrgOptions<'a> {
    pub observer: Option<&'a mut dyn Observer>,
    /// States to stay orthogonal to.
    pub ortho_states: Vec<Mps>,
    /// Penalty weight in units of the spectral scale
    /// `max(1, max_k |⟨φ_k|H|φ_k⟩|)`.
    pub weight: f64,
    /// Print each sweep line to stdout.
    pub print: bool,
    /// Report wall times in printed lines.
    pub timing: bool,
}

impl Default for DmrgOptions<'_> {
    fn default() -> Self {
        DmrgOptions {
            observer: None,
            ortho_states: Vec::new(),
            weight: 10.0,
            print: false,
            timing: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DmrgResult {
    pub energy: f64,
    pub psi: Mps,
    pub log: Vec<SweepRecord>,
}

/// Ground state of `h` starting from `psi0`.
pub fn dmrg(h: &Mpo, psi0: &Mps, sweeps: &Sweeps, opts: DmrgOptions<'_>) -> Result<DmrgResult> {
    dmrg_multi(std::slice::from_ref(h), psi0, sweeps, opts)
}

/// Ground state of `Σ hs`, each term kept as a separate MPO.
pub fn dmrg_multi(hs: &[Mpo], psi0: &Mps, sweeps: &Sweeps, mut opts: DmrgOptions<'_>) -> Result<DmrgResult> {
    sweeps.check()?;
    let n = psi0.len();
    if n < 2 {
        return Err(MpsError::TooShort);
    }
    if hs.is_empty() {
        return Err(MpsError::EmptyChain);
    }
    let mut psi = psi0.clone();
    psi.orthogonalize(1)?;
    psi.normalize()?;
    for h in hs {
        inner_mpo(&psi, h, &psi)?;
    }

    let mut scale: f64 = 1.0;
    for phi in &opts.ortho_states {
        let nn = phi.inner(phi)?.re;
        if nn <= 0.0 {
            return Err(MpsError::ZeroVector);
        }
        let mut e = 0.0;
        for h in hs {
            e += inner_mpo(phi, h, phi)?.re / nn;
        }
        scale = scale.max(e.abs());
    }
    let weight = opts.weight * scale;
    let penalties = opts
        .ortho_states
        .iter()
        .map(|phi| {
            let nn = phi.norm()?;
            proj::ProjMps::new(&phi.scaled(1.0 / nn), weight)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ph = ProjSum::new(hs.to_vec(), penalties)?;

    let mut log = Vec::with_capacity(sweeps.nsweep);
    let mut energy = f64::NAN;
    for sw in 1..=sweeps.nsweep {
        let t0 = Instant::now();
        let trunc = sweeps.trunc(sw);
        let lp = LanczosParams {
            krylov_dim: sweeps.krylov_dim,
            max_matvecs: sweeps.maxiter_at(sw),
            tol: sweeps.solver_tol,
        };
        let mut maxerr: f64 = 0.0;
        let bonds = (1..n)
            .map(|b| (b, Direction::LeftToRight))
            .chain((1..n).rev().map(|b| (b, Direction::RightToLeft)));
        for (b, dir) in bonds {
            ph.position(&psi, b)?;
            let theta = psi.get(b) * psi.get(b + 1);
            let sol = lanczos_ground(|x| ph.product(x), &theta, &lp)?;
            let rows = uniqueinds(psi.get(b), psi.get(b + 1));
            let tags = link_tags(b);
            let f = svd_tagged(&sol.vector, &rows, &trunc, &tags, &tags)?;
            maxerr = maxerr.max(f.spec.truncerr);
            let (l, r, lims) = match dir {
                Direction::LeftToRight => (f.u, &f.s * &f.v, (b, b + 2)),
                Direction::RightToLeft => (&f.u * &f.s, f.v, (b - 1, b + 1)),
            };
            psi.set(b, l);
            psi.set(b + 1, r);
            psi.set_ortho_lims(lims.0, lims.1);
            psi.normalize()?;
            if let Some(o) = opts.observer.as_deref_mut() {
                o.measure(&StepInfo {
                    sweep: sw,
                    bond: b,
                    direction: dir,
                    energy: sol.value,
                    truncerr: f.spec.truncerr,
                    psi: &psi,
                });
            }
        }
        // The run ends with the center on site 1 and environments valid
        // for bond 1, so the exact energy costs one more product.
        let theta = psi.get(1) * psi.get(2);
        energy = dot(&theta, &ph.product_h(&theta)?)?.re / theta.norm().powi(2);
        let rec = SweepRecord {
            sweep: sw,
            energy,
            maxlinkdim: psi.maxlinkdim(),
            time: t0.elapsed().as_secs_f64(),
            truncerr: maxerr,
        };
        if opts.print {
            println!("{}", rec.line(opts.timing));
        }
        log.push(rec);
        if let Some(o) = opts.observer.as_deref_mut() {
            let step = StepInfo {
                sweep: sw,
                bond: 1,
                direction: Direction::RightToLeft,
                energy,
                truncerr: maxerr,
                psi: &psi,
            };
            if o.checkdone(&step) {
                break;
            }
        }
    }
    Ok(DmrgResult { energy, psi, log })
}
