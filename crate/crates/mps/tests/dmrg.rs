mod common;

use common::{dense_vector, elements, neel};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnkit_core::{ITensor, Index};
use tnkit_mps::dmrg::{lanczos_ground, EnergyObserver, LanczosParams, LocalObserver, Observer, ProjMpo, StepInfo};
use tnkit_mps::{
    dmrg, dmrg_multi, heisenberg, inner_mpo, random_mps, random_mps_qn, siteinds, DmrgOptions, Mps, OpSum, Sweeps,
};
use tnkit_oracles::{eigenvalues, heisenberg_kron, heisenberg_sector};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn schedule(n: usize) -> Sweeps {
    Sweeps::new(n).maxdim(&[10, 20, 100]).cutoff(&[1e-11])
}

fn start(n: usize, qn: bool, seed: u64) -> (Vec<Index>, Mps) {
    let s = siteinds("S=1/2", n, qn).unwrap();
    let psi = if qn {
        random_mps_qn(&s, &neel(n), 4, &mut rng(seed)).unwrap()
    } else {
        random_mps(&s, 4, &mut rng(seed)).unwrap()
    };
    (s, psi)
}

#[test]
fn lanczos_matches_dense_eigensolver() {
    let mut r = rng(11);
    for _ in 0..5 {
        let d = 16;
        let a = DMatrix::<C64>::from_fn(d, d, |_, _| {
            C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
        });
        let h = &a + a.adjoint();
        let i = Index::new(d, "v").unwrap();
        let data: Vec<C64> = (0..d * d).map(|k| h[(k / d, k % d)]).collect();
        let ht = ITensor::from_vec_complex(&[i.prime(), i.clone()], data).unwrap();
        let x0 = ITensor::random(tnkit_core::ElType::Complex, std::slice::from_ref(&i), &mut r).unwrap();
        let p = LanczosParams {
            krylov_dim: 16,
            max_matvecs: 200,
            tol: 1e-14,
        };
        let res = lanczos_ground(|x| Ok((&ht * x).noprime()?), &x0, &p).unwrap();
        let want = h.clone().symmetric_eigen().eigenvalues.min();
        assert!((res.value - want).abs() < 1e-10, "{} vs {want}", res.value);
        let hx = (&ht * &res.vector).noprime().unwrap();
        assert!((&hx - &res.vector.scaled(res.value)).norm() < 1e-8);
    }
}

/// The projected operator on bond `b`, applied to each unit vector of the
/// bond space, equals the dense Hamiltonian sandwiched by the embedding.
#[test]
fn projected_operator_matches_dense_projection() {
    let n = 4;
    let s = siteinds("S=1/2", n, false).unwrap();
    let h = heisenberg(n).to_mpo(&s).unwrap();
    let hd = heisenberg_kron(n).map(|x| C64::new(x, 0.0));
    for b in 1..n {
        let mut psi = random_mps(&s, 2, &mut rng(b as u64)).unwrap();
        psi.orthogonalize(b).unwrap();
        let mut ph = ProjMpo::new(h.clone());
        ph.position(&psi, b).unwrap();
        let theta = psi.get(b) * psi.get(b + 1);
        let inds = theta.inds().to_vec();
        let dim: usize = inds.iter().map(Index::dim).product();
        let embed = |t: &ITensor| {
            let mut c = psi.clone();
            c.set(b, t.clone());
            c.set(b + 1, ITensor::scalar_tensor(1.0));
            let full = c.tensors().iter().fold(ITensor::scalar_tensor(1.0), |a, x| &a * x);
            nalgebra::DVector::from_vec(elements(&full, &s))
        };
        let units: Vec<ITensor> = (0..dim)
            .map(|k| {
                let mut u = ITensor::from_vec(&inds, vec![0.0; dim]).unwrap();
                let mut rem = k;
                let mut ivs = Vec::new();
                for i in inds.iter().rev() {
                    ivs.push(i.at(rem % i.dim() + 1));
                    rem /= i.dim();
                }
                ivs.reverse();
                u.set(&ivs, 1.0).unwrap();
                u
            })
            .collect();
        for x in &units {
            let hx = ph.product(x).unwrap();
            for y in &units {
                let got = (&y.dag() * &hx).scalar().unwrap();
                let want = embed(y).dotc(&(&hd * embed(x)));
                assert!((got - want).norm() < 1e-12, "bond {b}");
            }
        }
    }
}

#[test]
fn environments_update_incrementally() {
    let n = 8;
    let s = siteinds("S=1/2", n, false).unwrap();
    let h = heisenberg(n).to_mpo(&s).unwrap();
    let mut psi = random_mps(&s, 4, &mut rng(2)).unwrap();
    psi.orthogonalize(1).unwrap();
    let mut ph = ProjMpo::new(h);
    ph.position(&psi, 1).unwrap();
    assert_eq!(ph.updates(), n - 2);
    for b in 2..n {
        psi.orthogonalize(b).unwrap();
        ph.position(&psi, b).unwrap();
        assert_eq!(ph.updates(), n - 2 + b - 1);
    }
    psi.orthogonalize(1).unwrap();
    assert!(ph.position(&psi, 5).is_err());
}

#[test]
fn ground_energy_matches_exact_diagonalization() {
    let n = 12;
    let ed = eigenvalues(&heisenberg_sector(n, n / 2).0)[0];
    let mut es = Vec::new();
    for qn in [false, true] {
        let (s, psi0) = start(n, qn, 1);
        let h = heisenberg(n).to_mpo(&s).unwrap();
        let r = dmrg(&h, &psi0, &schedule(5), DmrgOptions::default()).unwrap();
        assert!(((r.energy - ed) / ed).abs() < 1e-6, "qn={qn}: {} vs {ed}", r.energy);
        es.push(r.energy);
    }
    assert!((es[0] - es[1]).abs() < 1e-8);
}

#[test]
fn sweep_energies_do_not_increase() {
    let (s, psi0) = start(10, false, 3);
    let h = heisenberg(10).to_mpo(&s).unwrap();
    let r = dmrg(
        &h,
        &psi0,
        &Sweeps::new(6).maxdim(&[2, 4, 8, 16, 32]).cutoff(&[1e-12]),
        DmrgOptions::default(),
    )
    .unwrap();
    for w in r.log.windows(2) {
        assert!(
            w[1].energy <= w[0].energy + 1e-9,
            "{} then {}",
            w[0].energy,
            w[1].energy
        );
    }
}

#[test]
fn returned_energy_is_the_expectation_value() {
    for qn in [false, true] {
        let (s, psi0) = start(10, qn, 4);
        let h = heisenberg(10).to_mpo(&s).unwrap();
        let r = dmrg(&h, &psi0, &schedule(3), DmrgOptions::default()).unwrap();
        let e = inner_mpo(&r.psi, &h, &r.psi).unwrap().re / r.psi.inner(&r.psi).unwrap().re;
        assert!((r.energy - e).abs() < 1e-9);
        assert!((r.psi.norm().unwrap() - 1.0).abs() < 1e-12);
        if qn {
            assert_eq!(r.psi.flux().unwrap(), psi0.flux().unwrap());
        }
    }
}

#[test]
fn split_hamiltonian_matches_joint() {
    let n = 10;
    let (s, psi0) = start(n, true, 5);
    let (mut h1, mut h2) = (OpSum::new(), OpSum::new());
    for j in 1..n {
        h1.add_ops(&[("Sz", j), ("Sz", j + 1)]).unwrap();
        h2.add_term(0.5, &[("S+", j), ("S-", j + 1)]).unwrap();
        h2.add_term(0.5, &[("S-", j), ("S+", j + 1)]).unwrap();
    }
    let joint = dmrg(
        &heisenberg(n).to_mpo(&s).unwrap(),
        &psi0,
        &schedule(5),
        DmrgOptions::default(),
    )
    .unwrap();
    let hs = [h1.to_mpo(&s).unwrap(), h2.to_mpo(&s).unwrap()];
    let split = dmrg_multi(&hs, &psi0, &schedule(5), DmrgOptions::default()).unwrap();
    assert!(
        (joint.energy - split.energy).abs() < 1e-8,
        "{} vs {}",
        joint.energy,
        split.energy
    );
}

#[test]
fn excited_state_matches_exact_diagonalization() {
    let n = 8;
    let ed = eigenvalues(&heisenberg_sector(n, n / 2).0);
    let (s, psi0) = start(n, true, 6);
    let h = heisenberg(n).to_mpo(&s).unwrap();
    let sw = Sweeps::new(10).maxdim(&[10, 20, 100]).cutoff(&[1e-12]);
    let g = dmrg(&h, &psi0, &sw, DmrgOptions::default()).unwrap();
    let psi1 = random_mps_qn(&s, &neel(n), 4, &mut rng(7)).unwrap();
    let opts = DmrgOptions {
        ortho_states: vec![g.psi.clone()],
        ..Default::default()
    };
    let x = dmrg(&h, &psi1, &sw, opts).unwrap();
    assert!(((g.energy - ed[0]) / ed[0]).abs() < 1e-6);
    assert!(((x.energy - ed[1]) / ed[1]).abs() < 1e-6, "{} vs {}", x.energy, ed[1]);
    assert!(g.psi.inner(&x.psi).unwrap().norm() <= 1e-6);
}

struct Counter {
    measured: usize,
    checked: usize,
    stop_after: usize,
}

impl Observer for Counter {
    fn measure(&mut self, step: &StepInfo<'_>) {
        assert!(step.psi.ortho_center().is_some());
        self.measured += 1;
    }

    fn checkdone(&mut self, _: &StepInfo<'_>) -> bool {
        self.checked += 1;
        self.checked == self.stop_after
    }
}

#[test]
fn observer_sees_every_step_and_can_stop() {
    let n = 6;
    let (s, psi0) = start(n, false, 8);
    let h = heisenberg(n).to_mpo(&s).unwrap();
    let mut c = Counter {
        measured: 0,
        checked: 0,
        stop_after: 2,
    };
    let r = dmrg(
        &h,
        &psi0,
        &schedule(5),
        DmrgOptions {
            observer: Some(&mut c),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(r.log.len(), 2);
    assert_eq!(c.checked, 2);
    assert_eq!(c.measured, 2 * 2 * (n - 1));

    let mut e = EnergyObserver::new(1e-10);
    let r = dmrg(
        &h,
        &psi0,
        &schedule(30),
        DmrgOptions {
            observer: Some(&mut e),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.log.len() < 30);

    let mut m = LocalObserver::new("Sz");
    dmrg(
        &h,
        &psi0,
        &schedule(1),
        DmrgOptions {
            observer: Some(&mut m),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(m.values.len(), 2 * (n - 1));
}

#[test]
fn log_lines_have_the_stable_format() {
    let (s, psi0) = start(6, false, 9);
    let h = heisenberg(6).to_mpo(&s).unwrap();
    let r = dmrg(&h, &psi0, &schedule(2), DmrgOptions::default()).unwrap();
    let line = r.log[1].line(false);
    assert!(line.starts_with("After sweep 2 energy=-"));
    assert!(line.ends_with(" time=0.000"));
    let v = dense_vector(&r.psi);
    assert!((v.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn rejects_bad_inputs() {
    let (s, psi0) = start(4, false, 10);
    let h = heisenberg(4).to_mpo(&s).unwrap();
    assert!(dmrg(&h, &psi0, &Sweeps::new(0), DmrgOptions::default()).is_err());
    let (_, other) = start(5, false, 10);
    assert!(dmrg(&h, &other, &schedule(1), DmrgOptions::default()).is_err());
    let s1 = siteinds("S=1/2", 1, false).unwrap();
    let one = random_mps(&s1, 1, &mut rng(1)).unwrap();
    let h1 = heisenberg(1).to_mpo(&s1);
    if let Ok(h1) = h1 {
        assert!(dmrg(&h1, &one, &schedule(1), DmrgOptions::default()).is_err());
    }
}
