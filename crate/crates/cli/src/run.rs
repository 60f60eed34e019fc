use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tnkit_core::seed_index_ids;
use tnkit_mps::{dmrg, product_mps, random_mps_qn, siteinds, DmrgOptions, Mps};

use crate::archive::{hex_digest, Archive, Record};
use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// Ground energy first, then excited energies.
    pub energies: Vec<f64>,
    /// Sweep lines of every run, as printed.
    pub log: Vec<String>,
    pub archive: Archive,
}

fn start_state(cfg: &RunConfig, sites: &[tnkit_core::Index], rng: &mut ChaCha8Rng) -> Result<Mps, CliError> {
    let states = cfg.initial_states();
    Ok(if cfg.init_linkdim == 1 {
        product_mps(sites, &states)?
    } else {
        random_mps_qn(sites, &states, cfg.init_linkdim, rng)?
    })
}

/// Runs the configured ground and excited state searches, prints the sweep
/// log and energies to stdout and writes the archive.
pub fn run(cfg: &RunConfig, timing: bool) -> Result<RunOutput, CliError> {
    seed_index_ids(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sites = siteinds(&cfg.sitetype, cfg.n, cfg.conserve_qns)?;
    let h = cfg.opsum()?.to_mpo(&sites)?;
    let sweeps = cfg.sweeps();

    let mut states: Vec<Mps> = Vec::new();
    let mut energies = Vec::new();
    let mut log = Vec::new();
    for k in 0..=cfg.excited {
        let psi0 = start_state(cfg, &sites, &mut rng)?;
        let opts = DmrgOptions {
            ortho_states: states.clone(),
            weight: cfg.weight,
            print: true,
            timing,
            ..Default::default()
        };
        let r = dmrg(&h, &psi0, &sweeps, opts)?;
        log.extend(r.log.iter().map(|rec| rec.line(timing)));
        if k == 0 {
            println!("G.S. energy = {:.12}", r.energy);
        } else {
            println!("Excited state {k} energy = {:.12}", r.energy);
        }
        energies.push(r.energy);
        states.push(r.psi);
    }

    let mut a = Archive::new();
    a.insert(
        "meta",
        Record::Meta(json!({
            "config": cfg,
            "energies": energies,
            "log": log,
        })),
    );
    a.insert("H", Record::Mpo(h));
    for (k, psi) in states.into_iter().enumerate() {
        let name = if k == 0 { "psi".to_string() } else { format!("psi_{k}") };
        a.insert(&name, Record::Mps(psi));
    }
    a.write(&cfg.output)?;
    Ok(RunOutput {
        energies,
        log,
        archive: a,
    })
}

/// A listing of the records in an archive.
pub fn inspect_report(bytes: &[u8]) -> Result<String, CliError> {
    let a = Archive::from_bytes(bytes)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "archive version {} sha256 {}",
        crate::archive::VERSION,
        hex_digest(bytes)
    );
    for (name, r) in &a.records {
        let _ = match r {
            Record::Index(i) => writeln!(s, "{name}: index {i:?}"),
            Record::Qn(q) => writeln!(s, "{name}: qn {q}"),
            Record::Tensor(t) => writeln!(
                s,
                "{name}: tensor order={} storage={:?} norm={:.12}",
                t.order(),
                t.storage_kind(),
                t.norm()
            ),
            Record::Mps(m) => writeln!(
                s,
                "{name}: mps sites={} maxlinkdim={} flux={} norm={:.12}",
                m.len(),
                m.maxlinkdim(),
                m.flux()?.map_or("none".into(), |q| q.to_string()),
                m.norm()?
            ),
            Record::Mpo(m) => writeln!(s, "{name}: mpo sites={} maxlinkdim={}", m.len(), m.maxlinkdim()),
            Record::Meta(v) => writeln!(
                s,
                "{name}: meta\n{}",
                serde_json::to_string_pretty(v).expect("JSON value")
            ),
        };
    }
    Ok(s)
}

/// `⟨op_j⟩` of an archived state, one `site value` line per site.
pub fn expect_report(bytes: &[u8], record: &str, op: &str) -> Result<String, CliError> {
    let a = Archive::from_bytes(bytes)?;
    let vals = a.mps(record)?.expect(op)?;
    Ok(vals
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{} {:.12}\n", j + 1, v))
        .collect())
}
