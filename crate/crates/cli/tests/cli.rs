use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tnkit_cli::archive::{hex_digest, Archive};
use tnkit_oracles::{eigenvalues, heisenberg_sector};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

fn tnkit(args: &[&str], seed: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tnkit"));
    c.args(args).env_remove(tnkit_cli::SEED_VAR);
    if let Some(s) = seed {
        c.env(tnkit_cli::SEED_VAR, s);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Copies a fixture into a fresh directory so the run writes its archive
/// there.
fn staged(name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(FIXTURES).join(name)).unwrap()).unwrap();
    edit(&mut v);
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    (dir, p)
}

fn energy_line(out: &str) -> f64 {
    let l = out.lines().find(|l| l.starts_with("G.S. energy = ")).unwrap();
    l["G.S. energy = ".len()..].parse().unwrap()
}

/// `After sweep <n> energy=<E> maxlinkdim=<χ> time=<s>`.
fn parse_sweep_line(l: &str) -> Option<(usize, f64, usize, f64)> {
    let rest = l.strip_prefix("After sweep ")?;
    let mut w = rest.split(' ');
    let n = w.next()?.parse().ok()?;
    let e = w.next()?.strip_prefix("energy=")?.parse().ok()?;
    let d = w.next()?.strip_prefix("maxlinkdim=")?.parse().ok()?;
    let t = w.next()?.strip_prefix("time=")?.parse().ok()?;
    w.next().is_none().then_some((n, e, d, t))
}

#[test]
fn log_matches_golden_file() {
    let (dir, cfg) = staged("heisenberg8.json", |_| {});
    let out = stdout(&tnkit(&["run", cfg.to_str().unwrap(), "--no-timing"], None));
    let golden = fs::read_to_string(Path::new(GOLDEN).join("heisenberg8.log")).unwrap();
    assert_eq!(out, golden);
    let sweeps: Vec<_> = out
        .lines()
        .filter(|l| l.starts_with("After"))
        .map(|l| parse_sweep_line(l).unwrap())
        .collect();
    assert_eq!(sweeps.len(), 4);
    assert!(sweeps.iter().enumerate().all(|(k, s)| s.0 == k + 1 && s.3 == 0.0));
    let ed = eigenvalues(&heisenberg_sector(8, 4).0)[0];
    assert!((energy_line(&out) - ed).abs() < 1e-9 * ed.abs());
    assert!(dir.path().join("heisenberg8.tnk").exists());
}

#[test]
fn timed_lines_keep_the_grammar() {
    let (_dir, cfg) = staged("heisenberg8.json", |v| v["sweeps"]["nsweep"] = 2.into());
    let out = stdout(&tnkit(&["run", cfg.to_str().unwrap()], None));
    let lines: Vec<_> = out.lines().filter(|l| l.starts_with("After")).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| parse_sweep_line(l).is_some_and(|s| s.3 >= 0.0)));
}

#[test]
fn reruns_are_identical_and_seed_override_changes_the_run() {
    let (dir, cfg) = staged("heisenberg8.json", |_| {});
    let archive = dir.path().join("heisenberg8.tnk");
    let run = |seed| {
        let out = stdout(&tnkit(&["run", cfg.to_str().unwrap(), "--no-timing"], seed));
        (out, hex_digest(&fs::read(&archive).unwrap()))
    };
    let a = run(None);
    let b = run(None);
    assert_eq!(a, b);
    let c = run(Some("42"));
    assert_eq!(a, c);
    let d = run(Some("7"));
    assert_ne!(a.1, d.1);
}

#[test]
fn archive_holds_the_result() {
    let (dir, cfg) = staged("heisenberg8.json", |v| v["excited"] = 1.into());
    let out = stdout(&tnkit(&["run", cfg.to_str().unwrap(), "--no-timing"], None));
    let path = dir.path().join("heisenberg8.tnk");
    let a = Archive::read(&path).unwrap();
    let meta = a.meta("meta").unwrap();
    let es: Vec<f64> = serde_json::from_value(meta["energies"].clone()).unwrap();
    assert_eq!(es.len(), 2);
    assert!((es[0] - energy_line(&out)).abs() < 1e-11);
    let ed = eigenvalues(&heisenberg_sector(8, 4).0);
    assert!((es[1] - ed[1]).abs() < 1e-6 * ed[1].abs());
    let psi = a.mps("psi").unwrap();
    assert!((psi.norm().unwrap() - 1.0).abs() < 1e-12);
    assert!(a.mps("psi_1").is_ok() && a.mpo("H").is_ok());

    let listing = stdout(&tnkit(&["inspect", path.to_str().unwrap()], None));
    assert!(listing.contains("psi: mps sites=8"));
    assert!(listing.contains("H: mpo sites=8 maxlinkdim=5"));
    let sz = stdout(&tnkit(&["expect", path.to_str().unwrap(), "--op", "Sz"], None));
    let vals: Vec<f64> = sz
        .lines()
        .map(|l| l.split(' ').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 8);
    assert!(vals.iter().sum::<f64>().abs() < 1e-9);
}

#[test]
fn custom_and_tfim_models_run() {
    let (dir, cfg) = staged("heisenberg8.json", |v| {
        v["model"] = serde_json::json!({ "opsum": "xy6.opsum" });
        v["n"] = 6.into();
    });
    fs::copy(Path::new(FIXTURES).join("xy6.opsum"), dir.path().join("xy6.opsum")).unwrap();
    let out = stdout(&tnkit(&["run", cfg.to_str().unwrap(), "--no-timing"], None));
    assert!(energy_line(&out) < 0.0);

    let (_dir, cfg) = staged("heisenberg8.json", |v| {
        v["model"] = "tfim".into();
        v["conserve_qns"] = false.into();
        v["init"] = "up".into();
        v["h"] = 0.5.into();
    });
    let out = stdout(&tnkit(&["run", cfg.to_str().unwrap(), "--no-timing"], None));
    assert!(energy_line(&out) < -7.0);
}

#[test]
fn failures_map_to_exit_codes() {
    let code = |o: Output| o.status.code().unwrap();
    let (_d, cfg) = staged("heisenberg8.json", |v| v["model"] = "potts".into());
    assert_eq!(code(tnkit(&["run", cfg.to_str().unwrap()], None)), 2);
    let (_d, cfg) = staged("heisenberg8.json", |v| v["sweeps"]["maxdim"] = serde_json::json!([]));
    assert_eq!(code(tnkit(&["run", cfg.to_str().unwrap()], Some("x"))), 2);
    assert_eq!(code(tnkit(&["run", "/nonexistent/config.json"], None)), 4);
    let (d, cfg) = staged("heisenberg8.json", |v| v["init"] = "Sideways".into());
    assert_eq!(code(tnkit(&["run", cfg.to_str().unwrap()], None)), 3);

    let bad = d.path().join("bad.tnk");
    fs::write(&bad, b"TNKARCH\0garbage").unwrap();
    assert_eq!(code(tnkit(&["inspect", bad.to_str().unwrap()], None)), 4);
    let (dir, cfg) = staged("heisenberg8.json", |v| v["sweeps"]["nsweep"] = 1.into());
    stdout(&tnkit(&["run", cfg.to_str().unwrap()], None));
    let ok = dir.path().join("heisenberg8.tnk");
    assert_eq!(
        code(tnkit(
            &["expect", ok.to_str().unwrap(), "--op", "Sz", "--record", "nope"],
            None
        )),
        3
    );
    assert_eq!(code(tnkit(&["expect", ok.to_str().unwrap(), "--op", "Bogus"], None)), 3);
}
