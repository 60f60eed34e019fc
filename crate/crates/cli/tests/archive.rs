mod common;

use common::{random_chain, random_index, random_qn, random_tensors};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tnkit_cli::archive::{same_chain, same_index, same_tensor, Archive, ArchiveError, Record};

const CASES: usize = 1000;

fn round_trip(a: &Archive) -> Archive {
    Archive::from_bytes(&a.to_bytes()).unwrap()
}

#[test]
fn indices_and_qns_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut a = Archive::new();
    let mut want = Vec::new();
    for k in 0..CASES {
        let i = random_index(&mut rng);
        let q = random_qn(&mut rng);
        a.insert(&format!("i{k}"), Record::Index(i.clone()));
        a.insert(&format!("q{k}"), Record::Qn(q.clone()));
        want.push((i, q));
    }
    let b = round_trip(&a);
    for (k, (i, q)) in want.iter().enumerate() {
        assert!(same_index(b.index(&format!("i{k}")).unwrap(), i), "index {k}");
        assert_eq!(b.qn(&format!("q{k}")).unwrap(), q, "qn {k}");
    }
}

#[test]
fn tensors_of_every_storage_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ts = random_tensors(&mut rng, CASES);
    let mut a = Archive::new();
    for (k, t) in ts.iter().enumerate() {
        a.insert(&format!("t{k}"), Record::Tensor(t.clone()));
    }
    let b = round_trip(&a);
    let kinds: std::collections::BTreeSet<String> = ts.iter().map(|t| format!("{:?}", t.storage_kind())).collect();
    assert_eq!(kinds.len(), 6, "storage kinds covered: {kinds:?}");
    for (k, t) in ts.iter().enumerate() {
        assert!(same_tensor(b.tensor(&format!("t{k}")).unwrap(), t), "tensor {k}");
    }
}

#[test]
fn chains_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut a = Archive::new();
    let mut states = Vec::new();
    let mut ops = Vec::new();
    for k in 0..CASES {
        let (psi, h) = random_chain(&mut rng);
        a.insert(&format!("psi{k}"), Record::Mps(psi.clone()));
        a.insert(&format!("h{k}"), Record::Mpo(h.clone()));
        states.push(psi);
        ops.push(h);
    }
    let b = round_trip(&a);
    for k in 0..CASES {
        let psi = b.mps(&format!("psi{k}")).unwrap();
        assert!(same_chain(psi, &states[k]), "mps {k}");
        assert_eq!(psi.flux().unwrap(), states[k].flux().unwrap());
        assert!(same_chain(b.mpo(&format!("h{k}")).unwrap(), &ops[k]), "mpo {k}");
    }
}

#[test]
fn files_and_metadata_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.tnk");
    let mut a = Archive::new();
    let meta = serde_json::json!({"energies": [-1.5, f64::MIN_POSITIVE], "log": ["x"]});
    a.insert("meta", Record::Meta(meta.clone()));
    a.write(&path).unwrap();
    let b = Archive::read(&path).unwrap();
    assert_eq!(b.meta("meta").unwrap(), &meta);
    assert!(matches!(
        Archive::read(&dir.path().join("missing")),
        Err(ArchiveError::Io(_))
    ));
}
