//! Reseeding mutates process-wide state, so this lives in its own binary.

use tnkit_core::{seed_index_ids, Index};

fn ids(n: usize) -> Vec<u64> {
    (0..n).map(|_| Index::new(2, "s").unwrap().id()).collect()
}

#[test]
fn reseeding_reproduces_ids() {
    seed_index_ids(42);
    let a = ids(100);
    seed_index_ids(42);
    assert_eq!(ids(100), a);
    seed_index_ids(43);
    assert_ne!(ids(100), a);
}
