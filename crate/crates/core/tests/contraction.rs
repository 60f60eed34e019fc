mod common;

use common::{contract_vs_oracle, dense_pair, elements, qn_index, qn_pair, random_blocks};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tnkit_core::{delta, Arrow, ElType, ITensor, Index};
use tnkit_oracles::rel_diff;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dense_family_matches_nested_loops(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = dense_pair(&mut rng);
        let (got, want) = contract_vs_oracle(&a, &b);
        prop_assert!(rel_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn block_sparse_matches_nested_loops(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = qn_pair(&mut rng);
        let (got, want) = contract_vs_oracle(&a, &b);
        prop_assert!(rel_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn contraction_commutes_up_to_layout(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = if seed % 2 == 0 { dense_pair(&mut rng) } else { qn_pair(&mut rng) };
        let ab = &a * &b;
        let ba = &b * &a;
        prop_assert!(ab.hasinds(ba.inds()) && ba.hasinds(ab.inds()));
        prop_assert_eq!(elements(&ab, ab.inds()), elements(&ba, ab.inds()));
    }

    #[test]
    fn flux_adds_under_contraction(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = qn_pair(&mut rng);
        let c = &a * &b;
        if c.order() > 0 {
            let (fa, fb) = (a.flux().unwrap(), b.flux().unwrap());
            let c = c.to_blocks().unwrap();
            if let (Some(fa), Some(fb), Some(fc)) = (fa, fb, c.flux().unwrap()) {
                prop_assert_eq!(fc, fa.try_add(&fb).unwrap());
            }
        }
    }

    #[test]
    fn block_sparse_equals_densified(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = qn_pair(&mut rng);
        let c = &a * &b;
        let d = &a.densify() * &b.densify();
        let got = elements(&c.densify(), c.inds());
        let want = elements(&d, c.inds());
        prop_assert!(rel_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn addition_is_elementwise_under_permutation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + (seed % 4) as usize;
        let inds: Vec<Index> = (0..n).map(|k| Index::new(1 + k % 3, "a").unwrap()).collect();
        let mut rev = inds.clone();
        rev.reverse();
        let a = ITensor::random(ElType::Real, &inds, &mut rng).unwrap();
        let b = ITensor::random(ElType::Complex, &rev, &mut rng).unwrap();
        let s = &a + &b;
        let (es, ea, eb) = (elements(&s, &inds), elements(&a, &inds), elements(&b, &inds));
        for k in 0..es.len() {
            prop_assert_eq!(es[k], ea[k] + eb[k]);
        }
    }

    #[test]
    fn qn_addition_is_elementwise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inds: Vec<Index> = (0..3).map(|_| qn_index(&mut rng, Arrow::Out)).collect();
        let a = random_blocks(&mut rng, &inds);
        let flux = a.flux().unwrap().unwrap();
        let mut perm = inds.clone();
        perm.rotate_left(1);
        let b = ITensor::random_with_flux(ElType::Real, &perm, &flux, &mut rng).unwrap();
        let s = &a + &b;
        let (es, ea, eb) = (elements(&s, &inds), elements(&a, &inds), elements(&b, &inds));
        for k in 0..es.len() {
            prop_assert_eq!(es[k], ea[k] + eb[k]);
        }
    }

    #[test]
    fn delta_replace_and_back_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = dense_pair(&mut rng);
        if a.order() == 0 {
            return Ok(());
        }
        let k = a.inds()[(seed % a.order() as u64) as usize].clone();
        let i = k.sim();
        let there = &a * &delta(&[k.clone(), i.clone()]).unwrap();
        let back = &there * &delta(&[i, k]).unwrap();
        prop_assert_eq!(elements(&back, a.inds()), elements(&a, a.inds()));
    }
}
