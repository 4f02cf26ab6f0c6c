use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wgmerge::boss::{build_boss, validate_boss};
use wgmerge::dbg_merge::merge;
use wgmerge::format;
use wgmerge::oracle::{self, naive_boss};
use wgmerge::refine_merge::{initial_partition, refine_step, Partition, UnionView};
use wgmerge::wheeler::{decode_wheeler, encode_wheeler, union_automaton, validate_wheeler};
use wgmerge::{BitVec, Sym};

fn collection(sigma: Sym) -> impl Strategy<Value = Vec<Vec<Sym>>> {
    prop::collection::vec(prop::collection::vec(1..=sigma, 1..20), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_select_agree_with_scan(bits in prop::collection::vec(any::<bool>(), 0..700)) {
        let bv: BitVec = bits.iter().copied().collect();
        let mut ones = 0;
        for (i, &b) in bits.iter().enumerate() {
            ones += b as usize;
            prop_assert_eq!(bv.rank1(i + 1), ones);
            prop_assert_eq!(bv.rank0(i + 1), i + 1 - ones);
            if b {
                prop_assert_eq!(bv.select1(ones), i + 1);
            } else {
                prop_assert_eq!(bv.select0(i + 1 - ones), i + 1);
            }
        }
        prop_assert_eq!(bv.select1(0), 0);
        prop_assert_eq!(bv.select0(0), 0);
    }

    #[test]
    fn build_matches_naive(c in collection(4), k in 1usize..7) {
        let g = build_boss(&c, k, 4).unwrap();
        prop_assert!(validate_boss(&g).is_ok());
        prop_assert_eq!(g, naive_boss(&c, k, 4).unwrap());
    }

    #[test]
    fn merge_is_symmetric_and_matches_rebuild(a in collection(3), b in collection(3), k in 2usize..6) {
        let g0 = build_boss(&a, k, 3).unwrap();
        let g1 = build_boss(&b, k, 3).unwrap();
        let (m01, stats) = merge(&g0, &g1).unwrap();
        let (m10, _) = merge(&g1, &g0).unwrap();
        prop_assert_eq!(&m01, &m10);
        prop_assert!(stats.working_space_bits() <= stats.plain_budget_bits());
        let all: Vec<Vec<Sym>> = a.into_iter().chain(b).collect();
        prop_assert_eq!(m01, build_boss(&all, k, 3).unwrap());
    }

    #[test]
    fn boss_file_round_trip(c in collection(5), k in 1usize..5) {
        let g = build_boss(&c, k, 5).unwrap();
        let mut buf = Vec::new();
        format::write_boss(&mut buf, &g).unwrap();
        prop_assert_eq!(format::read_boss(&mut buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn wheeler_encoding_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, order) = oracle::random_wheeler_automaton(&mut rng, 8, 3);
        let g = encode_wheeler(&a, &order).unwrap();
        let decoded = decode_wheeler(&g);
        let identity: Vec<usize> = (0..decoded.node_count()).collect();
        prop_assert!(validate_wheeler(&decoded, &identity).is_ok());
        prop_assert_eq!(encode_wheeler(&decoded, &identity).unwrap(), g);
    }

    #[test]
    fn refinement_only_splits_sets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ((a0, o0), (a1, o1)) = oracle::random_union_pair(&mut rng, 9);
        let u = union_automaton(&a0, &o0, &a1, &o1).unwrap();
        let view = UnionView::from_union(&u).unwrap();
        let mut part: Partition = initial_partition(&view).unwrap();
        for _ in 0..view.len() + 2 {
            let members: usize = part.sets().iter().map(Vec::len).sum();
            prop_assert_eq!(members, view.len());
            let next = match refine_step(&view, &part).unwrap() {
                Ok(next) => next,
                Err(_) => break,
            };
            // every new set lies inside one old set, and old set order is kept
            let mut last_old = 0;
            for set in next.sets() {
                let old: Vec<usize> = set.iter().map(|&m| part.set_of(m)).collect();
                prop_assert!(old.iter().all(|&o| o == old[0]));
                prop_assert!(old[0] >= last_old);
                last_old = old[0];
            }
            if next == part {
                break;
            }
            part = next;
        }
    }
}
