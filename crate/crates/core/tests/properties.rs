mod common;

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use kdp_core::formulations::{check_balance, FormulationKind, Tag};
use kdp_core::graph::{max_unit_flow, DirectedNetwork, PathSeq};
use kdp_core::instance::{gen_grid, gen_random, SplitMix64};
use kdp_core::loops::remove_loops;
use kdp_core::metrics::{
    arc_repetitions, avdi, dissimilarity, midi, overlap_length, repeated_arc_count, repeated_occurrences,
    total_pairwise_overlaps, ArcUsage,
};
use kdp_core::oracle::enumerate_simple_paths;

use common::{pick, plant_cycles, solve_exact};

fn small_net() -> impl Strategy<Value = DirectedNetwork> {
    (4usize..8, any::<u64>()).prop_flat_map(|(n, seed)| {
        (n..=(2 * n).min(n * (n - 1))).prop_map(move |m| gen_random(n, m, seed).unwrap())
    })
}

fn max_disjoint_brute(paths: &[PathSeq], used: &mut Vec<bool>, from: usize) -> usize {
    let mut best = 0;
    for i in from..paths.len() {
        if paths[i].arcs().iter().all(|&a| !used[a]) {
            for &a in paths[i].arcs() {
                used[a] = true;
            }
            best = best.max(1 + max_disjoint_brute(paths, used, i + 1));
            for &a in paths[i].arcs() {
                used[a] = false;
            }
        }
    }
    best
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_flow_matches_disjoint_path_search(net in small_net()) {
        let paths = enumerate_simple_paths(&net, 10_000).unwrap();
        let brute = max_disjoint_brute(&paths, &mut vec![false; net.m()], 0);
        prop_assert_eq!(max_unit_flow(&net), brute);
    }

    #[test]
    fn grid_paths_all_have_the_same_length(p in 2usize..6, q in 2usize..6) {
        let g = gen_grid(p, q);
        prop_assert_eq!(g.m(), p * (q - 1) + q * (p - 1));
        let paths = enumerate_simple_paths(&g, 10_000).unwrap();
        prop_assert_eq!(paths.len(), binomial(p + q - 2, p - 1));
        prop_assert!(paths.iter().all(|path| path.len() == p + q - 2));
    }

    #[test]
    fn random_networks_are_strongly_connected(n in 2usize..15, extra in 0usize..20, seed in any::<u64>()) {
        let m = (n + extra).min(n * (n - 1));
        let net = gen_random(n, m, seed).unwrap();
        prop_assert_eq!(net.m(), m);
        for start in 1..=n {
            let mut seen = vec![false; n + 1];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &a in net.out_arcs(u) {
                    let v = net.head(a);
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            prop_assert!(seen[1..].iter().all(|&x| x));
        }
    }

    #[test]
    fn generators_are_deterministic(n in 3usize..10, seed in any::<u64>()) {
        prop_assert_eq!(gen_random(n, 2 * n, seed).unwrap(), gen_random(n, 2 * n, seed).unwrap());
    }

    #[test]
    fn metric_identities(net in small_net(), k in 2usize..6, seed in any::<u64>()) {
        let all = enumerate_simple_paths(&net, 10_000).unwrap();
        let mut rng = SplitMix64::new(seed);
        let sol: Vec<PathSeq> = (0..k).map(|_| all[pick(&mut rng, all.len())].clone()).collect();
        let usage = ArcUsage::from_paths(&sol);
        prop_assert_eq!(arc_repetitions(&sol), repeated_occurrences(&sol) - repeated_arc_count(&sol));
        prop_assert_eq!(total_pairwise_overlaps(&sol), usage.counts().values().map(|&c| c * (c - 1) / 2).sum::<usize>());
        let pair_sum: usize = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| overlap_length(&sol[i], &sol[j])).sum();
        prop_assert_eq!(pair_sum, total_pairwise_overlaps(&sol));
        let (av, mi) = (avdi(&sol).unwrap(), midi(&sol).unwrap());
        prop_assert!(BigRational::zero() <= mi && mi <= av && av <= BigRational::one());
        for d in 1..=4u8 {
            prop_assert!(dissimilarity(d, &sol[0], &sol[0]).unwrap().is_zero());
            let d01 = dissimilarity(d, &sol[0], &sol[1]).unwrap();
            prop_assert_eq!(&d01, &dissimilarity(d, &sol[1], &sol[0]).unwrap());
            if overlap_length(&sol[0], &sol[1]) == 0 {
                prop_assert!(d01.is_one());
            }
        }
        // D1 of a path pair sharing o arcs
        let o = overlap_length(&sol[0], &sol[1]);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let want = BigRational::one()
            - half * (BigRational::new(o.into(), sol[0].len().into()) + BigRational::new(o.into(), sol[1].len().into()));
        prop_assert_eq!(dissimilarity(1, &sol[0], &sol[1]).unwrap().exact().cloned(), Some(want));
    }

    #[test]
    fn loop_removal_never_worsens(net in small_net(), k in 1usize..5, seed in any::<u64>()) {
        let all = enumerate_simple_paths(&net, 10_000).unwrap();
        let mut rng = SplitMix64::new(seed);
        let mut raw = Vec::new();
        for _ in 0..k {
            let mut arcs = all[pick(&mut rng, all.len())].arc_set();
            plant_cycles(&net, &mut arcs, 1 + pick(&mut rng, 3), &mut rng);
            prop_assert!(check_balance(&net, &arcs).is_ok());
            raw.push(arcs);
        }
        let paths = remove_loops(&raw, &net).unwrap();
        prop_assert_eq!(paths.len(), k);
        prop_assert!(paths.iter().all(PathSeq::is_simple));
        let before = ArcUsage::from_arc_lists(raw.iter().map(Vec::as_slice));
        let after = ArcUsage::from_paths(&paths);
        let counts: &BTreeMap<usize, usize> = after.counts();
        prop_assert!(counts.iter().all(|(&a, &c)| c <= before.count(a)));
        prop_assert!(after.pairwise_overlaps() <= before.pairwise_overlaps());
        prop_assert!(after.repeated_arcs() <= before.repeated_arcs());
        prop_assert!(after.repeated_occurrences() <= before.repeated_occurrences());
        prop_assert!(after.arc_repetitions() <= before.arc_repetitions());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn formulation_optima_are_ordered(net in small_net(), k in 2usize..4) {
        let opt = |tag| solve_exact(&net, k, &FormulationKind::new(tag)).objective;
        let (mao, mra, mro, mar) = (opt(Tag::Mao), opt(Tag::Mra), opt(Tag::Mro), opt(Tag::Mar));
        prop_assert!(mra <= mar && mar <= mro && mar <= mao, "MRA {} MAR {} MRO {} MAO {}", mra, mar, mro, mao);
    }

    #[test]
    fn model_variants_agree(net in small_net(), k in 2usize..4) {
        for tag in [Tag::Mao, Tag::Mra, Tag::Mar] {
            let base = solve_exact(&net, k, &FormulationKind::new(tag)).objective;
            let mut kind = FormulationKind::new(tag);
            if tag == Tag::Mar {
                kind.options.aggregate_linking = !kind.options.aggregate_linking;
            } else {
                kind.options.drop_redundant = !kind.options.drop_redundant;
            }
            prop_assert_eq!(solve_exact(&net, k, &kind).objective, base, "{}", kind.label());
        }
    }
}
