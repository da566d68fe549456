use proptest::prelude::*;
use rand::Rng;

use qecc_core::analysis::{epsilon_bands, fb_min_gap, fc_sample_bound, gaps, tilde_gaps};
use qecc_core::kcfb::run_kcfb;
use qecc_core::offline::{brute_force_opt, cost, kwikcluster};
use qecc_core::rng::stream_rng;
use qecc_core::tbhs::{run_tbhs, TbhsConfig};
use qecc_core::{generate, pair_index, pair_of, Clustering, Feedback, GeneratorSpec, Instance, Oracle, PairId};

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(0.0f64..=1.0, n * (n - 1) / 2)
            .prop_map(move |sims| Instance::new(n, sims).unwrap())
    })
}

fn labels_for(n: usize) -> impl Strategy<Value = Clustering> {
    proptest::collection::vec(0usize..n.max(1), n).prop_map(Clustering::from_labels)
}

fn is_partition(c: &Clustering, n: usize) -> bool {
    let mut seen = vec![0usize; n];
    for cluster in c.clusters() {
        for v in cluster {
            seen[v] += 1;
        }
    }
    c.len() == n && seen.iter().all(|&k| k == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pair_index_roundtrip(n in 2usize..500, a in 0usize..500, b in 0usize..500) {
        let (u, v) = (a % n, b % n);
        prop_assume!(u != v);
        let e = pair_index(u, v, n).unwrap();
        prop_assert!(e.index() < n * (n - 1) / 2);
        prop_assert_eq!(pair_of(e, n).unwrap(), (u.min(v), u.max(v)));
    }

    #[test]
    fn cost_bounds_and_label_invariance(
        (inst, c) in instance(9).prop_flat_map(|i| { let n = i.n(); (Just(i), labels_for(n)) }),
        shift in 1usize..100,
    ) {
        let value = cost(&inst, &c).unwrap();
        prop_assert!(value >= 0.0 && value <= inst.m() as f64 + 1e-9);
        let relabeled = Clustering::from_labels(c.labels().iter().map(|l| l * 7 + shift).collect());
        prop_assert!((cost(&inst, &relabeled).unwrap() - value).abs() < 1e-12);
    }

    #[test]
    fn kwikcluster_returns_partition(inst in instance(12), seed in any::<u64>()) {
        let c = kwikcluster(&inst, &mut stream_rng(seed, 0));
        prop_assert!(is_partition(&c, inst.n()));
    }

    #[test]
    fn brute_force_is_a_lower_bound(inst in instance(7), seed in any::<u64>()) {
        let opt = brute_force_opt(&inst).unwrap();
        prop_assert!((cost(&inst, &opt.witness).unwrap() - opt.opt_value).abs() == 0.0);
        let mut rng = stream_rng(seed, 0);
        let n = inst.n();
        for _ in 0..100 {
            let labels = (0..n).map(|_| rng.random_range(0..n)).collect();
            let c = Clustering::from_labels(labels);
            prop_assert!(opt.opt_value <= cost(&inst, &c).unwrap() + 1e-12);
        }
    }

    #[test]
    fn tbhs_partitions_arms(inst in instance(6), seed in any::<u64>(), eps in 0.02f64..0.49) {
        let arms: Vec<PairId> = inst.pairs().collect();
        let mut o = Oracle::bernoulli(&inst, seed).with_budget(100_000_000);
        let out = run_tbhs(&mut o, &arms, &TbhsConfig::new(eps, 0.1).unwrap()).unwrap();
        let mut all: Vec<PairId> = out.good.iter().chain(&out.bad).copied().collect();
        all.sort();
        prop_assert_eq!(all, arms);
        prop_assert_eq!(out.pulls_used, o.total_pulls());
        prop_assert!(out.pulls_used >= inst.m() as u64);
    }

    #[test]
    fn kcfb_budget_and_conservation(inst in instance(10), seed in any::<u64>(), extra in 0u64..5000) {
        let budget = inst.m() as u64 + extra;
        let mut o = Oracle::bernoulli(&inst, seed).with_budget(budget);
        let r = run_kcfb(&mut o, budget, &mut stream_rng(seed, 1)).unwrap();
        prop_assert!(r.queries_used <= budget);
        prop_assert!(is_partition(&r.clustering, inst.n()));
        prop_assert_eq!(r.queries_used, r.phase_queries().sum::<u64>());
        // the remaining allowance always covers the pairs still unclustered
        let mut used = 0u64;
        for (tau, v) in r.tau_schedule.iter().zip(&r.phase_sizes) {
            let pairs = (v * (v - 1) / 2) as u64;
            prop_assert!(tau * pairs <= budget - used);
            used += tau * (*v as u64 - 1);
        }
    }

    #[test]
    fn bands_partition_pairs(inst in instance(10), eps in 0.001f64..0.499) {
        let b = epsilon_bands(&inst, eps);
        let mut all: Vec<PairId> = b.band.iter().chain(&b.above).chain(&b.below).copied().collect();
        all.sort();
        prop_assert_eq!(all, inst.pairs().collect::<Vec<_>>());
    }

    #[test]
    fn gap_quantities(inst in instance(10), eps in 0.001f64..0.499, delta in 0.001f64..0.999) {
        prop_assume!(inst.m() > 0);
        let profile = gaps(&inst).unwrap();
        for (d, t) in profile.deltas.iter().zip(tilde_gaps(&inst, eps)) {
            prop_assert!(t > 0.0);
            prop_assert!(t >= eps.min(d + eps / 2.0) - 1e-12);
        }
        prop_assert!(fb_min_gap(&inst, eps) >= profile.delta_min);
        let wide = fb_min_gap(&inst, 0.5 + eps);
        prop_assert!(wide >= profile.delta_min && wide >= (0.5 + eps) / (6.0 * inst.m() as f64));
        let bound = fc_sample_bound(&inst, eps, delta);
        prop_assert!(bound.is_finite() && bound >= inst.m() as f64);
    }

    #[test]
    fn generated_instances_are_valid(n in 1usize..20, k in 1usize..20, q in 0.0f64..0.49, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let spec = GeneratorSpec::planted(n, k, q, 0.8, 0.2, seed);
        let a = generate(&spec).unwrap();
        prop_assert_eq!(&a, &generate(&spec).unwrap());
        prop_assert!(Instance::new(a.n(), a.sims().to_vec()).is_ok());
        prop_assert_eq!(a.ground_truth().unwrap().num_clusters(), k);
    }
}
