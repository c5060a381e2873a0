//! Randomised invariants.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use udemd_core::embed::{udemd_distance, udemd_embed, UdemdConfig};
use udemd_core::eval::{ami, ari, nmi, precision_at_k, silhouette, LabelVector};
use udemd_core::generators::{gen_ring, gen_sphere_dataset, random_distribution, random_geometric_graph, SphereConfig};
use udemd_core::geodesic::all_pairs;
use udemd_core::metric::{knn, knn_rows, pairwise_l1};
use udemd_core::ot::{exact_emd, exact_emd_lp, truncate_cost, tv_unbalanced_emd, CostMatrix};
use udemd_core::{DiffusionOperator, DistanceMatrix, NeighborList, SignalSet, WalkOptions};

use common::*;

fn graph(seed: u64, n: usize, weighted: bool) -> udemd_core::Graph {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    random_geometric_graph(n, 0.45, weighted, &mut r).unwrap()
}

fn signals(seed: u64, n: usize, m: usize) -> SignalSet {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cols: Vec<Vec<f64>> = (0..m).map(|_| random_distribution(n, 1 + r.random_range(0..n), &mut r)).collect();
    SignalSet::from_columns(n, &cols).unwrap().normalize_columns().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_rows_are_stochastic(seed in any::<u64>(), n in 3usize..60, lazy in 0.0f64..0.9, aniso in any::<bool>()) {
        let g = graph(seed, n, true);
        let op = DiffusionOperator::build(&g, WalkOptions { laziness: lazy, anisotropic: aniso }).unwrap();
        prop_assert!(op.max_row_sum_error() < 1e-12);
        for i in 0..n {
            for (j, p) in op.row(i) {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(i == j || g.weight(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn diffusion_conserves_mass(seed in any::<u64>(), n in 3usize..60, steps in 1usize..40) {
        let g = graph(seed, n, true);
        let op = DiffusionOperator::build(&g, WalkOptions::default()).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| r.random::<f64>() * 5.0).collect()).collect();
        let s = SignalSet::from_columns(n, &cols).unwrap();
        let out = op.apply_diffusion(&s, steps).unwrap();
        for (a, b) in s.column_sums().iter().zip(out.column_sums()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sparse_diffusion_matches_dense(seed in any::<u64>(), n in 3usize..=50, steps in 1usize..12, lazy in prop::sample::select(vec![0.0, 0.5])) {
        let g = graph(seed, n, true);
        let op = DiffusionOperator::build(&g, WalkOptions::lazy(lazy)).unwrap();
        let s = signals(seed, n, 2);
        let out = op.apply_diffusion(&s, steps).unwrap();
        let pt = matpow(&dense_walk(&g, lazy), n, steps);
        for j in 0..2 {
            for (a, b) in out.column(j).iter().zip(push(&pt, s.column(j))) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn embedding_matches_dense(seed in any::<u64>(), n in 3usize..=50, k in 0u32..5) {
        let g = graph(seed, n, true);
        let op = DiffusionOperator::build(&g, WalkOptions::default()).unwrap();
        let s = signals(seed, n, 2);
        let cfg = UdemdConfig::with_scale(k);
        let e = udemd_embed(&op, &s, &cfg).unwrap();
        let p = dense_walk(&g, 0.0);
        let w = cfg.band_weights();
        let k = k as usize;
        for j in 0..2 {
            let scales: Vec<Vec<f64>> = (0..=k).map(|t| push(&matpow(&p, n, 1 << t), s.column(j))).collect();
            for b in 0..k {
                for v in 0..n {
                    prop_assert!((e.band(j, b)[v] - w[b] * (scales[b + 1][v] - scales[b][v])).abs() < 1e-10);
                }
            }
            for v in 0..n {
                prop_assert!((e.band(j, k)[v] - scales[k][v]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn difference_bands_sum_to_zero(seed in any::<u64>(), n in 3usize..80, k in 1u32..6) {
        let g = graph(seed, n, false);
        let op = DiffusionOperator::build(&g, WalkOptions::default()).unwrap();
        let s = signals(seed, n, 3);
        let e = udemd_embed(&op, &s, &UdemdConfig::with_scale(k)).unwrap();
        for j in 0..3 {
            for b in 0..k as usize {
                prop_assert!(e.band(j, b).iter().sum::<f64>().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn geodesics_are_metric(seed in any::<u64>(), n in 2usize..=100, weighted in any::<bool>()) {
        let g = graph(seed, n, weighted);
        let t = all_pairs(&g);
        for i in 0..n {
            prop_assert_eq!(t.get(i, i), 0.0);
            for j in 0..n {
                prop_assert!((t.get(i, j) - t.get(j, i)).abs() < 1e-12);
            }
        }
        for i in (0..n).step_by(3) {
            for j in 0..n {
                for k in 0..n {
                    prop_assert!(t.get(i, k) <= t.get(i, j) + t.get(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn normalization_is_idempotent_and_keeps_support(seed in any::<u64>(), n in 1usize..30) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let col: Vec<f64> = (0..n).map(|i| if i == 0 || r.random_bool(0.5) { r.random::<f64>() * 3.0 + 0.01 } else { 0.0 }).collect();
        let s = SignalSet::from_columns(n, &[col.clone()]).unwrap();
        let once = s.normalize_columns().unwrap();
        let twice = once.normalize_columns().unwrap();
        prop_assert!((once.column_sums()[0] - 1.0).abs() < 1e-12);
        for ((a, b), c) in once.column(0).iter().zip(twice.column(0)).zip(&col) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert_eq!(*a == 0.0, *c == 0.0);
        }
    }

    #[test]
    fn knn_is_permutation_equivariant(seed in any::<u64>(), m in 3usize..40, k in 1usize..3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let d = 4;
        let rows: Vec<f64> = (0..m * d).map(|_| r.random::<f64>()).collect();
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let permuted: Vec<f64> = perm.iter().flat_map(|&p| rows[p * d..(p + 1) * d].to_vec()).collect();
        let a = knn_rows(&rows, m, d, k).unwrap();
        let b = knn_rows(&permuted, m, d, k).unwrap();
        for q in 0..m {
            let da: Vec<f64> = a.neighbors(perm[q]).iter().map(|x| x.1).collect();
            let db: Vec<f64> = b.neighbors(q).iter().map(|x| x.1).collect();
            prop_assert_eq!(da, db);
        }
    }

    #[test]
    fn knn_lists_are_sorted_unique_and_exclude_self(seed in any::<u64>(), m in 3usize..40) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<f64> = (0..m * 2).map(|_| (r.random_range(0..4)) as f64).collect();
        let dm = pairwise_l1(&rows, m, 2).unwrap();
        prop_assert!(dm.max_violation() < 1e-9);
        let nl = knn(&dm, m - 1).unwrap();
        for q in 0..m {
            let l = nl.neighbors(q);
            prop_assert!(l.iter().all(|x| x.0 != q));
            prop_assert!(l.windows(2).all(|w| w[0].1 < w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0)));
        }
    }

    #[test]
    fn transport_plans_are_feasible(seed in any::<u64>(), n in 2usize..25) {
        let g = graph(seed, n, true);
        let cost = CostMatrix::from_geodesic(all_pairs(&g)).unwrap();
        let s = signals(seed, n, 2);
        let (mu, nu) = (s.column(0), s.column(1));
        let r = exact_emd(&cost, mu, nu).unwrap();
        prop_assert!(r.marginal_violation(mu, nu) < 1e-8);
        prop_assert!(r.plan.iter().all(|&v| v >= 0.0));
        prop_assert!(r.dual_gap.unwrap() <= 1e-8 * r.cost.max(1e-3));
        let lp = exact_emd_lp(&cost, mu, nu).unwrap();
        prop_assert!((lp.cost - r.cost).abs() <= 1e-7 * r.cost.max(1e-12));
    }

    #[test]
    fn unbalanced_cost_is_monotone_and_bounded(seed in any::<u64>(), n in 2usize..20) {
        let g = graph(seed, n, true);
        let cost = CostMatrix::from_geodesic(all_pairs(&g)).unwrap();
        let s = signals(seed, n, 2);
        let (mu, nu) = (s.column(0), s.column(1));
        let balanced = exact_emd(&cost, mu, nu).unwrap().cost;
        let mut prev = 0.0;
        for lambda in [0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0] {
            let u = tv_unbalanced_emd(&cost, mu, nu, lambda).unwrap();
            prop_assert!(u.cost >= prev - 1e-12);
            prop_assert!(u.cost <= balanced + 1e-12);
            prop_assert!(u.marginal_violation(mu, nu) < 1e-8);
            prev = u.cost;
            if lambda > 0.0 {
                let t = exact_emd(&truncate_cost(&cost, lambda).unwrap(), mu, nu).unwrap().cost;
                prop_assert!(t <= balanced + 1e-12);
                prop_assert!(t <= lambda + 1e-12);
            }
        }
    }

    #[test]
    fn truncation_preserves_metricity(seed in any::<u64>(), n in 2usize..=50, lambda in 0.01f64..3.0) {
        let g = graph(seed, n, true);
        let cost = CostMatrix::from_geodesic(all_pairs(&g)).unwrap();
        let mut t = truncate_cost(&cost, lambda).unwrap();
        prop_assert!(t.verify_metric().unwrap());
    }

    #[test]
    fn scores_ignore_label_names(seed in any::<u64>(), m in 4usize..60, c in 2usize..5) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<usize> = (0..m).map(|i| if i < c { i } else { r.random_range(0..c) }).collect();
        let b: Vec<usize> = (0..m).map(|_| r.random_range(0..c)).collect();
        let renamed: Vec<usize> = a.iter().map(|&x| 100 - 7 * x).collect();
        let (la, lb, lr) = (LabelVector::new(&a), LabelVector::new(&b), LabelVector::new(&renamed));
        prop_assert!((ari(&la, &lb).unwrap() - ari(&lr, &lb).unwrap()).abs() < 1e-12);
        prop_assert!((nmi(&la, &lb).unwrap() - nmi(&lr, &lb).unwrap()).abs() < 1e-12);
        prop_assert!((ami(&la, &lb).unwrap() - ami(&lr, &lb).unwrap()).abs() < 1e-12);
        let xs: Vec<f64> = (0..m).map(|_| r.random::<f64>()).collect();
        let dm = pairwise_l1(&xs, m, 1).unwrap();
        prop_assert!((silhouette(&dm, &la).unwrap() - silhouette(&dm, &lr).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn precision_ignores_query_order(seed in any::<u64>(), m in 3usize..30) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mk = |r: &mut ChaCha8Rng| -> Vec<Vec<(usize, f64)>> {
            (0..m).map(|_| (0..m).map(|_| (r.random_range(0..m), 0.0)).collect()).collect()
        };
        let (p, t) = (mk(&mut r), mk(&mut r));
        let k = 1 + r.random_range(0..m);
        let base = precision_at_k(&NeighborList::from_rankings(p.clone()), &NeighborList::from_rankings(t.clone()), k).unwrap();
        let (pr, tr): (Vec<_>, Vec<_>) = (p.into_iter().rev().collect(), t.into_iter().rev().collect());
        let rev = precision_at_k(&NeighborList::from_rankings(pr), &NeighborList::from_rankings(tr), k).unwrap();
        prop_assert!((base - rev).abs() < 1e-12);
    }

    #[test]
    fn silhouette_of_separated_equal_clusters_is_one(sizes in 2usize..10, c in 2usize..5, gap in 1.0f64..100.0) {
        let m = sizes * c;
        let raw: Vec<usize> = (0..m).map(|i| i / sizes).collect();
        let v: Vec<f64> = (0..m * m).map(|x| if raw[x / m] == raw[x % m] { 0.0 } else { gap }).collect();
        let dm = DistanceMatrix::new(m, v, "blocks").unwrap();
        prop_assert!((silhouette(&dm, &LabelVector::new(&raw)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), m in 2usize..8) {
        let mut cfg = SphereConfig::new(m, seed);
        cfg.noise_spike = seed % 2 == 0;
        let a = gen_sphere_dataset(&cfg).unwrap();
        let b = gen_sphere_dataset(&cfg).unwrap();
        prop_assert_eq!(a.graph, b.graph);
        prop_assert_eq!(a.signals, b.signals);
        prop_assert_eq!(a.points, b.points);
        let ra = random_geometric_graph(20, 0.4, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let rb = random_geometric_graph(20, 0.4, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(ra, rb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn udemd_is_a_pseudometric(seed in any::<u64>()) {
        let n = 60;
        let g = graph(seed, n, true);
        let op = DiffusionOperator::build(&g, WalkOptions::default()).unwrap();
        let s = signals(seed, n, 30);
        let e = udemd_embed(&op, &s, &UdemdConfig::default()).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..250 {
            let (i, j, k) = (r.random_range(0..30), r.random_range(0..30), r.random_range(0..30));
            let (dij, djk, dik) = (udemd_distance(&e, i, j).unwrap(), udemd_distance(&e, j, k).unwrap(), udemd_distance(&e, i, k).unwrap());
            prop_assert!(dij >= 0.0);
            prop_assert_eq!(dij, udemd_distance(&e, j, i).unwrap());
            prop_assert_eq!(udemd_distance(&e, i, i).unwrap(), 0.0);
            prop_assert!(dik <= dij + djk + 1e-12);
        }
    }
}

#[test]
fn ring_curve_is_monotone_up_to_saturation() {
    let n = 500;
    let g = gen_ring(n).unwrap();
    let op = DiffusionOperator::build(&g, WalkOptions::lazy(0.5)).unwrap();
    let nodes: Vec<usize> = (0..=250).collect();
    let s = SignalSet::diracs(n, &nodes).unwrap();
    let e = udemd_embed(&op, &s, &UdemdConfig::default()).unwrap();
    let curve: Vec<f64> = (1..=250).map(|j| udemd_distance(&e, 0, j).unwrap()).collect();
    for w in curve.windows(2) {
        assert!(w[1] >= w[0] * 0.99, "{} then {}", w[0], w[1]);
    }
}
