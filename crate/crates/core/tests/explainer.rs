use std::collections::BTreeMap;

use gexplain::explain::{
    base_distance, brute_force_best_subgraph, edge_set_importance, explain, explain_with_scores, fidelity_minus,
    fidelity_plus, ig_edge_scores, linear_search, rank_edges, sa_edge_scores, score_all_edges_linear_gradient,
    ClassPolicy, ExplainConfig, KRange, Method,
};
use gexplain::gnn::{forward, Architecture, ConvKind, ConvLayer, Dense, ModelSpec, Pooling, Session};
use gexplain::Graph;
use ndarray::{arr1, arr2, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One identity GCN layer on 2-d features, identity first classifier layer
/// and logits `[z0, 2 z1]`. With unit features both channels carry the same
/// pooled value `z`, so the class-1 probability is `sigmoid(z)`.
fn hand_set_gcn() -> ModelSpec {
    let eye = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
    ModelSpec::new(
        ConvKind::Gcn,
        vec![ConvLayer {
            linears: vec![Dense::new(eye.clone(), arr1(&[0.0, 0.0])).unwrap()],
        }],
        vec![],
        Pooling::Mean,
        [
            Dense::new(eye, arr1(&[0.0, 0.0])).unwrap(),
            Dense::new(arr2(&[[1.0, 0.0], [0.0, 2.0]]), arr1(&[0.0, 0.0])).unwrap(),
        ],
    )
    .unwrap()
}

/// GCN whose message-passing weights are zero, so its output ignores structure.
fn structure_blind(bias: f64) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut m = ModelSpec::random(&Architecture::gcn(2, 2, 3, 2), 0.5, &mut rng).unwrap();
    for layer in &mut m.layers {
        layer.linears[0].weight.fill(0.0);
        layer.linears[0].bias.fill(bias);
    }
    m
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Dense `D^{-1/2} (A + I) D^{-1/2} 1` averaged over nodes, written out
/// directly from an adjacency matrix.
fn manual_z(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let mut a = Array2::<f64>::eye(n);
    for &(u, v, w) in edges {
        a[[u, v]] += w;
        a[[v, u]] += w;
    }
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += a[[i, j]] / (d[i] * d[j]).sqrt();
        }
    }
    total / n as f64
}

/// Class-1 probability of the hand-set model on the path a-b-c-d with the
/// given edge weights.
fn manual_path4(w: [f64; 3]) -> f64 {
    sigmoid(manual_z(4, &[(0, 1, w[0]), (1, 2, w[1]), (2, 3, w[2])]))
}

fn path4() -> Graph {
    Graph::unweighted(4, 2, &[(0, 1), (1, 2), (2, 3)]).unwrap()
}

fn path4_weighted(w: [f64; 3]) -> Graph {
    Graph::from_undirected(Array2::ones((4, 2)), &[(0, 1, w[0]), (1, 2, w[1]), (2, 3, w[2])]).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize, dim: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v, rng.random_range(0.3..1.0)));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u)) {
            edges.push((u, v, 1.0));
        }
    }
    let x = Array2::from_shape_simple_fn((n, dim), || rng.random_range(-1.0..1.0));
    Graph::from_undirected(x, &edges).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng, dim: usize, gin: bool) -> ModelSpec {
    let arch = if gin {
        Architecture::gin(dim, 2, 6, 3)
    } else {
        Architecture::gcn(dim, 2, 6, 3)
    };
    ModelSpec::random(&arch, 0.8, rng).unwrap()
}

#[test]
fn middle_edge_importance_matches_manual_forward() {
    let m = hand_set_gcn();
    let g = path4();
    let s = Session::new(&m);
    let full = manual_path4([1.0, 1.0, 1.0]);
    // Removing the middle edge leaves two disjoint edges: every node sums to 1.
    let cut = sigmoid(1.0);
    assert!((manual_path4([1.0, 0.0, 1.0]) - cut).abs() < 1e-15);
    let expected = (full - cut) / 2.0;
    let got = edge_set_importance(&s, &g, &[1], 1, 0.0).unwrap();
    assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
    let class0 = edge_set_importance(&s, &g, &[1], 0, 0.0).unwrap();
    assert!((class0 + expected).abs() < 1e-14);
    assert_eq!(s.forward_passes(), 4);
}

#[test]
fn empty_edge_set_has_no_score() {
    let m = hand_set_gcn();
    assert!(edge_set_importance(&Session::new(&m), &path4(), &[], 1, 0.0).is_err());
}

#[test]
fn linear_gradient_vector_matches_manual_oracle() {
    let m = hand_set_gcn();
    let g = path4();
    let s = Session::new(&m);
    let scores = score_all_edges_linear_gradient(&s, &g, 1, 0.0).unwrap();
    assert_eq!(s.forward_passes(), g.edge_count() + 1);
    assert_eq!(scores.method, Method::LinearGradient);
    let full = manual_path4([1.0; 3]);
    let expected = [
        (full - manual_path4([0.0, 1.0, 1.0])) / 2.0,
        (full - manual_path4([1.0, 0.0, 1.0])) / 2.0,
        (full - manual_path4([1.0, 1.0, 0.0])) / 2.0,
    ];
    for (got, want) in scores.scores.iter().zip(expected) {
        assert!((got - want).abs() < 1e-14);
    }
    // The two end edges are swapped by reversing the path.
    assert!((scores.scores[0] - scores.scores[2]).abs() < 1e-9);
}

#[test]
fn structure_blind_model_scores_zero() {
    let m = structure_blind(0.3);
    let g = path4();
    let s = Session::new(&m);
    for c in 0..2 {
        assert!(score_all_edges_linear_gradient(&s, &g, c, 0.0).unwrap().scores.iter().all(|&v| v == 0.0));
        assert!(sa_edge_scores(&s, &g, c, 1e-3).unwrap().scores.iter().all(|&v| v == 0.0));
        assert!(ig_edge_scores(&s, &g, c, 5, 0.0, 1e-3).unwrap().scores.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn structure_blind_model_ties_to_smallest_k() {
    let m = structure_blind(0.2);
    let g = path4();
    let s = Session::new(&m);
    let full = linear_search(&s, &g, &[2, 0, 1], 0, KRange::Full).unwrap();
    assert_eq!(full.chosen_k, 1);
    assert_eq!(full.subgraph_edges, vec![2]);
    let paper = linear_search(&Session::new(&m), &g, &[2, 0, 1], 0, KRange::Paper).unwrap();
    assert_eq!(paper.chosen_k, 2);
    assert_eq!(paper.subgraph_edges, vec![0, 2]);
}

#[test]
fn fidelity_endpoints_and_manual_values() {
    let m = hand_set_gcn();
    let g = path4();
    let s = Session::new(&m);
    let p = forward(&m, &g).unwrap().probability(1);
    assert_eq!(fidelity_plus(&s, &g, &[], 1).unwrap(), 0.0);
    assert_eq!(fidelity_minus(&s, &g, &[0, 1, 2], 1).unwrap(), 0.0);
    // With no edges every node keeps only its self-loop, so z = 1.
    let isolated = sigmoid(1.0);
    assert!((fidelity_plus(&s, &g, &[0, 1, 2], 1).unwrap() - (p - isolated)).abs() < 1e-15);
    assert!((fidelity_minus(&s, &g, &[], 1).unwrap() - (p - isolated)).abs() < 1e-15);
    // Keeping only the middle edge gives a two-node graph with z = 1; removing
    // it gives two disjoint edges over all four nodes, also z = 1.
    let fm = fidelity_minus(&s, &g, &[1], 1).unwrap();
    let fp = fidelity_plus(&s, &g, &[1], 1).unwrap();
    assert!((fm - (manual_path4([1.0; 3]) - sigmoid(manual_z(2, &[(0, 1, 1.0)])))).abs() < 1e-14);
    assert!((fp - (manual_path4([1.0; 3]) - manual_path4([1.0, 0.0, 1.0]))).abs() < 1e-14);
    // Keeping the two end edges drops nothing but the middle edge.
    let fm_ends = fidelity_minus(&s, &g, &[0, 2], 1).unwrap();
    assert!((fm_ends - fp).abs() < 1e-15);
}

#[test]
fn sa_matches_manual_central_difference() {
    let m = hand_set_gcn();
    let w = [1.0, 0.6, 0.8];
    let g = path4_weighted(w);
    let h = 1e-3;
    let scores = sa_edge_scores(&Session::new(&m), &g, 1, h).unwrap();
    for e in 0..3 {
        let mut up = w;
        let mut down = w;
        up[e] = (w[e] + h).min(1.0);
        down[e] = (w[e] - h).max(0.0);
        let want = ((manual_path4(up) - manual_path4(down)) / (up[e] - down[e])).abs();
        assert!((scores.scores[e] - want).abs() < 1e-10, "edge {e}");
    }
    assert!(sa_edge_scores(&Session::new(&m), &g, 1, 0.0).is_err());
}

/// High-resolution trapezoid integral of the manual probability's partial
/// derivatives along the joint path `α w`, times `w`.
fn ig_oracle(w: [f64; 3]) -> [f64; 3] {
    let steps = 10_000;
    let eps = 1e-6;
    let mut out = [0.0; 3];
    for (e, slot) in out.iter_mut().enumerate() {
        let partial = |alpha: f64| {
            let point = w.map(|x| alpha * x);
            let mut up = point;
            let mut down = point;
            up[e] += eps;
            down[e] = (down[e] - eps).max(0.0);
            (manual_path4(up) - manual_path4(down)) / (up[e] - down[e])
        };
        let mut total = 0.5 * (partial(0.0) + partial(1.0));
        for j in 1..steps {
            total += partial(j as f64 / steps as f64);
        }
        *slot = w[e] * total / steps as f64;
    }
    out
}

#[test]
fn ig_converges_to_fine_quadrature() {
    let m = hand_set_gcn();
    let w = [1.0, 0.6, 0.8];
    let g = path4_weighted(w);
    let oracle = ig_oracle(w);
    let coarse = ig_edge_scores(&Session::new(&m), &g, 1, 50, 0.0, 1e-3).unwrap();
    let fine = ig_edge_scores(&Session::new(&m), &g, 1, 2000, 0.0, 1e-3).unwrap();
    for e in 0..3 {
        let coarse_err = (coarse.scores[e] - oracle[e]).abs();
        let fine_err = (fine.scores[e] - oracle[e]).abs();
        assert!(fine_err < 1e-5, "edge {e}: {fine_err}");
        assert!(coarse_err < 1e-3, "edge {e}: {coarse_err}");
        assert!(fine_err <= coarse_err);
    }
    // Completeness: attributions along the joint path sum to the total change.
    let total: f64 = fine.scores.iter().sum();
    let change = manual_path4(w) - manual_path4([0.0; 3]);
    assert!((total - change).abs() < 1e-4);
}

#[test]
fn ig_single_step_is_signed_slope_at_input() {
    let m = hand_set_gcn();
    let w = [1.0, 0.6, 0.8];
    let g = path4_weighted(w);
    let s = Session::new(&m);
    let ig = ig_edge_scores(&s, &g, 1, 1, 0.0, 1e-3).unwrap();
    let sa = sa_edge_scores(&s, &g, 1, 1e-3).unwrap();
    for e in 0..3 {
        assert!((ig.scores[e].abs() - w[e] * sa.scores[e]).abs() < 1e-15);
    }
    assert!(ig_edge_scores(&s, &g, 1, 0, 0.0, 1e-3).is_err());
}

#[test]
fn explain_counts_and_class_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_model(&mut rng, 3, false);
    let g = random_graph(&mut rng, 9, 3, 3);
    let auto = explain(&m, &g, &ExplainConfig::default()).unwrap();
    let y = forward(&m, &g).unwrap().predicted_class;
    let fixed = explain(
        &m,
        &g,
        &ExplainConfig {
            class: ClassPolicy::Fixed(y),
            ..ExplainConfig::default()
        },
    )
    .unwrap();
    assert_eq!(auto, fixed);
    assert_eq!(auto.target_class, y);
    assert_eq!(auto.forward_passes_used, 3 * g.edge_count() + 1);
    assert!(auto.forward_passes_used <= 3 * g.edge_count() + 2);
    assert_eq!(auto.candidates.len(), g.edge_count());
}

#[test]
fn external_ranking_reproduces_linear_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = random_model(&mut rng, 3, true);
    let g = random_graph(&mut rng, 8, 2, 3);
    let scores: Vec<f64> = (0..g.edge_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let via_scores = explain_with_scores(&m, &g, &scores, &ExplainConfig::default()).unwrap();
    let y = forward(&m, &g).unwrap().predicted_class;
    let direct = linear_search(&Session::new(&m), &g, &rank_edges(&scores), y, KRange::Full).unwrap();
    assert_eq!(via_scores.ranked_edges, direct.ranked_edges);
    assert_eq!(via_scores.chosen_k, direct.chosen_k);
    assert_eq!(via_scores.overall, direct.overall);
    assert_eq!(via_scores.candidates, direct.candidates);
    assert!(linear_search(&Session::new(&m), &g, &[0, 0], y, KRange::Full).is_err());
}

#[test]
fn single_edge_oracle_and_lexicographic_ties() {
    let m = hand_set_gcn();
    let g = Graph::unweighted(2, 2, &[(0, 1)]).unwrap();
    let best = brute_force_best_subgraph(&Session::new(&m), &g, 1, 14).unwrap();
    assert_eq!(best.edges, vec![0]);
    assert_eq!(best.subsets_evaluated, 1);
    // A structure-blind model scores every subset 0, so the first subset wins.
    let blind = structure_blind(0.1);
    let k3 = Graph::unweighted(3, 2, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let best = brute_force_best_subgraph(&Session::new(&blind), &k3, 0, 14).unwrap();
    assert_eq!(best.edges, vec![0]);
    assert_eq!(best.overall, 0.0);
    assert!(brute_force_best_subgraph(&Session::new(&blind), &k3, 0, 2).is_err());
}

#[test]
fn triangle_oracle_matches_direct_enumeration() {
    let m = hand_set_gcn();
    let k3 = Graph::unweighted(3, 2, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let s = Session::new(&m);
    let best = brute_force_best_subgraph(&s, &k3, 1, 14).unwrap();
    // Every proper subset's overall fidelity, from the closed-form model.
    let p = sigmoid(manual_z(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]));
    let one_edge = sigmoid(manual_z(2, &[(0, 1, 1.0)]));
    let path_on_three = sigmoid(manual_z(3, &[(0, 1, 1.0), (1, 2, 1.0)]));
    let single_kept = (p - path_on_three) - (p - one_edge);
    let pair_kept = (p - one_edge) - (p - path_on_three);
    let all_kept = p - sigmoid(1.0);
    let options = [(single_kept, vec![0]), (pair_kept, vec![0, 1]), (all_kept, vec![0, 1, 2])];
    let (want_score, want_edges) = options
        .iter()
        .fold(None::<&(f64, Vec<usize>)>, |acc, o| match acc {
            Some(a) if a.0 >= o.0 => Some(a),
            _ => Some(o),
        })
        .unwrap();
    assert_eq!(&best.edges, want_edges);
    assert!((best.overall - want_score).abs() < 1e-14);
    assert_eq!(best.edges, vec![0]);
}

#[test]
fn explanation_file_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = random_model(&mut rng, 3, false);
    let g = random_graph(&mut rng, 7, 2, 3);
    let a = explain(&m, &g, &ExplainConfig::default()).unwrap().to_json(&g).unwrap();
    let b = explain(&m, &g, &ExplainConfig::default()).unwrap().to_json(&g).unwrap();
    assert_eq!(a, b);
    let keys: Vec<&str> = a
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(
        keys,
        [
            "target_class",
            "method",
            "k_range",
            "ranked_edges",
            "chosen_k",
            "subgraph_edges",
            "fidelity_plus",
            "fidelity_minus",
            "overall",
            "sparsity",
            "forward_passes_used",
            "candidates"
        ]
    );
}

fn case() -> impl Strategy<Value = (u64, usize, usize, bool)> {
    (any::<u64>(), 3usize..9, 0usize..4, any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edge_set_importance_is_exact((seed, n, extra, gin) in case(), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, 3, gin);
        let g = random_graph(&mut rng, n, extra, 3);
        let et: Vec<usize> = picks.iter().map(|i| i.index(g.edge_count())).collect();
        let c = rng.random_range(0..3);
        let score = edge_set_importance(&Session::new(&m), &g, &et, c, 0.0).unwrap();
        let overrides: BTreeMap<usize, f64> = et.iter().map(|&e| (e, 0.0)).collect();
        let p0 = forward(&m, &g).unwrap().probability(c);
        let pt = forward(&m, &g.with_overrides(&overrides).unwrap()).unwrap().probability(c);
        let dist = base_distance(&g, &et, 0.0).unwrap();
        prop_assert!((score * dist - (p0 - pt)).abs() < 1e-12);
    }

    #[test]
    fn ranking_ignores_positive_scaling(scores in prop::collection::vec(-5.0f64..5.0, 0..20), k in 1e-3f64..1e3) {
        let scaled: Vec<f64> = scores.iter().map(|s| s * k).collect();
        let order = rank_edges(&scores);
        prop_assert_eq!(&order, &rank_edges(&scaled));
        for w in order.windows(2) {
            prop_assert!(scores[w[0]] > scores[w[1]] || (scores[w[0]] == scores[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn star_edges_score_equally(seed in any::<u64>(), leaves in 2usize..7, gin in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, 3, gin);
        let mut x = Array2::zeros((leaves + 1, 3));
        for v in 0..=leaves {
            x.row_mut(v).assign(&arr1(if v == 0 { &[0.5, -0.2, 1.0] } else { &[0.1, 0.7, -0.4] }));
        }
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v, 1.0)).collect();
        let g = Graph::from_undirected(x, &edges).unwrap();
        let s = score_all_edges_linear_gradient(&Session::new(&m), &g, 1, 0.0).unwrap();
        for v in &s.scores {
            prop_assert!((v - s.scores[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn search_optimal_over_prefixes_and_dominated_by_oracle((seed, n, extra, gin) in case()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, 3, gin);
        let g = random_graph(&mut rng, n, extra, 3);
        let e = explain(&m, &g, &ExplainConfig::default()).unwrap();
        prop_assert_eq!(e.forward_passes_used, 3 * g.edge_count() + 1);
        prop_assert!((e.overall - (e.fidelity_plus - e.fidelity_minus)).abs() <= 1e-12);
        prop_assert!(e.chosen_k >= 1 && e.chosen_k <= g.edge_count());
        let s = Session::new(&m);
        for k in 1..=g.edge_count() {
            let prefix = &e.ranked_edges[..k];
            let overall = fidelity_plus(&s, &g, prefix, e.target_class).unwrap()
                - fidelity_minus(&s, &g, prefix, e.target_class).unwrap();
            prop_assert!(e.overall >= overall);
            if k < e.chosen_k {
                prop_assert!(overall < e.overall);
            }
        }
        let oracle = brute_force_best_subgraph(&s, &g, e.target_class, 14).unwrap();
        prop_assert!(oracle.overall >= e.overall);
    }
}
