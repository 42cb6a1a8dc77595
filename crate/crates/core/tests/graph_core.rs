use gexplain::induce::{induce_by_edges, induce_by_nodes, induce_by_nodes_and_edges, InduceMode};
use gexplain::metrics::{exhaustiveness, intuitiveness, DEFAULT_ENUMERATION_CAP};
use gexplain::Graph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, max_edges: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if edges.len() < max_edges && rng.random_bool(0.4) {
                edges.push((u, v));
            }
        }
    }
    Graph::unweighted(n, 1, &edges).unwrap()
}

#[test]
fn triangle_node_exhaustiveness_is_four_sevenths() {
    let k3 = Graph::unweighted(3, 1, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(exhaustiveness(InduceMode::Node, &k3, 16).unwrap(), 4.0 / 7.0);
    assert_eq!(exhaustiveness(InduceMode::Edge, &k3, 16).unwrap(), 1.0);
    let empty = Graph::unweighted(2, 1, &[]).unwrap();
    assert!(exhaustiveness(InduceMode::Edge, &empty, 16).is_err());
}

proptest! {
    #[test]
    fn edge_induction_is_most_intuitive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..9);
        let g = random_graph(&mut rng, n, 20);
        prop_assume!(g.edge_count() > 0);
        let es: Vec<_> = (0..g.edge_count()).filter(|_| rng.random_bool(0.5)).collect();
        let vs: Vec<_> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        prop_assume!(!es.is_empty());
        let by_edges = intuitiveness(&induce_by_edges(&g, &es).unwrap()).unwrap();
        prop_assert_eq!(by_edges, 1.0);
        if !vs.is_empty() {
            let by_nodes = intuitiveness(&induce_by_nodes(&g, &vs).unwrap()).unwrap();
            prop_assert!(by_edges >= by_nodes);
        }
        let both = intuitiveness(&induce_by_nodes_and_edges(&g, &vs, &es).unwrap()).unwrap();
        prop_assert!(by_edges >= both);
    }

    #[test]
    fn edge_induction_is_exhaustive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..8);
        let g = random_graph(&mut rng, n, 10);
        prop_assume!(g.edge_count() > 0);
        let e = exhaustiveness(InduceMode::Edge, &g, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert_eq!(e, 1.0);
        prop_assert!(e >= exhaustiveness(InduceMode::Node, &g, DEFAULT_ENUMERATION_CAP).unwrap());
        prop_assert_eq!(e, exhaustiveness(InduceMode::NodeAndEdge, &g, DEFAULT_ENUMERATION_CAP).unwrap());
    }
}
