//! Built-in graph families used by the tests and the harness.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Edge, WeightedGraph};

fn build(n: usize, edges: Vec<Edge>) -> WeightedGraph {
    WeightedGraph::new(n, edges).expect("generator produced an invalid graph")
}

/// `0 – 1 – … – (n−1)` with unit weights.
pub fn path(n: usize) -> WeightedGraph {
    build(n, (1..n).map(|v| Edge::new(v - 1, v, 1.0)).collect())
}

/// Path plus the closing edge `(n−1, 0)`, unit weights.
pub fn cycle(n: usize) -> WeightedGraph {
    assert!(n >= 3, "a cycle needs at least 3 vertices");
    let mut edges: Vec<Edge> = (1..n).map(|v| Edge::new(v - 1, v, 1.0)).collect();
    edges.push(Edge::new(n - 1, 0, 1.0));
    build(n, edges)
}

/// `K_n` with unit weights, edges in lexicographic order.
pub fn complete(n: usize) -> WeightedGraph {
    let edges = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v, 1.0)))
        .collect();
    build(n, edges)
}

/// Random recursive tree on shuffled labels, weights uniform in `[lo, hi)`.
pub fn random_tree<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> WeightedGraph {
    build(n, random_tree_edges(n, lo, hi, rng))
}

fn random_tree_edges<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<Edge> {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    (1..n)
        .map(|v| {
            let parent = rng.random_range(0..v);
            Edge::new(labels[parent], labels[v], rng.random_range(lo..hi))
        })
        .collect()
}

/// A random spanning tree plus every other vertex pair independently with
/// probability `extra`; always connected.
pub fn random_connected<R: Rng + ?Sized>(n: usize, extra: f64, lo: f64, hi: f64, rng: &mut R) -> WeightedGraph {
    let mut edges = random_tree_edges(n, lo, hi, rng);
    let mut present = vec![false; n * n];
    for e in &edges {
        present[e.u * n + e.v] = true;
        present[e.v * n + e.u] = true;
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u * n + v] && rng.random::<f64>() < extra {
                edges.push(Edge::new(u, v, rng.random_range(lo..hi)));
            }
        }
    }
    build(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::rng_for;

    #[test]
    fn family_sizes() {
        assert_eq!(path(10).m(), 9);
        assert_eq!(cycle(12).m(), 12);
        assert_eq!(complete(8).m(), 28);
        let mut rng = rng_for(1);
        let t = random_tree(20, 0.1, 10.0, &mut rng);
        assert_eq!(t.m(), 19);
        assert!(t.is_connected());
        let g = random_connected(15, 0.3, 0.1, 10.0, &mut rng);
        assert!(g.is_connected());
        assert!(g.m() >= 14);
        assert!(g.edges().iter().all(|e| (0.1..10.0).contains(&e.weight)));
    }
}
