#![allow(dead_code)]

use conic_rigidity::framework::{
    random_generic_configuration, union, Configuration, ConicFramework,
};
use conic_rigidity::graph::{Arc, ConicGraph, DirectedGraph, Edge, EuclideanGraph};
use conic_rigidity::laman::PebbleGame;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn all_edges(n: usize) -> Vec<Edge> {
    let mut out = Vec::new();
    for u in 0..n {
        for w in u + 1..n {
            out.push(Edge::new(u, w));
        }
    }
    out
}

pub fn all_arcs(n: usize) -> Vec<Arc> {
    let mut out = Vec::new();
    for u in 0..n {
        for w in 0..n {
            if u != w {
                out.push(Arc::new(u, w));
            }
        }
    }
    out
}

/// Uniform random subset of the ordered pairs, each kept with probability `p`.
pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DirectedGraph {
    let arcs: Vec<Arc> = all_arcs(n)
        .into_iter()
        .filter(|_| rng.random::<f64>() < p)
        .collect();
    DirectedGraph::new(n, arcs).unwrap()
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<Edge> {
    all_edges(n)
        .into_iter()
        .filter(|_| rng.random::<f64>() < p)
        .collect()
}

/// Each pair is absent, simple or double with the given weights.
pub fn random_conic_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    p_simple: f64,
    p_double: f64,
) -> ConicGraph {
    let mut simple = Vec::new();
    let mut double = Vec::new();
    for e in all_edges(n) {
        let x: f64 = rng.random();
        if x < p_double {
            double.push(e);
        } else if x < p_double + p_simple {
            simple.push(e);
        }
    }
    ConicGraph::new(n, simple, double).unwrap()
}

/// Distinct coordinates on the line in random order.
pub fn random_line_config(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    let mut xs: Vec<f64> = (0..n)
        .map(|k| k as f64 + rng.random_range(0.1..0.9))
        .collect();
    xs.shuffle(rng);
    let biases = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Configuration::new(1, xs.into_iter().map(|x| vec![x]).collect(), biases).unwrap()
}

pub fn random_framework(rng: &mut ChaCha8Rng, n: usize, d: usize, p: f64) -> ConicFramework {
    let graph = random_digraph(rng, n, p);
    let config = if d == 1 {
        random_line_config(rng, n)
    } else {
        random_generic_configuration(n, d, rng.random())
    };
    ConicFramework::new(graph, config).unwrap()
}

/// Random minimally rigid planar graph: shuffled pool scanned by the pebble game.
pub fn random_laman_basis(rng: &mut ChaCha8Rng, n: usize) -> EuclideanGraph {
    let mut pool = all_edges(n);
    pool.shuffle(rng);
    let mut game = PebbleGame::new(n);
    for e in pool {
        game.try_insert(e);
    }
    EuclideanGraph::new(n, game.accepted().iter().copied()).unwrap()
}

/// Random labelled spanning tree, each vertex attached to an earlier one
/// of a random ordering.
pub fn random_spanning_tree(rng: &mut ChaCha8Rng, n: usize) -> EuclideanGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let edges = (1..n).map(|k| Edge::new(order[k], order[rng.random_range(0..k)]));
    EuclideanGraph::new(n, edges).unwrap()
}

pub fn laman_plus_tree(rng: &mut ChaCha8Rng, n: usize) -> ConicGraph {
    let g = random_laman_basis(rng, n);
    let h = random_spanning_tree(rng, n);
    union(&g, &h).unwrap()
}
