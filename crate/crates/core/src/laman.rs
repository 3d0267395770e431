//! (2,3)-pebble game: independence, rank and rigidity in the planar
//! generic rigidity matroid without any linear algebra.
//!
//! Every vertex starts with two pebbles. An accepted edge is oriented out
//! of the vertex whose pebble covers it. An edge `uv` is independent of
//! the accepted set iff four pebbles can be gathered on `u` and `v`.

use serde::{Deserialize, Serialize};

use crate::graph::{Edge, EuclideanGraph};
use crate::numeric::s_euclidean;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PebbleGame {
    pebbles: Vec<u8>,
    /// Out-neighbors, kept sorted so searches are deterministic.
    out: Vec<Vec<usize>>,
    accepted: Vec<Edge>,
}

impl PebbleGame {
    pub fn new(n: usize) -> Self {
        PebbleGame {
            pebbles: vec![2; n],
            out: vec![Vec::new(); n],
            accepted: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.pebbles.len()
    }

    pub fn accepted(&self) -> &[Edge] {
        &self.accepted
    }

    pub fn rank(&self) -> usize {
        self.accepted.len()
    }

    pub fn free_pebbles(&self, v: usize) -> u8 {
        self.pebbles[v]
    }

    /// Inserts `e` if it keeps the accepted set (2,3)-sparse.
    pub fn try_insert(&mut self, e: Edge) -> bool {
        let (u, v) = e.endpoints();
        if u == v || v >= self.n() || self.accepted.contains(&e) {
            return false;
        }
        while self.pebbles[u] < 2 {
            if !self.fetch_pebble(u, v) {
                return false;
            }
        }
        while self.pebbles[v] < 2 {
            if !self.fetch_pebble(v, u) {
                return false;
            }
        }
        self.pebbles[u] -= 1;
        insert_sorted(&mut self.out[u], v);
        self.accepted.push(e);
        #[cfg(debug_assertions)]
        if self.n() <= 8 {
            debug_assert!(
                self.is_sparse_exhaustive(),
                "pebble game broke (2,3)-sparsity"
            );
        }
        true
    }

    /// DFS along out-edges from `root`, never entering `blocked`; on finding a
    /// free pebble the path is reversed, moving the pebble to `root`.
    fn fetch_pebble(&mut self, root: usize, blocked: usize) -> bool {
        let n = self.n();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        seen[blocked] = true;
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut found = None;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next == self.out[v].len() {
                stack.pop();
                continue;
            }
            let w = self.out[v][*next];
            *next += 1;
            if seen[w] {
                continue;
            }
            seen[w] = true;
            parent[w] = v;
            if self.pebbles[w] > 0 {
                found = Some(w);
                break;
            }
            stack.push((w, 0));
        }
        let Some(target) = found else {
            return false;
        };
        let mut w = target;
        while w != root {
            let v = parent[w];
            remove_sorted(&mut self.out[v], w);
            insert_sorted(&mut self.out[w], v);
            w = v;
        }
        self.pebbles[target] -= 1;
        self.pebbles[root] += 1;
        true
    }

    /// Every vertex subset of size `k ≥ 2` spans at most `2k − 3` accepted
    /// edges. Exponential; for small test graphs only.
    pub fn is_sparse_exhaustive(&self) -> bool {
        let n = self.n();
        assert!(n <= 20, "exhaustive sparsity check is exponential");
        (0u32..(1 << n)).all(|mask| {
            let k = mask.count_ones() as usize;
            if k < 2 {
                return true;
            }
            let inside = |v: usize| mask & (1 << v) != 0;
            let spanned = self
                .accepted
                .iter()
                .filter(|e| inside(e.lo()) && inside(e.hi()))
                .count();
            spanned <= 2 * k - 3
        })
    }
}

fn insert_sorted(list: &mut Vec<usize>, x: usize) {
    let pos = list.binary_search(&x).unwrap_or_else(|p| p);
    list.insert(pos, x);
}

fn remove_sorted(list: &mut Vec<usize>, x: usize) {
    if let Ok(pos) = list.binary_search(&x) {
        list.remove(pos);
    }
}

/// Size of a maximal independent subset, inserting edges in the given order.
pub fn laman_rank(n: usize, edges: &[Edge]) -> usize {
    let mut game = PebbleGame::new(n);
    for &e in edges {
        game.try_insert(e);
    }
    game.rank()
}

pub fn laman_independent(g: &EuclideanGraph) -> bool {
    let mut game = PebbleGame::new(g.n());
    g.edges().iter().all(|&e| game.try_insert(e))
}

/// Generic rigidity in the plane: rank equals `2n − 3` (or `C(n,2)` for `n ≤ 2`).
pub fn laman_rigid(g: &EuclideanGraph) -> bool {
    laman_rank(g.n(), &g.edge_vec()) == s_euclidean(g.n(), 2)
}
