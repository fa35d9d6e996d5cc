// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Standard test families: cycles, paths, tori and random regular graphs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// The cycle `C_n`, `n >= 3`.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Incomparable(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)), Some(2))
}

/// The path `P_n` on `n` vertices.
pub fn path(n: usize) -> Result<Graph> {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i)), Some(2))
}

/// A single isolated vertex (degree bound 1).
pub fn single_vertex() -> Graph {
    Graph::from_edges(1, [], Some(1)).expect("valid")
}

/// The star `K_{1,k}` with center 0.
pub fn star(k: usize) -> Result<Graph> {
    Graph::from_edges(k + 1, (1..=k).map(|i| (0, i)), None)
}

/// The complete graph `K_n`.
pub fn complete(n: usize) -> Result<Graph> {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Graph::from_edges(n, edges, None)
}

/// The `w x h` discrete torus, 4-regular for `w, h >= 3`. Vertex `(x, y)`
/// has id `y * w + x`.
pub fn torus(w: usize, h: usize) -> Result<Graph> {
    if w < 3 || h < 3 {
        return Err(Error::Incomparable(format!(
            "torus needs sides >= 3, got {w}x{h}"
        )));
    }
    let id = |x: usize, y: usize| y * w + x;
    let edges = (0..h).flat_map(|y| {
        (0..w).flat_map(move |x| {
            [
                (id(x, y), id((x + 1) % w, y)),
                (id(x, y), id(x, (y + 1) % h)),
            ]
        })
    });
    Graph::from_edges(w * h, edges, Some(4))
}

/// A uniformly random simple connected `k`-regular graph on `n` vertices
/// drawn from the configuration model by rejection.
pub fn random_regular(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if !(n * k).is_multiple_of(2) || k >= n || k == 0 {
        return Err(Error::Incomparable(format!(
            "no simple {k}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    'attempt: for _ in 0..100_000 {
        points.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(n * k / 2);
        let mut edges = Vec::with_capacity(n * k / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        let g = Graph::from_edges(n, edges, Some(k))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Incomparable(format!(
        "rejection sampling failed for n={n}, k={k}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_expected_degrees() {
        let t = torus(8, 8).unwrap();
        assert_eq!(t.n(), 64);
        assert!((0..64).all(|v| t.degree(v) == 4));
        let c = cycle(6).unwrap();
        assert!((0..6).all(|v| c.degree(v) == 2));
        let p = path(1).unwrap();
        assert_eq!((p.n(), p.edge_count()), (1, 0));
    }

    #[test]
    fn random_regular_is_seeded() {
        let a = random_regular(500, 3, 7).unwrap();
        let b = random_regular(500, 3, 7).unwrap();
        let c = random_regular(500, 3, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((0..500).all(|v| a.degree(v) == 3));
        assert!(a.is_connected());
    }
}
