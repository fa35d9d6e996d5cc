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

//! Independent oracles shared by integration and acceptance tests.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use locallimit::generators::{cycle, path, random_regular, torus};
use locallimit::{Graph, RootedBall};

/// The graphs every property is checked on.
pub fn test_graphs() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in (8..=64).step_by(8) {
        out.push((format!("C_{n}"), cycle(n).unwrap()));
    }
    for n in 10..=40 {
        out.push((format!("P_{n}"), path(n).unwrap()));
    }
    out.push(("torus_8x8".into(), torus(8, 8).unwrap()));
    for seed in 1..=3 {
        out.push((
            format!("rr_500_3_s{seed}"),
            random_regular(500, 3, seed).unwrap(),
        ));
    }
    out
}

/// Distances from `s` by plain BFS over the adjacency lists.
pub fn bfs(g: &Graph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w].is_none() {
                dist[w] = Some(dist[u].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    dist
}

pub fn all_pairs(g: &Graph) -> Vec<Vec<Option<usize>>> {
    (0..g.n()).map(|s| bfs(g, s)).collect()
}

/// Proper distance-`i` coloring: vertices at distance `1..=i` differ.
pub fn distance_coloring_valid(g: &Graph, colors: &[u32], i: usize) -> bool {
    (0..g.n()).all(|s| {
        bfs(g, s)
            .iter()
            .enumerate()
            .all(|(t, d)| t == s || !matches!(d, Some(k) if *k <= i) || colors[s] != colors[t])
    })
}

/// Proper edge coloring with at most `palette` colors, symmetric lists.
pub fn edge_coloring_valid(g: &Graph, colors: &[Vec<u8>], palette: usize) -> bool {
    (0..g.n()).all(|u| {
        let mut seen = vec![false; palette];
        g.neighbors(u).iter().zip(&colors[u]).all(|(&w, &c)| {
            let w = w as usize;
            let back = g
                .neighbors(w)
                .iter()
                .position(|&x| x as usize == u)
                .unwrap();
            let fresh = (c as usize) < palette && !seen[c as usize];
            if fresh {
                seen[c as usize] = true;
            }
            fresh && colors[w][back] == c
        })
    })
}

fn edge_set(b: &RootedBall) -> Vec<Vec<bool>> {
    let n = b.len();
    let mut m = vec![vec![false; n]; n];
    for (u, v) in b.edges() {
        m[u][v] = true;
        m[v][u] = true;
    }
    m
}

/// Brute-force rooted isomorphism: backtracking over bijections that fix
/// the root and preserve degree, root distance and adjacency.
pub fn rooted_isomorphic(a: &RootedBall, b: &RootedBall) -> bool {
    if a.len() != b.len() || a.edge_count() != b.edge_count() || a.radius() != b.radius() {
        return false;
    }
    let (ea, eb) = (edge_set(a), edge_set(b));
    let n = a.len();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[a.root()] = b.root();
    used[b.root()] = true;
    if a.degree(a.root()) != b.degree(b.root()) {
        return false;
    }
    let order: Vec<usize> = (0..n).filter(|&v| v != a.root()).collect();
    Matcher {
        a,
        b,
        ea: &ea,
        eb: &eb,
        order: &order,
        map,
        used,
    }
    .extend(0)
}

struct Matcher<'a> {
    a: &'a RootedBall,
    b: &'a RootedBall,
    ea: &'a [Vec<bool>],
    eb: &'a [Vec<bool>],
    order: &'a [usize],
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn extend(&mut self, k: usize) -> bool {
        let Some(&v) = self.order.get(k) else {
            return true;
        };
        for t in 0..self.b.len() {
            if self.used[t]
                || self.a.degree(v) != self.b.degree(t)
                || self.a.dist(v) != self.b.dist(t)
            {
                continue;
            }
            let ok = (0..self.a.len())
                .all(|u| self.map[u] == usize::MAX || self.ea[v][u] == self.eb[t][self.map[u]]);
            if !ok {
                continue;
            }
            self.map[v] = t;
            self.used[t] = true;
            if self.extend(k + 1) {
                return true;
            }
            self.map[v] = usize::MAX;
            self.used[t] = false;
        }
        false
    }
}

/// Ball made from an adjacency list rooted at 0, with radius equal to the
/// root's eccentricity.
pub fn ball_from_adj(adj: Vec<Vec<u32>>) -> RootedBall {
    let probe = RootedBall::from_adjacency(0, adj.len(), adj.clone()).unwrap();
    let ecc = probe.distances().iter().copied().max().unwrap_or(0) as usize;
    RootedBall::from_adjacency(0, ecc, adj).unwrap()
}

type Invariant = (usize, usize, usize, Vec<(u32, usize)>);

fn invariant(b: &RootedBall) -> Invariant {
    let mut profile: Vec<(u32, usize)> = (0..b.len())
        .map(|v| (b.dist(v) as u32, b.degree(v)))
        .collect();
    profile.sort_unstable();
    (b.len(), b.edge_count(), b.radius(), profile)
}

/// Every connected rooted graph with at most `max_n` vertices and maximum
/// degree at most `max_deg`, grown one vertex at a time (each new vertex
/// joins a nonempty subset of the old ones) and deduplicated by the
/// brute-force isomorphism test.
///
/// Returns the class representatives and, for every generated candidate,
/// the representative index it was found isomorphic to.
pub fn enumerate_rooted(
    max_n: usize,
    max_deg: usize,
) -> (Vec<RootedBall>, Vec<(RootedBall, usize)>) {
    let mut reps: Vec<RootedBall> = Vec::new();
    let mut buckets: HashMap<Invariant, Vec<usize>> = HashMap::new();
    let mut candidates = Vec::new();
    let mut frontier: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new()]];

    let mut classify = |adj: Vec<Vec<u32>>,
                        reps: &mut Vec<RootedBall>,
                        candidates: &mut Vec<(RootedBall, usize)>| {
        let b = ball_from_adj(adj);
        let bucket = buckets.entry(invariant(&b)).or_default();
        let hit = bucket
            .iter()
            .copied()
            .find(|&i| rooted_isomorphic(&reps[i], &b));
        let idx = match hit {
            Some(i) => i,
            None => {
                reps.push(b.clone());
                bucket.push(reps.len() - 1);
                reps.len() - 1
            }
        };
        candidates.push((b, idx));
        hit.is_none()
    };
    classify(vec![Vec::new()], &mut reps, &mut candidates);

    for n in 2..=max_n {
        let mut next = Vec::new();
        for adj in &frontier {
            let old = n - 1;
            for mask in 1u32..(1 << old) {
                if mask.count_ones() as usize > max_deg {
                    continue;
                }
                let mut g = adj.clone();
                g.push(Vec::new());
                let ok = (0..old)
                    .filter(|&v| mask >> v & 1 == 1)
                    .all(|v| g[v].len() < max_deg);
                if !ok {
                    continue;
                }
                for v in 0..old {
                    if mask >> v & 1 == 1 {
                        g[v].push(old as u32);
                        g[old].push(v as u32);
                    }
                }
                if classify(g.clone(), &mut reps, &mut candidates) {
                    next.push(g);
                }
            }
        }
        frontier = next;
    }
    (reps, candidates)
}
