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

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;

use locallimit::canonical::canonical_code;
use locallimit::coloring::{distance_color, edge_color, edge_palette};
use locallimit::{BallClass, ColoredType, ColoringBundle, Graph};
use proptest::prelude::*;

/// Random simple graphs with at most `max_deg` per vertex.
fn graph_strategy(max_n: usize, max_deg: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            let mut deg = vec![0; n];
            let mut seen = BTreeSet::new();
            let mut edges = Vec::new();
            for (u, v) in pairs {
                let key = (u.min(v), u.max(v));
                if u == v || deg[u] == max_deg || deg[v] == max_deg || !seen.insert(key) {
                    continue;
                }
                deg[u] += 1;
                deg[v] += 1;
                edges.push(key);
            }
            Graph::from_edges(n, edges, Some(max_deg)).unwrap()
        })
    })
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(
        g.n(),
        g.edges().map(|(u, v)| (perm[u], perm[v])),
        Some(g.degree_bound()),
    )
    .unwrap()
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_matches_bfs_oracle(g in graph_strategy(14, 4), r in 0usize..4) {
        let dist = common::all_pairs(&g);
        for v in 0..g.n() {
            let b = g.extract_ball(v, r);
            let inside: BTreeSet<usize> = (0..g.n()).filter(|&u| matches!(dist[v][u], Some(k) if k <= r)).collect();
            let got: BTreeSet<usize> = b.origin().iter().map(|&u| u as usize).collect();
            prop_assert_eq!(&got, &inside);
            for u in 0..b.len() {
                prop_assert_eq!(Some(b.dist(u)), dist[v][b.origin()[u] as usize]);
            }
            let want: BTreeSet<(usize, usize)> = g.edges().filter(|(a, c)| inside.contains(a) && inside.contains(c)).collect();
            let have: BTreeSet<(usize, usize)> = b
                .edges()
                .map(|(a, c)| {
                    let (a, c) = (b.origin()[a] as usize, b.origin()[c] as usize);
                    (a.min(c), a.max(c))
                })
                .collect();
            prop_assert_eq!(have, want);
        }
    }

    #[test]
    fn power_matches_distance_table(g in graph_strategy(12, 3), i in 1usize..4) {
        let dist = common::all_pairs(&g);
        let p = g.power(i);
        for u in 0..g.n() {
            for v in 0..g.n() {
                let near = u != v && matches!(dist[u][v], Some(k) if k <= i);
                prop_assert_eq!(p.neighbor_index(u, v).is_some(), near);
            }
        }
    }

    #[test]
    fn colorings_are_proper(g in graph_strategy(16, 4)) {
        let colors = edge_color(&g);
        prop_assert!(common::edge_coloring_valid(&g, &colors, g.max_degree() + 1));
        for i in 1..=3 {
            prop_assert!(common::distance_coloring_valid(&g, &distance_color(&g, i, None), i));
        }
        let b = ColoringBundle::build(&g, 3).unwrap();
        prop_assert!(b.validate(&g).is_ok());
        prop_assert!(common::edge_coloring_valid(&g, b.edge_colors(), edge_palette(g.degree_bound())));
    }

    #[test]
    fn codes_ignore_vertex_names(g in graph_strategy(12, 3), seed in any::<u64>(), r in 0usize..4) {
        let perm = {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut p: Vec<usize> = (0..g.n()).collect();
            p.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            p
        };
        let h = permuted(&g, &perm);
        for v in 0..g.n() {
            let a = BallClass::of(&g.extract_ball(v, r), g.degree_bound());
            let b = BallClass::of(&h.extract_ball(perm[v], r), h.degree_bound());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn codes_agree_with_brute_force(g in graph_strategy(9, 3), r in 1usize..3) {
        let balls: Vec<_> = (0..g.n()).map(|v| g.extract_ball(v, r)).collect();
        for a in &balls {
            for b in &balls {
                let same = canonical_code(a, None).unwrap() == canonical_code(b, None).unwrap();
                prop_assert_eq!(same, common::rooted_isomorphic(a, b));
            }
        }
    }

    #[test]
    fn colored_codes_ignore_relabeling(g in graph_strategy(12, 3), perm_seed in permutation(64)) {
        let b = ColoringBundle::build(&g, 2).unwrap();
        for v in 0..g.n() {
            let ball = b.colored_ball(&g, v, 2);
            let k = ball.len();
            let mut perm: Vec<usize> = perm_seed.iter().copied().filter(|&x| x < k).collect();
            perm.truncate(k);
            let t = ColoredType::of(&ball, g.degree_bound()).unwrap();
            let u = ColoredType::of(&ball.relabeled(&perm), g.degree_bound()).unwrap();
            prop_assert_eq!(t, u);
        }
    }
}

#[test]
fn odd_cycles_need_three_colors() {
    for n in [3, 5, 7, 9, 21, 63] {
        let g = locallimit::generators::cycle(n).unwrap();
        let used: BTreeSet<u8> = edge_color(&g).into_iter().flatten().collect();
        assert_eq!(used.len(), 3, "C_{n}");
    }
}
