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

//! Edge and distance colorings.
//!
//! Edges get a proper coloring with at most `Δ + 1 <= d + 1` colors by the
//! Misra–Gries fan/Kempe-chain procedure. For each `i` the vertices get a
//! greedy proper coloring of the `i`-th power graph, so vertices within
//! distance `i` differ. Palettes are fixed per degree bound: `S = {0..d}`
//! for edges and `|Q_i| = (d+1)^i + 1` for the `i`-th vertex coloring.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::ColoredBall;
use crate::canonical::ColoredType;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{self, Execution};

/// Edge palette size `|S| = d + 1`.
pub fn edge_palette(d: usize) -> usize {
    d + 1
}

/// Vertex palette size `|Q_i| = (d+1)^i + 1`, saturating.
pub fn vertex_palette(d: usize, i: usize) -> u64 {
    (d as u64 + 1)
        .checked_pow(i as u32)
        .and_then(|p| p.checked_add(1))
        .unwrap_or(u64::MAX)
}

const NONE: u32 = u32::MAX;

/// Proper edge coloring with at most `max_degree + 1` colors, returned
/// aligned with the adjacency lists: `out[v][k]` colors the edge to
/// `g.neighbors(v)[k]`. Edges are inserted in ascending `(u, v)` order.
pub fn edge_color(g: &Graph) -> Vec<Vec<u8>> {
    let palette = g.max_degree() + 1;
    assert!(
        palette <= u8::MAX as usize + 1,
        "degree too large for u8 colors"
    );
    let mut mg = MisraGries {
        palette,
        at: vec![vec![NONE; palette]; g.n()],
    };
    for (u, v) in g.edges() {
        mg.insert(u, v);
    }
    (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .map(|&w| mg.color_of(v, w as usize).expect("every edge colored") as u8)
                .collect()
        })
        .collect()
}

struct MisraGries {
    palette: usize,
    /// `at[v][c]` is the neighbor joined to `v` by the `c`-edge, or `NONE`.
    at: Vec<Vec<u32>>,
}

impl MisraGries {
    fn is_free(&self, v: usize, c: usize) -> bool {
        self.at[v][c] == NONE
    }

    fn free(&self, v: usize) -> usize {
        (0..self.palette)
            .find(|&c| self.is_free(v, c))
            .expect("a vertex of degree <= Δ always has a free color among Δ + 1")
    }

    fn color_of(&self, u: usize, w: usize) -> Option<usize> {
        self.at[u].iter().position(|&x| x == w as u32)
    }

    fn set(&mut self, u: usize, w: usize, c: usize) {
        self.at[u][c] = w as u32;
        self.at[w][c] = u as u32;
    }

    fn unset(&mut self, u: usize, w: usize, c: usize) {
        self.at[u][c] = NONE;
        self.at[w][c] = NONE;
    }

    fn insert(&mut self, u: usize, v: usize) {
        // maximal fan of u starting at v
        let mut fan = vec![v];
        loop {
            let last = *fan.last().expect("nonempty");
            let next = (0..self.palette).find_map(|c| {
                let x = self.at[u][c];
                (self.is_free(last, c) && x != NONE && !fan.contains(&(x as usize)))
                    .then_some(x as usize)
            });
            match next {
                Some(x) => fan.push(x),
                None => break,
            }
        }

        let c = self.free(u);
        let d = self.free(*fan.last().expect("nonempty"));

        // invert the cd-path starting at u
        if c != d {
            let mut path = Vec::new();
            let (mut cur, mut col) = (u, d);
            while self.at[cur][col] != NONE {
                let nxt = self.at[cur][col] as usize;
                path.push((cur, nxt, col));
                cur = nxt;
                col = if col == d { c } else { d };
            }
            for &(a, b, col) in &path {
                self.unset(a, b, col);
            }
            for &(a, b, col) in &path {
                self.set(a, b, if col == d { c } else { d });
            }
        }

        // shortest prefix of the fan that is still a fan and ends where d is free
        let mut w = None;
        for i in 0..fan.len() {
            if i > 0 {
                let col = self.color_of(u, fan[i]).expect("fan edges are colored");
                if !self.is_free(fan[i - 1], col) {
                    break;
                }
            }
            if self.is_free(fan[i], d) {
                w = Some(i);
                break;
            }
        }
        let w = w.expect("Misra-Gries guarantees a rotatable sub-fan");

        for i in 0..w {
            let col = self.color_of(u, fan[i + 1]).expect("colored");
            self.unset(u, fan[i + 1], col);
            self.set(u, fan[i], col);
        }
        self.set(u, fan[w], d);
    }
}

/// Greedy proper coloring of the `i`-th power of `g`, smallest available
/// color first, visiting vertices in `order` (ascending ids when `None`).
pub fn distance_color(g: &Graph, i: usize, order: Option<&[usize]>) -> Vec<u32> {
    distance_color_with(g, i, order, Execution::default())
}

pub fn distance_color_with(
    g: &Graph,
    i: usize,
    order: Option<&[usize]>,
    exec: Execution,
) -> Vec<u32> {
    assert!(i >= 1, "distance coloring radius must be at least 1");
    let power = g.power_with(i, exec);
    let ascending: Vec<usize>;
    let order = match order {
        Some(o) => o,
        None => {
            ascending = (0..g.n()).collect();
            &ascending
        }
    };
    let mut color = vec![NONE; g.n()];
    let mut used: Vec<bool> = Vec::new();
    for &v in order {
        used.clear();
        used.resize(power.degree(v) + 1, false);
        for &w in power.neighbors(v) {
            let c = color[w as usize];
            if (c as usize) < used.len() {
                used[c as usize] = true;
            }
        }
        color[v] = used.iter().position(|&u| !u).expect("pigeonhole") as u32;
    }
    color
}

/// A proper edge coloring plus distance-`i` vertex colorings for
/// `i = 1..=depth` of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringBundle {
    d: usize,
    depth: usize,
    seed: Option<u64>,
    edge_colors: Vec<Vec<u8>>,
    vertex_colors: Vec<Vec<u32>>,
}

impl ColoringBundle {
    /// Deterministic bundle: greedy order is ascending vertex id.
    pub fn build(g: &Graph, depth: usize) -> Result<Self> {
        Self::build_with(g, depth, None, Execution::default())
    }

    /// Bundle whose greedy vertex order is a seeded shuffle.
    pub fn build_seeded(g: &Graph, depth: usize, seed: u64) -> Result<Self> {
        Self::build_with(g, depth, Some(seed), Execution::default())
    }

    pub fn build_with(g: &Graph, depth: usize, seed: Option<u64>, exec: Execution) -> Result<Self> {
        if depth == 0 {
            return Err(Error::BundleDepth { need: 1, have: 0 });
        }
        let order: Option<Vec<usize>> = seed.map(|s| {
            let mut o: Vec<usize> = (0..g.n()).collect();
            o.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
            o
        });
        let edge_colors = edge_color(g);
        let vertex_colors = (1..=depth)
            .map(|i| distance_color_with(g, i, order.as_deref(), exec))
            .collect();
        let bundle = ColoringBundle {
            d: g.degree_bound(),
            depth,
            seed,
            edge_colors,
            vertex_colors,
        };
        bundle
            .validate(g)
            .map_err(|e| Error::InvalidColoring(format!("internal coloring bug: {e}")))?;
        Ok(bundle)
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    /// Number of distance colorings `R`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn palette_sizes(&self) -> Vec<u64> {
        (1..=self.depth)
            .map(|i| vertex_palette(self.d, i))
            .collect()
    }

    /// Edge colors aligned with the graph's adjacency lists.
    pub fn edge_colors(&self) -> &[Vec<u8>] {
        &self.edge_colors
    }

    /// The distance-`i` coloring, `1 <= i <= depth`.
    pub fn vertex_coloring(&self, i: usize) -> &[u32] {
        &self.vertex_colors[i - 1]
    }

    /// Color tuple `(Q_1(v), .., Q_r(v))`.
    pub fn tuple(&self, v: usize, r: usize) -> Vec<u32> {
        self.vertex_colors[..r].iter().map(|q| q[v]).collect()
    }

    pub fn edge_color(&self, g: &Graph, u: usize, v: usize) -> Option<u8> {
        g.neighbor_index(u, v).map(|k| self.edge_colors[u][k])
    }

    /// The neighbor of `v` across its `a`-colored edge.
    pub fn neighbor_by_color(&self, g: &Graph, v: usize, a: u8) -> Option<usize> {
        self.edge_colors[v]
            .iter()
            .position(|&c| c == a)
            .map(|k| g.neighbors(v)[k] as usize)
    }

    /// Number of distinct edge colors in use.
    pub fn edge_colors_used(&self) -> usize {
        let mut seen = vec![false; 256];
        for c in self.edge_colors.iter().flatten() {
            seen[*c as usize] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// The colored `r`-ball around `v`.
    pub fn colored_ball(&self, g: &Graph, v: usize, r: usize) -> ColoredBall {
        assert!(
            r <= self.depth,
            "radius {r} exceeds bundle depth {}",
            self.depth
        );
        let ball = g.extract_ball(v, r);
        let edge_colors = (0..ball.len())
            .map(|x| {
                let gx = ball.origin()[x] as usize;
                ball.neighbors(x)
                    .iter()
                    .map(|&y| {
                        let gy = ball.origin()[y as usize] as usize;
                        self.edge_color(g, gx, gy)
                            .expect("ball edges are graph edges")
                    })
                    .collect()
            })
            .collect();
        let vertex_colors = ball
            .origin()
            .iter()
            .map(|&gx| self.tuple(gx as usize, r))
            .collect();
        ColoredBall::new(ball, edge_colors, vertex_colors)
    }

    /// Colored type of the `r`-ball around `v`.
    pub fn colored_type(&self, g: &Graph, v: usize, r: usize) -> Result<ColoredType> {
        if r > self.depth {
            return Err(Error::BundleDepth {
                need: r,
                have: self.depth,
            });
        }
        ColoredType::of(&self.colored_ball(g, v, r), self.d)
    }

    /// Checks every invariant against `g`: proper edge coloring inside
    /// `S = {0..d}`, distance-`i` validity, palette bounds.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.d != g.degree_bound() {
            return Err(Error::MixedDegreeBound {
                first: g.degree_bound(),
                other: self.d,
            });
        }
        if self.edge_colors.len() != g.n() || self.vertex_colors.len() != self.depth {
            return Err(Error::InvalidColoring(
                "shape does not match the graph".into(),
            ));
        }
        let s = edge_palette(self.d);
        for v in 0..g.n() {
            let cols = &self.edge_colors[v];
            if cols.len() != g.degree(v) {
                return Err(Error::InvalidColoring(format!(
                    "vertex {v}: wrong color count"
                )));
            }
            for (k, &c) in cols.iter().enumerate() {
                if c as usize >= s {
                    return Err(Error::ColorOutOfPalette {
                        what: "edge",
                        value: c as u64,
                        palette: s as u64,
                    });
                }
                if cols[..k].contains(&c) {
                    return Err(Error::InvalidColoring(format!(
                        "edges at vertex {v} share color {c}"
                    )));
                }
                let w = g.neighbors(v)[k] as usize;
                if self.edge_color(g, w, v) != Some(c) {
                    return Err(Error::InvalidColoring(format!("edge {v} {w} asymmetric")));
                }
            }
        }
        for i in 1..=self.depth {
            let q = &self.vertex_colors[i - 1];
            let palette = vertex_palette(self.d, i);
            if q.len() != g.n() {
                return Err(Error::InvalidColoring(format!("Q_{i} has wrong length")));
            }
            let bad = par::map_indices(Execution::default(), g.n(), |v| {
                if q[v] as u64 >= palette {
                    return Some(format!("Q_{i}({v}) = {} outside palette {palette}", q[v]));
                }
                g.distances_within(v, i)
                    .into_iter()
                    .find(|&(w, dist)| dist > 0 && q[w] == q[v])
                    .map(|(w, dist)| format!("Q_{i}: {v} and {w} at distance {dist} share a color"))
            });
            if let Some(msg) = bad.into_iter().flatten().next() {
                return Err(Error::InvalidColoring(msg));
            }
        }
        Ok(())
    }

    pub fn to_record(&self, g: &Graph) -> BundleRecord {
        BundleRecord {
            d: self.d,
            depth: self.depth,
            seed: self.seed,
            edge_palette: edge_palette(self.d),
            vertex_palettes: self.palette_sizes(),
            edges: g
                .edges()
                .map(|(u, v)| {
                    [
                        u as u32,
                        v as u32,
                        self.edge_color(g, u, v).expect("edge") as u32,
                    ]
                })
                .collect(),
            vertex_colors: self.vertex_colors.clone(),
        }
    }

    /// Rebuilds a bundle from its record and validates it against `g`.
    pub fn from_record(g: &Graph, rec: &BundleRecord) -> Result<Self> {
        let mut edge_colors: Vec<Vec<u8>> =
            (0..g.n()).map(|v| vec![u8::MAX; g.degree(v)]).collect();
        if rec.edges.len() != g.edge_count() {
            return Err(Error::InvalidColoring("edge count mismatch".into()));
        }
        for &[u, v, c] in &rec.edges {
            let (u, v) = (u as usize, v as usize);
            let c =
                u8::try_from(c).map_err(|_| Error::InvalidColoring(format!("edge color {c}")))?;
            let (Some(ku), Some(kv)) = (
                (u < g.n()).then(|| g.neighbor_index(u, v)).flatten(),
                (v < g.n()).then(|| g.neighbor_index(v, u)).flatten(),
            ) else {
                return Err(Error::InvalidColoring(format!("{u} {v} is not an edge")));
            };
            edge_colors[u][ku] = c;
            edge_colors[v][kv] = c;
        }
        let bundle = ColoringBundle {
            d: rec.d,
            depth: rec.depth,
            seed: rec.seed,
            edge_colors,
            vertex_colors: rec.vertex_colors.clone(),
        };
        bundle.validate(g)?;
        Ok(bundle)
    }
}

/// JSON form of a bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleRecord {
    pub d: usize,
    pub depth: usize,
    pub seed: Option<u64>,
    pub edge_palette: usize,
    pub vertex_palettes: Vec<u64>,
    /// `[u, v, color]` for every edge `u < v`, ascending.
    pub edges: Vec<[u32; 3]>,
    /// `vertex_colors[i - 1][v]` is `Q_i(v)`.
    pub vertex_colors: Vec<Vec<u32>>,
}
