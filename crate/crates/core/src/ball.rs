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

//! Rooted balls, uncolored and colored.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rooted graph whose vertices all lie within `radius` of the root.
///
/// Balls cut out of a host graph are induced subgraphs; vertices strictly
/// inside the radius keep their full host neighborhood.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedBall {
    root: usize,
    radius: usize,
    dist: Vec<u32>,
    adj: Vec<Vec<u32>>,
    origin: Vec<u32>,
}

impl RootedBall {
    pub(crate) fn from_raw(
        radius: usize,
        dist: Vec<u32>,
        adj: Vec<Vec<u32>>,
        origin: Vec<u32>,
    ) -> Self {
        RootedBall {
            root: 0,
            radius,
            dist,
            adj,
            origin,
        }
    }

    /// Builds a ball from adjacency lists, computing distances from `root`.
    /// Fails if the adjacency is not simple and symmetric or a vertex lies
    /// beyond `radius`.
    pub fn from_adjacency(root: usize, radius: usize, mut adj: Vec<Vec<u32>>) -> Result<Self> {
        let k = adj.len();
        if root >= k {
            return Err(Error::VertexOutOfRange { vertex: root, n: k });
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Decode(format!("duplicate neighbor at {u}")));
            }
            if list.iter().any(|&w| w as usize == u || w as usize >= k) {
                return Err(Error::Decode(format!("bad neighbor at {u}")));
            }
        }
        for (u, list) in adj.iter().enumerate() {
            for &w in list {
                if adj[w as usize].binary_search(&(u as u32)).is_err() {
                    return Err(Error::Decode(format!("asymmetric edge {u} {w}")));
                }
            }
        }
        let dist = bfs(&adj, root);
        if let Some(v) = dist
            .iter()
            .position(|&d| d == u32::MAX || d as usize > radius)
        {
            return Err(Error::Decode(format!(
                "vertex {v} is farther than radius {radius} from the root"
            )));
        }
        Ok(RootedBall {
            root,
            radius,
            dist,
            adj,
            origin: (0..k as u32).collect(),
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Distance from the root.
    pub fn dist(&self, v: usize) -> usize {
        self.dist[v] as usize
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adj
    }

    /// Host-graph id of each local vertex (identity for balls not cut from a
    /// host).
    pub fn origin(&self) -> &[u32] {
        &self.origin
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// The `radius`-ball around `center` computed inside this ball, with the
    /// new-to-old vertex map. Callers guarantee that the result is the true
    /// ball, i.e. that every vertex the walk passes through keeps its full
    /// neighborhood here.
    pub fn sub_ball(&self, center: usize, radius: usize) -> (RootedBall, Vec<usize>) {
        let mut order = vec![center];
        let mut dist = vec![0u32];
        let mut local = vec![u32::MAX; self.len()];
        local[center] = 0;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            let du = dist[head];
            head += 1;
            if du as usize == radius {
                continue;
            }
            for &w in &self.adj[u] {
                let w = w as usize;
                if local[w] == u32::MAX {
                    local[w] = order.len() as u32;
                    order.push(w);
                    dist.push(du + 1);
                }
            }
        }
        let adj = order
            .iter()
            .map(|&u| {
                let mut list: Vec<u32> = self.adj[u]
                    .iter()
                    .map(|&w| local[w as usize])
                    .filter(|&l| l != u32::MAX)
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        let origin = order.iter().map(|&u| self.origin[u]).collect();
        (
            RootedBall {
                root: 0,
                radius,
                dist,
                adj,
                origin,
            },
            order,
        )
    }

    /// Same ball with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> RootedBall {
        let k = self.len();
        assert_eq!(perm.len(), k);
        let mut adj = vec![Vec::new(); k];
        let mut dist = vec![0; k];
        let mut origin = vec![0; k];
        for v in 0..k {
            let mut list: Vec<u32> = self.adj[v]
                .iter()
                .map(|&w| perm[w as usize] as u32)
                .collect();
            list.sort_unstable();
            adj[perm[v]] = list;
            dist[perm[v]] = self.dist[v];
            origin[perm[v]] = self.origin[v];
        }
        RootedBall {
            root: perm[self.root],
            radius: self.radius,
            dist,
            adj,
            origin,
        }
    }
}

fn bfs(adj: &[Vec<u32>], root: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[u] + 1;
                queue.push_back(w as usize);
            }
        }
    }
    dist
}

/// A rooted ball with an edge coloring (aligned with the adjacency lists)
/// and a color tuple of length `radius` on every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredBall {
    ball: RootedBall,
    edge_colors: Vec<Vec<u8>>,
    vertex_colors: Vec<Vec<u32>>,
}

impl ColoredBall {
    /// `edge_colors[v][k]` colors the edge to `ball.neighbors(v)[k]`.
    pub fn new(ball: RootedBall, edge_colors: Vec<Vec<u8>>, vertex_colors: Vec<Vec<u32>>) -> Self {
        ColoredBall {
            ball,
            edge_colors,
            vertex_colors,
        }
    }

    pub fn ball(&self) -> &RootedBall {
        &self.ball
    }

    pub fn into_ball(self) -> RootedBall {
        self.ball
    }

    pub fn radius(&self) -> usize {
        self.ball.radius
    }

    pub fn len(&self) -> usize {
        self.ball.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ball.is_empty()
    }

    pub fn root(&self) -> usize {
        self.ball.root
    }

    pub fn edge_colors(&self) -> &[Vec<u8>] {
        &self.edge_colors
    }

    pub fn vertex_colors(&self) -> &[Vec<u32>] {
        &self.vertex_colors
    }

    pub fn vertex_color(&self, v: usize) -> &[u32] {
        &self.vertex_colors[v]
    }

    /// Color of the edge `{u, w}`, if present.
    pub fn edge_color(&self, u: usize, w: usize) -> Option<u8> {
        let k = self.ball.adj[u].binary_search(&(w as u32)).ok()?;
        Some(self.edge_colors[u][k])
    }

    /// The neighbor of `u` across its `a`-colored edge.
    pub fn neighbor_by_color(&self, u: usize, a: u8) -> Option<usize> {
        self.edge_colors[u]
            .iter()
            .position(|&c| c == a)
            .map(|k| self.ball.adj[u][k] as usize)
    }

    /// Colored edges `(u, v, color)` with `u < v`.
    pub fn colored_edges(&self) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        self.ball.adj.iter().enumerate().flat_map(move |(u, list)| {
            list.iter().enumerate().filter_map(move |(k, &v)| {
                let v = v as usize;
                (u < v).then(|| (u, v, self.edge_colors[u][k]))
            })
        })
    }

    /// The `radius`-ball around `center` with every color tuple cut to its
    /// first `radius` components.
    pub fn sub_ball(&self, center: usize, radius: usize) -> ColoredBall {
        let (ball, order) = self.ball.sub_ball(center, radius);
        let edge_colors = order
            .iter()
            .zip(&ball.adj)
            .map(|(&old, list)| {
                list.iter()
                    .map(|&w| {
                        let w_old = order[w as usize];
                        self.edge_color(old, w_old).expect("induced edge")
                    })
                    .collect()
            })
            .collect();
        let vertex_colors = order
            .iter()
            .map(|&old| {
                self.vertex_colors[old][..radius.min(self.vertex_colors[old].len())].to_vec()
            })
            .collect();
        ColoredBall {
            ball,
            edge_colors,
            vertex_colors,
        }
    }

    /// Same colored ball with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> ColoredBall {
        let ball = self.ball.relabeled(perm);
        let k = self.len();
        let mut edge_colors = vec![Vec::new(); k];
        let mut vertex_colors = vec![Vec::new(); k];
        for v in 0..k {
            let nv = perm[v];
            edge_colors[nv] = ball.adj[nv]
                .iter()
                .map(|&nw| {
                    let w = perm
                        .iter()
                        .position(|&p| p == nw as usize)
                        .expect("permutation");
                    self.edge_color(v, w).expect("edge")
                })
                .collect();
            vertex_colors[nv] = self.vertex_colors[v].clone();
        }
        ColoredBall {
            ball,
            edge_colors,
            vertex_colors,
        }
    }
}

/// Plain serializable form of a colored ball, used in trie reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRecord {
    pub radius: usize,
    pub root: usize,
    pub vertices: usize,
    /// `[u, v, color]` triples with `u < v`.
    pub edges: Vec<[u32; 3]>,
    pub vertex_colors: Vec<Vec<u32>>,
}

impl From<&ColoredBall> for BallRecord {
    fn from(b: &ColoredBall) -> Self {
        BallRecord {
            radius: b.radius(),
            root: b.root(),
            vertices: b.len(),
            edges: b
                .colored_edges()
                .map(|(u, v, c)| [u as u32, v as u32, c as u32])
                .collect(),
            vertex_colors: b.vertex_colors.clone(),
        }
    }
}

impl TryFrom<&BallRecord> for ColoredBall {
    type Error = Error;

    fn try_from(rec: &BallRecord) -> Result<Self> {
        let mut adj = vec![Vec::new(); rec.vertices];
        for &[u, v, _] in &rec.edges {
            if u as usize >= rec.vertices || v as usize >= rec.vertices {
                return Err(Error::Decode(format!("edge {u} {v} out of range")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let ball = RootedBall::from_adjacency(rec.root, rec.radius, adj)?;
        let mut edge_colors: Vec<Vec<u8>> = ball.adj.iter().map(|l| vec![0; l.len()]).collect();
        for &[u, v, c] in &rec.edges {
            let c = u8::try_from(c).map_err(|_| Error::Decode(format!("edge color {c}")))?;
            let (u, v) = (u as usize, v as usize);
            let ku = ball.adj[u].binary_search(&(v as u32)).expect("edge");
            let kv = ball.adj[v].binary_search(&(u as u32)).expect("edge");
            edge_colors[u][ku] = c;
            edge_colors[v][kv] = c;
        }
        if rec.vertex_colors.len() != rec.vertices {
            return Err(Error::Decode("vertex color count mismatch".into()));
        }
        Ok(ColoredBall {
            ball,
            edge_colors,
            vertex_colors: rec.vertex_colors.clone(),
        })
    }
}
