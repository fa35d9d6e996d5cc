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

//! Bounded-degree simple graphs and the edge-list ingestion path.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use crate::ball::RootedBall;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Simple undirected graph on vertices `0..n` with a declared degree bound.
///
/// Adjacency lists are sorted and symmetric; every degree is at most `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    d: usize,
}

/// Options for [`load_graph`] and [`parse_edge_list`].
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Degree bound to validate against. Falls back to the bound in the file
    /// header, then to the maximum observed degree.
    pub degree_bound: Option<usize>,
    /// Admit graphs with more than one connected component.
    pub allow_disconnected: bool,
}

impl Graph {
    /// Builds a graph from an edge list. With `d == None` the bound is the
    /// maximum observed degree (at least 1).
    pub fn from_edges<I>(n: usize, edges: I, d: Option<usize>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > u32::MAX as usize {
            return Err(Error::VertexOutOfRange {
                vertex: n,
                n: u32::MAX as usize,
            });
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let v = w[0] as usize;
                return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        let d = match d {
            Some(0) => return Err(Error::ZeroDegreeBound),
            Some(d) => d,
            None => max_degree.max(1),
        };
        if let Some((vertex, list)) = adj.iter().enumerate().find(|(_, l)| l.len() > d) {
            return Err(Error::DegreeBound {
                vertex,
                degree: list.len(),
                bound: d,
            });
        }
        Ok(Graph { adj, d })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// The declared degree bound `d`.
    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Position of `v` inside the sorted adjacency list of `u`.
    pub fn neighbor_index(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].binary_search(&(v as u32)).ok()
    }

    /// Returns the same graph validated against a larger (or equal) bound.
    pub fn with_degree_bound(mut self, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDegreeBound);
        }
        if let Some((vertex, list)) = self.adj.iter().enumerate().find(|(_, l)| l.len() > d) {
            return Err(Error::DegreeBound {
                vertex,
                degree: list.len(),
                bound: d,
            });
        }
        self.d = d;
        Ok(self)
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w as usize);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// The rooted `r`-ball around `v`: the induced subgraph on every vertex
    /// within distance `r`, with local ids in BFS discovery order (neighbors
    /// visited in ascending id).
    pub fn extract_ball(&self, v: usize, r: usize) -> RootedBall {
        assert!(v < self.n(), "vertex {v} out of range");
        let mut origin: Vec<u32> = vec![v as u32];
        let mut dist: Vec<u32> = vec![0];
        let mut local = std::collections::HashMap::new();
        local.insert(v as u32, 0u32);
        let mut head = 0;
        while head < origin.len() {
            let u = origin[head] as usize;
            let du = dist[head];
            head += 1;
            if du as usize == r {
                continue;
            }
            for &w in &self.adj[u] {
                if let std::collections::hash_map::Entry::Vacant(e) = local.entry(w) {
                    e.insert(origin.len() as u32);
                    origin.push(w);
                    dist.push(du + 1);
                }
            }
        }
        let adj = origin
            .iter()
            .map(|&u| {
                let mut list: Vec<u32> = self.adj[u as usize]
                    .iter()
                    .filter_map(|w| local.get(w).copied())
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        RootedBall::from_raw(r, dist, adj, origin)
    }

    /// BFS distances from `source`, truncated at `limit` (`None` beyond it).
    pub fn distances_within(&self, source: usize, limit: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(source, 0)];
        let mut seen = std::collections::HashSet::new();
        seen.insert(source);
        let mut queue = VecDeque::from([(source, 0usize)]);
        while let Some((u, du)) = queue.pop_front() {
            if du == limit {
                continue;
            }
            for &w in &self.adj[u] {
                let w = w as usize;
                if seen.insert(w) {
                    out.push((w, du + 1));
                    queue.push_back((w, du + 1));
                }
            }
        }
        out
    }

    /// The `i`-th power: `u ~ v` iff `1 <= d(u, v) <= i`. The degree bound
    /// of the result is its maximum degree.
    pub fn power(&self, i: usize) -> Graph {
        self.power_with(i, Execution::default())
    }

    pub fn power_with(&self, i: usize, exec: Execution) -> Graph {
        assert!(i >= 1, "power exponent must be at least 1");
        if i == 1 {
            return self.clone();
        }
        let adj: Vec<Vec<u32>> = par::map_indices(exec, self.n(), |v| {
            let mut list: Vec<u32> = self
                .distances_within(v, i)
                .into_iter()
                .filter(|&(_, dist)| dist > 0)
                .map(|(w, _)| w as u32)
                .collect();
            list.sort_unstable();
            list
        });
        let d = adj.iter().map(Vec::len).max().unwrap_or(0).max(1);
        Graph { adj, d }
    }

    /// Serializes to the edge-list format accepted by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n(), self.edge_count(), self.d);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses the edge-list format: a header `<n> <m> [d]` followed by `m` lines
/// `<u> <v>`. Everything after `#` on a line is ignored.
pub fn parse_edge_list(text: &str, opts: LoadOptions) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    let fields = parse_numbers(hline, header)?;
    let (n, m, file_d) = match fields.as_slice() {
        [n, m] => (*n, *m, None),
        [n, m, d] => (*n, *m, Some(*d)),
        _ => {
            return Err(Error::Parse {
                line: hline,
                message: "header must be `<n> <m> [d]`".into(),
            })
        }
    };

    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let fields = parse_numbers(line, body)?;
        match fields.as_slice() {
            [u, v] => edges.push((*u, *v)),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "edge line must be `<u> <v>`".into(),
                })
            }
        }
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            message: format!("header declares {m} edges, found {}", edges.len()),
        });
    }

    let g = Graph::from_edges(n, edges, opts.degree_bound.or(file_d))?;
    if !opts.allow_disconnected {
        let components = g.components();
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
    }
    Ok(g)
}

fn parse_numbers(line: usize, body: &str) -> Result<Vec<usize>> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a non-negative integer, found `{tok}`"),
            })
        })
        .collect()
}

/// Reads and validates an edge-list file.
pub fn load_graph(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text, opts)
}
