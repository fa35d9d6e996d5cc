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

//! Canonical codes for rooted balls.
//!
//! A code is the lexicographically least serialization of a ball over all
//! labelings reachable by individualization and refinement. Refinement
//! (root, distance, color tuple, then iterated neighbor-cell multisets with
//! edge colors) only prunes the search; leaves are compared on their full
//! serialization, so equal codes mean isomorphic balls and vice versa.
//! Automorphisms discovered at equal leaves prune sibling branches.
//!
//! Byte layout (all integers big-endian):
//!
//! ```text
//! version:u8 kind:u8 radius:u8 k:u16 layer_sizes:[u16; radius+1]
//! m:u16 edges:[(u16,u16); m]            -- sorted, u < v, canonical positions
//! colored only: edge_colors:[u8; m]     -- in edge order
//!               tuples:[[u32; radius]; k] -- in position order
//! ```

use std::fmt;

use crate::ball::{ColoredBall, RootedBall};
use crate::coloring::{edge_palette, vertex_palette};
use crate::error::{Error, Result};

/// Layout version prefixed to every code.
pub const CODE_VERSION: u8 = 1;

const KIND_PLAIN: u8 = 0;
const KIND_COLORED: u8 = 1;

/// Canonical serialization of a rooted (optionally colored) ball.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code(Box<[u8]>);

impl Code {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Decode(e.to_string()))?;
        if bytes.len() < 5 {
            return Err(Error::Decode("code too short".into()));
        }
        if bytes[0] != CODE_VERSION {
            return Err(Error::Decode(format!(
                "code layout version {} (expected {CODE_VERSION})",
                bytes[0]
            )));
        }
        Ok(Code(bytes.into_boxed_slice()))
    }

    pub fn radius(&self) -> usize {
        self.0[2] as usize
    }

    pub fn is_colored(&self) -> bool {
        self.0[1] == KIND_COLORED
    }

    /// Number of vertices of the encoded ball.
    pub fn vertex_count(&self) -> usize {
        u16::from_be_bytes([self.0[3], self.0[4]]) as usize
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({})", self.to_hex())
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Rooted isomorphism class of an uncolored ball: an element of the finite
/// set of radius-`r` classes with degree bound `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallClass {
    code: Code,
    d: usize,
}

impl BallClass {
    pub fn of(ball: &RootedBall, d: usize) -> BallClass {
        BallClass {
            code: canonical_code(ball, None).expect("uncolored balls always encode"),
            d,
        }
    }

    pub fn from_code(code: Code, d: usize) -> Result<BallClass> {
        if code.is_colored() {
            return Err(Error::Decode("expected an uncolored code".into()));
        }
        decode(&code)?;
        Ok(BallClass { code, d })
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn radius(&self) -> usize {
        self.code.radius()
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn representative(&self) -> RootedBall {
        decode(&self.code)
            .expect("codes are built valid")
            .into_ball()
    }
}

/// Colored isomorphism class: the ball carries a proper edge coloring with
/// `d + 1` colors and on each vertex a tuple of `radius` distance colors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredType {
    code: Code,
    d: usize,
}

impl ColoredType {
    /// Validates the coloring against the palettes for `d` and canonicalizes.
    pub fn of(ball: &ColoredBall, d: usize) -> Result<ColoredType> {
        validate_colors(ball, d)?;
        Ok(ColoredType {
            code: canonical_code(ball.ball(), Some(ball))?,
            d,
        })
    }

    pub fn from_code(code: Code, d: usize) -> Result<ColoredType> {
        if !code.is_colored() {
            return Err(Error::Decode("expected a colored code".into()));
        }
        let rep = decode(&code)?;
        validate_colors(&rep, d)?;
        Ok(ColoredType { code, d })
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn radius(&self) -> usize {
        self.code.radius()
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn edge_palette_size(&self) -> usize {
        edge_palette(self.d)
    }

    pub fn vertex_palette_sizes(&self) -> Vec<u64> {
        (1..=self.radius())
            .map(|i| vertex_palette(self.d, i))
            .collect()
    }

    /// A concrete colored ball of this type, decoded from the code.
    pub fn representative(&self) -> ColoredBall {
        decode(&self.code).expect("codes are built valid")
    }

    /// The type of the `(r-1)`-ball around the root with every tuple cut to
    /// `r - 1` components.
    pub fn restrict(&self) -> Result<ColoredType> {
        let r = self.radius();
        if r == 0 {
            return Err(Error::RadiusZero);
        }
        let rep = self.representative();
        let sub = rep.sub_ball(rep.root(), r - 1);
        ColoredType::of(&sub, self.d)
    }

    /// The uncolored class of the same ball.
    pub fn underlying_class(&self) -> BallClass {
        BallClass::of(self.representative().ball(), self.d)
    }

    /// Whether the root has an incident edge of color `a`.
    pub fn root_has_color(&self, a: u8) -> bool {
        let rep = self.representative();
        rep.neighbor_by_color(rep.root(), a).is_some()
    }
}

fn validate_colors(ball: &ColoredBall, d: usize) -> Result<()> {
    let r = ball.radius();
    let s = edge_palette(d);
    for v in 0..ball.len() {
        let tuple = ball.vertex_color(v);
        if tuple.len() != r {
            return Err(Error::ColorTupleLength {
                vertex: v,
                got: tuple.len(),
                expected: r,
            });
        }
        for (i, &c) in tuple.iter().enumerate() {
            let palette = vertex_palette(d, i + 1);
            if c as u64 >= palette {
                return Err(Error::ColorOutOfPalette {
                    what: "vertex",
                    value: c as u64,
                    palette,
                });
            }
        }
        let colors = &ball.edge_colors()[v];
        if colors.len() != ball.ball().degree(v) {
            return Err(Error::InvalidColoring(format!(
                "vertex {v} has {} edge colors for degree {}",
                colors.len(),
                ball.ball().degree(v)
            )));
        }
        if ball.ball().degree(v) > d {
            return Err(Error::DegreeBound {
                vertex: v,
                degree: ball.ball().degree(v),
                bound: d,
            });
        }
        for (k, &c) in colors.iter().enumerate() {
            if c as usize >= s {
                return Err(Error::ColorOutOfPalette {
                    what: "edge",
                    value: c as u64,
                    palette: s as u64,
                });
            }
            if colors[..k].contains(&c) {
                return Err(Error::InvalidColoring(format!(
                    "two edges at vertex {v} share color {c}"
                )));
            }
            let w = ball.ball().neighbors(v)[k] as usize;
            if ball.edge_color(w, v) != Some(c) {
                return Err(Error::InvalidColoring(format!(
                    "edge {v} {w} colored inconsistently"
                )));
            }
        }
    }
    Ok(())
}

/// Canonical code of `ball`, colored when `colors` is given (its structure
/// must be `ball`). Tuples are not checked against palettes here.
pub fn canonical_code(ball: &RootedBall, colors: Option<&ColoredBall>) -> Result<Code> {
    if ball.radius() > u8::MAX as usize {
        return Err(Error::RadiusTooLarge(ball.radius()));
    }
    if ball.len() > u16::MAX as usize {
        return Err(Error::Decode(format!(
            "{} vertices do not fit a code",
            ball.len()
        )));
    }
    if let Some(c) = colors {
        if let Some(v) = (0..ball.len()).find(|&v| c.vertex_color(v).len() != ball.radius()) {
            return Err(Error::ColorTupleLength {
                vertex: v,
                got: c.vertex_color(v).len(),
                expected: ball.radius(),
            });
        }
    }
    let input = Input::new(ball, colors);
    let mut search = Search {
        input: &input,
        first: None,
        best: None,
        autos: Vec::new(),
    };
    let mut cell = input.initial_partition();
    input.refine(&mut cell);
    search.explore(cell, &mut Vec::new());
    let (code, _) = search.best.expect("search visits at least one leaf");
    Ok(Code(code.into_boxed_slice()))
}

struct Input<'a> {
    ball: &'a RootedBall,
    colors: Option<&'a ColoredBall>,
}

impl<'a> Input<'a> {
    fn new(ball: &'a RootedBall, colors: Option<&'a ColoredBall>) -> Self {
        Input { ball, colors }
    }

    fn len(&self) -> usize {
        self.ball.len()
    }

    fn edge_label(&self, v: usize, k: usize) -> u64 {
        self.colors.map_or(0, |c| c.edge_colors()[v][k] as u64)
    }

    fn initial_partition(&self) -> Vec<u32> {
        let k = self.len();
        let root = self.ball.root();
        let key = |v: usize| -> (bool, u32, &[u32]) {
            let tuple: &[u32] = self.colors.map_or(&[], |c| c.vertex_color(v));
            (v != root, self.ball.distances()[v], tuple)
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| key(a).cmp(&key(b)));
        let mut cell = vec![0u32; k];
        let mut rank = 0;
        for i in 1..k {
            if key(order[i]) != key(order[i - 1]) {
                rank += 1;
            }
            cell[order[i]] = rank;
        }
        cell
    }

    /// Iterated refinement to an equitable partition. Cells are ordered by
    /// (previous cell, sorted multiset of (edge label, neighbor cell)), which
    /// keeps the procedure isomorphism-invariant.
    fn refine(&self, cell: &mut [u32]) {
        let k = self.len();
        if k == 0 {
            return;
        }
        let mut cells = count_cells(cell);
        let mut sig: Vec<Vec<u64>> = vec![Vec::new(); k];
        let mut order: Vec<usize> = (0..k).collect();
        while cells < k {
            for (v, s) in sig.iter_mut().enumerate() {
                s.clear();
                s.push(cell[v] as u64);
                for (i, &w) in self.ball.neighbors(v).iter().enumerate() {
                    s.push(self.edge_label(v, i) << 32 | cell[w as usize] as u64);
                }
                s[1..].sort_unstable();
            }
            order.sort_by(|&a, &b| sig[a].cmp(&sig[b]));
            let mut rank = 0u32;
            cell[order[0]] = 0;
            for i in 1..k {
                if sig[order[i]] != sig[order[i - 1]] {
                    rank += 1;
                }
                cell[order[i]] = rank;
            }
            let next = rank as usize + 1;
            if next == cells {
                break;
            }
            cells = next;
        }
    }

    /// Serialization under the discrete partition `pos`.
    fn serialize(&self, pos: &[u32]) -> Vec<u8> {
        let k = self.len();
        let r = self.ball.radius();
        let colored = self.colors.is_some();
        let mut edges: Vec<(u16, u16, u8)> = Vec::with_capacity(self.ball.edge_count());
        for v in 0..k {
            for (i, &w) in self.ball.neighbors(v).iter().enumerate() {
                let w = w as usize;
                if v < w {
                    let (a, b) = (pos[v] as u16, pos[w] as u16);
                    edges.push((a.min(b), a.max(b), self.edge_label(v, i) as u8));
                }
            }
        }
        edges.sort_unstable();

        let mut out = Vec::with_capacity(8 + 2 * r + 5 * edges.len() + 4 * k * r);
        out.push(CODE_VERSION);
        out.push(if colored { KIND_COLORED } else { KIND_PLAIN });
        out.push(r as u8);
        out.extend_from_slice(&(k as u16).to_be_bytes());
        let mut layers = vec![0u16; r + 1];
        for &d in self.ball.distances() {
            layers[d as usize] += 1;
        }
        for l in layers {
            out.extend_from_slice(&l.to_be_bytes());
        }
        out.extend_from_slice(&(edges.len() as u16).to_be_bytes());
        for &(a, b, _) in &edges {
            out.extend_from_slice(&a.to_be_bytes());
            out.extend_from_slice(&b.to_be_bytes());
        }
        if let Some(c) = self.colors {
            out.extend(edges.iter().map(|e| e.2));
            let mut inv = vec![0usize; k];
            for v in 0..k {
                inv[pos[v] as usize] = v;
            }
            for &v in &inv {
                for &x in c.vertex_color(v) {
                    out.extend_from_slice(&x.to_be_bytes());
                }
            }
        }
        out
    }
}

fn count_cells(cell: &[u32]) -> usize {
    cell.iter().max().map_or(0, |&m| m as usize + 1)
}

fn individualize(cell: &[u32], v: usize) -> Vec<u32> {
    let c = cell[v];
    cell.iter()
        .enumerate()
        .map(|(u, &x)| {
            if x > c || (x == c && u != v) {
                x + 1
            } else {
                x
            }
        })
        .collect()
}

struct Leaf {
    code: Vec<u8>,
    pos: Vec<u32>,
    path: Vec<usize>,
}

struct Search<'a, 'b> {
    input: &'b Input<'a>,
    first: Option<Leaf>,
    best: Option<(Vec<u8>, Vec<u32>)>,
    /// Automorphisms found so far, as vertex maps.
    autos: Vec<Vec<u32>>,
}

impl Search<'_, '_> {
    /// Depth-first search below the node reached by individualizing `path`.
    /// Returns `Some(j)` when the remaining work up to search depth `j` is
    /// redundant because an automorphism maps it onto the first path.
    fn explore(&mut self, cell: Vec<u32>, path: &mut Vec<usize>) -> Option<usize> {
        let k = cell.len();
        if count_cells(&cell) == k {
            return self.leaf(cell, path);
        }
        let level = path.len();
        let target = {
            let mut size = vec![0u32; k];
            for &c in &cell {
                size[c as usize] += 1;
            }
            size.iter().position(|&s| s > 1).expect("non-discrete") as u32
        };
        let candidates: Vec<usize> = (0..k).filter(|&v| cell[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for u in candidates {
            if !explored.is_empty() && self.same_orbit(u, &explored, path) {
                continue;
            }
            explored.push(u);
            let mut next = individualize(&cell, u);
            self.input.refine(&mut next);
            path.push(u);
            let jump = self.explore(next, path);
            path.pop();
            if let Some(j) = jump {
                if j < level {
                    return Some(j);
                }
            }
        }
        None
    }

    fn leaf(&mut self, pos: Vec<u32>, path: &[usize]) -> Option<usize> {
        let code = self.input.serialize(&pos);
        let Some(first) = &self.first else {
            self.best = Some((code.clone(), pos.clone()));
            self.first = Some(Leaf {
                code,
                pos,
                path: path.to_vec(),
            });
            return None;
        };
        if code == first.code {
            self.autos.push(automorphism(&first.pos, &pos));
            let common = first
                .path
                .iter()
                .zip(path)
                .take_while(|(a, b)| a == b)
                .count();
            return Some(common);
        }
        let (best_code, best_pos) = self.best.as_ref().expect("set with first");
        match code.cmp(best_code) {
            std::cmp::Ordering::Less => self.best = Some((code, pos)),
            std::cmp::Ordering::Equal => {
                let gamma = automorphism(best_pos, &pos);
                self.autos.push(gamma);
            }
            std::cmp::Ordering::Greater => {}
        }
        None
    }

    /// Whether `u` shares an orbit with an explored vertex under the group
    /// generated by known automorphisms fixing `path` pointwise.
    fn same_orbit(&self, u: usize, explored: &[usize], path: &[usize]) -> bool {
        let k = self.input.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut any = false;
        for gamma in &self.autos {
            if path.iter().any(|&p| gamma[p] as usize != p) {
                continue;
            }
            any = true;
            for (v, &img) in gamma.iter().enumerate() {
                let (a, b) = (find(&mut parent, v), find(&mut parent, img as usize));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        if !any {
            return false;
        }
        let ru = find(&mut parent, u);
        explored.iter().any(|&e| find(&mut parent, e) == ru)
    }
}

/// The vertex map sending each vertex labeled `p` under `from` to the vertex
/// labeled `p` under `to`.
fn automorphism(from: &[u32], to: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; to.len()];
    for (v, &p) in to.iter().enumerate() {
        inv[p as usize] = v as u32;
    }
    from.iter().map(|&p| inv[p as usize]).collect()
}

/// Decodes a code into its canonical representative: vertex `i` is the
/// vertex at canonical position `i`, the root is vertex 0. Uncolored codes
/// decode with empty colorings.
pub fn decode(code: &Code) -> Result<ColoredBall> {
    let bytes = code.as_bytes();
    let mut rd = Reader { bytes, at: 0 };
    let version = rd.u8()?;
    if version != CODE_VERSION {
        return Err(Error::Decode(format!("unknown layout version {version}")));
    }
    let kind = rd.u8()?;
    if kind != KIND_PLAIN && kind != KIND_COLORED {
        return Err(Error::Decode(format!("unknown kind {kind}")));
    }
    let r = rd.u8()? as usize;
    let k = rd.u16()? as usize;
    if k == 0 {
        return Err(Error::Decode("empty ball".into()));
    }
    let mut layers = Vec::with_capacity(r + 1);
    for _ in 0..=r {
        layers.push(rd.u16()? as usize);
    }
    if layers.iter().sum::<usize>() != k || layers[0] != 1 {
        return Err(Error::Decode("layer sizes inconsistent".into()));
    }
    let m = rd.u16()? as usize;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (a, b) = (rd.u16()? as usize, rd.u16()? as usize);
        if a >= b || b >= k {
            return Err(Error::Decode(format!("bad edge {a} {b}")));
        }
        edges.push((a, b));
    }
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in &edges {
        adj[a].push(b as u32);
        adj[b].push(a as u32);
    }
    let ball = RootedBall::from_adjacency(0, r, adj)?;
    let mut expected = Vec::with_capacity(k);
    for (dist, &size) in layers.iter().enumerate() {
        expected.extend(std::iter::repeat_n(dist as u32, size));
    }
    if ball.distances() != expected.as_slice() {
        return Err(Error::Decode("layers disagree with distances".into()));
    }

    let (edge_colors, vertex_colors) = if kind == KIND_COLORED {
        let mut edge_colors: Vec<Vec<u8>> = (0..k).map(|v| vec![0; ball.degree(v)]).collect();
        for &(a, b) in &edges {
            let c = rd.u8()?;
            let ka = ball.neighbors(a).binary_search(&(b as u32)).expect("edge");
            let kb = ball.neighbors(b).binary_search(&(a as u32)).expect("edge");
            edge_colors[a][ka] = c;
            edge_colors[b][kb] = c;
        }
        let mut vertex_colors = Vec::with_capacity(k);
        for _ in 0..k {
            let mut t = Vec::with_capacity(r);
            for _ in 0..r {
                t.push(rd.u32()?);
            }
            vertex_colors.push(t);
        }
        (edge_colors, vertex_colors)
    } else {
        (
            (0..k).map(|v| vec![0; ball.degree(v)]).collect(),
            vec![Vec::new(); k],
        )
    };
    if rd.at != bytes.len() {
        return Err(Error::Decode("trailing bytes".into()));
    }
    Ok(ColoredBall::new(ball, edge_colors, vertex_colors))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let s = self
            .bytes
            .get(self.at..self.at + N)
            .ok_or_else(|| Error::Decode("truncated code".into()))?;
        self.at += N;
        Ok(s.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take()?))
    }
}
