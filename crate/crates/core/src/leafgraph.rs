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

//! Leafball reconstruction.
//!
//! Words over the edge palette act on a chain through the involutions and on
//! a ball through its colored edges. Quotienting the words of length `<= r`
//! by "same image chain through depth `2r`" yields a rooted graph that must
//! be isomorphic to the uncolored `r`-ball of the chain's root.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{ColoredBall, RootedBall};
use crate::canonical::BallClass;
use crate::chain::{apply_involution, vertex_chain, Chain};
use crate::coloring::{edge_palette, ColoringBundle};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{self, Execution};

/// A sequence of edge colors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn then(&self, a: u8) -> Word {
        let mut w = self.0.clone();
        w.push(a);
        Word(w)
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Word {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Walks `w` from the root: each letter crosses the edge of that color if
/// there is one. Requires `w.len() < radius` so every step starts where
/// the ball sees all incident edges.
pub fn apply_word_in_ball(ball: &ColoredBall, w: &Word) -> Result<usize> {
    if !w.is_empty() && w.len() >= ball.radius() {
        return Err(Error::WordTooLong {
            len: w.len(),
            radius: ball.radius(),
        });
    }
    Ok(walk(ball, ball.root(), w.letters()))
}

fn walk(ball: &ColoredBall, from: usize, letters: &[u8]) -> usize {
    letters
        .iter()
        .fold(from, |v, &a| ball.neighbor_by_color(v, a).unwrap_or(v))
}

/// Same walk in the host graph.
pub fn apply_word_in_graph(g: &Graph, bundle: &ColoringBundle, v: usize, w: &Word) -> usize {
    w.letters()
        .iter()
        .fold(v, |x, &a| bundle.neighbor_by_color(g, x, a).unwrap_or(x))
}

/// Reconstructed `r`-ball: vertex `i` is the class of `words[i]` and `phi[i]`
/// its image chain.
#[derive(Clone, Debug)]
pub struct LeafBall {
    pub ball: RootedBall,
    pub words: Vec<Word>,
    pub phi: Vec<Chain>,
    /// Edge colors aligned with `ball.adjacency()`.
    pub edge_colors: Vec<Vec<u8>>,
}

impl LeafBall {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn class(&self, d: usize) -> BallClass {
        BallClass::of(&self.ball, d)
    }
}

fn violation(msg: String) -> Error {
    Error::KernelViolation(msg)
}

/// Builds the `r`-ball of the leafgraph around `x` from involution words.
///
/// Classes are discovered breadth first, expanding only letters that move.
/// Every word is tracked on both sides: its image chain under iterated
/// `T_a` and its endpoint in the representative of `A_{2r}`. The two
/// quotients must coincide; any disagreement is a kernel violation.
/// Edges between two boundary classes are read from `A_{3r}`, where the
/// longer words `w·a` still resolve, and cross-checked on the chain side.
pub fn reconstruct_leafball(x: &Chain, r: usize) -> Result<LeafBall> {
    if r == 0 {
        return Ok(LeafBall {
            ball: RootedBall::from_adjacency(0, 0, vec![Vec::new()])?,
            words: vec![Word::empty()],
            phi: vec![x.clone()],
            edge_colors: vec![Vec::new()],
        });
    }
    if x.depth() < 3 * r {
        return Err(Error::DepthTooSmall {
            need: 3 * r,
            have: x.depth(),
        });
    }
    let key_depth = 2 * r;
    let palette = edge_palette(x.level(1).degree_bound()) as u8;
    let near = x.level(key_depth).representative();
    let far = x.level(3 * r).representative();

    let mut words = vec![Word::empty()];
    let mut phi = vec![x.clone()];
    let mut at_near = vec![near.root()];
    let mut by_chain: HashMap<Chain, usize> = HashMap::from([(x.truncate(key_depth), 0)]);
    let mut by_vertex: HashMap<usize, usize> = HashMap::from([(near.root(), 0)]);
    let mut edges: BTreeSet<(usize, usize, u8)> = BTreeSet::new();

    let mut c = 0;
    while c < words.len() {
        if words[c].len() == r {
            c += 1;
            continue;
        }
        for a in 0..palette {
            let graph_step = near.neighbor_by_color(at_near[c], a);
            let chain_moves = phi[c].root_has_color(a);
            if graph_step.is_some() != chain_moves {
                return Err(violation(format!(
                    "word {}·{a}: ball and chain disagree on whether the step moves",
                    words[c]
                )));
            }
            let Some(u) = graph_step else { continue };
            let y = apply_involution(a, &phi[c])?;
            let key = y.truncate(key_depth);
            let target = match (by_chain.get(&key), by_vertex.get(&u)) {
                (Some(&i), Some(&j)) if i == j => i,
                (None, None) => {
                    let i = words.len();
                    words.push(words[c].then(a));
                    phi.push(y);
                    at_near.push(u);
                    by_chain.insert(key, i);
                    by_vertex.insert(u, i);
                    i
                }
                (Some(&i), _) => {
                    return Err(violation(format!(
                        "words {}·{a} and {} have equal image chains but end at different ball vertices",
                        words[c], words[i]
                    )))
                }
                (None, Some(&j)) => {
                    return Err(violation(format!(
                        "words {}·{a} and {} end at the same ball vertex but have different image chains",
                        words[c], words[j]
                    )))
                }
            };
            edges.insert((c.min(target), c.max(target), a));
        }
        c += 1;
    }

    // boundary edges
    let at_far: Vec<usize> = words
        .iter()
        .map(|w| walk(&far, far.root(), w.letters()))
        .collect();
    let far_class: HashMap<usize, usize> =
        at_far.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if far_class.len() != words.len() {
        return Err(violation(
            "distinct classes share a vertex of the deepest representative".into(),
        ));
    }
    let inner = far.sub_ball(far.root(), r);
    if inner.len() != words.len() {
        return Err(violation(format!(
            "{} classes for an r-ball with {} vertices",
            words.len(),
            inner.len()
        )));
    }
    for c in 0..words.len() {
        if words[c].len() < r {
            continue;
        }
        for a in 0..palette {
            let Some(t) = far.neighbor_by_color(at_far[c], a) else {
                continue;
            };
            let Some(&target) = far_class.get(&t) else {
                if near
                    .neighbor_by_color(at_near[c], a)
                    .is_some_and(|u| by_vertex.contains_key(&u))
                {
                    return Err(violation(format!(
                        "word {}·{a}: representatives disagree",
                        words[c]
                    )));
                }
                continue;
            };
            if near.neighbor_by_color(at_near[c], a) != Some(at_near[target]) {
                return Err(violation(format!(
                    "word {}·{a}: representatives disagree",
                    words[c]
                )));
            }
            let y = apply_involution(a, &phi[c])?;
            let depth = y.depth().min(phi[target].depth());
            if !y.agrees_with(&phi[target], depth) {
                return Err(violation(format!(
                    "word {}·{a} reaches {} in the ball but their image chains differ",
                    words[c], words[target]
                )));
            }
            edges.insert((c.min(target), c.max(target), a));
        }
    }

    let n = words.len();
    let mut adj = vec![Vec::new(); n];
    let mut colors = vec![Vec::new(); n];
    for &(u, v, a) in &edges {
        if u == v {
            continue;
        }
        adj[u].push(v as u32);
        colors[u].push(a);
        adj[v].push(u as u32);
        colors[v].push(a);
    }
    for v in 0..n {
        let mut pairs: Vec<(u32, u8)> = adj[v]
            .iter()
            .copied()
            .zip(colors[v].iter().copied())
            .collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(violation(format!(
                "class {} gets two edges to one neighbor",
                words[v]
            )));
        }
        adj[v] = pairs.iter().map(|p| p.0).collect();
        colors[v] = pairs.iter().map(|p| p.1).collect();
    }
    Ok(LeafBall {
        ball: RootedBall::from_adjacency(0, r, adj)?,
        words,
        phi,
        edge_colors: colors,
    })
}

/// Verdict for one sampled vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexVerdict {
    pub vertex: usize,
    pub classes: usize,
    /// Reconstruction is rooted-isomorphic to the uncolored ball in `g`.
    pub isomorphic: bool,
    /// Reconstruction has the underlying class of `A_r`.
    pub matches_type: bool,
    /// Words land on distinct vertices of the ball in `g`, cover it, and
    /// class edges are edges of `g`.
    pub bijective: bool,
    /// Each image chain is the chain realized by the word's endpoint.
    pub chains_match: bool,
    pub pass: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub r: usize,
    pub sampled: usize,
    pub failures: usize,
    pub vertices: Vec<VertexVerdict>,
    pub pass: bool,
}

/// Vertices checked for a sample size: all of them when `sample >= n`,
/// otherwise a seeded sample without replacement, ascending.
pub fn sample_vertices(n: usize, sample: usize, seed: u64) -> Vec<usize> {
    if sample >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs = rand::seq::index::sample(&mut rng, n, sample).into_vec();
    vs.sort_unstable();
    vs
}

/// Reconstructs the `r`-ball of sampled vertices from their depth-`3r`
/// chains and checks the result against `g`.
pub fn verify_reconstruction(
    g: &Graph,
    bundle: &ColoringBundle,
    r: usize,
    sample: usize,
    seed: u64,
) -> Result<ReconstructionReport> {
    verify_reconstruction_with(g, bundle, r, sample, seed, Execution::default())
}

pub fn verify_reconstruction_with(
    g: &Graph,
    bundle: &ColoringBundle,
    r: usize,
    sample: usize,
    seed: u64,
    exec: Execution,
) -> Result<ReconstructionReport> {
    if bundle.depth() < 3 * r {
        return Err(Error::BundleDepth {
            need: 3 * r,
            have: bundle.depth(),
        });
    }
    let vs = sample_vertices(g.n(), sample, seed);
    let vertices = par::try_map_indices(exec, vs.len(), |i| verify_vertex(g, bundle, r, vs[i]))?;
    let failures = vertices.iter().filter(|v| !v.pass).count();
    Ok(ReconstructionReport {
        r,
        sampled: vertices.len(),
        failures,
        pass: failures == 0,
        vertices,
    })
}

fn verify_vertex(g: &Graph, bundle: &ColoringBundle, r: usize, v: usize) -> Result<VertexVerdict> {
    let d = g.degree_bound();
    let x = vertex_chain(g, bundle, v, 3 * r)?;
    let mut verdict = VertexVerdict {
        vertex: v,
        classes: 0,
        isomorphic: false,
        matches_type: false,
        bijective: false,
        chains_match: false,
        pass: false,
        failure: None,
    };
    let leaf = match reconstruct_leafball(&x, r) {
        Ok(leaf) => leaf,
        Err(Error::KernelViolation(msg)) => {
            verdict.failure = Some(msg);
            return Ok(verdict);
        }
        Err(e) => return Err(e),
    };
    verdict.classes = leaf.len();
    let truth = g.extract_ball(v, r);
    let class = leaf.class(d);
    verdict.isomorphic = class == BallClass::of(&truth, d);
    verdict.matches_type = r == 0 || class == x.level(r).underlying_class();

    let image: Vec<usize> = leaf
        .words
        .iter()
        .map(|w| apply_word_in_graph(g, bundle, v, w))
        .collect();
    let distinct: BTreeSet<usize> = image.iter().copied().collect();
    let covered: BTreeSet<usize> = truth.origin().iter().map(|&u| u as usize).collect();
    let edges_hit = leaf
        .ball
        .edges()
        .all(|(a, b)| g.neighbor_index(image[a], image[b]).is_some());
    verdict.bijective = distinct.len() == image.len()
        && distinct == covered
        && edges_hit
        && leaf.ball.edge_count() == truth.edge_count();

    let key = 2 * r;
    verdict.chains_match = image
        .iter()
        .zip(&leaf.phi)
        .all(|(&u, y)| vertex_chain(g, bundle, u, key).is_ok_and(|want| y.truncate(key) == want));

    verdict.pass =
        verdict.isomorphic && verdict.matches_type && verdict.bijective && verdict.chains_match;
    if !verdict.pass {
        verdict.failure = Some(
            [
                (!verdict.isomorphic).then_some("not isomorphic to the ball in the graph"),
                (!verdict.matches_type).then_some("class differs from the chain's type"),
                (!verdict.bijective).then_some("words do not biject onto the ball"),
                (!verdict.chains_match).then_some("image chains differ from realized chains"),
            ]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join("; "),
        );
    }
    Ok(verdict)
}
