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

//! The chain space at finite depth.
//!
//! Colored types ordered by restriction form a trie whose depth-`R` paths
//! are the chains `A_1 ≺ … ≺ A_R`. Each node carries the cylinder measure
//! of the chains through it. The involution `T_a` moves a chain's root
//! across its `a`-colored edge; on a finite chain the image is one level
//! shorter, since the neighbor's `(r-1)`-ball is all that an `r`-ball
//! reveals about it.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{BallRecord, ColoredBall};
use crate::canonical::{Code, ColoredType};
use crate::coloring::{edge_palette, ColoringBundle};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{self, Execution};
use crate::stats::{ratio, Rational};

/// A finite coherent chain: `types[i]` has radius `i + 1` and restricts to
/// `types[i - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chain {
    types: Vec<ColoredType>,
}

impl Chain {
    /// Checks radii and restriction coherence.
    pub fn new(types: Vec<ColoredType>) -> Result<Chain> {
        for (i, t) in types.iter().enumerate() {
            if t.radius() != i + 1 {
                return Err(Error::Decode(format!(
                    "chain level {} holds a radius-{} type",
                    i + 1,
                    t.radius()
                )));
            }
            if i > 0 && t.restrict()? != types[i - 1] {
                return Err(Error::Decode(format!(
                    "chain level {} does not restrict to level {i}",
                    i + 1
                )));
            }
        }
        Ok(Chain { types })
    }

    pub fn depth(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[ColoredType] {
        &self.types
    }

    /// `A_r`, `1 <= r <= depth`.
    pub fn level(&self, r: usize) -> &ColoredType {
        &self.types[r - 1]
    }

    pub fn top(&self) -> Option<&ColoredType> {
        self.types.last()
    }

    pub fn truncate(&self, depth: usize) -> Chain {
        Chain {
            types: self.types[..depth.min(self.depth())].to_vec(),
        }
    }

    /// Whether the chains agree on their first `depth` levels.
    pub fn agrees_with(&self, other: &Chain, depth: usize) -> bool {
        self.depth() >= depth
            && other.depth() >= depth
            && self.types[..depth] == other.types[..depth]
    }

    /// Ultrametric `2^{-r}` for the first level `r` where the chains
    /// differ; 0 when they agree on their common depth.
    pub fn distance(&self, other: &Chain) -> f64 {
        self.types
            .iter()
            .zip(&other.types)
            .position(|(a, b)| a != b)
            .map_or(0.0, |i| 0.5f64.powi(i as i32 + 1))
    }

    /// Whether the root carries an `a`-colored edge.
    pub fn root_has_color(&self, a: u8) -> bool {
        self.types.first().is_some_and(|t| t.root_has_color(a))
    }

    pub fn codes(&self) -> Vec<String> {
        self.types.iter().map(|t| t.code().to_hex()).collect()
    }
}

/// The chain `B_1(v) ≺ … ≺ B_depth(v)` of colored types realized by `v`.
pub fn vertex_chain(g: &Graph, bundle: &ColoringBundle, v: usize, depth: usize) -> Result<Chain> {
    if bundle.depth() < depth {
        return Err(Error::BundleDepth {
            need: depth,
            have: bundle.depth(),
        });
    }
    if depth == 0 {
        return Ok(Chain { types: Vec::new() });
    }
    let d = g.degree_bound();
    let big = bundle.colored_ball(g, v, depth);
    let mut types = Vec::with_capacity(depth);
    for r in 1..depth {
        types.push(ColoredType::of(&big.sub_ball(big.root(), r), d)?);
    }
    types.push(ColoredType::of(&big, d)?);
    Ok(Chain { types })
}

/// `T_a` on a finite chain. Without an `a`-edge at the root the chain is a
/// fixed point. Otherwise the image is `B_1 ≺ … ≺ B_{R-1}` where `B_{r-1}`
/// is the type of the `(r-1)`-ball, inside `A_r`, around the root's
/// `a`-neighbor.
pub fn apply_involution(a: u8, x: &Chain) -> Result<Chain> {
    if !x.root_has_color(a) {
        return Ok(x.clone());
    }
    if x.depth() < 2 {
        return Err(Error::InvolutionUndefined {
            color: a,
            depth: x.depth(),
        });
    }
    let d = x.types[0].degree_bound();
    let mut types = Vec::with_capacity(x.depth() - 1);
    for t in &x.types[1..] {
        let r = t.radius();
        types.push(neighbor_type(t, a, r - 1, d)?.expect("coherent chains agree on root edges"));
    }
    Ok(Chain { types })
}

/// Type of the `radius`-ball around the root's `a`-neighbor inside the
/// representative of `t`, or `None` without an `a`-edge.
fn neighbor_type(t: &ColoredType, a: u8, radius: usize, d: usize) -> Result<Option<ColoredType>> {
    let rep = t.representative();
    match rep.neighbor_by_color(rep.root(), a) {
        Some(p) => Ok(Some(ColoredType::of(&rep.sub_ball(p, radius), d)?)),
        None => Ok(None),
    }
}

/// How node measures are estimated from a sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMode {
    /// Empirical frequencies of the last (largest) graph.
    #[default]
    Last,
    /// Average of the empirical frequencies over the whole sequence.
    Cesaro,
}

/// One colored type in the trie.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrieNode {
    pub ty: ColoredType,
    /// Index of the restriction in the previous level.
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Number of vertices realizing the type (summed over the sequence in
    /// Cesàro mode).
    pub count: u64,
    /// Cylinder measure of the chains through this node.
    pub measure: Rational,
    pub representative: ColoredBall,
}

/// Trie of colored types of radius `1..=depth` with their cylinder measure.
/// Only types of positive measure appear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeTrie {
    depth: usize,
    d: usize,
    mode: EstimationMode,
    sizes: Vec<usize>,
    levels: Vec<Vec<TrieNode>>,
    index: Vec<HashMap<Code, usize>>,
}

struct Tally {
    count: u64,
    measure: Rational,
    parent: Option<Code>,
    first: ColoredBall,
}

impl TypeTrie {
    /// Trie of one graph with exact empirical measures.
    pub fn build(g: &Graph, bundle: &ColoringBundle, depth: usize) -> Result<TypeTrie> {
        Self::build_with(g, bundle, depth, Execution::default())
    }

    pub fn build_with(
        g: &Graph,
        bundle: &ColoringBundle,
        depth: usize,
        exec: Execution,
    ) -> Result<TypeTrie> {
        Self::build_sequence_with(
            std::slice::from_ref(g),
            std::slice::from_ref(bundle),
            depth,
            EstimationMode::Last,
            exec,
        )
    }

    /// Trie over a sequence: the last graph in [`EstimationMode::Last`], the
    /// average of all graphs in [`EstimationMode::Cesaro`].
    pub fn build_sequence(
        graphs: &[Graph],
        bundles: &[ColoringBundle],
        depth: usize,
        mode: EstimationMode,
    ) -> Result<TypeTrie> {
        Self::build_sequence_with(graphs, bundles, depth, mode, Execution::default())
    }

    pub fn build_sequence_with(
        graphs: &[Graph],
        bundles: &[ColoringBundle],
        depth: usize,
        mode: EstimationMode,
        exec: Execution,
    ) -> Result<TypeTrie> {
        if graphs.is_empty() || graphs.len() != bundles.len() {
            return Err(Error::SequenceTooShort {
                need: 1,
                got: graphs.len().min(bundles.len()),
            });
        }
        if depth == 0 {
            return Err(Error::DepthTooSmall { need: 1, have: 0 });
        }
        let d = graphs[0].degree_bound();
        for (g, b) in graphs.iter().zip(bundles) {
            if g.degree_bound() != d || b.degree_bound() != d {
                return Err(Error::MixedDegreeBound {
                    first: d,
                    other: g.degree_bound().max(b.degree_bound()),
                });
            }
            if b.depth() < depth {
                return Err(Error::BundleDepth {
                    need: depth,
                    have: b.depth(),
                });
            }
        }
        let used: Vec<(&Graph, &ColoringBundle)> = match mode {
            EstimationMode::Last => vec![(graphs.last().unwrap(), bundles.last().unwrap())],
            EstimationMode::Cesaro => graphs.iter().zip(bundles).collect(),
        };
        let weight = ratio(1, used.len() as u64);

        let mut tallies: Vec<BTreeMap<Code, Tally>> = (0..depth).map(|_| BTreeMap::new()).collect();
        for (g, b) in &used {
            let chains = par::try_map_indices(exec, g.n(), |v| vertex_chain(g, b, v, depth))?;
            let mut counts: Vec<BTreeMap<&Code, (u64, usize)>> = vec![BTreeMap::new(); depth];
            for (v, chain) in chains.iter().enumerate() {
                for (i, t) in chain.types.iter().enumerate() {
                    counts[i].entry(t.code()).or_insert((0, v)).0 += 1;
                }
            }
            let n = g.n() as u64;
            for (i, level) in counts.into_iter().enumerate() {
                for (code, (count, first_v)) in level {
                    let chain = &chains[first_v];
                    let slot = tallies[i].entry(code.clone()).or_insert_with(|| {
                        let big = b.colored_ball(g, first_v, i + 1);
                        Tally {
                            count: 0,
                            measure: Rational::zero(),
                            parent: (i > 0).then(|| chain.types[i - 1].code().clone()),
                            first: big,
                        }
                    });
                    slot.count += count;
                    slot.measure += ratio(count, n) * &weight;
                }
            }
        }

        let mut levels: Vec<Vec<TrieNode>> = Vec::with_capacity(depth);
        let mut index: Vec<HashMap<Code, usize>> = Vec::with_capacity(depth);
        for (i, level) in tallies.into_iter().enumerate() {
            let mut nodes = Vec::with_capacity(level.len());
            let mut idx = HashMap::with_capacity(level.len());
            for (code, t) in level {
                let parent = t.parent.as_ref().map(|pc| index[i - 1][pc]);
                idx.insert(code.clone(), nodes.len());
                nodes.push(TrieNode {
                    ty: ColoredType::from_code(code, d)?,
                    parent,
                    children: Vec::new(),
                    count: t.count,
                    measure: t.measure,
                    representative: t.first,
                });
            }
            if i > 0 {
                for (k, node) in nodes.iter().enumerate() {
                    levels[i - 1][node.parent.expect("non-root level")]
                        .children
                        .push(k);
                }
            }
            levels.push(nodes);
            index.push(idx);
        }
        Ok(TypeTrie {
            depth,
            d,
            mode,
            sizes: used.iter().map(|(g, _)| g.n()).collect(),
            levels,
            index,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> EstimationMode {
        self.mode
    }

    /// Vertex counts of the graphs the measure was estimated from.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Nodes of radius `r`, `1 <= r <= depth`, in code order.
    pub fn level(&self, r: usize) -> &[TrieNode] {
        &self.levels[r - 1]
    }

    pub fn find(&self, r: usize, code: &Code) -> Option<&TrieNode> {
        self.index
            .get(r.wrapping_sub(1))?
            .get(code)
            .map(|&i| &self.levels[r - 1][i])
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// `μ(M(A_r))`; zero for types absent from the trie.
    pub fn measure(&self, t: &ColoredType) -> Rational {
        self.find(t.radius(), t.code())
            .map_or_else(Rational::zero, |n| n.measure.clone())
    }

    /// Mutable access for fault injection in tests and tools.
    pub fn node_mut(&mut self, r: usize, i: usize) -> &mut TrieNode {
        &mut self.levels[r - 1][i]
    }

    /// Checks total mass, positivity, additivity, parent coherence and
    /// representatives. Returns one message per violation.
    pub fn check(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let total: Rational = self.levels.first().map_or_else(Rational::zero, |l| {
            l.iter().map(|n| n.measure.clone()).sum()
        });
        if !total.is_one() {
            bad.push(format!("level-1 mass is {total}, not 1"));
        }
        for (i, level) in self.levels.iter().enumerate() {
            let r = i + 1;
            for node in level {
                let code = node.ty.code();
                if node.measure <= Rational::zero() {
                    bad.push(format!(
                        "r={r} {code}: non-positive measure {}",
                        node.measure
                    ));
                }
                if node.count == 0 {
                    bad.push(format!("r={r} {code}: zero count"));
                }
                if self.mode == EstimationMode::Last {
                    if let [n] = self.sizes[..] {
                        if node.measure != ratio(node.count, n as u64) {
                            bad.push(format!(
                                "r={r} {code}: measure {} differs from count {}/{n}",
                                node.measure, node.count
                            ));
                        }
                    }
                }
                match ColoredType::of(&node.representative, self.d) {
                    Ok(t) if t == node.ty => {}
                    _ => bad.push(format!("r={r} {code}: representative has another type")),
                }
                match (r, node.parent) {
                    (1, None) => {}
                    (1, Some(_)) => bad.push(format!("r=1 {code}: level-1 node with a parent")),
                    (_, None) => bad.push(format!("r={r} {code}: missing parent")),
                    (_, Some(p)) => match node.ty.restrict() {
                        Ok(t) if t == self.levels[i - 1][p].ty => {}
                        _ => bad.push(format!("r={r} {code}: parent is not the restriction")),
                    },
                }
                if r < self.depth {
                    let sum: Rational = node
                        .children
                        .iter()
                        .map(|&c| self.levels[i + 1][c].measure.clone())
                        .sum();
                    if sum != node.measure {
                        bad.push(format!(
                            "r={r} {code}: additivity violated, measure {} but children sum to {sum}",
                            node.measure
                        ));
                    }
                    let count: u64 = node
                        .children
                        .iter()
                        .map(|&c| self.levels[i + 1][c].count)
                        .sum();
                    if count != node.count {
                        bad.push(format!(
                            "r={r} {code}: count {} but children count {count}",
                            node.count
                        ));
                    }
                }
            }
        }
        bad
    }

    /// Draws a depth-`R` chain: each step picks a child with probability
    /// `μ(child) / μ(node)`.
    pub fn sample_chain(&self, seed: u64) -> Chain {
        self.sample_chain_from(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// `count` chains from one seeded generator.
    pub fn sample_chains(&self, count: usize, seed: u64) -> Vec<Chain> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| self.sample_chain_from(&mut rng))
            .collect()
    }

    pub fn sample_chain_from<R: Rng>(&self, rng: &mut R) -> Chain {
        let pick = |rng: &mut R, options: &mut dyn Iterator<Item = (usize, f64)>| -> usize {
            let options: Vec<(usize, f64)> = options.collect();
            let total: f64 = options.iter().map(|o| o.1).sum();
            let mut u = rng.gen::<f64>() * total;
            for &(i, w) in &options {
                if u < w {
                    return i;
                }
                u -= w;
            }
            options.last().expect("nonempty level").0
        };
        let weight = |n: &TrieNode| n.measure.to_f64().unwrap_or(0.0);
        let mut types = Vec::with_capacity(self.depth);
        let mut at = pick(
            rng,
            &mut self.levels[0]
                .iter()
                .enumerate()
                .map(|(i, n)| (i, weight(n))),
        );
        types.push(self.levels[0][at].ty.clone());
        for r in 1..self.depth {
            let node = &self.levels[r - 1][at];
            at = pick(
                rng,
                &mut node
                    .children
                    .iter()
                    .map(|&c| (c, weight(&self.levels[r][c]))),
            );
            types.push(self.levels[r][at].ty.clone());
        }
        Chain { types }
    }

    pub fn to_record(&self) -> TrieRecord {
        TrieRecord {
            version: 1,
            depth: self.depth,
            d: self.d,
            mode: self.mode,
            sizes: self.sizes.clone(),
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(i, level)| {
                    level
                        .iter()
                        .map(|n| NodeRecord {
                            code: n.ty.code().to_hex(),
                            parent: n.parent.map(|p| self.levels[i - 1][p].ty.code().to_hex()),
                            count: n.count,
                            measure: n.measure.to_string(),
                            representative: BallRecord::from(&n.representative),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuilds a trie from JSON without checking its invariants; run
    /// [`TypeTrie::check`] on the result.
    pub fn from_record(rec: &TrieRecord) -> Result<TypeTrie> {
        if rec.levels.len() != rec.depth || rec.depth == 0 {
            return Err(Error::Decode("trie depth does not match its levels".into()));
        }
        let mut levels: Vec<Vec<TrieNode>> = Vec::with_capacity(rec.depth);
        let mut index: Vec<HashMap<Code, usize>> = Vec::with_capacity(rec.depth);
        for (i, level) in rec.levels.iter().enumerate() {
            let mut nodes = Vec::with_capacity(level.len());
            let mut idx = HashMap::new();
            for nr in level {
                let code = Code::from_hex(&nr.code)?;
                let parent = match (&nr.parent, i) {
                    (None, _) => None,
                    (Some(_), 0) => return Err(Error::Decode("level-1 node with a parent".into())),
                    (Some(p), _) => Some(
                        *index[i - 1]
                            .get(&Code::from_hex(p)?)
                            .ok_or_else(|| Error::Decode(format!("unknown parent {p}")))?,
                    ),
                };
                let measure = Rational::from_str(&nr.measure)
                    .map_err(|_| Error::Decode(format!("bad measure `{}`", nr.measure)))?;
                if idx.insert(code.clone(), nodes.len()).is_some() {
                    return Err(Error::Decode(format!("duplicate node {}", nr.code)));
                }
                nodes.push(TrieNode {
                    ty: ColoredType::from_code(code, rec.d)?,
                    parent,
                    children: Vec::new(),
                    count: nr.count,
                    measure,
                    representative: ColoredBall::try_from(&nr.representative)?,
                });
            }
            if i > 0 {
                for (k, node) in nodes.iter().enumerate() {
                    if let Some(p) = node.parent {
                        levels[i - 1][p].children.push(k);
                    }
                }
            }
            levels.push(nodes);
            index.push(idx);
        }
        Ok(TypeTrie {
            depth: rec.depth,
            d: rec.d,
            mode: rec.mode,
            sizes: rec.sizes.clone(),
            levels,
            index,
        })
    }
}

/// JSON form of a trie.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrieRecord {
    pub version: u32,
    pub depth: usize,
    pub d: usize,
    pub mode: EstimationMode,
    pub sizes: Vec<usize>,
    pub levels: Vec<Vec<NodeRecord>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub code: String,
    pub parent: Option<String>,
    pub count: u64,
    pub measure: String,
    pub representative: BallRecord,
}

/// One row of the invariance check: a radius-`r` type, its count and the
/// `(r+1)`-types whose `T_a`-image lands on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub code: String,
    pub tau: u64,
    pub fiber: Vec<FiberEntry>,
    pub fiber_sum: u64,
    pub measure: String,
    pub image_measure: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberEntry {
    pub code: String,
    pub tau: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub color: u8,
    pub r: usize,
    pub rows: Vec<InvarianceRow>,
    /// Vertices whose `(r+1)`-type maps to a different `r`-type than the
    /// `r`-type of their `T_a`-image.
    pub vertex_mismatches: usize,
    pub pass: bool,
}

/// Checks `τ(G, A_r) = Σ_{B_{r+1} | A_r ∼ a} τ(G, B_{r+1})` for every
/// radius-`r` type and the matching identity `μ(T_a M(A_r)) = μ(M(A_r))`
/// on the trie's measure.
///
/// The fiber of `A_r` collects the `(r+1)`-types `B` whose root either has
/// no `a`-edge and restricts to `A_r`, or has an `a`-neighbor whose `r`-ball
/// is of type `A_r`. Membership is computed from `B`'s representative and
/// cross-checked vertex by vertex in `g`.
pub fn verify_invariance(
    trie: &TypeTrie,
    g: &Graph,
    bundle: &ColoringBundle,
    a: u8,
    r: usize,
) -> Result<InvarianceReport> {
    verify_invariance_with(trie, g, bundle, a, r, Execution::default())
}

pub fn verify_invariance_with(
    trie: &TypeTrie,
    g: &Graph,
    bundle: &ColoringBundle,
    a: u8,
    r: usize,
    exec: Execution,
) -> Result<InvarianceReport> {
    if trie.depth() < r + 1 {
        return Err(Error::DepthTooSmall {
            need: r + 1,
            have: trie.depth(),
        });
    }
    if bundle.depth() < r + 1 {
        return Err(Error::BundleDepth {
            need: r + 1,
            have: bundle.depth(),
        });
    }
    if a as usize >= edge_palette(g.degree_bound()) {
        return Err(Error::ColorOutOfPalette {
            what: "edge",
            value: a as u64,
            palette: edge_palette(g.degree_bound()) as u64,
        });
    }
    let d = g.degree_bound();

    // per vertex: r-type and (r+1)-type
    let types: Vec<(ColoredType, ColoredType)> = par::try_map_indices(exec, g.n(), |v| {
        let big = bundle.colored_ball(g, v, r + 1);
        let small = ColoredType::of(&big.sub_ball(big.root(), r), d)?;
        Ok::<_, Error>((small, ColoredType::of(&big, d)?))
    })?;
    let mut tau_r: BTreeMap<ColoredType, u64> = BTreeMap::new();
    let mut tau_next: BTreeMap<ColoredType, u64> = BTreeMap::new();
    for (s, b) in &types {
        *tau_r.entry(s.clone()).or_insert(0) += 1;
        *tau_next.entry(b.clone()).or_insert(0) += 1;
    }

    // type-level image of each (r+1)-type
    let image = |b: &ColoredType| -> Result<ColoredType> {
        match neighbor_type(b, a, r, d)? {
            Some(t) => Ok(t),
            None => b.restrict(),
        }
    };
    let graph_types: Vec<&ColoredType> = tau_next.keys().collect();
    let images = par::try_map_indices(exec, graph_types.len(), |i| image(graph_types[i]))?;
    let image_of: HashMap<&ColoredType, &ColoredType> =
        graph_types.iter().copied().zip(images.iter()).collect();

    let vertex_mismatches = (0..g.n())
        .filter(|&x| {
            let target = bundle.neighbor_by_color(g, x, a).unwrap_or(x);
            image_of[&types[x].1] != &types[target].0
        })
        .count();

    let mut fibers: BTreeMap<&ColoredType, Vec<(&ColoredType, u64)>> = BTreeMap::new();
    for (b, &count) in &tau_next {
        fibers.entry(image_of[b]).or_default().push((b, count));
    }

    // measure side, over the trie's own nodes
    let mut image_measure: HashMap<ColoredType, Rational> = HashMap::new();
    let next_level = trie.level(r + 1);
    let trie_images = par::try_map_indices(exec, next_level.len(), |i| image(&next_level[i].ty))?;
    for (node, img) in next_level.iter().zip(trie_images) {
        *image_measure.entry(img).or_insert_with(Rational::zero) += &node.measure;
    }
    let measure_of = |t: &ColoredType| -> Rational {
        if r == 0 {
            Rational::one()
        } else {
            trie.measure(t)
        }
    };

    let mut keys: Vec<&ColoredType> = tau_r.keys().chain(fibers.keys().copied()).collect();
    keys.extend(image_measure.keys());
    keys.sort();
    keys.dedup();
    if r > 0 {
        let mut extra: Vec<&ColoredType> = trie
            .level(r)
            .iter()
            .map(|n| &n.ty)
            .filter(|t| keys.binary_search(t).is_err())
            .collect();
        keys.append(&mut extra);
        keys.sort();
    }

    let rows: Vec<InvarianceRow> = keys
        .into_iter()
        .map(|t| {
            let tau = tau_r.get(t).copied().unwrap_or(0);
            let fiber: Vec<FiberEntry> = fibers
                .get(t)
                .map(|f| {
                    f.iter()
                        .map(|(b, c)| FiberEntry {
                            code: b.code().to_hex(),
                            tau: *c,
                        })
                        .collect()
                })
                .unwrap_or_default();
            let fiber_sum = fiber.iter().map(|e| e.tau).sum();
            let measure = measure_of(t);
            let img = image_measure.get(t).cloned().unwrap_or_else(Rational::zero);
            InvarianceRow {
                code: t.code().to_hex(),
                tau,
                pass: tau == fiber_sum && measure == img,
                fiber,
                fiber_sum,
                measure: measure.to_string(),
                image_measure: img.to_string(),
            }
        })
        .collect();
    let pass = vertex_mismatches == 0 && rows.iter().all(|row| row.pass);
    Ok(InvarianceReport {
        color: a,
        r,
        rows,
        vertex_mismatches,
        pass,
    })
}
