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

//! Empirical neighborhood distributions and convergence diagnostics.
//!
//! Frequencies are exact rationals `count / n`, so identities between
//! distributions can be asserted with zero tolerance.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::canonical::{BallClass, Code, ColoredType};
use crate::coloring::ColoringBundle;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{self, Execution};

pub type Rational = BigRational;

pub(crate) fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Distribution of radius-`r` classes (or colored types) over the vertices
/// of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDistribution {
    r: usize,
    n: usize,
    d: usize,
    colored: bool,
    counts: BTreeMap<Code, u64>,
}

impl TypeDistribution {
    /// Assembles a distribution from raw counts. Counts must be positive and
    /// sum to `n`.
    pub fn from_counts(
        r: usize,
        d: usize,
        colored: bool,
        counts: BTreeMap<Code, u64>,
    ) -> Result<Self> {
        if counts.values().any(|&c| c == 0) {
            return Err(Error::Incomparable("zero count in distribution".into()));
        }
        let n = counts.values().sum::<u64>() as usize;
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(TypeDistribution {
            r,
            n,
            d,
            colored,
            counts,
        })
    }

    pub fn radius(&self) -> usize {
        self.r
    }

    /// Number of vertices tallied.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn is_colored(&self) -> bool {
        self.colored
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `T(G, A)` as a count (`τ` for colored types).
    pub fn count(&self, code: &Code) -> u64 {
        self.counts.get(code).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<Code, u64> {
        &self.counts
    }

    pub fn frequency(&self, code: &Code) -> Rational {
        ratio(self.count(code), self.n as u64)
    }

    /// `(code, count, frequency)` in code order.
    pub fn entries(&self) -> impl Iterator<Item = (&Code, u64, Rational)> + '_ {
        self.counts
            .iter()
            .map(|(c, &k)| (c, k, ratio(k, self.n as u64)))
    }

    pub fn total_frequency(&self) -> Rational {
        self.entries().map(|(_, _, f)| f).sum()
    }

    /// Aggregates counts along `f`, e.g. forgetting colors or restricting
    /// to a smaller radius.
    pub fn pushforward<F>(&self, r: usize, colored: bool, mut f: F) -> Result<TypeDistribution>
    where
        F: FnMut(&Code) -> Result<Code>,
    {
        let mut counts = BTreeMap::new();
        for (code, &k) in &self.counts {
            *counts.entry(f(code)?).or_insert(0) += k;
        }
        Ok(TypeDistribution {
            r,
            n: self.n,
            d: self.d,
            colored,
            counts,
        })
    }

    /// Colored distribution mapped to uncolored classes.
    pub fn forget_colors(&self) -> Result<TypeDistribution> {
        let d = self.d;
        self.pushforward(self.r, false, |c| {
            Ok(ColoredType::from_code(c.clone(), d)?
                .underlying_class()
                .code()
                .clone())
        })
    }

    /// Colored distribution at radius `r` mapped to radius `r - 1`.
    pub fn restrict(&self) -> Result<TypeDistribution> {
        if self.r == 0 {
            return Err(Error::RadiusZero);
        }
        let d = self.d;
        if self.colored {
            self.pushforward(self.r - 1, true, |c| {
                Ok(ColoredType::from_code(c.clone(), d)?
                    .restrict()?
                    .code()
                    .clone())
            })
        } else {
            self.pushforward(self.r - 1, false, |c| {
                let rep = BallClass::from_code(c.clone(), d)?.representative();
                let (sub, _) = rep.sub_ball(rep.root(), rep.radius() - 1);
                Ok(BallClass::of(&sub, d).code().clone())
            })
        }
    }

    pub fn to_record(&self) -> DistributionRecord {
        DistributionRecord {
            r: self.r,
            n: self.n,
            d: self.d,
            colored: self.colored,
            entries: self
                .entries()
                .map(|(code, count, f)| EntryRecord {
                    code: code.to_hex(),
                    count,
                    frequency: f.to_string(),
                })
                .collect(),
        }
    }
}

/// JSON form of a distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub r: usize,
    pub n: usize,
    pub d: usize,
    pub colored: bool,
    pub entries: Vec<EntryRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub code: String,
    pub count: u64,
    /// Exact `count / n`, reduced, as `p/q`.
    pub frequency: String,
}

fn tally(codes: impl IntoIterator<Item = Code>) -> BTreeMap<Code, u64> {
    let mut counts = BTreeMap::new();
    for c in codes {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts
}

/// Distribution of `r`-ball classes of `g`, colored by `bundle` if given.
pub fn distribution(
    g: &Graph,
    r: usize,
    bundle: Option<&ColoringBundle>,
) -> Result<TypeDistribution> {
    distribution_with(g, r, bundle, Execution::default())
}

pub fn distribution_with(
    g: &Graph,
    r: usize,
    bundle: Option<&ColoringBundle>,
    exec: Execution,
) -> Result<TypeDistribution> {
    Ok(profile_with(g, r, r, bundle, exec)?
        .pop()
        .expect("one radius"))
}

/// Distributions for every radius in `lo..=hi`, extracting each vertex's
/// largest ball once.
pub fn profile_with(
    g: &Graph,
    lo: usize,
    hi: usize,
    bundle: Option<&ColoringBundle>,
    exec: Execution,
) -> Result<Vec<TypeDistribution>> {
    assert!(lo <= hi);
    if let Some(b) = bundle {
        if b.depth() < hi {
            return Err(Error::BundleDepth {
                need: hi,
                have: b.depth(),
            });
        }
        if b.degree_bound() != g.degree_bound() {
            return Err(Error::MixedDegreeBound {
                first: g.degree_bound(),
                other: b.degree_bound(),
            });
        }
    }
    let d = g.degree_bound();
    let per_vertex: Vec<Vec<Code>> = par::try_map_indices(exec, g.n(), |v| -> Result<Vec<Code>> {
        match bundle {
            Some(b) => {
                let big = b.colored_ball(g, v, hi);
                (lo..=hi)
                    .map(|r| {
                        let ball = if r == hi {
                            big.clone()
                        } else {
                            big.sub_ball(big.root(), r)
                        };
                        Ok(ColoredType::of(&ball, d)?.code().clone())
                    })
                    .collect()
            }
            None => {
                let big = g.extract_ball(v, hi);
                Ok((lo..=hi)
                    .map(|r| {
                        if r == hi {
                            BallClass::of(&big, d).code().clone()
                        } else {
                            BallClass::of(&big.sub_ball(0, r).0, d).code().clone()
                        }
                    })
                    .collect())
            }
        }
    })?;
    Ok((lo..=hi)
        .enumerate()
        .map(|(i, r)| TypeDistribution {
            r,
            n: g.n(),
            d,
            colored: bundle.is_some(),
            counts: tally(per_vertex.iter().map(|codes| codes[i].clone())),
        })
        .collect())
}

/// Total variation distance `½ Σ |p(A) − q(A)|` over the union of supports.
pub fn tv_distance(p: &TypeDistribution, q: &TypeDistribution) -> Result<Rational> {
    if p.r != q.r || p.colored != q.colored || p.d != q.d {
        return Err(Error::Incomparable(format!(
            "(r={}, colored={}, d={}) vs (r={}, colored={}, d={})",
            p.r, p.colored, p.d, q.r, q.colored, q.d
        )));
    }
    let (np, nq) = (BigInt::from(p.n), BigInt::from(q.n));
    let mut total = BigInt::zero();
    let mut add = |a: u64, b: u64| {
        total += (BigInt::from(a) * &nq - BigInt::from(b) * &np).abs();
    };
    for (code, &a) in &p.counts {
        add(a, q.count(code));
    }
    for (code, &b) in &q.counts {
        if !p.counts.contains_key(code) {
            add(0, b);
        }
    }
    Ok(Rational::new(total, BigInt::from(2) * np * nq))
}

/// Convergence diagnostics at one radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusVerdict {
    pub r: usize,
    /// TV distance between consecutive graphs.
    pub tv: Vec<Rational>,
    pub converged: bool,
}

/// Per-graph distributions for `r = 1..=depth`, consecutive TV distances
/// and a convergence verdict per radius.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceReport {
    pub depth: usize,
    pub epsilon: f64,
    pub sizes: Vec<usize>,
    /// `uncolored[i][r - 1]` for graph `i`.
    pub uncolored: Vec<Vec<TypeDistribution>>,
    pub uncolored_verdicts: Vec<RadiusVerdict>,
    pub colored: Option<Vec<Vec<TypeDistribution>>>,
    pub colored_verdicts: Option<Vec<RadiusVerdict>>,
}

/// Number of trailing TV distances that must be within tolerance: the last
/// half (rounded up) of the `k - 1` consecutive distances of a length-`k`
/// sequence.
pub fn tail_len(tv_count: usize) -> usize {
    tv_count.div_ceil(2)
}

/// Decision rule: converged iff the last `⌈(k-1)/2⌉` consecutive TV
/// distances are all at most `epsilon`.
pub fn converged(tv: &[Rational], epsilon: f64) -> bool {
    let eps = Rational::from_f64(epsilon).expect("finite epsilon");
    let tail = tail_len(tv.len());
    !tv.is_empty() && tv[tv.len() - tail..].iter().all(|t| *t <= eps)
}

/// Distributions and verdicts for a graph sequence; colored statistics are
/// added when one bundle per graph is supplied.
pub fn analyze_sequence(
    graphs: &[Graph],
    depth: usize,
    epsilon: f64,
    bundles: Option<&[ColoringBundle]>,
) -> Result<SequenceReport> {
    analyze_sequence_with(graphs, depth, epsilon, bundles, Execution::default())
}

pub fn analyze_sequence_with(
    graphs: &[Graph],
    depth: usize,
    epsilon: f64,
    bundles: Option<&[ColoringBundle]>,
    exec: Execution,
) -> Result<SequenceReport> {
    if graphs.len() < 2 {
        return Err(Error::SequenceTooShort {
            need: 2,
            got: graphs.len(),
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Incomparable(format!(
            "tolerance must be positive, got {epsilon}"
        )));
    }
    if depth == 0 {
        return Err(Error::DepthTooSmall { need: 1, have: 0 });
    }
    let d = graphs[0].degree_bound();
    if let Some(g) = graphs.iter().find(|g| g.degree_bound() != d) {
        return Err(Error::MixedDegreeBound {
            first: d,
            other: g.degree_bound(),
        });
    }
    if let Some(b) = bundles {
        if b.len() != graphs.len() {
            return Err(Error::Incomparable("one bundle per graph required".into()));
        }
    }

    let uncolored: Vec<Vec<TypeDistribution>> = graphs
        .iter()
        .map(|g| profile_with(g, 1, depth, None, exec))
        .collect::<Result<_>>()?;
    let colored: Option<Vec<Vec<TypeDistribution>>> = bundles
        .map(|bs| {
            graphs
                .iter()
                .zip(bs)
                .map(|(g, b)| profile_with(g, 1, depth, Some(b), exec))
                .collect::<Result<_>>()
        })
        .transpose()?;

    let verdicts = |dists: &[Vec<TypeDistribution>]| -> Result<Vec<RadiusVerdict>> {
        (1..=depth)
            .map(|r| {
                let tv = dists
                    .windows(2)
                    .map(|w| tv_distance(&w[0][r - 1], &w[1][r - 1]))
                    .collect::<Result<Vec<_>>>()?;
                let converged = converged(&tv, epsilon);
                Ok(RadiusVerdict { r, tv, converged })
            })
            .collect()
    };
    let uncolored_verdicts = verdicts(&uncolored)?;
    let colored_verdicts = colored.as_deref().map(verdicts).transpose()?;
    Ok(SequenceReport {
        depth,
        epsilon,
        sizes: graphs.iter().map(Graph::n).collect(),
        uncolored,
        uncolored_verdicts,
        colored,
        colored_verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, path, single_vertex};

    #[test]
    fn cycle_is_a_point_mass() {
        let p = distribution(&cycle(10).unwrap(), 1, None).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.total_frequency(), ratio(1, 1));
    }

    #[test]
    fn path_has_endpoint_mass() {
        let p = distribution(&path(10).unwrap(), 1, None).unwrap();
        let mut freqs: Vec<_> = p.entries().map(|(_, _, f)| f).collect();
        freqs.sort();
        assert_eq!(freqs, vec![ratio(1, 5), ratio(4, 5)]);
    }

    #[test]
    fn single_vertex_radius_zero() {
        let p = distribution(&single_vertex(), 0, None).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.frequency(p.counts().keys().next().unwrap()), ratio(1, 1));
    }

    #[test]
    fn tv_examples() {
        let c10 = distribution(&cycle(10).unwrap(), 1, None).unwrap();
        let c12 = distribution(&cycle(12).unwrap(), 1, None).unwrap();
        let p10 = distribution(&path(10).unwrap(), 1, None).unwrap();
        assert!(tv_distance(&c10, &c10).unwrap().is_zero());
        assert!(tv_distance(&c10, &c12).unwrap().is_zero());
        assert_eq!(tv_distance(&c10, &p10).unwrap(), ratio(1, 5));
        let p10_r2 = distribution(&path(10).unwrap(), 2, None).unwrap();
        assert!(matches!(
            tv_distance(&c10, &p10_r2),
            Err(Error::Incomparable(_))
        ));
    }

    #[test]
    fn bundle_depth_is_checked() {
        let g = cycle(6).unwrap();
        let b = ColoringBundle::build(&g, 1).unwrap();
        assert!(matches!(
            distribution(&g, 2, Some(&b)),
            Err(Error::BundleDepth { need: 2, have: 1 })
        ));
    }

    #[test]
    fn decision_rule() {
        assert_eq!(tail_len(1), 1);
        assert_eq!(tail_len(2), 1);
        assert_eq!(tail_len(3), 2);
        assert!(converged(&[ratio(1, 10), ratio(1, 20)], 0.05));
        assert!(!converged(
            &[ratio(1, 20), ratio(1, 10), ratio(1, 20)],
            0.05
        ));
        assert!(!converged(&[ratio(1, 5)], 0.01));
    }

    #[test]
    fn sequence_examples() {
        let cycles: Vec<_> = [8, 16, 32, 64].iter().map(|&n| cycle(n).unwrap()).collect();
        let rep = analyze_sequence(&cycles, 2, 1e-6, None).unwrap();
        assert!(rep
            .uncolored_verdicts
            .iter()
            .all(|v| v.converged && v.tv.iter().all(Zero::is_zero)));

        let paths: Vec<_> = [10, 20, 40].iter().map(|&n| path(n).unwrap()).collect();
        let rep = analyze_sequence(&paths, 1, 0.05, None).unwrap();
        assert_eq!(
            rep.uncolored_verdicts[0].tv,
            vec![ratio(1, 10), ratio(1, 20)]
        );
        assert!(rep.uncolored_verdicts[0].converged);

        let mixed = vec![cycle(10).unwrap(), path(10).unwrap()];
        let rep = analyze_sequence(&mixed, 1, 0.01, None).unwrap();
        assert!(!rep.uncolored_verdicts[0].converged);

        let bad = vec![cycle(10).unwrap(), crate::generators::torus(4, 4).unwrap()];
        assert!(matches!(
            analyze_sequence(&bad, 1, 0.01, None),
            Err(Error::MixedDegreeBound { .. })
        ));
        assert!(matches!(
            analyze_sequence(&cycles[..1], 1, 0.01, None),
            Err(Error::SequenceTooShort { .. })
        ));
    }
}
