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

//! One line per acceptance criterion, then a single overall assertion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use locallimit::canonical::canonical_code;
use locallimit::chain::{apply_involution, verify_invariance, vertex_chain};
use locallimit::coloring::{distance_color, edge_palette};
use locallimit::generators::{cycle, path, random_regular};
use locallimit::leafgraph::{reconstruct_leafball, sample_vertices, verify_reconstruction};
use locallimit::stats::{analyze_sequence, distribution, Rational};
use locallimit::{ColoringBundle, Graph, RootedBall, TypeTrie};
use locallimit_cli::{cmd_verify, render, RunConfig};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn palette(g: &Graph) -> u8 {
    edge_palette(g.degree_bound()) as u8
}

fn tau_identity(graphs: &[(String, Graph)]) -> Check {
    let mut rows = 0;
    for (name, g) in graphs {
        let b = ColoringBundle::build(g, 3).map_err(|e| e.to_string())?;
        let trie = TypeTrie::build(g, &b, 3).map_err(|e| e.to_string())?;
        for a in 0..palette(g) {
            for r in 1..=2 {
                let rep = verify_invariance(&trie, g, &b, a, r).map_err(|e| e.to_string())?;
                ensure(rep.vertex_mismatches == 0, || {
                    format!("{name} a={a} r={r}: fiber membership")
                })?;
                for row in &rep.rows {
                    ensure(row.tau == row.fiber_sum, || {
                        format!(
                            "{name} a={a} r={r} {}: tau {} vs {}",
                            row.code, row.tau, row.fiber_sum
                        )
                    })?;
                    rows += 1;
                }
                ensure(rep.pass, || format!("{name} a={a} r={r}: measure side"))?;
            }
        }
    }
    Ok(format!("{rows} type rows exact"))
}

fn additivity(graphs: &[(String, Graph)]) -> Check {
    let mut nodes = 0;
    for (name, g) in graphs {
        let b = ColoringBundle::build(g, 4).map_err(|e| e.to_string())?;
        for depth in 1..=4 {
            let trie = TypeTrie::build(g, &b, depth).map_err(|e| e.to_string())?;
            let bad = trie.check();
            ensure(bad.is_empty(), || {
                format!("{name} depth {depth}: {}", bad.join("; "))
            })?;
            // independent recount of the level sums
            let mass: Rational = trie.level(1).iter().map(|n| n.measure.clone()).sum();
            ensure(mass == Rational::from_integer(1.into()), || {
                format!("{name}: mass {mass}")
            })?;
            for r in 1..depth {
                for node in trie.level(r) {
                    let s: Rational = node
                        .children
                        .iter()
                        .map(|&c| trie.level(r + 1)[c].measure.clone())
                        .sum();
                    ensure(s == node.measure, || {
                        format!("{name} depth {depth} r={r}: children sum")
                    })?;
                }
            }
            nodes += trie.node_count();
        }
    }
    Ok(format!("{nodes} nodes"))
}

fn pushforward(graphs: &[(String, Graph)]) -> Check {
    for (name, g) in graphs {
        let b = ColoringBundle::build(g, 3).map_err(|e| e.to_string())?;
        for r in 0..=3 {
            let colored = distribution(g, r, Some(&b)).map_err(|e| e.to_string())?;
            let plain = distribution(g, r, None).map_err(|e| e.to_string())?;
            // aggregate colored counts by decoding each type and forgetting colors
            let mut agg: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
            for (code, count, _) in colored.entries() {
                let t = locallimit::ColoredType::from_code(code.clone(), g.degree_bound())
                    .map_err(|e| e.to_string())?;
                let ball: RootedBall = t.representative().into_ball();
                *agg.entry(canonical_code(&ball, None).unwrap().as_bytes().to_vec())
                    .or_insert(0) += count;
            }
            let want: BTreeMap<Vec<u8>, u64> = plain
                .entries()
                .map(|(c, k, _)| (c.as_bytes().to_vec(), k))
                .collect();
            ensure(agg == want, || format!("{name} r={r}"))?;
        }
    }
    Ok("exact at r <= 3".into())
}

fn leafball_check(
    g: &Graph,
    b: &ColoringBundle,
    vs: &[usize],
    name: &str,
) -> Result<usize, String> {
    for r in 1..=2 {
        for &v in vs {
            let x = vertex_chain(g, b, v, 3 * r).map_err(|e| e.to_string())?;
            let leaf =
                reconstruct_leafball(&x, r).map_err(|e| format!("{name} v={v} r={r}: {e}"))?;
            ensure(
                common::rooted_isomorphic(&leaf.ball, &g.extract_ball(v, r)),
                || format!("{name} v={v} r={r}: not isomorphic"),
            )?;
        }
        let sample = vs.len();
        let seed = if sample == g.n() { 0 } else { 7 };
        let rep = verify_reconstruction(g, b, r, sample, seed).map_err(|e| e.to_string())?;
        ensure(rep.pass, || {
            format!("{name} r={r}: {:?}", rep.vertices.iter().find(|v| !v.pass))
        })?;
    }
    Ok(vs.len() * 2)
}

fn leafballs() -> Check {
    let mut checked = 0;
    for (name, g) in [("C_24", cycle(24).unwrap()), ("P_30", path(30).unwrap())] {
        let b = ColoringBundle::build(&g, 6).unwrap();
        let all: Vec<usize> = (0..g.n()).collect();
        checked += leafball_check(&g, &b, &all, name)?;
    }
    for seed in 1..=3 {
        let g = random_regular(500, 3, seed).unwrap();
        let b = ColoringBundle::build(&g, 6).unwrap();
        let vs = sample_vertices(g.n(), 100, 7);
        checked += leafball_check(&g, &b, &vs, &format!("rr_500_3_s{seed}"))?;
    }
    Ok(format!("{checked} reconstructions"))
}

fn involutions(graphs: &[(String, Graph)]) -> Check {
    let depth = 4;
    let mut checks = 0;
    for (name, g) in graphs {
        let b = ColoringBundle::build(g, depth).unwrap();
        let chains: Vec<_> = (0..g.n())
            .map(|v| vertex_chain(g, &b, v, depth).unwrap())
            .collect();
        for v in 0..g.n() {
            for a in 0..palette(g) {
                let y = apply_involution(a, &chains[v]).map_err(|e| e.to_string())?;
                match b.neighbor_by_color(g, v, a) {
                    None => ensure(y == chains[v], || format!("{name} v={v} a={a}: not fixed"))?,
                    Some(w) => {
                        ensure(y == chains[w].truncate(depth - 1), || {
                            format!("{name} v={v} a={a}: realization")
                        })?;
                        let z = apply_involution(a, &y).map_err(|e| e.to_string())?;
                        ensure(z == chains[v].truncate(depth - 2), || {
                            format!("{name} v={v} a={a}: double")
                        })?;
                    }
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} vertex-color pairs"))
}

fn colorings(graphs: &[(String, Graph)]) -> Check {
    for (name, g) in graphs {
        let b = ColoringBundle::build(g, 3).unwrap();
        ensure(
            common::edge_coloring_valid(g, b.edge_colors(), g.degree_bound() + 1),
            || format!("{name}: edge coloring"),
        )?;
        if name.starts_with("C_") {
            // cycles in the corpus are even; odd ones are checked below
            ensure(b.edge_colors_used() <= 3, || {
                format!("{name}: too many colors")
            })?;
        }
        for i in 1..=3 {
            ensure(
                common::distance_coloring_valid(g, b.vertex_coloring(i), i),
                || format!("{name}: Q_{i}"),
            )?;
        }
    }
    for n in (3..=63).step_by(2) {
        let g = cycle(n).unwrap();
        let b = ColoringBundle::build(&g, 1).unwrap();
        ensure(b.edge_colors_used() == 3, || {
            format!("C_{n} uses {}", b.edge_colors_used())
        })?;
        ensure(common::edge_coloring_valid(&g, b.edge_colors(), 3), || {
            format!("C_{n}")
        })?;
        ensure(
            common::distance_coloring_valid(&g, &distance_color(&g, 3, None), 3),
            || format!("C_{n}: Q_3"),
        )?;
    }
    Ok("edge and distance colorings valid".into())
}

fn canonical_soundness() -> Check {
    let (reps, candidates) = common::enumerate_rooted(7, 3);
    let codes: Vec<_> = reps
        .iter()
        .map(|b| canonical_code(b, None).unwrap())
        .collect();
    let distinct: BTreeSet<_> = codes.iter().collect();
    ensure(distinct.len() == reps.len(), || {
        format!(
            "{} classes share codes among {}",
            reps.len() - distinct.len(),
            reps.len()
        )
    })?;
    for (b, idx) in &candidates {
        ensure(canonical_code(b, None).unwrap() == codes[*idx], || {
            "isomorphic balls with different codes".into()
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let i = rng.gen_range(0..reps.len());
        let mut perm: Vec<usize> = (0..reps[i].len()).collect();
        perm.shuffle(&mut rng);
        ensure(
            canonical_code(&reps[i].relabeled(&perm), None).unwrap() == codes[i],
            || format!("relabeling trial {trial}"),
        )?;
    }
    Ok(format!(
        "{} classes, {} candidates, 100 relabelings",
        reps.len(),
        candidates.len()
    ))
}

/// TV between path distributions from arm-length counting alone: a vertex
/// of `P_n` sees arms `min(v, r)` and `min(n-1-v, r)`.
fn path_tv_oracle(n: usize, m: usize, r: usize) -> Rational {
    let hist = |n: usize| {
        let mut h: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for v in 0..n {
            let (a, b) = (v.min(r), (n - 1 - v).min(r));
            *h.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        h
    };
    let (p, q) = (hist(n), hist(m));
    let keys: BTreeSet<_> = p.keys().chain(q.keys()).collect();
    let mut total = Rational::zero();
    for k in keys {
        let a = Rational::new((*p.get(k).unwrap_or(&0)).into(), (n as u64).into());
        let b = Rational::new((*q.get(k).unwrap_or(&0)).into(), (m as u64).into());
        total += if a > b { a - b } else { b - a };
    }
    total / Rational::from_integer(2.into())
}

fn convergence() -> Check {
    let cycles: Vec<Graph> = (8..=64).step_by(8).map(|n| cycle(n).unwrap()).collect();
    let rep = analyze_sequence(&cycles, 3, 1e-3, None).map_err(|e| e.to_string())?;
    ensure(
        rep.uncolored_verdicts
            .iter()
            .all(|v| v.converged && v.tv.iter().all(Zero::is_zero)),
        || "cycle TV not all zero".into(),
    )?;
    let ns = [10usize, 20, 40, 80];
    let paths: Vec<Graph> = ns.iter().map(|&n| path(n).unwrap()).collect();
    let rep = analyze_sequence(&paths, 3, 0.05, None).map_err(|e| e.to_string())?;
    for v in &rep.uncolored_verdicts {
        for (i, tv) in v.tv.iter().enumerate() {
            let closed = Rational::new(((2 * v.r) as u64).into(), (ns[i] as u64).into())
                - Rational::new(((2 * v.r) as u64).into(), (2 * ns[i] as u64).into());
            ensure(
                *tv == closed && *tv == path_tv_oracle(ns[i], 2 * ns[i], v.r),
                || format!("r={} n={}: {tv} vs {closed}", v.r, ns[i]),
            )?;
        }
    }
    Ok("cycles TV 0, paths TV r/n".into())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = dir.path().join("rr.el");
    std::fs::write(&file, random_regular(500, 3, 1).unwrap().to_edge_list()).unwrap();
    let cfg = RunConfig {
        inputs: vec![file],
        r: 1,
        seed: 42,
        sample: 50,
        shuffle_coloring: true,
        ..RunConfig::default()
    };
    let a = render(&cmd_verify(&cfg).map_err(|e| e.to_string())?.report);
    let b = render(&cmd_verify(&cfg).map_err(|e| e.to_string())?.report);
    ensure(a == b, || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

#[test]
fn acceptance() {
    let graphs = common::test_graphs();
    let criteria: Vec<Criterion> = vec![
        ("1 tau identity", Box::new(|| tau_identity(&graphs))),
        (
            "2 measure additivity and total mass",
            Box::new(|| additivity(&graphs)),
        ),
        (
            "3 colored to uncolored pushforward",
            Box::new(|| pushforward(&graphs)),
        ),
        ("4 leafball reconstruction", Box::new(leafballs)),
        ("5 involution laws", Box::new(|| involutions(&graphs))),
        ("6 coloring validity", Box::new(|| colorings(&graphs))),
        ("7 canonical code soundness", Box::new(canonical_soundness)),
        ("8 convergence diagnostics", Box::new(convergence)),
        ("9 determinism", Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    let stdout = std::io::stdout();
    for (name, run) in &criteria {
        let start = std::time::Instant::now();
        let line = match run() {
            Ok(detail) => format!("PASS criterion {name}: {detail} ({:.1?})", start.elapsed()),
            Err(why) => {
                failed.push(*name);
                format!("FAIL criterion {name}: {why}")
            }
        };
        writeln!(stdout.lock(), "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
