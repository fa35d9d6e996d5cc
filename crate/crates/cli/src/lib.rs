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

//! Batch commands behind the `locallimit` binary. Every command returns a
//! JSON report; identical configurations give byte-identical output.

use std::path::{Path, PathBuf};

use locallimit::chain::{verify_invariance, TrieRecord};
use locallimit::coloring::edge_palette;
use locallimit::leafgraph::verify_reconstruction;
use locallimit::stats::{analyze_sequence, distribution, RadiusVerdict, Rational};
use locallimit::{load_graph, ColoringBundle, Error, EstimationMode, Graph, LoadOptions, TypeTrie};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

pub const REPORT_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INGESTION: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const VERIFICATION: i32 = 5;
}

/// Settings shared by all commands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Graph files, in sequence order.
    pub inputs: Vec<PathBuf>,
    pub r: usize,
    pub depth: Option<usize>,
    pub epsilon: f64,
    pub seed: u64,
    pub mode: EstimationMode,
    pub degree_bound: Option<usize>,
    pub allow_disconnected: bool,
    /// Greedy distance colorings in a seeded random order instead of
    /// ascending vertex order.
    pub shuffle_coloring: bool,
    /// Include colored statistics in sequence reports.
    pub colored: bool,
    /// Restrict invariance checks to one edge color.
    pub color: Option<u8>,
    pub sample: usize,
    pub count: usize,
    /// Previously built trie to verify instead of building one.
    pub trie: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            r: 1,
            depth: None,
            epsilon: 1e-3,
            seed: 0,
            mode: EstimationMode::Last,
            degree_bound: None,
            allow_disconnected: false,
            shuffle_coloring: false,
            colored: false,
            color: None,
            sample: 100,
            count: 1,
            trie: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("ingestion failed: {0}")]
    Ingestion(String),
    #[error("invalid request: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Ingestion(_) => exit::INGESTION,
            CliError::Validation(_) => exit::VALIDATION,
        }
    }

    pub fn report(&self, command: &str) -> Value {
        json!({
            "version": REPORT_VERSION,
            "command": command,
            "error": match self {
                CliError::Ingestion(_) => "ingestion",
                CliError::Validation(_) => "validation",
            },
            "message": self.to_string(),
        })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EmptyGraph
            | Error::VertexOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::DegreeBound { .. }
            | Error::ZeroDegreeBound
            | Error::Disconnected { .. }
            | Error::Decode(_) => CliError::Ingestion(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// A finished command: its report and whether every check passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, pass: true }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            exit::OK
        } else {
            exit::VERIFICATION
        }
    }
}

type CmdResult = Result<Outcome, CliError>;

/// Pretty JSON with a trailing newline.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("json values serialize");
    s.push('\n');
    s
}

fn header(command: &str, cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("version".into(), json!(REPORT_VERSION));
    m.insert("command".into(), json!(command));
    m.insert(
        "inputs".into(),
        json!(cfg
            .inputs
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()),
    );
    m.insert("seed".into(), json!(cfg.seed));
    m
}

fn with_header(command: &str, cfg: &RunConfig, body: Value) -> Value {
    let mut m = header(command, cfg);
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn load_all(cfg: &RunConfig, need: usize) -> Result<Vec<Graph>, CliError> {
    if cfg.inputs.len() < need {
        return Err(CliError::Validation(format!(
            "need at least {need} input graph(s), got {}",
            cfg.inputs.len()
        )));
    }
    let opts = LoadOptions {
        degree_bound: cfg.degree_bound,
        allow_disconnected: cfg.allow_disconnected,
    };
    cfg.inputs
        .iter()
        .map(|p| load_graph(p, opts).map_err(CliError::from))
        .collect()
}

fn bundle(g: &Graph, depth: usize, cfg: &RunConfig) -> Result<ColoringBundle, CliError> {
    let b = if cfg.shuffle_coloring {
        ColoringBundle::build_seeded(g, depth, cfg.seed)?
    } else {
        ColoringBundle::build(g, depth)?
    };
    Ok(b)
}

fn load_trie(path: &Path) -> Result<TypeTrie, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Ingestion(format!("{}: {e}", path.display())))?;
    let rec: TrieRecord = serde_json::from_str(&text)
        .map_err(|e| CliError::Ingestion(format!("{}: {e}", path.display())))?;
    Ok(TypeTrie::from_record(&rec)?)
}

fn verdicts(vs: &[RadiusVerdict]) -> Value {
    json!(vs
        .iter()
        .map(|v| json!({
            "r": v.r,
            "tv": v.tv.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "tv_approx": v.tv.iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>(),
            "converged": v.converged,
        }))
        .collect::<Vec<_>>())
}

/// Uncolored and colored `r`-ball distributions of each input graph.
pub fn cmd_stats(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let mut out = Vec::new();
    for (p, g) in cfg.inputs.iter().zip(&graphs) {
        let b = bundle(g, cfg.r.max(1), cfg)?;
        out.push(json!({
            "input": p.display().to_string(),
            "n": g.n(),
            "d": g.degree_bound(),
            "uncolored": to_value(&distribution(g, cfg.r, None)?.to_record()),
            "colored": to_value(&distribution(g, cfg.r, Some(&b))?.to_record()),
        }));
    }
    Ok(Outcome::ok(with_header(
        "stats",
        cfg,
        json!({ "r": cfg.r, "graphs": out }),
    )))
}

/// Consecutive TV distances and convergence verdicts for `r = 1..=depth`.
pub fn cmd_converge(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 2)?;
    let depth = cfg.depth.unwrap_or(cfg.r);
    let bundles = if cfg.colored {
        Some(
            graphs
                .iter()
                .map(|g| bundle(g, depth, cfg))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let rep = analyze_sequence(&graphs, depth, cfg.epsilon, bundles.as_deref())?;
    let dists = |all: &[Vec<locallimit::TypeDistribution>]| -> Value {
        json!(all
            .iter()
            .map(|per| per
                .iter()
                .map(|d| to_value(&d.to_record()))
                .collect::<Vec<_>>())
            .collect::<Vec<_>>())
    };
    let mut body = json!({
        "depth": rep.depth,
        "epsilon": rep.epsilon,
        "sizes": rep.sizes,
        "uncolored": {
            "verdicts": verdicts(&rep.uncolored_verdicts),
            "distributions": dists(&rep.uncolored),
        },
        "converged": rep.uncolored_verdicts.iter().all(|v| v.converged),
    });
    if let (Some(c), Some(v)) = (&rep.colored, &rep.colored_verdicts) {
        body["colored"] = json!({ "verdicts": verdicts(v), "distributions": dists(c) });
    }
    Ok(Outcome::ok(with_header("converge", cfg, body)))
}

/// Edge coloring and distance colorings `Q_1..Q_depth` of the last graph.
pub fn cmd_color(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let g = graphs.last().unwrap();
    let depth = cfg.depth.unwrap_or(cfg.r).max(1);
    let b = bundle(g, depth, cfg)?;
    b.validate(g)?;
    let body = json!({
        "depth": depth,
        "edge_colors_used": b.edge_colors_used(),
        "bundle": to_value(&b.to_record(g)),
    });
    Ok(Outcome::ok(with_header("color", cfg, body)))
}

fn build_trie(cfg: &RunConfig, graphs: &[Graph], depth: usize) -> Result<TypeTrie, CliError> {
    let bundles = graphs
        .iter()
        .map(|g| bundle(g, depth, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TypeTrie::build_sequence(graphs, &bundles, depth, cfg.mode)?)
}

fn trie_summary(trie: &TypeTrie) -> Value {
    json!((1..=trie.depth())
        .map(|r| {
            let level = trie.level(r);
            json!({
                "r": r,
                "nodes": level.len(),
                "count": level.iter().map(|n| n.count).sum::<u64>(),
                "mass": level.iter().map(|n| n.measure.clone()).sum::<Rational>().to_string(),
            })
        })
        .collect::<Vec<_>>())
}

/// Trie of colored types to depth `R` with its measure.
pub fn cmd_build(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let depth = cfg.depth.unwrap_or(cfg.r);
    let trie = build_trie(cfg, &graphs, depth)?;
    let violations = trie.check();
    let body = json!({
        "depth": depth,
        "mode": cfg.mode,
        "levels": trie_summary(&trie),
        "violations": violations,
        "trie": to_value(&trie.to_record()),
    });
    Ok(Outcome {
        report: with_header("build", cfg, body),
        pass: violations.is_empty(),
    })
}

fn colors(cfg: &RunConfig, g: &Graph) -> Result<Vec<u8>, CliError> {
    let palette = edge_palette(g.degree_bound());
    match cfg.color {
        Some(a) if (a as usize) < palette => Ok(vec![a]),
        Some(a) => Err(CliError::Validation(format!(
            "edge color {a} outside palette of size {palette}"
        ))),
        None => Ok((0..palette as u8).collect()),
    }
}

fn trie_for(cfg: &RunConfig, graphs: &[Graph], depth: usize) -> Result<TypeTrie, CliError> {
    match &cfg.trie {
        Some(path) => {
            let trie = load_trie(path)?;
            let d = graphs.last().unwrap().degree_bound();
            if trie.degree_bound() != d {
                return Err(CliError::Validation(format!(
                    "trie was built for degree bound {}, graph has {d}",
                    trie.degree_bound()
                )));
            }
            if trie.depth() < depth {
                return Err(Error::DepthTooSmall {
                    need: depth,
                    have: trie.depth(),
                }
                .into());
            }
            Ok(trie)
        }
        None => build_trie(cfg, graphs, depth),
    }
}

fn invariance_section(
    cfg: &RunConfig,
    graphs: &[Graph],
    trie: &TypeTrie,
    b: &ColoringBundle,
) -> CmdResult {
    let g = graphs.last().unwrap();
    let mut reports = Vec::new();
    let mut pass = true;
    for a in colors(cfg, g)? {
        let rep = verify_invariance(trie, g, b, a, cfg.r)?;
        pass &= rep.pass;
        reports.push(to_value(&rep));
    }
    Ok(Outcome {
        report: json!({ "r": cfg.r, "pass": pass, "colors": reports }),
        pass,
    })
}

/// Counting identity and measure invariance for every edge color at radius `r`.
pub fn cmd_verify_invariance(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let depth = cfg.depth.unwrap_or(cfg.r + 1).max(cfg.r + 1);
    let trie = trie_for(cfg, &graphs, depth)?;
    let b = bundle(graphs.last().unwrap(), depth, cfg)?;
    let out = invariance_section(cfg, &graphs, &trie, &b)?;
    Ok(Outcome {
        report: with_header(
            "verify-invariance",
            cfg,
            json!({ "invariance": out.report }),
        ),
        pass: out.pass,
    })
}

/// Leafball reconstruction for sampled vertices of the last graph.
pub fn cmd_verify_leafball(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let g = graphs.last().unwrap();
    let b = bundle(g, (3 * cfg.r).max(1), cfg)?;
    let rep = verify_reconstruction(g, &b, cfg.r, cfg.sample, cfg.seed)?;
    let pass = rep.pass;
    Ok(Outcome {
        report: with_header(
            "verify-leafball",
            cfg,
            json!({ "leafball": to_value(&rep) }),
        ),
        pass,
    })
}

/// Chains drawn from the trie's measure.
pub fn cmd_chain_sample(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let depth = cfg.depth.unwrap_or(cfg.r);
    let trie = trie_for(cfg, &graphs, depth)?;
    let violations = trie.check();
    if !violations.is_empty() {
        return Ok(Outcome {
            report: with_header("chain-sample", cfg, json!({ "violations": violations })),
            pass: false,
        });
    }
    let chains: Vec<Value> = trie
        .sample_chains(cfg.count, cfg.seed)
        .iter()
        .map(|x| {
            let measure = trie.measure(x.top().expect("depth >= 1"));
            json!({ "codes": x.codes(), "cylinder_measure": measure.to_string() })
        })
        .collect();
    Ok(Outcome::ok(with_header(
        "chain-sample",
        cfg,
        json!({ "depth": trie.depth(), "chains": chains }),
    )))
}

/// Trie consistency, invariance for every edge color and leafball
/// reconstruction, in one report.
pub fn cmd_verify(cfg: &RunConfig) -> CmdResult {
    let graphs = load_all(cfg, 1)?;
    let g = graphs.last().unwrap();
    let trie_depth = cfg.depth.unwrap_or(cfg.r + 1).max(cfg.r + 1);
    let trie = trie_for(cfg, &graphs, trie_depth)?;
    let violations = trie.check();
    let b = bundle(g, trie_depth.max(3 * cfg.r), cfg)?;
    let inv = invariance_section(cfg, &graphs, &trie, &b)?;
    let leaf = verify_reconstruction(g, &b, cfg.r, cfg.sample, cfg.seed)?;
    let pass = violations.is_empty() && inv.pass && leaf.pass;
    let body = json!({
        "r": cfg.r,
        "trie": { "depth": trie.depth(), "violations": violations, "levels": trie_summary(&trie) },
        "invariance": inv.report,
        "leafball": to_value(&leaf),
        "pass": pass,
    });
    Ok(Outcome {
        report: with_header("verify", cfg, body),
        pass,
    })
}
