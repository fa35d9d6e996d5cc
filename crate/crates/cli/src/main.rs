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

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use locallimit::EstimationMode;
use locallimit_cli::{
    cmd_build, cmd_chain_sample, cmd_color, cmd_converge, cmd_stats, cmd_verify,
    cmd_verify_invariance, cmd_verify_leafball, exit, render, RunConfig,
};

/// Local statistics of bounded-degree graph sequences and finite-depth
/// checks of their limit.
///
/// Exit codes: 0 success, 2 usage, 3 ingestion, 4 invalid request,
/// 5 verification failure.
#[derive(Parser)]
#[command(name = "locallimit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distributions of r-ball classes, plain and colored.
    Stats(Common),
    /// Consecutive TV distances and convergence verdicts.
    Converge(Common),
    /// Edge coloring and distance colorings.
    Color(Common),
    /// Trie of colored types with its measure.
    Build(Common),
    /// Counting identity and measure invariance under each involution.
    VerifyInvariance(Common),
    /// Leafball reconstruction from involution words.
    VerifyLeafball(Common),
    /// Chain-space operations.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Trie checks, invariance and reconstruction together.
    Verify(Common),
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Draw chains from the trie's measure.
    Sample(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Last,
    Cesaro,
}

#[derive(Args)]
struct Common {
    /// Edge-list files, in sequence order.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Ball radius.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Trie or coloring depth R.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Last)]
    mode: Mode,
    /// Degree bound d; overrides the one in the file header.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    allow_disconnected: bool,
    /// Color greedily in a seeded random vertex order.
    #[arg(long)]
    shuffle_coloring: bool,
    /// Add colored statistics to `converge`.
    #[arg(long)]
    colored: bool,
    /// Check a single edge color.
    #[arg(long)]
    color: Option<u8>,
    /// Vertices to sample for reconstruction.
    #[arg(long, default_value_t = 100)]
    sample: usize,
    /// Chains to draw.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Use a trie file written by `build` instead of building one.
    #[arg(long)]
    trie: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            inputs: self.inputs.clone(),
            r: self.r,
            depth: self.depth,
            epsilon: self.epsilon,
            seed: self.seed,
            mode: match self.mode {
                Mode::Last => EstimationMode::Last,
                Mode::Cesaro => EstimationMode::Cesaro,
            },
            degree_bound: self.d,
            allow_disconnected: self.allow_disconnected,
            shuffle_coloring: self.shuffle_coloring,
            colored: self.colored,
            color: self.color,
            sample: self.sample,
            count: self.count,
            trie: self.trie.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, run): (&str, &Common, fn(&RunConfig) -> _) = match &cli.command {
        Command::Stats(c) => ("stats", c, cmd_stats),
        Command::Converge(c) => ("converge", c, cmd_converge),
        Command::Color(c) => ("color", c, cmd_color),
        Command::Build(c) => ("build", c, cmd_build),
        Command::VerifyInvariance(c) => ("verify-invariance", c, cmd_verify_invariance),
        Command::VerifyLeafball(c) => ("verify-leafball", c, cmd_verify_leafball),
        Command::Chain(ChainCommand::Sample(c)) => ("chain-sample", c, cmd_chain_sample),
        Command::Verify(c) => ("verify", c, cmd_verify),
    };
    let (report, code) = match run(&common.config()) {
        Ok(outcome) => (outcome.report.clone(), outcome.exit_code()),
        Err(e) => {
            eprintln!("locallimit {name}: {e}");
            (e.report(name), e.exit_code())
        }
    };
    let text = render(&report);
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("locallimit {name}: cannot write {}: {e}", path.display());
                return ExitCode::from(exit::INGESTION as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}
