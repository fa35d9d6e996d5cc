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

/// Errors raised by graph ingestion, coloring, canonical forms and the
/// chain-space machinery.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree}, above the declared bound {bound}")]
    DegreeBound {
        vertex: usize,
        degree: usize,
        bound: usize,
    },
    #[error("degree bound must be positive")]
    ZeroDegreeBound,
    #[error(
        "graph is disconnected ({components} components); pass allow_disconnected to admit it"
    )]
    Disconnected { components: usize },
    #[error("graphs in a sequence must share one degree bound (found {first} and {other})")]
    MixedDegreeBound { first: usize, other: usize },
    #[error("a sequence needs at least {need} graphs, got {got}")]
    SequenceTooShort { need: usize, got: usize },
    #[error("vertex {vertex} carries {got} color components, expected {expected}")]
    ColorTupleLength {
        vertex: usize,
        got: usize,
        expected: usize,
    },
    #[error("color {value} outside palette of size {palette} ({what})")]
    ColorOutOfPalette {
        what: &'static str,
        value: u64,
        palette: u64,
    },
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("coloring depth {have} is below the required {need}")]
    BundleDepth { need: usize, have: usize },
    #[error("depth {have} is below the required {need}")]
    DepthTooSmall { need: usize, have: usize },
    #[error("cannot restrict a radius-0 type")]
    RadiusZero,
    #[error("distributions are not comparable: {0}")]
    Incomparable(String),
    #[error(
        "involution {color} is undefined on a depth-{depth} chain whose root has a {color}-edge"
    )]
    InvolutionUndefined { color: u8, depth: usize },
    #[error("word of length {len} needs a ball of radius > {len}, got radius {radius}")]
    WordTooLong { len: usize, radius: usize },
    #[error("malformed canonical code: {0}")]
    Decode(String),
    #[error("kernel equality violated: {0}")]
    KernelViolation(String),
    #[error("radius {0} is too large for the canonical code layout")]
    RadiusTooLarge(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
