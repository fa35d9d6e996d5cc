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

//! Local statistics of bounded-degree graph sequences and a finite-depth
//! model of their limit graphing.
//!
//! The pipeline: [`graph`] ingests bounded-degree graphs and cuts rooted
//! balls, [`canonical`] assigns exact codes to rooted (colored) balls,
//! [`coloring`] fixes the edge and distance colorings, [`stats`] tallies
//! neighborhood distributions, [`chain`] builds the trie of colored types
//! with its cylinder measure and the involutions on chains, and
//! [`leafgraph`] rebuilds balls of the leafgraph from involution words.

pub mod ball;
pub mod canonical;
pub mod chain;
pub mod coloring;
pub mod error;
pub mod generators;
pub mod graph;
pub mod leafgraph;
pub mod par;
pub mod stats;

pub use ball::{BallRecord, ColoredBall, RootedBall};
pub use canonical::{BallClass, Code, ColoredType};
pub use chain::{Chain, EstimationMode, TypeTrie};
pub use coloring::ColoringBundle;
pub use error::{Error, Result};
pub use graph::{load_graph, parse_edge_list, Graph, LoadOptions};
pub use leafgraph::{LeafBall, Word};
pub use par::Execution;
pub use stats::{SequenceReport, TypeDistribution};
