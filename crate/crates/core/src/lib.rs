//! Decomposing the edges of a digraph into as few directed paths as its
//! excess allows.
//!
//! Every path must start at a vertex of positive excess and end at one of
//! negative excess, so a digraph needs at least `ex(D)` paths. This crate
//! constructs decompositions meeting that bound for digraphs that have a large
//! set of high-excess vertices and are otherwise well spread out: it reserves
//! short "absorbing" paths around high-excess vertices, strips paths greedily,
//! splits what is left into cycles, and merges each cycle into the reserved
//! paths, using flows to spread the load.
//!
//! ```
//! use pathdec_core::{Digraph, decomposer::greedy_excess_paths};
//!
//! let d = Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
//! let (paths, rest) = greedy_excess_paths(&d);
//! assert_eq!(paths.len(), 1);
//! assert_eq!(rest.edge_count(), 0);
//! ```

pub mod absorption;
pub mod decomposer;
pub mod digraph;
pub mod error;
pub mod euler;
pub mod flow;
pub mod generator;
pub mod io;
pub mod oracle;
pub mod rng;
pub mod structure;

pub use digraph::{partition_by_excess, CycleSeq, Digraph, Edge, EdgeBag, EdgeId, PathSeq, Side, Vertex, VertexPartition};
pub use error::{GraphError, ParseError};

/// Parameters with `f64` formulas.
pub type Parameters = generator::Params<f64>;
/// Flow networks with 64-bit capacities.
pub type FlowNetwork = flow::Network<u64>;
pub type IntegerFlow = flow::Flow<u64>;
pub type FpNetwork = flow::AssignmentNetwork<u64>;
