//! Causal link prediction over weighted causal networks.
//!
//! The pipeline: annotated causal event graphs are parsed and preprocessed
//! ([`ingest`]), translated into causal knowledge graphs with reified type
//! relations and scene context ([`builder`]), split into leakage-aware
//! train/valid/test sets ([`split`]), embedded with four scoring functions
//! and optional causal-weight modulation ([`embed`]), and evaluated with the
//! filtered ranking protocol ([`eval`]). A seeded generator ([`synth`])
//! produces synthetic corpora with planted causal regularities.
//!
//! The numeric core is generic over the scalar type (see [`num::Scalar`]);
//! the aliases below pin the common instantiations.

mod digraph;

pub mod builder;
pub mod embed;
pub mod eval;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod num;
pub mod split;
pub mod synth;

pub use builder::{BuildError, BuildStats, SubgraphView};
pub use embed::{EmbedError, ModelKind, WeightMode};
pub use eval::{EvalError, RankReport, SidePolicy};
pub use ingest::{IngestError, IngestReport};
pub use model::{
    CausalKG, CausalNetwork, Ceg, CegEdge, CegNode, EntityId, EntityKind, ModelError, Quad,
    RelationKind, TripleKey,
};
pub use split::{CausalTask, MarkovReport, SplitBundle, SplitError, SplitStrategy};
pub use synth::{SynthConfig, SynthError};

/// Double-precision instantiations, the default throughout the CLI.
pub type EmbeddingState64 = embed::EmbeddingState<f64>;
pub type TrainConfig64 = embed::TrainConfig<f64>;

/// Single-precision instantiations.
pub type EmbeddingState32 = embed::EmbeddingState<f32>;
pub type TrainConfig32 = embed::TrainConfig<f32>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
