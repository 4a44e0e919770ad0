//! Level graphs and the certificates for their three required properties:
//! no partition into `n` independent sets, fractional chromatic number at
//! most 4, and a per-vertex family of independent sets with ¼ coverage.

mod automorphism;
mod cap;
mod certificate;
mod coloring;
mod cover_family;
mod fractional;
mod graph;
mod independent;
pub mod io;
mod kneser;
mod simplex;

pub use automorphism::is_vertex_transitive;
pub use cap::{cap_fraction_bounds, generate_cap_graph, select_dimension, CapConfig, CapEmbedding};
pub use certificate::{certify, check_partition_property, CertifyConfig, GraphCertificate, PartitionResult};
pub use coloring::{chromatic_number, find_coloring, ColoringOutcome};
pub use cover_family::{
    build_cover_family, check_cover_family, CoverCheck, CoverFamily, CoverStrategy, CoverViolation,
};
pub use fractional::{
    check_weight_property, fractional_chromatic_lp, ChiMethod, FractionalCertificate, WeightBudget, WeightReport,
};
pub use graph::{Graph, Provenance};
pub use independent::{
    all_independent_sets, max_independent_set, max_weight_independent_set, maximal_independent_sets,
};
pub use kneser::{generate_kneser_graph, kneser_sets, KneserGraph, DEFAULT_MATERIALIZATION_CAP};
