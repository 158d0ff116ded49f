//! Row normalization, flow-based fractional matchings, Birkhoff sampling,
//! and the brute-force cut oracle.

pub mod bipartite;
mod birkhoff;
mod cut;
pub mod flow;
mod fractional;
mod row;

pub use birkhoff::{
    birkhoff_decompose, max_terms, sample_matching, BirkhoffDecomposition, BirkhoffTerm,
    DecompositionJson,
};
pub use cut::{cut_check_bruteforce, CutCheck, MAX_CUT_N};
pub use fractional::{build_fractional_matching, default_eta_initial, EtaPolicy, FractionalMatching};
pub use row::{normalize_row, RowDistribution};
