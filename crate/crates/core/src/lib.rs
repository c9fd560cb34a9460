//! Math formula retrieval with graph contrastive learning.
//!
//! The pipeline runs offline and online stages over formula graphs:
//!
//! - [`formula`]: parse a LaTeX subset and build symbol layout trees (SLT)
//!   and operator trees (OPT).
//! - [`embed`]: random-walk paths over the trees and subword skip-gram token
//!   embeddings, used to featurize graph nodes and edges.
//! - [`augment`]: variable substitution and the generic drop/mask augmentations.
//! - [`encoder`]: a mean-aggregation message-passing encoder trained with
//!   NT-Xent over (original, augmented) views.
//! - [`index`]: exhaustive cosine retrieval and TREC run files.
//! - [`eval`]: bpref, the synthetic benchmark generator and the experiment grid.

pub mod augment;
pub mod embed;
pub mod encoder;
pub mod eval;
pub mod formula;
pub mod index;
pub mod linalg;
