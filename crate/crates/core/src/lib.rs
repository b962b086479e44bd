//! Sense-specific static word embeddings distilled from contextualized embeddings.
//!
//! The pipeline has four stages:
//!
//! 1. [`projection`] learns a filter matrix `W` and one diagonal projection per sense by
//!    aligning `W·c(u,t)` with `f(a_i ⊙ g(u))` over a sense-tagged corpus.
//! 2. [`bank`] builds a composite vector per sense: the projected static vector, a
//!    gloss-derived segment and a corpus-derived segment (k-means centroids).
//! 3. [`wsd`] disambiguates word occurrences by cosine 1-NN against the bank and scores
//!    predictions against gold keys.
//! 4. [`wic`] turns pairs of occurrences into six cosine features and fits a logistic
//!    regression classifier.
//!
//! All file formats live in [`store`].

pub mod bank;
pub mod projection;
pub mod store;
pub mod wic;
pub mod wsd;

mod binio;

pub use bank::{ClusterAssignment, FillPolicy, SenseBank};
pub use projection::{Activation, InitScheme, ProjectionModel, TrainConfig, TrainReport};
pub use store::{
    CollocationSet, ContextDump, ContextRecord, GoldKeys, Pos, SenseInventory, StaticTable,
};
pub use wic::{LogisticModel, WicPair};
pub use wsd::{Prediction, WsdInstance};
