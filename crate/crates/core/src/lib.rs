//! Random groups in the k-gonal and positive k-gonal models, the block
//! regrouping `Γ ↠ φ(Γ) ≤ G⁺ ↠ G`, and spectral certification of
//! Property (T) for the regrouped triangular presentation.

pub mod freegroup;
pub mod models;
pub mod pipeline;
pub mod regroup;
pub mod spectral;
pub mod subgroup;

pub use freegroup::{Letter, Word};
pub use models::{ModelParams, Presentation};
