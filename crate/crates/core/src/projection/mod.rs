//! Two-dimensional t-SNE projection of provision embeddings and the scatter
//! plot rendered from it.

mod scatter;
mod tsne;

pub use scatter::{emit_scatter, Scatter};
pub use tsne::{
    conditional_probabilities, joint_probabilities, kl_divergence, kl_gradient, tsne_project,
    Projection2D, TsneParams,
};
