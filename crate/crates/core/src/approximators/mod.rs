//! Function approximators: the grid-placed Gaussian RBF network used by the
//! adaptive controller, and a five-layer Sugeno ANFIS forward pass.

mod anfis;
mod rbf;

pub use anfis::{anfis_forward, AnfisLayers, AnfisModel, AnfisRule, BellMembership};
pub use rbf::{
    build_grid_centers, gaussian_basis, rbf_output, AdaptiveWeights, GridCenters, RbfGridSpec,
    RbfNetwork, DEFAULT_MAX_NODES,
};
