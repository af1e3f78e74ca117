use thiserror::Error;

/// Errors produced by the solver crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The element has no inverse: its component along the identity
    /// (in the `{1, rho}` splitting) vanishes.
    #[error("element is not invertible (identity component {alpha_abs:.3e} below tolerance)")]
    NotInvertible { alpha_abs: f64 },

    #[error("invalid conformal map: {0}")]
    MapInvalid(String),

    #[error("node count must be even and at least 8, got {0}")]
    InvalidNodeCount(usize),

    #[error("evaluation point is within the distance floor of the boundary (dist {dist:.3e} < floor {floor:.3e})")]
    PointTooCloseToBoundary { dist: f64, floor: f64 },

    #[error("evaluation point is not in the requested region (interior/exterior mismatch)")]
    PointOutsideRequestedRegion,

    #[error("boundary data length {got} does not match grid size {expected}")]
    DataLengthMismatch { expected: usize, got: usize },

    #[error("assembled system is ill-conditioned (sigma_second/sigma_max = {ratio:.3e}); check the map and assembly")]
    IllConditioned { ratio: f64 },

    #[error("tangent vector degenerate at node {node} (|tau'| = {norm:.3e})")]
    DegenerateTangent { node: usize, norm: f64 },

    #[error("potential lattice is disconnected from the base point")]
    DisconnectedLattice,

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
