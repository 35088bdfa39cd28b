use core::fmt;

/// Where in the discretization a failure was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Node { element: usize, node: usize },
    Cubature { element: usize, point: usize },
    Face { face: usize, point: usize },
    Point,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Site::Node { element, node } => write!(f, "element {element}, node {node}"),
            Site::Cubature { element, point } => {
                write!(f, "element {element}, cubature point {point}")
            }
            Site::Face { face, point } => write!(f, "face {face}, quadrature point {point}"),
            Site::Point => f.write_str("pointwise evaluation"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Density,
    Pressure,
    SoundSpeed,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Density => "density",
            Quantity::Pressure => "pressure",
            Quantity::SoundSpeed => "Roe-averaged sound speed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("polynomial order {0} outside supported range 1..=9")]
    UnsupportedOrder(usize),
    #[error("overintegration order {p_f} is below 2p = {}", 2 * p)]
    Overintegration { p: usize, p_f: usize },
    #[error("nonpositive {quantity} ({value:e}) at {site}")]
    Positivity {
        quantity: Quantity,
        value: f64,
        site: Site,
    },
    #[error("nonpositive {quantity} during RK stage {stage}: {site}")]
    StagePositivity {
        stage: usize,
        quantity: Quantity,
        site: Site,
    },
    #[error("degenerate triangle {0}")]
    DegenerateElement(usize),
    #[error("degenerate domain rectangle")]
    DegenerateDomain,
    #[error("boundary edge ({0}, {1}) carries no tag")]
    UntaggedBoundary(usize, usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    OverSharedEdge(usize, usize),
    #[error("hanging node {node} on edge ({a}, {b})")]
    HangingNode { node: usize, a: usize, b: usize },
    #[error("tagged edge ({0}, {1}) is not a boundary edge of the mesh")]
    StrayTag(usize, usize),
    #[error("vertex index {0} out of range")]
    VertexIndex(usize),
    #[error("mesh has no elements")]
    EmptyMesh,
    #[error("mesh has no wall boundary")]
    NoWall,
    #[error("point ({0}, {1}) lies outside the mesh")]
    OutsideMesh(f64, f64),
    #[error("element {0} has zero penalty while the viscosity is positive")]
    ZeroPenalty(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("convergence rate needs at least two positive samples")]
    RateSamples,
    #[error("time series needs at least 16 samples")]
    ShortSeries,
    #[error("steady march did not converge in {steps} steps (residual {residual:e})")]
    NotConverged { steps: usize, residual: f64 },
    #[error("state layout mismatch: expected {expected} values, found {found}")]
    Layout { expected: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
