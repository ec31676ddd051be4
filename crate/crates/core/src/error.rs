use thiserror::Error;

/// Errors produced by kernel evaluation, contour handling, the CDE operator
/// and the run driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha = {0} lies outside (0, 1]")]
    InvalidAlpha(f64),

    #[error("free-space kernel evaluated at the origin")]
    SingularPoint,

    #[error("periodic kernel evaluated on the lattice at ({x1}, {x2})")]
    LatticeSingularity { x1: f64, x2: f64 },

    #[error("lattice sum at |x| = {radius} needs {needed} images but the cap is {cap}")]
    TruncationFailure {
        radius: f64,
        needed: usize,
        cap: usize,
    },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("accuracy guard violated: {0}")]
    AccuracyGuard(String),

    #[error("curve {curve} is (nearly) self-intersecting: chord-arc value {value:.3e}")]
    SelfIntersection { curve: usize, value: f64 },

    #[error("chord on curve {curve} comes within {distance:.3e} of a lattice point")]
    LatticeCollision { curve: usize, distance: f64 },

    #[error("evaluation point is {distance:.3e} from the boundary (floor {floor:.3e})")]
    OnBoundary { distance: f64, floor: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("evolution aborted at t = {time}: {source}")]
    Aborted {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
