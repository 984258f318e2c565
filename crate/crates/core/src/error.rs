use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the crate.
///
/// Variants are grouped by the exit-code family the command line maps them to:
/// parse errors, invariant/domain errors, numerical guards, and stage failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("non-manifold edge ({0}, {1}): shared by {2} cells")]
    NonManifoldEdge(usize, usize, usize),

    #[error("inconsistent orientation on edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),

    #[error("degenerate cell {index}: measure {measure:e} below floor {floor:e}")]
    DegenerateCell { index: usize, measure: f64, floor: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh is disconnected: {} components (sizes {:?})", .0.len(), .0)]
    Disconnected(Vec<usize>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("normal offset {offset:e} exceeds estimated reach {reach:e}")]
    ReachViolation { reach: f64, offset: f64 },

    #[error("time step {dt:e} violates the stability bound; suggested dt = {suggested:e}")]
    Timestep { dt: f64, suggested: f64 },

    #[error("surface is not a discrete self-shrinker: residual {residual:e} >= threshold {threshold:e}")]
    NotShrinker { residual: f64, threshold: f64 },

    #[error("eigenfunction is not sign-definite (min {min:e}, max {max:e}); leading eigenvalues {spectrum:?}")]
    NotSignDefinite { min: f64, max: f64, spectrum: Vec<f64> },

    #[error("eigensolver did not converge: residual {0:e}")]
    EigenConvergence(f64),

    #[error("cutoff balls around points {0} and {1} overlap")]
    OverlappingCutoffs(usize, usize),

    #[error("isotopy profile violates the derivative bound: sup|Dphi|*|f| = {0}")]
    IsotopyBound(f64),

    #[error("surface is not embedded: {0}")]
    NotEmbedded(String),

    #[error("projection onto reference ambiguous for {ambiguous} of {total} vertices; use a larger collar or a slice closer to the blow-up")]
    AmbiguousProjection { ambiguous: usize, total: usize },

    #[error("pipeline stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn at_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
