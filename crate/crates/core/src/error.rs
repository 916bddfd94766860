use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A supercritical speed is required everywhere in this crate.
    #[error("supercritical speed required: c > 1 (got {0})")]
    Subcritical(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("grid under-resolved: xi_max = {xi_max:.3} < {required}")]
    Resolution { xi_max: f64, required: f64 },

    #[error("no real Galilean shift normalizes B = {b} at c = {c} (discriminant {discriminant:.3e})")]
    NoRealShift { c: f64, b: f64, discriminant: f64 },

    #[error("iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("solve failed at c = {c}: {source}")]
    SweepFailure {
        c: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error("profile not decayed at the grid boundary: |value| = {boundary:.3e} > {limit:.3e}")]
    Truncation { boundary: f64, limit: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    TimeStep { dt: f64, bound: f64 },

    #[error("solution blew up at t = {t:.6}")]
    BlowUp { t: f64 },

    #[error("ambiguous crest in snapshot at t = {t:.4}: maxima at {crests:?}")]
    AmbiguousCrest { t: f64, crests: Vec<f64> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
