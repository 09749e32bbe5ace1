use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponential sums live on different lattices ({left:?} vs {right:?})")]
    ContextMismatch { left: (f64, f64), right: (f64, f64) },

    #[error("inverse operator is resonant at lattice key ({m}, {n}): |mu (mu^2 - lambda^2)| = {denominator:e} with lambda = {lambda}")]
    Resonance {
        m: i32,
        n: i32,
        lambda: f64,
        denominator: f64,
    },

    #[error("iteration order {order}: {source}")]
    Iteration {
        order: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation out of floating-point range at xi = {xi}")]
    Range { xi: f64 },

    #[error("denominator Q vanishes at xi = {xi}")]
    QVanishing { xi: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("lambda1 and lambda2 must be distinct (|lambda1 - lambda2| = {gap:e})")]
    DistinctRoots { gap: f64 },

    #[error("lambda1 = 2 lambda2 resonance (|lambda1 - 2 lambda2| = {gap:e})")]
    NearResonance { gap: f64 },

    #[error("correction index {index} not available (have {available})")]
    Index { index: usize, available: usize },

    #[error("point ({x}, {t}) lies outside the positive quadrant or the stencil leaves it")]
    Domain { x: f64, t: f64 },

    #[error("case boundary coincidence: {0}")]
    Unclassifiable(String),

    #[error("{0}")]
    NotImplemented(String),

    #[error("invalid sample: {0}")]
    Sample(String),

    #[error("parameter table row {row}: {message}")]
    Table { row: usize, message: String },

    #[error("bad input: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("at grid point (x = {x}, t = {t}): {source}")]
    AtGridPoint {
        x: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable machine-readable kind used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ContextMismatch { .. } => "context-mismatch",
            Error::Resonance { .. } => "resonance",
            Error::Iteration { source, .. } => source.kind(),
            Error::Range { .. } => "evaluation-range",
            Error::QVanishing { .. } => "q-vanishing",
            Error::InvalidParams(_) => "invalid-params",
            Error::DistinctRoots { .. } => "distinct-roots-violation",
            Error::NearResonance { .. } => "near-resonance",
            Error::Index { .. } => "index",
            Error::Domain { .. } => "domain",
            Error::Unclassifiable(_) => "unclassifiable",
            Error::NotImplemented(_) => "not-implemented",
            Error::Sample(_) => "invalid-sample",
            Error::Table { .. } => "table-parse",
            Error::Input(_) => "input",
            Error::Io(_) => "io",
            Error::AtGridPoint { source, .. } => source.kind(),
        }
    }

    /// True for errors caused by floating-point range or degenerate
    /// denominators rather than malformed input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Iteration { source, .. } | Error::AtGridPoint { source, .. } => {
                source.is_numeric()
            }
            Error::Range { .. } | Error::QVanishing { .. } | Error::Resonance { .. } => true,
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
