use thiserror::Error;

/// Errors produced by graph construction, parsing, solvers, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no records: cannot build an empty graph")]
    EmptyGraph,

    #[error("negative flow {flow} for pair ({origin}, {dest})")]
    NegativeFlow {
        origin: String,
        dest: String,
        flow: f64,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("{what}: requested dimension {d} exceeds limit {max}")]
    DimensionTooLarge {
        what: &'static str,
        d: usize,
        max: usize,
    },

    #[error("eigensolver did not converge: worst residual {residual:.3e} after {iterations} iterations")]
    EigensolverNoConvergence { residual: f64, iterations: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged {
        epoch: usize,
        trajectory: Vec<f64>,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("k = {k} exceeds number of points n = {n}")]
    TooManyClusters { k: usize, n: usize },

    #[error("graph has zero total edge weight; modularity is undefined")]
    ZeroWeightGraph,

    #[error("exhaustive partition search refused for n = {0} (limit 10)")]
    BruteForceTooLarge(usize),

    #[error("histogram bin edges differ between distributions")]
    BinEdgeMismatch,

    #[error("fewer than two communities carry income data")]
    NotEnoughIncomeCommunities,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyGraph => "empty_graph",
            Error::NegativeFlow { .. } => "negative_flow",
            Error::Parse { .. } => "parse",
            Error::MissingColumn(_) => "missing_column",
            Error::DimensionTooLarge { .. } => "dimension_too_large",
            Error::EigensolverNoConvergence { .. } => "eigensolver_no_convergence",
            Error::TrainingDiverged { .. } => "training_diverged",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::TooManyClusters { .. } => "too_many_clusters",
            Error::ZeroWeightGraph => "zero_weight_graph",
            Error::BruteForceTooLarge(_) => "brute_force_too_large",
            Error::BinEdgeMismatch => "bin_edge_mismatch",
            Error::NotEnoughIncomeCommunities => "not_enough_income_communities",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
