use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge {hi}-{lo} is resonant with more than one pulse component (ambiguous resonant amplitude)")]
    DoubleResonance { hi: String, lo: String },

    #[error("matrix is not Hermitian (max |H - H^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix dimensions do not match: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not unitary within {tol:.1e} (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("boundary leakage {leakage:.3e} exceeds threshold {threshold:.1e}; increase the coin truncation")]
    LeakageExceeded { leakage: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate rotation: {0}")]
    DegenerateRotation(String),

    #[error("loop-to-branches condition violated: B'/B* = {lhs} but C'/A'* = {rhs}")]
    ConditionViolated {
        lhs: num_complex::Complex64,
        rhs: num_complex::Complex64,
    },

    #[error("rotation support touches protected gate vertices: {0:?}")]
    ProtectedVertices(Vec<String>),

    #[error("no subgraph matches the {pattern} pattern")]
    NoMatch { pattern: String },

    #[error("ambiguous match: {count} subgraphs match the {pattern} pattern")]
    AmbiguousMatch { pattern: String, count: usize },

    #[error("infeasible integers: {0}")]
    InfeasibleIntegers(String),

    #[error("refinement stalled: residual {residual:.3e} above 1e-6")]
    RefinementStalled { residual: f64 },

    #[error("synthesis error: {0}")]
    Synthesis(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
