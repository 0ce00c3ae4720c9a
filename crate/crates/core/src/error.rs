use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{op}: dimension mismatch ({detail})")]
    Shape { op: &'static str, detail: String },

    #[error("{0}: non-finite entry")]
    NonFinite(&'static str),

    /// A Sylvester/Lyapunov operator with an eigenvalue pair summing to zero.
    #[error("{op}: singular operator, eigenvalue pair sums to {gap:.3e}")]
    SingularOperator { op: &'static str, gap: f64 },

    #[error("{0}: singular matrix")]
    Singular(&'static str),

    #[error("riccati: D'D is not positive definite (min eigenvalue {min_eig:.3e})")]
    CostNotPositive { min_eig: f64 },

    #[error("riccati: (A, B) is not stabilizable")]
    NotStabilizable,

    #[error("riccati: [A - jwI, B; C, D] loses column rank on the imaginary axis")]
    AxisRankDeficient,

    #[error("riccati: solution check failed ({0})")]
    AreCheck(String),

    #[error("{op}: matrix is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { op: &'static str, abscissa: f64 },

    #[error("{op}: eigenvalue within {tol:.1e} of the imaginary axis (re = {re:.3e})")]
    NearAxis { op: &'static str, re: f64, tol: f64 },

    #[error("{0}: iteration did not converge")]
    NoConvergence(&'static str),

    #[error("{op}: nonzero feedthrough, H2 norm is infinite")]
    Feedthrough { op: &'static str },

    #[error("{0}: interconnection is ill-posed")]
    IllPosed(&'static str),

    #[error("transfer function is not block-lower-triangular")]
    NotLowerTriangular,

    #[error("invalid plant: {0}")]
    InvalidPlant(String),

    #[error("assumption {0} failed")]
    Assumption(String),

    #[error("no block-lower-triangular stabilizing controller exists: {0}")]
    NotStructurallyStabilizable(String),

    #[error("{which} ARE failed: {source}")]
    SubAre {
        which: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("coupled linear equations inconsistent (residual {residual:.3e})")]
    Inconsistent { residual: f64 },

    #[error("{what} exceeds the size guard ({size} > {limit})")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("plant file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn sub_are(which: &'static str, source: Error) -> Self {
        Error::SubAre {
            which,
            source: Box::new(source),
        }
    }
}
