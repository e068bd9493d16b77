use crate::model::Sign;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown {component} family `{name}`")]
    UnknownFamily { component: &'static str, name: String },

    #[error("parameter `{field}` out of range: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(
        "no root for side {side} at x = {x}: target psi(x)/x = {target:e} outside \
         u_tilde range [{lo:e}, {hi:e}] on the bracket"
    )]
    Bracket { side: Sign, x: f64, target: f64, lo: f64, hi: f64 },

    #[error("u_tilde is not strictly increasing on side {side} near s = {at:e}")]
    Monotonicity { side: Sign, at: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("proposal budget exceeded: {proposals} proposals, {accepted} accepted (cap {cap})")]
    BudgetExceeded { proposals: u64, accepted: u64, cap: u64 },

    #[error("corollary case mismatch: {0}")]
    CaseMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate binning: {0}")]
    Binning(String),

    #[error("at x = {x}: {source}")]
    AtThreshold { x: f64, source: Box<Error> },
}

impl Error {
    pub fn at(x: f64) -> impl FnOnce(Error) -> Error {
        move |e| Error::AtThreshold { x, source: Box::new(e) }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }

    /// True for failures of the numerical machinery (root brackets,
    /// quadrature, sampling budgets), as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        if let Error::AtThreshold { source, .. } = self {
            return source.is_numeric();
        }
        matches!(
            self,
            Error::Bracket { .. }
                | Error::Monotonicity { .. }
                | Error::NonConvergence(_)
                | Error::BudgetExceeded { .. }
                | Error::Domain(_)
        )
    }
}
