//! Error type shared by every module of the library.

/// Library-wide error. Variants carry enough context (offending argument names,
/// witness nodes, offending pairs) for a caller to print an actionable message
/// without re-deriving anything.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A Gamma-function argument went non-positive. `name` identifies *which*
    /// argument of the enclosing formula failed, e.g. `"P - Q - 1"` or
    /// `"(n+2)/p - 2"`; that is usually the whole diagnosis.
    #[error("gamma argument {name} = {value} is not positive")]
    GammaDomain { name: String, value: f64 },

    /// Parameter outside its analytic domain (exponents, dimensions, tolerances).
    #[error("domain: {0}")]
    Domain(String),

    /// Mesh construction or mesh/problem compatibility failure.
    #[error("mesh: {0}")]
    Mesh(String),

    /// Symmetry data rejected: non-involutive tau, broken commutation (with a
    /// witness node), overlapping bubble supports (with the offending pair),
    /// invalid splitting, or an empty constrained space.
    #[error("symmetry: {0}")]
    Symmetry(String),

    /// Variational solver failure: mountain geometry not established, far-point
    /// search diverged, or a Palais-Smale sequence refused to converge.
    #[error("solver: {0}")]
    Solver(String),

    /// The requested identity only makes sense on flat domains with boundary.
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// Configuration or input data malformed (tabulated field of wrong length,
    /// mismatched mesh/symmetry sizes, ...).
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
